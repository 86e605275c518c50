//! Self-contained audits: exact combinatorial identities, brute-force
//! equivalences on small instances and structural checks of the band tree.

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::ops::Pow;
use rug::{Float, Integer};
use serde::Serialize;

use crate::bands::{length_bounds_audit, BandTree, TraceMap, TransferContext};
use crate::error::Result;
use crate::frequency::{check_alpha, FrequencySpec};
use crate::symbolic::{
    auxiliary_matrix, charpoly_identity, divides_auxiliary_factor, enumerate_words, mat3_mul,
    BandType, BlockShift, ExactParry,
};
use crate::thermo::{brute_force_mean_cycles, closed_walk_mean_cycles, mean_cycles};

/// Seed for every sampled audit.
pub const AUDIT_SEED: u64 = 0x00a1_d175;
/// Energies probed by [`audit_trace`].
pub const TRACE_ENERGIES: usize = 25;
/// Quadruples sampled by [`audit_covariation`].
pub const COVARIATION_SAMPLES: usize = 500;
/// Accepted range `[1/η, η]` of the covariation double ratio.
pub const COVARIATION_ETA: f64 = 50.0;
/// Probe points per band for the monotonicity check.
pub const MONOTONICITY_PROBES: usize = 16;

const MAX_WITNESSES: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct AuditReport {
    pub name: String,
    pub passed: bool,
    pub checked: u64,
    pub witnesses: Vec<String>,
    /// Summary statistics, e.g. the empirical covariation spread.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub stats: Vec<(String, f64)>,
    pub elapsed_ms: u64,
}

struct Audit {
    name: String,
    start: Instant,
    checked: u64,
    failures: u64,
    witnesses: Vec<String>,
    stats: Vec<(String, f64)>,
}

impl Audit {
    fn new(name: String) -> Self {
        Self {
            name,
            start: Instant::now(),
            checked: 0,
            failures: 0,
            witnesses: Vec::new(),
            stats: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    fn finish(self) -> AuditReport {
        AuditReport {
            name: self.name,
            passed: self.failures == 0,
            checked: self.checked,
            witnesses: self.witnesses,
            stats: self.stats,
            elapsed_ms: self.start.elapsed().as_millis() as u64,
        }
    }
}

fn label(a: &[u32]) -> String {
    a.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

/// `#Ω_{a,n} = 1ᵀ A_a^{n−1} 1` for every length up to `n`.
pub fn audit_counts(a: &[u32], n: usize) -> Result<AuditReport> {
    let shift = BlockShift::new(a)?;
    let mut audit = Audit::new(format!("counts[{}]", label(a)));
    for len in 1..=n {
        let listed = enumerate_words(&shift, len)?.count();
        let formula = shift.incidence().word_count(len);
        audit.check(formula == listed.into(), || format!("n={len}: {listed} words, formula {formula}"));
    }
    Ok(audit.finish())
}

/// The characteristic-polynomial identity and the auxiliary factorization.
pub fn audit_charpoly(a: &[u32]) -> Result<AuditReport> {
    let mut audit = Audit::new(format!("charpoly[{}]", label(a)));
    audit.check(charpoly_identity(a)?, || "det(xI - A) != x^(N-3) det(xI - Â)".into());
    audit.check(divides_auxiliary_factor(a)?, || "(x - (-1)^k) det(xI - B) != det(xI - Â)".into());
    Ok(audit.finish())
}

/// Strict positivity of the fifth power of the auxiliary matrix.
pub fn audit_primitive(a: &[u32]) -> Result<AuditReport> {
    let mut audit = Audit::new(format!("primitive[{}]", label(a)));
    let m = auxiliary_matrix(a)?;
    let mut p = m.clone();
    for _ in 1..5 {
        p = mat3_mul(&p, &m);
    }
    let zero = BigInt::zero();
    for (i, row) in p.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            audit.check(*x > zero, || format!("entry ({i},{j}) of the fifth power is {x}"));
        }
    }
    Ok(audit.finish())
}

/// Largest block alphabet for simple-cycle enumeration.
pub const ENUMERATION_LIMIT: usize = 12;

/// Karp's mean cycles against exhaustive closed-walk minimization and, on
/// small alphabets, simple-cycle enumeration.
pub fn audit_mean_cycle(a: &[u32]) -> Result<AuditReport> {
    let shift = BlockShift::new(a)?;
    let mut audit = Audit::new(format!("mean_cycle[{}]", label(a)));
    let m = mean_cycles(a)?;
    let mut oracles = vec![("closed walks", closed_walk_mean_cycles(&shift))];
    if shift.len() <= ENUMERATION_LIMIT {
        oracles.push(("simple cycles", brute_force_mean_cycles(&shift)));
    }
    for (name, (lo, hi)) in oracles {
        audit.check(lo == m.f_lower, || format!("lower: Karp {} vs {name} {lo}", m.f_lower));
        audit.check(hi == m.f_upper, || format!("upper: Karp {} vs {name} {hi}", m.f_upper));
    }
    Ok(audit.finish())
}

/// `q_{kn}(α)/E_a^n` for `n ≤ n_max`: the range of the ratio and the largest
/// deviation from 1 of successive quotients over the second half.
pub fn audit_convergent_growth(a: &[u32], n_max: usize) -> Result<AuditReport> {
    let shift = BlockShift::new(a)?;
    let spec = FrequencySpec::periodic(a.to_vec())?;
    let k = a.len();
    let mut audit = Audit::new(format!("convergent_growth[{}]", label(a)));
    let bits = 256 + 8 * (k * n_max) as u32;
    let e = ExactParry::new(&shift)?.eigenvalue.to_float(bits);
    let conv = spec.convergents(k * n_max + 1);
    let ratios: Vec<f64> = (1..=n_max)
        .map(|n| {
            let q = Integer::from_str_radix(&conv.q((k * n) as i64).to_str_radix(16), 16).unwrap();
            (Float::with_val(bits, q) / Float::with_val(bits, (&e).pow(n as u32))).to_f64()
        })
        .collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0f64), |(l, h), &r| (l.min(r), h.max(r)));
    audit.check(lo > 0.0 && hi.is_finite(), || format!("ratio range [{lo}, {hi}]"));
    let drift = ratios[n_max / 2..]
        .windows(2)
        .map(|w| (w[1] / w[0] - 1.0).abs())
        .fold(0f64, f64::max);
    audit.check(drift <= 1e-9, || format!("successive ratios drift by {drift:e}"));
    audit.stats = vec![
        ("ratio_min".into(), lo),
        ("ratio_max".into(), hi),
        ("ratio_last".into(), ratios[n_max - 1]),
        ("drift".into(), drift),
    ];
    Ok(audit.finish())
}

fn fl(bits: u32, x: f64) -> Float {
    Float::with_val(bits, x)
}

/// `M_n(E)` as the direct product of the site matrices
/// `[[E − v_j, −1], [1, 0]]`, `v_j = λ(⌊(j+1)α⌋ − ⌊jα⌋)`, over `j = 1..q_n`.
pub fn site_product(ctx: &TransferContext, n: usize, e: f64, bits: u32) -> [Float; 4] {
    let spec = ctx.spec();
    let depth = n + 40;
    let q = ctx.spec().convergents(depth).q(n as i64).to_u64().expect("q_n fits in u64");
    let floors: Vec<BigInt> = (0..=q + 1)
        .map(|j| spec.floor_multiple(j, depth).expect("floor decided by the convergents"))
        .collect();
    let mut acc = [fl(bits, 1.0), fl(bits, 0.0), fl(bits, 0.0), fl(bits, 1.0)];
    for j in 1..=q as usize {
        let jump = (&floors[j + 1] - &floors[j]).to_f64().unwrap();
        let d = fl(bits, e - ctx.lambda() * jump);
        // [[d, -1], [1, 0]] · acc
        acc = [
            Float::with_val(bits, &d * &acc[0]) - &acc[2],
            Float::with_val(bits, &d * &acc[1]) - &acc[3],
            acc[0].clone(),
            acc[1].clone(),
        ];
    }
    acc
}

/// Trace recursion against direct site products at fixed random energies,
/// for every level with `q_n ≤ 200` up to `n_max`.
pub fn audit_trace(ctx: &TransferContext, n_max: usize) -> Result<AuditReport> {
    let bits = 1024;
    let ctx = TransferContext::new(ctx.spec().clone(), ctx.lambda(), bits)?;
    let mut audit = Audit::new(format!("trace[{}]", label(ctx.spec().period())));
    let mut rng = ChaCha8Rng::seed_from_u64(AUDIT_SEED);
    let lam = ctx.lambda();
    let energies: Vec<f64> = (0..TRACE_ENERGIES).map(|_| rng.gen_range(-3.0..lam + 3.0)).collect();
    let conv = ctx.spec().convergents(n_max + 1);
    let tm = TraceMap::new(&ctx, bits);
    for n in 1..=n_max {
        if *conv.q(n as i64) > BigInt::from(200) {
            break;
        }
        for &e in &energies {
            let m = site_product(&ctx, n, e, bits);
            let direct = Float::with_val(bits, &m[0] + &m[3]).to_f64();
            // tr M_n = h_{(n+1, 0)}
            let rec = tm.h(n + 1, 0, &fl(bits, e)).to_f64();
            let rel = (rec - direct).abs() / direct.abs().max(1.0);
            audit.check(rel <= 1e-9, || format!("n={n} E={e}: recursion {rec} vs product {direct}"));
        }
    }
    // outside both root bands the level-0 traces exceed 2 in modulus
    for e in [-2.5, 2.5, lam - 2.5, lam + 2.5] {
        let x = fl(bits, e);
        let (h1, h0) = (tm.h(0, 1, &x).to_f64(), tm.h(1, 0, &x).to_f64());
        audit.check(h1.abs() > 2.0 || h0.abs() > 2.0, || format!("E={e}: h = {h1}, {h0}"));
    }
    Ok(audit.finish())
}

/// Nesting, disjointness, child counts and types, interlacing, length
/// corridors and trace monotonicity on every band of `levels` levels.
pub fn audit_bands(a: &[u32], lambda: f64, levels: usize) -> Result<AuditReport> {
    let ctx = TransferContext::new(check_alpha(a)?, lambda, 64)?;
    let tree = BandTree::build(ctx.clone(), levels, None)?;
    let mut audit = Audit::new(format!("bands[{}]@{lambda}", label(a)));
    for n in 0..=levels {
        let level = tree.level(n);
        for w in level.windows(2) {
            audit.check(w[0].hi < w[1].lo, || format!("{} and {} overlap", w[0].word, w[1].word));
        }
        for b in level {
            audit.check(length_bounds_audit(&ctx, b), || {
                format!("{}: length {:e} outside the corridor", b.word, b.length_f64())
            });
            monotone(&ctx, b, &mut audit);
        }
        if n == levels {
            break;
        }
        let a_next = ctx.quotient(n + 1);
        for (i, b) in level.iter().enumerate() {
            let kids = &tree.level(n + 1)[tree.children(n, i)];
            let (c1, c2, c3) = crate::symbolic::child_counts(b.btype, a_next);
            let count = |t| kids.iter().filter(|k| k.btype == t).count() as u32;
            let got = (count(BandType::One), count(BandType::Two), count(BandType::Three));
            audit.check(got == (c1, c2, c3), || format!("{}: children {got:?}, expected {:?}", b.word, (c1, c2, c3)));
            for k in kids {
                audit.check(k.lo >= b.lo && k.hi <= b.hi && k.word.truncate(n) == b.word, || {
                    format!("{} not nested in {}", k.word, b.word)
                });
            }
            if b.btype != BandType::One {
                let alternates = kids.iter().enumerate().all(|(j, k)| {
                    k.btype == if j % 2 == 0 { BandType::One } else { BandType::Three }
                });
                audit.check(alternates, || format!("{}: children do not interlace", b.word));
            }
        }
    }
    Ok(audit.finish())
}

/// `h` is strictly monotone on a probe grid across the band and takes the
/// values `±2`, with opposite signs, at its ends.
fn monotone(ctx: &TransferContext, b: &crate::bands::Band, audit: &mut Audit) {
    let bits = b.lo.prec().max(b.hi.prec()) + 64;
    let tm = TraceMap::new(ctx, bits);
    let (m, p) = b.trace_handle;
    let len = Float::with_val(bits, &b.hi - &b.lo);
    let values: Vec<f64> = (0..=MONOTONICITY_PROBES)
        .map(|i| {
            let x = Float::with_val(bits, &len * (i as f64 / MONOTONICITY_PROBES as f64)) + &b.lo;
            tm.h(m, p, &x).to_f64()
        })
        .collect();
    let (first, last) = (values[0], values[MONOTONICITY_PROBES]);
    let ends = (first.abs() - 2.0).abs() < 1e-6 && (last.abs() - 2.0).abs() < 1e-6 && first * last < 0.0;
    let up = values.windows(2).all(|w| w[0] < w[1]);
    let down = values.windows(2).all(|w| w[0] > w[1]);
    audit.check(ends && (up || down), || format!("{}: h not monotone from {first} to {last}", b.word));
}

/// Double ratios `(|B_{wu}|/|B_w|) / (|B_{w̃u}|/|B_{w̃}|)` over random
/// quadruples with `t(w) = t(w̃)`, inside `[1/η, η]`.
pub fn audit_covariation(a: &[u32], lambda: f64, depth: usize, samples: usize, seed: u64) -> Result<AuditReport> {
    let ctx = TransferContext::new(check_alpha(a)?, lambda, 64)?;
    let tree = BandTree::build(ctx, depth, None)?;
    let mut audit = Audit::new(format!("covariation[{}]@{lambda}", label(a)));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut lo, mut hi) = (f64::INFINITY, 0f64);
    let mut drawn = 0;
    while drawn < samples {
        // w̃ must sit at a level with the same partial quotients below it
        let n = 1 + rng.gen_range(0..depth - 1);
        let m = n + 1 + rng.gen_range(0..depth - n);
        let level = tree.level(n);
        let i = rng.gen_range(0..level.len());
        let mates: Vec<usize> = (0..level.len())
            .filter(|&j| j != i && level[j].btype == level[i].btype)
            .collect();
        if mates.is_empty() {
            continue;
        }
        let j = mates[rng.gen_range(0..mates.len())];
        // random descent from w; the same letters lead down from w̃
        let (mut x, mut y) = (i, j);
        let mut ok = true;
        for l in n..m {
            let kx = tree.children(l, x);
            let pick = rng.gen_range(kx.clone());
            let letter = &tree.level(l + 1)[pick].word.letters[l];
            let found = tree.children(l, y).find(|&c| &tree.level(l + 1)[c].word.letters[l] == letter);
            match found {
                Some(c) => {
                    x = pick;
                    y = c;
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        audit.check(ok, || format!("level {n}: continuation of band {i} not admissible below band {j}"));
        drawn += 1;
        if !ok {
            continue;
        }
        let log_len = |l: usize, k: usize| tree.level(l)[k].log_length();
        let r = ((log_len(m, x) - log_len(n, i)) - (log_len(m, y) - log_len(n, j))).exp();
        lo = lo.min(r);
        hi = hi.max(r);
        audit.check((1.0 / COVARIATION_ETA..=COVARIATION_ETA).contains(&r), || {
            format!("{} / {} below level {n}: double ratio {r}", tree.level(n)[i].word, tree.level(n)[j].word)
        });
    }
    audit.stats = vec![("ratio_min".into(), lo), ("ratio_max".into(), hi), ("eta_hat".into(), hi.max(1.0 / lo))];
    Ok(audit.finish())
}

/// Options for [`run_suite`].
#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub a: Vec<u32>,
    pub lambda: f64,
    pub deep: bool,
    pub seed: u64,
    /// Keep only audits whose name starts with one of these.
    pub only: Vec<String>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            a: vec![1],
            lambda: 24.0,
            deep: false,
            seed: AUDIT_SEED,
            only: Vec::new(),
        }
    }
}

type Job = Box<dyn Fn() -> Result<AuditReport> + Send + Sync>;

/// The audit suite for one period, plus `(2,3)` when `deep`; reports sorted
/// by name.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<AuditReport>> {
    use rayon::prelude::*;
    let mut periods = vec![cfg.a.clone()];
    if cfg.deep && cfg.a != [2, 3] {
        periods.push(vec![2, 3]);
    }
    let mut jobs: Vec<(String, Job)> = Vec::new();
    for a in periods {
        let (lam, seed) = (cfg.lambda, cfg.seed);
        let count_len = if BlockShift::new(&a)?.len() > 8 { 4 } else { 6 };
        let band_levels = if a.iter().sum::<u32>() as usize > 2 * a.len() { 4 } else { 6 };
        let x = a.clone();
        jobs.push(("counts".into(), Box::new(move || audit_counts(&x, count_len))));
        let x = a.clone();
        jobs.push(("charpoly".into(), Box::new(move || audit_charpoly(&x))));
        let x = a.clone();
        jobs.push(("primitive".into(), Box::new(move || audit_primitive(&x))));
        let x = a.clone();
        jobs.push(("mean_cycle".into(), Box::new(move || audit_mean_cycle(&x))));
        let x = a.clone();
        jobs.push(("convergent_growth".into(), Box::new(move || audit_convergent_growth(&x, 40))));
        let x = a.clone();
        jobs.push((
            "trace".into(),
            Box::new(move || audit_trace(&TransferContext::new(check_alpha(&x)?, lam, 64)?, 30)),
        ));
        let x = a.clone();
        jobs.push(("bands".into(), Box::new(move || audit_bands(&x, lam, band_levels))));
        let x = a.clone();
        jobs.push((
            "covariation".into(),
            Box::new(move || audit_covariation(&x, lam, band_levels + 2, COVARIATION_SAMPLES, seed)),
        ));
    }
    jobs.retain(|(name, _)| cfg.only.is_empty() || cfg.only.iter().any(|o| name.starts_with(o.as_str())));
    let mut reports = jobs.par_iter().map(|(_, job)| job()).collect::<Result<Vec<_>>>()?;
    reports.sort_by(|x, y| x.name.cmp(&y.name));
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_brute_force() {
        // every tuple of blocks, filtered by admissibility
        let shift = BlockShift::new(&[1]).unwrap();
        let m = shift.len();
        let brute = (0..m.pow(3))
            .filter(|&x| shift.is_admissible(&[x % m, (x / m) % m, x / (m * m)]))
            .count();
        assert_eq!(brute, 10);
        assert_eq!(enumerate_words(&shift, 3).unwrap().count(), 10);
        for (a, n) in [(vec![1], 8), (vec![2], 5), (vec![1, 2], 4)] {
            let r = audit_counts(&a, n).unwrap();
            assert!(r.passed && r.checked == n as u64, "{r:?}");
        }
    }

    #[test]
    fn charpoly_and_primitivity() {
        for a in [vec![1], vec![3], vec![1, 2, 1], vec![4, 4]] {
            assert!(audit_charpoly(&a).unwrap().passed, "{a:?}");
            assert!(audit_primitive(&a).unwrap().passed, "{a:?}");
        }
    }

    #[test]
    fn mean_cycles_both_ways() {
        for a in [vec![1, 1], vec![1], vec![2, 2], vec![2, 3]] {
            let r = audit_mean_cycle(&a).unwrap();
            let oracles = if BlockShift::new(&a).unwrap().len() <= ENUMERATION_LIMIT { 2 } else { 1 };
            assert!(r.passed && r.checked == 2 * oracles, "{r:?}");
        }
    }

    #[test]
    fn growth_of_denominators() {
        let r = audit_convergent_growth(&[1, 2], 40).unwrap();
        assert!(r.passed, "{r:?}");
        // q_n = F_{n+1} for the golden mean, so q_n/φ^n → φ/√5
        let r = audit_convergent_growth(&[1], 40).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let last = r.stats.iter().find(|s| s.0 == "ratio_last").unwrap().1;
        assert!((last - phi / 5f64.sqrt()).abs() < 1e-12, "{last}");
    }

    #[test]
    fn traces_against_site_products() {
        for (a, n) in [(vec![1], 9), (vec![1, 2], 6)] {
            let ctx = TransferContext::new(check_alpha(&a).unwrap(), 24.0, 64).unwrap();
            let r = audit_trace(&ctx, n).unwrap();
            assert!(r.passed, "{r:?}");
            assert!(r.checked >= (TRACE_ENERGIES * (n - 2)) as u64);
        }
    }

    #[test]
    fn band_structure() {
        for (a, lambda, levels) in [(vec![1], 24.0, 6), (vec![2, 3], 24.0, 5), (vec![1], 100.0, 6)] {
            let r = audit_bands(&a, lambda, levels).unwrap();
            assert!(r.passed, "{r:?}");
        }
    }

    #[test]
    fn covariation_is_bounded() {
        let r = audit_covariation(&[1], 24.0, 8, COVARIATION_SAMPLES, AUDIT_SEED).unwrap();
        assert!(r.passed, "{r:?}");
        let eta = r.stats.iter().find(|s| s.0 == "eta_hat").unwrap().1;
        assert!((1.0..COVARIATION_ETA).contains(&eta));
        let again = audit_covariation(&[1], 24.0, 8, COVARIATION_SAMPLES, AUDIT_SEED).unwrap();
        assert_eq!(r.stats, again.stats);
    }

    #[test]
    fn failures_keep_witnesses() {
        let mut audit = Audit::new("probe".into());
        for i in 0..30 {
            audit.check(i % 2 == 0, || format!("odd {i}"));
        }
        let r = audit.finish();
        assert!(!r.passed);
        assert_eq!(r.checked, 30);
        assert_eq!(r.witnesses.len(), 15);
        assert_eq!(r.witnesses[0], "odd 1");
    }

    #[test]
    fn suite_filters_and_orders() {
        let cfg = SuiteConfig {
            only: vec!["charpoly".into(), "mean".into()],
            ..SuiteConfig::default()
        };
        let r = run_suite(&cfg).unwrap();
        let names: Vec<_> = r.iter().map(|x| x.name.as_str()).collect();
        assert_eq!(names, ["charpoly[1]", "mean_cycle[1]"]);
        let deep = run_suite(&SuiteConfig { deep: true, ..cfg }).unwrap();
        assert_eq!(deep.len(), 4);
        assert!(deep.iter().all(|x| x.passed));
    }
}
