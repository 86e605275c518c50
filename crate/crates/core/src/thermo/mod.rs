//! Thermodynamic formalism on the coding shift: the geometric potential
//! `ψ_n(w) = log |B_{ι(w)}|`, finite-level and extrapolated pressure, its
//! derivatives and limits, and the Bowen root.

pub mod cycles;
pub mod operator;

use std::collections::HashMap;

use serde::Serialize;

use crate::bands::{band_for_word, BandTree, TransferContext};
use crate::error::{Error, Result};
use crate::frequency::check_alpha;
use crate::symbolic::{iota, BlockLetter, BlockShift, BlockWord, CodeWord};

pub use operator::{Operator, Spectral};
pub use cycles::{
    birkhoff_weight, brute_force_mean_cycles, closed_walk_mean_cycles, cycle_mean, mean_cycles, MeanCycleResult,
};

/// Finite-difference step for `P'`.
pub const DERIVATIVE_STEP: f64 = 1e-4;
/// Abscissa used by the far-field estimator of `P'(±∞)`.
pub const FAR_FIELD: f64 = 8.0;
const ROOT_TOL: f64 = 1e-10;

/// Depth limits for the word enumeration behind the pressure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Depth {
    /// Largest word length `N`.
    pub max_len: usize,
    /// Largest number of bands on any level of the tree.
    pub budget: u64,
}

impl Default for Depth {
    fn default() -> Self {
        Self {
            max_len: 12,
            budget: 20_000,
        }
    }
}

/// `ψ_n(w)` for one word.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialSample {
    pub word: BlockWord,
    pub value: f64,
}

pub(crate) fn context(a: &[u32], lambda: f64) -> Result<TransferContext> {
    TransferContext::new(check_alpha(a)?, lambda, 64)
}

/// `ψ_n(w)`, the log length of the band coded by `ι(w)`.
pub fn psi(a: &[u32], lambda: f64, w: &BlockWord) -> Result<PotentialSample> {
    let shift = BlockShift::new(a)?;
    if w.is_empty() || !shift.is_admissible(w.blocks()) {
        return Err(Error::Inadmissible(format!("{:?}", w.blocks())));
    }
    let ctx = context(a, lambda)?;
    let band = band_for_word(&ctx, &iota(&shift, w))?;
    Ok(PotentialSample {
        word: w.clone(),
        value: band.log_length(),
    })
}

/// `(S_n f · log τ₂ − 3n Σ log a_i − log τ₂,  S_n f · log τ₁ + log 4)`.
pub fn psi_corridor(a: &[u32], lambda: f64, w: &BlockWord) -> Result<(f64, f64)> {
    let shift = BlockShift::new(a)?;
    let (lt1, lt2) = (((lambda - 8.0) / 3.0).ln(), (2.0 * (lambda + 5.0)).ln());
    let snf: i64 = w.blocks().iter().map(|&b| birkhoff_weight(a, shift.block(b))).sum();
    let snf = snf as f64;
    let n = w.len() as f64;
    let log_a: f64 = a.iter().map(|&x| (x as f64).ln()).sum();
    Ok((snf * lt2 - 3.0 * n * log_a - lt2, snf * lt1 + 4f64.ln()))
}

/// Band length of the longest common prefix of two paths; `0` when equal and
/// `1` when they differ in the first block.
pub fn weak_gibbs_distance(a: &[u32], lambda: f64, v: &BlockWord, w: &BlockWord) -> Result<f64> {
    if v == w {
        return Ok(0.0);
    }
    let n = v.blocks().iter().zip(w.blocks()).take_while(|(x, y)| x == y).count();
    if n == 0 {
        return Ok(1.0);
    }
    Ok(psi(a, lambda, &v.prefix(n))?.value.exp())
}

/// `log Σ exp(x_i)`, summed in the given order.
fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// The potential sampled on all words of lengths `1..=N`.
#[derive(Clone, Debug)]
pub struct Potential {
    shift: BlockShift,
    lambda: f64,
    /// `levels[n - 1]` holds `ψ_n` over all words of length `n`.
    levels: Vec<Vec<f64>>,
    /// `words[n - 1]` holds the block words of `levels[n - 1]`.
    words: Vec<Vec<BlockWord>>,
    /// Transfer matrices on words of lengths `N − 1` and `N − 2`.
    operators: [Operator; 2],
    /// Largest spread of the deepest increments over words that share all
    /// but their first block.
    locality: f64,
    truncated: bool,
}

/// Block word of a band at level `nk + 1` of the tree of `[1, (a)*]`.
fn block_word(shift: &BlockShift, word: &CodeWord) -> Result<BlockWord> {
    word.letters[1..]
        .chunks(shift.k())
        .map(|c| {
            shift
                .index_of(&BlockLetter(c.to_vec()))
                .ok_or_else(|| Error::Invariant(format!("band {word} is not a block word")))
        })
        .collect::<Result<Vec<_>>>()
        .map(BlockWord)
}

impl Potential {
    /// Enumerates words up to `depth.max_len`, stopping early (and flagging
    /// the result) when the next band level would exceed the budget.
    pub fn new(a: &[u32], lambda: f64, depth: Depth) -> Result<Self> {
        let shift = BlockShift::new(a)?;
        let k = shift.k();
        let mut tree = BandTree::new(context(a, lambda)?);
        let target = depth.max_len * k + 1;
        let mut truncated = false;
        while tree.depth() < target {
            if tree.next_level_size() > depth.budget {
                truncated = true;
                break;
            }
            tree.grow()?;
        }
        let n_max = (tree.depth().saturating_sub(1)) / k;
        if n_max < 3 {
            return Err(Error::Budget {
                enumerated: tree.next_level_size(),
                cap: depth.budget,
            });
        }
        let mut levels = Vec::with_capacity(n_max);
        let mut words = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            let bands = tree.level(n * k + 1);
            levels.push(bands.iter().map(|b| b.log_length()).collect::<Vec<f64>>());
            words.push(bands.iter().map(|b| block_word(&shift, &b.word)).collect::<Result<Vec<_>>>()?);
        }
        let operator = |m: usize| -> Operator {
            // words of length m are edges between words of length m - 1
            let index: HashMap<&[usize], u32> = words[m - 2]
                .iter()
                .enumerate()
                .map(|(i, w)| (w.blocks(), i as u32))
                .collect();
            let edges = words[m - 1]
                .iter()
                .zip(&levels[m - 1])
                .map(|(w, &psi)| {
                    let b = w.blocks();
                    let p = index[&b[..m - 1]];
                    let s = index[&b[1..]];
                    (p, s, psi - levels[m - 2][p as usize])
                })
                .collect();
            Operator::new(words[m - 2].len(), edges)
        };
        let operators = [operator(n_max), operator(n_max - 1)];
        let mut range: HashMap<u32, (f64, f64)> = HashMap::new();
        for &(_, q, phi) in operators[0].edges() {
            let r = range.entry(q).or_insert((phi, phi));
            *r = (r.0.min(phi), r.1.max(phi));
        }
        let locality = range.values().map(|(lo, hi)| hi - lo).fold(0.0, f64::max);
        Ok(Self {
            shift,
            lambda,
            levels,
            words,
            operators,
            locality,
            truncated,
        })
    }

    pub fn shift(&self) -> &BlockShift {
        &self.shift
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Largest word length `N` available.
    pub fn max_len(&self) -> usize {
        self.levels.len()
    }

    /// Whether the budget stopped the enumeration short of the requested depth.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// `ψ_n` over all words of length `n`, in ascending band order.
    pub fn values(&self, n: usize) -> &[f64] {
        &self.levels[n - 1]
    }

    /// The words matching [`Potential::values`].
    pub fn words(&self, n: usize) -> &[BlockWord] {
        &self.words[n - 1]
    }

    /// `ψ_n(w)` for a word of length `n ≤ N`.
    pub fn value(&self, w: &BlockWord) -> Option<f64> {
        let n = w.len();
        if n == 0 || n > self.max_len() {
            return None;
        }
        let i = self.words(n).iter().position(|x| x == w)?;
        Some(self.values(n)[i])
    }

    /// Spread of the increment potential over the first block of a word of
    /// length `N`; twice this bounds the potential error per step.
    pub fn locality(&self) -> f64 {
        self.locality
    }

    /// The transfer matrix on words of length `N − 1`.
    pub fn operator(&self) -> &Operator {
        &self.operators[0]
    }

    /// `log Z_n(s) = log Σ_{|w|=n} exp(s ψ_n(w))`.
    pub fn log_partition(&self, n: usize, s: f64) -> f64 {
        let v = self.values(n);
        log_sum_exp(v.iter().map(move |&x| s * x))
    }

    /// `P_n(s) = log Z_n(s) / n`.
    pub fn pressure_n(&self, n: usize, s: f64) -> f64 {
        self.log_partition(n, s) / n as f64
    }

    /// Extrapolated pressure at `s`, with an error from the two deepest
    /// operators and the locality of the increments, and the `Ĉ/N` bracket of
    /// the plain averages.
    pub fn pressure(&self, s: f64) -> PressureEstimate {
        let n = self.max_len();
        let p_n: Vec<f64> = (1..=n).map(|m| self.pressure_n(m, s)).collect();
        let value = self.operators[0].spectral(s).log_radius;
        let coarse = self.operators[1].spectral(s).log_radius;
        let c_hat = -(n as f64) * ((n - 1) as f64) * (p_n[n - 1] - p_n[n - 2]);
        PressureEstimate {
            s,
            p_n,
            value,
            error: (value - coarse).abs().max(2.0 * s.abs() * self.locality),
            bracket: (c_hat / n as f64).abs(),
        }
    }

    /// Extrapolated `P(s)` only.
    pub fn pressure_value(&self, s: f64) -> f64 {
        self.operators[0].spectral(s).log_radius
    }

    /// `P'(s)` by Richardson-refined central differences of the extrapolated
    /// pressure.
    pub fn derivative(&self, s: f64) -> f64 {
        let h = DERIVATIVE_STEP;
        let d = |h: f64| (self.pressure_value(s + h) - self.pressure_value(s - h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    /// `P'(−∞)` and `P'(+∞)` as extreme cycle means of the increment
    /// potential, with the level-extreme slopes and the far-field slopes of
    /// the pressure as independent estimates.
    pub fn limits(&self) -> PressureLimits {
        let cycles = cycles::mean_cycles_of(&self.shift);
        let extremes = |pick: fn(f64, f64) -> f64, init: f64| -> Vec<f64> {
            self.levels.iter().map(|l| l.iter().copied().fold(init, pick)).collect()
        };
        let [fine, coarse] = &self.operators;
        let bound = 2.0 * self.locality;
        let minus = {
            let (v, c) = (fine.min_cycle_mean().0, coarse.min_cycle_mean().0);
            LimitEstimate::new(v, (v - c).abs().max(bound), &extremes(f64::min, f64::INFINITY), cycles.lower_witness.len(), self.derivative(-FAR_FIELD))
        };
        let plus = {
            let (v, c) = (fine.max_cycle_mean().0, coarse.max_cycle_mean().0);
            LimitEstimate::new(v, (v - c).abs().max(bound), &extremes(f64::max, f64::NEG_INFINITY), cycles.upper_witness.len(), self.derivative(FAR_FIELD))
        };
        PressureLimits { minus, plus }
    }

    /// The unique zero of the extrapolated pressure in `(0, 1)`.
    pub fn bowen_root(&self) -> Result<BowenRoot> {
        let f = |s: f64| self.pressure_value(s);
        let (lo, hi) = (0.0, 1.0);
        let (p_lo, p_hi) = (f(lo), f(hi));
        if !(p_lo > 0.0 && p_hi < 0.0) {
            return Err(Error::NoRoot { lo, hi, p_lo, p_hi });
        }
        let root = brent(f, lo, hi, p_lo, p_hi, ROOT_TOL);
        let est = self.pressure(root);
        Ok(BowenRoot {
            value: root,
            residual: est.value.abs(),
            error: est.error / self.derivative(root).abs(),
        })
    }

    /// Pressure, error and slope over an evenly spaced grid.
    pub fn curve(&self, s_min: f64, s_max: f64, steps: usize) -> Result<PressureCurve> {
        if !(s_min < s_max) || steps < 2 {
            return Err(Error::InvalidInput(format!(
                "need s_min < s_max and steps >= 2, got [{s_min}, {s_max}] with {steps}"
            )));
        }
        let grid = (0..steps)
            .map(|i| {
                let s = s_min + (s_max - s_min) * i as f64 / (steps - 1) as f64;
                let est = self.pressure(s);
                CurvePoint {
                    s,
                    p_n: est.p_n,
                    p: est.value,
                    p_err: est.error.max(est.bracket),
                    dp: self.derivative(s),
                }
            })
            .collect();
        let limits = self.limits();
        Ok(PressureCurve {
            a: self.shift.period().to_vec(),
            lambda: self.lambda,
            max_len: self.max_len(),
            truncated: self.truncated,
            grid,
            pprime_minus_inf: limits.minus.value,
            pprime_plus_inf: limits.plus.value,
            bowen_root: self.bowen_root()?.value,
        })
    }
}

/// Brent's method on a bracket with `f(lo)` and `f(hi)` of opposite sign.
pub(crate) fn brent(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> f64 {
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if fb == 0.0 {
            return b;
        }
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let m = 0.5 * (c - b);
        let t = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        if m.abs() <= t {
            return b;
        }
        if e.abs() >= t && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * m * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * m * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * m * q - (t * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = m;
                e = m;
            }
        } else {
            d = m;
            e = m;
        }
        a = b;
        fa = fb;
        b += if d.abs() > t { d } else { t * m.signum() };
        fb = f(b);
    }
    b
}

/// Finite-level and extrapolated pressure at one `s`.
#[derive(Clone, Debug, Serialize)]
pub struct PressureEstimate {
    pub s: f64,
    /// `P_n(s)` for `n = 1..=N`.
    pub p_n: Vec<f64>,
    pub value: f64,
    /// Change between the two deepest operators, or the locality bound if
    /// larger.
    pub error: f64,
    /// `|Ĉ| / N` with `Ĉ = −N(N−1)(P_N − P_{N−1})`.
    pub bracket: f64,
}

/// One estimate of `P'(±∞)`.
#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    /// Extreme cycle mean of the increment potential.
    pub value: f64,
    /// Change between the two deepest operators, or the locality bound.
    pub error: f64,
    /// Slope of the level extremes of `ψ_n` over the last `step` levels.
    pub extremes: f64,
    /// Change of that slope between the last two levels.
    pub extremes_error: f64,
    pub step: usize,
    /// `P'(∓8)` of the extrapolated pressure.
    pub far_field: f64,
}

impl LimitEstimate {
    fn new(value: f64, error: f64, ext: &[f64], cycle: usize, far_field: f64) -> Self {
        let n = ext.len();
        let step = cycle.clamp(1, n - 2);
        let slope = |m: usize| (ext[m - 1] - ext[m - 1 - step]) / step as f64;
        Self {
            value,
            error,
            extremes: slope(n),
            extremes_error: (slope(n) - slope(n - 1)).abs(),
            step,
            far_field,
        }
    }

    /// Largest distance between the three estimates.
    pub fn disagreement(&self) -> f64 {
        let v = [self.value, self.extremes, self.far_field];
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureLimits {
    pub minus: LimitEstimate,
    pub plus: LimitEstimate,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BowenRoot {
    pub value: f64,
    pub residual: f64,
    pub error: f64,
}

/// Pressure curve data, one point per grid abscissa.
#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub s: f64,
    #[serde(rename = "P_n")]
    pub p_n: Vec<f64>,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "P_err")]
    pub p_err: f64,
    #[serde(rename = "dP")]
    pub dp: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PressureCurve {
    pub a: Vec<u32>,
    pub lambda: f64,
    pub max_len: usize,
    pub truncated: bool,
    pub grid: Vec<CurvePoint>,
    #[serde(rename = "Pprime_minus_inf")]
    pub pprime_minus_inf: f64,
    #[serde(rename = "Pprime_plus_inf")]
    pub pprime_plus_inf: f64,
    pub bowen_root: f64,
}

/// Extrapolated pressure at `s` from words of length up to `n`.
pub fn pressure(a: &[u32], lambda: f64, s: f64, n: usize) -> Result<PressureEstimate> {
    let depth = Depth {
        max_len: n,
        ..Depth::default()
    };
    Ok(Potential::new(a, lambda, depth)?.pressure(s))
}

/// `P'(s)` at the default depth.
pub fn pressure_derivative(a: &[u32], lambda: f64, s: f64) -> Result<f64> {
    Ok(Potential::new(a, lambda, Depth::default())?.derivative(s))
}

/// `(P'(−∞), P'(+∞))` from words of length up to `n`.
pub fn pressure_limits(a: &[u32], lambda: f64, n: usize) -> Result<PressureLimits> {
    let depth = Depth {
        max_len: n,
        ..Depth::default()
    };
    Ok(Potential::new(a, lambda, depth)?.limits())
}

/// The zero of the pressure at the default depth.
pub fn bowen_root(a: &[u32], lambda: f64) -> Result<BowenRoot> {
    Potential::new(a, lambda, Depth::default())?.bowen_root()
}

#[cfg(test)]
mod tests {
    use std::sync::OnceLock;

    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    use super::*;
    use crate::symbolic::enumerate_words;

    fn golden() -> &'static Potential {
        static P: OnceLock<Potential> = OnceLock::new();
        P.get_or_init(|| {
            Potential::new(&[1], 24.0, Depth {
                max_len: 10,
                budget: 20_000,
            })
            .unwrap()
        })
    }

    fn silver() -> &'static Potential {
        static P: OnceLock<Potential> = OnceLock::new();
        P.get_or_init(|| {
            Potential::new(&[2], 24.0, Depth {
                max_len: 7,
                budget: 20_000,
            })
            .unwrap()
        })
    }

    fn log_e(a: &[u32]) -> f64 {
        crate::symbolic::perron(&BlockShift::new(a).unwrap()).unwrap().eigenvalue.ln()
    }

    #[test]
    fn psi_single_block() {
        let shift = BlockShift::new(&[1]).unwrap();
        let w = BlockWord::parse(&shift, "2:1@1").unwrap();
        let s = psi(&[1], 24.0, &w).unwrap();
        assert!(s.value < 0.0);
        let (lo, hi) = psi_corridor(&[1], 24.0, &w).unwrap();
        assert!(lo <= s.value && s.value <= hi, "{lo} {} {hi}", s.value);
        // agrees with the tree
        assert!((golden().value(&w).unwrap() - s.value).abs() < 1e-12);
    }

    #[test]
    fn psi_corridor_and_upper_bound_to_length_five() {
        for (a, pot) in [(vec![1], golden()), (vec![2], silver())] {
            let k = a.len() as f64;
            for n in 1..=5 {
                for (w, &v) in pot.words(n).iter().zip(pot.values(n)) {
                    let (lo, hi) = psi_corridor(&a, 24.0, w).unwrap();
                    assert!(lo <= v && v <= hi, "{a:?} {w:?}: {lo} <= {v} <= {hi}");
                    assert!(v <= (1.0 - n as f64 * k) * 2f64.ln() + 1e-12);
                }
            }
        }
    }

    #[test]
    fn tree_words_are_all_admissible_words() {
        let pot = golden();
        let shift = pot.shift();
        for n in 1..=6 {
            let mut from_tree = pot.words(n).to_vec();
            from_tree.sort();
            let all: Vec<BlockWord> = enumerate_words(shift, n).unwrap().collect();
            assert_eq!(from_tree, all, "n = {n}");
        }
    }

    #[test]
    fn weak_gibbs_distance_cases() {
        let words = golden().words(3);
        let (v, w) = (&words[0], &words[1]);
        assert_eq!(weak_gibbs_distance(&[1], 24.0, v, v).unwrap(), 0.0);
        let d = weak_gibbs_distance(&[1], 24.0, v, w).unwrap();
        assert_eq!(d, weak_gibbs_distance(&[1], 24.0, w, v).unwrap());
        let n = v.blocks().iter().zip(w.blocks()).take_while(|(x, y)| x == y).count();
        let expected = if n == 0 { 1.0 } else { golden().value(&v.prefix(n)).unwrap().exp() };
        assert!((d - expected).abs() <= 1e-12 * expected);
        let other = words.iter().find(|x| x.blocks()[0] != v.blocks()[0]).unwrap();
        assert_eq!(weak_gibbs_distance(&[1], 24.0, v, other).unwrap(), 1.0);
    }

    #[test]
    fn zero_pressure_counts_words() {
        for (a, pot) in [(vec![1], golden()), (vec![2], silver())] {
            let inc = pot.shift().incidence();
            for n in 1..=pot.max_len() {
                let count = inc.word_count(n).to_f64().unwrap();
                assert!((pot.pressure_n(n, 0.0) - count.ln() / n as f64).abs() < 1e-12, "{a:?} {n}");
            }
            assert!((pot.pressure(0.0).value - log_e(&a)).abs() < 1e-12);
        }
        assert!((log_e(&[1]) - 0.48121).abs() < 1e-5);
    }

    #[test]
    fn finite_pressures_strictly_decrease() {
        let pot = golden();
        for n in 1..=pot.max_len() {
            let mut prev = f64::INFINITY;
            for i in -8..=12 {
                let p = pot.pressure_n(n, i as f64 / 4.0);
                assert!(p < prev);
                prev = p;
            }
        }
    }

    #[test]
    fn extrapolated_pressure_is_convex_and_decreasing() {
        for pot in [golden(), silver()] {
            let h = 0.05;
            let p: Vec<f64> = (0..=100).map(|i| pot.pressure_value(-2.0 + h * i as f64)).collect();
            for w in p.windows(3) {
                assert!(w[1] < w[0]);
                assert!(w[0] - 2.0 * w[1] + w[2] >= -1e-8);
            }
        }
    }

    #[test]
    fn derivative_matches_equilibrium_average() {
        for pot in [golden(), silver()] {
            let mut prev = f64::NEG_INFINITY;
            for s in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let d = pot.derivative(s);
                let exact = pot.operator().spectral(s).slope;
                assert!((d - exact).abs() < 1e-7, "{s}: {d} vs {exact}");
                assert!(d < 0.0 && d > prev);
                prev = d;
            }
        }
    }

    #[test]
    fn limits_order_and_agree() {
        for pot in [golden(), silver()] {
            let lim = pot.limits();
            let d0 = pot.derivative(0.0);
            assert!(lim.minus.value < d0 && d0 < lim.plus.value && lim.plus.value < 0.0);
            assert!((lim.minus.value - lim.minus.extremes).abs() < 1e-4);
            assert!((lim.plus.value - lim.plus.extremes).abs() < 1e-4);
            // the far-field slopes approach from inside
            assert!(lim.minus.value <= lim.minus.far_field && lim.plus.far_field <= lim.plus.value);
            assert!(lim.minus.disagreement() < 0.01 * lim.minus.value.abs());
            assert!(lim.plus.disagreement() < 0.01 * lim.plus.value.abs());
        }
    }

    #[test]
    fn bowen_root_in_unit_interval() {
        let r = golden().bowen_root().unwrap();
        assert!(r.value > 0.0 && r.value < 1.0);
        assert!(golden().pressure_value(r.value).abs() < 1e-9);
        assert!(r.residual < 1e-9);
    }

    #[test]
    fn curve_shape() {
        let c = golden().curve(-1.0, 2.0, 13).unwrap();
        assert_eq!(c.grid.len(), 13);
        assert_eq!(c.grid[4].s, 0.0);
        assert!(c.grid.windows(2).all(|w| w[1].p < w[0].p));
        let json = serde_json::to_value(&c).unwrap();
        for key in ["a", "lambda", "grid", "Pprime_minus_inf", "Pprime_plus_inf", "bowen_root"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        for key in ["s", "P_n", "P", "P_err", "dP"] {
            assert!(json["grid"][0].get(key).is_some(), "{key}");
        }
        assert!(golden().curve(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn slopes_scale_with_coupling() {
        // P'(±∞) / log λ moves toward the extreme cycle means as λ grows
        let m = mean_cycles(&[1]).unwrap();
        let (lo, hi) = (-2.0 / 3.0, -0.5);
        assert_eq!((m.f_lower, m.f_upper), (num_rational::Rational64::new(-2, 3), num_rational::Rational64::new(-1, 2)));
        let depth = Depth {
            max_len: 8,
            budget: 20_000,
        };
        let mut prev: Option<(f64, f64)> = None;
        for lam in [30.0, 300.0, 3000.0] {
            let lim = Potential::new(&[1], lam, depth).unwrap().limits();
            let (x, y) = (lim.minus.value / f64::ln(lam), lim.plus.value / f64::ln(lam));
            if let Some((px, py)) = prev {
                assert!((x - lo).abs() < (px - lo).abs() && (y - hi).abs() < (py - hi).abs());
            }
            prev = Some((x, y));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn psi_is_almost_additive(i in 0usize..1000, n in 1usize..5, m in 1usize..5) {
            let pot = golden();
            let words = pot.words(n + m);
            let w = &words[i % words.len()];
            let head = pot.value(&w.prefix(n)).unwrap();
            let tail = pot.value(&BlockWord(w.blocks()[n..].to_vec())).unwrap();
            let whole = pot.value(w).unwrap();
            prop_assert!((whole - head - tail).abs() < 8.0, "{} {} {}", whole, head, tail);
        }
    }
}
