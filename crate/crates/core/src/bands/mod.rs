//! Spectral generating bands: roots, refinement, the band tree and length
//! bounds.

mod refine;
pub mod transfer;

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::{admissible, BandType, CodeWord};

pub use transfer::{trace, TraceMap, TransferContext, Tracked};

/// One spectral generating band, coded by `word`.
///
/// The generating polynomial is `h_{(m,p)}` with `(m,p) = trace_handle`:
/// `(n,1)` for type 1 and `(n+1,0)` for types 2 and 3 at level `n`.
#[derive(Clone, Debug)]
pub struct Band {
    pub word: CodeWord,
    pub btype: BandType,
    pub lo: Float,
    pub hi: Float,
    pub trace_handle: (usize, i64),
}

impl Band {
    pub fn level(&self) -> usize {
        self.word.level()
    }

    pub fn length(&self) -> Float {
        Float::with_val(self.lo.prec().max(self.hi.prec()), &self.hi - &self.lo)
    }

    pub fn length_f64(&self) -> f64 {
        self.length().to_f64()
    }

    /// Natural log of the length, exact to the working precision even far
    /// below the `f64` range.
    pub fn log_length(&self) -> f64 {
        self.length().ln().to_f64()
    }

    pub fn record(&self) -> BandRecord {
        BandRecord {
            word: self.word.to_string(),
            level: self.level(),
            btype: self.btype.as_u8(),
            lo: self.lo.to_string_radix(10, None),
            hi: self.hi.to_string_radix(10, None),
            length: self.length().to_string_radix(10, None),
        }
    }
}

/// Serialized band: decimal strings at full working precision.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandRecord {
    pub word: String,
    pub level: usize,
    #[serde(rename = "type")]
    pub btype: u8,
    pub lo: String,
    pub hi: String,
    pub length: String,
}

pub const CSV_HEADER: &str = "word,level,type,lo,hi,length";

impl BandRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.word, self.level, self.btype, self.lo, self.hi, self.length
        )
    }
}

/// The two level-0 bands in ascending order: `[-2,2]` (type 3) and
/// `[λ-2,λ+2]` (type 1).
pub fn root_bands(ctx: &TransferContext) -> [Band; 2] {
    let bits = ctx.bits();
    let lam = ctx.lambda();
    [
        Band {
            word: CodeWord::root(BandType::Three),
            btype: BandType::Three,
            lo: Float::with_val(bits, -2),
            hi: Float::with_val(bits, 2),
            trace_handle: (1, 0),
        },
        Band {
            word: CodeWord::root(BandType::One),
            btype: BandType::One,
            lo: Float::with_val(bits, lam - 2.0),
            hi: Float::with_val(bits, lam + 2.0),
            trace_handle: (0, 1),
        },
    ]
}

/// The children of `parent` in ascending energy order, indexed ascending
/// within each type. `a_next` must be `a_{n+1}` of the frequency.
pub fn refine(ctx: &TransferContext, parent: &Band, a_next: u32) -> Result<Vec<Band>> {
    let expected = ctx.quotient(parent.level() + 1);
    if a_next != expected {
        return Err(Error::InvalidInput(format!(
            "refining level {} needs a = {expected}, got {a_next}",
            parent.level()
        )));
    }
    refine::refine_band(ctx, parent, a_next)
}

/// The band coded by `w`, refining along its path only.
pub fn band_for_word(ctx: &TransferContext, w: &CodeWord) -> Result<Band> {
    let mut path = bands_along(ctx, w)?;
    Ok(path.pop().expect("the root is always present"))
}

/// The bands coded by the prefixes of `w`, from the root down to `w`.
pub fn bands_along(ctx: &TransferContext, w: &CodeWord) -> Result<Vec<Band>> {
    let [r3, r1] = root_bands(ctx);
    let mut band = match w.root {
        BandType::One => r1,
        BandType::Three => r3,
        BandType::Two => return Err(Error::Inadmissible(format!("{w}: root of type 2"))),
    };
    let mut path = Vec::with_capacity(w.level() + 1);
    for (j, e) in w.letters.iter().enumerate() {
        let a = ctx.quotient(j + 1);
        if e.order != a || !admissible(band.btype, e) {
            return Err(Error::Inadmissible(format!("{w}: letter {} at level {}", e, j + 1)));
        }
        let children = refine(ctx, &band, a)?;
        let next = children
            .into_iter()
            .find(|c| c.word.letters[j] == *e)
            .ok_or_else(|| Error::Inadmissible(format!("{w}: no band for {e}")))?;
        path.push(std::mem::replace(&mut band, next));
    }
    path.push(band);
    Ok(path)
}

/// All bands of levels `0..=depth`, each level in ascending energy order.
///
/// Children of one parent are contiguous, so `parents[n][i]` and
/// `children(n, i)` give the tree links.
#[derive(Clone, Debug)]
pub struct BandTree {
    ctx: TransferContext,
    levels: Vec<Vec<Band>>,
    parents: Vec<Vec<usize>>,
}

impl BandTree {
    pub fn new(ctx: TransferContext) -> Self {
        let roots = root_bands(&ctx).to_vec();
        Self {
            ctx,
            levels: vec![roots],
            parents: vec![vec![]],
        }
    }

    /// Builds levels `0..=depth`; fails with [`Error::Budget`] before a level
    /// would exceed `budget` bands.
    pub fn build(ctx: TransferContext, depth: usize, budget: Option<u64>) -> Result<Self> {
        let mut tree = Self::new(ctx);
        while tree.depth() < depth {
            if let Some(cap) = budget {
                let next = tree.next_level_size();
                if next > cap {
                    return Err(Error::Budget {
                        enumerated: tree.levels.iter().map(|l| l.len() as u64).sum(),
                        cap,
                    });
                }
            }
            tree.grow()?;
        }
        Ok(tree)
    }

    pub fn context(&self) -> &TransferContext {
        &self.ctx
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[Band] {
        &self.levels[n]
    }

    /// Index in level `n - 1` of the parent of band `i` of level `n >= 1`.
    pub fn parent(&self, n: usize, i: usize) -> usize {
        self.parents[n][i]
    }

    /// Index range in level `n + 1` of the children of band `i` of level `n`.
    pub fn children(&self, n: usize, i: usize) -> std::ops::Range<usize> {
        let p = &self.parents[n + 1];
        let start = p.partition_point(|&x| x < i);
        let end = p.partition_point(|&x| x <= i);
        start..end
    }

    /// Number of bands the next level will have.
    pub fn next_level_size(&self) -> u64 {
        let a = self.ctx.quotient(self.depth() + 1) as u64;
        self.levels[self.depth()]
            .iter()
            .map(|b| match b.btype {
                BandType::One => 1,
                BandType::Two => 2 * a + 1,
                BandType::Three => 2 * a - 1,
            })
            .sum()
    }

    /// Refines every band of the deepest level.
    pub fn grow(&mut self) -> Result<()> {
        let n = self.depth();
        let a = self.ctx.quotient(n + 1);
        let ctx = &self.ctx;
        let kids: Vec<Vec<Band>> = self.levels[n]
            .par_iter()
            .map(|b| refine(ctx, b, a))
            .collect::<Result<_>>()?;
        let mut level = Vec::new();
        let mut parents = Vec::new();
        for (i, k) in kids.into_iter().enumerate() {
            parents.extend(std::iter::repeat(i).take(k.len()));
            level.extend(k);
        }
        self.levels.push(level);
        self.parents.push(parents);
        Ok(())
    }
}

/// Shortest and longest band lengths at level `n`.
pub fn level_extremes(ctx: &TransferContext, n: usize, budget: u64) -> Result<(Float, Float)> {
    let tree = BandTree::build(ctx.clone(), n, Some(budget))?;
    let mut lengths = tree.level(n).iter().map(Band::length);
    let first = lengths.next().ok_or_else(|| Error::Invariant("empty level".into()))?;
    Ok(lengths.fold((first.clone(), first), |(lo, hi), l| {
        (lo.min(&l), hi.max(&l))
    }))
}

/// `(log lower, log upper)` band-length bounds for a word:
/// `τ₂^{-n} ∏ a_i^{-3} ∏_{type 2 at i} τ₂^{2-a_i}` and
/// `4 τ₁^{-n} ∏_{type 2 at i} τ₁^{2-a_i}`, with `τ₁ = (λ-8)/3`, `τ₂ = 2(λ+5)`.
pub fn length_bounds(ctx: &TransferContext, w: &CodeWord) -> (f64, f64) {
    let lam = ctx.lambda();
    let (lt1, lt2) = (((lam - 8.0) / 3.0).ln(), (2.0 * (lam + 5.0)).ln());
    let n = w.level() as f64;
    let mut lower = -n * lt2;
    let mut upper = 4f64.ln() - n * lt1;
    for (j, e) in w.letters.iter().enumerate() {
        let a = ctx.quotient(j + 1) as f64;
        lower -= 3.0 * a.ln();
        if e.btype == BandType::Two {
            lower += (2.0 - a) * lt2;
            upper += (2.0 - a) * lt1;
        }
    }
    (lower, upper)
}

/// Whether the band length lies within [`length_bounds`].
pub fn length_bounds_audit(ctx: &TransferContext, band: &Band) -> bool {
    let (lower, upper) = length_bounds(ctx, &band.word);
    let l = band.log_length();
    // the endpoints carry a relative error far below this slack
    let slack = 1e-9;
    lower - slack <= l && l <= upper + slack
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::{check_alpha, FrequencySpec};

    fn ctx(a: &[u32], lambda: f64) -> TransferContext {
        TransferContext::new(check_alpha(a).unwrap(), lambda, 64).unwrap()
    }

    fn close(x: &Float, y: f64, tol: f64) -> bool {
        (x.to_f64() - y).abs() <= tol
    }

    #[test]
    fn roots() {
        for lam in [24.0, 100.0] {
            let [r3, r1] = root_bands(&ctx(&[1], lam));
            assert_eq!((r1.lo.to_f64(), r1.hi.to_f64()), (lam - 2.0, lam + 2.0));
            assert_eq!((r3.lo.to_f64(), r3.hi.to_f64()), (-2.0, 2.0));
            assert!(r3.hi < r1.lo);
            assert_eq!(r1.trace_handle, (0, 1));
            assert_eq!(r3.trace_handle, (1, 0));
        }
    }

    #[test]
    fn level_one_of_golden_tree() {
        let c = ctx(&[1], 24.0);
        let [r3, r1] = root_bands(&c);
        // type-1 root with a = 1: the type-2 child is the same interval
        let k = refine(&c, &r1, 1).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].btype, BandType::Two);
        assert_eq!(k[0].word.to_string(), "1.2:1@1");
        assert!(close(&k[0].lo, 22.0, 1e-12) && close(&k[0].hi, 26.0, 1e-12));
        // type-3 root: one type-1 child, the band of E^2 - λE - 2
        let k = refine(&c, &r3, 1).unwrap();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0].btype, BandType::One);
        let lo = -((24f64 * 24.0 + 16.0).sqrt() - 24.0) / 2.0;
        // endpoints are resolved to 1e-13 of the parent length
        assert!(close(&k[0].lo, lo, 4e-13), "{}", k[0].lo.to_f64());
        assert!(close(&k[0].hi, 0.0, 4e-13));
        assert_eq!(k[0].trace_handle, (1, 1));
    }

    #[test]
    fn child_counts_and_interlacing() {
        let c = TransferContext::new(FrequencySpec::new(vec![1], vec![3, 2]).unwrap(), 30.0, 64).unwrap();
        let tree = BandTree::build(c.clone(), 4, None).unwrap();
        for n in 0..4 {
            let a = c.quotient(n + 1);
            for (i, b) in tree.level(n).iter().enumerate() {
                let kids = &tree.level(n + 1)[tree.children(n, i)];
                let (c1, c2, c3) = crate::symbolic::child_counts(b.btype, a);
                let count = |t| kids.iter().filter(|k| k.btype == t).count() as u32;
                assert_eq!(
                    (count(BandType::One), count(BandType::Two), count(BandType::Three)),
                    (c1, c2, c3)
                );
                for k in kids {
                    assert!(k.lo >= b.lo && k.hi <= b.hi);
                    assert!(k.word.truncate(n) == b.word);
                }
            }
            let lvl = tree.level(n + 1);
            assert!(lvl.windows(2).all(|w| w[0].hi < w[1].lo));
            let shallow = BandTree::build(c.clone(), n, None).unwrap();
            assert_eq!(lvl.len() as u64, shallow.next_level_size());
        }
    }

    #[test]
    fn endpoints_solve_trace_equation() {
        let c = ctx(&[1, 2], 24.0);
        let tree = BandTree::build(c.clone(), 5, None).unwrap();
        for n in 1..=5 {
            for b in tree.level(n) {
                let (m, p) = b.trace_handle;
                let tm = TraceMap::new(&c, b.lo.prec());
                for x in [&b.lo, &b.hi] {
                    let h = tm.h(m, p, x).to_f64();
                    assert!((h.abs() - 2.0).abs() < 1e-6, "{} h={h}", b.word);
                }
                // the a_1 = 1 type-2 band of level 1 is its parent, of length 4
                if n > 1 {
                    assert!(b.length_f64() <= 2f64.powi(2 - n as i32));
                }
            }
        }
    }

    #[test]
    fn lazy_walk_agrees_with_tree() {
        let c = ctx(&[2], 24.0);
        let tree = BandTree::build(c.clone(), 4, None).unwrap();
        for b in tree.level(4).iter().step_by(7) {
            let w = band_for_word(&c, &b.word).unwrap();
            assert_eq!(w.lo, b.lo);
            assert_eq!(w.hi, b.hi);
        }
        let bad = CodeWord::parse("1.1:1@1").unwrap();
        assert!(band_for_word(&c, &bad).is_err());
    }

    #[test]
    fn extremes_and_budget() {
        let c = ctx(&[1], 24.0);
        let (lo, hi) = level_extremes(&c, 0, 10).unwrap();
        assert_eq!((lo.to_f64(), hi.to_f64()), (4.0, 4.0));
        let (lo, hi) = level_extremes(&c, 1, 10).unwrap();
        assert!(lo <= hi);
        assert_eq!(hi.to_f64(), 4.0);
        assert!(matches!(level_extremes(&c, 8, 20), Err(Error::Budget { .. })));
    }

    #[test]
    fn length_bounds_hold() {
        for (a, depth) in [(vec![1], 6), (vec![2, 3], 5)] {
            let c = ctx(&a, 24.0);
            let tree = BandTree::build(c.clone(), depth, None).unwrap();
            for n in 0..=depth {
                for b in tree.level(n) {
                    assert!(length_bounds_audit(&c, b), "{} {}", b.word, b.length_f64());
                }
            }
        }
    }

    #[test]
    fn records() {
        let c = ctx(&[1], 24.0);
        let r = root_bands(&c)[1].record();
        assert_eq!(r.word, "1");
        assert_eq!(r.btype, 1);
        assert_eq!(r.lo.parse::<f64>().unwrap(), 22.0);
        assert_eq!(r.length.parse::<f64>().unwrap(), 4.0);
        assert_eq!(r.csv_row().split(',').count(), CSV_HEADER.split(',').count());
    }
}
