//! Isolation of the children of one band.
//!
//! Every child polynomial `g` crosses zero exactly once inside each of its
//! bands, and between two consecutive bands `|g| > 2`. Zeros are counted on a
//! uniform grid that doubles until the counts match the covering rules; the
//! endpoints are then roots of `g = ±2` on brackets between a zero and a gap
//! point.

use std::cmp::Ordering;

use rug::Float;

use crate::error::{Error, Result};
use crate::symbolic::{BandType, Letter};

use super::transfer::{TraceMap, TransferContext, Tracked};
use super::Band;

const MAX_BITS: u32 = 1 << 14;
const MAX_GRID: usize = 1 << 14;
const REL_TOL: f64 = 1e-13;
const MAX_STEPS: usize = 400;

enum Fail {
    /// A sign decision was not certified at this precision.
    Uncertain(String),
    Miscount {
        expected: String,
        found: String,
        grid: usize,
    },
}

type Attempt<T> = std::result::Result<T, Fail>;

/// Which child generator: `h_{(n,a)}` or `h_{(n,a+1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Poly {
    Low,
    High,
}

struct Family {
    poly: Poly,
    btype: BandType,
    expected: usize,
}

fn families(parent: BandType, a: u32) -> Vec<Family> {
    let a = a as usize;
    match parent {
        BandType::One => vec![Family {
            poly: Poly::Low,
            btype: BandType::Two,
            expected: 1,
        }],
        BandType::Two => vec![
            Family {
                poly: Poly::High,
                btype: BandType::One,
                expected: a + 1,
            },
            Family {
                poly: Poly::Low,
                btype: BandType::Three,
                expected: a,
            },
        ],
        BandType::Three => vec![
            Family {
                poly: Poly::High,
                btype: BandType::One,
                expected: a,
            },
            Family {
                poly: Poly::Low,
                btype: BandType::Three,
                expected: a - 1,
            },
        ],
    }
}

/// Starting precision for refining a band of the given length.
pub(crate) fn start_bits(ctx: &TransferContext, length: f64) -> u32 {
    let ratio = ((ctx.lambda() + 4.0) / length.max(f64::MIN_POSITIVE)).log2().max(0.0);
    let bits = 64 + 2 * ratio.ceil() as u32;
    bits.div_ceil(64) * 64
}

/// Children of `parent` in ascending energy order, with precision escalation.
pub(crate) fn refine_band(ctx: &TransferContext, parent: &Band, a: u32) -> Result<Vec<Band>> {
    let length = Float::with_val(parent.hi.prec(), &parent.hi - &parent.lo);
    let mut bits = start_bits(ctx, length.to_f64()).max(ctx.bits());
    loop {
        match isolate(ctx, parent, a, bits) {
            Ok(children) => return Ok(children),
            Err(Fail::Uncertain(what)) => {
                if bits >= MAX_BITS {
                    return Err(Error::PrecisionExhausted {
                        bits,
                        context: format!("refining {}: {what}", parent.word),
                    });
                }
                bits *= 2;
            }
            Err(Fail::Miscount {
                expected,
                found,
                grid,
            }) => {
                return Err(Error::Structure {
                    parent: parent.word.to_string(),
                    expected,
                    found,
                    grid,
                })
            }
        }
    }
}

struct Isolator<'a> {
    tm: TraceMap<'a>,
    level: usize,
    bits: u32,
}

impl Isolator<'_> {
    fn eval(&self, x: &Float, poly: Poly) -> Tracked {
        let (lo, hi) = self.tm.children(self.level, x);
        match poly {
            Poly::Low => lo,
            Poly::High => hi,
        }
    }

    fn sign(&self, t: &Tracked, target: f64, at: &Float) -> Attempt<Ordering> {
        t.compare(target)
            .ok_or_else(|| Fail::Uncertain(format!("sign of h - {target} at {}", at.to_f64())))
    }

    fn mid(&self, a: &Float, b: &Float) -> Float {
        let mut m = Float::with_val(self.bits, a + b);
        m >>= 1;
        m
    }

    /// A point of the band around a sign change of `g` in `[a, b]`.
    fn inner_point(&self, poly: Poly, a: &Float, b: &Float, sa: Ordering) -> Attempt<Float> {
        let (mut a, mut b) = (a.clone(), b.clone());
        for _ in 0..MAX_STEPS {
            let m = self.mid(&a, &b);
            let g = self.eval(&m, poly);
            if g.inside() == Some(true) {
                return Ok(m);
            }
            if self.sign(&g, 0.0, &m)? == sa {
                a = m;
            } else {
                b = m;
            }
        }
        Err(Fail::Uncertain("zero bracket did not close".into()))
    }

    /// A point of `(a, b)` with `|g| > 2`, preferring the given samples.
    fn gap_point(&self, poly: Poly, a: &Float, b: &Float, samples: &[(Float, Tracked)]) -> Attempt<Float> {
        let mut best: Option<(Float, Float)> = None;
        let consider = |x: &Float, g: &Tracked, best: &mut Option<(Float, Float)>| {
            if g.inside() == Some(false) {
                let mag = Float::with_val(53, g.value.abs_ref());
                if best.as_ref().map_or(true, |(_, m)| mag > *m) {
                    *best = Some((x.clone(), mag));
                }
            }
        };
        for (x, g) in samples {
            if x > a && x < b {
                consider(x, g, &mut best);
            }
        }
        let mut pts = 16usize;
        while best.is_none() && pts <= 1024 {
            let width = Float::with_val(self.bits, b - a);
            for j in 1..pts {
                let x = Float::with_val(self.bits, &width * j as u32) / pts as u32 + a;
                let g = self.eval(&x, poly);
                consider(&x, &g, &mut best);
            }
            pts *= 4;
        }
        best.map(|(x, _)| x)
            .ok_or_else(|| Fail::Uncertain("no gap between consecutive zeros".into()))
    }

    /// Root of `g = target` in the bracket `[a, b]` whose end values straddle
    /// it, by Brent's method to absolute tolerance `tol`.
    fn solve(&self, poly: Poly, target: f64, a: &Float, b: &Float, tol: &Float) -> Attempt<Float> {
        let bits = self.bits;
        let f = |x: &Float| -> Attempt<Float> {
            let g = self.eval(x, poly);
            match g.compare(target) {
                Some(_) => Ok(Float::with_val(bits, &g.value - target)),
                None => Err(Fail::Uncertain(format!("h = {target} near {}", x.to_f64()))),
            }
        };
        let half_tol = Float::with_val(bits, tol >> 1);
        // accept x when the root is certified within tol of it
        let settle = |x: Float, err: Fail| -> Attempt<Float> {
            let l = Float::with_val(bits, &x - &half_tol);
            let r = Float::with_val(bits, &x + &half_tol);
            match (f(&l), f(&r)) {
                (Ok(fl), Ok(fr)) if fl.cmp0() != fr.cmp0() => Ok(x),
                _ => Err(err),
            }
        };
        let abs = |x: &Float| Float::with_val(bits, x.abs_ref());
        let same_sign = |x: &Float, y: &Float| x.is_sign_negative() == y.is_sign_negative();

        let mut a = a.clone();
        let mut b = b.clone();
        let mut fa = f(&a)?;
        let mut fb = f(&b)?;
        if same_sign(&fa, &fb) {
            return Err(Fail::Uncertain("endpoint bracket lost its sign change".into()));
        }
        let mut c = a.clone();
        let mut fc = fa.clone();
        let mut d = Float::with_val(bits, &b - &a);
        let mut e = d.clone();
        for _ in 0..MAX_STEPS {
            if same_sign(&fb, &fc) {
                c = a.clone();
                fc = fa.clone();
                d = Float::with_val(bits, &b - &a);
                e = d.clone();
            }
            if abs(&fc) < abs(&fb) {
                a = std::mem::replace(&mut b, c.clone());
                c = a.clone();
                fa = std::mem::replace(&mut fb, fc.clone());
                fc = fa.clone();
            }
            let xm = Float::with_val(bits, &c - &b) / 2u32;
            if abs(&xm) <= half_tol {
                return Ok(b);
            }
            if abs(&e) >= half_tol && abs(&fa) > abs(&fb) {
                let s = Float::with_val(bits, &fb / &fa);
                let (mut p, mut q);
                if a == c {
                    p = Float::with_val(bits, &xm * &s) * 2u32;
                    q = Float::with_val(bits, 1 - &s);
                } else {
                    let qq = Float::with_val(bits, &fa / &fc);
                    let r = Float::with_val(bits, &fb / &fc);
                    let t1 = Float::with_val(bits, &xm * &qq) * 2u32 * Float::with_val(bits, &qq - &r);
                    let t2 = Float::with_val(bits, &b - &a) * Float::with_val(bits, &r - 1u32);
                    p = s.clone() * (t1 - t2);
                    q = Float::with_val(bits, &qq - 1u32)
                        * Float::with_val(bits, &r - 1u32)
                        * Float::with_val(bits, &s - 1u32);
                }
                if p.cmp0() == Some(Ordering::Greater) {
                    q = -q;
                } else {
                    p = -p;
                }
                let lim1 = Float::with_val(bits, &xm * &q) * 3u32 - abs(&Float::with_val(bits, &half_tol * &q));
                let lim2 = abs(&Float::with_val(bits, &e * &q));
                if Float::with_val(bits, &p * 2u32) < lim1.min(&lim2) {
                    e = std::mem::replace(&mut d, p / q);
                } else {
                    d = xm.clone();
                    e = d.clone();
                }
            } else {
                d = xm.clone();
                e = d.clone();
            }
            a = b.clone();
            fa = fb.clone();
            if abs(&d) > half_tol {
                b += &d;
            } else if xm.is_sign_negative() {
                b -= &half_tol;
            } else {
                b += &half_tol;
            }
            fb = match f(&b) {
                Ok(v) => v,
                Err(err) => return settle(b, err),
            };
        }
        Err(Fail::Uncertain("endpoint iteration did not converge".into()))
    }
}

fn isolate(ctx: &TransferContext, parent: &Band, a: u32, bits: u32) -> Attempt<Vec<Band>> {
    let iso = Isolator {
        tm: TraceMap::new(ctx, bits),
        level: parent.level(),
        bits,
    };
    let lo = Float::with_val(bits, &parent.lo);
    let hi = Float::with_val(bits, &parent.hi);
    let width = Float::with_val(bits, &hi - &lo);
    let scale = lo.to_f64().abs().max(hi.to_f64().abs()).max(1.0);
    let ulp_floor = Float::with_val(bits, scale) >> (bits as i32 - 8);
    let tol = Float::with_val(bits, &width * REL_TOL).max(&ulp_floor);
    let fams = families(parent.btype, a);

    // grid until the zero counts match
    let mut pts = 8 * (2 * a as usize + 2);
    let (grid, brackets) = loop {
        let xs: Vec<Float> = (0..=pts)
            .map(|j| Float::with_val(bits, &width * j as u32) / pts as u32 + &lo)
            .collect();
        let vals: Vec<(Tracked, Tracked)> = xs.iter().map(|x| iso.tm.children(iso.level, x)).collect();
        let mut brackets: Vec<Vec<(usize, Ordering)>> = Vec::new();
        for fam in &fams {
            let pick = |v: &(Tracked, Tracked)| match fam.poly {
                Poly::Low => v.0.clone(),
                Poly::High => v.1.clone(),
            };
            let mut found = Vec::new();
            let mut prev: Option<Ordering> = None;
            for (j, v) in vals.iter().enumerate() {
                let g = pick(v);
                let s = match g.compare(0.0) {
                    Some(s) => s,
                    // inside a band for sure; a neighbouring point carries the sign
                    None if g.inside() == Some(true) => continue,
                    None => return Err(Fail::Uncertain("grid sign".into())),
                };
                if s == Ordering::Equal {
                    continue;
                }
                if let Some(p) = prev {
                    if p != s {
                        found.push((j, p));
                    }
                }
                prev = Some(s);
            }
            brackets.push(found);
        }
        if fams.iter().zip(&brackets).all(|(f, b)| f.expected == b.len()) {
            let grid: Vec<(Float, Tracked, Tracked)> = xs
                .into_iter()
                .zip(vals)
                .map(|(x, (l, h))| (x, l, h))
                .collect();
            break (grid, brackets);
        }
        if pts * 2 > MAX_GRID {
            let describe = |v: Vec<usize>| format!("{v:?}");
            return Err(Fail::Miscount {
                expected: describe(fams.iter().map(|f| f.expected).collect()),
                found: describe(brackets.iter().map(|b| b.len()).collect()),
                grid: pts,
            });
        }
        pts *= 2;
    };

    let mut children: Vec<Band> = Vec::new();
    for (fam, brs) in fams.iter().zip(&brackets) {
        let samples: Vec<(Float, Tracked)> = grid
            .iter()
            .map(|(x, l, h)| {
                (x.clone(), match fam.poly {
                    Poly::Low => l.clone(),
                    Poly::High => h.clone(),
                })
            })
            .collect();
        // the zero of each band lies between the previous sample with a sign and sample j
        let zeros: Vec<Float> = brs
            .iter()
            .map(|&(j, sign_before)| {
                let left = (0..j)
                    .rev()
                    .find(|&i| samples[i].1.compare(0.0).is_some_and(|s| s != Ordering::Equal))
                    .unwrap_or(0);
                iso.inner_point(fam.poly, &samples[left].0, &samples[j].0, sign_before)
            })
            .collect::<Attempt<_>>()?;
        let mut gaps = Vec::with_capacity(zeros.len().saturating_sub(1));
        for w in zeros.windows(2) {
            gaps.push(iso.gap_point(fam.poly, &w[0], &w[1], &samples)?);
        }
        for (i, z) in zeros.iter().enumerate() {
            let left_bound = if i == 0 { &lo } else { &gaps[i - 1] };
            let right_bound = if i + 1 == zeros.len() { &hi } else { &gaps[i] };
            let end = |bound: &Float, at_parent_edge: bool| -> Attempt<Float> {
                let g = iso.eval(bound, fam.poly);
                match g.inside() {
                    Some(false) => {}
                    _ if at_parent_edge => return Ok(bound.clone()),
                    _ => return Err(Fail::Uncertain("gap point inside a band".into())),
                }
                let target = if g.value.is_sign_negative() { -2.0 } else { 2.0 };
                iso.solve(fam.poly, target, bound, z, &tol)
            };
            let b_lo = end(left_bound, i == 0)?;
            let b_hi = end(right_bound, i + 1 == zeros.len())?;
            let level = parent.level() + 1;
            let handle = match fam.btype {
                BandType::One => (level, 1),
                _ => (level + 1, 0),
            };
            let letter = Letter {
                btype: fam.btype,
                index: i as u32 + 1,
                order: a,
            };
            children.push(Band {
                word: parent.word.child(letter),
                btype: fam.btype,
                lo: b_lo,
                hi: b_hi,
                trace_handle: handle,
            });
        }
    }
    children.sort_by(|x, y| x.lo.partial_cmp(&y.lo).unwrap());
    check_children(parent, &children, &tol)?;
    Ok(children)
}

fn check_children(parent: &Band, children: &[Band], tol: &Float) -> Attempt<()> {
    let describe = |c: &[Band]| {
        c.iter()
            .map(|b| format!("{}[{:.6e},{:.6e}]", b.btype, b.lo.to_f64(), b.hi.to_f64()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let bad = |why: &str| Fail::Miscount {
        expected: why.to_string(),
        found: describe(children),
        grid: 0,
    };
    let mut lo_limit = Float::with_val(parent.lo.prec(), &parent.lo - tol);
    for c in children {
        if c.lo >= c.hi {
            return Err(bad("nonempty children"));
        }
        if c.lo < lo_limit {
            return Err(bad("disjoint children inside the parent"));
        }
        lo_limit = c.hi.clone();
    }
    let hi_limit = Float::with_val(parent.hi.prec(), &parent.hi + tol);
    if children.last().is_some_and(|c| c.hi > hi_limit) {
        return Err(bad("children inside the parent"));
    }
    if parent.btype != BandType::One {
        for (i, c) in children.iter().enumerate() {
            let want = if i % 2 == 0 { BandType::One } else { BandType::Three };
            if c.btype != want {
                return Err(bad("interlaced types 1,3,..,1"));
            }
        }
    }
    Ok(())
}
