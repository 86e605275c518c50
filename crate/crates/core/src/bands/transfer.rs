//! Transfer matrices and their traces.
//!
//! `M_{-1} = [[1,-λ],[0,1]]`, `M_0 = [[E,-1],[1,0]]` and
//! `M_{n+1} = M_{n-1} M_n^{a_{n+1}}`. The trace polynomials are
//! `h_{(n,p)}(E) = tr(M_{n-1} M_n^p)`.

use std::cmp::Ordering;

use rug::Float;

use crate::error::{Error, Result};
use crate::frequency::FrequencySpec;

/// Frequency, coupling and minimum working precision.
#[derive(Clone, Debug)]
pub struct TransferContext {
    spec: FrequencySpec,
    lambda: f64,
    bits: u32,
}

impl TransferContext {
    pub fn new(spec: FrequencySpec, lambda: f64, bits: u32) -> Result<Self> {
        if !(lambda > 20.0) || !lambda.is_finite() {
            return Err(Error::Domain {
                value: lambda,
                lo: 20.0,
                hi: f64::INFINITY,
            });
        }
        if bits < 53 {
            return Err(Error::InvalidInput(format!(
                "working precision must be at least 53 bits, got {bits}"
            )));
        }
        Ok(Self { spec, lambda, bits })
    }

    pub fn spec(&self) -> &FrequencySpec {
        &self.spec
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// `a_i`, 1-based.
    pub fn quotient(&self, i: usize) -> u32 {
        self.spec.partial_quotient(i)
    }
}

/// A value with an upper bound `2^err_log2` on its absolute rounding error.
#[derive(Clone, Debug)]
pub struct Tracked {
    pub value: Float,
    pub err_log2: f64,
}

const ERR_BITS: u32 = 53;

/// Upper bound on `log2 |x|`.
fn mag(x: &Float) -> f64 {
    match x.get_exp() {
        Some(e) => e as f64,
        None if x.is_zero() => f64::NEG_INFINITY,
        None => f64::INFINITY,
    }
}

/// `log2(sum 2^t)`, rounded up slightly.
fn log2_sum(terms: &[f64]) -> f64 {
    let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    let s: f64 = terms.iter().map(|t| (t - m).exp2()).sum();
    m + s.log2() + 1e-9
}

impl Tracked {
    fn exact(value: Float) -> Self {
        Self {
            value,
            err_log2: f64::NEG_INFINITY,
        }
    }

    /// The error bound as a number.
    pub fn error(&self) -> f64 {
        self.err_log2.exp2()
    }

    /// Compares the value with `t`, or `None` if the error bound straddles it.
    pub fn compare(&self, t: f64) -> Option<Ordering> {
        let diff = Float::with_val(ERR_BITS, &self.value - t);
        // |diff| >= 2^(exp - 1), and the 53-bit rounding is far below that
        let floor = match diff.get_exp() {
            Some(e) => e as f64 - 1.0 - 1e-9,
            None => return None,
        };
        (floor > self.err_log2).then(|| diff.cmp0()).flatten()
    }

    /// `true` iff `|value| <= 2` is certain; `None` if undecidable.
    pub fn inside(&self) -> Option<bool> {
        let hi = self.compare(2.0)?;
        let lo = self.compare(-2.0)?;
        Some(hi != Ordering::Greater && lo != Ordering::Less)
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// `x * h1 - h0` with a propagated error bound.
fn step(x: &Tracked, h1: &Tracked, h0: &Tracked, bits: u32) -> Tracked {
    let value = Float::with_val(bits, x.value.mul_sub_ref(&h1.value, &h0.value));
    // one rounding of the fused operation
    let err_log2 = log2_sum(&[
        mag(&x.value) + h1.err_log2,
        mag(&h1.value) + x.err_log2,
        x.err_log2 + h1.err_log2,
        h0.err_log2,
        mag(&value) - bits as f64 + 1.0,
    ]);
    Tracked { value, err_log2 }
}

/// Scalar trace recursion: with `x_n = tr M_n` and `y_n = tr(M_{n-1} M_n)`,
/// `h_{(n,p)} = x_n h_{(n,p-1)} - h_{(n,p-2)}`, `h_{(n,0)} = x_{n-1}`,
/// `h_{(n,1)} = y_n`, and `x_{n+1} = h_{(n,a)}`, `y_{n+1} = h_{(n,a+1)}`.
#[derive(Clone, Copy, Debug)]
pub struct TraceMap<'a> {
    ctx: &'a TransferContext,
    bits: u32,
}

/// `(x_{n-1}, x_n, y_n)` at one energy.
#[derive(Clone, Debug)]
pub struct LevelTraces {
    pub prev: Tracked,
    pub cur: Tracked,
    pub mixed: Tracked,
}

impl<'a> TraceMap<'a> {
    pub fn new(ctx: &'a TransferContext, bits: u32) -> Self {
        Self {
            ctx,
            bits: bits.max(ctx.bits),
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn level(&self, n: usize, e: &Float) -> LevelTraces {
        let bits = self.bits;
        let e = Float::with_val(bits, e);
        let mut prev = Tracked::exact(Float::with_val(bits, 2));
        let mixed_v = Float::with_val(bits, &e - self.ctx.lambda);
        let mut mixed = Tracked {
            err_log2: mag(&mixed_v) - bits as f64 + 1.0,
            value: mixed_v,
        };
        let mut cur = Tracked::exact(e);
        for j in 0..n {
            let a = self.ctx.quotient(j + 1);
            let (ha, ha1) = chebyshev(&prev, &cur, &mixed, a as usize, bits);
            prev = std::mem::replace(&mut cur, ha);
            mixed = ha1;
        }
        LevelTraces { prev, cur, mixed }
    }

    /// `(h_{(n,a)}, h_{(n,a+1)})` with `a = a_{n+1}`: the generators of the
    /// type-2/3 and type-1 bands of level `n + 1`.
    pub fn children(&self, n: usize, e: &Float) -> (Tracked, Tracked) {
        let t = self.level(n, e);
        let a = self.ctx.quotient(n + 1) as usize;
        chebyshev(&t.prev, &t.cur, &t.mixed, a, self.bits)
    }

    /// `h_{(n,p)}` for `p >= -1`.
    pub fn h(&self, n: usize, p: i64, e: &Float) -> Tracked {
        let t = self.level(n, e);
        match p {
            -1 => step(&t.cur, &t.prev, &t.mixed, self.bits),
            0 => t.prev,
            1 => t.mixed,
            _ => chebyshev(&t.prev, &t.cur, &t.mixed, p as usize - 1, self.bits).1,
        }
    }
}

/// Returns `(h_p, h_{p+1})` from `h_0`, `x`, `h_1`.
fn chebyshev(h0: &Tracked, x: &Tracked, h1: &Tracked, p: usize, bits: u32) -> (Tracked, Tracked) {
    let mut a = h0.clone();
    let mut b = h1.clone();
    for _ in 0..p {
        let c = step(x, &b, &a, bits);
        a = std::mem::replace(&mut b, c);
    }
    (a, b)
}

type Mat = [Float; 4];

fn mat_mul(a: &Mat, b: &Mat, bits: u32) -> Mat {
    let entry = |i: usize, j: usize| {
        let mut s = Float::with_val(bits, &a[2 * i] * &b[j]);
        s += Float::with_val(bits, &a[2 * i + 1] * &b[2 + j]);
        s
    };
    [entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1)]
}

/// A matrix with an entrywise absolute error bound.
#[derive(Clone)]
struct Approx {
    m: Mat,
    err: Float,
}

impl Approx {
    fn exact(m: Mat) -> Self {
        Self {
            m,
            err: Float::with_val(ERR_BITS, 0),
        }
    }

    /// Max row sum of absolute values.
    fn norm(&self) -> Float {
        let row = |i: usize| {
            Float::with_val(ERR_BITS, self.m[2 * i].abs_ref())
                + Float::with_val(ERR_BITS, self.m[2 * i + 1].abs_ref())
        };
        row(0).max(&row(1))
    }

    fn mul(&self, o: &Approx, bits: u32) -> Approx {
        let (na, nb) = (self.norm(), o.norm());
        let mut err = Float::with_val(ERR_BITS, &na * &o.err);
        err += Float::with_val(ERR_BITS, &self.err * &nb);
        err += Float::with_val(ERR_BITS, &self.err * &o.err);
        // two roundings per entry
        err += Float::with_val(ERR_BITS, &na * &nb) >> (bits as i32 - 2);
        Approx {
            m: mat_mul(&self.m, &o.m, bits),
            err,
        }
    }

    fn pow(&self, mut p: u64, bits: u32) -> Approx {
        let one = |v: i32| Float::with_val(bits, v);
        let mut acc = Approx::exact([one(1), one(0), one(0), one(1)]);
        let mut base = self.clone();
        while p > 0 {
            if p & 1 == 1 {
                acc = acc.mul(&base, bits);
            }
            p >>= 1;
            if p > 0 {
                base = base.mul(&base, bits);
            }
        }
        acc
    }

    fn inverse(&self) -> Approx {
        // determinant one
        let m = &self.m;
        Approx {
            m: [m[3].clone(), -m[1].clone(), -m[2].clone(), m[0].clone()],
            err: self.err.clone(),
        }
    }
}

/// `h_{(n,p)}(E)` from explicit matrix products at the context precision.
///
/// Matrix powers use repeated squaring. Fails with
/// [`Error::PrecisionExhausted`] when the propagated error bound exceeds
/// `1e-6 * max(|h|, 2)`.
pub fn trace(ctx: &TransferContext, n: usize, p: i64, e: &Float) -> Result<Float> {
    if p < -1 {
        return Err(Error::InvalidInput(format!("power must be >= -1, got {p}")));
    }
    let bits = ctx.bits;
    let f = |v: &Float| Float::with_val(bits, v);
    let i = |v: i32| Float::with_val(bits, v);
    let mut prev = Approx::exact([i(1), f(&Float::with_val(bits, -ctx.lambda)), i(0), i(1)]);
    let mut cur = Approx::exact([f(e), i(-1), i(1), i(0)]);
    for j in 0..n {
        let a = ctx.quotient(j + 1) as u64;
        let next = prev.mul(&cur.pow(a, bits), bits);
        prev = std::mem::replace(&mut cur, next);
    }
    let right = if p == -1 {
        cur.inverse()
    } else {
        cur.pow(p as u64, bits)
    };
    let m = prev.mul(&right, bits);
    let tr = Float::with_val(bits, &m.m[0] + &m.m[3]);
    let err = Float::with_val(ERR_BITS, &m.err * 2u32);
    let scale = Float::with_val(ERR_BITS, tr.abs_ref()).max(&Float::with_val(ERR_BITS, 2));
    if err > scale * 1e-6 {
        return Err(Error::PrecisionExhausted {
            bits,
            context: format!("trace h_({n},{p}) at E = {}", e.to_f64()),
        });
    }
    Ok(tr)
}
