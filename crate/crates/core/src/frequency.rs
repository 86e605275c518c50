//! Continued fractions of eventually periodic frequencies.
//!
//! A frequency `[b_1, .., b_m, (a_1, .., a_k)*]` is stored as a prefix and a
//! repeating period. Convergents are exact big integers.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eventually periodic continued fraction `[prefix, (period)*]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencySpec {
    prefix: Vec<u32>,
    period: Vec<u32>,
}

impl FrequencySpec {
    pub fn new(prefix: Vec<u32>, period: Vec<u32>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidInput("period must be nonempty".into()));
        }
        if prefix.iter().chain(period.iter()).any(|&x| x == 0) {
            return Err(Error::InvalidInput(
                "partial quotients must be positive".into(),
            ));
        }
        Ok(Self { prefix, period })
    }

    /// Purely periodic frequency `[(period)*]`.
    pub fn periodic(period: Vec<u32>) -> Result<Self> {
        Self::new(Vec::new(), period)
    }

    pub fn prefix(&self) -> &[u32] {
        &self.prefix
    }

    pub fn period(&self) -> &[u32] {
        &self.period
    }

    /// The partial quotient `a_i`, 1-based.
    pub fn partial_quotient(&self, i: usize) -> u32 {
        assert!(i >= 1, "partial quotients are 1-based");
        let j = i - 1;
        if j < self.prefix.len() {
            self.prefix[j]
        } else {
            self.period[(j - self.prefix.len()) % self.period.len()]
        }
    }

    /// Exact convergents `p_n/q_n` for `n = -1..=count`.
    pub fn convergents(&self, count: usize) -> Convergents {
        let mut p = Vec::with_capacity(count + 2);
        let mut q = Vec::with_capacity(count + 2);
        p.push(BigInt::one());
        p.push(BigInt::zero());
        q.push(BigInt::zero());
        q.push(BigInt::one());
        for n in 0..count {
            let a = BigInt::from(self.partial_quotient(n + 1));
            let pn = &a * &p[n + 1] + &p[n];
            let qn = &a * &q[n + 1] + &q[n];
            p.push(pn);
            q.push(qn);
        }
        Convergents { p, q }
    }

    /// Approximates the frequency to relative error `precision`.
    ///
    /// The convergent index is chosen so that `1/q_n^2 < precision * alpha`.
    pub fn value(&self, precision: f64) -> Result<f64> {
        if !(precision > 0.0) {
            return Err(Error::InvalidInput("precision must be positive".into()));
        }
        // alpha > 1/(a_1 + 1), which bounds the target from below.
        let alpha_floor = 1.0 / (self.partial_quotient(1) as f64 + 1.0);
        let target = precision * alpha_floor;
        let mut n = 1;
        loop {
            let c = self.convergents(n);
            let q = c.q(n as i64).to_f64().unwrap_or(f64::INFINITY);
            if 1.0 / (q * q) < target || q.is_infinite() {
                return Ok(ratio_to_f64(c.p(n as i64), c.q(n as i64)));
            }
            n += 1;
        }
    }

    /// Exact `floor(k * alpha)`, decided from two consecutive convergents that
    /// bracket alpha. Returns `None` if `count` convergents cannot decide it.
    pub fn floor_multiple(&self, k: u64, count: usize) -> Option<BigInt> {
        let c = self.convergents(count);
        let n = count as i64;
        let k = BigInt::from(k);
        let f1 = (&k * c.p(n)).div_floor(c.q(n));
        let f2 = (&k * c.p(n - 1)).div_floor(c.q(n - 1));
        (f1 == f2).then_some(f1)
    }
}

fn ratio_to_f64(p: &BigInt, q: &BigInt) -> f64 {
    // Scale down so both fit in f64 without losing the leading bits.
    let bits = q.bits().max(p.bits());
    if bits <= 1000 {
        p.to_f64().unwrap() / q.to_f64().unwrap()
    } else {
        let shift = bits - 1000;
        let ps: BigInt = p >> shift;
        let qs: BigInt = q >> shift;
        ps.to_f64().unwrap() / qs.to_f64().unwrap()
    }
}

/// Canonical representative `[1, (period)*]` of the frequencies sharing a period.
pub fn check_alpha(period: &[u32]) -> Result<FrequencySpec> {
    FrequencySpec::new(vec![1], period.to_vec())
}

/// Convergent pairs `(p_n, q_n)` for `n = -1..=N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Convergents {
    p: Vec<BigInt>,
    q: Vec<BigInt>,
}

impl Convergents {
    /// Largest index `N` available.
    pub fn len(&self) -> usize {
        self.q.len() - 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn p(&self, n: i64) -> &BigInt {
        &self.p[(n + 1) as usize]
    }

    pub fn q(&self, n: i64) -> &BigInt {
        &self.q[(n + 1) as usize]
    }

    /// Denominators `q_0..=q_N`.
    pub fn denominators(&self) -> &[BigInt] {
        &self.q[1..]
    }

    /// Numerators `p_0..=p_N`.
    pub fn numerators(&self) -> &[BigInt] {
        &self.p[1..]
    }

    /// `p_n q_{n-1} - p_{n-1} q_n`, which equals `(-1)^(n-1)`.
    pub fn determinant(&self, n: i64) -> BigInt {
        self.p(n) * self.q(n - 1) - self.p(n - 1) * self.q(n)
    }

    /// `q_n` as a machine integer when it fits.
    pub fn q_usize(&self, n: i64) -> Option<usize> {
        let q = self.q(n);
        if q.is_negative() {
            None
        } else {
            q.to_usize()
        }
    }
}
