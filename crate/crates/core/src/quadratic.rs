//! Exact arithmetic in a real quadratic field `Q(sqrt(d))`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rug::Float;

/// `rational + irrational * sqrt(radicand)` with a squarefree radicand.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadSurd {
    pub rational: BigRational,
    pub irrational: BigRational,
    pub radicand: u64,
}

/// Splits `n = s^2 * d` with `d` squarefree; returns `(s, d)`.
pub fn squarefree_split(n: u64) -> (u64, u64) {
    let mut s = 1u64;
    let mut d = n;
    let mut p = 2u64;
    while p * p <= d {
        while d % (p * p) == 0 {
            d /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, d)
}

impl QuadSurd {
    pub fn rational(x: BigRational, radicand: u64) -> Self {
        Self {
            rational: x,
            irrational: BigRational::zero(),
            radicand,
        }
    }

    pub fn from_int(x: i64, radicand: u64) -> Self {
        Self::rational(BigRational::from_integer(x.into()), radicand)
    }

    /// `(p + q*sqrt(n)) / r` with `n` reduced to its squarefree part.
    pub fn from_parts(p: BigInt, q: BigInt, n: u64, r: BigInt) -> Self {
        let (s, d) = squarefree_split(n);
        Self {
            rational: BigRational::new(p, r.clone()),
            irrational: BigRational::new(q * BigInt::from(s), r),
            radicand: d,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.irrational.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.irrational.is_zero() || self.radicand == 1
    }

    pub fn conjugate(&self) -> Self {
        Self {
            rational: self.rational.clone(),
            irrational: -self.irrational.clone(),
            radicand: self.radicand,
        }
    }

    /// Field norm `x * conj(x)`.
    pub fn norm(&self) -> BigRational {
        &self.rational * &self.rational
            - &self.irrational * &self.irrational * BigRational::from_integer(self.radicand.into())
    }

    pub fn recip(&self) -> Self {
        let n = self.norm();
        assert!(!n.is_zero(), "division by zero in Q(sqrt(d))");
        let c = self.conjugate();
        Self {
            rational: c.rational / &n,
            irrational: c.irrational / n,
            radicand: self.radicand,
        }
    }

    pub fn to_float(&self, bits: u32) -> Float {
        let r = rational_to_float(&self.rational, bits);
        let i = rational_to_float(&self.irrational, bits);
        let s = Float::with_val(bits, self.radicand).sqrt();
        r + i * s
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(256).to_f64()
    }

    /// `(p, q, r)` with `self = (p + q*sqrt(d))/r`, `r > 0` and `gcd(p,q,r) = 1`.
    pub fn integer_parts(&self) -> (BigInt, BigInt, BigInt) {
        let r = self.rational.denom().lcm(self.irrational.denom());
        let p = (&self.rational * BigRational::from_integer(r.clone())).to_integer();
        let q = (&self.irrational * BigRational::from_integer(r.clone())).to_integer();
        let g = p.gcd(&q).gcd(&r);
        (p / &g, q / &g, r / g)
    }

    fn compare_sign(&self) -> std::cmp::Ordering {
        self.to_float(512).partial_cmp(&0).unwrap()
    }

    pub fn is_negative(&self) -> bool {
        self.compare_sign() == std::cmp::Ordering::Less
    }
}

fn rational_to_float(x: &BigRational, bits: u32) -> Float {
    let n = rug::Integer::from_str_radix(&x.numer().to_str_radix(16), 16).unwrap();
    let d = rug::Integer::from_str_radix(&x.denom().to_str_radix(16), 16).unwrap();
    Float::with_val(bits, n) / Float::with_val(bits, d)
}

fn check_same(a: &QuadSurd, b: &QuadSurd) -> u64 {
    if a.irrational.is_zero() {
        return b.radicand;
    }
    if b.irrational.is_zero() {
        return a.radicand;
    }
    assert_eq!(a.radicand, b.radicand, "mixed quadratic fields");
    a.radicand
}

impl Add for &QuadSurd {
    type Output = QuadSurd;
    fn add(self, o: &QuadSurd) -> QuadSurd {
        QuadSurd {
            radicand: check_same(self, o),
            rational: &self.rational + &o.rational,
            irrational: &self.irrational + &o.irrational,
        }
    }
}

impl Sub for &QuadSurd {
    type Output = QuadSurd;
    fn sub(self, o: &QuadSurd) -> QuadSurd {
        QuadSurd {
            radicand: check_same(self, o),
            rational: &self.rational - &o.rational,
            irrational: &self.irrational - &o.irrational,
        }
    }
}

impl Mul for &QuadSurd {
    type Output = QuadSurd;
    fn mul(self, o: &QuadSurd) -> QuadSurd {
        let d = check_same(self, o);
        let dd = BigRational::from_integer(d.into());
        QuadSurd {
            radicand: d,
            rational: &self.rational * &o.rational + &self.irrational * &o.irrational * dd,
            irrational: &self.rational * &o.irrational + &self.irrational * &o.rational,
        }
    }
}

impl Div for &QuadSurd {
    type Output = QuadSurd;
    fn div(self, o: &QuadSurd) -> QuadSurd {
        self * &o.recip()
    }
}

impl Neg for &QuadSurd {
    type Output = QuadSurd;
    fn neg(self) -> QuadSurd {
        QuadSurd {
            radicand: self.radicand,
            rational: -self.rational.clone(),
            irrational: -self.irrational.clone(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for QuadSurd {
            type Output = QuadSurd;
            fn $m(self, o: QuadSurd) -> QuadSurd {
                (&self).$m(&o)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

fn sqrt_term(q: &BigInt, d: u64) -> String {
    let mag = q.abs();
    if mag.is_one() {
        format!("sqrt({d})")
    } else {
        format!("{mag}*sqrt({d})")
    }
}

/// Renders `(p+q*sqrt(d))/r`, dropping trivial parts.
impl fmt::Display for QuadSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, q, r) = self.integer_parts();
        let mut num = String::new();
        if q.is_zero() {
            num.push_str(&p.to_string());
        } else if p.is_zero() {
            if q.is_negative() {
                num.push('-');
            }
            num.push_str(&sqrt_term(&q, self.radicand));
        } else {
            num.push_str(&p.to_string());
            num.push(if q.is_negative() { '-' } else { '+' });
            num.push_str(&sqrt_term(&q, self.radicand));
        }
        if r.is_one() {
            f.write_str(&num)
        } else if q.is_zero() || p.is_zero() {
            write!(f, "{num}/{r}")
        } else {
            write!(f, "({num})/{r}")
        }
    }
}

/// Renders `coef*log(arg)` with parentheses where needed.
pub fn format_log_multiple(coef: &QuadSurd, arg: &QuadSurd) -> String {
    let arg_s = arg.to_string();
    let (p, q, r) = coef.integer_parts();
    let coef_s = if q.is_zero() && r.is_one() {
        if p.is_one() {
            String::new()
        } else {
            format!("{p}*")
        }
    } else {
        format!("({coef})*")
    };
    format!("{coef_s}log({arg_s})")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden() -> QuadSurd {
        QuadSurd::from_parts(1.into(), 1.into(), 5, 2.into())
    }

    #[test]
    fn split() {
        assert_eq!(squarefree_split(12), (2, 3));
        assert_eq!(squarefree_split(5), (1, 5));
        assert_eq!(squarefree_split(72), (6, 2));
    }

    #[test]
    fn golden_identities() {
        let phi = golden();
        let one = QuadSurd::from_int(1, 5);
        // phi^2 = phi + 1
        assert_eq!(&phi * &phi, &phi + &one);
        assert_eq!(phi.to_string(), "(1+sqrt(5))/2");
        assert!((phi.to_f64() - 1.618033988749895).abs() < 1e-15);
        let inv = phi.recip();
        assert_eq!(&inv * &phi, one);
    }

    #[test]
    fn formatting() {
        let x = QuadSurd::from_parts(4.into(), 2.into(), 12, 2.into());
        assert_eq!(x.to_string(), "2+2*sqrt(3)");
        let y = QuadSurd::from_parts(5.into(), 1.into(), 5, 4.into());
        assert_eq!(format_log_multiple(&y, &golden()), "((5+sqrt(5))/4)*log((1+sqrt(5))/2)");
        let c = QuadSurd::rational(BigRational::new(3.into(), 2.into()), 5);
        assert_eq!(format_log_multiple(&c, &golden()), "(3/2)*log((1+sqrt(5))/2)");
        let c = QuadSurd::from_int(2, 5);
        assert_eq!(format_log_multiple(&c, &golden()), "2*log((1+sqrt(5))/2)");
        let n = QuadSurd::from_parts(0.into(), (-1).into(), 5, 5.into());
        assert_eq!(n.to_string(), "-sqrt(5)/5");
    }
}
