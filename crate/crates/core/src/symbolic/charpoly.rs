//! Exact integer characteristic polynomials.
//!
//! The full incidence matrix can have a few hundred rows, so its polynomial is
//! computed by Hessenberg reduction modulo word-sized primes and recombined
//! with the Chinese remainder theorem. The number of primes is fixed by a
//! Hadamard-type bound on the coefficients, which makes the result exact.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::Result;

use super::{auxiliary_matrix, incidence_matrix, perron::trace_det, IntMatrix3};

fn mod_pow(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1u64;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Primes just below 2^31, so products of residues fit in `u64`.
fn primes() -> impl Iterator<Item = u64> {
    static CACHE: OnceLock<Vec<u64>> = OnceLock::new();
    let cached = CACHE.get_or_init(|| {
        (1u64..(1 << 31))
            .rev()
            .filter(|&n| n % 2 == 1 && is_prime(n))
            .take(256)
            .collect()
    });
    cached
        .clone()
        .into_iter()
        .chain((1u64..cached[cached.len() - 1]).rev().filter(|&n| n % 2 == 1 && is_prime(n)))
}

/// Characteristic polynomial modulo `p`, coefficients low to high.
fn charpoly_mod(m: &[Vec<i64>], p: u64) -> Vec<u64> {
    let n = m.len();
    let mut h: Vec<Vec<u64>> = m
        .iter()
        .map(|row| row.iter().map(|&x| x.rem_euclid(p as i64) as u64).collect())
        .collect();
    // similarity reduction to upper Hessenberg form
    for j in 0..n.saturating_sub(2) {
        let Some(piv) = (j + 1..n).find(|&i| h[i][j] != 0) else {
            continue;
        };
        if piv != j + 1 {
            h.swap(piv, j + 1);
            for row in h.iter_mut() {
                row.swap(piv, j + 1);
            }
        }
        let inv = mod_pow(h[j + 1][j], p - 2, p);
        for k in j + 2..n {
            let u = h[k][j] * inv % p;
            if u == 0 {
                continue;
            }
            for c in 0..n {
                let sub = u * h[j + 1][c] % p;
                h[k][c] = (h[k][c] + p - sub) % p;
            }
            for row in h.iter_mut() {
                let add = u * row[k] % p;
                row[j + 1] = (row[j + 1] + add) % p;
            }
        }
    }
    // p_m = (x - h_mm) p_{m-1} - sum_i h_{i,m} prod(subdiag) p_{i-1}
    let mut polys: Vec<Vec<u64>> = vec![vec![1]];
    for mm in 1..=n {
        let prev = &polys[mm - 1];
        let mut cur = vec![0u64; mm + 1];
        for (d, &c) in prev.iter().enumerate() {
            cur[d + 1] = (cur[d + 1] + c) % p;
            cur[d] = (cur[d] + p - c * h[mm - 1][mm - 1] % p) % p;
        }
        let mut t = 1u64;
        for i in (1..mm).rev() {
            t = t * h[i][i - 1] % p;
            let coef = t * h[i - 1][mm - 1] % p;
            if coef == 0 {
                continue;
            }
            for (d, &c) in polys[i - 1].iter().enumerate() {
                cur[d] = (cur[d] + p - coef * c % p) % p;
            }
        }
        polys.push(cur);
    }
    polys.pop().unwrap()
}

/// Exact characteristic polynomial `det(xI - M)`, coefficients low to high.
pub fn charpoly(m: &[Vec<i64>]) -> Vec<BigInt> {
    let n = m.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    let max_row_norm = m
        .iter()
        .map(|row| row.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt())
        .fold(1.0f64, f64::max);
    // |c_j| <= C(n,j) R^j <= 2^n R^n
    let bits_needed = (n as f64 * (1.0 + max_row_norm.log2())).ceil() as u64 + 2;

    let mut modulus = BigInt::one();
    let mut acc = vec![BigInt::zero(); n + 1];
    for p in primes() {
        if modulus.bits() > bits_needed {
            break;
        }
        let r = charpoly_mod(m, p);
        let pb = BigInt::from(p);
        // x = acc + modulus * ((r - acc) * modulus^{-1} mod p)
        let minv = BigInt::from(mod_pow((&modulus % &pb).to_u64().unwrap(), p - 2, p));
        for (a, &ri) in acc.iter_mut().zip(&r) {
            let diff = (BigInt::from(ri) - &*a).mod_floor(&pb);
            let t = (diff * &minv).mod_floor(&pb);
            *a += &modulus * t;
        }
        modulus *= pb;
    }
    let half = &modulus >> 1;
    acc.into_iter()
        .map(|c| if c > half { c - &modulus } else { c })
        .collect()
}

/// `det(xI - M)` of a 3x3 integer matrix, low to high.
pub fn charpoly_3x3(m: &IntMatrix3) -> Vec<BigInt> {
    let tr = &m[0][0] + &m[1][1] + &m[2][2];
    let minors = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0] + &m[0][0] * &m[2][2]
        - &m[0][2] * &m[2][0]
        + &m[1][1] * &m[2][2]
        - &m[1][2] * &m[2][1];
    let det = &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
        - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
        + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0]);
    vec![-det, minors, -tr, BigInt::one()]
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Checks `det(xI_N - A_a) = x^(N-3) det(xI_3 - Â_a)` exactly.
pub fn charpoly_identity(a: &[u32]) -> Result<bool> {
    let full = charpoly(&incidence_matrix(a)?.to_i64());
    let small = charpoly_3x3(&auxiliary_matrix(a)?);
    let n = full.len() - 1;
    if n < 3 {
        return Ok(false);
    }
    let mut shifted = vec![BigInt::zero(); n - 3];
    shifted.extend(small);
    Ok(shifted == full)
}

/// Checks `det(xI_3 - Â_a) = (x - (-1)^k) det(xI_2 - B_a)` exactly.
pub fn divides_auxiliary_factor(a: &[u32]) -> Result<bool> {
    let small = charpoly_3x3(&auxiliary_matrix(a)?);
    let (t, det) = trace_det(a)?;
    let sign = if a.len() % 2 == 0 { 1 } else { -1 };
    let linear = vec![BigInt::from(-sign), BigInt::one()];
    let quad = vec![BigInt::from(det), -t, BigInt::one()];
    let prod = poly_mul(&linear, &quad);
    Ok(prod == small)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    /// Faddeev–LeVerrier over the rationals, independent of the modular path.
    fn faddeev_leverrier(m: &[Vec<i64>]) -> Vec<BigInt> {
        let n = m.len();
        let a: Vec<Vec<BigRational>> = m
            .iter()
            .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
            .collect();
        let mut mk = vec![vec![BigRational::zero(); n]; n];
        let mut coeffs = vec![BigRational::zero(); n + 1];
        coeffs[n] = BigRational::one();
        for k in 1..=n {
            // M_k = A M_{k-1} + c_{n-k+1} I
            let mut next = vec![vec![BigRational::zero(); n]; n];
            for i in 0..n {
                for j in 0..n {
                    let mut s = BigRational::zero();
                    for l in 0..n {
                        s += &a[i][l] * &mk[l][j];
                    }
                    if i == j {
                        s += &coeffs[n - k + 1];
                    }
                    next[i][j] = s;
                }
            }
            mk = next;
            let mut tr = BigRational::zero();
            for i in 0..n {
                for l in 0..n {
                    tr += &a[i][l] * &mk[l][i];
                }
            }
            coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
        }
        coeffs.into_iter().map(|c| c.to_integer()).collect()
    }

    #[test]
    fn golden_charpoly() {
        // x (x + 1) (x^2 - x - 1) = x^4 - 2x^2 - x
        let p = charpoly(&incidence_matrix(&[1]).unwrap().to_i64());
        let expected: Vec<BigInt> = [0, -1, -2, 0, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(p, expected);
    }

    #[test]
    fn modular_matches_faddeev_leverrier() {
        for a in [vec![1], vec![2], vec![1, 2], vec![2, 2], vec![3, 1]] {
            let m = incidence_matrix(&a).unwrap().to_i64();
            assert_eq!(charpoly(&m), faddeev_leverrier(&m), "{a:?}");
        }
        let dense = vec![vec![3, -1, 4, 1], vec![-5, 9, 2, -6], vec![5, 3, -5, 8], vec![9, -7, 9, 3]];
        assert_eq!(charpoly(&dense), faddeev_leverrier(&dense));
    }

    #[test]
    fn identity_examples() {
        for a in [vec![1], vec![2], vec![1, 2], vec![3], vec![1, 2, 1]] {
            assert!(charpoly_identity(&a).unwrap(), "{a:?}");
            assert!(divides_auxiliary_factor(&a).unwrap(), "{a:?}");
        }
    }
}
