//! Perron–Frobenius data of the block shift and its Parry measure.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::quadratic::QuadSurd;

use super::{admissible, convergent_matrix, BandType, BlockShift, BlockWord};

const POWER_TOL: f64 = 1e-13;
const MAX_ITER: usize = 100_000;

/// Perron eigenvalue with positive left/right eigenvectors, `left . right = 1`.
#[derive(Clone, Debug)]
pub struct PerronData {
    pub eigenvalue: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

/// Trace and determinant of `B_a`, which determine `E_a`.
pub(crate) fn trace_det(a: &[u32]) -> Result<(BigInt, i64)> {
    let b = convergent_matrix(a)?;
    let det = if a.len() % 2 == 0 { 1 } else { -1 };
    Ok((&b[0][0] + &b[1][1], det))
}

fn eigenvalue_from_b(a: &[u32]) -> Result<f64> {
    let (t, det) = trace_det(a)?;
    let t = t.to_f64().unwrap_or(f64::INFINITY);
    let disc = t * t - 4.0 * det as f64;
    // larger root, computed without cancellation
    Ok((t + disc.sqrt()) / 2.0)
}

fn power_iteration(
    n: usize,
    apply: impl Fn(&[f64], &mut [f64]),
) -> Result<(f64, Vec<f64>)> {
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_ITER {
        apply(&x, &mut y);
        let num: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        let den: f64 = x.iter().map(|a| a * a).sum();
        let mu = num / den;
        residual = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - mu * xi).abs())
            .fold(0.0, f64::max)
            / y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let s: f64 = y.iter().sum();
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / s;
        }
        if residual < POWER_TOL {
            return Ok((mu, x));
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITER,
        residual,
    })
}

/// Perron data of the incidence matrix of `a`.
///
/// The eigenvalue comes from the 2x2 matrix `B_a`; the eigenvectors from power
/// iteration on `A_a`, whose Rayleigh quotient must agree with it to `1e-10`.
pub fn perron(shift: &BlockShift) -> Result<PerronData> {
    let e_b = eigenvalue_from_b(shift.period())?;
    let m = shift.incidence();
    let n = m.size();
    let (mu_r, right) = power_iteration(n, |x, y| {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (0..n).filter(|&j| m.get(i, j)).map(|j| x[j]).sum();
        }
    })?;
    let (mu_l, mut left) = power_iteration(n, |x, y| {
        for (j, yj) in y.iter_mut().enumerate() {
            *yj = (0..n).filter(|&i| m.get(i, j)).map(|i| x[i]).sum();
        }
    })?;
    for mu in [mu_r, mu_l] {
        if (mu - e_b).abs() > 1e-10 * e_b {
            return Err(Error::Invariant(format!(
                "Perron eigenvalue mismatch: B_a gives {e_b}, A_a gives {mu}"
            )));
        }
    }
    let dot: f64 = left.iter().zip(&right).map(|(l, r)| l * r).sum();
    for l in &mut left {
        *l /= dot;
    }
    Ok(PerronData {
        eigenvalue: e_b,
        left,
        right,
    })
}

/// Maximal-entropy (Parry) mass of the cylinder `[w]`.
pub fn parry_measure(shift: &BlockShift, perron: &PerronData, w: &BlockWord) -> Result<f64> {
    if w.is_empty() || !shift.is_admissible(w.blocks()) {
        return Err(Error::Inadmissible(w.format(shift)));
    }
    let first = w.blocks()[0];
    let last = w.blocks()[w.len() - 1];
    Ok(perron.left[first] * perron.right[last]
        * perron.eigenvalue.powi(-(w.len() as i32 - 1)))
}

/// Exact Perron data in `Q(sqrt(d))`.
///
/// The incidence factors as `U V` through the three band types (rows depend
/// on the tail type, columns on the header), so the Perron vectors of `A_a`
/// are lifted from the 3x3 type-transition matrix `V U`.
#[derive(Clone, Debug)]
pub struct ExactParry {
    pub eigenvalue: QuadSurd,
    /// Cylinder masses of single blocks, summing to one.
    pub masses: Vec<QuadSurd>,
    pub type_matrix: [[i64; 3]; 3],
}

fn cross(u: &[QuadSurd; 3], v: &[QuadSurd; 3]) -> [QuadSurd; 3] {
    [
        &(&u[1] * &v[2]) - &(&u[2] * &v[1]),
        &(&u[2] * &v[0]) - &(&u[0] * &v[2]),
        &(&u[0] * &v[1]) - &(&u[1] * &v[0]),
    ]
}

fn null_vector(rows: [[QuadSurd; 3]; 3]) -> Result<[QuadSurd; 3]> {
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let c = cross(&rows[i], &rows[j]);
        if c.iter().any(|x| !x.is_zero()) {
            return Ok(c);
        }
    }
    Err(Error::Invariant("eigenspace is not one-dimensional".into()))
}

impl ExactParry {
    pub fn new(shift: &BlockShift) -> Result<Self> {
        let (t, det) = trace_det(shift.period())?;
        let disc = &t * &t - BigInt::from(4 * det);
        let disc = disc
            .to_u64()
            .ok_or_else(|| Error::InvalidInput("period too long for exact Perron data".into()))?;
        let e = QuadSurd::from_parts(t, 1.into(), disc, 2.into());
        let d = e.radicand;

        let mut c = [[0i64; 3]; 3];
        for b in shift.blocks() {
            for from in BandType::ALL {
                if admissible(from, b.header()) {
                    c[from.index()][b.tail_type().index()] += 1;
                }
            }
        }
        let shifted = |transpose: bool| -> [[QuadSurd; 3]; 3] {
            std::array::from_fn(|i| {
                std::array::from_fn(|j| {
                    let v = if transpose { c[j][i] } else { c[i][j] };
                    let x = QuadSurd::from_int(v, d);
                    if i == j {
                        &x - &e
                    } else {
                        x
                    }
                })
            })
        };
        let y = null_vector(shifted(false))?;
        let x = null_vector(shifted(true))?;

        let zero = QuadSurd::from_int(0, d);
        let mut raw = Vec::with_capacity(shift.len());
        for b in shift.blocks() {
            let mut l = zero.clone();
            for from in BandType::ALL {
                if admissible(from, b.header()) {
                    l = &l + &x[from.index()];
                }
            }
            raw.push(&l * &y[b.tail_type().index()]);
        }
        let total = raw.iter().fold(zero, |acc, v| &acc + v);
        if total.is_zero() {
            return Err(Error::Invariant("degenerate Perron vectors".into()));
        }
        let masses = raw.iter().map(|v| v / &total).collect::<Vec<_>>();
        if masses.iter().any(|m| m.is_negative() || m.is_zero()) {
            return Err(Error::Invariant("Parry masses not positive".into()));
        }
        Ok(Self {
            eigenvalue: e,
            masses,
            type_matrix: c,
        })
    }

    /// `sum_b weight(b) * mass(b)` for integer block weights.
    pub fn integrate(&self, weight: impl Fn(usize) -> i64) -> QuadSurd {
        let d = self.eigenvalue.radicand;
        self.masses
            .iter()
            .enumerate()
            .fold(QuadSurd::from_int(0, d), |acc, (b, m)| {
                &acc + &(&QuadSurd::from_int(weight(b), d) * m)
            })
    }
}
