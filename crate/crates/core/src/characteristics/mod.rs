//! Spectral exponents `γ < d < D < 𝒯`, their large-coupling constants, the
//! multifractal spectrum of the density of states and local-dimension
//! estimators.

use num_rational::BigRational;
use num_traits::Zero;
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bands::bands_along;
use crate::error::{Error, Result};
use crate::quadratic::{format_log_multiple, QuadSurd};
use crate::symbolic::{iota, parry_measure, perron, BlockShift, BlockWord, ExactParry};
use crate::thermo::{birkhoff_weight, brent, context, mean_cycles, Depth, Potential};

/// Default seed for Parry-random paths.
pub const DEFAULT_SEED: u64 = 0x5eed;
/// Couplings of the `ρ_D` sweep.
pub const SWEEP_LAMBDAS: [f64; 3] = [1e2, 1e3, 1e4];

/// `log E_a` from the exact Perron eigenvalue.
pub fn log_eigenvalue(a: &[u32]) -> Result<f64> {
    let parry = ExactParry::new(&BlockShift::new(a)?)?;
    Ok(parry.eigenvalue.to_float(256).ln().to_f64())
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacteristicErrors {
    pub gamma: f64,
    pub d: f64,
    #[serde(rename = "D")]
    pub dim: f64,
    #[serde(rename = "T")]
    pub transport: f64,
}

/// `γ`, `d`, `D` and `𝒯` at one coupling.
#[derive(Clone, Debug, Serialize)]
pub struct Characteristics {
    pub a: Vec<u32>,
    pub lambda: f64,
    pub gamma: f64,
    pub d: f64,
    #[serde(rename = "D")]
    pub dim: f64,
    #[serde(rename = "T")]
    pub transport: f64,
    pub errors: CharacteristicErrors,
    pub max_len: usize,
    pub truncated: bool,
}

impl Characteristics {
    /// Smallest gap in the chain `γ < d < D < 𝒯`.
    pub fn margin(&self) -> f64 {
        (self.d - self.gamma)
            .min(self.dim - self.d)
            .min(self.transport - self.dim)
    }
}

/// The four exponents at the default depth.
pub fn spectral_characteristics(a: &[u32], lambda: f64) -> Result<Characteristics> {
    characteristics_with(&Potential::new(a, lambda, Depth::default())?)
}

/// The four exponents from a sampled potential; fails if the chain
/// `γ < d < D < 𝒯` is violated.
pub fn characteristics_with(pot: &Potential) -> Result<Characteristics> {
    let a = pot.shift().period().to_vec();
    let p0 = log_eigenvalue(&a)?;
    let limits = pot.limits();
    let d0 = pot.derivative(0.0);
    let d0_err = (d0 - pot.operator().spectral(0.0).slope).abs() + 2.0 * pot.locality();
    let root = pot.bowen_root()?;
    let ratio = |x: f64, dx: f64| (-p0 / x, p0 * dx / (x * x));
    let (gamma, gamma_err) = ratio(limits.minus.value, limits.minus.error);
    let (d, d_err) = ratio(d0, d0_err);
    let (transport, t_err) = ratio(limits.plus.value, limits.plus.error);
    let c = Characteristics {
        a,
        lambda: pot.lambda(),
        gamma,
        d,
        dim: root.value,
        transport,
        errors: CharacteristicErrors {
            gamma: gamma_err,
            d: d_err,
            dim: root.error.max(root.residual / d0.abs()),
            transport: t_err,
        },
        max_len: pot.max_len(),
        truncated: pot.truncated(),
    };
    if !(0.0 < c.gamma && c.gamma < c.d && c.d < c.dim && c.dim < c.transport && c.transport < 1.0) {
        return Err(Error::Invariant(format!(
            "chain 0 < γ < d < D < T < 1 violated: γ={} d={} D={} T={}",
            c.gamma, c.d, c.dim, c.transport
        )));
    }
    Ok(c)
}

/// A constant `coef · log E_a` in closed form and as a decimal.
#[derive(Clone, Debug, Serialize)]
pub struct ExactConstant {
    pub exact: String,
    pub value: f64,
}

impl ExactConstant {
    fn new(coef: &QuadSurd, e: &QuadSurd) -> Self {
        let value = coef.to_float(256) * e.to_float(256).ln();
        Self {
            exact: format_log_multiple(coef, e),
            value: value.to_f64(),
        }
    }
}

/// Evidence for `ρ_D`: `D(λ) log λ` along a coupling sweep.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionSweep {
    pub lambdas: Vec<f64>,
    pub scaled: Vec<f64>,
    /// From the last two points, assuming `1/D` affine in `log λ`.
    pub estimate: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AsymptoticConstants {
    pub a: Vec<u32>,
    #[serde(rename = "F_lower")]
    pub f_lower: String,
    #[serde(rename = "F_upper")]
    pub f_upper: String,
    /// `∫ f dμ_Parry`.
    pub parry_mean: String,
    pub rho_gamma: ExactConstant,
    pub rho_d: ExactConstant,
    #[serde(rename = "rho_T")]
    pub rho_transport: ExactConstant,
    #[serde(rename = "rho_D")]
    pub rho_dim: Option<DimensionSweep>,
}

fn surd_of(r: num_rational::Rational64, d: u64) -> QuadSurd {
    QuadSurd::rational(BigRational::new((*r.numer()).into(), (*r.denom()).into()), d)
}

/// `ρ_γ`, `ρ_d`, `ρ_𝒯` exactly; `ρ_D` is left empty.
pub fn asymptotic_constants(a: &[u32]) -> Result<AsymptoticConstants> {
    let shift = BlockShift::new(a)?;
    let parry = ExactParry::new(&shift)?;
    let cycles = mean_cycles(a)?;
    let e = &parry.eigenvalue;
    let d = e.radicand;
    let mean = parry.integrate(|b| birkhoff_weight(a, shift.block(b)));
    if mean.is_zero() || cycles.f_lower.is_zero() || cycles.f_upper.is_zero() {
        return Err(Error::Invariant("vanishing mean of f".into()));
    }
    let minus_inv = |x: &QuadSurd| -&x.recip();
    Ok(AsymptoticConstants {
        a: a.to_vec(),
        f_lower: cycles.f_lower.to_string(),
        f_upper: cycles.f_upper.to_string(),
        parry_mean: mean.to_string(),
        rho_gamma: ExactConstant::new(&minus_inv(&surd_of(cycles.f_lower, d)), e),
        rho_d: ExactConstant::new(&minus_inv(&mean), e),
        rho_transport: ExactConstant::new(&minus_inv(&surd_of(cycles.f_upper, d)), e),
        rho_dim: None,
    })
}

/// `D(λ) log λ` at each coupling, with the affine-`1/D` extrapolation.
pub fn dimension_sweep(a: &[u32], lambdas: &[f64], depth: Depth) -> Result<DimensionSweep> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidInput("a sweep needs two couplings".into()));
    }
    let roots = lambdas
        .iter()
        .map(|&l| Ok(Potential::new(a, l, depth)?.bowen_root()?.value))
        .collect::<Result<Vec<f64>>>()?;
    let n = lambdas.len();
    let estimate = (lambdas[n - 1].ln() - lambdas[n - 2].ln()) / (1.0 / roots[n - 1] - 1.0 / roots[n - 2]);
    Ok(DimensionSweep {
        lambdas: lambdas.to_vec(),
        scaled: roots.iter().zip(lambdas).map(|(r, l)| r * l.ln()).collect(),
        estimate,
    })
}

/// `τ(q)`: the solution of `P(τ) = q P(0)`.
fn tau(pot: &Potential, p0: f64, q: f64) -> f64 {
    let g = |t: f64| pot.pressure_value(t) - q * p0;
    // P is decreasing: widen until the bracket holds a sign change
    let (mut lo, mut hi) = (-1.0, 1.0);
    while g(lo) < 0.0 {
        lo *= 2.0;
    }
    while g(hi) > 0.0 {
        hi *= 2.0;
    }
    brent(g, lo, hi, g(lo), g(hi), 1e-12)
}

/// One point of the multifractal spectrum.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MultifractalPoint {
    pub beta: f64,
    pub dim: f64,
}

/// Range of `q` searched by the golden-section minimization.
pub const Q_RANGE: f64 = 64.0;

/// `dim Λ_β = inf_q (τ(q) + q β)` for each `β` in `[γ, 𝒯]`.
pub fn multifractal_spectrum(a: &[u32], lambda: f64, betas: &[f64]) -> Result<Vec<MultifractalPoint>> {
    multifractal_with(&Potential::new(a, lambda, Depth::default())?, betas)
}

/// The endpoints `[γ, 𝒯]` of the admissible `β`.
pub fn beta_interval(pot: &Potential) -> Result<(f64, f64)> {
    let p0 = log_eigenvalue(pot.shift().period())?;
    let lim = pot.limits();
    Ok((-p0 / lim.minus.value, -p0 / lim.plus.value))
}

pub fn multifractal_with(pot: &Potential, betas: &[f64]) -> Result<Vec<MultifractalPoint>> {
    let p0 = log_eigenvalue(pot.shift().period())?;
    let (lo, hi) = beta_interval(pot)?;
    betas
        .iter()
        .map(|&beta| {
            if !(lo <= beta && beta <= hi) {
                return Err(Error::Domain { value: beta, lo, hi });
            }
            let f = |q: f64| tau(pot, p0, q) + q * beta;
            let dim = golden_section(f, -Q_RANGE, Q_RANGE, 1e-9);
            Ok(MultifractalPoint { beta, dim: dim.max(0.0) })
        })
        .collect()
}

/// Minimum of a convex function on `[a, b]`.
fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).min(fc).min(fd).min(f(a)).min(f(b))
}

/// Parry mass of the cylinder `[w]`, the density-of-states surrogate; the
/// coupling does not enter.
pub fn dos_mass(a: &[u32], _lambda: f64, w: &BlockWord) -> Result<f64> {
    let shift = BlockShift::new(a)?;
    let p = perron(&shift)?;
    parry_measure(&shift, &p, w)
}

/// Running extremes of `−P(0) n / ψ_n(path|_n)` over `n ∈ [N/2, N]`.
#[derive(Clone, Debug, Serialize)]
pub struct LocalDimension {
    pub lower: f64,
    pub upper: f64,
    /// The value at `n = N`.
    pub last: f64,
}

/// Local-dimension estimates along one path of length at least `depth`.
pub fn local_dimension_estimate(a: &[u32], lambda: f64, path: &BlockWord, depth: usize) -> Result<LocalDimension> {
    let shift = BlockShift::new(a)?;
    if depth < 2 || path.len() < depth || !shift.is_admissible(path.blocks()) {
        return Err(Error::InvalidInput(format!(
            "path of length {} cannot be read to depth {depth}",
            path.len()
        )));
    }
    let p0 = log_eigenvalue(a)?;
    let ctx = context(a, lambda)?;
    let bands = bands_along(&ctx, &iota(&shift, &path.prefix(depth)))?;
    let k = shift.k();
    let est: Vec<f64> = (depth / 2..=depth)
        .map(|n| -p0 * n as f64 / bands[n * k + 1].log_length())
        .collect();
    Ok(LocalDimension {
        lower: est.iter().copied().fold(f64::INFINITY, f64::min),
        upper: est.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        last: *est.last().unwrap(),
    })
}

/// Paths of the Parry Markov chain, drawn from a seeded generator.
pub fn parry_paths(a: &[u32], len: usize, count: usize, seed: u64) -> Result<Vec<BlockWord>> {
    let shift = BlockShift::new(a)?;
    let p = perron(&shift)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial: Vec<f64> = p.left.iter().zip(&p.right).map(|(l, r)| l * r).collect();
    let start = WeightedIndex::new(&initial).map_err(|e| Error::Invariant(e.to_string()))?;
    let steps = (0..shift.len())
        .map(|b| {
            let succ = shift.successors(b);
            WeightedIndex::new(succ.iter().map(|&c| p.right[c]))
                .map_err(|e| Error::Invariant(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..count)
        .map(|_| {
            let mut w = vec![start.sample(&mut rng)];
            while w.len() < len {
                let b = *w.last().unwrap();
                w.push(shift.successors(b)[steps[b].sample(&mut rng)]);
            }
            BlockWord(w)
        })
        .collect())
}

/// A periodic path repeating `cycle` up to length `len`.
pub fn periodic_path(cycle: &[usize], len: usize) -> BlockWord {
    BlockWord(cycle.iter().copied().cycle().take(len).collect())
}
