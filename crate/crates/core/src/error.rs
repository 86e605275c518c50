use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("word is not admissible: {0}")]
    Inadmissible(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("precision exhausted at {bits} bits: {context}")]
    PrecisionExhausted { bits: u32, context: String },

    #[error("band structure violated below {parent}: expected {expected} children, found {found} (grid of {grid} points)")]
    Structure {
        parent: String,
        expected: String,
        found: String,
        grid: usize,
    },

    #[error("enumeration budget exceeded: {enumerated} words enumerated, cap {cap}")]
    Budget { enumerated: u64, cap: u64 },

    #[error("no sign change of the pressure on [{lo}, {hi}]: P(lo)={p_lo}, P(hi)={p_hi}")]
    NoRoot {
        lo: f64,
        hi: f64,
        p_lo: f64,
        p_hi: f64,
    },

    #[error("value {value} outside the admissible interval [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;
