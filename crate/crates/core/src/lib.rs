//! Spectral band coverings, coding subshifts and pressure-based spectral
//! exponents for Sturm Hamiltonians with eventually periodic frequencies.

pub mod bands;
pub mod characteristics;
pub mod error;
pub mod frequency;
pub mod quadratic;
pub mod symbolic;
pub mod thermo;
pub mod verify;

pub use error::{Error, Result};
pub use frequency::{check_alpha, Convergents, FrequencySpec};
pub use quadratic::QuadSurd;
pub use symbolic::{BandType, BlockShift, BlockWord, CodeWord, Letter};
pub use thermo::{Depth, Potential, PressureCurve};
pub use characteristics::{
    asymptotic_constants, multifractal_spectrum, spectral_characteristics, AsymptoticConstants, Characteristics,
    MultifractalPoint,
};
pub use verify::{run_suite, AuditReport, SuiteConfig};
