//! Fourier-based metrics between complex-valued finite Borel measures.
//!
//! For an integer `m ≥ 2` the distance
//!
//! ```text
//! d_m(μ, ν) = sup_{ξ ≠ 0} |μ̂(ξ) − ν̂(ξ)| / |ξ|^m,     μ̂(ξ) = ∫ e^{−i x·ξ} dμ(x)
//! ```
//!
//! is finite on classes of measures whose moments agree up to order `m`.
//! This crate evaluates it as a searched supremum with a certified far-field
//! tail bound, and ships the spectral family
//!
//! ```text
//! φ_δ(ξ) = (P(ξ) + |ξ|^{m+2} sin(|ξ|^{−m}) e^{−δ/|ξ|²}) e^{−|ξ|^{2m}}
//! ```
//!
//! whose members (`δ > 0`) form a Cauchy sequence in `d_m` with prescribed
//! moments, while the pointwise limit `φ_0` is not twice differentiable and so
//! cannot be the transform of any measure in the class.
//!
//! Modules:
//!
//! - [`multiindex`]: multi-index arithmetic and graded-lexicographic enumeration
//! - [`measure`]: discrete, grid-density and spectral measure representations
//! - [`fourier`]: transforms, derivatives, moment recovery, inverse transform
//! - [`metric`]: the supremum search, divergence detection, axiom probes
//! - [`counterexample`]: the `φ_δ` family and the non-completeness probes
//! - [`specfile`]: the JSON measure-spec format
//! - [`cli`]: the `fourier-metric` command-line front end

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod counterexample;
pub mod fourier;
pub mod measure;
pub mod metric;
pub mod multiindex;
pub mod specfile;

pub use num_complex::Complex64 as C64;

pub use counterexample::PhiDeltaFamily;
pub use measure::{ComplexMeasure, DiscreteMeasure, GridDensity, GridSpec, MomentSpec};
pub use metric::{dm, DmOptions, MetricEstimate};
pub use multiindex::MultiIndex;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("multi-index {alpha} is not ≤ {beta}")]
    NotLeq { alpha: MultiIndex, beta: MultiIndex },

    #[error("moment of order {requested} requested, representation declares order {declared}")]
    MomentOrderExceeded { requested: u32, declared: u32 },

    #[error("moment spec is missing beta={0}")]
    IncompleteMoments(MultiIndex),

    #[error("operation not supported for {0}")]
    Unsupported(&'static str),

    #[error("ratio is undefined at xi = 0")]
    ZeroFrequency,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("phi_delta with delta = 0 is not the transform of a measure in the moment class")]
    SingularFamily,

    #[error(
        "frequency truncation at radius {radius} leaves relative edge magnitude {edge:e} above {tolerance:e}"
    )]
    Truncation {
        radius: f64,
        edge: f64,
        tolerance: f64,
    },

    #[error("divergent ratio near the origin{}: growth exponent {exponent}", beta.as_ref().map(|b| format!(" (beta={b})")).unwrap_or_default())]
    Divergent {
        beta: Option<MultiIndex>,
        direction: Vec<f64>,
        exponent: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
