//! Increasing homeomorphisms of `[-1, 1]`: evaluation, inversion, the
//! pairing `Q`, the structural operators and distribution functions.

mod bounds;
mod map;
mod pairing;
mod quad;

pub use bounds::Interval;
pub use map::{even_part, odot, star, EvenPart, MonotoneMap, Perturbation, INVERT_MAX_ITER, INVERT_TOL};
pub use pairing::{
    beat_matrix, beat_prob_continuous, classify, integral, inverse_cdf_sample, q, sign_of, to_unit_interval,
    DistributionFunction, QuantileTable, Sign,
};
pub use quad::{integrate, QuadratureConfig, QUAD_TOL_ENV};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HomeoError {
    #[error("argument {0} outside [-1, 1]")]
    OutOfDomain(f64),
    #[error("inversion at {y} stalled with residual {residual:.3e}")]
    ToleranceNotReached { y: f64, residual: f64 },
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error_estimate:.3e})")]
    QuadratureFailure { a: f64, b: f64, error_estimate: f64 },
    #[error("invalid map: {0}")]
    InvalidMap(String),
}
