//! Characteristic polynomials of random permutation matrices drawn from the
//! generalized Ewens measure, evaluated on the open unit disk, together with
//! exact generating-function oracles and a sampler for the Poisson limit field
//! `F(z) = exp(-sum_k X_k z^k / k)`.
//!
//! Layout:
//! - [`weights`]: weight families `theta_k` and their generating functions `g`, `G`.
//! - [`series`]: truncated complex power series and exact coefficient extraction.
//! - [`ewens`]: cycle types, the exact measure, enumeration and exact sampling.
//! - [`charpoly`]: `p_n(z)`, traces and secular coefficients from a cycle type.
//! - [`limit_field`]: Poisson limit field samples, mean and covariance.
//! - [`stats`]: Monte Carlo experiments and distribution distances.
//! - [`portrait`]: domain-coloring phase portraits written as binary PPM.

pub mod charpoly;
pub mod complex;
pub mod ensemble;
pub mod error;
pub mod ewens;
pub mod limit_field;
pub mod portrait;
pub mod series;
pub mod stats;
pub mod weights;

pub use num_complex::Complex64;

pub use charpoly::{eval_charpoly, secular_coeffs, traces, CharPolyEval};
pub use error::{Error, Result};
pub use ewens::{
    cycle_type_prob, enumerate_types, sample_cycle_type, weight, CycleSampler, CycleType, PermutationSample,
};
pub use limit_field::{cov_f, mean_limit, sample_limit, LimitFieldSample, LimitSampler};
pub use series::{
    h_coeffs, joint_cycle_cf_exact, second_moment_curve, second_moment_exact, NormalizingConstants, PowerSeries,
};
pub use stats::McReport;
pub use weights::{Family, ThetaSequence};
