//! Observation-driven time-series models with feasible invertibility:
//! filter recursions, empirical Lyapunov regions, constrained maximum
//! likelihood and an asymptotic boundary test.
//!
//! The model, filter, invertibility and inference layers are generic over
//! [`Scalar`] (`f32`, `f64`); simulation, estimation and grids work in `f64`.

pub mod error;
pub mod estimate;
pub mod filter;
pub mod grid;
pub mod inference;
pub mod invertibility;
pub mod io;
pub mod model;
pub mod optim;
pub mod scalar;
pub mod simulate;
pub mod special;

pub use error::{Error, Result, Violation};
pub use model::{
    filter_step, filter_step_deriv, lipschitz_coeff, log_density, param_transform, param_untransform,
    param_validate, BetaTGarchParams, CorrectionBound, FilterDomain, FilterKernel, ModelKind, ModelSpec,
    TLocationParams, TvArParams,
};
pub use scalar::Scalar;

pub type ModelSpec64 = ModelSpec<f64>;
pub type ModelSpec32 = ModelSpec<f32>;
pub type BetaTGarch64 = BetaTGarchParams<f64>;
pub type TvAr64 = TvArParams<f64>;
pub type TLocation64 = TLocationParams<f64>;
pub type FilterPath64 = filter::FilterPath<f64>;
pub type DivergenceDiagnostic64 = filter::DivergenceDiagnostic<f64>;
pub type LyapunovEstimate64 = invertibility::LyapunovEstimate<f64>;
pub type TestResult64 = inference::TestResult<f64>;
pub type ConfidenceMembership64 = inference::ConfidenceMembership<f64>;
