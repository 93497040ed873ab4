//! Bijections between admissible parameter sets and unconstrained vectors.
//!
//! Bounded coordinates are kept a small inset away from their boundaries so
//! every unconstrained vector maps to an admissible, numerically safe point.

use super::{CorrectionBound, ModelKind, ModelSpec};
use crate::scalar::Scalar;

pub const OMEGA_FLOOR: f64 = 1e-8;
pub const BETA_FLOOR: f64 = 1e-8;
pub const BETA_CEIL: f64 = 1.0 - 1e-6;
pub const V_INSET: f64 = 1e-6;
/// Smallest positive value fed to a log when a coordinate sits on its bound.
const POS_FLOOR: f64 = 1e-12;

fn safe_ln<T: Scalar>(x: T) -> T {
    x.max(T::lit(POS_FLOOR)).ln()
}

fn logit<T: Scalar>(p: T) -> T {
    let eps = T::lit(1e-15);
    let p = p.max(eps).min(T::one() - eps);
    (p / (T::one() - p)).ln()
}

fn logistic<T: Scalar>(x: T) -> T {
    T::one() / (T::one() + (-x).exp())
}

fn atanh_clamped<T: Scalar>(x: T) -> T {
    let lim = T::one() - T::lit(1e-15);
    x.max(-lim).min(lim).atanh()
}

/// Maps admissible parameters to the unconstrained coordinates used by the optimizer.
pub fn param_transform<T: Scalar>(spec: &ModelSpec<T>) -> Vec<T> {
    match *spec {
        ModelSpec::BetaTGarch(p) => {
            let lo = T::lit(BETA_FLOOR);
            let span = T::lit(BETA_CEIL) - lo;
            vec![
                safe_ln(p.omega - T::lit(OMEGA_FLOOR)),
                logit((p.beta - lo) / span),
                safe_ln(p.alpha),
                safe_ln(p.gamma + p.alpha),
                safe_ln(p.v - T::lit(2.0 + V_INSET)),
            ]
        }
        ModelSpec::TvAr(p) => vec![p.omega, p.beta, p.alpha, safe_ln(p.sigma), safe_ln(p.v)],
        ModelSpec::TLocation(p) => vec![
            p.omega,
            atanh_clamped(p.beta / T::lit(BETA_CEIL)),
            p.alpha,
            safe_ln(p.sigma),
            safe_ln(p.v),
        ],
    }
}

/// Inverse of [`param_transform`]; every finite input yields admissible parameters.
pub fn param_untransform<T: Scalar>(x: &[T], kind: ModelKind) -> ModelSpec<T> {
    assert_eq!(x.len(), 5, "parameter vector must have 5 coordinates");
    // half the log range keeps ω/(1−β) finite at the β ceiling
    let cap = T::max_value().ln() / T::lit(2.0) - T::lit(2.0);
    let c = |v: T| if v.is_nan() { T::zero() } else { v.max(-cap).min(cap) };
    let x: Vec<T> = x.iter().map(|&v| c(v)).collect();
    let raw = match kind {
        ModelKind::BetaTGarch => {
            let lo = T::lit(BETA_FLOOR);
            let span = T::lit(BETA_CEIL) - lo;
            let alpha = x[2].exp();
            vec![
                T::lit(OMEGA_FLOOR) + x[0].exp(),
                lo + span * logistic(x[1]),
                alpha,
                x[3].exp() - alpha,
                T::lit(2.0 + V_INSET) + x[4].exp(),
            ]
        }
        ModelKind::TvAr | ModelKind::TLocation => {
            // σ and v enter the correction bound as a product with α
            let scale_cap = cap / T::lit(4.0);
            let sigma = x[3].max(-scale_cap).min(scale_cap).exp();
            let v = x[4].max(-scale_cap).min(scale_cap).exp();
            let beta = if kind == ModelKind::TvAr { x[1] } else { T::lit(BETA_CEIL) * x[1].tanh() };
            vec![x[0], beta, x[2], sigma, v]
        }
    };
    let mut spec = ModelSpec::from_vec(kind, &raw).expect("five coordinates");
    if let ModelSpec::TLocation(p) = &mut spec {
        p.bound = CorrectionBound::Analytic;
    }
    spec
}
