//! Empirical Lyapunov condition, the estimated invertibility region and the
//! data-free sufficient conditions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::sample_len;
use crate::model::{BetaTGarchParams, ModelSpec, TLocationParams};
use crate::scalar::Scalar;

/// Default margin `δ` for the estimated region.
pub const DEFAULT_DELTA: f64 = 0.01;

/// `n⁻¹ Σ log Λ_t(θ)` together with the number of terms where `Λ_t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovEstimate<T> {
    pub value: T,
    pub zero_terms: usize,
    pub n: usize,
}

impl<T: Scalar> LyapunovEstimate<T> {
    pub fn is_degenerate(&self) -> bool {
        self.zero_terms > 0
    }
}

/// `log Λ_t(θ)` for `t = 1..n`, indexed like the filter recursion.
pub fn log_lambdas<T: Scalar>(series: &[T], spec: &ModelSpec<T>) -> Result<Vec<T>> {
    let k = spec.lag_order();
    let n = sample_len(series, k)?;
    if let Some(i) = series.iter().position(|y| !y.is_finite()) {
        return Err(Error::Domain(format!("non-finite observation at position {i}")));
    }
    let kernel = spec.kernel();
    Ok((1..=n).map(|t| kernel.lambda(&series[t - 1..t + k]).ln()).collect())
}

pub fn empirical_lyapunov<T: Scalar>(series: &[T], spec: &ModelSpec<T>) -> Result<LyapunovEstimate<T>> {
    let logs = log_lambdas(series, spec)?;
    let zero_terms = logs.iter().filter(|x| x.is_infinite()).count();
    let n = logs.len();
    let value = if zero_terms > 0 {
        T::neg_infinity()
    } else {
        logs.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(n)
    };
    Ok(LyapunovEstimate { value, zero_terms, n })
}

/// Membership of the estimated region: empirical Lyapunov value `≤ −δ`.
pub fn in_region<T: Scalar>(series: &[T], spec: &ModelSpec<T>, delta: T) -> Result<bool> {
    if !(delta > T::zero()) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    Ok(empirical_lyapunov(series, spec)?.value <= -delta)
}

/// `½ log|β + α(v+1)| + ½ log|β + (α+γ)(v+1)|`; negative values are sufficient
/// for invertibility when returns are symmetric around zero.
pub fn feasible_condition_garch<T: Scalar>(p: &BetaTGarchParams<T>) -> T {
    let half = T::lit(0.5);
    let vp1 = p.v + T::one();
    half * (p.beta + p.alpha * vp1).abs().ln() + half * (p.beta + (p.alpha + p.gamma) * vp1).abs().ln()
}

/// Data-free bound `max(|β − α|, |β + α/8|) ≥ Λ_t` for the location model.
pub fn location_sup_bound<T: Scalar>(p: &TLocationParams<T>) -> T {
    (p.beta - p.alpha).abs().max((p.beta + p.alpha * T::lit(0.125)).abs())
}
