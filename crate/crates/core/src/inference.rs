//! Boundary test for the Lyapunov condition with a Newey–West long-run
//! variance, and the confidence-set memberships built on it.
//!
//! The asymptotic normality behind the test presumes geometrically mixing
//! data; that cannot be verified from a sample and is not checked.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invertibility::log_lambdas;
use crate::model::ModelSpec;
use crate::scalar::Scalar;
use crate::special::{normal_cdf, normal_quantile};

/// HAC variances below this are treated as a constant `log Λ_t` stream.
pub const DEGENERATE_VARIANCE: f64 = 1e-14;
/// Smallest sample accepted by [`invertibility_test`].
pub const MIN_TEST_OBS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub t_stat: T,
    pub sigma2_hat: T,
    pub bandwidth: usize,
    pub mean_log_lambda: T,
    pub p_two_sided: T,
    pub p_left: T,
    pub p_right: T,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceMembership<T> {
    pub alpha: T,
    /// `T_n < z_{1−α}`
    pub in_up: bool,
    /// `T_n < z_α`
    pub in_lo: bool,
    pub test: TestResult<T>,
}

/// `⌊4 (n/100)^{2/9}⌋`.
pub fn default_bandwidth(n: usize) -> usize {
    (4.0 * (n as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

/// Bartlett-weighted long-run variance `γ̂_0 + 2 Σ_{j≤m} (1 − j/(m+1)) γ̂_j`.
pub fn newey_west_variance<T: Scalar>(x: &[T], bandwidth: usize) -> Result<T> {
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 observations, got {n}")));
    }
    if bandwidth >= n {
        return Err(Error::InvalidArgument(format!("bandwidth {bandwidth} must be below n = {n}")));
    }
    let nf = T::from_usize_lossy(n);
    let mean = x.iter().fold(T::zero(), |a, &b| a + b) / nf;
    let centered: Vec<T> = x.iter().map(|&v| v - mean).collect();
    let autocov = |j: usize| {
        centered[j..].iter().zip(&centered[..n - j]).fold(T::zero(), |a, (&p, &q)| a + p * q) / nf
    };
    let mut s = autocov(0);
    let m1 = T::from_usize_lossy(bandwidth + 1);
    for j in 1..=bandwidth {
        let w = T::one() - T::from_usize_lossy(j) / m1;
        s = s + T::lit(2.0) * w * autocov(j);
    }
    Ok(s.max(T::zero()))
}

/// `T_n = n^{−1/2} Σ x_t / σ̂_n` computed on a given stream `x_t = log Λ_t(θ)`.
pub fn boundary_test<T: Scalar>(log_lambdas: &[T], bandwidth: Option<usize>) -> Result<TestResult<T>> {
    let n = log_lambdas.len();
    if let Some(bad) = log_lambdas.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("log Lambda_t = {bad}; the test needs finite terms")));
    }
    let m = bandwidth.unwrap_or_else(|| default_bandwidth(n));
    let sigma2 = newey_west_variance(log_lambdas, m)?;
    if sigma2 < T::lit(DEGENERATE_VARIANCE) {
        return Err(Error::DegenerateVariance { sigma2: sigma2.to_f64_lossy() });
    }
    let nf = T::from_usize_lossy(n);
    let sum = log_lambdas.iter().fold(T::zero(), |a, &b| a + b);
    let t_stat = sum / nf.sqrt() / sigma2.sqrt();
    let p_left = normal_cdf(t_stat);
    let p_right = normal_cdf(-t_stat);
    Ok(TestResult {
        t_stat,
        sigma2_hat: sigma2,
        bandwidth: m,
        mean_log_lambda: sum / nf,
        p_two_sided: (T::lit(2.0) * normal_cdf(-t_stat.abs())).min(T::one()),
        p_left,
        p_right,
        n,
    })
}

/// Test of `H_0: E log Λ_0(θ) = 0` on the data.
pub fn invertibility_test<T: Scalar>(series: &[T], spec: &ModelSpec<T>, bandwidth: Option<usize>) -> Result<TestResult<T>> {
    spec.validate()?;
    let x = log_lambdas(series, spec)?;
    if x.len() < MIN_TEST_OBS {
        return Err(Error::InvalidArgument(format!(
            "the boundary test needs at least {MIN_TEST_OBS} observations, got {}",
            x.len()
        )));
    }
    boundary_test(&x, bandwidth)
}

/// `(T_n < z_{1−α}, T_n < z_α)`.
pub fn memberships<T: Scalar>(t_stat: T, alpha: T) -> Result<(bool, bool)> {
    if !(alpha > T::zero() && alpha <= T::lit(0.5)) {
        return Err(Error::InvalidArgument(format!("confidence level alpha must lie in (0, 0.5], got {alpha}")));
    }
    let z_hi = normal_quantile(T::one() - alpha)?;
    let z_lo = normal_quantile(alpha)?;
    Ok((t_stat < z_hi, t_stat < z_lo))
}

pub fn confidence_membership<T: Scalar>(
    series: &[T],
    spec: &ModelSpec<T>,
    alpha: T,
    bandwidth: Option<usize>,
) -> Result<ConfidenceMembership<T>> {
    memberships(T::zero(), alpha)?;
    let test = invertibility_test(series, spec, bandwidth)?;
    let (in_up, in_lo) = memberships(test.t_stat, alpha)?;
    Ok(ConfidenceMembership { alpha, in_up, in_lo, test })
}
