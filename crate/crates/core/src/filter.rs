//! Filter recursion over observed data, the averaged log-likelihood and
//! initialization-divergence diagnostics.
//!
//! A series for a model with lag order `k` holds `k` pre-sample values
//! followed by `y_1 … y_n`. The filter value entering the density of `y_t`
//! is `f̂_{t−1}`, built from observations up to `t − 1`; `f̂_0` is the
//! initialization.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FilterKernel, ModelKind, ModelSpec};
use crate::scalar::Scalar;

/// Filtered path `f̂_0 … f̂_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterPath<T> {
    pub values: Vec<T>,
    pub init: T,
    pub spec: ModelSpec<T>,
}

/// Gap between two filters started from different initial values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceDiagnostic<T> {
    pub abs_diff: Vec<T>,
    /// Least-squares slope of `ln |gap_t|` on `t`; `None` with fewer than two usable points.
    pub log_slope: Option<T>,
    pub vanished: bool,
}

/// Gap below which two filter paths count as merged at `t = n`.
pub const VANISHED_TOL: f64 = 1e-10;

pub(crate) fn sample_len<T>(series: &[T], k: usize) -> Result<usize> {
    if series.len() <= k {
        return Err(Error::InvalidArgument(format!(
            "series needs more than {k} observation(s), got {}",
            series.len()
        )));
    }
    Ok(series.len() - k)
}

/// Iterates `f ← φ(f, Y_t^k)` for `t = 1..n`, handing `(t, f̂_{t−1}, window)` to `visit`
/// before each update. Returns the final value `f̂_n`.
fn drive<T: Scalar, F>(series: &[T], spec: &ModelSpec<T>, f0: T, mut visit: F) -> Result<T>
where
    F: FnMut(usize, T, &[T]),
{
    let k = spec.lag_order();
    let n = sample_len(series, k)?;
    if let Some(i) = series.iter().position(|y| !y.is_finite()) {
        return Err(Error::DomainAt { index: i + 1 - k.min(i + 1), message: "non-finite observation".into() });
    }
    let dom = spec.domain();
    if !dom.contains(f0) {
        return Err(Error::Domain(format!("initial value {f0} outside [{}, {}]", dom.lower, dom.upper)));
    }
    let kernel = spec.kernel();
    let mut f = f0;
    for t in 1..=n {
        let window = &series[t - 1..t + k];
        visit(t, f, window);
        f = kernel.step(f, window);
        if !f.is_finite() {
            return Err(Error::DomainAt { index: t, message: format!("filter produced {f}") });
        }
    }
    Ok(f)
}

pub fn run_filter<T: Scalar>(series: &[T], spec: &ModelSpec<T>, f0: T) -> Result<FilterPath<T>> {
    let mut values = Vec::with_capacity(series.len() + 1);
    let last = drive(series, spec, f0, |_, f, _| values.push(f))?;
    values.push(last);
    Ok(FilterPath { values, init: f0, spec: *spec })
}

/// `L̂_n(θ) = n⁻¹ Σ_t log p(y_t | f̂_{t−1}, θ)`.
///
/// A density that underflows makes the result `−∞`; that is a value, not an error.
pub fn log_likelihood<T: Scalar>(series: &[T], spec: &ModelSpec<T>, f0: T) -> Result<T> {
    let kernel = spec.kernel();
    let mut sum = T::zero();
    let mut count = 0usize;
    drive(series, spec, f0, |_, f, w| {
        sum = sum + kernel.log_density(w, f);
        count += 1;
    })?;
    let value = sum / T::from_usize_lossy(count);
    Ok(if value.is_nan() { T::neg_infinity() } else { value })
}

/// Per-observation log-likelihood contributions `l̂_t(θ)`, `t = 1..n`.
pub fn log_likelihood_terms<T: Scalar>(series: &[T], spec: &ModelSpec<T>, f0: T) -> Result<Vec<T>> {
    let kernel: FilterKernel<T> = spec.kernel();
    let mut out = Vec::with_capacity(series.len());
    drive(series, spec, f0, |_, f, w| out.push(kernel.log_density(w, f)))?;
    Ok(out)
}

/// Default `f̂_0`: sample variance clamped to `[ω̄, ∞)` (garch), zero (tv_ar),
/// sample median clamped to `[ω̄_l, ω̄_u]` (location).
pub fn default_init<T: Scalar>(series: &[T], spec: &ModelSpec<T>) -> T {
    let k = spec.lag_order();
    let obs = if series.len() > k { &series[k..] } else { series };
    let dom = spec.domain();
    match spec.kind() {
        ModelKind::BetaTGarch => dom.clamp(sample_variance(obs)),
        ModelKind::TvAr => T::zero(),
        ModelKind::TLocation => dom.clamp(median(obs)),
    }
}

/// Variance with divisor `n` (zero for an empty slice).
pub fn sample_variance<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    let n = T::from_usize_lossy(x.len());
    let mean = x.iter().fold(T::zero(), |a, &b| a + b) / n;
    x.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / n
}

pub fn median<T: Scalar>(x: &[T]) -> T {
    if x.is_empty() {
        return T::zero();
    }
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) * T::lit(0.5)
    }
}

/// Runs the filter from two initializations and summarizes how fast they merge.
pub fn divergence_diagnostic<T: Scalar>(
    series: &[T],
    spec: &ModelSpec<T>,
    f0_a: T,
    f0_b: T,
) -> Result<DivergenceDiagnostic<T>> {
    if f0_a == f0_b {
        return Err(Error::InvalidArgument("the two initial values must differ".into()));
    }
    let a = run_filter(series, spec, f0_a)?;
    let b = run_filter(series, spec, f0_b)?;
    let abs_diff: Vec<T> = a.values.iter().zip(&b.values).map(|(x, y)| (*x - *y).abs()).collect();

    // Gaps at the rounding level of the filter values carry no decay information.
    let tiny = T::lit(1e-300);
    let noise = T::epsilon() * T::lit(1000.0);
    let points: Vec<(T, T)> = abs_diff
        .iter()
        .zip(a.values.iter().zip(&b.values))
        .enumerate()
        .filter(|(_, (d, (x, y)))| **d > tiny && **d > noise * x.abs().max(y.abs()))
        .map(|(t, (d, _))| (T::from_usize_lossy(t), d.ln()))
        .collect();
    let log_slope = ls_slope(&points);
    let vanished = abs_diff.last().map(|d| *d < T::lit(VANISHED_TOL)).unwrap_or(false);
    Ok(DivergenceDiagnostic { abs_diff, log_slope, vanished })
}

fn ls_slope<T: Scalar>(points: &[(T, T)]) -> Option<T> {
    if points.len() < 2 {
        return None;
    }
    let n = T::from_usize_lossy(points.len());
    let mx = points.iter().fold(T::zero(), |a, p| a + p.0) / n;
    let my = points.iter().fold(T::zero(), |a, p| a + p.1) / n;
    let (sxy, sxx) = points.iter().fold((T::zero(), T::zero()), |(sxy, sxx), &(x, y)| {
        (sxy + (x - mx) * (y - my), sxx + (x - mx) * (x - mx))
    });
    let slope = sxy / sxx;
    slope.is_finite().then_some(slope)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{filter_step, lipschitz_coeff, log_density, BetaTGarchParams, TLocationParams, TvArParams};

    fn garch(omega: f64, beta: f64, alpha: f64, gamma: f64, v: f64) -> ModelSpec<f64> {
        ModelSpec::BetaTGarch(BetaTGarchParams::new(omega, beta, alpha, gamma, v))
    }

    fn pseudo_returns(n: usize) -> Vec<f64> {
        (0..n).map(|i| ((i as f64 * 1.7).sin() * 1.3 + (i as f64 * 0.37).cos() * 0.4) * if i % 7 == 0 { 3.0 } else { 1.0 }).collect()
    }

    #[test]
    fn affine_closed_form() {
        let s = garch(0.2, 0.5, 0.0, 0.0, 6.0);
        let p = run_filter(&pseudo_returns(40), &s, 1.0).unwrap();
        assert_eq!(p.values.len(), 41);
        assert_eq!(p.values[0], 1.0);
        for (t, v) in p.values.iter().enumerate() {
            assert!((v - (0.4 + 0.6 * 0.5f64.powi(t as i32))).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_series_follows_affine_map() {
        let s = garch(0.2, 0.7, 0.3, 0.2, 6.0);
        let p = run_filter(&[0.0; 25], &s, 2.0).unwrap();
        for t in 1..p.values.len() {
            assert_eq!(p.values[t], 0.2 + 0.7 * p.values[t - 1]);
        }
    }

    #[test]
    fn matches_naive_loop() {
        let y = pseudo_returns(500);
        let s = garch(0.1, 0.6, 0.08, 0.1, 7.0);
        let p = run_filter(&y, &s, 0.9).unwrap();
        let mut f = 0.9;
        for (t, &yt) in y.iter().enumerate() {
            assert_eq!(p.values[t], f);
            let d = if yt <= 0.0 { 1.0 } else { 0.0 };
            f = 0.1 + 0.6 * f + (0.08 + 0.1 * d) * 8.0 * yt * yt / (5.0 + yt * yt / f);
            assert!((p.values[t + 1] - f).abs() <= 1e-12 * f);
            f = p.values[t + 1];
        }
    }

    #[test]
    fn tv_ar_uses_lagged_window() {
        let s = ModelSpec::TvAr(TvArParams::new(0.05, 0.8, 0.1, 1.0, 5.0));
        let y = pseudo_returns(30);
        let p = run_filter(&y, &s, 0.0).unwrap();
        assert_eq!(p.values.len(), 30);
        for t in 1..30 {
            assert_eq!(p.values[t], filter_step(p.values[t - 1], &y[t - 1..=t], &s).unwrap());
        }
    }

    #[test]
    fn single_observation_likelihood() {
        let s = garch(0.1, 0.6, 0.08, 0.1, 7.0);
        let ll = log_likelihood(&[0.7], &s, 0.5).unwrap();
        assert_eq!(ll, log_density(&[0.7], 0.5, &s).unwrap());
        let y = pseudo_returns(300);
        assert_eq!(log_likelihood(&y, &s, 0.5).unwrap(), log_likelihood(&y, &s, 0.5).unwrap());
        let terms = log_likelihood_terms(&y, &s, 0.5).unwrap();
        let mean = terms.iter().sum::<f64>() / terms.len() as f64;
        assert!((mean - log_likelihood(&y, &s, 0.5).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_index() {
        let s = garch(0.1, 0.6, 0.08, 0.1, 7.0);
        assert!(matches!(run_filter(&[1.0, f64::NAN], &s, 0.5), Err(Error::DomainAt { index: 2, .. })));
        assert!(run_filter::<f64>(&[], &s, 0.5).is_err());
        assert!(run_filter(&[1.0], &s, 0.01).is_err());
    }

    #[test]
    fn likelihood_is_continuous_in_theta() {
        let y = pseudo_returns(1000);
        let s = garch(0.1, 0.6, 0.08, 0.1, 7.0);
        let base = log_likelihood(&y, &s, 1.0).unwrap();
        for (i, name) in ["omega", "beta", "alpha", "gamma", "v"].iter().enumerate() {
            let bumped = s.with_param(name, s.to_vec()[i] + 1e-8).unwrap();
            let ll = log_likelihood(&y, &bumped, 1.0).unwrap();
            assert!((ll - base).abs() < 1e-4, "{name}");
        }
    }

    #[test]
    fn default_inits() {
        let y = vec![1.0, -1.0, 3.0, -3.0];
        let g = garch(0.1, 0.5, 0.1, 0.1, 6.0);
        assert_eq!(default_init(&y, &g), 5.0);
        let g = garch(4.0, 0.5, 0.1, 0.1, 6.0);
        assert_eq!(default_init(&y, &g), 8.0);
        let t = ModelSpec::TvAr(TvArParams::new(0.1, 0.5, 0.1, 1.0, 6.0));
        assert_eq!(default_init(&y, &t), 0.0);
        let l = ModelSpec::TLocation(TLocationParams::new(0.0, 0.5, 0.1, 1.0, 6.0));
        assert_eq!(default_init(&y, &l), l.domain().clamp(0.0));
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn affine_gap_decays_geometrically() {
        let s = garch(0.2, 0.5, 0.0, 0.0, 6.0);
        let d = divergence_diagnostic(&pseudo_returns(30), &s, 1.0, 3.0).unwrap();
        for (t, g) in d.abs_diff.iter().enumerate() {
            assert!((g - 2.0 * 0.5f64.powi(t as i32)).abs() < 1e-14);
        }
        assert!((d.log_slope.unwrap() - 0.5f64.ln()).abs() < 1e-6);
        assert!(!d.vanished);
        assert!(divergence_diagnostic(&pseudo_returns(30), &s, 1.0, 1.0).is_err());
    }

    #[test]
    fn gap_respects_lipschitz_product() {
        let y = pseudo_returns(400);
        for s in [
            garch(0.05, 0.6, 0.1, 0.15, 5.0),
            ModelSpec::TLocation(TLocationParams::new(0.1, 0.7, 0.8, 1.0, 4.0)),
        ] {
            let dom = s.domain();
            let (a, b) = if dom.upper.is_finite() { (dom.lower, dom.upper) } else { (dom.lower, dom.lower + 10.0) };
            let d = divergence_diagnostic(&y, &s, a, b).unwrap();
            let mut bound = (a - b).abs();
            for t in 1..d.abs_diff.len() {
                bound *= lipschitz_coeff(&y[t - 1..t], &s).unwrap();
                assert!(d.abs_diff[t] <= bound * (1.0 + 1e-9) + 1e-15, "t={t}");
            }
        }
    }
}
