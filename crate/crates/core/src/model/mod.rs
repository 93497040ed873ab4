//! The three observation-driven models: parameters, filter map `φ`, its
//! derivative in `f`, the stochastic Lipschitz coefficient `Λ_t` and the
//! conditional log-density.
//!
//! Observation windows are passed in chronological order with the current
//! observation last, i.e. `[y_{t−k}, …, y_t]`.

mod params;
mod transform;

use serde::{Deserialize, Serialize};

pub use params::{BetaTGarchParams, CorrectionBound, TLocationParams, TvArParams};
pub use transform::{param_transform, param_untransform, BETA_CEIL, BETA_FLOOR, OMEGA_FLOOR, V_INSET};

use crate::error::{Error, Result, Violation};
use crate::scalar::Scalar;
use crate::special::ln_gamma_half_ratio;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    BetaTGarch,
    TvAr,
    TLocation,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::BetaTGarch, ModelKind::TvAr, ModelKind::TLocation];

    /// Number of lagged observations the filter map needs.
    pub fn lag_order(self) -> usize {
        match self {
            ModelKind::TvAr => 1,
            _ => 0,
        }
    }

    /// Parameter names in vector order.
    pub fn param_names(self) -> [&'static str; 5] {
        match self {
            ModelKind::BetaTGarch => ["omega", "beta", "alpha", "gamma", "v"],
            ModelKind::TvAr | ModelKind::TLocation => ["omega", "beta", "alpha", "sigma", "v"],
        }
    }

    pub fn param_index(self, name: &str) -> Option<usize> {
        self.param_names().iter().position(|n| *n == name)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::BetaTGarch => "beta_t_garch",
            ModelKind::TvAr => "tv_ar",
            ModelKind::TLocation => "t_location",
        }
    }
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beta_t_garch" | "garch" => Ok(ModelKind::BetaTGarch),
            "tv_ar" => Ok(ModelKind::TvAr),
            "t_location" | "location" => Ok(ModelKind::TLocation),
            other => Err(Error::InvalidArgument(format!("unknown model kind '{other}'"))),
        }
    }
}

/// A model together with its static parameter vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelSpec<T> {
    BetaTGarch(BetaTGarchParams<T>),
    TvAr(TvArParams<T>),
    TLocation(TLocationParams<T>),
}

impl<T: Scalar> ModelSpec<T> {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelSpec::BetaTGarch(_) => ModelKind::BetaTGarch,
            ModelSpec::TvAr(_) => ModelKind::TvAr,
            ModelSpec::TLocation(_) => ModelKind::TLocation,
        }
    }

    pub fn lag_order(&self) -> usize {
        self.kind().lag_order()
    }

    /// Every violated constraint; empty when the parameters are admissible.
    pub fn violations(&self) -> Vec<Violation> {
        match self {
            ModelSpec::BetaTGarch(p) => p.violations(),
            ModelSpec::TvAr(p) => p.violations(),
            ModelSpec::TLocation(p) => p.violations(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(v))
        }
    }

    pub fn to_vec(&self) -> Vec<T> {
        match *self {
            ModelSpec::BetaTGarch(p) => vec![p.omega, p.beta, p.alpha, p.gamma, p.v],
            ModelSpec::TvAr(p) => vec![p.omega, p.beta, p.alpha, p.sigma, p.v],
            ModelSpec::TLocation(p) => vec![p.omega, p.beta, p.alpha, p.sigma, p.v],
        }
    }

    /// Builds a spec from a parameter vector in [`ModelKind::param_names`] order.
    /// Admissibility is not checked.
    pub fn from_vec(kind: ModelKind, x: &[T]) -> Result<Self> {
        if x.len() != 5 {
            return Err(Error::InvalidArgument(format!(
                "{kind} takes 5 parameters, got {}",
                x.len()
            )));
        }
        Ok(match kind {
            ModelKind::BetaTGarch => ModelSpec::BetaTGarch(BetaTGarchParams::new(x[0], x[1], x[2], x[3], x[4])),
            ModelKind::TvAr => ModelSpec::TvAr(TvArParams::new(x[0], x[1], x[2], x[3], x[4])),
            ModelKind::TLocation => ModelSpec::TLocation(TLocationParams::new(x[0], x[1], x[2], x[3], x[4])),
        })
    }

    /// Copy of `self` with one named parameter replaced.
    pub fn with_param(&self, name: &str, value: T) -> Result<Self> {
        let idx = self
            .kind()
            .param_index(name)
            .ok_or_else(|| Error::InvalidArgument(format!("{} has no parameter '{name}'", self.kind())))?;
        let mut x = self.to_vec();
        x[idx] = value;
        self.with_values(&x)
    }

    /// Same model with all five parameters replaced; keeps the location bound choice.
    pub fn with_values(&self, x: &[T]) -> Result<Self> {
        let mut out = Self::from_vec(self.kind(), x)?;
        if let (ModelSpec::TLocation(src), ModelSpec::TLocation(dst)) = (self, &mut out) {
            dst.bound = src.bound;
        }
        Ok(out)
    }

    pub fn domain(&self) -> FilterDomain<T> {
        match self {
            ModelSpec::BetaTGarch(p) => FilterDomain { lower: p.omega_bar(), upper: T::infinity() },
            ModelSpec::TvAr(_) => FilterDomain { lower: T::neg_infinity(), upper: T::infinity() },
            ModelSpec::TLocation(p) => {
                let (lower, upper) = p.omega_bar_bounds();
                FilterDomain { lower, upper }
            }
        }
    }

    /// Precomputes the parameter-only constants used inside the filter loop.
    pub fn kernel(&self) -> FilterKernel<T> {
        FilterKernel::new(self)
    }
}

/// The set `F_θ` in which the filter takes values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterDomain<T> {
    pub lower: T,
    pub upper: T,
}

impl<T: Scalar> FilterDomain<T> {
    /// Membership with a relative slack of a few hundred ulps at finite ends.
    pub fn contains(&self, f: T) -> bool {
        let slack = |b: T| T::lit(256.0) * T::epsilon() * b.abs().max(T::one());
        let lo_ok = !self.lower.is_finite() || f >= self.lower - slack(self.lower);
        let hi_ok = !self.upper.is_finite() || f <= self.upper + slack(self.upper);
        f.is_finite() && lo_ok && hi_ok
    }

    pub fn clamp(&self, f: T) -> T {
        f.max(self.lower).min(self.upper)
    }
}

/// Parameter constants of one model, ready for the per-observation maps.
///
/// The methods here do no validation; the free functions in this module
/// wrap them with domain checks.
#[derive(Debug, Clone, Copy)]
pub enum FilterKernel<T> {
    BetaTGarch {
        omega: T,
        beta: T,
        alpha: T,
        gamma: T,
        vp1: T,
        vm2: T,
        omega_bar: T,
        log_norm: T,
    },
    TvAr {
        omega: T,
        beta: T,
        alpha: T,
        vs2: T,
        vp1: T,
        log_norm: T,
    },
    TLocation {
        omega: T,
        beta: T,
        alpha: T,
        vs2: T,
        vp1: T,
        log_norm: T,
        lo: T,
        hi: T,
    },
}

/// Leverage dummy: 1 for non-positive returns.
#[inline]
fn leverage<T: Scalar>(y: T) -> T {
    if y <= T::zero() {
        T::one()
    } else {
        T::zero()
    }
}

/// `s(x) = vσ²(x² − vσ²)/(x² + vσ²)²`, ranging over `[−1, 1/8]`.
#[inline]
fn score_slope<T: Scalar>(x: T, vs2: T) -> T {
    let x2 = x * x;
    let d = x2 + vs2;
    vs2 * (x2 - vs2) / (d * d)
}

impl<T: Scalar> FilterKernel<T> {
    pub fn new(spec: &ModelSpec<T>) -> Self {
        let half = T::lit(0.5);
        match *spec {
            ModelSpec::BetaTGarch(p) => {
                let vm2 = p.v - T::lit(2.0);
                FilterKernel::BetaTGarch {
                    omega: p.omega,
                    beta: p.beta,
                    alpha: p.alpha,
                    gamma: p.gamma,
                    vp1: p.v + T::one(),
                    vm2,
                    omega_bar: p.omega_bar(),
                    log_norm: ln_gamma_half_ratio(p.v) - half * (vm2 * T::PI()).ln(),
                }
            }
            ModelSpec::TvAr(p) => FilterKernel::TvAr {
                omega: p.omega,
                beta: p.beta,
                alpha: p.alpha,
                vs2: p.v * p.sigma * p.sigma,
                vp1: p.v + T::one(),
                log_norm: ln_gamma_half_ratio(p.v) - half * (p.v * T::PI()).ln() - p.sigma.ln(),
            },
            ModelSpec::TLocation(p) => {
                let (lo, hi) = p.omega_bar_bounds();
                FilterKernel::TLocation {
                    omega: p.omega,
                    beta: p.beta,
                    alpha: p.alpha,
                    vs2: p.v * p.sigma * p.sigma,
                    vp1: p.v + T::one(),
                    log_norm: ln_gamma_half_ratio(p.v) - half * (p.v * T::PI()).ln() - p.sigma.ln(),
                    lo,
                    hi,
                }
            }
        }
    }

    /// `φ(f, Y_t^k, θ)`.
    #[inline]
    pub fn step(&self, f: T, window: &[T]) -> T {
        match *self {
            FilterKernel::BetaTGarch { omega, beta, alpha, gamma, vp1, vm2, .. } => {
                let y = window[window.len() - 1];
                let y2 = y * y;
                let a = alpha + gamma * leverage(y);
                omega + beta * f + a * vp1 * y2 * f / (vm2 * f + y2)
            }
            FilterKernel::TvAr { omega, beta, alpha, vs2, .. } => {
                let (ylag, y) = (window[0], window[1]);
                let u = y - f * ylag;
                omega + beta * f + alpha * u * ylag / (T::one() + u * u / vs2)
            }
            FilterKernel::TLocation { omega, beta, alpha, vs2, .. } => {
                let u = window[window.len() - 1] - f;
                omega + beta * f + alpha * u / (T::one() + u * u / vs2)
            }
        }
    }

    /// `∂φ/∂f`.
    #[inline]
    pub fn deriv(&self, f: T, window: &[T]) -> T {
        match *self {
            FilterKernel::BetaTGarch { beta, alpha, gamma, vp1, vm2, .. } => {
                let y = window[window.len() - 1];
                let y2 = y * y;
                let d = vm2 * f + y2;
                beta + (alpha + gamma * leverage(y)) * vp1 * y2 * y2 / (d * d)
            }
            FilterKernel::TvAr { beta, alpha, vs2, .. } => {
                let (ylag, y) = (window[0], window[1]);
                beta + alpha * ylag * ylag * score_slope(y - f * ylag, vs2)
            }
            FilterKernel::TLocation { beta, alpha, vs2, .. } => {
                beta + alpha * score_slope(window[window.len() - 1] - f, vs2)
            }
        }
    }

    /// `Λ_t(θ) = sup_{f ∈ F_θ} |∂φ/∂f|`, in closed form.
    #[inline]
    pub fn lambda(&self, window: &[T]) -> T {
        let eighth = T::lit(0.125);
        match *self {
            FilterKernel::BetaTGarch { beta, alpha, gamma, vp1, vm2, omega_bar, .. } => {
                // the news term is decreasing in f, so the sup sits at f = ω̄
                let y = window[window.len() - 1];
                let y2 = y * y;
                let d = vm2 * omega_bar + y2;
                (beta + (alpha + gamma * leverage(y)) * vp1 * y2 * y2 / (d * d)).abs()
            }
            FilterKernel::TvAr { beta, alpha, .. } => {
                let g = alpha * window[0] * window[0];
                (beta - g).abs().max((beta + g * eighth).abs())
            }
            FilterKernel::TLocation { beta, alpha, vs2, lo, hi, .. } => {
                // x = y − f sweeps [y − hi, y − lo]; s is even, increasing in x² up
                // to x² = 3vσ² and decreasing afterwards.
                let y = window[window.len() - 1];
                let (x_lo, x_hi) = (y - hi, y - lo);
                let s_a = score_slope(x_lo, vs2);
                let s_b = score_slope(x_hi, vs2);
                let s_min = if x_lo <= T::zero() && T::zero() <= x_hi {
                    -T::one()
                } else {
                    s_a.min(s_b)
                };
                let peak = (T::lit(3.0) * vs2).sqrt();
                let hits_peak = (x_lo <= peak && peak <= x_hi) || (x_lo <= -peak && -peak <= x_hi);
                let s_max = if hits_peak { eighth } else { s_a.max(s_b) };
                (beta + alpha * s_min).abs().max((beta + alpha * s_max).abs())
            }
        }
    }

    /// `log p(y_t | f, θ)`.
    #[inline]
    pub fn log_density(&self, window: &[T], f: T) -> T {
        let half = T::lit(0.5);
        match *self {
            FilterKernel::BetaTGarch { vp1, vm2, log_norm, .. } => {
                let y = window[window.len() - 1];
                log_norm - half * f.ln() - half * vp1 * (y * y / (vm2 * f)).ln_1p()
            }
            FilterKernel::TvAr { vs2, vp1, log_norm, .. } => {
                let u = window[1] - f * window[0];
                log_norm - half * vp1 * (u * u / vs2).ln_1p()
            }
            FilterKernel::TLocation { vs2, vp1, log_norm, .. } => {
                let u = window[window.len() - 1] - f;
                log_norm - half * vp1 * (u * u / vs2).ln_1p()
            }
        }
    }
}

fn check_window<T: Scalar>(window: &[T], spec: &ModelSpec<T>) -> Result<()> {
    let need = spec.lag_order() + 1;
    if window.len() != need {
        return Err(Error::InvalidArgument(format!(
            "{} needs a window of {need} observations, got {}",
            spec.kind(),
            window.len()
        )));
    }
    if let Some(bad) = window.iter().find(|y| !y.is_finite()) {
        return Err(Error::Domain(format!("non-finite observation {bad}")));
    }
    Ok(())
}

fn check_filter_value<T: Scalar>(f: T, spec: &ModelSpec<T>) -> Result<()> {
    let dom = spec.domain();
    if !f.is_finite() {
        return Err(Error::Domain(format!("non-finite filter value {f}")));
    }
    if !dom.contains(f) {
        return Err(Error::Domain(format!(
            "filter value {f} outside [{}, {}]",
            dom.lower, dom.upper
        )));
    }
    Ok(())
}

/// Returns the list of violated constraints (empty when admissible).
pub fn param_validate<T: Scalar>(spec: &ModelSpec<T>) -> Vec<Violation> {
    spec.violations()
}

/// One step of the filter recursion, `φ(f, Y_t^k, θ)`.
pub fn filter_step<T: Scalar>(f: T, window: &[T], spec: &ModelSpec<T>) -> Result<T> {
    check_window(window, spec)?;
    check_filter_value(f, spec)?;
    let next = spec.kernel().step(f, window);
    if !next.is_finite() {
        return Err(Error::Domain(format!("filter step produced {next}")));
    }
    debug_assert!(spec.domain().contains(next), "filter left its domain: {next}");
    Ok(next)
}

/// Analytic derivative of the filter map in `f`.
pub fn filter_step_deriv<T: Scalar>(f: T, window: &[T], spec: &ModelSpec<T>) -> Result<T> {
    check_window(window, spec)?;
    check_filter_value(f, spec)?;
    Ok(spec.kernel().deriv(f, window))
}

/// Stochastic Lipschitz coefficient `Λ_t(θ)` for the given window.
pub fn lipschitz_coeff<T: Scalar>(window: &[T], spec: &ModelSpec<T>) -> Result<T> {
    check_window(window, spec)?;
    Ok(spec.kernel().lambda(window))
}

/// Conditional log-density of the last observation in `window` given `f`.
pub fn log_density<T: Scalar>(window: &[T], f: T, spec: &ModelSpec<T>) -> Result<T> {
    check_window(window, spec)?;
    check_filter_value(f, spec)?;
    if spec.kind() == ModelKind::BetaTGarch && !(f > T::zero()) {
        return Err(Error::Domain(format!("conditional variance must be positive, got {f}")));
    }
    Ok(spec.kernel().log_density(window, f))
}
