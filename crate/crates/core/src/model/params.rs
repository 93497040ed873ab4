use serde::{Deserialize, Serialize};

use crate::error::Violation;
use crate::scalar::Scalar;

/// Static parameters of the Beta-t-GARCH(1,1) volatility filter with leverage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaTGarchParams<T> {
    pub omega: T,
    pub beta: T,
    pub alpha: T,
    pub gamma: T,
    pub v: T,
}

impl<T: Scalar> BetaTGarchParams<T> {
    pub fn new(omega: T, beta: T, alpha: T, gamma: T, v: T) -> Self {
        Self { omega, beta, alpha, gamma, v }
    }

    /// Lower end of the filter range, `ω / (1 − β)`.
    pub fn omega_bar(&self) -> T {
        self.omega / (T::one() - self.beta)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        finite_check(&mut out, &[("omega", self.omega), ("beta", self.beta), ("alpha", self.alpha), ("gamma", self.gamma), ("v", self.v)]);
        if !(self.omega > T::zero()) {
            out.push(Violation::new("omega", "omega > 0"));
        }
        if !(self.beta >= T::zero()) {
            out.push(Violation::new("beta", "beta >= 0"));
        }
        if !(self.beta < T::one()) {
            out.push(Violation::new("beta", "beta < 1"));
        }
        if !(self.alpha >= T::zero()) {
            out.push(Violation::new("alpha", "alpha >= 0"));
        }
        if !(self.gamma >= -self.alpha) {
            out.push(Violation::new("gamma", "gamma >= -alpha"));
        }
        if !(self.v > T::lit(2.0)) {
            out.push(Violation::new("v", "v > 2"));
        }
        if out.is_empty() {
            let ob = self.omega_bar();
            if !(ob.is_finite() && ob > T::zero()) {
                out.push(Violation::new("omega_bar", "omega/(1-beta) finite and > 0"));
            }
        }
        out
    }
}

/// Static parameters of the autoregressive model with a score-driven AR coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvArParams<T> {
    pub omega: T,
    pub beta: T,
    pub alpha: T,
    pub sigma: T,
    pub v: T,
}

impl<T: Scalar> TvArParams<T> {
    pub fn new(omega: T, beta: T, alpha: T, sigma: T, v: T) -> Self {
        Self { omega, beta, alpha, sigma, v }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        finite_check(&mut out, &[("omega", self.omega), ("beta", self.beta), ("alpha", self.alpha), ("sigma", self.sigma), ("v", self.v)]);
        if !(self.sigma > T::zero()) {
            out.push(Violation::new("sigma", "sigma > 0"));
        }
        if !(self.v > T::zero()) {
            out.push(Violation::new("v", "v > 0"));
        }
        out
    }
}

/// Constant bounding the score correction `|α·u / (1 + u²/(vσ²))|` of the location filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrectionBound {
    /// `|α|·√(vσ²)/2`, the exact supremum over `u`.
    #[default]
    Analytic,
    /// `|α|·√(3vσ²)/4`, the constant quoted in the original model analysis.
    Published,
}

/// Static parameters of the Student-t location model with a score-driven mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TLocationParams<T> {
    pub omega: T,
    pub beta: T,
    pub alpha: T,
    pub sigma: T,
    pub v: T,
    #[serde(default)]
    pub bound: CorrectionBound,
}

impl<T: Scalar> TLocationParams<T> {
    pub fn new(omega: T, beta: T, alpha: T, sigma: T, v: T) -> Self {
        Self { omega, beta, alpha, sigma, v, bound: CorrectionBound::Analytic }
    }

    pub fn with_bound(mut self, bound: CorrectionBound) -> Self {
        self.bound = bound;
        self
    }

    /// The bound `c` on the correction term.
    pub fn correction_bound(&self) -> T {
        let vs2 = self.v * self.sigma * self.sigma;
        match self.bound {
            CorrectionBound::Analytic => self.alpha.abs() * vs2.sqrt() * T::lit(0.5),
            CorrectionBound::Published => self.alpha.abs() * (T::lit(3.0) * vs2).sqrt() * T::lit(0.25),
        }
    }

    /// `ω/(1 − β) ∓ c/(1 − |β|)`; equals `((ω − c)/(1 − β), (ω + c)/(1 − β))` for `β ≥ 0`
    /// and stays invariant under the filter map when `β < 0`.
    pub fn omega_bar_bounds(&self) -> (T, T) {
        let c = self.correction_bound();
        let centre = self.omega / (T::one() - self.beta);
        let half = c / (T::one() - self.beta.abs());
        (centre - half, centre + half)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        finite_check(&mut out, &[("omega", self.omega), ("beta", self.beta), ("alpha", self.alpha), ("sigma", self.sigma), ("v", self.v)]);
        if !(self.beta.abs() < T::one()) {
            out.push(Violation::new("beta", "|beta| < 1"));
        }
        if !(self.sigma > T::zero()) {
            out.push(Violation::new("sigma", "sigma > 0"));
        }
        if !(self.v > T::zero()) {
            out.push(Violation::new("v", "v > 0"));
        }
        if out.is_empty() {
            let (lo, hi) = self.omega_bar_bounds();
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                out.push(Violation::new("omega_bar", "omega_bar_lo <= omega_bar_hi"));
            }
        }
        out
    }
}

fn finite_check<T: Scalar>(out: &mut Vec<Violation>, fields: &[(&str, T)]) {
    for (name, x) in fields {
        if !x.is_finite() {
            out.push(Violation::new(name, "finite"));
        }
    }
}
