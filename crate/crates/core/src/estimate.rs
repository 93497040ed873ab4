//! Maximum likelihood over the admissible parameter set and over the
//! empirical invertibility region, with multi-start and numerical standard
//! errors.
//!
//! Optimization runs in the unconstrained coordinates of
//! [`param_transform`], so every evaluated parameter is admissible.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{default_init, log_likelihood, median, sample_variance};
use crate::invertibility::empirical_lyapunov;
use crate::model::{param_transform, param_untransform, BetaTGarchParams, ModelKind, ModelSpec, TLocationParams, TvArParams};
use crate::optim::{minimize, NmOutcome, NmStatus, OptimizerOptions};
use crate::simulate::rng_for;

/// Smallest sample accepted by the estimators.
pub const MIN_FIT_OBS: usize = 50;
/// Extra slack the penalty targets beyond `−δ`, so penalized optima land inside.
pub const PENALTY_MARGIN: f64 = 1e-5;
/// Relative step of the numerical Hessian.
pub const HESSIAN_STEP: f64 = 1e-4;
/// Standard deviation of the start jitter in transformed coordinates.
pub const JITTER_SD: f64 = 0.5;
pub const N_ANCHORS: usize = 8;

/// How `f̂_0` is chosen for each candidate `θ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum InitRule {
    /// [`default_init`].
    #[default]
    Default,
    /// A multiple of [`default_init`], clamped to the filter domain.
    Scaled(f64),
    /// A fixed value, clamped to the filter domain.
    Fixed(f64),
}

impl InitRule {
    pub fn resolve(&self, series: &[f64], spec: &ModelSpec<f64>) -> f64 {
        let dom = spec.domain();
        match *self {
            InitRule::Default => default_init(series, spec),
            InitRule::Scaled(k) => dom.clamp(k * default_init(series, spec)),
            InitRule::Fixed(v) => dom.clamp(v),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIter,
    /// Constrained fit without any point passing the audit.
    Infeasible,
}

/// Post-hoc recomputation of the region constraint at `θ̂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Audit {
    pub lyapunov: f64,
    pub delta: f64,
    /// `lyapunov ≤ −δ`.
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StdErrors {
    pub names: Vec<String>,
    /// `None` when the Hessian is not negative definite or `θ̂` is too close to a bound.
    pub values: Option<Vec<Option<f64>>>,
    /// Largest `|H_ij − H_ji|` relative to `max |H_ij|`, before symmetrization.
    pub max_asymmetry: f64,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_hat: ModelSpec<f64>,
    /// `L̂_n(θ̂)`, the average log-likelihood.
    pub loglik: f64,
    pub lyapunov_at_hat: f64,
    pub constrained: bool,
    pub delta: Option<f64>,
    pub audit: Option<Audit>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub status: FitStatus,
    pub restarts_used: usize,
    pub start_index: usize,
    pub seed: u64,
    pub std_errors: Option<StdErrors>,
    pub init: InitRule,
    pub f0_used: f64,
    pub n: usize,
}

fn check_sample(series: &[f64], kind: ModelKind) -> Result<usize> {
    let n = series.len().saturating_sub(kind.lag_order());
    if n < MIN_FIT_OBS {
        return Err(Error::InvalidArgument(format!("estimation needs at least {MIN_FIT_OBS} observations, got {n}")));
    }
    if let Some(i) = series.iter().position(|y| !y.is_finite()) {
        return Err(Error::Data(format!("non-finite observation at position {i}")));
    }
    Ok(n)
}

/// `L̂_n(θ)` with `f̂_0` from `init`; `−∞` where the filter fails.
pub fn loglik_at(series: &[f64], spec: &ModelSpec<f64>, init: InitRule) -> f64 {
    let f0 = init.resolve(series, spec);
    log_likelihood(series, spec, f0).unwrap_or(f64::NEG_INFINITY)
}

fn lyapunov_at(series: &[f64], spec: &ModelSpec<f64>) -> f64 {
    empirical_lyapunov(series, spec).map(|e| e.value).unwrap_or(f64::INFINITY)
}

fn feasible(series: &[f64], spec: &ModelSpec<f64>, delta: f64) -> bool {
    lyapunov_at(series, spec) <= -delta
}

fn validate_start(start: Option<&ModelSpec<f64>>, kind: ModelKind) -> Result<()> {
    if let Some(s) = start {
        if s.kind() != kind {
            return Err(Error::InvalidArgument(format!("start is a {} spec, expected {kind}", s.kind())));
        }
        s.validate()?;
    }
    Ok(())
}

fn assemble(
    series: &[f64],
    spec: ModelSpec<f64>,
    out: &NmOutcome,
    init: InitRule,
    n: usize,
    seed: u64,
) -> EstimationResult {
    let loglik = loglik_at(series, &spec, init);
    EstimationResult {
        theta_hat: spec,
        loglik,
        lyapunov_at_hat: lyapunov_at(series, &spec),
        constrained: false,
        delta: None,
        audit: None,
        iterations: out.iterations,
        evaluations: out.evaluations,
        converged: out.status == NmStatus::Converged && loglik.is_finite(),
        status: match out.status {
            NmStatus::Converged => FitStatus::Converged,
            NmStatus::MaxIter => FitStatus::MaxIter,
        },
        restarts_used: 1,
        start_index: 0,
        seed,
        std_errors: None,
        init,
        f0_used: init.resolve(series, &spec),
        n,
    }
}

/// Unconstrained maximum likelihood. Without a start the first lattice
/// anchor of [`start_lattice`] is used.
pub fn fit_ml(
    series: &[f64],
    kind: ModelKind,
    start: Option<&ModelSpec<f64>>,
    init: InitRule,
    opts: &OptimizerOptions,
) -> Result<EstimationResult> {
    let n = check_sample(series, kind)?;
    validate_start(start, kind)?;
    let start = match start {
        Some(s) => *s,
        None => anchors(series, kind)[0],
    };
    let objective = |x: &[f64]| -loglik_at(series, &param_untransform(x, kind), init);
    let out = minimize(objective, &param_transform(&start), opts)?;
    Ok(assemble(series, param_untransform(&out.x, kind), &out, init, n, opts.seed))
}

/// Parameters with all news loadings removed and `|β| ≤ e^{−2δ}`; the
/// Lyapunov value is then about `log|β|` for every model.
fn contraction_fallback(spec: &ModelSpec<f64>, delta: f64) -> ModelSpec<f64> {
    let cap = (-2.0 * delta).exp();
    match *spec {
        ModelSpec::BetaTGarch(p) => {
            // α sits on a log coordinate, so use a tiny positive value
            let beta = p.beta.min(cap);
            let mut q = BetaTGarchParams::new(p.omega, beta, 1e-10, 0.0, p.v);
            q.omega = p.omega.max(crate::model::OMEGA_FLOOR * 2.0);
            ModelSpec::BetaTGarch(q)
        }
        ModelSpec::TvAr(p) => ModelSpec::TvAr(TvArParams { alpha: 0.0, beta: p.beta.clamp(-cap, cap), ..p }),
        ModelSpec::TLocation(p) => ModelSpec::TLocation(TLocationParams { alpha: 0.0, beta: p.beta.clamp(-cap, cap), ..p }),
    }
}

/// Largest step along the segment from feasible `xf` toward `xi` that stays feasible.
fn restore(series: &[f64], kind: ModelKind, xf: &[f64], xi: &[f64], delta: f64) -> Vec<f64> {
    let at = |t: f64| -> Vec<f64> { xf.iter().zip(xi).map(|(a, b)| a + t * (b - a)).collect() };
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if feasible(series, &param_untransform(&at(mid), kind), delta) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

/// Maximum likelihood on `{θ : (1/n) Σ log Λ_t(θ) ≤ −δ}`.
///
/// An exterior penalty with escalating weights locates the constrained
/// optimum; the final polish uses an extreme barrier from a feasible point
/// so the reported estimate always passes the audit unless no feasible
/// point was found.
pub fn fit_ml_constrained(
    series: &[f64],
    kind: ModelKind,
    delta: f64,
    start: Option<&ModelSpec<f64>>,
    init: InitRule,
    opts: &OptimizerOptions,
) -> Result<EstimationResult> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta must be finite and > 0, got {delta}")));
    }
    let unconstrained = fit_ml(series, kind, start, init, opts)?;
    let n = unconstrained.n;
    let finish = |mut r: EstimationResult, status: Option<FitStatus>| {
        let lyap = lyapunov_at(series, &r.theta_hat);
        r.constrained = true;
        r.delta = Some(delta);
        r.lyapunov_at_hat = lyap;
        r.audit = Some(Audit { lyapunov: lyap, delta, passed: lyap <= -delta });
        if let Some(s) = status {
            r.status = s;
        }
        if r.status == FitStatus::Infeasible {
            r.converged = false;
        }
        r
    };
    if feasible(series, &unconstrained.theta_hat, delta) {
        return Ok(finish(unconstrained, None));
    }

    let nll = |x: &[f64]| -loglik_at(series, &param_untransform(x, kind), init);
    let mut iterations = unconstrained.iterations;
    let mut evaluations = unconstrained.evaluations;
    let mut x = param_transform(&unconstrained.theta_hat);
    let mut best_feasible: Option<(Vec<f64>, f64)> = None;
    for &w in &opts.penalty_weights {
        let penalized = |z: &[f64]| {
            let spec = param_untransform(z, kind);
            let excess = (lyapunov_at(series, &spec) + delta + PENALTY_MARGIN).max(0.0);
            -loglik_at(series, &spec, init) + w * excess * excess
        };
        let Ok(out) = minimize(penalized, &x, opts) else { break };
        iterations += out.iterations;
        evaluations += out.evaluations;
        x = out.x;
        if feasible(series, &param_untransform(&x, kind), delta) {
            let v = nll(&x);
            if best_feasible.as_ref().is_none_or(|(_, b)| v < *b) {
                best_feasible = Some((x.clone(), v));
            }
        }
    }

    let seed_point = match best_feasible {
        Some((xb, _)) => Some(xb),
        None => {
            let fallback = contraction_fallback(&param_untransform(&x, kind), delta);
            let xf = param_transform(&fallback);
            feasible(series, &param_untransform(&xf, kind), delta).then(|| restore(series, kind, &xf, &x, delta))
        }
    };
    let Some(x0) = seed_point else {
        let spec = param_untransform(&x, kind);
        let out = NmOutcome { x, value: f64::NAN, iterations, evaluations, status: NmStatus::MaxIter };
        return Ok(finish(assemble(series, spec, &out, init, n, opts.seed), Some(FitStatus::Infeasible)));
    };

    let barrier = |z: &[f64]| {
        let spec = param_untransform(z, kind);
        if feasible(series, &spec, delta) {
            -loglik_at(series, &spec, init)
        } else {
            f64::INFINITY
        }
    };
    match minimize(barrier, &x0, opts) {
        Ok(out) => {
            let out = NmOutcome { iterations: iterations + out.iterations, evaluations: evaluations + out.evaluations, ..out };
            Ok(finish(assemble(series, param_untransform(&out.x, kind), &out, init, n, opts.seed), None))
        }
        Err(_) => {
            // feasible but the likelihood is not finite there
            let spec = param_untransform(&x0, kind);
            let out = NmOutcome { x: x0, value: f64::NAN, iterations, evaluations, status: NmStatus::MaxIter };
            Ok(finish(assemble(series, spec, &out, init, n, opts.seed), Some(FitStatus::Infeasible)))
        }
    }
}

fn mean_sd(x: &[f64]) -> (f64, f64) {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    (m, sample_variance(x).sqrt())
}

fn lag1_autocorrelation(x: &[f64]) -> f64 {
    let (m, sd) = mean_sd(x);
    if sd == 0.0 || x.len() < 2 {
        return 0.0;
    }
    let c1 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / x.len() as f64;
    c1 / (sd * sd)
}

/// The eight data-scaled anchors per model, ordered by preference.
pub fn anchors(series: &[f64], kind: ModelKind) -> Vec<ModelSpec<f64>> {
    let obs = &series[kind.lag_order().min(series.len())..];
    let (mean, sd) = mean_sd(obs);
    let sd = if sd > 0.0 && sd.is_finite() { sd } else { 1.0 };
    match kind {
        ModelKind::BetaTGarch => {
            const TABLE: [(f64, f64, f64, f64); N_ANCHORS] = [
                (0.80, 0.05, 0.10, 8.0),
                (0.90, 0.03, 0.05, 6.0),
                (0.60, 0.10, 0.10, 6.0),
                (0.70, 0.10, 0.20, 10.0),
                (0.50, 0.15, 0.10, 5.0),
                (0.85, 0.05, 0.15, 12.0),
                (0.30, 0.20, 0.20, 7.0),
                (0.95, 0.02, 0.02, 20.0),
            ];
            TABLE
                .iter()
                .map(|&(b, a, g, v)| {
                    // E c_t = β + α + γ/2 targets the sample variance
                    let omega = sd * sd * (1.0 - (b + a + g / 2.0)).max(0.05);
                    ModelSpec::BetaTGarch(BetaTGarchParams::new(omega.max(1e-6), b, a, g, v))
                })
                .collect()
        }
        ModelKind::TvAr => {
            let rho = lag1_autocorrelation(obs).clamp(-0.95, 0.95);
            const TABLE: [(f64, f64, f64); N_ANCHORS] = [
                (0.90, 0.05, 6.0),
                (0.50, 0.10, 5.0),
                (0.95, 0.02, 8.0),
                (0.70, 0.05, 4.0),
                (0.00, 0.05, 10.0),
                (0.80, 0.20, 6.0),
                (0.30, 0.10, 20.0),
                (0.98, 0.01, 5.0),
            ];
            TABLE
                .iter()
                .map(|&(b, a, v)| {
                    let sigma = sd * (1.0 - rho * rho).sqrt().max(0.1) * ((v - 2.0) / v).sqrt();
                    ModelSpec::TvAr(TvArParams::new(rho * (1.0 - b), b, a / (sd * sd), sigma, v))
                })
                .collect()
        }
        ModelKind::TLocation => {
            let med = median(obs);
            const TABLE: [(f64, f64, f64); N_ANCHORS] = [
                (0.90, 0.10, 6.0),
                (0.50, 0.30, 5.0),
                (0.95, 0.05, 8.0),
                (0.70, 0.20, 4.0),
                (0.00, 0.10, 10.0),
                (0.80, 0.50, 6.0),
                (0.30, 0.20, 20.0),
                (0.98, 0.02, 5.0),
            ];
            let centre = if med.is_finite() { med } else { mean };
            TABLE
                .iter()
                .map(|&(b, a, v)| {
                    let sigma = sd * ((v - 2.0) / v).sqrt();
                    ModelSpec::TLocation(TLocationParams::new(centre * (1.0 - b), b, a, sigma, v))
                })
                .collect()
        }
    }
}

/// Starts for [`multi_start`]: the anchors first, then anchors cycled with
/// N(0, [`JITTER_SD`]²) jitter in transformed coordinates from stream `i` of `seed`.
pub fn start_lattice(series: &[f64], kind: ModelKind, n_starts: usize, seed: u64) -> Vec<ModelSpec<f64>> {
    let base = anchors(series, kind);
    let normal = Normal::new(0.0, JITTER_SD).expect("positive sd");
    (0..n_starts)
        .map(|i| {
            let anchor = base[i % base.len()];
            if i < base.len() {
                return anchor;
            }
            let mut rng = rng_for(seed, i as u64);
            let x: Vec<f64> = param_transform(&anchor).iter().map(|c| c + normal.sample(&mut rng)).collect();
            param_untransform(&x, kind)
        })
        .collect()
}

/// Runs the (optionally constrained) fit from every start of
/// [`start_lattice`] in parallel and keeps the best usable result: converged
/// (and audited, if constrained) runs first, then the highest likelihood,
/// ties to the lowest start index.
pub fn multi_start(
    series: &[f64],
    kind: ModelKind,
    n_starts: usize,
    seed: u64,
    delta: Option<f64>,
    init: InitRule,
    opts: &OptimizerOptions,
) -> Result<EstimationResult> {
    if n_starts == 0 {
        return Err(Error::InvalidArgument("n_starts must be >= 1".into()));
    }
    check_sample(series, kind)?;
    let starts = start_lattice(series, kind, n_starts, seed);
    let runs: Vec<(usize, Result<EstimationResult>)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let r = match delta {
                Some(d) => fit_ml_constrained(series, kind, d, Some(s), init, opts),
                None => fit_ml(series, kind, Some(s), init, opts),
            };
            (i, r)
        })
        .collect();
    let usable = |r: &EstimationResult| r.converged && r.audit.is_none_or(|a| a.passed);
    let mut first_err = None;
    let mut best: Option<(usize, EstimationResult)> = None;
    for (i, r) in runs {
        match r {
            Ok(r) if r.loglik.is_finite() => {
                let better = match &best {
                    None => true,
                    Some((_, b)) => (usable(&r), r.loglik) > (usable(b), b.loglik),
                };
                if better {
                    best = Some((i, r));
                }
            }
            Ok(_) => {}
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match best {
        Some((i, mut r)) => {
            r.start_index = i;
            r.restarts_used = n_starts;
            r.seed = seed;
            Ok(r)
        }
        None => Err(first_err.unwrap_or_else(|| Error::Estimation("no start produced a finite likelihood".into()))),
    }
}

/// Numerical standard errors for all parameters; see [`standard_errors_masked`].
pub fn standard_errors(series: &[f64], result: &EstimationResult) -> Result<StdErrors> {
    standard_errors_masked(series, result, &[true; 5])
}

/// Square roots of the diagonal of `(−H)⁻¹`, where `H` is the Hessian of
/// `n·L̂_n` in the original parameterization over the `free` coordinates
/// (central differences of central-difference gradients). Fixed
/// coordinates report `None`.
pub fn standard_errors_masked(series: &[f64], result: &EstimationResult, free: &[bool]) -> Result<StdErrors> {
    let kind = result.theta_hat.kind();
    let names: Vec<String> = kind.param_names().iter().map(|s| s.to_string()).collect();
    if free.len() != 5 {
        return Err(Error::InvalidArgument("mask must have 5 entries".into()));
    }
    let theta = result.theta_hat.to_vec();
    let idx: Vec<usize> = (0..5).filter(|&i| free[i]).collect();
    let k = idx.len();
    let flagged = |flag: &str, asym: f64| StdErrors {
        names: names.clone(),
        values: None,
        max_asymmetry: asym,
        flag: Some(flag.to_string()),
    };
    if !result.loglik.is_finite() {
        return Ok(flagged("likelihood not finite at the estimate", f64::NAN));
    }
    let h: Vec<f64> = idx.iter().map(|&i| HESSIAN_STEP * theta[i].abs().max(1e-2)).collect();
    let nf = result.n as f64;
    let total = |th: &[f64]| -> Option<f64> {
        let spec = result.theta_hat.with_values(th).ok()?;
        if !spec.violations().is_empty() {
            return None;
        }
        let v = nf * loglik_at(series, &spec, result.init);
        v.is_finite().then_some(v)
    };
    let shifted = |base: &[f64], a: usize, da: f64| {
        let mut t = base.to_vec();
        t[idx[a]] += da;
        t
    };
    let grad = |base: &[f64]| -> Option<Vec<f64>> {
        (0..k)
            .map(|j| Some((total(&shifted(base, j, h[j]))? - total(&shifted(base, j, -h[j]))?) / (2.0 * h[j])))
            .collect()
    };
    let mut hess = vec![vec![0.0; k]; k];
    for i in 0..k {
        let (Some(gp), Some(gm)) = (grad(&shifted(&theta, i, h[i])), grad(&shifted(&theta, i, -h[i]))) else {
            return Ok(flagged("estimate too close to the parameter bounds", f64::NAN));
        };
        for j in 0..k {
            hess[i][j] = (gp[j] - gm[j]) / (2.0 * h[i]);
        }
    }
    let scale = hess.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut asym = 0.0_f64;
    for i in 0..k {
        for j in 0..i {
            asym = asym.max((hess[i][j] - hess[j][i]).abs());
            let s = 0.5 * (hess[i][j] + hess[j][i]);
            hess[i][j] = s;
            hess[j][i] = s;
        }
    }
    let asym = if scale > 0.0 { asym / scale } else { 0.0 };
    let info: Vec<Vec<f64>> = hess.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let Some(cov_diag) = spd_inverse_diagonal(&info) else {
        return Ok(flagged("negative Hessian is not positive definite", asym));
    };
    let mut values = vec![None; 5];
    for (a, &i) in idx.iter().enumerate() {
        values[i] = Some(cov_diag[a].sqrt());
    }
    Ok(StdErrors { names, values: Some(values), max_asymmetry: asym, flag: None })
}

/// Diagonal of `A⁻¹` via Cholesky; `None` if `A` is not positive definite.
fn spd_inverse_diagonal(a: &[Vec<f64>]) -> Option<Vec<f64>> {
    let k = a.len();
    let mut l = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..=i {
            let s: f64 = a[i][j] - (0..j).map(|m| l[i][m] * l[j][m]).sum::<f64>();
            if i == j {
                if !(s > 0.0 && s.is_finite()) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    // (A⁻¹)_ii = Σ_m (L⁻¹)_mi²
    let mut diag = vec![0.0; k];
    for c in 0..k {
        let mut col = vec![0.0; k];
        for r in c..k {
            let rhs = if r == c { 1.0 } else { 0.0 };
            let s: f64 = (c..r).map(|m| l[r][m] * col[m]).sum();
            col[r] = (rhs - s) / l[r][r];
        }
        for r in c..k {
            diag[c] += col[r] * col[r];
        }
    }
    Some(diag)
}
