//! Data-generating processes for the three models and Monte Carlo
//! stationarity / moment diagnostics for the Beta-t-GARCH DGP.
//!
//! All randomness comes from ChaCha8 streams keyed by an explicit seed, so
//! results are reproducible and independent of the worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BetaTGarchParams, ModelSpec};

pub const DEFAULT_BURN_IN: usize = 1000;
/// Absolute level at which a simulated `f^o_t` is declared explosive.
pub const EXPLOSION_LIMIT: f64 = 1e12;
const SHARD: usize = 1 << 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub spec: ModelSpec<f64>,
    /// `y_{1−k} … y_n`
    pub series: Vec<f64>,
    /// `f^o_1 … f^o_n`
    pub true_path: Vec<f64>,
    pub seed: u64,
    pub burn_in: usize,
}

impl SimOutput {
    /// The observations `y_1 … y_n` without pre-sample values.
    pub fn observations(&self) -> &[f64] {
        &self.series[self.spec.lag_order()..]
    }
}

/// A ChaCha8 generator on an explicit stream of `seed`.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn student_t(v: f64) -> Result<StudentT<f64>> {
    StudentT::new(v).map_err(|e| Error::InvalidArgument(format!("Student-t with v = {v}: {e}")))
}

/// Simulates `n` observations after `burn_in` discarded steps, starting the
/// true recursion at `ω/(1−β)`.
pub fn simulate(spec: &ModelSpec<f64>, n: usize, seed: u64, burn_in: usize) -> Result<SimOutput> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let k = spec.lag_order();
    let kernel = spec.kernel();
    let mut rng = rng_for(seed, 0);

    let (dist, v, omega, beta) = match *spec {
        ModelSpec::BetaTGarch(p) => (student_t(p.v)?, p.v, p.omega, p.beta),
        ModelSpec::TvAr(p) => (student_t(p.v)?, p.v, p.omega, p.beta),
        ModelSpec::TLocation(p) => (student_t(p.v)?, p.v, p.omega, p.beta),
    };
    let level = omega / (1.0 - beta);
    let mut f = if level.is_finite() { level } else { omega };
    let mut y_prev = 0.0;

    let mut series = Vec::with_capacity(n + k);
    let mut true_path = Vec::with_capacity(n);
    for step in 0..burn_in + n {
        if step == burn_in && k == 1 {
            series.push(y_prev);
        }
        let eps: f64 = dist.sample(&mut rng);
        let y = match *spec {
            // variance-standardized t, so f is the conditional variance
            ModelSpec::BetaTGarch(_) => f.sqrt() * eps * ((v - 2.0) / v).sqrt(),
            ModelSpec::TvAr(p) => f * y_prev + p.sigma * eps,
            ModelSpec::TLocation(p) => f + p.sigma * eps,
        };
        if !y.is_finite() {
            return Err(Error::Nonstationary { step, value: y.abs() });
        }
        if step >= burn_in {
            series.push(y);
            true_path.push(f);
        }
        f = if k == 1 { kernel.step(f, &[y_prev, y]) } else { kernel.step(f, &[y]) };
        if !f.is_finite() || f.abs() > EXPLOSION_LIMIT {
            return Err(Error::Nonstationary { step, value: f.abs() });
        }
        y_prev = y;
    }
    Ok(SimOutput { spec: *spec, series, true_path, seed, burn_in })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMean {
    pub mean: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub z: f64,
    /// Estimate of `E c_t^z`.
    pub estimate: MonteCarloMean,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// Estimate of `E log c_t`; negative iff the DGP has a stationary solution.
    pub e_log_c: MonteCarloMean,
    /// `β + α + γ/2`; below one is sufficient for stationarity.
    pub sufficient_check: f64,
    pub moment_checks: Vec<MomentCheck>,
    pub mc_draws: usize,
    pub seed: u64,
}

/// Draws `(b_t, d_t)` with `b_t = T²/(v + T²) ~ Beta(1/2, v/2)` and `d_t = 1{T ≤ 0}`
/// from one shard stream.
pub fn news_shocks(v: f64, count: usize, seed: u64, shard: u64) -> Result<Vec<(f64, bool)>> {
    let dist = student_t(v)?;
    let mut rng = rng_for(seed, shard);
    Ok((0..count)
        .map(|_| {
            let t: f64 = dist.sample(&mut rng);
            (t * t / (v + t * t), t <= 0.0)
        })
        .collect())
}

/// Monte Carlo estimates of `E log c_t` and `E c_t^z` for
/// `c_t = β + (α + γ d_t)(v+1) b_t`.
pub fn stationarity_report(
    params: &BetaTGarchParams<f64>,
    mc_draws: usize,
    seed: u64,
    moments: &[f64],
) -> Result<StationarityReport> {
    if !params.violations().is_empty() {
        return Err(Error::InvalidParams(params.violations()));
    }
    if mc_draws < 1000 {
        return Err(Error::InvalidArgument(format!("mc_draws must be at least 1000, got {mc_draws}")));
    }
    let shards = mc_draws.div_ceil(SHARD);
    let m = moments.len();
    // Sums are taken around the no-news value c = β, so a degenerate
    // c_t returns that value exactly with zero standard error.
    let shift_log = if params.beta > 0.0 { params.beta.ln() } else { 0.0 };
    let shift_pow: Vec<f64> = moments.iter().map(|&z| params.beta.powf(z)).collect();
    // per shard: [Σ Δlog c, Σ (Δlog c)², Σ Δc^z_1, Σ (Δc^z_1)², …]
    let partial: Vec<Vec<f64>> = (0..shards)
        .into_par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let count = SHARD.min(mc_draws - s * SHARD);
            let mut acc = vec![0.0; 2 + 2 * m];
            for (b, d) in news_shocks(params.v, count, seed, s as u64)? {
                let lev = if d { params.gamma } else { 0.0 };
                let c = params.beta + (params.alpha + lev) * (params.v + 1.0) * b;
                let lc = c.ln() - shift_log;
                acc[0] += lc;
                acc[1] += lc * lc;
                for (j, &z) in moments.iter().enumerate() {
                    let cz = c.powf(z) - shift_pow[j];
                    acc[2 + 2 * j] += cz;
                    acc[3 + 2 * j] += cz * cz;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; 2 + 2 * m];
    for p in &partial {
        for (t, x) in total.iter_mut().zip(p) {
            *t += x;
        }
    }
    let nd = mc_draws as f64;
    let summarize = |shift: f64, s: f64, s2: f64| {
        let dm = s / nd;
        let var = (s2 / nd - dm * dm).max(0.0) * nd / (nd - 1.0);
        MonteCarloMean { mean: shift + dm, std_error: (var / nd).sqrt() }
    };
    Ok(StationarityReport {
        e_log_c: summarize(shift_log, total[0], total[1]),
        sufficient_check: params.beta + params.alpha + params.gamma / 2.0,
        moment_checks: moments
            .iter()
            .enumerate()
            .map(|(j, &z)| MomentCheck { z, estimate: summarize(shift_pow[j], total[2 + 2 * j], total[3 + 2 * j]) })
            .collect(),
        mc_draws,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{TLocationParams, TvArParams};

    fn garch(omega: f64, beta: f64, alpha: f64, gamma: f64, v: f64) -> ModelSpec<f64> {
        ModelSpec::BetaTGarch(BetaTGarchParams::new(omega, beta, alpha, gamma, v))
    }

    #[test]
    fn deterministic_level_without_news() {
        let s = garch(0.2, 0.6, 0.0, 0.0, 5.0);
        let out = simulate(&s, 200, 3, 50).unwrap();
        assert!(out.true_path.iter().all(|f| (f - 0.5).abs() < 1e-15));
    }

    #[test]
    fn path_respects_domain_and_is_reproducible() {
        let s = garch(0.1, 0.7, 0.1, 0.1, 6.0);
        let a = simulate(&s, 1000, 7, DEFAULT_BURN_IN).unwrap();
        assert!(a.true_path.iter().all(|&f| f >= 1.0 / 3.0 - 1e-15));
        assert_eq!(a.series.len(), 1000);
        let b = simulate(&s, 1000, 7, DEFAULT_BURN_IN).unwrap();
        assert_eq!(a, b);
        let c = simulate(&s, 1000, 8, DEFAULT_BURN_IN).unwrap();
        assert_ne!(a.series, c.series);
    }

    #[test]
    fn lagged_models_carry_presample_value() {
        let s = ModelSpec::TvAr(TvArParams::new(0.05, 0.8, 0.05, 1.0, 6.0));
        let out = simulate(&s, 300, 1, 100).unwrap();
        assert_eq!(out.series.len(), 301);
        assert_eq!(out.true_path.len(), 300);
        assert_eq!(out.observations().len(), 300);
        let s = ModelSpec::TLocation(TLocationParams::new(0.1, 0.9, 0.5, 1.0, 5.0));
        let out = simulate(&s, 300, 1, 0).unwrap();
        let dom = s.domain();
        assert!(out.true_path.iter().all(|&f| dom.contains(f)));
        assert!((out.true_path[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn explosive_dgp_is_reported() {
        // E log c_t > 0: the variance path grows without bound
        let s = garch(0.1, 0.99, 2.0, 0.0, 4.0);
        assert!(matches!(simulate(&s, 100_000, 1, 0), Err(Error::Nonstationary { .. })));
        assert!(simulate(&garch(0.1, 1.2, 0.1, 0.0, 4.0), 10, 1, 0).is_err());
        assert!(simulate(&garch(0.1, 0.5, 0.1, 0.0, 4.0), 0, 1, 0).is_err());
    }

    #[test]
    fn sample_variance_tracks_mean_variance() {
        let s = garch(0.1, 0.7, 0.1, 0.1, 6.0);
        let out = simulate(&s, 200_000, 11, DEFAULT_BURN_IN).unwrap();
        let var = out.series.iter().map(|y| y * y).sum::<f64>() / out.series.len() as f64;
        let mean_f = out.true_path.iter().sum::<f64>() / out.true_path.len() as f64;
        // E c_t = β + α + γ/2 = 0.85, so E f = 0.1/0.15
        assert!((var / mean_f - 1.0).abs() < 0.05, "{var} vs {mean_f}");
        assert!((mean_f - 2.0 / 3.0).abs() < 0.05, "{mean_f}");
    }

    #[test]
    fn report_without_news_is_exact() {
        let r = stationarity_report(&BetaTGarchParams::new(0.1, 0.6, 0.0, 0.0, 5.0), 5000, 1, &[1.0]).unwrap();
        assert_eq!(r.e_log_c.mean, 0.6f64.ln());
        assert_eq!(r.e_log_c.std_error, 0.0);
        assert_eq!(r.moment_checks[0].estimate.mean, 0.6);
        assert_eq!(r.moment_checks[0].estimate.std_error, 0.0);
        assert!(stationarity_report(&BetaTGarchParams::new(0.1, 0.6, 0.0, 0.0, 5.0), 999, 1, &[]).is_err());
    }

    #[test]
    fn first_moment_matches_beta_mean() {
        // Beta(1/2, v/2) has mean 1/(v+1), so E c_t = β + α + γ/2
        let p = BetaTGarchParams::new(0.1, 0.7, 0.1, 0.1, 6.0);
        let r = stationarity_report(&p, 1_000_000, 5, &[1.0]).unwrap();
        let closed = 0.7 + 0.1 + 0.1 / 2.0;
        let est = r.moment_checks[0].estimate;
        assert!((est.mean - closed).abs() < 3.0 * est.std_error, "{est:?}");
        assert!(r.e_log_c.mean < 0.0);
        assert!((r.sufficient_check - 0.85).abs() < 1e-15);
    }

    #[test]
    fn sufficient_condition_implies_negative_log_moment() {
        use rand::Rng;
        let mut rng = rng_for(2024, 0);
        for i in 0..100 {
            let beta = rng.random_range(0.0..0.95);
            let alpha = rng.random_range(0.0..(0.99 - beta));
            let gamma = rng.random_range(0.0..2.0 * (0.99 - beta - alpha));
            let v = rng.random_range(2.1..30.0);
            let p = BetaTGarchParams::new(0.1, beta, alpha, gamma, v);
            assert!(p.beta + p.alpha + p.gamma / 2.0 < 1.0);
            let r = stationarity_report(&p, 100_000, i, &[]).unwrap();
            assert!(r.e_log_c.mean < 0.0, "{p:?}: {:?}", r.e_log_c);
        }
    }

    #[test]
    fn shard_layout_does_not_depend_on_threads() {
        let p = BetaTGarchParams::new(0.1, 0.7, 0.1, 0.1, 6.0);
        let a = stationarity_report(&p, 200_000, 9, &[0.5]).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| stationarity_report(&p, 200_000, 9, &[0.5]).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn leverage_and_beta_draws_are_uncorrelated() {
        let n = 200_000;
        let draws = news_shocks(6.0, n, 3, 0).unwrap();
        let nf = n as f64;
        let (mb, md) = draws.iter().fold((0.0, 0.0), |(a, b), (x, d)| (a + x / nf, b + (*d as u8 as f64) / nf));
        let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
        for (x, d) in &draws {
            let (dx, dy) = (x - mb, (*d as u8 as f64) - md);
            sxy += dx * dy;
            sxx += dx * dx;
            syy += dy * dy;
        }
        let rho = sxy / (sxx * syy).sqrt();
        assert!(rho.abs() < 3.0 / nf.sqrt(), "rho = {rho}");
        // Beta(1/2, v/2) mean 1/(v+1)
        assert!((mb - 1.0 / 7.0).abs() < 0.002, "{mb}");
    }
}
