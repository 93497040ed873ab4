//! Derivative-free minimization: Nelder–Mead with restarts and a parallel
//! multi-start driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerOptions {
    pub max_iter: usize,
    /// Simplex diameter (max-norm distance from the best vertex).
    pub tol_x: f64,
    /// Spread of objective values across the simplex; only consulted once the
    /// diameter is below `sqrt(tol_x)`.
    pub tol_f: f64,
    /// Polishing restarts from the incumbent after the first run.
    pub restarts: usize,
    /// Edge length of the initial simplex in each coordinate.
    pub initial_step: f64,
    /// Escalating exterior-penalty weights for constrained fits.
    pub penalty_weights: Vec<f64>,
    pub seed: u64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            max_iter: 5000,
            tol_x: 1e-8,
            tol_f: 1e-12,
            restarts: 3,
            initial_step: 0.3,
            penalty_weights: vec![1e2, 1e4, 1e6],
            seed: 0,
        }
    }
}

impl OptimizerOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidArgument(format!("optimizer option {what}")));
        if !(self.tol_x > 0.0 && self.tol_f > 0.0) {
            return bad("tolerances must be > 0");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be >= 1");
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad("initial_step must be finite and > 0");
        }
        if self.penalty_weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return bad("penalty_weights must be finite and > 0");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmStatus {
    Converged,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: NmStatus,
}

struct Counted<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimizes `f` from `x0` with the standard simplex coefficients
/// (reflection 1, expansion 2, contraction ½, shrink ½).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: F, x0: &[f64], opts: &OptimizerOptions) -> Result<NmOutcome> {
    opts.validate()?;
    if x0.is_empty() {
        return Err(Error::InvalidArgument("empty starting point".into()));
    }
    let mut obj = Counted { f, evals: 0 };
    let f0 = obj.eval(x0);
    if !f0.is_finite() {
        return Err(Error::Estimation(format!("objective is not finite at the starting point ({f0})")));
    }
    let d = x0.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(x0.to_vec(), f0)];
    for i in 0..d {
        let mut x = x0.to_vec();
        x[i] += opts.initial_step;
        let v = obj.eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut status = NmStatus::MaxIter;
    while iterations < opts.max_iter {
        // stable sort keeps the construction order among ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = simplex[d].1 - best.1;
        // a flat spread alone also occurs on symmetric wide simplices
        if diameter < opts.tol_x || (spread.abs() < opts.tol_f && diameter < opts.tol_x.sqrt()) {
            status = NmStatus::Converged;
            break;
        }
        iterations += 1;

        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / d as f64;
            }
        }
        let (worst, fw) = simplex[d].clone();
        let f_best = simplex[0].1;
        let f_second = simplex[d - 1].1;

        let xr = lerp(&centroid, &worst, -1.0);
        let fr = obj.eval(&xr);
        if fr < f_best {
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = obj.eval(&xe);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < f_second {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc, accept) = if fr < fw {
            let xc = lerp(&centroid, &xr, 0.5);
            let fc = obj.eval(&xc);
            (xc, fc, fc <= fr)
        } else {
            let xc = lerp(&centroid, &worst, 0.5);
            let fc = obj.eval(&xc);
            (xc, fc, fc < fw)
        };
        if accept {
            simplex[d] = (xc, fc);
            continue;
        }
        let anchor = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x = lerp(&anchor, &vertex.0, 0.5);
            let v = obj.eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    Ok(NmOutcome { x, value, iterations, evaluations: obj.evals, status })
}

/// Nelder–Mead followed by up to `opts.restarts` fresh simplices around the
/// incumbent, stopping once a restart no longer improves by more than `tol_f`.
pub fn minimize<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &OptimizerOptions) -> Result<NmOutcome> {
    let mut best = nelder_mead(&mut f, x0, opts)?;
    for _ in 0..opts.restarts {
        let next = nelder_mead(&mut f, &best.x, opts)?;
        let improved = next.value < best.value - opts.tol_f;
        let iterations = best.iterations + next.iterations;
        let evaluations = best.evaluations + next.evaluations;
        if next.value <= best.value {
            best = NmOutcome { iterations, evaluations, ..next };
        } else {
            best.iterations = iterations;
            best.evaluations = evaluations;
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

/// Runs [`minimize`] from every start in parallel. Returns the index and
/// outcome with the lowest value; ties go to the lower index. Starts where
/// the objective is not finite are skipped.
pub fn multi_start_minimize<F>(f: F, starts: &[Vec<f64>], opts: &OptimizerOptions) -> Result<(usize, NmOutcome)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if starts.is_empty() {
        return Err(Error::InvalidArgument("at least one start is required".into()));
    }
    let runs: Vec<Option<NmOutcome>> = starts.par_iter().map(|x0| minimize(&f, x0, opts).ok()).collect();
    runs.into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .min_by(|a, b| a.1.value.total_cmp(&b.1.value).then(a.0.cmp(&b.0)))
        .ok_or_else(|| Error::Estimation("no start produced a finite objective".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
    }

    #[test]
    fn one_dimensional_quadratic() {
        let out = nelder_mead(|x: &[f64]| (x[0] - 3.0).powi(2), &[0.0], &OptimizerOptions::default()).unwrap();
        assert!((out.x[0] - 3.0).abs() < 1e-6, "{out:?}");
        assert_eq!(out.status, NmStatus::Converged);
    }

    #[test]
    fn rosenbrock_from_classic_start() {
        let out = minimize(rosenbrock, &[-1.2, 1.0], &OptimizerOptions::default()).unwrap();
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4, "{out:?}");
    }

    #[test]
    fn bitwise_deterministic() {
        let o = OptimizerOptions::default();
        let a = minimize(rosenbrock, &[-1.2, 1.0], &o).unwrap();
        let b = minimize(rosenbrock, &[-1.2, 1.0], &o).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let o = OptimizerOptions::default();
        assert!(nelder_mead(|_: &[f64]| f64::NAN, &[0.0], &o).is_err());
        assert!(nelder_mead(|_: &[f64]| f64::INFINITY, &[0.0], &o).is_err());
    }

    #[test]
    fn non_finite_region_is_avoided() {
        // objective undefined for x < 1
        let f = |x: &[f64]| if x[0] < 1.0 { f64::NAN } else { (x[0] - 1.5).powi(2) };
        let out = minimize(f, &[4.0], &OptimizerOptions::default()).unwrap();
        assert!((out.x[0] - 1.5).abs() < 1e-6);
    }

    #[test]
    fn max_iter_status() {
        let o = OptimizerOptions { max_iter: 3, ..Default::default() };
        let out = nelder_mead(rosenbrock, &[-1.2, 1.0], &o).unwrap();
        assert_eq!(out.status, NmStatus::MaxIter);
        assert_eq!(out.iterations, 3);
    }

    #[test]
    fn invalid_options_rejected() {
        let o = OptimizerOptions { tol_x: 0.0, ..Default::default() };
        assert!(nelder_mead(rosenbrock, &[0.0, 0.0], &o).is_err());
        let o = OptimizerOptions { penalty_weights: vec![-1.0], ..Default::default() };
        assert!(o.validate().is_err());
    }

    #[test]
    fn multi_start_finds_global_basin() {
        // shallow local basin near −2, deeper global basin near +3
        let f = |x: &[f64]| -(-(x[0] + 2.0).powi(2)).exp() - 2.0 * (-(x[0] - 3.0).powi(2)).exp();
        let o = OptimizerOptions { initial_step: 0.1, ..Default::default() };
        let single = minimize(f, &[-2.5], &o).unwrap();
        assert!((single.x[0] + 2.0).abs() < 0.1);
        let starts: Vec<Vec<f64>> = (0..10).map(|i| vec![-2.5 + i as f64 * 0.7]).collect();
        let (_, best) = multi_start_minimize(f, &starts, &o).unwrap();
        assert!((best.x[0] - 3.0).abs() < 1e-4, "{best:?}");
    }

    #[test]
    fn multi_start_ties_go_to_lowest_index() {
        let f = |x: &[f64]| x[0] * x[0];
        let starts = vec![vec![1.0], vec![1.0], vec![1.0]];
        let (i, _) = multi_start_minimize(f, &starts, &OptimizerOptions::default()).unwrap();
        assert_eq!(i, 0);
    }
}
