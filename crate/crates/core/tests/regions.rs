use rand::Rng;

use odm::grid::{region_grid, CellStatus, GridAxis, RegionOptions};
use odm::inference::confidence_membership;
use odm::invertibility::{empirical_lyapunov, feasible_condition_garch};
use odm::simulate::{rng_for, simulate};
use odm::{BetaTGarchParams, ModelSpec};

fn garch(omega: f64, beta: f64, alpha: f64, gamma: f64, v: f64) -> ModelSpec<f64> {
    ModelSpec::BetaTGarch(BetaTGarchParams::new(omega, beta, alpha, gamma, v))
}

fn theta0() -> ModelSpec<f64> {
    garch(0.1, 0.7, 0.1, 0.1, 6.0)
}

#[test]
fn confidence_sets_nest_around_region() {
    let opts = RegionOptions { delta: 1e-3, alpha: Some(0.05), bandwidth: None };
    for seed in 0..10 {
        let y = simulate(&theta0(), 2000, seed, 1000).unwrap().series;
        let grid = region_grid(
            &y,
            &theta0(),
            &GridAxis::new("alpha", 0.05, 0.6, 21),
            &GridAxis::new("beta", 0.1, 0.98, 21),
            &opts,
        )
        .unwrap();
        let (mut lo, mut mid, mut up) = (0, 0, 0);
        for c in grid.cells.iter().filter(|c| c.status == CellStatus::Ok) {
            let (in_lo, in_up) = (c.in_lo.unwrap(), c.in_up.unwrap());
            let in_region = c.in_region;
            assert!(!in_lo || in_region, "lower set escapes the region at {c:?}");
            assert!(!in_region || in_up, "region escapes the upper set at {c:?}");
            lo += in_lo as usize;
            mid += in_region as usize;
            up += in_up as usize;
        }
        assert!(lo > 0 && lo <= mid && mid <= up, "{lo} {mid} {up}");
    }
}

#[test]
fn cells_agree_with_direct_calls() {
    let y = simulate(&theta0(), 1500, 1, 1000).unwrap().series;
    let grid = region_grid(
        &y,
        &theta0(),
        &GridAxis::new("gamma", 0.0, 0.8, 15),
        &GridAxis::new("v", 2.5, 20.0, 15),
        &RegionOptions::default(),
    )
    .unwrap();
    let mut rng = rng_for(20, 0);
    for _ in 0..20 {
        let (ix, iy) = (rng.random_range(0..15), rng.random_range(0..15));
        let c = grid.cell(ix, iy);
        let s = theta0().with_param("gamma", c.x).unwrap().with_param("v", c.y).unwrap();
        assert_eq!(c.lyapunov.unwrap(), empirical_lyapunov(&y, &s).unwrap().value);
        let ModelSpec::BetaTGarch(p) = s else { unreachable!() };
        assert_eq!(c.feasible.unwrap(), feasible_condition_garch(&p));
    }
}

#[test]
fn lyapunov_matches_two_pass_oracle() {
    let y = simulate(&theta0(), 2000, 6, 1000).unwrap().series;
    let mut rng = rng_for(21, 0);
    for _ in 0..50 {
        let (omega, beta, alpha, gamma, v) = (
            rng.random_range(0.01..1.0),
            rng.random_range(0.0..0.99),
            rng.random_range(0.0..0.5),
            rng.random_range(0.0..0.5),
            rng.random_range(2.1..30.0),
        );
        let wbar = omega / (1.0 - beta);
        let terms: Vec<f64> = y
            .iter()
            .map(|&yt| {
                let a = if yt <= 0.0 { alpha + gamma } else { alpha };
                let den = (v - 2.0) * wbar + yt * yt;
                (beta + a * (v + 1.0) * yt.powi(4) / (den * den)).ln()
            })
            .collect();
        // two-pass: mean, then a correction from the residual sum
        let m = terms.iter().sum::<f64>() / terms.len() as f64;
        let oracle = m + terms.iter().map(|t| t - m).sum::<f64>() / terms.len() as f64;
        let got = empirical_lyapunov(&y, &garch(omega, beta, alpha, gamma, v)).unwrap().value;
        assert!((got - oracle).abs() < 1e-12);
    }
}

#[test]
fn lyapunov_is_monotone_in_alpha() {
    let y = simulate(&theta0(), 1000, 2, 1000).unwrap().series;
    let mut last = f64::NEG_INFINITY;
    for i in 0..40 {
        let s = garch(0.1, 0.6, 0.01 * i as f64, 0.1, 6.0);
        let l = empirical_lyapunov(&y, &s).unwrap().value;
        assert!(l >= last);
        last = l;
    }
}

#[test]
fn memberships_cover_deep_and_exclude_explosive_points() {
    let deep = garch(0.1, 0.3, 0.05, 0.05, 6.0);
    let explosive = garch(0.01, 0.9, 0.4, 0.4, 6.0);
    for seed in 0..10 {
        let y = simulate(&theta0(), 2000, 40 + seed, 1000).unwrap().series;
        assert!(confidence_membership(&y, &deep, 0.05, None).unwrap().in_up);
        let m = confidence_membership(&y, &explosive, 0.05, None).unwrap();
        assert!(m.test.mean_log_lambda > 0.2);
        assert!(!m.in_lo && !m.in_up);
    }
}
