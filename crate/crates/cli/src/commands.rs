use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use odm::estimate::{multi_start, standard_errors, EstimationResult};
use odm::filter::{default_init, divergence_diagnostic};
use odm::grid::{region_grid, RegionOptions};
use odm::inference::{confidence_membership, invertibility_test};
use odm::invertibility::{empirical_lyapunov, feasible_condition_garch, location_sup_bound};
use odm::io::{fmt_f64, ingest_csv, write_columns, write_series, Dataset};
use odm::simulate::simulate as simulate_series;
use odm::ModelSpec;
use serde::Serialize;

use crate::config::{DatasetConfig, RunConfig};
use crate::error::{CliError, CliResult};

fn create(out: &Path, name: &str) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(out.join(name))?))
}

fn write_json<S: Serialize>(out: &Path, name: &str, value: &S) -> CliResult<()> {
    let mut w = create(out, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| CliError::Data(e.to_string()))?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn load(d: &DatasetConfig) -> CliResult<Dataset> {
    let column = d.column.parse().unwrap_or_default();
    let mut ds = ingest_csv(&d.path, &column, d.transform)?;
    if let Some(n) = &d.name {
        ds.name = n.clone();
    }
    Ok(ds)
}

fn primary_data(cfg: &RunConfig) -> CliResult<Dataset> {
    match cfg.all_datasets().first() {
        Some(d) => load(d),
        None => Err(CliError::config("data", "this command needs --data or a data entry in the config")),
    }
}

/// Best multi-start fit with standard errors attached where they exist.
fn estimate(cfg: &RunConfig, series: &[f64]) -> CliResult<EstimationResult> {
    let delta = cfg.constrained.then_some(cfg.delta);
    let mut r = multi_start(series, cfg.model, cfg.n_starts, cfg.seed, delta, cfg.init, &cfg.optimizer)?;
    r.std_errors = standard_errors(series, &r).ok();
    Ok(r)
}

/// The configured parameters, or the fitted ones when none are given.
fn parameters(cfg: &RunConfig, series: &[f64]) -> CliResult<ModelSpec<f64>> {
    match cfg.spec() {
        Some(s) => Ok(s),
        None => Ok(estimate(cfg, series)?.theta_hat),
    }
}

pub fn simulate(cfg: &RunConfig) -> CliResult<()> {
    let spec = cfg.spec().ok_or_else(|| CliError::config("params", "simulate needs a parameter vector"))?;
    let sim = simulate_series(&spec, cfg.n, cfg.seed, cfg.burn_in)?;
    let mut w = create(&cfg.out, "series.csv")?;
    write_series(&mut w, "y", &sim.series)?;
    w.flush()?;
    let mut w = create(&cfg.out, "true_path.csv")?;
    write_series(&mut w, "f", &sim.true_path)?;
    w.flush()?;
    Ok(())
}

pub fn fit(cfg: &RunConfig) -> CliResult<()> {
    let data = primary_data(cfg)?;
    let r = estimate(cfg, &data.observations)?;
    write_json(&cfg.out, "fit.json", &r)
}

pub fn region(cfg: &RunConfig) -> CliResult<()> {
    let data = primary_data(cfg)?;
    let fixed = parameters(cfg, &data.observations)?;
    let opts = RegionOptions { delta: cfg.delta, alpha: Some(cfg.alpha), bandwidth: cfg.bandwidth };
    let grid = region_grid(&data.observations, &fixed, &cfg.grid.x, &cfg.grid.y, &opts)?;
    let mut w = create(&cfg.out, "region.csv")?;
    grid.write_csv(&mut w)?;
    w.flush()?;
    write_json(&cfg.out, "region.json", &grid)
}

#[derive(Serialize)]
struct TestOutput {
    params: ModelSpec<f64>,
    alpha: f64,
    in_up: bool,
    in_lo: bool,
    test: odm::TestResult64,
}

pub fn test(cfg: &RunConfig) -> CliResult<()> {
    let data = primary_data(cfg)?;
    let params = parameters(cfg, &data.observations)?;
    let m = confidence_membership(&data.observations, &params, cfg.alpha, cfg.bandwidth)?;
    let out = TestOutput { params, alpha: m.alpha, in_up: m.in_up, in_lo: m.in_lo, test: m.test };
    write_json(&cfg.out, "test.json", &out)
}

pub fn diverge(cfg: &RunConfig) -> CliResult<()> {
    let data = primary_data(cfg)?;
    let y = &data.observations;
    let params = parameters(cfg, y)?;
    let [a, b] = cfg.f0_pair.unwrap_or_else(|| {
        let f0 = default_init(y, &params);
        let dom = params.domain();
        match params {
            ModelSpec::BetaTGarch(_) => [f0, 10.0 * f0],
            _ => [dom.clamp(f0 - 1.0), dom.clamp(f0 + 1.0)],
        }
    });
    let d = divergence_diagnostic(y, &params, a, b)?;
    let t: Vec<f64> = (0..d.abs_diff.len()).map(|t| t as f64).collect();
    let mut w = create(&cfg.out, "diverge.csv")?;
    write_columns(&mut w, &["t", "gap"], &[&t, &d.abs_diff])?;
    w.flush()?;
    Ok(())
}

/// Closed-form contraction condition on the log scale: the garch feasible
/// condition, the log of the uniform bound for location, none for tv_ar.
pub fn closed_form_condition(spec: &ModelSpec<f64>) -> Option<f64> {
    match spec {
        ModelSpec::BetaTGarch(p) => Some(feasible_condition_garch(p)),
        ModelSpec::TLocation(p) => Some(location_sup_bound(p).ln()),
        ModelSpec::TvAr(_) => None,
    }
}

#[derive(Debug, Serialize)]
pub struct ReportRow {
    pub dataset: String,
    pub n: usize,
    pub names: Vec<String>,
    pub theta_hat: Vec<f64>,
    pub std_errors: Vec<Option<f64>>,
    pub loglik: f64,
    pub cc: Option<f64>,
    pub ec: f64,
    pub t_stat: Option<f64>,
    pub p_left: Option<f64>,
    pub fit: EstimationResult,
}

fn report_row(cfg: &RunConfig, data: &Dataset) -> CliResult<ReportRow> {
    let y = &data.observations;
    let fit = estimate(cfg, y)?;
    let theta = fit.theta_hat;
    let se = fit.std_errors.as_ref().and_then(|s| s.values.clone()).unwrap_or_else(|| vec![None; 5]);
    // a degenerate test statistic is reported as missing rather than failing the row
    let test = invertibility_test(y, &theta, cfg.bandwidth).ok();
    Ok(ReportRow {
        dataset: data.name.clone(),
        n: fit.n,
        names: theta.kind().param_names().iter().map(|s| s.to_string()).collect(),
        theta_hat: theta.to_vec(),
        std_errors: se,
        loglik: fit.loglik,
        cc: closed_form_condition(&theta),
        ec: empirical_lyapunov(y, &theta)?.value,
        t_stat: test.map(|t| t.t_stat),
        p_left: test.map(|t| t.p_left),
        fit,
    })
}

pub fn report(cfg: &RunConfig) -> CliResult<()> {
    let sets = cfg.all_datasets();
    if sets.is_empty() {
        return Err(CliError::config("datasets", "report needs --data or at least one dataset"));
    }
    let mut rows = Vec::with_capacity(sets.len());
    for d in &sets {
        rows.push(report_row(cfg, &load(d)?)?);
    }

    let mut w = create(&cfg.out, "report.csv")?;
    let names = cfg.model.param_names();
    let mut header = vec!["dataset".to_string(), "n".to_string()];
    for p in names {
        header.push(p.to_string());
        header.push(format!("se_{p}"));
    }
    header.extend(["loglik", "cc", "ec", "p_left"].map(String::from));
    writeln!(w, "{}", header.join(","))?;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    for r in &rows {
        let mut cells = vec![r.dataset.clone(), r.n.to_string()];
        for (v, s) in r.theta_hat.iter().zip(&r.std_errors) {
            cells.push(fmt_f64(*v));
            cells.push(opt(*s));
        }
        cells.extend([fmt_f64(r.loglik), opt(r.cc), fmt_f64(r.ec), opt(r.p_left)]);
        writeln!(w, "{}", cells.join(","))?;
    }
    w.flush()?;
    write_json(&cfg.out, "report.json", &rows)
}
