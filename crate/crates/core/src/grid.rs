//! Two-parameter lattices of the empirical Lyapunov value, the feasible
//! condition and the region / confidence-set memberships.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{boundary_test, memberships};
use crate::invertibility::{feasible_condition_garch, log_lambdas};
use crate::io::fmt_f64;
use crate::model::{ModelKind, ModelSpec};

/// Default lattice size per axis.
pub const DEFAULT_GRID_SIZE: usize = 101;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    #[serde(default = "default_size")]
    pub size: usize,
}

fn default_size() -> usize {
    DEFAULT_GRID_SIZE
}

impl GridAxis {
    pub fn new(name: &str, lo: f64, hi: f64, size: usize) -> Self {
        Self { name: name.to_string(), lo, hi, size }
    }

    /// Evenly spaced lattice including both ends.
    pub fn values(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.size - 1) as f64;
        (0..self.size)
            .map(|i| if i + 1 == self.size { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }

    fn check(&self, kind: ModelKind) -> Result<()> {
        if kind.param_index(&self.name).is_none() {
            return Err(Error::InvalidArgument(format!("{kind} has no parameter '{}'", self.name)));
        }
        if !(self.size >= 2 && self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi) {
            return Err(Error::InvalidArgument(format!(
                "axis '{}' needs lo < hi and at least two points",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellStatus {
    Ok,
    Inadmissible,
    /// Some `Λ_t` is zero, so the mean of `log Λ_t` is `−∞`.
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub status: CellStatus,
    pub lyapunov: Option<f64>,
    pub feasible: Option<f64>,
    pub in_region: bool,
    pub t_stat: Option<f64>,
    pub in_up: Option<bool>,
    pub in_lo: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionOptions {
    pub delta: f64,
    /// Confidence level for the upper/lower sets; `None` skips the test.
    pub alpha: Option<f64>,
    pub bandwidth: Option<usize>,
}

impl Default for RegionOptions {
    fn default() -> Self {
        Self { delta: crate::invertibility::DEFAULT_DELTA, alpha: None, bandwidth: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisValues {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionGrid {
    pub model: ModelKind,
    pub axis_x: AxisValues,
    pub axis_y: AxisValues,
    /// Parameters held fixed; the two axis entries are overwritten per cell.
    pub fixed: ModelSpec<f64>,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub bandwidth: Option<usize>,
    pub n: usize,
    /// Row-major with `x` varying fastest: index `iy * nx + ix`.
    pub cells: Vec<GridCell>,
}

impl RegionGrid {
    pub fn cell(&self, ix: usize, iy: usize) -> &GridCell {
        &self.cells[iy * self.axis_x.values.len() + ix]
    }

    /// One row per cell: `x,y,lyapunov,feasible,in_region,in_up,in_lo`.
    /// Missing numbers are written as `NaN`, missing flags as empty fields.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x,y,lyapunov,feasible,in_region,in_up,in_lo")?;
        let num = |v: Option<f64>| v.map(fmt_f64).unwrap_or_else(|| "NaN".to_string());
        let flag = |b: Option<bool>| match b {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                fmt_f64(c.x),
                fmt_f64(c.y),
                num(c.lyapunov),
                num(c.feasible),
                flag(Some(c.in_region)),
                flag(c.in_up),
                flag(c.in_lo)
            )?;
        }
        Ok(())
    }
}

/// Evaluates the region quantities on the lattice spanned by `axis_x × axis_y`,
/// all other parameters taken from `fixed`. Cells are independent and are
/// computed in parallel; the output order is fixed by lattice index.
pub fn region_grid(
    series: &[f64],
    fixed: &ModelSpec<f64>,
    axis_x: &GridAxis,
    axis_y: &GridAxis,
    opts: &RegionOptions,
) -> Result<RegionGrid> {
    let kind = fixed.kind();
    axis_x.check(kind)?;
    axis_y.check(kind)?;
    if axis_x.name == axis_y.name {
        return Err(Error::InvalidArgument("grid axes must name two distinct parameters".into()));
    }
    if !(opts.delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {}", opts.delta)));
    }
    if let Some(a) = opts.alpha {
        memberships(0.0, a)?;
    }
    let n = series
        .len()
        .checked_sub(kind.lag_order())
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidArgument("series too short for the model".into()))?;
    if series.iter().any(|y| !y.is_finite()) {
        return Err(Error::Data("series contains non-finite values".into()));
    }

    let xs = axis_x.values();
    let ys = axis_y.values();
    let nx = xs.len();
    let cells: Vec<GridCell> = (0..nx * ys.len())
        .into_par_iter()
        .map(|idx| {
            let (ix, iy) = (idx % nx, idx / nx);
            evaluate_cell(series, fixed, axis_x, axis_y, xs[ix], ys[iy], ix, iy, opts)
        })
        .collect();

    Ok(RegionGrid {
        model: kind,
        axis_x: AxisValues { name: axis_x.name.clone(), values: xs },
        axis_y: AxisValues { name: axis_y.name.clone(), values: ys },
        fixed: *fixed,
        delta: opts.delta,
        alpha: opts.alpha,
        bandwidth: opts.bandwidth,
        n,
        cells,
    })
}

#[allow(clippy::too_many_arguments)]
fn evaluate_cell(
    series: &[f64],
    fixed: &ModelSpec<f64>,
    axis_x: &GridAxis,
    axis_y: &GridAxis,
    x: f64,
    y: f64,
    ix: usize,
    iy: usize,
    opts: &RegionOptions,
) -> GridCell {
    let mut cell = GridCell {
        ix,
        iy,
        x,
        y,
        status: CellStatus::Inadmissible,
        lyapunov: None,
        feasible: None,
        in_region: false,
        t_stat: None,
        in_up: None,
        in_lo: None,
    };
    let spec = match fixed.with_param(&axis_x.name, x).and_then(|s| s.with_param(&axis_y.name, y)) {
        Ok(s) if s.violations().is_empty() => s,
        _ => return cell,
    };
    if let ModelSpec::BetaTGarch(p) = spec {
        cell.feasible = Some(feasible_condition_garch(&p));
    }
    let logs = match log_lambdas(series, &spec) {
        Ok(l) => l,
        Err(_) => return cell,
    };
    if logs.iter().any(|v| v.is_infinite()) {
        cell.status = CellStatus::Degenerate;
        return cell;
    }
    cell.status = CellStatus::Ok;
    let mean = logs.iter().sum::<f64>() / logs.len() as f64;
    cell.lyapunov = Some(mean);
    cell.in_region = mean <= -opts.delta;
    if let Some(alpha) = opts.alpha {
        if let Ok(test) = boundary_test(&logs, opts.bandwidth) {
            if let Ok((up, lo)) = memberships(test.t_stat, alpha) {
                cell.t_stat = Some(test.t_stat);
                cell.in_up = Some(up);
                cell.in_lo = Some(lo);
            }
        }
    }
    cell
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::invertibility::empirical_lyapunov;
    use crate::model::BetaTGarchParams;

    fn data(n: usize) -> Vec<f64> {
        (0..n).map(|i| (i as f64 * 0.77).sin() * 1.5 + (i as f64 * 0.05).cos() * 0.3).collect()
    }

    #[test]
    fn zero_alpha_row_has_analytic_boundary() {
        let y = data(200);
        let base = ModelSpec::BetaTGarch(BetaTGarchParams::new(0.1, 0.5, 0.0, 0.0, 6.0));
        let g = region_grid(
            &y,
            &base,
            &GridAxis::new("alpha", 0.0, 0.3, 4),
            &GridAxis::new("beta", 0.9, 0.999, 100),
            &RegionOptions { delta: 0.01, ..Default::default() },
        )
        .unwrap();
        let boundary = (-0.01f64).exp();
        for iy in 0..100 {
            let c = g.cell(0, iy);
            assert!((c.lyapunov.unwrap() - c.y.ln()).abs() < 1e-14);
            assert_eq!(c.in_region, c.y <= boundary);
        }
    }

    #[test]
    fn cells_match_direct_calls_and_flag_inadmissible() {
        let y = data(300);
        let base = ModelSpec::BetaTGarch(BetaTGarchParams::new(0.1, 0.5, 0.1, 0.1, 6.0));
        let g = region_grid(
            &y,
            &base,
            &GridAxis::new("gamma", -0.3, 0.5, 9),
            &GridAxis::new("beta", 0.2, 1.1, 10),
            &RegionOptions { delta: 0.01, alpha: Some(0.05), bandwidth: None },
        )
        .unwrap();
        assert_eq!(g.cells.len(), 90);
        for c in &g.cells {
            let spec = base.with_param("gamma", c.x).unwrap().with_param("beta", c.y).unwrap();
            if spec.violations().is_empty() {
                let e = empirical_lyapunov(&y, &spec).unwrap().value;
                assert_eq!(c.lyapunov, Some(e));
                assert!(c.in_up.is_some());
            } else {
                assert_eq!(c.status, CellStatus::Inadmissible);
                assert!(!c.in_region && c.lyapunov.is_none());
            }
        }
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 91);
        assert!(text.starts_with("x,y,lyapunov,feasible,in_region,in_up,in_lo\n"));
    }

    #[test]
    fn axis_errors() {
        let y = data(50);
        let base = ModelSpec::BetaTGarch(BetaTGarchParams::new(0.1, 0.5, 0.1, 0.1, 6.0));
        let ok = GridAxis::new("beta", 0.1, 0.9, 3);
        assert!(region_grid(&y, &base, &ok, &ok, &RegionOptions::default()).is_err());
        assert!(region_grid(&y, &base, &GridAxis::new("sigma", 0.1, 0.9, 3), &ok, &RegionOptions::default()).is_err());
        assert!(region_grid(&y, &base, &GridAxis::new("alpha", 0.5, 0.1, 3), &ok, &RegionOptions::default()).is_err());
    }
}
