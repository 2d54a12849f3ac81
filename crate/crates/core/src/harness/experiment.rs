use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use super::output::{emit_csv, SweepRow};
use super::plot::{emit_plot, PlotSpec};
use super::{mean_and_stderr, with_workers};
use crate::bounds;
use crate::error::{Error, Result};
use crate::estimators::{budget_split, estimate, gq_nodes, Method, NodeSet};
use crate::integrand::Polynomial;
use crate::oracle::{OracleInstance, OracleSpec};
use crate::seed;

/// Which sweep to run: error against budget, dimension, or radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Budget = 1,
    Dimension = 2,
    Radius = 3,
}

impl Figure {
    pub fn number(self) -> u8 {
        self as u8
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" => Ok(Figure::Budget),
            "2" => Ok(Figure::Dimension),
            "3" => Ok(Figure::Radius),
            other => Err(Error::InvalidParameter(format!("figure must be 1, 2 or 3, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Paper,
    Desk,
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scale::Paper => "paper",
            Scale::Desk => "desk",
        })
    }
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "paper" => Ok(Scale::Paper),
            "desk" => Ok(Scale::Desk),
            other => Err(Error::InvalidParameter(format!("scale must be paper or desk, got {other:?}"))),
        }
    }
}

/// One configuration of the Gauss estimator: dimension, radius, total budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub d: usize,
    pub r: f64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub figure: Figure,
    pub scale: Scale,
    pub polynomials_per_point: usize,
    pub sigma: f64,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub emit_plot: bool,
    pub workers: Option<usize>,
    /// Replaces the preset sweep when set.
    pub points: Option<Vec<SweepPoint>>,
}

impl ExperimentConfig {
    /// Preset with 100 polynomials per point and `sigma = 1`.
    pub fn preset(figure: Figure, scale: Scale) -> Self {
        ExperimentConfig {
            figure,
            scale,
            polynomials_per_point: 100,
            sigma: 1.0,
            seed: 0,
            output_dir: None,
            emit_plot: false,
            workers: None,
            points: None,
        }
    }

    /// Sweep points of the preset, or the override.
    ///
    /// Budget sweep: `T = m 2^d` for `m = 1..=64` (d = 10, r = 5 at paper
    /// scale; d = 6, r = 1.5 at desk scale). Dimension sweep: `m = 4`,
    /// `r = 5`, d = 1..=16 (paper) or 1..=12 (desk). Radius sweep: `m = 4`,
    /// `r = 2^k`, d = 10 with k = -5..=10 (paper) or d = 6 with k = -5..=4 (desk).
    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        if let Some(points) = &self.points {
            return points.clone();
        }
        let gq = |d: usize, r: f64, m: u64| SweepPoint { d, r, t: m << d };
        match (self.figure, self.scale) {
            (Figure::Budget, Scale::Paper) => (1..=64).map(|m| gq(10, 5.0, m)).collect(),
            (Figure::Budget, Scale::Desk) => (1..=64).map(|m| gq(6, 1.5, m)).collect(),
            (Figure::Dimension, Scale::Paper) => (1..=16).map(|d| gq(d, 5.0, 4)).collect(),
            (Figure::Dimension, Scale::Desk) => (1..=12).map(|d| gq(d, 5.0, 4)).collect(),
            (Figure::Radius, Scale::Paper) => (-5..=10).map(|k| gq(10, 2f64.powi(k), 4)).collect(),
            (Figure::Radius, Scale::Desk) => (-5..=4).map(|k| gq(6, 2f64.powi(k), 4)).collect(),
        }
    }

    pub fn sweep_value(&self, p: &SweepPoint) -> f64 {
        match self.figure {
            Figure::Budget => p.t as f64,
            Figure::Dimension => p.d as f64,
            Figure::Radius => p.r,
        }
    }

    pub fn file_stem(&self) -> String {
        format!("figure{}_{}", self.figure.number(), self.scale)
    }

    pub fn csv_path(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| d.join(format!("{}.csv", self.file_stem())))
    }

    pub fn plot_path(&self) -> Option<PathBuf> {
        self.output_dir.as_ref().map(|d| d.join(format!("{}.svg", self.file_stem())))
    }

    fn plot_spec(&self) -> PlotSpec {
        let (x_label, log_x) = match self.figure {
            Figure::Budget => ("queries T", true),
            Figure::Dimension => ("dimension d", false),
            Figure::Radius => ("radius r", true),
        };
        PlotSpec {
            title: format!("Gauss quadrature error vs {} ({} scale, sigma = {})", x_label, self.scale, self.sigma),
            x_label: x_label.to_owned(),
            y_label: "mean |error|".to_owned(),
            log_x,
        }
    }
}

/// Runs every sweep point: for each, `polynomials_per_point` seeded random
/// cubics are integrated by the Gauss estimator against a Gaussian oracle and
/// the mean absolute error is paired with the predicted expected error.
///
/// Work is spread across threads but every replicate owns a seed derived
/// from its indices and results are reduced in index order, so the output is
/// identical for any worker count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    if cfg.polynomials_per_point == 0 {
        return Err(Error::InvalidParameter("need at least one polynomial per point".into()));
    }
    if !(cfg.sigma > 0.0) {
        return Err(Error::InvalidParameter(format!("sigma must be positive, got {}", cfg.sigma)));
    }
    let points = cfg.sweep_points();
    if points.is_empty() {
        return Err(Error::InvalidParameter("sweep has no points".into()));
    }
    let mut plans: Vec<(NodeSet, u64)> = Vec::with_capacity(points.len());
    for p in &points {
        let nodes = gq_nodes(p.d, p.r)?;
        let budget = budget_split(p.t, Method::Gq.node_count(p.d).unwrap_or(u64::MAX))?;
        plans.push((nodes, budget.per_node));
    }

    let reps = cfg.polynomials_per_point;
    let errors: Vec<f64> = with_workers(cfg.workers, || {
        (0..points.len() * reps)
            .into_par_iter()
            .map(|task| {
                let (pi, j) = (task / reps, task % reps);
                let (nodes, m) = &plans[pi];
                let f = Polynomial::random_cubic(nodes.dim(), seed::derive(cfg.seed, &[0, j as u64]))?;
                let spec = OracleSpec::gaussian(cfg.sigma, seed::derive(cfg.seed, &[1, pi as u64, j as u64]));
                let mut oracle = OracleInstance::new(spec)?.with_budget(points[pi].t);
                let report = estimate(nodes, &mut oracle, &f, *m)?;
                Ok(report.abs_error.expect("polynomial integrands have exact integrals"))
            })
            .collect::<Result<Vec<f64>>>()
    })??;

    let rows: Vec<SweepRow> = points
        .iter()
        .zip(errors.chunks(reps))
        .map(|(p, errs)| {
            let (mean, se) = mean_and_stderr(errs);
            SweepRow {
                sweep: cfg.sweep_value(p),
                mean_abs_error: mean,
                std_error: se,
                theory: bounds::gq_gaussian_error(p.d, p.r, cfg.sigma, p.t as f64, 0.0, None).value,
                n: errs.len(),
            }
        })
        .collect();

    if let Some(dir) = &cfg.output_dir {
        fs::create_dir_all(dir)?;
        emit_csv(&rows, &cfg.csv_path().expect("output dir set"))?;
        if cfg.emit_plot {
            emit_plot(&rows, &cfg.plot_spec(), &cfg.plot_path().expect("output dir set"))?;
        }
    }
    Ok(rows)
}

/// Least-squares slope of `ln(mean_abs_error)` against `ln(sweep)`.
pub fn loglog_slope(rows: &[SweepRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.sweep > 0.0 && r.mean_abs_error > 0.0)
        .map(|r| (r.sweep.ln(), r.mean_abs_error.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_points() {
        let f1 = ExperimentConfig::preset(Figure::Budget, Scale::Desk).sweep_points();
        assert_eq!(f1.len(), 64);
        assert_eq!(f1[0].t, 64);
        assert_eq!(f1[63].t, 64 * 64);
        let f1p = ExperimentConfig::preset(Figure::Budget, Scale::Paper).sweep_points();
        assert!(f1p.iter().all(|p| p.d == 10 && p.r == 5.0 && p.t % 1024 == 0));
        let f2 = ExperimentConfig::preset(Figure::Dimension, Scale::Paper).sweep_points();
        assert_eq!(f2.iter().map(|p| p.d).collect::<Vec<_>>(), (1..=16).collect::<Vec<_>>());
        assert!(f2.iter().all(|p| p.t == 4 << p.d));
        let f3 = ExperimentConfig::preset(Figure::Radius, Scale::Paper).sweep_points();
        assert_eq!(f3.len(), 16);
        assert_eq!(f3[0].r, 1.0 / 32.0);
        assert_eq!(f3[15].r, 1024.0);
        let f3d = ExperimentConfig::preset(Figure::Radius, Scale::Desk).sweep_points();
        assert_eq!(f3d.last().unwrap().r, 16.0);
    }

    #[test]
    fn small_run_rows_and_theory() {
        let mut cfg = ExperimentConfig::preset(Figure::Budget, Scale::Desk);
        cfg.polynomials_per_point = 5;
        cfg.points = Some(vec![SweepPoint { d: 2, r: 1.0, t: 4 }, SweepPoint { d: 2, r: 1.0, t: 8 }]);
        let rows = run_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].sweep, 4.0);
        assert_eq!(rows[0].n, 5);
        assert_eq!(rows[1].theory, bounds::gq_gaussian_error(2, 1.0, 1.0, 8.0, 0.0, None).value);
    }

    #[test]
    fn indivisible_budget_is_an_error() {
        let mut cfg = ExperimentConfig::preset(Figure::Budget, Scale::Desk);
        cfg.points = Some(vec![SweepPoint { d: 3, r: 1.0, t: 12 }]);
        assert!(matches!(run_experiment(&cfg), Err(Error::IndivisibleBudget { .. })));
    }

    #[test]
    fn slope_of_power_law() {
        let rows: Vec<SweepRow> = (1..=10)
            .map(|i| {
                let t = i as f64 * 8.0;
                SweepRow { sweep: t, mean_abs_error: 3.0 / t.sqrt(), std_error: 0.0, theory: 0.0, n: 1 }
            })
            .collect();
        assert!((loglog_slope(&rows).unwrap() + 0.5).abs() < 1e-12);
        assert_eq!(loglog_slope(&rows[..1]), None);
    }
}
