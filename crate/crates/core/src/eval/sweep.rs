//! Grids of experiments over τ × n × loss × class balancing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::experiment::{run_on_dataset, EvalReport, ExperimentConfig};
use super::report::write_report;
use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::nn::LossKind;

pub const SUMMARY_CSV: &str = "summary.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub taus: Vec<f64>,
    pub n_per_class: Vec<usize>,
    pub losses: Vec<LossKind>,
    pub class_balancing: Vec<bool>,
}

impl Default for SweepGrid {
    fn default() -> Self {
        SweepGrid {
            taus: vec![0.55, 0.75, 0.95],
            n_per_class: vec![200, 500, 1000],
            losses: vec![LossKind::Oce],
            class_balancing: vec![false],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub tau: f64,
    pub n_per_class: usize,
    pub loss: LossKind,
    pub class_balancing: bool,
}

impl SweepCell {
    /// Directory name, e.g. `tau0.75_n200_oce` or `tau0.55_n500_ce_balanced`.
    pub fn name(&self) -> String {
        let mut s = format!("tau{}_n{}_{}", self.tau, self.n_per_class, self.loss);
        if self.class_balancing {
            s.push_str("_balanced");
        }
        s
    }

    /// The base config with this cell's values; enables Mixup if it was off.
    pub fn apply(&self, base: &ExperimentConfig) -> ExperimentConfig {
        let mut cfg = base.clone();
        let mut mixup = cfg.mixup.take().unwrap_or_default();
        mixup.tau = self.tau;
        mixup.n_per_class = self.n_per_class;
        cfg.mixup = Some(mixup);
        cfg.train.loss = self.loss;
        cfg.train.class_balancing = self.class_balancing;
        cfg
    }
}

impl SweepGrid {
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut out = Vec::new();
        for &tau in &self.taus {
            for &n_per_class in &self.n_per_class {
                for &loss in &self.losses {
                    for &class_balancing in &self.class_balancing {
                        out.push(SweepCell {
                            tau,
                            n_per_class,
                            loss,
                            class_balancing,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.taus.is_empty()
            || self.n_per_class.is_empty()
            || self.losses.is_empty()
            || self.class_balancing.is_empty()
        {
            return Err(Error::InvalidConfig("every sweep axis needs at least one value".into()));
        }
        let cells = self.cells();
        let mut names: Vec<_> = cells.iter().map(SweepCell::name).collect();
        names.sort();
        names.dedup();
        if names.len() != cells.len() {
            return Err(Error::InvalidConfig("sweep grid contains duplicate values".into()));
        }
        Ok(())
    }
}

/// Runs every cell (at most `jobs` at once), writing each report to
/// `out_dir/<cell name>/` and a one-row-per-cell `summary.csv`.
///
/// Every cell is an ordinary experiment with the base seed, so running a
/// cell on its own produces the same report.
pub fn run_sweep(
    dataset: &Dataset,
    base: &ExperimentConfig,
    grid: &SweepGrid,
    out_dir: impl AsRef<Path>,
    jobs: usize,
) -> Result<Vec<(SweepCell, EvalReport)>> {
    grid.validate()?;
    let cells = grid.cells();
    for c in &cells {
        c.apply(base).validate()?;
    }
    let out_dir = out_dir.as_ref();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let reports = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| {
                let cfg = cell.apply(base);
                let report = run_on_dataset(dataset, &cfg).map_err(|e| Error::Cell {
                    cell: cell.name(),
                    source: Box::new(e),
                })?;
                write_report(out_dir.join(cell.name()), &report)?;
                Ok((*cell, report))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let path = out_dir.join(SUMMARY_CSV);
    fs::write(&path, summary_csv(&reports)).map_err(|e| Error::io(format!("writing {}", path.display()), e))?;
    Ok(reports)
}

pub fn summary_csv(reports: &[(SweepCell, EvalReport)]) -> String {
    let mut out = String::from(
        "cell,tau,n_per_class,loss,class_balancing,precision_mean,precision_std,recall_mean,recall_std,f1_mean,f1_std\n",
    );
    for (c, r) in reports {
        let s = &r.summary;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            c.name(),
            c.tau,
            c.n_per_class,
            c.loss,
            c.class_balancing,
            s.precision.mean,
            s.precision.std,
            s.recall.mean,
            s.recall.std,
            s.f1.mean,
            s.f1.std
        );
    }
    out
}
