//! Desk-scale experiment suites and the report plumbing they share.
//!
//! Every suite returns a [`SuiteReport`]: a results table, named pass/fail
//! checks, long-format plot rows and a JSON summary. Runs fan out over rayon
//! and are merged in parameter order, so reports are reproducible bit for bit.

mod decay;
mod dichotomy;
mod gn;
mod kernel_bounds;
mod lifespan;
mod spec;
mod testfn;
mod xs;

use std::fmt::Display;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use decay::{decay_suite, DecayCase, DecayFit, DecaySpec};
pub use dichotomy::{dichotomy_scan, CellLabel, DichotomyRow, DichotomySpec, DichotomySummary};
pub use gn::{gn_probe_suite, GnCase, GnProbeRow, GnProbeSpec};
pub use kernel_bounds::{kernel_bounds_suite, KernelBoundsSpec};
pub use lifespan::{lifespan_suite, LifespanPoint, LifespanSpec, LifespanSummary};
pub use spec::{ExperimentKind, ExperimentSpec};
pub use testfn::{bump, testfn_integrals, testfn_scaling, BumpKind, TestfnIntegrals, TestfnSpec};
pub use xs::{xs_norm, XsNorm};

use crate::evolution::EvolutionError;
use crate::fit::FitError;
use crate::graded::GradedError;
use crate::oracle::OracleError;
use crate::oscillator::OscillatorError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("{reason}\n{diagnostics}")]
    Aborted { reason: String, diagnostics: String },
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Oscillator(#[from] OscillatorError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Added to every report: negative-order norms on the torus use the mean-zero
/// surrogate (zero mode excluded).
pub const MEAN_ZERO_NOTE: &str =
    "negative-order homogeneous norms are evaluated on mean-zero fields with the zero mode excluded (torus surrogate)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// One row of the tidy plot table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub kind: ExperimentKind,
    pub checks: Vec<Check>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    #[serde(skip)]
    pub plot: Vec<PlotPoint>,
    pub notes: Vec<String>,
    pub summary: serde_json::Value,
}

/// Paths written by [`SuiteReport::write`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WrittenFiles {
    pub results: PathBuf,
    pub manifest: PathBuf,
    pub plot: Option<PathBuf>,
}

impl SuiteReport {
    pub(crate) fn new(kind: ExperimentKind, columns: &[&str]) -> Self {
        Self {
            kind,
            checks: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plot: Vec::new(),
            notes: vec![MEAN_ZERO_NOTE.to_string()],
            summary: serde_json::Value::Null,
        }
    }

    pub(crate) fn row(&mut self, cells: &[&dyn Display]) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells.iter().map(|c| c.to_string()).collect());
    }

    pub(crate) fn point(&mut self, series: impl Into<String>, x: f64, y: f64) {
        self.plot.push(PlotPoint {
            series: series.into(),
            x,
            y,
        });
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Write `results.csv`, `manifest.json` and optionally `plot.csv` into
    /// `dir`. The manifest echoes `spec` and `seed` alongside the checks.
    pub fn write<S: Serialize>(
        &self,
        dir: &Path,
        spec: &S,
        seed: u64,
        plot_data: bool,
    ) -> Result<WrittenFiles, ExperimentError> {
        std::fs::create_dir_all(dir)?;
        let results = dir.join("results.csv");
        let mut w = csv::Writer::from_path(&results)?;
        w.write_record(&self.columns)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;

        let plot = if plot_data {
            let path = dir.join("plot.csv");
            let mut w = csv::Writer::from_path(&path)?;
            for p in &self.plot {
                w.serialize(p)?;
            }
            w.flush()?;
            Some(path)
        } else {
            None
        };

        let manifest = dir.join("manifest.json");
        let v = serde_json::json!({
            "kind": self.kind,
            "seed": seed,
            "passed": self.passed(),
            "checks": self.checks,
            "notes": self.notes,
            "summary": self.summary,
            "spec": spec,
            "files": {
                "results": "results.csv",
                "plot": plot.as_ref().map(|_| "plot.csv"),
            },
        });
        std::fs::write(&manifest, serde_json::to_string_pretty(&v)?)?;
        Ok(WrittenFiles {
            results,
            manifest,
            plot,
        })
    }
}
