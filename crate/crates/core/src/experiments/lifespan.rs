use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentKind, SuiteReport};
use crate::evolution::{run, RunOutcome, RunStatus, SimulationConfig};
use crate::fit::{fit_power_law, FitResult};
use crate::graded::{critical_exponent, lifespan_exponent, GradedStructure};
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LifespanSpec {
    /// Run template; its `epsilon` is replaced by each grid entry and its
    /// `t_max` caps every run.
    pub base: SimulationConfig,
    /// Data amplitudes, strictly decreasing.
    pub eps: Vec<f64>,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Rerun every amplitude at `dt / 2` and compare lifespans.
    #[serde(default = "default_true")]
    pub dt_check: bool,
    #[serde(default = "default_dt_tol")]
    pub dt_tolerance: f64,
    /// Required ratio of box length to `T^(w_j / nu)` along each axis.
    #[serde(default = "default_box_factor")]
    pub box_factor: f64,
}

fn default_tol() -> f64 {
    0.25
}
fn default_true() -> bool {
    true
}
fn default_dt_tol() -> f64 {
    0.02
}
fn default_box_factor() -> f64 {
    8.0
}

impl LifespanSpec {
    pub fn new(base: SimulationConfig, eps: Vec<f64>) -> Self {
        Self {
            base,
            eps,
            tolerance: default_tol(),
            dt_check: true,
            dt_tolerance: default_dt_tol(),
            box_factor: default_box_factor(),
        }
    }

    /// `Q = 1`, `nu = 2`, `gamma = 1/4`, `p = 2` on a box of length 4000 with
    /// 16384 points, `dt = 0.2`, and amplitudes `0.04 / 2^k`, `k = 0..4`.
    pub fn reference() -> Self {
        let grid = Grid::new(vec![4000.0], vec![16384]).expect("valid grid");
        let mut base = SimulationConfig::new(GradedStructure::isotropic(1, 1), grid, 2.0, 0.04, 0.25, 0.2, 1e6);
        base.sample_stride = 50;
        Self::new(base, vec![0.04, 0.02, 0.01, 0.005, 0.0025])
    }

    fn q(&self) -> f64 {
        self.base.structure.homogeneous_dim() as f64
    }

    /// Predicted exponent `kappa` of `T ~ eps^-kappa`.
    pub fn kappa_theory(&self) -> Result<f64, ExperimentError> {
        lifespan_exponent(self.q(), self.base.gamma, self.base.nu(), self.base.p).ok_or_else(|| {
            ExperimentError::Spec(format!("lifespan: no finite exponent for p = {}", self.base.p))
        })
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        self.base.validate()?;
        if self.eps.len() < 2 {
            return bad("lifespan: need at least two amplitudes".into());
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) {
            return bad("lifespan: amplitudes must be positive".into());
        }
        if self.eps.windows(2).any(|w| !(w[1] < w[0])) {
            return bad("lifespan: amplitudes must be strictly decreasing".into());
        }
        let span = self.eps[0] / self.eps[self.eps.len() - 1];
        if span < 10.0 {
            return bad(format!("lifespan: amplitudes span a factor {span}, need at least 10"));
        }
        let pc = critical_exponent(self.q(), self.base.gamma, self.base.nu())?;
        if !(self.base.p < pc) {
            return bad(format!("lifespan: p = {} is not below the critical exponent {pc}", self.base.p));
        }
        if !(self.tolerance > 0.0 && self.dt_tolerance > 0.0 && self.box_factor > 0.0) {
            return bad("lifespan: tolerances and box factor must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanPoint {
    pub eps: f64,
    pub lifespan: f64,
    pub secondary_lifespan: Option<f64>,
    pub threshold_sensitive: bool,
    pub lifespan_half_dt: Option<f64>,
    /// `|T(dt/2) - T(dt)| / T(dt/2)`.
    pub dt_rel_change: Option<f64>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifespanSummary {
    pub kappa_theory: f64,
    pub kappa: f64,
    /// `ln T` against `ln eps`; its slope is `-kappa`.
    pub fit: FitResult,
    pub points: Vec<LifespanPoint>,
    pub monotone: bool,
    /// `T(eps/2) / T(eps)` for the first pair next to `2^kappa_theory`.
    pub halving_ratio: f64,
    pub halving_theory: f64,
    pub box_adequate: bool,
}

fn diagnose(outcomes: &[(f64, &RunOutcome)]) -> String {
    outcomes
        .iter()
        .map(|(eps, o)| {
            let m = o.series.last().map_or(f64::NAN, |s| s.max_abs);
            format!("  eps = {eps}: {} at t = {} (max |u| = {m:.3e})", o.status, o.t_end)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_all(base: &SimulationConfig, eps: &[f64], dt: f64) -> Result<Vec<RunOutcome>, ExperimentError> {
    eps.par_iter()
        .map(|&e| {
            let mut c = base.clone();
            c.epsilon = e;
            c.dt = dt;
            Ok(run(c)?)
        })
        .collect()
}

fn require_blowup(eps: &[f64], outs: &[RunOutcome], label: &str) -> Result<(), ExperimentError> {
    if outs.iter().all(|o| o.status == RunStatus::BlewUp) {
        return Ok(());
    }
    let pairs: Vec<(f64, &RunOutcome)> = eps.iter().copied().zip(outs).collect();
    Err(ExperimentError::Aborted {
        reason: format!("lifespan fit aborted: not every {label} run blew up; enlarge t_max or revise box/threshold"),
        diagnostics: diagnose(&pairs),
    })
}

pub fn lifespan_suite(spec: &LifespanSpec) -> Result<(LifespanSummary, SuiteReport), ExperimentError> {
    spec.validate()?;
    let kappa_theory = spec.kappa_theory()?;
    let base = &spec.base;
    let coarse = run_all(base, &spec.eps, base.dt)?;
    require_blowup(&spec.eps, &coarse, "dt")?;
    let fine = if spec.dt_check {
        let f = run_all(base, &spec.eps, 0.5 * base.dt)?;
        require_blowup(&spec.eps, &f, "dt/2")?;
        Some(f)
    } else {
        None
    };

    let points: Vec<LifespanPoint> = spec
        .eps
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let o = &coarse[i];
            let t = o.lifespan.expect("blown-up run has a lifespan");
            let half = fine.as_ref().map(|f| f[i].lifespan.expect("blown-up run has a lifespan"));
            LifespanPoint {
                eps,
                lifespan: t,
                secondary_lifespan: o.secondary_lifespan,
                threshold_sensitive: o.threshold_sensitive,
                lifespan_half_dt: half,
                dt_rel_change: half.map(|h| (h - t).abs() / h),
                steps: o.steps,
            }
        })
        .collect();

    let ts: Vec<f64> = points.iter().map(|p| p.lifespan).collect();
    let fit = fit_power_law(&spec.eps, &ts)?.with_theory(-kappa_theory);
    let kappa = -fit.slope;
    let monotone = ts.windows(2).all(|w| w[1] > w[0]);
    let halving_ratio = if (spec.eps[0] / spec.eps[1] - 2.0).abs() < 1e-9 { ts[1] / ts[0] } else { f64::NAN };
    let halving_theory = 2f64.powf(kappa_theory);
    let t_top = ts.iter().copied().fold(0.0, f64::max);
    let nu = base.nu();
    let box_adequate = base
        .grid
        .box_len()
        .iter()
        .zip(base.structure.weights())
        .all(|(&l, &w)| l >= spec.box_factor * t_top.powf(w as f64 / nu));

    let mut report = SuiteReport::new(
        ExperimentKind::Lifespan,
        &["eps", "lifespan", "secondary_lifespan", "threshold_sensitive", "lifespan_half_dt", "dt_rel_change", "steps"],
    );
    let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
    for p in &points {
        report.row(&[
            &p.eps,
            &p.lifespan,
            &opt(p.secondary_lifespan),
            &p.threshold_sensitive,
            &opt(p.lifespan_half_dt),
            &opt(p.dt_rel_change),
            &p.steps,
        ]);
        report.point("lifespan", p.eps, p.lifespan);
        if let Some(h) = p.lifespan_half_dt {
            report.point("lifespan_half_dt", p.eps, h);
        }
    }
    report.check(
        "lifespan exponent",
        fit.passes_rel(spec.tolerance),
        format!(
            "kappa {kappa:.4} vs theory {kappa_theory:.4}, rel gap {:.3} (tol {})",
            fit.rel_gap.unwrap_or(f64::NAN),
            spec.tolerance
        ),
    );
    if spec.dt_check {
        let worst = points.iter().filter_map(|p| p.dt_rel_change).fold(0.0, f64::max);
        report.check(
            "lifespan dt-halving stability",
            worst <= spec.dt_tolerance,
            format!("largest relative change {worst:.4} (tol {})", spec.dt_tolerance),
        );
    }
    report.check(
        "lifespan monotone in eps",
        monotone,
        format!("lifespans {ts:?}"),
    );
    report.check(
        "box covers the diffusive excursion",
        box_adequate,
        format!("need L_j >= {} T^(w_j/nu) with T = {t_top}", spec.box_factor),
    );
    if points.iter().any(|p| p.threshold_sensitive) {
        report.notes.push("some lifespans move by more than 3% between the two blow-up thresholds".into());
    }
    let summary = LifespanSummary {
        kappa_theory,
        kappa,
        fit,
        points,
        monotone,
        halving_ratio,
        halving_theory,
        box_adequate,
    };
    report.summary = serde_json::to_value(&summary)?;
    Ok((summary, report))
}
