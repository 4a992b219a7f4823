use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentKind, SuiteReport};
use crate::evolution::{run, DataProfile, RunOutcome, RunStatus, SimulationConfig};
use crate::fit::fit_power_law;
use crate::graded::{critical_exponent, GradedStructure};
use crate::oscillator::logspace;
use crate::spectral::Grid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomySpec {
    /// Run template; `p` and `epsilon` are replaced per cell.
    pub base: SimulationConfig,
    /// Exponents, strictly increasing and straddling the critical exponent.
    pub p: Vec<f64>,
    /// Amplitudes; the first is the reference used to locate the transition.
    pub eps: Vec<f64>,
    /// The growth index is fitted over `[t_max * window, t_max]`.
    #[serde(default = "default_window")]
    pub window: f64,
    /// Growth indices within this distance of `-1` are inconclusive.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_window() -> f64 {
    0.01
}
fn default_margin() -> f64 {
    0.02
}

impl DichotomySpec {
    /// `Q = 1`, `nu = 2`, `gamma = 1/4`, mass-matched power data at amplitude
    /// 0.01 on a box of length 2000 with 8192 points, `dt = 0.5`, horizon `1e4`.
    pub fn reference() -> Self {
        let grid = Grid::new(vec![2000.0], vec![8192]).expect("valid grid");
        let mut base = SimulationConfig::new(GradedStructure::isotropic(1, 1), grid, 2.0, 0.01, 0.25, 0.5, 1e4);
        base.profile = DataProfile::MassMatchedPower;
        base.sample_stride = 1;
        Self {
            base,
            p: vec![2.0, 3.0, 3.5, 3.8, 4.5],
            eps: vec![0.01],
            window: default_window(),
            margin: default_margin(),
        }
    }

    pub fn p_crit(&self) -> Result<f64, ExperimentError> {
        let q = self.base.structure.homogeneous_dim() as f64;
        Ok(critical_exponent(q, self.base.gamma, self.base.nu())?)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        self.base.validate()?;
        if self.p.len() < 2 || self.eps.is_empty() {
            return bad("dichotomy: need at least two exponents and one amplitude".into());
        }
        if self.p.windows(2).any(|w| !(w[1] > w[0])) || self.p[0] <= 1.0 {
            return bad("dichotomy: exponents must be strictly increasing and above 1".into());
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) {
            return bad("dichotomy: amplitudes must be positive".into());
        }
        let pc = self.p_crit()?;
        if !(self.p[0] < pc && *self.p.last().unwrap() > pc) {
            return bad(format!("dichotomy: exponent grid does not straddle p_crit = {pc}"));
        }
        if !(self.window > 0.0 && self.window < 1.0) || !(self.margin >= 0.0) {
            return bad("dichotomy: window must lie in (0, 1) and margin must be nonnegative".into());
        }
        Ok(())
    }
}

/// Outcome class of one `(p, eps)` cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellLabel {
    /// Crossed the blow-up threshold.
    BlowUp,
    /// Survived the horizon but `(p - 1)` times the decay rate of `max |u|` is
    /// above `-1`: the nonlinear forcing is not integrable in time.
    Growing,
    /// Survived with an integrable nonlinear forcing.
    Global,
    Inconclusive,
}

impl CellLabel {
    fn blowup_side(self) -> bool {
        matches!(self, CellLabel::BlowUp | CellLabel::Growing)
    }
}

impl std::fmt::Display for CellLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CellLabel::BlowUp => "blow_up",
            CellLabel::Growing => "growing",
            CellLabel::Global => "global",
            CellLabel::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyRow {
    pub p: f64,
    pub eps: f64,
    pub status: RunStatus,
    /// Lifespan after blow-up, otherwise the final time reached.
    pub time: f64,
    /// `(p - 1)` times the fitted log-log slope of `max |u|`.
    pub growth_index: Option<f64>,
    pub label: CellLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomySummary {
    pub p_crit: f64,
    /// Interpolated exponent where the growth index crosses `-1`.
    pub p_star: Option<f64>,
    /// Half-width of the grid cell that brackets `p_star`.
    pub uncertainty: Option<f64>,
    /// Grid cell that contains `p_crit`.
    pub crit_cell: (f64, f64),
    pub consistent: bool,
    pub rows: Vec<DichotomyRow>,
}

/// `(p - 1)` times the slope of `ln max |u|` against `ln t` over
/// `[t_max * window, t_max]`, sampled at 40 log-spaced times.
pub fn growth_index(outcome: &RunOutcome, p: f64, window: f64) -> Option<f64> {
    if outcome.status != RunStatus::Completed {
        return None;
    }
    let t_end = outcome.t_end;
    let picks = logspace(t_end * window, t_end, 40);
    let series = &outcome.series;
    let mut ts = Vec::with_capacity(picks.len());
    let mut ms = Vec::with_capacity(picks.len());
    let mut j = 0;
    for target in picks {
        while j + 1 < series.len() && (series[j + 1].t - target).abs() <= (series[j].t - target).abs() {
            j += 1;
        }
        let s = &series[j];
        if s.t > 0.0 && ts.last() != Some(&s.t) {
            ts.push(s.t);
            ms.push(s.max_abs);
        }
    }
    fit_power_law(&ts, &ms).ok().map(|f| (p - 1.0) * f.slope)
}

fn label(status: RunStatus, sigma: Option<f64>, margin: f64) -> CellLabel {
    match (status, sigma) {
        (RunStatus::BlewUp, _) => CellLabel::BlowUp,
        (RunStatus::Completed, Some(s)) if s > -1.0 + margin => CellLabel::Growing,
        (RunStatus::Completed, Some(s)) if s < -1.0 - margin => CellLabel::Global,
        _ => CellLabel::Inconclusive,
    }
}

pub fn dichotomy_scan(spec: &DichotomySpec) -> Result<(DichotomySummary, SuiteReport), ExperimentError> {
    spec.validate()?;
    let p_crit = spec.p_crit()?;
    let cells: Vec<(f64, f64)> = spec
        .p
        .iter()
        .flat_map(|&p| spec.eps.iter().map(move |&e| (p, e)))
        .collect();
    let rows: Vec<DichotomyRow> = cells
        .par_iter()
        .map(|&(p, eps)| -> Result<DichotomyRow, ExperimentError> {
            let mut c = spec.base.clone();
            c.p = p;
            c.epsilon = eps;
            let out = run(c)?;
            let sigma = growth_index(&out, p, spec.window);
            Ok(DichotomyRow {
                p,
                eps,
                status: out.status,
                time: out.lifespan.unwrap_or(out.t_end),
                growth_index: sigma,
                label: label(out.status, sigma, spec.margin),
            })
        })
        .collect::<Result<_, _>>()?;

    let reference: Vec<&DichotomyRow> = rows.iter().filter(|r| r.eps == spec.eps[0]).collect();
    let mut p_star = None;
    let mut uncertainty = None;
    for w in reference.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a.label.blowup_side() && b.label == CellLabel::Global {
            let x = match (a.growth_index, b.growth_index) {
                (Some(sa), Some(sb)) if sa != sb => a.p + (-1.0 - sa) * (b.p - a.p) / (sb - sa),
                _ => 0.5 * (a.p + b.p),
            };
            p_star = Some(x);
            uncertainty = Some(0.5 * (b.p - a.p));
            break;
        }
    }
    let crit_idx = spec.p.windows(2).position(|w| w[0] <= p_crit && p_crit <= w[1]).expect("grid straddles p_crit");
    let crit_cell = (spec.p[crit_idx], spec.p[crit_idx + 1]);
    // no exponent above the transition on the blow-up side, none below it global
    let consistent = p_star.is_some_and(|ps| {
        rows.iter().all(|r| {
            !(r.p > ps && r.eps == spec.eps[0] && r.label.blowup_side()) && !(r.p < ps && r.label == CellLabel::Global)
        })
    });

    let mut report = SuiteReport::new(ExperimentKind::Dichotomy, &["p", "eps", "status", "time", "growth_index", "label"]);
    for r in &rows {
        let gi = r.growth_index.map_or_else(String::new, |g| g.to_string());
        report.row(&[&r.p, &r.eps, &r.status, &r.time, &gi, &r.label]);
        if let Some(g) = r.growth_index {
            report.point(format!("growth_index_eps{}", r.eps), r.p, g);
        }
    }
    let in_cell = p_star.is_some_and(|ps| crit_cell.0 <= ps && ps <= crit_cell.1);
    report.check(
        "dichotomy transition",
        in_cell,
        match p_star {
            Some(ps) => format!(
                "p* = {ps:.4} +/- {:.3}; p_crit = {p_crit:.4} lies in cell [{}, {}]",
                uncertainty.unwrap_or(f64::NAN),
                crit_cell.0,
                crit_cell.1
            ),
            None => format!("no transition from blow-up to global along the reference amplitude; p_crit = {p_crit:.4}"),
        },
    );
    report.check("dichotomy frontier monotone", consistent, "no blow-up above p*, no global cell below p*");
    report.notes.push(
        "consistency check only: a finite box cannot establish the continuum critical exponent".into(),
    );
    let summary = DichotomySummary {
        p_crit,
        p_star,
        uncertainty,
        crit_cell,
        consistent,
        rows,
    };
    report.summary = serde_json::to_value(&summary)?;
    Ok((summary, report))
}
