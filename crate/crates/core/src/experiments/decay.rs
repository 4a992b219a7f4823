use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentKind, SuiteReport};
use crate::fit::{fit_decay, FitResult};
use crate::graded::GradedStructure;
use crate::oracle::{norm_curve, DataSlot, SpectralProfile};
use crate::oscillator::logspace;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayCase {
    pub structure: GradedStructure,
    pub s: f64,
    pub gamma: f64,
    #[serde(default = "default_slot")]
    pub slot: DataSlot,
}

fn default_slot() -> DataSlot {
    DataSlot::Position
}

impl DecayCase {
    pub fn new(structure: GradedStructure, s: f64, gamma: f64) -> Self {
        Self {
            structure,
            s,
            gamma,
            slot: DataSlot::Position,
        }
    }

    /// Predicted slope `-(s + gamma) / nu`.
    pub fn theory(&self) -> f64 {
        -(self.s + self.gamma) / self.structure.degree() as f64
    }

    /// `rho^(gamma - Q/2) e^{-|xi|^2}`: on the edge of the negative-order space,
    /// so its norms decay at exactly the predicted rate.
    pub fn profile(&self) -> SpectralProfile {
        let q = self.structure.homogeneous_dim() as f64;
        SpectralProfile::power_gaussian(self.gamma - q / 2.0, self.slot)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySpec {
    pub cases: Vec<DecayCase>,
    #[serde(default = "default_t_lo")]
    pub t_lo: f64,
    #[serde(default = "default_t_hi")]
    pub t_hi: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_t_lo() -> f64 {
    1e2
}
fn default_t_hi() -> f64 {
    1e4
}
fn default_samples() -> usize {
    30
}
fn default_tol() -> f64 {
    0.05
}

impl DecaySpec {
    pub fn new(cases: Vec<DecayCase>) -> Self {
        Self {
            cases,
            t_lo: default_t_lo(),
            t_hi: default_t_hi(),
            samples: default_samples(),
            tolerance: default_tol(),
        }
    }

    /// The three reference configurations: `(n, nu, s, gamma)` =
    /// `(2, 2, 0, 1/2)`, `(2, 2, 1, 1/2)` and `(1, 4, 0, 1/4)`.
    pub fn reference() -> Self {
        Self::new(vec![
            DecayCase::new(GradedStructure::isotropic(2, 1), 0.0, 0.5),
            DecayCase::new(GradedStructure::isotropic(2, 1), 1.0, 0.5),
            DecayCase::new(GradedStructure::isotropic(1, 2), 0.0, 0.25),
        ])
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        if self.cases.is_empty() {
            return bad("decay: no cases".into());
        }
        if !(self.t_lo > 0.0 && self.t_hi > self.t_lo) {
            return bad(format!("decay: need 0 < t_lo < t_hi (got {}, {})", self.t_lo, self.t_hi));
        }
        if self.samples < crate::fit::MIN_DECAY_SAMPLES {
            return bad(format!("decay: at least {} samples", crate::fit::MIN_DECAY_SAMPLES));
        }
        if !(self.tolerance > 0.0) {
            return bad("decay: tolerance must be positive".into());
        }
        for (i, c) in self.cases.iter().enumerate() {
            let q = c.structure.homogeneous_dim() as f64;
            if !(c.s >= 0.0) {
                return bad(format!("decay case {i}: s = {} must be nonnegative", c.s));
            }
            if !(c.gamma > 0.0 && c.gamma < q / 2.0) {
                return bad(format!("decay case {i}: gamma = {} outside (0, Q/2 = {})", c.gamma, q / 2.0));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub case: DecayCase,
    pub fit: FitResult,
    pub passed: bool,
}

pub fn decay_suite(spec: &DecaySpec) -> Result<(Vec<DecayFit>, SuiteReport), ExperimentError> {
    spec.validate()?;
    let times = logspace(spec.t_lo, spec.t_hi, spec.samples);
    let mut report = SuiteReport::new(
        ExperimentKind::Decay,
        &["case", "n", "weights", "nu", "s", "gamma", "theory", "slope", "rel_gap", "r_squared", "samples", "passed"],
    );
    let mut fits = Vec::with_capacity(spec.cases.len());
    for (i, case) in spec.cases.iter().enumerate() {
        let norms = norm_curve(&case.profile(), &case.structure, case.s, &times)?;
        let fit = fit_decay(&times, &norms)?.with_theory(case.theory());
        let passed = fit.passes_rel(spec.tolerance);
        let gs = &case.structure;
        let weights = format!("{:?}", gs.weights()).replace(", ", ";");
        report.row(&[
            &i,
            &gs.dim(),
            &weights,
            &gs.degree(),
            &case.s,
            &case.gamma,
            &case.theory(),
            &fit.slope,
            &fit.rel_gap.unwrap_or(f64::NAN),
            &fit.r_squared,
            &fit.samples,
            &passed,
        ]);
        for (t, v) in times.iter().zip(&norms) {
            report.point(format!("case{i}"), *t, *v);
        }
        report.check(
            format!("decay case {i} (n={}, nu={}, s={}, gamma={})", gs.dim(), gs.degree(), case.s, case.gamma),
            passed,
            format!(
                "slope {:.5} vs theory {:.5}, rel gap {:.3e} (tol {})",
                fit.slope,
                case.theory(),
                fit.rel_gap.unwrap_or(f64::NAN),
                spec.tolerance
            ),
        );
        fits.push(DecayFit {
            case: case.clone(),
            fit,
            passed,
        });
    }
    report.summary = serde_json::to_value(&fits)?;
    Ok((fits, report))
}
