use serde::{Deserialize, Serialize};

use super::ExperimentError;
use crate::evolution::{RunOutcome, RunStatus};

/// Supremum of `(1+t)^(gamma/nu) ||u||_2 + (1+t)^((s+gamma)/nu) ||u||_{H^s hom}`
/// over the recorded samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XsNorm {
    pub value: f64,
    /// Time of the last sample included.
    pub up_to: f64,
    /// Set when the run did not complete, so the supremum only covers `[0, up_to]`.
    pub partial: bool,
}

pub fn xs_norm(outcome: &RunOutcome, s: f64, gamma: f64, nu: f64) -> Result<XsNorm, ExperimentError> {
    if (s - outcome.config.s).abs() > 0.0 {
        return Err(ExperimentError::Spec(format!(
            "xs_norm: run recorded H^s with s = {}, asked for s = {s}",
            outcome.config.s
        )));
    }
    if !(nu > 0.0) {
        return Err(ExperimentError::Spec(format!("xs_norm: nu = {nu} must be positive")));
    }
    let blew = outcome.status == RunStatus::BlewUp;
    // the final sample of a blown-up run holds the state past the threshold
    let n = outcome.series.len() - usize::from(blew && outcome.series.len() > 1);
    let mut value = 0.0f64;
    let mut up_to = 0.0;
    for smp in &outcome.series[..n] {
        let w = (1.0 + smp.t).powf(gamma / nu) * smp.l2 + (1.0 + smp.t).powf((s + gamma) / nu) * smp.hs;
        value = value.max(w);
        up_to = smp.t;
    }
    Ok(XsNorm {
        value,
        up_to,
        partial: outcome.status != RunStatus::Completed,
    })
}
