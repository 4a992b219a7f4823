use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentKind, SuiteReport};
use crate::oscillator::{
    linspace, verify_pointwise_bounds, verify_uniform_decay, BoundsReport, RegimeCutoffs, UniformDecayReport,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelBoundsSpec {
    #[serde(default)]
    pub cutoffs: RegimeCutoffs,
    #[serde(default = "default_span")]
    pub t_max: f64,
    #[serde(default = "default_span")]
    pub beta_max: f64,
    #[serde(default = "default_points")]
    pub t_points: usize,
    #[serde(default = "default_points")]
    pub beta_points: usize,
    /// Uniform-decay probe; skipped when absent.
    #[serde(default = "default_uniform")]
    pub uniform: Option<UniformDecaySpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformDecaySpec {
    pub s: f64,
    pub gamma: f64,
    pub nu: f64,
    pub c: f64,
    pub t_max: Vec<f64>,
    /// Exponent perturbation that must make the supremum grow.
    pub shift: f64,
}

fn default_span() -> f64 {
    100.0
}
fn default_points() -> usize {
    500
}
fn default_uniform() -> Option<UniformDecaySpec> {
    Some(UniformDecaySpec {
        s: 1.0,
        gamma: 0.5,
        nu: 2.0,
        c: 1.0,
        t_max: vec![1e3, 1e4, 1e5],
        shift: -0.2,
    })
}

impl Default for KernelBoundsSpec {
    fn default() -> Self {
        Self {
            cutoffs: RegimeCutoffs::default(),
            t_max: default_span(),
            beta_max: default_span(),
            t_points: default_points(),
            beta_points: default_points(),
            uniform: default_uniform(),
        }
    }
}

impl KernelBoundsSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.cutoffs.validate()?;
        if !(self.t_max > 0.0 && self.beta_max > 0.0) || self.t_points < 2 || self.beta_points < 2 {
            return Err(ExperimentError::Spec(
                "kernel_bounds: need positive spans and at least two points per axis".into(),
            ));
        }
        Ok(())
    }
}

pub fn kernel_bounds_suite(
    spec: &KernelBoundsSpec,
) -> Result<((BoundsReport, Option<[UniformDecayReport; 2]>), SuiteReport), ExperimentError> {
    spec.validate()?;
    let t = linspace(0.0, spec.t_max, spec.t_points);
    let b = linspace(0.0, spec.beta_max, spec.beta_points);
    let bounds = verify_pointwise_bounds(&spec.cutoffs, &t, &b)?;
    let mut report = SuiteReport::new(
        ExperimentKind::KernelBounds,
        &["regime", "points", "min_c", "worst_t", "worst_beta", "worst_kernel", "c_cap", "asymptotic_gap", "holds_for_all_time"],
    );
    for r in &bounds.regimes {
        report.row(&[
            &r.regime,
            &r.points,
            &r.min_c,
            &r.worst_t,
            &r.worst_beta,
            &r.worst_kernel,
            &r.c_cap,
            &r.asymptotic_gap,
            &r.holds_for_all_time,
        ]);
        report.point("min_c", r.worst_beta, r.min_c);
    }
    report.check(
        "kernel bounds certified in all three regimes",
        bounds.regimes.len() == 3 && bounds.all_finite(),
        format!("certificate C = {:.6} over {} regimes", bounds.certificate(), bounds.regimes.len()),
    );
    let uniform = match &spec.uniform {
        Some(u) => {
            let d = spec.cutoffs.delta;
            let base = verify_uniform_decay(u.s, u.gamma, u.nu, d, u.c, 0.0, &u.t_max)?;
            let pert = verify_uniform_decay(u.s, u.gamma, u.nu, d, u.c, u.shift, &u.t_max)?;
            report.check(
                "uniform bound stable at the claimed exponent",
                base.stable,
                format!("suprema {:?}", base.suprema),
            );
            report.check(
                "uniform bound grows under the perturbed exponent",
                pert.growing,
                format!("shift {}: suprema {:?}", u.shift, pert.suprema),
            );
            for (tm, s) in base.t_max.iter().zip(&base.suprema) {
                report.point("sup_claimed", *tm, *s);
            }
            for (tm, s) in pert.t_max.iter().zip(&pert.suprema) {
                report.point("sup_perturbed", *tm, *s);
            }
            Some([base, pert])
        }
        None => None,
    };
    report.summary = serde_json::json!({ "bounds": bounds, "uniform": uniform });
    Ok(((bounds, uniform), report))
}
