use serde::{Deserialize, Serialize};

use super::{
    DecaySpec, DichotomySpec, ExperimentError, GnProbeSpec, KernelBoundsSpec, LifespanSpec, SuiteReport, TestfnSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Decay,
    Dichotomy,
    Lifespan,
    Testfn,
    GnProbe,
    KernelBounds,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ExperimentKind::Decay => "decay",
            ExperimentKind::Dichotomy => "dichotomy",
            ExperimentKind::Lifespan => "lifespan",
            ExperimentKind::Testfn => "testfn",
            ExperimentKind::GnProbe => "gn_probe",
            ExperimentKind::KernelBounds => "kernel_bounds",
        })
    }
}

/// A suite and its parameters, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentSpec {
    Decay(DecaySpec),
    Dichotomy(DichotomySpec),
    Lifespan(LifespanSpec),
    Testfn(TestfnSpec),
    GnProbe(GnProbeSpec),
    KernelBounds(KernelBoundsSpec),
}

impl ExperimentSpec {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentSpec::Decay(_) => ExperimentKind::Decay,
            ExperimentSpec::Dichotomy(_) => ExperimentKind::Dichotomy,
            ExperimentSpec::Lifespan(_) => ExperimentKind::Lifespan,
            ExperimentSpec::Testfn(_) => ExperimentKind::Testfn,
            ExperimentSpec::GnProbe(_) => ExperimentKind::GnProbe,
            ExperimentSpec::KernelBounds(_) => ExperimentKind::KernelBounds,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        match self {
            ExperimentSpec::Decay(s) => s.validate(),
            ExperimentSpec::Dichotomy(s) => s.validate(),
            ExperimentSpec::Lifespan(s) => s.validate(),
            ExperimentSpec::Testfn(s) => s.validate(),
            ExperimentSpec::GnProbe(s) => s.validate(),
            ExperimentSpec::KernelBounds(s) => s.validate(),
        }
    }

    /// Run the suite and return its report.
    pub fn execute(&self) -> Result<SuiteReport, ExperimentError> {
        Ok(match self {
            ExperimentSpec::Decay(s) => super::decay_suite(s)?.1,
            ExperimentSpec::Dichotomy(s) => super::dichotomy_scan(s)?.1,
            ExperimentSpec::Lifespan(s) => super::lifespan_suite(s)?.1,
            ExperimentSpec::Testfn(s) => super::testfn_scaling(s)?.1,
            ExperimentSpec::GnProbe(s) => super::gn_probe_suite(s)?.1,
            ExperimentSpec::KernelBounds(s) => super::kernel_bounds_suite(s)?.1,
        })
    }
}
