//! Plain-text run configuration: TOML with `[structure]`, `[grid]`, `[data]`,
//! `[stepper]` and `[experiment]` tables. Every key is optional; whatever is
//! missing comes from the reference setup of the command being run.

use std::path::Path;

use gradwave::evolution::DataProfile;
use gradwave::experiments::{
    BumpKind, DecayCase, DecaySpec, DichotomySpec, GnCase, GnProbeSpec, KernelBoundsSpec,
    LifespanSpec, TestfnSpec,
};
use gradwave::{DataSlot, GradedStructure, Grid, SimulationConfig, StepOrder};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<DataSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepper: Option<StepperSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<u32>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu0: Option<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_len: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<DataProfile>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepperSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order: Option<StepOrder>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dealias: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blowup_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinear: Option<bool>,
}

/// Suite parameters; which keys apply depends on the command.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    // scan, lifespan
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_check: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_factor: Option<f64>,
    // decay
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_lo: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_hi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot: Option<DataSlot>,
    // testfn
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<BumpKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump_tolerance: Option<f64>,
    // testfn, gn-probe
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    // gn-probe
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub box_len: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<usize>,
    // verify-kernels
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_n: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<bool>,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Parse a config file; syntax and type errors carry line and column.
pub fn load(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse(text: &str) -> Result<FileConfig, toml::de::Error> {
    toml::from_str(text)
}

/// Apply `section.key=value` overrides. Values parse as TOML and fall back to
/// bare strings, so `stepper.order=etd2` works without quotes.
pub fn apply_overrides(cfg: FileConfig, overrides: &[String]) -> Result<FileConfig, CliError> {
    if overrides.is_empty() {
        return Ok(cfg);
    }
    let mut table = toml::Table::try_from(&cfg).map_err(config_err)?;
    for item in overrides {
        let (key, raw) = item
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{item}` is not of the form section.key=value")))?;
        let (section, field) = key
            .trim()
            .split_once('.')
            .ok_or_else(|| CliError::Config(format!("override key `{key}` must be section.key")))?;
        let value = match format!("v = {}", raw.trim()).parse::<toml::Table>() {
            Ok(mut t) => t.remove("v").expect("parsed key"),
            Err(_) => toml::Value::String(raw.trim().to_string()),
        };
        let entry = table
            .entry(section.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(field.to_string(), value);
            }
            _ => return Err(CliError::Config(format!("override section `{section}` is not a table"))),
        }
    }
    FileConfig::deserialize(toml::Value::Table(table)).map_err(|e| CliError::Config(format!("override: {e}")))
}

/// Keys that are set, as `section.key`.
fn set_keys(cfg: &FileConfig) -> Vec<String> {
    let v = serde_json::to_value(cfg).expect("config serialises");
    let mut out = Vec::new();
    if let Some(obj) = v.as_object() {
        for (section, inner) in obj {
            if let Some(fields) = inner.as_object() {
                out.extend(fields.keys().map(|k| format!("{section}.{k}")));
            }
        }
    }
    out
}

/// Reject keys the command does not read. Entries are `section.key` or `section.*`.
fn only_keys(cfg: &FileConfig, command: &str, allowed: &[&str]) -> Result<(), CliError> {
    for key in set_keys(cfg) {
        let section = key.split('.').next().unwrap_or_default();
        let ok = allowed
            .iter()
            .any(|a| *a == key || a.strip_suffix(".*").is_some_and(|s| s == section));
        if !ok {
            return Err(CliError::Config(format!("key `{key}` does not apply to `{command}`")));
        }
    }
    Ok(())
}

const SIM_KEYS: [&str; 4] = ["structure.*", "grid.*", "data.*", "stepper.*"];

fn structure(sec: &StructureSection, base: &GradedStructure) -> Result<GradedStructure, CliError> {
    let weights = sec.weights.clone().unwrap_or_else(|| base.weights().to_vec());
    let coeffs = match (&sec.coeffs, &sec.weights) {
        (Some(c), _) => c.clone(),
        (None, Some(w)) => vec![1.0; w.len()],
        (None, None) => base.coeffs().to_vec(),
    };
    let nu0 = match (sec.nu0, &sec.weights) {
        (Some(n), _) => n,
        (None, Some(w)) => w.iter().fold(1u32, |acc, &x| lcm(acc, x.max(1))),
        (None, None) => base.nu0(),
    };
    GradedStructure::new(weights, coeffs, nu0).map_err(|e| CliError::Config(format!("[structure] {e}")))
}

fn lcm(a: u32, b: u32) -> u32 {
    fn gcd(a: u32, b: u32) -> u32 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Overlay the simulation sections on `base`.
pub fn simulation(cfg: &FileConfig, base: &SimulationConfig) -> Result<SimulationConfig, CliError> {
    let mut c = base.clone();
    if let Some(s) = &cfg.structure {
        c.structure = structure(s, &base.structure)?;
    }
    if let Some(g) = &cfg.grid {
        let box_len = g.box_len.clone().unwrap_or_else(|| base.grid.box_len().to_vec());
        let points = g.points.clone().unwrap_or_else(|| base.grid.points().to_vec());
        c.grid = Grid::new(box_len, points).map_err(|e| CliError::Config(format!("[grid] {e}")))?;
    }
    if c.grid.dim() != c.structure.dim() {
        return Err(CliError::Config(format!(
            "[grid] has {} axes but [structure] has {} weights",
            c.grid.dim(),
            c.structure.dim()
        )));
    }
    if let Some(d) = &cfg.data {
        c.p = d.p.unwrap_or(c.p);
        c.epsilon = d.epsilon.unwrap_or(c.epsilon);
        c.gamma = d.gamma.unwrap_or(c.gamma);
        c.s = d.s.unwrap_or(c.s);
        c.c1 = d.c1.unwrap_or(c.c1);
        c.profile = d.profile.unwrap_or(c.profile);
    }
    if let Some(s) = &cfg.stepper {
        c.dt = s.dt.unwrap_or(c.dt);
        c.t_max = s.t_max.unwrap_or(c.t_max);
        c.order = s.order.unwrap_or(c.order);
        c.dealias = s.dealias.unwrap_or(c.dealias);
        c.blowup_threshold = s.blowup_threshold.unwrap_or(c.blowup_threshold);
        c.secondary_threshold = s.secondary_threshold.unwrap_or(c.secondary_threshold);
        c.sample_stride = s.sample_stride.unwrap_or(c.sample_stride);
        c.max_steps = s.max_steps.or(c.max_steps);
        c.nonlinear = s.nonlinear.unwrap_or(c.nonlinear);
    }
    c.validate().map_err(config_err)?;
    Ok(c)
}

/// Fully spelled-out simulation sections for `c`.
pub fn echo_simulation(c: &SimulationConfig) -> FileConfig {
    FileConfig {
        structure: Some(StructureSection {
            weights: Some(c.structure.weights().to_vec()),
            coeffs: Some(c.structure.coeffs().to_vec()),
            nu0: Some(c.structure.nu0()),
        }),
        grid: Some(GridSection {
            box_len: Some(c.grid.box_len().to_vec()),
            points: Some(c.grid.points().to_vec()),
        }),
        data: Some(DataSection {
            p: Some(c.p),
            epsilon: Some(c.epsilon),
            gamma: Some(c.gamma),
            s: Some(c.s),
            c1: Some(c.c1),
            profile: Some(c.profile),
        }),
        stepper: Some(StepperSection {
            dt: Some(c.dt),
            t_max: Some(c.t_max),
            order: Some(c.order),
            dealias: Some(c.dealias),
            blowup_threshold: Some(c.blowup_threshold),
            secondary_threshold: Some(c.secondary_threshold),
            sample_stride: Some(c.sample_stride),
            max_steps: c.max_steps,
            nonlinear: Some(c.nonlinear),
        }),
        experiment: None,
    }
}

fn exp(cfg: &FileConfig) -> ExperimentSection {
    cfg.experiment.clone().unwrap_or_default()
}

/// A resolved command: the suites to run and the configuration that
/// reproduces them when parsed again.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved<T> {
    pub value: T,
    pub echo: FileConfig,
}

pub fn resolve_simulate(cfg: &FileConfig) -> Result<Resolved<SimulationConfig>, CliError> {
    only_keys(cfg, "simulate", &SIM_KEYS)?;
    let c = simulation(cfg, &DichotomySpec::reference().base)?;
    let echo = echo_simulation(&c);
    Ok(Resolved { value: c, echo })
}

pub fn resolve_scan(cfg: &FileConfig) -> Result<Resolved<DichotomySpec>, CliError> {
    let mut allowed = SIM_KEYS.to_vec();
    allowed.extend(["experiment.p", "experiment.eps", "experiment.window", "experiment.margin"]);
    only_keys(cfg, "scan", &allowed)?;
    let mut spec = DichotomySpec::reference();
    spec.base = simulation(cfg, &spec.base)?;
    let e = exp(cfg);
    spec.p = e.p.unwrap_or(spec.p);
    spec.eps = e.eps.unwrap_or(spec.eps);
    spec.window = e.window.unwrap_or(spec.window);
    spec.margin = e.margin.unwrap_or(spec.margin);
    spec.validate().map_err(config_err)?;
    let mut echo = echo_simulation(&spec.base);
    echo.experiment = Some(ExperimentSection {
        p: Some(spec.p.clone()),
        eps: Some(spec.eps.clone()),
        window: Some(spec.window),
        margin: Some(spec.margin),
        ..Default::default()
    });
    Ok(Resolved { value: spec, echo })
}

pub fn resolve_lifespan(cfg: &FileConfig) -> Result<Resolved<LifespanSpec>, CliError> {
    let mut allowed = SIM_KEYS.to_vec();
    allowed.extend([
        "experiment.eps",
        "experiment.tolerance",
        "experiment.dt_check",
        "experiment.dt_tolerance",
        "experiment.box_factor",
    ]);
    only_keys(cfg, "lifespan", &allowed)?;
    let mut spec = LifespanSpec::reference();
    spec.base = simulation(cfg, &spec.base)?;
    let e = exp(cfg);
    spec.eps = e.eps.unwrap_or(spec.eps);
    spec.tolerance = e.tolerance.unwrap_or(spec.tolerance);
    spec.dt_check = e.dt_check.unwrap_or(spec.dt_check);
    spec.dt_tolerance = e.dt_tolerance.unwrap_or(spec.dt_tolerance);
    spec.box_factor = e.box_factor.unwrap_or(spec.box_factor);
    spec.validate().map_err(config_err)?;
    let mut echo = echo_simulation(&spec.base);
    echo.experiment = Some(ExperimentSection {
        eps: Some(spec.eps.clone()),
        tolerance: Some(spec.tolerance),
        dt_check: Some(spec.dt_check),
        dt_tolerance: Some(spec.dt_tolerance),
        box_factor: Some(spec.box_factor),
        ..Default::default()
    });
    Ok(Resolved { value: spec, echo })
}

/// `[structure]` with `data.s` and `data.gamma` define a single case; without
/// them the three reference cases run.
pub fn resolve_decay(cfg: &FileConfig) -> Result<Resolved<DecaySpec>, CliError> {
    only_keys(
        cfg,
        "decay",
        &[
            "structure.*",
            "data.s",
            "data.gamma",
            "experiment.t_lo",
            "experiment.t_hi",
            "experiment.samples",
            "experiment.tolerance",
            "experiment.slot",
        ],
    )?;
    let mut spec = DecaySpec::reference();
    let e = exp(cfg);
    let data = cfg.data.clone().unwrap_or_default();
    let single = cfg.structure.is_some() || data.s.is_some() || data.gamma.is_some() || e.slot.is_some();
    if single {
        let base = GradedStructure::isotropic(2, 1);
        let gs = structure(&cfg.structure.clone().unwrap_or_default(), &base)?;
        let mut case = DecayCase::new(gs, data.s.unwrap_or(1.0), data.gamma.unwrap_or(0.5));
        case.slot = e.slot.unwrap_or(case.slot);
        spec.cases = vec![case];
    }
    spec.t_lo = e.t_lo.unwrap_or(spec.t_lo);
    spec.t_hi = e.t_hi.unwrap_or(spec.t_hi);
    spec.samples = e.samples.unwrap_or(spec.samples);
    spec.tolerance = e.tolerance.unwrap_or(spec.tolerance);
    spec.validate().map_err(config_err)?;
    let mut echo = FileConfig::default();
    if let [case] = spec.cases.as_slice() {
        echo.structure = echo_simulation_structure(&case.structure);
        echo.data = Some(DataSection {
            s: Some(case.s),
            gamma: Some(case.gamma),
            ..Default::default()
        });
    }
    echo.experiment = Some(ExperimentSection {
        t_lo: Some(spec.t_lo),
        t_hi: Some(spec.t_hi),
        samples: Some(spec.samples),
        tolerance: Some(spec.tolerance),
        slot: single.then(|| spec.cases[0].slot),
        ..Default::default()
    });
    Ok(Resolved { value: spec, echo })
}

fn echo_simulation_structure(gs: &GradedStructure) -> Option<StructureSection> {
    Some(StructureSection {
        weights: Some(gs.weights().to_vec()),
        coeffs: Some(gs.coeffs().to_vec()),
        nu0: Some(gs.nu0()),
    })
}

/// `[structure]` or `data.p` select a single configuration; otherwise both
/// reference configurations run.
pub fn resolve_testfn(cfg: &FileConfig) -> Result<Resolved<Vec<TestfnSpec>>, CliError> {
    only_keys(
        cfg,
        "testfn",
        &[
            "structure.*",
            "data.p",
            "experiment.r",
            "experiment.bump",
            "experiment.points",
            "experiment.tolerance",
            "experiment.bump_tolerance",
        ],
    )?;
    let e = exp(cfg);
    let p = cfg.data.as_ref().and_then(|d| d.p);
    let single = cfg.structure.is_some() || p.is_some();
    let mut specs = if single {
        let base = GradedStructure::isotropic(1, 1);
        let gs = structure(&cfg.structure.clone().unwrap_or_default(), &base)?;
        let points = if gs.dim() == 1 { 2048 } else { 512 };
        vec![TestfnSpec::new(gs, p.unwrap_or(2.0), points)]
    } else {
        TestfnSpec::reference()
    };
    for s in &mut specs {
        s.r = e.r.clone().unwrap_or(s.r.clone());
        s.bump = e.bump.unwrap_or(s.bump);
        s.points = e.points.unwrap_or(s.points);
        s.tolerance = e.tolerance.unwrap_or(s.tolerance);
        if let Some(bt) = e.bump_tolerance {
            // a negative tolerance switches the bump comparison off
            s.bump_tolerance = (bt >= 0.0).then_some(bt);
        }
        s.validate().map_err(config_err)?;
    }
    let mut echo = FileConfig::default();
    if let [s] = specs.as_slice() {
        echo.structure = echo_simulation_structure(&s.structure);
        echo.data = Some(DataSection {
            p: Some(s.p),
            ..Default::default()
        });
        echo.experiment = Some(ExperimentSection {
            points: Some(s.points),
            ..Default::default()
        });
    }
    let first = &specs[0];
    let ex = echo.experiment.get_or_insert_with(Default::default);
    ex.r = Some(first.r.clone());
    ex.bump = Some(first.bump);
    ex.tolerance = Some(first.tolerance);
    ex.bump_tolerance = Some(first.bump_tolerance.unwrap_or(-1.0));
    if specs.len() > 1 && e.points.is_some() {
        ex.points = e.points;
    }
    Ok(Resolved { value: specs, echo })
}

/// `[structure]`, `data.s` and `experiment.q` build one case per `q`.
pub fn resolve_gn(cfg: &FileConfig, seed: u64) -> Result<Resolved<GnProbeSpec>, CliError> {
    only_keys(
        cfg,
        "gn-probe",
        &[
            "structure.*",
            "data.s",
            "experiment.q",
            "experiment.band",
            "experiment.box_len",
            "experiment.points",
            "experiment.fields",
            "experiment.tolerance",
        ],
    )?;
    let e = exp(cfg);
    let mut spec = GnProbeSpec::reference(seed);
    let s = cfg.data.as_ref().and_then(|d| d.s);
    if cfg.structure.is_some() || s.is_some() || e.q.is_some() {
        let base = spec.cases[0].structure.clone();
        let gs = structure(&cfg.structure.clone().unwrap_or_default(), &base)?;
        let s = s.unwrap_or(1.0);
        let qs = e.q.clone().unwrap_or_else(|| spec.cases.iter().map(|c| c.q).collect());
        spec.cases = qs
            .into_iter()
            .map(|q| GnCase {
                structure: gs.clone(),
                q,
                s,
            })
            .collect();
    }
    spec.band = e.band.unwrap_or(spec.band);
    spec.box_len = e.box_len.unwrap_or(spec.box_len);
    spec.points = e.points.unwrap_or(spec.points);
    spec.fields = e.fields.unwrap_or(spec.fields);
    spec.tolerance = e.tolerance.unwrap_or(spec.tolerance);
    spec.validate().map_err(config_err)?;
    let c0 = &spec.cases[0];
    let echo = FileConfig {
        structure: echo_simulation_structure(&c0.structure),
        data: Some(DataSection {
            s: Some(c0.s),
            ..Default::default()
        }),
        experiment: Some(ExperimentSection {
            q: Some(spec.cases.iter().map(|c| c.q).collect()),
            band: Some(spec.band),
            box_len: Some(spec.box_len),
            points: Some(spec.points),
            fields: Some(spec.fields),
            tolerance: Some(spec.tolerance),
            ..Default::default()
        }),
        ..Default::default()
    };
    Ok(Resolved { value: spec, echo })
}

pub fn resolve_kernels(cfg: &FileConfig) -> Result<Resolved<KernelBoundsSpec>, CliError> {
    only_keys(
        cfg,
        "verify-kernels",
        &[
            "experiment.delta",
            "experiment.big_n",
            "experiment.c",
            "experiment.big_c",
            "experiment.t_max",
            "experiment.beta_max",
            "experiment.t_points",
            "experiment.beta_points",
            "experiment.uniform",
        ],
    )?;
    let e = exp(cfg);
    let mut spec = KernelBoundsSpec::default();
    spec.cutoffs.delta = e.delta.unwrap_or(spec.cutoffs.delta);
    spec.cutoffs.big_n = e.big_n.unwrap_or(spec.cutoffs.big_n);
    spec.cutoffs.c = e.c.unwrap_or(spec.cutoffs.c);
    spec.cutoffs.big_c = e.big_c.or(spec.cutoffs.big_c);
    spec.t_max = e.t_max.unwrap_or(spec.t_max);
    spec.beta_max = e.beta_max.unwrap_or(spec.beta_max);
    spec.t_points = e.t_points.unwrap_or(spec.t_points);
    spec.beta_points = e.beta_points.unwrap_or(spec.beta_points);
    if e.uniform == Some(false) {
        spec.uniform = None;
    }
    spec.validate().map_err(config_err)?;
    let echo = FileConfig {
        experiment: Some(ExperimentSection {
            delta: Some(spec.cutoffs.delta),
            big_n: Some(spec.cutoffs.big_n),
            c: Some(spec.cutoffs.c),
            big_c: spec.cutoffs.big_c,
            t_max: Some(spec.t_max),
            beta_max: Some(spec.beta_max),
            t_points: Some(spec.t_points),
            beta_points: Some(spec.beta_points),
            uniform: Some(spec.uniform.is_some()),
            ..Default::default()
        }),
        ..Default::default()
    };
    Ok(Resolved { value: spec, echo })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_resolves_to_reference() {
        let r = resolve_simulate(&FileConfig::default()).unwrap();
        assert_eq!(r.value, DichotomySpec::reference().base);
        let again = resolve_simulate(&r.echo).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn parse_error_has_line_number() {
        let e = parse("[stepper]\ndt = 0.1\nt_max = \n").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
        let e = parse("[stepper]\ndt = 0.1\n\n[data]\nbogus = 1\n").unwrap_err().to_string();
        assert!(e.contains("line 5") && e.contains("bogus"), "{e}");
    }

    #[test]
    fn override_supersedes_file() {
        let cfg = parse("[stepper]\ndt = 0.25\n").unwrap();
        let cfg = apply_overrides(cfg, &["stepper.dt=0.01".into(), "stepper.order=etd2".into()]).unwrap();
        let r = resolve_simulate(&cfg).unwrap();
        assert_eq!(r.value.dt, 0.01);
        assert_eq!(r.value.order, StepOrder::Etd2);
        assert!(apply_overrides(FileConfig::default(), &["stepper.dtt=1".into()]).is_err());
        assert!(apply_overrides(FileConfig::default(), &["dt=1".into()]).is_err());
        assert!(apply_overrides(FileConfig::default(), &["stepper.dt".into()]).is_err());
    }

    #[test]
    fn mismatched_structure_names_both_lengths() {
        let cfg = parse("[structure]\nweights = [1, 2]\ncoeffs = [1.0, 1.0, 1.0]\nnu0 = 2\n").unwrap();
        let CliError::Config(m) = resolve_simulate(&cfg).unwrap_err() else {
            panic!("expected config error")
        };
        assert!(m.contains('2') && m.contains('3'), "{m}");
    }

    #[test]
    fn weights_alone_fill_coeffs_and_nu0() {
        let cfg = parse("[structure]\nweights = [1, 2]\n[grid]\nbox_len = [20.0, 20.0]\npoints = [16, 16]\n[data]\ngamma = 0.5\n").unwrap();
        let r = resolve_simulate(&cfg).unwrap();
        assert_eq!(r.value.structure.nu0(), 2);
        assert_eq!(r.value.structure.homogeneous_dim(), 3);
        assert_eq!(resolve_simulate(&r.echo).unwrap(), r);
    }

    #[test]
    fn keys_outside_the_command_are_rejected() {
        let cfg = parse("[experiment]\nwindow = 0.1\n").unwrap();
        assert!(resolve_lifespan(&cfg).is_err());
        assert!(resolve_scan(&cfg).is_ok());
        let cfg = parse("[stepper]\ndt = 0.1\n").unwrap();
        assert!(resolve_decay(&cfg).is_err());
    }

    #[test]
    fn annotated_example_is_the_scan_reference() {
        let cfg = parse(include_str!("../../../configs/example.toml")).unwrap();
        let r = resolve_scan(&cfg).unwrap();
        assert_eq!(r.value, DichotomySpec::reference());
        let mut sim = cfg.clone();
        sim.experiment = None;
        assert_eq!(resolve_simulate(&sim).unwrap().value, DichotomySpec::reference().base);
    }

    #[test]
    fn every_echo_round_trips() {
        let empty = FileConfig::default();
        let through_text = |c: &FileConfig| parse(&toml::to_string(c).unwrap()).unwrap();
        let r = resolve_scan(&empty).unwrap();
        assert_eq!(resolve_scan(&through_text(&r.echo)).unwrap(), r);
        let r = resolve_lifespan(&empty).unwrap();
        assert_eq!(resolve_lifespan(&through_text(&r.echo)).unwrap(), r);
        let r = resolve_decay(&empty).unwrap();
        assert_eq!(resolve_decay(&through_text(&r.echo)).unwrap(), r);
        let one = parse("[data]\ngamma = 0.25\ns = 0.0\n").unwrap();
        let r = resolve_decay(&one).unwrap();
        assert_eq!(r.value.cases.len(), 1);
        assert_eq!(resolve_decay(&through_text(&r.echo)).unwrap(), r);
        let r = resolve_testfn(&empty).unwrap();
        assert_eq!(r.value.len(), 2);
        assert_eq!(resolve_testfn(&through_text(&r.echo)).unwrap(), r);
        let r = resolve_testfn(&parse("[data]\np = 3.0\n").unwrap()).unwrap();
        assert_eq!(resolve_testfn(&through_text(&r.echo)).unwrap(), r);
        let r = resolve_gn(&empty, 9).unwrap();
        assert_eq!(resolve_gn(&through_text(&r.echo), 9).unwrap(), r);
        let r = resolve_kernels(&empty).unwrap();
        assert_eq!(resolve_kernels(&through_text(&r.echo)).unwrap(), r);
    }
}
