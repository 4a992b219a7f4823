//! Exponential Duhamel integration of `u_tt + R u + u_t = |u|^p` on the torus.
//!
//! The linear part is propagated exactly per mode with the oscillator kernels
//! at `beta = sqrt(a(xi))`; the nonlinearity enters through the Duhamel weights
//! `J1` (first order) plus the linear-in-time correction (second order).

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graded::{GradedError, GradedStructure};
use crate::oscillator::{etd2_weight_with, kernels_unchecked};
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::{
    l2_norm_coeffs, sobolev_norm_with_symbol, Grid, SpectralError, SpectralState, Transform,
};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Graded(#[from] GradedError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum StepOrder {
    #[default]
    Etd1,
    Etd2,
}

/// Shape of the initial data; `u0 = u1 = epsilon * profile`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DataProfile {
    /// `C1 <x>^-(Q/2 + gamma) / log(e + |x|)`.
    #[default]
    LogWeighted,
    /// `C1 <x>^-(Q/2 + gamma)`.
    Power,
    /// `C1 (<x>^-(Q/2 + gamma) + D g(x))` with `g` the unit-mass Gaussian and
    /// `D` the mass `<x>^-b` lacks relative to `|x|^-b`, so the far field
    /// carries the same total mass as the pure power.
    MassMatchedPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    pub structure: GradedStructure,
    pub grid: Grid,
    pub p: f64,
    pub epsilon: f64,
    pub gamma: f64,
    /// Regularity of the `H^s` diagnostics.
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default = "default_c1")]
    pub c1: f64,
    #[serde(default)]
    pub profile: DataProfile,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    /// Lower threshold used only to check sensitivity of the blow-up time.
    #[serde(default = "default_secondary")]
    pub secondary_threshold: f64,
    #[serde(default)]
    pub order: StepOrder,
    #[serde(default)]
    pub dealias: bool,
    /// Steps between recorded samples.
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// Step budget; the run stagnates when it is exhausted before `t_max`.
    #[serde(default)]
    pub max_steps: Option<usize>,
    /// `false` drops the nonlinearity (linear propagation only).
    #[serde(default = "default_true")]
    pub nonlinear: bool,
}

fn default_s() -> f64 {
    1.0
}
fn default_c1() -> f64 {
    1.0
}
fn default_threshold() -> f64 {
    1e8
}
fn default_secondary() -> f64 {
    1e6
}
fn default_stride() -> usize {
    10
}
fn default_true() -> bool {
    true
}

/// Relative gap between the crossing times of the two thresholds above which
/// a blow-up time is flagged as threshold-sensitive.
pub const THRESHOLD_SENSITIVITY: f64 = 0.03;

impl SimulationConfig {
    /// Defaults for everything except the physical parameters.
    pub fn new(
        structure: GradedStructure,
        grid: Grid,
        p: f64,
        epsilon: f64,
        gamma: f64,
        dt: f64,
        t_max: f64,
    ) -> Self {
        Self {
            structure,
            grid,
            p,
            epsilon,
            gamma,
            s: default_s(),
            c1: default_c1(),
            profile: DataProfile::default(),
            dt,
            t_max,
            blowup_threshold: default_threshold(),
            secondary_threshold: default_secondary(),
            order: StepOrder::default(),
            dealias: false,
            sample_stride: default_stride(),
            max_steps: None,
            nonlinear: true,
        }
    }

    pub fn validate(&self) -> Result<(), EvolutionError> {
        let bad = |m: String| Err(EvolutionError::Config(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_max >= self.dt) {
            return bad(format!("t_max = {} must be at least dt = {}", self.t_max, self.dt));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("p = {} must exceed 1", self.p));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon = {} must be nonnegative", self.epsilon));
        }
        let q = self.structure.homogeneous_dim() as f64;
        if !(self.gamma > 0.0 && self.gamma < q / 2.0) {
            return Err(GradedError::GammaOutOfRange {
                gamma: self.gamma,
                half_q: q / 2.0,
            }
            .into());
        }
        if !(self.s >= 0.0) {
            return bad(format!("s = {} must be nonnegative", self.s));
        }
        if !(self.c1 > 0.0) {
            return bad(format!("c1 = {} must be positive", self.c1));
        }
        if !(self.blowup_threshold > 0.0) || !(self.secondary_threshold > 0.0) {
            return bad("thresholds must be positive".into());
        }
        if self.secondary_threshold > self.blowup_threshold {
            return bad(format!(
                "secondary threshold {} exceeds the blow-up threshold {}",
                self.secondary_threshold, self.blowup_threshold
            ));
        }
        if self.sample_stride == 0 {
            return bad("sample_stride must be at least 1".into());
        }
        if self.grid.dim() != self.structure.dim() {
            return Err(SpectralError::DimensionMismatch {
                grid: self.grid.dim(),
                structure: self.structure.dim(),
            }
            .into());
        }
        Ok(())
    }

    pub fn nu(&self) -> f64 {
        self.structure.degree() as f64
    }
}

/// `<x> = (1 + |x|^2)^(1/2)` with the homogeneous quasi-norm.
fn japanese(gs: &GradedStructure, x: &[f64]) -> (f64, f64) {
    let r = gs.quasi_norm(x);
    (r, (1.0 + r * r).sqrt())
}

/// Sample `C1 <x>^-(Q/2+gamma) / log(e + |x|)` on the grid for both data slots.
pub fn build_initial_data(
    grid: &Grid,
    gs: &GradedStructure,
    gamma: f64,
    c1: f64,
) -> Result<(Vec<f64>, Vec<f64>), EvolutionError> {
    let u = build_profile(grid, gs, gamma, c1, DataProfile::LogWeighted)?;
    Ok((u.clone(), u))
}

/// `D = int (|x|^-b - <x>^-b) dx` over `R^n`.
pub fn mass_deficit(gs: &GradedStructure, b: f64) -> Result<f64, EvolutionError> {
    let q = gs.homogeneous_dim() as f64;
    if !(b < q && b + 2.0 > q) {
        return Err(EvolutionError::Config(format!(
            "mass deficit diverges unless Q - 2 < b < Q (Q = {q}, b = {b})"
        )));
    }
    // polar coordinates for the quasi-norm: d|{|x| < r}| = Q |B_1| r^(Q-1) dr
    let f = |y: f64| {
        let r = y.exp();
        let diff = -r.powf(-b) * (-(0.5 * b) * (r.powi(-2)).ln_1p()).exp_m1();
        r.powf(q) * diff
    };
    let lo = -60.0 / (q - b);
    let hi = 60.0 / (b + 2.0 - q);
    let res = integrate(f, lo, hi, QuadOptions::rel(1e-12));
    Ok(q * gs.unit_ball_volume() * res.value)
}

/// Sample one of the data profiles.
pub fn build_profile(
    grid: &Grid,
    gs: &GradedStructure,
    gamma: f64,
    c1: f64,
    profile: DataProfile,
) -> Result<Vec<f64>, EvolutionError> {
    let q = gs.homogeneous_dim() as f64;
    if !(gamma > 0.0 && gamma < q / 2.0) {
        return Err(GradedError::GammaOutOfRange {
            gamma,
            half_q: q / 2.0,
        }
        .into());
    }
    grid.check_structure(gs)?;
    let b = q / 2.0 + gamma;
    let e = std::f64::consts::E;
    Ok(match profile {
        DataProfile::LogWeighted => grid.sample(|x| {
            let (r, jx) = japanese(gs, x);
            c1 * jx.powf(-b) / (e + r).ln()
        }),
        DataProfile::Power => grid.sample(|x| c1 * japanese(gs, x).1.powf(-b)),
        DataProfile::MassMatchedPower => {
            let d = mass_deficit(gs, b)?;
            let n = gs.dim() as i32;
            let norm = (2.0 * std::f64::consts::PI).powf(-0.5 * n as f64);
            grid.sample(|x| {
                let x2: f64 = x.iter().map(|v| v * v).sum();
                c1 * (japanese(gs, x).1.powf(-b) + d * norm * (-0.5 * x2).exp())
            })
        }
    })
}

/// Per-mode propagation coefficients for one step size.
#[derive(Debug, Clone)]
struct StepWeights {
    k0: Vec<f64>,
    k1: Vec<f64>,
    dk0: Vec<f64>,
    dk1: Vec<f64>,
    j1: Vec<f64>,
    m: Vec<f64>,
}

impl StepWeights {
    fn new(symbol: &[f64], dt: f64) -> Self {
        let n = symbol.len();
        let mut w = Self {
            k0: Vec::with_capacity(n),
            k1: Vec::with_capacity(n),
            dk0: Vec::with_capacity(n),
            dk1: Vec::with_capacity(n),
            j1: Vec::with_capacity(n),
            m: Vec::with_capacity(n),
        };
        for &a in symbol {
            let beta = a.sqrt();
            let kp = kernels_unchecked(dt, beta);
            w.k0.push(kp.k0);
            w.k1.push(kp.k1);
            w.dk0.push(kp.dk0);
            w.dk1.push(kp.dk1);
            w.j1.push(kp.j1);
            w.m.push(etd2_weight_with(dt, beta, &kp));
        }
        w
    }
}

/// Mode count above which per-mode updates run in parallel.
const PAR_THRESHOLD: usize = 1 << 15;

/// Exponential integrator bound to one configuration.
#[derive(Debug, Clone)]
pub struct Stepper {
    cfg: SimulationConfig,
    tr: Transform,
    symbol: Vec<f64>,
    mask: Option<Vec<bool>>,
    weights: StepWeights,
    prev_n: Option<Vec<Complex64>>,
    work: Vec<Complex64>,
}

impl Stepper {
    pub fn new(cfg: SimulationConfig) -> Result<Self, EvolutionError> {
        cfg.validate()?;
        let tr = Transform::new(&cfg.grid);
        let symbol = cfg.grid.symbol_values(&cfg.structure)?;
        let mask = cfg.dealias.then(|| cfg.grid.dealias_mask());
        let weights = StepWeights::new(&symbol, cfg.dt);
        let work = vec![Complex64::default(); cfg.grid.len()];
        Ok(Self {
            cfg,
            tr,
            symbol,
            mask,
            weights,
            prev_n: None,
            work,
        })
    }

    pub fn config(&self) -> &SimulationConfig {
        &self.cfg
    }

    pub fn transform(&self) -> &Transform {
        &self.tr
    }

    pub fn symbol(&self) -> &[f64] {
        &self.symbol
    }

    /// Spectral state of `epsilon * (profile, profile)`.
    pub fn initial_state(&self) -> Result<SpectralState, EvolutionError> {
        let c = &self.cfg;
        let prof = build_profile(&c.grid, &c.structure, c.gamma, c.c1, c.profile)?;
        let u: Vec<f64> = prof.iter().map(|v| c.epsilon * v).collect();
        Ok(SpectralState::from_fields(&self.tr, &u, &u)?)
    }

    /// Real field `u` of a state.
    pub fn field(&self, state: &SpectralState) -> Result<Vec<f64>, EvolutionError> {
        Ok(self.tr.inverse(&state.uhat)?)
    }

    /// Largest imaginary part of the inverse transform of `u_hat`, relative to
    /// the largest real part.
    pub fn imag_residue(&self, state: &SpectralState) -> Result<f64, EvolutionError> {
        let z = self.tr.inverse_complex(&state.uhat)?;
        let re = z.iter().fold(0.0f64, |m, c| m.max(c.re.abs()));
        let im = z.iter().fold(0.0f64, |m, c| m.max(c.im.abs()));
        Ok(if re > 0.0 { im / re } else { im })
    }

    /// Forget the nonlinearity history used by the second-order correction.
    pub fn reset_history(&mut self) {
        self.prev_n = None;
    }

    /// `FFT(|u|^p)` from the current state, with optional 2/3 truncation.
    fn nonlinear_term(&mut self, state: &SpectralState) -> Result<Vec<Complex64>, EvolutionError> {
        self.work.copy_from_slice(&state.uhat);
        self.tr.inverse_in_place(&mut self.work)?;
        let p = self.cfg.p;
        for v in self.work.iter_mut() {
            *v = Complex64::new(v.re.abs().powf(p), 0.0);
        }
        self.tr.forward_complex(&mut self.work)?;
        if let Some(mask) = &self.mask {
            for (v, &keep) in self.work.iter_mut().zip(mask) {
                if !keep {
                    *v = Complex64::default();
                }
            }
        }
        Ok(self.work.clone())
    }

    fn advance(
        w: &StepWeights,
        state: &mut SpectralState,
        n_hat: Option<&[Complex64]>,
        dn: Option<&[Complex64]>,
        dt: f64,
    ) {
        let len = state.uhat.len();
        let update = |i: usize, u: &mut Complex64, v: &mut Complex64| {
            let (u0, v0) = (*u, *v);
            let mut un = w.k0[i] * u0 + w.k1[i] * v0;
            let mut vn = w.dk0[i] * u0 + w.dk1[i] * v0;
            if let Some(nh) = n_hat {
                un += w.j1[i] * nh[i];
                vn += w.k1[i] * nh[i];
            }
            if let Some(d) = dn {
                let slope = d[i] / dt;
                un += w.m[i] * slope;
                vn += w.j1[i] * slope;
            }
            *u = un;
            *v = vn;
        };
        if len >= PAR_THRESHOLD {
            state
                .uhat
                .par_iter_mut()
                .zip(state.vhat.par_iter_mut())
                .enumerate()
                .for_each(|(i, (u, v))| update(i, u, v));
        } else {
            for (i, (u, v)) in state.uhat.iter_mut().zip(state.vhat.iter_mut()).enumerate() {
                update(i, u, v);
            }
        }
    }

    /// One step of size `dt`.
    pub fn step(&mut self, state: &mut SpectralState) -> Result<(), EvolutionError> {
        if !state.is_finite() {
            return Err(EvolutionError::NonFinite { t: state.t });
        }
        let dt = self.cfg.dt;
        if !self.cfg.nonlinear {
            Self::advance(&self.weights, state, None, None, dt);
            state.t += dt;
            return Ok(());
        }
        let n_hat = self.nonlinear_term(state)?;
        let dn: Option<Vec<Complex64>> = match (self.cfg.order, &self.prev_n) {
            (StepOrder::Etd2, Some(prev)) => {
                Some(n_hat.iter().zip(prev).map(|(a, b)| a - b).collect())
            }
            _ => None,
        };
        Self::advance(&self.weights, state, Some(&n_hat), dn.as_deref(), dt);
        self.prev_n = Some(n_hat);
        state.t += dt;
        Ok(())
    }

    /// First-order step of arbitrary size, leaving the history untouched.
    fn trial_step(&mut self, state: &SpectralState, dt: f64) -> Result<SpectralState, EvolutionError> {
        let w = StepWeights::new(&self.symbol, dt);
        let mut out = state.clone();
        let n_hat = if self.cfg.nonlinear {
            Some(self.nonlinear_term(state)?)
        } else {
            None
        };
        Self::advance(&w, &mut out, n_hat.as_deref(), None, dt);
        out.t += dt;
        Ok(out)
    }

    fn sample(&self, state: &SpectralState, u: &[f64]) -> Result<Sample, EvolutionError> {
        let grid = &self.cfg.grid;
        let nu = self.cfg.nu();
        let l2 = l2_norm_coeffs(&state.uhat, grid)?;
        let hs = sobolev_norm_with_symbol(&state.uhat, grid, &self.symbol, nu, self.cfg.s, true)?;
        let max_abs = u.iter().fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY });
        let t = state.t;
        Ok(Sample {
            t,
            l2,
            hs,
            max_abs,
            weighted_l2: (1.0 + t).powf(self.cfg.gamma / nu) * l2,
            weighted_hs: (1.0 + t).powf((self.cfg.s + self.cfg.gamma) / nu) * hs,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlewUp,
    Stagnated,
}

impl std::fmt::Display for RunStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunStatus::Completed => "completed",
            RunStatus::BlewUp => "blew_up",
            RunStatus::Stagnated => "stagnated",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub l2: f64,
    pub hs: f64,
    pub max_abs: f64,
    pub weighted_l2: f64,
    pub weighted_hs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub t_end: f64,
    pub steps: usize,
    /// Last time `max |u|` stayed below the blow-up threshold, refined by one
    /// bisection of the final step.
    pub lifespan: Option<f64>,
    /// Same quantity for the secondary threshold.
    pub secondary_lifespan: Option<f64>,
    /// Set when the two lifespans differ by more than [`THRESHOLD_SENSITIVITY`].
    pub threshold_sensitive: bool,
    pub series: Vec<Sample>,
    pub config: SimulationConfig,
}

impl RunOutcome {
    pub fn max_abs_series(&self) -> (Vec<f64>, Vec<f64>) {
        self.series.iter().map(|s| (s.t, s.max_abs)).unzip()
    }
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter()
        .fold(0.0f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY })
}

/// Integrate to `t_max`, blow-up or exhaustion of the step budget.
pub fn run(cfg: SimulationConfig) -> Result<RunOutcome, EvolutionError> {
    let st = Stepper::new(cfg)?;
    let state = st.initial_state()?;
    run_stepper(st, state)
}

/// [`run`] from a given spectral state instead of the configured profile.
pub fn run_from(cfg: SimulationConfig, initial: SpectralState) -> Result<RunOutcome, EvolutionError> {
    let st = Stepper::new(cfg)?;
    st.cfg.grid.check_len(initial.uhat.len())?;
    st.cfg.grid.check_len(initial.vhat.len())?;
    run_stepper(st, initial)
}

fn run_stepper(mut st: Stepper, mut state: SpectralState) -> Result<RunOutcome, EvolutionError> {
    let cfg = st.cfg.clone();
    state.t = 0.0;
    let total_steps = ((cfg.t_max / cfg.dt) - 1e-9).ceil().max(1.0) as usize;
    let budget = cfg.max_steps.unwrap_or(usize::MAX);

    let mut u = st.field(&state)?;
    let mut series = vec![st.sample(&state, &u)?];
    let mut secondary: Option<f64> = None;
    let mut status = RunStatus::Completed;
    let mut lifespan = None;
    let mut steps = 0usize;

    if max_abs(&u) > cfg.blowup_threshold {
        return Err(EvolutionError::Config(format!(
            "initial max |u| = {} already exceeds the blow-up threshold",
            max_abs(&u)
        )));
    }

    while steps < total_steps {
        if steps >= budget {
            status = RunStatus::Stagnated;
            break;
        }
        let before = state.clone();
        let before_max = max_abs(&u);
        st.step(&mut state)?;
        steps += 1;
        state.t = steps as f64 * cfg.dt;
        u = st.field(&state)?;
        let m = max_abs(&u);

        if secondary.is_none() && !(m <= cfg.secondary_threshold) {
            secondary = Some(refine_crossing(&mut st, &before, before_max, cfg.secondary_threshold)?);
        }
        if !(m <= cfg.blowup_threshold) {
            lifespan = Some(refine_crossing(&mut st, &before, before_max, cfg.blowup_threshold)?);
            status = RunStatus::BlewUp;
            series.push(st.sample(&state, &u)?);
            break;
        }
        if steps % cfg.sample_stride == 0 || steps == total_steps {
            series.push(st.sample(&state, &u)?);
        }
    }
    if status != RunStatus::BlewUp {
        if series.last().map(|s| s.t) != Some(state.t) {
            series.push(st.sample(&state, &u)?);
        }
    }
    let threshold_sensitive = match (lifespan, secondary) {
        (Some(a), Some(b)) if a > 0.0 => (a - b).abs() / a > THRESHOLD_SENSITIVITY,
        _ => false,
    };
    Ok(RunOutcome {
        status,
        t_end: state.t,
        steps,
        lifespan,
        secondary_lifespan: if status == RunStatus::BlewUp { secondary } else { None },
        threshold_sensitive,
        series,
        config: cfg,
    })
}

/// Last time below `threshold` within the step that crossed it, after one
/// half-step trial from the state at its start.
fn refine_crossing(
    st: &mut Stepper,
    before: &SpectralState,
    before_max: f64,
    threshold: f64,
) -> Result<f64, EvolutionError> {
    debug_assert!(before_max <= threshold);
    let half = 0.5 * st.cfg.dt;
    let mid = st.trial_step(before, half)?;
    let m = max_abs(&st.field(&mid)?);
    Ok(if m <= threshold { before.t + half } else { before.t })
}

/// Result of the smallness bisection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eps0Report {
    /// Largest amplitude observed to complete.
    pub eps_completed: f64,
    /// Smallest amplitude observed not to complete.
    pub eps_failed: f64,
    pub evaluations: Vec<(f64, RunStatus)>,
}

/// Bisect the data amplitude between a completing `eps_lo` and a failing
/// `eps_hi` (in log scale).
pub fn find_eps0(
    base: &SimulationConfig,
    eps_lo: f64,
    eps_hi: f64,
    iterations: usize,
) -> Result<Eps0Report, EvolutionError> {
    if !(eps_lo > 0.0 && eps_hi > eps_lo) {
        return Err(EvolutionError::Config(format!(
            "need 0 < eps_lo < eps_hi (got {eps_lo}, {eps_hi})"
        )));
    }
    let status = |eps: f64| -> Result<RunStatus, EvolutionError> {
        let mut c = base.clone();
        c.epsilon = eps;
        Ok(run(c)?.status)
    };
    let mut evaluations = Vec::new();
    let s_lo = status(eps_lo)?;
    evaluations.push((eps_lo, s_lo));
    let s_hi = status(eps_hi)?;
    evaluations.push((eps_hi, s_hi));
    if s_lo != RunStatus::Completed || s_hi == RunStatus::Completed {
        return Err(EvolutionError::Config(format!(
            "bracket does not straddle the transition: {eps_lo} -> {s_lo}, {eps_hi} -> {s_hi}"
        )));
    }
    let (mut lo, mut hi) = (eps_lo, eps_hi);
    for _ in 0..iterations {
        let mid = (lo * hi).sqrt();
        let s = status(mid)?;
        evaluations.push((mid, s));
        if s == RunStatus::Completed {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Eps0Report {
        eps_completed: lo,
        eps_failed: hi,
        evaluations,
    })
}

/// Series CSV with columns `t,l2,hs,max_abs,weighted_l2,weighted_hs`.
pub fn write_series_csv(path: &Path, outcome: &RunOutcome) -> Result<(), EvolutionError> {
    let mut w = csv::Writer::from_path(path)?;
    for s in &outcome.series {
        w.serialize(s)?;
    }
    w.flush()?;
    Ok(())
}

/// JSON sidecar echoing the configuration and outcome without the series.
pub fn write_sidecar_json(path: &Path, outcome: &RunOutcome) -> Result<(), EvolutionError> {
    let v = serde_json::json!({
        "status": outcome.status,
        "t_end": outcome.t_end,
        "steps": outcome.steps,
        "lifespan": outcome.lifespan,
        "secondary_lifespan": outcome.secondary_lifespan,
        "threshold_sensitive": outcome.threshold_sensitive,
        "samples": outcome.series.len(),
        "config": outcome.config,
    });
    std::fs::write(path, serde_json::to_string_pretty(&v)?)?;
    Ok(())
}
