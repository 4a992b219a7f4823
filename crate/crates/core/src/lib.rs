//! Spectral simulation and numerical verification for the semilinear damped
//! wave equation
//!
//! ```text
//!     u_tt + R u + u_t = |u|^p
//! ```
//!
//! where `R` is an anisotropic, positive Rockland operator on `(R^n, +)` with
//! symbol `a(xi) = sum_j a_j xi_j^(2 nu0 / nu_j)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`graded`] holds the dilation structure, the symbol and the closed-form
//!   exponent arithmetic (critical exponent, lifespan exponent, admissibility).
//! * [`oscillator`] solves the per-mode damped oscillator exactly and checks the
//!   regime-wise pointwise bounds of its kernels.
//! * [`spectral`] is the periodic-grid surrogate of `R^n`: FFT plumbing and
//!   Sobolev / Lebesgue norms.
//! * [`quadrature`] and [`oracle`] evaluate linear-solution norms on the whole
//!   space by adaptive quadrature in frequency.
//! * [`evolution`] integrates the nonlinear problem with exponential Duhamel
//!   steps and detects blow-up.
//! * [`experiments`] packages the measurable checks (decay, lifespan,
//!   dichotomy, test-function scaling, Gagliardo-Nirenberg probes).

pub mod evolution;
pub mod experiments;
pub mod fit;
pub mod graded;
pub mod oracle;
pub mod oscillator;
pub mod quadrature;
pub mod spectral;

pub use evolution::{
    build_initial_data, run, run_from, DataProfile, RunOutcome, RunStatus, Sample, SimulationConfig,
    StepOrder, Stepper,
};
pub use experiments::{ExperimentKind, ExperimentSpec, SuiteReport};
pub use fit::{fit_decay, fit_power_law, linear_fit, FitResult};
pub use graded::{
    classify, critical_exponent, gamma_tilde, lifespan_exponent, ExponentReport, GradedError,
    GradedStructure, Regime,
};
pub use oracle::{DataSlot, ProfileKind, SpectralProfile};
pub use oscillator::{
    char_roots, etd2_weight, kernels, verify_pointwise_bounds, DampingKind, KernelPair,
    RegimeCutoffs, Roots,
};
pub use spectral::{Grid, SpectralError, SpectralState, Transform};
