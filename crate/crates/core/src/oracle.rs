//! Whole-space Sobolev norms of the linear solution, computed by adaptive
//! quadrature in frequency.
//!
//! For data `u_hat(xi) = rho(xi)^alpha e^{-|xi|^2}` placed in the position or
//! velocity slot, the linear solution has `u_hat(t, xi) = K(t, sqrt(a(xi))) u_hat(xi)`
//! with `K = K0` or `K1`, and
//!
//! ```text
//!     ||u(t)||_{H^s hom}^2 = int a(xi)^(2s/nu) K(t, sqrt(a(xi)))^2 |u_hat(xi)|^2 d xi .
//! ```
//!
//! No `(2 pi)^-n` normalisation is applied; decay slopes do not depend on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graded::GradedStructure;
use crate::oscillator::kernels_unchecked;
use crate::quadrature::{integrate, QuadOptions};

pub use crate::fit::fit_decay;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("unsupported structure: {0}")]
    Unsupported(String),
    #[error("divergent integral: low-frequency exponent {exponent} must be positive")]
    Divergent { exponent: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Gaussian,
    PowerGaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSlot {
    Position,
    Velocity,
}

/// Frequency profile `rho(xi)^alpha e^{-|xi|^2}` in one data slot, where
/// `rho(xi) = (sum_j |xi_j|^(2 nu0/nu_j))^(1/(2 nu0))` (the Euclidean norm for
/// unit weights and `nu0 = 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralProfile {
    pub kind: ProfileKind,
    pub alpha: f64,
    pub which: DataSlot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Inside,
    /// Norm diverges logarithmically; the profile sits exactly on the edge.
    Boundary,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub l2: Membership,
    pub negative_order: Membership,
    pub gamma: f64,
}

fn classify_exponent(e: f64) -> Membership {
    const EDGE: f64 = 1e-12;
    if e > EDGE {
        Membership::Inside
    } else if e.abs() <= EDGE {
        Membership::Boundary
    } else {
        Membership::Outside
    }
}

impl SpectralProfile {
    pub fn gaussian(which: DataSlot) -> Self {
        Self {
            kind: ProfileKind::Gaussian,
            alpha: 0.0,
            which,
        }
    }

    pub fn power_gaussian(alpha: f64, which: DataSlot) -> Self {
        Self {
            kind: ProfileKind::PowerGaussian,
            alpha,
            which,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self.kind {
            ProfileKind::Gaussian => 0.0,
            ProfileKind::PowerGaussian => self.alpha,
        }
    }

    /// Membership in `L^2` and in the homogeneous space of order `-gamma`, for
    /// homogeneous dimension `q` (`= n` in the isotropic case).
    pub fn membership(&self, q: f64, gamma: f64) -> MembershipReport {
        let a = self.alpha();
        MembershipReport {
            l2: classify_exponent(2.0 * a + q),
            negative_order: classify_exponent(2.0 * (a - gamma) + q),
            gamma,
        }
    }

    #[inline]
    fn amplitude_sq(&self, rho: f64, r2: f64) -> f64 {
        let g = (-2.0 * r2).exp();
        match self.kind {
            ProfileKind::Gaussian => g,
            ProfileKind::PowerGaussian => rho.powf(2.0 * self.alpha) * g,
        }
    }

    #[inline]
    fn kernel_sq(&self, t: f64, beta: f64) -> f64 {
        let kp = kernels_unchecked(t, beta);
        match self.which {
            DataSlot::Position => kp.k0 * kp.k0,
            DataSlot::Velocity => kp.k1 * kp.k1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

/// Relative tolerance of the radial path.
pub const RADIAL_TOL: f64 = 1e-10;
/// Relative tolerance of the outer integral of the tensor path.
pub const TENSOR_TOL: f64 = 1e-7;
/// Upper frequency cut; `e^{-2 r^2}` is below `1e-55` beyond it.
const R_MAX: f64 = 8.0;
/// Low-frequency truncation depth in e-folds of the integrand.
const LOW_DEPTH: f64 = 50.0;

fn check_args(s: f64, t: f64) -> Result<(), OracleError> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(OracleError::InvalidArgument(format!("t = {t} must be nonnegative")));
    }
    if !s.is_finite() {
        return Err(OracleError::InvalidArgument(format!("s = {s} must be finite")));
    }
    Ok(())
}

/// Surface area of the unit sphere in `R^n`.
pub fn sphere_area(n: usize) -> f64 {
    use statrs::function::gamma::gamma;
    let h = n as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

/// Whether the radial path applies: `a(xi) = c |xi|^k`.
pub fn is_radial(gs: &GradedStructure) -> bool {
    gs.dim() == 1 || (gs.nu0() == 1 && gs.is_isotropic())
}

/// Squared homogeneous `H^s` norm of the linear solution at time `t` for a
/// structure whose symbol is radial.
pub fn linear_norm_sq(
    profile: &SpectralProfile,
    gs: &GradedStructure,
    s: f64,
    t: f64,
) -> Result<OracleValue, OracleError> {
    linear_norm_sq_tol(profile, gs, s, t, RADIAL_TOL)
}

/// [`linear_norm_sq`] with an explicit relative tolerance.
pub fn linear_norm_sq_tol(
    profile: &SpectralProfile,
    gs: &GradedStructure,
    s: f64,
    t: f64,
    rel_tol: f64,
) -> Result<OracleValue, OracleError> {
    check_args(s, t)?;
    if !is_radial(gs) {
        return Err(OracleError::Unsupported(
            "symbol is not radial; use the tensor path (anisotropic_norm_sq)".into(),
        ));
    }
    let n = gs.dim() as f64;
    let c = gs.coeffs()[0];
    let k = gs.powers()[0] as f64;
    let nu = gs.degree() as f64;
    let ms = 2.0 * s / nu;
    // integrand ~ r^(e - 1) near zero
    let e = ms * k + 2.0 * profile.alpha() + n;
    if !(e > 0.0) {
        return Err(OracleError::Divergent { exponent: e });
    }
    let sigma = if gs.dim() == 1 { 2.0 } else { sphere_area(gs.dim()) };
    let peak = (c * (1.0 + t)).powf(-1.0 / k).min(1.0);
    let y_lo = peak.ln() - LOW_DEPTH / e;
    let y_hi = R_MAX.ln();
    let f = |y: f64| {
        let r = y.exp();
        let a = c * r.powf(k);
        let mult = if ms == 0.0 { 1.0 } else { a.powf(ms) };
        sigma * mult * r.powf(n) * profile.kernel_sq(t, a.sqrt()) * profile.amplitude_sq(r, r * r)
    };
    let res = integrate(
        f,
        y_lo,
        y_hi,
        QuadOptions {
            rel_tol,
            abs_tol: 0.0,
            max_intervals: 4000,
        },
    );
    Ok(OracleValue {
        value: res.value,
        error: res.error,
        converged: res.converged,
    })
}

/// Squared homogeneous `H^s` norm by nested quadrature for `n <= 2` and any
/// weights, using the profile's frequency quasi-norm.
pub fn anisotropic_norm_sq(
    profile: &SpectralProfile,
    gs: &GradedStructure,
    s: f64,
    t: f64,
) -> Result<OracleValue, OracleError> {
    check_args(s, t)?;
    if gs.dim() > 2 {
        return Err(OracleError::Unsupported(format!(
            "tensor quadrature supports n <= 2, got n = {}",
            gs.dim()
        )));
    }
    let q = gs.homogeneous_dim() as f64;
    let nu = gs.degree() as f64;
    let ms = 2.0 * s / nu;
    let e = 2.0 * s + 2.0 * profile.alpha() + q;
    if !(e > 0.0) {
        return Err(OracleError::Divergent { exponent: e });
    }
    let powers: Vec<f64> = gs.powers().iter().map(|&p| p as f64).collect();
    let coeffs = gs.coeffs().to_vec();
    let weights: Vec<f64> = gs.weights().iter().map(|&w| w as f64).collect();
    let two_nu0 = nu;
    let bounds: Vec<(f64, f64)> = (0..gs.dim())
        .map(|j| {
            let peak = (coeffs[j] * (1.0 + t)).powf(-1.0 / powers[j]).min(1.0);
            // a strip along the other axis decays only like xi_j^1
            let rate = if gs.dim() == 1 { e / weights[j] } else { (e / weights[j]).min(1.0) };
            (peak.ln() - LOW_DEPTH / rate, R_MAX.ln())
        })
        .collect();

    let point = |xi: &[f64]| -> f64 {
        let mut a = 0.0;
        let mut rho_pow = 0.0;
        let mut r2 = 0.0;
        for j in 0..xi.len() {
            let xp = xi[j].powf(powers[j]);
            a += coeffs[j] * xp;
            rho_pow += xp;
            r2 += xi[j] * xi[j];
        }
        let rho = rho_pow.powf(1.0 / two_nu0);
        let mult = if ms == 0.0 { 1.0 } else { a.powf(ms) };
        mult * profile.kernel_sq(t, a.sqrt()) * profile.amplitude_sq(rho, r2)
    };

    // even integrand: integrate over the positive orthant and multiply by 2^n
    let sym = (1u32 << gs.dim()) as f64;
    let res = if gs.dim() == 1 {
        integrate(
            |y: f64| {
                let x = y.exp();
                x * point(&[x])
            },
            bounds[0].0,
            bounds[0].1,
            QuadOptions {
                rel_tol: RADIAL_TOL,
                abs_tol: 0.0,
                max_intervals: 4000,
            },
        )
    } else {
        let inner_opts = QuadOptions {
            rel_tol: 1e-3 * TENSOR_TOL,
            abs_tol: 0.0,
            max_intervals: 2000,
        };
        integrate(
            |y1: f64| {
                let x1 = y1.exp();
                let inner = integrate(
                    |y2: f64| {
                        let x2 = y2.exp();
                        x2 * point(&[x1, x2])
                    },
                    bounds[1].0,
                    bounds[1].1,
                    inner_opts,
                );
                x1 * inner.value
            },
            bounds[0].0,
            bounds[0].1,
            QuadOptions {
                rel_tol: TENSOR_TOL,
                abs_tol: 0.0,
                max_intervals: 2000,
            },
        )
    };
    Ok(OracleValue {
        value: sym * res.value,
        error: sym * res.error,
        converged: res.converged,
    })
}

/// Squared norm through whichever path the structure supports.
pub fn norm_sq(
    profile: &SpectralProfile,
    gs: &GradedStructure,
    s: f64,
    t: f64,
) -> Result<OracleValue, OracleError> {
    if is_radial(gs) {
        linear_norm_sq(profile, gs, s, t)
    } else {
        anisotropic_norm_sq(profile, gs, s, t)
    }
}

/// Norms (not squared) at each time, evaluated in parallel.
pub fn norm_curve(
    profile: &SpectralProfile,
    gs: &GradedStructure,
    s: f64,
    times: &[f64],
) -> Result<Vec<f64>, OracleError> {
    times
        .par_iter()
        .map(|&t| norm_sq(profile, gs, s, t).map(|v| v.value.sqrt()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillator::logspace;
    use std::f64::consts::PI;

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-12);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_at_time_zero() {
        let gs = GradedStructure::isotropic(2, 1);
        let p = SpectralProfile::gaussian(DataSlot::Position);
        let v = linear_norm_sq(&p, &gs, 0.0, 0.0).unwrap();
        assert!((v.value - PI / 2.0).abs() < 1e-10);
        assert!(v.converged);
        // n = 3: 4 pi int r^2 e^{-2 r^2} dr = 4 pi sqrt(pi/2) / 16 ... = (pi/2)^(3/2)
        let gs3 = GradedStructure::isotropic(3, 1);
        let v = linear_norm_sq(&p, &gs3, 0.0, 0.0).unwrap();
        assert!((v.value - (PI / 2.0).powf(1.5)).abs() < 1e-10);
    }

    #[test]
    fn velocity_slot_vanishes_at_zero() {
        let gs = GradedStructure::isotropic(2, 1);
        let p = SpectralProfile::power_gaussian(0.3, DataSlot::Velocity);
        assert_eq!(linear_norm_sq(&p, &gs, 0.5, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn errors() {
        let aniso = GradedStructure::new(vec![1, 2], vec![1.0, 1.0], 2).unwrap();
        let p = SpectralProfile::gaussian(DataSlot::Position);
        assert!(matches!(linear_norm_sq(&p, &aniso, 0.0, 1.0), Err(OracleError::Unsupported(_))));
        let gs = GradedStructure::isotropic(2, 1);
        let bad = SpectralProfile::power_gaussian(-1.0, DataSlot::Position);
        assert!(matches!(linear_norm_sq(&bad, &gs, 0.0, 1.0), Err(OracleError::Divergent { .. })));
        let gs3 = GradedStructure::isotropic(3, 1);
        assert!(matches!(anisotropic_norm_sq(&p, &gs3, 0.0, 1.0), Err(OracleError::Unsupported(_))));
    }

    #[test]
    fn membership_report() {
        let p = SpectralProfile::power_gaussian(-0.5, DataSlot::Position);
        let m = p.membership(2.0, 0.5);
        assert_eq!(m.l2, Membership::Inside);
        assert_eq!(m.negative_order, Membership::Boundary);
        let m = p.membership(2.0, 0.8);
        assert_eq!(m.negative_order, Membership::Outside);
    }

    #[test]
    fn tensor_time_zero_closed_form() {
        // int_{R^2} e^{-2|xi|^2} = pi / 2 for any symbol
        let gs = GradedStructure::new(vec![1, 2], vec![1.0, 3.0], 2).unwrap();
        let p = SpectralProfile::gaussian(DataSlot::Position);
        let v = anisotropic_norm_sq(&p, &gs, 0.0, 0.0).unwrap();
        assert!((v.value - PI / 2.0).abs() < 1e-6 * PI);
    }

    #[test]
    fn paths_agree_on_isotropic_structure() {
        let gs = GradedStructure::isotropic(2, 1);
        for (p, s, t) in [
            (SpectralProfile::power_gaussian(-0.5, DataSlot::Position), 0.0, 3.0),
            (SpectralProfile::power_gaussian(0.2, DataSlot::Velocity), 1.0, 40.0),
            (SpectralProfile::gaussian(DataSlot::Velocity), 0.5, 0.7),
        ] {
            let a = linear_norm_sq(&p, &gs, s, t).unwrap().value;
            let b = anisotropic_norm_sq(&p, &gs, s, t).unwrap().value;
            assert!(((a - b) / a).abs() < 1e-6, "{a} vs {b}");
        }
    }

    #[test]
    fn refinement_within_error_bound() {
        let gs = GradedStructure::isotropic(1, 2);
        let p = SpectralProfile::power_gaussian(-0.25, DataSlot::Velocity);
        for t in [0.5, 5.0, 500.0] {
            let coarse = linear_norm_sq_tol(&p, &gs, 0.0, t, 1e-8).unwrap();
            let fine = linear_norm_sq_tol(&p, &gs, 0.0, t, 5e-9).unwrap();
            assert!(coarse.converged && fine.converged);
            assert!((coarse.value - fine.value).abs() <= coarse.error);
            // the n = 1 tensor path is an independent implementation of the same integral
            let other = anisotropic_norm_sq(&p, &gs, 0.0, t).unwrap();
            assert!(((other.value - fine.value) / fine.value).abs() < 1e-8, "t={t} {other:?} {fine:?}");
        }
    }

    #[test]
    fn low_frequency_velocity_norm_eventually_decreases() {
        let gs = GradedStructure::isotropic(2, 1);
        let p = SpectralProfile::power_gaussian(-0.5, DataSlot::Velocity);
        let times = logspace(20.0, 2000.0, 8);
        let v = norm_curve(&p, &gs, 0.0, &times).unwrap();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn boundary_profile_rate() {
        // n = 2, nu = 2, alpha = gamma - 1 with gamma = 0.5 -> slope -gamma/nu
        let gs = GradedStructure::isotropic(2, 1);
        let p = SpectralProfile::power_gaussian(-0.5, DataSlot::Position);
        let times = logspace(1e2, 1e4, 30);
        let v = norm_curve(&p, &gs, 0.0, &times).unwrap();
        let fit = fit_decay(&times, &v).unwrap().with_theory(-0.25);
        assert!(fit.passes_rel(0.05), "{fit:?}");
        assert!(fit.slope >= -0.25 - 0.03);
    }
}
