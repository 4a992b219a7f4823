//! Scaling of the three test-function integrals used in blow-up arguments.
//!
//! With `phi_R(t, x) = Phi(|x| / R) Phi(t / R^nu)` and `p' = p / (p - 1)`, the
//! integrals of `|D phi_R|^p' phi_R^(-1/(p-1))` for `D = d_t`, `R` (the operator,
//! applied spectrally in `x`) and `d_t^2` are computed at each `R` and their
//! log-log slopes compared with `Q + nu - nu p'`, `Q + nu - nu p'` and
//! `Q + nu - 2 nu p'`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentKind, SuiteReport};
use crate::fit::{fit_power_law, FitResult};
use crate::graded::GradedStructure;
use crate::quadrature::{integrate, QuadOptions};
use crate::spectral::{Grid, Transform};

/// Smooth transition `Phi` with `Phi = 1` on `[0, 1]` and `Phi = 0` on `[2, inf)`,
/// built as `g(2 - r) / (g(2 - r) + g(r - 1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BumpKind {
    /// `g(x) = e^(-1/x)`.
    #[default]
    Exp,
    /// `g(x) = e^(-1/x^2)`.
    ExpSquared,
}

impl BumpKind {
    fn order(self) -> i32 {
        match self {
            BumpKind::Exp => 1,
            BumpKind::ExpSquared => 2,
        }
    }
}

/// `Phi(r)`.
pub fn bump(kind: BumpKind, r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let m = kind.order();
        let a = (-(2.0 - r).powi(-m)).exp();
        let b = (-(r - 1.0).powi(-m)).exp();
        a / (a + b)
    }
}

/// `(Phi, Phi'/Phi, Phi''/Phi)` on `(1, 2)`, evaluated without underflow in
/// the ratios.
fn bump_log_derivs(kind: BumpKind, r: f64) -> (f64, f64, f64) {
    let m = kind.order() as f64;
    let mi = kind.order();
    // g'/g and g''/g at x
    let d1 = |x: f64| m * x.powi(-mi - 1);
    let d2 = |x: f64| m * m * x.powi(-2 * mi - 2) - m * (m + 1.0) * x.powi(-mi - 2);
    let (u, v) = (2.0 - r, r - 1.0);
    // b / a as exp(1/u^m - 1/v^m), clipped to stay finite
    let ratio = (u.powi(-mi) - v.powi(-mi)).min(700.0).exp();
    let phi = 1.0 / (1.0 + ratio);
    // a'/a, a''/a and b'/a, b''/a
    let a1 = -d1(u);
    let a2 = d2(u);
    let b1 = d1(v) * ratio;
    let b2 = d2(v) * ratio;
    let s = 1.0 + ratio; // S / a
    let s1 = a1 + b1; // S' / a
    let s2 = a2 + b2; // S'' / a
    // Phi = 1 / (S/a);  Phi'/Phi = a'/a - S'/S;  Phi''/Phi = a''/a - 2 a'/a S'/S - S''/S + 2 (S'/S)^2
    let ls1 = s1 / s;
    let ls2 = s2 / s;
    let r1 = a1 - ls1;
    let r2 = a2 - 2.0 * a1 * ls1 - ls2 + 2.0 * ls1 * ls1;
    (phi, r1, r2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestfnIntegrals {
    pub r: f64,
    pub time_derivative: f64,
    pub operator: f64,
    pub second_time_derivative: f64,
}

/// Values of `Phi` below which grid points are left out of the spatial
/// integral: the exact integrand vanishes faster than any power there while
/// spectral round-off does not.
const PHI_FLOOR: f64 = 1e-20;

fn time_integral<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> Result<f64, ExperimentError> {
    let res = integrate(f, lo, hi, QuadOptions::rel(1e-11));
    if !res.converged || !res.value.is_finite() {
        return Err(ExperimentError::Aborted {
            reason: "test-function time quadrature did not converge".into(),
            diagnostics: format!("  interval [{lo}, {hi}], value {}, error {}", res.value, res.error),
        });
    }
    Ok(res.value)
}

/// The three integrals at one `R`, on a grid of `points` per axis covering
/// `|x_j| <= 1.25 (2R)^(w_j)`.
pub fn testfn_integrals(
    gs: &GradedStructure,
    p: f64,
    r: f64,
    kind: BumpKind,
    points: usize,
) -> Result<TestfnIntegrals, ExperimentError> {
    if !(p > 1.0) || !(r > 0.0) {
        return Err(ExperimentError::Spec(format!("test function: need p > 1 and R > 0 (got {p}, {r})")));
    }
    let pp = p / (p - 1.0);
    let inv = 1.0 / (p - 1.0);
    let nu = gs.degree() as f64;
    let tr_scale = r.powf(nu);

    // time factors, in t; the integrands reduce to |Phi^(k)/Phi|^p' Phi
    let phi_t = |t: f64| bump(kind, t / tr_scale);
    let dt_int = |t: f64| {
        let (phi, l1, _) = bump_log_derivs(kind, t / tr_scale);
        (l1 / tr_scale).abs().powf(pp) * phi
    };
    let dtt_int = |t: f64| {
        let (phi, _, l2) = bump_log_derivs(kind, t / tr_scale);
        (l2 / (tr_scale * tr_scale)).abs().powf(pp) * phi
    };
    let time_mass = time_integral(phi_t, 0.0, tr_scale)? + time_integral(phi_t, tr_scale, 2.0 * tr_scale)?;
    let time_dt = time_integral(dt_int, tr_scale, 2.0 * tr_scale)?;
    let time_dtt = time_integral(dtt_int, tr_scale, 2.0 * tr_scale)?;

    // space factors
    let box_len: Vec<f64> = gs.weights().iter().map(|&w| 2.5 * (2.0 * r).powi(w as i32)).collect();
    let grid = Grid::new(box_len, vec![points; gs.dim()])?;
    let tr = Transform::new(&grid);
    let phi_x = grid.sample(|x| bump(kind, gs.quasi_norm(x) / r));
    let op = tr.apply_symbol_power(&phi_x, gs, 1.0)?;
    let w = grid.cell_weight();
    let space_mass: f64 = phi_x.iter().sum::<f64>() * w;
    let space_op: f64 = phi_x
        .iter()
        .zip(&op)
        .filter(|(&f, _)| f > PHI_FLOOR && f < 1.0)
        .map(|(&f, &g)| g.abs().powf(pp) * f.powf(-inv))
        .sum::<f64>()
        * w;

    Ok(TestfnIntegrals {
        r,
        time_derivative: space_mass * time_dt,
        operator: space_op * time_mass,
        second_time_derivative: space_mass * time_dtt,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestfnSpec {
    pub structure: GradedStructure,
    pub p: f64,
    /// Geometric radii, at least five.
    pub r: Vec<f64>,
    #[serde(default)]
    pub bump: BumpKind,
    /// Grid points per axis.
    pub points: usize,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
    /// Repeat with the other bump and require slopes within this distance.
    #[serde(default = "default_bump_tol")]
    pub bump_tolerance: Option<f64>,
}

fn default_tol() -> f64 {
    0.05
}
fn default_bump_tol() -> Option<f64> {
    Some(0.02)
}

impl TestfnSpec {
    pub fn new(structure: GradedStructure, p: f64, points: usize) -> Self {
        Self {
            structure,
            p,
            r: (2..=7).map(|k| 2f64.powi(k)).collect(),
            bump: BumpKind::Exp,
            points,
            tolerance: default_tol(),
            bump_tolerance: default_bump_tol(),
        }
    }

    /// `(p, nu, Q) = (2, 2, 1)` and `(2, 2, 2)` over `R = 4, 8, ..., 128`.
    pub fn reference() -> Vec<Self> {
        vec![
            Self::new(GradedStructure::isotropic(1, 1), 2.0, 2048),
            Self::new(GradedStructure::isotropic(2, 1), 2.0, 512),
        ]
    }

    /// Predicted slopes for the `d_t`, operator and `d_t^2` integrals.
    pub fn theory(&self) -> [f64; 3] {
        let q = self.structure.homogeneous_dim() as f64;
        let nu = self.structure.degree() as f64;
        let pp = self.p / (self.p - 1.0);
        [q + nu - nu * pp, q + nu - nu * pp, q + nu - 2.0 * nu * pp]
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        if !(self.p > 1.0 && self.p.is_finite()) {
            return bad(format!("testfn: p = {} must exceed 1", self.p));
        }
        if self.r.len() < 5 {
            return bad(format!("testfn: need at least 5 radii, got {}", self.r.len()));
        }
        if self.r.iter().any(|&r| !(r > 0.0)) {
            return bad("testfn: radii must be positive".into());
        }
        let q0 = self.r[1] / self.r[0];
        if !(q0 > 1.0) || self.r.windows(2).any(|w| ((w[1] / w[0]) / q0 - 1.0).abs() > 1e-9) {
            return bad("testfn: radii must form an increasing geometric sequence".into());
        }
        if self.points < 16 {
            return bad("testfn: at least 16 points per axis".into());
        }
        Ok(())
    }
}

const NAMES: [&str; 3] = ["time_derivative", "operator", "second_time_derivative"];

fn fits_for(spec: &TestfnSpec, kind: BumpKind) -> Result<(Vec<TestfnIntegrals>, Vec<FitResult>), ExperimentError> {
    let vals: Vec<TestfnIntegrals> = spec
        .r
        .par_iter()
        .map(|&r| testfn_integrals(&spec.structure, spec.p, r, kind, spec.points))
        .collect::<Result<_, _>>()?;
    let theory = spec.theory();
    let cols: [Vec<f64>; 3] = [
        vals.iter().map(|v| v.time_derivative).collect(),
        vals.iter().map(|v| v.operator).collect(),
        vals.iter().map(|v| v.second_time_derivative).collect(),
    ];
    let fits = cols
        .iter()
        .zip(theory)
        .map(|(c, th)| fit_power_law(&spec.r, c).map(|f| f.with_theory(th)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((vals, fits))
}

pub fn testfn_scaling(spec: &TestfnSpec) -> Result<(Vec<FitResult>, SuiteReport), ExperimentError> {
    spec.validate()?;
    let (vals, fits) = fits_for(spec, spec.bump)?;
    let mut report = SuiteReport::new(
        ExperimentKind::Testfn,
        &["r", "time_derivative", "operator", "second_time_derivative"],
    );
    for v in &vals {
        report.row(&[&v.r, &v.time_derivative, &v.operator, &v.second_time_derivative]);
        report.point(NAMES[0], v.r, v.time_derivative);
        report.point(NAMES[1], v.r, v.operator);
        report.point(NAMES[2], v.r, v.second_time_derivative);
    }
    let q = spec.structure.homogeneous_dim();
    let nu = spec.structure.degree();
    for (name, f) in NAMES.iter().zip(&fits) {
        report.check(
            format!("testfn {name} slope (p={}, nu={nu}, Q={q})", spec.p),
            f.passes_abs(spec.tolerance),
            format!(
                "slope {:.5} vs theory {:.5} (abs tol {})",
                f.slope,
                f.theory.unwrap_or(f64::NAN),
                spec.tolerance
            ),
        );
    }
    let mut other_fits = None;
    if let Some(tol) = spec.bump_tolerance {
        let other = match spec.bump {
            BumpKind::Exp => BumpKind::ExpSquared,
            BumpKind::ExpSquared => BumpKind::Exp,
        };
        let (_, of) = fits_for(spec, other)?;
        let worst = fits.iter().zip(&of).map(|(a, b)| (a.slope - b.slope).abs()).fold(0.0, f64::max);
        report.check(
            "testfn slopes independent of the bump",
            worst <= tol,
            format!("largest slope difference {worst:.2e} (tol {tol})"),
        );
        other_fits = Some(of);
    }
    report.summary = serde_json::json!({
        "theory": spec.theory(),
        "fits": fits,
        "other_bump_fits": other_fits,
    });
    Ok((fits, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_shape() {
        for kind in [BumpKind::Exp, BumpKind::ExpSquared] {
            assert_eq!(bump(kind, 0.3), 1.0);
            assert_eq!(bump(kind, 1.0), 1.0);
            assert_eq!(bump(kind, 2.0), 0.0);
            assert!((bump(kind, 1.5) - 0.5).abs() < 1e-15);
            let xs: Vec<f64> = (1..100).map(|i| 1.0 + i as f64 / 100.0).collect();
            assert!(xs.windows(2).all(|w| bump(kind, w[1]) <= bump(kind, w[0])));
        }
    }

    #[test]
    fn log_derivatives_match_finite_differences() {
        for kind in [BumpKind::Exp, BumpKind::ExpSquared] {
            for &r in &[1.2, 1.45, 1.6, 1.8] {
                let h = 1e-4;
                let f = |x: f64| bump(kind, x);
                let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
                let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
                let (phi, l1, l2) = bump_log_derivs(kind, r);
                assert!((phi - f(r)).abs() < 1e-14);
                assert!((l1 * phi - d1).abs() < 1e-6 * (1.0 + d1.abs()), "{kind:?} r={r}");
                assert!((l2 * phi - d2).abs() < 1e-4 * (1.0 + d2.abs()), "{kind:?} r={r}");
            }
        }
    }

    #[test]
    fn theory_slopes() {
        let s = &TestfnSpec::reference()[0];
        assert_eq!(s.theory(), [-1.0, -1.0, -5.0]);
        let s = &TestfnSpec::reference()[1];
        assert_eq!(s.theory(), [0.0, 0.0, -4.0]);
    }

    #[test]
    fn single_radius_scaling() {
        // doubling R multiplies each integral by 2^slope
        let gs = GradedStructure::isotropic(1, 1);
        let a = testfn_integrals(&gs, 2.0, 5.0, BumpKind::Exp, 1024).unwrap();
        let b = testfn_integrals(&gs, 2.0, 10.0, BumpKind::Exp, 1024).unwrap();
        assert!((b.time_derivative / a.time_derivative - 0.5).abs() < 1e-8);
        assert!((b.operator / a.operator - 0.5).abs() < 1e-6);
        assert!((b.second_time_derivative / a.second_time_derivative - 1.0 / 32.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_non_geometric_radii() {
        let mut s = TestfnSpec::reference().remove(0);
        s.r = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(s.validate().is_err());
        s.r = vec![1.0, 2.0, 4.0];
        assert!(s.validate().is_err());
    }
}
