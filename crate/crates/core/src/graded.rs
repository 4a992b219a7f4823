//! Anisotropic graded structure on `R^n` and exponent arithmetic.
//!
//! The dilations act by `D_r(x) = (r^nu_1 x_1, ..., r^nu_n x_n)` with integer
//! weights. For a common multiple `nu0` of the weights, the operator
//! `R = sum_j (-1)^(nu0/nu_j) a_j d_j^(2 nu0/nu_j)` is a positive Rockland
//! operator of homogeneous degree `nu = 2 nu0` with Fourier symbol
//! `a(xi) = sum_j a_j xi_j^(2 nu0/nu_j)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GradedError {
    #[error("dimension mismatch: {weights} weights but {coeffs} coefficients")]
    DimensionMismatch { weights: usize, coeffs: usize },
    #[error("graded structure needs at least one direction")]
    Empty,
    #[error("dilation weight {index} is zero; weights must be positive integers")]
    ZeroWeight { index: usize },
    #[error("nu0 = {nu0} is not a common multiple of the weights (weight {weight} does not divide it)")]
    NotCommonMultiple { nu0: u32, weight: u32 },
    #[error("coefficient a_{index} = {value} must be positive and finite")]
    NonPositiveCoefficient { index: usize, value: f64 },
    #[error("vector of length {got} does not match dimension {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("gamma = {gamma} outside the open interval (0, Q/2) = (0, {half_q})")]
    GammaOutOfRange { gamma: f64, half_q: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// Validated dilation structure together with the Rockland symbol coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GradedSpec", into = "GradedSpec")]
pub struct GradedStructure {
    weights: Vec<u32>,
    coeffs: Vec<f64>,
    nu0: u32,
    // derived
    q: u32,
    /// Per-axis symbol exponents `2 nu0 / nu_j` (always even).
    powers: Vec<u32>,
}

/// Raw serialisable form; converts through [`GradedStructure::new`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradedSpec {
    pub weights: Vec<u32>,
    pub coeffs: Vec<f64>,
    pub nu0: u32,
}

impl TryFrom<GradedSpec> for GradedStructure {
    type Error = GradedError;
    fn try_from(spec: GradedSpec) -> Result<Self, Self::Error> {
        GradedStructure::new(spec.weights, spec.coeffs, spec.nu0)
    }
}

impl From<GradedStructure> for GradedSpec {
    fn from(gs: GradedStructure) -> Self {
        GradedSpec {
            weights: gs.weights,
            coeffs: gs.coeffs,
            nu0: gs.nu0,
        }
    }
}

impl GradedStructure {
    pub fn new(weights: Vec<u32>, coeffs: Vec<f64>, nu0: u32) -> Result<Self, GradedError> {
        if weights.len() != coeffs.len() {
            return Err(GradedError::DimensionMismatch {
                weights: weights.len(),
                coeffs: coeffs.len(),
            });
        }
        if weights.is_empty() {
            return Err(GradedError::Empty);
        }
        for (index, &w) in weights.iter().enumerate() {
            if w == 0 {
                return Err(GradedError::ZeroWeight { index });
            }
            if nu0 == 0 || nu0 % w != 0 {
                return Err(GradedError::NotCommonMultiple { nu0, weight: w });
            }
        }
        for (index, &value) in coeffs.iter().enumerate() {
            if !(value > 0.0 && value.is_finite()) {
                return Err(GradedError::NonPositiveCoefficient { index, value });
            }
        }
        let q = weights.iter().sum();
        let powers = weights.iter().map(|&w| 2 * nu0 / w).collect();
        Ok(Self {
            weights,
            coeffs,
            nu0,
            q,
            powers,
        })
    }

    /// `n` copies of weight 1 with unit coefficients: the operator `(-Delta)^nu0`
    /// when `nu0 = 1`, or `sum_j d_j^(2 nu0)` otherwise.
    pub fn isotropic(n: usize, nu0: u32) -> Self {
        Self::new(vec![1; n], vec![1.0; n], nu0).expect("isotropic structure is always valid")
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn nu0(&self) -> u32 {
        self.nu0
    }

    /// Homogeneous dimension `Q = sum_j nu_j`.
    pub fn homogeneous_dim(&self) -> u32 {
        self.q
    }

    /// Homogeneous degree `nu = 2 nu0` of the operator.
    pub fn degree(&self) -> u32 {
        2 * self.nu0
    }

    /// Exponents `2 nu0 / nu_j` appearing in the symbol.
    pub fn powers(&self) -> &[u32] {
        &self.powers
    }

    /// True when all weights are one and all coefficients agree, so that the
    /// symbol is radial whenever it is `c |xi|^nu`.
    pub fn is_isotropic(&self) -> bool {
        self.weights.iter().all(|&w| w == 1) && self.coeffs.iter().all(|&c| c == self.coeffs[0])
    }

    /// The symbol `a(xi)`.
    pub fn symbol(&self, xi: &[f64]) -> Result<f64, GradedError> {
        if xi.len() != self.dim() {
            return Err(GradedError::LengthMismatch {
                expected: self.dim(),
                got: xi.len(),
            });
        }
        Ok(self.symbol_unchecked(xi))
    }

    #[inline]
    pub(crate) fn symbol_unchecked(&self, xi: &[f64]) -> f64 {
        xi.iter()
            .zip(&self.coeffs)
            .zip(&self.powers)
            .map(|((&x, &c), &k)| c * x.powi(k as i32))
            .sum()
    }

    /// Apply the dilation `D_r` to a point.
    pub fn dilate(&self, r: f64, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.weights)
            .map(|(&xj, &w)| r.powi(w as i32) * xj)
            .collect()
    }

    /// Homogeneous quasi-norm `|x| = (sum_j |x_j|^(2 nu0/nu_j))^(1/(2 nu0))`,
    /// satisfying `|D_r x| = r |x|`.
    pub fn quasi_norm(&self, x: &[f64]) -> f64 {
        let s: f64 = x
            .iter()
            .zip(&self.powers)
            .map(|(&xj, &k)| xj.abs().powi(k as i32))
            .sum();
        s.powf(1.0 / self.degree() as f64)
    }

    /// Lebesgue volume of the unit quasi-ball `{ |x| <= 1 }`.
    ///
    /// The ball is `{ sum_j |x_j|^k_j <= 1 }`, whose volume is
    /// `2^n prod_j Gamma(1 + 1/k_j) / Gamma(1 + sum_j 1/k_j)`.
    pub fn unit_ball_volume(&self) -> f64 {
        use statrs::function::gamma::gamma;
        let mut num = 1.0;
        let mut sum_inv = 0.0;
        for &k in &self.powers {
            let inv = 1.0 / k as f64;
            num *= 2.0 * gamma(1.0 + inv);
            sum_inv += inv;
        }
        num / gamma(1.0 + sum_inv)
    }
}

/// `p_Crit(Q, gamma, nu) = 1 + 2 nu / (Q + 2 gamma)`.
pub fn critical_exponent(q: f64, gamma: f64, nu: f64) -> Result<f64, GradedError> {
    if !(q > 0.0) {
        return Err(GradedError::InvalidParameter(format!("Q = {q} must be positive")));
    }
    if !(nu >= 2.0) {
        return Err(GradedError::InvalidParameter(format!("nu = {nu} must be at least 2")));
    }
    if !(gamma > 0.0 && gamma < q / 2.0) {
        return Err(GradedError::GammaOutOfRange { gamma, half_q: q / 2.0 });
    }
    Ok(1.0 + 2.0 * nu / (q + 2.0 * gamma))
}

/// Positive root of `2 g^2 + Q g - nu Q = 0`.
pub fn gamma_tilde(q: f64, nu: f64) -> Result<f64, GradedError> {
    if !(q > 0.0 && nu > 0.0) {
        return Err(GradedError::InvalidParameter(format!(
            "gamma_tilde needs Q > 0 and nu > 0 (got Q = {q}, nu = {nu})"
        )));
    }
    // Rationalised form avoids cancellation when 8 nu Q << Q^2.
    let disc = (q * q + 8.0 * nu * q).sqrt();
    Ok(2.0 * nu * q / (q + disc))
}

/// Lifespan exponent `kappa = (1/(p-1) - (Q/(2 nu) + gamma/nu))^(-1)`, defined
/// only when the bracket is positive.
pub fn lifespan_exponent(q: f64, gamma: f64, nu: f64, p: f64) -> Option<f64> {
    let bracket = 1.0 / (p - 1.0) - (q / (2.0 * nu) + gamma / nu);
    (bracket > 0.0).then(|| 1.0 / bracket)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        })
    }
}

/// Outcome of [`classify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub q: f64,
    pub nu: f64,
    pub gamma: f64,
    pub s: f64,
    pub p: f64,
    pub p_crit: f64,
    pub gamma_tilde: f64,
    /// Lower end of the global-existence window: `p_crit` (strict) when
    /// `gamma <= gamma_tilde`, else `1 + 2 gamma / Q` (inclusive).
    pub lower_bound: f64,
    pub lower_inclusive: bool,
    /// Gagliardo-Nirenberg cap `Q / (Q - 2 s)`; absent when `Q <= 2 s`.
    pub upper_bound: Option<f64>,
    pub kappa: Option<f64>,
    pub regime: Regime,
    /// Whether `p` meets every hypothesis of the small-data global existence result.
    pub global_hypotheses_met: bool,
    pub global_range: String,
}

/// Tolerance used to call `p` critical.
const CRITICAL_TOL: f64 = 1e-12;

/// Place `p` relative to the critical exponent and check the global-existence
/// hypotheses for the given regularity `s`.
pub fn classify(gs: &GradedStructure, gamma: f64, s: f64, p: f64) -> Result<ExponentReport, GradedError> {
    let q = gs.homogeneous_dim() as f64;
    let nu = gs.degree() as f64;
    classify_raw(q, nu, gamma, s, p)
}

/// [`classify`] on bare `(Q, nu)`, for callers without a concrete structure.
pub fn classify_raw(q: f64, nu: f64, gamma: f64, s: f64, p: f64) -> Result<ExponentReport, GradedError> {
    let p_crit = critical_exponent(q, gamma, nu)?;
    if !(s > 0.0 && s <= 1.0) {
        return Err(GradedError::InvalidParameter(format!("s = {s} must lie in (0, 1]")));
    }
    if !(p > 1.0) {
        return Err(GradedError::InvalidParameter(format!("p = {p} must exceed 1")));
    }
    let gt = gamma_tilde(q, nu)?;
    let (lower_bound, lower_inclusive) = if gamma <= gt {
        (p_crit, false)
    } else {
        (1.0 + 2.0 * gamma / q, true)
    };
    let upper_bound = (q > 2.0 * s).then(|| q / (q - 2.0 * s));

    let regime = if (p - p_crit).abs() <= CRITICAL_TOL * p_crit {
        Regime::Critical
    } else if p < p_crit {
        Regime::Subcritical
    } else {
        Regime::Supercritical
    };

    let lower_ok = if lower_inclusive { p >= lower_bound } else { p > lower_bound };
    let upper_ok = upper_bound.map_or(true, |u| p <= u);

    let global_range = format!(
        "{} p {}",
        if lower_inclusive {
            format!("{lower_bound:.6} <=")
        } else {
            format!("{lower_bound:.6} <")
        },
        match upper_bound {
            Some(u) => format!("<= {u:.6}"),
            None => "< inf".to_string(),
        }
    );

    Ok(ExponentReport {
        q,
        nu,
        gamma,
        s,
        p,
        p_crit,
        gamma_tilde: gt,
        lower_bound,
        lower_inclusive,
        upper_bound,
        kappa: lifespan_exponent(q, gamma, nu, p),
        regime,
        global_hypotheses_met: lower_ok && upper_ok,
        global_range,
    })
}
