//! Least-squares line fits in log–log coordinates.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("length mismatch: {x} abscissae, {y} ordinates")]
    LengthMismatch { x: usize, y: usize },
    #[error("value {value} at index {index} is not positive; cannot take a logarithm")]
    NonPositive { index: usize, value: f64 },
    #[error("abscissae are all equal; slope undefined")]
    Degenerate,
}

/// Regression summary, optionally compared against a predicted slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_residual: f64,
    pub samples: usize,
    pub theory: Option<f64>,
    /// `|slope - theory| / |theory|`, or the absolute gap when `theory == 0`.
    pub rel_gap: Option<f64>,
}

impl FitResult {
    pub fn with_theory(mut self, theory: f64) -> Self {
        self.theory = Some(theory);
        let gap = (self.slope - theory).abs();
        self.rel_gap = Some(if theory != 0.0 { gap / theory.abs() } else { gap });
        self
    }

    pub fn abs_gap(&self) -> Option<f64> {
        self.theory.map(|t| (self.slope - t).abs())
    }

    pub fn passes_rel(&self, tol: f64) -> bool {
        self.rel_gap.is_some_and(|g| g <= tol)
    }

    pub fn passes_abs(&self, tol: f64) -> bool {
        self.abs_gap().is_some_and(|g| g <= tol)
    }
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<FitResult, FitError> {
    if x.len() != y.len() {
        return Err(FitError::LengthMismatch { x: x.len(), y: y.len() });
    }
    if x.len() < 2 {
        return Err(FitError::TooFewSamples { need: 2, got: x.len() });
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(FitError::Degenerate);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut max_residual = 0.0f64;
    for (a, b) in x.iter().zip(y) {
        let r = b - (slope * a + intercept);
        ss_res += r * r;
        max_residual = max_residual.max(r.abs());
    }
    let ss_tot: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        max_residual,
        samples: x.len(),
        theory: None,
        rel_gap: None,
    })
}

fn logs(v: &[f64]) -> Result<Vec<f64>, FitError> {
    v.iter()
        .enumerate()
        .map(|(index, &value)| {
            if value > 0.0 && value.is_finite() {
                Ok(value.ln())
            } else {
                Err(FitError::NonPositive { index, value })
            }
        })
        .collect()
}

/// Fit `ln y` against `ln x`.
pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<FitResult, FitError> {
    linear_fit(&logs(x)?, &logs(y)?)
}

/// Minimum sample count accepted by [`fit_decay`].
pub const MIN_DECAY_SAMPLES: usize = 5;

/// Fit `ln value` against `ln(1 + t)`.
pub fn fit_decay(times: &[f64], values: &[f64]) -> Result<FitResult, FitError> {
    if times.len() < MIN_DECAY_SAMPLES {
        return Err(FitError::TooFewSamples {
            need: MIN_DECAY_SAMPLES,
            got: times.len(),
        });
    }
    let x: Vec<f64> = times.iter().map(|t| t.ln_1p()).collect();
    linear_fit(&x, &logs(values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn times() -> Vec<f64> {
        (0..30).map(|i| 100.0 * 100f64.powf(i as f64 / 29.0)).collect()
    }

    #[test]
    fn exact_power_law() {
        let t = times();
        let v: Vec<f64> = t.iter().map(|t| (1.0 + t).powf(-0.75)).collect();
        let f = fit_decay(&t, &v).unwrap().with_theory(-0.75);
        assert!((f.slope + 0.75).abs() < 1e-12);
        assert!(f.rel_gap.unwrap() < 1e-11);
        assert!(f.r_squared > 1.0 - 1e-12);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let t = times();
        let v: Vec<f64> = t
            .iter()
            .map(|t| (1.0 + t).powf(-0.5) * (1.0 + 0.01 * rng.random_range(-1.0..1.0)))
            .collect();
        let f = fit_decay(&t, &v).unwrap();
        assert!((f.slope + 0.5).abs() < 0.02);
    }

    #[test]
    fn constant_values() {
        let t = times();
        let f = fit_decay(&t, &vec![3.0; t.len()]).unwrap().with_theory(0.0);
        assert!(f.slope.abs() < 1e-15);
        assert!(f.passes_abs(1e-15));
    }

    #[test]
    fn rejects_bad_input() {
        let t = times();
        let mut v = vec![1.0; t.len()];
        v[4] = 0.0;
        assert_eq!(
            fit_decay(&t, &v).unwrap_err(),
            FitError::NonPositive { index: 4, value: 0.0 }
        );
        assert!(matches!(
            fit_decay(&t[..4], &v[..4]),
            Err(FitError::TooFewSamples { .. })
        ));
        assert_eq!(linear_fit(&[1.0, 1.0], &[1.0, 2.0]).unwrap_err(), FitError::Degenerate);
    }
}
