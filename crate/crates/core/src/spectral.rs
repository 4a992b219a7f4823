//! Periodic-grid surrogate of `R^n`.
//!
//! Fields are flat row-major arrays (last axis fastest). Fourier coefficients
//! are the unnormalised DFT `u_hat(k) = sum_x u(x) e^{-i xi.x}`, so that
//! `||u||_2^2 = V / N^2 * sum |u_hat|^2` with `V` the box volume and `N` the
//! total point count.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graded::GradedStructure;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("array of length {got} does not match grid of {expected} points")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("grid dimension {grid} does not match structure dimension {structure}")]
    DimensionMismatch { grid: usize, structure: usize },
    #[error(
        "zero-mode obstruction: homogeneous norm of negative order needs a mean-zero field (|mean coefficient| = {mean:.3e})"
    )]
    ZeroModeObstruction { mean: f64 },
    #[error("Lebesgue exponent q = {0} must be at least 1")]
    InvalidExponent(f64),
    #[error("parameter window: {0}")]
    ParameterWindow(String),
    #[error("ratio undefined for the zero field")]
    ZeroField,
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Box lengths and point counts of a periodic grid centred at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    box_len: Vec<f64>,
    points: Vec<usize>,
}

/// Serialisable form of [`Grid`], validated on conversion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub box_len: Vec<f64>,
    pub points: Vec<usize>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = SpectralError;
    fn try_from(g: GridSpec) -> Result<Self, Self::Error> {
        Grid::new(g.box_len, g.points)
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            box_len: g.box_len,
            points: g.points,
        }
    }
}

impl Grid {
    pub fn new(box_len: Vec<f64>, points: Vec<usize>) -> Result<Self, SpectralError> {
        if box_len.is_empty() || box_len.len() != points.len() {
            return Err(SpectralError::InvalidGrid(format!(
                "{} box lengths and {} point counts",
                box_len.len(),
                points.len()
            )));
        }
        for (j, (&l, &n)) in box_len.iter().zip(&points).enumerate() {
            if !(l > 0.0 && l.is_finite()) {
                return Err(SpectralError::InvalidGrid(format!("box length L_{j} = {l} must be positive")));
            }
            if n < 4 || n % 2 != 0 {
                return Err(SpectralError::InvalidGrid(format!(
                    "point count N_{j} = {n} must be even and at least 4"
                )));
            }
        }
        Ok(Self { box_len, points })
    }

    /// Same box length and count on every axis.
    pub fn cube(n: usize, len: f64, points: usize) -> Result<Self, SpectralError> {
        Self::new(vec![len; n], vec![points; n])
    }

    pub fn dim(&self) -> usize {
        self.points.len()
    }

    pub fn box_len(&self) -> &[f64] {
        &self.box_len
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.box_len.iter().product()
    }

    /// Physical-space quadrature weight `prod_j L_j / N_j`.
    pub fn cell_weight(&self) -> f64 {
        self.box_len
            .iter()
            .zip(&self.points)
            .map(|(l, &n)| l / n as f64)
            .product()
    }

    /// Weight turning `sum |u_hat|^2` into `||u||_2^2`.
    pub fn dual_weight(&self) -> f64 {
        let n = self.len() as f64;
        self.volume() / (n * n)
    }

    /// Coordinates `x_i = -L/2 + i L / N` along one axis.
    pub fn coords(&self, axis: usize) -> Vec<f64> {
        let (l, n) = (self.box_len[axis], self.points[axis]);
        (0..n).map(|i| -0.5 * l + i as f64 * l / n as f64).collect()
    }

    /// Integer mode numbers in FFT order, spanning `[-N/2, N/2)`.
    pub fn mode_numbers(&self, axis: usize) -> Vec<i64> {
        let n = self.points[axis] as i64;
        (0..n).map(|i| if i < n / 2 { i } else { i - n }).collect()
    }

    /// Angular frequencies `xi = 2 pi k / L` in FFT order.
    pub fn frequencies(&self, axis: usize) -> Vec<f64> {
        let l = self.box_len[axis];
        self.mode_numbers(axis)
            .into_iter()
            .map(|k| 2.0 * std::f64::consts::PI * k as f64 / l)
            .collect()
    }

    /// Row-major strides.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for j in (0..self.dim().saturating_sub(1)).rev() {
            s[j] = s[j + 1] * self.points[j + 1];
        }
        s
    }

    /// Multi-index of a flat offset.
    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for j in (0..self.dim()).rev() {
            idx[j] = flat % self.points[j];
            flat /= self.points[j];
        }
        idx
    }

    /// Flat offset of the mode `-k` for the mode at `flat`.
    pub fn mirror(&self, flat: usize) -> usize {
        let idx = self.unravel(flat);
        let strides = self.strides();
        idx.iter()
            .zip(&self.points)
            .zip(&strides)
            .map(|((&i, &n), &s)| ((n - i) % n) * s)
            .sum()
    }

    /// Apply `f` to every grid point's coordinate vector.
    pub fn sample<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> Vec<f64> {
        let axes: Vec<Vec<f64>> = (0..self.dim()).map(|j| self.coords(j)).collect();
        let mut x = vec![0.0; self.dim()];
        (0..self.len())
            .map(|flat| {
                for (j, i) in self.unravel(flat).into_iter().enumerate() {
                    x[j] = axes[j][i];
                }
                f(&x)
            })
            .collect()
    }

    /// Symbol `a(xi)` at every mode, in FFT order.
    pub fn symbol_values(&self, gs: &GradedStructure) -> Result<Vec<f64>, SpectralError> {
        self.check_structure(gs)?;
        let freqs: Vec<Vec<f64>> = (0..self.dim()).map(|j| self.frequencies(j)).collect();
        let mut xi = vec![0.0; self.dim()];
        Ok((0..self.len())
            .map(|flat| {
                for (j, i) in self.unravel(flat).into_iter().enumerate() {
                    xi[j] = freqs[j][i];
                }
                gs.symbol_unchecked(&xi)
            })
            .collect())
    }

    /// Mask of modes kept by the 2/3 rule (`|k_j| < N_j / 3` on every axis).
    pub fn dealias_mask(&self) -> Vec<bool> {
        let modes: Vec<Vec<i64>> = (0..self.dim()).map(|j| self.mode_numbers(j)).collect();
        (0..self.len())
            .map(|flat| {
                self.unravel(flat)
                    .into_iter()
                    .enumerate()
                    .all(|(j, i)| 3 * modes[j][i].unsigned_abs() < self.points[j] as u64)
            })
            .collect()
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<(), SpectralError> {
        if got != self.len() {
            return Err(SpectralError::ShapeMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    pub(crate) fn check_structure(&self, gs: &GradedStructure) -> Result<(), SpectralError> {
        if gs.dim() != self.dim() {
            return Err(SpectralError::DimensionMismatch {
                grid: self.dim(),
                structure: gs.dim(),
            });
        }
        Ok(())
    }
}

/// Axis-wise FFT plans for one grid.
#[derive(Clone)]
pub struct Transform {
    grid: Grid,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: &Grid) -> Self {
        let mut planner = FftPlanner::new();
        let forward = grid.points.iter().map(|&n| planner.plan_fft_forward(n)).collect();
        let inverse = grid.points.iter().map(|&n| planner.plan_fft_inverse(n)).collect();
        Self {
            grid: grid.clone(),
            forward,
            inverse,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    fn apply(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        let strides = self.grid.strides();
        let total = self.grid.len();
        for (axis, plan) in plans.iter().enumerate() {
            let n = self.grid.points[axis];
            let stride = strides[axis];
            let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
            if stride == 1 {
                for line in data.chunks_exact_mut(n) {
                    plan.process_with_scratch(line, &mut scratch);
                }
                continue;
            }
            let mut buf = vec![Complex64::default(); n];
            let block = n * stride;
            for outer in (0..total).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (i, b) in buf.iter_mut().enumerate() {
                        *b = data[base + i * stride];
                    }
                    plan.process_with_scratch(&mut buf, &mut scratch);
                    for (i, b) in buf.iter().enumerate() {
                        data[base + i * stride] = *b;
                    }
                }
            }
        }
    }

    pub fn forward(&self, field: &[f64]) -> Result<Vec<Complex64>, SpectralError> {
        self.grid.check_len(field.len())?;
        let mut data: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.apply(&mut data, &self.forward);
        Ok(data)
    }

    pub fn forward_complex(&self, data: &mut [Complex64]) -> Result<(), SpectralError> {
        self.grid.check_len(data.len())?;
        self.apply(data, &self.forward);
        Ok(())
    }

    /// Normalised inverse, in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) -> Result<(), SpectralError> {
        self.grid.check_len(data.len())?;
        self.apply(data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
        Ok(())
    }

    /// Normalised inverse returning the full complex field.
    pub fn inverse_complex(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>, SpectralError> {
        self.grid.check_len(coeffs.len())?;
        let mut data = coeffs.to_vec();
        self.apply(&mut data, &self.inverse);
        let scale = 1.0 / self.grid.len() as f64;
        for v in &mut data {
            *v *= scale;
        }
        Ok(data)
    }

    /// Normalised inverse keeping the real part.
    pub fn inverse(&self, coeffs: &[Complex64]) -> Result<Vec<f64>, SpectralError> {
        Ok(self.inverse_complex(coeffs)?.into_iter().map(|c| c.re).collect())
    }

    /// `R^power` applied through the symbol, returning a real field.
    pub fn apply_symbol_power(
        &self,
        field: &[f64],
        gs: &GradedStructure,
        power: f64,
    ) -> Result<Vec<f64>, SpectralError> {
        let mut c = self.forward(field)?;
        let a = self.grid.symbol_values(gs)?;
        for (v, &ai) in c.iter_mut().zip(&a) {
            *v *= if ai == 0.0 { if power == 0.0 { 1.0 } else { 0.0 } } else { ai.powf(power) };
        }
        self.inverse(&c)
    }
}

/// Fourier coefficients of `(u, u_t)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub uhat: Vec<Complex64>,
    pub vhat: Vec<Complex64>,
    pub t: f64,
}

impl SpectralState {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            uhat: vec![Complex64::default(); grid.len()],
            vhat: vec![Complex64::default(); grid.len()],
            t: 0.0,
        }
    }

    pub fn from_fields(tr: &Transform, u: &[f64], v: &[f64]) -> Result<Self, SpectralError> {
        Ok(Self {
            uhat: tr.forward(u)?,
            vhat: tr.forward(v)?,
            t: 0.0,
        })
    }

    pub fn is_finite(&self) -> bool {
        self.uhat.iter().chain(&self.vhat).all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|c(-k) - conj(c(k))|` relative to the largest coefficient.
    pub fn hermitian_defect(&self, grid: &Grid) -> f64 {
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for arr in [&self.uhat, &self.vhat] {
            for (i, c) in arr.iter().enumerate() {
                let m = arr[grid.mirror(i)];
                worst = worst.max((m - c.conj()).norm());
                scale = scale.max(c.norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }
}

/// `L^2` norm from Fourier coefficients.
pub fn l2_norm_coeffs(coeffs: &[Complex64], grid: &Grid) -> Result<f64, SpectralError> {
    grid.check_len(coeffs.len())?;
    Ok((coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>() * grid.dual_weight()).sqrt())
}

/// Relative size of the zero-mode coefficient above which a field counts as
/// having a mean.
pub const ZERO_MODE_TOL: f64 = 1e-12;

/// Sobolev norm with multiplier `a(xi)^(s/nu)` (homogeneous) or `(1 + a(xi))^(s/nu)`.
pub fn sobolev_norm(
    coeffs: &[Complex64],
    grid: &Grid,
    gs: &GradedStructure,
    s: f64,
    homogeneous: bool,
) -> Result<f64, SpectralError> {
    grid.check_len(coeffs.len())?;
    let a = grid.symbol_values(gs)?;
    sobolev_norm_with_symbol(coeffs, grid, &a, gs.degree() as f64, s, homogeneous)
}

/// [`sobolev_norm`] with a precomputed symbol array.
pub fn sobolev_norm_with_symbol(
    coeffs: &[Complex64],
    grid: &Grid,
    symbol: &[f64],
    nu: f64,
    s: f64,
    homogeneous: bool,
) -> Result<f64, SpectralError> {
    grid.check_len(coeffs.len())?;
    grid.check_len(symbol.len())?;
    if s == 0.0 {
        return l2_norm_coeffs(coeffs, grid);
    }
    let e = 2.0 * s / nu;
    if homogeneous && s < 0.0 {
        let total: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let mean = coeffs[0].norm();
        if mean > ZERO_MODE_TOL * total {
            return Err(SpectralError::ZeroModeObstruction { mean });
        }
    }
    let sum: f64 = coeffs
        .iter()
        .zip(symbol)
        .map(|(c, &a)| {
            let m = if homogeneous {
                if a == 0.0 {
                    0.0
                } else {
                    a.powf(e)
                }
            } else {
                (1.0 + a).powf(e)
            };
            m * c.norm_sqr()
        })
        .sum();
    Ok((sum * grid.dual_weight()).sqrt())
}

/// Grid quadrature of `(sum |u|^q w)^(1/q)`; `q = inf` gives the max norm.
pub fn lp_norm(field: &[f64], grid: &Grid, q: f64) -> Result<f64, SpectralError> {
    grid.check_len(field.len())?;
    if !(q >= 1.0) {
        return Err(SpectralError::InvalidExponent(q));
    }
    if q.is_infinite() {
        return Ok(field.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    let w = grid.cell_weight();
    let sum: f64 = if q == 2.0 {
        field.iter().map(|v| v * v).sum()
    } else {
        field.iter().map(|v| v.abs().powf(q)).sum()
    };
    Ok((sum * w).powf(1.0 / q))
}

/// Interpolation exponent `theta = (1/2 - 1/q) Q / s` of the Gagliardo–Nirenberg
/// inequality with `r = 2`, after checking the admissible window.
pub fn gn_theta(q_dim: f64, s: f64, q: f64) -> Result<f64, SpectralError> {
    if !(s > 0.0) {
        return Err(SpectralError::ParameterWindow(format!("s = {s} must be positive")));
    }
    if !(q >= 2.0) {
        return Err(SpectralError::ParameterWindow(format!("q = {q} must be at least 2")));
    }
    if q_dim > 2.0 * s {
        let cap = 2.0 * q_dim / (q_dim - 2.0 * s);
        if q > cap {
            return Err(SpectralError::ParameterWindow(format!(
                "q = {q} exceeds the cap 2Q/(Q-2s) = {cap}"
            )));
        }
    }
    let theta = (0.5 - 1.0 / q) * q_dim / s;
    if !(0.0..=1.0).contains(&theta) {
        return Err(SpectralError::ParameterWindow(format!("theta = {theta} outside [0, 1]")));
    }
    Ok(theta)
}

/// `||u||_q / (||u||_{H^s hom}^theta ||u||_2^(1 - theta))`.
pub fn gn_ratio(
    field: &[f64],
    tr: &Transform,
    gs: &GradedStructure,
    q: f64,
    s: f64,
) -> Result<f64, SpectralError> {
    let grid = tr.grid();
    let theta = gn_theta(gs.homogeneous_dim() as f64, s, q)?;
    let l2 = lp_norm(field, grid, 2.0)?;
    if l2 == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    let lq = lp_norm(field, grid, q)?;
    let hs = if theta == 0.0 {
        1.0
    } else {
        sobolev_norm(&tr.forward(field)?, grid, gs, s, true)?
    };
    Ok(lq / (hs.powf(theta) * l2.powf(1.0 - theta)))
}

/// Real, mean-zero field whose Fourier support is `0 < max_j |k_j| <= band`.
///
/// Coefficients are drawn per integer mode in a fixed order that does not
/// depend on the point counts, so the same seed yields the same continuum
/// field on any grid that resolves the band.
pub fn random_band_limited(
    tr: &Transform,
    band: usize,
    seed: u64,
) -> Result<Vec<f64>, SpectralError> {
    let grid = tr.grid();
    for (j, &n) in grid.points.iter().enumerate() {
        if 2 * band >= n {
            return Err(SpectralError::InvalidGrid(format!(
                "band {band} not resolved by N_{j} = {n}"
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let strides = grid.strides();
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let b = band as i64;
    let dims = grid.dim();
    let mut k = vec![-b; dims];
    loop {
        let (re, im): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if k.iter().any(|&v| v != 0) {
            let flat: usize = k
                .iter()
                .zip(&grid.points)
                .zip(&strides)
                .map(|((&kj, &n), &s)| (kj.rem_euclid(n as i64) as usize) * s)
                .sum();
            coeffs[flat] = Complex64::new(re, im);
        }
        // odometer over [-b, b]^n
        let mut j = dims;
        loop {
            if j == 0 {
                let field = tr.inverse(&coeffs)?;
                let scale = grid.len() as f64;
                return Ok(field.into_iter().map(|v| v * scale).collect());
            }
            j -= 1;
            if k[j] < b {
                k[j] += 1;
                break;
            }
            k[j] = -b;
        }
    }
}

const SNAPSHOT_MAGIC: &[u8; 4] = b"GWF1";

/// Binary snapshot: magic, `u64` dims, box lengths, `u64` counts, then
/// little-endian `f64` row-major data.
pub fn write_snapshot(path: &Path, grid: &Grid, field: &[f64]) -> Result<(), SpectralError> {
    grid.check_len(field.len())?;
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(SNAPSHOT_MAGIC)?;
    w.write_all(&(grid.dim() as u64).to_le_bytes())?;
    for l in &grid.box_len {
        w.write_all(&l.to_le_bytes())?;
    }
    for &n in &grid.points {
        w.write_all(&(n as u64).to_le_bytes())?;
    }
    for v in field {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(Grid, Vec<f64>), SpectralError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != SNAPSHOT_MAGIC {
        return Err(SpectralError::Format("bad magic".into()));
    }
    let mut b8 = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8], SpectralError> {
        r.read_exact(&mut b8)?;
        Ok(b8)
    };
    let dims = u64::from_le_bytes(next(&mut r)?) as usize;
    if dims == 0 || dims > 16 {
        return Err(SpectralError::Format(format!("implausible dimension {dims}")));
    }
    let box_len = (0..dims)
        .map(|_| next(&mut r).map(f64::from_le_bytes))
        .collect::<Result<Vec<_>, _>>()?;
    let points = (0..dims)
        .map(|_| next(&mut r).map(|b| u64::from_le_bytes(b) as usize))
        .collect::<Result<Vec<_>, _>>()?;
    let grid = Grid::new(box_len, points)?;
    let data = (0..grid.len())
        .map(|_| next(&mut r).map(f64::from_le_bytes))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((grid, data))
}

/// CSV of a 1-D field (`x,u`) or 2-D field (`x,y,u`).
pub fn write_csv_slice(path: &Path, grid: &Grid, field: &[f64]) -> Result<(), SpectralError> {
    grid.check_len(field.len())?;
    let mut w = csv::Writer::from_path(path)?;
    match grid.dim() {
        1 => {
            w.write_record(["x", "u"])?;
            for (x, u) in grid.coords(0).iter().zip(field) {
                w.write_record([x.to_string(), u.to_string()])?;
            }
        }
        2 => {
            w.write_record(["x", "y", "u"])?;
            let (xs, ys) = (grid.coords(0), grid.coords(1));
            for (flat, u) in field.iter().enumerate() {
                let (i, j) = (flat / ys.len(), flat % ys.len());
                w.write_record([xs[i].to_string(), ys[j].to_string(), u.to_string()])?;
            }
        }
        d => {
            return Err(SpectralError::InvalidGrid(format!(
                "CSV slices support 1-D and 2-D grids, got {d}-D"
            )))
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::PI;

    fn grid2() -> Grid {
        Grid::new(vec![2.0 * PI, 4.0], vec![16, 8]).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(vec![1.0], vec![6]).is_ok());
        assert!(Grid::new(vec![1.0], vec![5]).is_err());
        assert!(Grid::new(vec![1.0], vec![2]).is_err());
        assert!(Grid::new(vec![0.0], vec![8]).is_err());
        assert!(Grid::new(vec![1.0, 1.0], vec![8]).is_err());
        let g = grid2();
        assert_eq!(g.len(), 128);
        assert!((g.cell_weight() - 2.0 * PI / 16.0 * 0.5).abs() < 1e-15);
        assert_eq!(g.mode_numbers(1), vec![0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn constant_field_has_only_zero_mode() {
        let g = grid2();
        let tr = Transform::new(&g);
        let c = tr.forward(&vec![1.0; g.len()]).unwrap();
        assert!((c[0].re - g.len() as f64).abs() < 1e-12);
        assert!(c[1..].iter().all(|v| v.norm() < 1e-12));
    }

    #[test]
    fn cosine_gives_two_symmetric_modes() {
        let g = Grid::new(vec![3.0], vec![32]).unwrap();
        let tr = Transform::new(&g);
        let f = g.sample(|x| (2.0 * PI * x[0] / 3.0).cos());
        let c = tr.forward(&f).unwrap();
        assert!((c[1].norm() - 16.0).abs() < 1e-12);
        assert!((c[31].norm() - 16.0).abs() < 1e-12);
        let rest: f64 = c.iter().enumerate().filter(|(i, _)| *i != 1 && *i != 31).map(|(_, v)| v.norm()).sum();
        assert!(rest < 1e-11);
    }

    #[test]
    fn shape_mismatch() {
        let tr = Transform::new(&grid2());
        assert!(matches!(tr.forward(&[1.0; 7]), Err(SpectralError::ShapeMismatch { expected: 128, got: 7 })));
    }

    #[test]
    fn pure_mode_sobolev() {
        // a(xi) = xi1^4 + xi2^2 with xi = (1, 1) -> a = 2; s = nu gives factor 2
        let gs = GradedStructure::new(vec![1, 2], vec![1.0, 1.0], 2).unwrap();
        let g = Grid::new(vec![2.0 * PI, 2.0 * PI], vec![8, 8]).unwrap();
        let tr = Transform::new(&g);
        let f = g.sample(|x| (x[0] + x[1]).cos());
        let c = tr.forward(&f).unwrap();
        let l2 = sobolev_norm(&c, &g, &gs, 0.0, true).unwrap();
        let h = sobolev_norm(&c, &g, &gs, 4.0, true).unwrap();
        assert!((h - 2.0 * l2).abs() < 1e-12 * l2);
        assert!((l2 - lp_norm(&f, &g, 2.0).unwrap()).abs() < 1e-12);
        // closed form: ||cos||_2^2 = V / 2
        assert!((l2 - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn negative_order_needs_mean_zero() {
        let gs = GradedStructure::isotropic(1, 1);
        let g = Grid::new(vec![10.0], vec![32]).unwrap();
        let tr = Transform::new(&g);
        let f = g.sample(|x| 1.0 + (2.0 * PI * x[0] / 10.0).sin());
        let c = tr.forward(&f).unwrap();
        assert!(matches!(
            sobolev_norm(&c, &g, &gs, -0.5, true),
            Err(SpectralError::ZeroModeObstruction { .. })
        ));
        assert!(sobolev_norm(&c, &g, &gs, -0.5, false).is_ok());
    }

    #[test]
    fn negative_order_matches_direct_sum() {
        let gs = GradedStructure::new(vec![1, 2], vec![1.5, 0.7], 2).unwrap();
        let g = Grid::new(vec![7.0, 5.0], vec![12, 10]).unwrap();
        let tr = Transform::new(&g);
        let f = random_band_limited(&tr, 3, 11).unwrap();
        let c = tr.forward(&f).unwrap();
        let gamma = 0.4;
        let got = sobolev_norm(&c, &g, &gs, -gamma, true).unwrap();
        // direct summation over integer modes
        let mut sum = 0.0;
        for (flat, v) in c.iter().enumerate() {
            let idx = g.unravel(flat);
            let k0 = g.mode_numbers(0)[idx[0]] as f64;
            let k1 = g.mode_numbers(1)[idx[1]] as f64;
            let xi0 = 2.0 * PI * k0 / 7.0;
            let xi1 = 2.0 * PI * k1 / 5.0;
            let a = 1.5 * xi0.powi(4) + 0.7 * xi1.powi(2);
            if a > 0.0 {
                sum += a.powf(-2.0 * gamma / 4.0) * v.norm_sqr();
            }
        }
        let direct = (sum * 35.0 / (120.0f64 * 120.0)).sqrt();
        assert!((got - direct).abs() < 1e-12 * direct);
    }

    #[test]
    fn lp_norm_cases() {
        let g = Grid::new(vec![3.0, 2.0], vec![8, 8]).unwrap();
        let f = vec![-1.5; g.len()];
        for q in [1.0, 2.0, 3.5] {
            let expect = 1.5 * 6f64.powf(1.0 / q);
            assert!((lp_norm(&f, &g, q).unwrap() - expect).abs() < 1e-12);
        }
        assert!(matches!(lp_norm(&f, &g, 0.5), Err(SpectralError::InvalidExponent(_))));

        // smooth bump, q = 1 against its closed-form integral sqrt(pi)
        let g = Grid::new(vec![20.0], vec![256]).unwrap();
        let f = g.sample(|x| (-x[0] * x[0]).exp());
        assert!((lp_norm(&f, &g, 1.0).unwrap() - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gn_ratio_cases() {
        let gs = GradedStructure::isotropic(2, 1);
        let g = Grid::cube(2, 2.0 * PI, 32).unwrap();
        let tr = Transform::new(&g);
        let f = random_band_limited(&tr, 4, 3).unwrap();
        assert_eq!(gn_ratio(&f, &tr, &gs, 2.0, 1.0).unwrap(), 1.0);
        assert!(matches!(gn_ratio(&vec![0.0; g.len()], &tr, &gs, 4.0, 1.0), Err(SpectralError::ZeroField)));
        // Q = 2, s = 0.5: cap 2Q/(Q-2s) = 4
        assert!(matches!(gn_ratio(&f, &tr, &gs, 5.0, 0.5), Err(SpectralError::ParameterWindow(_))));
        assert!(gn_ratio(&f, &tr, &gs, 4.0, 0.5).is_ok());

        // single mode cos(x): ||u||_4 = (3 V / 8)^(1/4), ||u||_2 = (V/2)^(1/2), Hs = ||u||_2
        let f = g.sample(|x| x[0].cos());
        let v = 4.0 * PI * PI;
        let expect = (3.0 * v / 8.0).powf(0.25) / (v / 2.0).sqrt();
        let r = gn_ratio(&f, &tr, &gs, 4.0, 1.0).unwrap();
        assert!((r - expect).abs() < 1e-12);
    }

    #[test]
    fn band_limited_field_is_resolution_independent() {
        let g1 = Grid::cube(2, 5.0, 16).unwrap();
        let g2 = Grid::cube(2, 5.0, 32).unwrap();
        let (t1, t2) = (Transform::new(&g1), Transform::new(&g2));
        let f1 = random_band_limited(&t1, 5, 42).unwrap();
        let f2 = random_band_limited(&t2, 5, 42).unwrap();
        // every other point of the fine grid coincides with the coarse grid
        for i in 0..16 {
            for j in 0..16 {
                let a = f1[i * 16 + j];
                let b = f2[(2 * i) * 32 + 2 * j];
                assert!((a - b).abs() < 1e-10);
            }
        }
        let mean: f64 = f1.iter().sum::<f64>() / f1.len() as f64;
        assert!(mean.abs() < 1e-12);
        assert!(random_band_limited(&t1, 8, 1).is_err());
    }

    #[test]
    fn snapshot_and_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let g = grid2();
        let f: Vec<f64> = (0..g.len()).map(|i| (i as f64).sin()).collect();
        let p = dir.path().join("f.bin");
        write_snapshot(&p, &g, &f).unwrap();
        let (g2, f2) = read_snapshot(&p).unwrap();
        assert_eq!(g, g2);
        assert_eq!(f, f2);
        let bytes = std::fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"GWF1");
        assert_eq!(bytes.len(), 4 + 8 + 2 * 8 + 2 * 8 + 128 * 8);

        let c = dir.path().join("f.csv");
        write_csv_slice(&c, &g, &f).unwrap();
        let text = std::fs::read_to_string(&c).unwrap();
        assert_eq!(text.lines().count(), 129);
        assert!(text.starts_with("x,y,u"));
        let g3 = Grid::cube(3, 1.0, 4).unwrap();
        assert!(write_csv_slice(&c, &g3, &vec![0.0; 64]).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn roundtrip_and_parseval(seed in 0u64..10_000, nx in 2usize..6, ny in 2usize..5) {
            let g = Grid::new(vec![3.0, 1.7], vec![2 * nx, 2 * ny]).unwrap();
            let tr = Transform::new(&g);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let f: Vec<f64> = (0..g.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let c = tr.forward(&f).unwrap();
            let back = tr.inverse_complex(&c).unwrap();
            let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for (a, b) in f.iter().zip(&back) {
                prop_assert!((a - b.re).abs() <= 1e-12 * scale);
                prop_assert!(b.im.abs() <= 1e-12 * scale);
            }
            let phys = lp_norm(&f, &g, 2.0).unwrap().powi(2);
            let spec = l2_norm_coeffs(&c, &g).unwrap().powi(2);
            prop_assert!((phys - spec).abs() <= 1e-10 * phys);
            let st = SpectralState { uhat: c.clone(), vhat: c, t: 0.0 };
            prop_assert!(st.hermitian_defect(&g) < 1e-13);
        }

        #[test]
        fn norms_scale_linearly(seed in 0u64..1000, amp in -5.0f64..5.0) {
            let gs = GradedStructure::new(vec![1, 2], vec![1.0, 2.0], 2).unwrap();
            let g = Grid::new(vec![4.0, 6.0], vec![12, 12]).unwrap();
            let tr = Transform::new(&g);
            let f = random_band_limited(&tr, 4, seed).unwrap();
            let h: Vec<f64> = f.iter().map(|v| amp * v).collect();
            let (cf, ch) = (tr.forward(&f).unwrap(), tr.forward(&h).unwrap());
            for s in [-0.5, 0.0, 0.7] {
                let a = sobolev_norm(&cf, &g, &gs, s, true).unwrap();
                let b = sobolev_norm(&ch, &g, &gs, s, true).unwrap();
                prop_assert!((b - amp.abs() * a).abs() <= 1e-12 * (1.0 + b));
            }
            for q in [1.0, 3.0] {
                let a = lp_norm(&f, &g, q).unwrap();
                let b = lp_norm(&h, &g, q).unwrap();
                prop_assert!((b - amp.abs() * a).abs() <= 1e-12 * (1.0 + b));
            }
        }

        #[test]
        fn inhomogeneous_norms_increase_with_order(seed in 0u64..1000, s1 in -2.0f64..2.0, ds in 0.0f64..2.0) {
            let gs = GradedStructure::isotropic(1, 2);
            let g = Grid::new(vec![9.0], vec![64]).unwrap();
            let tr = Transform::new(&g);
            let f = random_band_limited(&tr, 20, seed).unwrap();
            let c = tr.forward(&f).unwrap();
            let a = sobolev_norm(&c, &g, &gs, s1, false).unwrap();
            let b = sobolev_norm(&c, &g, &gs, s1 + ds, false).unwrap();
            prop_assert!(a <= b * (1.0 + 1e-14));
        }
    }
}
