use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{ExperimentError, ExperimentKind, SuiteReport};
use crate::graded::GradedStructure;
use crate::spectral::{gn_ratio, gn_theta, random_band_limited, Grid, Transform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnCase {
    pub structure: GradedStructure,
    pub q: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnProbeSpec {
    pub cases: Vec<GnCase>,
    /// Fourier band of the random fields.
    pub band: usize,
    /// Box length along every axis.
    pub box_len: f64,
    /// Points per axis of the coarse grid; the fine grid doubles it.
    pub points: usize,
    pub fields: usize,
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tolerance: f64,
}

fn default_tol() -> f64 {
    0.1
}

impl GnProbeSpec {
    /// `Q = 2`, `s = 1` with `q = 2` and `q = 4`; 128 fields of band 6 on
    /// `[0, 2 pi)^2` at 32 and 64 points per axis.
    pub fn reference(seed: u64) -> Self {
        let gs = GradedStructure::isotropic(2, 1);
        Self {
            cases: vec![
                GnCase {
                    structure: gs.clone(),
                    q: 2.0,
                    s: 1.0,
                },
                GnCase {
                    structure: gs,
                    q: 4.0,
                    s: 1.0,
                },
            ],
            band: 6,
            box_len: 2.0 * std::f64::consts::PI,
            points: 32,
            fields: 128,
            seed,
            tolerance: default_tol(),
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Spec(m));
        if self.cases.is_empty() {
            return bad("gn_probe: no cases".into());
        }
        if self.fields < 100 {
            return bad(format!("gn_probe: need at least 100 fields, got {}", self.fields));
        }
        if !(self.box_len > 0.0) {
            return bad("gn_probe: box length must be positive".into());
        }
        if 2 * self.band >= self.points {
            return bad(format!("gn_probe: band {} not resolved by {} points", self.band, self.points));
        }
        for c in &self.cases {
            gn_theta(c.structure.homogeneous_dim() as f64, c.s, c.q)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GnProbeRow {
    pub case: usize,
    pub q: f64,
    pub s: f64,
    pub theta: f64,
    pub max_coarse: f64,
    pub max_fine: f64,
    pub rel_change: f64,
    pub passed: bool,
}

/// One seed per field, drawn from a stream keyed by the spec's seed.
fn field_seeds(spec: &GnProbeSpec) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.fields).map(|_| rng.random()).collect()
}

fn max_ratio(case: &GnCase, spec: &GnProbeSpec, points: usize) -> Result<f64, ExperimentError> {
    let n = case.structure.dim();
    let grid = Grid::new(vec![spec.box_len; n], vec![points; n])?;
    let tr = Transform::new(&grid);
    let ratios: Vec<f64> = field_seeds(spec)
        .into_par_iter()
        .map(|seed| {
            let f = random_band_limited(&tr, spec.band, seed)?;
            gn_ratio(&f, &tr, &case.structure, case.q, case.s)
        })
        .collect::<Result<_, _>>()?;
    Ok(ratios.into_iter().fold(0.0, f64::max))
}

pub fn gn_probe_suite(spec: &GnProbeSpec) -> Result<(Vec<GnProbeRow>, SuiteReport), ExperimentError> {
    spec.validate()?;
    let mut report = SuiteReport::new(
        ExperimentKind::GnProbe,
        &["case", "q", "s", "theta", "max_coarse", "max_fine", "rel_change", "passed"],
    );
    let mut rows = Vec::new();
    for (i, case) in spec.cases.iter().enumerate() {
        let theta = gn_theta(case.structure.homogeneous_dim() as f64, case.s, case.q)?;
        let a = max_ratio(case, spec, spec.points)?;
        let b = max_ratio(case, spec, 2 * spec.points)?;
        let rel_change = (b - a).abs() / a;
        let passed = a.is_finite() && b.is_finite() && rel_change < spec.tolerance;
        report.row(&[&i, &case.q, &case.s, &theta, &a, &b, &rel_change, &passed]);
        report.point(format!("case{i}"), spec.points as f64, a);
        report.point(format!("case{i}"), 2.0 * spec.points as f64, b);
        report.check(
            format!("gn max ratio stable (Q={}, s={}, q={})", case.structure.homogeneous_dim(), case.s, case.q),
            passed,
            format!("max {a:.6} -> {b:.6}, relative change {rel_change:.2e} (tol {})", spec.tolerance),
        );
        if case.q == 2.0 {
            report.check(
                format!("gn ratio identically one at q=2 (case {i})"),
                a == 1.0 && b == 1.0,
                format!("max ratios {a} and {b}"),
            );
        }
        rows.push(GnProbeRow {
            case: i,
            q: case.q,
            s: case.s,
            theta,
            max_coarse: a,
            max_fine: b,
            rel_change,
            passed,
        });
    }
    report.summary = serde_json::to_value(&rows)?;
    Ok((rows, report))
}
