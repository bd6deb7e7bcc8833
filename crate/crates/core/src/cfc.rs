//! Constant flag curvature from the algebraic shape of the curvature tensor.
//!
//! A curvature tensor `R^l_{jk}` has the shape `ξ∧J`, meaning
//! `R^l_{jk} = ξ_j δ^l_k − ξ_k δ^l_j` for some covector `ξ`, exactly when
//! `b_{im}R^m_{jk} + b_{km}R^m_{ij} + b_{jm}R^m_{ki} = 0` for every symmetric
//! `b` (n > 2). This module tests that condition three independent ways:
//!
//! 1. sweeping a basis of symmetric tensors through the cyclic sum,
//! 2. the symmetric part of `δ^s_iR^l_{jk} + δ^s_kR^l_{ij} + δ^s_jR^l_{ki}` in `(s, l)`,
//! 3. reconstructing `ξ` from the trace of `R` and measuring `R − ξ∧J`.
//!
//! When the shape holds, `ξ_i y^i = κF²`, and constancy of `κ` over sampled
//! points stands in for the Schur step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::parallel_map;
use crate::geometry::{Pipeline, CURVATURE_ORDER};
use crate::metrics::{MetricDefinition, PhasePoint};
use crate::tensor::{dot, norm, Matrix, Tensor3};

pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-6;
/// Gap between the pass threshold and the fail threshold.
pub const VERDICT_GAP: f64 = 1e3;
/// Largest fraction of samples that may be skipped.
pub const MAX_SKIPPED_FRACTION: f64 = 0.2;

/// A symmetric `(0,2)` tensor `b_{ij}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricTensor(Matrix);

impl SymmetricTensor {
    pub fn new(b: Matrix) -> Result<Self> {
        let n = b.dim();
        for i in 0..n {
            for j in 0..i {
                if b[(i, j)] != b[(j, i)] {
                    return Err(Error::Config(format!(
                        "tensor not symmetric at ({i}, {j}): {} vs {}",
                        b[(i, j)],
                        b[(j, i)]
                    )));
                }
            }
        }
        Ok(SymmetricTensor(b))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

/// `E^{(pq)} = e_p⊗e_q + e_q⊗e_p` for `p ≤ q`.
pub fn symmetric_basis(n: usize) -> Vec<SymmetricTensor> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for p in 0..n {
        for q in p..n {
            let m = Matrix::from_fn(n, |i, j| {
                let mut v = 0.0;
                if i == p && j == q {
                    v += 1.0;
                }
                if i == q && j == p {
                    v += 1.0;
                }
                v
            });
            out.push(SymmetricTensor(m));
        }
    }
    out
}

/// `C_{ijk} = b_{im}R^m_{jk} + b_{km}R^m_{ij} + b_{jm}R^m_{ki}`.
pub fn cyclic_obstruction(b: &SymmetricTensor, r: &Tensor3) -> Tensor3 {
    let n = r.dim();
    let b = &b.0;
    let contract = |i: usize, j: usize, k: usize| -> f64 { (0..n).map(|m| b[(i, m)] * r[(m, j, k)]).sum() };
    Tensor3::from_fn(n, |i, j, k| contract(i, j, k) + contract(k, i, j) + contract(j, k, i))
}

/// Normalizing scale for residuals at a point: `F·|y|`.
pub fn point_scale(f: f64, y: &[f64]) -> f64 {
    f * norm(y)
}

fn normalizer(k: &Tensor3, scale: f64) -> f64 {
    k.max_abs().max(scale)
}

/// Max over the symmetric basis of `‖C(b)‖∞`, normalized.
pub fn basis_residual(r: &Tensor3, scale: f64) -> f64 {
    let worst = symmetric_basis(r.dim()).iter().map(|b| cyclic_obstruction(b, r).max_abs()).fold(0.0, f64::max);
    worst / normalizer(r, scale)
}

/// Symmetric part in `(s, l)` of `δ^s_iR^l_{jk} + δ^s_kR^l_{ij} + δ^s_jR^l_{ki}`, normalized.
pub fn skew_test(r: &Tensor3, scale: f64) -> f64 {
    let n = r.dim();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let t = |s: usize, l: usize, i: usize, j: usize, k: usize| {
        delta(s, i) * r[(l, j, k)] + delta(s, k) * r[(l, i, j)] + delta(s, j) * r[(l, k, i)]
    };
    let mut worst: f64 = 0.0;
    for s in 0..n {
        for l in s..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        worst = worst.max((t(s, l, i, j, k) + t(l, s, i, j, k)).abs());
                    }
                }
            }
        }
    }
    worst / normalizer(r, scale)
}

/// `(ξ∧J)^l_{jk} = ξ_j δ^l_k − ξ_k δ^l_j`.
pub fn wedge(xi: &[f64]) -> Tensor3 {
    let n = xi.len();
    Tensor3::from_fn(n, |l, j, k| {
        let mut v = 0.0;
        if l == k {
            v += xi[j];
        }
        if l == j {
            v -= xi[k];
        }
        v
    })
}

/// The unique candidate `ξ` with `K = ξ∧J`: `(n−1)ξ_i = K^j_{ij}`.
pub fn xi_from_trace(k: &Tensor3) -> Result<Vec<f64>> {
    let n = k.dim();
    if n <= 2 {
        return Err(Error::UnsupportedDimension(n));
    }
    let denom = (n - 1) as f64;
    Ok((0..n).map(|i| (0..n).map(|j| k[(j, i, j)]).sum::<f64>() / denom).collect())
}

/// `‖K − ξ∧J‖∞`, normalized.
pub fn wedge_residual(k: &Tensor3, xi: &[f64], scale: f64) -> f64 {
    k.max_abs_diff(&wedge(xi)) / normalizer(k, scale)
}

/// `κ = ξ_i y^i / F²`.
pub fn kappa_at_point(xi: &[f64], y: &[f64], f2: f64) -> f64 {
    dot(xi, y) / f2
}

/// The three algebraic residuals of one tensor and its trace covector.
#[derive(Clone, Debug, Serialize)]
pub struct ShapeResiduals {
    pub residual_basis: f64,
    pub residual_skew: f64,
    pub residual_wedge: f64,
    pub xi: Vec<f64>,
}

impl ShapeResiduals {
    pub fn of(k: &Tensor3, scale: f64) -> Result<Self> {
        let xi = xi_from_trace(k)?;
        Ok(ShapeResiduals {
            residual_basis: basis_residual(k, scale),
            residual_skew: skew_test(k, scale),
            residual_wedge: wedge_residual(k, &xi, scale),
            xi,
        })
    }

    pub fn max(&self) -> f64 {
        self.residual_basis.max(self.residual_skew).max(self.residual_wedge)
    }

    /// Pass/fail of each test at `tol`, in the order basis, skew, wedge.
    pub fn passes(&self, tol: f64) -> [bool; 3] {
        [self.residual_basis < tol, self.residual_skew < tol, self.residual_wedge < tol]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CfcPointResult {
    pub index: usize,
    pub point: PhasePoint,
    pub residual_basis: f64,
    pub residual_skew: f64,
    pub residual_wedge: f64,
    pub xi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

impl CfcPointResult {
    pub fn new(index: usize, point: PhasePoint, shape: ShapeResiduals, kappa: Option<f64>) -> Self {
        CfcPointResult {
            index,
            point,
            residual_basis: shape.residual_basis,
            residual_skew: shape.residual_skew,
            residual_wedge: shape.residual_wedge,
            xi: shape.xi,
            kappa,
        }
    }

    fn max_residual(&self) -> f64 {
        self.residual_basis.max(self.residual_skew).max(self.residual_wedge)
    }

    fn is_finite(&self) -> bool {
        self.max_residual().is_finite()
            && self.xi.iter().all(|v| v.is_finite())
            && self.kappa.is_none_or(f64::is_finite)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkippedSample {
    pub index: usize,
    pub point: PhasePoint,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    #[serde(rename = "CFC")]
    Cfc,
    #[serde(rename = "NOT_CFC")]
    NotCfc,
    #[serde(rename = "INCONCLUSIVE")]
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub residual: f64,
    /// Absolute bound on the κ spread; `None` means `residual·(1 + |κ_mean|)`.
    pub constancy: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { residual: DEFAULT_RESIDUAL_TOL, constancy: None }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ResolvedTolerances {
    pub residual_tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constancy_tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CfcReport {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_spread: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_max: Option<f64>,
    pub max_residual_basis: f64,
    pub max_residual_skew: f64,
    pub max_residual_wedge: f64,
    pub samples: usize,
    pub evaluated: usize,
    pub seed: u64,
    pub tolerances: ResolvedTolerances,
    /// Sample index that best exhibits the failure, when the verdict is not CFC.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<usize>,
    pub points: Vec<CfcPointResult>,
    pub skipped: Vec<SkippedSample>,
}

impl CfcReport {
    /// Builds the verdict from per-point results. When points carry no κ
    /// (no normalizing metric), only the residuals decide.
    pub fn assemble(
        samples: usize,
        seed: u64,
        tolerances: Tolerances,
        outcomes: Vec<std::result::Result<CfcPointResult, SkippedSample>>,
    ) -> Result<CfcReport> {
        let mut points = Vec::new();
        let mut skipped = Vec::new();
        for o in outcomes {
            match o {
                Ok(p) if p.is_finite() => points.push(p),
                Ok(p) => {
                    skipped.push(SkippedSample { index: p.index, point: p.point, reason: "non-finite residual".into() })
                }
                Err(s) => skipped.push(s),
            }
        }
        if skipped.len() as f64 > MAX_SKIPPED_FRACTION * samples as f64 || points.is_empty() {
            return Err(Error::TooManySkipped {
                skipped: skipped.len(),
                total: samples,
                reason: skipped.first().map_or_else(String::new, |s| s.reason.clone()),
            });
        }

        let max_of = |f: fn(&CfcPointResult) -> f64| points.iter().map(f).fold(0.0, f64::max);
        let max_residual_basis = max_of(|p| p.residual_basis);
        let max_residual_skew = max_of(|p| p.residual_skew);
        let max_residual_wedge = max_of(|p| p.residual_wedge);
        let worst = max_residual_basis.max(max_residual_skew).max(max_residual_wedge);

        let kappas: Option<Vec<f64>> = points.iter().map(|p| p.kappa).collect();
        let stats = kappas.map(|ks| {
            let mean = ks.iter().sum::<f64>() / ks.len() as f64;
            let min = ks.iter().copied().fold(f64::INFINITY, f64::min);
            let max = ks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (mean, max - min, min, max)
        });
        let constancy_tol =
            stats.map(|(mean, ..)| tolerances.constancy.unwrap_or(tolerances.residual * (1.0 + mean.abs())));

        let spread_ok = match (stats, constancy_tol) {
            (Some((_, spread, ..)), Some(tol)) => spread < tol,
            _ => true,
        };
        let spread_bad = match (stats, constancy_tol) {
            (Some((_, spread, ..)), Some(tol)) => spread > VERDICT_GAP * tol,
            _ => false,
        };
        let verdict = if worst < tolerances.residual && spread_ok {
            Verdict::Cfc
        } else if worst > VERDICT_GAP * tolerances.residual || spread_bad {
            Verdict::NotCfc
        } else {
            Verdict::Inconclusive
        };

        let witness = (verdict != Verdict::Cfc)
            .then(|| {
                let by = |f: &dyn Fn(&CfcPointResult) -> f64| {
                    points.iter().max_by(|a, b| f(a).total_cmp(&f(b))).map(|p| p.index)
                };
                match stats {
                    Some((mean, ..)) if worst < tolerances.residual => by(&|p| (p.kappa.unwrap_or(mean) - mean).abs()),
                    _ => by(&|p| p.max_residual()),
                }
            })
            .flatten();

        Ok(CfcReport {
            verdict,
            kappa_mean: stats.map(|s| s.0),
            kappa_spread: stats.map(|s| s.1),
            kappa_min: stats.map(|s| s.2),
            kappa_max: stats.map(|s| s.3),
            max_residual_basis,
            max_residual_skew,
            max_residual_wedge,
            samples,
            evaluated: points.len(),
            seed,
            tolerances: ResolvedTolerances { residual_tol: tolerances.residual, constancy_tol },
            witness,
            points,
            skipped,
        })
    }
}

/// Residuals, `ξ` and `κ` of a metric at one point.
pub fn check_point(def: &MetricDefinition, p: &PhasePoint) -> Result<(ShapeResiduals, f64)> {
    let pipe = Pipeline::new(def, p, CURVATURE_ORDER)?;
    let r = pipe.curvature_values();
    let f2 = pipe.metric.f2.value();
    let shape = ShapeResiduals::of(&r, point_scale(f2.sqrt(), &p.y))?;
    let kappa = kappa_at_point(&shape.xi, &p.y, f2);
    Ok((shape, kappa))
}

/// Draws `samples` phase points from the metric's domain.
pub fn sample_points(def: &MetricDefinition, samples: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).map(|_| def.sample_point(&mut rng)).collect()
}

/// Samples the metric and decides whether it has constant flag curvature.
pub fn cfc_check(
    def: &MetricDefinition,
    samples: usize,
    seed: u64,
    tolerances: Tolerances,
    workers: usize,
) -> Result<CfcReport> {
    if def.n <= 2 {
        return Err(Error::UnsupportedDimension(def.n));
    }
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    let points = sample_points(def, samples, seed);
    let outcomes = parallel_map(&points, workers, |index, p| match check_point(def, p) {
        Ok((shape, kappa)) => Ok(CfcPointResult::new(index, p.clone(), shape, Some(kappa))),
        Err(e) => Err(SkippedSample { index, point: p.clone(), reason: e.to_string() }),
    });
    CfcReport::assemble(samples, seed, tolerances, outcomes)
}
