//! Projective change of spray `G̃ = G + P·y` and the curvature transfer test.
//!
//! For a 1-homogeneous factor `P`, with `δ` the horizontal derivative of the
//! original connection, set `η_i = P ∂̇_iP − δ_iP`. Then
//!
//! ```text
//! R̃^l_{jk} = R^l_{jk} + (η_j δ^l_k − η_k δ^l_j) − (∂̇_jη_k − ∂̇_kη_j) y^l
//! ```
//!
//! and `∂̇_jη_k − ∂̇_kη_j = δ_j∂̇_kP − δ_k∂̇_jP` (the Hamel tensor). Starting
//! from constant flag curvature `R = ξ∧J`, the new curvature keeps the
//! decomposable shape exactly when the Hamel tensor vanishes.

use serde::Serialize;

use crate::cfc::{
    kappa_at_point, point_scale, sample_points, wedge, CfcPointResult, CfcReport, ShapeResiduals, SkippedSample,
    Tolerances, Verdict,
};
use crate::error::{Error, Result};
use crate::exec::parallel_map;
use crate::expr::Expr;
use crate::geometry::{horizontal_derivative, MetricJets, Pipeline, CURVATURE_ORDER};
use crate::jets::Jet;
use crate::metrics::{Domain, MetricDefinition, PhasePoint};
use crate::scalar::Scalar;
use crate::tensor::{norm, Matrix, Tensor3};

/// Relative tolerance for `y·∂̇P = P`.
pub const FACTOR_HOMOGENEITY_TOL: f64 = 1e-8;
/// Agreement expected between the transfer formula and the direct pipeline.
pub const TRANSPORT_TOL: f64 = 1e-7;
/// Agreement expected between `d_Jη` and the Hamel tensor.
pub const IDENTITY_GAP_TOL: f64 = 1e-9;

/// A projective factor `P(x, y)`, positively 1-homogeneous in `y`.
#[derive(Clone, Debug)]
pub enum ProjectiveFactor {
    Expr {
        expr: Expr,
        source: String,
    },
    /// `P = F_funk / 2`, defined on the unit ball.
    HalfFunkNorm(MetricDefinition),
}

impl ProjectiveFactor {
    pub const HALF_FUNK_NORM: &'static str = "half-funk-norm";

    /// Accepts the keyword `half-funk-norm` or an expression in `x1..xn, y1..yn`.
    pub fn parse(source: &str, n: usize) -> Result<Self> {
        if source.trim() == Self::HALF_FUNK_NORM {
            return Ok(ProjectiveFactor::HalfFunkNorm(MetricDefinition::funk(n)?));
        }
        Ok(ProjectiveFactor::Expr { expr: Expr::parse(source, n)?, source: source.trim().to_string() })
    }

    pub fn label(&self) -> String {
        match self {
            ProjectiveFactor::Expr { source, .. } => source.clone(),
            ProjectiveFactor::HalfFunkNorm(_) => Self::HALF_FUNK_NORM.to_string(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ProjectiveFactor::Expr { expr, .. } => expr.dim(),
            ProjectiveFactor::HalfFunkNorm(d) => d.n,
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            ProjectiveFactor::Expr { .. } => Domain::Whole,
            ProjectiveFactor::HalfFunkNorm(_) => Domain::UnitBall,
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        match self {
            ProjectiveFactor::Expr { expr, .. } => Ok(expr.eval(x, y)?),
            ProjectiveFactor::HalfFunkNorm(d) => Ok(d.norm(x, y)?.scale(0.5)),
        }
    }
}

/// `G̃^i = G^i + P y^i`.
pub fn projective_spray<S: Scalar>(spray: &[S], p: &S, y: &[S]) -> Vec<S> {
    spray.iter().zip(y).map(|(g, yi)| g.clone() + p.clone() * yi.clone()).collect()
}

/// `∂̇_iP` for each `i`.
pub fn vertical_gradient(p: &Jet, n: usize) -> Result<Vec<Jet>> {
    (0..n).map(|i| Ok(p.d(n + i)?)).collect()
}

/// `η_i = P ∂̇_iP − δ_iP`, horizontal derivative taken with `connection`.
pub fn eta_form(p: &Jet, connection: &Matrix<Jet>) -> Result<Vec<Jet>> {
    let n = connection.dim();
    let dp = vertical_gradient(p, n)?;
    (0..n).map(|i| Ok(p * &dp[i] - horizontal_derivative(p, i, connection)?)).collect()
}

/// `H_{jk} = δ_j∂̇_kP − δ_k∂̇_jP`.
pub fn hamel_tensor(p: &Jet, connection: &Matrix<Jet>) -> Result<Matrix> {
    let n = connection.dim();
    let dp = vertical_gradient(p, n)?;
    let d = Matrix::try_from_fn(n, |j, k| horizontal_derivative(&dp[k], j, connection).map(|v| v.value()))?;
    Ok(Matrix::from_fn(n, |j, k| d[(j, k)] - d[(k, j)]))
}

/// `(d_Jη)_{jk} = ∂̇_jη_k − ∂̇_kη_j`.
pub fn vertical_curl(eta: &[Jet]) -> Result<Matrix> {
    let n = eta.len();
    let d = Matrix::try_from_fn(n, |j, k| eta[k].d(n + j).map(|v| v.value()))?;
    Ok(Matrix::from_fn(n, |j, k| d[(j, k)] - d[(k, j)]))
}

/// Scale used for the Hamel and curl residuals: `max(|P|/|y|, 1)`.
pub fn factor_scale(p: f64, y: &[f64]) -> f64 {
    (p.abs() / norm(y)).max(1.0)
}

fn upper_max_abs(m: &Matrix) -> f64 {
    let n = m.dim();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            worst = worst.max(m[(j, k)].abs());
        }
    }
    worst
}

/// `max_{j<k} |H_{jk}|`, normalized.
pub fn hamel_residual(p: &Jet, connection: &Matrix<Jet>, y: &[f64]) -> Result<f64> {
    Ok(upper_max_abs(&hamel_tensor(p, connection)?) / factor_scale(p.value(), y))
}

/// `max_{j<k} |∂̇_jη_k − ∂̇_kη_j|` over `scale`.
pub fn djeta_residual(eta: &[Jet], scale: f64) -> Result<f64> {
    Ok(upper_max_abs(&vertical_curl(eta)?) / scale)
}

/// `R̃^l_{jk} = R^l_{jk} + (η_jδ^l_k − η_kδ^l_j) − (d_Jη)_{jk} y^l`.
pub fn curvature_transform(r: &Tensor3, eta: &[f64], curl: &Matrix, y: &[f64]) -> Tensor3 {
    let w = wedge(eta);
    Tensor3::from_fn(r.dim(), |l, j, k| r[(l, j, k)] + w[(l, j, k)] - curl[(j, k)] * y[l])
}

/// Everything the transfer test computes at one point.
#[derive(Clone, Debug)]
pub struct ProjectivePoint {
    pub factor: f64,
    pub eta: Vec<f64>,
    pub curl: Matrix,
    pub hamel: Matrix,
    pub base_curvature: Tensor3,
    pub transformed_spray: Vec<f64>,
    /// `R̃` from the transfer formula.
    pub transformed_curvature: Tensor3,
    /// `R̃` from running the pipeline on `G̃` directly.
    pub direct_curvature: Tensor3,
    pub base_f: f64,
    pub factor_homogeneity: f64,
}

impl ProjectivePoint {
    pub fn compute(def: &MetricDefinition, factor: &ProjectiveFactor, p: &PhasePoint) -> Result<Self> {
        if factor.dim() != def.n {
            return Err(Error::InvalidFactor(format!(
                "factor is {}-dimensional, metric is {}-dimensional",
                factor.dim(),
                def.n
            )));
        }
        let metric = MetricJets::new(def, p, CURVATURE_ORDER)?;
        let base = Pipeline::from_spray(metric.clone(), metric.spray()?)?;
        let pj = factor.eval(&metric.x, &metric.y)?;
        if !pj.value().is_finite() {
            return Err(Error::NonFinite("projective factor"));
        }
        let n = def.n;

        let dp = vertical_gradient(&pj, n)?;
        let euler: f64 = dp.iter().zip(&p.y).map(|(d, y)| d.value() * y).sum();
        let factor_homogeneity = (euler - pj.value()).abs() / pj.value().abs().max(euler.abs()).max(f64::MIN_POSITIVE);

        let eta = eta_form(&pj, &base.connection)?;
        let curl = vertical_curl(&eta)?;
        let hamel = hamel_tensor(&pj, &base.connection)?;
        let base_curvature = base.curvature_values();
        let eta_values: Vec<f64> = eta.iter().map(Jet::value).collect();
        let transformed_curvature = curvature_transform(&base_curvature, &eta_values, &curl, &p.y);

        let tilde = projective_spray(&base.spray, &pj, &metric.y);
        let transformed_spray = tilde.iter().map(Jet::value).collect();
        let direct = Pipeline::from_spray(metric, tilde)?;

        Ok(ProjectivePoint {
            factor: pj.value(),
            eta: eta_values,
            curl,
            hamel,
            base_curvature,
            transformed_spray,
            transformed_curvature,
            direct_curvature: direct.curvature_values(),
            base_f: base.metric.f2.value().sqrt(),
            factor_homogeneity,
        })
    }

    pub fn hamel_residual(&self, y: &[f64]) -> f64 {
        upper_max_abs(&self.hamel) / factor_scale(self.factor, y)
    }

    pub fn djeta_residual(&self, y: &[f64]) -> f64 {
        upper_max_abs(&self.curl) / factor_scale(self.factor, y)
    }

    /// `max |d_Jη − H|`, on the same scale as the two residuals.
    pub fn identity_gap(&self, y: &[f64]) -> f64 {
        let n = self.curl.dim();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((self.curl[(j, k)] - self.hamel[(j, k)]).abs());
            }
        }
        worst / factor_scale(self.factor, y)
    }

    /// Transfer formula against the direct pipeline, normalized like the shape residuals.
    pub fn crosscheck_residual(&self, y: &[f64]) -> f64 {
        let scale = self.direct_curvature.max_abs().max(point_scale(self.base_f, y));
        self.transformed_curvature.max_abs_diff(&self.direct_curvature) / scale
    }

    /// `‖R̃ − (ξ+η)∧J + d_Jη⊗y‖∞` for a base curvature of shape `ξ∧J`.
    pub fn structure_residual(&self, xi: &[f64], y: &[f64]) -> f64 {
        let shifted: Vec<f64> = xi.iter().zip(&self.eta).map(|(a, b)| a + b).collect();
        let w = wedge(&shifted);
        let predicted = Tensor3::from_fn(xi.len(), |l, j, k| w[(l, j, k)] - self.curl[(j, k)] * y[l]);
        let scale = self.transformed_curvature.max_abs().max(point_scale(self.base_f, y));
        self.transformed_curvature.max_abs_diff(&predicted) / scale
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BeltramiPointResult {
    pub index: usize,
    pub point: PhasePoint,
    pub factor: f64,
    pub eta: Vec<f64>,
    pub hamel_residual: f64,
    pub djeta_residual: f64,
    pub hamel_djeta_gap: f64,
    pub rrt_crosscheck_residual: f64,
    pub rrt1_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaseSummary {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_spread: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BeltramiReport {
    pub factor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_metric: Option<String>,
    pub hamel_residual_max: f64,
    pub djeta_residual_max: f64,
    /// `max |d_Jη − H|`; the two residuals measure the same tensor.
    pub hamel_djeta_gap_max: f64,
    pub rrt_crosscheck_residual: f64,
    /// Deviation from `R̃ = (ξ+η)∧J − d_Jη⊗y` given the base shape `ξ∧J`.
    pub rrt1_residual: f64,
    /// Hamel residual below the residual tolerance at every point.
    pub hamel_holds: bool,
    pub base: BaseSummary,
    pub transformed_cfc: CfcReport,
    pub points: Vec<BeltramiPointResult>,
}

/// Runs the transfer test for a CFC base metric and a projective factor.
///
/// The spray `G̃` alone does not fix a normalization of `F̃`, so transformed
/// flag curvature values need `target`: a metric whose energy is used as
/// `F̃²` in `κ̃ = ξ̃·y/F̃²`. Without it the transformed verdict rests on the
/// shape residuals alone.
pub fn beltrami_check(
    def: &MetricDefinition,
    factor: &ProjectiveFactor,
    target: Option<&MetricDefinition>,
    samples: usize,
    seed: u64,
    tolerances: Tolerances,
    workers: usize,
) -> Result<BeltramiReport> {
    if def.n <= 2 {
        return Err(Error::UnsupportedDimension(def.n));
    }
    if samples == 0 {
        return Err(Error::Config("samples must be at least 1".into()));
    }
    if factor.dim() != def.n {
        return Err(Error::InvalidFactor(format!(
            "factor is {}-dimensional, metric is {}-dimensional",
            factor.dim(),
            def.n
        )));
    }
    if let Some(t) = target {
        if t.n != def.n {
            return Err(Error::Config(format!("target metric is {}-dimensional, expected {}", t.n, def.n)));
        }
    }

    let mut domain = def.domain.intersect(factor.domain());
    if let Some(t) = target {
        domain = domain.intersect(t.domain);
    }
    let sampling = MetricDefinition { domain, ..def.clone() };
    let points = sample_points(&sampling, samples, seed);

    struct Evaluated {
        base: CfcPointResult,
        transformed: CfcPointResult,
        row: BeltramiPointResult,
        homogeneity: f64,
    }

    let outcomes = parallel_map(&points, workers, |index, p| -> std::result::Result<Evaluated, SkippedSample> {
        let skip = |e: Error| SkippedSample { index, point: p.clone(), reason: e.to_string() };
        let pp = ProjectivePoint::compute(def, factor, p).map_err(skip)?;
        let f2 = pp.base_f * pp.base_f;
        let scale = point_scale(pp.base_f, &p.y);
        let base_shape = ShapeResiduals::of(&pp.base_curvature, scale).map_err(skip)?;
        let base_kappa = kappa_at_point(&base_shape.xi, &p.y, f2);
        let rrt1 = pp.structure_residual(&base_shape.xi, &p.y);

        let (tscale, tkappa_energy) = match target {
            Some(t) => {
                let tf = t.finsler_value(p).map_err(skip)?;
                (point_scale(tf, &p.y), Some(tf * tf))
            }
            None => (scale, None),
        };
        let tshape = ShapeResiduals::of(&pp.transformed_curvature, tscale).map_err(skip)?;
        let tkappa = tkappa_energy.map(|e| kappa_at_point(&tshape.xi, &p.y, e));

        let row = BeltramiPointResult {
            index,
            point: p.clone(),
            factor: pp.factor,
            eta: pp.eta.clone(),
            hamel_residual: pp.hamel_residual(&p.y),
            djeta_residual: pp.djeta_residual(&p.y),
            hamel_djeta_gap: pp.identity_gap(&p.y),
            rrt_crosscheck_residual: pp.crosscheck_residual(&p.y),
            rrt1_residual: rrt1,
        };
        let all_finite = [
            row.factor,
            row.hamel_residual,
            row.djeta_residual,
            row.hamel_djeta_gap,
            row.rrt_crosscheck_residual,
            rrt1,
        ]
        .iter()
        .chain(&row.eta)
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(skip(Error::NonFinite("projective residuals")));
        }
        Ok(Evaluated {
            base: CfcPointResult::new(index, p.clone(), base_shape, Some(base_kappa)),
            transformed: CfcPointResult::new(index, p.clone(), tshape, tkappa),
            row,
            homogeneity: pp.factor_homogeneity,
        })
    });

    let mut base_outcomes = Vec::with_capacity(samples);
    let mut transformed_outcomes = Vec::with_capacity(samples);
    let mut rows = Vec::new();
    for o in outcomes {
        match o {
            Ok(ev) => {
                if ev.homogeneity > FACTOR_HOMOGENEITY_TOL {
                    return Err(Error::InvalidFactor(format!(
                        "'{}' is not 1-homogeneous in y: relative Euler residual {:e} at x = {:?}, y = {:?}",
                        factor.label(),
                        ev.homogeneity,
                        ev.row.point.x,
                        ev.row.point.y
                    )));
                }
                base_outcomes.push(Ok(ev.base));
                transformed_outcomes.push(Ok(ev.transformed));
                rows.push(ev.row);
            }
            Err(s) => {
                base_outcomes.push(Err(s.clone()));
                transformed_outcomes.push(Err(s));
            }
        }
    }

    let base = CfcReport::assemble(samples, seed, tolerances, base_outcomes)?;
    if base.verdict != Verdict::Cfc {
        let verdict = serde_json::to_value(base.verdict).ok().and_then(|v| v.as_str().map(str::to_owned));
        return Err(Error::Precondition(format!(
            "base metric must have constant flag curvature; cfc check verdict is {}",
            verdict.unwrap_or_default()
        )));
    }
    let transformed_cfc = CfcReport::assemble(samples, seed, tolerances, transformed_outcomes)?;

    let max_of = |f: fn(&BeltramiPointResult) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let hamel_residual_max = max_of(|r| r.hamel_residual);
    let djeta_residual_max = max_of(|r| r.djeta_residual);

    Ok(BeltramiReport {
        factor: factor.label(),
        target_metric: target.map(|t| t.label.clone()),
        hamel_residual_max,
        djeta_residual_max,
        hamel_djeta_gap_max: max_of(|r| r.hamel_djeta_gap),
        rrt_crosscheck_residual: max_of(|r| r.rrt_crosscheck_residual),
        rrt1_residual: max_of(|r| r.rrt1_residual),
        hamel_holds: hamel_residual_max < tolerances.residual,
        base: BaseSummary { verdict: base.verdict, kappa_mean: base.kappa_mean, kappa_spread: base.kappa_spread },
        transformed_cfc,
        points: rows,
    })
}
