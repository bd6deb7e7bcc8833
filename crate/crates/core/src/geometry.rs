//! Metric tensor, geodesic spray, nonlinear connection, curvature and Jacobi
//! endomorphism of a Finsler metric, all carried as jets so every derivative
//! downstream of `F²` is exact.
//!
//! Conventions, with `δ_j = ∂/∂x^j − N^m_j ∂/∂y^m`:
//!
//! * `g_ij = ½ ∂²F²/∂y^i∂y^j`
//! * `G^i = ¼ g^{il} (y^m ∂²F²/∂y^l∂x^m − ∂F²/∂x^l)`
//! * `N^i_j = ∂G^i/∂y^j`
//! * `R^m_{jk} = δ_k N^m_j − δ_j N^m_k` (coefficient of `∂/∂y^m` in `R(δ_j, δ_k)`)
//! * `Φ^l_k = R^l_{jk} y^j`
//!
//! With this sign the round sphere has positive flag curvature.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::seed_jets;
use crate::jets::{Jet, MultiIndex};
use crate::linalg::invert;
use crate::metrics::{MetricDefinition, PhasePoint};
use crate::tensor::{dot, max_abs, Matrix, Tensor3};

/// Jet order of `F²` needed for `g`.
pub const METRIC_ORDER: usize = 2;
/// Jet order of `F²` needed for the spray coefficients.
pub const SPRAY_ORDER: usize = 2;
/// Jet order of `F²` needed for the nonlinear connection.
pub const CONNECTION_ORDER: usize = 3;
/// Jet order of `F²` needed for the curvature tensor.
pub const CURVATURE_ORDER: usize = 4;
/// Jet order of `F²` needed for derivatives of the curvature.
pub const FULL_ORDER: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct MetricData {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "F2")]
    pub f2: f64,
    pub g: Matrix,
    pub g_inv: Matrix,
    pub det_g: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SprayData {
    /// Spray coefficients `G^i`.
    #[serde(rename = "G")]
    pub spray: Vec<f64>,
    /// `N^i_j`, row `i`, column `j`.
    #[serde(rename = "N")]
    pub connection: Matrix,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvatureData {
    /// `R^i_{jk}` at `[i][j][k]`.
    #[serde(rename = "R")]
    pub r: Tensor3,
    /// `Φ^l_k` at `[l][k]`.
    #[serde(rename = "Phi")]
    pub phi: Matrix,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub xi: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

/// Coordinate jets and the metric tensor at one phase point.
#[derive(Clone, Debug)]
pub struct MetricJets {
    pub n: usize,
    pub order: usize,
    pub point: PhasePoint,
    pub x: Vec<Jet>,
    pub y: Vec<Jet>,
    pub f2: Jet,
    pub g: Matrix<Jet>,
    pub g_inv: Matrix<Jet>,
    pub det_g: f64,
}

impl MetricJets {
    /// Seeds the point to `order` and computes `F²`, `g` and `g⁻¹`.
    pub fn new(def: &MetricDefinition, p: &PhasePoint, order: usize) -> Result<Self> {
        def.admissible(p)?;
        let n = def.n;
        let (x, y) = seed_jets(&p.x, &p.y, order)?;
        let f2 = def.energy(&x, &y)?;
        if !(f2.value() > 0.0) || !f2.value().is_finite() {
            return Err(Error::Inadmissible(format!("F² = {} is not positive", f2.value())));
        }
        let g = Matrix::try_from_fn(n, |i, j| {
            Ok::<_, Error>(f2.partial(&MultiIndex::pair(2 * n, n + i, n + j))?.scale(0.5))
        })?;
        let plain = g.map(|j| j.value());
        if !plain.is_finite() {
            return Err(Error::NonFinite("metric tensor"));
        }
        let scale = plain.max_abs();
        let threshold = 1e-12 * scale.powi(n as i32);
        let inv = invert(&g.rows()).map_err(|_| Error::DegenerateMetric { det: 0.0, threshold })?;
        let det_g = inv.det.value();
        if !(det_g.abs() >= threshold) {
            return Err(Error::DegenerateMetric { det: det_g.abs(), threshold });
        }
        if !is_positive_definite(&plain) {
            return Err(Error::IndefiniteMetric);
        }
        Ok(MetricJets { n, order, point: p.clone(), x, y, f2, g, g_inv: Matrix::from_rows(&inv.inverse), det_g })
    }

    pub fn data(&self) -> MetricData {
        let f2 = self.f2.value();
        MetricData {
            f: f2.sqrt(),
            f2,
            g: self.g.map(|j| j.value()),
            g_inv: self.g_inv.map(|j| j.value()),
            det_g: self.det_g,
        }
    }

    fn y_slot(&self, i: usize) -> usize {
        self.n + i
    }

    /// Spray coefficients `G^i` as jets of order `order − 2`.
    pub fn spray(&self) -> Result<Vec<Jet>> {
        let n = self.n;
        let dim = 2 * n;
        let mut rhs = Vec::with_capacity(n);
        for l in 0..n {
            let mut acc = -self.f2.d(l)?;
            for m in 0..n {
                let mixed = self.f2.partial(&MultiIndex::pair(dim, self.y_slot(l), m))?;
                acc = acc + &self.y[m] * &mixed;
            }
            rhs.push(acc);
        }
        Ok((0..n)
            .map(|i| {
                let mut acc = &self.g_inv[(i, 0)] * &rhs[0];
                for l in 1..n {
                    acc = acc + &self.g_inv[(i, l)] * &rhs[l];
                }
                acc.scale(0.25)
            })
            .collect())
    }
}

fn is_positive_definite(g: &Matrix) -> bool {
    let n = g.dim();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = g[(i, i)] - s;
                if !(d > 0.0) {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (g[(i, j)] - s) / l[j][j];
            }
        }
    }
    true
}

/// `N^i_j = ∂G^i/∂y^j`.
pub fn connection_jets(spray: &[Jet]) -> Result<Matrix<Jet>> {
    let n = spray.len();
    Ok(Matrix::try_from_fn(n, |i, j| spray[i].d(n + j))?)
}

/// `δ_j f = ∂f/∂x^j − N^m_j ∂f/∂y^m`.
pub fn horizontal_derivative(field: &Jet, j: usize, connection: &Matrix<Jet>) -> Result<Jet> {
    let n = connection.dim();
    let mut acc = field.d(j)?;
    for m in 0..n {
        acc = acc - &connection[(m, j)] * &field.d(n + m)?;
    }
    Ok(acc)
}

/// `R^m_{jk} = δ_k N^m_j − δ_j N^m_k`.
pub fn curvature_jets(connection: &Matrix<Jet>) -> Result<Tensor3<Jet>> {
    let n = connection.dim();
    // dn[(m, j, k)] = δ_k N^m_j
    let dn = Tensor3::try_from_fn(n, |m, j, k| horizontal_derivative(&connection[(m, j)], k, connection))?;
    Ok(Tensor3::from_fn(n, |m, j, k| &dn[(m, j, k)] - &dn[(m, k, j)]))
}

/// `Φ^l_k = R^l_{jk} y^j`.
pub fn jacobi_jets(r: &Tensor3<Jet>, y: &[Jet]) -> Matrix<Jet> {
    let n = r.dim();
    Matrix::from_fn(n, |l, k| {
        let mut acc = &r[(l, 0, k)] * &y[0];
        for j in 1..n {
            acc = acc + &r[(l, j, k)] * &y[j];
        }
        acc
    })
}

/// `Φ^l_k = R^l_{jk} y^j` over plain values.
pub fn jacobi_endomorphism(r: &Tensor3, y: &[f64]) -> Matrix {
    let n = r.dim();
    Matrix::from_fn(n, |l, k| (0..n).map(|j| r[(l, j, k)] * y[j]).sum())
}

/// The full pipeline at one point.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub metric: MetricJets,
    pub spray: Vec<Jet>,
    pub connection: Matrix<Jet>,
    pub curvature: Tensor3<Jet>,
    pub jacobi: Matrix<Jet>,
}

impl Pipeline {
    /// Runs the pipeline with `F²` seeded to `order` (at least 4).
    pub fn new(def: &MetricDefinition, p: &PhasePoint, order: usize) -> Result<Self> {
        let metric = MetricJets::new(def, p, order)?;
        let spray = metric.spray()?;
        Self::from_spray(metric, spray)
    }

    /// Runs the connection and curvature stages on given spray coefficients.
    pub fn from_spray(metric: MetricJets, spray: Vec<Jet>) -> Result<Self> {
        let connection = connection_jets(&spray)?;
        let curvature = curvature_jets(&connection)?;
        let jacobi = jacobi_jets(&curvature, &metric.y);
        let pipeline = Pipeline { metric, spray, connection, curvature, jacobi };
        if !pipeline.curvature_values().is_finite() {
            return Err(Error::NonFinite("curvature tensor"));
        }
        Ok(pipeline)
    }

    pub fn n(&self) -> usize {
        self.metric.n
    }

    pub fn y(&self) -> &[f64] {
        &self.metric.point.y
    }

    pub fn spray_values(&self) -> Vec<f64> {
        self.spray.iter().map(Jet::value).collect()
    }

    pub fn connection_values(&self) -> Matrix {
        self.connection.map(Jet::value)
    }

    pub fn curvature_values(&self) -> Tensor3 {
        self.curvature.map(Jet::value)
    }

    pub fn jacobi_values(&self) -> Matrix {
        self.jacobi.map(Jet::value)
    }

    pub fn spray_data(&self) -> SprayData {
        SprayData { spray: self.spray_values(), connection: self.connection_values() }
    }

    pub fn curvature_data(&self) -> CurvatureData {
        CurvatureData { r: self.curvature_values(), phi: self.jacobi_values(), xi: None, kappa: None }
    }

    /// `max_j |δ_j F²| / F²`.
    pub fn dh_energy_residual(&self) -> Result<f64> {
        let f2 = self.metric.f2.value();
        let mut worst: f64 = 0.0;
        for j in 0..self.n() {
            worst = worst.max(horizontal_derivative(&self.metric.f2, j, &self.connection)?.value().abs());
        }
        Ok(worst / f2)
    }

    /// `‖R − (∂Φ^l_k/∂y^j − ∂Φ^l_j/∂y^k)/3‖∞ / max(‖R‖∞, 1)`; needs order 5.
    pub fn recovery_residual(&self) -> Result<f64> {
        let n = self.n();
        let dphi = Tensor3::try_from_fn(n, |l, k, j| Ok::<_, Error>(self.jacobi[(l, k)].d(n + j)?.value()))?;
        let r = self.curvature_values();
        let recovered = Tensor3::from_fn(n, |l, j, k| (dphi[(l, k, j)] - dphi[(l, j, k)]) / 3.0);
        Ok(r.max_abs_diff(&recovered) / r.max_abs().max(1.0))
    }

    /// Euler residuals `‖y·∂̇Q − hQ‖∞ / max(‖Q‖∞, F^h)`; needs order 5.
    pub fn homogeneity(&self) -> Result<Homogeneity> {
        let n = self.n();
        let y = self.y().to_vec();
        let f = self.metric.f2.value().sqrt();
        let euler = |q: &Jet| -> Result<f64> {
            let mut acc = 0.0;
            for s in 0..n {
                acc += y[s] * q.d(n + s)?.value();
            }
            Ok(acc)
        };
        let residual = |items: Vec<&Jet>, h: i32| -> Result<f64> {
            let mut diff: f64 = 0.0;
            let mut size: f64 = 0.0;
            for q in items {
                diff = diff.max((euler(q)? - h as f64 * q.value()).abs());
                size = size.max(q.value().abs());
            }
            Ok(diff / size.max(f.powi(h)))
        };
        let norm = self.metric.f2.sqrt()?;
        Ok(Homogeneity {
            f: residual(vec![&norm], 1)?,
            spray: residual(self.spray.iter().collect(), 2)?,
            connection: residual(self.connection.iter().collect(), 1)?,
            curvature: residual(self.curvature.iter().collect(), 1)?,
            jacobi: residual(self.jacobi.iter().collect(), 2)?,
        })
    }

    /// `max_l |Φ^l_k y^k|`.
    pub fn jacobi_flagpole_residual(&self) -> f64 {
        let phi = self.jacobi_values();
        max_abs(&phi.mul_vec(self.y()))
    }

    /// `‖N y − 2G‖∞ / max(‖G‖∞, F²)`.
    pub fn connection_euler_residual(&self) -> f64 {
        let g = self.spray_values();
        let ny = self.connection_values().mul_vec(self.y());
        let diff = ny.iter().zip(&g).fold(0.0f64, |m, (a, b)| m.max((a - 2.0 * b).abs()));
        diff / max_abs(&g).max(self.metric.f2.value())
    }

    /// Flag curvature of the flag spanned by `y` and `transverse`.
    pub fn flag_curvature(&self, transverse: &[f64]) -> Result<f64> {
        let g = self.metric.g.map(Jet::value);
        let phi = self.jacobi_values();
        let y = self.y();
        let f2 = self.metric.f2.value();
        let gxx = g.bilinear(transverse, transverse);
        let gyx = g.bilinear(y, transverse);
        let denominator = f2 * gxx - gyx * gyx;
        let threshold = 1e-12 * f2 * gxx.abs();
        if !(denominator > threshold) {
            return Err(Error::DegenerateFlag { denominator, threshold });
        }
        let phi_x = phi.mul_vec(transverse);
        let numerator = dot(&g.mul_vec(transverse), &phi_x);
        Ok(numerator / denominator)
    }
}

#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct Homogeneity {
    #[serde(rename = "F")]
    pub f: f64,
    #[serde(rename = "G")]
    pub spray: f64,
    #[serde(rename = "N")]
    pub connection: f64,
    #[serde(rename = "R")]
    pub curvature: f64,
    #[serde(rename = "Phi")]
    pub jacobi: f64,
}

impl Homogeneity {
    pub fn max(&self) -> f64 {
        [self.f, self.spray, self.connection, self.curvature, self.jacobi].into_iter().fold(0.0, f64::max)
    }
}

/// Residuals of the identities every Finsler spray satisfies.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct IdentityResiduals {
    /// `max_j |δ_j F²| / F²`
    pub dh_energy: f64,
    /// `3R = [J, Φ]` recovery residual.
    pub recovery: f64,
    pub homogeneity: Homogeneity,
    /// `max |Φ^l_k y^k|`
    pub jacobi_flagpole: f64,
    /// `max |R^i_{jk} + R^i_{kj}|`
    pub antisymmetry: f64,
    /// `N y = 2G` residual.
    pub connection_euler: f64,
}

/// Tolerances the identity suite is held to.
pub struct IdentityTolerances {
    pub dh_energy: f64,
    pub recovery: f64,
    pub homogeneity: f64,
    pub jacobi_flagpole: f64,
    pub connection_euler: f64,
}

pub const IDENTITY_TOLERANCES: IdentityTolerances = IdentityTolerances {
    dh_energy: 1e-9,
    recovery: 1e-7,
    homogeneity: 1e-8,
    jacobi_flagpole: 1e-9,
    connection_euler: 1e-10,
};

impl IdentityResiduals {
    pub fn passes(&self) -> bool {
        let t = &IDENTITY_TOLERANCES;
        self.dh_energy < t.dh_energy
            && self.recovery < t.recovery
            && self.homogeneity.max() < t.homogeneity
            && self.jacobi_flagpole < t.jacobi_flagpole
            && self.antisymmetry == 0.0
            && self.connection_euler < t.connection_euler
    }
}

/// Everything the pipeline knows at one point.
#[derive(Clone, Debug, Serialize)]
pub struct PointAnalysis {
    pub point: PhasePoint,
    pub metric: MetricData,
    pub spray: SprayData,
    pub curvature: CurvatureData,
    pub identities: IdentityResiduals,
}

pub fn analyze_point(def: &MetricDefinition, p: &PhasePoint) -> Result<PointAnalysis> {
    let pipe = Pipeline::new(def, p, FULL_ORDER)?;
    let r = pipe.curvature_values();
    let n = def.n;
    let mut antisymmetry: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                antisymmetry = antisymmetry.max((r[(i, j, k)] + r[(i, k, j)]).abs());
            }
        }
    }
    let identities = IdentityResiduals {
        dh_energy: pipe.dh_energy_residual()?,
        recovery: pipe.recovery_residual()?,
        homogeneity: pipe.homogeneity()?,
        jacobi_flagpole: pipe.jacobi_flagpole_residual(),
        antisymmetry,
        connection_euler: pipe.connection_euler_residual(),
    };
    Ok(PointAnalysis {
        point: p.clone(),
        metric: pipe.metric.data(),
        spray: pipe.spray_data(),
        curvature: pipe.curvature_data(),
        identities,
    })
}

pub fn metric_tensor(def: &MetricDefinition, p: &PhasePoint) -> Result<MetricData> {
    Ok(MetricJets::new(def, p, METRIC_ORDER)?.data())
}

pub fn spray_coefficients(def: &MetricDefinition, p: &PhasePoint) -> Result<Vec<f64>> {
    let m = MetricJets::new(def, p, SPRAY_ORDER)?;
    Ok(m.spray()?.iter().map(Jet::value).collect())
}

pub fn nonlinear_connection(def: &MetricDefinition, p: &PhasePoint) -> Result<Matrix> {
    let m = MetricJets::new(def, p, CONNECTION_ORDER)?;
    Ok(connection_jets(&m.spray()?)?.map(Jet::value))
}

pub fn curvature_tensor(def: &MetricDefinition, p: &PhasePoint) -> Result<Tensor3> {
    Ok(Pipeline::new(def, p, CURVATURE_ORDER)?.curvature_values())
}

pub fn curvature_recovery_residual(def: &MetricDefinition, p: &PhasePoint) -> Result<f64> {
    Pipeline::new(def, p, FULL_ORDER)?.recovery_residual()
}

pub fn flag_curvature(def: &MetricDefinition, p: &PhasePoint, transverse: &[f64]) -> Result<f64> {
    if transverse.len() != def.n {
        return Err(Error::Inadmissible(format!(
            "flag direction has dimension {}, metric has n = {}",
            transverse.len(),
            def.n
        )));
    }
    Pipeline::new(def, p, CURVATURE_ORDER)?.flag_curvature(transverse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::JetError;

    fn pt(x: &[f64], y: &[f64]) -> PhasePoint {
        PhasePoint::new(x.to_vec(), y.to_vec())
    }

    #[test]
    fn euclidean_is_flat() {
        let e = MetricDefinition::euclidean(3).unwrap();
        let p = pt(&[0.3, -0.5, 0.1], &[1.0, 0.4, -0.7]);
        let m = metric_tensor(&e, &p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((m.g[(i, j)] - expect).abs() < 1e-15);
            }
        }
        let g = spray_coefficients(&e, &p).unwrap();
        assert!(max_abs(&g) < 1e-15);
        assert!(nonlinear_connection(&e, &p).unwrap().max_abs() < 1e-15);
        assert!(curvature_tensor(&e, &p).unwrap().max_abs() < 1e-14);
        assert!(flag_curvature(&e, &p, &[0.0, 1.0, 0.0]).unwrap().abs() < 1e-13);
        assert!(curvature_recovery_residual(&e, &p).unwrap() < 1e-14);
    }

    #[test]
    fn sphere_at_chart_center() {
        let s = MetricDefinition::sphere_stereographic(3).unwrap();
        let p = pt(&[0.0; 3], &[0.6, -0.3, 1.2]);
        let m = metric_tensor(&s, &p).unwrap();
        for i in 0..3 {
            assert!((m.g[(i, i)] - 4.0).abs() < 1e-14);
        }
        assert!((m.det_g - 64.0).abs() < 1e-12);
    }

    #[test]
    fn metric_tensor_invariants() {
        let funk = MetricDefinition::funk(3).unwrap();
        let p = pt(&[0.2, -0.4, 0.3], &[0.9, 0.2, -1.1]);
        let mj = MetricJets::new(&funk, &p, 3).unwrap();
        let m = mj.data();
        let prod = m.g.matmul(&m.g_inv);
        assert!(prod.max_abs() > 0.0);
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - e).abs() < 1e-10);
                assert_eq!(m.g[(i, j)], m.g[(j, i)]);
            }
        }
        let gy = m.g.mul_vec(&p.y);
        for i in 0..3 {
            let half_grad = 0.5 * mj.f2.d(3 + i).unwrap().value();
            assert!((gy[i] - half_grad).abs() < 1e-10);
        }
        assert!((m.g.bilinear(&p.y, &p.y) - m.f2).abs() < 1e-10);
    }

    #[test]
    fn spray_needs_order_two() {
        let e = MetricDefinition::euclidean(3).unwrap();
        let p = pt(&[0.0; 3], &[1.0, 0.0, 0.0]);
        let m = MetricJets::new(&e, &p, 1);
        assert!(matches!(m, Err(Error::Jet(JetError::OrderExhausted { .. }))));
        let m = MetricJets::new(&e, &p, 3).unwrap();
        let spray = m.spray().unwrap();
        let conn = connection_jets(&spray).unwrap();
        assert!(matches!(curvature_jets(&conn), Err(Error::Jet(JetError::OrderExhausted { .. }))));
    }

    #[test]
    fn flagpole_flag_is_degenerate() {
        let s = MetricDefinition::sphere_stereographic(3).unwrap();
        let p = pt(&[0.1, 0.2, -0.1], &[0.5, 0.5, 1.0]);
        let err = flag_curvature(&s, &p, &[0.5, 0.5, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFlag { .. }));
        let err = flag_curvature(&s, &p, &[1.0, 1.0, 2.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateFlag { .. }));
    }

    #[test]
    fn horizontal_derivative_of_y_independent_function() {
        let f = MetricDefinition::funk(3).unwrap();
        let p = pt(&[0.2, 0.1, -0.3], &[0.4, 1.0, 0.3]);
        let m = MetricJets::new(&f, &p, 4).unwrap();
        let conn = connection_jets(&m.spray().unwrap()).unwrap();
        let h = m.x[0].sin() * &m.x[1];
        for j in 0..3 {
            let dh = horizontal_derivative(&h, j, &conn).unwrap();
            let d = h.d(j).unwrap();
            assert_eq!(dh.value(), d.value());
        }
    }

    #[test]
    fn indefinite_metric_is_rejected() {
        let m = MetricDefinition::riemannian(&[vec!["1", "0"], vec!["0", "-1"]]).unwrap();
        let p = pt(&[0.0, 0.0], &[1.0, 0.3]);
        assert!(matches!(metric_tensor(&m, &p), Err(Error::IndefiniteMetric)));
        let d = MetricDefinition::riemannian(&[vec!["1", "1"], vec!["1", "1"]]).unwrap();
        assert!(matches!(metric_tensor(&d, &p), Err(Error::DegenerateMetric { .. })));
    }

    #[test]
    fn identity_suite_on_klein() {
        let k = MetricDefinition::klein(3).unwrap();
        let p = pt(&[0.3, 0.2, -0.4], &[-0.8, 0.6, 0.9]);
        let a = analyze_point(&k, &p).unwrap();
        assert!(a.identities.passes(), "{:?}", a.identities);
    }
}
