//! Built-in Finsler metrics, custom metrics from expressions, and
//! admissible-domain sampling.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Axis, Expr};
use crate::scalar::Scalar;
use crate::tensor::norm as vnorm;

/// Radius of the sampling ball inside unit-ball charts.
pub const BALL_SAMPLE_RADIUS: f64 = 0.8;
pub const FIBER_MIN: f64 = 0.5;
pub const FIBER_MAX: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Euclidean,
    /// Round unit sphere in stereographic coordinates, `F = 2|y|/(1+|x|²)`.
    SphereStereographic,
    /// Klein model of hyperbolic space.
    Klein,
    Funk,
    /// Riemannian metric `yᵀ g(x) y` with entries depending on `x` only.
    RiemannianMatrix(Vec<Vec<Expr>>),
    Custom(Expr),
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Euclidean => "euclidean",
            Family::SphereStereographic => "sphere_stereographic",
            Family::Klein => "klein",
            Family::Funk => "funk",
            Family::RiemannianMatrix(_) => "riemannian_matrix",
            Family::Custom(_) => "custom",
        }
    }
}

/// Coordinate region on which a metric is defined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    /// Open unit ball; samples stay within radius [`BALL_SAMPLE_RADIUS`].
    UnitBall,
    /// All of ℝⁿ; samples are drawn from the cube `[-1, 1]ⁿ`.
    Whole,
}

impl Domain {
    pub fn intersect(self, other: Domain) -> Domain {
        if self == Domain::UnitBall || other == Domain::UnitBall {
            Domain::UnitBall
        } else {
            Domain::Whole
        }
    }

    pub fn contains(self, x: &[f64]) -> bool {
        match self {
            Domain::UnitBall => vnorm(x) < 1.0,
            Domain::Whole => true,
        }
    }

    /// Samples a phase point: `x` from the domain, `y` with uniform direction
    /// and `|y|` uniform in `[0.5, 2]`.
    pub fn sample<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> PhasePoint {
        let x = match self {
            Domain::UnitBall => {
                let dir = unit_vector(n, rng);
                let r = BALL_SAMPLE_RADIUS * rng.random::<f64>().powf(1.0 / n as f64);
                dir.iter().map(|d| d * r).collect()
            }
            Domain::Whole => (0..n).map(|_| rng.random_range(-1.0..1.0)).collect(),
        };
        let dir = unit_vector(n, rng);
        let len = rng.random_range(FIBER_MIN..=FIBER_MAX);
        PhasePoint { x, y: dir.iter().map(|d| d * len).collect() }
    }
}

/// Uniformly distributed direction in ℝⁿ.
pub fn unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = vnorm(&v);
        if len > 1e-6 {
            return v.iter().map(|c| c / len).collect();
        }
    }
}

/// A point `(x, y)` of the slit tangent bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        PhasePoint { x, y }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricDefinition {
    pub family: Family,
    pub n: usize,
    pub label: String,
    pub domain: Domain,
}

impl fmt::Display for MetricDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n={})", self.label, self.n)
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidMetric(format!("dimension must be at least 2, got {n}")));
    }
    Ok(())
}

impl MetricDefinition {
    fn builtin(family: Family, n: usize, domain: Domain) -> Result<Self> {
        check_dim(n)?;
        Ok(MetricDefinition { label: family.name().to_string(), family, n, domain })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        Self::builtin(Family::Euclidean, n, Domain::Whole)
    }

    pub fn sphere_stereographic(n: usize) -> Result<Self> {
        Self::builtin(Family::SphereStereographic, n, Domain::UnitBall)
    }

    pub fn klein(n: usize) -> Result<Self> {
        Self::builtin(Family::Klein, n, Domain::UnitBall)
    }

    pub fn funk(n: usize) -> Result<Self> {
        Self::builtin(Family::Funk, n, Domain::UnitBall)
    }

    /// Riemannian metric from an `n × n` table of expressions in `x`.
    pub fn riemannian<S: AsRef<str>>(entries: &[Vec<S>]) -> Result<Self> {
        let n = entries.len();
        check_dim(n)?;
        let mut rows = Vec::with_capacity(n);
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidMetric(format!(
                    "metric matrix row {} has {} entries, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            let mut parsed = Vec::with_capacity(n);
            for src in row {
                let e = Expr::parse(src.as_ref(), n)?;
                if e.depends_on(Axis::Y) {
                    return Err(Error::InvalidMetric(format!(
                        "metric entry '{}' depends on fiber coordinates",
                        src.as_ref()
                    )));
                }
                parsed.push(e);
            }
            rows.push(parsed);
        }
        Self::builtin(Family::RiemannianMatrix(rows), n, Domain::Whole)
    }

    /// Custom metric `F(x, y)` from an expression.
    pub fn custom(source: &str, n: usize, domain: Domain) -> Result<Self> {
        check_dim(n)?;
        let e = Expr::parse(source, n)?;
        Ok(MetricDefinition { family: Family::Custom(e), n, label: "custom".into(), domain })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Parses a compact metric description:
    /// `euclidean`, `sphere_stereographic`, `klein`, `funk`,
    /// `custom:<F>` or `riemannian:<row>;<row>;...` with comma-separated entries.
    pub fn from_shorthand(spec: &str, n: usize) -> Result<Self> {
        let spec = spec.trim();
        if let Some(src) = spec.strip_prefix("custom:") {
            return Self::custom(src, n, Domain::Whole);
        }
        if let Some(rows) = spec.strip_prefix("riemannian:") {
            let table: Vec<Vec<&str>> = rows.split(';').map(|r| r.split(',').map(str::trim).collect()).collect();
            let def = Self::riemannian(&table)?;
            if def.n != n {
                return Err(Error::InvalidMetric(format!("matrix is {}×{} but n = {n}", def.n, def.n)));
            }
            return Ok(def);
        }
        match spec {
            "euclidean" => Self::euclidean(n),
            "sphere_stereographic" => Self::sphere_stereographic(n),
            "klein" => Self::klein(n),
            "funk" => Self::funk(n),
            other => Err(Error::InvalidMetric(format!("unknown metric family '{other}'"))),
        }
    }

    /// The norm `F(x, y)` over any scalar.
    pub fn norm<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        Ok(match &self.family {
            Family::Euclidean => sdot(y, y).try_sqrt()?,
            Family::SphereStereographic => {
                let num = sdot(y, y).try_sqrt()?.scale(2.0);
                let den = sdot(x, x) + x[0].lift(1.0);
                num.try_div(&den)?
            }
            Family::Klein | Family::RiemannianMatrix(_) => self.energy(x, y)?.try_sqrt()?,
            Family::Funk => {
                let (xx, xy, yy) = (sdot(x, x), sdot(x, y), sdot(y, y));
                let one_minus = x[0].lift(1.0) - xx;
                let root = (yy * one_minus.clone() + xy.clone() * xy.clone()).try_sqrt()?;
                (xy + root).try_div(&one_minus)?
            }
            Family::Custom(e) => e.eval(x, y)?,
        })
    }

    /// The energy `F²(x, y)`.
    pub fn energy<S: Scalar>(&self, x: &[S], y: &[S]) -> Result<S> {
        Ok(match &self.family {
            Family::Euclidean => sdot(y, y),
            Family::SphereStereographic => {
                let conf = sdot(x, x) + x[0].lift(1.0);
                sdot(y, y).scale(4.0).try_div(&(conf.clone() * conf))?
            }
            Family::Klein => {
                let (xx, xy, yy) = (sdot(x, x), sdot(x, y), sdot(y, y));
                let one_minus = x[0].lift(1.0) - xx;
                let num = yy * one_minus.clone() + xy.clone() * xy;
                num.try_div(&(one_minus.clone() * one_minus))?
            }
            Family::RiemannianMatrix(rows) => {
                let mut acc = x[0].lift(0.0);
                for (i, row) in rows.iter().enumerate() {
                    for (j, entry) in row.iter().enumerate() {
                        let gij = entry.eval(x, y)?;
                        acc = acc + gij * y[i].clone() * y[j].clone();
                    }
                }
                acc
            }
            Family::Funk | Family::Custom(_) => {
                let f = self.norm(x, y)?;
                f.clone() * f
            }
        })
    }

    /// Checks dimensions, the slit-bundle condition and the chart domain.
    pub fn admissible(&self, p: &PhasePoint) -> Result<()> {
        if p.x.len() != self.n || p.y.len() != self.n {
            return Err(Error::Inadmissible(format!(
                "point has dimension {}/{}, metric has n = {}",
                p.x.len(),
                p.y.len(),
                self.n
            )));
        }
        if p.x.iter().chain(&p.y).any(|v| !v.is_finite()) {
            return Err(Error::Inadmissible("non-finite coordinates".into()));
        }
        if p.y.iter().all(|&v| v == 0.0) {
            return Err(Error::Inadmissible("y = 0 is not on the slit tangent bundle".into()));
        }
        if !self.domain.contains(&p.x) {
            return Err(Error::Inadmissible(format!(
                "|x| = {} outside the unit-ball chart of {}",
                vnorm(&p.x),
                self.label
            )));
        }
        if let Family::RiemannianMatrix(rows) = &self.family {
            let zero = vec![0.0; self.n];
            for i in 0..self.n {
                for j in 0..i {
                    let a = rows[i][j].eval_plain(&p.x, &zero)?;
                    let b = rows[j][i].eval_plain(&p.x, &zero)?;
                    if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                        return Err(Error::InvalidMetric(format!(
                            "metric matrix not symmetric at x: g[{}][{}] = {a}, g[{}][{}] = {b}",
                            i + 1,
                            j + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// `F` at an admissible point.
    pub fn finsler_value(&self, p: &PhasePoint) -> Result<f64> {
        self.admissible(p)?;
        let f = self.norm(&p.x, &p.y)?;
        if !(f > 0.0) || !f.is_finite() {
            return Err(Error::Inadmissible(format!("F = {f} is not positive")));
        }
        Ok(f)
    }

    pub fn sample_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PhasePoint {
        self.domain.sample(self.n, rng)
    }

    /// Samples `F(x, λy) = λF(x, y)` and returns human-readable violations.
    pub fn homogeneity_lint(&self, seed: u64) -> Vec<String> {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut warnings = Vec::new();
        for _ in 0..20 {
            let p = self.sample_point(&mut rng);
            let Ok(f) = self.norm(&p.x, &p.y) else {
                warnings.push(format!("F undefined at x={:?}, y={:?}", p.x, p.y));
                continue;
            };
            for lambda in [0.5, 2.0, 3.0] {
                let ly: Vec<f64> = p.y.iter().map(|v| v * lambda).collect();
                match self.norm(&p.x, &ly) {
                    Ok(fl) if (fl - lambda * f).abs() <= 1e-10 * (lambda * f).abs().max(1e-300) => {}
                    Ok(fl) => warnings.push(format!(
                        "F(x, {lambda}y) = {fl} but {lambda}F(x, y) = {} at x={:?}, y={:?}",
                        lambda * f,
                        p.x,
                        p.y
                    )),
                    Err(e) => warnings.push(format!("F(x, {lambda}y) failed: {e}")),
                }
            }
        }
        warnings
    }
}

fn sdot<S: Scalar>(u: &[S], v: &[S]) -> S {
    let mut acc = u[0].clone() * v[0].clone();
    for (a, b) in u.iter().zip(v).skip(1) {
        acc = acc + a.clone() * b.clone();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn builtins(n: usize) -> Vec<MetricDefinition> {
        vec![
            MetricDefinition::euclidean(n).unwrap(),
            MetricDefinition::sphere_stereographic(n).unwrap(),
            MetricDefinition::klein(n).unwrap(),
            MetricDefinition::funk(n).unwrap(),
            MetricDefinition::riemannian(&[vec!["1", "0", "0"], vec!["0", "1", "0"], vec!["0", "0", "1 + x1^2"]])
                .unwrap(),
        ]
    }

    #[test]
    fn closed_form_values() {
        let e = MetricDefinition::euclidean(3).unwrap();
        let p = PhasePoint::new(vec![0.3, -0.2, 0.9], vec![3.0, 4.0, 0.0]);
        assert_eq!(e.finsler_value(&p).unwrap(), 5.0);

        let funk = MetricDefinition::funk(3).unwrap();
        let p0 = PhasePoint::new(vec![0.0; 3], vec![0.3, -1.2, 0.4]);
        assert!((funk.finsler_value(&p0).unwrap() - vnorm(&p0.y)).abs() < 1e-15);

        let s = MetricDefinition::sphere_stereographic(3).unwrap();
        let ps = PhasePoint::new(vec![0.0; 3], vec![1.0, 0.0, 0.0]);
        assert_eq!(s.finsler_value(&ps).unwrap(), 2.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let m = MetricDefinition::klein(3).unwrap();
        let a = m.sample_point(&mut ChaCha8Rng::seed_from_u64(42));
        let b = m.sample_point(&mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
    }

    #[test]
    fn sampling_contract() {
        let funk = MetricDefinition::funk(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = funk.sample_point(&mut rng);
            assert!(vnorm(&p.x) < 0.8);
            let ny = vnorm(&p.y);
            assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&ny));
        }
        let e = MetricDefinition::euclidean(4).unwrap();
        for _ in 0..1000 {
            let p = e.sample_point(&mut rng);
            let ny = vnorm(&p.y);
            assert!((0.5 - 1e-12..=2.0 + 1e-12).contains(&ny));
        }
    }

    #[test]
    fn builtins_positive_and_homogeneous() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for m in builtins(3) {
            for _ in 0..50 {
                let p = m.sample_point(&mut rng);
                let f = m.finsler_value(&p).unwrap();
                assert!(f > 0.0);
                for lambda in [0.5, 2.0] {
                    let q = PhasePoint::new(p.x.clone(), p.y.iter().map(|v| v * lambda).collect());
                    let fl = m.finsler_value(&q).unwrap();
                    assert!((fl - lambda * f).abs() <= 1e-12 * lambda * f, "{}", m.label);
                }
                let f2 = m.energy(&p.x, &p.y).unwrap();
                assert!((f2 - f * f).abs() <= 1e-12 * f2);
            }
            assert!(m.homogeneity_lint(3).is_empty(), "{}", m.label);
        }
    }

    #[test]
    fn lint_flags_non_homogeneous_custom() {
        let m = MetricDefinition::custom("y1^2 + y2^2 + 1", 2, Domain::Whole).unwrap();
        assert!(!m.homogeneity_lint(0).is_empty());
    }

    #[test]
    fn inadmissible_points() {
        let k = MetricDefinition::klein(3).unwrap();
        let outside = PhasePoint::new(vec![0.9, 0.5, 0.0], vec![1.0, 0.0, 0.0]);
        assert!(matches!(k.finsler_value(&outside), Err(Error::Inadmissible(_))));
        let zero_y = PhasePoint::new(vec![0.0; 3], vec![0.0; 3]);
        assert!(matches!(k.finsler_value(&zero_y), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn riemannian_validation() {
        assert!(MetricDefinition::riemannian(&[vec!["1", "y1"], vec!["y1", "1"]]).is_err());
        assert!(MetricDefinition::riemannian(&[vec!["1", "0"], vec!["0"]]).is_err());
        let asym = MetricDefinition::riemannian(&[vec!["2", "x1"], vec!["0", "2"]]).unwrap();
        let p = PhasePoint::new(vec![0.5, 0.0], vec![1.0, 0.0]);
        assert!(matches!(asym.admissible(&p), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn shorthand() {
        let m = MetricDefinition::from_shorthand("riemannian:1,0,0;0,1,0;0,0,1+x1^2", 3).unwrap();
        assert_eq!(m.family.name(), "riemannian_matrix");
        assert!(MetricDefinition::from_shorthand("randers", 3).is_err());
        assert!(MetricDefinition::from_shorthand("klein", 1).is_err());
        let c = MetricDefinition::from_shorthand("custom:sqrt(y1^2+y2^2)", 2).unwrap();
        let p = PhasePoint::new(vec![0.1, 0.1], vec![3.0, 4.0]);
        assert_eq!(c.finsler_value(&p).unwrap(), 5.0);
    }
}
