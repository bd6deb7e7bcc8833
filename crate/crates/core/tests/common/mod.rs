//! Independent numerical oracles shared by the integration tests.
//!
//! Everything here works on plain `f64` closures and never touches the jet
//! engine, so agreement with the library is a genuine cross-check.
#![allow(dead_code)]

use flagcurv::metrics::MetricDefinition;
use flagcurv::PhasePoint;

/// Expressions over `n = 3` that are smooth near [`CORPUS_X`], [`CORPUS_Y`].
pub const CORPUS: &[&str] = &[
    "sqrt(y1^2 + y2^2 + y3^2)",
    "y1*y2 + x1*y3",
    "exp(x1)*y1^2",
    "sin(x2)*y3 + cos(x3)*y1",
    "log(1 + x1^2)*y2",
    "(y1^2 + y2^2 + y3^2)/(1 - x1^2 - x2^2 - x3^2)",
    "sqrt((1 - x1^2 - x2^2 - x3^2)*(y1^2 + y2^2 + y3^2) + (x1*y1 + x2*y2 + x3*y3)^2)",
    "(y1^4 + y2^4 + y3^4)^(1/4)",
    "y1^3/(y2^2 + 1)",
    "-x1*y1 + 2.5*y2",
    "exp(-x1^2)*sqrt(y1^2 + 2*y2^2 + 3*y3^2)",
    "cos(x1*y2)*sin(y3)",
    "(1 + x2^2)^(-1/2)*y1",
    "log(y1^2 + y2^2 + 1)",
    "x1^2*x2^3*y3",
    "4*(y1^2 + y2^2 + y3^2)/(1 + x1^2 + x2^2 + x3^2)^2",
    "sqrt(y1^2 + y2^2 + y3^2) + 0.3*y1",
    "y1*exp(x3)/(2 + sin(x1))",
    "(y1 - y2)^2*(x1 + 2)",
    "1/(x1^2 + y2^2 + 1)",
    "y2^(-2)*x3",
    "sin(cos(x2*y1)) - .5e1*x1",
];

pub const CORPUS_X: [f64; 3] = [0.3, -0.2, 0.4];
pub const CORPUS_Y: [f64; 3] = [0.9, 0.5, -0.7];

/// Central first difference of `f` along coordinate `i`.
pub fn fd1(f: &dyn Fn(&[f64]) -> f64, z: &[f64], i: usize, h: f64) -> f64 {
    let mut p = z.to_vec();
    let mut m = z.to_vec();
    p[i] += h;
    m[i] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

/// Central second difference `∂²f/∂z_i∂z_j`.
pub fn fd2(f: &dyn Fn(&[f64]) -> f64, z: &[f64], i: usize, j: usize, h: f64) -> f64 {
    if i == j {
        let mut p = z.to_vec();
        let mut m = z.to_vec();
        p[i] += h;
        m[i] -= h;
        return (f(&p) - 2.0 * f(z) + f(&m)) / (h * h);
    }
    let at = |si: f64, sj: f64| {
        let mut w = z.to_vec();
        w[i] += si * h;
        w[j] += sj * h;
        f(&w)
    };
    (at(1.0, 1.0) - at(1.0, -1.0) - at(-1.0, 1.0) + at(-1.0, -1.0)) / (4.0 * h * h)
}

/// Solves `a·v = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, bi)| r.iter().copied().chain([*bi]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs())).unwrap();
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    (0..n).map(|i| m[i][n] / m[i][i]).collect()
}

pub fn split(z: &[f64]) -> (&[f64], &[f64]) {
    z.split_at(z.len() / 2)
}

pub fn join(p: &PhasePoint) -> Vec<f64> {
    p.x.iter().chain(&p.y).copied().collect()
}

/// `F²` as a plain function of `z = (x, y)`.
pub fn energy_fn(def: &MetricDefinition) -> impl Fn(&[f64]) -> f64 + '_ {
    move |z: &[f64]| {
        let (x, y) = split(z);
        let f = def.norm(x, y).expect("energy oracle evaluated outside the domain");
        f * f
    }
}

/// `g_ij = ½ ∂²F²/∂y^i∂y^j` by second differences.
pub fn metric_fd(def: &MetricDefinition, p: &PhasePoint) -> Vec<Vec<f64>> {
    let n = def.n;
    let e = energy_fn(def);
    let z = join(p);
    (0..n).map(|i| (0..n).map(|j| 0.5 * fd2(&e, &z, n + i, n + j, 1e-4)).collect()).collect()
}

/// `G^i = ¼ g^{il}(y^m ∂²F²/∂y^l∂x^m − ∂F²/∂x^l)` from differences of `F²` only.
pub fn spray_fd(def: &MetricDefinition, p: &PhasePoint) -> Vec<f64> {
    let n = def.n;
    let e = energy_fn(def);
    let z = join(p);
    let g = metric_fd(def, p);
    let rhs: Vec<f64> = (0..n)
        .map(|l| {
            let mixed: f64 = (0..n).map(|m| p.y[m] * fd2(&e, &z, n + l, m, 1e-4)).sum();
            0.25 * (mixed - fd1(&e, &z, l, 1e-5))
        })
        .collect();
    solve(&g, &rhs)
}

/// Polarization: `g_ij(x)` of a quadratic energy.
pub fn quadratic_metric(def: &MetricDefinition, x: &[f64]) -> Vec<Vec<f64>> {
    let n = def.n;
    let e2 = |y: &[f64]| def.energy(x, y).unwrap();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut a = vec![0.0; n];
                    let mut b = vec![0.0; n];
                    a[i] += 1.0;
                    a[j] += 1.0;
                    b[i] += 1.0;
                    b[j] -= 1.0;
                    0.25 * (e2(&a) - e2(&b))
                })
                .collect()
        })
        .collect()
}

/// Christoffel symbols `Γ^i_{jk}` of a Riemannian metric by differences of `g(x)`.
pub fn christoffel(def: &MetricDefinition, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = def.n;
    let h = 1e-5;
    let dg: Vec<Vec<Vec<f64>>> = (0..n)
        .map(|m| {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[m] += h;
            xm[m] -= h;
            let gp = quadratic_metric(def, &xp);
            let gm = quadratic_metric(def, &xm);
            (0..n).map(|i| (0..n).map(|j| (gp[i][j] - gm[i][j]) / (2.0 * h)).collect()).collect()
        })
        .collect();
    // Γ_{l jk} = ½(∂_j g_lk + ∂_k g_lj − ∂_l g_jk)
    let g = quadratic_metric(def, x);
    let mut gamma = vec![vec![vec![0.0; n]; n]; n];
    for j in 0..n {
        for k in 0..n {
            let lowered: Vec<f64> = (0..n).map(|l| 0.5 * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k])).collect();
            let raised = solve(&g, &lowered);
            for i in 0..n {
                gamma[i][j][k] = raised[i];
            }
        }
    }
    gamma
}

/// Uniform-in-direction unit vectors from a small deterministic LCG, so the
/// oracles do not share the library's sampler.
pub struct Lcg(u64);

impl Lcg {
    pub fn new(seed: u64) -> Self {
        Lcg(seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407))
    }

    pub fn uniform(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((self.0 >> 11) as f64) / ((1u64 << 53) as f64)
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn vector(&mut self, n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n).map(|_| self.range(lo, hi)).collect()
    }

    /// A flag direction not parallel to `y`.
    pub fn transverse(&mut self, y: &[f64]) -> Vec<f64> {
        loop {
            let v = self.vector(y.len(), -1.0, 1.0);
            let vv: f64 = v.iter().map(|a| a * a).sum();
            let yy: f64 = y.iter().map(|a| a * a).sum();
            let vy: f64 = v.iter().zip(y).map(|(a, b)| a * b).sum();
            if vv * yy - vy * vy > 1e-3 * vv * yy {
                return v;
            }
        }
    }
}

/// Random phase points inside the unit ball (radius ≤ 0.7) with `|y| ∈ [0.5, 2]`.
pub fn oracle_points(n: usize, count: usize, seed: u64) -> Vec<PhasePoint> {
    let mut rng = Lcg::new(seed);
    (0..count)
        .map(|_| {
            let x = rng.vector(n, -1.0, 1.0);
            let r: f64 = x.iter().map(|a| a * a).sum::<f64>().sqrt();
            let s = 0.7 * rng.uniform() / r.max(1e-9);
            let y = rng.vector(n, -1.0, 1.0);
            let ly: f64 = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            let t = rng.range(0.5, 2.0) / ly.max(1e-9);
            PhasePoint::new(x.iter().map(|a| a * s).collect(), y.iter().map(|a| a * t).collect())
        })
        .collect()
}

/// The five reference metrics in dimension 3.
pub fn reference_metrics() -> Vec<MetricDefinition> {
    vec![
        MetricDefinition::euclidean(3).unwrap(),
        MetricDefinition::sphere_stereographic(3).unwrap(),
        MetricDefinition::klein(3).unwrap(),
        MetricDefinition::funk(3).unwrap(),
        warped(),
    ]
}

/// `g = diag(1, 1, 1 + x1²)`.
pub fn warped() -> MetricDefinition {
    MetricDefinition::riemannian(&[vec!["1", "0", "0"], vec!["0", "1", "0"], vec!["0", "0", "1 + x1^2"]]).unwrap()
}

/// Exact flag curvature of `diag(1, 1, 1 + x1²)`.
///
/// With `f = √(1 + x1²)` the only nonzero sectional curvature is that of the
/// `∂₁∧∂₃` plane, `−f''/f = −1/f⁴`. In the orthonormal frame `(∂₁, ∂₂, ∂₃/f)`
/// the flag curvature is that value times the squared `(1,3)` component of
/// the unit bivector `y∧X`.
pub fn warped_flag_curvature(x: &[f64], y: &[f64], t: &[f64]) -> f64 {
    let f2 = 1.0 + x[0] * x[0];
    let f = f2.sqrt();
    let yh = [y[0], y[1], f * y[2]];
    let th = [t[0], t[1], f * t[2]];
    let dot = |a: &[f64; 3], b: &[f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let area = dot(&yh, &yh) * dot(&th, &th) - dot(&yh, &th).powi(2);
    let c13 = yh[0] * th[2] - yh[2] * th[0];
    -(1.0 / (f2 * f2)) * c13 * c13 / area
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

/// Flag curvature at `count` random flags over oracle points: `(min, max)`.
pub fn flag_kappa_range(def: &MetricDefinition, count: usize, seed: u64) -> (f64, f64) {
    let mut rng = Lcg::new(seed);
    oracle_points(def.n, count, seed).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let t = rng.transverse(&p.y);
        let k = flagcurv::geometry::flag_curvature(def, p, &t).unwrap();
        (lo.min(k), hi.max(k))
    })
}

/// Spread of flag curvature across `count` random flags at one point.
pub fn flag_spread_at(def: &MetricDefinition, p: &PhasePoint, count: usize, seed: u64) -> f64 {
    let mut rng = Lcg::new(seed);
    let ks: Vec<f64> =
        (0..count).map(|_| flagcurv::geometry::flag_curvature(def, p, &rng.transverse(&p.y)).unwrap()).collect();
    ks.iter().copied().fold(f64::NEG_INFINITY, f64::max) - ks.iter().copied().fold(f64::INFINITY, f64::min)
}

pub const UPDATE_GOLDEN: &str = "FLAGCURV_UPDATE_GOLDEN";

pub fn golden_path(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares `actual` with a stored golden file: numbers to `tol` relative,
/// everything else exactly. Rewrites the file when `FLAGCURV_UPDATE_GOLDEN`
/// is set.
pub fn check_golden(name: &str, actual: &serde_json::Value, tol: f64) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os(UPDATE_GOLDEN).is_some() {
        let text = serde_json::to_string_pretty(actual).unwrap() + "\n";
        std::fs::write(&path, text).map_err(|e| format!("{}: {e}", path.display()))?;
        return Ok(());
    }
    let text = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let expected: serde_json::Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    json_close(&expected, actual, tol, "$")
}

pub fn json_close(a: &serde_json::Value, b: &serde_json::Value, tol: f64, at: &str) -> Result<(), String> {
    use serde_json::Value;
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap(), y.as_f64().unwrap());
            if (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0) {
                Ok(())
            } else {
                Err(format!("{at}: {x} vs {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{at}: length {} vs {}", x.len(), y.len()));
            }
            x.iter().zip(y).enumerate().try_for_each(|(i, (u, v))| json_close(u, v, tol, &format!("{at}[{i}]")))
        }
        (Value::Object(x), Value::Object(y)) => {
            let kx: Vec<_> = x.keys().collect();
            let ky: Vec<_> = y.keys().collect();
            if kx != ky {
                return Err(format!("{at}: keys {kx:?} vs {ky:?}"));
            }
            x.iter().try_for_each(|(k, u)| json_close(u, &y[k], tol, &format!("{at}.{k}")))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{at}: {a} vs {b}")),
    }
}
