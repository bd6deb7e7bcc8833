//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] holds the normalized Taylor coefficients `f_α = ∂^α f / α!` of a
//! function of `dim` variables at a fixed expansion point, for every
//! multi-index of total degree at most `order`. Coefficients are stored
//! densely in graded-lexicographic order, so the coefficients of a truncated
//! jet are a prefix of the coefficients of the full one.
//!
//! Slots `0..n` conventionally hold the base coordinates `x` and slots
//! `n..2n` the fiber coordinates `y`.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

/// Largest supported truncation order.
pub const MAX_ORDER: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("invalid jet configuration: {0}")]
    Config(String),
    #[error("singular point in {op}: constant term {value}")]
    Singular { op: &'static str, value: f64 },
    #[error("derivative order {requested} exceeds available jet order {available}")]
    OrderExhausted { requested: usize, available: usize },
}

/// Exponent vector of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: Vec<u8>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, slot: usize) -> Self {
        let mut e = vec![0; dim];
        e[slot] = 1;
        MultiIndex(e)
    }

    /// `e_a + e_b`, the index of a mixed (or pure, if `a == b`) second partial.
    pub fn pair(dim: usize, a: usize, b: usize) -> Self {
        let mut e = vec![0; dim];
        e[a] += 1;
        e[b] += 1;
        MultiIndex(e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    fn plus(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// Index tables shared by all jets over the same number of variables and
/// maximum order.
pub struct JetSpace {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    rank: HashMap<MultiIndex, usize>,
    // counts[k] = number of multi-indices of degree <= k
    counts: Vec<usize>,
    // shift[r * dim + v] = rank of indices[r] + e_v, usize::MAX past the top degree
    shift: Vec<usize>,
    // (lhs, rhs, out) with deg(lhs) + deg(rhs) = deg(out), sorted by out
    triples: Vec<(u32, u32, u32)>,
    // triple_counts[k] = number of triples with deg(out) <= k
    triple_counts: Vec<usize>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace")
            .field("dim", &self.dim)
            .field("order", &self.order)
            .field("len", &self.indices.len())
            .finish()
    }
}

fn compositions(dim: usize, degree: usize, prefix: &mut Vec<u8>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == dim {
        prefix.push(degree as u8);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    for first in (0..=degree).rev() {
        prefix.push(first as u8);
        compositions(dim, degree - first, prefix, out);
        prefix.pop();
    }
}

impl JetSpace {
    fn build(dim: usize, order: usize) -> JetSpace {
        let mut indices = Vec::new();
        let mut counts = Vec::with_capacity(order + 1);
        for degree in 0..=order {
            compositions(dim, degree, &mut Vec::with_capacity(dim), &mut indices);
            counts.push(indices.len());
        }
        let rank: HashMap<MultiIndex, usize> = indices.iter().cloned().enumerate().map(|(r, m)| (m, r)).collect();

        let mut shift = vec![usize::MAX; indices.len() * dim];
        for (r, m) in indices.iter().enumerate() {
            if m.degree() == order {
                continue;
            }
            for v in 0..dim {
                let up = m.plus(&MultiIndex::unit(dim, v));
                shift[r * dim + v] = rank[&up];
            }
        }

        let mut triples = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            let room = order - a.degree();
            for (j, b) in indices[..counts[room]].iter().enumerate() {
                let k = rank[&a.plus(b)];
                triples.push((i as u32, j as u32, k as u32));
            }
        }
        triples.sort_by_key(|&(i, j, k)| (k, i, j));
        let mut triple_counts = vec![0; order + 1];
        for &(_, _, k) in &triples {
            let deg = indices[k as usize].degree();
            for c in triple_counts.iter_mut().skip(deg) {
                *c += 1;
            }
        }

        JetSpace { dim, order, indices, rank, counts, shift, triples, triple_counts }
    }

    /// Shared space for `dim` variables truncated at `order`.
    pub fn get(dim: usize, order: usize) -> Result<Arc<JetSpace>, JetError> {
        if dim == 0 {
            return Err(JetError::Config("jet dimension must be positive".into()));
        }
        if order > MAX_ORDER {
            return Err(JetError::Config(format!("jet order {order} exceeds maximum {MAX_ORDER}")));
        }
        static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard.entry((dim, order)).or_insert_with(|| Arc::new(JetSpace::build(dim, order))).clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of coefficients of a jet of the given order.
    pub fn len(&self, order: usize) -> usize {
        self.counts[order]
    }

    pub fn index(&self, rank: usize) -> &MultiIndex {
        &self.indices[rank]
    }

    pub fn rank(&self, index: &MultiIndex) -> Option<usize> {
        self.rank.get(index).copied()
    }
}

/// A truncated Taylor polynomial.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.space.dim)
            .field("order", &self.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl Jet {
    /// The coordinate function of `slot`, expanded at `value`.
    pub fn variable(dim: usize, slot: usize, value: f64, order: usize) -> Result<Jet, JetError> {
        if slot >= dim {
            return Err(JetError::Config(format!("slot {slot} out of range for dimension {dim}")));
        }
        let space = JetSpace::get(dim, order)?;
        let mut coeffs = vec![0.0; space.len(order)];
        coeffs[0] = value;
        if order >= 1 {
            // degree-one indices come right after the constant, in slot order
            coeffs[1 + slot] = 1.0;
        }
        Ok(Jet { space, order, coeffs })
    }

    pub fn constant(dim: usize, value: f64, order: usize) -> Result<Jet, JetError> {
        let space = JetSpace::get(dim, order)?;
        let mut coeffs = vec![0.0; space.len(order)];
        coeffs[0] = value;
        Ok(Jet { space, order, coeffs })
    }

    /// Builds a jet from coefficients in graded-lexicographic order.
    pub fn from_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        let space = JetSpace::get(dim, order)?;
        if coeffs.len() != space.len(order) {
            return Err(JetError::Config(format!("expected {} coefficients, got {}", space.len(order), coeffs.len())));
        }
        Ok(Jet { space, order, coeffs })
    }

    /// A constant jet in the same space and order as `self`.
    pub fn constant_like(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet { space: self.space.clone(), order: self.order, coeffs }
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.space.dim
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Normalized Taylor coefficient at `index`; zero beyond the truncation order.
    pub fn coeff(&self, index: &MultiIndex) -> f64 {
        if index.degree() > self.order {
            return 0.0;
        }
        self.space.rank(index).map_or(0.0, |r| self.coeffs[r])
    }

    /// The raw partial derivative `∂^α f` at the expansion point.
    pub fn derivative(&self, index: &MultiIndex) -> f64 {
        let weight: f64 = index.exponents().iter().map(|&e| factorial(e as usize)).product();
        self.coeff(index) * weight
    }

    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        Jet { space: self.space.clone(), order, coeffs: self.coeffs[..self.space.len(order)].to_vec() }
    }

    fn check_space(&self, other: &Jet) {
        assert_eq!(
            self.space.dim, other.space.dim,
            "jet dimension mismatch ({} vs {})",
            self.space.dim, other.space.dim
        );
    }

    fn common_order(&self, other: &Jet) -> usize {
        self.check_space(other);
        self.order.min(other.order)
    }

    /// Multiplies every coefficient by `c`.
    pub fn scale(&self, c: f64) -> Jet {
        Jet { space: self.space.clone(), order: self.order, coeffs: self.coeffs.iter().map(|v| v * c).collect() }
    }

    fn zip_with(&self, other: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        let order = self.common_order(other);
        let len = self.space.len(order);
        let coeffs = self.coeffs[..len].iter().zip(&other.coeffs[..len]).map(|(&a, &b)| f(a, b)).collect();
        Jet { space: self.space.clone(), order, coeffs }
    }

    fn product(&self, other: &Jet) -> Jet {
        let order = self.common_order(other);
        let space = &self.space;
        let mut out = vec![0.0; space.len(order)];
        for &(i, j, k) in &space.triples[..space.triple_counts[order]] {
            out[k as usize] += self.coeffs[i as usize] * other.coeffs[j as usize];
        }
        out[0] = self.coeffs[0] * other.coeffs[0];
        Jet { space: space.clone(), order, coeffs: out }
    }

    /// Truncated quotient, by the recurrence `q_γ = (a_γ − Σ q_β b_{γ−β}) / b_0`.
    pub fn try_div(&self, other: &Jet) -> Result<Jet, JetError> {
        let b0 = other.coeffs[0];
        if b0 == 0.0 || !b0.is_finite() {
            return Err(JetError::Singular { op: "division", value: b0 });
        }
        let order = self.common_order(other);
        let space = &self.space;
        let len = space.len(order);
        let mut q = vec![0.0; len];
        q[0] = self.coeffs[0] / b0;
        let triples = &space.triples[..space.triple_counts[order]];
        let mut t = 0;
        // skip contributions to the constant term
        while t < triples.len() && triples[t].2 == 0 {
            t += 1;
        }
        for r in 1..len {
            let mut acc = 0.0;
            while t < triples.len() && triples[t].2 as usize == r {
                let (i, j, _) = triples[t];
                if j != 0 {
                    acc += q[i as usize] * other.coeffs[j as usize];
                }
                t += 1;
            }
            q[r] = (self.coeffs[r] - acc) / b0;
        }
        Ok(Jet { space: space.clone(), order, coeffs: q })
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        self.constant_like(1.0).try_div(self)
    }

    /// Composes a univariate series `Σ c_k t^k` (with `c_k = f^(k)(a_0)/k!`)
    /// with `t = self − a_0`.
    pub fn compose(&self, series: &[f64]) -> Jet {
        debug_assert!(series.len() > self.order);
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut acc = self.constant_like(series[self.order]);
        for k in (0..self.order).rev() {
            acc = acc.product(&h);
            acc.coeffs[0] = series[k];
        }
        acc.coeffs[0] = series[0];
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order).map(|k| e / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::Singular { op: "log", value: a });
        }
        let mut series = vec![a.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            series.push(sign / (k as f64 * a.powi(k as i32)));
        }
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [s, c, -s, -c];
        let series: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        let cycle = [c, -s, -c, s];
        let series: Vec<f64> = (0..=self.order).map(|k| cycle[k % 4] / factorial(k)).collect();
        self.compose(&series)
    }

    fn binomial_series(a: f64, q: f64, order: usize, head: f64) -> Vec<f64> {
        // c_k = binom(q, k) a^(q-k)
        let mut series = vec![head];
        let mut c = head;
        for k in 1..=order {
            c *= (q - (k as f64 - 1.0)) / (k as f64 * a);
            series.push(c);
        }
        series
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::Singular { op: "sqrt", value: a });
        }
        Ok(self.compose(&Self::binomial_series(a, 0.5, self.order, a.sqrt())))
    }

    /// Real power with a positive base.
    pub fn powf(&self, q: f64) -> Result<Jet, JetError> {
        let a = self.value();
        if !(a > 0.0) {
            return Err(JetError::Singular { op: "pow", value: a });
        }
        Ok(self.compose(&Self::binomial_series(a, q, self.order, a.powf(q))))
    }

    /// The jet of `∂^α f`, of order `order − |α|`.
    pub fn partial(&self, alpha: &MultiIndex) -> Result<Jet, JetError> {
        if alpha.dim() != self.space.dim {
            return Err(JetError::Config(format!(
                "multi-index of length {} for jet of dimension {}",
                alpha.dim(),
                self.space.dim
            )));
        }
        let requested = alpha.degree();
        if requested > self.order {
            return Err(JetError::OrderExhausted { requested, available: self.order });
        }
        let order = self.order - requested;
        let space = &self.space;
        let dim = space.dim;
        let len = space.len(order);
        let mut out = Vec::with_capacity(len);
        for r in 0..len {
            let mut target = r;
            for (v, &e) in alpha.exponents().iter().enumerate() {
                for _ in 0..e {
                    target = space.shift[target * dim + v];
                }
            }
            let beta = space.index(r).exponents();
            let mut weight = 1.0;
            for (v, &e) in alpha.exponents().iter().enumerate() {
                let b = beta[v] as usize;
                for t in 1..=e as usize {
                    weight *= (b + t) as f64;
                }
            }
            out.push(self.coeffs[target] * weight);
        }
        Ok(Jet { space: space.clone(), order, coeffs: out })
    }

    /// First partial in one slot.
    pub fn d(&self, slot: usize) -> Result<Jet, JetError> {
        self.partial(&MultiIndex::unit(self.space.dim, slot))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Jet) -> bool {
        self.space.dim == other.space.dim && self.order == other.order && self.coeffs == other.coeffs
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                (&self).$method(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                self.$method(&rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a, b| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a, b| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a, b| a.product(b));

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet { space: self.space.clone(), order: self.order, coeffs: self.coeffs.iter().map(|v| -v).collect() }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        -&self
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t_jet(order: usize) -> Jet {
        // 1 + t at t = 0
        let t = Jet::variable(1, 0, 0.0, order).unwrap();
        &t + &t.constant_like(1.0)
    }

    #[test]
    fn variable_layout() {
        let v = Jet::variable(4, 0, 2.0, 2).unwrap();
        assert_eq!(v.value(), 2.0);
        assert_eq!(v.coeff(&MultiIndex::new(vec![1, 0, 0, 0])), 1.0);
        assert_eq!(v.coeffs().iter().filter(|c| **c != 0.0).count(), 2);
        let w = Jet::variable(4, 3, -1.0, 2).unwrap();
        assert_eq!(w.coeff(&MultiIndex::unit(4, 3)), 1.0);
    }

    #[test]
    fn order_zero_is_plain_scalar() {
        let v = Jet::variable(2, 1, 5.0, 0).unwrap();
        assert_eq!(v.coeffs(), &[5.0]);
    }

    #[test]
    fn bad_configuration() {
        assert!(matches!(Jet::variable(2, 2, 0.0, 2), Err(JetError::Config(_))));
        assert!(matches!(Jet::variable(2, 0, 0.0, 7), Err(JetError::Config(_))));
    }

    #[test]
    fn square_of_variable() {
        let a = 1.7;
        let x = Jet::variable(1, 0, a, 2).unwrap();
        let sq = &x * &x;
        assert_eq!(sq.coeffs(), &[a * a, 2.0 * a, 1.0]);
    }

    #[test]
    fn self_quotient_is_one() {
        let x = Jet::variable(3, 0, 0.3, 4).unwrap();
        let one_plus = &x + &x.constant_like(1.0);
        let q = one_plus.try_div(&one_plus).unwrap();
        assert!((q.value() - 1.0).abs() < 1e-15);
        assert!(q.coeffs()[1..].iter().all(|c| c.abs() < 1e-15));
    }

    #[test]
    fn geometric_series() {
        let r = t_jet(3).recip().unwrap();
        assert_eq!(r.coeffs(), &[1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn division_by_zero_constant() {
        let t = Jet::variable(1, 0, 0.0, 3).unwrap();
        assert!(matches!(t.recip(), Err(JetError::Singular { .. })));
    }

    #[test]
    fn binomial_sqrt() {
        let s = t_jet(2).sqrt().unwrap();
        assert_eq!(s.coeffs(), &[1.0, 0.5, -0.125]);
    }

    #[test]
    fn exp_log_inverse() {
        let x = Jet::variable(2, 0, 0.7, 5).unwrap();
        let y = Jet::variable(2, 1, 1.3, 5).unwrap();
        let a = &(&x * &y) + &x.constant_like(0.4);
        let back = a.ln().unwrap().exp();
        for (p, q) in a.coeffs().iter().zip(back.coeffs()) {
            assert!((p - q).abs() < 1e-13, "{p} vs {q}");
        }
    }

    #[test]
    fn domain_errors_carry_value() {
        let x = Jet::variable(1, 0, -2.0, 2).unwrap();
        assert_eq!(x.sqrt().unwrap_err(), JetError::Singular { op: "sqrt", value: -2.0 });
        assert!(x.ln().is_err());
        assert!(x.powf(0.5).is_err());
    }

    #[test]
    fn sin_cos_pythagoras() {
        let x = Jet::variable(2, 0, 0.9, 6).unwrap();
        let y = Jet::variable(2, 1, -0.2, 6).unwrap();
        let a = &x * &y + &x;
        let one = &(&a.sin() * &a.sin()) + &(&a.cos() * &a.cos());
        assert!((one.value() - 1.0).abs() < 1e-15);
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn powf_matches_repeated_product() {
        let x = Jet::variable(2, 0, 1.4, 4).unwrap();
        let y = Jet::variable(2, 1, 0.6, 4).unwrap();
        let a = &x + &(&y * &y);
        let cube = a.powf(3.0).unwrap();
        let direct = &(&a * &a) * &a;
        for (p, q) in cube.coeffs().iter().zip(direct.coeffs()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn extract_first_partial() {
        let y = Jet::variable(2, 0, 0.8, 3).unwrap();
        let sq = &y * &y;
        let d = sq.d(0).unwrap();
        assert_eq!(d.order(), 2);
        let expected = y.truncate(2).scale(2.0);
        assert_eq!(d, expected);
    }

    #[test]
    fn extract_second_partial() {
        let y1 = Jet::variable(2, 0, 0.8, 3).unwrap();
        let y2 = Jet::variable(2, 1, -1.1, 3).unwrap();
        let f = &(&y1 * &y1) * &y2;
        let d = f.partial(&MultiIndex::new(vec![2, 0])).unwrap();
        assert_eq!(d, y2.truncate(1).scale(2.0));
    }

    #[test]
    fn extract_mixed_partial() {
        let (a, b) = (0.7, 1.9);
        let x = Jet::variable(2, 0, a, 3).unwrap();
        let y = Jet::variable(2, 1, b, 3).unwrap();
        let f = &x.sin() * &y;
        let d = f.partial(&MultiIndex::new(vec![1, 1])).unwrap();
        assert!((d.value() - a.cos()).abs() < 1e-13);
    }

    #[test]
    fn order_exhausted() {
        let x = Jet::variable(1, 0, 1.0, 2).unwrap();
        let e = x.partial(&MultiIndex::new(vec![3])).unwrap_err();
        assert_eq!(e, JetError::OrderExhausted { requested: 3, available: 2 });
    }

    #[test]
    fn mixed_orders_truncate_to_lower() {
        let x5 = Jet::variable(2, 0, 1.0, 5).unwrap();
        let x2 = x5.truncate(2);
        let s = &x5 + &x2;
        assert_eq!(s.order(), 2);
        let p = &x5 * &x2;
        assert_eq!(p, (&x2 * &x2));
    }

    #[test]
    fn space_sizes() {
        let s = JetSpace::get(6, 5).unwrap();
        assert_eq!(s.len(5), 462);
        assert_eq!(s.len(0), 1);
        assert_eq!(s.len(1), 7);
    }
}
