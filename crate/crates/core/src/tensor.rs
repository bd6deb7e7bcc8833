//! Small dense square containers for matrices and rank-3 tensors.

use std::ops::{Index, IndexMut};

use serde::ser::{Serialize, SerializeSeq, Serializer};

/// Square `n × n` matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Matrix { n, data }
    }

    pub fn try_from_fn<E>(n: usize, mut f: impl FnMut(usize, usize) -> Result<T, E>) -> Result<Self, E> {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j)?);
            }
        }
        Ok(Matrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Matrix { n, data: rows.iter().flat_map(|r| r.iter().cloned()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl Matrix<f64> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self[(i, j)] * v[j]).sum()).collect()
    }

    /// `uᵀ M v`
    pub fn bilinear(&self, u: &[f64], v: &[f64]) -> f64 {
        let mv = self.mul_vec(v);
        u.iter().zip(&mv).map(|(a, b)| a * b).sum()
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        Matrix::from_fn(self.n, |i, j| (0..self.n).map(|k| self[(i, k)] * other[(k, j)]).sum())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

impl Serialize for Matrix<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.n))?;
        for row in self.data.chunks(self.n) {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

/// Rank-3 tensor `T[i][j][k]` with all indices in `0..n`.
///
/// Curvature-type tensors use the layout `R[l][j][k] = R^l_{jk}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor3<T = f64> {
    n: usize,
    data: Vec<T>,
}

impl<T: Clone> Tensor3<T> {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k));
                }
            }
        }
        Tensor3 { n, data }
    }

    pub fn try_from_fn<E>(n: usize, mut f: impl FnMut(usize, usize, usize) -> Result<T, E>) -> Result<Self, E> {
        let mut data = Vec::with_capacity(n * n * n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    data.push(f(i, j, k)?);
                }
            }
        }
        Ok(Tensor3 { n, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Tensor3<U> {
        Tensor3 { n: self.n, data: self.data.iter().map(f).collect() }
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.data.iter()
    }
}

impl Tensor3<f64> {
    pub fn zeros(n: usize) -> Self {
        Tensor3 { n, data: vec![0.0; n * n * n] }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Max-norm of the componentwise difference.
    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn nested(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.n;
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|k| self[(i, j, k)]).collect()).collect()).collect()
    }
}

impl<T> Index<(usize, usize, usize)> for Tensor3<T> {
    type Output = T;
    fn index(&self, (i, j, k): (usize, usize, usize)) -> &T {
        &self.data[(i * self.n + j) * self.n + k]
    }
}

impl<T> IndexMut<(usize, usize, usize)> for Tensor3<T> {
    fn index_mut(&mut self, (i, j, k): (usize, usize, usize)) -> &mut T {
        &mut self.data[(i * self.n + j) * self.n + k]
    }
}

impl Serialize for Tensor3<f64> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.nested().serialize(serializer)
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}
