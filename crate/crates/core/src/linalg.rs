//! Gauss-Jordan elimination over any [`Scalar`].

use crate::jets::JetError;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Inverse<S> {
    pub inverse: Vec<Vec<S>>,
    pub det: S,
}

/// Inverts a square matrix with partial pivoting.
///
/// Pivots are chosen on the plain value only, so the elimination sequence
/// is the same for jets as for their constant terms.
pub fn invert<S: Scalar>(a: &[Vec<S>]) -> Result<Inverse<S>, JetError> {
    let n = a.len();
    if n == 0 || a.iter().any(|row| row.len() != n) {
        return Err(JetError::Config("matrix must be square and non-empty".into()));
    }
    let zero = a[0][0].lift(0.0);
    let one = a[0][0].lift(1.0);
    let mut m: Vec<Vec<S>> = a.to_vec();
    let mut inv: Vec<Vec<S>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { one.clone() } else { zero.clone() }).collect()).collect();
    let mut det = one.clone();

    for col in 0..n {
        let pivot_row =
            (col..n).max_by(|&r, &s| m[r][col].value().abs().total_cmp(&m[s][col].value().abs())).unwrap_or(col);
        let pivot_value = m[pivot_row][col].value();
        if pivot_value == 0.0 || !pivot_value.is_finite() {
            return Err(JetError::Singular { op: "matrix inversion", value: pivot_value });
        }
        if pivot_row != col {
            m.swap(pivot_row, col);
            inv.swap(pivot_row, col);
            det = -det;
        }
        let pivot = m[col][col].clone();
        det = det * pivot.clone();
        for j in 0..n {
            m[col][j] = m[col][j].try_div(&pivot)?;
            inv[col][j] = inv[col][j].try_div(&pivot)?;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[r][col].clone();
            for j in 0..n {
                let dm = factor.clone() * m[col][j].clone();
                m[r][j] = m[r][j].clone() - dm;
                let di = factor.clone() * inv[col][j].clone();
                inv[r][j] = inv[r][j].clone() - di;
            }
        }
    }
    Ok(Inverse { inverse: inv, det })
}
