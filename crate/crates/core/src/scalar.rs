//! Arithmetic interface shared by plain reals and jets.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use crate::jets::{Jet, JetError};

/// A number-like value the expression evaluator, the metric catalog and the
/// linear solver can work over.
///
/// Partial operations (division, `sqrt`, `ln`) fail on the same inputs for
/// every implementation, so an order-0 jet and an `f64` walk identical paths.
pub trait Scalar:
    Clone + Debug + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    /// Plain value (constant Taylor term for jets).
    fn value(&self) -> f64;
    /// A constant with the same shape as `self`.
    fn lift(&self, c: f64) -> Self;
    fn scale(&self, c: f64) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self, JetError>;
    fn try_sqrt(&self) -> Result<Self, JetError>;
    fn try_ln(&self) -> Result<Self, JetError>;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;

    /// Integer power by binary exponentiation.
    fn powi(&self, k: i64) -> Result<Self, JetError> {
        if k < 0 {
            let p = self.powi(-k)?;
            return self.lift(1.0).try_div(&p);
        }
        let mut k = k as u64;
        let mut base = self.clone();
        let mut acc: Option<Self> = None;
        while k > 0 {
            if k & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => a * base.clone(),
                });
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        Ok(acc.unwrap_or_else(|| self.lift(1.0)))
    }

    /// Real power, as `exp(q·ln(self))` unless `q` is an integer.
    fn pow(&self, q: f64) -> Result<Self, JetError> {
        if q.fract() == 0.0 && q.abs() <= i32::MAX as f64 {
            self.powi(q as i64)
        } else {
            Ok(self.try_ln()?.scale(q).exp())
        }
    }
}

impl Scalar for f64 {
    fn value(&self) -> f64 {
        *self
    }

    fn lift(&self, c: f64) -> f64 {
        c
    }

    fn scale(&self, c: f64) -> f64 {
        self * c
    }

    fn try_div(&self, rhs: &f64) -> Result<f64, JetError> {
        if *rhs == 0.0 || !rhs.is_finite() {
            return Err(JetError::Singular { op: "division", value: *rhs });
        }
        Ok(self / rhs)
    }

    fn try_sqrt(&self) -> Result<f64, JetError> {
        if !(*self > 0.0) {
            return Err(JetError::Singular { op: "sqrt", value: *self });
        }
        Ok(f64::sqrt(*self))
    }

    fn try_ln(&self) -> Result<f64, JetError> {
        if !(*self > 0.0) {
            return Err(JetError::Singular { op: "log", value: *self });
        }
        Ok(f64::ln(*self))
    }

    fn exp(&self) -> f64 {
        f64::exp(*self)
    }

    fn sin(&self) -> f64 {
        f64::sin_cos(*self).0
    }

    fn cos(&self) -> f64 {
        f64::sin_cos(*self).1
    }
}

impl Scalar for Jet {
    fn value(&self) -> f64 {
        Jet::value(self)
    }

    fn lift(&self, c: f64) -> Jet {
        self.constant_like(c)
    }

    fn scale(&self, c: f64) -> Jet {
        Jet::scale(self, c)
    }

    fn try_div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        Jet::try_div(self, rhs)
    }

    fn try_sqrt(&self) -> Result<Jet, JetError> {
        self.sqrt()
    }

    fn try_ln(&self) -> Result<Jet, JetError> {
        self.ln()
    }

    fn exp(&self) -> Jet {
        Jet::exp(self)
    }

    fn sin(&self) -> Jet {
        Jet::sin(self)
    }

    fn cos(&self) -> Jet {
        Jet::cos(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn powi_matches_multiplication() {
        let x = 1.3f64;
        assert_eq!(Scalar::powi(&x, 2).unwrap(), x * x);
        assert_eq!(Scalar::powi(&x, 0).unwrap(), 1.0);
        assert_eq!(Scalar::powi(&x, -1).unwrap(), 1.0 / x);
        assert!(Scalar::powi(&0.0f64, -2).is_err());
    }

    #[test]
    fn fractional_pow_needs_positive_base() {
        assert!(Scalar::pow(&-2.0f64, 0.5).is_err());
        assert_eq!(Scalar::pow(&-2.0f64, 3.0).unwrap(), -8.0);
        let v = Scalar::pow(&4.0f64, 0.5).unwrap();
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn order_zero_jet_is_bit_identical() {
        let a = 0.37f64;
        let b = -1.91f64;
        let ja = Jet::constant(2, a, 0).unwrap();
        let jb = Jet::constant(2, b, 0).unwrap();
        assert_eq!((&ja + &jb).value().to_bits(), (a + b).to_bits());
        assert_eq!((&ja - &jb).value().to_bits(), (a - b).to_bits());
        assert_eq!((&ja * &jb).value().to_bits(), (a * b).to_bits());
        assert_eq!(ja.try_div(&jb).unwrap().value().to_bits(), (a / b).to_bits());
        assert_eq!(Scalar::sin(&ja).value().to_bits(), a.sin().to_bits());
        assert_eq!(Scalar::exp(&jb).value().to_bits(), b.exp().to_bits());
        assert_eq!(Scalar::pow(&ja, 1.5).unwrap().value().to_bits(), Scalar::pow(&a, 1.5).unwrap().to_bits());
    }
}
