//! Scalars carrying a formal rational power of `q`.

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::Zero;

use super::{complex_close, BackendMode, Scalar, ScalarError, Q};

/// `coeff · q^qexp`, kept in a normal form.
///
/// Integer parts of `qexp` are folded into the coefficient, and so is `q^{1/2}`
/// whenever the backend can represent it. A zero coefficient forces
/// `qexp = 0`. In the float backend every power folds, so `qexp` is always 0.
#[derive(Clone, Debug)]
pub struct ScaledScalar<S: Scalar> {
    coeff: S,
    qexp: Rational64,
    q: u64,
}

impl<S: Scalar> ScaledScalar<S> {
    pub fn new(coeff: S, qexp: Rational64, q: u64) -> Self {
        let mut s = ScaledScalar { coeff, qexp, q };
        s.normalize();
        s
    }

    pub fn from_scalar(coeff: S, q: u64) -> Self {
        Self::new(coeff, Rational64::zero(), q)
    }

    pub fn one(q: u64) -> Self {
        Self::from_scalar(S::one(), q)
    }

    pub fn zero(q: u64) -> Self {
        Self::from_scalar(S::zero(), q)
    }

    /// `q^r`.
    pub fn q_power(r: Rational64, q: u64) -> Self {
        Self::new(S::one(), r, q)
    }

    fn normalize(&mut self) {
        if self.coeff.is_exact_zero() {
            self.qexp = Rational64::zero();
            return;
        }
        let whole = self.qexp.floor();
        if !whole.is_zero() {
            if let Some(c) = self.coeff.mul_q_power(self.q, whole) {
                self.coeff = c;
                self.qexp -= whole;
            }
        }
        let half = Rational64::new(1, 2);
        if self.qexp >= half {
            if let Some(c) = self.coeff.mul_q_power(self.q, half) {
                self.coeff = c;
                self.qexp -= half;
            }
        }
        if !self.qexp.is_zero() {
            if let Some(c) = self.coeff.mul_q_power(self.q, self.qexp) {
                self.coeff = c;
                self.qexp = Rational64::zero();
            }
        }
    }

    pub fn coeff(&self) -> &S {
        &self.coeff
    }

    pub fn qexp(&self) -> Rational64 {
        self.qexp
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn is_zero(&self) -> bool {
        self.coeff.is_exact_zero()
    }

    fn same_q(&self, other: &Self) -> Result<(), ScalarError> {
        if self.q == other.q {
            Ok(())
        } else {
            Err(ScalarError::MismatchedQ {
                lhs: self.q,
                rhs: other.q,
            })
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, ScalarError> {
        self.same_q(other)?;
        Ok(Self::new(
            self.coeff.mul(&other.coeff),
            self.qexp + other.qexp,
            self.q,
        ))
    }

    /// Sum; in the exact backend both sides must share a normalized exponent.
    pub fn try_add(&self, other: &Self) -> Result<Self, ScalarError> {
        self.same_q(other)?;
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.is_zero() {
            return Ok(other.clone());
        }
        if self.qexp != other.qexp {
            return Err(ScalarError::IncompatibleQPower {
                lhs: self.qexp,
                rhs: other.qexp,
            });
        }
        Ok(Self::new(self.coeff.add(&other.coeff), self.qexp, self.q))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, ScalarError> {
        self.try_add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        ScaledScalar {
            coeff: self.coeff.neg(),
            qexp: self.qexp,
            q: self.q,
        }
    }

    /// Complex conjugate; `q^r` is real.
    pub fn conj(&self) -> Self {
        ScaledScalar {
            coeff: self.coeff.conj(),
            qexp: self.qexp,
            q: self.q,
        }
    }

    pub fn mul_scalar(&self, s: &S) -> Self {
        Self::new(self.coeff.mul(s), self.qexp, self.q)
    }

    pub fn scale(&self, r: Q) -> Self {
        Self::new(self.coeff.scale(r), self.qexp, self.q)
    }

    pub fn mul_q_power(&self, r: Rational64) -> Self {
        Self::new(self.coeff.clone(), self.qexp + r, self.q)
    }

    pub fn pow(&self, e: u32) -> Self {
        Self::new(
            self.coeff.pow(e),
            self.qexp * Rational64::from_integer(e as i64),
            self.q,
        )
    }

    pub fn norm_squared(&self) -> Self {
        Self::new(
            self.coeff.mul(&self.coeff.conj()),
            self.qexp * 2,
            self.q,
        )
    }

    /// `embed(coeff)·q^qexp`.
    pub fn to_complex(&self) -> Complex64 {
        let r = *self.qexp.numer() as f64 / *self.qexp.denom() as f64;
        self.coeff.to_complex() * (self.q as f64).powf(r)
    }

    /// Structural equality in the exact backend, tolerance comparison in float.
    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        if self.q != other.q {
            return false;
        }
        match S::MODE {
            BackendMode::Exact => {
                if self.is_zero() || other.is_zero() {
                    return self.is_zero() && other.is_zero();
                }
                self.qexp == other.qexp && self.coeff.approx_eq(&other.coeff, tolerance)
            }
            BackendMode::Float => complex_close(self.to_complex(), other.to_complex(), tolerance),
        }
    }

    /// [`approx_eq`](Self::approx_eq) with the float tolerance taken relative to
    /// `max(scale, |self|, |other|)`, for values that are entries of a larger
    /// family with a known size. The exact backend ignores `scale`.
    pub fn approx_eq_at_scale(&self, other: &Self, tolerance: f64, scale: f64) -> bool {
        match S::MODE {
            BackendMode::Exact => self.approx_eq(other, tolerance),
            BackendMode::Float => {
                let (a, b) = (self.to_complex(), other.to_complex());
                self.q == other.q && (a - b).norm() <= tolerance * scale.max(a.norm()).max(b.norm()).max(1.0)
            }
        }
    }

    /// Exact zero test, or `|value| ≤ tolerance` in the float backend.
    pub fn is_zero_within(&self, tolerance: f64) -> bool {
        match S::MODE {
            BackendMode::Exact => self.is_zero(),
            BackendMode::Float => self.to_complex().norm() <= tolerance,
        }
    }
}

impl<S: Scalar> fmt::Display for ScaledScalar<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.qexp.is_zero() {
            write!(f, "{}", self.coeff)
        } else {
            write!(f, "({}) * q^({})", self.coeff, self.qexp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{CycNumber, FloatScalar};

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn zero_forces_zero_exponent() {
        let z = ScaledScalar::<CycNumber>::new(CycNumber::zero(), r(3, 2), 7);
        assert_eq!(z.qexp(), r(0, 1));
    }

    #[test]
    fn integer_parts_fold() {
        let a = ScaledScalar::<CycNumber>::q_power(r(5, 2), 7);
        assert_eq!(a.qexp(), r(1, 2));
        assert_eq!(a.coeff(), &CycNumber::from_integer(49));
        let b = ScaledScalar::<CycNumber>::q_power(r(-1, 2), 7);
        assert_eq!(b.qexp(), r(1, 2));
        assert_eq!(b.coeff(), &CycNumber::from_rational(Q::new(1, 7)));
    }

    #[test]
    fn half_power_folds_when_sqrt_in_field() {
        let a = ScaledScalar::<CycNumber>::q_power(r(1, 2), 5);
        assert_eq!(a.qexp(), r(0, 1));
        assert!((a.to_complex().re - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn to_complex_of_sqrt() {
        let a = ScaledScalar::<CycNumber>::q_power(r(1, 2), 3);
        assert!((a.to_complex() - Complex64::new(3f64.sqrt(), 0.0)).norm() < 1e-12);
        let f = ScaledScalar::<FloatScalar>::q_power(r(1, 2), 5);
        assert_eq!(f.qexp(), r(0, 1));
        assert!((f.to_complex() - Complex64::new(5f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn mismatched_exponents_refuse_to_add() {
        let a = ScaledScalar::<CycNumber>::q_power(r(1, 2), 7);
        let b = ScaledScalar::<CycNumber>::one(7);
        assert!(matches!(
            a.try_add(&b),
            Err(ScalarError::IncompatibleQPower { .. })
        ));
        let fa = ScaledScalar::<FloatScalar>::q_power(r(1, 2), 7);
        let fb = ScaledScalar::<FloatScalar>::one(7);
        assert!(fa.try_add(&fb).is_ok());
    }

    #[test]
    fn products_add_exponents() {
        let a = ScaledScalar::<CycNumber>::q_power(r(1, 2), 3);
        let sq = a.try_mul(&a).unwrap();
        assert!(sq.approx_eq(&ScaledScalar::from_scalar(CycNumber::from_integer(3), 3), 0.0));
    }
}
