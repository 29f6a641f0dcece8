//! Complex double-precision backend.

use std::f64::consts::TAU;
use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use rustfft::FftPlanner;

use super::{complex_close, BackendMode, Scalar, Q};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloatScalar(pub Complex64);

fn unit(k: i64, order: u64) -> Complex64 {
    // reduce first so large exponents keep full angular precision
    let e = k.rem_euclid(order as i64) as f64;
    Complex64::from_polar(1.0, TAU * e / order as f64)
}

fn rational_to_f64(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

impl fmt::Display for FloatScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.12}{:+.12}i", self.0.re, self.0.im)
    }
}

impl Scalar for FloatScalar {
    const MODE: BackendMode = BackendMode::Float;

    fn zero() -> Self {
        FloatScalar(Complex64::new(0.0, 0.0))
    }

    fn one() -> Self {
        FloatScalar(Complex64::new(1.0, 0.0))
    }

    fn from_rational(value: Q) -> Self {
        FloatScalar(Complex64::new(rational_to_f64(value), 0.0))
    }

    fn root_of_unity(k: i64, order: u64) -> Self {
        assert!(order > 0, "root of unity of order 0");
        FloatScalar(unit(k, order))
    }

    fn from_root_counts(order: u64, counts: &[i64]) -> Self {
        FloatScalar(
            counts
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != 0)
                .map(|(e, c)| unit(e as i64, order) * *c as f64)
                .sum(),
        )
    }

    fn cyclic_dft_of_roots(order: u64, exponents: &[u64]) -> Vec<Self> {
        let mut buf: Vec<Complex64> = exponents.iter().map(|e| unit(*e as i64, order)).collect();
        if buf.is_empty() {
            return Vec::new();
        }
        // rustfft's inverse transform is the unnormalized e^{+2πi jk/m} sum
        FftPlanner::new().plan_fft_inverse(buf.len()).process(&mut buf);
        buf.into_iter().map(FloatScalar).collect()
    }

    fn add(&self, rhs: &Self) -> Self {
        FloatScalar(self.0 + rhs.0)
    }

    fn sub(&self, rhs: &Self) -> Self {
        FloatScalar(self.0 - rhs.0)
    }

    fn mul(&self, rhs: &Self) -> Self {
        FloatScalar(self.0 * rhs.0)
    }

    fn neg(&self) -> Self {
        FloatScalar(-self.0)
    }

    fn conj(&self) -> Self {
        FloatScalar(self.0.conj())
    }

    fn scale(&self, r: Q) -> Self {
        FloatScalar(self.0 * rational_to_f64(r))
    }

    fn pow(&self, e: u32) -> Self {
        FloatScalar(self.0.powi(e as i32))
    }

    fn is_exact_zero(&self) -> bool {
        self.0.re == 0.0 && self.0.im == 0.0
    }

    fn is_zero_within(&self, tolerance: f64) -> bool {
        self.0.norm() <= tolerance
    }

    fn mul_q_power(&self, q: u64, r: Rational64) -> Option<Self> {
        let x = *r.numer() as f64 / *r.denom() as f64;
        Some(FloatScalar(self.0 * (q as f64).powf(x)))
    }

    fn to_complex(&self) -> Complex64 {
        self.0
    }

    fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        complex_close(self.0, other.0, tolerance)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_matches_naive_transform() {
        let exps = [2u64, 0, 7, 3, 3, 1, 9, 4, 5, 6, 8];
        let fast = FloatScalar::cyclic_dft_of_roots(10, &exps);
        let m = exps.len() as i64;
        for (k, got) in fast.iter().enumerate() {
            let naive: Complex64 = exps
                .iter()
                .enumerate()
                .map(|(j, e)| unit(*e as i64, 10) * unit(j as i64 * k as i64, m as u64))
                .sum();
            assert!(complex_close(got.0, naive, 1e-12));
        }
    }

    #[test]
    fn sqrt_five_by_q_power() {
        let v = FloatScalar::one().mul_q_power(5, Rational64::new(1, 2)).unwrap();
        assert!((v.0.re - 5f64.sqrt()).abs() < 1e-12);
    }
}
