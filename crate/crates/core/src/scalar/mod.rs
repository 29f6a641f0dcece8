//! Scalar backends: exact cyclotomic numbers and complex floats behind one
//! [`Scalar`] contract, plus [`ScaledScalar`] for values carrying a formal
//! rational power of `q`.

mod cyclotomic;
mod float;
mod scaled;

pub use cyclotomic::{sqrt_of_prime, CycNumber, CycloField, Q};
pub use float::FloatScalar;
pub use scaled::ScaledScalar;

use std::fmt;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ScalarError {
    #[error("root of unity order must be positive")]
    ZeroOrder,
    #[error("cannot add q^{lhs} and q^{rhs} exactly; a float backend is required")]
    IncompatibleQPower { lhs: Rational64, rhs: Rational64 },
    #[error("scaled scalars over different q ({lhs} and {rhs})")]
    MismatchedQ { lhs: u64, rhs: u64 },
}

/// Which arithmetic a computation runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Exact,
    Float,
}

impl fmt::Display for BackendMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendMode::Exact => write!(f, "exact"),
            BackendMode::Float => write!(f, "float"),
        }
    }
}

impl std::str::FromStr for BackendMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(BackendMode::Exact),
            "float" => Ok(BackendMode::Float),
            other => Err(format!("unknown backend `{other}` (expected exact|float)")),
        }
    }
}

/// Default relative tolerance of the float backend.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Backend selection together with the float tolerance.
///
/// Exact-mode comparisons never look at `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backend {
    pub mode: BackendMode,
    pub tolerance: f64,
}

impl Backend {
    pub fn exact() -> Self {
        Backend {
            mode: BackendMode::Exact,
            tolerance: 0.0,
        }
    }

    pub fn float(tolerance: f64) -> Self {
        Backend {
            mode: BackendMode::Float,
            tolerance,
        }
    }
}

impl Default for Backend {
    fn default() -> Self {
        Backend::exact()
    }
}

/// Arithmetic contract shared by the exact and float backends.
///
/// Every character sum in the crate is written once against this trait.
pub trait Scalar: Clone + fmt::Debug + fmt::Display + Send + Sync + 'static {
    const MODE: BackendMode;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(value: Q) -> Self;

    /// `ζ_order^k`. Panics on `order == 0`.
    fn root_of_unity(k: i64, order: u64) -> Self;

    /// `Σ_e counts[e]·ζ_N^e` with `N = counts.len()`.
    fn from_root_counts(order: u64, counts: &[i64]) -> Self;

    /// For `f_j = ζ_order^{exponents[j]}`, returns `F_k = Σ_j ζ_m^{jk} f_j`
    /// for `k = 0..m`, where `m = exponents.len()`.
    fn cyclic_dft_of_roots(order: u64, exponents: &[u64]) -> Vec<Self>;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn conj(&self) -> Self;

    fn scale(&self, r: Q) -> Self {
        self.mul(&Self::from_rational(r))
    }

    fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Structural zero: canonical zero in exact mode, `0.0 + 0.0i` in float mode.
    fn is_exact_zero(&self) -> bool;

    /// Zero test at the backend's resolution.
    fn is_zero_within(&self, tolerance: f64) -> bool;

    /// `self·q^r` when the backend can represent it without a formal exponent.
    fn mul_q_power(&self, q: u64, r: Rational64) -> Option<Self>;

    fn to_complex(&self) -> Complex64;

    /// Equality; exact backends ignore `tolerance`.
    fn approx_eq(&self, other: &Self, tolerance: f64) -> bool;
}

/// Relative comparison used by the float backend, absolute near zero.
pub fn complex_close(a: Complex64, b: Complex64, tolerance: f64) -> bool {
    let scale = a.norm().max(b.norm()).max(1.0);
    (a - b).norm() <= tolerance * scale
}

impl Scalar for CycNumber {
    const MODE: BackendMode = BackendMode::Exact;

    fn zero() -> Self {
        CycNumber::zero()
    }

    fn one() -> Self {
        CycNumber::one()
    }

    fn from_rational(value: Q) -> Self {
        CycNumber::from_rational(value)
    }

    fn root_of_unity(k: i64, order: u64) -> Self {
        CycNumber::root_of_unity(k, order).expect("root of unity of order 0")
    }

    fn from_root_counts(order: u64, counts: &[i64]) -> Self {
        CycNumber::from_root_counts(order, counts)
    }

    fn cyclic_dft_of_roots(order: u64, exponents: &[u64]) -> Vec<Self> {
        // naive O(m²) transform; each output is one pass of root counting
        let m = exponents.len() as u64;
        let big = num_integer::lcm(order, m.max(1));
        let step_in = big / order;
        let step_out = big / m.max(1);
        let mut counts = vec![0i64; big as usize];
        (0..m)
            .map(|k| {
                counts.iter_mut().for_each(|c| *c = 0);
                for (j, e) in exponents.iter().enumerate() {
                    let idx = ((e % order) * step_in + (j as u64 * k % m) * step_out) % big;
                    counts[idx as usize] += 1;
                }
                CycNumber::from_root_counts(big, &counts)
            })
            .collect()
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn conj(&self) -> Self {
        self.conjugate()
    }

    fn scale(&self, r: Q) -> Self {
        CycNumber::scale(self, r)
    }

    fn pow(&self, e: u32) -> Self {
        CycNumber::pow(self, e)
    }

    fn is_exact_zero(&self) -> bool {
        self.is_zero()
    }

    fn is_zero_within(&self, _tolerance: f64) -> bool {
        self.is_zero()
    }

    fn mul_q_power(&self, q: u64, r: Rational64) -> Option<Self> {
        if r.is_integer() {
            let k = r.to_integer();
            let base = q as i128;
            let factor = if k >= 0 {
                Q::from_integer(base.checked_pow(k as u32)?)
            } else {
                Q::new(1, base.checked_pow((-k) as u32)?)
            };
            return Some(CycNumber::scale(self, factor));
        }
        if *r.denom() == 2 {
            let root = sqrt_of_prime(q)?;
            let rest = r - Rational64::new(1, 2);
            return (&root * self).mul_q_power(q, rest);
        }
        None
    }

    fn to_complex(&self) -> Complex64 {
        CycNumber::to_complex(self)
    }

    fn approx_eq(&self, other: &Self, _tolerance: f64) -> bool {
        self == other
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_mode_parses() {
        assert_eq!("exact".parse::<BackendMode>().unwrap(), BackendMode::Exact);
        assert_eq!("float".parse::<BackendMode>().unwrap(), BackendMode::Float);
        assert!("ball".parse::<BackendMode>().is_err());
    }

    #[test]
    fn exact_dft_agrees_with_float_dft() {
        let exps = [0u64, 3, 1, 4, 1, 5];
        let exact = <CycNumber as Scalar>::cyclic_dft_of_roots(7, &exps);
        let float = <FloatScalar as Scalar>::cyclic_dft_of_roots(7, &exps);
        for (a, b) in exact.iter().zip(&float) {
            assert!(complex_close(a.to_complex(), b.to_complex(), 1e-12));
        }
    }

    #[test]
    fn half_power_absorbed_only_when_sqrt_exists() {
        let one = CycNumber::one();
        let r5 = one.mul_q_power(5, Rational64::new(1, 2)).unwrap();
        assert_eq!(&r5 * &r5, CycNumber::from_integer(5));
        assert!(one.mul_q_power(7, Rational64::new(1, 2)).is_none());
        assert!(one.mul_q_power(5, Rational64::new(1, 3)).is_none());
        assert_eq!(
            one.mul_q_power(3, Rational64::from_integer(-2)).unwrap(),
            CycNumber::from_rational(Q::new(1, 9))
        );
    }
}
