//! Finite model of `Q_p` at working precision: residues, unit groups with
//! discrete logarithms, and the additive character `ψ` of conductor 0.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Scalar, ScaledScalar};

/// Largest modulus for which a discrete-log table is built by default.
pub const DEFAULT_TABLE_BUDGET: u64 = 1 << 24;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_odd_prime(p: u64) -> Result<()> {
    if p % 2 == 1 && is_prime(p) {
        Ok(())
    } else {
        Err(Error::BadPrime(p))
    }
}

pub fn pow_u64(p: u64, e: u32) -> u64 {
    p.checked_pow(e).expect("prime power overflows u64")
}

/// Largest `e` with `p^e < 2^62`, the precision used for exact constants.
pub fn max_precision(p: u64) -> u32 {
    let mut e = 0;
    let mut x: u64 = 1;
    while let Some(y) = x.checked_mul(p).filter(|y| *y < 1 << 62) {
        x = y;
        e += 1;
    }
    e
}

/// `φ(p^t)`, with `φ(p^0) = 1`.
pub fn totient_prime_power(p: u64, t: u32) -> u64 {
    if t == 0 {
        1
    } else {
        pow_u64(p, t - 1) * (p - 1)
    }
}

pub fn mod_pow(base: u64, mut e: u64, m: u64) -> u64 {
    let m128 = m as u128;
    let mut b = base as u128 % m128;
    let mut acc = 1u128 % m128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        e >>= 1;
    }
    acc as u64
}

/// Inverse of `x` modulo `m`, if `gcd(x, m) = 1`.
pub fn mod_inverse(x: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let g = (x as i128).extended_gcd(&(m as i128));
    (g.gcd == 1).then(|| g.x.rem_euclid(m as i128) as u64)
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// The residue field data of `Q_p` together with a working level `T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundField {
    pub p: u64,
    pub level: u32,
}

impl GroundField {
    pub fn new(p: u64, level: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        Ok(GroundField { p, level })
    }

    /// Residue cardinality; the uniformizer is `p` itself.
    pub fn q(&self) -> u64 {
        self.p
    }

    pub fn unit_group(&self) -> Result<Arc<UnitGroup>> {
        unit_group(self.p, self.level)
    }
}

/// `(Z/p^t)^×` with its smallest generator and a complete discrete-log table.
pub struct UnitGroup {
    p: u64,
    t: u32,
    modulus: u64,
    order: u64,
    generator: u64,
    dlog: Vec<u32>,
    powers: Vec<u32>,
}

impl fmt::Debug for UnitGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitGroup")
            .field("p", &self.p)
            .field("t", &self.t)
            .field("order", &self.order)
            .field("generator", &self.generator)
            .finish()
    }
}

const NOT_A_UNIT: u32 = u32::MAX;

impl UnitGroup {
    pub fn build(p: u64, t: u32, budget: u64) -> Result<Self> {
        check_odd_prime(p)?;
        if t == 0 {
            return Err(Error::ZeroLevel);
        }
        let modulus = p
            .checked_pow(t)
            .filter(|m| *m <= budget)
            .ok_or(Error::TableBudget {
                modulus: p.saturating_pow(t),
                budget,
            })?;
        let order = totient_prime_power(p, t);
        let factors = prime_factors(order);
        let generator = (2..modulus)
            .filter(|g| g % p != 0)
            .find(|g| factors.iter().all(|l| mod_pow(*g, order / l, modulus) != 1))
            .expect("(Z/p^t)^× is cyclic for odd p");
        let mut dlog = vec![NOT_A_UNIT; modulus as usize];
        let mut powers = Vec::with_capacity(order as usize);
        let mut x = 1u64;
        for j in 0..order {
            dlog[x as usize] = j as u32;
            powers.push(x as u32);
            x = x * generator % modulus;
        }
        Ok(UnitGroup {
            p,
            t,
            modulus,
            order,
            generator,
            dlog,
            powers,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.t
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn dlog(&self, x: u64) -> Result<u64> {
        match self.dlog[(x % self.modulus) as usize] {
            NOT_A_UNIT => Err(Error::NonUnit { x, p: self.p }),
            j => Ok(j as u64),
        }
    }

    /// Table lookup for callers that already know `x` is a unit below the modulus.
    #[inline]
    pub fn dlog_unit(&self, x: u64) -> u64 {
        let j = self.dlog[x as usize];
        debug_assert_ne!(j, NOT_A_UNIT);
        j as u64
    }

    /// `g^j mod p^t`.
    #[inline]
    pub fn power(&self, j: u64) -> u64 {
        self.powers[(j % self.order) as usize] as u64
    }

    /// Units in increasing residue order.
    pub fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..self.modulus).filter(move |x| x % self.p != 0)
    }
}

type GroupCache = RwLock<HashMap<(u64, u32), Arc<UnitGroup>>>;

fn group_cache() -> &'static GroupCache {
    static CACHE: OnceLock<GroupCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared, read-only unit group for `(p, t)` under the default table budget.
pub fn unit_group(p: u64, t: u32) -> Result<Arc<UnitGroup>> {
    if let Some(g) = group_cache().read().unwrap().get(&(p, t)) {
        return Ok(g.clone());
    }
    let built = Arc::new(UnitGroup::build(p, t, DEFAULT_TABLE_BUDGET)?);
    let mut w = group_cache().write().unwrap();
    Ok(w.entry((p, t)).or_insert(built).clone())
}

pub fn dlog(ug: &UnitGroup, x: u64) -> Result<u64> {
    ug.dlog(x)
}

/// A nonzero element `unit·p^val` of `Q_p`, the unit known mod `p^prec`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadicNumber {
    p: u64,
    unit: u64,
    val: i64,
    prec: u32,
}

impl PadicNumber {
    pub fn new(p: u64, unit: u64, val: i64, prec: u32) -> Result<Self> {
        check_odd_prime(p)?;
        if unit.is_multiple_of(p) {
            return Err(Error::NonUnit { x: unit, p });
        }
        let m = pow_u64(p, prec);
        Ok(PadicNumber {
            p,
            unit: if prec == 0 { 1 } else { unit % m },
            val,
            prec,
        })
    }

    /// A nonzero integer, its unit part kept mod `p^prec`.
    pub fn from_integer(p: u64, n: i64, prec: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Zero);
        }
        let mut n = n as i128;
        let mut val = 0;
        while n % p as i128 == 0 {
            n /= p as i128;
            val += 1;
        }
        let m = pow_u64(p, prec) as i128;
        Self::new(p, n.rem_euclid(m.max(p as i128)) as u64, val, prec)
    }

    pub fn one(p: u64, prec: u32) -> Self {
        Self::new(p, 1, 0, prec).expect("p validated by caller")
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn unit(&self) -> u64 {
        self.unit
    }

    pub fn valuation(&self) -> i64 {
        self.val
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    /// Unit part reduced mod `p^level`.
    pub fn unit_mod(&self, level: u32) -> Result<u64> {
        if level > self.prec {
            return Err(Error::Precision {
                have: self.prec,
                need: level,
            });
        }
        Ok(self.unit % pow_u64(self.p, level))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let m = pow_u64(self.p, prec) as u128;
        let unit = if prec == 0 {
            1
        } else {
            (self.unit as u128 * other.unit as u128 % m) as u64
        };
        PadicNumber {
            p: self.p,
            unit,
            val: self.val + other.val,
            prec,
        }
    }

    pub fn inv(&self) -> Self {
        let m = pow_u64(self.p, self.prec);
        PadicNumber {
            unit: if self.prec == 0 {
                1
            } else {
                mod_inverse(self.unit, m).expect("unit part is coprime to p")
            },
            val: -self.val,
            ..*self
        }
    }

    pub fn neg(&self) -> Self {
        let m = pow_u64(self.p, self.prec);
        PadicNumber {
            unit: if self.prec == 0 { 1 } else { m - self.unit },
            ..*self
        }
    }

    /// `p^k·self`.
    pub fn shift(&self, k: i64) -> Self {
        PadicNumber {
            val: self.val + k,
            ..*self
        }
    }

    /// Sum at the common absolute precision; `None` when it vanishes there.
    pub fn add(&self, other: &Self) -> Option<Self> {
        let abs = (self.val + self.prec as i64).min(other.val + other.prec as i64);
        let v = self.val.min(other.val);
        if abs <= v {
            return None;
        }
        let width = (abs - v) as u32;
        let m = pow_u64(self.p, width) as u128;
        let lift = |x: &Self| {
            x.unit as u128 * pow_u64(self.p, (x.val - v) as u32) as u128 % m
        };
        let mut s = (lift(self) + lift(other)) % m;
        if s == 0 {
            return None;
        }
        let mut w = 0;
        while s.is_multiple_of(self.p as u128) {
            s /= self.p as u128;
            w += 1;
        }
        Some(PadicNumber {
            p: self.p,
            unit: s as u64,
            val: v + w as i64,
            prec: width - w,
        })
    }
}

impl fmt::Display for PadicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}·{}^{} (mod {}^{})", self.unit, self.p, self.val, self.p, self.prec)
    }
}

/// `|x| = q^{-v(x)}`.
pub fn padic_abs<S: Scalar>(x: &PadicNumber) -> ScaledScalar<S> {
    ScaledScalar::q_power(Rational64::from_integer(-x.val), x.p)
}

/// `ψ(x) = ζ_order^k` as the pair `(k, order)`; `(0, 1)` on `O`.
pub fn psi_root(x: &PadicNumber) -> Result<(u64, u64)> {
    if x.val >= 0 {
        return Ok((0, 1));
    }
    let m = (-x.val) as u32;
    Ok((x.unit_mod(m)?, pow_u64(x.p, m)))
}

/// The standard additive character, `ψ(u·p^{-m}) = e(u/p^m)`, `n(ψ) = 0`.
pub fn psi_eval<S: Scalar>(x: &PadicNumber) -> Result<S> {
    let (k, order) = psi_root(x)?;
    Ok(S::root_of_unity(k as i64, order))
}

/// `ψ_a(x) = ψ(a·x)`; the standard character is `a = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdditiveCharacter {
    twist: PadicNumber,
}

impl AdditiveCharacter {
    pub fn standard(p: u64) -> Result<Self> {
        check_odd_prime(p)?;
        Ok(AdditiveCharacter {
            twist: PadicNumber::one(p, max_precision(p)),
        })
    }

    pub fn twisted(twist: PadicNumber) -> Self {
        AdditiveCharacter { twist }
    }

    pub fn twist(&self) -> &PadicNumber {
        &self.twist
    }

    pub fn p(&self) -> u64 {
        self.twist.p
    }

    /// `n(ψ_a) = n(ψ) - v(a)`.
    pub fn conductor(&self) -> i64 {
        -self.twist.val
    }

    pub fn root(&self, x: &PadicNumber) -> Result<(u64, u64)> {
        psi_root(&self.twist.mul(x))
    }

    pub fn eval<S: Scalar>(&self, x: &PadicNumber) -> Result<S> {
        psi_eval(&self.twist.mul(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::CycNumber;

    #[test]
    fn small_unit_groups() {
        let g = unit_group(3, 1).unwrap();
        assert_eq!((g.order(), g.generator()), (2, 2));
        let g = unit_group(5, 2).unwrap();
        assert_eq!((g.order(), g.generator()), (20, 2));
        assert_eq!(g.dlog(1).unwrap(), 0);
        assert_eq!(g.dlog(4).unwrap(), 2);
        assert_eq!(g.dlog(24).unwrap(), 10);
        assert!(g.dlog(10).is_err());
    }

    #[test]
    fn generator_for_49_has_full_order() {
        let g = unit_group(7, 2).unwrap();
        let x = g.generator();
        // divisors of 42 below 42
        for k in [1, 2, 3, 6, 7, 14, 21] {
            assert_ne!(mod_pow(x, k, 49), 1);
        }
        assert_eq!(mod_pow(x, 42, 49), 1);
    }

    #[test]
    fn rejects_bad_primes_and_budgets() {
        assert_eq!(UnitGroup::build(2, 3, 100).unwrap_err(), Error::BadPrime(2));
        assert_eq!(UnitGroup::build(9, 1, 100).unwrap_err(), Error::BadPrime(9));
        assert!(matches!(
            UnitGroup::build(7, 4, 1000),
            Err(Error::TableBudget { .. })
        ));
    }

    #[test]
    fn psi_examples() {
        let x = PadicNumber::new(5, 2, -1, 4).unwrap();
        assert_eq!(psi_eval::<CycNumber>(&x).unwrap(), CycNumber::root_of_unity(2, 5).unwrap());
        let y = PadicNumber::new(5, 3, 0, 4).unwrap();
        assert_eq!(psi_eval::<CycNumber>(&y).unwrap(), CycNumber::one());
        let z = PadicNumber::new(5, 7, -3, 4).unwrap();
        let w: CycNumber = psi_eval(&z).unwrap();
        let wn: CycNumber = psi_eval(&z.neg()).unwrap();
        assert_eq!(&w * &wn, CycNumber::one());
    }

    #[test]
    fn abs_examples() {
        let p = PadicNumber::from_integer(5, 5, 3).unwrap();
        assert!(padic_abs::<CycNumber>(&p)
            .approx_eq(&ScaledScalar::q_power(Rational64::from_integer(-1), 5), 0.0));
        let x = PadicNumber::new(5, 3, -2, 3).unwrap();
        assert_eq!(padic_abs::<CycNumber>(&x).coeff(), &CycNumber::from_integer(25));
    }

    #[test]
    fn addition_tracks_valuation() {
        let a = PadicNumber::from_integer(5, 3, 4).unwrap();
        let b = PadicNumber::from_integer(5, 2, 4).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!((s.unit(), s.valuation()), (1, 1));
        assert!(a.add(&a.neg()).is_none());
    }
}
