//! Finite-order characters of `Q_p^×` normalized by `χ(p) = 1`.

use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{
    check_odd_prime, pow_u64, totient_prime_power, unit_group, AdditiveCharacter, PadicNumber,
};
use crate::scalar::Scalar;

/// `χ(g_t) = ζ_{φ(p^t)}^k` for the smallest generator `g_t` of `(Z/p^t)^×`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultChar {
    pub p: u64,
    pub level: u32,
    pub k: u64,
}

impl fmt::Display for MultChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chi[p={}, level={}, k={}]", self.p, self.level, self.k)
    }
}

impl MultChar {
    pub fn new(p: u64, level: u32, k: u64) -> Result<Self> {
        check_odd_prime(p)?;
        Ok(MultChar {
            p,
            level,
            k: k % totient_prime_power(p, level),
        })
    }

    pub fn trivial(p: u64) -> Self {
        MultChar { p, level: 0, k: 0 }
    }

    /// Order of the value group, `φ(p^level)`.
    pub fn value_order(&self) -> u64 {
        totient_prime_power(self.p, self.level)
    }

    pub fn is_trivial(&self) -> bool {
        self.k == 0
    }

    /// `χ(x) = ζ_{φ(p^level)}^e` for a unit residue `x`, returned as `e`.
    pub fn exponent_of_unit(&self, x: u64) -> Result<u64> {
        if self.level == 0 {
            if x.is_multiple_of(self.p) {
                return Err(Error::NonUnit { x, p: self.p });
            }
            return Ok(0);
        }
        let ug = unit_group(self.p, self.level)?;
        let d = ug.dlog(x)?;
        Ok(((self.k as u128 * d as u128) % self.value_order() as u128) as u64)
    }

    pub fn eval_unit<S: Scalar>(&self, x: u64) -> Result<S> {
        let e = self.exponent_of_unit(x)?;
        Ok(S::root_of_unity(e as i64, self.value_order()))
    }

    /// `χ(x)`; the valuation of `x` is ignored since `χ(p) = 1`.
    pub fn eval<S: Scalar>(&self, x: &PadicNumber) -> Result<S> {
        self.check_prime(x.p())?;
        if self.level == 0 {
            return Ok(S::one());
        }
        self.eval_unit(x.unit_mod(self.level)?)
    }

    fn check_prime(&self, p: u64) -> Result<()> {
        if self.p == p {
            Ok(())
        } else {
            Err(Error::MismatchedPrime(self.p, p))
        }
    }

    /// `a(χ)`. The filtration step `1 + p^a` is the subgroup of order
    /// `p^{level-a}` of the cyclic group, so `χ` kills it iff `p^{level-a} | k`.
    pub fn conductor(&self) -> u32 {
        if self.k == 0 {
            return 0;
        }
        let mut a = self.level;
        let mut k = self.k;
        while a > 1 && k.is_multiple_of(self.p) {
            k /= self.p;
            a -= 1;
        }
        a
    }

    pub fn is_ramified(&self) -> bool {
        self.conductor() > 0
    }

    /// The same character represented at `level`, which must be at least `a(χ)`.
    pub fn induce(&self, level: u32) -> Result<Self> {
        if level == self.level {
            return Ok(*self);
        }
        let conductor = self.conductor();
        if level < conductor {
            return Err(Error::LevelTooLow { conductor, level });
        }
        if level == 0 || self.k == 0 {
            return Ok(MultChar {
                p: self.p,
                level,
                k: 0,
            });
        }
        let target = unit_group(self.p, level)?;
        // χ(g_level) read off at the current level; any lift works above a(χ)
        let num = self.exponent_of_unit(target.generator() % pow_u64(self.p, self.level))? as u128;
        let from = self.value_order() as u128;
        let to = target.order() as u128;
        let k = if to >= from {
            num * (to / from)
        } else {
            let ratio = from / to;
            debug_assert_eq!(num % ratio, 0);
            num / ratio
        };
        Ok(MultChar {
            p: self.p,
            level,
            k: (k % to) as u64,
        })
    }

    /// Representation at the conductor level.
    pub fn primitive(&self) -> Self {
        self.induce(self.conductor()).expect("conductor level is admissible")
    }

    pub fn inverse(&self) -> Self {
        let m = self.value_order();
        MultChar {
            k: (m - self.k) % m,
            ..*self
        }
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_prime(other.p)?;
        let level = self.level.max(other.level);
        let a = self.induce(level)?;
        let b = other.induce(level)?;
        Ok(MultChar {
            k: (a.k + b.k) % a.value_order(),
            ..a
        })
    }

    pub fn pow(&self, e: u64) -> Self {
        let m = self.value_order() as u128;
        MultChar {
            k: (self.k as u128 * e as u128 % m) as u64,
            ..*self
        }
    }

    /// `χ(-1) = ±1`.
    pub fn sign(&self) -> i64 {
        if self.level == 0 {
            return 1;
        }
        let e = self
            .exponent_of_unit(pow_u64(self.p, self.level) - 1)
            .expect("-1 is a unit");
        if e == 0 {
            1
        } else {
            -1
        }
    }
}

/// All `φ(p^t)` characters of level `t`, optionally restricted to conductor `a`.
pub fn enumerate_chars(p: u64, t: u32, exact_conductor: Option<u32>) -> Result<Vec<MultChar>> {
    check_odd_prime(p)?;
    if let Some(a) = exact_conductor {
        if a > t {
            return Err(Error::Precondition(format!("conductor {a} exceeds level {t}")));
        }
    }
    if t > 0 {
        unit_group(p, t)?;
    }
    Ok((0..totient_prime_power(p, t))
        .map(|k| MultChar { p, level: t, k })
        .filter(|c| exact_conductor.is_none_or(|a| c.conductor() == a))
        .collect())
}

/// `χ'·|·|^s` with `χ'` of finite order and rational `s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuasiChar {
    pub finite: MultChar,
    pub shift: Rational64,
}

impl fmt::Display for QuasiChar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.finite.primitive();
        if self.shift == Rational64::from_integer(0) {
            write!(f, "chi({},{})", c.level, c.k)
        } else {
            write!(f, "chi({},{})|.|^{}", c.level, c.k, self.shift)
        }
    }
}

impl QuasiChar {
    pub fn new(finite: MultChar, shift: Rational64) -> Self {
        QuasiChar { finite, shift }
    }

    pub fn unitary(finite: MultChar) -> Self {
        QuasiChar {
            finite,
            shift: Rational64::from_integer(0),
        }
    }

    pub fn conductor(&self) -> u32 {
        self.finite.conductor()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(QuasiChar {
            finite: self.finite.mul(&other.finite)?,
            shift: self.shift + other.shift,
        })
    }

    pub fn twist_finite(&self, other: &MultChar) -> Result<Self> {
        Ok(QuasiChar {
            finite: self.finite.mul(other)?,
            shift: self.shift,
        })
    }

    pub fn shifted(&self, by: Rational64) -> Self {
        QuasiChar {
            shift: self.shift + by,
            ..*self
        }
    }

    pub fn inverse(&self) -> Self {
        QuasiChar {
            finite: self.finite.inverse(),
            shift: -self.shift,
        }
    }
}

/// A class of units mod `p^m`; `m = 0` is the vacuous class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueClass {
    pub p: u64,
    pub m: u32,
    pub rep: u64,
}

impl ResidueClass {
    pub fn vacuous(p: u64) -> Self {
        ResidueClass { p, m: 0, rep: 1 }
    }

    pub fn modulus(&self) -> u64 {
        pow_u64(self.p, self.m)
    }

    pub fn contains(&self, v: u64) -> bool {
        !v.is_multiple_of(self.p) && v % self.modulus() == self.rep % self.modulus()
    }

    /// Every unit mod `p^level` in the class; `level ≥ m`.
    pub fn representatives(&self, level: u32) -> Vec<u64> {
        assert!(level >= self.m, "representatives below the class modulus");
        let big = pow_u64(self.p, level);
        let step = self.modulus();
        (0..big / step)
            .map(|i| self.rep % step + i * step)
            .filter(|v| v % self.p != 0)
            .collect()
    }
}

/// All `v mod p^{⌊a/2⌋}` with `χ(1 + u·p^{⌈a/2⌉}) = ψ(u·v·p^{n(ψ)-⌊a/2⌋})` for every `u`.
pub fn v_chi_solutions(chi: &MultChar, psi: &AdditiveCharacter) -> Result<Vec<u64>> {
    let a = chi.conductor();
    if a == 0 {
        return Err(Error::Unramified);
    }
    let fl = a / 2;
    let ce = a - fl;
    let prim = chi.primitive();
    let phi = prim.value_order() as u128;
    let m = pow_u64(chi.p, fl);
    let m128 = m as u128;
    let b0 = psi.twist().unit_mod(fl)? as u128;
    let pc = pow_u64(chi.p, ce);
    let lhs: Vec<u128> = (0..m)
        .map(|u| prim.exponent_of_unit(1 + u * pc).map(|e| e as u128))
        .collect::<Result<_>>()?;
    // ζ_φ^e = ζ_m^w  ⇔  e·m ≡ w·φ (mod φ·m)
    Ok((1..m.max(2))
        .filter(|v| v % chi.p != 0 || m == 1)
        .filter(|v| {
            (0..m as u128).all(|u| {
                let w = u * *v as u128 % m128 * b0 % m128;
                (lhs[u as usize] * m128) % (phi * m128) == (w * phi) % (phi * m128)
            })
        })
        .collect())
}

/// `v_χ` relative to `ψ`, as a class mod `p^{⌊a(χ)/2⌋}`.
pub fn v_chi(chi: &MultChar, psi: &AdditiveCharacter) -> Result<ResidueClass> {
    let a = chi.conductor();
    if a == 0 {
        return Err(Error::Unramified);
    }
    if a == 1 {
        return Ok(ResidueClass::vacuous(chi.p));
    }
    match v_chi_solutions(chi, psi)?.as_slice() {
        [v] => Ok(ResidueClass {
            p: chi.p,
            m: a / 2,
            rep: *v,
        }),
        _ => Err(Error::NoVChi(chi.to_string())),
    }
}
