//! Gauss sums, root numbers and ε-factors as exact monomials in `q^{1/2-s}`,
//! together with block-built representations of `GL_n` and the stability checks.

use std::fmt;

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::characters::{v_chi, MultChar, QuasiChar, ResidueClass};
use crate::error::{Error, Result};
use crate::padic::{pow_u64, unit_group, AdditiveCharacter};
use crate::scalar::{Scalar, ScaledScalar, DEFAULT_TOLERANCE};

/// `ε(s) = value·q^{xexp·(1/2 - s)}`.
#[derive(Clone, Debug)]
pub struct EpsMonomial<S: Scalar> {
    value: ScaledScalar<S>,
    xexp: i64,
}

impl<S: Scalar> EpsMonomial<S> {
    pub fn new(value: ScaledScalar<S>, xexp: i64) -> Self {
        let xexp = if value.is_zero() { 0 } else { xexp };
        EpsMonomial { value, xexp }
    }

    pub fn one(q: u64) -> Self {
        EpsMonomial::new(ScaledScalar::one(q), 0)
    }

    pub fn value(&self) -> &ScaledScalar<S> {
        &self.value
    }

    pub fn xexp(&self) -> i64 {
        self.xexp
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(EpsMonomial::new(
            self.value.try_mul(&other.value)?,
            self.xexp + other.xexp,
        ))
    }

    pub fn pow(&self, e: u32) -> Self {
        EpsMonomial::new(self.value.pow(e), self.xexp * e as i64)
    }

    pub fn mul_scalar(&self, s: &S) -> Self {
        EpsMonomial::new(self.value.mul_scalar(s), self.xexp)
    }

    /// `s ↦ 1 - s`: the same value with the exponent negated.
    pub fn reflect(&self) -> Self {
        EpsMonomial::new(self.value.clone(), -self.xexp)
    }

    /// The value at a rational point `s`.
    pub fn eval_at(&self, s: Rational64) -> ScaledScalar<S> {
        self.value
            .mul_q_power(Rational64::from_integer(self.xexp) * (Rational64::new(1, 2) - s))
    }

    /// Exponents must agree and values compare at `tolerance` (ignored when exact).
    /// Two vanishing monomials are equal whatever their exponents.
    pub fn approx_eq(&self, other: &Self, tolerance: f64) -> bool {
        if self.value.is_zero_within(tolerance) && other.value.is_zero_within(tolerance) {
            return true;
        }
        self.xexp == other.xexp && self.value.approx_eq(&other.value, tolerance)
    }
}

impl<S: Scalar> fmt::Display for EpsMonomial<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]·q^({}(1/2-s))", self.value, self.xexp)
    }
}

/// Serializable view of an [`EpsMonomial`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsRecord {
    pub value_repr: String,
    pub value_complex: [f64; 2],
    pub xexp: i64,
}

impl<S: Scalar> From<&EpsMonomial<S>> for EpsRecord {
    fn from(e: &EpsMonomial<S>) -> Self {
        let z = e.value.to_complex();
        EpsRecord {
            value_repr: e.value.to_string(),
            value_complex: [z.re, z.im],
            xexp: e.xexp,
        }
    }
}

/// Counts of `ζ_N^e` for `N = p^t(p-1)`, the field of all level-`t` sums.
struct LevelSum {
    p: u64,
    counts: Vec<i64>,
}

impl LevelSum {
    fn new(p: u64, t: u32) -> Self {
        LevelSum {
            p,
            counts: vec![0; (pow_u64(p, t) * (p - 1)) as usize],
        }
    }

    /// Adds `ζ_{φ(p^t)}^chi_exp · ζ_{p^t}^psi_exp`.
    #[inline]
    fn push(&mut self, chi_exp: u64, psi_exp: u64) {
        let n = self.counts.len() as u64;
        let e = (chi_exp * self.p + psi_exp * (self.p - 1)) % n;
        self.counts[e as usize] += 1;
    }

    fn finish<S: Scalar>(self) -> S {
        S::from_root_counts(self.counts.len() as u64, &self.counts)
    }
}

/// `Σ_{x ∈ (Z/p^t)^×} χ(x)ψ(x·p^{-t})`, summed over residues in increasing order.
pub fn gauss_sum_full_level<S: Scalar>(chi: &MultChar, t: u32) -> Result<S> {
    if t == 0 || t < chi.conductor() {
        return Err(Error::Precondition(format!(
            "level {t} must be at least max(1, a(χ)) for {chi}"
        )));
    }
    let chi_t = chi.induce(t)?;
    let ug = unit_group(chi.p, t)?;
    let phi = ug.order();
    let mut acc = LevelSum::new(chi.p, t);
    for x in ug.units() {
        let e = (chi_t.k as u128 * ug.dlog_unit(x) as u128 % phi as u128) as u64;
        acc.push(e, x);
    }
    Ok(acc.finish())
}

/// The classical Gauss sum `τ(χ)` at the conductor level.
pub fn gauss_sum<S: Scalar>(chi: &MultChar) -> Result<S> {
    let a = chi.conductor();
    if a == 0 {
        return Err(Error::Unramified);
    }
    gauss_sum_full_level(chi, a)
}

/// `W(χ) = τ(χ^{-1})·q^{-a(χ)/2}`.
///
/// Asserts that it agrees with the other classical expression
/// `χ(-1)·conj(τ(χ))·q^{-a(χ)/2}`.
pub fn root_number<S: Scalar>(chi: &MultChar) -> Result<ScaledScalar<S>> {
    let a = chi.conductor();
    if a == 0 {
        return Err(Error::Unramified);
    }
    let tau_inv: S = gauss_sum(&chi.inverse())?;
    let tau: S = gauss_sum(chi)?;
    let other = tau.conj().scale((chi.sign() as i128).into());
    assert!(
        tau_inv.approx_eq(&other, DEFAULT_TOLERANCE),
        "root number expressions disagree for {chi}"
    );
    Ok(ScaledScalar::new(tau_inv, Rational64::new(-(a as i64), 2), chi.p))
}

/// Where ε-factor computations get their Gauss sums from.
pub trait GaussSource<S: Scalar>: Sync {
    /// `τ(χ)` at the conductor level for ramified `χ`.
    fn gauss(&self, chi: &MultChar) -> Result<S>;
}

/// Recomputes every Gauss sum from scratch.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectGauss;

impl<S: Scalar> GaussSource<S> for DirectGauss {
    fn gauss(&self, chi: &MultChar) -> Result<S> {
        gauss_sum(chi)
    }
}

fn root_number_from<S: Scalar>(src: &impl GaussSource<S>, chi: &MultChar) -> Result<ScaledScalar<S>> {
    let a = chi.conductor();
    if a == 0 {
        return Ok(ScaledScalar::one(chi.p));
    }
    let tau = src.gauss(&chi.inverse())?;
    Ok(ScaledScalar::new(tau, Rational64::new(-(a as i64), 2), chi.p))
}

/// `ε(s, χ'|·|^{s'}, ψ_b)` with `ψ_b(x) = ψ(bx)`.
///
/// With `m = a(χ') - n(ψ_b)` the factor is `W(χ')·χ'(b)·q^{-m·s'}·q^{m(1/2-s)}`.
pub fn eps_gl1<S: Scalar>(
    src: &impl GaussSource<S>,
    chi: &QuasiChar,
    psi: &AdditiveCharacter,
) -> Result<EpsMonomial<S>> {
    let f = &chi.finite;
    let m = f.conductor() as i64 - psi.conductor();
    let w = root_number_from(src, f)?;
    let twist = psi.twist();
    let chi_b: S = if f.level == 0 || twist.unit() == 1 {
        S::one()
    } else {
        f.eval(twist)?
    };
    let value = w
        .mul_scalar(&chi_b)
        .mul_q_power(-Rational64::from_integer(m) * chi.shift);
    Ok(EpsMonomial::new(value, m))
}

fn eps_standard<S: Scalar>(src: &impl GaussSource<S>, chi: &QuasiChar) -> Result<EpsMonomial<S>> {
    eps_gl1(src, chi, &AdditiveCharacter::standard(chi.finite.p)?)
}

/// Outcome of the GL(1) stability comparison for one pair `(μ, χ)`.
#[derive(Clone, Debug)]
pub struct Gl1StabilityReport<S: Scalar> {
    pub mu: MultChar,
    pub chi: MultChar,
    pub v_class: ResidueClass,
    /// `ε(1/2, μχ, ψ)`.
    pub lhs: ScaledScalar<S>,
    /// `μ(v_χ)·ε(1/2, χ, ψ)`.
    pub rhs_stated: ScaledScalar<S>,
    /// `μ(v_χ)^{-1}·ε(1/2, χ, ψ)`.
    pub rhs_inverse: ScaledScalar<S>,
    pub stated_holds: bool,
    pub inverse_holds: bool,
    /// `μ(v)` agrees across every representative of the class.
    pub representative_independent: bool,
}

/// Compares `ε(1/2, μχ)` with `μ(v_χ)^{±1}·ε(1/2, χ)` for `2a(μ) ≤ a(χ)`.
pub fn gl1_stability_check<S: Scalar>(
    src: &impl GaussSource<S>,
    mu: &MultChar,
    chi: &MultChar,
    tolerance: f64,
) -> Result<Gl1StabilityReport<S>> {
    let (am, ac) = (mu.conductor(), chi.conductor());
    if ac == 0 || 2 * am > ac {
        return Err(Error::Precondition(format!(
            "need 2a(μ) ≤ a(χ) and a(χ) ≥ 1, got a(μ) = {am}, a(χ) = {ac}"
        )));
    }
    let psi = AdditiveCharacter::standard(chi.p)?;
    let class = v_chi(chi, &psi)?;
    let prod = QuasiChar::unitary(mu.mul(chi)?);
    let lhs = eps_gl1::<S>(src, &prod, &psi)?.value().clone();
    let base = eps_gl1::<S>(src, &QuasiChar::unitary(*chi), &psi)?.value().clone();

    let level = class.m + 1;
    let mu_at = mu.induce(level.max(mu.level))?;
    let values: Vec<S> = class
        .representatives(level)
        .into_iter()
        .map(|v| mu_at.eval_unit::<S>(v))
        .collect::<Result<_>>()?;
    let representative_independent = values.iter().all(|x| x.approx_eq(&values[0], tolerance));
    let mu_v = values[0].clone();
    let rhs_stated = base.mul_scalar(&mu_v);
    let rhs_inverse = base.mul_scalar(&mu_v.conj());
    Ok(Gl1StabilityReport {
        mu: *mu,
        chi: *chi,
        v_class: class,
        stated_holds: lhs.approx_eq(&rhs_stated, tolerance),
        inverse_holds: lhs.approx_eq(&rhs_inverse, tolerance),
        lhs,
        rhs_stated,
        rhs_inverse,
        representative_independent,
    })
}

/// `|·|^shift·St(τ, d)`; `d = 1` is the character `τ|·|^shift` itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Block {
    pub tau: MultChar,
    pub shift: Rational64,
    pub d: u32,
}

impl Block {
    pub fn character(tau: MultChar) -> Self {
        Block {
            tau,
            shift: Rational64::zero(),
            d: 1,
        }
    }

    pub fn steinberg(tau: MultChar, d: u32) -> Self {
        Block {
            tau,
            shift: Rational64::zero(),
            d,
        }
    }

    pub fn with_shift(self, shift: Rational64) -> Self {
        Block { shift, ..self }
    }

    /// `d·a(τ)` for ramified `τ`, `d - 1` otherwise.
    pub fn conductor(&self) -> u32 {
        match self.tau.conductor() {
            0 => self.d - 1,
            a => self.d * a,
        }
    }

    /// `(τ|·|^shift)^d`.
    pub fn central_character(&self) -> QuasiChar {
        QuasiChar::new(
            self.tau.pow(self.d as u64),
            self.shift * Rational64::from_integer(self.d as i64),
        )
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = &self.tau;
        if self.d == 1 {
            write!(f, "chi({},{})", t.level, t.k)?;
        } else {
            write!(f, "St(chi({},{}),{})", t.level, t.k, self.d)?;
        }
        if !self.shift.is_zero() {
            write!(f, "|.|^{}", self.shift)?;
        }
        Ok(())
    }
}

/// A Whittaker-type representation given by its ordered blocks.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RepnData {
    blocks: Vec<Block>,
}

impl RepnData {
    pub fn new(blocks: Vec<Block>) -> Result<Self> {
        let Some(first) = blocks.first() else {
            return Err(Error::Precondition("a representation needs at least one block".into()));
        };
        let p = first.tau.p;
        for b in &blocks {
            if b.tau.p != p {
                return Err(Error::MismatchedPrime(p, b.tau.p));
            }
            if b.d == 0 {
                return Err(Error::Precondition("block size d must be positive".into()));
            }
        }
        if blocks.windows(2).any(|w| w[0].shift < w[1].shift) {
            return Err(Error::LanglandsOrder);
        }
        Ok(RepnData { blocks })
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn p(&self) -> u64 {
        self.blocks[0].tau.p
    }

    pub fn n(&self) -> u32 {
        self.blocks.iter().map(|b| b.d).sum()
    }

    pub fn conductor(&self) -> u32 {
        self.blocks.iter().map(Block::conductor).sum()
    }

    pub fn central_character(&self) -> QuasiChar {
        let p = self.p();
        self.blocks.iter().fold(
            QuasiChar::unitary(MultChar::trivial(p)),
            |acc, b| acc.mul(&b.central_character()).expect("blocks share p"),
        )
    }
}

impl fmt::Display for RepnData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(Block::to_string).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RepInvariants {
    pub n: u32,
    pub conductor: u32,
    pub central: QuasiChar,
}

pub fn rep_invariants(pi: &RepnData) -> RepInvariants {
    RepInvariants {
        n: pi.n(),
        conductor: pi.conductor(),
        central: pi.central_character(),
    }
}

/// The block-wise form of the bound `a(ω_π) ≤ a(π)/n`.
pub fn block_central_bound_holds(block: &Block) -> bool {
    let omega = block.central_character().finite.conductor();
    omega * block.d <= block.conductor()
}

/// `ε(s, χ⊗π, ψ)` as the product of `ε(s + a_i + (d_i-1)/2 - j, χτ_i, ψ)`.
pub fn eps_rep_twisted<S: Scalar>(
    src: &impl GaussSource<S>,
    pi: &RepnData,
    chi: &QuasiChar,
) -> Result<EpsMonomial<S>> {
    let mut acc = EpsMonomial::one(pi.p());
    for b in pi.blocks() {
        acc = acc.mul(&eps_block_twisted(src, b, chi)?)?;
    }
    Ok(acc)
}

/// `ε(s, χ⊗|·|^a St(τ, d), ψ)` for one block.
///
/// Only ramified `χτ` is handled inside a Steinberg block; the unramified
/// case carries an L-factor correction that is not modelled.
pub fn eps_block_twisted<S: Scalar>(
    src: &impl GaussSource<S>,
    b: &Block,
    chi: &QuasiChar,
) -> Result<EpsMonomial<S>> {
    let twisted = chi.twist_finite(&b.tau)?;
    if b.d >= 2 && !twisted.finite.is_ramified() {
        return Err(Error::OutsideVerifiedRegime(format!(
            "χτ is unramified inside the Steinberg block {b}"
        )));
    }
    let mut acc = EpsMonomial::one(b.tau.p);
    for j in 0..b.d {
        let inner = Rational64::new(b.d as i64 - 1 - 2 * j as i64, 2);
        let e = eps_standard(src, &twisted.shifted(b.shift + inner))?;
        acc = acc.mul(&e)?;
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Equal,
    Unequal,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Equal
        } else {
            Verdict::Unequal
        }
    }
}

/// Whether `a(χ) ≥ a(π)`, the hypothesis of the stability theorem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Theorem,
    Exploratory,
}

#[derive(Clone, Debug)]
pub struct StabilityReport<S: Scalar> {
    pub pi: RepnData,
    pub chi: QuasiChar,
    pub lhs: EpsMonomial<S>,
    pub rhs: EpsMonomial<S>,
    pub verdict: Verdict,
    pub regime: Regime,
    pub a_chi: u32,
    pub a_pi: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharRecord {
    pub level: u32,
    pub k: u64,
    pub shift: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub p: u64,
    pub pi: Vec<Block>,
    pub chi: CharRecord,
    pub lhs: EpsRecord,
    pub rhs: EpsRecord,
    pub verdict: Verdict,
    pub regime: Regime,
}

impl<S: Scalar> StabilityReport<S> {
    pub fn record(&self) -> StabilityRecord {
        StabilityRecord {
            p: self.pi.p(),
            pi: self.pi.blocks().to_vec(),
            chi: CharRecord {
                level: self.chi.finite.level,
                k: self.chi.finite.k,
                shift: self.chi.shift.to_string(),
            },
            lhs: (&self.lhs).into(),
            rhs: (&self.rhs).into(),
            verdict: self.verdict,
            regime: self.regime,
        }
    }
}

/// `ε(s, ω_πχ, ψ)·ε(s, χ, ψ)^{n-1}`.
pub fn stability_rhs<S: Scalar>(
    src: &impl GaussSource<S>,
    pi: &RepnData,
    chi: &QuasiChar,
) -> Result<EpsMonomial<S>> {
    let omega_chi = pi.central_character().mul(chi)?;
    let e_chi = eps_standard(src, chi)?;
    eps_standard(src, &omega_chi)?.mul(&e_chi.pow(pi.n() - 1))
}

/// Checks `ε(s, χ⊗π, ψ) = ε(s, ω_πχ, ψ)·ε(s, χ, ψ)^{n-1}` as monomials.
pub fn stability_check<S: Scalar>(
    src: &impl GaussSource<S>,
    pi: &RepnData,
    chi: &QuasiChar,
    tolerance: f64,
) -> Result<StabilityReport<S>> {
    let a_chi = chi.conductor();
    if a_chi == 0 {
        return Err(Error::Unramified);
    }
    let lhs = eps_rep_twisted(src, pi, chi)?;
    let rhs = stability_rhs(src, pi, chi)?;
    let a_pi = pi.conductor();
    Ok(StabilityReport {
        verdict: Verdict::from_bool(lhs.approx_eq(&rhs, tolerance)),
        regime: if a_chi >= a_pi {
            Regime::Theorem
        } else {
            Regime::Exploratory
        },
        pi: pi.clone(),
        chi: *chi,
        lhs,
        rhs,
        a_chi,
        a_pi,
    })
}

/// `q^{a(χ)}` as an integer, the expected `|τ(χ)|²`.
pub fn gauss_norm_target(chi: &MultChar) -> u64 {
    pow_u64(chi.p, chi.conductor())
}

/// `ε(s, χ⊗π_1, ψ) = ε(s, χ⊗π_2, ψ)`, computed block by block on both sides.
pub fn same_central_character_check<S: Scalar>(
    src: &impl GaussSource<S>,
    pi1: &RepnData,
    pi2: &RepnData,
    chi: &QuasiChar,
    tolerance: f64,
) -> Result<bool> {
    let a = eps_rep_twisted(src, pi1, chi)?;
    let b = eps_rep_twisted(src, pi2, chi)?;
    Ok(a.approx_eq(&b, tolerance))
}
