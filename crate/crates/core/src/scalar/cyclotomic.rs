//! Exact arithmetic in cyclotomic fields `Q(ζ_N)`.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(N)-1}` modulo the
//! `N`-th cyclotomic polynomial, with integer numerators over one positive
//! common denominator. Since `Φ_N(x) = Φ_R(x^{N/R})` for `R = rad(N)`, a
//! monomial `ζ^e` reduces through the small table of `y^j mod Φ_R(y)`, which
//! keeps reduction linear in the number of terms.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::ScalarError;

/// Rational coefficient type of [`CycNumber`].
pub type Q = Ratio<i128>;

const OVERFLOW: &str = "cyclotomic coefficient overflow (i128)";

#[inline]
fn cmul(a: i128, b: i128) -> i128 {
    a.checked_mul(b).expect(OVERFLOW)
}

#[inline]
fn cadd(a: i128, b: i128) -> i128 {
    a.checked_add(b).expect(OVERFLOW)
}

/// Reduction data for `Q(ζ_N)`, shared between all elements of that field.
#[derive(Debug)]
pub struct CycloField {
    order: u64,
    stride: u64,
    degree: usize,
    /// `reduction[j]` lists the nonzero `(i, c)` with `y^j ≡ Σ c·y^i (mod Φ_R)`.
    reduction: Vec<Vec<(u32, i64)>>,
}

impl CycloField {
    fn build(order: u64) -> Self {
        let radical = radical(order);
        let stride = order / radical;
        let phi_r = cyclotomic_polynomial(radical);
        let phi_deg = phi_r.len() - 1;
        let mut reduction = Vec::with_capacity(radical as usize);
        let mut cur = vec![0i64; phi_deg];
        cur[0] = 1;
        for _ in 0..radical {
            reduction.push(
                cur.iter()
                    .enumerate()
                    .filter(|(_, c)| **c != 0)
                    .map(|(i, c)| (i as u32, *c))
                    .collect(),
            );
            // multiply by y, then eliminate y^{phi_deg} using the monic Φ_R
            let top = cur[phi_deg - 1];
            let mut next = vec![0i64; phi_deg];
            next[1..phi_deg].copy_from_slice(&cur[..phi_deg - 1]);
            for (slot, c) in next.iter_mut().zip(&phi_r) {
                *slot -= top * c;
            }
            cur = next;
        }
        CycloField {
            order,
            stride,
            degree: (stride as usize) * phi_deg,
            reduction,
        }
    }

    /// Shared instance for `Q(ζ_order)`.
    pub fn get(order: u64) -> Arc<CycloField> {
        static CACHE: OnceLock<RwLock<HashMap<u64, Arc<CycloField>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
        if let Some(f) = cache.read().expect("field cache poisoned").get(&order) {
            return Arc::clone(f);
        }
        let built = Arc::new(CycloField::build(order));
        let mut w = cache.write().expect("field cache poisoned");
        Arc::clone(w.entry(order).or_insert(built))
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// `φ(N)`, the dimension over `Q`.
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Calls `f(basis_index, coefficient)` for the canonical expansion of `ζ^e`.
    #[inline]
    fn expand(&self, e: u64, mut f: impl FnMut(usize, i64)) {
        let e = e % self.order;
        let j = (e / self.stride) as usize;
        let r = e % self.stride;
        for &(i, c) in &self.reduction[j] {
            f((self.stride * i as u64 + r) as usize, c);
        }
    }
}

fn radical(mut n: u64) -> u64 {
    let mut r = 1;
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            r *= d;
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        r *= n;
    }
    r
}

/// Integer coefficients of `Φ_n`, lowest degree first.
fn cyclotomic_polynomial(n: u64) -> Vec<i64> {
    let divisors: Vec<u64> = (1..=n).filter(|d| n.is_multiple_of(*d)).collect();
    let mut known: HashMap<u64, Vec<i64>> = HashMap::new();
    for &m in &divisors {
        // x^m - 1 divided by Φ_d for every proper divisor d of m
        let mut num = vec![0i64; m as usize + 1];
        num[0] = -1;
        num[m as usize] = 1;
        for &d in divisors.iter().take_while(|d| **d < m) {
            if m % d == 0 {
                num = div_monic(&num, &known[&d]);
            }
        }
        known.insert(m, num);
    }
    known.remove(&n).expect("n divides itself")
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let qlen = num.len() - dn;
    let mut quot = vec![0i64; qlen];
    for i in (0..qlen).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        if c != 0 {
            for (j, d) in den.iter().enumerate() {
                rem[i + j] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|c| *c == 0));
    quot
}

/// Exact element of `Q(ζ_N)` in canonical reduced form.
///
/// Equality is structural after lifting both operands to a common field,
/// so two numbers compare equal iff they are the same field element.
#[derive(Clone)]
pub struct CycNumber {
    field: Arc<CycloField>,
    den: i128,
    /// Sorted by basis index, no zero coefficients.
    terms: Vec<(u32, i128)>,
}

impl CycNumber {
    fn canonical(field: Arc<CycloField>, den: i128, mut terms: Vec<(u32, i128)>) -> Self {
        terms.retain(|(_, c)| *c != 0);
        if terms.is_empty() {
            return CycNumber { field, den: 1, terms };
        }
        let mut g = den.abs();
        for (_, c) in &terms {
            if g == 1 {
                break;
            }
            g = g.gcd(c);
        }
        let sign = if den < 0 { -1 } else { 1 };
        let g = g * sign;
        if g != 1 {
            for (_, c) in terms.iter_mut() {
                *c /= g;
            }
        }
        CycNumber {
            field,
            den: den / g,
            terms,
        }
    }

    fn from_dense(field: Arc<CycloField>, den: i128, dense: Vec<i128>) -> Self {
        let terms = dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0)
            .map(|(i, c)| (i as u32, c))
            .collect();
        Self::canonical(field, den, terms)
    }

    pub fn zero() -> Self {
        CycNumber {
            field: CycloField::get(1),
            den: 1,
            terms: Vec::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_integer(1)
    }

    pub fn from_integer(v: i128) -> Self {
        Self::canonical(CycloField::get(1), 1, vec![(0, v)])
    }

    pub fn from_rational(v: Q) -> Self {
        Self::canonical(CycloField::get(1), *v.denom(), vec![(0, *v.numer())])
    }

    /// `ζ_N^k`; depends only on `k mod N`.
    pub fn root_of_unity(k: i64, order: u64) -> Result<Self, ScalarError> {
        if order == 0 {
            return Err(ScalarError::ZeroOrder);
        }
        let field = CycloField::get(order);
        let e = k.rem_euclid(order as i64) as u64;
        let mut terms = Vec::new();
        field.expand(e, |i, c| terms.push((i as u32, c as i128)));
        terms.sort_unstable_by_key(|t| t.0);
        Ok(Self::canonical(field, 1, terms))
    }

    /// `Σ_e counts[e]·ζ_N^e` for `N = counts.len()`.
    pub fn from_root_counts(order: u64, counts: &[i64]) -> Self {
        assert_eq!(counts.len() as u64, order, "one count per exponent class");
        let field = CycloField::get(order);
        let mut dense = vec![0i128; field.degree()];
        for (e, &m) in counts.iter().enumerate() {
            if m != 0 {
                field.expand(e as u64, |i, c| dense[i] = cadd(dense[i], cmul(m as i128, c as i128)));
            }
        }
        Self::from_dense(field, 1, dense)
    }

    /// The root-of-unity order `N` of the ambient field.
    pub fn order(&self) -> u64 {
        self.field.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Canonical coefficients as `(basis exponent, rational coefficient)`.
    pub fn coefficients(&self) -> impl Iterator<Item = (u32, Q)> + '_ {
        self.terms.iter().map(move |(e, c)| (*e, Q::new(*c, self.den)))
    }

    pub fn as_rational(&self) -> Option<Q> {
        match self.terms.as_slice() {
            [] => Some(Q::zero()),
            [(0, c)] => Some(Q::new(*c, self.den)),
            _ => None,
        }
    }

    /// Re-express in `Q(ζ_target)`; `target` must be a multiple of the current order.
    pub fn lift(&self, target: u64) -> Self {
        if target == self.field.order {
            return self.clone();
        }
        assert!(
            target.is_multiple_of(self.field.order),
            "cannot lift Q(ζ_{}) into Q(ζ_{})",
            self.field.order,
            target
        );
        let factor = target / self.field.order;
        let field = CycloField::get(target);
        let terms = accumulate(
            &field,
            self.terms.iter().map(|(e, c)| (*e as u64 * factor, *c)),
            self.terms.len(),
        );
        Self::canonical(field, self.den, terms)
    }

    fn common_pair(a: &Self, b: &Self) -> (Self, Self) {
        if a.field.order == b.field.order {
            return (a.clone(), b.clone());
        }
        let l = a.field.order.lcm(&b.field.order);
        (a.lift(l), b.lift(l))
    }

    fn add_impl(&self, rhs: &Self, negate: bool) -> Self {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return if negate { rhs.neg_impl() } else { rhs.clone() };
        }
        let (a, b) = if self.field.order == rhs.field.order {
            (std::borrow::Cow::Borrowed(self), std::borrow::Cow::Borrowed(rhs))
        } else {
            let (a, b) = Self::common_pair(self, rhs);
            (std::borrow::Cow::Owned(a), std::borrow::Cow::Owned(b))
        };
        let l = a.den.lcm(&b.den);
        let fa = l / a.den;
        let fb = if negate { -(l / b.den) } else { l / b.den };
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < a.terms.len() || j < b.terms.len() {
            match (a.terms.get(i), b.terms.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    out.push((x.0, cadd(cmul(x.1, fa), cmul(y.1, fb))));
                    i += 1;
                    j += 1;
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    out.push((x.0, cmul(x.1, fa)));
                    i += 1;
                }
                (Some(_), Some(y)) | (None, Some(y)) => {
                    out.push((y.0, cmul(y.1, fb)));
                    j += 1;
                }
                (Some(x), None) => {
                    out.push((x.0, cmul(x.1, fa)));
                    i += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Self::canonical(Arc::clone(&a.field), l, out)
    }

    fn neg_impl(&self) -> Self {
        CycNumber {
            field: Arc::clone(&self.field),
            den: self.den,
            terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect(),
        }
    }

    fn mul_impl(&self, rhs: &Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        // rational factors do not need the product loop
        if self.field.order == 1 {
            return rhs.scale(Q::new(self.terms[0].1, self.den));
        }
        if rhs.field.order == 1 {
            return self.scale(Q::new(rhs.terms[0].1, rhs.den));
        }
        let (a, b) = Self::common_pair(self, rhs);
        let field = Arc::clone(&a.field);
        let pairs = a.terms.len() * b.terms.len();
        let terms = accumulate(
            &field,
            a.terms.iter().flat_map(|(e1, c1)| {
                b.terms.iter().map(move |(e2, c2)| ((*e1 + *e2) as u64, cmul(*c1, *c2)))
            }),
            pairs,
        );
        Self::canonical(field, cmul(a.den, b.den), terms)
    }

    /// Multiply by a rational number.
    pub fn scale(&self, r: Q) -> Self {
        if r.is_zero() {
            return Self::zero();
        }
        let n = *r.numer();
        let d = *r.denom();
        Self::canonical(
            Arc::clone(&self.field),
            cmul(self.den, d),
            self.terms.iter().map(|(e, c)| (*e, cmul(*c, n))).collect(),
        )
    }

    /// Image under `ζ ↦ ζ^{-1}` (complex conjugation).
    pub fn conjugate(&self) -> Self {
        let n = self.field.order;
        let terms = accumulate(
            &self.field,
            self.terms.iter().map(|(e, c)| ((n - *e as u64) % n, *c)),
            self.terms.len(),
        );
        Self::canonical(Arc::clone(&self.field), self.den, terms)
    }

    /// `x·conj(x)`, a totally real element.
    pub fn norm_squared(&self) -> Self {
        self.mul_impl(&self.conjugate())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_impl(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_impl(&base);
            }
        }
        acc
    }

    /// Numerical embedding `ζ_N ↦ e^{2πi/N}`.
    pub fn to_complex(&self) -> Complex64 {
        let n = self.field.order as f64;
        let den = self.den as f64;
        self.terms
            .iter()
            .map(|(e, c)| {
                Complex64::from_polar(*c as f64 / den, std::f64::consts::TAU * (*e as f64) / n)
            })
            .sum()
    }
}

/// Sum `(ζ^e, c)` pairs into canonical sparse form.
fn accumulate(
    field: &CycloField,
    items: impl Iterator<Item = (u64, i128)>,
    hint: usize,
) -> Vec<(u32, i128)> {
    if hint.saturating_mul(4) >= field.degree() {
        let mut dense = vec![0i128; field.degree()];
        for (e, c) in items {
            field.expand(e, |i, r| dense[i] = cadd(dense[i], cmul(c, r as i128)));
        }
        return dense
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c != 0)
            .map(|(i, c)| (i as u32, c))
            .collect();
    }
    let mut raw = Vec::with_capacity(hint * 2);
    for (e, c) in items {
        field.expand(e, |i, r| raw.push((i as u32, cmul(c, r as i128))));
    }
    raw.sort_unstable_by_key(|t| t.0);
    let mut out: Vec<(u32, i128)> = Vec::with_capacity(raw.len());
    for (i, c) in raw {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 = cadd(last.1, c),
            _ => out.push((i, c)),
        }
    }
    out.retain(|(_, c)| *c != 0);
    out
}

impl PartialEq for CycNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.field.order == other.field.order {
            return self.den == other.den && self.terms == other.terms;
        }
        if self.is_zero() || other.is_zero() {
            return self.is_zero() && other.is_zero();
        }
        let (a, b) = Self::common_pair(self, other);
        a.den == b.den && a.terms == b.terms
    }
}

impl Eq for CycNumber {}

impl fmt::Debug for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycNumber(N={}, {})", self.field.order, self)
    }
}

impl fmt::Display for CycNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let n = self.field.order;
        for (idx, (e, c)) in self.terms.iter().enumerate() {
            let q = Q::new(*c, self.den);
            let (sign, mag) = if q.is_negative() { ("-", -q) } else { ("+", q) };
            if idx == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            match (*e, mag.is_one()) {
                (0, _) => write!(f, "{}", mag)?,
                (_, true) => write!(f, "z{}^{}", n, e)?,
                (_, false) => write!(f, "{}*z{}^{}", mag, n, e)?,
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &CycNumber {
    type Output = CycNumber;
    fn add(self, rhs: &CycNumber) -> CycNumber {
        self.add_impl(rhs, false)
    }
}

impl std::ops::Sub for &CycNumber {
    type Output = CycNumber;
    fn sub(self, rhs: &CycNumber) -> CycNumber {
        self.add_impl(rhs, true)
    }
}

impl std::ops::Mul for &CycNumber {
    type Output = CycNumber;
    fn mul(self, rhs: &CycNumber) -> CycNumber {
        self.mul_impl(rhs)
    }
}

impl std::ops::Neg for &CycNumber {
    type Output = CycNumber;
    fn neg(self) -> CycNumber {
        self.neg_impl()
    }
}

/// `√q` as an element of `Q(ζ_q)`, available for primes `q ≡ 1 (mod 4)`.
///
/// This is the quadratic Gauss sum `Σ (x/q) ζ_q^x`, which equals `+√q`.
pub fn sqrt_of_prime(q: u64) -> Option<CycNumber> {
    if q % 4 != 1 || !(2..).take_while(|d| d * d <= q).all(|d| !q.is_multiple_of(d)) {
        return None;
    }
    static CACHE: OnceLock<RwLock<HashMap<u64, CycNumber>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().expect("sqrt cache poisoned").get(&q) {
        return Some(v.clone());
    }
    let mut counts = vec![0i64; q as usize];
    for x in 1..q {
        counts[x as usize] = legendre(x, q);
    }
    let g = CycNumber::from_root_counts(q, &counts);
    cache.write().expect("sqrt cache poisoned").insert(q, g.clone());
    Some(g)
}

fn legendre(x: u64, p: u64) -> i64 {
    let mut acc = 1u128;
    let mut b = (x % p) as u128;
    let mut e = (p - 1) / 2;
    let m = p as u128;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    if acc == 1 {
        1
    } else if acc == 0 {
        0
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(k: i64, n: u64) -> CycNumber {
        CycNumber::root_of_unity(k, n).unwrap()
    }

    #[test]
    fn cyclotomic_polynomials_small() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(10), vec![1, -1, 1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(20), vec![1, 0, -1, 0, 1, 0, -1, 0, 1]);
    }

    #[test]
    fn identity_root() {
        assert_eq!(z(0, 7), CycNumber::one());
        assert_eq!(z(7, 7), CycNumber::one());
        assert!(CycNumber::root_of_unity(1, 0).is_err());
    }

    #[test]
    fn fourth_root_is_i() {
        let i = z(1, 4);
        assert_eq!(i.coefficients().collect::<Vec<_>>(), vec![(1, Q::one())]);
        assert_eq!(&i * &i, CycNumber::from_integer(-1));
        assert!((i.to_complex() - Complex64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn fifth_roots_sum_to_zero() {
        let s = (0..5).fold(CycNumber::zero(), |acc, k| &acc + &z(k, 5));
        assert!(s.is_zero());
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(z(1, 5).conjugate(), z(4, 5));
        let half = CycNumber::from_rational(Q::new(3, 2));
        assert_eq!(half.conjugate(), half);
        let x = &CycNumber::one() + &z(1, 8);
        let want = &CycNumber::one() + &z(7, 8);
        assert_eq!(x.conjugate(), want);
        assert!((x.conjugate().to_complex() - x.to_complex().conj()).norm() < 1e-12);
    }

    #[test]
    fn norm_squared_examples() {
        let x = &CycNumber::one() + &z(1, 4);
        assert_eq!(x.norm_squared(), CycNumber::from_integer(2));
        assert_eq!(z(5, 12).norm_squared(), CycNumber::one());
    }

    #[test]
    fn equality_across_orders() {
        assert_eq!(z(1, 3), z(2, 6));
        assert_eq!(z(3, 12), z(1, 4));
        assert_ne!(z(1, 3), z(1, 6));
        assert_eq!(z(2, 4), CycNumber::from_integer(-1));
    }

    #[test]
    fn sqrt_prime_squares_to_prime() {
        for q in [5u64, 13, 17] {
            let g = sqrt_of_prime(q).unwrap();
            assert_eq!(&g * &g, CycNumber::from_integer(q as i128));
            assert!((g.to_complex() - Complex64::new((q as f64).sqrt(), 0.0)).norm() < 1e-12);
        }
        assert!(sqrt_of_prime(7).is_none());
    }

    #[test]
    fn root_counts_match_sum() {
        let counts = [0, 1, 0, 2, -1, 0];
        let direct = &(&z(1, 6) + &(&z(3, 6) + &z(3, 6))) - &z(4, 6);
        assert_eq!(CycNumber::from_root_counts(6, &counts), direct);
    }
}
