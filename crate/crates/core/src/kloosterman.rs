//! Twisted hyper-Kloosterman sums, evaluated by direct nested summation and by
//! expansion into level-`t` Gauss sums.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::MultChar;
use crate::error::{Error, Result};
use crate::local_factors::{gauss_sum_full_level, GaussSource};
use crate::padic::{check_odd_prime, mod_inverse, pow_u64, unit_group};
use crate::scalar::{Scalar, Q};

/// Default cap on the number of summation terms in a single evaluation.
pub const DEFAULT_TERM_BUDGET: u64 = 50_000_000;

/// `KL_{ω,n}(y; t)`: `n - 1` variables over `(Z/p^t)^×`, twist `ω` on `x_1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KLQuery {
    pub omega: MultChar,
    pub n: u32,
    pub y: u64,
    pub t: u32,
}

impl KLQuery {
    pub fn new(omega: MultChar, n: u32, y: u64, t: u32) -> Result<Self> {
        let q = KLQuery { omega, n, y, t };
        q.validate()?;
        Ok(q)
    }

    pub fn p(&self) -> u64 {
        self.omega.p
    }

    fn validate(&self) -> Result<()> {
        let p = self.p();
        if self.n < 2 {
            return Err(Error::Precondition(format!(
                "hyper-Kloosterman sums need n ≥ 2, got {}",
                self.n
            )));
        }
        if self.t == 0 {
            return Err(Error::ZeroLevel);
        }
        if self.y.is_multiple_of(p) {
            return Err(Error::NonUnit { x: self.y, p });
        }
        let a = self.omega.conductor();
        if a > self.t {
            return Err(Error::LevelTooLow {
                conductor: a,
                level: self.t,
            });
        }
        Ok(())
    }

    /// `φ(p^t)^{n-1}`.
    pub fn term_count(&self) -> u64 {
        let m = pow_u64(self.p(), self.t - 1) * (self.p() - 1);
        m.checked_pow(self.n - 1).unwrap_or(u64::MAX)
    }
}

/// A value together with the number of elementary terms it took.
#[derive(Debug, Clone)]
pub struct KlEvaluation<S> {
    pub value: S,
    pub ops: u64,
}

/// `Σ_{x_1..x_{n-1}} ω(x_1) ψ(p^{-t}[x_1 + … + x_{n-1} + y/(x_1⋯x_{n-1})])`.
pub fn kl_direct<S: Scalar>(query: &KLQuery, budget: u64) -> Result<KlEvaluation<S>> {
    query.validate()?;
    let terms = query.term_count();
    if terms > budget {
        return Err(Error::TermBudget { terms, budget });
    }
    let p = query.p();
    let modulus = pow_u64(p, query.t);
    let omega = query.omega.induce(query.t)?;
    let units: Vec<u64> = (1..modulus).filter(|x| x % p != 0).collect();
    let mut inverse = vec![0u64; modulus as usize];
    let mut omega_exp = vec![0u64; modulus as usize];
    for &x in &units {
        inverse[x as usize] = mod_inverse(x, modulus).expect("unit");
        omega_exp[x as usize] = omega.exponent_of_unit(x)?;
    }
    let n_field = (modulus * (p - 1)) as usize;
    let y = query.y % modulus;
    let depth = query.n as usize - 1;

    // counts of ζ_N^e with N = p^t(p-1); integer counts keep the reduction order-free
    let counts = units
        .par_iter()
        .fold(
            || vec![0i64; n_field],
            |mut acc, &x1| {
                let base = omega_exp[x1 as usize] * p;
                let mut visit = |s: u64, prod: u64| {
                    let arg = (s + y * inverse[prod as usize]) % modulus;
                    let e = (base + arg * (p - 1)) as usize % n_field;
                    acc[e] += 1;
                };
                nested(&units, modulus, depth - 1, x1, x1, &mut visit);
                acc
            },
        )
        .reduce(
            || vec![0i64; n_field],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(KlEvaluation {
        value: S::from_root_counts(n_field as u64, &counts),
        ops: terms,
    })
}

fn nested(units: &[u64], m: u64, left: usize, s: u64, prod: u64, f: &mut impl FnMut(u64, u64)) {
    if left == 0 {
        f(s, prod);
        return;
    }
    for &x in units {
        nested(units, m, left - 1, (s + x) % m, prod * x % m, f);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaussMethod {
    /// One character sum per entry, `φ(p^t)²` work.
    Naive,
    /// A cyclic DFT of `j ↦ ψ(g^j p^{-t})`.
    Dft,
}

/// `τ_t(χ)` for every character `χ` of level `t`, indexed by `k`.
#[derive(Debug, Clone)]
pub struct GaussTable<S> {
    p: u64,
    t: u32,
    entries: Vec<S>,
}

impl<S: Scalar> GaussTable<S> {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.t
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    /// `τ_t(χ)`; `χ` is induced to the table level.
    pub fn get(&self, chi: &MultChar) -> Result<&S> {
        let c = chi.induce(self.t)?;
        Ok(&self.entries[c.k as usize])
    }
}

pub fn build_gauss_table<S: Scalar>(p: u64, t: u32, method: GaussMethod) -> Result<GaussTable<S>> {
    check_odd_prime(p)?;
    if t == 0 {
        return Err(Error::ZeroLevel);
    }
    let ug = unit_group(p, t)?;
    let entries = match method {
        GaussMethod::Naive => (0..ug.order())
            .into_par_iter()
            .map(|k| gauss_sum_full_level(&MultChar { p, level: t, k }, t))
            .collect::<Result<Vec<S>>>()?,
        GaussMethod::Dft => {
            let exps: Vec<u64> = (0..ug.order()).map(|j| ug.power(j)).collect();
            S::cyclic_dft_of_roots(ug.modulus(), &exps)
        }
    };
    Ok(GaussTable { p, t, entries })
}

/// Gauss tables for every level `1..=T`, built once and read thereafter.
#[derive(Debug, Clone)]
pub struct GaussBank<S> {
    p: u64,
    tables: Vec<GaussTable<S>>,
}

impl<S: Scalar> GaussBank<S> {
    pub fn build(p: u64, max_level: u32, method: GaussMethod) -> Result<Self> {
        let tables = (1..=max_level)
            .map(|t| build_gauss_table(p, t, method))
            .collect::<Result<_>>()?;
        Ok(GaussBank { p, tables })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn max_level(&self) -> u32 {
        self.tables.len() as u32
    }

    pub fn table(&self, t: u32) -> Option<&GaussTable<S>> {
        self.tables.get(t.checked_sub(1)? as usize)
    }
}

impl<S: Scalar> GaussSource<S> for GaussBank<S> {
    fn gauss(&self, chi: &MultChar) -> Result<S> {
        let a = chi.conductor();
        if a == 0 {
            return Err(Error::Unramified);
        }
        let table = self.table(a).ok_or(Error::LevelTooLow {
            conductor: a,
            level: self.max_level(),
        })?;
        Ok(table.get(chi)?.clone())
    }
}

/// `φ^{-1} Σ_χ χ(y)·τ_t(χ^{-1})^{n-1}·τ_t(ωχ^{-1})`, which equals `KL_{ω,n}(y; t)`.
pub fn kl_via_dft<S: Scalar>(query: &KLQuery, table: &GaussTable<S>) -> Result<KlEvaluation<S>> {
    query.validate()?;
    if table.p != query.p() || table.t != query.t {
        return Err(Error::Precondition(format!(
            "Gauss table at (p, t) = ({}, {}) used for ({}, {})",
            table.p,
            table.t,
            query.p(),
            query.t
        )));
    }
    kl_expansion(&query.omega, query.n, query.y, table)
}

fn kl_expansion<S: Scalar>(
    omega: &MultChar,
    n: u32,
    y: u64,
    table: &GaussTable<S>,
) -> Result<KlEvaluation<S>> {
    let ug = unit_group(table.p, table.t)?;
    let m = ug.order();
    let dy = ug.dlog(y)?;
    let kw = omega.induce(table.t)?.k;
    let mut acc = S::zero();
    for k in 0..m {
        let inv = &table.entries[((m - k) % m) as usize];
        let tw = &table.entries[((kw + m - k) % m) as usize];
        let chi_y = S::root_of_unity((k as u128 * dy as u128 % m as u128) as i64, m);
        acc = acc.add(&chi_y.mul(&inv.pow(n - 1)).mul(tw));
    }
    Ok(KlEvaluation {
        value: acc.scale(Q::new(1, m as i128)),
        ops: m,
    })
}

/// The rank-one sum `KL_{ω,1}(y; t) := ω(y)ψ(y p^{-t})`, the `n = 1` value of the expansion.
pub fn kl_rank_one<S: Scalar>(omega: &MultChar, y: u64, t: u32) -> Result<S> {
    let p = omega.p;
    let modulus = pow_u64(p, t);
    let w: S = omega.induce(t)?.eval_unit(y % modulus)?;
    Ok(w.mul(&S::root_of_unity((y % modulus) as i64, modulus)))
}

/// The Gauss-sum expansion for any `n ≥ 1`, bypassing the `n ≥ 2` guard.
pub fn kl_expansion_any_rank<S: Scalar>(
    omega: &MultChar,
    n: u32,
    y: u64,
    table: &GaussTable<S>,
) -> Result<S> {
    if n == 0 {
        return Err(Error::Precondition("rank must be positive".into()));
    }
    Ok(kl_expansion(omega, n, y, table)?.value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmegaRecord {
    pub level: u32,
    pub k: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlRecord {
    pub p: u64,
    pub t: u32,
    pub n: u32,
    pub omega: OmegaRecord,
    pub y: u64,
    pub value_complex: [f64; 2],
    pub value_exact_repr: String,
    pub algorithm: String,
}

impl KlRecord {
    pub fn new<S: Scalar>(q: &KLQuery, value: &S, algorithm: &str) -> Self {
        let z = value.to_complex();
        KlRecord {
            p: q.p(),
            t: q.t,
            n: q.n,
            omega: OmegaRecord {
                level: q.omega.level,
                k: q.omega.k,
            },
            y: q.y,
            value_complex: [z.re, z.im],
            value_exact_repr: value.to_string(),
            algorithm: algorithm.to_string(),
        }
    }
}
