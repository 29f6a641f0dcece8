//! Exhaustive stability sweeps over block-built representations.
//!
//! For a fixed twist `χ` every representation is a multiset of catalog
//! blocks, so the twisted ε-factors are cached per block and multiplied
//! along a depth-first walk of the multisets. The right-hand side only
//! depends on the central character and is cached on it.

use std::collections::HashMap;
use std::ops::RangeInclusive;

use num_rational::Rational64;

use crate::characters::{enumerate_chars, MultChar, QuasiChar};
use crate::error::{Error, Result};
use crate::local_factors::{eps_block_twisted, eps_gl1, Block, EpsMonomial, GaussSource, Regime, RepnData};
use crate::padic::AdditiveCharacter;
use crate::scalar::Scalar;

/// Blocks `|·|^a St(τ, d)` with primitive `τ`, sorted by decreasing shift
/// and then increasing conductor. Any non-decreasing index sequence is then
/// in Langlands order, and a walk can stop a shift group at the first block
/// that overshoots the conductor bound.
#[derive(Debug, Clone)]
pub struct BlockCatalog {
    p: u64,
    blocks: Vec<Block>,
    group_end: Vec<usize>,
}

impl BlockCatalog {
    /// Every block with `d ≤ max_d`, conductor at most `max_conductor` and shift in `shifts`.
    pub fn new(p: u64, max_d: u32, max_conductor: u32, shifts: &[Rational64]) -> Result<Self> {
        let mut shifts = shifts.to_vec();
        shifts.sort_by(|a, b| b.cmp(a));
        shifts.dedup();
        let mut taus = vec![MultChar::trivial(p)];
        for a in 1..=max_conductor {
            taus.extend(enumerate_chars(p, a, Some(a))?);
        }
        let mut blocks = Vec::new();
        for s in &shifts {
            for d in 1..=max_d {
                for tau in &taus {
                    let b = Block::steinberg(*tau, d).with_shift(*s);
                    if b.conductor() <= max_conductor {
                        blocks.push(b);
                    }
                }
            }
        }
        blocks.sort_by(|a, b| {
            b.shift
                .cmp(&a.shift)
                .then(a.conductor().cmp(&b.conductor()))
                .then(a.d.cmp(&b.d))
                .then(a.tau.cmp(&b.tau))
        });
        let mut group_end = vec![blocks.len(); blocks.len()];
        for i in (0..blocks.len().saturating_sub(1)).rev() {
            if blocks[i].shift == blocks[i + 1].shift {
                group_end[i] = group_end[i + 1];
            } else {
                group_end[i] = i + 1;
            }
        }
        Ok(BlockCatalog { p, blocks, group_end })
    }

    /// First index after `i` in `i`'s shift group, or the next block to try
    /// when `i` overshoots.
    fn next_candidate(&self, i: usize, overshoot: bool) -> usize {
        if overshoot {
            self.group_end[i]
        } else {
            i + 1
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn representation(&self, path: &[usize]) -> Result<RepnData> {
        RepnData::new(path.iter().map(|&i| self.blocks[i]).collect())
    }

    /// Index paths of all multisets of total size `n` with conductor in `conductors`.
    pub fn paths(&self, n: u32, conductors: RangeInclusive<u32>) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.walk(0, n, 0, &conductors, &mut path, &mut |p| out.push(p.to_vec()));
        out
    }

    pub fn representations(&self, n: u32, conductors: RangeInclusive<u32>) -> Result<Vec<RepnData>> {
        self.paths(n, conductors)
            .iter()
            .map(|p| self.representation(p))
            .collect()
    }

    fn walk(
        &self,
        start: usize,
        left: u32,
        cond: u32,
        range: &RangeInclusive<u32>,
        path: &mut Vec<usize>,
        leaf: &mut impl FnMut(&[usize]),
    ) {
        if left == 0 {
            if range.contains(&cond) {
                leaf(path);
            }
            return;
        }
        let mut i = start;
        while i < self.blocks.len() {
            let b = &self.blocks[i];
            let c = cond + b.conductor();
            if c > *range.end() {
                i = self.next_candidate(i, true);
                continue;
            }
            if b.d <= left {
                path.push(i);
                self.walk(i, left - b.d, c, range, path, leaf);
                path.pop();
            }
            i += 1;
        }
    }
}

#[derive(Debug, Clone)]
pub enum CaseOutcome<S: Scalar> {
    Compared {
        lhs: EpsMonomial<S>,
        rhs: EpsMonomial<S>,
        equal: bool,
    },
    /// A block fell outside the modelled regime.
    Skipped(String),
}

#[derive(Debug, Clone)]
pub struct SweepCase<S: Scalar> {
    /// Catalog indices of the blocks.
    pub path: Vec<usize>,
    pub a_pi: u32,
    pub regime: Regime,
    pub outcome: CaseOutcome<S>,
}

impl<S: Scalar> SweepCase<S> {
    pub fn equal(&self) -> Option<bool> {
        match &self.outcome {
            CaseOutcome::Compared { equal, .. } => Some(*equal),
            CaseOutcome::Skipped(_) => None,
        }
    }
}

/// Both sides of the stability identity for every representation of size `n`
/// with `a(π)` in `conductors`, twisted by the ramified `chi`.
///
/// Cases come out in catalog order, so repeated runs agree.
pub fn sweep_twist<S: Scalar>(
    src: &impl GaussSource<S>,
    catalog: &BlockCatalog,
    n: u32,
    chi: &QuasiChar,
    conductors: RangeInclusive<u32>,
    tolerance: f64,
) -> Result<Vec<SweepCase<S>>> {
    let p = catalog.p;
    if chi.conductor() == 0 {
        return Err(Error::Unramified);
    }
    let psi = AdditiveCharacter::standard(p)?;
    // central characters all live at one level so products never re-induce
    let level = catalog
        .blocks
        .iter()
        .map(|b| b.tau.level)
        .chain([chi.finite.level])
        .max()
        .unwrap_or(0);
    let centrals = catalog
        .blocks
        .iter()
        .map(|b| {
            let c = b.central_character();
            Ok(QuasiChar::new(c.finite.induce(level)?, c.shift))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut walker = Walker {
        centrals,
        src,
        catalog,
        chi,
        chi_part: eps_gl1(src, chi, &psi)?.pow(n - 1),
        psi,
        conductors,
        tolerance,
        block_eps: vec![None; catalog.blocks.len()],
        rhs_cache: HashMap::new(),
        path: Vec::new(),
        out: Vec::new(),
    };
    let start = Ok(EpsMonomial::one(p));
    let trivial = QuasiChar::unitary(MultChar::trivial(p).induce(level)?);
    walker.walk(0, n, 0, &start, trivial)?;
    Ok(walker.out)
}

type Partial<S> = std::result::Result<EpsMonomial<S>, String>;

struct Walker<'a, S: Scalar, G> {
    centrals: Vec<QuasiChar>,
    src: &'a G,
    catalog: &'a BlockCatalog,
    chi: &'a QuasiChar,
    chi_part: EpsMonomial<S>,
    psi: AdditiveCharacter,
    conductors: RangeInclusive<u32>,
    tolerance: f64,
    block_eps: Vec<Option<Partial<S>>>,
    rhs_cache: HashMap<QuasiChar, EpsMonomial<S>>,
    path: Vec<usize>,
    out: Vec<SweepCase<S>>,
}

impl<S: Scalar, G: GaussSource<S>> Walker<'_, S, G> {
    fn walk(&mut self, start: usize, left: u32, cond: u32, acc: &Partial<S>, omega: QuasiChar) -> Result<()> {
        if left == 0 {
            if self.conductors.contains(&cond) {
                self.leaf(cond, acc, omega)?;
            }
            return Ok(());
        }
        let mut i = start;
        while i < self.catalog.blocks.len() {
            let b = self.catalog.blocks[i];
            let c = cond + b.conductor();
            if c > *self.conductors.end() {
                i = self.catalog.next_candidate(i, true);
                continue;
            }
            if b.d > left {
                i += 1;
                continue;
            }
            let next = match (acc, self.block(i)?) {
                (Ok(a), Ok(e)) => Ok(a.mul(&e)?),
                (Err(why), _) => Err(why.clone()),
                (_, Err(why)) => Err(why),
            };
            self.path.push(i);
            self.walk(i, left - b.d, c, &next, omega.mul(&self.centrals[i])?)?;
            self.path.pop();
            i += 1;
        }
        Ok(())
    }

    fn block(&mut self, i: usize) -> Result<Partial<S>> {
        if let Some(e) = &self.block_eps[i] {
            return Ok(e.clone());
        }
        let e = match eps_block_twisted(self.src, &self.catalog.blocks[i], self.chi) {
            Ok(e) => Ok(e),
            Err(Error::OutsideVerifiedRegime(why)) => Err(why),
            Err(e) => return Err(e),
        };
        self.block_eps[i] = Some(e.clone());
        Ok(e)
    }

    fn leaf(&mut self, a_pi: u32, acc: &Partial<S>, omega: QuasiChar) -> Result<()> {
        let regime = if self.chi.conductor() >= a_pi {
            Regime::Theorem
        } else {
            Regime::Exploratory
        };
        let outcome = match acc {
            Ok(lhs) => {
                let rhs = match self.rhs_cache.get(&omega) {
                    Some(r) => r.clone(),
                    None => {
                        let r = eps_gl1(self.src, &omega.mul(self.chi)?, &self.psi)?.mul(&self.chi_part)?;
                        self.rhs_cache.insert(omega, r.clone());
                        r
                    }
                };
                CaseOutcome::Compared {
                    equal: lhs.approx_eq(&rhs, self.tolerance),
                    lhs: lhs.clone(),
                    rhs,
                }
            }
            Err(why) => CaseOutcome::Skipped(why.clone()),
        };
        self.out.push(SweepCase {
            path: self.path.clone(),
            a_pi,
            regime,
            outcome,
        });
        Ok(())
    }
}

/// Ramified unitary characters with conductor in `levels`.
pub fn twists(p: u64, levels: RangeInclusive<u32>) -> Result<Vec<QuasiChar>> {
    let mut out = Vec::new();
    for a in levels {
        if a == 0 {
            continue;
        }
        out.extend(enumerate_chars(p, a, Some(a))?.into_iter().map(QuasiChar::unitary));
    }
    Ok(out)
}
