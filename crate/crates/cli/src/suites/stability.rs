//! Stability of twisted ε-factors: the GL(1) shift by `μ(v_χ)`, the exhaustive
//! sweep over block-built representations, and equal-central-character pairs.

use std::collections::BTreeMap;

use epsilon_core::characters::{enumerate_chars, QuasiChar};
use epsilon_core::kloosterman::{GaussBank, GaussMethod};
use epsilon_core::local_factors::{gl1_stability_check, same_central_character_check, Regime, RepnData};
use epsilon_core::scalar::Scalar;
use epsilon_core::sweep::{twists, BlockCatalog, CaseOutcome};
use epsilon_core::Result;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{char_json, eps_json, quasi_json, rep_json};
use crate::config::RunConfig;
use crate::report::{SuiteBuilder, SuiteReport};

/// Shifts of the small non-tempered sub-universe.
pub const SUB_UNIVERSE_SHIFTS: [(i64, i64); 3] = [(1, 2), (0, 1), (-1, 2)];
/// Shift applied to the twisting character in the sub-universe.
pub const TWIST_SHIFT: (i64, i64) = (1, 3);
/// Largest `n` and `a(π)` of the sub-universe.
pub const SUB_UNIVERSE_RANK: u32 = 2;
pub const SUB_UNIVERSE_CONDUCTOR: u32 = 2;
/// Equal-central-character pairs taken per rank, and per central character.
pub const MAX_PAIRS: usize = 48;
pub const PAIRS_PER_CLASS: usize = 4;

#[derive(Debug, Default, Clone, Copy, Serialize)]
pub struct RegimeCounts {
    pub equal: u64,
    pub unequal: u64,
    pub skipped: u64,
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct SweepSummary {
    pub n: u32,
    pub representations: usize,
    pub twists: usize,
    pub theorem: RegimeCounts,
    pub exploratory: RegimeCounts,
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct Gl1Summary {
    pub pairs: u64,
    pub inverse_form_holds: u64,
    /// `ε(1/2, μχ) = μ(v_χ)ε(1/2, χ)` read literally, with `μ(v_χ)` not inverted.
    pub stated_form_holds: u64,
    pub stated_form_fails: u64,
    pub representative_independent: u64,
    pub first_stated_form_failures: Vec<Value>,
}

pub fn run<S: Scalar>(cfg: &RunConfig) -> SuiteReport {
    let mut sb = SuiteBuilder::new("stability");
    let summary = match body::<S>(cfg, &mut sb) {
        Ok(s) => s,
        Err(e) => {
            sb.fail("setup", json!({ "p": cfg.p, "t_max": cfg.t_max }), e.to_string());
            json!(null)
        }
    };
    sb.finish(summary, cfg, None)
}

fn body<S: Scalar>(cfg: &RunConfig, sb: &mut SuiteBuilder) -> Result<Value> {
    let bank = GaussBank::<S>::build(cfg.p, cfg.bank_level(), GaussMethod::Dft)?;
    let gl1 = gl1_suite(&bank, cfg, sb)?;
    let mut sweeps = Vec::new();
    for n in cfg.ranks() {
        sweeps.push(sweep_suite(&bank, cfg, n, sb)?);
    }
    let sub = sub_universe_suite(&bank, cfg, sb)?;
    let mut pairs = BTreeMap::new();
    let mut shifted_pairs = BTreeMap::new();
    for n in cfg.ranks().into_iter().filter(|&n| n >= 2) {
        pairs.insert(n.to_string(), pair_suite(&bank, cfg, n, false, sb)?);
        if n <= SUB_UNIVERSE_RANK {
            shifted_pairs.insert(n.to_string(), pair_suite(&bank, cfg, n, true, sb)?);
        }
    }
    Ok(json!({
        "gl1": gl1,
        "sweeps": sweeps,
        "shifted_sub_universe": sub,
        "central_character_pairs": pairs,
        "shifted_central_character_pairs": shifted_pairs,
    }))
}

/// Every pair with `2a(μ) ≤ a(χ) ≤ t_max`; the inverse form is asserted.
pub fn gl1_suite<S: Scalar>(bank: &GaussBank<S>, cfg: &RunConfig, sb: &mut SuiteBuilder) -> Result<Gl1Summary> {
    let tol = cfg.effective_tolerance();
    let mut out = Gl1Summary::default();
    for chi in twists(cfg.p, 1..=cfg.t_max)? {
        let chi = chi.finite;
        let a = chi.conductor();
        let mus = enumerate_chars(cfg.p, (a / 2).max(1), None)?
            .into_iter()
            .filter(|m| 2 * m.conductor() <= a)
            .collect::<Vec<_>>();
        let reports = mus
            .par_iter()
            .map(|mu| gl1_stability_check(bank, mu, &chi, tol))
            .collect::<Result<Vec<_>>>()?;
        for r in reports {
            out.pairs += 1;
            let inputs = || json!({ "mu": char_json(&r.mu), "chi": char_json(&r.chi), "v_class": r.v_class });
            sb.check(
                r.inverse_holds,
                "gl1_shift_inverse",
                inputs,
                || format!("ε(μχ) = {} vs μ(v)^-1 ε(χ) = {}", r.lhs, r.rhs_inverse),
            );
            sb.check(
                r.representative_independent,
                "gl1_representative_independence",
                inputs,
                || "μ(v) differs across representatives of v_χ".into(),
            );
            out.inverse_form_holds += r.inverse_holds as u64;
            out.representative_independent += r.representative_independent as u64;
            if r.stated_holds {
                out.stated_form_holds += 1;
            } else {
                out.stated_form_fails += 1;
                if out.first_stated_form_failures.len() < 5 {
                    out.first_stated_form_failures.push(json!({
                        "mu": char_json(&r.mu),
                        "chi": char_json(&r.chi),
                        "lhs": r.lhs.to_string(),
                        "stated_rhs": r.rhs_stated.to_string(),
                    }));
                }
            }
        }
    }
    Ok(out)
}

fn zero_shift() -> [Rational64; 1] {
    [Rational64::from_integer(0)]
}

/// `a(π) ≤ bound`, `1 ≤ a(χ) ≤ t_max`; equality asserted where `a(χ) ≥ a(π)`.
pub fn sweep_suite<S: Scalar>(
    bank: &GaussBank<S>,
    cfg: &RunConfig,
    n: u32,
    sb: &mut SuiteBuilder,
) -> Result<SweepSummary> {
    let bound = cfg.conductor_bound();
    let catalog = BlockCatalog::new(cfg.p, n, bound, &zero_shift())?;
    let chis = twists(cfg.p, 1..=cfg.t_max)?;
    let mut summary = SweepSummary {
        n,
        representations: catalog.paths(n, 0..=bound).len(),
        twists: chis.len(),
        ..Default::default()
    };
    sweep_into(bank, cfg, &catalog, n, &chis, 0..=bound, sb, "stability", &mut summary)?;
    Ok(summary)
}

#[allow(clippy::too_many_arguments)]
fn sweep_into<S: Scalar>(
    bank: &GaussBank<S>,
    cfg: &RunConfig,
    catalog: &BlockCatalog,
    n: u32,
    chis: &[QuasiChar],
    conductors: std::ops::RangeInclusive<u32>,
    sb: &mut SuiteBuilder,
    check: &str,
    summary: &mut SweepSummary,
) -> Result<()> {
    let tol = cfg.effective_tolerance();
    let results = chis
        .par_iter()
        .map(|chi| epsilon_core::sweep::sweep_twist(bank, catalog, n, chi, conductors.clone(), tol))
        .collect::<Result<Vec<_>>>()?;
    for (chi, cases) in chis.iter().zip(results) {
        for case in cases {
            let counts = match case.regime {
                Regime::Theorem => &mut summary.theorem,
                Regime::Exploratory => &mut summary.exploratory,
            };
            let inputs = || {
                json!({
                    "pi": rep_json(&catalog.representation(&case.path).expect("catalog path")),
                    "chi": quasi_json(chi),
                })
            };
            match (&case.outcome, case.regime) {
                (CaseOutcome::Compared { lhs, rhs, equal }, Regime::Theorem) => {
                    if *equal {
                        counts.equal += 1;
                    } else {
                        counts.unequal += 1;
                    }
                    sb.check(*equal, check, inputs, || {
                        format!("lhs {} rhs {}", eps_json(lhs), eps_json(rhs))
                    });
                }
                (CaseOutcome::Compared { equal, .. }, Regime::Exploratory) => {
                    if *equal {
                        counts.equal += 1;
                    } else {
                        counts.unequal += 1;
                    }
                }
                (CaseOutcome::Skipped(why), Regime::Theorem) => {
                    counts.skipped += 1;
                    sb.skip(check, inputs(), why.clone());
                }
                (CaseOutcome::Skipped(_), Regime::Exploratory) => counts.skipped += 1,
            }
        }
    }
    Ok(())
}

/// Shifted blocks and a shifted twist, in rank at most two.
pub fn sub_universe_suite<S: Scalar>(
    bank: &GaussBank<S>,
    cfg: &RunConfig,
    sb: &mut SuiteBuilder,
) -> Result<Vec<SweepSummary>> {
    let bound = cfg.conductor_bound().min(SUB_UNIVERSE_CONDUCTOR);
    let shifts = SUB_UNIVERSE_SHIFTS.map(|(a, b)| Rational64::new(a, b));
    let twist_shift = Rational64::new(TWIST_SHIFT.0, TWIST_SHIFT.1);
    let mut out = Vec::new();
    for n in cfg.ranks().into_iter().filter(|&n| n <= SUB_UNIVERSE_RANK) {
        let catalog = BlockCatalog::new(cfg.p, n, bound, &shifts)?;
        let mut chis = twists(cfg.p, 1..=cfg.t_max)?;
        let shifted: Vec<_> = chis.iter().map(|c| c.shifted(twist_shift)).collect();
        chis.extend(shifted);
        let mut summary = SweepSummary {
            n,
            representations: catalog.paths(n, 0..=bound).len(),
            twists: chis.len(),
            ..Default::default()
        };
        sweep_into(bank, cfg, &catalog, n, &chis, 0..=bound, sb, "stability_shifted", &mut summary)?;
        out.push(summary);
    }
    Ok(out)
}

#[derive(Debug, Default, Clone, Serialize)]
pub struct PairSummary {
    pub pairs: usize,
    pub comparisons: u64,
    pub equal: u64,
}

/// Distinct pairs of representations with one central character, taken round-robin over the classes.
pub fn central_character_pairs(reps: &[RepnData]) -> Vec<(RepnData, RepnData)> {
    let mut classes: BTreeMap<String, Vec<&RepnData>> = BTreeMap::new();
    for r in reps {
        let w = r.central_character();
        let key = format!("{}|{}|{}", w.finite.primitive().level, w.finite.primitive().k, w.shift);
        classes.entry(key).or_default().push(r);
    }
    let per_class: Vec<Vec<(RepnData, RepnData)>> = classes
        .values()
        .map(|c| {
            let mut v = Vec::new();
            'outer: for i in 0..c.len() {
                for j in i + 1..c.len() {
                    if v.len() == PAIRS_PER_CLASS {
                        break 'outer;
                    }
                    v.push((c[i].clone(), c[j].clone()));
                }
            }
            v
        })
        .collect();
    let mut out = Vec::new();
    for round in 0..PAIRS_PER_CLASS {
        for class in &per_class {
            if let Some(p) = class.get(round) {
                if out.len() < MAX_PAIRS {
                    out.push(p.clone());
                }
            }
        }
    }
    out
}

/// `ε(s, χ⊗π_1) = ε(s, χ⊗π_2)` for `a(χ) ≥ max(a(π_1), a(π_2))`, both sides blockwise.
///
/// With `shifted` the blocks carry the sub-universe shifts.
pub fn pair_suite<S: Scalar>(
    bank: &GaussBank<S>,
    cfg: &RunConfig,
    n: u32,
    shifted: bool,
    sb: &mut SuiteBuilder,
) -> Result<PairSummary> {
    let tol = cfg.effective_tolerance();
    let (catalog, bound, check) = if shifted {
        let bound = cfg.conductor_bound().min(cfg.t_max).min(SUB_UNIVERSE_CONDUCTOR);
        let shifts = SUB_UNIVERSE_SHIFTS.map(|(a, b)| Rational64::new(a, b));
        (BlockCatalog::new(cfg.p, n, bound, &shifts)?, bound, "same_central_character_shifted")
    } else {
        let bound = cfg.conductor_bound().min(cfg.t_max);
        (BlockCatalog::new(cfg.p, n, bound, &zero_shift())?, bound, "same_central_character")
    };
    let reps = catalog.representations(n, 0..=bound)?;
    let pairs = central_character_pairs(&reps);
    let mut summary = PairSummary {
        pairs: pairs.len(),
        ..Default::default()
    };
    for (p1, p2) in &pairs {
        let low = p1.conductor().max(p2.conductor()).max(1);
        let chis = twists(cfg.p, low..=cfg.t_max)?;
        let verdicts = chis
            .par_iter()
            .map(|chi| same_central_character_check(bank, p1, p2, chi, tol))
            .collect::<Result<Vec<_>>>()?;
        for (chi, ok) in chis.iter().zip(verdicts) {
            summary.comparisons += 1;
            summary.equal += ok as u64;
            sb.check(
                ok,
                check,
                || json!({ "pi1": rep_json(p1), "pi2": rep_json(p2), "chi": quasi_json(chi) }),
                || "twisted ε-factors differ".into(),
            );
        }
    }
    Ok(summary)
}
