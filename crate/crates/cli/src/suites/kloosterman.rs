//! Hyper-Kloosterman sums: nested summation against the Gauss-sum expansion,
//! and the conjugation symmetry `conj KL_{ω,n}(y) = ω(-1)·KL_{ω^{-1},n}((-1)^n y)`.

use std::collections::BTreeMap;

use epsilon_core::characters::enumerate_chars;
use epsilon_core::kloosterman::{kl_direct, kl_via_dft, GaussBank, GaussMethod, KLQuery, KlRecord};
use epsilon_core::padic::{pow_u64, unit_group};
use epsilon_core::scalar::{Scalar, Q};
use epsilon_core::{Error, Result};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{SuiteBuilder, SuiteReport};

pub fn run<S: Scalar>(cfg: &RunConfig) -> SuiteReport {
    let mut sb = SuiteBuilder::new("kloosterman");
    let summary = match body::<S>(cfg, &mut sb) {
        Ok(s) => s,
        Err(e) => {
            sb.fail("setup", json!({ "p": cfg.p, "t_max": cfg.t_max }), e.to_string());
            json!(null)
        }
    };
    sb.finish(summary, cfg, None)
}

fn query_json(q: &KLQuery) -> Value {
    json!({ "p": q.p(), "t": q.t, "n": q.n, "omega": { "level": q.omega.level, "k": q.omega.k }, "y": q.y })
}

/// One `(n, t)` block: every twist `ω` of level `t` and every unit `y`.
pub fn cross_check<S: Scalar>(
    bank: &GaussBank<S>,
    p: u64,
    n: u32,
    t: u32,
    budget: u64,
    tolerance: f64,
    sb: &mut SuiteBuilder,
) -> Result<Value> {
    let table = bank.table(t).ok_or(Error::LevelTooLow {
        conductor: t,
        level: bank.max_level(),
    })?;
    let omegas = enumerate_chars(p, t, None)?;
    let ug = unit_group(p, t)?;
    let units: Vec<u64> = ug.units().collect();
    let queries: Vec<KLQuery> = omegas
        .iter()
        .flat_map(|w| units.iter().map(move |&y| KLQuery::new(*w, n, y, t)))
        .collect::<Result<_>>()?;
    let evaluated: Vec<std::result::Result<(S, S), Error>> = queries
        .par_iter()
        .map(|q| {
            let direct = kl_direct::<S>(q, budget)?.value;
            let dft = kl_via_dft(q, table)?.value;
            Ok((direct, dft))
        })
        .collect();

    let mut values: BTreeMap<(u64, u64), S> = BTreeMap::new();
    let (mut compared, mut skipped) = (0u64, 0u64);
    let mut records = Vec::new();
    for (q, r) in queries.iter().zip(evaluated) {
        match r {
            Ok((direct, dft)) => {
                compared += 1;
                sb.check(
                    direct.approx_eq(&dft, tolerance),
                    "kl_direct_vs_dft",
                    || query_json(q),
                    || format!("direct {direct} vs dft {dft}"),
                );
                if records.len() < 8 {
                    records.push(KlRecord::new(q, &direct, "direct"));
                }
                values.insert((q.omega.k, q.y), direct);
            }
            Err(Error::TermBudget { terms, budget }) => {
                skipped += 1;
                sb.skip(
                    "kl_direct_vs_dft",
                    query_json(q),
                    format!("{terms} terms exceed the budget of {budget}"),
                );
            }
            Err(e) => sb.fail("kl_direct_vs_dft", query_json(q), e.to_string()),
        }
    }

    let m = pow_u64(p, t);
    let mut symmetric = 0u64;
    for w in &omegas {
        let inv = w.inverse();
        let sign = Q::from_integer(w.sign() as i128);
        for &y in &units {
            let y2 = if n.is_multiple_of(2) { y } else { m - y };
            let (Some(a), Some(b)) = (values.get(&(w.k, y)), values.get(&(inv.k, y2))) else {
                continue;
            };
            let expected = b.scale(sign);
            symmetric += 1;
            sb.check(
                a.conj().approx_eq(&expected, tolerance),
                "kl_conjugation",
                || json!({ "p": p, "t": t, "n": n, "omega_k": w.k, "y": y }),
                || format!("conj {} vs {}", a.conj(), expected),
            );
        }
    }
    Ok(json!({
        "n": n,
        "t": t,
        "instances": queries.len(),
        "compared": compared,
        "skipped": skipped,
        "conjugation_checks": symmetric,
        "samples": records,
    }))
}

fn body<S: Scalar>(cfg: &RunConfig, sb: &mut SuiteBuilder) -> Result<Value> {
    let bank = GaussBank::<S>::build(cfg.p, cfg.t_max, GaussMethod::Dft)?;
    let tol = cfg.effective_tolerance();
    let mut blocks = Vec::new();
    for n in cfg.ranks().into_iter().filter(|&n| n >= 2) {
        for t in 1..=cfg.t_max {
            blocks.push(cross_check(&bank, cfg.p, n, t, cfg.budget, tol, sb)?);
        }
    }
    Ok(json!({ "blocks": blocks }))
}
