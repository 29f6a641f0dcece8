//! The Bessel transform on `Φ_z`: support, the duality relation, and the
//! measured prefactor between the character sum and the Kloosterman closed form.

use std::collections::BTreeMap;

use epsilon_core::bessel::{
    bessel_closedform, measure_prefactor_cached, shell_scale, BesselKernel, KlCache, BesselSetup, CharsumPrefactor,
    PrefactorReport, SignConvention,
};
use epsilon_core::kloosterman::{GaussBank, GaussMethod};
use epsilon_core::local_factors::RepnData;
use epsilon_core::padic::{unit_group, PadicNumber};
use epsilon_core::scalar::Scalar;
use epsilon_core::sweep::BlockCatalog;
use epsilon_core::Result;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::{char_json, rep_json, scalar_json};
use crate::config::RunConfig;
use crate::report::{SuiteBuilder, SuiteReport};

/// Valuations probed on either side of the shell `v(y) = n·v(z)`.
pub const SUPPORT_WINDOW: i64 = 2;
/// Shell points on which the public closed form is re-evaluated directly.
pub const CLOSED_FORM_SAMPLES: usize = 6;
/// Sign in the Kloosterman argument `a(y, z) = ±y z^{-1}`.
pub const KL_SIGN: SignConvention = SignConvention::N;

/// `(π, z)` pairs satisfying the standing assumptions, `-v(z) ∈ {a(π), a(π)+1}` capped at `t_max`.
pub fn bessel_cases(p: u64, n: u32, bound: u32, t_max: u32) -> Result<Vec<(RepnData, PadicNumber)>> {
    let catalog = BlockCatalog::new(p, n, bound, &[Rational64::from_integer(0)])?;
    let g = unit_group(p, 1)?.generator();
    let mut out = Vec::new();
    for pi in catalog.representations(n, 2..=bound)? {
        let a = pi.conductor();
        for t in [a, a + 1].into_iter().filter(|&t| t <= t_max) {
            for z0 in [1, g] {
                let z = PadicNumber::new(p, z0, -(t as i64), t)?;
                if BesselSetup::new(pi.clone(), z).is_ok() {
                    out.push((pi.clone(), z));
                }
            }
        }
    }
    Ok(out)
}

struct Event {
    check: &'static str,
    ok: bool,
    inputs: Value,
    detail: String,
}

struct CaseResult {
    n: u32,
    t: u32,
    report: PrefactorReport,
    events: Vec<Event>,
}

fn setup_json(s: &BesselSetup) -> Value {
    json!({ "pi": rep_json(s.pi()), "z_unit": s.z().unit(), "z_valuation": s.z().valuation() })
}

/// Every assertion for one `(π, z)`.
pub fn evaluate_case<S: Scalar>(
    bank: &GaussBank<S>,
    pi: &RepnData,
    z: &PadicNumber,
    budget: u64,
    tolerance: f64,
) -> Result<(PrefactorReport, Vec<(String, bool, Value, String)>)> {
    let r = run_case(bank, &KlCache::new(budget), pi, z, budget, tolerance)?;
    Ok((
        r.report,
        r.events
            .into_iter()
            .map(|e| (e.check.to_string(), e.ok, e.inputs, e.detail))
            .collect(),
    ))
}

fn run_case<S: Scalar>(
    bank: &GaussBank<S>,
    cache: &KlCache<S>,
    pi: &RepnData,
    z: &PadicNumber,
    budget: u64,
    tol: f64,
) -> Result<CaseResult> {
    let setup = BesselSetup::new(pi.clone(), *z)?;
    let (p, n, t) = (setup.p(), setup.n(), setup.t());
    let kernel = BesselKernel::new(bank, setup.clone())?;
    let here = setup_json(&setup);
    let mut events = Vec::new();

    // support: zero off the shell, flagged on it
    let g = unit_group(p, 1)?.generator();
    let shell_v = setup.support_valuation();
    for v in shell_v - SUPPORT_WINDOW..=shell_v + SUPPORT_WINDOW {
        for y0 in [1, g] {
            let y = PadicNumber::new(p, y0, v, t)?;
            let b = kernel.eval(&y, SignConvention::NMinusOne, CharsumPrefactor::Lemma41)?;
            let ok = if v == shell_v {
                b.support_flag
            } else {
                !b.support_flag && b.value.is_zero_within(tol)
            };
            events.push(Event {
                check: "bessel_support",
                ok,
                inputs: json!({ "case": here, "y_unit": y0, "y_valuation": v }),
                detail: format!("flag {} value {}", b.support_flag, b.value),
            });
        }
    }

    // duality against every character of level ≤ t
    let shell = kernel.shell_values(SignConvention::NMinusOne, CharsumPrefactor::Lemma41)?;
    for d in kernel.duality_reports(bank, SignConvention::NMinusOne, tol)? {
        let chi = d.chi;
        let inputs = json!({ "case": here, "chi": char_json(&chi) });
        events.push(Event {
            check: "bessel_duality",
            ok: d.holds,
            inputs: inputs.clone(),
            detail: format!("lhs {} rhs {}", d.lhs, d.rhs),
        });
        if chi.conductor() != t {
            events.push(Event {
                check: "bessel_duality_vanishing",
                ok: d.both_vanish,
                inputs,
                detail: format!("lhs {} rhs {}", d.lhs, d.rhs),
            });
        }
    }

    // the ratio to the Kloosterman sum is one power of q for every unit y0
    let report = measure_prefactor_cached(bank, &kernel, KL_SIGN, cache, tol)?;
    events.push(Event {
        check: "bessel_ratio_constant",
        ok: report.constant_in_y,
        inputs: here.clone(),
        detail: format!("{report:?}"),
    });
    // the measured preset through the public closed form, on a few shell points
    if let Some(preset) = report.measured_preset() {
        let scale = shell_scale(&shell);
        for (y0, b) in shell.iter().take(CLOSED_FORM_SAMPLES) {
            let y = setup.shell_point(*y0)?;
            let c = bessel_closedform::<S>(&setup, &y, preset, KL_SIGN, budget)?;
            events.push(Event {
                check: "bessel_closedform_measured",
                ok: c.value.approx_eq_at_scale(b, tol, scale),
                inputs: json!({ "case": here, "y0": y0 }),
                detail: format!("closed form {} vs charsum {}", scalar_json(&c.value), scalar_json(b)),
            });
        }
    }
    Ok(CaseResult { n, t, report, events })
}

/// The JSON row for one `(n, t)`, with the consistency verdict across cases.
#[derive(Debug, Clone, Serialize)]
pub struct PrefactorRow {
    pub n: u32,
    pub t: u32,
    pub p: u64,
    pub cases: usize,
    pub measured_exponent: Option<String>,
    pub measured_unit_power: Option<i64>,
    pub exponent_consistent: bool,
    pub matches: epsilon_core::bessel::PresetMatches,
    pub candidates: Vec<String>,
    pub presets_agree: bool,
    pub unit_factor_matches: bool,
    pub sign_convention: SignConvention,
    pub other_sign_constant: bool,
    pub duality_signs: Vec<SignConvention>,
}

pub fn prefactor_rows(reports: &[(u32, u32, PrefactorReport)]) -> Vec<PrefactorRow> {
    let mut by: BTreeMap<(u32, u32), Vec<&PrefactorReport>> = BTreeMap::new();
    for (n, t, r) in reports {
        by.entry((*n, *t)).or_default().push(r);
    }
    by.into_iter()
        .map(|((n, t), rs)| {
            let first = rs[0];
            let consistent = rs.iter().all(|r| {
                r.measured_exponent == first.measured_exponent
                    && r.measured_unit_power == first.measured_unit_power
                    && r.measured_exponent.is_some()
            });
            PrefactorRow {
                n,
                t,
                p: first.p,
                cases: rs.len(),
                measured_exponent: first.measured_exponent.map(|e| e.to_string()),
                measured_unit_power: first.measured_unit_power,
                exponent_consistent: consistent,
                matches: first.matches,
                candidates: first.candidates.iter().map(|c| c.to_string()).collect(),
                presets_agree: first.presets_agree,
                unit_factor_matches: first.unit_factor_matches,
                sign_convention: first.sign_convention,
                other_sign_constant: rs.iter().any(|r| r.other_sign_constant),
                duality_signs: first.duality_signs.clone(),
            }
        })
        .collect()
}

pub fn run<S: Scalar>(cfg: &RunConfig) -> SuiteReport {
    let mut sb = SuiteBuilder::new("bessel");
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
    let tol = cfg.effective_tolerance();
    let mut cases = Vec::new();
    for n in cfg.ranks().into_iter().filter(|&n| n >= 2) {
        cases.extend(bessel_cases(cfg.p, n, cfg.conductor_bound(), cfg.t_max)?);
    }
    let cache = KlCache::new(cfg.budget);
    let results: Vec<Result<CaseResult>> = cases
        .par_iter()
        .map(|(pi, z)| run_case(&bank, &cache, pi, z, cfg.budget, tol))
        .collect();
    let mut reports = Vec::new();
    for ((pi, z), r) in cases.iter().zip(results) {
        match r {
            Ok(r) => {
                for e in r.events {
                    sb.check(e.ok, e.check, || e.inputs, || e.detail);
                }
                reports.push((r.n, r.t, r.report));
            }
            Err(e) => sb.fail(
                "bessel_case",
                json!({ "pi": rep_json(pi), "z_unit": z.unit(), "z_valuation": z.valuation() }),
                e.to_string(),
            ),
        }
    }
    let rows = prefactor_rows(&reports);
    for row in &rows {
        sb.check(
            row.exponent_consistent,
            "bessel_exponent_consistent",
            || json!({ "n": row.n, "t": row.t }),
            || "measured exponent varies with π or z".into(),
        );
    }
    Ok(json!({ "cases": cases.len(), "prefactor": rows }))
}
