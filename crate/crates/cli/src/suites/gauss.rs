//! Gauss sums and GL(1) ε-factors at every character up to level `t_max`.

use epsilon_core::characters::{enumerate_chars, MultChar, QuasiChar};
use epsilon_core::kloosterman::{build_gauss_table, GaussBank, GaussMethod};
use epsilon_core::local_factors::{eps_gl1, gauss_norm_target, root_number, EpsMonomial, GaussSource};
use epsilon_core::padic::{max_precision, psi_eval, unit_group, AdditiveCharacter, PadicNumber};
use epsilon_core::scalar::{Scalar, ScaledScalar, Q};
use epsilon_core::Result;
use num_rational::Rational64;
use serde::Serialize;
use serde_json::json;

use super::{char_json, eps_json, scalar_json};
use crate::config::RunConfig;
use crate::report::{SuiteBuilder, SuiteReport};

/// Valuations of the additive twists `ψ_b` exercised by the twist law.
pub const TWIST_VALUATIONS: [i64; 4] = [-1, 0, 1, 2];

#[derive(Debug, Clone, Serialize)]
struct TableRow {
    character: serde_json::Value,
    gauss_sum: serde_json::Value,
    root_number: serde_json::Value,
}

/// `q^{-a/2} Σ_{u mod p^a} χ^{-1}(u)·ψ_b(u p^{-a-v(b)})`, summed directly.
pub fn eps_gl1_by_sum<S: Scalar>(chi: &MultChar, b: &PadicNumber) -> Result<EpsMonomial<S>> {
    let p = chi.p;
    let a = chi.conductor();
    if a == 0 {
        let one = ScaledScalar::one(p);
        return Ok(EpsMonomial::new(one, b.valuation()));
    }
    let inv = chi.inverse().induce(a)?;
    let ug = unit_group(p, a)?;
    let mut acc = S::zero();
    for u in ug.units() {
        let x = PadicNumber::new(p, u, -(a as i64) - b.valuation(), a)?;
        let term = inv.eval_unit::<S>(u)?.mul(&psi_eval::<S>(&b.mul(&x))?);
        acc = acc.add(&term);
    }
    let value = ScaledScalar::new(acc, Rational64::new(-(a as i64), 2), p);
    Ok(EpsMonomial::new(value, a as i64 + b.valuation()))
}

/// Twist elements `b = b0·p^v` for the twist law.
pub fn twist_elements(p: u64) -> Result<Vec<PadicNumber>> {
    let prec = max_precision(p);
    let g = unit_group(p, 2)?.generator();
    let mut out = Vec::new();
    for v in TWIST_VALUATIONS {
        for b0 in [1, g] {
            out.push(PadicNumber::new(p, b0, v, prec)?);
        }
    }
    Ok(out)
}

pub fn run<S: Scalar>(cfg: &RunConfig) -> SuiteReport {
    let mut sb = SuiteBuilder::new("gauss");
    let summary = match body::<S>(cfg, &mut sb) {
        Ok(s) => s,
        Err(e) => {
            sb.fail("setup", json!({ "p": cfg.p, "t_max": cfg.t_max }), e.to_string());
            json!(null)
        }
    };
    sb.finish(summary, cfg, None)
}

fn body<S: Scalar>(cfg: &RunConfig, sb: &mut SuiteBuilder) -> Result<serde_json::Value> {
    let (p, t) = (cfg.p, cfg.t_max);
    let tol = cfg.effective_tolerance();
    let bank = GaussBank::<S>::build(p, t, GaussMethod::Dft)?;
    let psi = AdditiveCharacter::standard(p)?;
    let twists = twist_elements(p)?;
    let chars = enumerate_chars(p, t, None)?;
    let mut table = Vec::with_capacity(chars.len());

    // naive and DFT tables must agree entry by entry
    for level in 1..=t {
        let naive = build_gauss_table::<S>(p, level, GaussMethod::Naive)?;
        let dft = bank.table(level).expect("bank covers every level");
        for (k, (x, y)) in naive.entries().iter().zip(dft.entries()).enumerate() {
            sb.check(
                x.approx_eq(y, tol),
                "gauss_table_methods",
                || json!({ "level": level, "k": k }),
                || format!("naive {x} vs dft {y}"),
            );
        }
    }

    for chi in &chars {
        let prim = chi.primitive();
        let a = prim.conductor();
        let w: ScaledScalar<S> = if a > 0 {
            root_number(&prim)?
        } else {
            ScaledScalar::one(p)
        };
        let tau: S = if a > 0 {
            bank.gauss(&prim)?
        } else {
            S::one()
        };
        table.push(TableRow {
            character: char_json(chi),
            gauss_sum: scalar_json(&ScaledScalar::from_scalar(tau.clone(), p)),
            root_number: scalar_json(&w),
        });

        // |τ(χ)|² = q^{a(χ)}
        if a > 0 {
            let norm = tau.mul(&tau.conj());
            let target = S::from_rational(Q::from_integer(gauss_norm_target(&prim) as i128));
            sb.check(
                norm.approx_eq(&target, tol),
                "gauss_modulus",
                || char_json(chi),
                || format!("|τ|² = {norm}, expected q^{a}"),
            );
        }

        // ε(s, χ, ψ)·ε(1 - s, χ^{-1}, ψ) = χ(-1)
        let e = eps_gl1(&bank, &QuasiChar::unitary(prim), &psi)?;
        let e_dual = eps_gl1(&bank, &QuasiChar::unitary(prim.inverse()), &psi)?;
        let product = e.mul(&e_dual.reflect())?;
        let sign = ScaledScalar::from_scalar(S::from_rational(Q::from_integer(prim.sign() as i128)), p);
        sb.check(
            product.approx_eq(&EpsMonomial::new(sign, 0), tol),
            "functional_equation",
            || char_json(chi),
            || format!("product {}", eps_json(&product)),
        );

        // ε(s, χ, ψ_b) = χ(b)|b|^{s-1/2}ε(s, χ, ψ), and the left side against its defining sum
        for b in &twists {
            let psi_b = AdditiveCharacter::twisted(*b);
            let lhs = eps_gl1(&bank, &QuasiChar::unitary(prim), &psi_b)?;
            let chi_b: S = if a == 0 { S::one() } else { prim.eval(b)? };
            let law = EpsMonomial::new(e.value().mul_scalar(&chi_b), e.xexp() + b.valuation());
            let inputs = || json!({ "character": char_json(chi), "b_unit": b.unit(), "b_valuation": b.valuation() });
            sb.check(
                lhs.approx_eq(&law, tol),
                "additive_twist_law",
                inputs,
                || format!("{} vs {}", eps_json(&lhs), eps_json(&law)),
            );
            let direct = eps_gl1_by_sum::<S>(&prim, b)?;
            sb.check(
                lhs.approx_eq(&direct, tol),
                "additive_twist_sum",
                inputs,
                || format!("{} vs {}", eps_json(&lhs), eps_json(&direct)),
            );
        }
    }
    Ok(json!({
        "characters": chars.len(),
        "ramified": chars.iter().filter(|c| c.is_ramified()).count(),
        "table": table,
    }))
}
