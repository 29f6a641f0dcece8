//! The verification suites. Each runs generically over the scalar backend.

pub mod bessel;
pub mod gauss;
pub mod kloosterman;
pub mod stability;

use epsilon_core::characters::{MultChar, QuasiChar};
use epsilon_core::local_factors::{Block, EpsMonomial, RepnData};
use epsilon_core::scalar::{complex_close, Scalar, ScaledScalar};
use serde_json::{json, Value};

pub fn char_json(c: &MultChar) -> Value {
    json!({ "p": c.p, "level": c.level, "k": c.k, "conductor": c.conductor() })
}

pub fn quasi_json(c: &QuasiChar) -> Value {
    json!({ "finite": char_json(&c.finite), "shift": c.shift.to_string() })
}

pub fn block_json(b: &Block) -> Value {
    json!({ "tau": char_json(&b.tau), "d": b.d, "shift": b.shift.to_string() })
}

pub fn rep_json(pi: &RepnData) -> Value {
    json!({
        "display": pi.to_string(),
        "blocks": pi.blocks().iter().map(block_json).collect::<Vec<_>>(),
        "conductor": pi.conductor(),
    })
}

pub fn scalar_json<S: Scalar>(s: &ScaledScalar<S>) -> Value {
    let z = s.to_complex();
    json!({ "repr": s.to_string(), "complex": [z.re, z.im] })
}

pub fn eps_json<S: Scalar>(e: &EpsMonomial<S>) -> Value {
    json!({ "value": scalar_json(e.value()), "xexp": e.xexp() })
}

/// A value from one backend against the same value from another, relative to `tolerance`.
pub fn values_agree<A: Scalar, B: Scalar>(a: &ScaledScalar<A>, b: &ScaledScalar<B>, tolerance: f64) -> bool {
    complex_close(a.to_complex(), b.to_complex(), tolerance)
}

/// Monomials from two backends: same exponent (unless both vanish) and close values.
pub fn monomials_agree<A: Scalar, B: Scalar>(a: &EpsMonomial<A>, b: &EpsMonomial<B>, tolerance: f64) -> bool {
    let (za, zb) = (a.value().to_complex(), b.value().to_complex());
    if za.norm() <= tolerance && zb.norm() <= tolerance {
        return true;
    }
    a.xexp() == b.xexp() && complex_close(za, zb, tolerance)
}
