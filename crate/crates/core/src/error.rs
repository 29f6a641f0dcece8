use thiserror::Error;

use crate::scalar::ScalarError;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("p = {0} must be an odd prime")]
    BadPrime(u64),
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("table for modulus {modulus} exceeds budget {budget}")]
    TableBudget { modulus: u64, budget: u64 },
    #[error("{terms} summation terms exceed budget {budget}")]
    TermBudget { terms: u64, budget: u64 },
    #[error("{x} is not a unit mod {p}")]
    NonUnit { x: u64, p: u64 },
    #[error("zero has no valuation in this model")]
    Zero,
    #[error("unit known mod p^{have} but p^{need} is required")]
    Precision { have: u32, need: u32 },
    #[error("characters over different primes ({0} and {1})")]
    MismatchedPrime(u64, u64),
    #[error("character of conductor {conductor} cannot live at level {level}")]
    LevelTooLow { conductor: u32, level: u32 },
    #[error("character must be ramified")]
    Unramified,
    #[error("no v_chi solves the defining congruence for {0}")]
    NoVChi(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("outside verified regime: {0}")]
    OutsideVerifiedRegime(String),
    #[error("blocks violate Langlands ordering (shifts must weakly decrease)")]
    LanglandsOrder,
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}

pub type Result<T> = std::result::Result<T, Error>;
