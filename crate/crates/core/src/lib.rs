pub mod bessel;
pub mod characters;
pub mod error;
pub mod kloosterman;
pub mod local_factors;
pub mod padic;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
