//! Gaussian-process surrogates over mixed continuous, integer and categorical
//! design spaces.

pub mod bayesopt;
pub mod benchmarks;
pub mod categorical;
pub mod design_space;
pub mod error;
pub mod gp;
pub mod linalg;
pub mod optim;
pub mod pls;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
