//! Rank-based correlation estimation under the Gaussian copula model.

pub mod copula;
pub mod csvio;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod linalg;
pub mod quad;
pub mod rank;
pub mod regularize;
pub mod rng;

pub use error::{Error, Result};
