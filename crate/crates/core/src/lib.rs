pub mod authorship;
pub mod corpus;
pub mod error;
pub mod export;
pub mod indicators;
pub mod network;
pub mod report;
pub mod scalar;
pub mod screening;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Exact rational scalar used for oracle comparisons and reporting.
pub type Exact = num_rational::Ratio<i64>;
