//! Approximation cardinality of tensor-product random fields in high dimension.

// NaN must fail the guards, and the quadrature coefficients are kept as published
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod asymptotics;
pub mod catalog;
pub mod cli;
pub mod error;
pub mod exact;
pub mod num;
pub mod special;
pub mod spectrum;

pub use error::{Error, Result};

pub type SpectralSummaryF64 = spectrum::SpectralSummary<f64>;
pub type CardinalityResultF64 = exact::CardinalityResult<f64>;
pub type SumDistributionF64 = exact::SumDistribution<f64>;
pub type AsymptoticPredictionF64 = asymptotics::AsymptoticPrediction<f64>;
