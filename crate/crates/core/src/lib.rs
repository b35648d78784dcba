//! Average age of information for two sources sharing one server.
//!
//! The analytic side is generic over [`Scalar`]: `f64`, `f32` and exact
//! [`Exact`] rationals all run through the same SHS engine and closed forms.
//! The simulator works in `f64` only.

// `!(a < b)` is deliberate: NaN must fail range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod closed_form;
pub mod config;
pub mod error;
pub mod linalg;
pub mod metrics;
pub mod plot;
pub mod policy;
pub mod report;
pub mod scalar;
pub mod shs;
pub mod sim;
pub mod sweep;
pub mod validation;

pub use error::Error;
pub use metrics::jain_index;
pub use policy::{average_aoi_for, average_aoi_pair, build_model, AnalyticMethod, PolicyId, SourceView};
pub use scalar::Scalar;
pub use shs::{LoadPoint, ShsModel};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;
pub type Loads = shs::LoadPoint<f64>;
pub type ExactLoads = shs::LoadPoint<Exact>;
pub type Stationary = shs::StationaryDistribution<f64>;
pub type Correlation = shs::CorrelationMatrix<f64>;
pub type Solution = shs::ShsSolution<f64>;
pub type ExactSolution = shs::ShsSolution<Exact>;
