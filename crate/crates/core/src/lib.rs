//! Workload reconstruction and prediction from business-process event logs.
//!
//! The crate turns case-grouped activity logs into demand and supply time
//! series, forecasts weekly order quantities with a GRU regressor, and
//! converts the forecast into concrete activities by replaying historical
//! trace variants and completing running orders.

pub mod eventlog;
pub mod forecast;
mod mass;
pub mod metrics;
pub mod pipeline;
pub mod replay;
pub mod synth;
pub mod workload;

pub use mass::mass_prefix_len;
