//! Deterministic simulator and analytics toolkit for Dandelion-style
//! anonymous transaction broadcast on peer-to-peer graphs.
//!
//! The crate is split along the pipeline an experiment runs through:
//!
//! - [`topology`] builds P2P and anonymity graphs and answers path queries.
//! - [`protocol`] propagates transactions: epoch routing, stem relay, fluff
//!   diffusion and the embargo-timer fail-safe.
//! - [`adversary`] turns spy observations into source estimates.
//! - [`analytics`] scores estimates and evaluates the closed-form bounds.
//! - [`harness`] composes everything into seeded Monte Carlo sweeps with CSV
//!   output and named presets.
//!
//! Closed-form analytics are generic over the floating point type through
//! [`Scalar`]; the aliases below fix the simulation-facing reports to `f64`.

pub mod adversary;
pub mod analytics;
pub mod error;
pub mod harness;
pub mod protocol;
pub mod scalar;
pub mod seeds;
pub mod stats;
pub mod topology;

pub use error::{Error, Result};
pub use scalar::Scalar;
pub use topology::{Digraph, NodeId, NodeProfile, Role};

/// Bounds report evaluated in double precision.
pub type BoundsReport = analytics::BoundsReport<f64>;
pub type PrecisionRecallReport = analytics::PrecisionRecallReport<f64>;
/// Single-precision bounds, for callers that store many reports.
pub type BoundsReportF32 = analytics::BoundsReport<f32>;
