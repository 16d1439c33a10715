//! Source estimators over the adversary's observation log.

mod assignment;
mod intersection;
mod log;
mod mapping;
mod matching;

pub use assignment::{max_weight_assignment, min_cost_assignment};
pub use intersection::{
    intersection_classify, per_source_histograms, train_signatures, Accusation, SignatureTable, SpyHistogram,
};
pub use log::{Observation, ObservationLog, Phase};
pub use mapping::{first_spy_estimate, Mapping};
pub use matching::{matching_estimate, routing_aware_estimate};
