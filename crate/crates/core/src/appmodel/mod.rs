//! Application layer: frame delay budget, rate-accuracy lookups and the
//! adaptive offloading policy.

mod budget;
mod curve;
mod policy;

pub use budget::{inference_time, rtt_budget, rtt_budget_with, total_delay, DelayBudget, InferenceTable, Placement};
pub use curve::{best_resolution, detection_range, Accuracy, CurveAnchor, RateAccuracyCurve, ResolutionBands};
pub use policy::{
    allocate_cameras, allocate_with, expected_performance, BandOccupancy, CameraStrategy, Policy, PolicyDecision,
    PolicyEvaluation,
};
