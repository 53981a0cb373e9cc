//! Simulation and analytics for offloading wearable multi-camera object
//! detection to an edge server over LTE and mmWave.
//!
//! The pipeline runs [`channel`] → [`airlink`] → [`transport`] →
//! [`analytics`], with [`appmodel`] turning link metrics into video
//! configurations, delay budgets and detection accuracy.
//!
//! Numeric models are generic over [`Scalar`]; the aliases below fix them to
//! `f64`, which is what the simulator itself uses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod airlink;
pub mod analytics;
pub mod appmodel;
pub mod channel;
pub mod error;
pub mod model;
pub mod rng;
pub mod scalar;
pub mod transport;

pub use error::{Error, Result};
pub use model::{
    validate_config, Direction, FrameClock, Resolution, ScenarioConfig, SimTime, TechKind, Technology, Violation,
};
pub use scalar::Scalar;

pub type RateSeries = analytics::RateSeries<f64>;
pub type HeatmapMatrix = analytics::HeatmapMatrix<f64>;
pub type RateAccuracyCurve = appmodel::RateAccuracyCurve<f64>;
pub type PolicyDecision = appmodel::PolicyDecision<f64>;
pub type Policy = appmodel::Policy<f64>;
pub type LinkBudget = channel::LinkBudget<f64>;

pub type RateSeriesF32 = analytics::RateSeries<f32>;
pub type RateAccuracyCurveF32 = appmodel::RateAccuracyCurve<f32>;
