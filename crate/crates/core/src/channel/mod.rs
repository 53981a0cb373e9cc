//! Synthetic dual-connectivity channel along a walking route.
//!
//! Ray tracing is replaced by a LOS/NLOS schedule per site and a close-in
//! path-loss model. Angular blockage is layered on top, and the result is
//! reduced to per-site SINR samples. Externally produced traces can be
//! imported in the same CSV format.

pub mod blockage;
pub mod propagation;
pub mod rays;
pub mod route;
pub mod synth;
pub mod trace;

pub use crate::model::{BlockageParams, RouteSpec};
pub use blockage::{apply_blockage, sample_blockage, BlockageRegion, BlockageState, RegionKind};
pub use propagation::{noise_floor_dbm, path_loss_db, sinr_db, LinkBudget, PathLossParams};
pub use rays::{generate_rays, Ray, RayParams, RaySet};
pub use route::{build_route, RoutePoint};
pub use synth::{route_horizon, synthesize_trace};
pub use trace::{export_trace, import_trace, ChannelSample, ChannelTrace, LinkState, TraceMeta};
