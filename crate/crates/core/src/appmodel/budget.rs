use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ParseEnumError, Result};
use crate::model::Resolution;
use crate::scalar::Scalar;

/// Where detection runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Placement {
    Local,
    Edge,
}

impl Placement {
    pub const fn name(self) -> &'static str {
        match self {
            Placement::Local => "LOCAL",
            Placement::Edge => "EDGE",
        }
    }
}

impl fmt::Display for Placement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Placement {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "LOCAL" => Ok(Placement::Local),
            "EDGE" | "SERVER" => Ok(Placement::Edge),
            _ => Err(ParseEnumError::new("placement", s)),
        }
    }
}

/// Per-frame detector latency on the wearable and on the edge server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceTable<S> {
    /// Indexed like [`Resolution::ALL`].
    pub local_ms: [S; 4],
    pub server_ms: [S; 4],
}

impl<S: Scalar> Default for InferenceTable<S> {
    fn default() -> Self {
        InferenceTable {
            local_ms: [75.02, 95.69, 178.25, 232.02].map(S::of),
            server_ms: [5.1, 10.4, 18.7, 23.4].map(S::of),
        }
    }
}

impl<S: Scalar> InferenceTable<S> {
    pub fn get(&self, resolution: Resolution, placement: Placement) -> S {
        let i = resolution as usize;
        match placement {
            Placement::Local => self.local_ms[i],
            Placement::Edge => self.server_ms[i],
        }
    }
}

pub fn inference_time<S: Scalar>(resolution: Resolution, placement: Placement) -> S {
    InferenceTable::default().get(resolution, placement)
}

/// Components of the end-to-end frame delay, in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBudget<S> {
    pub frame_ms: S,
    pub encode_ms: S,
    pub inference_ms: S,
    pub rtt_ms: S,
}

impl<S: Scalar> DelayBudget<S> {
    pub const FRAME_MS: f64 = 33.0;
    pub const ENCODE_MS: f64 = 17.0;

    pub fn new(table: &InferenceTable<S>, placement: Placement, resolution: Resolution, rtt_ms: S) -> Result<Self> {
        if !(rtt_ms >= S::zero()) {
            return Err(Error::invalid(format!("rtt must be non-negative, got {rtt_ms}")));
        }
        let encode = match placement {
            Placement::Local if rtt_ms > S::zero() => {
                return Err(Error::invalid("local processing has no network round trip"));
            }
            Placement::Local => S::zero(),
            Placement::Edge => S::of(Self::ENCODE_MS),
        };
        Ok(DelayBudget {
            frame_ms: S::of(Self::FRAME_MS),
            encode_ms: encode,
            inference_ms: table.get(resolution, placement),
            rtt_ms,
        })
    }

    pub fn total(&self) -> S {
        self.frame_ms + self.encode_ms + self.inference_ms + self.rtt_ms
    }
}

/// Frame interval + encoding + inference + round trip.
pub fn total_delay<S: Scalar>(placement: Placement, resolution: Resolution, rtt_ms: S) -> Result<S> {
    Ok(DelayBudget::new(&InferenceTable::default(), placement, resolution, rtt_ms)?.total())
}

/// Round trip left after the fixed edge components, with the server
/// inference time rounded to whole milliseconds.
pub fn rtt_budget<S: Scalar>(total_target_ms: S, resolution: Resolution) -> Result<S> {
    rtt_budget_with(&InferenceTable::default(), total_target_ms, resolution)
}

pub fn rtt_budget_with<S: Scalar>(table: &InferenceTable<S>, total_target_ms: S, resolution: Resolution) -> Result<S> {
    let fixed = S::of(DelayBudget::<S>::FRAME_MS) + S::of(DelayBudget::<S>::ENCODE_MS) + table.get(resolution, Placement::Edge).round();
    let left = total_target_ms - fixed;
    if left.is_nan() {
        return Err(Error::invalid("delay target is not a number"));
    }
    if left < S::zero() {
        return Err(Error::BudgetShortfall { shortfall_ms: (-left).to_f64_lossy() });
    }
    Ok(left)
}
