use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::budget::{DelayBudget, InferenceTable, Placement};
use super::curve::{detection_range, RateAccuracyCurve, ResolutionBands};
use crate::error::{Error, ParseEnumError, Result};
use crate::model::Resolution;
use crate::scalar::Scalar;

/// How throughput beyond the first camera is shared out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CameraStrategy {
    /// Every camera at the full rate.
    Uniform,
    /// Front camera at the full rate, the others at a reduced rate.
    Priority,
}

impl fmt::Display for CameraStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CameraStrategy::Uniform => "uniform",
            CameraStrategy::Priority => "priority",
        })
    }
}

impl FromStr for CameraStrategy {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "uniform" => Ok(CameraStrategy::Uniform),
            "priority" => Ok(CameraStrategy::Priority),
            _ => Err(ParseEnumError::new("camera strategy", s)),
        }
    }
}

/// The longest prefix of `camera_rates` whose total fits in the throughput;
/// a single camera at the whole throughput if even the first does not fit;
/// nothing below `min_mbps`.
pub fn allocate_with<S: Scalar>(throughput_mbps: S, camera_rates: &[S], min_mbps: S) -> Vec<S> {
    if !(throughput_mbps >= min_mbps) || camera_rates.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut used = S::zero();
    for r in camera_rates {
        if used + *r > throughput_mbps {
            break;
        }
        used = used + *r;
        out.push(*r);
    }
    if out.is_empty() {
        out.push(throughput_mbps);
    }
    out
}

pub fn allocate_cameras<S: Scalar>(throughput_mbps: S, strategy: CameraStrategy) -> Vec<S> {
    let rates: Vec<S> = match strategy {
        CameraStrategy::Uniform => vec![S::of(26.0); 4],
        CameraStrategy::Priority => [26.0, 10.0, 10.0, 10.0].map(S::of).to_vec(),
    };
    allocate_with(throughput_mbps, &rates, S::one())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyDecision<S> {
    pub placement: Placement,
    /// Shared by every camera.
    pub resolution: Resolution,
    /// Uplink rate per camera; a single zero for local processing.
    pub camera_rates_mbps: Vec<S>,
    pub n_cameras: usize,
    /// Accuracy of the front camera stream.
    pub wmap: S,
    pub ap_person: S,
    pub range_m: Option<S>,
    pub total_delay_ms: S,
    pub compliant: bool,
}

impl<S: Scalar> PolicyDecision<S> {
    pub fn total_rate_mbps(&self) -> S {
        self.camera_rates_mbps.iter().copied().sum()
    }

    /// Coarse label used to group decisions into throughput bands.
    pub fn band(&self) -> String {
        match self.placement {
            Placement::Local => format!("LOCAL {}", self.resolution),
            Placement::Edge if self.n_cameras > 1 => format!("EDGE {} x{}", self.resolution, self.n_cameras),
            Placement::Edge => format!("EDGE {}", self.resolution),
        }
    }
}

/// Adaptive offloading rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy<S> {
    pub curve: RateAccuracyCurve<S>,
    pub bands: ResolutionBands<S>,
    pub inference: InferenceTable<S>,
    pub uniform_rates_mbps: Vec<S>,
    pub priority_rates_mbps: Vec<S>,
    /// Median round trip of the active link.
    pub median_rtt_ms: S,
    /// Below this no edge stream is attempted.
    pub min_edge_mbps: S,
    /// Edge threshold when local processing alone meets the target.
    pub min_edge_with_local_mbps: S,
}

impl<S: Scalar> Default for Policy<S> {
    fn default() -> Self {
        Policy {
            curve: RateAccuracyCurve::default(),
            bands: ResolutionBands::default(),
            inference: InferenceTable::default(),
            uniform_rates_mbps: vec![S::of(26.0); 4],
            priority_rates_mbps: [26.0, 10.0, 10.0, 10.0].map(S::of).to_vec(),
            median_rtt_ms: S::of(15.0),
            min_edge_mbps: S::one(),
            min_edge_with_local_mbps: S::of(10.0),
        }
    }
}

impl<S: Scalar> Policy<S> {
    fn rates(&self, strategy: CameraStrategy) -> &[S] {
        match strategy {
            CameraStrategy::Uniform => &self.uniform_rates_mbps,
            CameraStrategy::Priority => &self.priority_rates_mbps,
        }
    }

    /// Highest local resolution that meets the target, or the fastest one
    /// (non-compliant) if none does.
    fn local_choice(&self, target_ms: S) -> (Resolution, bool) {
        let candidates = [Resolution::R1080p, Resolution::R720p, Resolution::Wvga];
        let total = |r| self.inference.get(r, Placement::Local) + S::of(DelayBudget::<S>::FRAME_MS);
        candidates
            .iter()
            .find(|r| total(**r) <= target_ms)
            .map(|r| (*r, true))
            .unwrap_or((Resolution::Wvga, false))
    }

    pub fn decide(&self, throughput_mbps: S, target_ms: S, strategy: CameraStrategy) -> Result<PolicyDecision<S>> {
        if !(throughput_mbps >= S::zero()) {
            return Err(Error::invalid(format!("throughput must be non-negative, got {throughput_mbps}")));
        }
        let (local_res, local_ok) = self.local_choice(target_ms);
        let edge_min = if local_ok { self.min_edge_with_local_mbps } else { self.min_edge_mbps };

        if throughput_mbps >= edge_min {
            let rates = self.rates(strategy);
            let cameras = allocate_with(throughput_mbps, rates, edge_min);
            let front = cameras[0];
            let resolution = self.bands.best_resolution(front);
            let acc = self.curve.accuracy_at(resolution, front)?;
            let budget = DelayBudget::new(&self.inference, Placement::Edge, resolution, self.median_rtt_ms)?;
            let total = budget.total();
            return Ok(PolicyDecision {
                placement: Placement::Edge,
                resolution,
                n_cameras: cameras.len(),
                camera_rates_mbps: cameras,
                wmap: acc.wmap,
                ap_person: acc.ap_person,
                range_m: detection_range(resolution).ok(),
                total_delay_ms: total,
                compliant: total <= target_ms,
            });
        }

        let acc = self.curve.plateau(local_res)?;
        let total = DelayBudget::new(&self.inference, Placement::Local, local_res, S::zero())?.total();
        Ok(PolicyDecision {
            placement: Placement::Local,
            resolution: local_res,
            camera_rates_mbps: vec![S::zero()],
            n_cameras: 1,
            wmap: acc.wmap,
            ap_person: acc.ap_person,
            range_m: detection_range(local_res).ok(),
            total_delay_ms: total,
            compliant: total <= target_ms,
        })
    }
}

/// `sum(p_i * a_i) / sum(p_i)`: accuracy conditional on availability.
pub fn expected_performance<S: Scalar>(probabilities: &[S], accuracies: &[S]) -> Result<S> {
    if probabilities.len() != accuracies.len() {
        return Err(Error::invalid("one accuracy per band required"));
    }
    if probabilities.iter().any(|p| !(*p >= S::zero())) {
        return Err(Error::invalid("band probabilities must be non-negative"));
    }
    let total: S = probabilities.iter().copied().sum();
    if total > S::one() + S::of(1e-9) {
        return Err(Error::invalid(format!("band probabilities sum to {total} > 1")));
    }
    if total <= S::zero() {
        return Err(Error::invalid("all band probabilities are zero"));
    }
    let weighted: S = probabilities.iter().zip(accuracies).map(|(p, a)| *p * *a).sum();
    Ok(weighted / total)
}

/// Share of intervals falling in one decision band.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandOccupancy<S> {
    pub band: String,
    pub fraction: S,
    pub wmap: S,
    pub ap_person: S,
    pub compliant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyEvaluation<S> {
    pub decisions: Vec<PolicyDecision<S>>,
    pub bands: Vec<BandOccupancy<S>>,
    /// Fraction of intervals whose decision meets the target.
    pub availability: S,
    /// `None` when no interval is compliant.
    pub expected_wmap: Option<S>,
    pub expected_ap_person: Option<S>,
}

impl<S: Scalar> Policy<S> {
    /// Decide every interval of a throughput series and average the
    /// accuracy over compliant bands.
    pub fn evaluate(&self, throughput_mbps: &[S], target_ms: S, strategy: CameraStrategy) -> Result<PolicyEvaluation<S>> {
        let decisions = throughput_mbps
            .iter()
            .map(|t| self.decide(*t, target_ms, strategy))
            .collect::<Result<Vec<_>>>()?;
        let n = S::of(decisions.len().max(1) as f64);
        let mut bands: Vec<(String, usize, S, S, bool)> = Vec::new();
        for d in &decisions {
            let label = d.band();
            match bands.iter_mut().find(|b| b.0 == label) {
                Some(b) => {
                    b.1 += 1;
                    b.2 = b.2 + d.wmap;
                    b.3 = b.3 + d.ap_person;
                }
                None => bands.push((label, 1, d.wmap, d.ap_person, d.compliant)),
            }
        }
        let bands: Vec<BandOccupancy<S>> = bands
            .into_iter()
            .map(|(band, count, w, a, compliant)| {
                let c = S::of(count as f64);
                BandOccupancy { band, fraction: c / n, wmap: w / c, ap_person: a / c, compliant }
            })
            .collect();
        let ok: Vec<&BandOccupancy<S>> = bands.iter().filter(|b| b.compliant).collect();
        let p: Vec<S> = ok.iter().map(|b| b.fraction).collect();
        let availability = p.iter().copied().sum();
        let expected = |f: fn(&BandOccupancy<S>) -> S| {
            let acc: Vec<S> = ok.iter().map(|b| f(b)).collect();
            expected_performance(&p, &acc).ok()
        };
        Ok(PolicyEvaluation {
            expected_wmap: expected(|b| b.wmap),
            expected_ap_person: expected(|b| b.ap_person),
            decisions,
            bands,
            availability,
        })
    }
}
