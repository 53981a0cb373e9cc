//! Analysis of imported packet logs and policy evaluation of a series.

use std::fs;
use std::path::Path;

use offload_core::airlink::{import_packet_log, PacketRecord};
use offload_core::analytics::{
    camera_support_from_series, cdf_quantile, delay_constrained_throughput, delivered_throughput, empirical_cdf,
    rtt_per_frame, write_cdf_csv,
};
use offload_core::appmodel::{CameraStrategy, PolicyEvaluation};
use offload_core::{FrameClock, Policy, RateAccuracyCurve, RateSeries, SimTime};
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::OutDir;
use crate::svg;

#[derive(Debug, Clone)]
pub struct AnalyzeOptions {
    pub d_max_ms: Vec<f64>,
    pub camera_rates_mbps: Vec<f64>,
    pub frame_hz: u32,
    /// Defaults to the end of the interval holding the last send.
    pub horizon: Option<SimTime>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyzeSummary {
    pub frame_hz: u32,
    pub horizon_s: f64,
    pub intervals: usize,
    pub ul_packets: usize,
    pub dl_packets: usize,
    pub d_max_ms: Vec<f64>,
    pub required_mbps: Vec<f64>,
    /// `availability[row][n - 1]`, rows as in `d_max_ms`.
    pub availability: Vec<Vec<f64>>,
    pub mean_delivered_mbps: f64,
    pub median_rtt_ms: Option<f64>,
    pub rtt_unpaired: usize,
    pub rtt_feedback_lost: usize,
    pub files: std::collections::BTreeMap<String, String>,
}

fn frame_clock(hz: u32) -> CliResult<FrameClock> {
    FrameClock::new(hz).ok_or_else(|| CliError::Usage("frame rate must be positive".into()))
}

fn inferred_horizon(clock: FrameClock, logs: &[&[PacketRecord]]) -> SimTime {
    logs.iter()
        .flat_map(|l| l.iter().map(|p| p.t_sent))
        .max()
        .map_or(SimTime::ZERO, |t| clock.boundary(clock.index_of(t) + 1))
}

/// Metrics of one uplink/downlink log pair.
pub fn analyze_trace(ul_path: &Path, dl_path: &Path, out_dir: &Path, opts: &AnalyzeOptions) -> CliResult<AnalyzeSummary> {
    let clock = frame_clock(opts.frame_hz)?;
    let read = |p: &Path| import_packet_log(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())));
    let ul = read(ul_path)?;
    let dl = read(dl_path)?;
    for (log, p) in [(&ul, ul_path), (&dl, dl_path)] {
        if log.is_empty() {
            log::warn!("{}: no packets", p.display());
        }
    }
    let horizon = opts.horizon.unwrap_or_else(|| inferred_horizon(clock, &[&ul, &dl]));
    let mut out = OutDir::create(out_dir)?;

    let mut rows = Vec::new();
    for d in &opts.d_max_ms {
        let s = delay_constrained_throughput(&ul, &dl, opts.frame_hz, horizon, *d)?;
        out.write(&format!("series/dmax{d}.csv"), |w| s.write_csv(w))?;
        rows.push(s);
    }
    let m = camera_support_from_series(&rows, &opts.camera_rates_mbps)?;
    out.write("heatmap.csv", |w| m.write_csv(w))?;
    out.write_bytes("heatmap.svg", svg::heatmap(&m, "availability").as_bytes())?;

    let delivered: RateSeries = delivered_throughput(&ul, opts.frame_hz, horizon)?;
    out.write("series/delivered.csv", |w| delivered.write_csv(w))?;
    let mbps: Vec<f64> = delivered.values_mbps().collect();
    if !mbps.is_empty() {
        let c = empirical_cdf(&mbps)?;
        out.write("cdf/throughput.csv", |w| write_cdf_csv(&c, "rate_mbps", w))?;
    }
    let rtt = rtt_per_frame(&ul, &dl, opts.frame_hz)?;
    let median_rtt_ms = if rtt.samples_ms.is_empty() {
        log::warn!("no round-trip samples");
        None
    } else {
        let c = empirical_cdf(&rtt.samples_ms)?;
        out.write("cdf/rtt.csv", |w| write_cdf_csv(&c, "rtt_ms", w))?;
        out.write_bytes("cdf/rtt.svg", svg::cdf(&[("rtt", &c)], "round trip (ms)", "Round-trip delay").as_bytes())?;
        cdf_quantile(&c, 0.5)
    };

    let summary = AnalyzeSummary {
        frame_hz: opts.frame_hz,
        horizon_s: horizon.as_secs_f64(),
        intervals: clock.interval_count(horizon) as usize,
        ul_packets: ul.len(),
        dl_packets: dl.len(),
        d_max_ms: m.d_max_ms.clone(),
        required_mbps: (1..=m.camera_rates_mbps.len()).map(|n| m.required_mbps(n)).collect(),
        availability: m.cells.clone(),
        mean_delivered_mbps: if mbps.is_empty() { 0.0 } else { mbps.iter().sum::<f64>() / mbps.len() as f64 },
        median_rtt_ms,
        rtt_unpaired: rtt.unpaired,
        rtt_feedback_lost: rtt.feedback_lost,
        files: out.manifest().clone(),
    };
    fs::write(out_dir.join("metrics.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct PolicyOptions {
    pub target_ms: f64,
    pub strategy: CameraStrategy,
    pub frame_hz: u32,
    pub curve: Option<RateAccuracyCurve>,
    pub median_rtt_ms: Option<f64>,
}

/// Decide every interval of a throughput series. Writes `timeline.csv` and
/// `policy.json` when `out_dir` is given.
pub fn policy_eval(series_path: &Path, out_dir: Option<&Path>, opts: &PolicyOptions) -> CliResult<PolicyEvaluation<f64>> {
    let clock = frame_clock(opts.frame_hz)?;
    let f = fs::File::open(series_path).map_err(|e| CliError::Usage(format!("{}: {e}", series_path.display())))?;
    let series = RateSeries::read_csv(f, clock, None)?;
    let mut policy = Policy::default();
    if let Some(c) = &opts.curve {
        policy.curve = c.clone();
    }
    if let Some(r) = opts.median_rtt_ms {
        policy.median_rtt_ms = r;
    }
    let mbps: Vec<f64> = series.values_mbps().collect();
    let eval = policy.evaluate(&mbps, opts.target_ms, opts.strategy)?;
    if let Some(dir) = out_dir {
        let mut out = OutDir::create(dir)?;
        out.write("timeline.csv", |w| crate::report::write_timeline(w, &series, &eval))?;
        #[derive(Serialize)]
        struct Summary<'a> {
            target_ms: f64,
            strategy: CameraStrategy,
            median_rtt_ms: f64,
            intervals: usize,
            availability: f64,
            expected_wmap: Option<f64>,
            expected_ap_person: Option<f64>,
            bands: &'a [offload_core::appmodel::BandOccupancy<f64>],
        }
        let s = Summary {
            target_ms: opts.target_ms,
            strategy: opts.strategy,
            median_rtt_ms: policy.median_rtt_ms,
            intervals: mbps.len(),
            availability: eval.availability,
            expected_wmap: eval.expected_wmap,
            expected_ap_person: eval.expected_ap_person,
            bands: &eval.bands,
        };
        fs::write(dir.join("policy.json"), serde_json::to_string_pretty(&s)? + "\n")?;
    }
    Ok(eval)
}
