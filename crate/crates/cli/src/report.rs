//! End-to-end scenario runs and their summary report.
//!
//! Every number in `report.json` is computed from data as it reads back from
//! the emitted CSVs, so [`audit_report`] can recompute it exactly.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use offload_core::airlink::write_packet_log;
use offload_core::analytics::{
    availability, camera_support_from_series, cdf_quantile, delivered_throughput, empirical_cdf, write_cdf_csv,
};
use offload_core::appmodel::{
    detection_range, rtt_budget, total_delay, CameraStrategy, DelayBudget, InferenceTable, Placement,
    PolicyEvaluation, RateAccuracyCurve,
};
use offload_core::{FrameClock, Policy, RateSeries, Resolution, ScenarioConfig, SimTime, TechKind};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{sha256_file, sha256_hex, OutDir};
use crate::pipeline::{constrained_series, rtt_samples, simulate, LinkRun};
use crate::svg;

/// Link used when no measured round trip is available.
pub const DEFAULT_MEDIAN_RTT_MS: f64 = 15.0;

/// Edge rows stream at this resolution; its server inference time sets the
/// round-trip budget of each delay target.
const EDGE_RESOLUTION: Resolution = Resolution::R1080p;

#[derive(Debug, Clone, Default)]
pub struct SimulateOptions {
    pub seed: Option<u64>,
    pub dmax_ms: Option<Vec<f64>>,
    pub strategy: Option<CameraStrategy>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub config_sha256: String,
    pub frame_hz: u32,
    pub horizon_s: f64,
    pub d_core_ms: f64,
    pub strategy: CameraStrategy,
    pub uniform_rates_mbps: Vec<f64>,
    pub priority_rates_mbps: Vec<f64>,
    /// Delay constraints of every emitted series and heatmap row.
    pub d_max_ms: Vec<f64>,
    pub targets: Vec<TargetBudget>,
    pub links: Vec<LinkSummary>,
    pub rows: Vec<SummaryRow>,
    /// Relative path to SHA-256 of every emitted file except this report.
    pub files: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetBudget {
    pub target_ms: f64,
    /// Round trip left for 1080P edge processing; `None` if the target is
    /// out of reach.
    pub rtt_budget_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSummary {
    pub link: String,
    pub ul_packets: usize,
    pub ul_dropped: usize,
    pub dl_packets: usize,
    pub delivered_series: String,
    pub mean_delivered_mbps: f64,
    pub rtt_cdf: Option<String>,
    pub median_rtt_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub name: String,
    /// `None` for local rows.
    pub link: Option<String>,
    /// `None` for the adaptive row, which changes placement per interval.
    pub placement: Option<Placement>,
    pub resolution: Option<Resolution>,
    pub n_cameras: Option<usize>,
    pub camera_rates_mbps: Vec<f64>,
    pub median_rtt_ms: Option<f64>,
    pub median_total_delay_ms: Option<f64>,
    pub wmap: Option<f64>,
    pub ap_person: Option<f64>,
    pub range_m: Option<f64>,
    pub targets: Vec<RowTarget>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowTarget {
    pub target_ms: f64,
    pub series: Option<String>,
    pub required_mbps: Option<f64>,
    pub availability: f64,
    pub expected_wmap: Option<f64>,
    pub expected_ap_person: Option<f64>,
    pub timeline: Option<String>,
    pub bands: Vec<BandShare>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandShare {
    pub band: String,
    pub fraction: f64,
    pub wmap: f64,
    pub ap_person: f64,
    pub compliant: bool,
}

struct LinkDef {
    id: &'static str,
    stem: &'static str,
    techs: &'static [TechKind],
}

const LINKS: [LinkDef; 3] = [
    LinkDef { id: "lte", stem: "lte", techs: &[TechKind::Lte] },
    LinkDef { id: "mmwave", stem: "mmwave", techs: &[TechKind::Mmwave] },
    LinkDef { id: "mmwave+lte", stem: "fallback", techs: &[TechKind::Mmwave, TechKind::Lte] },
];

fn link_def(id: &str) -> &'static LinkDef {
    LINKS.iter().find(|l| l.id == id).expect("known link")
}

pub fn series_path(stem: &str, d_max_ms: Option<f64>) -> String {
    match d_max_ms {
        Some(d) => format!("series/{stem}_dmax{d}.csv"),
        None => format!("series/{stem}_delivered.csv"),
    }
}

fn timeline_path(target_ms: f64) -> String {
    format!("policy/adaptive_{target_ms}.csv")
}

/// Round-trip budget for edge processing, or `None` if the target cannot
/// be met at all.
pub fn edge_budget(target_ms: f64) -> Option<f64> {
    rtt_budget(target_ms, EDGE_RESOLUTION).ok().filter(|b| *b >= 0.0)
}

/// Delay grid plus the budget of each target, sorted and deduplicated.
pub fn d_max_list(grid: &[f64], targets: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = grid.iter().copied().chain(targets.iter().filter_map(|t| edge_budget(*t))).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Write a series and return it as it reads back.
fn emit_series(out: &mut OutDir, rel: &str, s: &RateSeries) -> CliResult<RateSeries> {
    let mut buf = Vec::new();
    s.write_csv(&mut buf)?;
    out.write_bytes(rel, &buf)?;
    Ok(RateSeries::read_csv(&buf[..], s.clock, s.d_max_ms)?)
}

fn read_series(dir: &Path, rel: &str, clock: FrameClock, d_max_ms: Option<f64>) -> CliResult<RateSeries> {
    Ok(RateSeries::read_csv(fs::File::open(dir.join(rel))?, clock, d_max_ms)?)
}

/// Reads `value,cdf` rows written by `write_cdf_csv`.
pub fn read_cdf(r: impl std::io::Read) -> CliResult<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> CliResult<f64> {
            rec.get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::Core(offload_core::Error::Parse { line, message: "bad CDF row".into() }))
        };
        out.push((field(0)?, field(1)?));
    }
    Ok(out)
}

fn plot<'a>(c: &'a [(&'a str, Vec<(f64, f64)>)]) -> Vec<(&'a str, &'a [(f64, f64)])> {
    c.iter().map(|(n, v)| (*n, v.as_slice())).collect()
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

pub fn write_timeline(w: &mut dyn Write, series: &RateSeries, eval: &PolicyEvaluation<f64>) -> CliResult<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "interval",
        "t_start_s",
        "throughput_mbps",
        "band",
        "placement",
        "resolution",
        "n_cameras",
        "total_rate_mbps",
        "wmap",
        "ap_person",
        "total_delay_ms",
        "compliant",
    ])?;
    for (k, (d, t)) in eval.decisions.iter().zip(series.values_mbps()).enumerate() {
        csv.write_record([
            k.to_string(),
            series.clock.boundary(k as u64).fmt_secs(),
            t.to_string(),
            d.band(),
            d.placement.to_string(),
            d.resolution.to_string(),
            d.n_cameras.to_string(),
            d.total_rate_mbps().to_string(),
            d.wmap.to_string(),
            d.ap_person.to_string(),
            d.total_delay_ms.to_string(),
            d.compliant.to_string(),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

fn band_shares(eval: &PolicyEvaluation<f64>) -> Vec<BandShare> {
    eval.bands
        .iter()
        .map(|b| BandShare {
            band: b.band.clone(),
            fraction: b.fraction,
            wmap: b.wmap,
            ap_person: b.ap_person,
            compliant: b.compliant,
        })
        .collect()
}

fn adaptive_policy(report: &RunReport, median_rtt_ms: f64) -> Policy {
    Policy {
        median_rtt_ms,
        uniform_rates_mbps: report.uniform_rates_mbps.clone(),
        priority_rates_mbps: report.priority_rates_mbps.clone(),
        ..Policy::default()
    }
}

fn local_row(name: &str, res: Resolution, targets: &[f64]) -> CliResult<SummaryRow> {
    let curve = RateAccuracyCurve::default();
    let acc = curve.plateau(res)?;
    let total = total_delay(Placement::Local, res, 0.0)?;
    Ok(SummaryRow {
        name: name.into(),
        link: None,
        placement: Some(Placement::Local),
        resolution: Some(res),
        n_cameras: Some(1),
        camera_rates_mbps: vec![],
        median_rtt_ms: None,
        median_total_delay_ms: Some(total),
        wmap: Some(acc.wmap),
        ap_person: Some(acc.ap_person),
        range_m: detection_range(res).ok(),
        targets: targets
            .iter()
            .map(|t| RowTarget {
                target_ms: *t,
                series: None,
                required_mbps: None,
                availability: if total <= *t { 1.0 } else { 0.0 },
                expected_wmap: None,
                expected_ap_person: None,
                timeline: None,
                bands: vec![],
            })
            .collect(),
    })
}

/// Run a scenario end to end and write every output under `out_dir`.
pub fn run_scenario(cfg: &ScenarioConfig, config_bytes: &[u8], out_dir: &Path, opts: &SimulateOptions) -> CliResult<RunReport> {
    let mut cfg = cfg.clone();
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if let Some(d) = &opts.dmax_ms {
        cfg.policy.dmax_grid_ms = d.clone();
    }
    let violations = offload_core::validate_config(&cfg);
    if !violations.is_empty() {
        return Err(crate::config::ConfigError::Invalid(violations).into());
    }
    let strategy = opts.strategy.unwrap_or(CameraStrategy::Uniform);
    let hz = cfg.traffic.frame_hz;
    let clock = cfg.traffic.frame_clock();
    let targets = cfg.policy.targets_ms.clone();
    let d_list = d_max_list(&cfg.policy.dmax_grid_ms, &targets);

    let (trace, horizon, runs) = simulate(&cfg)?;
    let mut out = OutDir::create(out_dir)?;
    out.write("trace.csv", |w| trace.write_csv(w))?;
    for r in &runs {
        out.write(&format!("logs/{}_ul.csv", r.tech), |w| write_packet_log(&r.ul, w, true))?;
        out.write(&format!("logs/{}_dl.csv", r.tech), |w| write_packet_log(&r.dl, w, true))?;
    }

    let mut report = RunReport {
        seed: cfg.seed,
        config_sha256: sha256_hex(config_bytes),
        frame_hz: hz,
        horizon_s: horizon.as_secs_f64(),
        d_core_ms: cfg.traffic.d_core_ms,
        strategy,
        uniform_rates_mbps: cfg.policy.uniform_rates_mbps.clone(),
        priority_rates_mbps: cfg.policy.priority_rates_mbps.clone(),
        d_max_ms: d_list.clone(),
        targets: targets.iter().map(|t| TargetBudget { target_ms: *t, rtt_budget_ms: edge_budget(*t) }).collect(),
        links: vec![],
        rows: vec![],
        files: BTreeMap::new(),
    };

    let mut constrained: BTreeMap<&str, Vec<RateSeries>> = BTreeMap::new();
    let mut rtt_cdfs: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
    let mut tput_cdfs: Vec<(&str, Vec<(f64, f64)>)> = Vec::new();
    for def in &LINKS {
        let sel: Vec<&LinkRun> = def.techs.iter().filter_map(|t| runs.iter().find(|r| r.tech == *t)).collect();
        let mut rows = Vec::new();
        for d in &d_list {
            let s = constrained_series(&sel, hz, horizon, *d)?;
            rows.push(emit_series(&mut out, &series_path(def.stem, Some(*d)), &s)?);
        }
        for strat in [CameraStrategy::Uniform, CameraStrategy::Priority] {
            let rates = match strat {
                CameraStrategy::Uniform => &cfg.policy.uniform_rates_mbps,
                CameraStrategy::Priority => &cfg.policy.priority_rates_mbps,
            };
            let m = camera_support_from_series(&rows, rates)?;
            let stem = format!("heatmaps/{}_{strat}", def.stem);
            out.write(&format!("{stem}.csv"), |w| m.write_csv(w))?;
            out.write_bytes(&format!("{stem}.svg"), svg::heatmap(&m, &format!("{} availability, {strat} cameras", def.id)).as_bytes())?;
        }
        constrained.insert(def.id, rows);

        // the best link per interval, as in the fallback series
        let delivered = sel
            .iter()
            .map(|r| delivered_throughput::<f64>(&r.ul, hz, horizon))
            .collect::<offload_core::Result<Vec<_>>>()?;
        let mut best = delivered[0].clone();
        for s in &delivered[1..] {
            best = offload_core::analytics::max_fallback(&best, s)?;
        }
        let rel = series_path(def.stem, None);
        let best = emit_series(&mut out, &rel, &best)?;
        let mbps: Vec<f64> = best.values_mbps().collect();
        if !mbps.is_empty() {
            let c = empirical_cdf(&mbps)?;
            out.write(&format!("cdf/throughput_{}.csv", def.stem), |w| write_cdf_csv(&c, "rate_mbps", w))?;
            tput_cdfs.push((def.id, c));
        }

        let rtt = rtt_samples(&sel, hz, horizon)?;
        let (rtt_rel, median) = if rtt.is_empty() {
            log::warn!("{}: no round-trip samples", def.id);
            (None, None)
        } else {
            let c = empirical_cdf(&rtt)?;
            let rel = format!("cdf/rtt_{}.csv", def.stem);
            out.write(&rel, |w| write_cdf_csv(&c, "rtt_ms", w))?;
            let m = cdf_quantile(&c, 0.5);
            rtt_cdfs.push((def.id, c));
            (Some(rel), m)
        };
        let ul: Vec<_> = sel.iter().flat_map(|r| r.ul.iter()).collect();
        report.links.push(LinkSummary {
            link: def.id.into(),
            ul_packets: ul.len(),
            ul_dropped: ul.iter().filter(|p| p.is_dropped()).count(),
            dl_packets: sel.iter().map(|r| r.dl.len()).sum(),
            delivered_series: rel,
            mean_delivered_mbps: mean(&mbps),
            rtt_cdf: rtt_rel,
            median_rtt_ms: median,
        });
    }
    out.write_bytes("cdf/rtt.svg", svg::cdf(&plot(&rtt_cdfs), "round trip (ms)", "Round-trip delay").as_bytes())?;
    out.write_bytes(
        "cdf/throughput.svg",
        svg::cdf(&plot(&tput_cdfs), "delivered uplink (Mbps)", "Uplink throughput per frame").as_bytes(),
    )?;

    report.rows.push(local_row("Local WVGA", Resolution::Wvga, &targets)?);
    report.rows.push(local_row("Local 720P", Resolution::R720p, &targets)?);
    let strat_rates = match strategy {
        CameraStrategy::Uniform => cfg.policy.uniform_rates_mbps.clone(),
        CameraStrategy::Priority => cfg.policy.priority_rates_mbps.clone(),
    };
    let one = vec![strat_rates[0]];
    for (name, link, rates) in [
        ("LTE edge, 1 camera".to_string(), "lte", one.clone()),
        ("mmWave+LTE edge, 1 camera".to_string(), "mmwave+lte", one),
        (format!("mmWave+LTE edge, {} cameras", strat_rates.len()), "mmwave+lte", strat_rates.clone()),
    ] {
        let row = edge_row(&report, &constrained, name, link, rates)?;
        report.rows.push(row);
    }

    let fb = report.links.iter().find(|l| l.link == "mmwave+lte").expect("fallback link");
    let median_rtt = fb.median_rtt_ms.unwrap_or(DEFAULT_MEDIAN_RTT_MS);
    let policy = adaptive_policy(&report, median_rtt);
    let mut row_targets = Vec::new();
    for t in &targets {
        let (series_rel, series) = match edge_budget(*t) {
            Some(b) => {
                let i = d_list.iter().position(|d| *d == b).expect("budget in d_max list");
                (Some(series_path("fallback", Some(b))), constrained["mmwave+lte"][i].clone())
            }
            None => (None, RateSeries::zeros(clock, horizon, None)),
        };
        let mbps: Vec<f64> = series.values_mbps().collect();
        let eval = policy.evaluate(&mbps, *t, strategy)?;
        let rel = timeline_path(*t);
        out.write(&rel, |w| write_timeline(w, &series, &eval))?;
        row_targets.push(RowTarget {
            target_ms: *t,
            series: series_rel,
            required_mbps: None,
            availability: eval.availability,
            expected_wmap: eval.expected_wmap,
            expected_ap_person: eval.expected_ap_person,
            timeline: Some(rel),
            bands: band_shares(&eval),
        });
    }
    report.rows.push(SummaryRow {
        name: "Adaptive (mmWave+LTE)".into(),
        link: Some("mmwave+lte".into()),
        placement: None,
        resolution: None,
        n_cameras: None,
        camera_rates_mbps: strat_rates,
        median_rtt_ms: Some(median_rtt),
        median_total_delay_ms: None,
        wmap: None,
        ap_person: None,
        range_m: None,
        targets: row_targets,
    });

    report.files = out.manifest().clone();
    let json = serde_json::to_string_pretty(&report)? + "\n";
    fs::write(out.root().join("report.json"), json)?;
    Ok(report)
}

fn edge_row(
    report: &RunReport,
    constrained: &BTreeMap<&str, Vec<RateSeries>>,
    name: String,
    link: &str,
    rates: Vec<f64>,
) -> CliResult<SummaryRow> {
    let def = link_def(link);
    let acc = RateAccuracyCurve::default().accuracy_at(EDGE_RESOLUTION, rates[0])?;
    let median = report.links.iter().find(|l| l.link == link).and_then(|l| l.median_rtt_ms);
    let median_total = median.map(|m| total_delay(Placement::Edge, EDGE_RESOLUTION, m)).transpose()?;
    let required: f64 = rates.iter().sum();
    let targets = report
        .targets
        .iter()
        .map(|tb| {
            let (series, avail) = match tb.rtt_budget_ms {
                Some(b) => {
                    let i = report.d_max_ms.iter().position(|d| *d == b).expect("budget in d_max list");
                    (Some(series_path(def.stem, Some(b))), availability(&constrained[link][i], required * 1e6))
                }
                None => (None, 0.0),
            };
            RowTarget {
                target_ms: tb.target_ms,
                series,
                required_mbps: Some(required),
                availability: avail,
                expected_wmap: None,
                expected_ap_person: None,
                timeline: None,
                bands: vec![],
            }
        })
        .collect();
    Ok(SummaryRow {
        name,
        link: Some(link.into()),
        placement: Some(Placement::Edge),
        resolution: Some(EDGE_RESOLUTION),
        n_cameras: Some(rates.len()),
        camera_rates_mbps: rates,
        median_rtt_ms: median,
        median_total_delay_ms: median_total,
        wmap: Some(acc.wmap),
        ap_person: Some(acc.ap_person),
        range_m: detection_range(EDGE_RESOLUTION).ok(),
        targets,
    })
}

/// Recompute every number of `report.json` in `dir` from the files it
/// lists. Returns the number of checks on success.
pub fn audit_report(dir: &Path, config: Option<&Path>) -> CliResult<usize> {
    let report: RunReport = serde_json::from_slice(&fs::read(dir.join("report.json"))?)?;
    let clock = FrameClock::new(report.frame_hz).ok_or_else(|| CliError::Usage("report has frame_hz 0".into()))?;
    let mut bad = Vec::new();
    let mut checks = 0usize;
    let mut check = |ok: bool, what: String| {
        checks += 1;
        if !ok {
            bad.push(what);
        }
    };

    if let Some(path) = config {
        let h = sha256_hex(&fs::read(path)?);
        check(h == report.config_sha256, format!("config hash {h} != {}", report.config_sha256));
    }
    for (rel, hash) in &report.files {
        let actual = sha256_file(&dir.join(rel)).map_err(|e| CliError::Usage(format!("{rel}: {e}")))?;
        check(&actual == hash, format!("{rel}: hash mismatch"));
    }

    for l in &report.links {
        let s = read_series(dir, &l.delivered_series, clock, None)?;
        let m = mean(&s.values_mbps().collect::<Vec<_>>());
        check(m == l.mean_delivered_mbps, format!("{}: mean delivered {m} != {}", l.link, l.mean_delivered_mbps));
        let median = match &l.rtt_cdf {
            Some(rel) => cdf_quantile(&read_cdf(fs::File::open(dir.join(rel))?)?, 0.5),
            None => None,
        };
        check(median == l.median_rtt_ms, format!("{}: median RTT {median:?} != {:?}", l.link, l.median_rtt_ms));
    }

    let inference = InferenceTable::<f64>::default();
    for row in &report.rows {
        match (row.placement, row.resolution) {
            (Some(Placement::Local), Some(res)) => {
                let total = DelayBudget::new(&inference, Placement::Local, res, 0.0)?.total();
                check(row.median_total_delay_ms == Some(total), format!("{}: total delay", row.name));
                for t in &row.targets {
                    let a = if total <= t.target_ms { 1.0 } else { 0.0 };
                    check(a == t.availability, format!("{} @ {} ms: availability", row.name, t.target_ms));
                }
            }
            (Some(Placement::Edge), Some(res)) => {
                let total = row.median_rtt_ms.map(|m| total_delay(Placement::Edge, res, m)).transpose()?;
                check(total == row.median_total_delay_ms, format!("{}: total delay", row.name));
                for t in &row.targets {
                    let a = match (&t.series, t.required_mbps) {
                        (Some(rel), Some(req)) => availability(&read_series(dir, rel, clock, None)?, req * 1e6),
                        _ => 0.0,
                    };
                    check(a == t.availability, format!("{} @ {} ms: availability {a} != {}", row.name, t.target_ms, t.availability));
                }
            }
            _ => {
                let policy = adaptive_policy(&report, row.median_rtt_ms.unwrap_or(DEFAULT_MEDIAN_RTT_MS));
                for t in &row.targets {
                    let mbps: Vec<f64> = match &t.series {
                        Some(rel) => read_series(dir, rel, clock, None)?.values_mbps().collect(),
                        None => vec![0.0; clock.interval_count(SimTime::from_secs_f64(report.horizon_s)) as usize],
                    };
                    let eval = policy.evaluate(&mbps, t.target_ms, report.strategy)?;
                    let what = format!("{} @ {} ms", row.name, t.target_ms);
                    check(eval.availability == t.availability, format!("{what}: availability"));
                    check(eval.expected_wmap == t.expected_wmap, format!("{what}: expected wmAP"));
                    check(eval.expected_ap_person == t.expected_ap_person, format!("{what}: expected AP"));
                    check(band_shares(&eval) == t.bands, format!("{what}: band occupancy"));
                    if let Some(rel) = &t.timeline {
                        let n = csv::Reader::from_path(dir.join(rel))?.records().count();
                        check(n == mbps.len(), format!("{what}: timeline has {n} rows"));
                    }
                }
            }
        }
    }
    if bad.is_empty() {
        Ok(checks)
    } else {
        Err(CliError::Audit(bad))
    }
}
