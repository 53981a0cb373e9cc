//! Domain vocabulary shared by every stage of the pipeline.
//!
//! Simulation time is an integer count of microseconds ([`SimTime`]); rates
//! are bits per second once they leave the configuration layer. The
//! configuration structs keep the human-facing units (ms, Mbps, dB) that the
//! scenario file uses and expose converted accessors.

use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ParseEnumError;

/// Simulation instant or duration in whole microseconds.
#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const MAX: SimTime = SimTime(u64::MAX);

    pub const fn from_micros(us: u64) -> Self {
        SimTime(us)
    }

    /// Rounds to the nearest microsecond; negative input saturates at zero.
    pub fn from_millis_f64(ms: f64) -> Self {
        SimTime((ms * 1e3).round().max(0.0) as u64)
    }

    pub fn from_secs_f64(s: f64) -> Self {
        SimTime((s * 1e6).round().max(0.0) as u64)
    }

    pub const fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-6
    }

    pub fn as_millis_f64(self) -> f64 {
        self.0 as f64 * 1e-3
    }

    pub fn saturating_sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_sub(rhs.0))
    }

    /// Seconds with exactly six decimals, the trace and packet-log time format.
    pub fn fmt_secs(self) -> String {
        format!("{}.{:06}", self.0 / 1_000_000, self.0 % 1_000_000)
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0.saturating_add(rhs.0))
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}s", self.fmt_secs())
    }
}

/// Partition of the time axis into video-frame intervals of length `1/hz`.
///
/// Boundary `k` sits at `floor(k * 1e6 / hz)` microseconds, so intervals tile
/// the axis exactly even when `1e6 / hz` is not an integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameClock {
    hz: u32,
}

impl FrameClock {
    pub fn new(hz: u32) -> Option<Self> {
        (hz > 0).then_some(FrameClock { hz })
    }

    pub fn hz(&self) -> u32 {
        self.hz
    }

    /// Nominal interval length in seconds.
    pub fn period_secs(&self) -> f64 {
        1.0 / self.hz as f64
    }

    pub fn boundary(&self, k: u64) -> SimTime {
        SimTime((k as u128 * 1_000_000 / self.hz as u128) as u64)
    }

    /// Index of the half-open interval containing `t`.
    pub fn index_of(&self, t: SimTime) -> u64 {
        (((t.0 as u128 + 1) * self.hz as u128 - 1) / 1_000_000) as u64
    }

    /// Number of intervals needed to cover `[0, horizon)`.
    pub fn interval_count(&self, horizon: SimTime) -> u64 {
        if horizon.0 == 0 {
            0
        } else {
            self.index_of(SimTime(horizon.0 - 1)) + 1
        }
    }

    pub fn interval(&self, k: u64) -> FrameInterval {
        FrameInterval {
            index: k,
            t_start: self.boundary(k),
            duration_s: self.period_secs(),
        }
    }

    pub fn intervals(&self, horizon: SimTime) -> impl Iterator<Item = FrameInterval> + '_ {
        (0..self.interval_count(horizon)).map(move |k| self.interval(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameInterval {
    pub index: u64,
    pub t_start: SimTime,
    pub duration_s: f64,
}

/// Spatial video resolution. Ordering follows pixel count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Resolution {
    #[serde(rename = "WVGA")]
    Wvga,
    #[serde(rename = "720P")]
    R720p,
    #[serde(rename = "1080P")]
    R1080p,
    #[serde(rename = "2.2K")]
    R2p2k,
}

impl Resolution {
    pub const ALL: [Resolution; 4] = [
        Resolution::Wvga,
        Resolution::R720p,
        Resolution::R1080p,
        Resolution::R2p2k,
    ];

    pub const fn dimensions(self) -> (u32, u32) {
        match self {
            Resolution::Wvga => (672, 378),
            Resolution::R720p => (1280, 720),
            Resolution::R1080p => (1920, 1080),
            Resolution::R2p2k => (2208, 1242),
        }
    }

    pub const fn width(self) -> u32 {
        self.dimensions().0
    }

    pub const fn height(self) -> u32 {
        self.dimensions().1
    }

    pub const fn pixels(self) -> u32 {
        self.width() * self.height()
    }

    pub const fn name(self) -> &'static str {
        match self {
            Resolution::Wvga => "WVGA",
            Resolution::R720p => "720P",
            Resolution::R1080p => "1080P",
            Resolution::R2p2k => "2.2K",
        }
    }
}

impl fmt::Display for Resolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Resolution {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WVGA" => Ok(Resolution::Wvga),
            "720P" => Ok(Resolution::R720p),
            "1080P" => Ok(Resolution::R1080p),
            "2.2K" | "2K2" | "2P2K" => Ok(Resolution::R2p2k),
            _ => Err(ParseEnumError::new("resolution", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechKind {
    Lte,
    Mmwave,
}

impl TechKind {
    pub const ALL: [TechKind; 2] = [TechKind::Lte, TechKind::Mmwave];

    pub const fn name(self) -> &'static str {
        match self {
            TechKind::Lte => "lte",
            TechKind::Mmwave => "mmwave",
        }
    }
}

impl fmt::Display for TechKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TechKind {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lte" => Ok(TechKind::Lte),
            "mmwave" | "nr" => Ok(TechKind::Mmwave),
            _ => Err(ParseEnumError::new("technology", s)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    Fdd,
    Tdd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ul,
    Dl,
}

impl Direction {
    pub const fn name(self) -> &'static str {
        match self {
            Direction::Ul => "UL",
            Direction::Dl => "DL",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Direction {
    type Err = ParseEnumError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "UL" => Ok(Direction::Ul),
            "DL" => Ok(Direction::Dl),
            _ => Err(ParseEnumError::new("direction", s)),
        }
    }
}

/// Radio access technology as seen by one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Technology {
    pub kind: TechKind,
    pub carrier_ghz: f64,
    /// Total system bandwidth per direction (FDD) or shared (TDD).
    pub total_bandwidth_mhz: f64,
    pub loading_fraction: f64,
    pub duplex: Duplex,
    pub slot: SimTime,
    pub n_harq: u32,
}

impl Technology {
    pub fn lte() -> Self {
        Technology {
            kind: TechKind::Lte,
            carrier_ghz: 1.9,
            total_bandwidth_mhz: 40.0,
            loading_fraction: 0.25,
            duplex: Duplex::Fdd,
            slot: SimTime::from_micros(1000),
            n_harq: 8,
        }
    }

    /// 28 GHz, numerology 2 (0.25 ms slots).
    pub fn mmwave() -> Self {
        Technology {
            kind: TechKind::Mmwave,
            carrier_ghz: 28.0,
            total_bandwidth_mhz: 400.0,
            loading_fraction: 0.25,
            duplex: Duplex::Tdd,
            slot: SimTime::from_micros(250),
            n_harq: 20,
        }
    }

    pub fn default_for(kind: TechKind) -> Self {
        match kind {
            TechKind::Lte => Self::lte(),
            TechKind::Mmwave => Self::mmwave(),
        }
    }

    pub fn bandwidth_to_ue_hz(&self) -> f64 {
        self.total_bandwidth_mhz * 1e6 * self.loading_fraction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Position {
    fn from(p: [f64; 2]) -> Self {
        Position { x: p[0], y: p[1] }
    }
}

impl From<Position> for [f64; 2] {
    fn from(p: Position) -> Self {
        [p.x, p.y]
    }
}

/// Walking route: a polyline sampled at fixed arc-length spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteSpec {
    pub waypoints: Vec<Position>,
    pub spacing_m: f64,
    /// Not given by the measurement campaign; 1.4 m/s is a typical walking pace.
    pub speed_mps: f64,
}

impl Default for RouteSpec {
    fn default() -> Self {
        RouteSpec {
            waypoints: vec![Position::new(0.0, 0.0), Position::new(180.0, 0.0)],
            spacing_m: 1.0,
            speed_mps: 1.4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: u32,
    pub position: Position,
    pub height_m: f64,
    pub techs: Vec<TechKind>,
    /// Arc-length ranges `[start_m, end_m)` of the route that are NLOS to this site.
    pub nlos: Vec<[f64; 2]>,
}

impl BaseStation {
    pub fn serves(&self, kind: TechKind) -> bool {
        self.techs.contains(&kind)
    }

    pub fn is_los_at(&self, arc_m: f64) -> bool {
        !self.nlos.iter().any(|r| arc_m >= r[0] && arc_m < r[1])
    }
}

/// Per-technology radio, propagation and link-layer settings.
///
/// Blocker attenuations, path-loss exponents and the link-layer calibration
/// knobs (`se_cap`, BLER curve, HARQ timing, processing delay) are model
/// stand-ins, not measured values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechConfig {
    pub carrier_ghz: f64,
    pub total_bandwidth_mhz: f64,
    pub loading_fraction: f64,
    pub duplex: Duplex,
    pub slot_ms: f64,
    pub n_harq: u32,

    pub ue_tx_dbm: f64,
    pub bs_tx_dbm: f64,
    pub ul_noise_figure_db: f64,
    pub dl_noise_figure_db: f64,
    pub ue_antennas: u32,
    pub bs_antennas: u32,

    pub n_los: f64,
    pub n_nlos: f64,
    pub nlos_offset_db: f64,
    pub nlos_rays: u32,
    /// Extra loss of each additional reflected ray relative to the strongest one.
    pub nlos_ray_spread_db: [f64; 2],
    pub interference_factor: f64,
    pub outage_sinr_db: f64,

    pub se_cap_bps_hz: f64,
    pub min_sinr_db: f64,
    pub ul_share: f64,
    pub harq_rtx_delay_ms: f64,
    pub max_tx: u32,
    pub bler_ref_db: f64,
    pub bler_slope: f64,
    pub ul_processing_ms: f64,
    pub dl_processing_ms: f64,
}

impl TechConfig {
    pub fn lte() -> Self {
        TechConfig {
            carrier_ghz: 1.9,
            total_bandwidth_mhz: 40.0,
            loading_fraction: 0.25,
            duplex: Duplex::Fdd,
            slot_ms: 1.0,
            n_harq: 8,
            ue_tx_dbm: 25.0,
            bs_tx_dbm: 30.0,
            ul_noise_figure_db: 5.0,
            dl_noise_figure_db: 5.0,
            ue_antennas: 1,
            bs_antennas: 1,
            n_los: 2.0,
            n_nlos: 2.9,
            nlos_offset_db: 10.0,
            nlos_rays: 3,
            nlos_ray_spread_db: [10.0, 20.0],
            interference_factor: 0.25,
            outage_sinr_db: -30.0,
            se_cap_bps_hz: 3.6,
            min_sinr_db: -5.0,
            ul_share: 1.0,
            harq_rtx_delay_ms: 8.0,
            max_tx: 4,
            bler_ref_db: -5.0,
            bler_slope: 1.0,
            ul_processing_ms: 6.0,
            dl_processing_ms: 3.0,
        }
    }

    pub fn mmwave() -> Self {
        TechConfig {
            carrier_ghz: 28.0,
            total_bandwidth_mhz: 400.0,
            loading_fraction: 0.25,
            duplex: Duplex::Tdd,
            slot_ms: 0.25,
            n_harq: 20,
            ue_tx_dbm: 25.0,
            bs_tx_dbm: 30.0,
            ul_noise_figure_db: 5.0,
            dl_noise_figure_db: 5.0,
            ue_antennas: 16,
            bs_antennas: 64,
            n_los: 2.0,
            n_nlos: 2.9,
            nlos_offset_db: 20.0,
            nlos_rays: 3,
            nlos_ray_spread_db: [10.0, 20.0],
            interference_factor: 0.25,
            outage_sinr_db: -30.0,
            se_cap_bps_hz: 7.4,
            min_sinr_db: -5.0,
            ul_share: 0.6,
            harq_rtx_delay_ms: 1.0,
            max_tx: 4,
            bler_ref_db: -5.0,
            bler_slope: 1.0,
            ul_processing_ms: 3.0,
            dl_processing_ms: 1.5,
        }
    }

    pub fn default_for(kind: TechKind) -> Self {
        match kind {
            TechKind::Lte => Self::lte(),
            TechKind::Mmwave => Self::mmwave(),
        }
    }

    pub fn technology(&self, kind: TechKind) -> Technology {
        Technology {
            kind,
            carrier_ghz: self.carrier_ghz,
            total_bandwidth_mhz: self.total_bandwidth_mhz,
            loading_fraction: self.loading_fraction,
            duplex: self.duplex,
            slot: SimTime::from_millis_f64(self.slot_ms),
            n_harq: self.n_harq,
        }
    }

    /// Scalar beamforming gain `10 log10(N_ue * N_bs)`.
    pub fn array_gain_db(&self) -> f64 {
        10.0 * ((self.ue_antennas * self.bs_antennas) as f64).log10()
    }
}

/// Angular blockage model settings. Angles in degrees, relative to the
/// walking direction (azimuth) and the horizon (elevation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockageParams {
    pub enabled: bool,
    pub self_blocking: bool,
    pub k_nsb: u32,
    pub t_blk_ms: f64,
    pub self_attenuation_db: f64,
    pub nsb_attenuation_db: f64,
    pub self_az_center_deg: f64,
    pub self_az_span_deg: f64,
    pub self_el_center_deg: f64,
    pub self_el_span_deg: f64,
    pub nsb_az_spread_deg: [f64; 2],
    pub nsb_el_spread_deg: [f64; 2],
    pub nsb_el_center_deg: [f64; 2],
    pub apply_to_lte: bool,
}

impl Default for BlockageParams {
    fn default() -> Self {
        BlockageParams {
            enabled: true,
            self_blocking: true,
            k_nsb: 40,
            t_blk_ms: 100.0,
            self_attenuation_db: 30.0,
            nsb_attenuation_db: 20.0,
            self_az_center_deg: 180.0,
            self_az_span_deg: 120.0,
            self_el_center_deg: 0.0,
            self_el_span_deg: 80.0,
            nsb_az_spread_deg: [15.0, 45.0],
            nsb_el_spread_deg: [5.0, 15.0],
            nsb_el_center_deg: [0.0, 10.0],
            apply_to_lte: false,
        }
    }
}

impl BlockageParams {
    pub fn period(&self) -> SimTime {
        SimTime::from_millis_f64(self.t_blk_ms)
    }
}

/// Sender rate-control knobs for the uplink source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcParams {
    pub probe_step_mbps: f64,
    pub backoff: f64,
    pub min_rate_mbps: f64,
    pub initial_rate_mbps: f64,
    pub initial_rtt_ms: f64,
}

impl Default for CcParams {
    fn default() -> Self {
        CcParams {
            probe_step_mbps: 2.0,
            backoff: 0.85,
            min_rate_mbps: 0.5,
            initial_rate_mbps: 10.0,
            initial_rtt_ms: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams {
    pub d_core_ms: f64,
    pub ul_cap_mbps: f64,
    pub dl_rate_mbps: f64,
    pub dl_pkts_per_s: u32,
    pub tcp_pkt_bytes: u32,
    pub frame_hz: u32,
    pub cc: CcParams,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            d_core_ms: 5.0,
            ul_cap_mbps: 120.0,
            dl_rate_mbps: 1.0,
            dl_pkts_per_s: 30,
            tcp_pkt_bytes: 1024,
            frame_hz: 30,
            cc: CcParams::default(),
        }
    }
}

impl TrafficParams {
    pub fn frame_clock(&self) -> FrameClock {
        FrameClock::new(self.frame_hz).expect("frame_hz validated > 0")
    }

    /// Nominal frame interval in milliseconds.
    pub fn frame_interval_ms(&self) -> f64 {
        1e3 / self.frame_hz as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyParams {
    /// Total-delay targets evaluated in the summary; each yields an RTT budget.
    pub targets_ms: Vec<f64>,
    /// Round-trip constraints for the heatmap rows.
    pub dmax_grid_ms: Vec<f64>,
    pub uniform_rates_mbps: Vec<f64>,
    pub priority_rates_mbps: Vec<f64>,
}

impl Default for PolicyParams {
    fn default() -> Self {
        PolicyParams {
            targets_ms: vec![100.0, 150.0],
            dmax_grid_ms: vec![30.0, 40.0, 50.0],
            uniform_rates_mbps: vec![26.0; 4],
            priority_rates_mbps: vec![26.0, 10.0, 10.0, 10.0],
        }
    }
}

/// Complete scenario description; `seed` determines every random draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub route: RouteSpec,
    pub base_stations: Vec<BaseStation>,
    pub lte: TechConfig,
    pub mmwave: TechConfig,
    pub blockage: BlockageParams,
    pub traffic: TrafficParams,
    pub policy: PolicyParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            route: RouteSpec::default(),
            base_stations: vec![
                BaseStation {
                    id: 1,
                    position: Position::new(20.0, 30.0),
                    height_m: 10.0,
                    techs: vec![TechKind::Lte, TechKind::Mmwave],
                    nlos: vec![[70.0, 130.0]],
                },
                BaseStation {
                    id: 2,
                    position: Position::new(160.0, -30.0),
                    height_m: 10.0,
                    techs: vec![TechKind::Lte, TechKind::Mmwave],
                    nlos: vec![[60.0, 120.0]],
                },
            ],
            lte: TechConfig::lte(),
            mmwave: TechConfig::mmwave(),
            blockage: BlockageParams::default(),
            traffic: TrafficParams::default(),
            policy: PolicyParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn tech(&self, kind: TechKind) -> &TechConfig {
        match kind {
            TechKind::Lte => &self.lte,
            TechKind::Mmwave => &self.mmwave,
        }
    }

    pub fn d_core(&self) -> SimTime {
        SimTime::from_millis_f64(self.traffic.d_core_ms)
    }
}

/// One failed configuration check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.field, self.message)
    }
}

struct Checker(Vec<Violation>);

impl Checker {
    fn require(&mut self, ok: bool, field: impl Into<String>, message: &str) {
        if !ok {
            self.0.push(Violation::new(field, message));
        }
    }

    fn positive(&mut self, v: f64, field: impl Into<String>) {
        let field = field.into();
        if v.is_nan() || v <= 0.0 {
            self.0.push(Violation::new(field, "must be positive"));
        }
    }

    fn finite(&mut self, v: f64, field: impl Into<String>) {
        self.require(v.is_finite(), field, "must be finite");
    }

    fn range(&mut self, r: [f64; 2], field: &str) {
        self.require(
            r[0].is_finite() && r[1].is_finite() && r[0] <= r[1],
            field,
            "range must be finite with min <= max",
        );
    }
}

/// Check every configuration invariant. An empty result means the scenario
/// runs through all pipeline stages without precondition failures.
pub fn validate_config(cfg: &ScenarioConfig) -> Vec<Violation> {
    let mut c = Checker(Vec::new());

    let route = &cfg.route;
    c.require(route.waypoints.len() >= 2, "route.waypoints", "needs at least 2 waypoints");
    for (i, w) in route.waypoints.iter().enumerate() {
        c.require(w.x.is_finite() && w.y.is_finite(), format!("route.waypoints[{i}]"), "must be finite");
    }
    c.positive(route.spacing_m, "route.spacing_m");
    c.positive(route.speed_mps, "route.speed_mps");

    let mut ids: Vec<u32> = cfg.base_stations.iter().map(|b| b.id).collect();
    ids.sort_unstable();
    ids.dedup();
    c.require(ids.len() == cfg.base_stations.len(), "bs", "ids must be unique");
    for kind in TechKind::ALL {
        c.require(
            cfg.base_stations.iter().any(|b| b.serves(kind)),
            "bs",
            &format!("no base station serves {kind}"),
        );
    }
    for bs in &cfg.base_stations {
        let p = format!("bs.{}", bs.id);
        c.require(
            bs.position.x.is_finite() && bs.position.y.is_finite(),
            format!("{p}.position"),
            "must be finite",
        );
        c.require(bs.height_m >= 0.0, format!("{p}.height_m"), "negative");
        for r in &bs.nlos {
            c.range(*r, &format!("{p}.nlos"));
        }
    }

    for kind in TechKind::ALL {
        let t = cfg.tech(kind);
        let p = kind.name();
        c.positive(t.carrier_ghz, format!("{p}.carrier_ghz"));
        c.positive(t.total_bandwidth_mhz, format!("{p}.total_bandwidth_mhz"));
        c.require(
            t.loading_fraction > 0.0 && t.loading_fraction <= 1.0,
            format!("{p}.loading_fraction"),
            "must lie in (0, 1]",
        );
        c.require(t.slot_ms >= 0.001, format!("{p}.slot_ms"), "must be at least 1 us");
        c.require(t.n_harq >= 1, format!("{p}.n_harq"), "must be at least 1");
        for (v, f) in [
            (t.ue_tx_dbm, "ue_tx_dbm"),
            (t.bs_tx_dbm, "bs_tx_dbm"),
            (t.ul_noise_figure_db, "ul_noise_figure_db"),
            (t.dl_noise_figure_db, "dl_noise_figure_db"),
            (t.nlos_offset_db, "nlos_offset_db"),
            (t.outage_sinr_db, "outage_sinr_db"),
            (t.min_sinr_db, "min_sinr_db"),
            (t.bler_ref_db, "bler_ref_db"),
        ] {
            c.finite(v, format!("{p}.{f}"));
        }
        c.require(t.ue_antennas >= 1, format!("{p}.ue_antennas"), "must be at least 1");
        c.require(t.bs_antennas >= 1, format!("{p}.bs_antennas"), "must be at least 1");
        c.positive(t.n_los, format!("{p}.n_los"));
        c.require(t.n_nlos >= t.n_los, format!("{p}.n_nlos"), "must be >= n_los");
        c.require(t.nlos_offset_db >= 0.0, format!("{p}.nlos_offset_db"), "negative");
        c.require(t.nlos_rays >= 1, format!("{p}.nlos_rays"), "must be at least 1");
        c.range(t.nlos_ray_spread_db, &format!("{p}.nlos_ray_spread_db"));
        c.require(
            t.nlos_ray_spread_db[0] >= 0.0,
            format!("{p}.nlos_ray_spread_db"),
            "negative",
        );
        c.require(
            (0.0..=1.0).contains(&t.interference_factor),
            format!("{p}.interference_factor"),
            "must lie in [0, 1]",
        );
        c.positive(t.se_cap_bps_hz, format!("{p}.se_cap_bps_hz"));
        c.require(
            t.ul_share > 0.0 && t.ul_share <= 1.0,
            format!("{p}.ul_share"),
            "must lie in (0, 1]",
        );
        if t.duplex == Duplex::Fdd {
            c.require(t.ul_share == 1.0, format!("{p}.ul_share"), "must be 1 for FDD");
        } else {
            c.require(t.ul_share < 1.0, format!("{p}.ul_share"), "must leave downlink symbols for TDD");
        }
        c.require(t.harq_rtx_delay_ms >= 0.0, format!("{p}.harq_rtx_delay_ms"), "negative");
        c.require(
            t.max_tx >= 1 && t.max_tx <= t.n_harq,
            format!("{p}.max_tx"),
            "must lie in [1, n_harq]",
        );
        c.positive(t.bler_slope, format!("{p}.bler_slope"));
        c.require(t.ul_processing_ms >= 0.0, format!("{p}.ul_processing_ms"), "negative");
        c.require(t.dl_processing_ms >= 0.0, format!("{p}.dl_processing_ms"), "negative");
    }

    let b = &cfg.blockage;
    c.positive(b.t_blk_ms, "blockage.t_blk_ms");
    c.require(b.self_attenuation_db >= 0.0, "blockage.self_attenuation_db", "negative");
    c.require(b.nsb_attenuation_db >= 0.0, "blockage.nsb_attenuation_db", "negative");
    c.positive(b.self_az_span_deg, "blockage.self_az_span_deg");
    c.positive(b.self_el_span_deg, "blockage.self_el_span_deg");
    c.range(b.nsb_az_spread_deg, "blockage.nsb_az_spread_deg");
    c.range(b.nsb_el_spread_deg, "blockage.nsb_el_spread_deg");
    c.range(b.nsb_el_center_deg, "blockage.nsb_el_center_deg");
    c.require(b.nsb_az_spread_deg[0] > 0.0, "blockage.nsb_az_spread_deg", "spreads must be positive");
    c.require(b.nsb_el_spread_deg[0] > 0.0, "blockage.nsb_el_spread_deg", "spreads must be positive");

    let t = &cfg.traffic;
    if t.d_core_ms < 0.0 || t.d_core_ms.is_nan() {
        c.0.push(Violation::new("d_core_ms", "negative"));
    }
    c.positive(t.ul_cap_mbps, "ul_cap_mbps");
    c.positive(t.dl_rate_mbps, "dl_rate_mbps");
    c.require(t.dl_pkts_per_s > 0, "dl_pkts_per_s", "must be positive");
    c.require(t.tcp_pkt_bytes > 0, "tcp_pkt_bytes", "must be positive");
    c.require(t.frame_hz > 0, "frame_hz", "must be positive");
    c.require(
        t.dl_rate_mbps * 1e6 / t.dl_pkts_per_s.max(1) as f64 >= 1.0,
        "dl_rate_mbps",
        "downlink packets must carry at least one bit",
    );
    let cc = &t.cc;
    c.positive(cc.probe_step_mbps, "cc.probe_step_mbps");
    c.require(cc.backoff > 0.0 && cc.backoff < 1.0, "cc.backoff", "must lie in (0, 1)");
    c.positive(cc.min_rate_mbps, "cc.min_rate_mbps");
    c.require(cc.min_rate_mbps <= t.ul_cap_mbps, "cc.min_rate_mbps", "exceeds ul_cap_mbps");
    c.positive(cc.initial_rate_mbps, "cc.initial_rate_mbps");
    c.positive(cc.initial_rtt_ms, "cc.initial_rtt_ms");

    let p = &cfg.policy;
    c.require(!p.targets_ms.is_empty(), "policy.targets_ms", "must not be empty");
    for v in &p.targets_ms {
        c.positive(*v, "policy.targets_ms");
    }
    for v in &p.dmax_grid_ms {
        c.require(*v >= 0.0, "policy.dmax_grid_ms", "negative");
    }
    for (rates, f) in [
        (&p.uniform_rates_mbps, "policy.uniform_rates_mbps"),
        (&p.priority_rates_mbps, "policy.priority_rates_mbps"),
    ] {
        c.require(!rates.is_empty() && rates.len() <= 4, f, "needs 1 to 4 cameras");
        c.require(rates.iter().all(|r| *r > 0.0), f, "rates must be positive");
    }

    c.0
}
