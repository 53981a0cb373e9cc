//! Air-interface service model: SINR to rate, block errors with HARQ,
//! slot alignment and a single FIFO transmit queue per link.

mod log;
mod sim;

pub use log::{export_packet_log, import_packet_log, read_packet_log, write_packet_log, LinkId, PacketRecord};
pub use sim::{simulate_link, LinkSim, OfferedPacket, RateSchedule, ScheduleSegment, Served};

use crate::model::{Direction, Duplex, SimTime, TechConfig, TechKind, Technology};
use crate::scalar::{db_to_linear, Scalar};

/// Logistic block-error curve: 0.5 at `sinr_ref_db`, steepness `slope` per dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlerModel<S> {
    pub sinr_ref_db: S,
    pub slope: S,
}

pub fn packet_error_prob<S: Scalar>(sinr_db: S, m: &BlerModel<S>) -> S {
    let x = (m.sinr_ref_db - sinr_db) * m.slope;
    let p = S::one() / (S::one() + (-x).exp());
    if p.is_nan() {
        S::zero()
    } else {
        p.max(S::zero()).min(S::one())
    }
}

/// Parameters of the Shannon-style rate map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateMap<S> {
    pub bandwidth_hz: S,
    /// Fraction of resources available to this direction.
    pub share: S,
    pub se_cap_bps_hz: S,
    pub min_sinr_db: S,
}

/// `BW * share * min(se_cap, log2(1 + SINR))`, zero below `min_sinr_db`.
pub fn sinr_to_rate<S: Scalar>(sinr_db: S, m: &RateMap<S>) -> S {
    if sinr_db.is_nan() || sinr_db < m.min_sinr_db {
        return S::zero();
    }
    let se = (S::one() + db_to_linear(sinr_db)).log2().min(m.se_cap_bps_hz);
    m.bandwidth_hz * m.share * se
}

/// Delay until the next slot boundary; zero when already on one.
pub fn frame_alignment_delay(t: SimTime, slot: SimTime) -> SimTime {
    let s = slot.as_micros();
    if s == 0 {
        return SimTime::ZERO;
    }
    SimTime((s - t.as_micros() % s) % s)
}

/// Everything the link simulator needs for one technology and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    pub tech: Technology,
    pub direction: Direction,
    pub rate: RateMap<f64>,
    pub bler: BlerModel<f64>,
    pub harq_rtx_delay: SimTime,
    /// Transmission attempts before a packet is dropped.
    pub max_tx: u32,
    /// Fixed stack latency (scheduling request, grant, PDCP/RLC) added to
    /// every delivery without occupying the air interface.
    pub processing_delay: SimTime,
    /// Added to trace SINR before mapping; traces carry uplink SINR.
    pub sinr_offset_db: f64,
}

impl LinkParams {
    pub fn new(kind: TechKind, cfg: &TechConfig, direction: Direction) -> Self {
        let tech = cfg.technology(kind);
        let (share, processing_ms, offset) = match (direction, tech.duplex) {
            (Direction::Ul, _) => (cfg.ul_share, cfg.ul_processing_ms, 0.0),
            (Direction::Dl, Duplex::Fdd) => (1.0, cfg.dl_processing_ms, dl_offset(cfg)),
            (Direction::Dl, Duplex::Tdd) => (1.0 - cfg.ul_share, cfg.dl_processing_ms, dl_offset(cfg)),
        };
        LinkParams {
            tech,
            direction,
            rate: RateMap {
                bandwidth_hz: tech.bandwidth_to_ue_hz(),
                share,
                se_cap_bps_hz: cfg.se_cap_bps_hz,
                min_sinr_db: cfg.min_sinr_db,
            },
            bler: BlerModel {
                sinr_ref_db: cfg.bler_ref_db,
                slope: cfg.bler_slope,
            },
            harq_rtx_delay: SimTime::from_millis_f64(cfg.harq_rtx_delay_ms),
            max_tx: cfg.max_tx,
            processing_delay: SimTime::from_millis_f64(processing_ms),
            sinr_offset_db: offset,
        }
    }

    pub fn uplink(kind: TechKind, cfg: &TechConfig) -> Self {
        Self::new(kind, cfg, Direction::Ul)
    }

    pub fn downlink(kind: TechKind, cfg: &TechConfig) -> Self {
        Self::new(kind, cfg, Direction::Dl)
    }

    /// Rate at which the link saturates (SINR above the cap knee).
    pub fn peak_rate_bps(&self) -> f64 {
        self.rate.bandwidth_hz * self.rate.share * self.rate.se_cap_bps_hz
    }
}

fn dl_offset(cfg: &TechConfig) -> f64 {
    (cfg.bs_tx_dbm - cfg.ue_tx_dbm) + (cfg.ul_noise_figure_db - cfg.dl_noise_figure_db)
}
