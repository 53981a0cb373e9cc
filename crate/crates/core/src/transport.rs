//! Application traffic sources and core-network delay.
//!
//! The uplink source is a rate-based AIMD sender that paces fixed-size
//! packets at `r`, raises `r` by the probe step once per smoothed RTT worth
//! of acknowledgements, and backs off multiplicatively on a drop or when the
//! bits in flight exceed one bandwidth-delay product. The downlink source is
//! a constant-bit-rate feedback stream.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::airlink::{LinkSim, OfferedPacket, PacketRecord};
use crate::error::{Error, Result};
use crate::model::{FrameClock, SimTime, TrafficParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Feedback {
    Ack { sent: SimTime, bits: u64 },
    Loss { bits: u64 },
}

struct Aimd {
    rate_bps: f64,
    min_bps: f64,
    cap_bps: f64,
    step_bps: f64,
    backoff: f64,
    srtt_s: f64,
    min_rtt_s: f64,
    last_backoff: Option<SimTime>,
}

impl Aimd {
    fn new(p: &TrafficParams) -> Self {
        let cap = p.ul_cap_mbps * 1e6;
        let min = (p.cc.min_rate_mbps * 1e6).min(cap);
        Aimd {
            rate_bps: (p.cc.initial_rate_mbps * 1e6).clamp(min, cap),
            min_bps: min,
            cap_bps: cap,
            step_bps: p.cc.probe_step_mbps * 1e6,
            backoff: p.cc.backoff,
            srtt_s: p.cc.initial_rtt_ms * 1e-3,
            min_rtt_s: f64::INFINITY,
            last_backoff: None,
        }
    }

    fn on_ack(&mut self, rtt_s: f64, bits: u64) {
        self.srtt_s = 0.875 * self.srtt_s + 0.125 * rtt_s;
        self.min_rtt_s = self.min_rtt_s.min(rtt_s);
        // one probe step per srtt of acknowledged traffic at the current rate
        let inc = self.step_bps * bits as f64 / (self.rate_bps * self.srtt_s);
        self.rate_bps = (self.rate_bps + inc).min(self.cap_bps);
    }

    /// At most one decrease per smoothed RTT.
    fn congestion(&mut self, now: SimTime) {
        let srtt = SimTime::from_secs_f64(self.srtt_s);
        if self.last_backoff.is_some_and(|t| now < t + srtt) {
            return;
        }
        self.rate_bps = (self.rate_bps * self.backoff).max(self.min_bps);
        self.last_backoff = Some(now);
    }

    /// In-flight allowance: one bandwidth-delay product at the current rate
    /// over the RTT floor, plus the same again as queueing headroom.
    fn window_bits(&self) -> f64 {
        let base = if self.min_rtt_s.is_finite() { self.min_rtt_s } else { self.srtt_s };
        2.0 * self.rate_bps * base
    }
}

fn check_horizon(horizon: SimTime) -> Result<()> {
    if horizon == SimTime::ZERO {
        return Err(Error::invalid("horizon must be positive"));
    }
    Ok(())
}

/// Drive `link` with the closed-loop uplink source until `horizon`.
///
/// Returned records carry air-interface delivery times; see
/// [`add_core_delay`] for the end-to-end view. Acknowledgements reach the
/// sender one core round trip after air delivery.
pub fn run_uplink_source(link: &mut LinkSim<'_>, params: &TrafficParams, horizon: SimTime) -> Result<Vec<PacketRecord>> {
    check_horizon(horizon)?;
    let bits = params.tcp_pkt_bytes as u64 * 8;
    if bits == 0 {
        return Err(Error::invalid("packet size must be positive"));
    }
    let core_rtt = SimTime::from_millis_f64(2.0 * params.d_core_ms);
    let mut cc = Aimd::new(params);
    let mut events: BinaryHeap<Reverse<(SimTime, Feedback)>> = BinaryHeap::new();
    let mut in_flight = 0u64;
    let mut out = Vec::new();
    let mut t = SimTime::ZERO;
    let mut next_us = 0.0f64;

    while t < horizon {
        while let Some(&Reverse((at, fb))) = events.peek() {
            if at > t {
                break;
            }
            events.pop();
            match fb {
                Feedback::Ack { sent, bits } => {
                    in_flight -= bits;
                    cc.on_ack((at - sent).as_secs_f64(), bits);
                }
                Feedback::Loss { bits } => {
                    in_flight -= bits;
                    cc.congestion(at);
                }
            }
        }

        if in_flight as f64 + bits as f64 > cc.window_bits() && in_flight > 0 {
            cc.congestion(t);
            // wait for the window to open
            match events.peek() {
                Some(&Reverse((at, _))) => {
                    t = at;
                    continue;
                }
                None => break,
            }
        }

        let served = link.submit(OfferedPacket { id: out.len() as u64, t_arrival: t, size_bits: bits });
        match (served.record.t_delivered, served.resolved_at) {
            (Some(d), _) => events.push(Reverse((d + core_rtt, Feedback::Ack { sent: t, bits }))),
            (None, Some(r)) => events.push(Reverse((r + core_rtt, Feedback::Loss { bits }))),
            (None, None) => {
                // the link never recovers; nothing more can be delivered
                out.push(served.record);
                break;
            }
        }
        in_flight += bits;
        out.push(served.record);

        // pace on a fractional clock so rounding to whole microseconds does
        // not erode the rate
        next_us = next_us.max(t.as_micros() as f64) + bits as f64 * 1e6 / cc.rate_bps;
        t = SimTime(next_us.ceil() as u64).max(t + SimTime(1));
    }
    Ok(out)
}

/// Constant-bit-rate feedback: `floor(horizon * dl_pkts_per_s)` packets of
/// `dl_rate / dl_pkts_per_s` bits, one at each boundary of the packet clock.
pub fn run_downlink_feedback(link: &mut LinkSim<'_>, params: &TrafficParams, horizon: SimTime) -> Result<Vec<PacketRecord>> {
    check_horizon(horizon)?;
    let clock = FrameClock::new(params.dl_pkts_per_s).ok_or_else(|| Error::invalid("dl_pkts_per_s must be positive"))?;
    let n = (horizon.as_micros() as u128 * params.dl_pkts_per_s as u128 / 1_000_000) as u64;
    let size = dl_packet_bits(params);
    if size == 0 {
        return Err(Error::invalid("downlink packet size must be positive"));
    }
    Ok((0..n)
        .map(|k| link.submit(OfferedPacket { id: k, t_arrival: clock.boundary(k), size_bits: size }).record)
        .collect())
}

pub fn dl_packet_bits(params: &TrafficParams) -> u64 {
    (params.dl_rate_mbps * 1e6 / params.dl_pkts_per_s as f64).floor() as u64
}

/// Shift every delivery by the one-way core delay.
pub fn add_core_delay(records: &[PacketRecord], d_core: SimTime) -> Vec<PacketRecord> {
    records
        .iter()
        .map(|r| PacketRecord { t_delivered: r.t_delivered.map(|d| d + d_core), ..*r })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::{LinkParams, RateSchedule};
    use crate::model::{TechConfig, TechKind};
    use rand::SeedableRng;

    fn delivered_mbps(recs: &[PacketRecord], from: SimTime, to: SimTime) -> f64 {
        let bits: u64 = recs
            .iter()
            .filter(|r| r.t_delivered.is_some_and(|d| d >= from && d < to))
            .map(|r| r.size_bits)
            .sum();
        bits as f64 / (to - from).as_secs_f64() / 1e6
    }

    fn run(capacity_mbps: f64, kind: TechKind, secs: f64) -> Vec<PacketRecord> {
        let cfg = TechConfig::default_for(kind);
        let params = LinkParams::uplink(kind, &cfg);
        let sched = RateSchedule::constant(kind, capacity_mbps * 1e6, 0.0);
        let mut link = LinkSim::new(&sched, &params, rand_chacha::ChaCha8Rng::seed_from_u64(3));
        run_uplink_source(&mut link, &TrafficParams::default(), SimTime::from_secs_f64(secs)).unwrap()
    }

    #[test]
    fn saturates_at_application_cap() {
        let recs = run(200.0, TechKind::Mmwave, 6.0);
        let r = delivered_mbps(&recs, SimTime::from_secs_f64(4.0), SimTime::from_secs_f64(5.0));
        assert!((108.0..=120.5).contains(&r), "{r}");
    }

    #[test]
    fn tracks_bottleneck_capacity() {
        let recs = run(20.0, TechKind::Lte, 6.0);
        let r = delivered_mbps(&recs, SimTime::from_secs_f64(4.0), SimTime::from_secs_f64(5.0));
        assert!((18.0..=20.0 + 1e-9).contains(&r), "{r}");
    }

    #[test]
    fn outage_delivers_nothing() {
        let recs = run(0.0, TechKind::Lte, 1.0);
        assert!(recs.iter().all(|r| r.t_delivered.is_none()));
    }

    #[test]
    fn downlink_packet_count_and_size() {
        let params = TrafficParams::default();
        let lp = LinkParams::downlink(TechKind::Lte, &TechConfig::lte());
        let sched = RateSchedule::constant(TechKind::Lte, 50e6, 0.0);
        let mut link = LinkSim::new(&sched, &lp, rand_chacha::ChaCha8Rng::seed_from_u64(1));
        let recs = run_downlink_feedback(&mut link, &params, SimTime::from_secs_f64(1.0)).unwrap();
        assert_eq!(recs.len(), 30);
        let total: u64 = recs.iter().map(|r| r.size_bits).sum();
        assert_eq!(total, 30 * 33_333);
        assert!((1_000_000 - total as i64).abs() <= 33_333);

        let mut link = LinkSim::new(&sched, &lp, rand_chacha::ChaCha8Rng::seed_from_u64(1));
        assert!(run_downlink_feedback(&mut link, &params, SimTime::from_secs_f64(0.02)).unwrap().is_empty());
        assert!(run_downlink_feedback(&mut link, &params, SimTime::ZERO).is_err());
    }

    #[test]
    fn core_delay_is_added_once() {
        let r = PacketRecord {
            id: 0,
            direction: crate::model::Direction::Ul,
            size_bits: 8192,
            t_sent: SimTime(1_000),
            t_delivered: Some(SimTime(3_500)),
            link: crate::airlink::LinkId { tech: TechKind::Mmwave, bs_id: Some(1) },
            n_transmissions: 1,
        };
        let dropped = PacketRecord { t_delivered: None, ..r };
        assert_eq!(add_core_delay(&[r], SimTime::ZERO), vec![r]);
        let out = add_core_delay(&[r, dropped], SimTime(5_000));
        assert_eq!(out[0].delay(), Some(SimTime(7_500)));
        assert_eq!(out[1].t_delivered, None);
    }
}
