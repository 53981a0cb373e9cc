use rand::Rng;

use super::log::{LinkId, PacketRecord};
use super::{frame_alignment_delay, packet_error_prob, sinr_to_rate, LinkParams};
use crate::channel::ChannelTrace;
use crate::error::{Error, Result};
use crate::model::{Direction, SimTime, TechKind};
use crate::rng::SimRng;

/// A constant-rate stretch of the link starting at `start`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleSegment {
    pub start: SimTime,
    pub rate_bps: f64,
    pub error_prob: f64,
    pub bs_id: Option<u32>,
}

/// Piecewise-constant service rate. The first segment extends back to time
/// zero and the last one forever.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSchedule {
    tech: TechKind,
    segments: Vec<ScheduleSegment>,
}

impl RateSchedule {
    pub fn new(tech: TechKind, segments: Vec<ScheduleSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::EmptyTrace);
        }
        if segments.windows(2).any(|w| w[1].start <= w[0].start) {
            return Err(Error::Schema("schedule segments must start at increasing times".into()));
        }
        if segments.iter().any(|s| !(s.rate_bps >= 0.0) || !s.rate_bps.is_finite()) {
            return Err(Error::Schema("rates must be finite and non-negative".into()));
        }
        Ok(RateSchedule { tech, segments })
    }

    pub fn constant(tech: TechKind, rate_bps: f64, error_prob: f64) -> Self {
        RateSchedule {
            tech,
            segments: vec![ScheduleSegment {
                start: SimTime::ZERO,
                rate_bps,
                error_prob,
                bs_id: Some(1),
            }],
        }
    }

    /// Serving-link rate of `params.tech` over the best site at each trace
    /// instant. Rate traces are used as given; SINR traces go through the
    /// rate map and the BLER curve.
    pub fn from_trace(trace: &ChannelTrace, params: &LinkParams) -> Result<Self> {
        let best = trace.best_link(params.tech.kind);
        if best.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let segments = best
            .into_iter()
            .map(|s| {
                let sinr = s.sinr_db.map(|v| v + params.sinr_offset_db);
                let rate_bps = match (s.rate_mbps, sinr) {
                    (Some(r), _) => r * 1e6,
                    (None, Some(v)) => sinr_to_rate(v, &params.rate),
                    (None, None) => 0.0,
                };
                let error_prob = match sinr {
                    Some(v) => packet_error_prob(v, &params.bler),
                    None if s.rate_mbps.is_some() => 0.0,
                    None => 1.0,
                };
                ScheduleSegment {
                    start: s.t,
                    rate_bps,
                    error_prob,
                    bs_id: s.bs_id,
                }
            })
            .collect();
        RateSchedule::new(params.tech.kind, segments)
    }

    pub fn tech(&self) -> TechKind {
        self.tech
    }

    pub fn segments(&self) -> &[ScheduleSegment] {
        &self.segments
    }

    /// Bits the link can carry in `[from, to)`.
    pub fn capacity_bits(&self, from: SimTime, to: SimTime) -> f64 {
        if to <= from {
            return 0.0;
        }
        let mut total = 0.0;
        for (i, seg) in self.segments.iter().enumerate() {
            let s = if i == 0 { SimTime::ZERO } else { seg.start };
            let e = self.segments.get(i + 1).map(|n| n.start).unwrap_or(SimTime::MAX);
            let lo = s.max(from);
            let hi = e.min(to);
            if hi > lo {
                total += seg.rate_bps * (hi - lo).as_micros() as f64 * 1e-6;
            }
        }
        total
    }

    pub fn max_rate_bps(&self) -> f64 {
        self.segments.iter().map(|s| s.rate_bps).fold(0.0, f64::max)
    }

    /// Index of the segment in force at `t`, searching forward from `hint`.
    fn locate(&self, t: SimTime, hint: usize) -> usize {
        let mut i = hint.min(self.segments.len() - 1);
        if self.segments[i].start > t {
            i = self.segments.partition_point(|s| s.start <= t).saturating_sub(1);
        }
        while i + 1 < self.segments.len() && self.segments[i + 1].start <= t {
            i += 1;
        }
        i
    }
}

/// A packet handed to the link at `t_arrival`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfferedPacket {
    pub id: u64,
    pub t_arrival: SimTime,
    pub size_bits: u64,
}

/// Incremental FIFO link: packets are submitted in arrival order and their
/// fate is decided on submission, which lets a sender interleave its own
/// decisions with link service.
#[derive(Debug)]
pub struct LinkSim<'a> {
    schedule: &'a RateSchedule,
    params: &'a LinkParams,
    rng: SimRng,
    server_free: SimTime,
    stalled: bool,
    hint: usize,
    last_arrival: SimTime,
}

/// Outcome of one submission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Served {
    pub record: PacketRecord,
    /// When the sender side learns the outcome at the link layer: delivery
    /// time, or the end of the last failed attempt. `None` if the link never
    /// recovers.
    pub resolved_at: Option<SimTime>,
}

impl<'a> LinkSim<'a> {
    pub fn new(schedule: &'a RateSchedule, params: &'a LinkParams, rng: SimRng) -> Self {
        LinkSim {
            schedule,
            params,
            rng,
            server_free: SimTime::ZERO,
            stalled: false,
            hint: 0,
            last_arrival: SimTime::ZERO,
        }
    }

    pub fn direction(&self) -> Direction {
        self.params.direction
    }

    /// Time the transmitter becomes idle given everything submitted so far.
    pub fn busy_until(&self) -> Option<SimTime> {
        (!self.stalled).then_some(self.server_free)
    }

    pub fn submit(&mut self, pkt: OfferedPacket) -> Served {
        debug_assert!(pkt.t_arrival >= self.last_arrival, "arrivals must be FIFO");
        self.last_arrival = pkt.t_arrival;
        let mut record = PacketRecord {
            id: pkt.id,
            direction: self.params.direction,
            size_bits: pkt.size_bits,
            t_sent: pkt.t_arrival,
            t_delivered: None,
            link: LinkId { tech: self.schedule.tech(), bs_id: None },
            n_transmissions: 1,
        };
        if self.stalled {
            return Served { record, resolved_at: None };
        }

        // the packet is granted from the first slot boundary after arrival;
        // a backlogged transmitter sends it straight after its predecessor
        let slot = self.params.tech.slot;
        let granted = pkt.t_arrival + frame_alignment_delay(pkt.t_arrival, slot);
        let mut tx_start = granted.max(self.server_free);
        let mut ntx = 0;
        loop {
            ntx += 1;
            record.n_transmissions = ntx;
            let seg = self.schedule.segments[self.schedule.locate(tx_start, self.hint)];
            record.link.bs_id = seg.bs_id;
            let Some(end) = self.transmit(tx_start, pkt.size_bits) else {
                self.stalled = true;
                return Served { record, resolved_at: None };
            };
            // one draw per attempt regardless of the error probability keeps
            // the random sequence aligned across BLER settings
            let u: f64 = self.rng.gen();
            if u >= seg.error_prob {
                self.server_free = end;
                let delivered = end + self.params.processing_delay;
                record.t_delivered = Some(delivered);
                return Served { record, resolved_at: Some(delivered) };
            }
            if ntx >= self.params.max_tx {
                self.server_free = end;
                return Served { record, resolved_at: Some(end) };
            }
            let retry = end + self.params.harq_rtx_delay;
            tx_start = retry + frame_alignment_delay(retry, slot);
        }
    }

    /// End of a transmission of `bits` starting at `start`, integrating the
    /// piecewise-constant rate and rounding up to whole microseconds.
    fn transmit(&mut self, start: SimTime, bits: u64) -> Option<SimTime> {
        let segs = self.schedule.segments();
        let mut i = self.schedule.locate(start, self.hint);
        self.hint = i;
        let mut t = start;
        let mut remaining = bits as f64;
        loop {
            let rate = segs[i].rate_bps;
            let seg_end = segs.get(i + 1).map(|s| s.start);
            if rate > 0.0 {
                let need_us = remaining * 1e6 / rate;
                let fits = match seg_end {
                    None => true,
                    Some(e) => t.as_micros() as f64 + need_us <= e.as_micros() as f64,
                };
                if fits {
                    let us = (need_us - 1e-6).ceil().max(1.0) as u64;
                    let end = t + SimTime(us);
                    return Some(match seg_end {
                        Some(e) if end > e && need_us <= (e - t).as_micros() as f64 => e,
                        _ => end,
                    });
                }
                let e = seg_end.expect("checked above");
                remaining -= rate * (e - t).as_micros() as f64 * 1e-6;
                t = e;
            } else {
                t = seg_end?;
            }
            i += 1;
        }
    }
}

/// Serve `offered` (sorted by arrival) over the link described by `trace`.
pub fn simulate_link(
    trace: &ChannelTrace,
    offered: &[OfferedPacket],
    params: &LinkParams,
    rng: SimRng,
) -> Result<Vec<PacketRecord>> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let schedule = RateSchedule::from_trace(trace, params)?;
    let mut link = LinkSim::new(&schedule, params, rng);
    let mut sorted = offered.to_vec();
    sorted.sort_by_key(|p| (p.t_arrival, p.id));
    Ok(sorted.into_iter().map(|p| link.submit(p).record).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelSample, ChannelTrace};
    use crate::model::TechConfig;
    use rand::SeedableRng;

    fn rng(seed: u64) -> SimRng {
        SimRng::seed_from_u64(seed)
    }

    fn ideal_params() -> LinkParams {
        let mut p = LinkParams::uplink(TechKind::Lte, &TechConfig::lte());
        p.processing_delay = SimTime::ZERO;
        p
    }

    #[test]
    fn single_packet_delay_is_size_over_rate() {
        let sched = RateSchedule::constant(TechKind::Lte, 8.192e6, 0.0);
        let params = ideal_params();
        let mut link = LinkSim::new(&sched, &params, rng(1));
        let r = link.submit(OfferedPacket { id: 0, t_arrival: SimTime(3000), size_bits: 8192 }).record;
        assert_eq!(r.t_delivered, Some(SimTime(4000)));
        assert_eq!(r.n_transmissions, 1);
    }

    #[test]
    fn certain_errors_drop_after_max_tx() {
        let sched = RateSchedule::constant(TechKind::Lte, 8.192e6, 1.0);
        let params = ideal_params();
        let mut link = LinkSim::new(&sched, &params, rng(1));
        let s = link.submit(OfferedPacket { id: 0, t_arrival: SimTime::ZERO, size_bits: 8192 });
        assert_eq!(s.record.t_delivered, None);
        assert_eq!(s.record.n_transmissions, params.max_tx);
        // 4 attempts of 1 ms separated by three 8 ms HARQ waits
        assert_eq!(s.resolved_at, Some(SimTime(4 * 1000 + 3 * 8000)));
    }

    #[test]
    fn fifo_order_for_simultaneous_arrivals() {
        let sched = RateSchedule::constant(TechKind::Lte, 8.192e6, 0.0);
        let params = ideal_params();
        let mut link = LinkSim::new(&sched, &params, rng(1));
        let a = link.submit(OfferedPacket { id: 0, t_arrival: SimTime::ZERO, size_bits: 8192 }).record;
        let b = link.submit(OfferedPacket { id: 1, t_arrival: SimTime::ZERO, size_bits: 8192 }).record;
        assert!(b.delay().unwrap() >= a.delay().unwrap());
        assert_eq!(b.t_delivered, Some(SimTime(2000)));
    }

    #[test]
    fn outage_stalls_until_capacity_returns() {
        let sched = RateSchedule::new(
            TechKind::Lte,
            vec![
                ScheduleSegment { start: SimTime::ZERO, rate_bps: 0.0, error_prob: 0.0, bs_id: None },
                ScheduleSegment { start: SimTime(10_000), rate_bps: 8.192e6, error_prob: 0.0, bs_id: Some(2) },
            ],
        )
        .unwrap();
        let params = ideal_params();
        let mut link = LinkSim::new(&sched, &params, rng(1));
        let r = link.submit(OfferedPacket { id: 0, t_arrival: SimTime(500), size_bits: 8192 }).record;
        assert_eq!(r.t_delivered, Some(SimTime(11_000)));
        assert_eq!(r.link.bs_id, None);
    }

    #[test]
    fn permanent_outage_drops_everything() {
        let sched = RateSchedule::constant(TechKind::Lte, 0.0, 0.0);
        let params = ideal_params();
        let mut link = LinkSim::new(&sched, &params, rng(1));
        for id in 0..3 {
            let s = link.submit(OfferedPacket { id, t_arrival: SimTime(id * 10), size_bits: 100 });
            assert_eq!(s.record.t_delivered, None);
            assert_eq!(s.resolved_at, None);
        }
    }

    #[test]
    fn transmission_spans_rate_change() {
        // 4096 bits at 8.192 Mbps (0.5 ms) then the rest at 4.096 Mbps (1 ms)
        let sched = RateSchedule::new(
            TechKind::Lte,
            vec![
                ScheduleSegment { start: SimTime::ZERO, rate_bps: 8.192e6, error_prob: 0.0, bs_id: Some(1) },
                ScheduleSegment { start: SimTime(500), rate_bps: 4.096e6, error_prob: 0.0, bs_id: Some(1) },
            ],
        )
        .unwrap();
        let params = ideal_params();
        let mut link = LinkSim::new(&sched, &params, rng(1));
        let r = link.submit(OfferedPacket { id: 0, t_arrival: SimTime::ZERO, size_bits: 8192 }).record;
        assert_eq!(r.t_delivered, Some(SimTime(1500)));
    }

    #[test]
    fn empty_trace_is_an_error() {
        let params = ideal_params();
        let tr = ChannelTrace::default();
        assert!(matches!(simulate_link(&tr, &[], &params, rng(1)), Err(Error::EmptyTrace)));
    }

    #[test]
    fn trace_drives_schedule() {
        let tr = ChannelTrace::new(
            vec![
                ChannelSample { t: SimTime::ZERO, bs_id: 1, tech: TechKind::Lte, sinr_db: Some(40.0), rate_mbps: None },
                ChannelSample { t: SimTime(1000), bs_id: 1, tech: TechKind::Lte, sinr_db: None, rate_mbps: None },
            ],
            None,
        )
        .unwrap();
        let params = ideal_params();
        let s = RateSchedule::from_trace(&tr, &params).unwrap();
        assert!((s.segments()[0].rate_bps - 36e6).abs() < 1e-6);
        assert_eq!(s.segments()[1].rate_bps, 0.0);
        assert_eq!(s.capacity_bits(SimTime::ZERO, SimTime(5000)), 36e6 * 1e-3);
    }
}
