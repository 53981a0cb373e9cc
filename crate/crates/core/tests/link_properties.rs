use offload_core::airlink::{LinkParams, LinkSim, OfferedPacket, RateSchedule, ScheduleSegment};
use offload_core::model::{TechConfig, TechKind};
use offload_core::rng::{stream, tag};
use offload_core::SimTime;
use proptest::prelude::*;

fn schedule(rates: &[(u64, f64)], error_prob: f64) -> RateSchedule {
    let segs = rates
        .iter()
        .map(|(start, r)| ScheduleSegment { start: SimTime(*start), rate_bps: *r, error_prob, bs_id: Some(1) })
        .collect();
    RateSchedule::new(TechKind::Mmwave, segs).unwrap()
}

fn arb_schedule() -> impl Strategy<Value = Vec<(u64, f64)>> {
    prop::collection::vec((1u64..20_000, prop_oneof![Just(0.0), 1e6f64..300e6]), 1..12).prop_map(|v| {
        let mut t = 0;
        v.into_iter()
            .map(|(gap, r)| {
                let s = t;
                t += gap;
                (s, r)
            })
            .collect()
    })
}

fn arb_arrivals() -> impl Strategy<Value = Vec<(u64, u64)>> {
    prop::collection::vec((0u64..5_000, 100u64..40_000), 1..80).prop_map(|v| {
        let mut t = 0;
        v.into_iter()
            .map(|(gap, bits)| {
                t += gap;
                (t, bits)
            })
            .collect()
    })
}

fn params() -> LinkParams {
    LinkParams::uplink(TechKind::Mmwave, &TechConfig::mmwave())
}

proptest! {
    #[test]
    fn work_conservation(rates in arb_schedule(), arrivals in arb_arrivals(), perr in 0.0f64..0.6) {
        let sched = schedule(&rates, perr);
        let p = params();
        let mut link = LinkSim::new(&sched, &p, stream(7, tag::LINK, &[0]));
        let recs: Vec<_> = arrivals
            .iter()
            .enumerate()
            .map(|(i, (t, b))| link.submit(OfferedPacket { id: i as u64, t_arrival: SimTime(*t), size_bits: *b }).record)
            .collect();
        let mut ends: Vec<_> = recs.iter().filter_map(|r| r.t_delivered.map(|d| (d, r.size_bits))).collect();
        ends.sort();
        let mut cum = 0u64;
        for (d, bits) in ends {
            cum += bits;
            // delivery happens a fixed processing delay after the air interface
            let air_end = d - p.processing_delay;
            prop_assert!(cum as f64 <= sched.capacity_bits(SimTime::ZERO, air_end) * (1.0 + 1e-9) + 1.0);
        }
    }

    #[test]
    fn delay_at_least_fastest_transmission(rates in arb_schedule(), arrivals in arb_arrivals()) {
        let sched = schedule(&rates, 0.0);
        let p = params();
        let mut link = LinkSim::new(&sched, &p, stream(7, tag::LINK, &[1]));
        let max = sched.max_rate_bps();
        for (i, (t, b)) in arrivals.iter().enumerate() {
            let r = link.submit(OfferedPacket { id: i as u64, t_arrival: SimTime(*t), size_bits: *b }).record;
            if let Some(d) = r.delay() {
                prop_assert!(d.as_micros() as f64 + 1e-6 >= *b as f64 * 1e6 / max);
                prop_assert!(d >= p.processing_delay);
            }
        }
    }

    #[test]
    fn errors_never_shorten_delays(rates in arb_schedule(), arrivals in arb_arrivals(), perr in 0.0f64..0.9, seed in 0u64..1000) {
        let clean = schedule(&rates, 0.0);
        let lossy = schedule(&rates, perr);
        let p = params();
        let mut a = LinkSim::new(&clean, &p, stream(seed, tag::LINK, &[2]));
        let mut b = LinkSim::new(&lossy, &p, stream(seed, tag::LINK, &[2]));
        for (i, (t, bits)) in arrivals.iter().enumerate() {
            let pkt = OfferedPacket { id: i as u64, t_arrival: SimTime(*t), size_bits: *bits };
            let x = a.submit(pkt).record;
            let y = b.submit(pkt).record;
            match (x.t_delivered, y.t_delivered) {
                (Some(dx), Some(dy)) => prop_assert!(dx <= dy),
                (None, Some(_)) => prop_assert!(false, "clean link dropped a packet the lossy link delivered"),
                _ => {}
            }
        }
    }

    #[test]
    fn fifo_deliveries(rates in arb_schedule(), arrivals in arb_arrivals()) {
        let sched = schedule(&rates, 0.0);
        let p = params();
        let mut link = LinkSim::new(&sched, &p, stream(3, tag::LINK, &[3]));
        let mut last = SimTime::ZERO;
        for (i, (t, b)) in arrivals.iter().enumerate() {
            let r = link.submit(OfferedPacket { id: i as u64, t_arrival: SimTime(*t), size_bits: *b }).record;
            if let Some(d) = r.t_delivered {
                prop_assert!(d >= last);
                last = d;
            }
        }
    }
}
