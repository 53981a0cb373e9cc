//! Channel trace to end-to-end packet logs, one link per technology.

use offload_core::airlink::{LinkParams, LinkSim, PacketRecord, RateSchedule};
use offload_core::analytics::{
    delay_constrained_throughput, delivered_throughput, max_fallback, pair_feedback, Feedback, RateSeries,
};
use offload_core::channel::{route_horizon, synthesize_trace, ChannelTrace};
use offload_core::rng::{stream, tag};
use offload_core::transport::{add_core_delay, run_downlink_feedback, run_uplink_source};
use offload_core::{Direction, FrameClock, Result, ScenarioConfig, SimTime, TechKind};

/// End-to-end packet logs of one technology.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRun {
    pub tech: TechKind,
    pub ul: Vec<PacketRecord>,
    pub dl: Vec<PacketRecord>,
}

pub fn simulate_tech(cfg: &ScenarioConfig, trace: &ChannelTrace, kind: TechKind, horizon: SimTime) -> Result<LinkRun> {
    let tc = cfg.tech(kind);
    let run = |dir: Direction| -> Result<Vec<PacketRecord>> {
        let params = LinkParams::new(kind, tc, dir);
        let schedule = RateSchedule::from_trace(trace, &params)?;
        let rng = stream(cfg.seed, tag::LINK, &[kind as u64, dir as u64]);
        let mut link = LinkSim::new(&schedule, &params, rng);
        let recs = match dir {
            Direction::Ul => run_uplink_source(&mut link, &cfg.traffic, horizon)?,
            Direction::Dl => run_downlink_feedback(&mut link, &cfg.traffic, horizon)?,
        };
        Ok(add_core_delay(&recs, cfg.d_core()))
    };
    Ok(LinkRun { tech: kind, ul: run(Direction::Ul)?, dl: run(Direction::Dl)? })
}

/// Synthesize the trace and run every technology that some site serves.
/// Technologies run on separate threads.
pub fn simulate(cfg: &ScenarioConfig) -> Result<(ChannelTrace, SimTime, Vec<LinkRun>)> {
    let trace = synthesize_trace(cfg)?;
    let horizon = route_horizon(cfg)?;
    let techs: Vec<TechKind> = trace.techs().into_iter().collect();
    let runs = std::thread::scope(|s| {
        let handles: Vec<_> = techs
            .iter()
            .map(|k| {
                let trace = &trace;
                s.spawn(move || simulate_tech(cfg, trace, *k, horizon))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("link thread panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok((trace, horizon, runs))
}

/// Delay-constrained series of one link, or the best of several.
pub fn constrained_series(runs: &[&LinkRun], frame_hz: u32, horizon: SimTime, d_max_ms: f64) -> Result<RateSeries<f64>> {
    let mut out: Option<RateSeries<f64>> = None;
    for r in runs {
        let s = delay_constrained_throughput(&r.ul, &r.dl, frame_hz, horizon, d_max_ms)?;
        out = Some(match out {
            None => s,
            Some(prev) => max_fallback(&prev, &s)?,
        });
    }
    Ok(out.unwrap_or_else(|| RateSeries::zeros(FrameClock::new(frame_hz).expect("validated"), horizon, Some(d_max_ms))))
}

/// Round trips of delivered uplink packets. With several links, each
/// interval takes its samples from the link that delivered the most bits.
pub fn rtt_samples(runs: &[&LinkRun], frame_hz: u32, horizon: SimTime) -> Result<Vec<f64>> {
    let clock = FrameClock::new(frame_hz).expect("validated");
    let n = clock.interval_count(horizon) as usize;
    let delivered = runs
        .iter()
        .map(|r| delivered_throughput::<f64>(&r.ul, frame_hz, horizon))
        .collect::<Result<Vec<_>>>()?;
    let mut best = vec![0usize; n];
    for (k, b) in best.iter_mut().enumerate() {
        for (i, d) in delivered.iter().enumerate() {
            if d.values_bps[k] > delivered[*b].values_bps[k] {
                *b = i;
            }
        }
    }
    let mut out = Vec::new();
    for (i, r) in runs.iter().enumerate() {
        let feedback = pair_feedback(&r.dl, clock, n);
        for p in &r.ul {
            let k = clock.index_of(p.t_sent) as usize;
            if k >= n || best[k] != i {
                continue;
            }
            if let (Some(up), Feedback::Delay(down)) = (p.delay(), feedback[k]) {
                out.push((up + down).as_millis_f64());
            }
        }
    }
    Ok(out)
}
