use std::collections::BTreeMap;

use super::blockage::{apply_blockage, blockage_epoch, sample_blockage, BlockageState};
use super::propagation::{sinr_db, LinkBudget};
use super::rays::{generate_rays, RayParams, RaySet};
use super::route::{build_route, dwell_time, route_hash, RoutePoint};
use super::trace::{ChannelSample, ChannelTrace, TraceMeta};
use crate::error::Result;
use crate::model::{ScenarioConfig, SimTime, TechConfig, TechKind};
use crate::rng::{stream, tag};

/// Time the walker leaves the last route position.
pub fn route_horizon(cfg: &ScenarioConfig) -> Result<SimTime> {
    let route = build_route(&cfg.route)?;
    Ok(route.last().map(|p| p.t).unwrap_or_default() + dwell_time(&cfg.route))
}

/// Uplink link budget of `tech` as used for the trace SINR.
pub fn uplink_budget(t: &TechConfig) -> LinkBudget<f64> {
    LinkBudget {
        tx_power_dbm: t.ue_tx_dbm,
        noise_figure_db: t.ul_noise_figure_db,
        array_gain_db: t.array_gain_db(),
        bandwidth_hz: t.total_bandwidth_mhz * 1e6 * t.loading_fraction,
        interference_factor: t.interference_factor,
        outage_sinr_db: t.outage_sinr_db,
    }
}

/// Uplink SINR of every site for every technology along the route.
///
/// Samples are taken at each route timestamp and at each blockage re-draw,
/// so every blockage state that is in force before the horizon appears in
/// the trace. Within one instant samples are ordered by site then technology.
pub fn synthesize_trace(cfg: &ScenarioConfig) -> Result<ChannelTrace> {
    let route = build_route(&cfg.route)?;
    let horizon = route.last().map(|p| p.t).unwrap_or_default() + dwell_time(&cfg.route);
    let period = cfg.blockage.period().as_micros().max(1);

    let mut times: Vec<SimTime> = route.iter().map(|p| p.t).collect();
    if cfg.blockage.enabled {
        times.extend((0..).map(|k| SimTime(k * period)).take_while(|t| *t < horizon));
    }
    times.sort_unstable();
    times.dedup();

    let mut sites: Vec<_> = cfg.base_stations.iter().collect();
    sites.sort_by_key(|b| b.id);

    let mut samples = Vec::new();
    let mut point_idx = 0usize;
    let mut rays: BTreeMap<(TechKind, u32), RaySet> = BTreeMap::new();
    let mut rays_for: Option<usize> = None;
    let mut blockage: Option<(u64, BlockageState)> = None;

    for t in times {
        while point_idx + 1 < route.len() && route[point_idx + 1].t <= t {
            point_idx += 1;
        }
        let point = &route[point_idx];
        if rays_for != Some(point_idx) {
            rays = rays_at(cfg, point);
            rays_for = Some(point_idx);
        }

        let epoch = blockage_epoch(t, &cfg.blockage);
        if cfg.blockage.enabled && blockage.as_ref().map(|b| b.0) != Some(epoch) {
            let mut rng = stream(cfg.seed, tag::BLOCKAGE, &[epoch]);
            blockage = Some((epoch, sample_blockage(&mut rng, &cfg.blockage)));
        }

        let mut at_t = Vec::new();
        for kind in TechKind::ALL {
            let tc = cfg.tech(kind);
            let blocked = cfg.blockage.enabled && (kind == TechKind::Mmwave || cfg.blockage.apply_to_lte);
            let gains: Vec<(u32, Vec<f64>)> = sites
                .iter()
                .filter(|b| b.serves(kind))
                .map(|b| {
                    let set = &rays[&(kind, b.id)];
                    let set = match (&blockage, blocked) {
                        (Some((_, state)), true) => apply_blockage(set, state, &cfg.blockage),
                        _ => set.clone(),
                    };
                    (b.id, set.gains_db())
                })
                .collect();
            let budget = uplink_budget(tc);
            for (id, g) in &gains {
                let others = gains.iter().filter(|(o, _)| o != id).map(|(_, g)| g.as_slice());
                at_t.push(ChannelSample {
                    t,
                    bs_id: *id,
                    tech: kind,
                    sinr_db: sinr_db(g, others, &budget),
                    rate_mbps: None,
                });
            }
        }
        at_t.sort_by_key(|s| (s.bs_id, s.tech));
        samples.extend(at_t);
    }

    ChannelTrace::new(
        samples,
        Some(TraceMeta {
            route_hash: route_hash(&cfg.route),
            seed: cfg.seed,
        }),
    )
}

fn rays_at(cfg: &ScenarioConfig, point: &RoutePoint) -> BTreeMap<(TechKind, u32), RaySet> {
    let mut out = BTreeMap::new();
    for kind in TechKind::ALL {
        let params = RayParams::from_tech(cfg.tech(kind));
        for bs in cfg.base_stations.iter().filter(|b| b.serves(kind)) {
            let tech_id = kind as u64;
            let mut rng = stream(cfg.seed, tag::RAYS, &[point.index as u64, bs.id as u64, tech_id]);
            let los = bs.is_los_at(point.arc_m);
            out.insert((kind, bs.id), generate_rays(point, bs, los, &params, &mut rng));
        }
    }
    out
}
