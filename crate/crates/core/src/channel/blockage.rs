//! Angular blockage regions around the UE.
//!
//! One self-blocking region models the wearer's body; `k_nsb` randomly
//! sized regions model other pedestrians and vehicles. A fresh state is drawn
//! every `t_blk_ms`. A ray whose arrival direction falls in a region loses
//! that region's attenuation; overlapping regions apply the largest one.

use rand::Rng;

use super::rays::{wrap_deg, Ray, RaySet};
use crate::model::{BlockageParams, SimTime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegionKind {
    SelfBlocking,
    NonSelf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageRegion {
    pub kind: RegionKind,
    pub az_center_deg: f64,
    pub az_spread_deg: f64,
    pub el_center_deg: f64,
    pub el_spread_deg: f64,
}

impl BlockageRegion {
    pub fn contains(&self, az_deg: f64, el_deg: f64) -> bool {
        let daz = wrap_deg(az_deg - self.az_center_deg + 180.0) - 180.0;
        daz.abs() <= self.az_spread_deg / 2.0 && (el_deg - self.el_center_deg).abs() <= self.el_spread_deg / 2.0
    }

    pub fn attenuation_db(&self, params: &BlockageParams) -> f64 {
        match self.kind {
            RegionKind::SelfBlocking => params.self_attenuation_db,
            RegionKind::NonSelf => params.nsb_attenuation_db,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockageState {
    pub regions: Vec<BlockageRegion>,
}

impl BlockageState {
    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    /// Attenuation applied to a ray arriving from `(az, el)`: the maximum
    /// over all regions containing it, zero if none do.
    pub fn attenuation_at(&self, az_deg: f64, el_deg: f64, params: &BlockageParams) -> f64 {
        self.regions
            .iter()
            .filter(|r| r.contains(az_deg, el_deg))
            .map(|r| r.attenuation_db(params))
            .fold(0.0, f64::max)
    }
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, range: [f64; 2]) -> f64 {
    range[0] + (range[1] - range[0]) * rng.gen::<f64>()
}

pub fn sample_blockage<R: Rng + ?Sized>(rng: &mut R, params: &BlockageParams) -> BlockageState {
    let mut regions = Vec::with_capacity(params.k_nsb as usize + 1);
    if params.self_blocking {
        regions.push(BlockageRegion {
            kind: RegionKind::SelfBlocking,
            az_center_deg: wrap_deg(params.self_az_center_deg),
            az_spread_deg: params.self_az_span_deg,
            el_center_deg: params.self_el_center_deg,
            el_spread_deg: params.self_el_span_deg,
        });
    }
    for _ in 0..params.k_nsb {
        regions.push(BlockageRegion {
            kind: RegionKind::NonSelf,
            az_center_deg: rng.gen::<f64>() * 360.0,
            az_spread_deg: uniform(rng, params.nsb_az_spread_deg),
            el_center_deg: uniform(rng, params.nsb_el_center_deg),
            el_spread_deg: uniform(rng, params.nsb_el_spread_deg),
        });
    }
    BlockageState { regions }
}

pub fn apply_blockage(rays: &RaySet, state: &BlockageState, params: &BlockageParams) -> RaySet {
    RaySet {
        bs_id: rays.bs_id,
        rays: rays
            .rays
            .iter()
            .map(|r| Ray {
                path_gain_db: r.path_gain_db - state.attenuation_at(r.aoa_az_deg, r.aoa_el_deg, params),
                ..*r
            })
            .collect(),
    }
}

/// Index of the blockage draw in force at `t`.
pub fn blockage_epoch(t: SimTime, params: &BlockageParams) -> u64 {
    let p = params.period().as_micros().max(1);
    t.as_micros() / p
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ray(az: f64, el: f64, gain: f64) -> Ray {
        Ray {
            path_gain_db: gain,
            aod_az_deg: 0.0,
            aod_el_deg: 0.0,
            aoa_az_deg: az,
            aoa_el_deg: el,
            excess_delay_s: 0.0,
            los: true,
        }
    }

    #[test]
    fn empty_state_when_disabled() {
        let params = BlockageParams { k_nsb: 0, self_blocking: false, ..Default::default() };
        let s = sample_blockage(&mut ChaCha8Rng::seed_from_u64(1), &params);
        assert!(s.is_empty());
    }

    #[test]
    fn default_draw_has_k_plus_one_regions() {
        let params = BlockageParams::default();
        let s = sample_blockage(&mut ChaCha8Rng::seed_from_u64(1), &params);
        assert_eq!(s.regions.len(), 41);
        assert_eq!(s.regions.iter().filter(|r| r.kind == RegionKind::SelfBlocking).count(), 1);
        for r in &s.regions {
            assert!(r.az_spread_deg > 0.0 && r.el_spread_deg > 0.0);
        }
        for r in s.regions.iter().filter(|r| r.kind == RegionKind::NonSelf) {
            assert!((15.0..=45.0).contains(&r.az_spread_deg));
            assert!((5.0..=15.0).contains(&r.el_spread_deg));
            assert!((0.0..360.0).contains(&r.az_center_deg));
        }
    }

    #[test]
    fn same_seed_same_regions() {
        let p = BlockageParams::default();
        let a = sample_blockage(&mut ChaCha8Rng::seed_from_u64(4), &p);
        let b = sample_blockage(&mut ChaCha8Rng::seed_from_u64(4), &p);
        let c = sample_blockage(&mut ChaCha8Rng::seed_from_u64(5), &p);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn empty_state_leaves_rays_unchanged() {
        let set = RaySet { bs_id: 1, rays: vec![ray(10.0, 0.0, -80.0), ray(200.0, 5.0, -95.0)] };
        assert_eq!(apply_blockage(&set, &BlockageState::default(), &BlockageParams::default()), set);
    }

    #[test]
    fn self_region_attenuates_by_default_30db() {
        let p = BlockageParams::default();
        let s = BlockageState {
            regions: vec![BlockageRegion {
                kind: RegionKind::SelfBlocking,
                az_center_deg: 180.0,
                az_spread_deg: 120.0,
                el_center_deg: 0.0,
                el_spread_deg: 80.0,
            }],
        };
        let set = RaySet { bs_id: 1, rays: vec![ray(170.0, 3.0, -80.0), ray(10.0, 3.0, -80.0)] };
        let out = apply_blockage(&set, &s, &p);
        assert_eq!(out.rays[0].path_gain_db, -110.0);
        assert_eq!(out.rays[1].path_gain_db, -80.0);
    }

    #[test]
    fn overlapping_regions_take_max() {
        let p = BlockageParams::default();
        let s = BlockageState {
            regions: vec![
                BlockageRegion { kind: RegionKind::NonSelf, az_center_deg: 175.0, az_spread_deg: 20.0, el_center_deg: 0.0, el_spread_deg: 10.0 },
                BlockageRegion { kind: RegionKind::SelfBlocking, az_center_deg: 180.0, az_spread_deg: 120.0, el_center_deg: 0.0, el_spread_deg: 80.0 },
            ],
        };
        let set = RaySet { bs_id: 1, rays: vec![ray(178.0, 1.0, -80.0)] };
        assert_eq!(apply_blockage(&set, &s, &p).rays[0].path_gain_db, -110.0);
    }

    #[test]
    fn azimuth_wraps_around_zero() {
        let r = BlockageRegion { kind: RegionKind::NonSelf, az_center_deg: 355.0, az_spread_deg: 20.0, el_center_deg: 0.0, el_spread_deg: 10.0 };
        assert!(r.contains(3.0, 0.0));
        assert!(r.contains(346.0, 0.0));
        assert!(!r.contains(20.0, 0.0));
        assert!(!r.contains(0.0, 6.0));
    }

    #[test]
    fn epochs_follow_update_period() {
        let p = BlockageParams::default();
        assert_eq!(blockage_epoch(SimTime(99_999), &p), 0);
        assert_eq!(blockage_epoch(SimTime(100_000), &p), 1);
        assert_eq!(blockage_epoch(SimTime(1_050_000), &p), 10);
    }
}
