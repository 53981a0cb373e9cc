//! Synthetic multipath: a geometric LOS path plus a few reflected paths.

use rand::Rng;

use super::propagation::{free_space_gain_db, path_loss_db, PathLossParams};
use super::route::RoutePoint;
use crate::model::{BaseStation, TechConfig};

/// UE antenna height above ground.
pub const UE_HEIGHT_M: f64 = 1.5;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub path_gain_db: f64,
    /// Departure angles at the base station, global frame, degrees.
    pub aod_az_deg: f64,
    pub aod_el_deg: f64,
    /// Arrival angles at the UE. Azimuth is relative to the walking
    /// direction in `[0, 360)`, elevation relative to the horizon.
    pub aoa_az_deg: f64,
    pub aoa_el_deg: f64,
    pub excess_delay_s: f64,
    pub los: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaySet {
    pub bs_id: u32,
    pub rays: Vec<Ray>,
}

impl RaySet {
    pub fn gains_db(&self) -> Vec<f64> {
        self.rays.iter().map(|r| r.path_gain_db).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayParams {
    pub carrier_ghz: f64,
    pub path_loss: PathLossParams<f64>,
    pub nlos_rays: u32,
    pub nlos_ray_spread_db: [f64; 2],
}

impl RayParams {
    pub fn from_tech(t: &TechConfig) -> Self {
        RayParams {
            carrier_ghz: t.carrier_ghz,
            path_loss: PathLossParams {
                n_los: t.n_los,
                n_nlos: t.n_nlos,
                nlos_offset_db: t.nlos_offset_db,
            },
            nlos_rays: t.nlos_rays,
            nlos_ray_spread_db: t.nlos_ray_spread_db,
        }
    }
}

pub(crate) fn wrap_deg(a: f64) -> f64 {
    a.rem_euclid(360.0)
}

/// Rays between the UE at `point` and `bs`.
///
/// A LOS link yields one LOS ray along the geometric direction plus
/// `nlos_rays` reflections whose strongest member sits exactly
/// `nlos_offset_db` below the LOS-geometry gain. A NLOS link yields the
/// reflections only, with the NLOS exponent. Each further reflection is
/// weaker than the strongest by a uniform draw from `nlos_ray_spread_db`.
pub fn generate_rays<R: Rng + ?Sized>(
    point: &RoutePoint,
    bs: &BaseStation,
    los: bool,
    params: &RayParams,
    rng: &mut R,
) -> RaySet {
    let dx = bs.position.x - point.position.x;
    let dy = bs.position.y - point.position.y;
    let d2 = dx.hypot(dy);
    let dh = bs.height_m - UE_HEIGHT_M;
    let d3 = d2.hypot(dh);
    let fs_gain = free_space_gain_db(d3, params.carrier_ghz);

    let global_az = dy.atan2(dx).to_degrees();
    let los_el = dh.atan2(d2).to_degrees();
    let mut rays = Vec::with_capacity(params.nlos_rays as usize + 1);

    if los {
        let g = -path_loss_db(d3, params.carrier_ghz, true, &params.path_loss);
        rays.push(Ray {
            path_gain_db: g.min(fs_gain),
            aod_az_deg: wrap_deg(global_az + 180.0),
            aod_el_deg: -los_el,
            aoa_az_deg: wrap_deg(global_az - point.heading_rad.to_degrees()),
            aoa_el_deg: los_el,
            excess_delay_s: 0.0,
            los: true,
        });
    }

    let strongest = -path_loss_db(d3, params.carrier_ghz, false, &PathLossParams {
        n_nlos: if los { params.path_loss.n_los } else { params.path_loss.n_nlos },
        ..params.path_loss
    });
    let [lo, hi] = params.nlos_ray_spread_db;
    for i in 0..params.nlos_rays {
        let extra = if i == 0 { 0.0 } else { lo + (hi - lo) * rng.gen::<f64>() };
        let aoa_az: f64 = rng.gen::<f64>() * 360.0;
        let aoa_el: f64 = rng.gen::<f64>() * 20.0;
        let aod_jitter: f64 = (rng.gen::<f64>() - 0.5) * 60.0;
        let extra_path_m: f64 = 3.0 + rng.gen::<f64>() * 90.0;
        rays.push(Ray {
            path_gain_db: (strongest - extra).min(fs_gain),
            aod_az_deg: wrap_deg(global_az + 180.0 + aod_jitter),
            aod_el_deg: -aoa_el,
            aoa_az_deg: aoa_az,
            aoa_el_deg: aoa_el,
            excess_delay_s: extra_path_m / SPEED_OF_LIGHT,
            los: false,
        });
    }

    RaySet { bs_id: bs.id, rays }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Position, TechKind};
    use crate::model::SimTime;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn point() -> RoutePoint {
        RoutePoint {
            index: 0,
            position: Position::new(0.0, 0.0),
            arc_m: 0.0,
            heading_rad: 0.0,
            t: SimTime::ZERO,
        }
    }

    fn bs() -> BaseStation {
        BaseStation {
            id: 7,
            position: Position::new(0.0, 50.0),
            height_m: 10.0,
            techs: vec![TechKind::Mmwave],
            nlos: vec![],
        }
    }

    fn params(offset: f64) -> RayParams {
        RayParams {
            carrier_ghz: 28.0,
            path_loss: PathLossParams { n_los: 2.0, n_nlos: 3.0, nlos_offset_db: offset },
            nlos_rays: 3,
            nlos_ray_spread_db: [10.0, 20.0],
        }
    }

    #[test]
    fn los_link_has_exactly_one_los_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let set = generate_rays(&point(), &bs(), true, &params(20.0), &mut rng);
        assert_eq!(set.rays.iter().filter(|r| r.los).count(), 1);
        assert_eq!(set.rays.len(), 4);
        let los = set.rays.iter().find(|r| r.los).unwrap();
        // BS straight ahead-left: 90 degrees from heading +x
        assert!((los.aoa_az_deg - 90.0).abs() < 1e-9);
        assert!(los.aoa_el_deg > 0.0);
    }

    #[test]
    fn nlos_link_has_no_los_ray() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let set = generate_rays(&point(), &bs(), false, &params(20.0), &mut rng);
        assert!(set.rays.iter().all(|r| !r.los));
        assert_eq!(set.rays.len(), 3);
    }

    #[test]
    fn same_seed_same_rays() {
        let a = generate_rays(&point(), &bs(), true, &params(20.0), &mut ChaCha8Rng::seed_from_u64(9));
        let b = generate_rays(&point(), &bs(), true, &params(20.0), &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn strongest_reflection_sits_offset_below_los_geometry() {
        let set = generate_rays(&point(), &bs(), true, &params(20.0), &mut ChaCha8Rng::seed_from_u64(3));
        let los_gain = set.rays.iter().find(|r| r.los).unwrap().path_gain_db;
        let best_nlos = set
            .rays
            .iter()
            .filter(|r| !r.los)
            .map(|r| r.path_gain_db)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((best_nlos - (los_gain - 20.0)).abs() < 1e-9);
    }

    #[test]
    fn gains_never_exceed_free_space() {
        let mut p = params(0.0);
        p.path_loss.n_los = 1.6;
        p.path_loss.n_nlos = 1.6;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let set = generate_rays(&point(), &bs(), true, &p, &mut rng);
        let d3 = (50.0f64).hypot(8.5);
        let fs = free_space_gain_db(d3, 28.0);
        assert!(set.rays.iter().all(|r| r.path_gain_db <= fs + 1e-12));
    }
}
