use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Position, RouteSpec, SimTime};

/// A receiver position on the route together with the time the walker
/// reaches it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutePoint {
    pub index: usize,
    pub position: Position,
    /// Arc length from the first waypoint, meters.
    pub arc_m: f64,
    /// Walking direction, radians counter-clockwise from +x.
    pub heading_rad: f64,
    pub t: SimTime,
}

/// Sample the polyline at every `spacing_m` of arc length, endpoint inclusive.
pub fn build_route(spec: &RouteSpec) -> Result<Vec<RoutePoint>> {
    if spec.waypoints.len() < 2 {
        return Err(Error::InvalidRoute(format!(
            "need at least 2 waypoints, got {}",
            spec.waypoints.len()
        )));
    }
    if !(spec.spacing_m > 0.0) || !(spec.speed_mps > 0.0) {
        return Err(Error::InvalidRoute("spacing and speed must be positive".into()));
    }

    let segs: Vec<(Position, Position, f64)> = spec
        .waypoints
        .windows(2)
        .map(|w| (w[0], w[1], w[0].distance(&w[1])))
        .collect();
    let total: f64 = segs.iter().map(|s| s.2).sum();
    if !total.is_finite() || total <= 0.0 {
        return Err(Error::InvalidRoute("route has zero length".into()));
    }

    let n = (total / spec.spacing_m + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut seg_idx = 0;
    let mut seg_start = 0.0;
    let mut last_heading = heading_of(&segs[0]);

    for i in 0..=n {
        let s = i as f64 * spec.spacing_m;
        while seg_idx + 1 < segs.len() && s > seg_start + segs[seg_idx].2 + 1e-12 {
            seg_start += segs[seg_idx].2;
            seg_idx += 1;
        }
        let (a, b, len) = segs[seg_idx];
        let frac = if len > 0.0 { ((s - seg_start) / len).clamp(0.0, 1.0) } else { 0.0 };
        if len > 0.0 {
            last_heading = heading_of(&segs[seg_idx]);
        }
        out.push(RoutePoint {
            index: i,
            position: Position::new(a.x + frac * (b.x - a.x), a.y + frac * (b.y - a.y)),
            arc_m: s,
            heading_rad: last_heading,
            t: SimTime::from_secs_f64(s / spec.speed_mps),
        });
    }
    Ok(out)
}

fn heading_of(seg: &(Position, Position, f64)) -> f64 {
    (seg.1.y - seg.0.y).atan2(seg.1.x - seg.0.x)
}

/// Time a walker spends at each sampled position.
pub fn dwell_time(spec: &RouteSpec) -> SimTime {
    SimTime::from_secs_f64(spec.spacing_m / spec.speed_mps)
}

/// Short content hash identifying the route geometry and pace.
pub fn route_hash(spec: &RouteSpec) -> String {
    let mut h = Sha256::new();
    for w in &spec.waypoints {
        h.update(w.x.to_le_bytes());
        h.update(w.y.to_le_bytes());
    }
    h.update(spec.spacing_m.to_le_bytes());
    h.update(spec.speed_mps.to_le_bytes());
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(waypoints: &[[f64; 2]], spacing_m: f64, speed_mps: f64) -> RouteSpec {
        RouteSpec {
            waypoints: waypoints.iter().map(|p| Position::from(*p)).collect(),
            spacing_m,
            speed_mps,
        }
    }

    #[test]
    fn ten_meter_route_has_eleven_points() {
        let pts = build_route(&spec(&[[0.0, 0.0], [10.0, 0.0]], 1.0, 1.4)).unwrap();
        assert_eq!(pts.len(), 11);
        assert_eq!(pts[10].position, Position::new(10.0, 0.0));
    }

    #[test]
    fn timestamps_follow_walking_speed() {
        let pts = build_route(&spec(&[[0.0, 0.0], [10.0, 0.0]], 1.0, 1.4)).unwrap();
        for p in &pts {
            let expected = p.index as f64 / 1.4;
            assert!((p.t.as_secs_f64() - expected).abs() <= 0.5e-6);
        }
        assert_eq!(pts[1].t, SimTime(714_286));
        assert_eq!(pts[2].t, SimTime(1_428_571));
    }

    #[test]
    fn route_180m_gives_181_samples() {
        let pts = build_route(&spec(&[[0.0, 0.0], [100.0, 0.0], [100.0, 80.0]], 1.0, 1.4)).unwrap();
        assert_eq!(pts.len(), 181);
        // corner sample lands exactly on the bend
        assert_eq!(pts[100].position, Position::new(100.0, 0.0));
        assert_eq!(pts[150].position, Position::new(100.0, 50.0));
        assert!((pts[150].heading_rad - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn samples_lie_on_arc_length_multiples() {
        let s = spec(&[[0.0, 0.0], [3.0, 4.0], [3.0, 10.5]], 0.5, 1.0);
        let pts = build_route(&s).unwrap();
        assert_eq!(pts.len(), 24);
        for w in pts.windows(2) {
            let d = w[0].position.distance(&w[1].position);
            // straight-line gap never exceeds the arc step
            assert!(d <= 0.5 + 1e-9);
        }
    }

    #[test]
    fn single_waypoint_is_rejected() {
        let err = build_route(&spec(&[[0.0, 0.0]], 1.0, 1.4)).unwrap_err();
        assert!(matches!(err, Error::InvalidRoute(_)));
    }

    #[test]
    fn hash_depends_on_geometry() {
        let a = spec(&[[0.0, 0.0], [10.0, 0.0]], 1.0, 1.4);
        let mut b = a.clone();
        b.speed_mps = 1.2;
        assert_eq!(route_hash(&a), route_hash(&a.clone()));
        assert_ne!(route_hash(&a), route_hash(&b));
        assert_eq!(route_hash(&a).len(), 16);
    }
}
