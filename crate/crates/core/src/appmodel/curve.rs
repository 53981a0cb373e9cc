use std::collections::BTreeMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::model::Resolution;
use crate::scalar::Scalar;

const DEFAULT_CURVE: &str = include_str!("../../data/rate_accuracy_v1.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Accuracy<S> {
    pub wmap: S,
    pub ap_person: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveAnchor<S> {
    pub rate_mbps: S,
    pub wmap: S,
    pub ap_person: S,
}

/// Detection accuracy against compressed bit rate, per resolution.
///
/// Between anchors accuracy is linear in rate; below the first anchor it
/// falls linearly to zero at zero rate; past the last anchor it stays flat.
#[derive(Debug, Clone, PartialEq)]
pub struct RateAccuracyCurve<S> {
    anchors: BTreeMap<Resolution, Vec<CurveAnchor<S>>>,
}

impl<S: Scalar> Default for RateAccuracyCurve<S> {
    fn default() -> Self {
        Self::read_csv(DEFAULT_CURVE.as_bytes()).expect("bundled curve is valid")
    }
}

impl<S: Scalar> RateAccuracyCurve<S> {
    /// Anchors are sorted by rate; rates must be distinct and positive and
    /// accuracy must not decrease with rate.
    pub fn new(anchors: BTreeMap<Resolution, Vec<CurveAnchor<S>>>) -> Result<Self> {
        let mut anchors = anchors;
        for (res, pts) in anchors.iter_mut() {
            pts.sort_by(|a, b| a.rate_mbps.partial_cmp(&b.rate_mbps).unwrap_or(std::cmp::Ordering::Equal));
            if pts.is_empty() {
                return Err(Error::Schema(format!("{res}: no anchors")));
            }
            if pts.iter().any(|p| !(p.rate_mbps > S::zero()) || !p.wmap.is_finite() || !p.ap_person.is_finite()) {
                return Err(Error::Schema(format!("{res}: anchor rates must be positive and values finite")));
            }
            let mut prev = (S::zero(), S::zero(), S::zero());
            for p in pts.iter() {
                if p.rate_mbps == prev.0 {
                    return Err(Error::Schema(format!("{res}: duplicate anchor at {} Mbps", p.rate_mbps)));
                }
                if p.wmap < prev.1 || p.ap_person < prev.2 || p.wmap < S::zero() || p.ap_person < S::zero() {
                    return Err(Error::Schema(format!("{res}: accuracy decreases at {} Mbps", p.rate_mbps)));
                }
                prev = (p.rate_mbps, p.wmap, p.ap_person);
            }
        }
        Ok(RateAccuracyCurve { anchors })
    }

    /// `resolution,rate_mbps,wmap,ap_person`; `#` starts a comment line.
    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        let want = ["resolution", "rate_mbps", "wmap", "ap_person"];
        let cols: Vec<usize> = want
            .iter()
            .map(|w| {
                headers
                    .iter()
                    .position(|h| h == *w)
                    .ok_or_else(|| Error::Schema(format!("curve lacks column `{w}`")))
            })
            .collect::<Result<_>>()?;
        let mut anchors: BTreeMap<Resolution, Vec<CurveAnchor<S>>> = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            let f = |i: usize| rec.get(cols[i]).unwrap_or("");
            let res: Resolution = f(0).parse().map_err(|e| Error::parse(line, format!("{e}")))?;
            let num = |i: usize| -> Result<S> {
                f(i).parse::<f64>()
                    .map(S::of)
                    .map_err(|_| Error::parse(line, format!("bad {} `{}`", want[i], f(i))))
            };
            anchors.entry(res).or_default().push(CurveAnchor {
                rate_mbps: num(1)?,
                wmap: num(2)?,
                ap_person: num(3)?,
            });
        }
        Self::new(anchors)
    }

    pub fn resolutions(&self) -> impl Iterator<Item = Resolution> + '_ {
        self.anchors.keys().copied()
    }

    pub fn anchors(&self, resolution: Resolution) -> Option<&[CurveAnchor<S>]> {
        self.anchors.get(&resolution).map(Vec::as_slice)
    }

    /// Accuracy once the rate no longer matters.
    pub fn plateau(&self, resolution: Resolution) -> Result<Accuracy<S>> {
        let last = self.points(resolution)?.last().expect("non-empty by construction");
        Ok(Accuracy { wmap: last.wmap, ap_person: last.ap_person })
    }

    pub fn accuracy_at(&self, resolution: Resolution, rate_mbps: S) -> Result<Accuracy<S>> {
        let pts = self.points(resolution)?;
        if !(rate_mbps >= S::zero()) {
            return Err(Error::invalid(format!("rate must be non-negative, got {rate_mbps}")));
        }
        let mut lo = CurveAnchor { rate_mbps: S::zero(), wmap: S::zero(), ap_person: S::zero() };
        for hi in pts {
            if rate_mbps <= hi.rate_mbps {
                let w = (rate_mbps - lo.rate_mbps) / (hi.rate_mbps - lo.rate_mbps);
                let lerp = |a: S, b: S| if w >= S::one() { b } else { a + (b - a) * w };
                return Ok(Accuracy { wmap: lerp(lo.wmap, hi.wmap), ap_person: lerp(lo.ap_person, hi.ap_person) });
            }
            lo = *hi;
        }
        Ok(Accuracy { wmap: lo.wmap, ap_person: lo.ap_person })
    }

    fn points(&self, resolution: Resolution) -> Result<&[CurveAnchor<S>]> {
        self.anchors
            .get(&resolution)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Unsupported(format!("no accuracy curve for {resolution}")))
    }
}

/// Person detection range, in metres.
pub fn detection_range<S: Scalar>(resolution: Resolution) -> Result<S> {
    match resolution {
        Resolution::Wvga => Ok(S::of(6.0)),
        Resolution::R720p => Ok(S::of(9.0)),
        Resolution::R1080p => Ok(S::of(12.0)),
        Resolution::R2p2k => Err(Error::Unsupported("no detection range measured for 2.2K".into())),
    }
}

/// Rate intervals in which each resolution gives the best accuracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolutionBands<S> {
    pub wvga_below_mbps: S,
    pub r720p_below_mbps: S,
    pub r1080p_below_mbps: S,
    /// Whether rates past the last edge select 2.2K instead of 1080P.
    pub allow_2p2k: bool,
}

impl<S: Scalar> Default for ResolutionBands<S> {
    fn default() -> Self {
        ResolutionBands {
            wvga_below_mbps: S::of(0.35),
            r720p_below_mbps: S::of(6.0),
            r1080p_below_mbps: S::of(26.2),
            allow_2p2k: false,
        }
    }
}

impl<S: Scalar> ResolutionBands<S> {
    pub fn best_resolution(&self, rate_mbps: S) -> Resolution {
        if rate_mbps < self.wvga_below_mbps {
            Resolution::Wvga
        } else if rate_mbps < self.r720p_below_mbps {
            Resolution::R720p
        } else if rate_mbps < self.r1080p_below_mbps || !self.allow_2p2k {
            Resolution::R1080p
        } else {
            Resolution::R2p2k
        }
    }
}

pub fn best_resolution<S: Scalar>(rate_mbps: S) -> Resolution {
    ResolutionBands::default().best_resolution(rate_mbps)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_lookups() {
        let c = RateAccuracyCurve::<f64>::default();
        assert_eq!(c.accuracy_at(Resolution::R1080p, 26.0).unwrap(), Accuracy { wmap: 54.0, ap_person: 66.11 });
        assert_eq!(c.accuracy_at(Resolution::Wvga, 9.29).unwrap().wmap, 36.57);
        assert_eq!(c.accuracy_at(Resolution::R1080p, 100.0).unwrap().wmap, 54.0);
        assert_eq!(c.accuracy_at(Resolution::R1080p, 13.0).unwrap().wmap, 27.0);
        assert_eq!(c.accuracy_at(Resolution::R1080p, 0.0).unwrap().wmap, 0.0);
        assert!(c.accuracy_at(Resolution::R1080p, -1.0).is_err());
    }

    #[test]
    fn missing_resolution_is_an_error() {
        let c = RateAccuracyCurve::<f64>::read_csv("resolution,rate_mbps,wmap,ap_person\n1080P,26,54,66.11\n".as_bytes()).unwrap();
        assert!(matches!(c.accuracy_at(Resolution::R720p, 3.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rejects_decreasing_curve() {
        let text = "resolution,rate_mbps,wmap,ap_person\n720P,3,41.1,49.7\n720P,18.01,40,60.31\n";
        assert!(RateAccuracyCurve::<f64>::read_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn intermediate_anchors_interpolate() {
        let text = "resolution,rate_mbps,wmap,ap_person\n1080P,26,54,66.11\n1080P,15,51.5,63.2\n";
        let c = RateAccuracyCurve::<f64>::read_csv(text.as_bytes()).unwrap();
        assert_eq!(c.accuracy_at(Resolution::R1080p, 15.0).unwrap().wmap, 51.5);
        let mid = c.accuracy_at(Resolution::R1080p, 20.5).unwrap().wmap;
        assert!((mid - 52.75).abs() < 1e-12);
    }

    #[test]
    fn ranges() {
        assert_eq!(detection_range::<f64>(Resolution::Wvga).unwrap(), 6.0);
        assert_eq!(detection_range::<f64>(Resolution::R720p).unwrap(), 9.0);
        assert_eq!(detection_range::<f64>(Resolution::R1080p).unwrap(), 12.0);
        assert!(detection_range::<f64>(Resolution::R2p2k).is_err());
    }

    #[test]
    fn band_edges() {
        assert_eq!(best_resolution(3.0), Resolution::R720p);
        assert_eq!(best_resolution(10.0), Resolution::R1080p);
        assert_eq!(best_resolution(0.2), Resolution::Wvga);
        assert_eq!(best_resolution(0.35), Resolution::R720p);
        assert_eq!(best_resolution(6.0), Resolution::R1080p);
        assert_eq!(best_resolution(500.0), Resolution::R1080p);
        let wide = ResolutionBands { allow_2p2k: true, ..ResolutionBands::default() };
        assert_eq!(wide.best_resolution(26.1), Resolution::R1080p);
        assert_eq!(wide.best_resolution(26.2), Resolution::R2p2k);
    }

    proptest::proptest! {
        #[test]
        fn accuracy_monotone(a in 0.0f64..60.0, b in 0.0f64..60.0, r in 0usize..4) {
            let c = RateAccuracyCurve::<f64>::default();
            let res = Resolution::ALL[r];
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let (x, y) = (c.accuracy_at(res, lo).unwrap(), c.accuracy_at(res, hi).unwrap());
            proptest::prop_assert!(x.wmap <= y.wmap && x.ap_person <= y.ap_person);
        }

        #[test]
        fn accuracy_continuous_at_anchors(r in 0usize..4) {
            let c = RateAccuracyCurve::<f64>::default();
            let res = Resolution::ALL[r];
            for p in c.anchors(res).unwrap() {
                let eps = 1e-9;
                let below = c.accuracy_at(res, p.rate_mbps - eps).unwrap().wmap;
                let above = c.accuracy_at(res, p.rate_mbps + eps).unwrap().wmap;
                proptest::prop_assert!((below - p.wmap).abs() < 1e-6 && (above - p.wmap).abs() < 1e-6);
            }
        }
    }
}
