//! Metrics over packet logs.
//!
//! Time is cut into frame intervals `[k T, (k+1) T)` keyed on send time.
//! Each uplink packet is paired with one downlink feedback packet: the first
//! one sent in the same interval, or failing that the last one sent before
//! the interval began. The pair's round trip is the sum of both delays; a
//! lost feedback packet makes it infinite.

use std::io::{Read, Write};

use crate::airlink::PacketRecord;
use crate::error::{Error, Result};
use crate::model::{FrameClock, SimTime};
use crate::scalar::Scalar;

/// Per-interval uplink rate.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSeries<S> {
    pub clock: FrameClock,
    pub horizon: SimTime,
    /// `None` for unconstrained throughput.
    pub d_max_ms: Option<S>,
    pub values_bps: Vec<S>,
}

impl<S: Scalar> RateSeries<S> {
    pub fn zeros(clock: FrameClock, horizon: SimTime, d_max_ms: Option<S>) -> Self {
        let n = clock.interval_count(horizon) as usize;
        RateSeries { clock, horizon, d_max_ms, values_bps: vec![S::zero(); n] }
    }

    pub fn len(&self) -> usize {
        self.values_bps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_bps.is_empty()
    }

    pub fn values_mbps(&self) -> impl Iterator<Item = S> + '_ {
        let m = S::of(1e6);
        self.values_bps.iter().map(move |v| *v / m)
    }

    /// `interval,t_start_s,rate_mbps`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["interval", "t_start_s", "rate_mbps"])?;
        for (k, v) in self.values_mbps().enumerate() {
            csv.write_record([k.to_string(), self.clock.boundary(k as u64).fmt_secs(), v.to_string()])?;
        }
        csv.flush()?;
        Ok(())
    }

    /// Reads a series written by [`RateSeries::write_csv`]. Interval indices
    /// must run 0, 1, 2, ... without gaps.
    pub fn read_csv<R: Read>(r: R, clock: FrameClock, d_max_ms: Option<S>) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.clone();
        let c_rate = headers
            .iter()
            .position(|h| h == "rate_mbps")
            .ok_or_else(|| Error::Schema("series lacks column `rate_mbps`".into()))?;
        let c_idx = headers.iter().position(|h| h == "interval");
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if let Some(c) = c_idx {
                let k: usize = rec
                    .get(c)
                    .unwrap_or("")
                    .parse()
                    .map_err(|_| Error::parse(line, "bad interval index"))?;
                if k != values.len() {
                    return Err(Error::parse(line, format!("expected interval {}, found {k}", values.len())));
                }
            }
            let raw = rec.get(c_rate).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::parse(line, format!("bad rate_mbps `{raw}`")))?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::parse(line, "rate must be finite and non-negative"));
            }
            values.push(S::of(v * 1e6));
        }
        let horizon = clock.boundary(values.len() as u64);
        Ok(RateSeries { clock, horizon, d_max_ms, values_bps: values })
    }
}

fn frame_clock(hz: u32) -> Result<FrameClock> {
    FrameClock::new(hz).ok_or_else(|| Error::invalid("frame rate must be positive"))
}

fn d_max_micros<S: Scalar>(d_max_ms: S) -> Result<u64> {
    let v = d_max_ms.to_f64_lossy();
    if !(v >= 0.0) {
        return Err(Error::invalid(format!("d_max must be non-negative, got {v}")));
    }
    Ok(if v.is_infinite() { u64::MAX } else { (v * 1e3).round() as u64 })
}

/// Feedback seen by the uplink packets of one interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    /// No downlink packet sent at or before the interval.
    Unpaired,
    /// The paired feedback packet was dropped.
    Lost,
    Delay(SimTime),
}

/// The feedback paired with each of the first `n` intervals.
pub fn pair_feedback(dl: &[PacketRecord], clock: FrameClock, n: usize) -> Vec<Feedback> {
    let mut order: Vec<&PacketRecord> = dl.iter().collect();
    order.sort_by_key(|r| r.t_sent);
    let fb = |r: &PacketRecord| r.delay().map_or(Feedback::Lost, Feedback::Delay);

    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    let mut latest: Option<&PacketRecord> = None;
    for k in 0..n as u64 {
        // everything before `i` was sent before this interval
        let start = i;
        let end = clock.boundary(k + 1);
        while i < order.len() && order[i].t_sent < end {
            i += 1;
        }
        let paired = if i > start { Some(order[start]) } else { latest };
        out.push(paired.map_or(Feedback::Unpaired, fb));
        if i > start {
            latest = Some(order[i - 1]);
        }
    }
    out
}

/// Uplink bits per interval whose paired round trip is within `d_max_ms`,
/// divided by the interval length.
pub fn delay_constrained_throughput<S: Scalar>(
    ul: &[PacketRecord],
    dl: &[PacketRecord],
    frame_hz: u32,
    horizon: SimTime,
    d_max_ms: S,
) -> Result<RateSeries<S>> {
    let clock = frame_clock(frame_hz)?;
    let limit = d_max_micros(d_max_ms)?;
    let n = clock.interval_count(horizon) as usize;
    let feedback = pair_feedback(dl, clock, n);
    let mut bits = vec![0u64; n];
    for r in ul {
        let k = clock.index_of(r.t_sent) as usize;
        if k >= n {
            continue;
        }
        let (Some(up), Feedback::Delay(down)) = (r.delay(), feedback[k]) else {
            continue;
        };
        if up.as_micros().saturating_add(down.as_micros()) <= limit {
            bits[k] += r.size_bits;
        }
    }
    Ok(series_from_bits(clock, horizon, Some(d_max_ms), &bits))
}

/// Delivered uplink bits per interval regardless of delay.
pub fn delivered_throughput<S: Scalar>(ul: &[PacketRecord], frame_hz: u32, horizon: SimTime) -> Result<RateSeries<S>> {
    let clock = frame_clock(frame_hz)?;
    let n = clock.interval_count(horizon) as usize;
    let mut bits = vec![0u64; n];
    for r in ul.iter().filter(|r| !r.is_dropped()) {
        let k = clock.index_of(r.t_sent) as usize;
        if k < n {
            bits[k] += r.size_bits;
        }
    }
    Ok(series_from_bits(clock, horizon, None, &bits))
}

fn series_from_bits<S: Scalar>(clock: FrameClock, horizon: SimTime, d_max_ms: Option<S>, bits: &[u64]) -> RateSeries<S> {
    let hz = S::of(clock.hz() as f64);
    RateSeries {
        clock,
        horizon,
        d_max_ms,
        values_bps: bits.iter().map(|b| S::of(*b as f64) * hz).collect(),
    }
}

/// Pointwise maximum of two series over the same intervals.
pub fn max_fallback<S: Scalar>(a: &RateSeries<S>, b: &RateSeries<S>) -> Result<RateSeries<S>> {
    if a.clock != b.clock || a.len() != b.len() {
        return Err(Error::invalid("series differ in frame rate or horizon"));
    }
    if a.d_max_ms != b.d_max_ms {
        return Err(Error::invalid("series differ in delay constraint"));
    }
    Ok(RateSeries {
        values_bps: a.values_bps.iter().zip(&b.values_bps).map(|(x, y)| x.max(*y)).collect(),
        ..a.clone()
    })
}

/// Fraction of intervals whose rate is at least `required_bps`; zero for an
/// empty series.
pub fn availability<S: Scalar>(series: &RateSeries<S>, required_bps: S) -> S {
    if series.is_empty() {
        return S::zero();
    }
    let hits = series.values_bps.iter().filter(|v| **v >= required_bps).count();
    S::of(hits as f64) / S::of(series.len() as f64)
}

/// Availability by delay constraint (rows) and number of cameras (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct HeatmapMatrix<S> {
    pub d_max_ms: Vec<S>,
    pub camera_rates_mbps: Vec<S>,
    /// `cells[row][n - 1]` for `n` cameras.
    pub cells: Vec<Vec<S>>,
}

impl<S: Scalar> HeatmapMatrix<S> {
    /// Total rate needed by the first `n` cameras.
    pub fn required_mbps(&self, n: usize) -> S {
        self.camera_rates_mbps.iter().take(n).copied().sum()
    }

    pub fn cell(&self, d_max_row: usize, n_cameras: usize) -> S {
        self.cells[d_max_row][n_cameras - 1]
    }

    /// `d_max_ms,n_cameras,required_mbps,availability`
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["d_max_ms", "n_cameras", "required_mbps", "availability"])?;
        for (d, row) in self.d_max_ms.iter().zip(&self.cells) {
            for (n, v) in row.iter().enumerate() {
                csv.write_record([d.to_string(), (n + 1).to_string(), self.required_mbps(n + 1).to_string(), v.to_string()])?;
            }
        }
        csv.flush()?;
        Ok(())
    }
}

fn check_camera_rates<S: Scalar>(rates: &[S]) -> Result<()> {
    if rates.is_empty() {
        return Err(Error::invalid("camera rates must not be empty"));
    }
    if rates.iter().any(|r| !(*r > S::zero())) {
        return Err(Error::invalid("camera rates must be positive"));
    }
    Ok(())
}

/// Heatmap from series already computed for each delay constraint.
pub fn camera_support_from_series<S: Scalar>(series: &[RateSeries<S>], camera_rates_mbps: &[S]) -> Result<HeatmapMatrix<S>> {
    check_camera_rates(camera_rates_mbps)?;
    let mut m = HeatmapMatrix {
        d_max_ms: Vec::with_capacity(series.len()),
        camera_rates_mbps: camera_rates_mbps.to_vec(),
        cells: Vec::with_capacity(series.len()),
    };
    for s in series {
        let d = s.d_max_ms.ok_or_else(|| Error::invalid("heatmap rows need a delay constraint"))?;
        m.d_max_ms.push(d);
        let row = (1..=camera_rates_mbps.len())
            .map(|n| availability(s, m.required_mbps(n) * S::of(1e6)))
            .collect();
        m.cells.push(row);
    }
    Ok(m)
}

pub fn camera_support_matrix<S: Scalar>(
    ul: &[PacketRecord],
    dl: &[PacketRecord],
    frame_hz: u32,
    horizon: SimTime,
    d_max_list: &[S],
    camera_rates_mbps: &[S],
) -> Result<HeatmapMatrix<S>> {
    check_camera_rates(camera_rates_mbps)?;
    let series = d_max_list
        .iter()
        .map(|d| delay_constrained_throughput(ul, dl, frame_hz, horizon, *d))
        .collect::<Result<Vec<_>>>()?;
    camera_support_from_series(&series, camera_rates_mbps)
}

/// Right-continuous empirical CDF as `(value, fraction <= value)` steps.
pub fn empirical_cdf<S: Scalar>(samples: &[S]) -> Result<Vec<(S, S)>> {
    if samples.is_empty() {
        return Err(Error::invalid("CDF of no samples"));
    }
    if samples.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("CDF samples contain NaN"));
    }
    let mut v = samples.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN excluded"));
    let n = S::of(v.len() as f64);
    let mut out: Vec<(S, S)> = Vec::new();
    for (i, x) in v.iter().enumerate() {
        let f = S::of((i + 1) as f64) / n;
        match out.last_mut() {
            Some(last) if last.0 == *x => last.1 = f,
            _ => out.push((*x, f)),
        }
    }
    Ok(out)
}

/// Smallest value whose cumulative fraction reaches `q`.
pub fn cdf_quantile<S: Scalar>(cdf: &[(S, S)], q: S) -> Option<S> {
    cdf.iter().find(|(_, f)| *f >= q).or(cdf.last()).map(|(v, _)| *v)
}

pub fn write_cdf_csv<S: Scalar, W: Write>(cdf: &[(S, S)], value_name: &str, w: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([value_name, "cdf"])?;
    for (v, f) in cdf {
        csv.write_record([v.to_string(), f.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

/// Round-trip samples for delivered uplink packets.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RttSamples {
    pub samples_ms: Vec<f64>,
    /// Delivered uplink packets with no feedback sent at or before them.
    pub unpaired: usize,
    /// Delivered uplink packets whose paired feedback was dropped.
    pub feedback_lost: usize,
}

pub fn rtt_per_frame(ul: &[PacketRecord], dl: &[PacketRecord], frame_hz: u32) -> Result<RttSamples> {
    let clock = frame_clock(frame_hz)?;
    let n = ul.iter().map(|r| clock.index_of(r.t_sent) + 1).max().unwrap_or(0) as usize;
    let feedback = pair_feedback(dl, clock, n);
    let mut out = RttSamples::default();
    for r in ul {
        let Some(up) = r.delay() else { continue };
        match feedback[clock.index_of(r.t_sent) as usize] {
            Feedback::Delay(down) => out.samples_ms.push((up + down).as_millis_f64()),
            Feedback::Unpaired => out.unpaired += 1,
            Feedback::Lost => out.feedback_lost += 1,
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airlink::LinkId;
    use crate::model::{Direction, TechKind};

    fn pkt(dir: Direction, id: u64, sent_us: u64, delay_us: Option<u64>, bits: u64) -> PacketRecord {
        PacketRecord {
            id,
            direction: dir,
            size_bits: bits,
            t_sent: SimTime(sent_us),
            t_delivered: delay_us.map(|d| SimTime(sent_us + d)),
            link: LinkId { tech: TechKind::Mmwave, bs_id: Some(1) },
            n_transmissions: 1,
        }
    }

    fn one_interval(delay_ms: u64) -> (Vec<PacketRecord>, Vec<PacketRecord>) {
        let ul = (0..100).map(|i| pkt(Direction::Ul, i, 100 + i * 10, Some(delay_ms * 500), 8192)).collect();
        let dl = vec![pkt(Direction::Dl, 0, 0, Some(delay_ms * 500), 33_333)];
        (ul, dl)
    }

    #[test]
    fn empty_logs_give_zero_series() {
        let s: RateSeries<f64> = delay_constrained_throughput(&[], &[], 30, SimTime(1_000_000), 30.0).unwrap();
        assert_eq!(s.len(), 30);
        assert!(s.values_bps.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hundred_packets_within_budget() {
        let (ul, dl) = one_interval(20);
        let s = delay_constrained_throughput(&ul, &dl, 30, SimTime(1_000_000), 30.0f64).unwrap();
        // 100 * 8192 bits over 1/30 s
        assert_eq!(s.values_bps[0], 24_576_000.0);
        assert!(s.values_bps[1..].iter().all(|v| *v == 0.0));

        let (ul, dl) = one_interval(35);
        let s = delay_constrained_throughput(&ul, &dl, 30, SimTime(1_000_000), 30.0f64).unwrap();
        assert_eq!(s.values_bps[0], 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(delay_constrained_throughput(&[], &[], 0, SimTime(1), 30.0f64).is_err());
        assert!(delay_constrained_throughput(&[], &[], 30, SimTime(1), -1.0f64).is_err());
    }

    #[test]
    fn pairing_prefers_same_interval_then_latest_earlier() {
        let clock = FrameClock::new(10).unwrap();
        let dl = vec![
            pkt(Direction::Dl, 0, 10_000, Some(1_000), 10),
            pkt(Direction::Dl, 1, 50_000, Some(2_000), 10),
            pkt(Direction::Dl, 2, 150_000, None, 10),
            pkt(Direction::Dl, 3, 180_000, Some(9_000), 10),
        ];
        let fb = pair_feedback(&dl, clock, 4);
        assert_eq!(fb, vec![Feedback::Delay(SimTime(1_000)), Feedback::Lost, Feedback::Delay(SimTime(9_000)), Feedback::Delay(SimTime(9_000))]);
        let late = pair_feedback(&dl[2..], clock, 2);
        assert_eq!(late, vec![Feedback::Unpaired, Feedback::Lost]);
    }

    #[test]
    fn fallback_is_pointwise_max() {
        let clock = FrameClock::new(30).unwrap();
        let a = RateSeries { clock, horizon: SimTime(100_000), d_max_ms: Some(30.0), values_bps: vec![120e6, 0.0, 5e6] };
        let b = RateSeries { values_bps: vec![36e6, 36e6, 0.0], ..a.clone() };
        assert_eq!(max_fallback(&a, &b).unwrap().values_bps, vec![120e6, 36e6, 5e6]);
        let zeros = RateSeries::zeros(clock, SimTime(100_000), Some(30.0));
        assert_eq!(max_fallback(&a, &zeros).unwrap(), a);
        let other = RateSeries { clock: FrameClock::new(10).unwrap(), ..a.clone() };
        assert!(max_fallback(&a, &other).is_err());
    }

    #[test]
    fn availability_counts_intervals_at_or_above() {
        let clock = FrameClock::new(30).unwrap();
        let s = RateSeries { clock, horizon: SimTime(133_334), d_max_ms: None, values_bps: vec![10e6, 20e6, 30e6, 40e6] };
        assert_eq!(availability(&s, 25e6), 0.5);
        assert_eq!(availability(&s, 0.0), 1.0);
        let flat = RateSeries { values_bps: vec![120e6; 4], ..s };
        assert_eq!(availability(&flat, 104e6), 1.0);
    }

    #[test]
    fn heatmap_required_rates() {
        let uniform = camera_support_matrix::<f64>(&[], &[], 30, SimTime(1_000_000), &[30.0, 40.0], &[26.0; 4]).unwrap();
        assert_eq!(uniform.required_mbps(4), 104.0);
        assert!(uniform.cells.iter().flatten().all(|c| *c == 0.0));
        let priority = camera_support_matrix::<f64>(&[], &[], 30, SimTime(1_000_000), &[30.0], &[26.0, 10.0, 10.0, 10.0]).unwrap();
        assert_eq!(priority.required_mbps(4), 56.0);
        assert!(camera_support_matrix::<f64>(&[], &[], 30, SimTime(1), &[30.0], &[]).is_err());
    }

    #[test]
    fn cdf_steps() {
        assert_eq!(empirical_cdf(&[5.0]).unwrap(), vec![(5.0, 1.0)]);
        assert_eq!(empirical_cdf(&[4.0, 2.0, 1.0, 2.0]).unwrap(), vec![(1.0, 0.25), (2.0, 0.75), (4.0, 1.0)]);
        let flat = empirical_cdf(&[15.0; 9]).unwrap();
        assert_eq!(cdf_quantile(&flat, 0.5), Some(15.0));
        assert!(empirical_cdf::<f64>(&[]).is_err());
    }

    #[test]
    fn rtt_adds_both_directions() {
        let ul = vec![
            pkt(Direction::Ul, 0, 40_000, Some(7_500), 8192),
            pkt(Direction::Ul, 1, 41_000, None, 8192),
            pkt(Direction::Ul, 2, 1_000, Some(7_500), 8192),
        ];
        let dl = vec![pkt(Direction::Dl, 0, 33_333, Some(7_500), 33_333)];
        let r = rtt_per_frame(&ul, &dl, 30).unwrap();
        assert_eq!(r.samples_ms, vec![15.0]);
        assert_eq!(r.unpaired, 1);
    }

    #[test]
    fn series_csv_round_trip() {
        let clock = FrameClock::new(30).unwrap();
        let s = RateSeries { clock, horizon: clock.boundary(3), d_max_ms: Some(31.0), values_bps: vec![24_576_000.0, 0.0, 36e6] };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("interval,t_start_s,rate_mbps\n0,0.000000,24.576\n1,0.033333,0\n"));
        assert_eq!(RateSeries::read_csv(buf.as_slice(), clock, Some(31.0)).unwrap(), s);
    }

    #[test]
    fn generic_over_f32() {
        let (ul, dl) = one_interval(20);
        let s = delay_constrained_throughput(&ul, &dl, 30, SimTime(1_000_000), 30.0f32).unwrap();
        assert_eq!(s.values_bps[0], 24_576_000.0f32);
    }
}
