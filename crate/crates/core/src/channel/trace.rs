//! Channel trace container and its CSV form.
//!
//! ```text
//! # route_hash=0123abcd;seed=7
//! t_s,bs_id,tech,sinr_db[,rate_mbps]
//! 0.000000,1,mmwave,23.5
//! 0.000000,2,mmwave,
//! ```
//!
//! Rows are sorted by `t_s`. An empty `sinr_db` marks outage. Traces that
//! carry `rate_mbps` bypass the SINR-to-rate mapping downstream.

use std::collections::BTreeSet;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{SimTime, TechKind};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSample {
    pub t: SimTime,
    pub bs_id: u32,
    pub tech: TechKind,
    /// `None` is outage.
    pub sinr_db: Option<f64>,
    pub rate_mbps: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMeta {
    pub route_hash: String,
    pub seed: u64,
}

/// Best serving link of one technology at one trace instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkState {
    pub t: SimTime,
    pub bs_id: Option<u32>,
    pub sinr_db: Option<f64>,
    pub rate_mbps: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChannelTrace {
    samples: Vec<ChannelSample>,
    pub meta: Option<TraceMeta>,
}

impl ChannelTrace {
    /// Fails with a schema error unless samples are sorted by time with at
    /// most one sample per `(t, bs_id, tech)`.
    pub fn new(samples: Vec<ChannelSample>, meta: Option<TraceMeta>) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut current = None;
        for (i, s) in samples.iter().enumerate() {
            if let Some(prev) = current {
                if s.t < prev {
                    return Err(Error::Schema(format!(
                        "sample {i}: timestamp {} precedes {}",
                        s.t.fmt_secs(),
                        prev.fmt_secs()
                    )));
                }
                if s.t != prev {
                    seen.clear();
                }
            }
            current = Some(s.t);
            if !seen.insert((s.bs_id, s.tech)) {
                return Err(Error::Schema(format!(
                    "duplicate sample for bs {} {} at {}",
                    s.bs_id,
                    s.tech,
                    s.t.fmt_secs()
                )));
            }
            if s.sinr_db.is_some_and(|v| !v.is_finite()) || s.rate_mbps.is_some_and(|v| !v.is_finite() || v < 0.0) {
                return Err(Error::Schema(format!("sample {i}: non-finite value")));
            }
        }
        Ok(ChannelTrace { samples, meta })
    }

    pub fn samples(&self) -> &[ChannelSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_rates(&self) -> bool {
        self.samples.iter().any(|s| s.rate_mbps.is_some())
    }

    pub fn techs(&self) -> BTreeSet<TechKind> {
        self.samples.iter().map(|s| s.tech).collect()
    }

    /// Per instant, the site with the highest rate (when the trace carries
    /// rates) or highest SINR. Outage everywhere yields a state with no site.
    pub fn best_link(&self, tech: TechKind) -> Vec<LinkState> {
        let mut out: Vec<LinkState> = Vec::new();
        for s in self.samples.iter().filter(|s| s.tech == tech) {
            let cand = LinkState {
                t: s.t,
                bs_id: (s.sinr_db.is_some() || s.rate_mbps.is_some()).then_some(s.bs_id),
                sinr_db: s.sinr_db,
                rate_mbps: s.rate_mbps,
            };
            match out.last_mut() {
                Some(last) if last.t == s.t => {
                    if score(&cand) > score(last) {
                        *last = cand;
                    }
                }
                _ => out.push(cand),
            }
        }
        out
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut w = w;
        if let Some(m) = &self.meta {
            writeln!(w, "# route_hash={};seed={}", m.route_hash, m.seed)?;
        }
        let with_rate = self.has_rates();
        let mut csv = csv::Writer::from_writer(w);
        if with_rate {
            csv.write_record(["t_s", "bs_id", "tech", "sinr_db", "rate_mbps"])?;
        } else {
            csv.write_record(["t_s", "bs_id", "tech", "sinr_db"])?;
        }
        for s in &self.samples {
            let mut rec = vec![
                s.t.fmt_secs(),
                s.bs_id.to_string(),
                s.tech.to_string(),
                s.sinr_db.map(|v| v.to_string()).unwrap_or_default(),
            ];
            if with_rate {
                rec.push(s.rate_mbps.map(|v| v.to_string()).unwrap_or_default());
            }
            csv.write_record(&rec)?;
        }
        csv.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(mut r: R) -> Result<Self> {
        let mut text = String::new();
        r.read_to_string(&mut text)?;
        let meta = text
            .lines()
            .take_while(|l| l.starts_with('#'))
            .find_map(parse_meta);

        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let (Some(c_t), Some(c_bs), Some(c_tech)) = (col("t_s"), col("bs_id"), col("tech")) else {
            return Err(Error::Schema("header must contain t_s, bs_id, tech".into()));
        };
        let c_sinr = col("sinr_db");
        let c_rate = col("rate_mbps");
        if c_sinr.is_none() && c_rate.is_none() {
            return Err(Error::Schema("header needs sinr_db or rate_mbps".into()));
        }

        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            if rec.len() != headers.len() {
                return Err(Error::parse(
                    line,
                    format!("expected {} columns, found {}", headers.len(), rec.len()),
                ));
            }
            let field = |c: usize| rec.get(c).unwrap_or("");
            let t_s: f64 = field(c_t)
                .parse()
                .map_err(|_| Error::parse(line, format!("bad t_s `{}`", field(c_t))))?;
            if !(t_s >= 0.0) {
                return Err(Error::parse(line, "t_s must be non-negative"));
            }
            let bs_id: u32 = field(c_bs)
                .parse()
                .map_err(|_| Error::parse(line, format!("bad bs_id `{}`", field(c_bs))))?;
            let tech: TechKind = field(c_tech).parse().map_err(|e| Error::parse(line, format!("{e}")))?;
            let opt = |c: Option<usize>, name: &str| -> Result<Option<f64>> {
                match c.map(field) {
                    None | Some("") => Ok(None),
                    Some(v) => v
                        .parse::<f64>()
                        .map(Some)
                        .map_err(|_| Error::parse(line, format!("bad {name} `{v}`"))),
                }
            };
            samples.push(ChannelSample {
                t: SimTime::from_secs_f64(t_s),
                bs_id,
                tech,
                sinr_db: opt(c_sinr, "sinr_db")?,
                rate_mbps: opt(c_rate, "rate_mbps")?,
            });
        }
        ChannelTrace::new(samples, meta)
    }
}

fn score(s: &LinkState) -> f64 {
    match (s.rate_mbps, s.sinr_db) {
        (Some(r), _) => r,
        (None, Some(v)) => v,
        (None, None) => f64::NEG_INFINITY,
    }
}

fn parse_meta(line: &str) -> Option<TraceMeta> {
    let body = line.trim_start_matches('#').trim();
    let mut hash = None;
    let mut seed = None;
    for kv in body.split(';') {
        match kv.split_once('=') {
            Some(("route_hash", v)) => hash = Some(v.trim().to_string()),
            Some(("seed", v)) => seed = v.trim().parse().ok(),
            _ => {}
        }
    }
    Some(TraceMeta {
        route_hash: hash?,
        seed: seed?,
    })
}

pub fn export_trace(trace: &ChannelTrace, path: impl AsRef<Path>) -> Result<()> {
    let f = fs::File::create(path)?;
    trace.write_csv(std::io::BufWriter::new(f))
}

pub fn import_trace(path: impl AsRef<Path>) -> Result<ChannelTrace> {
    ChannelTrace::read_csv(fs::File::open(path)?)
}
