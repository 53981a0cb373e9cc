//! Packet records and the packet-log CSV.
//!
//! ```text
//! id,dir,size_bits,t_sent_s,t_delivered_s,link,ntx[,e2e_delay_ms]
//! 0,UL,8192,0.000000,0.003250,mmwave:1,1
//! 1,UL,8192,0.000068,,mmwave:1,4
//! ```
//!
//! An empty `t_delivered_s` marks a dropped packet. `link` is `tech:bs_id`,
//! or just `tech` when no site was serving.

use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Direction, SimTime, TechKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LinkId {
    pub tech: TechKind,
    pub bs_id: Option<u32>,
}

impl fmt::Display for LinkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.bs_id {
            Some(id) => write!(f, "{}:{}", self.tech, id),
            None => write!(f, "{}", self.tech),
        }
    }
}

impl FromStr for LinkId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (tech, bs) = match s.split_once(':') {
            Some((t, b)) => (t, Some(b)),
            None => (s, None),
        };
        let tech: TechKind = tech.parse().map_err(|e| format!("{e}"))?;
        let bs_id = bs
            .map(|b| b.parse::<u32>().map_err(|_| format!("bad site id `{b}`")))
            .transpose()?;
        Ok(LinkId { tech, bs_id })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketRecord {
    pub id: u64,
    pub direction: Direction,
    pub size_bits: u64,
    pub t_sent: SimTime,
    /// `None` is a drop.
    pub t_delivered: Option<SimTime>,
    pub link: LinkId,
    pub n_transmissions: u32,
}

impl PacketRecord {
    pub fn delay(&self) -> Option<SimTime> {
        self.t_delivered.map(|d| d - self.t_sent)
    }

    pub fn is_dropped(&self) -> bool {
        self.t_delivered.is_none()
    }
}

/// Write records; `with_e2e` appends the delay column in milliseconds.
pub fn write_packet_log<W: Write>(records: &[PacketRecord], w: W, with_e2e: bool) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["id", "dir", "size_bits", "t_sent_s", "t_delivered_s", "link", "ntx"];
    if with_e2e {
        header.push("e2e_delay_ms");
    }
    csv.write_record(&header)?;
    for r in records {
        let mut rec = vec![
            r.id.to_string(),
            r.direction.to_string(),
            r.size_bits.to_string(),
            r.t_sent.fmt_secs(),
            r.t_delivered.map(SimTime::fmt_secs).unwrap_or_default(),
            r.link.to_string(),
            r.n_transmissions.to_string(),
        ];
        if with_e2e {
            rec.push(r.delay().map(|d| format!("{:.3}", d.as_millis_f64())).unwrap_or_default());
        }
        csv.write_record(&rec)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn read_packet_log<R: Read>(r: R) -> Result<Vec<PacketRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r);
    let headers = rdr.headers()?.clone();
    let want = ["id", "dir", "size_bits", "t_sent_s", "t_delivered_s", "link", "ntx"];
    let cols: Vec<usize> = want
        .iter()
        .map(|w| {
            headers
                .iter()
                .position(|h| h == *w)
                .ok_or_else(|| Error::Schema(format!("packet log lacks column `{w}`")))
        })
        .collect::<Result<_>>()?;

    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != headers.len() {
            return Err(Error::parse(
                line,
                format!("expected {} columns, found {}", headers.len(), rec.len()),
            ));
        }
        let f = |i: usize| rec.get(cols[i]).unwrap_or("");
        let bad = |i: usize| Error::parse(line, format!("bad {} `{}`", want[i], f(i)));
        let secs = |i: usize| -> Result<SimTime> {
            let v: f64 = f(i).parse().map_err(|_| bad(i))?;
            if !(v >= 0.0) || !v.is_finite() {
                return Err(bad(i));
            }
            Ok(SimTime::from_secs_f64(v))
        };
        let size_bits: u64 = f(2).parse().map_err(|_| bad(2))?;
        if size_bits == 0 {
            return Err(Error::parse(line, "size_bits must be positive"));
        }
        let t_sent = secs(3)?;
        let t_delivered = if f(4).is_empty() { None } else { Some(secs(4)?) };
        if t_delivered.is_some_and(|d| d < t_sent) {
            return Err(Error::parse(line, "delivered before sent"));
        }
        let n_transmissions: u32 = f(6).parse().map_err(|_| bad(6))?;
        if n_transmissions == 0 {
            return Err(Error::parse(line, "ntx must be at least 1"));
        }
        out.push(PacketRecord {
            id: f(0).parse().map_err(|_| bad(0))?,
            direction: f(1).parse().map_err(|_| bad(1))?,
            size_bits,
            t_sent,
            t_delivered,
            link: f(5).parse().map_err(|e| Error::parse(line, e))?,
            n_transmissions,
        });
    }
    Ok(out)
}

pub fn export_packet_log(records: &[PacketRecord], path: impl AsRef<Path>, with_e2e: bool) -> Result<()> {
    let f = fs::File::create(path)?;
    write_packet_log(records, std::io::BufWriter::new(f), with_e2e)
}

pub fn import_packet_log(path: impl AsRef<Path>) -> Result<Vec<PacketRecord>> {
    read_packet_log(fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: u64, delivered: Option<u64>) -> PacketRecord {
        PacketRecord {
            id,
            direction: Direction::Ul,
            size_bits: 8192,
            t_sent: SimTime(1_000 * id),
            t_delivered: delivered.map(SimTime),
            link: LinkId { tech: TechKind::Mmwave, bs_id: Some(2) },
            n_transmissions: 1,
        }
    }

    #[test]
    fn round_trip() {
        let rs = vec![rec(0, Some(3_250)), rec(1, None), PacketRecord { link: LinkId { tech: TechKind::Lte, bs_id: None }, ..rec(2, Some(9_000)) }];
        for e2e in [false, true] {
            let mut buf = Vec::new();
            write_packet_log(&rs, &mut buf, e2e).unwrap();
            assert_eq!(read_packet_log(buf.as_slice()).unwrap(), rs);
        }
    }

    #[test]
    fn drop_is_empty_field() {
        let mut buf = Vec::new();
        write_packet_log(&[rec(1, None)], &mut buf, true).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "id,dir,size_bits,t_sent_s,t_delivered_s,link,ntx,e2e_delay_ms\n1,UL,8192,0.001000,,mmwave:2,1,\n"
        );
    }

    #[test]
    fn malformed_rows_report_line() {
        let text = "id,dir,size_bits,t_sent_s,t_delivered_s,link,ntx\n0,UL,8192,0.0,0.001,lte:1,1\n1,XX,8192,0.0,,lte:1,1\n";
        match read_packet_log(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        let text = "id,dir,size_bits,t_sent_s,t_delivered_s,link,ntx\n0,UL,8192,0.5,0.1,lte:1,1\n";
        assert!(matches!(read_packet_log(text.as_bytes()), Err(Error::Parse { .. })));
    }
}
