//! Packet traces: CSV and packed binary I/O, epoch splitting, and synthetic
//! generators.
//!
//! Packed layout (little-endian): magic `MVPT`, version byte `1`, u64 record
//! count, u32 boundary count, that many u64 boundaries, then 12-byte records
//! `(src u32, dst u32, value u32)`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::net::Ipv4Addr;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"MVPT";
const VERSION: u8 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct PacketRecord {
    pub src: u32,
    pub dst: u32,
    pub value: u32,
}

impl PacketRecord {
    pub fn new(src: u32, dst: u32, value: u32) -> Self {
        PacketRecord { src, dst, value }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Packed,
}

impl TraceFormat {
    /// `.csv` files are CSV, everything else is packed.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => TraceFormat::Csv,
            _ => TraceFormat::Packed,
        }
    }
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(TraceFormat::Csv),
            "packed" => Ok(TraceFormat::Packed),
            other => Err(Error::Config(format!("unknown trace format {other:?}"))),
        }
    }
}

/// Records in arrival order plus the indices at which new epochs start.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub records: Vec<PacketRecord>,
    boundaries: Vec<usize>,
}

impl Trace {
    pub fn new(records: Vec<PacketRecord>) -> Self {
        Trace {
            records,
            boundaries: Vec::new(),
        }
    }

    /// Boundaries must be strictly increasing and strictly inside
    /// `(0, records.len())`.
    pub fn with_boundaries(records: Vec<PacketRecord>, boundaries: Vec<usize>) -> Result<Self> {
        let n = records.len();
        let mut prev = 0;
        for &b in &boundaries {
            if b <= prev || b >= n {
                return Err(Error::TraceParams(format!(
                    "epoch boundary {b} out of order or outside 1..{n}"
                )));
            }
            prev = b;
        }
        Ok(Trace { records, boundaries })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// Sum of record values.
    pub fn total(&self) -> u64 {
        self.records.iter().map(|r| r.value as u64).sum()
    }

    /// Epoch slices in order. An empty trace has one empty epoch.
    pub fn epochs(&self) -> Vec<&[PacketRecord]> {
        let mut out = Vec::with_capacity(self.boundaries.len() + 1);
        let mut start = 0;
        for &b in &self.boundaries {
            out.push(&self.records[start..b]);
            start = b;
        }
        out.push(&self.records[start..]);
        out
    }
}

/// Cuts the trace every `epoch_len` records, replacing existing boundaries.
pub fn split_epochs(trace: Trace, epoch_len: usize) -> Result<Trace> {
    if epoch_len == 0 {
        return Err(Error::TraceParams("epoch length must be at least 1".into()));
    }
    let n = trace.records.len();
    let boundaries = (1..).map(|k| k * epoch_len).take_while(|&b| b < n).collect();
    Ok(Trace {
        records: trace.records,
        boundaries,
    })
}

pub fn read_trace(path: &Path, format: TraceFormat) -> Result<Trace> {
    match format {
        TraceFormat::Csv => read_csv(path),
        TraceFormat::Packed => read_packed(path),
    }
}

pub fn write_trace(trace: &Trace, path: &Path, format: TraceFormat) -> Result<()> {
    match format {
        TraceFormat::Csv => write_csv(trace, path),
        TraceFormat::Packed => write_packed(trace, path),
    }
}

fn read_csv(path: &Path) -> Result<Trace> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let bad = |line: u64, reason: String| Error::CsvParse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    let mut records = Vec::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 3 {
            return Err(bad(line, format!("expected 3 fields, found {}", row.len())));
        }
        let addr = |i: usize| {
            row[i]
                .parse::<Ipv4Addr>()
                .map(u32::from)
                .map_err(|e| bad(line, format!("{:?}: {e}", &row[i])))
        };
        let value: u32 = row[2]
            .parse()
            .map_err(|e| bad(line, format!("value {:?}: {e}", &row[2])))?;
        if value == 0 {
            return Err(bad(line, "value must be at least 1".into()));
        }
        records.push(PacketRecord::new(addr(0)?, addr(1)?, value));
    }
    Ok(Trace::new(records))
}

fn write_csv(trace: &Trace, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "src,dst,value")?;
    for r in &trace.records {
        writeln!(w, "{},{},{}", Ipv4Addr::from(r.src), Ipv4Addr::from(r.dst), r.value)?;
    }
    w.flush()?;
    Ok(())
}

pub fn encode_packed(trace: &Trace) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + 8 * trace.boundaries.len() + 12 * trace.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&(trace.len() as u64).to_le_bytes());
    out.extend_from_slice(&(trace.boundaries.len() as u32).to_le_bytes());
    for &b in &trace.boundaries {
        out.extend_from_slice(&(b as u64).to_le_bytes());
    }
    for r in &trace.records {
        out.extend_from_slice(&r.src.to_le_bytes());
        out.extend_from_slice(&r.dst.to_le_bytes());
        out.extend_from_slice(&r.value.to_le_bytes());
    }
    out
}

fn write_packed(trace: &Trace, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&encode_packed(trace))?;
    w.flush()?;
    Ok(())
}

fn read_packed(path: &Path) -> Result<Trace> {
    let mut bytes = Vec::new();
    BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
    decode_packed(&bytes).map_err(|(offset, reason)| Error::PackedParse {
        path: path.to_path_buf(),
        offset,
        reason,
    })
}

/// Decodes a packed trace; errors carry the byte offset.
pub fn decode_packed(bytes: &[u8]) -> std::result::Result<Trace, (u64, String)> {
    if bytes.is_empty() {
        return Ok(Trace::default());
    }
    let mut pos = 0usize;
    let mut take = |n: usize, what: &str| -> std::result::Result<&[u8], (u64, String)> {
        let end = pos + n;
        if end > bytes.len() {
            return Err((pos as u64, format!("truncated {what}")));
        }
        let s = &bytes[pos..end];
        pos = end;
        Ok(s)
    };
    if take(4, "magic")? != MAGIC {
        return Err((0, "bad magic".into()));
    }
    let version = take(1, "version")?[0];
    if version != VERSION {
        return Err((4, format!("unsupported version {version}")));
    }
    let count = u64::from_le_bytes(take(8, "record count")?.try_into().unwrap()) as usize;
    let nb = u32::from_le_bytes(take(4, "boundary count")?.try_into().unwrap()) as usize;
    let mut boundaries = Vec::with_capacity(nb.min(1 << 20));
    for _ in 0..nb {
        boundaries.push(u64::from_le_bytes(take(8, "boundary")?.try_into().unwrap()) as usize);
    }
    let body = 17 + 8 * nb;
    let mut records = Vec::with_capacity(count.min(bytes.len() / 12));
    for _ in 0..count {
        let r = take(12, "record")?;
        let word = |i: usize| u32::from_le_bytes(r[i..i + 4].try_into().unwrap());
        records.push(PacketRecord::new(word(0), word(4), word(8)));
    }
    if pos != bytes.len() {
        return Err((pos as u64, "trailing bytes after last record".into()));
    }
    Trace::with_boundaries(records, boundaries).map_err(|e| (body as u64, e.to_string()))
}

/// `n` unit records whose flow ids follow Zipf(`alpha`) over `universe`
/// flows, each flow having fixed uniformly random addresses.
pub fn gen_zipf(n: usize, alpha: f64, universe: usize, seed: u64) -> Result<Trace> {
    if !(alpha > 0.0) || universe == 0 {
        return Err(Error::TraceParams(format!(
            "zipf needs alpha > 0 and a non-empty universe (alpha {alpha}, universe {universe})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let flows = distinct_flows(&mut rng, universe, &HashSet::new());
    let zipf = Zipf::new(universe as f64, alpha)
        .map_err(|e| Error::TraceParams(format!("zipf: {e}")))?;
    let records = (0..n)
        .map(|_| {
            let rank = zipf.sample(&mut rng) as usize;
            let (src, dst) = flows[rank.clamp(1, universe) - 1];
            PacketRecord::new(src, dst, 1)
        })
        .collect();
    Ok(Trace::new(records))
}

/// `n` unit records of which exactly `round(fraction * n)` belong to
/// `top_k` heavy flows, spread as evenly as possible. Every other record is
/// its own light flow. Source addresses are distinct across all flows, so
/// the heavy share is exact in one and two dimensions alike.
pub fn gen_skew_controlled(n: usize, top_k: usize, fraction: f64, seed: u64) -> Result<Trace> {
    if !(fraction > 0.0 && fraction < 1.0) || top_k == 0 {
        return Err(Error::TraceParams(format!(
            "need 0 < fraction < 1 and top_k >= 1 (fraction {fraction}, top_k {top_k})"
        )));
    }
    let heavy = (fraction * n as f64).round() as usize;
    if heavy < top_k {
        return Err(Error::TraceParams(format!(
            "{heavy} heavy records cannot cover {top_k} heavy flows"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let heavy_flows = distinct_flows(&mut rng, top_k, &HashSet::new());
    let used: HashSet<u32> = heavy_flows.iter().map(|f| f.0).collect();
    let light_flows = distinct_flows(&mut rng, n - heavy, &used);
    let mut records = Vec::with_capacity(n);
    let (each, extra) = (heavy / top_k, heavy % top_k);
    for (i, &(src, dst)) in heavy_flows.iter().enumerate() {
        let copies = each + usize::from(i < extra);
        records.extend(std::iter::repeat_n(PacketRecord::new(src, dst, 1), copies));
    }
    records.extend(light_flows.iter().map(|&(s, d)| PacketRecord::new(s, d, 1)));
    records.shuffle(&mut rng);
    Ok(Trace::new(records))
}

/// `count` random flows whose sources are pairwise distinct and avoid
/// `taken`.
fn distinct_flows(rng: &mut ChaCha8Rng, count: usize, taken: &HashSet<u32>) -> Vec<(u32, u32)> {
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let src: u32 = rng.random();
        if taken.contains(&src) || !seen.insert(src) {
            continue;
        }
        out.push((src, rng.random()));
    }
    out
}
