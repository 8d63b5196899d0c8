//! Persistent record files.
//!
//! Binary layout, all integers little-endian:
//!
//! ```text
//! header (24 bytes)
//!   0..4    magic "BZK1"
//!   4..6    format version (u16, currently 1)
//!   6       mode (0 = positively curved by s, 1 = general by p1)
//!   7       reserved, 0
//!   8..16   bound (u64)
//!   16..24  record count (u64)
//! record (53 bytes)
//!   0..20   q1..q5 of the canonical tuple (i32 each); q0 = -(q1+..+q5)
//!   20..52  s, p1, lk, p2 (u64 each)
//!   52      flags: bit 0 positively curved, bit 1 bazaikin_original,
//!           bit 2 p1 ≡ 15 (mod 24)
//! ```
//!
//! Records are stored in enumeration order, `(s, tuple)` ascending. The CSV
//! form carries the same information, with the header fields in a leading
//! `#` comment line, and converts back to an identical binary file.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::admissibility::{AdmissibilityFlags, CurvatureBase, Manifold, Orientation};
use crate::enumerate::{ManifoldRecord, Mode};
use crate::error::{Error, Result};
use crate::invariants::{mod3_class, InvariantRecord};
use crate::tuples::QTuple;

pub const MAGIC: &[u8; 4] = b"BZK1";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;
pub const RECORD_LEN: usize = 53;

pub const CSV_COLUMNS: &str = "q1,q2,q3,q4,q5,s,p1,lk,p2,p1_mod24,pc,bazaikin_original";

const FLAG_PC: u8 = 1;
const FLAG_BAZAIKIN: u8 = 1 << 1;
const FLAG_P1_15: u8 = 1 << 2;

pub(crate) fn mode_byte(mode: Mode) -> u8 {
    match mode {
        Mode::PositivelyCurved { .. } => 0,
        Mode::General { .. } => 1,
    }
}

fn mode_from(byte: u8, bound: u64) -> Result<Mode> {
    match byte {
        0 => Ok(Mode::PositivelyCurved { s_max: bound }),
        1 => Ok(Mode::General { p1_max: bound }),
        b => Err(Error::Format(format!("unknown mode byte {b}"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RecordHeader {
    pub mode: Mode,
    pub count: u64,
}

impl RecordHeader {
    pub fn encode(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..4].copy_from_slice(MAGIC);
        h[4..6].copy_from_slice(&VERSION.to_le_bytes());
        h[6] = mode_byte(self.mode);
        h[8..16].copy_from_slice(&self.mode.bound().to_le_bytes());
        h[16..24].copy_from_slice(&self.count.to_le_bytes());
        h
    }

    pub fn decode(h: &[u8; HEADER_LEN]) -> Result<Self> {
        if &h[..4] != MAGIC {
            return Err(Error::Format("bad magic, not a record file".into()));
        }
        let version = u16::from_le_bytes([h[4], h[5]]);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported format version {version}")));
        }
        let bound = u64::from_le_bytes(h[8..16].try_into().expect("8 bytes"));
        let count = u64::from_le_bytes(h[16..24].try_into().expect("8 bytes"));
        Ok(Self { mode: mode_from(h[6], bound)?, count })
    }
}

pub fn flags_byte(r: &ManifoldRecord) -> u8 {
    let mut f = 0;
    if r.flags.positively_curved() {
        f |= FLAG_PC;
    }
    if r.flags.bazaikin_original {
        f |= FLAG_BAZAIKIN;
    }
    if r.inv.p1_mod24 == 15 {
        f |= FLAG_P1_15;
    }
    f
}

pub fn encode_record(r: &ManifoldRecord, out: &mut Vec<u8>) {
    for x in r.q.tail() {
        let x = i32::try_from(x).expect("coordinates fit in 32 bits");
        out.extend_from_slice(&x.to_le_bytes());
    }
    for v in [r.inv.s, r.inv.p1, r.inv.lk, r.inv.p2] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.push(flags_byte(r));
}

fn assemble(tail: [i64; 5], vals: [u64; 4], pc: bool, bazaikin_original: bool) -> Result<ManifoldRecord> {
    let q = QTuple::from_tail(tail).map_err(|e| Error::Format(e.to_string()))?;
    let m = Manifold::new(q).map_err(|e| Error::Format(format!("{q}: {e}")))?;
    let mod3_class = mod3_class(&q)
        .ok_or_else(|| Error::Format(format!("{q} has an impossible residue pattern mod 3")))?;
    let [s, p1, lk, p2] = vals;
    Ok(ManifoldRecord {
        q: *m.tuple(),
        inv: InvariantRecord { s, p1, lk, p2, p1_mod24: (p1 % 24) as u8, mod3_class },
        flags: AdmissibilityFlags {
            free: true,
            // canonical positively curved tuples always use base 0
            curvature: pc.then_some(CurvatureBase { index: 0, orientation: Orientation::Positive }),
            bazaikin_original,
        },
    })
}

pub fn decode_record(b: &[u8; RECORD_LEN]) -> Result<ManifoldRecord> {
    let tail: [i64; 5] =
        std::array::from_fn(|i| i64::from(i32::from_le_bytes(b[4 * i..4 * i + 4].try_into().expect("4 bytes"))));
    let vals: [u64; 4] =
        std::array::from_fn(|i| u64::from_le_bytes(b[20 + 8 * i..28 + 8 * i].try_into().expect("8 bytes")));
    let flags = b[52];
    if flags & !(FLAG_PC | FLAG_BAZAIKIN | FLAG_P1_15) != 0 {
        return Err(Error::Format(format!("unknown flag bits {flags:#04x}")));
    }
    assemble(tail, vals, flags & FLAG_PC != 0, flags & FLAG_BAZAIKIN != 0)
}

pub fn write_records(w: impl Write, mode: Mode, recs: &[ManifoldRecord]) -> Result<()> {
    let mut w = BufWriter::new(w);
    w.write_all(&RecordHeader { mode, count: recs.len() as u64 }.encode())?;
    let mut buf = Vec::with_capacity(RECORD_LEN);
    for r in recs {
        buf.clear();
        encode_record(r, &mut buf);
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_records_file(path: &Path, mode: Mode, recs: &[ManifoldRecord]) -> Result<()> {
    write_records(File::create(path)?, mode, recs)
}

/// Streaming reader over a binary record file.
pub struct RecordReader<R> {
    inner: R,
    header: RecordHeader,
    remaining: u64,
}

impl RecordReader<BufReader<File>> {
    /// Opens a file, refusing it if its length disagrees with the header count.
    pub fn open(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let len = file.metadata()?.len();
        let reader = Self::new(BufReader::new(file))?;
        let expected = HEADER_LEN as u64 + reader.header.count * RECORD_LEN as u64;
        if len != expected {
            return Err(Error::Format(format!(
                "{}: header announces {} records ({expected} bytes) but file has {len} bytes",
                path.display(),
                reader.header.count
            )));
        }
        Ok(reader)
    }
}

impl<R: Read> RecordReader<R> {
    pub fn new(mut inner: R) -> Result<Self> {
        let mut h = [0u8; HEADER_LEN];
        inner
            .read_exact(&mut h)
            .map_err(|_| Error::Format("file too short for a header".into()))?;
        let header = RecordHeader::decode(&h)?;
        Ok(Self { inner, header, remaining: header.count })
    }

    pub fn header(&self) -> RecordHeader {
        self.header
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<ManifoldRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let mut b = [0u8; RECORD_LEN];
        Some(match self.inner.read_exact(&mut b) {
            Ok(()) => decode_record(&b),
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                self.remaining = 0;
                Err(Error::Format("file truncated before the announced record count".into()))
            }
            Err(e) => Err(e.into()),
        })
    }
}

pub fn read_records_file(path: &Path) -> Result<(Mode, Vec<ManifoldRecord>)> {
    let reader = RecordReader::open(path)?;
    let mode = reader.header().mode;
    Ok((mode, reader.collect::<Result<Vec<_>>>()?))
}

fn mode_tag(mode: Mode) -> &'static str {
    match mode {
        Mode::PositivelyCurved { .. } => "pc",
        Mode::General { .. } => "general",
    }
}

pub fn write_csv(w: impl Write, mode: Mode, recs: &[ManifoldRecord]) -> Result<()> {
    let mut w = BufWriter::new(w);
    writeln!(w, "# BZK1 version={VERSION} mode={} bound={} count={}", mode_tag(mode), mode.bound(), recs.len())?;
    writeln!(w, "{CSV_COLUMNS}")?;
    for r in recs {
        let q = r.q.tail();
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            q[0],
            q[1],
            q[2],
            q[3],
            q[4],
            r.inv.s,
            r.inv.p1,
            r.inv.lk,
            r.inv.p2,
            r.inv.p1_mod24,
            u8::from(r.flags.positively_curved()),
            u8::from(r.flags.bazaikin_original)
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<(Mode, Vec<ManifoldRecord>)> {
    let mut lines = BufReader::new(r).lines();
    let bad = |msg: String| Error::Format(format!("csv: {msg}"));
    let meta = lines.next().ok_or_else(|| bad("empty file".into()))??;
    let mut mode = None;
    let mut bound = None;
    let mut count = None;
    for field in meta.trim_start_matches('#').split_whitespace().skip(1) {
        match field.split_once('=') {
            Some(("mode", "pc")) => mode = Some(0),
            Some(("mode", "general")) => mode = Some(1),
            Some(("bound", v)) => bound = v.parse::<u64>().ok(),
            Some(("count", v)) => count = v.parse::<usize>().ok(),
            Some(("version", v)) if v == VERSION.to_string() => {}
            _ => return Err(bad(format!("unexpected metadata field '{field}'"))),
        }
    }
    if !meta.starts_with("# BZK1") {
        return Err(bad("missing '# BZK1' metadata line".into()));
    }
    let (Some(mode), Some(bound)) = (mode, bound) else {
        return Err(bad("metadata line lacks mode or bound".into()));
    };
    let mode = mode_from(mode, bound)?;
    let columns = lines.next().ok_or_else(|| bad("missing column header".into()))??;
    if columns.trim() != CSV_COLUMNS {
        return Err(bad(format!("unexpected columns '{columns}'")));
    }
    let mut recs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 12 {
            return Err(bad(format!("line {}: expected 12 fields", lineno + 3)));
        }
        let num = |i: usize| -> Result<i64> {
            f[i].parse::<i64>().map_err(|_| bad(format!("line {}: '{}' is not an integer", lineno + 3, f[i])))
        };
        let unum = |i: usize| -> Result<u64> {
            f[i].parse::<u64>().map_err(|_| bad(format!("line {}: '{}' is not a count", lineno + 3, f[i])))
        };
        let tail = [num(0)?, num(1)?, num(2)?, num(3)?, num(4)?];
        let vals = [unum(5)?, unum(6)?, unum(7)?, unum(8)?];
        let rec = assemble(tail, vals, unum(10)? == 1, unum(11)? == 1)?;
        if u64::from(rec.inv.p1_mod24) != unum(9)? {
            return Err(bad(format!("line {}: p1_mod24 disagrees with p1", lineno + 3)));
        }
        recs.push(rec);
    }
    if let Some(n) = count {
        if n != recs.len() {
            return Err(bad(format!("metadata announces {n} records, found {}", recs.len())));
        }
    }
    Ok((mode, recs))
}

/// Combines shard outputs into the single-run record list.
pub fn merge_shards(parts: Vec<(Mode, Vec<ManifoldRecord>)>) -> Result<(Mode, Vec<ManifoldRecord>)> {
    let mut iter = parts.into_iter();
    let (mode, mut all) = iter.next().ok_or_else(|| Error::Format("nothing to merge".into()))?;
    for (m, recs) in iter {
        if m != mode {
            return Err(Error::Format(format!("cannot merge {m:?} into {mode:?}")));
        }
        all.extend(recs);
    }
    all.sort_unstable();
    if let Some(w) = all.windows(2).find(|w| w[0].q == w[1].q) {
        return Err(Error::Format(format!("{} appears in more than one input", w[0].q)));
    }
    Ok((mode, all))
}
