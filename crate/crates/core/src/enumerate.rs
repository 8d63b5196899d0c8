//! Exhaustive enumeration of spaces within an invariant bound.
//!
//! Both modes scan canonical tuples `q0 <= q1 <= .. <= q5` directly, with the
//! largest entry `q5` as the outermost loop. That loop is what gets sharded,
//! parallelized and checkpointed.
//!
//! # Positively curved mode
//!
//! A canonical tuple is positively curved iff `q1 + q2 > 0`, which forces
//! `0 < q2 <= q3 <= q4 <= q5` and `-q2 < q1`. Write `A = q1 + q2` (even, so
//! `A >= 2`), `B = q3 + q4 + q5` and `T = (q3+q4)(q4+q5)(q3+q5)`. Then
//!
//! ```text
//! 8s = -σ3 = A²B + A(B² + q1 q2) + T
//! ```
//!
//! and every summand is positive: `T` trivially, and since `q1 >= 2 - q2`,
//! `B² + q1 q2 > B² - q3² >= 0`. Hence
//!
//! ```text
//! 8s >= 4B + 2(B² - q3²) + T =: lb(q3, q4, q5),
//! ```
//!
//! which is increasing in each of `q3`, `q4`, `q5`. The `q3`, `q4` and `q5`
//! loops stop at the first value with `lb > 8 s_max`. For fixed `q2..q5`,
//! `8s` is increasing in `q1` (its derivative `2AB + B² + q2(2q1 + q2)` is
//! positive because `2q1 + q2 > -q2` and `B >= 3 q2`), so the innermost loop
//! stops at the first overshoot.
//!
//! An independent, looser box comes from the middle summand alone:
//! `A(B² + q1 q2) >= 2(B² - q2²) >= 16B²/9`, so `B² <= 9 s_max / 2`.
//!
//! # General mode
//!
//! `p1 = |q|²/2` bounds every entry by `sqrt(2 p1_max)`. The scan walks the
//! shrinking squared-norm budget from `q5` down to `q1`; `q0 = -(q1+..+q5)`
//! and `q0 <= q1` means `q1 >= -(q2+..+q5)/2`, where the remaining budget
//! `q1² + q0²` is increasing in `q1`.

use std::collections::{BTreeMap, HashSet};
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::admissibility::{admissibility, is_free, positively_curved, AdmissibilityFlags, Manifold};
use crate::error::{Error, Result};
use crate::invariants::{full_record, p1, InvariantRecord};
use crate::records::{decode_record, encode_record, RECORD_LEN};
use crate::tuples::{canonicalize, from_qbar, QTuple, RawTuple5, RawTuple6};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    PositivelyCurved { s_max: u64 },
    General { p1_max: u64 },
}

impl Mode {
    pub fn bound(&self) -> u64 {
        match *self {
            Mode::PositivelyCurved { s_max } => s_max,
            Mode::General { p1_max } => p1_max,
        }
    }

    /// Whether a record with these invariants belongs to the output.
    pub fn accepts(&self, inv: &InvariantRecord, flags: &AdmissibilityFlags) -> bool {
        match *self {
            Mode::PositivelyCurved { s_max } => flags.positively_curved() && inv.s <= s_max,
            Mode::General { p1_max } => inv.p1 <= p1_max,
        }
    }
}

/// Round-robin partition of the outer loop values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shard {
    pub index: u32,
    pub total: u32,
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, total: 1 };

    pub fn new(index: u32, total: u32) -> Result<Self> {
        if total == 0 || index >= total {
            return Err(Error::Parse(format!("invalid shard {index}/{total}")));
        }
        Ok(Self { index, total })
    }

    pub fn owns(&self, outer: i64) -> bool {
        ((outer - 1) / 2) as u64 % u64::from(self.total) == u64::from(self.index)
    }
}

/// Which optional fields to compute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmitFlags {
    pub bazaikin_original: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        Self { bazaikin_original: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub mode: Mode,
    pub shard: Shard,
    pub emit: EmitFlags,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl EnumConfig {
    pub fn new(mode: Mode) -> Self {
        Self { mode, shard: Shard::ALL, emit: EmitFlags::default(), threads: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode.bound() == 0 {
            return Err(Error::Parse("enumeration bound must be at least 1".into()));
        }
        Shard::new(self.shard.index, self.shard.total)?;
        if self.threads == Some(0) {
            return Err(Error::Parse("thread count must be at least 1".into()));
        }
        Ok(())
    }
}

/// One enumerated manifold with its invariants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ManifoldRecord {
    pub q: QTuple,
    pub inv: InvariantRecord,
    pub flags: AdmissibilityFlags,
}

impl ManifoldRecord {
    pub fn compute(m: &Manifold, emit: EmitFlags) -> Result<Self> {
        let mut flags = admissibility(m)?;
        if !emit.bazaikin_original {
            flags.bazaikin_original = false;
        }
        Ok(Self { q: *m.tuple(), inv: full_record(m)?, flags })
    }

    pub fn sort_key(&self) -> (u64, QTuple) {
        (self.inv.s, self.q)
    }
}

impl PartialOrd for ManifoldRecord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ManifoldRecord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

/// Search limits for one mode.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoordinateBox {
    /// Largest value of `q5` scanned.
    pub outer_max: i64,
    /// Every emitted tuple has all `|q_i| <= max_abs`.
    pub max_abs: i64,
}

/// Lower bound for `8s` over all positively curved canonical tuples with the
/// given top three entries.
fn pc_lower_bound(q3: i64, q4: i64, q5: i64) -> i128 {
    let (q3, q4, q5) = (i128::from(q3), i128::from(q4), i128::from(q5));
    let b = q3 + q4 + q5;
    4 * b + 2 * (b * b - q3 * q3) + (q3 + q4) * (q4 + q5) * (q3 + q5)
}

fn largest_odd_at_most(x: i64) -> i64 {
    if x < 1 {
        return -1;
    }
    if x % 2 == 0 {
        x - 1
    } else {
        x
    }
}

fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn derive_coordinate_bound(mode: Mode) -> CoordinateBox {
    match mode {
        Mode::PositivelyCurved { s_max } => {
            let target = 8 * i128::from(s_max);
            let mut q5 = 1i64;
            while pc_lower_bound(1, 1, q5 + 2) <= target {
                q5 += 2;
            }
            let outer_max = if pc_lower_bound(1, 1, 1) <= target { q5 } else { -1 };
            // |q0| = q1 + q2 + B <= 2 q3 + 3 q5
            CoordinateBox { outer_max, max_abs: 5 * outer_max.max(0) }
        }
        Mode::General { p1_max } => {
            let r = largest_odd_at_most(isqrt(2 * u128::from(p1_max)) as i64);
            CoordinateBox { outer_max: r, max_abs: r }
        }
    }
}

/// The looser positively curved box, `B² <= 9 s_max / 2`.
pub fn loose_coordinate_bound(s_max: u64) -> CoordinateBox {
    let b_max = isqrt(9 * u128::from(s_max) / 2) as i64;
    let outer_max = largest_odd_at_most(b_max - 2);
    CoordinateBox { outer_max, max_abs: 5 * outer_max.max(0) }
}

fn odd_range(lo: i64, hi: i64) -> impl Iterator<Item = i64> {
    let lo = if lo.rem_euclid(2) == 0 { lo + 1 } else { lo };
    (lo..=hi).step_by(2)
}

/// Positively curved canonical tuples with `q5 = outer` and `8s <= 8 s_max`.
fn scan_pc_tight(s_max: u64, outer: i64, emit: &mut impl FnMut(QTuple)) -> Result<()> {
    let target = 8 * i128::from(s_max);
    let q5 = outer;
    for q4 in odd_range(1, q5) {
        if pc_lower_bound(1, q4, q5) > target {
            break;
        }
        for q3 in odd_range(1, q4) {
            let lb = pc_lower_bound(q3, q4, q5);
            if lb > target {
                break;
            }
            let b = i128::from(q3 + q4 + q5);
            let t = i128::from(q3 + q4) * i128::from(q4 + q5) * i128::from(q3 + q5);
            for q2 in odd_range(1, q3) {
                for q1 in odd_range(2 - q2, q2) {
                    let a = i128::from(q1 + q2);
                    let eight_s = a * a * b + a * (b * b + i128::from(q1 * q2)) + t;
                    if eight_s < lb {
                        return Err(Error::Bound(format!(
                            "8s = {eight_s} below the derived lower bound {lb}"
                        )));
                    }
                    if eight_s > target {
                        break;
                    }
                    let q0 = -(q1 + q2 + q3 + q4 + q5);
                    emit(QTuple::new_unchecked([q0, q1, q2, q3, q4, q5]));
                }
            }
        }
    }
    Ok(())
}

/// Same output as [`scan_pc_tight`] but pruned only by the loose box.
fn scan_pc_loose(s_max: u64, outer: i64, emit: &mut impl FnMut(QTuple)) {
    let target = 8 * i128::from(s_max);
    let b2_max = 9 * i128::from(s_max) / 2;
    let q5 = outer;
    for q4 in odd_range(1, q5) {
        for q3 in odd_range(1, q4) {
            let b = i128::from(q3 + q4 + q5);
            if b * b > b2_max {
                break;
            }
            for q2 in odd_range(1, q3) {
                for q1 in odd_range(2 - q2, q2) {
                    let q = [-(q1 + q2 + q3 + q4 + q5), q1, q2, q3, q4, q5];
                    let eight_s = -crate::invariants::symmetric_profile(&QTuple::new_unchecked(q)).sigma(3);
                    if eight_s <= target {
                        emit(QTuple::new_unchecked(q));
                    }
                }
            }
        }
    }
}

/// Canonical tuples with `q5 = outer` and `|q|² <= 2 p1_max`.
fn scan_general(p1_max: u64, outer: i64, emit: &mut impl FnMut(QTuple)) {
    let q5 = outer;
    let r5 = 2 * i128::from(p1_max) - i128::from(q5 * q5);
    if r5 < 0 {
        return;
    }
    for q4 in odd_range(1, q5) {
        let r4 = r5 - i128::from(q4 * q4);
        if r4 < 0 {
            break;
        }
        for q3 in odd_range(1, q4) {
            let r3 = r4 - i128::from(q3 * q3);
            if r3 < 0 {
                break;
            }
            for q2 in odd_range(-q3, q3) {
                let r2 = r3 - i128::from(q2 * q2);
                if r2 < 0 {
                    continue;
                }
                let rest = q2 + q3 + q4 + q5;
                // smallest q1 with q0 <= q1
                let lo = (-rest).div_euclid(2) + i64::from((-rest).rem_euclid(2) != 0);
                for q1 in odd_range(lo, q2) {
                    let q0 = -(q1 + rest);
                    if i128::from(q1 * q1 + q0 * q0) > r2 {
                        break;
                    }
                    let q = [q0, q1, q2, q3, q4, q5];
                    if q2 == -q3 && canonicalize(&RawTuple6::new(q).expect("valid by construction")).entries() != q {
                        continue;
                    }
                    emit(QTuple::new_unchecked(q));
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Pruning {
    Tight,
    Loose,
}

fn outer_values(mode: Mode, pruning: Pruning, shard: Shard) -> Vec<i64> {
    let bx = match (mode, pruning) {
        (Mode::PositivelyCurved { s_max }, Pruning::Loose) => loose_coordinate_bound(s_max),
        _ => derive_coordinate_bound(mode),
    };
    odd_range(1, bx.outer_max).filter(|&v| shard.owns(v)).collect()
}

fn records_for_outer(cfg: &EnumConfig, pruning: Pruning, outer: i64) -> Result<Vec<ManifoldRecord>> {
    let mut tuples = Vec::new();
    let mut push = |q: QTuple| {
        if is_free(&q) {
            tuples.push(q);
        }
    };
    match (cfg.mode, pruning) {
        (Mode::PositivelyCurved { s_max }, Pruning::Tight) => scan_pc_tight(s_max, outer, &mut push)?,
        (Mode::PositivelyCurved { s_max }, Pruning::Loose) => scan_pc_loose(s_max, outer, &mut push),
        (Mode::General { p1_max }, _) => scan_general(p1_max, outer, &mut push),
    }
    let bx = derive_coordinate_bound(cfg.mode);
    let mut out = Vec::with_capacity(tuples.len());
    for q in tuples {
        if q.max_abs() > bx.max_abs {
            return Err(Error::Bound(format!("{q} lies outside the derived box {bx:?}")));
        }
        let rec = ManifoldRecord::compute(&Manifold::new_unchecked(q), cfg.emit)?;
        if !cfg.mode.accepts(&rec.inv, &rec.flags) {
            return Err(Error::Bound(format!("{q} was scanned but fails the mode filter")));
        }
        out.push(rec);
    }
    Ok(out)
}

/// Progress of a running enumeration, reported once per outer value.
#[derive(Clone, Copy, Debug)]
pub struct Progress {
    pub outer: i64,
    pub records: usize,
    pub done: usize,
    pub total: usize,
    pub scanned_records: usize,
    pub elapsed: Duration,
}

fn run_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
            Ok(pool.install(f))
        }
    }
}

/// All manifolds for `cfg`, sorted by `(s, tuple)`.
pub fn enumerate(cfg: &EnumConfig) -> Result<Vec<ManifoldRecord>> {
    enumerate_with(cfg, None, &|_| {})
}

/// [`enumerate`] with an optional checkpoint file and a progress callback.
///
/// Completed outer values are appended to the checkpoint as they finish; a
/// rerun with the same checkpoint skips them. Output does not depend on the
/// thread count or on how often the run was interrupted.
pub fn enumerate_with(
    cfg: &EnumConfig,
    checkpoint: Option<&Path>,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<Vec<ManifoldRecord>> {
    run_enumeration(cfg, Pruning::Tight, checkpoint, progress)
}

/// Enumeration pruned only by the loose positively curved box. Used to
/// cross-check the tight bound derivation; general mode is unaffected.
pub fn enumerate_loose(cfg: &EnumConfig) -> Result<Vec<ManifoldRecord>> {
    run_enumeration(cfg, Pruning::Loose, None, &|_| {})
}

fn run_enumeration(
    cfg: &EnumConfig,
    pruning: Pruning,
    checkpoint: Option<&Path>,
    progress: &(dyn Fn(&Progress) + Sync),
) -> Result<Vec<ManifoldRecord>> {
    cfg.validate()?;
    let start = Instant::now();
    let outer = outer_values(cfg.mode, pruning, cfg.shard);
    let total = outer.len();

    let (mut done, ckpt) = match checkpoint {
        Some(path) => {
            let (done, ckpt) = Checkpoint::open(path, cfg)?;
            (done, Some(Mutex::new(ckpt)))
        }
        None => (BTreeMap::new(), None),
    };
    let pending: Vec<i64> = outer.iter().copied().filter(|v| !done.contains_key(v)).collect();
    let counter = Mutex::new((done.len(), done.values().map(Vec::len).sum::<usize>()));

    let fresh = run_pool(cfg.threads, || {
        pending
            .par_iter()
            .map(|&v| {
                let recs = records_for_outer(cfg, pruning, v)?;
                if let Some(ckpt) = &ckpt {
                    ckpt.lock().expect("checkpoint lock").append(v, &recs)?;
                }
                let (n, scanned) = {
                    let mut c = counter.lock().expect("progress lock");
                    c.0 += 1;
                    c.1 += recs.len();
                    *c
                };
                progress(&Progress {
                    outer: v,
                    records: recs.len(),
                    done: n,
                    total,
                    scanned_records: scanned,
                    elapsed: start.elapsed(),
                });
                Ok((v, recs))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    done.extend(fresh);

    let mut all: Vec<ManifoldRecord> = done.into_values().flatten().collect();
    all.par_sort_unstable();
    Ok(all)
}

/// All records with `|q̄_i| <= coord_bound` for some five-integer form,
/// found by scanning the full box of odd five-tuples. No pruning, no use of
/// the canonical curvature criterion.
pub fn brute_force_enumerate(coord_bound: i64, mode: Mode) -> Result<HashSet<ManifoldRecord>> {
    let odd: Vec<i64> = odd_range(-coord_bound, coord_bound).collect();
    let classes: HashSet<QTuple> = odd
        .par_iter()
        .map(|&a| {
            let mut local = HashSet::new();
            for &b in &odd {
                for &c in &odd {
                    for &d in &odd {
                        for &e in &odd {
                            let qbar = RawTuple5::new([a, b, c, d, e]).expect("odd entries in range");
                            local.insert(canonicalize(&from_qbar(&qbar)));
                        }
                    }
                }
            }
            local
        })
        .reduce(HashSet::new, |mut x, y| {
            x.extend(y);
            x
        });

    let keep = |q: &QTuple| -> Result<Option<ManifoldRecord>> {
        if !is_free(q) {
            return Ok(None);
        }
        let m = Manifold::new_unchecked(*q);
        if let Mode::General { p1_max } = mode {
            if p1(q) > p1_max {
                return Ok(None);
            }
        }
        if let Mode::PositivelyCurved { .. } = mode {
            if positively_curved(&m)?.is_none() {
                return Ok(None);
            }
        }
        let rec = ManifoldRecord::compute(&m, EmitFlags::default())?;
        Ok(mode.accepts(&rec.inv, &rec.flags).then_some(rec))
    };
    let classes: Vec<QTuple> = classes.into_iter().collect();
    let found = classes
        .par_iter()
        .map(keep)
        .collect::<Result<Vec<_>>>()?;
    Ok(found.into_iter().flatten().collect())
}

const CKPT_MAGIC: &[u8; 4] = b"BZKC";
const CKPT_VERSION: u16 = 1;
const CKPT_HEADER_LEN: usize = 4 + 2 + 1 + 1 + 8 + 4 + 4;
const CHUNK_SEAL: u64 = 0x425a_4b43_5345_414c;

/// Sidecar ledger of completed outer values and their records.
struct Checkpoint {
    file: File,
}

impl Checkpoint {
    fn header(cfg: &EnumConfig) -> [u8; CKPT_HEADER_LEN] {
        let mut h = [0u8; CKPT_HEADER_LEN];
        h[..4].copy_from_slice(CKPT_MAGIC);
        h[4..6].copy_from_slice(&CKPT_VERSION.to_le_bytes());
        h[6] = crate::records::mode_byte(cfg.mode);
        h[7] = u8::from(cfg.emit.bazaikin_original);
        h[8..16].copy_from_slice(&cfg.mode.bound().to_le_bytes());
        h[16..20].copy_from_slice(&cfg.shard.index.to_le_bytes());
        h[20..24].copy_from_slice(&cfg.shard.total.to_le_bytes());
        h
    }

    /// Opens or creates the ledger, returning the records of completed values.
    /// A chunk cut off by a crash is discarded and rewritten on resume.
    fn open(path: &Path, cfg: &EnumConfig) -> Result<(BTreeMap<i64, Vec<ManifoldRecord>>, Self)> {
        let header = Self::header(cfg);
        let mut done = BTreeMap::new();
        let mut valid_len = 0u64;
        if path.exists() {
            let mut bytes = Vec::new();
            BufReader::new(File::open(path)?).read_to_end(&mut bytes)?;
            if bytes.len() >= CKPT_HEADER_LEN {
                if bytes[..CKPT_HEADER_LEN] != header {
                    return Err(Error::Checkpoint(format!(
                        "{} was written for a different configuration",
                        path.display()
                    )));
                }
                let mut pos = CKPT_HEADER_LEN;
                valid_len = pos as u64;
                while let Some((outer, recs, next)) = read_chunk(&bytes, pos)? {
                    if done.insert(outer, recs).is_some() {
                        return Err(Error::Checkpoint(format!("outer value {outer} recorded twice")));
                    }
                    pos = next;
                    valid_len = pos as u64;
                }
            }
        }
        let mut file = OpenOptions::new().create(true).truncate(false).write(true).open(path)?;
        file.set_len(valid_len)?;
        if valid_len == 0 {
            file.write_all(&header)?;
        }
        use std::io::Seek;
        file.seek(std::io::SeekFrom::End(0))?;
        Ok((done, Self { file }))
    }

    fn append(&mut self, outer: i64, recs: &[ManifoldRecord]) -> Result<()> {
        let mut buf = Vec::with_capacity(24 + recs.len() * RECORD_LEN);
        buf.extend_from_slice(&outer.to_le_bytes());
        buf.extend_from_slice(&(recs.len() as u64).to_le_bytes());
        for r in recs {
            encode_record(r, &mut buf);
        }
        buf.extend_from_slice(&(CHUNK_SEAL ^ outer as u64 ^ recs.len() as u64).to_le_bytes());
        self.file.write_all(&buf)?;
        self.file.sync_data()?;
        Ok(())
    }
}

type Chunk = (i64, Vec<ManifoldRecord>, usize);

fn read_chunk(bytes: &[u8], pos: usize) -> Result<Option<Chunk>> {
    let word = |at: usize| -> Option<u64> {
        bytes.get(at..at + 8).map(|b| u64::from_le_bytes(b.try_into().expect("8 bytes")))
    };
    let (Some(outer), Some(count)) = (word(pos), word(pos + 8)) else {
        return Ok(None);
    };
    let body = pos + 16;
    let end = usize::try_from(count)
        .ok()
        .and_then(|c| c.checked_mul(RECORD_LEN))
        .and_then(|n| n.checked_add(body));
    let Some(end) = end else {
        return Err(Error::Checkpoint("corrupt chunk length".into()));
    };
    let Some(seal) = word(end) else {
        return Ok(None);
    };
    if seal != CHUNK_SEAL ^ outer ^ count {
        return Err(Error::Checkpoint(format!("chunk at byte {pos} fails its seal")));
    }
    let recs = bytes[body..end]
        .chunks_exact(RECORD_LEN)
        .map(|c| decode_record(c.try_into().expect("record length")))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Checkpoint(e.to_string()))?;
    Ok(Some((outer as i64, recs, end + 8)))
}
