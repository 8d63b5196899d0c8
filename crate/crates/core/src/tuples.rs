//! Parameter tuples and their canonical form.
//!
//! A space is given by six odd integers summing to zero. Permuting the
//! entries or negating all of them gives the same space, so every
//! computation downstream works on the unique [`QTuple`] representative:
//! entries ascending, sign chosen so that `|q[2]| <= q[3]`, and in the one
//! case where both signs qualify (`q[2] == -q[3]`) the lexicographically
//! smaller of the two sorted tuples.
//!
//! The five-integer form drops one coordinate; the dropped one is the
//! negative of the sum of the others. Each six-tuple therefore has six
//! five-integer [`Presentation`]s, one per removed coordinate.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest supported entry magnitude. Keeps every symmetric function of
/// degree <= 6 inside `i128`.
pub const MAX_ENTRY: i64 = 1 << 20;

fn check_entries(q: &[i64]) -> Result<()> {
    for (index, &value) in q.iter().enumerate() {
        if value.rem_euclid(2) == 0 {
            return Err(Error::EvenEntry { index, value });
        }
        if value.abs() > MAX_ENTRY {
            return Err(Error::OutOfRange(value));
        }
    }
    Ok(())
}

/// Six odd integers summing to zero, in no particular order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RawTuple6([i64; 6]);

impl RawTuple6 {
    pub fn new(q: [i64; 6]) -> Result<Self> {
        check_entries(&q)?;
        let sum: i64 = q.iter().sum();
        if sum != 0 {
            return Err(Error::NonZeroSum(sum));
        }
        Ok(Self(q))
    }

    pub fn entries(&self) -> [i64; 6] {
        self.0
    }

    pub fn canonicalize(&self) -> QTuple {
        canonicalize(self)
    }
}

/// Five odd integers; the implied sixth entry is minus their sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RawTuple5([i64; 5]);

impl RawTuple5 {
    pub fn new(q: [i64; 5]) -> Result<Self> {
        check_entries(&q)?;
        let implied = -q.iter().sum::<i64>();
        if implied.abs() > MAX_ENTRY {
            return Err(Error::OutOfRange(implied));
        }
        Ok(Self(q))
    }

    pub fn entries(&self) -> [i64; 5] {
        self.0
    }
}

/// Canonical representative of an equivalence class of six-tuples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QTuple([i64; 6]);

impl QTuple {
    /// Accepts `q` only if it is already canonical.
    pub fn from_canonical(q: [i64; 6]) -> Result<Self> {
        let raw = RawTuple6::new(q)?;
        let canon = canonicalize(&raw);
        if canon.0 != q {
            return Err(Error::Parse(format!(
                "{} is not in canonical form (expected {canon})",
                fmt_entries(&q)
            )));
        }
        Ok(canon)
    }

    /// Rebuilds a canonical tuple from its last five entries.
    pub fn from_tail(tail: [i64; 5]) -> Result<Self> {
        let q0 = -tail.iter().sum::<i64>();
        Self::from_canonical([q0, tail[0], tail[1], tail[2], tail[3], tail[4]])
    }

    /// Trusted constructor for the enumerator's inner loop.
    pub(crate) fn new_unchecked(q: [i64; 6]) -> Self {
        debug_assert_eq!(canonicalize(&RawTuple6(q)).0, q);
        Self(q)
    }

    pub fn entries(&self) -> [i64; 6] {
        self.0
    }

    pub fn tail(&self) -> [i64; 5] {
        let q = self.0;
        [q[1], q[2], q[3], q[4], q[5]]
    }

    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }

    pub fn raw(&self) -> RawTuple6 {
        RawTuple6(self.0)
    }
}

impl std::ops::Index<usize> for QTuple {
    type Output = i64;

    fn index(&self, i: usize) -> &i64 {
        &self.0[i]
    }
}

fn fmt_entries(q: &[i64]) -> String {
    let parts: Vec<String> = q.iter().map(i64::to_string).collect();
    format!("({})", parts.join(","))
}

impl fmt::Display for QTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_entries(&self.0))
    }
}

impl fmt::Display for RawTuple5 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_entries(&self.0))
    }
}

/// Six-integer form of a five-integer description: `(-sum, q1, .., q5)`.
pub fn from_qbar(qbar: &RawTuple5) -> RawTuple6 {
    let q = qbar.0;
    RawTuple6([-q.iter().sum::<i64>(), q[0], q[1], q[2], q[3], q[4]])
}

pub fn canonicalize(q: &RawTuple6) -> QTuple {
    let mut pos = q.0;
    pos.sort_unstable();
    let mut neg = q.0.map(|x| -x);
    neg.sort_unstable();
    let pos_ok = pos[2].abs() <= pos[3];
    let neg_ok = neg[2].abs() <= neg[3];
    let pick = match (pos_ok, neg_ok) {
        (true, true) => pos.min(neg),
        (true, false) => pos,
        (false, true) => neg,
        // One of the two sign choices always satisfies the normalization.
        (false, false) => unreachable!("no sign normalizes {:?}", q.0),
    };
    QTuple(pick)
}

/// A five-integer description obtained by removing coordinate `base_index`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub base_index: usize,
    /// The removed coordinate, equal to minus the sum of `qbar`.
    pub base: i64,
    pub qbar: RawTuple5,
}

/// All six presentations, remaining entries ascending.
pub fn presentations(q: &QTuple) -> [Presentation; 6] {
    std::array::from_fn(|base_index| {
        let mut rest = [0i64; 5];
        let mut k = 0;
        for (i, &x) in q.0.iter().enumerate() {
            if i != base_index {
                rest[k] = x;
                k += 1;
            }
        }
        rest.sort_unstable();
        Presentation {
            base_index,
            base: q.0[base_index],
            qbar: RawTuple5(rest),
        }
    })
}

/// Parameters in the original five-integer parametrization, related to a
/// presentation by `4 q'_i = q_i + q_0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BazaikinPrimeTuple(pub [i64; 5]);

/// Converts a presentation to the primed parametrization. Defined only when
/// all five entries share one residue `±1 mod 4`.
pub fn to_bazaikin_prime(p: &Presentation) -> Result<Option<BazaikinPrimeTuple>> {
    let q = p.qbar.0;
    let eps = q[0].rem_euclid(4);
    if q.iter().any(|x| x.rem_euclid(4) != eps) {
        return Ok(None);
    }
    let mut out = [0i64; 5];
    for (o, &x) in out.iter_mut().zip(&q) {
        let num = x + p.base;
        if num.rem_euclid(4) != 0 {
            return Err(Error::Theory(format!(
                "4 does not divide {x} + {} although all entries agree mod 4",
                p.base
            )));
        }
        *o = num / 4;
    }
    Ok(Some(BazaikinPrimeTuple(out)))
}

/// Parses a parameter tuple written as comma separated integers.
///
/// Five entries are the five-integer form, six entries must sum to zero.
/// Surrounding brackets, whitespace and the Unicode minus sign are accepted.
pub fn parse_tuple(text: &str) -> Result<RawTuple6> {
    let trimmed = text
        .trim()
        .trim_start_matches(['(', '['])
        .trim_end_matches([')', ']']);
    let values = trimmed
        .split(',')
        .map(|part| {
            let part = part.trim().replace('\u{2212}', "-");
            part.parse::<i64>()
                .map_err(|_| Error::Parse(format!("'{part}' is not an integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    match values.len() {
        5 => {
            let five: [i64; 5] = values.try_into().expect("length checked");
            Ok(from_qbar(&RawTuple5::new(five)?))
        }
        6 => RawTuple6::new(values.try_into().expect("length checked")),
        n => Err(Error::Parse(format!("expected 5 or 6 entries, found {n}"))),
    }
}

impl FromStr for QTuple {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_tuple(s).map(|raw| raw.canonicalize())
    }
}
