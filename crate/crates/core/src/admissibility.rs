//! Freeness, positive curvature and the original Bazaikin conditions.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::tuples::{presentations, to_bazaikin_prime, QTuple};

/// Two disjoint unordered index pairs `{a, b}` and `{c, d}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Split {
    pub first: (usize, usize),
    pub second: (usize, usize),
}

const SUBSCRIPTS: [char; 6] = ['₀', '₁', '₂', '₃', '₄', '₅'];

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.first;
        let (c, d) = self.second;
        write!(
            f,
            "q{}+q{}, q{}+q{}",
            SUBSCRIPTS[a], SUBSCRIPTS[b], SUBSCRIPTS[c], SUBSCRIPTS[d]
        )
    }
}

/// The 45 ways to pick two disjoint pairs from six indices, in lexicographic
/// order of `(a, b, c, d)` with `a < b`, `c < d`, `a < c`.
pub fn pair_splits() -> &'static [Split; 45] {
    static SPLITS: OnceLock<[Split; 45]> = OnceLock::new();
    SPLITS.get_or_init(|| {
        let mut out = Vec::with_capacity(45);
        for a in 0..6 {
            for b in a + 1..6 {
                for c in a + 1..6 {
                    for d in c + 1..6 {
                        if c != b && d != b {
                            out.push(Split { first: (a, b), second: (c, d) });
                        }
                    }
                }
            }
        }
        out.try_into().expect("45 splits")
    })
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a as i64
}

/// Every split whose pair sums have gcd other than 2, with that gcd.
pub fn freeness_failures(q: &QTuple) -> Vec<(Split, i64)> {
    pair_splits()
        .iter()
        .filter_map(|s| {
            let g = gcd(q[s.first.0] + q[s.first.1], q[s.second.0] + q[s.second.1]);
            (g != 2).then_some((*s, g))
        })
        .collect()
}

/// Whether the circle action defined by `q` is free.
pub fn is_free(q: &QTuple) -> bool {
    pair_splits()
        .iter()
        .all(|s| gcd(q[s.first.0] + q[s.first.1], q[s.second.0] + q[s.second.1]) == 2)
}

/// A canonical tuple whose action is free, i.e. one that defines a manifold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Manifold(QTuple);

impl Manifold {
    pub fn new(q: QTuple) -> Result<Self> {
        match freeness_failures(&q).first() {
            None => Ok(Self(q)),
            Some(&(split, gcd)) => Err(Error::NotFree { split, gcd }),
        }
    }

    pub(crate) fn new_unchecked(q: QTuple) -> Self {
        debug_assert!(is_free(&q));
        Self(q)
    }

    pub fn tuple(&self) -> &QTuple {
        &self.0
    }
}

impl fmt::Display for Manifold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// All pair sums away from the base index are positive.
    Positive,
    Negative,
}

/// The base index of the positively curved presentation and the common sign
/// of the pair sums.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CurvatureBase {
    pub index: usize,
    pub orientation: Orientation,
}

/// Searches all six presentations for one whose metric is positively
/// curved: every `q_i + q_j` with `i, j != i0` has the same strict sign.
pub fn positively_curved(m: &Manifold) -> Result<Option<CurvatureBase>> {
    let q = m.tuple().entries();
    let mut found: Option<CurvatureBase> = None;
    for i0 in 0..6 {
        let sums = (0..6)
            .filter(|&i| i != i0)
            .flat_map(|i| ((i + 1)..6).filter(move |&j| j != i0).map(move |j| q[i] + q[j]));
        let (mut all_pos, mut all_neg) = (true, true);
        for s in sums {
            all_pos &= s > 0;
            all_neg &= s < 0;
        }
        let orientation = match (all_pos, all_neg) {
            (true, _) => Orientation::Positive,
            (_, true) => Orientation::Negative,
            _ => continue,
        };
        if let Some(prev) = found {
            return Err(Error::Theory(format!(
                "{} is positively curved at base {} and at base {i0}",
                m, prev.index
            )));
        }
        found = Some(CurvatureBase { index: i0, orientation });
    }
    Ok(found)
}

/// Positive curvature read off the canonical ordering: `q1 + q2 > 0`.
pub fn positively_curved_canonical(m: &Manifold) -> bool {
    let q = m.tuple();
    q[1] + q[2] > 0
}

/// Whether the space satisfies the conditions of Bazaikin's original
/// construction: some presentation can be rewritten in the primed
/// parametrization (all five entries agree mod 4) and, in that presentation,
/// all five entries are positive. The latter is the translation of the
/// original positivity condition through `4 q'_i = q_i + q_0`.
///
/// Quantifies over all six presentations and both global signs, so the
/// answer depends only on the space. For a positively curved canonical tuple
/// the only candidate is the presentation dropping `q0`.
pub fn bazaikin_original(m: &Manifold) -> Result<bool> {
    for p in presentations(m.tuple()) {
        if to_bazaikin_prime(&p)?.is_none() {
            continue;
        }
        let qbar = p.qbar.entries();
        if qbar.iter().all(|&x| x > 0) || qbar.iter().all(|&x| x < 0) {
            return Ok(true);
        }
    }
    Ok(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibilityFlags {
    pub free: bool,
    /// Present exactly when the space carries a positively curved metric.
    pub curvature: Option<CurvatureBase>,
    pub bazaikin_original: bool,
}

impl AdmissibilityFlags {
    pub fn positively_curved(&self) -> bool {
        self.curvature.is_some()
    }
}

pub fn admissibility(m: &Manifold) -> Result<AdmissibilityFlags> {
    Ok(AdmissibilityFlags {
        free: true,
        curvature: positively_curved(m)?,
        bazaikin_original: bazaikin_original(m)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tuples::{from_qbar, RawTuple5, RawTuple6};
    use std::collections::HashSet;

    fn canon(q: [i64; 6]) -> QTuple {
        RawTuple6::new(q).unwrap().canonicalize()
    }

    fn manifold(q: [i64; 6]) -> Manifold {
        Manifold::new(canon(q)).unwrap()
    }

    fn from5(q: [i64; 5]) -> QTuple {
        from_qbar(&RawTuple5::new(q).unwrap()).canonicalize()
    }

    #[test]
    fn split_table() {
        let splits = pair_splits();
        assert_eq!(splits.len(), 45);
        assert!(splits.contains(&Split { first: (0, 1), second: (2, 3) }));
        let mut seen = HashSet::new();
        for s in splits.iter() {
            let mut idx = [s.first.0, s.first.1, s.second.0, s.second.1];
            idx.sort_unstable();
            assert!(idx.windows(2).all(|w| w[0] < w[1]));
            let key = if s.first < s.second { (s.first, s.second) } else { (s.second, s.first) };
            assert!(seen.insert(key), "duplicate split {s:?}");
        }
    }

    /// Brute force over all of S6, exactly as the condition is written.
    fn free_by_permutations(q: [i64; 6]) -> bool {
        let mut idx = [0usize, 1, 2, 3, 4, 5];
        let mut ok = true;
        permute(&mut idx, 0, &mut |t| {
            ok &= gcd(q[t[0]] + q[t[1]], q[t[2]] + q[t[3]]) == 2;
        });
        ok
    }

    fn permute(idx: &mut [usize; 6], k: usize, f: &mut impl FnMut(&[usize; 6])) {
        if k == 6 {
            f(idx);
            return;
        }
        for i in k..6 {
            idx.swap(k, i);
            permute(idx, k + 1, f);
            idx.swap(k, i);
        }
    }

    #[test]
    fn freeness_examples() {
        assert!(is_free(&canon([-5, 1, 1, 1, 1, 1])));
        assert!(!is_free(&canon([-9, 1, 1, 1, 3, 3])));
        assert!(is_free(&canon([-3, -1, 1, 1, 1, 1])));
        let fails = freeness_failures(&canon([-9, 1, 1, 1, 3, 3]));
        assert!(fails.contains(&(Split { first: (2, 4), second: (3, 5) }, 4)));
    }

    #[test]
    fn freeness_matches_permutation_scan() {
        let odd: Vec<i64> = (-11..=11).step_by(2).collect();
        let mut n = 0;
        for (i1, &a) in odd.iter().enumerate() {
            for (i2, &b) in odd.iter().enumerate().skip(i1) {
                for (i3, &c) in odd.iter().enumerate().skip(i2) {
                    for (i4, &d) in odd.iter().enumerate().skip(i3) {
                        for &e in odd.iter().skip(i4) {
                            let q = [-(a + b + c + d + e), a, b, c, d, e];
                            assert_eq!(is_free(&canon(q)), free_by_permutations(q), "{q:?}");
                            n += 1;
                        }
                    }
                }
            }
        }
        assert!(n > 1000);
    }

    #[test]
    fn not_free_error_names_a_split() {
        let err = Manifold::new(canon([-9, 1, 1, 1, 3, 3])).unwrap_err();
        assert!(matches!(err, Error::NotFree { gcd: 4, .. }));
    }

    #[test]
    fn curvature_examples() {
        let berger = manifold([-5, 1, 1, 1, 1, 1]);
        assert_eq!(
            positively_curved(&berger).unwrap(),
            Some(CurvatureBase { index: 0, orientation: Orientation::Positive })
        );
        assert!(positively_curved_canonical(&berger));

        let flat = manifold([-3, -1, 1, 1, 1, 1]);
        assert_eq!(positively_curved(&flat).unwrap(), None);
        assert!(!positively_curved_canonical(&flat));

        let first_pair = Manifold::new(from5([-11, 13, 45, 67, 77])).unwrap();
        assert_eq!(first_pair.tuple().entries(), [-191, -11, 13, 45, 67, 77]);
        assert_eq!(
            positively_curved(&first_pair).unwrap(),
            Some(CurvatureBase { index: 0, orientation: Orientation::Positive })
        );
    }

    #[test]
    fn curvature_criteria_agree_exhaustively() {
        // every canonical tuple with |q_i| <= 25
        let mut checked = 0;
        let mut curved = 0;
        for q1 in (-25i64..=25).step_by(2) {
            for q2 in (q1..=25).step_by(2) {
                for q3 in (q2.abs().max(q2)..=25).step_by(2) {
                    for q4 in (q3..=25).step_by(2) {
                        for q5 in (q4..=25).step_by(2) {
                            let q0 = -(q1 + q2 + q3 + q4 + q5);
                            if q0 > q1 || q0 < -25 {
                                continue;
                            }
                            let q = [q0, q1, q2, q3, q4, q5];
                            let c = canon(q);
                            if c.entries() != q {
                                continue;
                            }
                            let Ok(m) = Manifold::new(c) else { continue };
                            checked += 1;
                            let pc = positively_curved(&m).unwrap();
                            assert_eq!(pc.is_some(), positively_curved_canonical(&m), "{m}");
                            curved += pc.is_some() as usize;
                        }
                    }
                }
            }
        }
        assert!(checked > 500 && curved > 20, "{checked} {curved}");
    }

    #[test]
    fn free_tuples_are_one_off_mod_4() {
        for q1 in (-21i64..=21).step_by(2) {
            for q2 in (q1..=21).step_by(2) {
                for q3 in (q2.abs()..=21).step_by(2) {
                    for q4 in (q3..=21).step_by(2) {
                        for q5 in (q4..=21).step_by(2) {
                            let q = [-(q1 + q2 + q3 + q4 + q5), q1, q2, q3, q4, q5];
                            if !is_free(&canon(q)) {
                                continue;
                            }
                            let ones = q.iter().filter(|x| x.rem_euclid(4) == 1).count();
                            assert!(ones == 1 || ones == 5, "{q:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bazaikin_original_examples() {
        assert!(bazaikin_original(&manifold([-5, 1, 1, 1, 1, 1])).unwrap());
        // mixed residues mod 4 in every presentation but the one dropping 67
        let m = Manifold::new(from5([-11, 13, 45, 67, 77])).unwrap();
        assert!(!bazaikin_original(&m).unwrap());
    }

    #[test]
    fn bazaikin_original_needs_positive_entries() {
        use crate::enumerate::{enumerate, EnumConfig, Mode};
        let recs = enumerate(&EnumConfig::new(Mode::PositivelyCurved { s_max: 50_000 })).unwrap();
        let (mut with_negative, mut all_positive) = (0, 0);
        for r in &recs {
            let m = Manifold::new(r.q).unwrap();
            let rewritable = to_bazaikin_prime(&presentations(&r.q)[0]).unwrap().is_some();
            if !rewritable {
                continue;
            }
            if r.q[1] < 0 {
                with_negative += 1;
                assert!(!bazaikin_original(&m).unwrap(), "{m}");
            } else {
                all_positive += 1;
                assert!(bazaikin_original(&m).unwrap(), "{m}");
            }
        }
        assert!(with_negative > 0 && all_positive > 0);
    }
}
