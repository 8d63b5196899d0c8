//! Grouping of manifolds that share chosen invariants.
//!
//! Input arrives sorted by `s`. When the key contains `s`, records are
//! grouped one equal-`s` stratum at a time, so memory is bounded by the
//! largest stratum. Keys without `s` fall back to grouping the whole input.
//!
//! A group of `k` members counts as one `k`-tuplet in the histogram; the
//! number of matching pairs, `Σ C(k, 2)`, is reported separately.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::enumerate::ManifoldRecord;
use crate::error::{Error, Result};
use crate::invariants::{elementary_symmetric, InvariantRecord};
use crate::tuples::QTuple;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KeyComponent {
    S,
    P1,
    P1Mod24,
    Lk,
    P2,
}

impl KeyComponent {
    pub fn name(&self) -> &'static str {
        match self {
            KeyComponent::S => "s",
            KeyComponent::P1 => "p1",
            KeyComponent::P1Mod24 => "p1_mod24",
            KeyComponent::Lk => "lk",
            KeyComponent::P2 => "p2",
        }
    }

    pub fn value(&self, inv: &InvariantRecord) -> u64 {
        match self {
            KeyComponent::S => inv.s,
            KeyComponent::P1 => inv.p1,
            KeyComponent::P1Mod24 => u64::from(inv.p1_mod24),
            KeyComponent::Lk => inv.lk,
            KeyComponent::P2 => inv.p2,
        }
    }
}

impl FromStr for KeyComponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "s" => KeyComponent::S,
            "p1" => KeyComponent::P1,
            "p1_mod24" | "p1mod24" => KeyComponent::P1Mod24,
            "lk" => KeyComponent::Lk,
            "p2" => KeyComponent::P2,
            other => return Err(Error::Parse(format!("unknown key component '{other}'"))),
        })
    }
}

/// Which invariants two manifolds must share to collide.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CollisionKeySpec {
    components: Vec<KeyComponent>,
}

impl CollisionKeySpec {
    pub fn new(components: Vec<KeyComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Parse("collision key needs at least one component".into()));
        }
        let mut seen = components.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != components.len() {
            return Err(Error::Parse("collision key repeats a component".into()));
        }
        Ok(Self { components })
    }

    /// `(s, lk, p1)`, the homeomorphism invariants.
    pub fn homeo() -> Self {
        Self { components: vec![KeyComponent::S, KeyComponent::Lk, KeyComponent::P1] }
    }

    /// `(s, lk, p1 mod 24)`, the homotopy invariants.
    pub fn htpy() -> Self {
        Self { components: vec![KeyComponent::S, KeyComponent::Lk, KeyComponent::P1Mod24] }
    }

    /// `(s, p1, p2)`.
    pub fn diff_p() -> Self {
        Self { components: vec![KeyComponent::S, KeyComponent::P1, KeyComponent::P2] }
    }

    /// `(s, p1)`.
    pub fn coarse() -> Self {
        Self { components: vec![KeyComponent::S, KeyComponent::P1] }
    }

    pub fn components(&self) -> &[KeyComponent] {
        &self.components
    }

    pub fn key(&self, inv: &InvariantRecord) -> Vec<u64> {
        self.components.iter().map(|c| c.value(inv)).collect()
    }

    fn stratified(&self) -> bool {
        self.components.contains(&KeyComponent::S)
    }
}

impl FromStr for CollisionKeySpec {
    type Err = Error;

    /// A preset name (`HOMEO`, `HTPY`, `DIFF-P`, `COARSE`) or a comma list
    /// of components such as `s,lk,p1`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().replace('_', "-").as_str() {
            "HOMEO" => Ok(Self::homeo()),
            "HTPY" => Ok(Self::htpy()),
            "DIFF-P" | "DIFFP" => Ok(Self::diff_p()),
            "COARSE" => Ok(Self::coarse()),
            _ => Self::new(s.split(',').map(str::parse).collect::<Result<_>>()?),
        }
    }
}

impl fmt::Display for CollisionKeySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.components.iter().map(KeyComponent::name).collect();
        write!(f, "({})", names.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionGroup {
    pub key: Vec<u64>,
    /// Canonical tuples, ascending.
    pub members: Vec<QTuple>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionReport {
    pub spec: CollisionKeySpec,
    pub min_size: usize,
    /// Sorted by key.
    pub groups: Vec<CollisionGroup>,
    /// Number of groups of each size.
    pub histogram: BTreeMap<usize, usize>,
    pub records_seen: u64,
}

impl CollisionReport {
    /// Matching pairs, counting a `k`-group as `C(k, 2)` pairs.
    pub fn pair_count(&self) -> u64 {
        self.groups.iter().map(|g| (g.members.len() * (g.members.len() - 1) / 2) as u64).sum()
    }

    /// For each group size, the first group of that size in key order.
    pub fn first_by_size(&self) -> BTreeMap<usize, &CollisionGroup> {
        let mut out = BTreeMap::new();
        for g in &self.groups {
            out.entry(g.members.len()).or_insert(g);
        }
        out
    }

    /// One row per group member.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut w = std::io::BufWriter::new(w);
        let keys: Vec<_> = self.spec.components().iter().map(KeyComponent::name).collect();
        writeln!(w, "group,size,{},q0,q1,q2,q3,q4,q5", keys.join(","))?;
        for (id, g) in self.groups.iter().enumerate() {
            let key: Vec<String> = g.key.iter().map(u64::to_string).collect();
            for m in &g.members {
                let q: Vec<String> = m.entries().iter().map(i64::to_string).collect();
                writeln!(w, "{id},{},{},{}", g.members.len(), key.join(","), q.join(","))?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "key: {}", self.spec);
        let _ = writeln!(out, "records: {}", self.records_seen);
        if self.groups.is_empty() {
            let _ = writeln!(out, "no collisions");
            return out;
        }
        let _ = writeln!(out, "groups: {}", self.groups.len());
        for (size, n) in &self.histogram {
            let _ = writeln!(out, "  size {size}: {n}");
        }
        let _ = writeln!(out, "matching pairs: {}", self.pair_count());
        for (size, g) in self.first_by_size() {
            let members: Vec<String> = g.members.iter().map(|q| q.to_string()).collect();
            let _ = writeln!(out, "first group of size {size}: key {:?} members {}", g.key, members.join(" "));
        }
        out
    }
}

fn flush_stratum(
    buckets: &mut BTreeMap<Vec<u64>, Vec<QTuple>>,
    min_size: usize,
    groups: &mut Vec<CollisionGroup>,
) -> Result<()> {
    for (key, mut members) in std::mem::take(buckets) {
        if members.len() < min_size.max(2) {
            continue;
        }
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Format(format!("{} occurs twice in the input", w[0])));
        }
        groups.push(CollisionGroup { key, members });
    }
    Ok(())
}

/// Streaming grouping over records sorted by `s`.
pub fn find_collisions_in<I>(records: I, spec: &CollisionKeySpec, min_size: usize) -> Result<CollisionReport>
where
    I: IntoIterator<Item = Result<ManifoldRecord>>,
{
    let stratified = spec.stratified();
    let mut buckets: BTreeMap<Vec<u64>, Vec<QTuple>> = BTreeMap::new();
    let mut groups = Vec::new();
    let mut current_s: Option<u64> = None;
    let mut seen = 0u64;
    for rec in records {
        let rec = rec?;
        seen += 1;
        if let Some(prev) = current_s {
            if rec.inv.s < prev {
                return Err(Error::Unsorted { prev, next: rec.inv.s });
            }
            if stratified && rec.inv.s != prev {
                flush_stratum(&mut buckets, min_size, &mut groups)?;
            }
        }
        current_s = Some(rec.inv.s);
        buckets.entry(spec.key(&rec.inv)).or_default().push(rec.q);
    }
    flush_stratum(&mut buckets, min_size, &mut groups)?;
    groups.sort_by(|a, b| a.key.cmp(&b.key).then_with(|| a.members.cmp(&b.members)));

    let mut histogram = BTreeMap::new();
    for g in &groups {
        *histogram.entry(g.members.len()).or_default() += 1;
    }
    Ok(CollisionReport { spec: spec.clone(), min_size: min_size.max(2), groups, histogram, records_seen: seen })
}

pub fn find_collisions(records: &[ManifoldRecord], spec: &CollisionKeySpec) -> Result<CollisionReport> {
    find_collisions_in(records.iter().copied().map(Ok), spec, 2)
}

/// Whether all members share `σ1..σ4` of their five-integer form, the
/// canonical tuple with its smallest entry `q0` removed.
pub fn compare_symmetric_functions(members: &[QTuple]) -> bool {
    let low = |q: &QTuple| {
        let e = elementary_symmetric(&q.tail());
        [e[0], e[1], e[2], e[3]]
    };
    match members.split_first() {
        None => true,
        Some((first, rest)) => {
            let reference = low(first);
            rest.iter().all(|q| low(q) == reference)
        }
    }
}

impl CollisionReport {
    /// [`compare_symmetric_functions`] for every group, in group order.
    pub fn symmetric_function_matches(&self) -> Vec<bool> {
        self.groups.iter().map(|g| compare_symmetric_functions(&g.members)).collect()
    }
}

/// Target values for [`match_target`]; unset components match anything.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct InvariantTarget {
    pub s: Option<u64>,
    pub p1: Option<u64>,
    pub p1_mod24: Option<u8>,
    pub lk: Option<u64>,
    pub p2: Option<u64>,
}

impl InvariantTarget {
    pub fn homotopy_of(inv: &InvariantRecord) -> Self {
        Self { s: Some(inv.s), lk: Some(inv.lk), p1_mod24: Some(inv.p1_mod24), ..Self::default() }
    }

    pub fn matches(&self, inv: &InvariantRecord) -> bool {
        self.s.is_none_or(|v| v == inv.s)
            && self.p1.is_none_or(|v| v == inv.p1)
            && self.p1_mod24.is_none_or(|v| v == inv.p1_mod24)
            && self.lk.is_none_or(|v| v == inv.lk)
            && self.p2.is_none_or(|v| v == inv.p2)
    }
}

pub fn match_target<'a>(
    records: impl IntoIterator<Item = &'a ManifoldRecord>,
    target: &InvariantTarget,
) -> Vec<QTuple> {
    records.into_iter().filter(|r| target.matches(&r.inv)).map(|r| r.q).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate, EnumConfig, Mode};
    use crate::tuples::{from_qbar, RawTuple5};

    fn tuple5(q: [i64; 5]) -> QTuple {
        from_qbar(&RawTuple5::new(q).unwrap()).canonicalize()
    }

    fn pc(s_max: u64) -> Vec<ManifoldRecord> {
        enumerate(&EnumConfig::new(Mode::PositivelyCurved { s_max })).unwrap()
    }

    #[test]
    fn presets_parse() {
        assert_eq!("HOMEO".parse::<CollisionKeySpec>().unwrap(), CollisionKeySpec::homeo());
        assert_eq!("diff-p".parse::<CollisionKeySpec>().unwrap(), CollisionKeySpec::diff_p());
        assert_eq!(
            "s, p1".parse::<CollisionKeySpec>().unwrap().components(),
            CollisionKeySpec::coarse().components()
        );
        assert!("s,s".parse::<CollisionKeySpec>().is_err());
        assert!("".parse::<CollisionKeySpec>().is_err());
        assert!("s,q7".parse::<CollisionKeySpec>().is_err());
    }

    #[test]
    fn refinement_never_merges_groups() {
        let recs = pc(200_000);
        let coarse = find_collisions(&recs, &CollisionKeySpec::coarse()).unwrap();
        let homeo = find_collisions(&recs, &CollisionKeySpec::homeo()).unwrap();
        assert!(!coarse.groups.is_empty());
        for g in &homeo.groups {
            assert!(coarse
                .groups
                .iter()
                .any(|c| g.members.iter().all(|m| c.members.contains(m))));
        }
        // and every group really shares its key
        for g in &coarse.groups {
            for m in &g.members {
                let r = recs.iter().find(|r| r.q == *m).unwrap();
                assert_eq!(CollisionKeySpec::coarse().key(&r.inv), g.key);
            }
        }
    }

    #[test]
    fn stratified_equals_global_grouping() {
        let recs = pc(100_000);
        let spec = CollisionKeySpec::coarse();
        let streamed = find_collisions(&recs, &spec).unwrap();
        // same key without relying on strata: group by p1 and s through an unstratified spec
        let mut by_key: BTreeMap<Vec<u64>, Vec<QTuple>> = BTreeMap::new();
        for r in &recs {
            by_key.entry(spec.key(&r.inv)).or_default().push(r.q);
        }
        let expected: Vec<_> = by_key.into_iter().filter(|(_, v)| v.len() >= 2).collect();
        assert_eq!(streamed.groups.len(), expected.len());
        for (g, (k, v)) in streamed.groups.iter().zip(expected) {
            assert_eq!(g.key, k);
            assert_eq!(g.members, v);
        }
        let pairs: u64 = streamed.histogram.iter().map(|(k, n)| (k * (k - 1) / 2 * n) as u64).sum();
        assert_eq!(pairs, streamed.pair_count());
    }

    #[test]
    fn unstratified_key_groups_whole_input() {
        let recs = pc(20_000);
        let spec: CollisionKeySpec = "p1_mod24".parse().unwrap();
        let report = find_collisions(&recs, &spec).unwrap();
        assert_eq!(report.groups.len(), 2);
        assert_eq!(report.groups.iter().map(|g| g.members.len()).sum::<usize>(), recs.len());
    }

    #[test]
    fn unsorted_input_is_refused() {
        let mut recs = pc(5_000);
        recs.reverse();
        assert!(matches!(
            find_collisions(&recs, &CollisionKeySpec::coarse()),
            Err(Error::Unsorted { .. })
        ));
    }

    #[test]
    fn duplicates_are_refused() {
        let recs = pc(5_000);
        let mut doubled = vec![recs[0], recs[0]];
        doubled.extend_from_slice(&recs[1..]);
        assert!(find_collisions(&doubled, &CollisionKeySpec::coarse()).is_err());
    }

    #[test]
    fn symmetric_function_comparison() {
        assert!(compare_symmetric_functions(&[
            tuple5([-13, 33, 41, 105, 137]),
            tuple5([-3, 5, 77, 83, 141])
        ]));
        assert!(!compare_symmetric_functions(&[
            tuple5([-123, 149, 197, 201, 525]),
            tuple5([-19, 21, 75, 437, 437])
        ]));
    }

    #[test]
    fn targets() {
        let recs = pc(4913);
        let cube = match_target(&recs, &InvariantTarget { s: Some(4913), ..Default::default() });
        assert!(cube.contains(&tuple5([5, 5, 5, 13, 23])));
        assert_eq!(match_target(&recs, &InvariantTarget::default()).len(), recs.len());
    }

    #[test]
    fn report_outputs() {
        let recs = pc(100_000);
        let report = find_collisions(&recs, &CollisionKeySpec::coarse()).unwrap();
        let mut csv = Vec::new();
        report.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        let rows = text.lines().count() - 1;
        assert_eq!(rows, report.groups.iter().map(|g| g.members.len()).sum::<usize>());
        assert!(report.summary().contains("matching pairs"));
        let empty = find_collisions(&recs[..1], &CollisionKeySpec::coarse()).unwrap();
        assert!(empty.summary().contains("no collisions"));
    }
}
