//! Summary statistics over a record set.

use std::collections::BTreeMap;
use std::fmt;

use crate::enumerate::ManifoldRecord;
use crate::invariants::Mod3Class;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct StatsSummary {
    pub total: usize,
    pub by_p1_mod24: BTreeMap<u8, usize>,
    pub by_mod3_class: BTreeMap<Mod3Class, usize>,
    pub positively_curved: usize,
    pub bazaikin_original: usize,
    /// Records that are both positively curved and satisfy the original conditions.
    pub bazaikin_original_pc: usize,
    pub s_range: Option<(u64, u64)>,
    pub p1_range: Option<(u64, u64)>,
    pub s_mod6: BTreeMap<u8, usize>,
}

fn widen(range: &mut Option<(u64, u64)>, v: u64) {
    *range = Some(match *range {
        None => (v, v),
        Some((lo, hi)) => (lo.min(v), hi.max(v)),
    });
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl StatsSummary {
    pub fn from_records<'a>(recs: impl IntoIterator<Item = &'a ManifoldRecord>) -> Self {
        let mut st = Self::default();
        for r in recs {
            st.add(r);
        }
        st
    }

    pub fn add(&mut self, r: &ManifoldRecord) {
        self.total += 1;
        *self.by_p1_mod24.entry(r.inv.p1_mod24).or_default() += 1;
        *self.by_mod3_class.entry(r.inv.mod3_class).or_default() += 1;
        let pc = r.flags.positively_curved();
        self.positively_curved += usize::from(pc);
        self.bazaikin_original += usize::from(r.flags.bazaikin_original);
        self.bazaikin_original_pc += usize::from(pc && r.flags.bazaikin_original);
        widen(&mut self.s_range, r.inv.s);
        widen(&mut self.p1_range, r.inv.p1);
        *self.s_mod6.entry((r.inv.s % 6) as u8).or_default() += 1;
    }

    /// Share of positively curved records meeting the original conditions.
    pub fn bazaikin_fraction_pc(&self) -> f64 {
        ratio(self.bazaikin_original_pc, self.positively_curved)
    }

    /// Share of all records meeting the original conditions.
    pub fn bazaikin_fraction_all(&self) -> f64 {
        ratio(self.bazaikin_original, self.total)
    }
}

impl fmt::Display for StatsSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "records: {}", self.total)?;
        writeln!(f, "positively curved: {}", self.positively_curved)?;
        if let Some((lo, hi)) = self.s_range {
            writeln!(f, "s range: {lo}..={hi}")?;
        }
        if let Some((lo, hi)) = self.p1_range {
            writeln!(f, "p1 range: {lo}..={hi}")?;
        }
        for (r, n) in &self.by_p1_mod24 {
            writeln!(f, "p1 mod 24 = {r}: {n}")?;
        }
        for (c, n) in &self.by_mod3_class {
            writeln!(f, "q mod 3 = {c}: {n}")?;
        }
        for (r, n) in &self.s_mod6 {
            writeln!(f, "s mod 6 = {r}: {n}")?;
        }
        writeln!(
            f,
            "bazaikin_original among positively curved: {} / {} = {:.4}",
            self.bazaikin_original_pc,
            self.positively_curved,
            self.bazaikin_fraction_pc()
        )?;
        write!(
            f,
            "bazaikin_original among all records: {} / {} = {:.4}",
            self.bazaikin_original,
            self.total,
            self.bazaikin_fraction_all()
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::{enumerate, EnumConfig, Mode};

    #[test]
    fn counts_are_consistent() {
        let recs = enumerate(&EnumConfig::new(Mode::General { p1_max: 1500 })).unwrap();
        let st = StatsSummary::from_records(&recs);
        assert_eq!(st.total, recs.len());
        assert_eq!(st.by_p1_mod24.values().sum::<usize>(), st.total);
        assert_eq!(st.by_mod3_class.values().sum::<usize>(), st.total);
        assert_eq!(st.s_mod6.values().sum::<usize>(), st.total);
        assert!(st.by_p1_mod24.keys().all(|r| *r == 7 || *r == 15));
        assert!(st.s_mod6.keys().all(|r| *r == 1 || *r == 5));
        for frac in [st.bazaikin_fraction_pc(), st.bazaikin_fraction_all()] {
            assert!((0.0..=1.0).contains(&frac));
        }
        assert!(st.positively_curved > 0 && st.positively_curved < st.total);
    }

    #[test]
    fn empty_summary() {
        let st = StatsSummary::from_records(&[]);
        assert_eq!(st.total, 0);
        assert_eq!(st.bazaikin_fraction_pc(), 0.0);
        assert!(st.to_string().contains("records: 0"));
    }
}
