//! Acceptance criteria, one test each. Every test prints a single
//! `[PASS]`/`[FAIL]` line (visible with `--nocapture`) before asserting.
//!
//! The positively curved run to s <= 10^6 (~1.2M records) is shared by
//! several criteria and computed once.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use bazaikin::collide::{compare_symmetric_functions, find_collisions, match_target};
use bazaikin::enumerate::{brute_force_enumerate, enumerate, enumerate_with};
use bazaikin::invariants::{full_record, symmetric_profile, Mod3Class};
use bazaikin::tuples::{from_qbar, RawTuple5};
use bazaikin::{
    CollisionKeySpec, EnumConfig, InvariantTarget, Manifold, ManifoldRecord, Mode, QTuple, StatsSummary,
};
use bazaikin_cli::{cmd_enumerate, EnumerateArgs, Format};

const S_DESK: u64 = 1_000_000;

fn verdict(id: &str, what: &str, ok: bool, detail: String) {
    println!("[{}] {id} {what}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{id} failed: {detail}");
}

fn tuple5(q: [i64; 5]) -> QTuple {
    from_qbar(&RawTuple5::new(q).unwrap()).canonicalize()
}

fn pc_run(s_max: u64) -> Vec<ManifoldRecord> {
    enumerate(&EnumConfig::new(Mode::PositivelyCurved { s_max })).unwrap()
}

fn desk_run() -> &'static [ManifoldRecord] {
    static RUN: OnceLock<Vec<ManifoldRecord>> = OnceLock::new();
    RUN.get_or_init(|| pc_run(S_DESK))
}

#[test]
fn ac01_berger_golden_record() {
    let m = Manifold::new(tuple5([1, 1, 1, 1, 1])).unwrap();
    let inv = full_record(&m).unwrap();
    let ok = m.tuple().entries() == [-5, 1, 1, 1, 1, 1]
        && (inv.s, inv.p1, inv.lk, inv.p2) == (5, 15, 2, 0);
    verdict("AC-1", "Berger golden record", ok, format!("{} {inv:?}", m.tuple()));
}

#[test]
fn ac02_first_homotopy_pair() {
    let recs = pc_run(254_941);
    let report = find_collisions(&recs, &CollisionKeySpec::htpy()).unwrap();
    let first = report.groups.first();
    let expected = vec![tuple5([-43, 45, 49, 61, 79]), tuple5([-11, 13, 45, 67, 77])];
    let ok = report.groups.len() == 1
        && first.is_some_and(|g| g.key == vec![254_941, 86_294, 7] && g.members == expected);
    verdict(
        "AC-2",
        "first (s, lk, p1 mod 24) group",
        ok,
        format!("{} groups, first {first:?}", report.groups.len()),
    );
}

#[test]
fn ac03_first_pontryagin_pair() {
    let recs = pc_run(999_437);
    let report = find_collisions(&recs, &CollisionKeySpec::diff_p()).unwrap();
    let first = report.groups.first();
    let expected = vec![tuple5([-13, 33, 41, 105, 137]), tuple5([-3, 5, 77, 83, 141])];
    let ok = first.is_some_and(|g| {
        g.key == vec![999_437, 62_271, 949_280]
            && g.members == expected
            && compare_symmetric_functions(&g.members)
    }) && report.groups.len() == 1;
    verdict("AC-3", "first (s, p1, p2) group", ok, format!("{} groups, first {first:?}", report.groups.len()));
}

#[test]
fn ac04_no_homeomorphism_collision() {
    let recs = desk_run();
    let report = find_collisions(recs, &CollisionKeySpec::homeo()).unwrap();
    verdict(
        "AC-4",
        "no (s, lk, p1) group for s <= 10^6",
        report.groups.is_empty() && recs.len() > 1_000_000,
        format!("{} records, {} groups", recs.len(), report.groups.len()),
    );
}

#[test]
fn ac05_quadruple_without_enumeration() {
    let tuples: Vec<QTuple> = [
        [-53, -11, 25, 33, 77],
        [-53, -23, 25, 49, 69],
        [-53, -3, 5, 49, 73],
        [-53, -39, 41, 49, 61],
    ]
    .into_iter()
    .map(tuple5)
    .collect();
    let distinct: HashSet<_> = tuples.iter().collect();
    let mut ok = distinct.len() == 4;
    let mut details = Vec::new();
    for q in &tuples {
        match Manifold::new(*q) {
            Ok(m) => {
                let inv = full_record(&m).unwrap();
                ok &= (inv.s, inv.lk, inv.p1, inv.p2) == (1, 0, 7807, 0);
                details.push(format!("{q}: s={} lk={} p1={} p2={}", inv.s, inv.lk, inv.p1, inv.p2));
            }
            Err(e) => {
                ok = false;
                details.push(format!("{q}: {e}"));
            }
        }
    }
    verdict("AC-5", "quadruple (1, 0, 7807, 0)", ok, details.join("; "));
}

fn oracle_agrees(mode: Mode, bound: i64) -> (bool, String) {
    let fast = enumerate(&EnumConfig::new(mode)).unwrap();
    let brute = brute_force_enumerate(bound, mode).unwrap();
    let fast_all: HashSet<_> = fast.iter().copied().collect();
    let within = |r: &&ManifoldRecord| r.q.max_abs() <= bound;
    let fast_box: HashSet<_> = fast.iter().filter(within).copied().collect();
    let brute_box: HashSet<_> = brute.iter().filter(within).copied().collect();
    let ok = fast_box == brute_box && brute.is_subset(&fast_all) && !fast_box.is_empty();
    (ok, format!("{mode:?}: fast {} ({} in box), brute {} ({} in box)", fast.len(), fast_box.len(), brute.len(), brute_box.len()))
}

#[test]
fn ac06_oracle_equivalence() {
    let (pc_ok, pc) = oracle_agrees(Mode::PositivelyCurved { s_max: 5_000 }, 25);
    let (gen_ok, gen) = oracle_agrees(Mode::General { p1_max: 1_000 }, 25);
    verdict("AC-6", "fast enumerator equals box scan at |q| <= 25", pc_ok && gen_ok, format!("{pc}; {gen}"));
}

#[test]
fn ac07_residue_sweep() {
    let mut violations = 0usize;
    for r in desk_run() {
        let inv = &r.inv;
        let sigma5 = symmetric_profile(&r.q).sigma(5);
        let s = i128::from(inv.s);
        let g = gcd(sigma5.rem_euclid(s), s);
        let class_ok = (inv.mod3_class == Mod3Class::Mixed) == (inv.p1_mod24 == 7);
        let ok = inv.s % 2 == 1
            && (inv.s % 6 == 1 || inv.s % 6 == 5)
            && inv.p1 % 8 == 7
            && (inv.p1_mod24 == 7 || inv.p1_mod24 == 15)
            && u64::from(inv.p1_mod24) == inv.p1 % 24
            && class_ok
            && g == 1;
        violations += usize::from(!ok);
    }
    verdict("AC-7", "residue invariants on s <= 10^6", violations == 0, format!("{violations} violations"));
}

fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

#[test]
fn ac08_bazaikin_fraction() {
    let st = StatsSummary::from_records(desk_run());
    let frac = st.bazaikin_fraction_pc();
    verdict(
        "AC-8",
        "bazaikin_original fraction in [0.05, 0.09]",
        (0.05..=0.09).contains(&frac),
        format!("{} / {} = {frac:.4}", st.bazaikin_original_pc, st.positively_curved),
    );
}

#[test]
fn ac09_remark_targets() {
    let cube = tuple5([5, 5, 5, 13, 23]);
    let in_run = desk_run().iter().find(|r| r.q == cube).map(|r| r.inv.s);
    let cube_hits = match_target(desk_run(), &InvariantTarget { s: Some(4913), ..Default::default() });

    let berger = full_record(&Manifold::new(tuple5([1, 1, 1, 1, 1])).unwrap()).unwrap();
    let twin = Manifold::new(tuple5([-89, 15, 21, 31, 111])).map(|m| full_record(&m).unwrap());
    let twin_ok = twin
        .as_ref()
        .is_ok_and(|inv| inv.s == 5 && InvariantTarget::homotopy_of(&berger).matches(inv));
    let ok = in_run == Some(4913) && cube_hits.contains(&cube) && twin_ok;
    verdict("AC-9", "cube order and Berger homotopy twin", ok, format!("cube s={in_run:?}, twin {twin:?}"));
}

#[test]
fn ac10_long_run_machinery() {
    // The full-scale counts are opt-in; here the checkpointed path used for
    // them must reproduce the plain run after an interruption.
    let dir = tempfile::tempdir().unwrap();
    let ckpt = dir.path().join("run.ckpt");
    let cfg = EnumConfig::new(Mode::PositivelyCurved { s_max: 254_941 });
    let plain = enumerate(&cfg).unwrap();
    let interrupted = std::panic::catch_unwind(|| {
        enumerate_with(&cfg, Some(&ckpt), &|p| {
            if p.done == 40 {
                panic!("simulated interruption");
            }
        })
    });
    let resumed = enumerate_with(&cfg, Some(&ckpt), &|_| {}).unwrap();
    verdict(
        "AC-10",
        "checkpointed enumeration resumes to the same output",
        interrupted.is_err() && resumed == plain,
        format!("{} records", resumed.len()),
    );
}

fn enumerate_to_file(dir: &Path, name: &str, threads: usize, shards: u32) -> Vec<u8> {
    let out = dir.join(name);
    let args = EnumerateArgs {
        pc: true,
        general: false,
        max_s: Some(254_941),
        max_p1: None,
        out: out.clone(),
        format: Format::Bin,
        shards,
        shard: None,
        resume: false,
        threads: Some(threads),
        quiet: true,
    };
    cmd_enumerate(&args, &mut std::io::sink()).unwrap();
    std::fs::read(out).unwrap()
}

#[test]
fn ac11_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let reference = enumerate_to_file(dir.path(), "t1.bin", 1, 1);
    let runs = [
        enumerate_to_file(dir.path(), "t2.bin", 2, 1),
        enumerate_to_file(dir.path(), "t8.bin", 8, 1),
        enumerate_to_file(dir.path(), "t1s4.bin", 1, 4),
        enumerate_to_file(dir.path(), "t8s4.bin", 8, 4),
    ];
    let ok = runs.iter().all(|r| *r == reference);
    verdict(
        "AC-11",
        "byte-identical files across threads and shards",
        ok,
        format!("{} bytes each", reference.len()),
    );
}
