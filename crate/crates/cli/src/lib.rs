//! Command implementations behind the `bzk` binary.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use bazaikin::admissibility::{admissibility, freeness_failures};
use bazaikin::collide::find_collisions_in;
use bazaikin::enumerate::{brute_force_enumerate, enumerate_with, Progress};
use bazaikin::records::{self, RecordReader};
use bazaikin::tuples::{parse_tuple, presentations, to_bazaikin_prime};
use bazaikin::{
    CollisionKeySpec, EnumConfig, Manifold, ManifoldRecord, Mode, Shard, StatsSummary,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
pub const EXIT_NOT_FREE: u8 = 2;
pub const EXIT_MISMATCH: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "bzk", version, about = "Invariants, enumeration and collision search for Bazaikin spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Canonical form and all invariants of one tuple.
    Invariants {
        /// Five or six comma separated odd integers, e.g. "1,1,1,1,1".
        #[arg(allow_hyphen_values = true)]
        tuple: String,
    },
    /// Admissibility of a tuple, or a full consistency check of a record file.
    Check {
        #[arg(allow_hyphen_values = true, required_unless_present = "input")]
        tuple: Option<String>,
        #[arg(long = "in", conflicts_with = "tuple")]
        input: Option<PathBuf>,
    },
    /// Enumerate all spaces below a bound into a record file.
    Enumerate(EnumerateArgs),
    /// Merge shard outputs into one record file.
    Merge {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Bin)]
        format: Format,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Convert a record file between the binary and CSV forms.
    Convert {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
    /// Group records sharing invariants.
    Collide {
        #[arg(long = "in")]
        input: PathBuf,
        /// HOMEO, HTPY, DIFF-P, COARSE or a list such as "s,lk,p1".
        #[arg(long)]
        key: String,
        #[arg(long, default_value_t = 2)]
        min_size: usize,
        /// CSV report, one row per group member.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the enumerator (or a record file) against a brute-force box scan.
    Oracle(OracleArgs),
    /// Summary statistics of a record file.
    Stats {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Bin,
    Csv,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["pc", "general"])))]
pub struct EnumerateArgs {
    /// Positively curved spaces with s <= --max-s.
    #[arg(long, requires = "max_s")]
    pub pc: bool,
    /// All spaces with p1 <= --max-p1.
    #[arg(long, requires = "max_p1")]
    pub general: bool,
    #[arg(long)]
    pub max_s: Option<u64>,
    #[arg(long)]
    pub max_p1: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Bin)]
    pub format: Format,
    /// Number of shards the outer loop is split into.
    #[arg(long, default_value_t = 1)]
    pub shards: u32,
    /// Only run this shard; without it all shards run and are merged.
    #[arg(long)]
    pub shard: Option<u32>,
    /// Continue from the checkpoint next to --out, or overwrite an existing output.
    #[arg(long)]
    pub resume: bool,
    /// Worker threads; defaults to BZK_THREADS, then to all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("bound").required(true).args(["max_s", "max_p1"])))]
pub struct OracleArgs {
    #[arg(long)]
    pub max_abs: i64,
    #[arg(long)]
    pub max_s: Option<u64>,
    #[arg(long)]
    pub max_p1: Option<u64>,
    /// Compare this record file instead of a fresh enumeration.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
}

/// Thread count from the flag, then `BZK_THREADS`.
pub fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("BZK_THREADS") {
        Ok(v) if !v.trim().is_empty() => {
            let n: usize = v.trim().parse().with_context(|| format!("BZK_THREADS={v}"))?;
            if n == 0 {
                bail!("BZK_THREADS must be at least 1");
            }
            Ok(Some(n))
        }
        _ => Ok(None),
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<u8> {
    match cli.command {
        Command::Invariants { tuple } => cmd_invariants(&tuple, out),
        Command::Check { tuple: Some(t), .. } => cmd_check_tuple(&t, out),
        Command::Check { input: Some(p), .. } => cmd_check_file(&p, out),
        Command::Check { .. } => bail!("give a tuple or --in FILE"),
        Command::Enumerate(args) => cmd_enumerate(&args, out),
        Command::Merge { out: path, format, inputs } => cmd_merge(&inputs, &path, format, out),
        Command::Convert { input, out: path, format } => {
            let (mode, recs) = load_records(&input)?;
            write_output(&path, format, mode, &recs)?;
            writeln!(out, "wrote {} records to {}", recs.len(), path.display())?;
            Ok(EXIT_OK)
        }
        Command::Collide { input, key, min_size, out: report } => {
            cmd_collide(&input, &key, min_size, report.as_deref(), out)
        }
        Command::Oracle(args) => cmd_oracle(&args, out),
        Command::Stats { input } => cmd_stats(&input, out),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Prints the freeness failures of a non-free tuple; `None` if it is free.
fn report_not_free(q: &bazaikin::QTuple, out: &mut dyn Write) -> Result<Option<u8>> {
    let failures = freeness_failures(q);
    if failures.is_empty() {
        return Ok(None);
    }
    writeln!(out, "free=no")?;
    for (split, gcd) in failures {
        writeln!(out, "not free: gcd({split})={gcd}")?;
    }
    Ok(Some(EXIT_NOT_FREE))
}

pub fn cmd_invariants(text: &str, out: &mut dyn Write) -> Result<u8> {
    let raw = parse_tuple(text)?;
    let q = raw.canonicalize();
    writeln!(out, "canonical={q}")?;
    writeln!(out, "qbar={}", presentations(&q)[0].qbar)?;
    if let Some(code) = report_not_free(&q, out)? {
        return Ok(code);
    }
    let m = Manifold::new(q)?;
    let rec = ManifoldRecord::compute(&m, Default::default())?;
    writeln!(out, "free=yes")?;
    writeln!(out, "s={}", rec.inv.s)?;
    writeln!(out, "p1={}", rec.inv.p1)?;
    writeln!(out, "lk={}", rec.inv.lk)?;
    writeln!(out, "p2={}", rec.inv.p2)?;
    writeln!(out, "p1_mod24={}", rec.inv.p1_mod24)?;
    writeln!(out, "q_mod3={}", rec.inv.mod3_class)?;
    writeln!(out, "pc={}", yes_no(rec.flags.positively_curved()))?;
    writeln!(out, "bazaikin_original={}", yes_no(rec.flags.bazaikin_original))?;
    Ok(EXIT_OK)
}

pub fn cmd_check_tuple(text: &str, out: &mut dyn Write) -> Result<u8> {
    let q = parse_tuple(text)?.canonicalize();
    writeln!(out, "canonical={q}")?;
    if let Some(code) = report_not_free(&q, out)? {
        return Ok(code);
    }
    let flags = admissibility(&Manifold::new(q)?)?;
    writeln!(out, "free=yes")?;
    match flags.curvature {
        Some(c) => writeln!(out, "pc=yes base={} orientation={:?}", c.index, c.orientation)?,
        None => writeln!(out, "pc=no")?,
    }
    writeln!(out, "bazaikin_original={}", yes_no(flags.bazaikin_original))?;
    for p in presentations(&q) {
        let prime = match to_bazaikin_prime(&p)? {
            Some(t) => format!("{:?}", t.0),
            None => "-".into(),
        };
        writeln!(out, "presentation {}: qbar={} prime={prime}", p.base_index, p.qbar)?;
    }
    Ok(EXIT_OK)
}

/// Recomputes every record and checks order, uniqueness and the mode filter.
pub fn cmd_check_file(path: &Path, out: &mut dyn Write) -> Result<u8> {
    let (mode, recs) = load_records(path)?;
    let mut problems = 0usize;
    let mut complain = |out: &mut dyn Write, msg: String| -> Result<()> {
        problems += 1;
        if problems <= 20 {
            writeln!(out, "{msg}")?;
        }
        Ok(())
    };
    for w in recs.windows(2) {
        if w[0].sort_key() >= w[1].sort_key() {
            complain(out, format!("out of order: {} before {}", w[0].q, w[1].q))?;
        }
    }
    for r in &recs {
        let fresh = ManifoldRecord::compute(&Manifold::new(r.q)?, Default::default())?;
        if fresh != *r {
            complain(out, format!("{}: stored {:?} recomputed {:?}", r.q, r.inv, fresh.inv))?;
        } else if !mode.accepts(&r.inv, &r.flags) {
            complain(out, format!("{}: outside {mode:?}", r.q))?;
        }
    }
    writeln!(out, "checked {} records, {problems} problems", recs.len())?;
    Ok(if problems == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

/// Reads a record file in either format, detected from its first bytes.
pub fn load_records(path: &Path) -> Result<(Mode, Vec<ManifoldRecord>)> {
    let mut head = [0u8; 4];
    let n = File::open(path)
        .with_context(|| format!("opening {}", path.display()))?
        .read(&mut head)?;
    if n == 4 && &head == records::MAGIC {
        Ok(records::read_records_file(path)?)
    } else {
        Ok(records::read_csv(File::open(path)?)?)
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".tmp");
    PathBuf::from(s)
}

fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Writes through a temporary file and renames it into place.
pub fn write_output(path: &Path, format: Format, mode: Mode, recs: &[ManifoldRecord]) -> Result<()> {
    let tmp = tmp_path(path);
    let file = File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    match format {
        Format::Bin => records::write_records(file, mode, recs)?,
        Format::Csv => records::write_csv(file, mode, recs)?,
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn progress_printer(label: String, quiet: bool) -> impl Fn(&Progress) + Sync {
    let last = Mutex::new(Instant::now());
    move |p: &Progress| {
        if quiet {
            return;
        }
        let mut last = last.lock().expect("progress lock");
        if p.done < p.total && last.elapsed() < Duration::from_secs(2) {
            return;
        }
        *last = Instant::now();
        let rate = p.scanned_records as f64 / p.elapsed.as_secs_f64().max(1e-9);
        eprintln!(
            "{label}: {}/{} outer values, {} records, {:.0} records/s",
            p.done, p.total, p.scanned_records, rate
        );
    }
}

pub fn cmd_enumerate(args: &EnumerateArgs, out: &mut dyn Write) -> Result<u8> {
    let mode = match (args.pc, args.general, args.max_s, args.max_p1) {
        (true, false, Some(s_max), None) => Mode::PositivelyCurved { s_max },
        (false, true, None, Some(p1_max)) => Mode::General { p1_max },
        _ => bail!("use either --pc --max-s S or --general --max-p1 P"),
    };
    if args.out.exists() && !args.resume {
        bail!("{} exists; pass --resume to continue or overwrite it", args.out.display());
    }
    let shards: Vec<u32> = match args.shard {
        Some(i) => vec![i],
        None => (0..args.shards).collect(),
    };
    let threads = thread_count(args.threads)?;
    let mut parts = Vec::new();
    for &i in &shards {
        let mut cfg = EnumConfig::new(mode);
        cfg.shard = Shard::new(i, args.shards)?;
        cfg.threads = threads;
        cfg.validate()?;
        let ckpt = sidecar(&args.out, &format!(".ckpt{i}"));
        if ckpt.exists() && !args.resume {
            bail!("checkpoint {} exists; pass --resume", ckpt.display());
        }
        let label = format!("shard {i}/{}", args.shards);
        let recs = enumerate_with(&cfg, Some(&ckpt), &progress_printer(label, args.quiet))?;
        parts.push((mode, recs));
    }
    let (mode, recs) = records::merge_shards(parts)?;
    write_output(&args.out, args.format, mode, &recs)?;
    for &i in &shards {
        let _ = fs::remove_file(sidecar(&args.out, &format!(".ckpt{i}")));
    }
    writeln!(out, "wrote {} records to {}", recs.len(), args.out.display())?;
    Ok(EXIT_OK)
}

pub fn cmd_merge(inputs: &[PathBuf], path: &Path, format: Format, out: &mut dyn Write) -> Result<u8> {
    let parts = inputs.iter().map(|p| load_records(p)).collect::<Result<Vec<_>>>()?;
    let (mode, recs) = records::merge_shards(parts)?;
    write_output(path, format, mode, &recs)?;
    writeln!(out, "merged {} files, {} records into {}", inputs.len(), recs.len(), path.display())?;
    Ok(EXIT_OK)
}

pub fn cmd_collide(
    input: &Path,
    key: &str,
    min_size: usize,
    report_path: Option<&Path>,
    out: &mut dyn Write,
) -> Result<u8> {
    let spec: CollisionKeySpec = key.parse()?;
    let mut head = [0u8; 4];
    File::open(input)
        .with_context(|| format!("opening {}", input.display()))?
        .read_exact(&mut head)
        .map_err(|_| anyhow!("{} is too short to be a record file", input.display()))?;
    let report = if &head == records::MAGIC {
        find_collisions_in(RecordReader::open(input)?, &spec, min_size)?
    } else {
        let (_, recs) = load_records(input)?;
        find_collisions_in(recs.into_iter().map(Ok), &spec, min_size)?
    };
    write!(out, "{}", report.summary())?;
    if !report.groups.is_empty() {
        let sym = report.symmetric_function_matches();
        writeln!(
            out,
            "groups sharing σ1..σ4 of qbar: {} of {}",
            sym.iter().filter(|&&b| b).count(),
            sym.len()
        )?;
    }
    if let Some(path) = report_path {
        report.write_csv(File::create(path)?)?;
        fs::write(sidecar(path, ".summary"), report.summary())?;
    }
    Ok(EXIT_OK)
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<u8> {
    if !(1..=80).contains(&args.max_abs) {
        bail!("--max-abs must be between 1 and 80");
    }
    let mode = match (args.max_s, args.max_p1) {
        (Some(s_max), None) => Mode::PositivelyCurved { s_max },
        (None, Some(p1_max)) => Mode::General { p1_max },
        _ => bail!("give exactly one of --max-s and --max-p1"),
    };
    let fast = match &args.input {
        Some(path) => {
            let (file_mode, recs) = load_records(path)?;
            if file_mode != mode {
                bail!("{} holds {file_mode:?}, not {mode:?}", path.display());
            }
            recs
        }
        None => {
            let mut cfg = EnumConfig::new(mode);
            cfg.threads = thread_count(None)?;
            enumerate_with(&cfg, None, &|_| {})?
        }
    };
    let brute = brute_force_enumerate(args.max_abs, mode)?;
    let fast_all: HashSet<ManifoldRecord> = fast.iter().copied().collect();
    let in_box = |r: &&ManifoldRecord| r.q.max_abs() <= args.max_abs;
    let fast_box: HashSet<ManifoldRecord> = fast.iter().filter(in_box).copied().collect();
    let brute_box: HashSet<ManifoldRecord> = brute.iter().filter(in_box).copied().collect();

    let mut only_fast: Vec<_> = fast_box.difference(&brute_box).copied().collect();
    // anything the scan finds, even outside the six-entry box, must be enumerated
    let mut only_brute: Vec<_> = brute.difference(&fast_all).copied().collect();
    only_fast.sort();
    only_brute.sort();
    writeln!(
        out,
        "fast: {} records ({} within |q_i| <= {}), brute force: {} records ({} within)",
        fast.len(),
        fast_box.len(),
        args.max_abs,
        brute.len(),
        brute_box.len()
    )?;
    for r in &only_fast {
        writeln!(out, "only in fast: {} {:?}", r.q, r.inv)?;
    }
    for r in &only_brute {
        writeln!(out, "only in brute force: {} {:?}", r.q, r.inv)?;
    }
    if only_fast.is_empty() && only_brute.is_empty() {
        writeln!(out, "diff: empty")?;
        Ok(EXIT_OK)
    } else {
        writeln!(out, "diff: {} records", only_fast.len() + only_brute.len())?;
        Ok(EXIT_MISMATCH)
    }
}

pub fn cmd_stats(input: &Path, out: &mut dyn Write) -> Result<u8> {
    let (mode, recs) = load_records(input)?;
    let st = StatsSummary::from_records(&recs);
    writeln!(out, "mode: {mode:?}")?;
    writeln!(out, "{st}")?;
    writeln!(out, ">> bazaikin_original fraction: {:.4}", st.bazaikin_fraction_pc())?;
    Ok(EXIT_OK)
}
