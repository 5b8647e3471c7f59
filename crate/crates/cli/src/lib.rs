//! Command implementations behind the `qvf` binary.

pub mod manifest;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use qvf_core::assemble::{
    checkpoint_path, lemma8_databases, verify_quaternary, verify_quaternary_checkpointed, ArrayCache, ArraySource,
    Engine, QuaternaryOptions, QuaternaryReport,
};
use qvf_core::gf::check_axioms;
use qvf_core::lift::{hensel_lift, IntegerForm};
use qvf_core::report::{lemma8_report, VerificationReport};
use qvf_core::search::{
    enumerate_survivors, lemma8_template, Normalization, SearchOptions, Shard, ShapeRun, SurvivorDb, SweepStats,
};
use qvf_core::{forms::sharp_f7_example, FieldSpec, Form, Monomial, ProjectivePoint, TripleShape};

use manifest::{manifest_path, RunManifest};

/// Environment variable naming the default checkpoint directory.
pub const CHECKPOINT_ENV: &str = "QVF_CHECKPOINT_DIR";

/// Exit code when every judged claim holds.
pub const EXIT_PASS: i32 = 0;
/// Exit code when some claim is contradicted.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for bad input or I/O trouble.
pub const EXIT_ERROR: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "qvf", version, about = "Non-singular zero certificates for quintic forms over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exhaustively check the field axioms for each order.
    FieldCheck {
        #[arg(long = "q", required = true, num_args = 1.., value_delimiter = ',')]
        q: Vec<u32>,
    },
    /// Sweep the ternary shapes and judge the survivors.
    VerifyTernary(TernaryArgs),
    /// Assemble quaternary candidates from ternary survivors and sweep them.
    VerifyQuaternary(QuaternaryArgs),
    /// Audit the quintic over 𝔽_7 with exactly four singular zeros.
    CheckPaperExample {
        /// Replace a coefficient first, e.g. `0 3 2 : 3`.
        #[arg(long)]
        perturb: Option<String>,
    },
    /// Zero census of a form file.
    CountZeros {
        #[arg(long)]
        form: PathBuf,
        #[arg(long)]
        witnesses: bool,
    },
    /// Hensel-lift a zero of an integer form modulo p to precision p^k.
    Lift {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        form: PathBuf,
        /// Comma-separated residues mod p.
        #[arg(long)]
        point: String,
        #[arg(long)]
        prec: u32,
    },
    /// Merge shard survivor databases or shard quaternary reports.
    Merge {
        #[arg(long)]
        out: PathBuf,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Recompute the output digests listed in a run manifest.
    VerifyManifest { manifest: PathBuf },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long = "q")]
    q: u32,
    /// Run only slice `i/N` of the work.
    #[arg(long, conflicts_with = "shards")]
    shard: Option<String>,
    /// Run all `N` slices one after another, checkpointing each.
    #[arg(long, default_value_t = 1)]
    shards: u32,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Checkpoint directory; defaults to `$QVF_CHECKPOINT_DIR`.
    #[arg(long)]
    resume: Option<PathBuf>,
    #[arg(long, default_value_t = default_jobs())]
    jobs: usize,
}

#[derive(Args, Debug)]
struct TernaryArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = ["t1", "t2"])]
    shape: Option<String>,
    /// Write the JSON report here as well as to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct QuaternaryArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_parser = ["g1", "g2", "g3", "g4"])]
    shape: String,
    /// Stop once this many survivors are found.
    #[arg(long)]
    max_survivors: Option<u64>,
    #[arg(long, default_value = "cover")]
    engine: Engine,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

type CmdResult = Result<i32, String>;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    let result = match cli.command {
        Command::FieldCheck { q } => field_check(&q),
        Command::VerifyTernary(a) => verify_ternary(&a),
        Command::VerifyQuaternary(a) => verify_quaternary_cmd(&a),
        Command::CheckPaperExample { perturb } => check_example(perturb.as_deref()),
        Command::CountZeros { form, witnesses } => count_zeros(&form, witnesses),
        Command::Lift { p, form, point, prec } => lift(p, &form, &point, prec),
        Command::Merge { out, files } => merge(&out, &files),
        Command::VerifyManifest { manifest } => verify_manifest(&manifest),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

fn field_check(orders: &[u32]) -> CmdResult {
    let mut code = EXIT_PASS;
    for &q in orders {
        let f = FieldSpec::of_order(q).map_err(|e| format!("q={q}: {e}"))?;
        match check_axioms(&f) {
            Ok(c) => println!("{}: pass {}", f.header(), serde_json::to_string(&c).map_err(err)?),
            Err(v) => {
                println!("{}: FAIL {v}", f.header());
                code = EXIT_FAIL;
            }
        }
    }
    Ok(code)
}

fn shard_layout(c: &Common) -> Result<Vec<Shard>, String> {
    match &c.shard {
        Some(s) => {
            let (i, n) = s.split_once('/').ok_or_else(|| format!("bad shard {s:?}, expected i/N"))?;
            let i = i.trim().parse().map_err(|_| format!("bad shard {s:?}"))?;
            let n = n.trim().parse().map_err(|_| format!("bad shard {s:?}"))?;
            Ok(vec![Shard::new(i, n).map_err(err)?])
        }
        None => (0..c.shards).map(|i| Shard::new(i, c.shards).map_err(err)).collect(),
    }
}

fn checkpoint_dir(c: &Common) -> Option<PathBuf> {
    c.resume.clone().or_else(|| std::env::var_os(CHECKPOINT_ENV).map(PathBuf::from))
}

fn layout_text(shards: &[Shard]) -> String {
    match shards {
        [one] => one.to_string(),
        all => format!("all/{}", all.len()),
    }
}

fn field(q: u32) -> Result<Arc<FieldSpec>, String> {
    FieldSpec::of_order(q).map(Arc::new).map_err(|e| format!("q={q}: {e}"))
}

fn write_atomic(path: &Path, text: &str) -> Result<(), String> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, text).map_err(|e| format!("{}: {e}", tmp.display()))?;
    fs::rename(&tmp, path).map_err(|e| format!("{}: {e}", path.display()))
}

/// Output path for one shape when both shapes share `--out`.
fn shape_out(out: &Path, shape: &str, both: bool) -> PathBuf {
    if !both {
        return out.to_path_buf();
    }
    let stem = out.file_stem().unwrap_or_default().to_string_lossy();
    let name = match out.extension() {
        Some(ext) => format!("{stem}-{shape}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{shape}"),
    };
    out.with_file_name(name)
}

/// One shard of one ternary shape, read from a checkpoint when a valid one exists.
fn ternary_shard(
    f: &Arc<FieldSpec>,
    shape: TripleShape,
    shard: Shard,
    jobs: usize,
    dir: Option<&Path>,
) -> Result<(SurvivorDb, SweepStats), String> {
    let template = lemma8_template(shape);
    let name = format!("ternary-q{}-{}-{}of{}", f.q(), template.kind(), shard.index, shard.count);
    let paths = dir.map(|d| (d.join(format!("{name}.db")), d.join(format!("{name}.stats.json"))));
    if let Some((db_path, stats_path)) = &paths {
        let db = fs::read_to_string(db_path).ok().and_then(|t| SurvivorDb::parse(&t).ok());
        let stats = fs::read_to_string(stats_path)
            .ok()
            .and_then(|t| serde_json::from_str::<SweepStats>(&t).ok());
        if let (Some(db), Some(stats)) = (db, stats) {
            let matches = *db.field == **f
                && db.template == template
                && db.normalization == Normalization::Orbit
                && if shard.count == 1 {
                    db.is_complete()
                } else {
                    db.shard_count == shard.count && db.shards_done.iter().eq([shard.index].iter())
                };
            if matches {
                eprintln!("resumed {name}");
                return Ok((db, stats));
            }
        }
    }
    let opts = SearchOptions {
        shard,
        jobs,
        naive: false,
    };
    let (db, stats) = enumerate_survivors(f, &template, Normalization::Orbit, &opts).map_err(err)?;
    if let Some((db_path, stats_path)) = &paths {
        fs::create_dir_all(dir.expect("dir")).map_err(err)?;
        write_atomic(stats_path, &serde_json::to_string(&stats).map_err(err)?)?;
        write_atomic(db_path, &db.to_text())?;
    }
    eprintln!("swept {name}: {} survivors, {:.1}s", db.len(), stats.elapsed_secs);
    Ok((db, stats))
}

fn verify_ternary(a: &TernaryArgs) -> CmdResult {
    let c = &a.common;
    if c.q < 5 {
        return Err(format!("q={} is below 5", c.q));
    }
    let f = field(c.q)?;
    let shards = shard_layout(c)?;
    let dir = checkpoint_dir(c);
    let shapes: Vec<TripleShape> = match a.shape.as_deref() {
        Some("t1") => vec![TripleShape::Transitive],
        Some(_) => vec![TripleShape::Cyclic],
        None => vec![TripleShape::Transitive, TripleShape::Cyclic],
    };
    let start = Instant::now();
    let mut manifest = RunManifest::new("verify-ternary", f.header(), layout_text(&shards));
    manifest.param("q", c.q).param("jobs", c.jobs);
    if let Some(s) = &a.shape {
        manifest.param("shape", s);
    }
    manifest.checkpoint_dir = dir.as_ref().map(|d| d.display().to_string());
    let mut dbs = Vec::new();
    let mut runs = Vec::new();
    for &shape in &shapes {
        let mut parts = Vec::new();
        let mut total = SweepStats::default();
        for &shard in &shards {
            let (db, stats) = ternary_shard(&f, shape, shard, c.jobs, dir.as_deref())?;
            total.forms += stats.forms;
            total.units += stats.units;
            total.heads = stats.heads;
            total.elapsed_secs += stats.elapsed_secs;
            parts.push(db);
        }
        let db = SurvivorDb::merge(&parts).map_err(err)?;
        runs.push(ShapeRun {
            shape: db.template.kind().to_string(),
            orbit_count: total.heads,
            survivors: db.len() as u64,
            histogram: db.histogram(),
            stats: total,
        });
        dbs.push(db);
    }
    let shard = match shards.as_slice() {
        [one] => *one,
        _ => Shard::ALL,
    };
    let report = lemma8_report(c.q, shard, &dbs, runs, start.elapsed().as_secs_f64());
    let json = report.to_json();
    println!("{json}");
    if let Some(out) = &c.out {
        for db in &dbs {
            let path = shape_out(out, &db.template.kind().to_string(), dbs.len() > 1);
            write_atomic(&path, &db.to_text())?;
            manifest.record(&path).map_err(err)?;
        }
        if let Some(rp) = &a.report {
            write_atomic(rp, &(json.clone() + "\n"))?;
            manifest.record(rp).map_err(err)?;
        }
        manifest.write(&manifest_path(out)).map_err(err)?;
    } else if let Some(rp) = &a.report {
        write_atomic(rp, &(json + "\n"))?;
    }
    Ok(exit_for(&report))
}

fn exit_for(report: &VerificationReport) -> i32 {
    if report.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

fn verify_quaternary_cmd(a: &QuaternaryArgs) -> CmdResult {
    let c = &a.common;
    if !(5..=16).contains(&c.q) {
        return Err(format!("q={} outside 5..=16", c.q));
    }
    let f = field(c.q)?;
    let g: u8 = a.shape[1..].parse().map_err(err)?;
    let shards = shard_layout(c)?;
    let dir = checkpoint_dir(c);
    let (t1, t2) = lemma8_databases(&f, c.jobs).map_err(err)?;
    let source = ArraySource::Expand { t1: &t1, t2: &t2 };
    let cache = ArrayCache::new();
    let opts = QuaternaryOptions {
        jobs: c.jobs,
        engine: a.engine,
        max_survivors: a.max_survivors,
        ..Default::default()
    };
    let mut manifest = RunManifest::new("verify-quaternary", f.header(), layout_text(&shards));
    manifest
        .param("q", c.q)
        .param("shape", &a.shape)
        .param("engine", a.engine)
        .param("jobs", c.jobs);
    if let Some(m) = a.max_survivors {
        manifest.param("max_survivors", m);
    }
    let report = match (&dir, a.max_survivors, shards.as_slice()) {
        (Some(d), None, [one]) if one.count > 1 => {
            manifest.checkpoint_dir = Some(d.display().to_string());
            single_checkpointed(&f, g, &source, &cache, &opts, *one, d)?
        }
        (Some(d), None, _) => {
            manifest.checkpoint_dir = Some(d.display().to_string());
            verify_quaternary_checkpointed(&f, g, &source, &cache, &opts, shards.len() as u32, d, |r, resumed| {
                let verb = if resumed { "resumed" } else { "swept" };
                eprintln!("{verb} shard {:?}: {} survivors", r.shards_done, r.survivor_count);
            })
            .map_err(err)?
        }
        (_, _, [one]) => verify_quaternary(&f, g, &source, &cache, &QuaternaryOptions { shard: *one, ..opts })
            .map_err(err)?,
        _ => {
            let parts = shards
                .iter()
                .map(|&shard| verify_quaternary(&f, g, &source, &cache, &QuaternaryOptions { shard, ..opts }))
                .collect::<Result<Vec<_>, _>>()
                .map_err(err)?;
            QuaternaryReport::merge(&parts).map_err(err)?
        }
    };
    let json = report.to_json();
    println!("{json}");
    if let Some(out) = &c.out {
        write_atomic(out, &(json + "\n"))?;
        manifest.record(out).map_err(err)?;
        manifest.write(&manifest_path(out)).map_err(err)?;
    }
    Ok(if report.passed() { EXIT_PASS } else { EXIT_FAIL })
}

fn single_checkpointed(
    f: &Arc<FieldSpec>,
    g: u8,
    source: &ArraySource,
    cache: &ArrayCache,
    opts: &QuaternaryOptions,
    shard: Shard,
    dir: &Path,
) -> Result<QuaternaryReport, String> {
    let path = checkpoint_path(dir, f.q(), g, opts.engine, shard);
    if let Some(r) = fs::read_to_string(&path)
        .ok()
        .and_then(|t| QuaternaryReport::from_json(&t).ok())
        .filter(|r| r.q == f.q() && r.shards == shard.to_string() && r.shards_done == [shard.index])
    {
        eprintln!("resumed {}", path.display());
        return Ok(r);
    }
    let r = verify_quaternary(f, g, source, cache, &QuaternaryOptions { shard, ..*opts }).map_err(err)?;
    fs::create_dir_all(dir).map_err(err)?;
    write_atomic(&path, &r.to_json())?;
    Ok(r)
}

/// Points of the 𝔽_7 example's zero set.
const EXAMPLE_ZEROS: [[u16; 3]; 4] = [[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 6, 2]];

fn check_example(perturb: Option<&str>) -> CmdResult {
    let mut form = sharp_f7_example();
    if let Some(p) = perturb {
        let (exps, coef) = p.split_once(':').ok_or("perturbation must look like `e1 e2 e3 : c`")?;
        let exps: Vec<u8> = exps.split_whitespace().map(|e| e.parse().map_err(err)).collect::<Result<_, _>>()?;
        let value: u64 = coef.trim().parse().map_err(err)?;
        form = with_coefficient(&form, &exps, value)?;
        println!("perturbed {} to {value}", exps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "));
    }
    let fs7 = form.field().clone();
    let census = form.count_projective_zeros(true);
    let found = census.witnesses.clone().unwrap_or_default();
    let mut want: Vec<ProjectivePoint> = EXAMPLE_ZEROS
        .iter()
        .map(|p| ProjectivePoint::new(&fs7, &p.map(qvf_core::Fe)))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    want.sort();
    print!("{}", form.to_text());
    println!(
        "zeros={} singular={} nonsingular={}",
        census.total, census.singular, census.nonsingular
    );
    for p in &found {
        println!("zero {p}");
    }
    let ok = (census.total, census.singular, census.nonsingular) == (4, 4, 0) && found == want;
    println!("{}", if ok { "PASS" } else { "FAIL" });
    Ok(if ok { EXIT_PASS } else { EXIT_FAIL })
}

fn with_coefficient(form: &Form, exps: &[u8], value: u64) -> Result<Form, String> {
    let f = form.field().clone();
    let target = Monomial::new(exps);
    let v = f.element(value).map_err(err)?;
    let mut terms: Vec<(Monomial, qvf_core::Fe)> =
        form.terms().filter(|(m, _)| **m != target).map(|(m, c)| (*m, *c)).collect();
    terms.push((target, v));
    let mut out = Form::zero(f, form.num_vars(), form.degree()).map_err(err)?;
    for (m, c) in terms {
        if !c.is_zero() {
            out.add_term(m, c).map_err(err)?;
        }
    }
    Ok(out)
}

fn read(path: &Path) -> Result<String, String> {
    fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn count_zeros(path: &Path, witnesses: bool) -> CmdResult {
    let form = Form::parse(&read(path)?).map_err(err)?;
    let census = form.count_projective_zeros(witnesses);
    let mut out = serde_json::json!({
        "field": form.field().header(),
        "n": form.num_vars(),
        "d": form.degree(),
        "total": census.total,
        "singular": census.singular,
        "nonsingular": census.nonsingular,
    });
    if let Some(w) = census.witnesses {
        out["witnesses"] = w.iter().map(|p| p.to_string()).collect();
    }
    println!("{}", serde_json::to_string_pretty(&out).map_err(err)?);
    Ok(EXIT_PASS)
}

fn lift(p: u64, path: &Path, point: &str, prec: u32) -> CmdResult {
    let form = IntegerForm::parse(&read(path)?).map_err(err)?;
    let x0: Vec<u64> = point
        .split(',')
        .map(|v| v.trim().parse().map_err(|_| format!("bad coordinate {v:?}")))
        .collect::<Result<_, _>>()?;
    let lifted = hensel_lift(&form, p, &x0, prec).map_err(err)?;
    println!("F = {form}");
    println!("pivot x{}", lifted.pivot + 1);
    for (m, s) in lifted.steps.iter().enumerate() {
        let v = s.valuation.map_or("inf".to_string(), |v| v.to_string());
        println!("step {}: mod {p}^{} x{}={} v_p(F)={v}", m + 1, s.precision, lifted.pivot + 1, s.coordinate);
    }
    let coords: Vec<String> = lifted.coords.iter().map(|c| c.to_string()).collect();
    println!("x = ({})", coords.join(", "));
    let value = form.evaluate(&lifted.coords).map_err(err)?;
    let m = lifted.modulus();
    if (value % &m) == 0.into() {
        println!("verified {p}^{prec} | F(x)");
        Ok(EXIT_PASS)
    } else {
        println!("FAIL {p}^{prec} does not divide F(x)");
        Ok(EXIT_FAIL)
    }
}

fn merge(out: &Path, files: &[PathBuf]) -> CmdResult {
    let texts: Vec<String> = files.iter().map(|p| read(p)).collect::<Result<_, _>>()?;
    let (text, field, shards) = if texts[0].trim_start().starts_with('{') {
        let parts: Vec<QuaternaryReport> = texts
            .iter()
            .map(|t| QuaternaryReport::from_json(t).map_err(err))
            .collect::<Result<_, _>>()?;
        let merged = QuaternaryReport::merge(&parts).map_err(err)?;
        let shards = merged.shards.clone();
        (merged.to_json() + "\n", format!("q={}", merged.q), shards)
    } else {
        let parts: Vec<SurvivorDb> = texts
            .iter()
            .map(|t| SurvivorDb::parse(t).map_err(err))
            .collect::<Result<_, _>>()?;
        let merged = SurvivorDb::merge(&parts).map_err(err)?;
        let shards = format!("{}/{}", merged.shards_done.len(), merged.shard_count);
        (merged.to_text(), merged.field.header(), shards)
    };
    write_atomic(out, &text)?;
    let mut manifest = RunManifest::new("merge", field, shards);
    manifest.param("inputs", files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","));
    manifest.record(out).map_err(err)?;
    manifest.write(&manifest_path(out)).map_err(err)?;
    eprintln!("merged {} files into {}", files.len(), out.display());
    Ok(EXIT_PASS)
}

fn verify_manifest(path: &Path) -> CmdResult {
    let m = RunManifest::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let bad = m.mismatches();
    for p in &bad {
        println!("digest mismatch: {p}");
    }
    println!("{} outputs, {} mismatched", m.outputs.len(), bad.len());
    Ok(if bad.is_empty() { EXIT_PASS } else { EXIT_FAIL })
}
