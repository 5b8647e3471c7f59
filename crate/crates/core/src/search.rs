//! Stage one: sweep a shape template for forms without a non-singular zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use thiserror::Error;

use crate::forms::{Form, FormError, Monomial, ProjectivePoint};
use crate::gf::{Fe, FieldSpec, GfError};
use crate::kernel::SweepKernel;
use crate::shapes::{
    classify_triple, pair_orbits, ShapeError, ShapeKind, ShapeTemplate, Slot, SlotStatus, Tournament,
    TripleShape,
};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid shard {index}/{count}")]
    InvalidShard { index: u32, count: u32 },
    #[error("fast sweep and re-census disagree on assignment {0}")]
    KernelMismatch(String),
    #[error("orbit normalization needs every pair slot free and nothing pinned")]
    OrbitNeedsFreeTemplate,
    #[error("survivor database is incomplete")]
    Incomplete,
    #[error("databases disagree: {0}")]
    HeaderMismatch(String),
    #[error("shard {0} appears twice")]
    OverlappingShards(u32),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: String, msg: String },
}

/// Slice `index` of `count` of a work space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shard {
    pub index: u32,
    pub count: u32,
}

impl Shard {
    pub const ALL: Shard = Shard { index: 0, count: 1 };

    pub fn new(index: u32, count: u32) -> Result<Self, SearchError> {
        if count == 0 || index >= count {
            return Err(SearchError::InvalidShard { index, count });
        }
        Ok(Shard { index, count })
    }

    pub fn owns(&self, unit: u64) -> bool {
        unit % self.count as u64 == self.index as u64
    }
}

impl fmt::Display for Shard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.index, self.count)
    }
}

impl FromStr for Shard {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SearchError::Parse {
            line: 0,
            msg: format!("bad shard {s:?}, expected i/N"),
        };
        let (i, n) = s.split_once('/').ok_or_else(bad)?;
        Shard::new(i.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Normalization {
    /// Pair coefficients range over scaling-orbit representatives.
    Orbit,
    /// Pair coefficients range over every unit value the template allows.
    Pinned,
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Orbit => "orbit",
            Normalization::Pinned => "pinned",
        })
    }
}

impl FromStr for Normalization {
    type Err = SearchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "orbit" => Ok(Normalization::Orbit),
            "pinned" => Ok(Normalization::Pinned),
            _ => Err(SearchError::Parse {
                line: 0,
                msg: format!("unknown normalization {s:?}"),
            }),
        }
    }
}

/// A form of the template without a non-singular zero.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct SurvivorRecord {
    /// Values of the template's free slots in canonical slot order.
    pub assignment: Vec<Fe>,
    pub zero_total: u64,
    pub zero_points: Vec<ProjectivePoint>,
}

impl SurvivorRecord {
    fn to_line(&self) -> String {
        let a: Vec<String> = self.assignment.iter().map(|v| v.to_string()).collect();
        let p: Vec<String> = self.zero_points.iter().map(|p| p.to_string()).collect();
        format!("assignment={} zeros={} points={}", a.join(","), self.zero_total, p.join(";"))
    }

    fn parse_line(field: &FieldSpec, line: &str) -> Result<Self, String> {
        let mut assignment = None;
        let mut zeros = None;
        let mut points = None;
        for tok in line.split_whitespace() {
            let (k, v) = tok.split_once('=').ok_or_else(|| format!("bad token {tok:?}"))?;
            match k {
                "assignment" => assignment = Some(crate::forms::parse_encodings(field, v)?),
                "zeros" => zeros = Some(v.parse::<u64>().map_err(|_| format!("bad count {v:?}"))?),
                "points" => {
                    let pts: Result<Vec<_>, _> = v
                        .split(';')
                        .filter(|s| !s.is_empty())
                        .map(|s| ProjectivePoint::parse(field, s).map_err(|e| e.to_string()))
                        .collect();
                    points = Some(pts?);
                }
                _ => return Err(format!("unknown key {k:?}")),
            }
        }
        Ok(SurvivorRecord {
            assignment: assignment.ok_or("missing assignment")?,
            zero_total: zeros.ok_or("missing zeros")?,
            zero_points: points.unwrap_or_default(),
        })
    }
}

/// Survivors of one template, possibly only some shards of the work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SurvivorDb {
    pub field: Arc<FieldSpec>,
    pub template: ShapeTemplate,
    pub normalization: Normalization,
    pub shard_count: u32,
    pub shards_done: BTreeSet<u32>,
    pub records: Vec<SurvivorRecord>,
}

const MAGIC: &str = "# qvf-survivors v1";
const SENTINEL: &str = "# complete";

impl SurvivorDb {
    pub fn is_complete(&self) -> bool {
        self.shards_done.len() as u32 == self.shard_count
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Zero-count histogram of the records.
    pub fn histogram(&self) -> BTreeMap<u64, u64> {
        let mut h = BTreeMap::new();
        for r in &self.records {
            *h.entry(r.zero_total).or_insert(0) += 1;
        }
        h
    }

    pub fn form_of(&self, record: &SurvivorRecord) -> Result<Form, SearchError> {
        Ok(self.template.instantiate(&self.field, &record.assignment)?)
    }

    /// Canonical text. A complete database is written as a single shard so
    /// that sharded and unsharded runs produce identical bytes.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(MAGIC);
        s.push('\n');
        s.push_str(&self.field.header());
        s.push('\n');
        s.push_str(&self.template.descriptor());
        s.push('\n');
        s.push_str(&format!("normalization={}\n", self.normalization));
        if self.is_complete() {
            s.push_str("shards=1/1\n");
        } else {
            let parts: Vec<String> = self.shards_done.iter().map(|i| i.to_string()).collect();
            s.push_str(&format!(
                "shards={}/{} parts={}\n",
                self.shards_done.len(),
                self.shard_count,
                parts.join(",")
            ));
        }
        for r in &self.records {
            s.push_str(&r.to_line());
            s.push('\n');
        }
        if self.is_complete() {
            s.push_str(SENTINEL);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, SearchError> {
        let perr = |line: usize, msg: String| SearchError::Parse { line, msg };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| perr(0, format!("missing {what}")))
        };
        let (ln, magic) = next("magic")?;
        if magic.trim() != MAGIC {
            return Err(perr(ln, "not a survivor database".into()));
        }
        let (_, header) = next("field header")?;
        let field = Arc::new(FieldSpec::from_header(header)?);
        let (_, desc) = next("template descriptor")?;
        let template = ShapeTemplate::from_descriptor(desc)?;
        let (ln, norm) = next("normalization")?;
        let normalization = norm
            .trim()
            .strip_prefix("normalization=")
            .ok_or_else(|| perr(ln, "missing normalization".into()))?
            .parse()?;
        let (ln, shards) = next("shards")?;
        let (shard_count, shards_done) = parse_shards(shards).map_err(|m| perr(ln, m))?;
        let mut records = Vec::new();
        let mut sentinel = false;
        for (ln, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if sentinel {
                return Err(perr(ln, "content after sentinel".into()));
            }
            if line == SENTINEL {
                sentinel = true;
                continue;
            }
            let rec = SurvivorRecord::parse_line(&field, line).map_err(|m| perr(ln, m))?;
            if template.free_slots().len() != rec.assignment.len() {
                return Err(perr(ln, "assignment length does not match template".into()));
            }
            if let Some(prev) = records.last() {
                let prev: &SurvivorRecord = prev;
                if prev.assignment >= rec.assignment {
                    return Err(perr(ln, "records not strictly ascending".into()));
                }
            }
            records.push(rec);
        }
        let db = SurvivorDb {
            field,
            template,
            normalization,
            shard_count,
            shards_done,
            records,
        };
        if sentinel != db.is_complete() {
            return Err(perr(0, "completeness sentinel disagrees with shard line".into()));
        }
        Ok(db)
    }

    /// Sorted union of shard fragments of the same run.
    pub fn merge(parts: &[SurvivorDb]) -> Result<SurvivorDb, SearchError> {
        let first = parts
            .first()
            .ok_or_else(|| SearchError::HeaderMismatch("nothing to merge".into()))?;
        let mut done = BTreeSet::new();
        let mut records = Vec::new();
        for p in parts {
            if *p.field != *first.field {
                return Err(SearchError::HeaderMismatch(format!(
                    "field {} vs {}",
                    p.field.header(),
                    first.field.header()
                )));
            }
            if p.template != first.template {
                return Err(SearchError::HeaderMismatch("template".into()));
            }
            if p.normalization != first.normalization {
                return Err(SearchError::HeaderMismatch("normalization".into()));
            }
            let (count, shards) = if p.is_complete() {
                (first.shard_count, (0..first.shard_count).collect())
            } else {
                (p.shard_count, p.shards_done.clone())
            };
            if count != first.shard_count && !first.is_complete() {
                return Err(SearchError::HeaderMismatch("shard count".into()));
            }
            for s in shards {
                if !done.insert(s) {
                    return Err(SearchError::OverlappingShards(s));
                }
            }
            records.extend(p.records.iter().cloned());
        }
        records.sort();
        if records.windows(2).any(|w| w[0].assignment == w[1].assignment) {
            return Err(SearchError::HeaderMismatch("duplicate records across shards".into()));
        }
        Ok(SurvivorDb {
            field: first.field.clone(),
            template: first.template.clone(),
            normalization: first.normalization,
            shard_count: first.shard_count,
            shards_done: done,
            records,
        })
    }
}

fn parse_shards(line: &str) -> Result<(u32, BTreeSet<u32>), String> {
    let mut count = None;
    let mut done = None;
    let mut parts = None;
    for tok in line.split_whitespace() {
        match tok.split_once('=') {
            Some(("shards", v)) => {
                let (d, t) = v.split_once('/').ok_or("bad shards")?;
                done = Some(d.parse::<u32>().map_err(|_| "bad shards")?);
                count = Some(t.parse::<u32>().map_err(|_| "bad shards")?);
            }
            Some(("parts", v)) => {
                let p: Result<BTreeSet<u32>, _> = v.split(',').filter(|s| !s.is_empty()).map(u32::from_str).collect();
                parts = Some(p.map_err(|_| "bad parts")?);
            }
            _ => return Err(format!("unexpected {tok:?}")),
        }
    }
    let (count, done) = (count.ok_or("missing shards")?, done.ok_or("missing shards")?);
    if count == 0 || done > count {
        return Err("bad shards".into());
    }
    let parts = match parts {
        Some(p) => p,
        None if done == count => (0..count).collect(),
        None => return Err("partial database without parts".into()),
    };
    if parts.len() as u32 != done || parts.iter().any(|&p| p >= count) {
        return Err("parts disagree with shards".into());
    }
    Ok((count, parts))
}

/// Knobs for [`enumerate_survivors`].
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    pub shard: Shard,
    pub jobs: usize,
    /// Bypass the incremental kernel and test each form with
    /// [`Form::find_nonsingular_zero`].
    pub naive: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            shard: Shard::ALL,
            jobs: 1,
            naive: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepStats {
    pub forms: u64,
    pub units: u64,
    pub heads: u64,
    pub elapsed_secs: f64,
}

/// Pair-slot value tuples the sweep starts from.
pub fn head_tuples(
    field: &FieldSpec,
    template: &ShapeTemplate,
    normalization: Normalization,
) -> Result<Vec<Vec<Fe>>, SearchError> {
    let pairs: Vec<Slot> = template.free_slots().into_iter().filter(|s| s.is_pair()).collect();
    match normalization {
        Normalization::Orbit => {
            if !template.pins().is_empty() {
                return Err(SearchError::OrbitNeedsFreeTemplate);
            }
            Ok(pair_orbits(field, template).reps().to_vec())
        }
        Normalization::Pinned => {
            let units: Vec<Fe> = field.nonzero_elements().collect();
            let mut out = vec![Vec::new()];
            for _ in &pairs {
                out = out
                    .into_iter()
                    .flat_map(|t| {
                        units.iter().map(move |&u| {
                            let mut t = t.clone();
                            t.push(u);
                            t
                        })
                    })
                    .collect();
            }
            Ok(out)
        }
    }
}

struct Plan<'a> {
    field: &'a Arc<FieldSpec>,
    template: &'a ShapeTemplate,
    heads: Vec<Vec<Fe>>,
    /// Slot index (into the template slot list) of every free tail slot.
    tail: Vec<usize>,
    pinned: Vec<(usize, Fe)>,
    head_slots: Vec<usize>,
    first_domain: usize,
    kernel: Option<SweepKernel>,
}

impl<'a> Plan<'a> {
    fn new(
        field: &'a Arc<FieldSpec>,
        template: &'a ShapeTemplate,
        normalization: Normalization,
        naive: bool,
    ) -> Result<Self, SearchError> {
        let heads = head_tuples(field, template, normalization)?;
        let mut tail = Vec::new();
        let mut head_slots = Vec::new();
        let mut pinned = Vec::new();
        for (i, (slot, st)) in template.slots().iter().enumerate() {
            match st {
                SlotStatus::Pinned(v) => pinned.push((i, *v)),
                SlotStatus::Free if slot.is_pair() => head_slots.push(i),
                SlotStatus::Free => tail.push(i),
                SlotStatus::Zero => {}
            }
        }
        let monos: Vec<Monomial> = template.slots().iter().map(|(s, _)| s.monomial()).collect();
        let kernel = if naive {
            None
        } else {
            SweepKernel::new(field.clone(), template.m() as usize, &monos)
        };
        let first_domain = if tail.is_empty() { 1 } else { field.q() as usize };
        Ok(Plan {
            field,
            template,
            heads,
            tail,
            pinned,
            head_slots,
            first_domain,
            kernel,
        })
    }

    fn unit_count(&self) -> u64 {
        self.heads.len() as u64 * self.first_domain as u64
    }

    /// Survivor assignments of one unit, in no particular order.
    fn run_unit(&self, unit: u64) -> (Vec<Vec<Fe>>, u64) {
        let h = (unit / self.first_domain as u64) as usize;
        let first = (unit % self.first_domain as u64) as u16;
        let head = &self.heads[h];
        let domains: Vec<Vec<Fe>> = self
            .tail
            .iter()
            .enumerate()
            .map(|(j, _)| {
                if j == 0 {
                    vec![Fe(first)]
                } else {
                    self.field.elements().collect()
                }
            })
            .collect();
        let mut out = Vec::new();
        let visited;
        if let Some(kernel) = &self.kernel {
            let mut fixed = self.pinned.clone();
            fixed.extend(self.head_slots.iter().copied().zip(head.iter().copied()));
            let tail: Vec<(usize, Vec<Fe>)> = self.tail.iter().copied().zip(domains).collect();
            visited = kernel.sweep(&fixed, &tail, |t| {
                let mut a = head.clone();
                a.extend_from_slice(t);
                out.push(a);
            });
        } else {
            let mut count = 0u64;
            for_each_tuple(&domains, |t| {
                count += 1;
                let mut a = head.clone();
                a.extend_from_slice(t);
                let form = self.template.instantiate(self.field, &a).expect("assignment in domain");
                if form.find_nonsingular_zero().is_none() {
                    out.push(a);
                }
            });
            visited = count;
        }
        (out, visited)
    }
}

fn for_each_tuple(domains: &[Vec<Fe>], mut f: impl FnMut(&[Fe])) {
    if domains.iter().any(|d| d.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut cur: Vec<Fe> = domains.iter().map(|d| d[0]).collect();
    loop {
        f(&cur);
        let mut i = domains.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            idx[i] += 1;
            if idx[i] < domains[i].len() {
                cur[i] = domains[i][idx[i]];
                break;
            }
            idx[i] = 0;
            cur[i] = domains[i][0];
        }
    }
}

/// Runs `work` over `items` on up to `jobs` threads.
pub(crate) fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, work: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(work).collect();
    }
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, R)>> = Mutex::new(Vec::with_capacity(items.len()));
    std::thread::scope(|s| {
        for _ in 0..jobs {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = work(&items[i]);
                results.lock().unwrap().push((i, r));
            });
        }
    });
    let mut results = results.into_inner().unwrap();
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

/// Instantiates and fully censuses a survivor assignment.
pub fn census_record(
    field: &Arc<FieldSpec>,
    template: &ShapeTemplate,
    assignment: Vec<Fe>,
) -> Result<SurvivorRecord, SearchError> {
    let form = template.instantiate(field, &assignment)?;
    let census = form.count_projective_zeros(true);
    if census.nonsingular != 0 {
        let a: Vec<String> = assignment.iter().map(|v| v.to_string()).collect();
        return Err(SearchError::KernelMismatch(a.join(",")));
    }
    Ok(SurvivorRecord {
        assignment,
        zero_total: census.total,
        zero_points: census.witnesses.unwrap_or_default(),
    })
}

/// Sweeps the shard's share of the template's instantiations.
///
/// The work is cut into units (a pair-coefficient tuple together with a value
/// of the first remaining free slot); unit `u` belongs to shard `u mod N`.
pub fn enumerate_survivors(
    field: &Arc<FieldSpec>,
    template: &ShapeTemplate,
    normalization: Normalization,
    opts: &SearchOptions,
) -> Result<(SurvivorDb, SweepStats), SearchError> {
    let start = Instant::now();
    let plan = Plan::new(field, template, normalization, opts.naive)?;
    let units: Vec<u64> = (0..plan.unit_count()).filter(|&u| opts.shard.owns(u)).collect();
    let results = parallel_map(&units, opts.jobs, |&u| plan.run_unit(u));
    let mut forms = 0;
    let mut found = Vec::new();
    for (assignments, visited) in results {
        forms += visited;
        found.extend(assignments);
    }
    found.sort();
    let censused = parallel_map(&found, opts.jobs, |a| census_record(field, template, a.clone()));
    let records = censused.into_iter().collect::<Result<Vec<_>, _>>()?;
    let db = SurvivorDb {
        field: field.clone(),
        template: template.clone(),
        normalization,
        shard_count: opts.shard.count,
        shards_done: [opts.shard.index].into_iter().collect(),
        records,
    };
    let stats = SweepStats {
        forms,
        units: units.len() as u64,
        heads: plan.heads.len() as u64,
        elapsed_secs: start.elapsed().as_secs_f64(),
    };
    Ok((db, stats))
}

/// Free template of the transitive or cyclic ternary shape.
pub fn lemma8_template(shape: TripleShape) -> ShapeTemplate {
    ShapeTemplate::ternary(shape, &[]).expect("unpinned template")
}

/// Per-shape outcome of a ternary survivor sweep.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct ShapeRun {
    pub shape: String,
    pub orbit_count: u64,
    pub survivors: u64,
    pub histogram: BTreeMap<u64, u64>,
    pub stats: SweepStats,
}

/// Runs both ternary shapes over orbit representatives and judges the result
/// against the claims table.
pub fn verify_lemma8(
    field: &Arc<FieldSpec>,
    opts: &SearchOptions,
) -> Result<(crate::report::VerificationReport, Vec<SurvivorDb>), SearchError> {
    let start = Instant::now();
    let mut dbs = Vec::new();
    let mut runs = Vec::new();
    for shape in [TripleShape::Transitive, TripleShape::Cyclic] {
        let t = lemma8_template(shape);
        let (db, stats) = enumerate_survivors(field, &t, Normalization::Orbit, opts)?;
        runs.push(ShapeRun {
            shape: t.kind().to_string(),
            orbit_count: stats.heads,
            survivors: db.len() as u64,
            histogram: db.histogram(),
            stats,
        });
        dbs.push(db);
    }
    let report = crate::report::lemma8_report(field.q(), opts.shard, &dbs, runs, start.elapsed().as_secs_f64());
    Ok((report, dbs))
}

/// Outcome of [`survivor_lemma5_audit`].
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct Lemma5Audit {
    pub records: u64,
    pub pairs: u64,
    pub failures: Vec<String>,
}

impl Lemma5Audit {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-censuses every record and checks the two-zero restriction shape on
/// every pair of its zeros.
pub fn survivor_lemma5_audit(db: &SurvivorDb) -> Result<Lemma5Audit, SearchError> {
    if !db.is_complete() {
        return Err(SearchError::Incomplete);
    }
    let mut audit = Lemma5Audit::default();
    for rec in &db.records {
        audit.records += 1;
        let label = || {
            let a: Vec<String> = rec.assignment.iter().map(|v| v.to_string()).collect();
            a.join(",")
        };
        let form = db.form_of(rec)?;
        let census = form.count_projective_zeros(true);
        if census.nonsingular != 0 {
            audit.failures.push(format!("{}: has a non-singular zero", label()));
            continue;
        }
        if census.total != rec.zero_total || census.witnesses.as_deref() != Some(&rec.zero_points[..]) {
            audit.failures.push(format!("{}: recorded zeros differ from census", label()));
            continue;
        }
        for (i, z1) in rec.zero_points.iter().enumerate() {
            for z2 in &rec.zero_points[i + 1..] {
                audit.pairs += 1;
                let v = form.lemma5_shape_check(z1, z2)?;
                if !v.passes() {
                    audit
                        .failures
                        .push(format!("{}: line through {z1} and {z2} fails the shape check", label()));
                }
            }
        }
    }
    Ok(audit)
}

/// Permutes the variables of a form: variable `c` becomes `map[c]` (1-based).
fn permute_vars(form: &Form, map: &[u8]) -> Result<Form, FormError> {
    let mut out = Form::zero(form.field().clone(), form.num_vars(), form.degree())?;
    for (m, &c) in form.terms() {
        let mut e = [0u8; crate::forms::MAX_VARS];
        for (i, &t) in map.iter().enumerate() {
            e[t as usize - 1] = m.0[i];
        }
        out.add_term(Monomial(e), c)?;
    }
    Ok(out)
}

/// Derives the survivors of a (pinned, possibly relabeled) ternary template
/// from an orbit-normalized database by applying the whole scaling group.
pub fn expand_orbit_survivors(db: &SurvivorDb, target: &ShapeTemplate) -> Result<SurvivorDb, SearchError> {
    if !db.is_complete() {
        return Err(SearchError::Incomplete);
    }
    if db.normalization != Normalization::Orbit {
        return Err(SearchError::ShapeMismatch("source is not orbit-normalized".into()));
    }
    let field = &db.field;
    let source_shape = match db.template.kind() {
        ShapeKind::T1 if *db.template.tournament() == Tournament::transitive3() => TripleShape::Transitive,
        ShapeKind::T2 if *db.template.tournament() == Tournament::cyclic3() => TripleShape::Cyclic,
        _ => return Err(SearchError::ShapeMismatch("source must be a canonical t1 or t2 template".into())),
    };
    if target.m() != 3 {
        return Err(SearchError::ShapeMismatch("target must be ternary".into()));
    }
    let class = classify_triple(target.tournament(), [1, 2, 3]);
    if class.shape != source_shape {
        return Err(SearchError::ShapeMismatch(format!(
            "source {} vs target {}",
            db.template.kind(),
            target.kind()
        )));
    }
    let units = field.q() as u32 - 1;
    let pins: Vec<(Slot, u32)> = target
        .pins()
        .into_iter()
        .filter(|(s, _)| s.is_pair())
        .map(|(s, v)| (s, field.log(v).expect("pair pins are units")))
        .collect();
    let mut out = BTreeSet::new();
    for rec in &db.records {
        let form = permute_vars(&db.form_of(rec)?, &class.relabel)?;
        let pin_logs: Vec<(Vec<u32>, u32)> = pins
            .iter()
            .map(|(s, _)| {
                let c = form.coefficient(&s.monomial().0[..3]);
                (crate::shapes::slot_weights(*s, 3), field.log(c).unwrap_or(u32::MAX))
            })
            .collect();
        if pin_logs.iter().any(|(_, l)| *l == u32::MAX) {
            continue;
        }
        let mut g = [0u32; 4];
        let total = (units as u64).pow(4);
        for idx in 0..total {
            let mut x = idx;
            for d in g.iter_mut().rev() {
                *d = (x % units as u64) as u32;
                x /= units as u64;
            }
            let ok = pin_logs.iter().zip(&pins).all(|((w, l), (_, want))| {
                let shift: u64 = w.iter().zip(&g).map(|(&a, &b)| a as u64 * b as u64).sum();
                ((*l as u64 + shift) % units as u64) as u32 == *want
            });
            if !ok {
                continue;
            }
            let elem = crate::shapes::ScalingElement {
                c: field.exp(g[0] as u64),
                lambdas: g[1..].iter().map(|&l| field.exp(l as u64)).collect(),
            };
            let scaled = crate::shapes::apply_scaling(&form, &elem)?;
            if let Some(a) = target.assignment_of(&scaled) {
                out.insert(a);
            }
        }
    }
    let records = out
        .into_iter()
        .map(|a| census_record(field, target, a))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SurvivorDb {
        field: field.clone(),
        template: target.clone(),
        normalization: Normalization::Pinned,
        shard_count: 1,
        shards_done: [0].into_iter().collect(),
        records,
    })
}
