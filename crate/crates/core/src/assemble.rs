//! Stage two: assemble quaternary candidates from per-triple survivor arrays
//! and sweep the four `d` coefficients.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cover::{Cover, Jet};
use crate::forms::{Form, Monomial, ProjectivePoint, ZeroCensus};
use crate::gf::{Fe, FieldSpec};
use crate::kernel::SweepKernel;
use crate::report::{judge, ClaimsTable, Expectation, Verdict};
use crate::search::{
    enumerate_survivors, expand_orbit_survivors, lemma8_template, parallel_map, Normalization, SearchError,
    SearchOptions, Shard, SurvivorDb,
};
use crate::shapes::{classify_triple, g_pin_classes, ShapeTemplate, Slot, TripleShape};

/// The four coordinate triples, in array order.
pub const TRIPLES: [[u8; 3]; 4] = [[1, 2, 3], [1, 2, 4], [1, 3, 4], [2, 3, 4]];

fn pair_id(i: u8, j: u8) -> usize {
    let (a, b) = (i.min(j), i.max(j));
    match (a, b) {
        (1, 2) => 0,
        (1, 3) => 1,
        (1, 4) => 2,
        (2, 3) => 3,
        (2, 4) => 4,
        (3, 4) => 5,
        _ => unreachable!("pair {a},{b}"),
    }
}

/// Survivors of a g-shape restricted to one coordinate triple.
#[derive(Clone, Debug)]
pub struct TripleArray {
    pub triple: [u8; 3],
    /// Induced ternary template, variables relabeled 1, 2, 3.
    pub template: ShapeTemplate,
    pub db: Arc<SurvivorDb>,
    /// Global names of the template's free slots.
    global_free: Vec<Slot>,
    /// Per row: value of each of the six pair slots (zero when not in the triple).
    pairs: Vec<[Fe; 6]>,
}

impl TripleArray {
    pub fn new(triple: [u8; 3], template: ShapeTemplate, db: Arc<SurvivorDb>) -> Self {
        let global_free: Vec<Slot> = template.free_slots().iter().map(|s| s.relabel(&triple)).collect();
        let pinned: Vec<(Slot, Fe)> = template
            .pins()
            .into_iter()
            .map(|(s, v)| (s.relabel(&triple), v))
            .collect();
        let pairs = db
            .records
            .iter()
            .map(|r| {
                let mut p = [Fe::ZERO; 6];
                let all = global_free.iter().zip(&r.assignment).map(|(s, v)| (*s, *v));
                for (s, v) in all.chain(pinned.iter().copied()) {
                    if let Slot::A(i, j) = s {
                        p[pair_id(i, j)] = v;
                    }
                }
                p
            })
            .collect();
        TripleArray {
            triple,
            template,
            db,
            global_free,
            pairs,
        }
    }

    pub fn len(&self) -> usize {
        self.db.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.db.records.is_empty()
    }

    /// Free-slot values of a row under global slot names.
    pub fn row_coefficients(&self, row: usize) -> impl Iterator<Item = (Slot, Fe)> + '_ {
        self.global_free
            .iter()
            .copied()
            .zip(self.db.records[row].assignment.iter().copied())
    }
}

/// Induced-template survivor databases shared across g-shapes.
#[derive(Default)]
pub struct ArrayCache {
    dbs: Mutex<HashMap<String, Arc<SurvivorDb>>>,
}

impl ArrayCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.dbs.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_build(
        &self,
        key: String,
        build: impl FnOnce() -> Result<SurvivorDb, SearchError>,
    ) -> Result<Arc<SurvivorDb>, SearchError> {
        if let Some(db) = self.dbs.lock().unwrap().get(&key) {
            return Ok(db.clone());
        }
        let db = Arc::new(build()?);
        self.dbs.lock().unwrap().insert(key, db.clone());
        Ok(db)
    }
}

/// Where array rows come from.
pub enum ArraySource<'a> {
    /// Expand complete orbit-normalized `t1` and `t2` databases.
    Expand { t1: &'a SurvivorDb, t2: &'a SurvivorDb },
    /// Enumerate every induced template directly.
    Direct { jobs: usize },
}

/// Builds the four arrays for `g_index` with the rescaled pair slots set to `pins`.
pub fn build_arrays(
    field: &Arc<FieldSpec>,
    g_index: u8,
    pins: [Fe; 3],
    source: &ArraySource<'_>,
    cache: &ArrayCache,
) -> Result<[TripleArray; 4], SearchError> {
    let g = ShapeTemplate::g_with_pins(g_index, pins)?;
    let build = |triple: [u8; 3]| -> Result<TripleArray, SearchError> {
        let local = g.induced_on(triple);
        let key = format!("{} | {}", field.header(), local.descriptor());
        let db = cache.get_or_build(key, || match source {
            ArraySource::Expand { t1, t2 } => {
                let shape = classify_triple(local.tournament(), [1, 2, 3]).shape;
                let src = if shape == TripleShape::Transitive { t1 } else { t2 };
                if *src.field != **field {
                    return Err(SearchError::HeaderMismatch("array source field".into()));
                }
                expand_orbit_survivors(src, &local)
            }
            ArraySource::Direct { jobs } => {
                let opts = SearchOptions {
                    jobs: *jobs,
                    ..Default::default()
                };
                Ok(enumerate_survivors(field, &local, Normalization::Pinned, &opts)?.0)
            }
        })?;
        Ok(TripleArray::new(triple, local, db))
    };
    Ok([build(TRIPLES[0])?, build(TRIPLES[1])?, build(TRIPLES[2])?, build(TRIPLES[3])?])
}

/// Hash indexes of the last three arrays on their shared pair coefficients.
pub struct JoinIndex<'a> {
    arrays: &'a [TripleArray; 4],
    q: usize,
    /// Rows keyed by the encodings of their shared pair coefficients.
    by12: Vec<Vec<u32>>,
    by13_14: Vec<Vec<u32>>,
    by23_24_34: Vec<Vec<u32>>,
}

fn key(q: usize, values: &[Fe]) -> usize {
    values.iter().fold(0, |acc, v| acc * q + v.index())
}

impl<'a> JoinIndex<'a> {
    pub fn new(arrays: &'a [TripleArray; 4]) -> Self {
        let q = arrays[0].db.field.q() as usize;
        let mut by12 = vec![Vec::new(); q];
        let mut by13_14 = vec![Vec::new(); q * q];
        let mut by23_24_34 = vec![Vec::new(); q * q * q];
        for (r, p) in arrays[1].pairs.iter().enumerate() {
            by12[key(q, &[p[P12]])].push(r as u32);
        }
        for (r, p) in arrays[2].pairs.iter().enumerate() {
            by13_14[key(q, &[p[P13], p[P14]])].push(r as u32);
        }
        for (r, p) in arrays[3].pairs.iter().enumerate() {
            by23_24_34[key(q, &[p[P23], p[P24], p[P34]])].push(r as u32);
        }
        JoinIndex {
            arrays,
            q,
            by12,
            by13_14,
            by23_24_34,
        }
    }

    /// Rows of the second array compatible with row `r1` of the first.
    pub fn seconds(&self, r1: u32) -> &[u32] {
        let a = &self.arrays[0].pairs[r1 as usize];
        &self.by12[key(self.q, &[a[P12]])]
    }

    fn thirds(&self, r1: u32, r2: u32) -> &[u32] {
        let a = &self.arrays[0].pairs[r1 as usize];
        let b = &self.arrays[1].pairs[r2 as usize];
        &self.by13_14[key(self.q, &[a[P13], b[P14]])]
    }

    fn fourths(&self, r1: u32, r2: u32, r3: u32) -> &[u32] {
        let a = &self.arrays[0].pairs[r1 as usize];
        let b = &self.arrays[1].pairs[r2 as usize];
        let c = &self.arrays[2].pairs[r3 as usize];
        &self.by23_24_34[key(self.q, &[a[P23], b[P24], c[P34]])]
    }

    /// Number of candidates extending `(r1, r2)`.
    pub fn count(&self, r1: u32, r2: u32) -> u64 {
        self.thirds(r1, r2).iter().map(|&r3| self.fourths(r1, r2, r3).len() as u64).sum()
    }

    /// Candidates extending `(r1, r2)`, in lexicographic order.
    pub fn for_each(&self, r1: u32, r2: u32, mut f: impl FnMut([u32; 4])) {
        for &r3 in self.thirds(r1, r2) {
            for &r4 in self.fourths(r1, r2, r3) {
                f([r1, r2, r3, r4]);
            }
        }
    }

    /// Like [`JoinIndex::for_each`], numbering candidates from `first` and
    /// visiting only the indices `shard` owns, together with their index.
    pub fn for_each_owned(&self, r1: u32, r2: u32, first: u64, shard: Shard, mut f: impl FnMut(u64, [u32; 4])) {
        let n = shard.count as u64;
        let mut i = first;
        for &r3 in self.thirds(r1, r2) {
            let fourths = self.fourths(r1, r2, r3);
            let end = i + fourths.len() as u64;
            let mut j = i + (shard.index as u64 + n - i % n) % n;
            while j < end {
                f(j, [r1, r2, r3, fourths[(j - i) as usize]]);
                j += n;
            }
            i = end;
        }
    }
}

const P12: usize = 0;
const P13: usize = 1;
const P14: usize = 2;
const P23: usize = 3;
const P24: usize = 4;
const P34: usize = 5;

/// Row quadruples `(r123, r124, r134, r234)` whose shared pair coefficients
/// agree, in lexicographic order.
pub fn join_candidates(arrays: &[TripleArray; 4]) -> Vec<[u32; 4]> {
    let index = JoinIndex::new(arrays);
    let mut out = Vec::new();
    for r1 in 0..arrays[0].len() as u32 {
        for &r2 in index.seconds(r1) {
            index.for_each(r1, r2, |c| out.push(c));
        }
    }
    out
}

/// Coefficients of every `a`, `b`, `c` slot of an assembled candidate.
pub fn candidate_coefficients(
    g: &ShapeTemplate,
    arrays: &[TripleArray; 4],
    rows: [u32; 4],
) -> Result<BTreeMap<Slot, Fe>, SearchError> {
    let mut coefs: BTreeMap<Slot, Fe> = g.pins().into_iter().collect();
    for (arr, &r) in arrays.iter().zip(&rows) {
        for (slot, v) in arr.row_coefficients(r as usize) {
            if let Some(prev) = coefs.insert(slot, v) {
                if prev != v {
                    return Err(SearchError::ShapeMismatch(format!("rows disagree on {slot}")));
                }
            }
        }
    }
    Ok(coefs)
}

/// The four `d` slots in the order `x1^2`, `x2^2`, `x3^2`, `x4^2` of the
/// trailing factor `x1 x2 x3 x4 (a x1 + b x2 + c x3 + d x4)`.
pub const D_SLOTS: [Slot; 4] = [
    Slot::D(2, 3, 4, 1),
    Slot::D(1, 3, 4, 2),
    Slot::D(1, 2, 4, 3),
    Slot::D(1, 2, 3, 4),
];

/// Result of [`audit_counterexample`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineAudit {
    pub affine_zeros: u64,
    pub affine_nonsingular: u64,
    /// Projective census derived from the affine counts.
    pub census: ZeroCensus,
    /// No non-singular zero anywhere in 𝔽_q^n.
    pub confirmed: bool,
}

/// Evaluates the form and its gradient at every nonzero affine point.
pub fn audit_counterexample(form: &Form) -> AffineAudit {
    let field = form.field();
    let n = form.num_vars();
    let q = field.q() as u64;
    let grad = form.gradient();
    let mut zeros = 0;
    let mut nonsingular = 0;
    let mut x = vec![Fe::ZERO; n];
    for idx in 1..q.pow(n as u32) {
        let mut r = idx;
        for c in x.iter_mut() {
            *c = Fe((r % q) as u16);
            r /= q;
        }
        if !form.evaluate(&x).expect("dimension").is_zero() {
            continue;
        }
        zeros += 1;
        if grad.iter().any(|g| !g.evaluate(&x).expect("dimension").is_zero()) {
            nonsingular += 1;
        }
    }
    AffineAudit {
        affine_zeros: zeros,
        affine_nonsingular: nonsingular,
        census: ZeroCensus {
            total: zeros / (q - 1),
            singular: (zeros - nonsingular) / (q - 1),
            nonsingular: nonsingular / (q - 1),
            witnesses: None,
        },
        confirmed: nonsingular == 0,
    }
}

/// A quaternary form without a non-singular zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternarySurvivor {
    pub pin_class: usize,
    pub rows: [u32; 4],
    /// `(a, b, c, d)` as encodings.
    pub dterms: [u16; 4],
    pub zeros: u64,
    pub affine_confirmed: bool,
    /// The form in the text format of [`Form::to_text`].
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinClassRun {
    pub pins: String,
    pub array_sizes: [u64; 4],
    pub candidate_count: u64,
    pub survivor_count: u64,
}

/// Stage-two verdict for one field and g-shape.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuaternaryReport {
    pub claim: String,
    pub q: u32,
    pub g_shape: String,
    pub expectation: Expectation,
    pub verdict: Verdict,
    pub detail: String,
    /// Arrays for the pins `a = 1` on the three rescaled pair slots.
    pub array_sizes: [u64; 4],
    pub candidate_count: u64,
    pub dterm_space: u64,
    pub survivor_count: u64,
    pub survivors: Vec<QuaternarySurvivor>,
    pub pin_classes: Vec<PinClassRun>,
    pub forms_swept: u64,
    pub elapsed: f64,
    pub shards: String,
    pub shards_done: Vec<u32>,
    pub complete: bool,
    /// Stopped after enough survivors; counts cover only the visited part.
    #[serde(default)]
    pub stopped_early: bool,
}

impl QuaternaryReport {
    pub fn passed(&self) -> bool {
        self.verdict != Verdict::Fail
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    fn rejudge(&mut self) {
        let counts: Vec<u64> = self.survivors.iter().map(|s| s.zeros).collect();
        let (verdict, detail) = judge(&self.expectation, &counts, self.complete);
        self.verdict = verdict;
        self.detail = detail;
    }

    /// Combines shard reports of one run.
    pub fn merge(parts: &[QuaternaryReport]) -> Result<QuaternaryReport, SearchError> {
        let first = parts
            .first()
            .ok_or_else(|| SearchError::HeaderMismatch("nothing to merge".into()))?;
        let count: u32 = first
            .shards
            .split_once('/')
            .and_then(|(_, n)| n.parse().ok())
            .ok_or_else(|| SearchError::HeaderMismatch("shard layout".into()))?;
        let mut out = first.clone();
        out.shards_done.clear();
        out.survivors.clear();
        out.forms_swept = 0;
        out.elapsed = 0.0;
        for c in out.pin_classes.iter_mut() {
            c.survivor_count = 0;
        }
        for p in parts {
            if p.stopped_early {
                return Err(SearchError::Incomplete);
            }
            let same = p.q == first.q
                && p.g_shape == first.g_shape
                && p.candidate_count == first.candidate_count
                && p.shards.ends_with(&format!("/{count}"))
                && p.pin_classes.len() == first.pin_classes.len();
            if !same {
                return Err(SearchError::HeaderMismatch(format!("{} vs {}", p.claim, first.claim)));
            }
            for &s in &p.shards_done {
                if out.shards_done.contains(&s) {
                    return Err(SearchError::OverlappingShards(s));
                }
                out.shards_done.push(s);
            }
            for (o, c) in out.pin_classes.iter_mut().zip(&p.pin_classes) {
                o.survivor_count += c.survivor_count;
            }
            out.survivors.extend(p.survivors.iter().cloned());
            out.forms_swept += p.forms_swept;
            out.elapsed += p.elapsed;
        }
        out.shards_done.sort();
        out.survivors.sort_by(|a, b| (a.pin_class, a.rows, a.dterms).cmp(&(b.pin_class, b.rows, b.dterms)));
        out.survivor_count = out.survivors.len() as u64;
        out.complete = out.shards_done.len() as u32 == count;
        out.shards = if out.complete {
            format!("{count}/{count}")
        } else {
            format!("{}/{count}", out.shards_done.len())
        };
        out.rejudge();
        Ok(out)
    }
}

/// Orbit-normalized ternary survivor databases for a field.
pub fn lemma8_databases(field: &Arc<FieldSpec>, jobs: usize) -> Result<(SurvivorDb, SurvivorDb), SearchError> {
    let opts = SearchOptions {
        jobs,
        ..Default::default()
    };
    let t1 = enumerate_survivors(field, &lemma8_template(TripleShape::Transitive), Normalization::Orbit, &opts)?.0;
    let t2 = enumerate_survivors(field, &lemma8_template(TripleShape::Cyclic), Normalization::Orbit, &opts)?.0;
    Ok((t1, t2))
}

/// How the four trailing coefficients are swept for a candidate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// Strike zero hyperplanes from a bitset of `𝔽_q^4`.
    #[default]
    Cover,
    /// Incremental per-form search with [`SweepKernel`].
    Kernel,
    /// [`Form::find_nonsingular_zero`] on every form.
    Naive,
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::Cover => "cover",
            Engine::Kernel => "kernel",
            Engine::Naive => "naive",
        })
    }
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cover" => Ok(Engine::Cover),
            "kernel" => Ok(Engine::Kernel),
            "naive" => Ok(Engine::Naive),
            _ => Err(format!("unknown engine {s:?}")),
        }
    }
}

/// Knobs for [`verify_quaternary`].
#[derive(Clone, Copy, Debug)]
pub struct QuaternaryOptions {
    pub shard: Shard,
    pub jobs: usize,
    pub engine: Engine,
    /// Stop once this many survivors are known. The report is then marked
    /// incomplete.
    pub max_survivors: Option<u64>,
}

impl Default for QuaternaryOptions {
    fn default() -> Self {
        QuaternaryOptions {
            shard: Shard::ALL,
            jobs: 1,
            engine: Engine::Cover,
            max_survivors: None,
        }
    }
}

/// Pair slots each array contributes to the assembled form; every other
/// pair is contributed by an earlier array.
const OWNED_PAIRS: [&[usize]; 4] = [&[P12, P13, P23], &[P14, P24], &[P34], &[]];

/// Per-array data for the cover engine.
struct ArrayJets {
    /// Row-major jets of the row's owned terms.
    jets: Vec<Jet>,
    points: usize,
    /// Per row: zeros off the coordinate axes, in four coordinates.
    boundary: Vec<Vec<ProjectivePoint>>,
}

impl ArrayJets {
    fn new(field: &Arc<FieldSpec>, cover: &Cover, k: usize, arr: &TripleArray) -> Result<Self, SearchError> {
        let pinned: Vec<(Slot, Fe)> = arr
            .template
            .pins()
            .into_iter()
            .map(|(s, v)| (s.relabel(&arr.triple), v))
            .collect();
        let owned = |s: &Slot| match *s {
            Slot::A(i, j) => OWNED_PAIRS[k].contains(&pair_id(i, j)),
            _ => true,
        };
        let mut jets = Vec::with_capacity(arr.len() * cover.point_count());
        let mut boundary = Vec::with_capacity(arr.len());
        for (r, rec) in arr.db.records.iter().enumerate() {
            let terms: Vec<(Monomial, Fe)> = arr
                .row_coefficients(r)
                .chain(pinned.iter().copied())
                .filter(|(s, v)| !v.is_zero() && owned(s))
                .map(|(s, v)| (s.monomial(), v))
                .collect();
            jets.extend(cover.jets(&terms));
            let mut pts = Vec::new();
            for z in &rec.zero_points {
                let mut x = [Fe::ZERO; 4];
                for (p, &v) in z.coords().iter().enumerate() {
                    x[arr.triple[p] as usize - 1] = v;
                }
                if x.iter().filter(|v| !v.is_zero()).count() > 1 {
                    pts.push(ProjectivePoint::new(field, &x)?);
                }
            }
            boundary.push(pts);
        }
        Ok(ArrayJets {
            jets,
            points: cover.point_count(),
            boundary,
        })
    }

    fn row(&self, r: u32) -> &[Jet] {
        &self.jets[r as usize * self.points..(r as usize + 1) * self.points]
    }
}

/// Everything needed to sweep the candidates of one pin class.
struct ClassSweep<'a> {
    field: &'a Arc<FieldSpec>,
    g: ShapeTemplate,
    arrays: &'a [TripleArray; 4],
    engine: Engine,
    cover: Option<(&'a Cover, Vec<ArrayJets>)>,
    kernel: Option<SweepKernel>,
    slots: Vec<Slot>,
}

impl<'a> ClassSweep<'a> {
    fn new(
        field: &'a Arc<FieldSpec>,
        g: ShapeTemplate,
        arrays: &'a [TripleArray; 4],
        engine: Engine,
        cover: Option<&'a Cover>,
    ) -> Result<Self, SearchError> {
        let slots: Vec<Slot> = g.slots().iter().map(|(s, _)| *s).collect();
        let cover = match cover {
            Some(c) if engine == Engine::Cover && arrays.iter().all(|a| !a.is_empty()) => Some((
                c,
                (0..4)
                    .map(|k| ArrayJets::new(field, c, k, &arrays[k]))
                    .collect::<Result<Vec<_>, _>>()?,
            )),
            _ => None,
        };
        let kernel = match engine {
            Engine::Kernel => {
                let monos: Vec<Monomial> = slots.iter().map(|s| s.monomial()).collect();
                SweepKernel::new(field.clone(), 4, &monos)
            }
            _ => None,
        };
        let engine = match (engine, &cover, &kernel) {
            (Engine::Cover, None, _) | (Engine::Kernel, _, None) => Engine::Naive,
            (e, _, _) => e,
        };
        Ok(ClassSweep {
            field,
            g,
            arrays,
            engine,
            cover,
            kernel,
            slots,
        })
    }

    fn coefficient_form(&self, coefs: &BTreeMap<Slot, Fe>, t: [Fe; 4]) -> Result<Form, SearchError> {
        let mut f = Form::zero(self.field.clone(), 4, 5)?;
        for (s, v) in coefs {
            f.add_term(s.monomial(), *v)?;
        }
        for (s, v) in D_SLOTS.iter().zip(t) {
            f.add_term(s.monomial(), v)?;
        }
        Ok(f)
    }

    /// Trailing tuples `(a, b, c, d)` leaving the candidate without a
    /// non-singular zero.
    fn sweep(&self, rows: [u32; 4]) -> Result<Vec<[Fe; 4]>, SearchError> {
        let q = self.field.q() as u16;
        match (self.engine, &self.cover, &self.kernel) {
            (Engine::Cover, Some((cover, aj)), _) => {
                let jets = [aj[0].row(rows[0]), aj[1].row(rows[1]), aj[2].row(rows[2]), aj[3].row(rows[3])];
                let mut effects = Vec::new();
                if aj.iter().zip(rows).any(|(a, r)| !a.boundary[r as usize].is_empty()) {
                    let coefs = candidate_coefficients(&self.g, self.arrays, rows)?;
                    for (a, r) in aj.iter().zip(rows) {
                        for p in &a.boundary[r as usize] {
                            let mut grad = [Fe::ZERO; 4];
                            for (s, c) in &coefs {
                                let m = s.monomial();
                                for (k, g) in grad.iter_mut().enumerate() {
                                    *g = self.field.add(*g, self.field.mul(*c, m.eval_partial(self.field, p.coords(), k)));
                                }
                            }
                            effects.push(cover.boundary_effect(p, grad));
                        }
                    }
                }
                Ok(cover
                    .survivors(jets, &effects)
                    .into_iter()
                    .map(|t| t.map(|v| Fe(v as u16)))
                    .collect())
            }
            (Engine::Kernel, _, Some(k)) => {
                let coefs = candidate_coefficients(&self.g, self.arrays, rows)?;
                let fixed: Vec<(usize, Fe)> = self
                    .slots
                    .iter()
                    .enumerate()
                    .filter_map(|(i, s)| coefs.get(s).map(|v| (i, *v)))
                    .collect();
                // tail in slot order: d(1,2,3,4), d(1,2,4,3), d(1,3,4,2), d(2,3,4,1)
                let tail: Vec<(usize, Vec<Fe>)> = D_SLOTS
                    .iter()
                    .rev()
                    .map(|d| {
                        let i = self.slots.iter().position(|s| s == d).expect("d slot present");
                        (i, self.field.elements().collect())
                    })
                    .collect();
                let mut out = Vec::new();
                k.sweep(&fixed, &tail, |t| out.push([t[3], t[2], t[1], t[0]]));
                out.sort();
                Ok(out)
            }
            _ => {
                let coefs = candidate_coefficients(&self.g, self.arrays, rows)?;
                let mut out = Vec::new();
                for idx in 0..(q as u32).pow(4) {
                    let t = [0, 1, 2, 3].map(|k| Fe((idx / (q as u32).pow(3 - k)) as u16 % q));
                    if self.coefficient_form(&coefs, t)?.find_nonsingular_zero().is_none() {
                        out.push(t);
                    }
                }
                Ok(out)
            }
        }
    }
}

/// Sweeps the candidates of `g_index` (every pin class) owned by `opts.shard`.
///
/// Candidates of all pin classes are numbered consecutively in join order;
/// candidate `i` belongs to shard `i mod N`.
pub fn verify_quaternary(
    field: &Arc<FieldSpec>,
    g_index: u8,
    source: &ArraySource<'_>,
    cache: &ArrayCache,
    opts: &QuaternaryOptions,
) -> Result<QuaternaryReport, SearchError> {
    let start = Instant::now();
    let q = field.q();
    let classes = g_pin_classes(field, g_index)?;
    let cover = (opts.engine == Engine::Cover).then(|| Cover::new(field)).flatten();
    let mut pin_classes = Vec::new();
    let mut survivors = Vec::new();
    let mut swept = 0u64;
    let mut offset = 0u64;
    let mut first_sizes = [0u64; 4];
    let mut stopped = false;
    for (ci, pins) in classes.iter().enumerate() {
        let g = ShapeTemplate::g_with_pins(g_index, *pins)?;
        let arrays = build_arrays(field, g_index, *pins, source, cache)?;
        let sizes = arrays.each_ref().map(|a| a.len() as u64);
        if ci == 0 {
            first_sizes = sizes;
        }
        let pins_text: Vec<String> = g.pins().iter().map(|(s, v)| format!("{s}:{v}")).collect();
        let mut run = PinClassRun {
            pins: pins_text.join(","),
            array_sizes: sizes,
            candidate_count: 0,
            survivor_count: 0,
        };
        if stopped {
            pin_classes.push(run);
            continue;
        }
        let class = ClassSweep::new(field, g.clone(), &arrays, opts.engine, cover.as_ref())?;
        let index = JoinIndex::new(&arrays);
        let mut units = (0..arrays[0].len() as u32).flat_map(|r1| index.seconds(r1).iter().map(move |&r2| (r1, r2)));
        let batch_size = if opts.max_survivors.is_some() { opts.jobs.max(1) } else { 1024 };
        let mut hits: Vec<([u32; 4], [Fe; 4])> = Vec::new();
        loop {
            let batch: Vec<(u32, u32)> = units.by_ref().take(batch_size).collect();
            if batch.is_empty() {
                break;
            }
            let counts = parallel_map(&batch, opts.jobs, |&(r1, r2)| index.count(r1, r2));
            let mut work = Vec::with_capacity(batch.len());
            for (&u, &n) in batch.iter().zip(&counts) {
                work.push((u, offset));
                offset += n;
                run.candidate_count += n;
            }
            let results = parallel_map(&work, opts.jobs, |&((r1, r2), first)| {
                let mut found = Vec::new();
                let mut n = 0u64;
                let mut err = None;
                index.for_each_owned(r1, r2, first, opts.shard, |_, rows| {
                    if err.is_none() {
                        n += 1;
                        match class.sweep(rows) {
                            Ok(ts) => found.extend(ts.into_iter().map(|t| (rows, t))),
                            Err(e) => err = Some(e),
                        }
                    }
                });
                err.map_or(Ok((found, n)), Err)
            });
            for r in results {
                let (found, n) = r?;
                swept += n;
                hits.extend(found);
            }
            if opts.max_survivors.is_some_and(|m| survivors.len() as u64 + hits.len() as u64 >= m) {
                stopped = units.next().is_some() || ci + 1 < classes.len();
                break;
            }
        }
        for (rows, t) in hits {
            let coefs = candidate_coefficients(&g, &arrays, rows)?;
            let form = class.coefficient_form(&coefs, t)?;
            let census = form.count_projective_zeros(false);
            let audit = audit_counterexample(&form);
            if census.nonsingular != 0 || !audit.confirmed || audit.census.total != census.total {
                return Err(SearchError::KernelMismatch(format!("{rows:?} {t:?}")));
            }
            run.survivor_count += 1;
            survivors.push(QuaternarySurvivor {
                pin_class: ci,
                rows,
                dterms: t.map(|v| v.0),
                zeros: census.total,
                affine_confirmed: audit.confirmed,
                form: form.to_text(),
            });
        }
        pin_classes.push(run);
    }
    if let Some(m) = opts.max_survivors {
        survivors.truncate(m as usize);
    }
    let expectation = ClaimsTable::builtin().quaternary(q, g_index);
    let complete = opts.shard.count == 1 && !stopped;
    let mut report = QuaternaryReport {
        claim: format!("quaternary/q={q}/g{g_index}"),
        q,
        g_shape: format!("g{g_index}"),
        expectation,
        verdict: Verdict::Unknown,
        detail: String::new(),
        array_sizes: first_sizes,
        candidate_count: offset,
        dterm_space: (q as u64).pow(4),
        survivor_count: survivors.len() as u64,
        survivors,
        pin_classes,
        forms_swept: swept * (q as u64).pow(4),
        elapsed: start.elapsed().as_secs_f64(),
        shards: if complete { "1/1".into() } else { opts.shard.to_string() },
        shards_done: if stopped { vec![] } else { vec![opts.shard.index] },
        complete,
        stopped_early: stopped,
    };
    report.rejudge();
    Ok(report)
}

/// Checkpoint file of one shard of a quaternary run.
pub fn checkpoint_path(dir: &Path, q: u32, g_index: u8, engine: Engine, shard: Shard) -> PathBuf {
    dir.join(format!(
        "quaternary-v{CHECKPOINT_VERSION}-q{q}-g{g_index}-{engine}-{}of{}.json",
        shard.index, shard.count
    ))
}

const CHECKPOINT_VERSION: u32 = 1;

/// Runs every shard of `count`, reusing finished shards stored in `dir`, and merges them.
///
/// `progress` sees each shard report as it becomes available.
pub fn verify_quaternary_checkpointed(
    field: &Arc<FieldSpec>,
    g_index: u8,
    source: &ArraySource,
    cache: &ArrayCache,
    opts: &QuaternaryOptions,
    count: u32,
    dir: &Path,
    mut progress: impl FnMut(&QuaternaryReport, bool),
) -> Result<QuaternaryReport, SearchError> {
    let io = |path: &Path, e: std::io::Error| SearchError::Checkpoint {
        path: path.display().to_string(),
        msg: e.to_string(),
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut parts = Vec::new();
    for index in 0..count {
        let shard = Shard::new(index, count)?;
        let path = checkpoint_path(dir, field.q(), g_index, opts.engine, shard);
        let stored = fs::read_to_string(&path)
            .ok()
            .and_then(|t| QuaternaryReport::from_json(&t).ok())
            .filter(|r| {
                r.q == field.q()
                    && r.g_shape == format!("g{g_index}")
                    && r.shards == if count == 1 { "1/1".into() } else { shard.to_string() }
                    && r.shards_done == [index]
                    && !r.stopped_early
            });
        let report = match stored {
            Some(r) => {
                progress(&r, true);
                r
            }
            None => {
                let shard_opts = QuaternaryOptions {
                    shard,
                    max_survivors: None,
                    ..*opts
                };
                let r = verify_quaternary(field, g_index, source, cache, &shard_opts)?;
                let tmp = path.with_extension("tmp");
                fs::write(&tmp, r.to_json()).map_err(|e| io(&tmp, e))?;
                fs::rename(&tmp, &path).map_err(|e| io(&path, e))?;
                progress(&r, false);
                r
            }
        };
        parts.push(report);
    }
    QuaternaryReport::merge(&parts)
}
