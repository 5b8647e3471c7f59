//! Shape families of reduced ternary and quaternary quintics.
//!
//! After the lines through pairs of basis zeros are known to carry no
//! non-singular zero, a quintic restricted to the span of three or four such
//! zeros only has monomials of four kinds:
//!
//! * `a(i,j)`: `x_i^3 x_j^2`, exactly one direction per pair;
//! * `b(i,j,k)`: `x_i x_j x_k^3` with `i < j`;
//! * `c(i,j,k)`: `x_i x_j^2 x_k^2` with `j < k`;
//! * `d(i,j,k,l)`: `x_i x_j x_k x_l^2` with `i < j < k` (four variables only).
//!
//! Which direction survives for each pair is a tournament on the variables.
//! Three vertices give the transitive shape `t1` or the cyclic `t2`; four
//! vertices give the classes `g1`..`g4`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::forms::{Form, FormError, Monomial};
use crate::gf::{Fe, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShapeError {
    #[error("slot {0} is not part of the template")]
    UnknownSlot(Slot),
    #[error("slot {0} points against the tournament direction")]
    AntiDirectionPin(Slot),
    #[error("pair coefficient {0} must be nonzero")]
    ZeroPin(Slot),
    #[error("value {value} is outside the domain of {slot}")]
    DomainViolation { slot: Slot, value: Fe },
    #[error("expected {expected} free values, got {got}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("invalid shape index {0}")]
    BadIndex(u8),
    #[error("not a tournament: {0}")]
    NotATournament(String),
    #[error("malformed template descriptor: {0}")]
    BadDescriptor(String),
    #[error("scaling factors must be nonzero")]
    ZeroScalar,
    #[error(transparent)]
    Form(#[from] FormError),
}

/// A coefficient position of the reduced shape, with 1-based variable indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Slot {
    A(u8, u8),
    B(u8, u8, u8),
    C(u8, u8, u8),
    D(u8, u8, u8, u8),
}

impl Slot {
    pub fn is_pair(&self) -> bool {
        matches!(self, Slot::A(..))
    }

    pub fn monomial(&self) -> Monomial {
        let mut e = [0u8; crate::forms::MAX_VARS];
        let mut bump = |v: u8, by: u8| e[v as usize - 1] += by;
        match *self {
            Slot::A(i, j) => {
                bump(i, 3);
                bump(j, 2);
            }
            Slot::B(i, j, k) => {
                bump(i, 1);
                bump(j, 1);
                bump(k, 3);
            }
            Slot::C(i, j, k) => {
                bump(i, 1);
                bump(j, 2);
                bump(k, 2);
            }
            Slot::D(i, j, k, l) => {
                bump(i, 1);
                bump(j, 1);
                bump(k, 1);
                bump(l, 2);
            }
        }
        Monomial(e)
    }

    pub fn vars(&self) -> Vec<u8> {
        match *self {
            Slot::A(i, j) => vec![i, j],
            Slot::B(i, j, k) | Slot::C(i, j, k) => vec![i, j, k],
            Slot::D(i, j, k, l) => vec![i, j, k, l],
        }
    }

    /// Relabels variables through `map` (index `v-1` holds the new label of
    /// `v`) and restores the index conventions of each kind.
    pub fn relabel(&self, map: &[u8]) -> Slot {
        let r = |v: u8| map[v as usize - 1];
        match *self {
            Slot::A(i, j) => Slot::A(r(i), r(j)),
            Slot::B(i, j, k) => {
                let (x, y) = (r(i), r(j));
                Slot::B(x.min(y), x.max(y), r(k))
            }
            Slot::C(i, j, k) => {
                let (x, y) = (r(j), r(k));
                Slot::C(r(i), x.min(y), x.max(y))
            }
            Slot::D(i, j, k, l) => {
                let mut t = [r(i), r(j), r(k)];
                t.sort();
                Slot::D(t[0], t[1], t[2], r(l))
            }
        }
    }

    fn sort_key(&self) -> (u8, [u8; 4]) {
        match *self {
            Slot::A(i, j) => (0, [i.min(j), i.max(j), i, j]),
            Slot::B(i, j, k) => (1, [i, j, k, 0]),
            Slot::C(i, j, k) => (2, [i, j, k, 0]),
            Slot::D(i, j, k, l) => (3, [i, j, k, l]),
        }
    }

    /// The non-pair slots on `m` variables in canonical order.
    pub fn mixed_slots(m: u8) -> Vec<Slot> {
        let mut out = Vec::new();
        for i in 1..=m {
            for j in i + 1..=m {
                for k in 1..=m {
                    if k != i && k != j {
                        out.push(Slot::B(i, j, k));
                    }
                }
            }
        }
        for i in 1..=m {
            for j in 1..=m {
                for k in j + 1..=m {
                    if i != j && i != k {
                        out.push(Slot::C(i, j, k));
                    }
                }
            }
        }
        if m == 4 {
            for (i, j, k, l) in [(1, 2, 3, 4), (1, 2, 4, 3), (1, 3, 4, 2), (2, 3, 4, 1)] {
                out.push(Slot::D(i, j, k, l));
            }
        }
        out.sort();
        out
    }
}

impl Ord for Slot {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl PartialOrd for Slot {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Slot::A(i, j) => write!(f, "a({i},{j})"),
            Slot::B(i, j, k) => write!(f, "b({i},{j},{k})"),
            Slot::C(i, j, k) => write!(f, "c({i},{j},{k})"),
            Slot::D(i, j, k, l) => write!(f, "d({i},{j},{k},{l})"),
        }
    }
}

impl FromStr for Slot {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ShapeError::BadDescriptor(s.to_string());
        let s = s.trim();
        let (kind, rest) = s.split_at(1);
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(bad)?;
        let idx: Vec<u8> = inner
            .split(',')
            .map(|t| t.trim().parse::<u8>().map_err(|_| bad()))
            .collect::<Result<_, _>>()?;
        if idx.iter().any(|&v| v == 0 || v > 4) {
            return Err(bad());
        }
        let distinct = |v: &[u8]| v.iter().enumerate().all(|(a, x)| v[a + 1..].iter().all(|y| y != x));
        if !distinct(&idx) {
            return Err(bad());
        }
        let slot = match (kind, idx.as_slice()) {
            ("a", &[i, j]) => Slot::A(i, j),
            ("b", &[i, j, k]) if i < j => Slot::B(i, j, k),
            ("c", &[i, j, k]) if j < k => Slot::C(i, j, k),
            ("d", &[i, j, k, l]) if i < j && j < k => Slot::D(i, j, k, l),
            _ => return Err(bad()),
        };
        Ok(slot)
    }
}

/// Shape of a tournament on three vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TripleShape {
    Transitive,
    Cyclic,
}

/// One direction per unordered pair of variables; `i → j` means the
/// coefficient of `x_i^3 x_j^2` is the potentially nonzero one.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Tournament {
    m: u8,
    beats: [[bool; 4]; 4],
}

impl fmt::Debug for Tournament {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<String> = self.edges().iter().map(|(i, j)| format!("{i}→{j}")).collect();
        write!(f, "Tournament[{}]", edges.join(", "))
    }
}

impl Tournament {
    pub fn new(m: u8, edges: &[(u8, u8)]) -> Result<Self, ShapeError> {
        if !(2..=4).contains(&m) {
            return Err(ShapeError::NotATournament(format!("{m} vertices")));
        }
        let mut beats = [[false; 4]; 4];
        for &(i, j) in edges {
            if i == 0 || j == 0 || i > m || j > m || i == j {
                return Err(ShapeError::NotATournament(format!("edge {i}→{j}")));
            }
            let (a, b) = (i as usize - 1, j as usize - 1);
            if beats[a][b] || beats[b][a] {
                return Err(ShapeError::NotATournament(format!("pair {{{i},{j}}} repeated")));
            }
            beats[a][b] = true;
        }
        let t = Tournament { m, beats };
        for i in 1..=m {
            for j in i + 1..=m {
                if !t.beats(i, j) && !t.beats(j, i) {
                    return Err(ShapeError::NotATournament(format!("pair {{{i},{j}}} missing")));
                }
            }
        }
        Ok(t)
    }

    /// Canonical transitive pattern 1→2, 1→3, 2→3.
    pub fn transitive3() -> Self {
        Tournament::new(3, &[(1, 2), (1, 3), (2, 3)]).unwrap()
    }

    /// Canonical cyclic pattern 1→2, 2→3, 3→1.
    pub fn cyclic3() -> Self {
        Tournament::new(3, &[(1, 2), (2, 3), (3, 1)]).unwrap()
    }

    pub fn vertices(&self) -> u8 {
        self.m
    }

    #[inline]
    pub fn beats(&self, i: u8, j: u8) -> bool {
        self.beats[i as usize - 1][j as usize - 1]
    }

    /// Edges `(i, j)` with `i → j`, by unordered pair.
    pub fn edges(&self) -> Vec<(u8, u8)> {
        let mut out = Vec::new();
        for i in 1..=self.m {
            for j in i + 1..=self.m {
                out.push(if self.beats(i, j) { (i, j) } else { (j, i) });
            }
        }
        out
    }

    pub fn pair_slots(&self) -> Vec<Slot> {
        self.edges().into_iter().map(|(i, j)| Slot::A(i, j)).collect()
    }

    fn score(&self, v: u8) -> u8 {
        (1..=self.m).filter(|&w| w != v && self.beats(v, w)).count() as u8
    }

    /// Shape of a three-vertex tournament.
    pub fn triple_shape(&self) -> Option<TripleShape> {
        if self.m != 3 {
            return None;
        }
        let mut s: Vec<u8> = (1..=3).map(|v| self.score(v)).collect();
        s.sort();
        Some(if s == [0, 1, 2] {
            TripleShape::Transitive
        } else {
            TripleShape::Cyclic
        })
    }

    /// Which of `g1`..`g4` a four-vertex tournament is isomorphic to.
    pub fn quaternary_class(&self) -> Option<u8> {
        if self.m != 4 {
            return None;
        }
        let mut s: Vec<u8> = (1..=4).map(|v| self.score(v)).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        match s.as_slice() {
            [3, 2, 1, 0] => Some(1),
            [2, 2, 2, 0] => Some(2),
            [2, 2, 1, 1] => Some(3),
            [3, 1, 1, 1] => Some(4),
            _ => None,
        }
    }

    /// Tournament induced on `triple` (ascending), relabeled 1, 2, 3 in order.
    pub fn induced(&self, triple: [u8; 3]) -> Tournament {
        let mut edges = Vec::new();
        for a in 0..3 {
            for b in a + 1..3 {
                if self.beats(triple[a], triple[b]) {
                    edges.push((a as u8 + 1, b as u8 + 1));
                } else {
                    edges.push((b as u8 + 1, a as u8 + 1));
                }
            }
        }
        Tournament::new(3, &edges).expect("induced tournament")
    }
}

/// Result of classifying a triple of a tournament.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TripleClass {
    pub shape: TripleShape,
    /// `relabel[c]` is the original vertex playing canonical variable `c+1`.
    pub relabel: [u8; 3],
}

/// Classifies the tournament restricted to `triple` and finds the vertex
/// order carrying it onto the canonical `t1` (1→2, 1→3, 2→3) or `t2`
/// (1→2, 2→3, 3→1) pattern.
pub fn classify_triple(t: &Tournament, triple: [u8; 3]) -> TripleClass {
    let score = |v: u8| triple.iter().filter(|&&w| w != v && t.beats(v, w)).count();
    let mut sorted = triple;
    sorted.sort();
    let transitive = triple.iter().map(|&v| score(v)).max() == Some(2);
    if transitive {
        let mut relabel = sorted;
        relabel.sort_by_key(|&v| std::cmp::Reverse(score(v)));
        TripleClass {
            shape: TripleShape::Transitive,
            relabel,
        }
    } else {
        let first = sorted[0];
        let second = *sorted.iter().find(|&&w| w != first && t.beats(first, w)).unwrap();
        let third = *sorted.iter().find(|&&w| w != first && w != second).unwrap();
        TripleClass {
            shape: TripleShape::Cyclic,
            relabel: [first, second, third],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SlotStatus {
    Pinned(Fe),
    Free,
    Zero,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShapeKind {
    T1,
    T2,
    G(u8),
    Custom,
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeKind::T1 => write!(f, "t1"),
            ShapeKind::T2 => write!(f, "t2"),
            ShapeKind::G(i) => write!(f, "g{i}"),
            ShapeKind::Custom => write!(f, "custom"),
        }
    }
}

impl FromStr for ShapeKind {
    type Err = ShapeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "t1" => ShapeKind::T1,
            "t2" => ShapeKind::T2,
            "g1" => ShapeKind::G(1),
            "g2" => ShapeKind::G(2),
            "g3" => ShapeKind::G(3),
            "g4" => ShapeKind::G(4),
            "custom" => ShapeKind::Custom,
            _ => return Err(ShapeError::BadDescriptor(s.to_string())),
        })
    }
}

/// Slot list with per-slot status. Slots are kept in canonical order: pair
/// slots by unordered pair, then `b`, `c`, `d` slots by index tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShapeTemplate {
    kind: ShapeKind,
    tournament: Tournament,
    slots: Vec<(Slot, SlotStatus)>,
}

/// Tournament of `g1`..`g4`; all share the tail 2→3, 2→4, 3→4.
pub fn g_tournament(index: u8) -> Result<Tournament, ShapeError> {
    let head: [(u8, u8); 3] = match index {
        1 => [(1, 2), (1, 3), (1, 4)],
        2 => [(1, 2), (3, 1), (1, 4)],
        3 => [(1, 2), (1, 3), (4, 1)],
        4 => [(2, 1), (1, 3), (4, 1)],
        _ => return Err(ShapeError::BadIndex(index)),
    };
    let mut edges = head.to_vec();
    edges.extend([(2, 3), (2, 4), (3, 4)]);
    Tournament::new(4, &edges)
}

/// The three pair slots rescaled to one in `g1`..`g4`.
pub fn g_pin_slots(index: u8) -> Result<[Slot; 3], ShapeError> {
    match index {
        1..=3 => Ok([Slot::A(1, 2), Slot::A(2, 3), Slot::A(3, 4)]),
        4 => Ok([Slot::A(2, 1), Slot::A(2, 3), Slot::A(3, 4)]),
        _ => Err(ShapeError::BadIndex(index)),
    }
}

impl ShapeTemplate {
    /// Template with every slot of the tournament free, then `pins` applied.
    pub fn from_tournament(
        kind: ShapeKind,
        tournament: Tournament,
        pins: &[(Slot, Fe)],
    ) -> Result<Self, ShapeError> {
        let mut slots: Vec<(Slot, SlotStatus)> = tournament
            .pair_slots()
            .into_iter()
            .chain(Slot::mixed_slots(tournament.vertices()))
            .map(|s| (s, SlotStatus::Free))
            .collect();
        slots.sort_by_key(|(s, _)| *s);
        let mut t = ShapeTemplate {
            kind,
            tournament,
            slots,
        };
        for &(slot, v) in pins {
            t = t.with_status(slot, SlotStatus::Pinned(v))?;
        }
        Ok(t)
    }

    /// `t1` or `t2` with the given pair coefficients pinned.
    pub fn ternary(shape: TripleShape, pins: &[(Slot, Fe)]) -> Result<Self, ShapeError> {
        let (kind, t) = match shape {
            TripleShape::Transitive => (ShapeKind::T1, Tournament::transitive3()),
            TripleShape::Cyclic => (ShapeKind::T2, Tournament::cyclic3()),
        };
        for (slot, _) in pins {
            if !slot.is_pair() {
                return Err(ShapeError::UnknownSlot(*slot));
            }
        }
        Self::from_tournament(kind, t, pins)
    }

    /// `g_index` with the three rescaled pair coefficients set to one.
    pub fn g(index: u8) -> Result<Self, ShapeError> {
        Self::g_with_pins(index, [Fe::ONE; 3])
    }

    /// `g_index` with the rescaled pair slots set to `values`.
    pub fn g_with_pins(index: u8, values: [Fe; 3]) -> Result<Self, ShapeError> {
        let t = g_tournament(index)?;
        let slots = g_pin_slots(index)?;
        let pins: Vec<(Slot, Fe)> = slots.into_iter().zip(values).collect();
        Self::from_tournament(ShapeKind::G(index), t, &pins)
    }

    /// Replaces the status of one slot.
    pub fn with_status(&self, slot: Slot, status: SlotStatus) -> Result<Self, ShapeError> {
        if let (Slot::A(..), SlotStatus::Pinned(v)) = (slot, status) {
            if v.is_zero() {
                return Err(ShapeError::ZeroPin(slot));
            }
        }
        let mut out = self.clone();
        match out.slots.iter_mut().find(|(s, _)| *s == slot) {
            Some(entry) => entry.1 = status,
            None => {
                if let Slot::A(i, j) = slot {
                    if i <= self.m() && j <= self.m() && self.tournament.beats(j, i) {
                        return Err(ShapeError::AntiDirectionPin(slot));
                    }
                }
                return Err(ShapeError::UnknownSlot(slot));
            }
        }
        Ok(out)
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn m(&self) -> u8 {
        self.tournament.vertices()
    }

    pub fn tournament(&self) -> &Tournament {
        &self.tournament
    }

    pub fn slots(&self) -> &[(Slot, SlotStatus)] {
        &self.slots
    }

    pub fn status(&self, slot: Slot) -> SlotStatus {
        self.slots
            .iter()
            .find(|(s, _)| *s == slot)
            .map(|(_, st)| *st)
            .unwrap_or(SlotStatus::Zero)
    }

    pub fn free_slots(&self) -> Vec<Slot> {
        self.slots
            .iter()
            .filter(|(_, st)| *st == SlotStatus::Free)
            .map(|(s, _)| *s)
            .collect()
    }

    pub fn pins(&self) -> Vec<(Slot, Fe)> {
        self.slots
            .iter()
            .filter_map(|(s, st)| match st {
                SlotStatus::Pinned(v) => Some((*s, *v)),
                _ => None,
            })
            .collect()
    }

    /// Values a free slot ranges over: units for pair slots, everything else.
    pub fn domain(slot: Slot, field: &FieldSpec) -> Vec<Fe> {
        if slot.is_pair() {
            field.nonzero_elements().collect()
        } else {
            field.elements().collect()
        }
    }

    /// Number of instantiations.
    pub fn instantiation_count(&self, q: u32) -> u128 {
        self.free_slots()
            .iter()
            .map(|s| if s.is_pair() { q as u128 - 1 } else { q as u128 })
            .product()
    }

    /// Coefficient of every live slot under an assignment of the free slots.
    pub fn coefficients(&self, field: &FieldSpec, assignment: &[Fe]) -> Result<Vec<(Slot, Fe)>, ShapeError> {
        let free = self.free_slots();
        if assignment.len() != free.len() {
            return Err(ShapeError::AssignmentLength {
                expected: free.len(),
                got: assignment.len(),
            });
        }
        let mut values = assignment.iter();
        let mut out = Vec::with_capacity(self.slots.len());
        for &(slot, st) in &self.slots {
            let v = match st {
                SlotStatus::Pinned(v) => v,
                SlotStatus::Zero => continue,
                SlotStatus::Free => {
                    let v = *values.next().unwrap();
                    if v.0 as u32 >= field.q() || (slot.is_pair() && v.is_zero()) {
                        return Err(ShapeError::DomainViolation { slot, value: v });
                    }
                    v
                }
            };
            out.push((slot, v));
        }
        Ok(out)
    }

    pub fn instantiate(&self, field: &Arc<FieldSpec>, assignment: &[Fe]) -> Result<Form, ShapeError> {
        let coefs = self.coefficients(field, assignment)?;
        let mut f = Form::zero(field.clone(), self.m() as usize, 5)?;
        for (slot, v) in coefs {
            f.add_term(slot.monomial(), v)?;
        }
        Ok(f)
    }

    /// Reads the free-slot assignment back out of a form of this shape.
    /// Returns `None` if the form has coefficients outside the template or
    /// disagrees with a pin.
    pub fn assignment_of(&self, form: &Form) -> Option<Vec<Fe>> {
        let m = self.m() as usize;
        if form.num_vars() != m || form.degree() != 5 {
            return None;
        }
        let mut out = Vec::new();
        let mut seen = 0;
        for &(slot, st) in &self.slots {
            let c = form.coefficient(&slot.monomial().0[..m]);
            if !c.is_zero() {
                seen += 1;
            }
            match st {
                SlotStatus::Pinned(v) if v != c => return None,
                SlotStatus::Zero if !c.is_zero() => return None,
                SlotStatus::Free => {
                    if slot.is_pair() && c.is_zero() {
                        return None;
                    }
                    out.push(c);
                }
                _ => {}
            }
        }
        (seen == form.terms().count()).then_some(out)
    }

    /// Template induced on an ascending triple of a four-variable template,
    /// variables relabeled 1, 2, 3 in order; statuses are inherited.
    pub fn induced_on(&self, triple: [u8; 3]) -> ShapeTemplate {
        let local = self.tournament.induced(triple);
        let mut map = [0u8; 4];
        for (pos, &v) in triple.iter().enumerate() {
            map[v as usize - 1] = pos as u8 + 1;
        }
        let mut slots: Vec<(Slot, SlotStatus)> = self
            .slots
            .iter()
            .filter(|(s, _)| s.vars().iter().all(|v| triple.contains(v)))
            .map(|&(s, st)| (s.relabel(&map[..self.m() as usize]), st))
            .collect();
        slots.sort_by_key(|(s, _)| *s);
        let kind = if local == Tournament::transitive3() {
            ShapeKind::T1
        } else if local == Tournament::cyclic3() {
            ShapeKind::T2
        } else {
            ShapeKind::Custom
        };
        ShapeTemplate {
            kind,
            tournament: local,
            slots,
        }
    }

    /// `shape=<kind> pins=<slot:value,...> free=<slot,...>`
    pub fn descriptor(&self) -> String {
        let pins: Vec<String> = self.pins().iter().map(|(s, v)| format!("{s}:{v}")).collect();
        let free: Vec<String> = self.free_slots().iter().map(|s| s.to_string()).collect();
        format!("shape={} pins={} free={}", self.kind, pins.join(","), free.join(","))
    }

    pub fn from_descriptor(line: &str) -> Result<Self, ShapeError> {
        let bad = || ShapeError::BadDescriptor(line.to_string());
        let mut kind = None;
        let mut pins = Vec::new();
        let mut free = Vec::new();
        for tok in line.split_whitespace() {
            let (key, val) = tok.split_once('=').ok_or_else(bad)?;
            match key {
                "shape" => kind = Some(val.parse::<ShapeKind>()?),
                "pins" => {
                    for item in split_slots(val) {
                        let (s, v) = item.rsplit_once(':').ok_or_else(bad)?;
                        let v: u16 = v.parse().map_err(|_| bad())?;
                        pins.push((s.parse::<Slot>()?, Fe(v)));
                    }
                }
                "free" => {
                    for item in split_slots(val) {
                        free.push(item.parse::<Slot>()?);
                    }
                }
                _ => return Err(bad()),
            }
        }
        let kind = kind.ok_or_else(bad)?;
        let mut slots: Vec<(Slot, SlotStatus)> = pins
            .iter()
            .map(|&(s, v)| (s, SlotStatus::Pinned(v)))
            .chain(free.iter().map(|&s| (s, SlotStatus::Free)))
            .collect();
        slots.sort_by_key(|(s, _)| *s);
        if slots.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(bad());
        }
        let m = slots
            .iter()
            .flat_map(|(s, _)| s.vars())
            .max()
            .ok_or_else(bad)?;
        let edges: Vec<(u8, u8)> = slots
            .iter()
            .filter_map(|(s, _)| match s {
                Slot::A(i, j) => Some((*i, *j)),
                _ => None,
            })
            .collect();
        let tournament = Tournament::new(m, &edges)?;
        Ok(ShapeTemplate {
            kind,
            tournament,
            slots,
        })
    }
}

fn split_slots(val: &str) -> Vec<&str> {
    // items look like `a(1,2):1` or `b(1,2,3)`; split on commas outside parens
    let mut out = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    for (i, ch) in val.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&val[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    if start < val.len() {
        out.push(&val[start..]);
    }
    out
}

/// An element `(c, λ_1, ..., λ_m)` of the diagonal scaling group acting by
/// `f(x) ↦ c · f(λ_1 x_1, ..., λ_m x_m)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalingElement {
    pub c: Fe,
    pub lambdas: Vec<Fe>,
}

impl ScalingElement {
    pub fn identity(m: usize) -> Self {
        ScalingElement {
            c: Fe::ONE,
            lambdas: vec![Fe::ONE; m],
        }
    }

    pub fn compose(&self, other: &ScalingElement, field: &FieldSpec) -> ScalingElement {
        ScalingElement {
            c: field.mul(self.c, other.c),
            lambdas: self
                .lambdas
                .iter()
                .zip(&other.lambdas)
                .map(|(&a, &b)| field.mul(a, b))
                .collect(),
        }
    }

    /// Factor multiplying the coefficient of `monomial`.
    pub fn factor(&self, field: &FieldSpec, monomial: &Monomial) -> Fe {
        let mut acc = self.c;
        for (i, &l) in self.lambdas.iter().enumerate() {
            acc = field.mul(acc, field.pow(l, monomial.exp(i) as u64));
        }
        acc
    }
}

pub fn apply_scaling(f: &Form, g: &ScalingElement) -> Result<Form, ShapeError> {
    let field = f.field();
    if g.c.is_zero() || g.lambdas.iter().any(|l| l.is_zero()) {
        return Err(ShapeError::ZeroScalar);
    }
    if g.lambdas.len() != f.num_vars() {
        return Err(FormError::DimensionMismatch {
            expected: f.num_vars(),
            got: g.lambdas.len(),
        }
        .into());
    }
    let mut out = Form::zero(field.clone(), f.num_vars(), f.degree())?;
    for (m, &c) in f.terms() {
        out.add_term(*m, field.mul(c, g.factor(field, m)))?;
    }
    Ok(out)
}

/// Exponent of `(c, λ_1, ..., λ_m)` in the factor a slot's coefficient picks
/// up under scaling.
pub fn slot_weights(slot: Slot, m: u8) -> Vec<u32> {
    let mono = slot.monomial();
    std::iter::once(1)
        .chain((0..m as usize).map(|i| mono.exp(i) as u32))
        .collect()
}

/// Every element of the scaling group on `m` variables.
pub fn scaling_group(field: &FieldSpec, m: usize) -> impl Iterator<Item = ScalingElement> + '_ {
    let units = field.q() as usize - 1;
    let total = units.pow(m as u32 + 1);
    (0..total).map(move |mut idx| {
        let mut digits = vec![0usize; m + 1];
        for d in digits.iter_mut().rev() {
            *d = idx % units;
            idx /= units;
        }
        ScalingElement {
            c: Fe(digits[0] as u16 + 1),
            lambdas: digits[1..].iter().map(|&d| Fe(d as u16 + 1)).collect(),
        }
    })
}

/// Partition of unit tuples (one entry per weighted slot) into scaling orbits.
#[derive(Clone, Debug)]
pub struct OrbitPartition {
    units: usize,
    arity: usize,
    m: usize,
    reps: Vec<Vec<Fe>>,
    rep_of: Vec<u32>,
    /// Group element, in discrete-log form, carrying each tuple to its representative.
    mover_logs: Vec<Vec<u32>>,
}

impl OrbitPartition {
    pub fn reps(&self) -> &[Vec<Fe>] {
        &self.reps
    }

    pub fn orbit_count(&self) -> usize {
        self.reps.len()
    }

    pub fn tuple_count(&self) -> usize {
        self.rep_of.len()
    }

    /// Position of a unit tuple in lexicographic encoding order.
    pub fn tuple_index(&self, tuple: &[Fe]) -> usize {
        tuple
            .iter()
            .fold(0, |acc, &v| acc * self.units + (v.0 as usize - 1))
    }

    pub fn tuple_at(&self, mut idx: usize) -> Vec<Fe> {
        let mut out = vec![Fe::ZERO; self.arity];
        for v in out.iter_mut().rev() {
            *v = Fe((idx % self.units) as u16 + 1);
            idx /= self.units;
        }
        out
    }

    pub fn representative_index(&self, tuple: &[Fe]) -> usize {
        self.rep_of[self.tuple_index(tuple)] as usize
    }

    pub fn representative(&self, tuple: &[Fe]) -> &[Fe] {
        &self.reps[self.representative_index(tuple)]
    }

    /// A group element mapping `tuple` to its representative.
    pub fn mover(&self, field: &FieldSpec, tuple: &[Fe]) -> ScalingElement {
        let logs = &self.mover_logs[self.tuple_index(tuple)];
        ScalingElement {
            c: field.exp(logs[0] as u64),
            lambdas: logs[1..=self.m].iter().map(|&l| field.exp(l as u64)).collect(),
        }
    }
}

/// Brute-force orbit partition of unit tuples under the scaling group,
/// computed in discrete-log coordinates. Representatives are the
/// lexicographically smallest members of their orbits.
pub fn scaling_orbits(field: &FieldSpec, weights: &[Vec<u32>], m: usize) -> OrbitPartition {
    let units = field.q() as usize - 1;
    let arity = weights.len();
    for w in weights {
        assert_eq!(w.len(), m + 1, "weight tuples have one entry per group factor");
    }
    // image of the group in log space, with the first preimage found
    let mut image: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    let group_size = units.pow(m as u32 + 1);
    let mut g = vec![0u32; m + 1];
    for mut idx in 0..group_size {
        for d in g.iter_mut().rev() {
            *d = (idx % units) as u32;
            idx /= units;
        }
        let h: Vec<u32> = weights
            .iter()
            .map(|w| (w.iter().zip(&g).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % units as u64) as u32)
            .collect();
        image.entry(h).or_insert_with(|| g.clone());
    }

    let total = units.pow(arity as u32);
    let mut rep_of = vec![u32::MAX; total];
    let mut mover_logs = vec![Vec::new(); total];
    let mut reps = Vec::new();
    let pos_of_log: Vec<usize> = (0..units)
        .map(|l| field.exp(l as u64).0 as usize - 1)
        .collect();
    for idx in 0..total {
        if rep_of[idx] != u32::MAX {
            continue;
        }
        let r = reps.len() as u32;
        let tuple: Vec<Fe> = {
            let mut out = vec![Fe::ZERO; arity];
            let mut x = idx;
            for v in out.iter_mut().rev() {
                *v = Fe((x % units) as u16 + 1);
                x /= units;
            }
            out
        };
        let logs: Vec<u32> = tuple.iter().map(|&v| field.log(v).unwrap()).collect();
        for (h, pre) in &image {
            let member = logs
                .iter()
                .zip(h)
                .fold(0usize, |acc, (&l, &d)| acc * units + pos_of_log[((l + d) as usize) % units]);
            if rep_of[member] == u32::MAX {
                rep_of[member] = r;
                mover_logs[member] = pre.iter().map(|&x| (units as u32 - x) % units as u32).collect();
            }
        }
        reps.push(tuple);
    }
    OrbitPartition {
        units,
        arity,
        m,
        reps,
        rep_of,
        mover_logs,
    }
}

/// Orbit partition of the pair coefficients of a template.
pub fn pair_orbits(field: &FieldSpec, template: &ShapeTemplate) -> OrbitPartition {
    let weights: Vec<Vec<u32>> = template
        .free_slots()
        .into_iter()
        .filter(|s| s.is_pair())
        .map(|s| slot_weights(s, template.m()))
        .collect();
    scaling_orbits(field, &weights, template.m() as usize)
}

/// Representatives for the rescaled pair slots of `g_index`; the constant
/// tuple of ones is always the first.
pub fn g_pin_classes(field: &FieldSpec, index: u8) -> Result<Vec<[Fe; 3]>, ShapeError> {
    let weights: Vec<Vec<u32>> = g_pin_slots(index)?
        .iter()
        .map(|&s| slot_weights(s, 4))
        .collect();
    let part = scaling_orbits(field, &weights, 4);
    Ok(part.reps().iter().map(|r| [r[0], r[1], r[2]]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(q: u32) -> Arc<FieldSpec> {
        Arc::new(FieldSpec::of_order(q).unwrap())
    }

    #[test]
    fn slot_parse_and_order() {
        for s in ["a(3,1)", "b(1,2,3)", "c(3,1,2)", "d(2,3,4,1)"] {
            assert_eq!(s.parse::<Slot>().unwrap().to_string(), s);
        }
        assert!("b(2,1,3)".parse::<Slot>().is_err());
        assert!("a(1,1)".parse::<Slot>().is_err());
        assert!(Slot::A(3, 1) < Slot::A(2, 3));
        assert!(Slot::A(2, 3) < Slot::B(1, 2, 3));
        assert_eq!(Slot::mixed_slots(3).len(), 6);
        assert_eq!(Slot::mixed_slots(4).len(), 28);
        assert_eq!(
            Slot::mixed_slots(3),
            vec![
                Slot::B(1, 2, 3),
                Slot::B(1, 3, 2),
                Slot::B(2, 3, 1),
                Slot::C(1, 2, 3),
                Slot::C(2, 1, 3),
                Slot::C(3, 1, 2)
            ]
        );
    }

    #[test]
    fn support_covers_all_but_pure_and_near_pure_powers() {
        // 56 quintic monomials in 4 variables; x_i^5 and x_i^4 x_j are excluded
        let mut monos: Vec<Monomial> = Slot::mixed_slots(4).iter().map(|s| s.monomial()).collect();
        for i in 1..=4 {
            for j in 1..=4 {
                if i != j {
                    monos.push(Slot::A(i, j).monomial());
                }
            }
        }
        monos.sort();
        monos.dedup();
        assert_eq!(monos.len(), 40);
        assert!(monos.iter().all(|m| m.degree() == 5 && m.0.iter().all(|&e| e <= 3)));
    }

    #[test]
    fn triple_classification() {
        let t = Tournament::transitive3();
        let c = classify_triple(&t, [1, 2, 3]);
        assert_eq!(c.shape, TripleShape::Transitive);
        assert_eq!(c.relabel, [1, 2, 3]);
        let cy = Tournament::cyclic3();
        assert_eq!(classify_triple(&cy, [1, 2, 3]).shape, TripleShape::Cyclic);

        // invariance under every vertex permutation
        let perms = [[1, 2, 3], [1, 3, 2], [2, 1, 3], [2, 3, 1], [3, 1, 2], [3, 2, 1]];
        for base in [t, cy] {
            let shape = base.triple_shape().unwrap();
            for p in perms {
                let edges: Vec<(u8, u8)> = base
                    .edges()
                    .iter()
                    .map(|&(i, j)| (p[i as usize - 1], p[j as usize - 1]))
                    .collect();
                let permuted = Tournament::new(3, &edges).unwrap();
                let cls = classify_triple(&permuted, [1, 2, 3]);
                assert_eq!(cls.shape, shape);
                // relabeling carries the canonical pattern onto the permuted one
                let canon = if shape == TripleShape::Transitive { t } else { cy };
                for (i, j) in canon.edges() {
                    assert!(permuted.beats(cls.relabel[i as usize - 1], cls.relabel[j as usize - 1]));
                }
            }
        }
    }

    #[test]
    fn g_shapes_are_the_four_classes() {
        for idx in 1..=4 {
            let t = g_tournament(idx).unwrap();
            assert_eq!(t.quaternary_class(), Some(idx));
        }
        assert_eq!(
            classify_triple(&g_tournament(1).unwrap(), [1, 2, 3]).shape,
            TripleShape::Transitive
        );
        assert_eq!(
            classify_triple(&g_tournament(2).unwrap(), [1, 2, 3]).shape,
            TripleShape::Cyclic
        );
        let t1 = ShapeTemplate::g(1).unwrap().induced_on([2, 3, 4]);
        let t4 = ShapeTemplate::g(4).unwrap().induced_on([2, 3, 4]);
        assert_eq!(t1, t4);
        assert_eq!(t1.kind(), ShapeKind::T1);
        assert_eq!(
            t1.pins(),
            vec![(Slot::A(1, 2), Fe::ONE), (Slot::A(2, 3), Fe::ONE)]
        );
        assert_eq!(t1.free_slots()[0], Slot::A(1, 3));
        assert!(matches!(ShapeTemplate::g(5), Err(ShapeError::BadIndex(5))));
    }

    #[test]
    fn g1_triple_123() {
        let t = ShapeTemplate::g(1).unwrap().induced_on([1, 2, 3]);
        assert_eq!(t.kind(), ShapeKind::T1);
        assert_eq!(t.status(Slot::A(1, 2)), SlotStatus::Pinned(Fe::ONE));
        assert_eq!(t.status(Slot::A(2, 3)), SlotStatus::Pinned(Fe::ONE));
        assert_eq!(t.status(Slot::A(1, 3)), SlotStatus::Free);
        assert_eq!(t.status(Slot::A(2, 1)), SlotStatus::Zero);
    }

    #[test]
    fn slot_counts() {
        let t = ShapeTemplate::ternary(TripleShape::Transitive, &[]).unwrap();
        assert_eq!(t.slots().len(), 9);
        let g = ShapeTemplate::g(2).unwrap();
        assert_eq!(g.slots().len(), 6 + 12 + 12 + 4);
        assert_eq!(g.pins().len(), 3);
        assert_eq!(g.free_slots().len(), 31);
    }

    #[test]
    fn instantiation_counts() {
        let q = 7u32;
        let one = Fe::ONE;
        let pinned = ShapeTemplate::ternary(
            TripleShape::Transitive,
            &[(Slot::A(1, 2), one), (Slot::A(1, 3), one), (Slot::A(2, 3), one)],
        )
        .unwrap();
        assert_eq!(pinned.instantiation_count(q), 7u128.pow(6));
        let free = ShapeTemplate::ternary(TripleShape::Transitive, &[]).unwrap();
        assert_eq!(free.instantiation_count(q), 6u128.pow(3) * 7u128.pow(6));
        let cyc = ShapeTemplate::ternary(TripleShape::Cyclic, &[(Slot::A(1, 2), one)]).unwrap();
        assert_eq!(cyc.instantiation_count(q), 36 * 7u128.pow(6));
        assert!(matches!(
            ShapeTemplate::ternary(TripleShape::Transitive, &[(Slot::A(2, 1), one)]),
            Err(ShapeError::AntiDirectionPin(_))
        ));
        assert!(matches!(
            ShapeTemplate::ternary(TripleShape::Transitive, &[(Slot::A(1, 2), Fe::ZERO)]),
            Err(ShapeError::ZeroPin(_))
        ));
    }

    #[test]
    fn instantiate_examples() {
        let f7 = f(7);
        let one = Fe::ONE;
        let t = ShapeTemplate::ternary(
            TripleShape::Transitive,
            &[(Slot::A(1, 2), one), (Slot::A(1, 3), one), (Slot::A(2, 3), one)],
        )
        .unwrap();
        let form = t.instantiate(&f7, &[Fe::ZERO; 6]).unwrap();
        let want = Form::from_terms(
            f7.clone(),
            3,
            5,
            [(&[3u8, 2, 0][..], one), (&[3, 0, 2][..], one), (&[0, 3, 2][..], one)],
        )
        .unwrap();
        assert_eq!(form, want);

        // the sharp example: a=(2,2,4); Q = 5x1²+6x2²+2x3²+x1x2+x1x3+x2x3
        let free = ShapeTemplate::ternary(TripleShape::Transitive, &[]).unwrap();
        let asg: Vec<Fe> = [2, 2, 4, 2, 6, 5, 1, 1, 1].iter().map(|&v| Fe(v)).collect();
        assert_eq!(free.instantiate(&f7, &asg).unwrap(), crate::forms::sharp_f7_example());
        assert_eq!(free.assignment_of(&crate::forms::sharp_f7_example()), Some(asg));

        let bad: Vec<Fe> = [0, 2, 4, 2, 6, 5, 1, 1, 1].iter().map(|&v| Fe(v)).collect();
        assert!(matches!(
            free.instantiate(&f7, &bad),
            Err(ShapeError::DomainViolation { .. })
        ));

        let g1 = ShapeTemplate::g(1).unwrap();
        let mut asg = vec![Fe::ZERO; g1.free_slots().len()];
        for (i, s) in g1.free_slots().iter().enumerate() {
            if s.is_pair() {
                asg[i] = one;
            }
        }
        let form = g1.instantiate(&f(11), &asg).unwrap();
        assert_eq!(form.terms().count(), 6);
    }

    #[test]
    fn descriptor_round_trip() {
        let t = ShapeTemplate::g(4).unwrap().induced_on([1, 2, 3]);
        assert_eq!(t.kind(), ShapeKind::Custom);
        let d = t.descriptor();
        assert_eq!(ShapeTemplate::from_descriptor(&d).unwrap(), t);
        let t1 = ShapeTemplate::ternary(TripleShape::Transitive, &[]).unwrap();
        assert_eq!(
            t1.descriptor(),
            "shape=t1 pins= free=a(1,2),a(1,3),a(2,3),b(1,2,3),b(1,3,2),b(2,3,1),c(1,2,3),c(2,1,3),c(3,1,2)"
        );
        assert_eq!(ShapeTemplate::from_descriptor(&t1.descriptor()).unwrap(), t1);
    }

    #[test]
    fn scaling_group_action() {
        let f11 = f(11);
        let form = crate::forms::Form::from_terms(
            f11.clone(),
            3,
            5,
            [(&[3u8, 2, 0][..], Fe(3)), (&[1, 1, 3][..], Fe(7)), (&[0, 3, 2][..], Fe(1))],
        )
        .unwrap();
        assert_eq!(apply_scaling(&form, &ScalingElement::identity(3)).unwrap(), form);
        let g = ScalingElement { c: Fe(2), lambdas: vec![Fe(3), Fe(5), Fe(7)] };
        let h = ScalingElement { c: Fe(9), lambdas: vec![Fe(4), Fe(10), Fe(2)] };
        let seq = apply_scaling(&apply_scaling(&form, &g).unwrap(), &h).unwrap();
        let once = apply_scaling(&form, &g.compose(&h, &f11)).unwrap();
        assert_eq!(seq, once);
        assert!(matches!(
            apply_scaling(&form, &ScalingElement { c: Fe(0), lambdas: vec![Fe(1); 3] }),
            Err(ShapeError::ZeroScalar)
        ));
    }

    #[test]
    fn trivial_unit_group_has_one_orbit() {
        let f2 = FieldSpec::of_order(2).unwrap();
        let w = vec![vec![1, 3, 2, 0], vec![1, 3, 0, 2]];
        let part = scaling_orbits(&f2, &w, 3);
        assert_eq!(part.orbit_count(), 1);
        assert_eq!(part.reps()[0], vec![Fe::ONE, Fe::ONE]);
    }

    /// Orbit count by direct closure under the group, applying every element
    /// to every tuple in the encoding domain.
    fn brute_orbits(field: &FieldSpec, slots: &[Slot], m: usize) -> usize {
        let mut seen = std::collections::HashSet::new();
        let mut count = 0;
        let units: Vec<Fe> = field.nonzero_elements().collect();
        let arity = slots.len();
        let total = units.len().pow(arity as u32);
        for idx in 0..total {
            let mut x = idx;
            let mut tuple = vec![Fe::ZERO; arity];
            for v in tuple.iter_mut().rev() {
                *v = units[x % units.len()];
                x /= units.len();
            }
            if seen.contains(&tuple) {
                continue;
            }
            count += 1;
            for g in scaling_group(field, m) {
                let img: Vec<Fe> = slots
                    .iter()
                    .zip(&tuple)
                    .map(|(s, &v)| field.mul(v, g.factor(field, &s.monomial())))
                    .collect();
                seen.insert(img);
            }
        }
        count
    }

    #[test]
    fn t1_orbits_at_q7_match_brute_force() {
        let f7 = FieldSpec::of_order(7).unwrap();
        let slots = [Slot::A(1, 2), Slot::A(1, 3), Slot::A(2, 3)];
        assert_eq!(slot_weights(slots[0], 3), vec![1, 3, 2, 0]);
        assert_eq!(slot_weights(slots[1], 3), vec![1, 3, 0, 2]);
        assert_eq!(slot_weights(slots[2], 3), vec![1, 0, 3, 2]);
        let w: Vec<Vec<u32>> = slots.iter().map(|&s| slot_weights(s, 3)).collect();
        let part = scaling_orbits(&f7, &w, 3);
        let brute = brute_orbits(&f7, &slots, 3);
        assert_eq!(part.orbit_count(), brute);
        assert_eq!(brute, 6);
    }

    #[test]
    fn orbit_partition_and_movers() {
        for q in [4, 5, 7, 8, 9, 11, 13, 16] {
            let field = FieldSpec::of_order(q).unwrap();
            for shape in [TripleShape::Transitive, TripleShape::Cyclic] {
                let t = ShapeTemplate::ternary(shape, &[]).unwrap();
                let part = pair_orbits(&field, &t);
                let pairs: Vec<Slot> = t.free_slots().into_iter().filter(|s| s.is_pair()).collect();
                let mut members = vec![0usize; part.orbit_count()];
                for idx in 0..part.tuple_count() {
                    let tuple = part.tuple_at(idx);
                    let r = part.representative_index(&tuple);
                    members[r] += 1;
                    let rep = part.representative(&tuple);
                    assert!(rep <= &tuple[..]);
                    let g = part.mover(&field, &tuple);
                    let moved: Vec<Fe> = pairs
                        .iter()
                        .zip(&tuple)
                        .map(|(s, &v)| field.mul(v, g.factor(&field, &s.monomial())))
                        .collect();
                    assert_eq!(moved, rep);
                }
                assert!(members.iter().all(|&c| c > 0));
                assert_eq!(members.iter().sum::<usize>(), (q as usize - 1).pow(3));
            }
        }
    }

    #[test]
    fn g_pin_classes_follow_squares() {
        // g1..g3: the rescaled pair slots can always be set to one
        for q in [5, 7, 11, 13, 16] {
            let field = FieldSpec::of_order(q).unwrap();
            for idx in 1..=3 {
                assert_eq!(g_pin_classes(&field, idx).unwrap(), vec![[Fe::ONE; 3]]);
            }
        }
        // g4: a21/a23 only changes by squares, so odd q leaves two classes
        let f11 = FieldSpec::of_order(11).unwrap();
        let classes = g_pin_classes(&f11, 4).unwrap();
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0], [Fe::ONE; 3]);
        assert!(!f11.is_square(f11.div(classes[1][0], classes[1][1]).unwrap()));
        let f16 = FieldSpec::of_order(16).unwrap();
        assert_eq!(g_pin_classes(&f16, 4).unwrap().len(), 1);
    }
}
