//! Homogeneous polynomials over 𝔽_q and their projective zero sets.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gf::{Fe, FieldSpec, GfError};

/// Largest number of variables a [`Form`] may have.
pub const MAX_VARS: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("number of variables must be between 1 and {MAX_VARS}, got {0}")]
    BadVariableCount(usize),
    #[error("monomial {0} does not have the form's degree")]
    NotHomogeneous(String),
    #[error("variable index {index} out of range for {n} variables")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("zero vector has no projective class")]
    ZeroPoint,
    #[error("{0} is not a zero of the form")]
    NotAZero(String),
    #[error("points must be distinct projective classes")]
    CoincidentPoints,
    #[error("bound requires more variables than the degree (n={n}, d={d})")]
    TooFewVariables { n: usize, d: u32 },
    #[error("forms live over different fields")]
    FieldMismatch,
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] GfError),
}

/// Exponent vector; entries beyond the owning form's variable count are zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(pub [u8; MAX_VARS]);

impl Monomial {
    pub fn new(exps: &[u8]) -> Self {
        let mut e = [0u8; MAX_VARS];
        e[..exps.len()].copy_from_slice(exps);
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    #[inline]
    pub fn exp(&self, var: usize) -> u8 {
        self.0[var]
    }

    /// Value of the monomial at a point.
    pub fn eval(&self, field: &FieldSpec, point: &[Fe]) -> Fe {
        let mut acc = Fe::ONE;
        for (i, &x) in point.iter().enumerate() {
            let e = self.0[i];
            if e > 0 {
                acc = field.mul(acc, field.pow(x, e as u64));
                if acc.is_zero() {
                    break;
                }
            }
        }
        acc
    }

    /// Value of the formal partial derivative with respect to `var`.
    pub fn eval_partial(&self, field: &FieldSpec, point: &[Fe], var: usize) -> Fe {
        let e = self.0[var];
        if e == 0 || (e as u32) % field.p() == 0 {
            return Fe::ZERO;
        }
        let mut lowered = *self;
        lowered.0[var] -= 1;
        field.scale_int(lowered.eval(field, point), e as u64)
    }
}

/// A projective point with its first nonzero coordinate equal to one.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProjectivePoint {
    n: u8,
    coords: [Fe; MAX_VARS],
}

impl ProjectivePoint {
    /// Normalizes `coords` to the canonical representative of its class.
    pub fn new(field: &FieldSpec, coords: &[Fe]) -> Result<Self, FormError> {
        if coords.is_empty() || coords.len() > MAX_VARS {
            return Err(FormError::BadVariableCount(coords.len()));
        }
        let lead = coords
            .iter()
            .copied()
            .find(|c| !c.is_zero())
            .ok_or(FormError::ZeroPoint)?;
        let scale = field.inv(lead)?;
        let mut out = [Fe::ZERO; MAX_VARS];
        for (o, &c) in out.iter_mut().zip(coords) {
            *o = field.mul(c, scale);
        }
        Ok(ProjectivePoint {
            n: coords.len() as u8,
            coords: out,
        })
    }

    fn from_normalized(coords: &[Fe]) -> Self {
        let mut out = [Fe::ZERO; MAX_VARS];
        out[..coords.len()].copy_from_slice(coords);
        ProjectivePoint {
            n: coords.len() as u8,
            coords: out,
        }
    }

    pub fn coords(&self) -> &[Fe] {
        &self.coords[..self.n as usize]
    }

    pub fn dim(&self) -> usize {
        self.n as usize
    }

    /// Index of the leading (normalized to one) coordinate.
    pub fn lead(&self) -> usize {
        self.coords().iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    /// Parses `(a,b,...)`, normalizing the class representative.
    pub fn parse(field: &FieldSpec, s: &str) -> Result<Self, FormError> {
        let inner = s.trim().trim_start_matches('(').trim_end_matches(')');
        let coords = parse_encodings(field, inner).map_err(|msg| FormError::Parse { line: 0, msg })?;
        ProjectivePoint::new(field, &coords)
    }
}

impl fmt::Display for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) fn parse_encodings(field: &FieldSpec, s: &str) -> Result<Vec<Fe>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|t| {
            let v: u64 = t.trim().parse().map_err(|_| format!("bad encoding {t:?}"))?;
            field.element(v).map_err(|e| e.to_string())
        })
        .collect()
}

/// All normalized representatives of ℙ^{n-1}(𝔽_q) in ascending lexicographic
/// order of coordinate encodings.
pub fn projective_points(n: usize, field: &FieldSpec) -> Vec<ProjectivePoint> {
    assert!((1..=MAX_VARS).contains(&n), "unsupported dimension {n}");
    let q = field.q() as usize;
    let mut out = Vec::new();
    // More leading zeros sort first, so walk the lead position from the right.
    for lead in (0..n).rev() {
        let tail = n - lead - 1;
        let count = q.pow(tail as u32);
        let mut coords = [Fe::ZERO; MAX_VARS];
        coords[lead] = Fe::ONE;
        for idx in 0..count {
            let mut r = idx;
            for pos in (lead + 1..n).rev() {
                coords[pos] = Fe((r % q) as u16);
                r /= q;
            }
            out.push(ProjectivePoint::from_normalized(&coords[..n]));
        }
    }
    out
}

/// Zero statistics of a form over the points of projective space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroCensus {
    pub total: u64,
    pub singular: u64,
    pub nonsingular: u64,
    pub witnesses: Option<Vec<ProjectivePoint>>,
}

/// Outcome of checking the two-point restriction shape.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Lemma5Verdict {
    /// Coefficient of `x1^3 x2^2` in the restriction.
    pub c12: Fe,
    /// Coefficient of `x1^2 x2^3`.
    pub c21: Fe,
    /// Restriction has no monomials other than the two above.
    pub support_ok: bool,
}

impl Lemma5Verdict {
    pub fn passes(&self) -> bool {
        self.support_ok && (self.c12.is_zero() || self.c21.is_zero())
    }
}

/// A homogeneous polynomial with coefficients in 𝔽_q.
#[derive(Clone)]
pub struct Form {
    field: Arc<FieldSpec>,
    n: usize,
    d: u32,
    terms: BTreeMap<Monomial, Fe>,
}

impl PartialEq for Form {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.d == other.d && self.terms == other.terms && *self.field == *other.field
    }
}

impl Eq for Form {}

impl fmt::Debug for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Form(q={}, n={}, d={}: {})", self.field.q(), self.n, self.d, self)
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for i in 0..self.n {
                match m.0[i] {
                    0 => {}
                    1 => write!(f, "*x{}", i + 1)?,
                    e => write!(f, "*x{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

impl Form {
    /// The zero form.
    pub fn zero(field: Arc<FieldSpec>, n: usize, d: u32) -> Result<Self, FormError> {
        if n == 0 || n > MAX_VARS {
            return Err(FormError::BadVariableCount(n));
        }
        Ok(Form {
            field,
            n,
            d,
            terms: BTreeMap::new(),
        })
    }

    /// Builds a form from `(exponents, coefficient)` pairs. Repeated monomials
    /// are summed and zero coefficients dropped.
    pub fn from_terms<'a, I>(field: Arc<FieldSpec>, n: usize, d: u32, terms: I) -> Result<Self, FormError>
    where
        I: IntoIterator<Item = (&'a [u8], Fe)>,
    {
        let mut f = Form::zero(field, n, d)?;
        for (exps, c) in terms {
            if exps.len() != n {
                return Err(FormError::DimensionMismatch {
                    expected: n,
                    got: exps.len(),
                });
            }
            f.add_term(Monomial::new(exps), c)?;
        }
        Ok(f)
    }

    pub fn add_term(&mut self, m: Monomial, c: Fe) -> Result<(), FormError> {
        if m.degree() != self.d || m.0[self.n..].iter().any(|&e| e != 0) {
            return Err(FormError::NotHomogeneous(format!("{:?}", &m.0[..self.n])));
        }
        if c.is_zero() {
            return Ok(());
        }
        let entry = self.terms.entry(m).or_insert(Fe::ZERO);
        *entry = self.field.add(*entry, c);
        if entry.is_zero() {
            self.terms.remove(&m);
        }
        Ok(())
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Fe)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exps: &[u8]) -> Fe {
        self.terms.get(&Monomial::new(exps)).copied().unwrap_or(Fe::ZERO)
    }

    fn check_dim(&self, got: usize) -> Result<(), FormError> {
        if got != self.n {
            return Err(FormError::DimensionMismatch {
                expected: self.n,
                got,
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, point: &[Fe]) -> Result<Fe, FormError> {
        self.check_dim(point.len())?;
        Ok(self.eval_unchecked(point))
    }

    pub(crate) fn eval_unchecked(&self, point: &[Fe]) -> Fe {
        let f = &*self.field;
        self.terms
            .iter()
            .fold(Fe::ZERO, |acc, (m, &c)| f.add(acc, f.mul(c, m.eval(f, point))))
    }

    /// Formal partial derivative with respect to variable `var` (0-based).
    pub fn partial_derivative(&self, var: usize) -> Result<Form, FormError> {
        if var >= self.n {
            return Err(FormError::IndexOutOfRange {
                index: var,
                n: self.n,
            });
        }
        let mut out = Form::zero(self.field.clone(), self.n, self.d.saturating_sub(1))?;
        for (m, &c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let coef = self.field.scale_int(c, e as u64);
            if coef.is_zero() {
                continue;
            }
            let mut lowered = *m;
            lowered.0[var] -= 1;
            out.terms.insert(lowered, coef);
        }
        Ok(out)
    }

    pub fn gradient(&self) -> Vec<Form> {
        (0..self.n)
            .map(|i| self.partial_derivative(i).expect("index in range"))
            .collect()
    }

    pub fn is_nonsingular_zero(&self, point: &ProjectivePoint) -> Result<bool, FormError> {
        self.check_dim(point.dim())?;
        if !self.eval_unchecked(point.coords()).is_zero() {
            return Ok(false);
        }
        Ok(self
            .gradient()
            .iter()
            .any(|g| !g.eval_unchecked(point.coords()).is_zero()))
    }

    /// Exhaustive census over [`projective_points`]. Witnesses, when requested,
    /// list every zero in enumeration order.
    pub fn count_projective_zeros(&self, collect_witnesses: bool) -> ZeroCensus {
        let grad = self.gradient();
        let mut census = ZeroCensus {
            total: 0,
            singular: 0,
            nonsingular: 0,
            witnesses: collect_witnesses.then(Vec::new),
        };
        for pt in projective_points(self.n, &self.field) {
            if !self.eval_unchecked(pt.coords()).is_zero() {
                continue;
            }
            census.total += 1;
            if grad.iter().any(|g| !g.eval_unchecked(pt.coords()).is_zero()) {
                census.nonsingular += 1;
            } else {
                census.singular += 1;
            }
            if let Some(w) = census.witnesses.as_mut() {
                w.push(pt);
            }
        }
        census
    }

    /// First non-singular zero in enumeration order.
    pub fn find_nonsingular_zero(&self) -> Option<ProjectivePoint> {
        let grad = self.gradient();
        projective_points(self.n, &self.field).into_iter().find(|pt| {
            self.eval_unchecked(pt.coords()).is_zero()
                && grad.iter().any(|g| !g.eval_unchecked(pt.coords()).is_zero())
        })
    }

    /// The form `y ↦ f(Σ y_i · basis_i)` in `basis.len()` variables.
    pub fn restrict<B: AsRef<[Fe]>>(&self, basis: &[B]) -> Result<Form, FormError> {
        let m = basis.len();
        if m == 0 || m > MAX_VARS {
            return Err(FormError::BadVariableCount(m));
        }
        for b in basis {
            self.check_dim(b.as_ref().len())?;
        }
        let f = &*self.field;
        let mut out = Form::zero(self.field.clone(), m, self.d)?;
        for (mono, &c) in &self.terms {
            let mut poly: BTreeMap<Monomial, Fe> = BTreeMap::new();
            poly.insert(Monomial::default(), c);
            for j in 0..self.n {
                for _ in 0..mono.0[j] {
                    // multiply by the linear form Σ_i basis[i][j] y_i
                    let mut next: BTreeMap<Monomial, Fe> = BTreeMap::new();
                    for (pm, &pc) in &poly {
                        for (i, b) in basis.iter().enumerate() {
                            let bij = b.as_ref()[j];
                            if bij.is_zero() {
                                continue;
                            }
                            let mut nm = *pm;
                            nm.0[i] += 1;
                            let e = next.entry(nm).or_insert(Fe::ZERO);
                            *e = f.add(*e, f.mul(pc, bij));
                        }
                    }
                    next.retain(|_, v| !v.is_zero());
                    poly = next;
                }
            }
            for (pm, pc) in poly {
                out.add_term(pm, pc)?;
            }
        }
        Ok(out)
    }

    /// Restricts to the line through two zeros and reads off the coefficients
    /// of `x1^3 x2^2` and `x1^2 x2^3`.
    pub fn lemma5_shape_check(
        &self,
        z1: &ProjectivePoint,
        z2: &ProjectivePoint,
    ) -> Result<Lemma5Verdict, FormError> {
        self.check_dim(z1.dim())?;
        self.check_dim(z2.dim())?;
        if z1 == z2 {
            return Err(FormError::CoincidentPoints);
        }
        for z in [z1, z2] {
            if !self.eval_unchecked(z.coords()).is_zero() {
                return Err(FormError::NotAZero(z.to_string()));
            }
        }
        let g = self.restrict(&[z1.coords(), z2.coords()])?;
        let c12 = g.coefficient(&[3, 2]);
        let c21 = g.coefficient(&[2, 3]);
        let support_ok = g
            .terms
            .keys()
            .all(|m| m.0[..2] == [3, 2] || m.0[..2] == [2, 3]);
        Ok(Lemma5Verdict { c12, c21, support_ok })
    }

    /// Whether the zero count meets `(q^{n-d} - 1)/(q - 1)`.
    pub fn chevalley_warning_check(&self) -> Result<bool, FormError> {
        if self.n as u32 <= self.d {
            return Err(FormError::TooFewVariables { n: self.n, d: self.d });
        }
        let q = self.field.q() as u64;
        let bound = (q.pow(self.n as u32 - self.d) - 1) / (q - 1);
        Ok(self.count_projective_zeros(false).total >= bound)
    }

    /// Text form: a header line with the field description and `n=`, `d=`,
    /// then one `e1 ... en : c` line per monomial, exponents descending.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} n={} d={}\n", self.field.header(), self.n, self.d);
        for (m, c) in self.terms.iter().rev() {
            let exps: Vec<String> = m.0[..self.n].iter().map(|e| e.to_string()).collect();
            s.push_str(&format!("{} : {}\n", exps.join(" "), c));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Form, FormError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or(FormError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let field = Arc::new(FieldSpec::from_header(header)?);
        let (n, d) = parse_nd(header).map_err(|msg| FormError::Parse { line: 1, msg })?;
        let mut form = Form::zero(field.clone(), n, d)?;
        for (idx, line) in lines {
            let err = |msg: String| FormError::Parse { line: idx + 1, msg };
            let (exps, coef) = line.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
            let exps: Vec<u8> = exps
                .split_whitespace()
                .map(|e| e.parse::<u8>().map_err(|_| err(format!("bad exponent {e:?}"))))
                .collect::<Result<_, _>>()?;
            if exps.len() != n {
                return Err(err(format!("expected {n} exponents")));
            }
            let c: u64 = coef.trim().parse().map_err(|_| err(format!("bad coefficient {coef:?}")))?;
            let c = field.element(c)?;
            let m = Monomial::new(&exps);
            if form.terms.contains_key(&m) {
                return Err(err("duplicate monomial".into()));
            }
            form.add_term(m, c).map_err(|e| err(e.to_string()))?;
        }
        Ok(form)
    }
}

pub(crate) fn parse_nd(header: &str) -> Result<(usize, u32), String> {
    let mut n = None;
    let mut d = None;
    for tok in header.split_whitespace() {
        if let Some(v) = tok.strip_prefix("n=") {
            n = Some(v.parse::<usize>().map_err(|_| format!("bad n {v:?}"))?);
        } else if let Some(v) = tok.strip_prefix("d=") {
            d = Some(v.parse::<u32>().map_err(|_| format!("bad d {v:?}"))?);
        }
    }
    Ok((n.ok_or("missing n=")?, d.ok_or("missing d=")?))
}

/// The quintic over 𝔽_7 with exactly four projective zeros, all singular:
/// `2x1³x2² + 2x1³x3² + 4x2³x3² + x1x2x3(5x1² + 6x2² + 2x3² + x1x2 + x1x3 + x2x3)`.
pub fn sharp_f7_example() -> Form {
    let field = Arc::new(FieldSpec::new(7, 1, None).expect("7 is prime"));
    let terms: [(&[u8], u16); 9] = [
        (&[3, 2, 0], 2),
        (&[3, 0, 2], 2),
        (&[0, 3, 2], 4),
        (&[3, 1, 1], 5),
        (&[1, 3, 1], 6),
        (&[1, 1, 3], 2),
        (&[2, 2, 1], 1),
        (&[2, 1, 2], 1),
        (&[1, 2, 2], 1),
    ];
    Form::from_terms(field, 3, 5, terms.iter().map(|(e, c)| (*e, Fe(*c)))).expect("homogeneous")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn field(q: u32) -> Arc<FieldSpec> {
        Arc::new(FieldSpec::of_order(q).unwrap())
    }

    fn pt(f: &FieldSpec, c: &[u16]) -> ProjectivePoint {
        let v: Vec<Fe> = c.iter().map(|&x| Fe(x)).collect();
        ProjectivePoint::new(f, &v).unwrap()
    }

    #[test]
    fn sharp_example_evaluations() {
        let f = sharp_f7_example();
        assert_eq!(f.evaluate(&[Fe(1), Fe(0), Fe(0)]).unwrap(), Fe(0));
        assert_eq!(f.evaluate(&[Fe(1), Fe(6), Fe(2)]).unwrap(), Fe(0));
        // 2+2+4 + 1*(5+6+2+1+1+1) = 24 ≡ 3 (mod 7)
        assert_eq!(f.evaluate(&[Fe(1), Fe(1), Fe(1)]).unwrap(), Fe(3));
        assert!(matches!(
            f.evaluate(&[Fe(1)]),
            Err(FormError::DimensionMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn sharp_example_census() {
        let f = sharp_f7_example();
        let c = f.count_projective_zeros(true);
        assert_eq!((c.total, c.singular, c.nonsingular), (4, 4, 0));
        let fs = f.field().clone();
        let mut want = vec![
            pt(&fs, &[1, 0, 0]),
            pt(&fs, &[0, 1, 0]),
            pt(&fs, &[0, 0, 1]),
            pt(&fs, &[1, 6, 2]),
        ];
        want.sort();
        assert_eq!(c.witnesses.unwrap(), want);
        assert_eq!(f.find_nonsingular_zero(), None);
        assert!(!f.is_nonsingular_zero(&pt(&fs, &[1, 0, 0])).unwrap());
    }

    #[test]
    fn derivative_rules() {
        let f25 = field(25);
        let x5 = Form::from_terms(f25, 1, 5, [(&[5u8][..], Fe(1))]).unwrap();
        assert!(x5.partial_derivative(0).unwrap().is_zero());

        let f7 = field(7);
        let g = Form::from_terms(f7.clone(), 2, 5, [(&[3u8, 2][..], Fe(1))]).unwrap();
        let dg = g.partial_derivative(0).unwrap();
        let want = Form::from_terms(f7, 2, 4, [(&[2u8, 2][..], Fe(3))]).unwrap();
        assert_eq!(dg, want);
        assert!(matches!(
            g.partial_derivative(2),
            Err(FormError::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn nonsingular_zero_examples() {
        let f11 = field(11);
        let x5 = Form::from_terms(f11.clone(), 2, 5, [(&[5u8, 0][..], Fe(1))]).unwrap();
        assert!(!x5.is_nonsingular_zero(&pt(&f11, &[0, 1])).unwrap());
        let c = x5.count_projective_zeros(false);
        assert_eq!((c.total, c.singular), (1, 1));

        let h = Form::from_terms(
            f11.clone(),
            2,
            5,
            [(&[3u8, 2][..], Fe(1)), (&[2u8, 3][..], Fe(1))],
        )
        .unwrap();
        // x1²x2²(x1+x2) vanishes at (-1,1); ∂1 = 3x1²x2² + 2x1x2³ = 3 - 2 = 1 there
        let p = pt(&f11, &[10, 1]);
        assert_eq!(h.partial_derivative(0).unwrap().evaluate(p.coords()).unwrap(), Fe(1));
        assert!(h.is_nonsingular_zero(&p).unwrap());
    }

    #[test]
    fn find_first_nonsingular_zero_of_fermat_binary() {
        let f11 = field(11);
        let g = Form::from_terms(
            f11.clone(),
            2,
            5,
            [(&[5u8, 0][..], Fe(1)), (&[0u8, 5][..], Fe(1))],
        )
        .unwrap();
        // oracle: scan all normalized points in order
        let first = projective_points(2, &f11)
            .into_iter()
            .find(|p| {
                let v = p.coords();
                let val = g.evaluate(v).unwrap();
                let grad: Vec<Fe> = (0..2)
                    .map(|i| g.partial_derivative(i).unwrap().evaluate(v).unwrap())
                    .collect();
                val.is_zero() && grad.iter().any(|x| !x.is_zero())
            })
            .unwrap();
        assert_eq!(g.find_nonsingular_zero(), Some(first));
        // 2^5 = 32 = -1 mod 11, and (1,1) is not a zero
        assert!(g.is_nonsingular_zero(&pt(&f11, &[1, 2])).unwrap());
        assert_eq!(first, pt(&f11, &[1, 2]));

        let zero = Form::zero(f11, 3, 5).unwrap();
        assert_eq!(zero.find_nonsingular_zero(), None);
    }

    #[test]
    fn projective_point_counts_and_order() {
        assert_eq!(projective_points(2, &field(7)).len(), 8);
        assert_eq!(projective_points(3, &field(11)).len(), 133);
        assert_eq!(projective_points(4, &field(5)).len(), 156);
        let pts = projective_points(3, &field(3));
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(pts[0].coords(), &[Fe(0), Fe(0), Fe(1)]);
        assert!(pts.iter().all(|p| p.coords()[p.lead()] == Fe::ONE));
    }

    #[test]
    fn line_pair_census() {
        for q in [2, 5, 7] {
            let fq = field(q);
            let f = Form::from_terms(fq, 3, 2, [(&[1u8, 1, 0][..], Fe(1))]).unwrap();
            assert_eq!(f.count_projective_zeros(false).total, 2 * q as u64 + 1);
        }
    }

    #[test]
    fn restriction_of_sharp_example() {
        let f = sharp_f7_example();
        let r = f.restrict(&[[Fe(1), Fe(0), Fe(0)], [Fe(0), Fe(1), Fe(0)]]).unwrap();
        let want = Form::from_terms(f.field().clone(), 2, 5, [(&[3u8, 2][..], Fe(2))]).unwrap();
        assert_eq!(r, want);
        let id = f
            .restrict(&[[Fe(1), Fe(0), Fe(0)], [Fe(0), Fe(1), Fe(0)], [Fe(0), Fe(0), Fe(1)]])
            .unwrap();
        assert_eq!(id, f);
    }

    #[test]
    fn lemma5_on_sharp_example() {
        let f = sharp_f7_example();
        let fs = f.field().clone();
        let v = f
            .lemma5_shape_check(&pt(&fs, &[1, 0, 0]), &pt(&fs, &[0, 1, 0]))
            .unwrap();
        assert_eq!((v.c12, v.c21), (Fe(2), Fe(0)));
        assert!(v.passes());
        assert!(matches!(
            f.lemma5_shape_check(&pt(&fs, &[1, 1, 1]), &pt(&fs, &[0, 1, 0])),
            Err(FormError::NotAZero(_))
        ));
    }

    #[test]
    fn chevalley_warning_small_cases() {
        let f7 = field(7);
        let f = Form::from_terms(f7.clone(), 3, 2, [(&[1u8, 1, 0][..], Fe(1))]).unwrap();
        assert!(f.chevalley_warning_check().unwrap());
        let zero = Form::zero(f7.clone(), 3, 2).unwrap();
        assert_eq!(zero.count_projective_zeros(false).total, 57);
        assert!(zero.chevalley_warning_check().unwrap());
        let g = Form::zero(f7, 3, 3).unwrap();
        assert!(matches!(
            g.chevalley_warning_check(),
            Err(FormError::TooFewVariables { .. })
        ));
    }

    #[test]
    fn text_round_trip_and_rejection() {
        let f = sharp_f7_example();
        let text = f.to_text();
        assert!(text.starts_with("q=7 p=7 k=1 modulus=0,1 n=3 d=5\n3 2 0 : 2\n3 1 1 : 5\n"));
        assert_eq!(Form::parse(&text).unwrap(), f);
        let bad = "q=7 p=7 k=1 modulus=0,1 n=3 d=5\n3 2 1 : 2\n";
        assert!(matches!(Form::parse(bad), Err(FormError::Parse { .. })));
        let big = "q=7 p=7 k=1 modulus=0,1 n=2 d=5\n3 2 : 9\n";
        assert!(Form::parse(big).is_err());
    }
}
