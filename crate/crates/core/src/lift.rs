//! Hensel lifting over ℤ_p: a non-singular zero of the reduction mod `p`
//! becomes a zero of the integer form modulo `p^k`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::forms::{parse_nd, Form, FormError, Monomial, MAX_VARS};
use crate::gf::{is_prime, Fe, FieldSpec};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precision must be at least 1")]
    ZeroPrecision,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("the point is zero mod p")]
    ZeroPoint,
    #[error("F(x0) is not divisible by p")]
    NotAZero,
    #[error("every partial derivative vanishes mod p at x0")]
    Singular,
    #[error("defect not divisible by p^{0} after a Newton step")]
    NoConvergence(u32),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Homogeneous form with integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerForm {
    n: usize,
    d: u32,
    terms: BTreeMap<Monomial, BigInt>,
}

impl IntegerForm {
    pub fn new(n: usize, d: u32) -> Result<Self, FormError> {
        if n == 0 || n > MAX_VARS {
            return Err(FormError::BadVariableCount(n));
        }
        Ok(IntegerForm {
            n,
            d,
            terms: BTreeMap::new(),
        })
    }

    pub fn from_terms<'a, I>(n: usize, d: u32, terms: I) -> Result<Self, FormError>
    where
        I: IntoIterator<Item = (&'a [u8], i64)>,
    {
        let mut f = IntegerForm::new(n, d)?;
        for (e, c) in terms {
            f.add_term(Monomial::new(e), BigInt::from(c))?;
        }
        Ok(f)
    }

    /// Adds `c · m`; terms that cancel are dropped.
    pub fn add_term(&mut self, m: Monomial, c: BigInt) -> Result<(), FormError> {
        if m.degree() != self.d || m.0[self.n..].iter().any(|&e| e != 0) {
            return Err(FormError::NotHomogeneous(format!("{:?}", &m.0[..self.n])));
        }
        let entry = self.terms.entry(m).or_default();
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    fn check_dim(&self, x: &[BigInt]) -> Result<(), LiftError> {
        if x.len() != self.n {
            return Err(LiftError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&self, x: &[BigInt]) -> Result<BigInt, LiftError> {
        self.check_dim(x)?;
        Ok(self
            .terms
            .iter()
            .map(|(m, c)| (0..self.n).fold(c.clone(), |acc, i| acc * x[i].pow(m.exp(i) as u32)))
            .sum())
    }

    /// `∂F/∂x_var` at `x`.
    pub fn partial(&self, var: usize, x: &[BigInt]) -> Result<BigInt, LiftError> {
        self.check_dim(x)?;
        let mut total = BigInt::zero();
        for (m, c) in &self.terms {
            let e = m.exp(var) as u32;
            if e == 0 {
                continue;
            }
            let mut t = c * BigInt::from(e);
            for (i, xi) in x.iter().enumerate() {
                let k = if i == var { e - 1 } else { m.exp(i) as u32 };
                t *= xi.pow(k);
            }
            total += t;
        }
        Ok(total)
    }

    /// Same layout as [`Form::to_text`] with a bare `n= d=` header.
    pub fn to_text(&self) -> String {
        let mut s = format!("n={} d={}\n", self.n, self.d);
        for (m, c) in self.terms.iter().rev() {
            let exps: Vec<String> = m.0[..self.n].iter().map(|e| e.to_string()).collect();
            s.push_str(&format!("{} : {}\n", exps.join(" "), c));
        }
        s
    }

    /// Reads the form-file layout with signed decimal coefficients. Header
    /// tokens other than `n=` and `d=` are ignored, so a field form file parses
    /// as its integer representative.
    pub fn parse(text: &str) -> Result<Self, FormError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (_, header) = lines.next().ok_or(FormError::Parse {
            line: 1,
            msg: "missing header".into(),
        })?;
        let (n, d) = parse_nd(header).map_err(|msg| FormError::Parse { line: 1, msg })?;
        let mut f = IntegerForm::new(n, d)?;
        let mut seen = std::collections::BTreeSet::new();
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
            let c: BigInt = coef.trim().parse().map_err(|_| err(format!("bad coefficient {coef:?}")))?;
            let m = Monomial::new(&exps);
            if !seen.insert(m) {
                return Err(err("duplicate monomial".into()));
            }
            f.add_term(m, c).map_err(|e| err(e.to_string()))?;
        }
        Ok(f)
    }
}

impl fmt::Display for IntegerForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let sign = match (k, c.is_negative()) {
                (0, false) => "",
                (0, true) => "-",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            let a = c.abs();
            write!(f, "{sign}")?;
            if !a.is_one() {
                write!(f, "{a}")?;
            }
            for i in 0..self.n {
                match m.exp(i) {
                    0 => {}
                    1 => write!(f, "x{}", i + 1)?,
                    e => write!(f, "x{}^{e}", i + 1)?,
                }
            }
        }
        Ok(())
    }
}

/// One Newton step of a lift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftStep {
    /// Working modulus is `p^precision`.
    pub precision: u32,
    pub coordinate: BigInt,
    /// p-adic valuation of `F(x)` after the step; `None` when `F(x) = 0`.
    pub valuation: Option<u32>,
}

/// A zero of an integer form modulo `p^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedPoint {
    pub p: u64,
    pub k: u32,
    /// Coordinates in `[0, p^k)`.
    pub coords: Vec<BigInt>,
    /// Index of the coordinate Newton moved.
    pub pivot: usize,
    pub steps: Vec<LiftStep>,
}

impl LiftedPoint {
    pub fn modulus(&self) -> BigInt {
        BigInt::from(self.p).pow(self.k)
    }
}

/// Largest `v` with `p^v | a`; `None` for zero.
pub fn valuation(a: &BigInt, p: &BigInt) -> Option<u32> {
    if a.is_zero() {
        return None;
    }
    let mut a = a.clone();
    let mut v = 0;
    while a.is_multiple_of(p) {
        a /= p;
        v += 1;
    }
    Some(v)
}

fn inverse_mod(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Lifts `x0` to a zero of `f` modulo `p^k` by Newton iteration on the first
/// coordinate whose partial is a unit, doubling the precision each step.
pub fn hensel_lift(f: &IntegerForm, p: u64, x0: &[u64], k: u32) -> Result<LiftedPoint, LiftError> {
    if !is_prime(p) {
        return Err(LiftError::NotPrime(p));
    }
    if k == 0 {
        return Err(LiftError::ZeroPrecision);
    }
    let bp = BigInt::from(p);
    let mut x: Vec<BigInt> = x0.iter().map(|&v| BigInt::from(v % p)).collect();
    f.check_dim(&x)?;
    if x.iter().all(Zero::is_zero) {
        return Err(LiftError::ZeroPoint);
    }
    if !f.evaluate(&x)?.mod_floor(&bp).is_zero() {
        return Err(LiftError::NotAZero);
    }
    let mut pivot = None;
    for j in 0..f.n {
        if !f.partial(j, &x)?.mod_floor(&bp).is_zero() {
            pivot = Some(j);
            break;
        }
    }
    let j = pivot.ok_or(LiftError::Singular)?;
    let mut steps = Vec::new();
    let mut prec = 1u32;
    while prec < k {
        prec = (prec * 2).min(k);
        let m = bp.pow(prec);
        let value = f.evaluate(&x)?;
        let slope = f.partial(j, &x)?;
        // the partial stays a unit because x_j only moves by multiples of p
        let inv = inverse_mod(&slope, &m).ok_or(LiftError::Singular)?;
        x[j] = (&x[j] - value * inv).mod_floor(&m);
        let valuation = valuation(&f.evaluate(&x)?, &bp);
        if valuation.is_some_and(|v| v < prec) {
            return Err(LiftError::NoConvergence(prec));
        }
        steps.push(LiftStep {
            precision: prec,
            coordinate: x[j].clone(),
            valuation,
        });
    }
    Ok(LiftedPoint {
        p,
        k,
        coords: x,
        pivot: j,
        steps,
    })
}

/// Coefficient-wise reduction to a form over `𝔽_p`.
pub fn reduce_mod_p(f: &IntegerForm, p: u64) -> Result<Form, LiftError> {
    if !is_prime(p) {
        return Err(LiftError::NotPrime(p));
    }
    let field = Arc::new(FieldSpec::of_order(p as u32).map_err(FormError::from)?);
    let bp = BigInt::from(p);
    let mut out = Form::zero(field, f.n, f.d)?;
    for (m, c) in &f.terms {
        let r: u64 = c.mod_floor(&bp).try_into().expect("residue fits");
        if r != 0 {
            out.add_term(*m, Fe(r as u16))?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn diagonal(c: &[i64]) -> IntegerForm {
        let n = c.len();
        let mut f = IntegerForm::new(n, 5).unwrap();
        for (i, &ci) in c.iter().enumerate() {
            let mut e = vec![0u8; n];
            e[i] = 5;
            f.add_term(Monomial::new(&e), BigInt::from(ci)).unwrap();
        }
        f
    }

    fn check(f: &IntegerForm, p: u64, x0: &[u64], lifted: &LiftedPoint) {
        let m = lifted.modulus();
        assert!(f.evaluate(&lifted.coords).unwrap().mod_floor(&m).is_zero());
        for (c, &x) in lifted.coords.iter().zip(x0) {
            assert_eq!(c.mod_floor(&BigInt::from(p)), BigInt::from(x));
            assert!(c >= &BigInt::zero() && c < &m);
        }
        for (s, step) in lifted.steps.iter().enumerate() {
            assert_eq!(step.precision, (1u32 << (s + 1)).min(lifted.k));
            assert!(step.valuation.is_none_or(|v| v >= step.precision));
        }
    }

    #[test]
    fn stationary_on_exact_zero() {
        let f = IntegerForm::from_terms(2, 5, [(&[5u8, 0][..], 1), (&[0, 5][..], -1)]).unwrap();
        let l = hensel_lift(&f, 11, &[1, 1], 6).unwrap();
        assert_eq!(l.coords, big(&[1, 1]));
        assert_eq!(l.steps.len(), 3);
        assert!(l.steps.iter().all(|s| s.valuation.is_none()));
    }

    #[test]
    fn genuine_lift_step() {
        let f = diagonal(&[1, 1, 9]);
        let x0 = big(&[1, 10, 0]);
        assert_eq!(f.evaluate(&x0).unwrap(), BigInt::from(100001));
        assert_eq!(f.evaluate(&x0).unwrap() % 121, BigInt::from(55));
        assert_eq!(f.partial(1, &x0).unwrap() % 11, BigInt::from(5));
        for k in [1, 2, 3, 8, 20] {
            let l = hensel_lift(&f, 11, &[1, 10, 0], k).unwrap();
            check(&f, 11, &[1, 10, 0], &l);
            // x1 has a unit partial and comes first
            assert_eq!(l.pivot, 0);
            assert_eq!(l.steps.len(), (k as f64).log2().ceil() as usize);
        }
    }

    #[test]
    fn scanned_zero_lifts() {
        let f = diagonal(&[1, 2, 3]);
        let reduced = reduce_mod_p(&f, 11).unwrap();
        let z = reduced.find_nonsingular_zero().expect("a non-singular zero mod 11");
        let x0: Vec<u64> = z.coords().iter().map(|c| c.0 as u64).collect();
        let l = hensel_lift(&f, 11, &x0, 8).unwrap();
        check(&f, 11, &x0, &l);
    }

    #[test]
    fn preconditions() {
        let f = diagonal(&[1, 1, 9]);
        assert_eq!(hensel_lift(&f, 12, &[1, 10, 0], 3), Err(LiftError::NotPrime(12)));
        assert_eq!(hensel_lift(&f, 11, &[1, 1, 0], 3), Err(LiftError::NotAZero));
        assert_eq!(hensel_lift(&f, 11, &[0, 0, 0], 3), Err(LiftError::ZeroPoint));
        assert_eq!(hensel_lift(&f, 11, &[1, 10, 0], 0), Err(LiftError::ZeroPrecision));
        assert!(matches!(hensel_lift(&f, 11, &[1, 10], 3), Err(LiftError::DimensionMismatch { .. })));
        // every partial of x1^5 + x2^5 is divisible by 5
        let g = diagonal(&[1, 1]);
        assert_eq!(hensel_lift(&g, 5, &[1, 4], 3), Err(LiftError::Singular));
    }

    #[test]
    fn reduction() {
        let f = IntegerForm::from_terms(2, 5, [(&[5u8, 0][..], 11), (&[0, 5][..], 1)]).unwrap();
        let r = reduce_mod_p(&f, 11).unwrap();
        assert_eq!(r.terms().count(), 1);
        assert_eq!(r.coefficient(&[0, 5]), Fe::ONE);
        assert_eq!(r.degree(), 5);
        let g = diagonal(&[-1, 13, 9]);
        let r = reduce_mod_p(&g, 11).unwrap();
        assert_eq!(r.coefficient(&[5, 0, 0]), Fe(10));
        assert_eq!(r.coefficient(&[0, 5, 0]), Fe(2));
        assert!(reduce_mod_p(&g, 9).is_err());
    }

    #[test]
    fn round_trip_through_reduction() {
        let f = diagonal(&[1, 1, 9]);
        let r = reduce_mod_p(&f, 11).unwrap();
        let x0 = [1u64, 10, 0];
        let pt = crate::forms::ProjectivePoint::new(r.field(), &x0.map(|v| Fe(v as u16))).unwrap();
        assert!(r.is_nonsingular_zero(&pt).unwrap());
        let l = hensel_lift(&f, 11, &x0, 4).unwrap();
        let back: Vec<Fe> = l.coords.iter().map(|c| Fe(c.mod_floor(&BigInt::from(11)).try_into().unwrap())).collect();
        assert_eq!(r.evaluate(&back).unwrap(), Fe::ZERO);
    }

    #[test]
    fn text_round_trip() {
        let f = IntegerForm::parse("n=3 d=5\n5 0 0 : 1\n0 5 0 : -2\n1 1 3 : 123456789012345678901\n").unwrap();
        assert_eq!(IntegerForm::parse(&f.to_text()).unwrap(), f);
        assert_eq!(f.to_string(), "x1^5 + 123456789012345678901x1x2x3^3 - 2x2^5");
        assert!(IntegerForm::parse("n=2 d=5\n5 1 : 1\n").is_err());
        assert!(IntegerForm::parse("n=2 d=5\n5 0 : x\n").is_err());
        let from_field = IntegerForm::parse(&crate::forms::sharp_f7_example().to_text()).unwrap();
        assert_eq!(from_field.terms().count(), 9);
    }
}
