//! Finite fields of small order.
//!
//! An element of 𝔽_q, q = p^k, is stored as its canonical encoding in
//! `[0, q)`: the base-p digits of the encoding are the coefficients of the
//! polynomial representative modulo the field modulus, digit `i` being the
//! coefficient of `x^i`. Multiplication goes through exp/log tables over a
//! primitive element; addition is digit-wise modulo p.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Largest field order accepted unless a caller configures another bound.
pub const DEFAULT_ORDER_BOUND: u32 = 4096;

/// A field element in canonical encoding.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GfError {
    #[error("characteristic {0} is not prime")]
    NotPrime(u32),
    #[error("{0} is not a prime power")]
    NotPrimePower(u64),
    #[error("extension degree must be at least 1")]
    ZeroDegree,
    #[error("field order {order} exceeds the configured bound {bound}")]
    OrderTooLarge { order: u64, bound: u32 },
    #[error("modulus must be monic of degree {degree} with digits below {p}")]
    BadModulus { degree: u32, p: u32 },
    #[error("modulus {0} is reducible")]
    ReducibleModulus(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("encoding {value} is not an element of a field of order {q}")]
    BadEncoding { value: u64, q: u32 },
    #[error("malformed field header: {0}")]
    BadHeader(String),
}

/// Immutable description of 𝔽_q together with its arithmetic tables.
#[derive(Clone)]
pub struct FieldSpec {
    p: u32,
    k: u32,
    q: u32,
    /// k+1 digits, low degree first, leading digit 1.
    modulus: Vec<u32>,
    generator: Fe,
    /// exp[i] = g^i for 0 <= i < 2(q-1), doubled so log sums need no reduction.
    exp: Vec<Fe>,
    /// log[a] for nonzero a; log[0] is unused.
    log: Vec<u32>,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("q", &self.q)
            .field("p", &self.p)
            .field("k", &self.k)
            .field("modulus", &self.modulus)
            .field("generator", &self.generator)
            .finish()
    }
}

impl PartialEq for FieldSpec {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.k == other.k && self.modulus == other.modulus
    }
}

impl Eq for FieldSpec {}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Splits `q` as `p^k` with `p` prime.
pub fn prime_power(q: u64) -> Result<(u32, u32), GfError> {
    if q < 2 {
        return Err(GfError::NotPrimePower(q));
    }
    let mut p = 2;
    while q % p != 0 {
        p += 1;
    }
    let mut rest = q;
    let mut k = 0;
    while rest % p == 0 {
        rest /= p;
        k += 1;
    }
    if rest != 1 || p > u32::MAX as u64 {
        return Err(GfError::NotPrimePower(q));
    }
    Ok((p as u32, k))
}

// Dense polynomials over 𝔽_p, low degree first, trailing zeros trimmed.

fn trim(mut a: Vec<u32>) -> Vec<u32> {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn poly_rem(a: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    let mut r = trim(a.to_vec());
    let dm = m.len() - 1;
    let lead_inv = mod_inv_u32(m[dm], p);
    while r.len() > dm {
        let shift = r.len() - 1 - dm;
        let factor = (r[r.len() - 1] as u64 * lead_inv as u64 % p as u64) as u32;
        for (i, &mc) in m.iter().enumerate() {
            let sub = (factor as u64 * mc as u64 % p as u64) as u32;
            r[shift + i] = (r[shift + i] + p - sub) % p;
        }
        r = trim(r);
    }
    r
}

fn poly_mulmod(a: &[u32], b: &[u32], m: &[u32], p: u32) -> Vec<u32> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u32; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = ((prod[i + j] as u64 + x as u64 * y as u64) % p as u64) as u32;
        }
    }
    poly_rem(&prod, m, p)
}

fn mod_inv_u32(a: u32, p: u32) -> u32 {
    // p prime, a != 0 mod p
    let mut result = 1u64;
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    while e > 0 {
        if e & 1 == 1 {
            result = result * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    result as u32
}

fn digits_of(mut e: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(e % p);
        e /= p;
    }
    out
}

fn encode_digits(digits: &[u32], p: u32) -> u32 {
    digits.iter().rev().fold(0, |acc, &d| acc * p + d)
}

fn format_digits(d: &[u32]) -> String {
    d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

/// Trial division against every monic polynomial of degree 1..=k/2.
fn is_irreducible(m: &[u32], p: u32) -> bool {
    let k = (m.len() - 1) as u32;
    if k <= 1 {
        return true;
    }
    for deg in 1..=k / 2 {
        let count = (p as u64).pow(deg);
        for low in 0..count {
            let mut divisor = digits_of(low as u32, p, deg);
            divisor.push(1);
            if poly_rem(m, &divisor, p).is_empty() {
                return false;
            }
        }
    }
    true
}

/// Smallest monic irreducible polynomial of degree `k`, comparing coefficient
/// tuples from the constant term upwards.
pub fn default_modulus(p: u32, k: u32) -> Vec<u32> {
    if k == 1 {
        return vec![0, 1];
    }
    let count = (p as u64).pow(k);
    // Enumerating encodings of (c_{k-1}, ..., c_0) with c_0 most significant
    // walks the low-degree-first lexicographic order.
    for idx in 0..count {
        let mut rev = digits_of(idx as u32, p, k);
        rev.reverse();
        let mut m = rev;
        m.push(1);
        if is_irreducible(&m, p) {
            return m;
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

impl FieldSpec {
    /// Builds 𝔽_{p^k} with the default order bound.
    pub fn new(p: u32, k: u32, modulus: Option<&[u32]>) -> Result<Self, GfError> {
        Self::with_bound(p, k, modulus, DEFAULT_ORDER_BOUND)
    }

    /// Builds the field of order `q` with its default modulus.
    pub fn of_order(q: u32) -> Result<Self, GfError> {
        let (p, k) = prime_power(q as u64)?;
        Self::new(p, k, None)
    }

    pub fn with_bound(
        p: u32,
        k: u32,
        modulus: Option<&[u32]>,
        bound: u32,
    ) -> Result<Self, GfError> {
        if !is_prime(p as u64) {
            return Err(GfError::NotPrime(p));
        }
        if k == 0 {
            return Err(GfError::ZeroDegree);
        }
        let order = (p as u64)
            .checked_pow(k)
            .ok_or(GfError::OrderTooLarge { order: u64::MAX, bound })?;
        if order > bound as u64 || order > u16::MAX as u64 {
            return Err(GfError::OrderTooLarge { order, bound });
        }
        let q = order as u32;
        let modulus = match modulus {
            Some(m) => {
                if m.len() != k as usize + 1 || m[k as usize] != 1 || m.iter().any(|&d| d >= p) {
                    return Err(GfError::BadModulus { degree: k, p });
                }
                if !is_irreducible(m, p) {
                    return Err(GfError::ReducibleModulus(format_digits(m)));
                }
                m.to_vec()
            }
            None => default_modulus(p, k),
        };

        let mul_slow = |a: u32, b: u32| -> u32 {
            let pa = trim(digits_of(a, p, k));
            let pb = trim(digits_of(b, p, k));
            encode_digits(&poly_mulmod(&pa, &pb, &modulus, p), p)
        };

        // Smallest encoding of multiplicative order q-1.
        let mut generator = None;
        for g in 1..q {
            let mut x = g;
            let mut order = 1;
            while x != 1 {
                x = mul_slow(x, g);
                order += 1;
                if order > q {
                    break;
                }
            }
            if order == q - 1 {
                generator = Some(g);
                break;
            }
        }
        let generator = generator.expect("irreducible modulus yields a cyclic unit group");

        let n = (q - 1) as usize;
        let mut exp = vec![Fe::ZERO; 2 * n.max(1)];
        let mut log = vec![0u32; q as usize];
        let mut x = 1u32;
        for i in 0..n {
            exp[i] = Fe(x as u16);
            log[x as usize] = i as u32;
            x = mul_slow(x, generator);
        }
        for i in n..2 * n {
            exp[i] = exp[i - n];
        }

        Ok(FieldSpec {
            p,
            k,
            q,
            modulus,
            generator: Fe(generator as u16),
            exp,
            log,
        })
    }

    #[inline]
    pub fn p(&self) -> u32 {
        self.p
    }

    #[inline]
    pub fn k(&self) -> u32 {
        self.k
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    pub fn generator(&self) -> Fe {
        self.generator
    }

    /// `exp_table()[i]` is the generator raised to `i`, for `0 <= i < q-1`.
    pub fn exp_table(&self) -> &[Fe] {
        &self.exp[..(self.q - 1) as usize]
    }

    /// Discrete logarithm of a nonzero element.
    #[inline]
    pub fn log(&self, a: Fe) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(self.log[a.index()])
        }
    }

    /// Generator raised to `i` (any `i`, reduced mod q-1).
    #[inline]
    pub fn exp(&self, i: u64) -> Fe {
        self.exp[(i % (self.q as u64 - 1)) as usize]
    }

    pub fn element(&self, value: u64) -> Result<Fe, GfError> {
        if value >= self.q as u64 {
            return Err(GfError::BadEncoding { value, q: self.q });
        }
        Ok(Fe(value as u16))
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.p as i64) as u16)
    }

    pub fn digits(&self, a: Fe) -> Vec<u32> {
        digits_of(a.0 as u32, self.p, self.k)
    }

    pub fn from_digits(&self, digits: &[u32]) -> Result<Fe, GfError> {
        if digits.len() > self.k as usize || digits.iter().any(|&d| d >= self.p) {
            return Err(GfError::BadEncoding {
                value: encode_digits(digits, self.p.max(2)) as u64,
                q: self.q,
            });
        }
        Ok(Fe(encode_digits(digits, self.p) as u16))
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.p == 2 {
            return Fe(a.0 ^ b.0);
        }
        if self.k == 1 {
            let s = a.0 as u32 + b.0 as u32;
            return Fe((if s >= self.p { s - self.p } else { s }) as u16);
        }
        let (mut x, mut y) = (a.0 as u32, b.0 as u32);
        let mut out = 0;
        let mut place = 1;
        while x > 0 || y > 0 {
            out += ((x % self.p + y % self.p) % self.p) * place;
            x /= self.p;
            y /= self.p;
            place *= self.p;
        }
        Fe(out as u16)
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if self.p == 2 {
            return a;
        }
        let mut x = a.0 as u32;
        let mut out = 0;
        let mut place = 1;
        while x > 0 {
            out += ((self.p - x % self.p) % self.p) * place;
            x /= self.p;
            place *= self.p;
        }
        Fe(out as u16)
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.is_zero() || b.is_zero() {
            return Fe::ZERO;
        }
        self.exp[(self.log[a.index()] + self.log[b.index()]) as usize]
    }

    pub fn inv(&self, a: Fe) -> Result<Fe, GfError> {
        if a.is_zero() {
            return Err(GfError::DivisionByZero);
        }
        let n = self.q - 1;
        Ok(self.exp[((n - self.log[a.index()]) % n) as usize])
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe, GfError> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: Fe, n: u64) -> Fe {
        if n == 0 {
            return Fe::ONE;
        }
        if a.is_zero() {
            return Fe::ZERO;
        }
        let l = self.log[a.index()] as u64;
        self.exp(l * (n % (self.q as u64 - 1)))
    }

    /// Multiplies by the integer `n` (repeated addition), i.e. by `n mod p`.
    pub fn scale_int(&self, a: Fe, n: u64) -> Fe {
        self.mul(self.from_int((n % self.p as u64) as i64), a)
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (0..self.q).map(|e| Fe(e as u16))
    }

    pub fn nonzero_elements(&self) -> impl Iterator<Item = Fe> + '_ {
        (1..self.q).map(|e| Fe(e as u16))
    }

    pub fn is_square(&self, a: Fe) -> bool {
        match self.log(a) {
            None => true,
            Some(l) => self.p == 2 || l % 2 == 0,
        }
    }

    /// `q=<int> p=<int> k=<int> modulus=<digits>`
    pub fn header(&self) -> String {
        format!(
            "q={} p={} k={} modulus={}",
            self.q,
            self.p,
            self.k,
            format_digits(&self.modulus)
        )
    }

    /// Parses the field part of a header line; unknown keys are ignored.
    pub fn from_header(line: &str) -> Result<Self, GfError> {
        let mut q = None;
        let mut p = None;
        let mut k = None;
        let mut modulus = None;
        for tok in line.split_whitespace() {
            let Some((key, val)) = tok.split_once('=') else {
                continue;
            };
            let bad = || GfError::BadHeader(tok.to_string());
            match key {
                "q" => q = Some(u32::from_str(val).map_err(|_| bad())?),
                "p" => p = Some(u32::from_str(val).map_err(|_| bad())?),
                "k" => k = Some(u32::from_str(val).map_err(|_| bad())?),
                "modulus" => {
                    let digits: Result<Vec<u32>, _> = val.split(',').map(u32::from_str).collect();
                    modulus = Some(digits.map_err(|_| bad())?);
                }
                _ => {}
            }
        }
        let (p, k) = match (p, k, q) {
            (Some(p), Some(k), _) => (p, k),
            (_, _, Some(q)) => prime_power(q as u64)?,
            _ => return Err(GfError::BadHeader(line.to_string())),
        };
        if let Some(q) = q {
            if (p as u64).pow(k) != q as u64 {
                return Err(GfError::BadHeader(line.to_string()));
            }
        }
        FieldSpec::new(p, k, modulus.as_deref())
    }
}

/// Per-law check counts from an exhaustive field-axiom sweep.
#[derive(Clone, Debug, Default, PartialEq, Eq, serde::Serialize)]
pub struct AxiomCounts {
    pub add_assoc: u64,
    pub add_comm: u64,
    pub mul_assoc: u64,
    pub mul_comm: u64,
    pub distributive: u64,
    pub identities: u64,
    pub inverses: u64,
    pub frobenius: u64,
    pub characteristic: u64,
    pub tables: u64,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{law} fails at {witness}")]
pub struct AxiomViolation {
    pub law: &'static str,
    pub witness: String,
}

/// Exhaustively checks the field axioms: associativity and distributivity over
/// all triples, commutativity over all pairs, identities, inverses, Frobenius
/// and the characteristic over all elements, and the exp/log round trip.
pub fn check_axioms(f: &FieldSpec) -> Result<AxiomCounts, AxiomViolation> {
    let mut c = AxiomCounts::default();
    let fail = |law: &'static str, w: String| Err(AxiomViolation { law, witness: w });
    let elems: Vec<Fe> = f.elements().collect();
    for &a in &elems {
        for &b in &elems {
            if f.add(a, b) != f.add(b, a) {
                return fail("additive commutativity", format!("({a},{b})"));
            }
            c.add_comm += 1;
            if f.mul(a, b) != f.mul(b, a) {
                return fail("multiplicative commutativity", format!("({a},{b})"));
            }
            c.mul_comm += 1;
            for &x in &elems {
                if f.add(f.add(a, b), x) != f.add(a, f.add(b, x)) {
                    return fail("additive associativity", format!("({a},{b},{x})"));
                }
                c.add_assoc += 1;
                if f.mul(f.mul(a, b), x) != f.mul(a, f.mul(b, x)) {
                    return fail("multiplicative associativity", format!("({a},{b},{x})"));
                }
                c.mul_assoc += 1;
                if f.mul(a, f.add(b, x)) != f.add(f.mul(a, b), f.mul(a, x)) {
                    return fail("distributivity", format!("({a},{b},{x})"));
                }
                c.distributive += 1;
            }
        }
    }
    for &a in &elems {
        if f.add(a, Fe::ZERO) != a || f.mul(a, Fe::ONE) != a {
            return fail("identity", format!("{a}"));
        }
        c.identities += 1;
        if f.add(a, f.neg(a)) != Fe::ZERO {
            return fail("additive inverse", format!("{a}"));
        }
        if !a.is_zero() {
            let inv = f.inv(a).map_err(|_| AxiomViolation { law: "inverse", witness: a.to_string() })?;
            if f.mul(a, inv) != Fe::ONE {
                return fail("multiplicative inverse", format!("{a}"));
            }
            if f.pow(a, f.q() as u64 - 1) != Fe::ONE {
                return fail("unit order", format!("{a}"));
            }
            let l = f.log(a).unwrap();
            if f.exp_table()[l as usize] != a {
                return fail("exp/log", format!("{a}"));
            }
            c.tables += 1;
        }
        c.inverses += 1;
        if f.pow(a, f.q() as u64) != a {
            return fail("frobenius", format!("{a}"));
        }
        c.frobenius += 1;
        let mut s = Fe::ZERO;
        for _ in 0..f.p() {
            s = f.add(s, a);
        }
        if s != Fe::ZERO {
            return fail("characteristic", format!("{a}"));
        }
        c.characteristic += 1;
    }
    for (i, &e) in f.exp_table().iter().enumerate() {
        if f.log(e) != Some(i as u32) {
            return fail("log/exp", format!("{i}"));
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order_of(f: &FieldSpec, a: Fe) -> u32 {
        let mut x = a;
        let mut n = 1;
        while x != Fe::ONE {
            x = f.mul(x, a);
            n += 1;
        }
        n
    }

    #[test]
    fn prime_field_generator_is_smallest_primitive_root() {
        let f = FieldSpec::new(7, 1, None).unwrap();
        assert_eq!(f.q(), 7);
        // brute force: 2 has order 3 mod 7, 3 has order 6
        let brute = (2u64..7)
            .find(|&g| (1..6).all(|e| (g.pow(e as u32)) % 7 != 1))
            .unwrap();
        assert_eq!(brute, 3);
        assert_eq!(f.generator(), Fe(3));
    }

    #[test]
    fn binary_field() {
        let f = FieldSpec::new(2, 1, None).unwrap();
        assert_eq!(f.exp_table(), &[Fe(1)]);
        assert_eq!(f.log(Fe(1)), Some(0));
        assert_eq!(f.mul(Fe(1), Fe(1)), Fe(1));
        assert_eq!(f.add(Fe(1), Fe(1)), Fe(0));
        check_axioms(&f).unwrap();
    }

    #[test]
    fn gf16_with_explicit_modulus() {
        let f = FieldSpec::new(2, 4, Some(&[1, 1, 0, 0, 1])).unwrap();
        assert_eq!(f.q(), 16);
        // class of x, brute-force powers
        let mut x = Fe(2);
        let mut order = 1;
        while x != Fe::ONE {
            x = f.mul(x, Fe(2));
            order += 1;
        }
        assert_eq!(order, 15);
        assert_eq!(order_of(&f, f.generator()), 15);
    }

    #[test]
    fn default_modulus_is_low_degree_first_smallest() {
        assert_eq!(default_modulus(2, 4), vec![1, 0, 0, 1, 1]);
        assert_eq!(default_modulus(3, 2), vec![1, 0, 1]);
        // x^2+1 splits mod 5, x^2+x+1 does not
        assert_eq!(default_modulus(5, 2), vec![1, 1, 1]);
        // x^5+x^4+1 = (x^2+x+1)(x^3+x+1); x^5+x^3+1 is irreducible
        assert_eq!(default_modulus(2, 5), vec![1, 0, 0, 1, 0, 1]);
        // x^3+x^2+1 has the root 1 mod 3; x^3+2x^2+1 has no root
        assert_eq!(default_modulus(3, 3), vec![1, 0, 2, 1]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(FieldSpec::new(6, 1, None).unwrap_err(), GfError::NotPrime(6));
        assert!(matches!(
            FieldSpec::new(2, 4, Some(&[1, 0, 0, 0, 1])),
            Err(GfError::ReducibleModulus(_))
        ));
        assert!(matches!(
            FieldSpec::new(2, 13, None),
            Err(GfError::OrderTooLarge { .. })
        ));
        assert!(matches!(FieldSpec::of_order(12), Err(GfError::NotPrimePower(12))));
        assert!(matches!(
            FieldSpec::new(3, 2, Some(&[1, 0, 2])),
            Err(GfError::BadModulus { .. })
        ));
    }

    #[test]
    fn small_arithmetic() {
        let f = FieldSpec::new(7, 1, None).unwrap();
        assert_eq!(f.add(Fe(3), Fe(5)), Fe(1));
        assert_eq!(f.mul(Fe(3), Fe(5)), Fe(1));
        assert_eq!(f.inv(Fe(3)).unwrap(), Fe(5));
        assert_eq!(f.inv(Fe(0)), Err(GfError::DivisionByZero));

        let f25 = FieldSpec::of_order(25).unwrap();
        // (x+2) + (2x+4) = 3x+1, encodings digit0 + 5*digit1
        assert_eq!(f25.add(Fe(2 + 5), Fe(4 + 10)), Fe(1 + 15));

        let f16 = FieldSpec::of_order(16).unwrap();
        for a in f16.elements() {
            assert_eq!(f16.add(a, a), Fe::ZERO);
        }

        let f27 = FieldSpec::of_order(27).unwrap();
        for a in f27.nonzero_elements() {
            assert_eq!(f27.mul(a, f27.inv(a).unwrap()), Fe::ONE);
        }
    }

    #[test]
    fn enumeration_order() {
        let f5 = FieldSpec::of_order(5).unwrap();
        assert_eq!(
            f5.elements().collect::<Vec<_>>(),
            vec![Fe(0), Fe(1), Fe(2), Fe(3), Fe(4)]
        );
        let f16 = FieldSpec::of_order(16).unwrap();
        assert_eq!(f16.elements().map(|e| e.0).collect::<Vec<_>>(), (0..16).collect::<Vec<_>>());
        assert_eq!(FieldSpec::of_order(32).unwrap().nonzero_elements().count(), 31);
    }

    #[test]
    fn header_round_trip() {
        for q in [2, 7, 9, 16, 25, 27, 32] {
            let f = FieldSpec::of_order(q).unwrap();
            let g = FieldSpec::from_header(&f.header()).unwrap();
            assert_eq!(f, g);
        }
        assert_eq!(
            FieldSpec::of_order(16).unwrap().header(),
            "q=16 p=2 k=4 modulus=1,0,0,1,1"
        );
        assert!(FieldSpec::from_header("q=16 p=2 k=3").is_err());
    }

    #[test]
    fn digits_round_trip() {
        let f = FieldSpec::of_order(27).unwrap();
        for a in f.elements() {
            assert_eq!(f.from_digits(&f.digits(a)).unwrap(), a);
        }
    }

    #[test]
    fn pow_and_frobenius() {
        for q in [4, 8, 9, 11] {
            let f = FieldSpec::of_order(q).unwrap();
            for a in f.elements() {
                assert_eq!(f.pow(a, q as u64), a);
                let mut acc = Fe::ONE;
                for n in 0..2 * q as u64 {
                    assert_eq!(f.pow(a, n), acc);
                    acc = f.mul(acc, a);
                }
            }
        }
    }
}
