//! Exact sweep of the trailing coefficients `t ∈ 𝔽_q^4` of
//! `F_t = C + x1 x2 x3 x4 · (t1 x1 + t2 x2 + t3 x3 + t4 x4)`.
//!
//! At a point `P` with all coordinates nonzero, `F_t(P) = 0` cuts out the
//! hyperplane `⟨P, t⟩ = -C(P)/m(P)` (with `m = x1 x2 x3 x4`), and on it the
//! gradient vanishes for exactly one `t`. Striking those hyperplanes from a
//! bitset of `𝔽_q^4` leaves the `t` for which no interior point is a
//! non-singular zero. Boundary points do not see `t` except through one
//! partial derivative and are handled separately.

use std::collections::HashMap;

use crate::forms::{Monomial, ProjectivePoint};
use crate::gf::{Fe, FieldSpec};

/// Value and the four partials of a polynomial at one interior point.
pub(crate) type Jet = [u8; 5];

/// Tables shared by every candidate of one field.
pub(crate) struct Cover {
    q: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    /// Interior points `(1, x2, x2 μ, x2 ν)`, grouped by the family `(μ, ν)`.
    points: Vec<[u8; 4]>,
    family: Vec<u32>,
    inv_x2: Vec<u8>,
    inv_m: Vec<u8>,
    inv_x: Vec<[u8; 4]>,
    /// Blocks per `(t2, t3, t4)` slice.
    blocks: usize,
    /// `planes[(family * q + rho) * blocks ..]`: the set `t2 + μ t3 + ν t4 = rho`.
    planes: Vec<Block>,
    full: Vec<Block>,
    /// `rho[(x2⁻¹ * q + γ) * q + t1] = (γ - t1) / x2`.
    rho: Vec<u8>,
    /// Jets of every quintic monomial with exponents below 4.
    mono_jets: HashMap<Monomial, Vec<Jet>>,
    avx2: bool,
}

/// Largest field order the tables support.
pub(crate) const MAX_Q: usize = 16;


/// What a boundary zero of `C` says about `t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum BoundaryEffect {
    /// Singular for every `t`.
    None,
    /// Non-singular for every `t`.
    KillsAll,
    /// Non-singular unless `⟨P, t⟩ = rho`.
    KeepOnly { point: [u8; 4], rho: u8 },
}

type Block = [u64; 4];

fn set(bits: &mut [Block], i: usize) {
    bits[i / 256][(i / 64) % 4] |= 1 << (i % 64);
}

fn clear(bits: &mut [Block], i: usize) {
    bits[i / 256][(i / 64) % 4] &= !(1 << (i % 64));
}

fn test(bits: &[Block], i: usize) -> bool {
    bits[i / 256][(i / 64) % 4] >> (i % 64) & 1 == 1
}

impl Cover {
    pub(crate) fn new(field: &FieldSpec) -> Option<Self> {
        let q = field.q() as usize;
        if q > MAX_Q {
            return None;
        }
        let mut add = vec![0u8; q * q];
        let mut mul = vec![0u8; q * q];
        let mut neg = vec![0u8; q];
        for a in field.elements() {
            neg[a.index()] = field.neg(a).0 as u8;
            for b in field.elements() {
                add[a.index() * q + b.index()] = field.add(a, b).0 as u8;
                mul[a.index() * q + b.index()] = field.mul(a, b).0 as u8;
            }
        }
        let units: Vec<Fe> = field.nonzero_elements().collect();
        let bits = q * q * q;
        let blocks = bits.div_ceil(256);
        let mut full = vec![[0u64; 4]; blocks];
        for b in 0..bits {
            set(&mut full, b);
        }
        let mut points = Vec::new();
        let mut family = Vec::new();
        let mut inv_x2 = Vec::new();
        let mut inv_m = Vec::new();
        let mut inv_x = Vec::new();
        let mut planes = vec![[0u64; 4]; units.len() * units.len() * q * blocks];
        let mut fam = 0;
        for &mu in &units {
            for &nu in &units {
                for t4 in field.elements() {
                    for t3 in field.elements() {
                        let tail = field.add(field.mul(mu, t3), field.mul(nu, t4));
                        for t2 in field.elements() {
                            let rho = field.add(t2, tail).index();
                            let bit = t2.index() + q * t3.index() + q * q * t4.index();
                            set(&mut planes[(fam * q + rho) * blocks..], bit);
                        }
                    }
                }
                for &x2 in &units {
                    let x = [Fe::ONE, x2, field.mul(x2, mu), field.mul(x2, nu)];
                    let m = x.iter().fold(Fe::ONE, |acc, &v| field.mul(acc, v));
                    points.push(x.map(|v| v.0 as u8));
                    family.push(fam as u32);
                    inv_x2.push(field.inv(x2).expect("unit").0 as u8);
                    inv_m.push(field.inv(m).expect("unit").0 as u8);
                    inv_x.push(x.map(|v| field.inv(v).expect("unit").0 as u8));
                }
                fam += 1;
            }
        }
        let mut rho = vec![0u8; q * q * q];
        for a in field.elements() {
            for g in field.elements() {
                for t1 in field.elements() {
                    rho[(a.index() * q + g.index()) * q + t1.index()] = field.mul(field.sub(g, t1), a).0 as u8;
                }
            }
        }
        let mut mono_jets = HashMap::new();
        for e1 in 0..4u8 {
            for e2 in 0..4u8 {
                for e3 in 0..4u8 {
                    let Some(e4) = 5u8.checked_sub(e1 + e2 + e3).filter(|&e| e < 4) else { continue };
                    let m = Monomial::new(&[e1, e2, e3, e4]);
                    let jets = points
                        .iter()
                        .map(|pt| {
                            let x = pt.map(|v| Fe(v as u16));
                            let mut j = [m.eval(field, &x).0 as u8, 0, 0, 0, 0];
                            for k in 0..4 {
                                j[k + 1] = m.eval_partial(field, &x, k).0 as u8;
                            }
                            j
                        })
                        .collect();
                    mono_jets.insert(m, jets);
                }
            }
        }
        Some(Cover {
            q,
            add,
            mul,
            neg,
            points,
            family,
            inv_x2,
            inv_m,
            inv_x,
            blocks,
            planes,
            full,
            mono_jets,
            #[cfg(target_arch = "x86_64")]
            avx2: std::arch::is_x86_feature_detected!("avx2"),
            #[cfg(not(target_arch = "x86_64"))]
            avx2: false,
            rho,
        })
    }

    pub(crate) fn point_count(&self) -> usize {
        self.points.len()
    }

    /// Jets of `Σ c·mono` at every interior point. Monomials need exponents
    /// below 4.
    pub(crate) fn jets(&self, terms: &[(Monomial, Fe)]) -> Vec<Jet> {
        let mut out = vec![[0u8; 5]; self.points.len()];
        for (m, c) in terms {
            let table = &self.mono_jets[m];
            let row = &self.mul[c.index() * self.q..(c.index() + 1) * self.q];
            for (jet, mj) in out.iter_mut().zip(table) {
                for k in 0..5 {
                    jet[k] = self.add(jet[k], row[mj[k] as usize]);
                }
            }
        }
        out
    }

    #[inline]
    fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.q + b as usize]
    }

    #[inline]
    fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.q + b as usize]
    }

    #[inline]
    fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg[b as usize])
    }

    /// Classifies a zero `point` of `C` with at least one zero coordinate,
    /// given the gradient of `C` there.
    pub(crate) fn boundary_effect(&self, point: &ProjectivePoint, grad: [Fe; 4]) -> BoundaryEffect {
        let x = point.coords();
        let zeros: Vec<usize> = (0..4).filter(|&i| x[i].is_zero()).collect();
        if zeros.len() >= 2 {
            return if grad.iter().all(|g| g.is_zero()) {
                BoundaryEffect::None
            } else {
                BoundaryEffect::KillsAll
            };
        }
        let j = zeros[0];
        if (0..4).any(|i| i != j && !grad[i].is_zero()) {
            return BoundaryEffect::KillsAll;
        }
        // ∂_j F_t(P) = ∂_j C(P) + (Π_{k≠j} x_k) ⟨P, t⟩
        let pi = (0..4)
            .filter(|&k| k != j)
            .fold(1u8, |acc, k| self.mul(acc, x[k].0 as u8));
        let inv_pi = (1..self.q as u8).find(|&v| self.mul(v, pi) == 1).expect("unit");
        let rho = self.mul(self.neg[grad[j].0 as usize], inv_pi);
        BoundaryEffect::KeepOnly {
            point: [0, 1, 2, 3].map(|k| x[k].0 as u8),
            rho,
        }
    }

    /// The `t` left after the boundary effects and every interior point of
    /// `C = Σ jets`. Returned in lexicographic order of `(t1, t2, t3, t4)`.
    pub(crate) fn survivors(&self, jets: [&[Jet]; 4], boundary: &[BoundaryEffect]) -> Vec<[u8; 4]> {
        if boundary.contains(&BoundaryEffect::KillsAll) {
            return Vec::new();
        }
        #[cfg(target_arch = "x86_64")]
        if self.avx2 {
            // SAFETY: `avx2` is only set after runtime detection.
            return unsafe { self.survivors_avx2(jets, boundary) };
        }
        self.dispatch(jets, boundary)
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn survivors_avx2(&self, jets: [&[Jet]; 4], boundary: &[BoundaryEffect]) -> Vec<[u8; 4]> {
        self.dispatch(jets, boundary)
    }

    #[inline(always)]
    fn dispatch(&self, jets: [&[Jet]; 4], boundary: &[BoundaryEffect]) -> Vec<[u8; 4]> {
        match self.blocks {
            1 => self.run::<1>(jets, boundary),
            2 => self.run::<2>(jets, boundary),
            3 => self.run::<3>(jets, boundary),
            6 => self.run::<6>(jets, boundary),
            9 => self.run::<9>(jets, boundary),
            16 => self.run::<16>(jets, boundary),
            b => unreachable!("{b} blocks"),
        }
    }

    #[inline(always)]
    fn run<const N: usize>(&self, jets: [&[Jet]; 4], boundary: &[BoundaryEffect]) -> Vec<[u8; 4]> {
        let q = self.q;
        let full: [Block; N] = self.full[..].try_into().expect("slice size");
        let mut slices = [full; MAX_Q];
        let mut alive: u32 = (1 << q) - 1;
        for b in boundary {
            if let BoundaryEffect::KeepOnly { point, rho } = *b {
                for (t1, slice) in slices.iter_mut().enumerate().take(q) {
                    for bit in 0..q * q * q {
                        let t = [t1, bit % q, (bit / q) % q, bit / (q * q)];
                        let v = (0..4).fold(0u8, |acc, k| self.add(acc, self.mul(point[k], t[k] as u8)));
                        if v != rho {
                            clear(slice, bit);
                        }
                    }
                }
            }
        }
        for (t1, slice) in slices.iter().enumerate().take(q) {
            if slice.iter().all(|x| *x == [0; 4]) {
                alive &= !(1 << t1);
            }
        }
        let planes: &[[Block; N]] = as_arrays(&self.planes);
        for i in 0..self.points.len() {
            if alive == 0 {
                return Vec::new();
            }
            let mut jet = jets[0][i];
            for other in &jets[1..] {
                let o = &other[i];
                for k in 0..5 {
                    jet[k] = self.add(jet[k], o[k]);
                }
            }
            let c = jet[0];
            let inv_m = self.inv_m[i];
            let inv_x = self.inv_x[i];
            let gamma = self.neg[self.mul(c, inv_m) as usize];
            // the one t on the hyperplane where P is a singular zero
            let sing = |k: usize| self.mul(self.sub(self.mul(c, inv_x[k]), jet[k + 1]), inv_m);
            let s0 = sing(0) as usize;
            let s_bit = if alive >> s0 & 1 == 1 {
                sing(1) as usize + q * sing(2) as usize + q * q * sing(3) as usize
            } else {
                usize::MAX
            };
            let rhos = &self.rho[(self.inv_x2[i] as usize * q + gamma as usize) * q..][..q];
            let fam = &planes[self.family[i] as usize * q..][..q];
            let mut bits = alive;
            while bits != 0 {
                let t1 = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let slice = &mut slices[t1];
                let keep = t1 == s0 && s_bit != usize::MAX && test(slice, s_bit);
                let plane = &fam[rhos[t1] as usize];
                let mut any = 0;
                for (x, p) in slice.as_flattened_mut().iter_mut().zip(plane.as_flattened()) {
                    *x &= !p;
                    any |= *x;
                }
                if keep {
                    set(slice, s_bit);
                } else if any == 0 {
                    alive &= !(1 << t1);
                }
            }
        }
        let mut out = Vec::new();
        for (t1, slice) in slices.iter().enumerate().take(q) {
            if alive >> t1 & 1 == 0 {
                continue;
            }
            for bit in 0..q * q * q {
                if test(slice, bit) {
                    out.push([t1 as u8, (bit % q) as u8, ((bit / q) % q) as u8, (bit / (q * q)) as u8]);
                }
            }
        }
        out
    }
}

fn as_arrays<const N: usize>(blocks: &[Block]) -> &[[Block; N]] {
    let (arrays, rest) = blocks.as_chunks::<N>();
    debug_assert!(rest.is_empty());
    arrays
}
