//! Incremental existence sweep for non-singular zeros.
//!
//! A family of forms `f = base + Σ v_s m_s` is swept over the value domains of
//! its tail slots. The innermost slot `u` is resolved in one pass over the
//! points: a point `P` with `m_u(P) ≠ 0` is a zero of exactly one member,
//! `u = -f_0(P) / m_u(P)`, so each point settles at most one value, and the
//! batch of `q` forms ends as soon as every value has a non-singular zero.
//! Values never settled are survivors.
//!
//! Field arithmetic runs on byte tables; only `q ≤ 64` is supported.

use std::sync::Arc;

use crate::forms::{projective_points, Monomial, ProjectivePoint};
use crate::gf::{Fe, FieldSpec};

const W: usize = 64;
const NINV: usize = 7;

pub struct SweepKernel {
    field: Arc<FieldSpec>,
    n: usize,
    add: Vec<u8>,
    mul: Vec<u8>,
    /// Skip the leading coordinate's partial; sound when `5 ≢ 0 (mod p)` by
    /// the Euler identity.
    skip_lead: bool,
    points: Vec<ProjectivePoint>,
    leads: Vec<u8>,
    /// Per monomial, per point: value, partials `1..=n`, and `-1/value` at `NINV`.
    data: Vec<Vec<[u8; 8]>>,
}

impl SweepKernel {
    /// Precomputes monomial tables for `monos` (degree-5 monomials in `n`
    /// variables). Returns `None` if the field is too large for byte tables.
    pub fn new(field: Arc<FieldSpec>, n: usize, monos: &[Monomial]) -> Option<Self> {
        let q = field.q() as usize;
        if q > W || !(1..=6).contains(&n) {
            return None;
        }
        let mut add = vec![0u8; W * W];
        let mut mul = vec![0u8; W * W];
        for a in field.elements() {
            for b in field.elements() {
                add[a.index() * W + b.index()] = field.add(a, b).0 as u8;
                mul[a.index() * W + b.index()] = field.mul(a, b).0 as u8;
            }
        }
        let all = projective_points(n, &field);
        let (mut points, rest): (Vec<_>, Vec<_>) = all
            .into_iter()
            .partition(|p| p.coords().iter().all(|c| !c.is_zero()));
        points.extend(rest);
        let leads = points.iter().map(|p| p.lead() as u8).collect();
        let mut data = Vec::with_capacity(monos.len() + 1);
        for m in monos {
            let rows = points
                .iter()
                .map(|p| {
                    let mut row = [0u8; 8];
                    let v = m.eval(&field, p.coords());
                    row[0] = v.0 as u8;
                    for i in 0..n {
                        row[1 + i] = m.eval_partial(&field, p.coords(), i).0 as u8;
                    }
                    if !v.is_zero() {
                        row[NINV] = field.neg(field.inv(v).unwrap()).0 as u8;
                    }
                    row
                })
                .collect();
            data.push(rows);
        }
        // padding slot: the zero monomial
        data.push(vec![[0u8; 8]; points.len()]);
        Some(SweepKernel {
            skip_lead: field.p() != 5,
            field,
            n,
            add,
            mul,
            points,
            leads,
            data,
        })
    }

    pub fn field(&self) -> &Arc<FieldSpec> {
        &self.field
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    fn zero_slot(&self) -> usize {
        self.data.len() - 1
    }

    /// Sweeps every assignment of the `tail` slots (indices into the monomial
    /// list, each with its value domain) on top of the `fixed` terms, and
    /// reports tail assignments whose form has no non-singular zero. Returns
    /// the number of forms visited.
    pub fn sweep(
        &self,
        fixed: &[(usize, Fe)],
        tail: &[(usize, Vec<Fe>)],
        mut on_survivor: impl FnMut(&[Fe]),
    ) -> u64 {
        let np = self.points.len();
        let pad = 3usize.saturating_sub(tail.len());
        let slots: Vec<usize> = std::iter::repeat(self.zero_slot())
            .take(pad)
            .chain(tail.iter().map(|(s, _)| *s))
            .collect();
        let domains: Vec<Vec<u8>> = std::iter::repeat(vec![0u8])
            .take(pad)
            .chain(tail.iter().map(|(_, d)| d.iter().map(|v| v.0 as u8).collect()))
            .collect();
        if domains.iter().any(|d| d.is_empty()) {
            return 0;
        }
        let eager = slots.len() - 3;

        let mut acc = vec![vec![[0u8; 8]; np]; eager + 1];
        for &(s, c) in fixed {
            let mrow = &self.mul[c.index() * W..];
            for (a, d) in acc[0].iter_mut().zip(&self.data[s]) {
                for k in 0..=self.n {
                    a[k] = self.add[a[k] as usize * W + mrow[d[k] as usize] as usize];
                }
            }
        }
        let mut assign = vec![0u8; slots.len()];
        let mut visited = 0u64;
        let mut emit = |assign: &[u8]| {
            let vals: Vec<Fe> = assign[pad..].iter().map(|&v| Fe(v as u16)).collect();
            on_survivor(&vals);
        };
        self.eager_level(0, &slots, &domains, &mut acc, &mut assign, &mut visited, &mut emit);
        visited
    }

    #[allow(clippy::too_many_arguments)]
    fn eager_level(
        &self,
        level: usize,
        slots: &[usize],
        domains: &[Vec<u8>],
        acc: &mut [Vec<[u8; 8]>],
        assign: &mut [u8],
        visited: &mut u64,
        emit: &mut dyn FnMut(&[u8]),
    ) {
        let eager = slots.len() - 3;
        if level == eager {
            self.batches(slots, domains, &acc[eager], assign, visited, emit);
            return;
        }
        let rows = &self.data[slots[level]];
        for &v in &domains[level] {
            assign[level] = v;
            let (lo, hi) = acc.split_at_mut(level + 1);
            let (src, dst) = (&lo[level], &mut hi[0]);
            let mrow = &self.mul[v as usize * W..];
            for ((o, a), d) in dst.iter_mut().zip(src).zip(rows) {
                for k in 0..=self.n {
                    o[k] = self.add[a[k] as usize * W + mrow[d[k] as usize] as usize];
                }
            }
            self.eager_level(level + 1, slots, domains, acc, assign, visited, emit);
        }
    }

    fn batches(
        &self,
        slots: &[usize],
        domains: &[Vec<u8>],
        top: &[[u8; 8]],
        assign: &mut [u8],
        visited: &mut u64,
        emit: &mut dyn FnMut(&[u8]),
    ) {
        let t = slots.len();
        let (d1, d2, du) = (
            &self.data[slots[t - 3]],
            &self.data[slots[t - 2]],
            &self.data[slots[t - 1]],
        );
        let full: u64 = domains[t - 1].iter().fold(0, |m, &v| m | 1 << v);
        let add = |a: u8, b: u8| self.add[a as usize * W + b as usize];
        let n = self.n;
        for &v1 in &domains[t - 3] {
            let m1 = &self.mul[v1 as usize * W..v1 as usize * W + W];
            for &v2 in &domains[t - 2] {
                let m2 = &self.mul[v2 as usize * W..v2 as usize * W + W];
                let mut covered = 0u64;
                for p in 0..top.len() {
                    let (a, x, y, z) = (&top[p], &d1[p], &d2[p], &du[p]);
                    let f0 = add(add(a[0], m1[x[0] as usize]), m2[y[0] as usize]);
                    let lead = if self.skip_lead { self.leads[p] as usize + 1 } else { 0 };
                    if z[0] != 0 {
                        let u = self.mul[f0 as usize * W + z[NINV] as usize];
                        let bit = 1u64 << u;
                        if covered & bit != 0 || full & bit == 0 {
                            continue;
                        }
                        let mu = &self.mul[u as usize * W..u as usize * W + W];
                        let nonsingular = (1..=n).any(|k| {
                            k != lead
                                && add(add(add(a[k], m1[x[k] as usize]), m2[y[k] as usize]), mu[z[k] as usize]) != 0
                        });
                        if nonsingular {
                            covered |= bit;
                        }
                    } else {
                        if f0 != 0 {
                            continue;
                        }
                        // zero of every member; gradient is g0 + u·g1
                        let mut g0 = [0u8; 8];
                        let mut pivot = None;
                        for k in 1..=n {
                            if k == lead {
                                continue;
                            }
                            g0[k] = add(add(a[k], m1[x[k] as usize]), m2[y[k] as usize]);
                            if pivot.is_none() && z[k] != 0 {
                                pivot = Some(k);
                            }
                        }
                        match pivot {
                            None => {
                                if g0.iter().any(|&g| g != 0) {
                                    covered = full;
                                }
                            }
                            Some(k) => {
                                let ninv = self.field.neg(self.field.inv(Fe(z[k] as u16)).unwrap()).0 as u8;
                                let u0 = self.mul[g0[k] as usize * W + ninv as usize];
                                let mu = &self.mul[u0 as usize * W..u0 as usize * W + W];
                                let vanishes =
                                    (1..=n).all(|j| j == lead || add(g0[j], mu[z[j] as usize]) == 0);
                                covered |= if vanishes { full & !(1u64 << u0) } else { full };
                            }
                        }
                    }
                    if covered == full {
                        break;
                    }
                }
                *visited += domains[t - 1].len() as u64;
                let mut left = full & !covered;
                while left != 0 {
                    let u = left.trailing_zeros() as u8;
                    left &= left - 1;
                    assign[t - 3] = v1;
                    assign[t - 2] = v2;
                    assign[t - 1] = u;
                    emit(assign);
                }
            }
        }
    }
}
