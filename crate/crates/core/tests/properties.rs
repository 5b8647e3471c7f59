use std::sync::Arc;

use proptest::prelude::*;
use qvf_core::search::{
    enumerate_survivors, lemma8_template, survivor_lemma5_audit, verify_lemma8, Normalization, SearchOptions, Shard,
    SurvivorDb,
};
use qvf_core::shapes::{apply_scaling, ScalingElement};
use qvf_core::{Fe, FieldSpec, Form, Monomial, TripleShape};

const ORDERS: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

fn monomials(n: usize, d: u32) -> Vec<Vec<u8>> {
    if n == 1 {
        return vec![vec![d as u8]];
    }
    (0..=d)
        .rev()
        .flat_map(|e| {
            monomials(n - 1, d - e).into_iter().map(move |mut rest| {
                rest.insert(0, e as u8);
                rest
            })
        })
        .collect()
}

/// A form from raw coefficient draws; each monomial is kept with probability about one half.
fn build(q: u32, n: usize, d: u32, draws: &[u16]) -> Form {
    let field = Arc::new(FieldSpec::of_order(q).unwrap());
    let mut f = Form::zero(field, n, d).unwrap();
    for (m, &r) in monomials(n, d).iter().zip(draws.iter().cycle()) {
        if r % 2 == 0 {
            f.add_term(Monomial::new(m), Fe((r / 2) % q as u16)).unwrap();
        }
    }
    f
}

fn form_strategy(max_n: usize, degrees: std::ops::RangeInclusive<u32>) -> impl Strategy<Value = Form> {
    (prop::sample::select(ORDERS.to_vec()), 2..=max_n, degrees, prop::collection::vec(any::<u16>(), 60))
        .prop_map(|(q, n, d, draws)| build(q, n, d, &draws))
}

fn point(field: &FieldSpec, n: usize, draws: &[u16]) -> Vec<Fe> {
    (0..n).map(|i| Fe(draws[i] % field.q() as u16)).collect()
}

/// `Σ x_i ∂_i F` as a form.
fn euler_form(f: &Form) -> Form {
    let mut out = Form::zero(f.field().clone(), f.num_vars(), f.degree()).unwrap();
    for i in 0..f.num_vars() {
        for (m, c) in f.partial_derivative(i).unwrap().terms() {
            let mut e = *m;
            e.0[i] += 1;
            out.add_term(e, *c).unwrap();
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn euler_identity(f in form_strategy(4, 1..=5), draws in prop::collection::vec(any::<u16>(), 4)) {
        let field = f.field().clone();
        let e = euler_form(&f);
        let d = f.degree() as u64;
        let scaled: Vec<(Monomial, Fe)> =
            f.terms().map(|(m, c)| (*m, field.scale_int(*c, d))).filter(|(_, c)| !c.is_zero()).collect();
        let got: Vec<(Monomial, Fe)> = e.terms().map(|(m, c)| (*m, *c)).collect();
        prop_assert_eq!(&got, &scaled);
        let x = point(&field, f.num_vars(), &draws);
        let lhs = (0..f.num_vars()).fold(Fe::ZERO, |acc, i| {
            field.add(acc, field.mul(x[i], f.partial_derivative(i).unwrap().evaluate(&x).unwrap()))
        });
        prop_assert_eq!(lhs, field.scale_int(f.evaluate(&x).unwrap(), d));
        if d % field.p() as u64 == 0 {
            prop_assert!(e.is_zero());
        }
    }

    #[test]
    fn euler_quintic_in_characteristic_five(draws in prop::collection::vec(any::<u16>(), 60), n in 2usize..=4) {
        let f = build(5, n, 5, &draws);
        prop_assert!(euler_form(&f).is_zero());
        let f25 = build(25, n, 5, &draws);
        prop_assert!(euler_form(&f25).is_zero());
    }

    #[test]
    fn restriction_commutes_with_evaluation(
        f in form_strategy(4, 1..=5),
        basis_draws in prop::collection::vec(any::<u16>(), 12),
        y_draws in prop::collection::vec(any::<u16>(), 3),
        k in 1usize..=3,
    ) {
        let field = f.field().clone();
        let n = f.num_vars();
        let basis: Vec<Vec<Fe>> = (0..k).map(|j| point(&field, n, &basis_draws[j * 4..])).collect();
        let y = point(&field, k, &y_draws);
        let x: Vec<Fe> = (0..n)
            .map(|i| (0..k).fold(Fe::ZERO, |acc, j| field.add(acc, field.mul(y[j], basis[j][i]))))
            .collect();
        let r = f.restrict(&basis).unwrap();
        prop_assert_eq!(r.evaluate(&y).unwrap(), f.evaluate(&x).unwrap());
    }

    #[test]
    fn census_is_invariant_under_scaling(
        f in form_strategy(3, 5..=5),
        c in 1u16..,
        lambdas in prop::collection::vec(1u16.., 3),
    ) {
        let field = f.field().clone();
        let units: Vec<Fe> = field.nonzero_elements().collect();
        let pick = |r: u16| units[r as usize % units.len()];
        let g = ScalingElement {
            c: pick(c),
            lambdas: (0..f.num_vars()).map(|i| pick(lambdas[i])).collect(),
        };
        let h = apply_scaling(&f, &g).unwrap();
        let (a, b) = (f.count_projective_zeros(false), h.count_projective_zeros(false));
        prop_assert_eq!((a.total, a.singular, a.nonsingular), (b.total, b.singular, b.nonsingular));
    }

    #[test]
    fn find_agrees_with_census_over_f5(draws in prop::collection::vec(any::<u16>(), 60), n in 2usize..=4) {
        let f = build(5, n, 5, &draws);
        let census = f.count_projective_zeros(false);
        let found = f.find_nonsingular_zero();
        prop_assert_eq!(found.is_some(), census.nonsingular > 0);
        if let Some(p) = found {
            prop_assert!(f.is_nonsingular_zero(&p).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn chevalley_warning_bound(
        q in prop::sample::select(vec![2u32, 3, 4, 5, 7]),
        d in 1u32..=3,
        extra in 1usize..=2,
        draws in prop::collection::vec(any::<u16>(), 60),
    ) {
        let n = d as usize + extra;
        let f = build(q, n, d, &draws);
        prop_assert!(f.chevalley_warning_check().unwrap());
    }
}

#[test]
fn survivors_at_q11_have_the_two_zero_shape() {
    let f = Arc::new(FieldSpec::of_order(11).unwrap());
    let (_, dbs) = verify_lemma8(&f, &SearchOptions::default()).unwrap();
    let mut records = 0;
    for db in &dbs {
        let audit = survivor_lemma5_audit(db).unwrap();
        assert!(audit.passes(), "{audit:?}");
        records += audit.records;
    }
    assert!(records > 0);
}

#[test]
fn eight_shards_merge_to_the_unsharded_bytes() {
    let f = Arc::new(FieldSpec::of_order(7).unwrap());
    for shape in [TripleShape::Transitive, TripleShape::Cyclic] {
        let t = lemma8_template(shape);
        let whole = enumerate_survivors(&f, &t, Normalization::Orbit, &SearchOptions::default()).unwrap().0;
        let parts: Vec<SurvivorDb> = (0..8)
            .map(|i| {
                let opts = SearchOptions { shard: Shard::new(i, 8).unwrap(), ..Default::default() };
                let part = enumerate_survivors(&f, &t, Normalization::Orbit, &opts).unwrap().0;
                SurvivorDb::parse(&part.to_text()).unwrap()
            })
            .collect();
        let merged = SurvivorDb::merge(&parts).unwrap();
        assert_eq!(merged.to_text(), whole.to_text());
        assert!(!whole.is_empty());
    }
}

#[test]
fn survivor_counts_do_not_depend_on_the_modulus_at_q16() {
    let default = Arc::new(FieldSpec::of_order(16).unwrap());
    let irreducible: [&[u32]; 2] = [&[1, 1, 0, 0, 1], &[1, 0, 0, 1, 1]];
    let alt = irreducible.into_iter().find(|m| *m != default.modulus()).unwrap();
    let other = Arc::new(FieldSpec::new(2, 4, Some(alt)).unwrap());
    let counts = |f: &Arc<FieldSpec>| {
        let (report, dbs) = verify_lemma8(f, &SearchOptions::default()).unwrap();
        assert!(report.passed());
        dbs.iter().map(|d| (d.len(), d.histogram())).collect::<Vec<_>>()
    };
    assert_eq!(counts(&default), counts(&other));
}
