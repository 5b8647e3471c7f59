//! Hunts for a quaternary quintic over 𝔽_5 without non-singular zeros and
//! confirms it by scanning all of 𝔽_5^4.

use std::sync::Arc;

use qvf_core::assemble::{
    audit_counterexample, lemma8_databases, verify_quaternary, ArrayCache, ArraySource, QuaternaryOptions,
};
use qvf_core::{FieldSpec, Form};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g: u8 = std::env::args().nth(1).map_or(Ok(1), |a| a.parse())?;
    let field = Arc::new(FieldSpec::of_order(5)?);
    let (t1, t2) = lemma8_databases(&field, 1)?;
    let opts = QuaternaryOptions { max_survivors: Some(1), ..Default::default() };
    let src = ArraySource::Expand { t1: &t1, t2: &t2 };
    let r = verify_quaternary(&field, g, &src, &ArrayCache::new(), &opts)?;
    let Some(s) = r.survivors.first() else {
        println!("no survivor among {} candidates", r.candidate_count);
        return Ok(());
    };
    println!("rows {:?}, trailing coefficients {:?}, after {:.1}s", s.rows, s.dterms, r.elapsed);
    print!("{}", s.form);
    let form = Form::parse(&s.form)?;
    let audit = audit_counterexample(&form);
    println!(
        "affine zeros {} (non-singular {}), projective zeros {} (singular {}), confirmed {}",
        audit.affine_zeros, audit.affine_nonsingular, audit.census.total, audit.census.singular, audit.confirmed
    );
    Ok(())
}
