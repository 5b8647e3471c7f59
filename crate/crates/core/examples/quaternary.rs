//! Assembles quaternary candidates from the ternary survivors and sweeps the
//! four trailing coefficients of each.
//!
//!     cargo run --release -p qvf-core --example quaternary -- 13 3
//!     cargo run --release -p qvf-core --example quaternary -- 11 1 0/100

use std::sync::Arc;

use qvf_core::assemble::{lemma8_databases, verify_quaternary, ArrayCache, ArraySource, QuaternaryOptions};
use qvf_core::gf::FieldSpec;
use qvf_core::search::Shard;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let q: u32 = args.first().map_or(Ok(13), |a| a.parse())?;
    let g: u8 = args.get(1).map_or(Ok(1), |a| a.parse())?;
    let shard = match args.get(2) {
        Some(s) => {
            let (i, n) = s.split_once('/').ok_or("shard is i/N")?;
            Shard::new(i.parse()?, n.parse()?)?
        }
        None => Shard::ALL,
    };
    let field = Arc::new(FieldSpec::of_order(q)?);
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let (t1, t2) = lemma8_databases(&field, jobs)?;
    println!("ternary survivors: {} transitive, {} cyclic orbit representatives", t1.len(), t2.len());
    let opts = QuaternaryOptions { shard, jobs, ..Default::default() };
    let src = ArraySource::Expand { t1: &t1, t2: &t2 };
    let r = verify_quaternary(&field, g, &src, &ArrayCache::new(), &opts)?;
    for c in &r.pin_classes {
        println!("pins {}: arrays {:?}, {} candidates", c.pins, c.array_sizes, c.candidate_count);
    }
    println!(
        "{}: swept {} forms in {:.1}s, {} survivors, {:?} ({})",
        r.claim, r.forms_swept, r.elapsed, r.survivor_count, r.verdict, r.detail
    );
    Ok(())
}
