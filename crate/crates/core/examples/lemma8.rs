//! Sweeps both ternary shapes over scaling-orbit representatives and judges
//! the survivors against the claims table.
//!
//!     cargo run --release -p qvf-core --example lemma8 -- 11 13

use std::sync::Arc;

use qvf_core::gf::FieldSpec;
use qvf_core::search::{verify_lemma8, SearchOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let qs: Vec<u32> = std::env::args().skip(1).map(|a| a.parse()).collect::<Result<_, _>>()?;
    let qs = if qs.is_empty() { vec![7, 11] } else { qs };
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    for q in qs {
        let field = Arc::new(FieldSpec::of_order(q)?);
        let opts = SearchOptions { jobs, ..Default::default() };
        let (report, _) = verify_lemma8(&field, &opts)?;
        for run in &report.runs {
            println!(
                "q={q:>2} {}: {} orbit reps, {} forms, {} survivors {:?} ({:.1}s)",
                run.shape, run.orbit_count, run.stats.forms, run.survivors, run.histogram, run.stats.elapsed_secs
            );
        }
        println!("q={q:>2} {:?}: {}", report.verdict, report.detail);
    }
    Ok(())
}
