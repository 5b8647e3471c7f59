//! Runs a ternary sweep in shards, merges the fragments and compares the
//! bytes with an unsharded run.

use std::sync::Arc;

use qvf_core::search::{enumerate_survivors, lemma8_template, Normalization, SearchOptions, Shard, SurvivorDb};
use qvf_core::{FieldSpec, TripleShape};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u32 = std::env::args().nth(1).map_or(Ok(8), |a| a.parse())?;
    let field = Arc::new(FieldSpec::of_order(7)?);
    let t = lemma8_template(TripleShape::Cyclic);
    let mut parts = Vec::new();
    for i in 0..n {
        let opts = SearchOptions { shard: Shard::new(i, n)?, ..Default::default() };
        let (db, stats) = enumerate_survivors(&field, &t, Normalization::Orbit, &opts)?;
        println!("shard {i}/{n}: {} survivors from {} forms", db.len(), stats.forms);
        parts.push(SurvivorDb::parse(&db.to_text())?);
    }
    let merged = SurvivorDb::merge(&parts)?;
    let whole = enumerate_survivors(&field, &t, Normalization::Orbit, &SearchOptions::default())?.0;
    println!("merged {} survivors, identical bytes: {}", merged.len(), merged.to_text() == whole.to_text());
    print!("{}", merged.to_text().lines().take(8).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
