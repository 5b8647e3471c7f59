//! Prints the exp/log tables of a field and runs the exhaustive axiom check.
//!
//!     cargo run -p qvf-core --example field_tables -- 16

use qvf_core::gf::{check_axioms, FieldSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q: u32 = std::env::args().nth(1).map_or(Ok(9), |a| a.parse())?;
    let f = FieldSpec::of_order(q)?;
    println!("{}", f.header());
    println!("generator {} (digits {:?})", f.generator(), f.digits(f.generator()));
    for (i, a) in f.exp_table().iter().take(q as usize - 1).enumerate() {
        println!("g^{i:<2} = {a:>2}  digits {:?}", f.digits(*a));
    }
    let counts = check_axioms(&f)?;
    println!("{counts:?}");
    Ok(())
}
