//! Lifts the zero (1, 10, 0) of x1⁵ + x2⁵ + 9x3⁵ mod 11 to higher precision.

use num_bigint::BigInt;
use qvf_core::lift::{hensel_lift, reduce_mod_p, IntegerForm};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k: u32 = std::env::args().nth(1).map_or(Ok(8), |a| a.parse())?;
    let f = IntegerForm::from_terms(3, 5, [(&[5u8, 0, 0][..], 1), (&[0, 5, 0][..], 1), (&[0, 0, 5][..], 9)])?;
    println!("F = {f}");
    println!("F mod 11:\n{}", reduce_mod_p(&f, 11)?.to_text());
    let x0 = [1, 10, 0];
    let start: Vec<BigInt> = x0.iter().map(|&v| BigInt::from(v)).collect();
    println!("F(x0) = {}", f.evaluate(&start)?);
    let lifted = hensel_lift(&f, 11, &x0, k)?;
    for s in &lifted.steps {
        println!("mod 11^{:<2} x{} = {:<24} v_11(F) = {:?}", s.precision, lifted.pivot + 1, s.coordinate, s.valuation);
    }
    let value = f.evaluate(&lifted.coords)?;
    println!("F(x) = {value}");
    println!("F(x) mod 11^{k} = {}", value % lifted.modulus());
    Ok(())
}
