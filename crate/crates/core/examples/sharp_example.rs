//! The quintic over 𝔽_7 whose four zeros are all singular, and what its
//! zeros look like on the lines joining them.

use qvf_core::forms::sharp_f7_example;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f = sharp_f7_example();
    print!("{}", f.to_text());
    let census = f.count_projective_zeros(true);
    println!("zeros={} singular={} nonsingular={}", census.total, census.singular, census.nonsingular);
    let zeros = census.witnesses.unwrap_or_default();
    for z in &zeros {
        let grad: Vec<String> = (0..3)
            .map(|i| f.partial_derivative(i).and_then(|d| d.evaluate(z.coords())).map(|v| v.to_string()))
            .collect::<Result<_, _>>()?;
        println!("{z}: gradient ({})", grad.join(","));
    }
    for (i, a) in zeros.iter().enumerate() {
        for b in &zeros[i + 1..] {
            let v = f.lemma5_shape_check(a, b)?;
            println!("line {a} {b}: c12={} c21={} shape ok={}", v.c12, v.c21, v.passes());
        }
    }
    println!("non-singular zero: {:?}", f.find_nonsingular_zero());
    Ok(())
}
