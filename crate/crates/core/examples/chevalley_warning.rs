//! Zero counts of random forms with more variables than their degree,
//! against the bound (q^(n-d) - 1)/(q - 1).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qvf_core::{Fe, FieldSpec, Form, Monomial};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (q, n, d) in [(2u32, 3usize, 2u32), (3, 4, 3), (5, 4, 2), (7, 3, 2), (4, 5, 3)] {
        let field = Arc::new(FieldSpec::of_order(q)?);
        let bound = (q.pow(n as u32 - d) - 1) / (q - 1);
        let mut least = u64::MAX;
        for _ in 0..50 {
            let mut f = Form::zero(field.clone(), n, d)?;
            for _ in 0..6 {
                let mut e = vec![0u8; n];
                for _ in 0..d {
                    e[rng.gen_range(0..n)] += 1;
                }
                f.add_term(Monomial::new(&e), Fe(rng.gen_range(1..q) as u16))?;
            }
            least = least.min(f.count_projective_zeros(false).total);
        }
        println!("q={q} n={n} d={d}: bound {bound}, fewest zeros over 50 forms {least}");
    }
    Ok(())
}
