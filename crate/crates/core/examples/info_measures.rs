//! Exact entropy and mutual information on enumerated distributions.

use anoncomm::field::Prime;
use anoncomm::info::{self, SampleSpace};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = Prime::new(3)?;
    // (a, b) uniform over F_3^2; observe a, b and a + b.
    let space = SampleSpace::new(p, 2, vec![3, 3, 3]);
    let table = info::enumerate(&space, |s, out| {
        let (a, b) = (s % 3, s / 3);
        out[0] = a;
        out[1] = b;
        out[2] = (a + b) % 3;
    })?;

    println!("H(a, b, a+b)  = {}", info::entropy(&table, p)?);
    println!("I(a; a+b)     = {}", info::mutual_information(&table, &[0], &[2], p)?);
    println!("I(a, b; a+b)  = {}", info::mutual_information(&table, &[0, 1], &[2], p)?);
    println!("H(b | a, a+b) = {}", info::conditional_entropy(&table, &[1], &[0, 2], p)?);
    Ok(())
}
