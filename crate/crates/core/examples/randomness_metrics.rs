//! Rate and randomness sizes of the built-in scheme, from the dealt share
//! distribution.

use anoncomm::info::ratio_string;
use anoncomm::protocol::{self, SchemeParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>2} {:>2} {:>6} {:>12} {:>12}", "K", "p", "rate", "rho", "eta");
    for k in 2..=6 {
        for p in [2, 3, 5] {
            let m = protocol::metrics(&SchemeParams::new(k, p, 1)?)?;
            println!("{k:>2} {p:>2} {:>6} {:>12} {:>12}", ratio_string(m.rate), m.rho.to_string(), m.eta.to_string());
        }
    }
    Ok(())
}
