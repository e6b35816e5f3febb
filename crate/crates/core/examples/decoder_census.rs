//! Every decoder that appears in a valid K=3 binary scheme.

use anoncomm::protocol::SchemeParams;
use anoncomm::search::{forced_decoder_census, SearchOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = forced_decoder_census(SchemeParams::new(3, 2, 1)?, &SearchOptions::default())?;
    println!("{} valid schemes among {} candidates", c.valid_schemes_found, c.space_size);
    println!("y1 y2 y3 | decoders");
    for y in 0..8usize {
        let row: Vec<String> = c.decoders.iter().map(|d| d.table[y].to_string()).collect();
        println!(" {}  {}  {} | {}", y & 1, (y >> 1) & 1, y >> 2, row.join("  "));
    }
    for d in &c.decoders {
        println!("used by {} schemes, latin {}, sum offset {:?}", d.schemes, d.latin, d.sum_offset);
    }
    Ok(())
}
