//! Exhaustive searches behind the lower bounds: no scheme without shared
//! randomness, K-1 seed symbols for linear schemes, coded shares required,
//! and no scheme with fewer channel uses than message symbols.

use anoncomm::protocol::SchemeParams;
use anoncomm::search::{self, Family, SearchOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let opts = SearchOptions::default();

    let k2 = SchemeParams::new(2, 2, 1)?;
    for s in 0..=1 {
        let r = search::search(Family::General, k2, s, &opts)?;
        println!(
            "general K=2 s={s}: {} valid of {} ({} ms)",
            r.valid_schemes_found, r.space_size, r.elapsed_ms as u64
        );
    }

    let k3 = SchemeParams::new(3, 2, 1)?;
    let min = search::min_seed_dimension(Family::Linear, k3, &opts)?;
    println!("linear K=3 minimum seed dimension: {:?}", min.dimension);

    let coded = search::check_coded_randomness_necessity(k3, &opts)?;
    println!(
        "coded shares: {} valid, uncoded shares: {} valid, necessary: {}",
        coded.coded_valid, coded.uncoded_valid, coded.necessary
    );

    let narrow = SchemeParams::with_channel_uses(3, 2, 2, 1)?;
    let r = search::check_rate_infeasible(narrow)?;
    println!(
        "L=2, N=1: {} of {} encoder/decoder pairs reach full rank",
        r.full_rank_pairs, r.pairs_checked
    );
    Ok(())
}
