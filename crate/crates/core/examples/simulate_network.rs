//! Dealer, transmitters and receiver as separate actors over localhost TCP,
//! with the traffic audit and a receiver-side uniformity screen.

use anoncomm::protocol::SchemeParams;
use anoncomm::sim::{self, transport::Transport, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SchemeParams::new(3, 2, 1)?;
    let report = sim::run_simulation(&SimConfig::new(params, 2000, Transport::Stream, 7))?;
    println!(
        "{} rounds: {} correct, {} failed, {} audit violations",
        report.logs.len(),
        report.correct,
        report.failed,
        report.violations.len()
    );

    let views = sim::receiver_view_dump(&report.logs)?;
    let chi = sim::chi_square_uniform(&views, &params)?;
    println!(
        "chi-square {:.2} on {} dof, threshold {:.2}: {}",
        chi.statistic,
        chi.degrees_of_freedom,
        chi.threshold,
        if chi.pass { "uniform" } else { "not uniform" }
    );
    print!("{}", sim::round_logs_jsonl(&report.logs[..3]));

    let mut faulty = SimConfig::new(params, 5, Transport::InProcess, 7);
    faulty.shutdown_in_round = Some(4);
    let r = sim::run_simulation(&faulty)?;
    let last = r.logs.last().expect("rounds ran");
    println!("shutdown in round 4: {:?}, {}", last.status, last.failure.as_deref().unwrap_or(""));
    Ok(())
}
