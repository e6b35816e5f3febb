//! Runs every property check on the built-in scheme.

use anoncomm::protocol::{BuiltinScheme, SchemeParams};
use anoncomm::verify::{self, CheckName, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scheme = BuiltinScheme::new(SchemeParams::new(4, 3, 1)?)?;
    for r in verify::run_checks(&scheme, &CheckName::ALL, &VerifyOptions::default())? {
        println!(
            "{:<24} {:?} over {} states{}",
            r.check_name.to_string(),
            r.verdict,
            r.stats.states,
            r.detail.map(|d| format!(" ({d})")).unwrap_or_default()
        );
    }
    Ok(())
}
