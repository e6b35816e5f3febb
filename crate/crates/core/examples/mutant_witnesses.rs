//! Broken schemes from the fixture catalog and the counterexamples the
//! verifier reports for them.

use anoncomm::verify::{self, fixtures, CheckName, Verdict, VerifyOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = fixtures::default_params();
    for f in fixtures::CATALOG {
        println!("{}: {}", f.name, f.summary);
        let scheme = f.describe(params).compile()?;
        for r in verify::run_checks(&scheme, &CheckName::ALL, &VerifyOptions::default())? {
            if r.verdict == Verdict::Fail {
                println!("  FAIL {:<24} {}", r.check_name.to_string(), serde_json::to_string(&r.witness)?);
            }
        }
    }
    Ok(())
}
