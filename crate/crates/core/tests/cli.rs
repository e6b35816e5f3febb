use std::path::PathBuf;
use std::process::Command;

use anoncomm::cli::{self, Cli, ExitCode, Format, Outcome};
use clap::Parser;
use serde_json::Value;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn run(args: &[&str]) -> Outcome {
    let cli = Cli::try_parse_from(std::iter::once("anoncomm").chain(args.iter().copied())).unwrap();
    cli::run(&cli)
}

fn validator() -> jsonschema::Validator {
    let text = std::fs::read_to_string(repo_root().join("docs/report.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, report: &Value) {
    let errors: Vec<String> = v.iter_errors(report).map(|e| format!("{} at {}", e, e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}\n{report:#}");
}

fn fixture(name: &str) -> String {
    repo_root().join("fixtures").join(name).display().to_string()
}

#[test]
fn reports_match_published_schema() {
    let v = validator();
    let naive = fixture("naive.scheme");
    let leaky = fixture("leaky.scheme");
    let drop = fixture("drop-last.scheme");
    let cases: Vec<Vec<&str>> = vec![
        vec!["metrics", "--k", "4"],
        vec!["verify", "--k", "3"],
        vec!["verify", "--scheme", &naive],
        vec!["verify", "--scheme", &leaky],
        vec!["verify", "--scheme", &drop],
        vec!["verify", "--k", "5", "--p", "5", "--l", "3"],
        vec!["search", "--model", "general", "--k", "2", "--seed-dims", "0,1"],
        vec!["search", "--model", "linear", "--k", "3"],
        vec!["search", "--model", "general", "--k", "3"],
        vec!["demo", "--rounds", "5", "--audit"],
        vec!["demo", "--rounds", "5", "--transport", "stream"],
        vec!["demo", "--k", "1"],
    ];
    for args in cases {
        let out = run(&args);
        assert_valid(&v, &out.report);
        assert_eq!(out.report["exit_code"], out.code as i32, "{args:?}");
    }
}

#[test]
fn schema_rejects_malformed_reports() {
    let v = validator();
    let mut r = run(&["metrics"]).report;
    r["metrics"]["rho"]["units"] = "bits".into();
    assert!(!v.is_valid(&r));
    let mut r = run(&["verify"]).report;
    r["checks"][0]["verdict"] = "maybe".into();
    assert!(!v.is_valid(&r));
}

fn human_verdicts(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| {
            let (word, rest) = l.split_once(' ')?;
            let verdict = match word {
                "PASS" => "pass",
                "FAIL" => "fail",
                "SKIP" => "skipped",
                _ => return None,
            };
            Some((rest.split(' ').next()?.to_string(), verdict.to_string()))
        })
        .collect()
}

fn json_verdicts(report: &Value) -> Vec<(String, String)> {
    report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| (c["check_name"].as_str().unwrap().to_string(), c["verdict"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn human_and_json_verdicts_agree() {
    let mut schemes: Vec<String> = std::fs::read_dir(repo_root().join("fixtures"))
        .unwrap()
        .map(|e| e.unwrap().path().display().to_string())
        .collect();
    schemes.sort();
    assert_eq!(schemes.len(), 7);
    for s in &schemes {
        let out = run(&["verify", "--scheme", s]);
        assert_eq!(out.code, ExitCode::CheckFailure, "{s}");
        let h = human_verdicts(&out.render(Format::Human));
        assert_eq!(h, json_verdicts(&out.report), "{s}");
        assert!(h.iter().any(|(_, v)| v == "fail"));
    }
    let out = run(&["verify", "--k", "4", "--p", "3"]);
    assert_eq!(out.code, ExitCode::Pass);
    assert_eq!(human_verdicts(&out.human), json_verdicts(&out.report));
}

#[test]
fn verify_json_carries_randomness_sizes() {
    let out = run(&["verify", "--k", "3", "--p", "2", "--l", "1", "--checks", "all", "--format", "json"]);
    assert_eq!(out.code, ExitCode::Pass);
    assert_eq!(out.report["metrics"]["rho"]["value"], 1.0);
    assert_eq!(out.report["metrics"]["eta"]["value"], 2.0);
    assert_eq!(out.report["passed"], true);
}

#[test]
fn naive_fixture_fails_with_anonymity_witness() {
    let out = run(&["verify", "--scheme", &fixture("naive.scheme")]);
    assert_eq!(out.code, ExitCode::CheckFailure);
    let anon = out.report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["check_name"] == "anonymity")
        .unwrap();
    assert_eq!(anon["verdict"], "fail");
    assert_eq!(anon["witness"]["kind"], "distribution");
}

#[test]
fn search_examples() {
    let out = run(&["search", "--model", "linear", "--k", "3", "--p", "2", "--seed-dims", "1,2"]);
    let rs = out.report["results"].as_array().unwrap();
    assert_eq!(rs[0]["valid_schemes_found"], 0);
    assert!(rs[1]["valid_schemes_found"].as_u64().unwrap() >= 1);
    assert_eq!(out.report["min_seed_dimension"], 2);

    let out = run(&["search", "--model", "general", "--k", "2", "--p", "2", "--seed-dims", "0,1"]);
    let rs = out.report["results"].as_array().unwrap();
    assert_eq!(rs[0]["valid_schemes_found"], 0);
    assert!(rs[1]["valid_schemes_found"].as_u64().unwrap() >= 1);

    assert_eq!(run(&["search", "--model", "general", "--k", "3"]).code, ExitCode::ResourceRefusal);
    let out = run(&["search", "--model", "general", "--k", "2", "--seed-dims", "2", "--max-states", "1000"]);
    assert_eq!(out.code, ExitCode::ResourceRefusal);
    assert_eq!(out.report["error"]["required"], "268435456");
}

#[test]
fn binary_exit_codes_and_seed_variable() {
    let bin = env!("CARGO_BIN_EXE_anoncomm");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["metrics"]), Some(0));
    assert_eq!(code(&["verify", "--scheme", &fixture("naive.scheme")]), Some(1));
    assert_eq!(code(&["demo", "--k", "1"]), Some(2));
    assert_eq!(code(&["nonsense"]), Some(2));
    assert_eq!(code(&["verify", "--k", "5", "--p", "5", "--l", "3"]), Some(3));

    let demo = |env: Option<&str>, args: &[&str]| {
        let mut c = Command::new(bin);
        c.args(["demo", "--rounds", "20", "--format", "json"]).args(args);
        match env {
            Some(s) => c.env("ANONCOMM_SEED", s),
            None => c.env_remove("ANONCOMM_SEED"),
        };
        let out = c.output().unwrap();
        let v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v["logs"].clone()
    };
    assert_eq!(demo(Some("77"), &[]), demo(None, &["--seed", "77"]));
    assert_ne!(demo(Some("77"), &[]), demo(Some("78"), &[]));
}

#[test]
fn demo_writes_round_logs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rounds.jsonl");
    let out = run(&["demo", "--rounds", "12", "--log", path.to_str().unwrap()]);
    assert_eq!(out.code, ExitCode::Pass);
    let logs = anoncomm::sim::read_round_logs(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(logs.len(), 12);
    assert!(logs.iter().all(|l| l.theta.is_none()));
}
