//! Command-line front end: `demo`, `verify`, `search` and `metrics`.
//!
//! Every command produces one [`Outcome`] holding an exit code, a JSON
//! report and a human rendering of the same report.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::field::SUPPORTED_PRIMES;
use crate::info::{self, InfoError};
use crate::protocol::{self, BuiltinScheme, ProtocolError, SchemeParams};
use crate::scheme::Scheme;
use crate::search::{self, Family, SchemeDescription, SchemeError, SearchError, SearchOptions, SearchResult};
use crate::sim::{self, transport::Transport, SimConfig, SimError};
use crate::verify::{self, CheckName, CheckReport, Verdict, VerifyError, VerifyOptions, MAX_TRANSMITTERS};

/// Version of the report layout in `docs/report.schema.json`.
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitCode {
    Pass = 0,
    CheckFailure = 1,
    Usage = 2,
    ResourceRefusal = 3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Human,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "anoncomm", version, about = "Anonymous communication over parallel links with coded shared randomness")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "human", global = true)]
    pub format: Format,
    /// Cap on enumerated states or search candidates.
    #[arg(long, default_value_t = info::DEFAULT_MAX_STATES, global = true)]
    pub max_states: u64,
    /// Worker threads for parallel enumeration.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ParamArgs {
    /// Number of transmitters.
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Field size (prime).
    #[arg(long, default_value_t = 2)]
    pub p: u32,
    /// Message symbols per round.
    #[arg(long, default_value_t = 1)]
    pub l: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run rounds of the protocol between simulated actors.
    Demo {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 10)]
        rounds: u32,
        #[arg(long, env = "ANONCOMM_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "in-process")]
        transport: Transport,
        /// Record the desired index in round logs.
        #[arg(long)]
        audit: bool,
        /// Write round logs as JSON lines.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Check properties of the built-in scheme or a scheme file.
    Verify {
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated check names, or `all`.
        #[arg(long, default_value = "all")]
        checks: String,
        /// Scheme description file; overrides K, p and L.
        #[arg(long)]
        scheme: Option<PathBuf>,
    },
    /// Enumerate a scheme family for valid schemes.
    Search {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value = "linear")]
        model: ModelArg,
        /// Channel uses per transmitter; defaults to L.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated seed dimensions; default searches upward for the
        /// smallest one.
        #[arg(long, value_delimiter = ',')]
        seed_dims: Option<Vec<usize>>,
        /// Stop each search at the first valid scheme.
        #[arg(long)]
        first: bool,
        /// Append completed candidate ranges to this file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Rate and randomness sizes of the built-in scheme.
    Metrics {
        #[command(flatten)]
        params: ParamArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    General,
    Linear,
    Hybrid,
}

impl ModelArg {
    fn family(self) -> Family {
        match self {
            ModelArg::General => Family::General,
            ModelArg::Linear => Family::Linear,
            ModelArg::Hybrid => Family::Hybrid,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: ExitCode,
    pub report: Value,
    pub human: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Human => self.human.clone(),
            Format::Json => serde_json::to_string_pretty(&self.report).expect("report serializes") + "\n",
        }
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Resource { message: String, required: Option<String>, cap: Option<u64> },
}

impl From<ProtocolError> for Failure {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::Info(i) => i.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<InfoError> for Failure {
    fn from(e: InfoError) -> Self {
        let message = e.to_string();
        match e {
            InfoError::StateSpaceTooLarge { required, cap } => Failure::Resource {
                message,
                required: Some(required.to_string()),
                cap: Some(cap),
            },
            InfoError::KeySpaceOverflow => Failure::Resource {
                message,
                required: None,
                cap: None,
            },
            _ => Failure::Usage(message),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Self {
        let message = e.to_string();
        match e {
            VerifyError::StateSpace { required, cap } => Failure::Resource {
                message,
                required: Some(required.to_string()),
                cap: Some(cap),
            },
            VerifyError::Info(i) => i.into(),
            VerifyError::Precondition(_) => Failure::Usage(message),
        }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        let message = e.to_string();
        match e {
            SearchError::TooLarge { required, cap } => Failure::Resource {
                message,
                required: Some(required.to_string()),
                cap: Some(cap),
            },
            SearchError::Refused(_) => Failure::Resource {
                message,
                required: None,
                cap: None,
            },
            SearchError::Scheme(_) | SearchError::Io(_) => Failure::Usage(message),
        }
    }
}

impl From<SchemeError> for Failure {
    fn from(e: SchemeError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Protocol(p) => p.into(),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn failure_outcome(command: &str, f: Failure) -> Outcome {
    let (code, kind, message, required, cap) = match f {
        Failure::Usage(m) => (ExitCode::Usage, "usage", m, None, None),
        Failure::Resource { message, required, cap } => (ExitCode::ResourceRefusal, "resource", message, required, cap),
    };
    let mut human = format!("error: {message}\n");
    if let Some(r) = &required {
        let _ = writeln!(human, "required states: {r}");
    }
    let report = json!({
        "report_version": REPORT_VERSION,
        "command": command,
        "exit_code": code as i32,
        "error": { "kind": kind, "message": message, "required": required, "cap": cap },
    });
    Outcome { code, report, human }
}

fn envelope(command: &str, code: ExitCode, body: Value) -> Value {
    let mut v = json!({
        "report_version": REPORT_VERSION,
        "command": command,
        "exit_code": code as i32,
    });
    if let (Value::Object(m), Value::Object(b)) = (&mut v, body) {
        m.extend(b);
    }
    v
}

fn params_of(a: ParamArgs, n: Option<usize>) -> Result<SchemeParams, Failure> {
    if !(2..=MAX_TRANSMITTERS).contains(&a.k) {
        return Err(Failure::Usage(format!("K = {} but 2 <= K <= {MAX_TRANSMITTERS} is required", a.k)));
    }
    if !SUPPORTED_PRIMES.contains(&a.p) {
        return Err(Failure::Usage(format!("p = {} is not one of {SUPPORTED_PRIMES:?}", a.p)));
    }
    Ok(SchemeParams::with_channel_uses(a.k, a.p, a.l, n.unwrap_or(a.l))?)
}

/// Runs one parsed command.
pub fn run(cli: &Cli) -> Outcome {
    let name = match &cli.command {
        Command::Demo { .. } => "demo",
        Command::Verify { .. } => "verify",
        Command::Search { .. } => "search",
        Command::Metrics { .. } => "metrics",
    };
    let result = match &cli.command {
        Command::Demo {
            params,
            rounds,
            seed,
            transport,
            audit,
            log,
        } => cmd_demo(*params, *rounds, *seed, *transport, *audit, log.as_ref()),
        Command::Verify { params, checks, scheme } => cmd_verify(cli, *params, checks, scheme.as_ref()),
        Command::Search {
            params,
            model,
            n,
            seed_dims,
            first,
            checkpoint,
        } => cmd_search(cli, *params, *model, *n, seed_dims.as_deref(), *first, checkpoint.clone()),
        Command::Metrics { params } => cmd_metrics(cli, *params),
    };
    result.unwrap_or_else(|f| failure_outcome(name, f))
}

/// Parses `args` (including the program name), runs, prints and returns the
/// process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::Usage as i32 } else { 0 };
        }
    };
    let out = run(&cli);
    let text = out.render(cli.format);
    if out.code == ExitCode::Usage && cli.format == Format::Human {
        eprint!("{text}");
    } else {
        print!("{text}");
    }
    out.code as i32
}

fn verdict_word(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Skipped => "SKIP",
    }
}

fn cmd_demo(
    args: ParamArgs,
    rounds: u32,
    seed: u64,
    transport: Transport,
    audit: bool,
    log: Option<&PathBuf>,
) -> Result<Outcome, Failure> {
    let params = params_of(args, None)?;
    if rounds == 0 {
        return Err(Failure::Usage("rounds must be at least 1".into()));
    }
    let cfg = SimConfig {
        audit,
        ..SimConfig::new(params, rounds, transport, seed)
    };
    let report = sim::run_simulation(&cfg)?;
    if let Some(path) = log {
        let file = std::fs::File::create(path).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
        sim::write_round_logs(&report.logs, std::io::BufWriter::new(file))
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    }
    let screen = if audit {
        None
    } else {
        sim::receiver_view_dump(&report.logs)
            .ok()
            .and_then(|v| sim::chi_square_uniform(&v, &params).ok())
    };
    let code = if report.all_correct() && report.violations.is_empty() {
        ExitCode::Pass
    } else {
        ExitCode::CheckFailure
    };

    let mut human = String::new();
    let _ = writeln!(human, "demo {params}, {rounds} rounds, {transport:?} transport, seed {seed}");
    for l in &report.logs {
        let ys: Vec<String> = l.transcript.iter().map(|y| format!("{y:?}")).collect();
        let theta = l.theta.map(|t| format!(" theta={t}")).unwrap_or_default();
        match &l.decoded {
            Some(w) => {
                let _ = writeln!(human, "round {}{theta}: Y=({}) -> {w:?}", l.round_id, ys.join(","));
            }
            None => {
                let _ = writeln!(
                    human,
                    "round {}{theta}: FAILED ({})",
                    l.round_id,
                    l.failure.as_deref().unwrap_or("unknown")
                );
            }
        }
    }
    let _ = writeln!(
        human,
        "correct {}/{rounds}, failed {}, audit violations {}",
        report.correct,
        report.failed,
        report.violations.len()
    );
    for v in &report.violations {
        let _ = writeln!(human, "violation round {}: {}", v.round_id, v.reason);
    }
    if let Some(s) = &screen {
        let _ = writeln!(
            human,
            "chi-square screen: {:.3} on {} dof (threshold {:.3}) {}",
            s.statistic,
            s.degrees_of_freedom,
            s.threshold,
            if s.pass { "PASS" } else { "FAIL" }
        );
    }

    let body = json!({
        "params": params,
        "rounds": rounds,
        "seed": seed,
        "transport": transport,
        "correct": report.correct,
        "completed": report.completed,
        "failed": report.failed,
        "violations": report.violations,
        "actor_errors": report.actor_errors,
        "chi_square": screen,
        "logs": report.logs,
    });
    Ok(Outcome {
        code,
        report: envelope("demo", code, body),
        human,
    })
}

fn parse_checks(s: &str) -> Result<Vec<CheckName>, Failure> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(CheckName::ALL.to_vec());
    }
    let mut out = Vec::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let c: CheckName = part.parse().map_err(Failure::Usage)?;
        if !out.contains(&c) {
            out.push(c);
        }
    }
    if out.is_empty() {
        return Err(Failure::Usage("no checks selected".into()));
    }
    Ok(out)
}

fn cmd_verify(cli: &Cli, args: ParamArgs, checks: &str, scheme_path: Option<&PathBuf>) -> Result<Outcome, Failure> {
    let checks = parse_checks(checks)?;
    let boxed: Box<dyn Scheme> = match scheme_path {
        Some(path) => Box::new(SchemeDescription::load(path)?.compile()?),
        None => Box::new(BuiltinScheme::new(params_of(args, None)?)?),
    };
    let scheme = boxed.as_ref();
    let opts = VerifyOptions {
        max_states: cli.max_states,
    };
    let reports = with_workers(cli.workers, || verify::run_checks(scheme, &checks, &opts))?;
    let metrics = protocol::scheme_metrics(scheme, cli.max_states)?;
    let passed = reports.iter().all(|r| r.verdict != Verdict::Fail);
    let code = if passed { ExitCode::Pass } else { ExitCode::CheckFailure };

    let params = scheme.params();
    let mut human = String::new();
    let _ = writeln!(human, "verify {} {params}", scheme.label());
    for r in &reports {
        let _ = writeln!(human, "{} {}{}", verdict_word(r.verdict), r.check_name, detail_suffix(r));
        if let Some(w) = &r.witness {
            let _ = writeln!(human, "  witness: {}", serde_json::to_string(w).expect("witness serializes"));
        }
    }
    let _ = writeln!(
        human,
        "rate {} rho {} eta {} (p-ary units)",
        info::ratio_string(metrics.rate),
        metrics.rho,
        metrics.eta
    );
    let _ = writeln!(human, "{}", if passed { "all checks passed" } else { "some checks failed" });

    let body = json!({
        "scheme": scheme.label(),
        "params": params,
        "passed": passed,
        "checks": reports,
        "metrics": metrics,
    });
    Ok(Outcome {
        code,
        report: envelope("verify", code, body),
        human,
    })
}

fn detail_suffix(r: &CheckReport) -> String {
    match &r.detail {
        Some(d) => format!(" ({d})"),
        None => String::new(),
    }
}

fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    match workers.and_then(|n| rayon::ThreadPoolBuilder::new().num_threads(n).build().ok()) {
        Some(pool) => pool.install(f),
        None => f(),
    }
}

fn cmd_search(
    cli: &Cli,
    args: ParamArgs,
    model: ModelArg,
    n: Option<usize>,
    seed_dims: Option<&[usize]>,
    first: bool,
    checkpoint: Option<PathBuf>,
) -> Result<Outcome, Failure> {
    let params = params_of(args, n)?;
    let family = model.family();
    let opts = SearchOptions {
        stop_at_first: first,
        collect_limit: if first { 1 } else { SearchOptions::default().collect_limit },
        max_states: cli.max_states,
        checkpoint,
        workers: cli.workers,
    };
    let (results, min_dim) = match seed_dims {
        Some(dims) => {
            let mut dims = dims.to_vec();
            dims.sort_unstable();
            dims.dedup();
            let results = dims
                .iter()
                .map(|&s| search::search(family, params, s, &opts))
                .collect::<Result<Vec<SearchResult>, _>>()?;
            let min = results.iter().find(|r| r.valid_schemes_found > 0).map(|r| r.seed_dim);
            (results, min)
        }
        None => {
            let r = search::min_seed_dimension(family, params, &opts)?;
            (r.searches, r.dimension)
        }
    };

    let mut human = String::new();
    let _ = writeln!(human, "search {} {params}", family.name());
    for r in &results {
        let _ = write!(
            human,
            "s={}: {} valid of {} candidates ({} correct){}",
            r.seed_dim,
            r.valid_schemes_found,
            r.space_size,
            r.correct_candidates,
            if r.stopped_early { ", stopped at first" } else { "" }
        );
        if let (Some(lo), Some(hi)) = (r.min_rho, r.max_rho) {
            let _ = write!(human, "; rho {lo}..{hi}");
        }
        if let (Some(lo), Some(hi)) = (r.min_eta, r.max_eta) {
            let _ = write!(human, "; eta {lo}..{hi}");
        }
        human.push('\n');
    }
    match min_dim {
        Some(s) => {
            let _ = writeln!(human, "min seed dimension: {s}");
        }
        None => {
            let _ = writeln!(human, "min seed dimension: none in searched range");
        }
    }

    let body = json!({
        "family": family,
        "params": params,
        "results": results,
        "min_seed_dimension": min_dim,
    });
    Ok(Outcome {
        code: ExitCode::Pass,
        report: envelope("search", ExitCode::Pass, body),
        human,
    })
}

fn cmd_metrics(cli: &Cli, args: ParamArgs) -> Result<Outcome, Failure> {
    let params = params_of(args, None)?;
    let m = protocol::scheme_metrics(&BuiltinScheme::new(params)?, cli.max_states)?;
    let human = format!(
        "metrics {params}\nrate {}\nrho {} p-ary units\neta {} p-ary units\n",
        info::ratio_string(m.rate),
        m.rho,
        m.eta
    );
    let body = json!({ "params": params, "metrics": m });
    Ok(Outcome {
        code: ExitCode::Pass,
        report: envelope("metrics", ExitCode::Pass, body),
        human,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Outcome {
        let cli = Cli::try_parse_from(std::iter::once("anoncomm").chain(args.iter().copied())).unwrap();
        run(&cli)
    }

    #[test]
    fn guards_are_usage_errors() {
        assert_eq!(run_args(&["demo", "--k", "1"]).code, ExitCode::Usage);
        assert_eq!(run_args(&["demo", "--k", "3", "--rounds", "0"]).code, ExitCode::Usage);
        assert_eq!(run_args(&["metrics", "--p", "4"]).code, ExitCode::Usage);
        assert_eq!(run_args(&["verify", "--checks", "nope"]).code, ExitCode::Usage);
        assert!(Cli::try_parse_from(["anoncomm", "frobnicate"]).is_err());
    }

    #[test]
    fn metrics_report() {
        let out = run_args(&["metrics", "--k", "2", "--p", "3"]);
        assert_eq!(out.code, ExitCode::Pass);
        let m = &out.report["metrics"];
        assert_eq!(m["rate"]["value"], "1/2");
        assert_eq!(m["rho"]["exact"], "1/1");
        assert_eq!(m["eta"]["exact"], "1/1");
    }

    #[test]
    fn demo_counts() {
        let out = run_args(&["demo", "--k", "3", "--p", "2", "--rounds", "10", "--seed", "42"]);
        assert_eq!(out.code, ExitCode::Pass);
        assert_eq!(out.report["correct"], 10);
        assert!(out.human.contains("correct 10/10"));
    }

    #[test]
    fn checks_list_parsing() {
        let c = parse_checks("correctness, latin,correctness").unwrap();
        assert_eq!(c, vec![CheckName::Correctness, CheckName::DecoderLatinStructure]);
        assert_eq!(parse_checks("ALL").unwrap().len(), 7);
        assert!(parse_checks(",").is_err());
    }
}
