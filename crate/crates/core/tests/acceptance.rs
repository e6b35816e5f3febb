//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Arguments not starting with `-` select
//! criteria by number.

use std::time::{Duration, Instant};

use anoncomm::cli::{self, Cli, ExitCode};
use anoncomm::info::{self, EntropyValue, InfoError, SampleSpace};
use anoncomm::protocol::{self, BuiltinScheme, SchemeParams};
use anoncomm::scheme::Scheme;
use anoncomm::search::{
    self, check_coded_randomness_necessity, check_rate_infeasible, converse, forced_decoder_census, min_seed_dimension,
    Family, SearchError, SearchOptions,
};
use anoncomm::sim::{self, transport::Transport, SimConfig};
use anoncomm::verify::{self, VerifyError, VerifyOptions};
use clap::Parser;
use num_rational::Ratio;

/// Absolute tolerance on floating entropies against their analytic values.
const ENTROPY_TOL: f64 = 1e-9;

type Verdict = Result<String, String>;

fn params(k: usize, p: u32, l: usize) -> SchemeParams {
    SchemeParams::new(k, p, l).unwrap()
}

fn close(v: &EntropyValue, target: u64) -> bool {
    v.is_exactly(Ratio::from_integer(target)) && (v.value - target as f64).abs() <= ENTROPY_TOL
}

/// `K <= 5`, `p in {2, 3}`, `L <= 2`.
fn grid() -> Vec<SchemeParams> {
    let mut out = Vec::new();
    for k in 2..=5 {
        for p in [2, 3] {
            for l in [1, 2] {
                out.push(params(k, p, l));
            }
        }
    }
    out
}

/// Runs `check` on every grid point; points over the state cap are listed
/// as skipped.
fn over_grid(
    points: &[SchemeParams],
    mut check: impl FnMut(&BuiltinScheme) -> Result<Option<String>, VerifyError>,
) -> Verdict {
    let mut ran = 0;
    let mut skipped = Vec::new();
    for &pr in points {
        let s = BuiltinScheme::new(pr).unwrap();
        match check(&s) {
            Ok(None) => ran += 1,
            Ok(Some(why)) => return Err(format!("{pr}: {why}")),
            Err(VerifyError::StateSpace { required, .. }) => skipped.push(format!("{pr} ({required} states)")),
            Err(e) => return Err(format!("{pr}: {e}")),
        }
    }
    let mut msg = format!("{ran} parameter sets exact");
    if !skipped.is_empty() {
        msg += &format!(", over cap: {}", skipped.join("; "));
    }
    Ok(msg)
}

fn cli_report(args: &[&str]) -> (ExitCode, serde_json::Value) {
    let cli = Cli::try_parse_from(std::iter::once("anoncomm").chain(args.iter().copied())).unwrap();
    let out = cli::run(&cli);
    (out.code, out.report)
}

fn rate_capacity() -> Verdict {
    for k in 2..=6usize {
        for l in [1, 2] {
            let ks = k.to_string();
            let ls = l.to_string();
            let (code, r) = cli_report(&["metrics", "--k", &ks, "--l", &ls]);
            let want = format!("1/{k}");
            if code != ExitCode::Pass || r["metrics"]["rate"]["value"] != want.as_str() {
                return Err(format!("K={k} L={l}: rate {} (want {want})", r["metrics"]["rate"]["value"]));
            }
            if params(k, 2, l).rate() != Ratio::new(1, k as u64) {
                return Err(format!("K={k} L={l}: rational rate mismatch"));
            }
        }
    }
    Ok("R = 1/K exactly for K = 2..6, L = N in {1, 2}".into())
}

fn randomness_sizes() -> Verdict {
    for k in 2..=6 {
        for p in [2, 3, 5] {
            let m = protocol::metrics(&params(k, p, 1)).map_err(|e| e.to_string())?;
            if !close(&m.rho, 1) || !close(&m.eta, k as u64 - 1) {
                return Err(format!("K={k} p={p}: rho {} eta {}", m.rho, m.eta));
            }
        }
    }
    Ok(format!("rho = 1, eta = K-1 exact (tol {ENTROPY_TOL:e}) for K = 2..6, p in {{2, 3, 5}}"))
}

fn anonymity() -> Verdict {
    let opts = VerifyOptions::default();
    over_grid(&grid(), |s| {
        for check in [verify::check_anonymity, verify::check_transcript_uniform] {
            let r = check(s, &opts)?;
            if !r.passed() {
                return Ok(Some(format!("{} failed: {:?}", r.check_name, r.witness)));
            }
        }
        Ok(None)
    })
}

fn correctness() -> Verdict {
    let opts = VerifyOptions::default();
    over_grid(&grid(), |s| {
        let r = verify::check_correctness(s, &opts)?;
        Ok((!r.passed()).then(|| format!("decoding failure: {:?}", r.witness)))
    })
}

/// `I(Y; W_others)` for one desired index, straight from the joint table.
fn transcript_vs_others(s: &dyn Scheme, theta0: usize) -> Result<(bool, EntropyValue), InfoError> {
    let pr = s.params();
    let p = pr.modulus;
    let pu = p.get() as u64;
    let (k, l, n) = (pr.transmitters, pr.message_len, pr.channel_uses);
    let seed_radix = pu.pow(s.seed_dim() as u32);
    let msg_radix = pu.pow(l as u32);
    let sig_radix = pu.pow(n as u32);
    let space = SampleSpace::new(p, s.seed_dim() + k * l, vec![sig_radix.pow(k as u32), msg_radix.pow(k as u32 - 1)]);
    let table = info::enumerate(&space, |state, out| {
        let mut shares = [0u64; 16];
        s.deal_packed(state % seed_radix, &mut shares[..k]);
        let mut rest = state / seed_radix;
        let (mut y, mut ys) = (0u64, 1u64);
        let (mut others, mut os) = (0u64, 1u64);
        for (i, &z) in shares[..k].iter().enumerate() {
            let w = rest % msg_radix;
            rest /= msg_radix;
            y += ys * s.encode_packed(i, i == theta0, w, z);
            ys *= sig_radix;
            if i != theta0 {
                others += os * w;
                os *= msg_radix;
            }
        }
        out[0] = y;
        out[1] = others;
    })?;
    Ok((info::factorizes(&table, &[0], &[1])?, info::mutual_information(&table, &[0], &[1], p)?))
}

fn security() -> Verdict {
    let opts = VerifyOptions::default();
    over_grid(&grid(), |s| {
        let r = verify::check_security(s, &opts)?;
        if !r.passed() {
            return Ok(Some(format!("security failed: {:?}", r.witness)));
        }
        for theta0 in 0..s.params().transmitters {
            let (independent, mi) = transcript_vs_others(s, theta0)?;
            if !independent || !mi.is_exactly(Ratio::from_integer(0)) {
                return Ok(Some(format!("I(Y; W_others) = {mi} under desired index {}", theta0 + 1)));
            }
        }
        Ok(None)
    })
}

fn collusion() -> Verdict {
    let opts = VerifyOptions::default();
    let mut points = Vec::new();
    for k in 3..=4 {
        for p in [2, 3] {
            for l in [1, 2] {
                points.push(params(k, p, l));
            }
        }
    }
    let mut sets = 0;
    let v = over_grid(&points, |s| {
        for set in verify::colluder_sets(s.params().transmitters) {
            let r = verify::check_collusion(s, &set, &opts)?;
            if !r.passed() {
                return Ok(Some(format!("colluders {set:?}: {:?}", r.witness)));
            }
            sets += 1;
        }
        Ok(None)
    })?;
    Ok(format!("{sets} colluder sets identical across candidates; {v}"))
}

fn search_err(e: SearchError) -> String {
    e.to_string()
}

fn converse_general() -> Verdict {
    let pr = params(2, 2, 1);
    let opts = SearchOptions::default();
    let single = SearchOptions {
        workers: Some(1),
        ..SearchOptions::default()
    };
    let s0 = search::search(Family::General, pr, 0, &opts).map_err(search_err)?;
    let t = Instant::now();
    let s1_single = search::search(Family::General, pr, 1, &single).map_err(search_err)?;
    let single_time = t.elapsed();
    let s1 = search::search(Family::General, pr, 1, &opts).map_err(search_err)?;
    if s0.valid_schemes_found != 0 {
        return Err(format!("seed_dim 0 admits {} schemes", s0.valid_schemes_found));
    }
    if s1.valid_schemes_found == 0 {
        return Err("seed_dim 1 admits no scheme".into());
    }
    if s1.without_timing() != s1_single.without_timing() {
        return Err("single-worker run disagrees".into());
    }
    let full = |v: &Option<EntropyValue>| v.as_ref().is_some_and(|e| close(e, 1));
    if !full(&s1.min_rho) || !full(&s1.max_rho) {
        return Err(format!("H(Z_i) ranges over {:?}..{:?}", s1.min_rho, s1.max_rho));
    }
    Ok(format!(
        "s=0: 0 of {}; s=1: {} of {}, every H(Z_i) = 1; single worker {:.2}s",
        s0.space_size,
        s1.valid_schemes_found,
        s1.space_size,
        single_time.as_secs_f64()
    ))
}

fn converse_linear() -> Verdict {
    let pr = params(3, 2, 1);
    let min = min_seed_dimension(Family::Linear, pr, &SearchOptions::default()).map_err(search_err)?;
    if min.dimension != Some(2) {
        return Err(format!("min seed dimension {:?}", min.dimension));
    }
    let all = SearchOptions {
        collect_limit: usize::MAX,
        ..SearchOptions::default()
    };
    let r = search::search(Family::Linear, pr, 2, &all).map_err(search_err)?;
    if r.accepted.len() as u64 != r.valid_schemes_found || r.accepted.is_empty() {
        return Err(format!("collected {} of {}", r.accepted.len(), r.valid_schemes_found));
    }
    for desc in &r.accepted {
        let compiled = desc.compile().map_err(|e| e.to_string())?;
        let (individual, joint) =
            protocol::share_entropies(&compiled, info::DEFAULT_MAX_STATES).map_err(|e| e.to_string())?;
        if !individual.iter().all(|h| close(h, 1)) {
            return Err(format!("share entropies {individual:?}"));
        }
        let m = converse::joint_share_matrix(desc).ok_or("no joint share matrix")?;
        let rank = anoncomm::field::rank(&m);
        let relation = converse::share_relation(desc).ok_or("no share relation")?;
        if rank >= pr.transmitters || !close(&joint, rank as u64) || relation.contains(&0) {
            return Err(format!("rank {rank}, H(Z) {joint}, relation {relation:?}"));
        }
    }
    let coded = check_coded_randomness_necessity(pr, &SearchOptions::default()).map_err(search_err)?;
    if !coded.necessary {
        return Err(format!("coded randomness not shown necessary: {}", coded.note));
    }
    Ok(format!(
        "min seed dim 2; {} schemes with H(Z_i) = 1, joint rank 2 of 3 and a sum-to-zero relation; coded {} vs uncoded {}",
        r.valid_schemes_found, coded.coded_valid, coded.uncoded_valid
    ))
}

fn decoder_census() -> Verdict {
    let c = forced_decoder_census(params(3, 2, 1), &SearchOptions::default()).map_err(search_err)?;
    if c.decoders.is_empty() || !c.all_latin || !c.all_sum_form {
        return Err(format!("{} decoders, latin {}, sum form {}", c.decoders.len(), c.all_latin, c.all_sum_form));
    }
    let offsets: Vec<String> = c
        .decoders
        .iter()
        .map(|d| format!("y1+y2+y3+{} ({} schemes)", d.sum_offset.unwrap_or(0), d.schemes))
        .collect();
    Ok(format!(
        "{} valid of {} candidates; decoders: {}",
        c.valid_schemes_found,
        c.space_size,
        offsets.join(", ")
    ))
}

fn rate_infeasible() -> Verdict {
    let mut searched = Vec::new();
    let mut refused = Vec::new();
    for k in [2, 3] {
        let pr = SchemeParams::with_channel_uses(k, 2, 2, 1).unwrap();
        let r = check_rate_infeasible(pr).map_err(search_err)?;
        if !r.infeasible || r.full_rank_pairs != 0 {
            return Err(format!("K={k}: {} full-rank pairs", r.full_rank_pairs));
        }
        for s in 0..=k {
            match search::search(Family::Linear, pr, s, &SearchOptions::default()) {
                Ok(res) if res.valid_schemes_found == 0 => searched.push(format!("K={k} s={s}")),
                Ok(res) => return Err(format!("K={k} s={s}: {} valid schemes", res.valid_schemes_found)),
                Err(SearchError::TooLarge { .. } | SearchError::Refused(_)) => refused.push(format!("K={k} s={s}")),
                Err(e) => return Err(e.to_string()),
            }
        }
    }
    Ok(format!(
        "no (G, V) pair reaches rank L for K in {{2, 3}}; exhaustive zero at {}; over cap: {}",
        searched.join(", "),
        refused.join(", ")
    ))
}

fn harness() -> Verdict {
    let mut cfg = SimConfig::new(params(3, 2, 1), 10_000, Transport::InProcess, 2024);
    cfg.audit = true;
    let mut logs = Vec::new();
    for t in [Transport::InProcess, Transport::Stream] {
        let r = sim::run_simulation(&SimConfig { transport: t, ..cfg.clone() }).map_err(|e| e.to_string())?;
        if r.correct != 10_000 || !r.all_correct() {
            return Err(format!("{t:?}: {} of 10000 correct, {:?}", r.correct, r.actor_errors));
        }
        if !r.violations.is_empty() {
            return Err(format!("{t:?}: {} audit violations", r.violations.len()));
        }
        logs.push(sim::round_logs_jsonl(&r.logs));
    }
    if logs[0] != logs[1] {
        return Err("round logs differ between transports".into());
    }
    Ok(format!("10000/10000 correct on both transports, 0 violations, {} identical log bytes", logs[0].len()))
}

type Criterion = (u32, &'static str, u64, fn() -> Verdict);

const CRITERIA: &[Criterion] = &[
    (1, "rate", 1, rate_capacity),
    (2, "randomness sizes", 5, randomness_sizes),
    (3, "anonymity", 600, anonymity),
    (4, "correctness", 600, correctness),
    (5, "security", 600, security),
    (6, "collusion", 600, collusion),
    (7, "converse general", 120, converse_general),
    (8, "converse linear", 300, converse_linear),
    (9, "forced decoder", 300, decoder_census),
    (10, "rate infeasibility", 1, rate_infeasible),
    (11, "harness", 30, harness),
];

fn main() {
    let selected: Vec<u32> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = 0;
    for &(n, name, budget, run) in CRITERIA {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let verdict = run();
        let elapsed = t.elapsed();
        let in_budget = elapsed <= Duration::from_secs(budget);
        let (ok, detail) = match verdict {
            Ok(d) if in_budget => (true, d),
            Ok(d) => (false, format!("{d}; over the {budget}s budget")),
            Err(d) => (false, d),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} criterion {n:>2} {name}: {detail} [{:.3}s, budget {budget}s]",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
