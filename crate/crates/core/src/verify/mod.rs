//! Exhaustive checks of correctness, anonymity, security, collusion
//! resilience and the structural properties any rate-1/K scheme must have.
//!
//! Every check enumerates all seeds, all message tuples and all desired
//! indices, so verdicts are exact. Distribution comparisons use integer
//! counts only.

pub mod fixtures;

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::field::{Prime, SymbolVector};
use crate::info::{self, DistTable, EntropyValue, InfoError, SampleSpace, SpaceSize};
use crate::protocol::SchemeParams;
use crate::scheme::Scheme;

/// Largest transmitter count the checks handle.
pub const MAX_TRANSMITTERS: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("state space of {required} states exceeds the cap of {cap}")]
    StateSpace { required: SpaceSize, cap: u64 },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error(transparent)]
    Info(InfoError),
}

impl From<InfoError> for VerifyError {
    fn from(e: InfoError) -> Self {
        match e {
            InfoError::StateSpaceTooLarge { required, cap } => VerifyError::StateSpace { required, cap },
            other => VerifyError::Info(other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    Correctness,
    Anonymity,
    Security,
    Collusion,
    TranscriptUniform,
    ShareDeterminism,
    DecoderLatinStructure,
}

impl CheckName {
    pub const ALL: [CheckName; 7] = [
        CheckName::Correctness,
        CheckName::Anonymity,
        CheckName::Security,
        CheckName::Collusion,
        CheckName::TranscriptUniform,
        CheckName::ShareDeterminism,
        CheckName::DecoderLatinStructure,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::Correctness => "correctness",
            CheckName::Anonymity => "anonymity",
            CheckName::Security => "security",
            CheckName::Collusion => "collusion",
            CheckName::TranscriptUniform => "transcript_uniform",
            CheckName::ShareDeterminism => "share_determinism",
            CheckName::DecoderLatinStructure => "decoder_latin_structure",
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().replace('-', "_");
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == norm || (norm == "latin" && *c == CheckName::DecoderLatinStructure))
            .ok_or_else(|| format!("unknown check '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

/// A named symbol vector inside a witness.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Labeled {
    pub name: String,
    pub symbols: Vec<u32>,
}

/// Counterexample attached to a failing report.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    Decoding {
        theta: usize,
        seed: Vec<u32>,
        messages: Vec<Vec<u32>>,
        transcript: Vec<Vec<u32>>,
        decoded: Vec<u32>,
        expected: Vec<u32>,
    },
    Distribution {
        theta_a: usize,
        theta_b: usize,
        outcome: Vec<Labeled>,
        count_a: u64,
        total_a: u64,
        count_b: u64,
        total_b: u64,
    },
    Dependence {
        theta: usize,
        transcript: Vec<Vec<u32>>,
        desired_message: Vec<u32>,
        messages: Vec<Labeled>,
        joint: u64,
        count_transcript: u64,
        count_messages: u64,
        total: u64,
        mutual_information: EntropyValue,
    },
    NonUniform {
        theta: usize,
        support: u64,
        expected_support: u64,
        min_count: u64,
        max_count: u64,
    },
    SignalDependsOnMessages {
        theta: usize,
        transmitter: usize,
        shares: Vec<Vec<u32>>,
        first: Vec<u32>,
        second: Vec<u32>,
    },
    DecoderCollision {
        cell: Vec<u32>,
        coordinate: usize,
        other_value: u32,
        output: Vec<u32>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckStats {
    pub states: u64,
    pub elapsed_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub check_name: CheckName,
    pub scheme: String,
    pub params: SchemeParams,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoder_hash: Option<String>,
    pub stats: CheckStats,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Report with timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> CheckReport {
        let mut r = self.clone();
        r.stats.elapsed_ms = 0.0;
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub max_states: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            max_states: info::DEFAULT_MAX_STATES,
        }
    }
}

/// State layout: index = seed + p^s * (w_1 + p^L w_2 + ...), per desired index.
#[derive(Debug, Clone, Copy)]
struct Layout {
    p: Prime,
    k: usize,
    l: usize,
    n: usize,
    seed_dim: usize,
    share_dim: usize,
    seeds: u64,
    msg_radix: u64,
    sig_radix: u64,
    share_radix: u64,
    per_theta: u64,
}

type Buf = [u64; MAX_TRANSMITTERS];

impl Layout {
    fn new(scheme: &dyn Scheme, opts: &VerifyOptions, passes: usize) -> Result<Self, VerifyError> {
        let params = scheme.params();
        params
            .validate()
            .map_err(|e| VerifyError::Precondition(e.to_string()))?;
        let k = params.transmitters;
        if k > MAX_TRANSMITTERS {
            return Err(VerifyError::Precondition(format!(
                "at most {MAX_TRANSMITTERS} transmitters are supported"
            )));
        }
        let p = params.modulus;
        let symbols = scheme.seed_dim() + k * params.message_len;
        let required = SpaceSize::pow(p.get(), symbols).times(passes as u128);
        if required.exceeds(opts.max_states) {
            return Err(VerifyError::StateSpace {
                required,
                cap: opts.max_states,
            });
        }
        let pow = |n: usize| p.pow(n).ok_or(VerifyError::Info(InfoError::KeySpaceOverflow));
        Ok(Layout {
            p,
            k,
            l: params.message_len,
            n: params.channel_uses,
            seed_dim: scheme.seed_dim(),
            share_dim: scheme.share_dim(),
            seeds: pow(scheme.seed_dim())?,
            msg_radix: pow(params.message_len)?,
            sig_radix: pow(params.channel_uses)?,
            share_radix: pow(scheme.share_dim())?,
            per_theta: pow(symbols)?,
        })
    }

    #[inline]
    fn split(&self, state: u64, msgs: &mut Buf) -> u64 {
        let seed = state % self.seeds;
        let mut rest = state / self.seeds;
        for m in msgs.iter_mut().take(self.k) {
            *m = rest % self.msg_radix;
            rest /= self.msg_radix;
        }
        seed
    }

    /// Signals for desired position `theta` (0-based) at `state`.
    #[inline]
    fn run(
        &self,
        scheme: &dyn Scheme,
        theta: usize,
        state: u64,
        msgs: &mut Buf,
        shares: &mut Buf,
        signals: &mut Buf,
    ) -> u64 {
        let seed = self.split(state, msgs);
        scheme.deal_packed(seed, &mut shares[..self.k]);
        for i in 0..self.k {
            signals[i] = scheme.encode_packed(i, i == theta, msgs[i], shares[i]);
        }
        seed
    }

    fn unpack(&self, len: usize, v: u64) -> Vec<u32> {
        SymbolVector::unpack(self.p, len, v).values()
    }

    fn signals(&self, s: &[u64]) -> Vec<Vec<u32>> {
        s.iter().map(|&x| self.unpack(self.n, x)).collect()
    }
}

struct Timer {
    start: Instant,
}

impl Timer {
    fn start() -> Self {
        Timer {
            start: Instant::now(),
        }
    }

    fn report(
        self,
        check: CheckName,
        scheme: &dyn Scheme,
        states: u64,
        witness: Option<Witness>,
        detail: Option<String>,
    ) -> CheckReport {
        CheckReport {
            check_name: check,
            scheme: scheme.label(),
            params: scheme.params(),
            verdict: if witness.is_some() {
                Verdict::Fail
            } else {
                Verdict::Pass
            },
            witness,
            detail,
            decoder_hash: None,
            stats: CheckStats {
                states,
                elapsed_ms: self.start.elapsed().as_secs_f64() * 1e3,
            },
        }
    }
}

/// Decoding succeeds for every desired index, seed and message tuple.
pub fn check_correctness(scheme: &dyn Scheme, opts: &VerifyOptions) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let lay = Layout::new(scheme, opts, scheme.params().transmitters)?;
    let total = lay.per_theta * lay.k as u64;
    let bad = info::find_first(total, |idx| {
        let (theta, state) = ((idx / lay.per_theta) as usize, idx % lay.per_theta);
        let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
        scheme.decode_packed(&sig[..lay.k]) != msgs[theta]
    });
    let witness = bad.map(|idx| {
        let (theta, state) = ((idx / lay.per_theta) as usize, idx % lay.per_theta);
        let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        let seed = lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
        Witness::Decoding {
            theta: theta + 1,
            seed: lay.unpack(lay.seed_dim, seed),
            messages: msgs[..lay.k].iter().map(|&w| lay.unpack(lay.l, w)).collect(),
            transcript: lay.signals(&sig[..lay.k]),
            decoded: lay.unpack(lay.l, scheme.decode_packed(&sig[..lay.k])),
            expected: lay.unpack(lay.l, msgs[theta]),
        }
    });
    let states = bad.map_or(total, |i| i + 1);
    Ok(timer.report(CheckName::Correctness, scheme, states, witness, None))
}

/// Distribution of the transcript (one variable per signal) with `theta`
/// (0-based) desired, over uniform seeds and messages.
pub fn transcript_table(scheme: &dyn Scheme, theta: usize, opts: &VerifyOptions) -> Result<DistTable, VerifyError> {
    let lay = Layout::new(scheme, opts, 1)?;
    transcript_table_in(&lay, scheme, theta, opts)
}

fn transcript_table_in(
    lay: &Layout,
    scheme: &dyn Scheme,
    theta: usize,
    opts: &VerifyOptions,
) -> Result<DistTable, VerifyError> {
    let space = SampleSpace::new(lay.p, lay.seed_dim + lay.k * lay.l, vec![lay.sig_radix; lay.k])
        .with_max_states(opts.max_states);
    Ok(info::enumerate(&space, |state, out| {
        let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
        out.copy_from_slice(&sig[..lay.k]);
    })?)
}

fn signal_labels(lay: &Layout, outcome: &[u64]) -> Vec<Labeled> {
    outcome
        .iter()
        .enumerate()
        .map(|(i, &x)| Labeled {
            name: format!("X{}", i + 1),
            symbols: lay.unpack(lay.n, x),
        })
        .collect()
}

fn compare_tables(
    tables: &[(usize, DistTable)],
    label: impl Fn(&[u64]) -> Vec<Labeled>,
) -> Option<Witness> {
    let (theta_a, first) = tables.first()?;
    tables.iter().skip(1).find_map(|(theta_b, t)| {
        info::first_difference(first, t).map(|(outcome, count_a, count_b)| Witness::Distribution {
            theta_a: theta_a + 1,
            theta_b: theta_b + 1,
            outcome: label(&outcome),
            count_a,
            total_a: first.total(),
            count_b,
            total_b: t.total(),
        })
    })
}

/// SHA-256 prefix of the decoder's output on every transcript.
pub fn decoder_fingerprint(scheme: &dyn Scheme) -> Option<String> {
    let params = scheme.params();
    let p = params.modulus;
    let k = params.transmitters;
    let base = p.pow(params.channel_uses)?;
    let cells = p.pow(k * params.channel_uses).filter(|&c| c <= 1 << 20)?;
    let mut hasher = Sha256::new();
    let mut sig = vec![0u64; k];
    for y in 0..cells {
        let mut rest = y;
        for s in sig.iter_mut() {
            *s = rest % base;
            rest /= base;
        }
        hasher.update(scheme.decode_packed(&sig).to_le_bytes());
    }
    let digest = hasher.finalize();
    Some(digest[..8].iter().map(|b| format!("{b:02x}")).collect())
}

/// The transcript distribution is the same for every desired index.
pub fn check_anonymity(scheme: &dyn Scheme, opts: &VerifyOptions) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let lay = Layout::new(scheme, opts, scheme.params().transmitters)?;
    let tables = (0..lay.k)
        .map(|t| Ok((t, transcript_table_in(&lay, scheme, t, opts)?)))
        .collect::<Result<Vec<_>, VerifyError>>()?;
    let witness = compare_tables(&tables, |o| signal_labels(&lay, o));
    let detail = format!(
        "transcript support {} of {} tuples under desired index 1",
        tables[0].1.support_size(),
        lay.sig_radix.pow(lay.k as u32)
    );
    let mut report = timer.report(
        CheckName::Anonymity,
        scheme,
        lay.per_theta * lay.k as u64,
        witness,
        Some(detail),
    );
    report.decoder_hash = decoder_fingerprint(scheme);
    Ok(report)
}

/// The receiver's view, the transcript together with the desired message it
/// decodes, carries no information about the non-desired messages.
pub fn check_security(scheme: &dyn Scheme, opts: &VerifyOptions) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let lay = Layout::new(scheme, opts, scheme.params().transmitters)?;
    let transcript_radix = lay
        .sig_radix
        .checked_pow(lay.k as u32)
        .ok_or(VerifyError::Info(InfoError::KeySpaceOverflow))?;
    let others_radix = lay
        .msg_radix
        .checked_pow(lay.k as u32 - 1)
        .ok_or(VerifyError::Info(InfoError::KeySpaceOverflow))?;
    let view_radix = transcript_radix
        .checked_mul(lay.msg_radix)
        .ok_or(VerifyError::Info(InfoError::KeySpaceOverflow))?;
    let space = SampleSpace::new(
        lay.p,
        lay.seed_dim + lay.k * lay.l,
        vec![view_radix, others_radix],
    )
    .with_max_states(opts.max_states);

    let mut worst: Option<EntropyValue> = None;
    for theta in 0..lay.k {
        let table = info::enumerate(&space, |state, out| {
            let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
            lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
            out[0] = sig[..lay.k].iter().rev().fold(0, |acc, &x| acc * lay.sig_radix + x)
                + transcript_radix * msgs[theta];
            out[1] = (0..lay.k)
                .filter(|&i| i != theta)
                .rev()
                .fold(0, |acc, i| acc * lay.msg_radix + msgs[i]);
        })?;
        let mi = info::mutual_information(&table, &[0], &[1], lay.p)?;
        if let Some(dep) = info::first_dependence(&table, &[0], &[1])? {
            let mut y = dep.a[0] % transcript_radix;
            let decoded = lay.unpack(lay.l, dep.a[0] / transcript_radix);
            let signals: Vec<u64> = (0..lay.k)
                .map(|_| {
                    let x = y % lay.sig_radix;
                    y /= lay.sig_radix;
                    x
                })
                .collect();
            let mut w = dep.b[0];
            let messages = (0..lay.k)
                .filter(|&i| i != theta)
                .map(|i| {
                    let m = w % lay.msg_radix;
                    w /= lay.msg_radix;
                    Labeled {
                        name: format!("W{}", i + 1),
                        symbols: lay.unpack(lay.l, m),
                    }
                })
                .collect();
            let witness = Witness::Dependence {
                theta: theta + 1,
                transcript: lay.signals(&signals),
                desired_message: decoded,
                messages,
                joint: dep.joint,
                count_transcript: dep.count_a,
                count_messages: dep.count_b,
                total: dep.total,
                mutual_information: mi,
            };
            return Ok(timer.report(
                CheckName::Security,
                scheme,
                lay.per_theta * (theta as u64 + 1),
                Some(witness),
                None,
            ));
        }
        if worst.is_none_or(|w| mi.value > w.value) {
            worst = Some(mi);
        }
    }
    let detail = worst.map(|mi| format!("max I(Y, desired message; other messages) = {mi}"));
    Ok(timer.report(
        CheckName::Security,
        scheme,
        lay.per_theta * lay.k as u64,
        None,
        detail,
    ))
}

/// With `colluders` (1-based) sharing their shares, messages and flags with
/// the receiver, every other transmitter remains equally likely desired.
pub fn check_collusion(
    scheme: &dyn Scheme,
    colluders: &[usize],
    opts: &VerifyOptions,
) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let k = scheme.params().transmitters;
    let mut set: Vec<usize> = colluders.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() != colluders.len() {
        return Err(VerifyError::Precondition("colluder indices must be distinct".into()));
    }
    if let Some(&bad) = set.iter().find(|&&c| c == 0 || c > k) {
        return Err(VerifyError::Precondition(format!(
            "colluder {bad} outside 1..={k}"
        )));
    }
    if set.len() + 2 > k {
        return Err(VerifyError::Precondition(format!(
            "{} colluders exceed the K-2 = {} the model allows",
            set.len(),
            k.saturating_sub(2)
        )));
    }
    let candidates: Vec<usize> = (0..k).filter(|t| !set.contains(&(t + 1))).collect();
    let lay = Layout::new(scheme, opts, candidates.len())?;

    let mut radices = vec![lay.sig_radix; k];
    for _ in &set {
        radices.extend([lay.share_radix, lay.msg_radix, 2]);
    }
    let space = SampleSpace::new(lay.p, lay.seed_dim + k * lay.l, radices).with_max_states(opts.max_states);
    let tables = candidates
        .iter()
        .map(|&theta| {
            let t = info::enumerate(&space, |state, out| {
                let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
                lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
                out[..k].copy_from_slice(&sig[..k]);
                for (j, &c) in set.iter().enumerate() {
                    let base = k + 3 * j;
                    out[base] = shares[c - 1];
                    out[base + 1] = msgs[c - 1];
                    out[base + 2] = (theta == c - 1) as u64;
                }
            })?;
            Ok((theta, t))
        })
        .collect::<Result<Vec<_>, VerifyError>>()?;
    let witness = compare_tables(&tables, |o| {
        let mut out = signal_labels(&lay, &o[..k]);
        for (j, &c) in set.iter().enumerate() {
            let base = k + 3 * j;
            out.push(Labeled {
                name: format!("Z{c}"),
                symbols: lay.unpack(lay.share_dim, o[base]),
            });
            out.push(Labeled {
                name: format!("W{c}"),
                symbols: lay.unpack(lay.l, o[base + 1]),
            });
            out.push(Labeled {
                name: format!("desired{c}"),
                symbols: vec![o[base + 2] as u32],
            });
        }
        out
    });
    let detail = format!("colluders {set:?}, candidates {:?}", candidates.iter().map(|t| t + 1).collect::<Vec<_>>());
    Ok(timer.report(
        CheckName::Collusion,
        scheme,
        lay.per_theta * candidates.len() as u64,
        witness,
        Some(detail),
    ))
}

/// Every colluder set of size `1..=K-2`, in lexicographic order.
pub fn colluder_sets(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 1u32..(1 << k) {
        let set: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        if set.len() + 2 <= k {
            out.push(set);
        }
    }
    out.sort();
    out
}

/// Every transcript distribution is uniform over all `p^(KN)` tuples.
pub fn check_transcript_uniform(scheme: &dyn Scheme, opts: &VerifyOptions) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let params = scheme.params();
    if params.channel_uses != params.message_len {
        return Err(VerifyError::Precondition(format!(
            "transcript uniformity applies to N = L schemes, got N = {} L = {}",
            params.channel_uses, params.message_len
        )));
    }
    let lay = Layout::new(scheme, opts, params.transmitters)?;
    let expected = lay.sig_radix.pow(lay.k as u32);
    for theta in 0..lay.k {
        let t = transcript_table_in(&lay, scheme, theta, opts)?;
        if t.support_size() as u64 != expected || !t.is_uniform() {
            let counts: Vec<u64> = t.iter().map(|(_, c)| c).collect();
            let witness = Witness::NonUniform {
                theta: theta + 1,
                support: t.support_size() as u64,
                expected_support: expected,
                min_count: counts.iter().copied().min().unwrap_or(0),
                max_count: counts.iter().copied().max().unwrap_or(0),
            };
            return Ok(timer.report(
                CheckName::TranscriptUniform,
                scheme,
                lay.per_theta * (theta as u64 + 1),
                Some(witness),
                None,
            ));
        }
    }
    Ok(timer.report(
        CheckName::TranscriptUniform,
        scheme,
        lay.per_theta * lay.k as u64,
        None,
        Some(format!("uniform over {expected} tuples")),
    ))
}

/// For a fixed share tuple, every non-desired signal is constant across all
/// message realizations.
pub fn check_share_determinism(scheme: &dyn Scheme, opts: &VerifyOptions) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let lay = Layout::new(scheme, opts, scheme.params().transmitters)?;
    let k = lay.k;

    // Reference signals per share tuple: the lowest seed producing it, all-zero messages.
    let mut first_seed: HashMap<Vec<u64>, u64> = HashMap::new();
    let mut shares = [0u64; MAX_TRANSMITTERS];
    let seed_class: Vec<u64> = (0..lay.seeds)
        .map(|seed| {
            scheme.deal_packed(seed, &mut shares[..k]);
            *first_seed.entry(shares[..k].to_vec()).or_insert(seed)
        })
        .collect();

    let total = lay.per_theta * k as u64;
    let bad = info::find_first(total, |idx| {
        let (theta, state) = ((idx / lay.per_theta) as usize, idx % lay.per_theta);
        let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        let seed = lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
        let (mut m0, mut s0, mut ref_sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        lay.run(scheme, theta, seed_class[seed as usize], &mut m0, &mut s0, &mut ref_sig);
        (0..k).any(|i| i != theta && sig[i] != ref_sig[i])
    });
    let witness = bad.map(|idx| {
        let (theta, state) = ((idx / lay.per_theta) as usize, idx % lay.per_theta);
        let (mut msgs, mut shares, mut sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        let seed = lay.run(scheme, theta, state, &mut msgs, &mut shares, &mut sig);
        let (mut m0, mut s0, mut ref_sig) = ([0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS], [0; MAX_TRANSMITTERS]);
        lay.run(scheme, theta, seed_class[seed as usize], &mut m0, &mut s0, &mut ref_sig);
        let i = (0..k).find(|&i| i != theta && sig[i] != ref_sig[i]).expect("found above");
        Witness::SignalDependsOnMessages {
            theta: theta + 1,
            transmitter: i + 1,
            shares: shares[..k].iter().map(|&z| lay.unpack(lay.share_dim, z)).collect(),
            first: lay.unpack(lay.n, ref_sig[i]),
            second: lay.unpack(lay.n, sig[i]),
        }
    });
    let states = bad.map_or(total, |i| i + 1);
    Ok(timer.report(CheckName::ShareDeterminism, scheme, states, witness, None))
}

/// For `N = L = 1`: changing any single transcript coordinate changes the
/// decoded value (each axis-parallel line of the decoder table is a
/// permutation).
pub fn check_decoder_latin_structure(scheme: &dyn Scheme, opts: &VerifyOptions) -> Result<CheckReport, VerifyError> {
    let timer = Timer::start();
    let params = scheme.params();
    if params.channel_uses != 1 || params.message_len != 1 {
        let mut r = timer.report(
            CheckName::DecoderLatinStructure,
            scheme,
            0,
            None,
            Some("skipped: requires N = L = 1".into()),
        );
        r.verdict = Verdict::Skipped;
        return Ok(r);
    }
    let p = params.modulus.get() as u64;
    let k = params.transmitters;
    let cells = SpaceSize::pow(p as u32, k);
    if cells.exceeds(opts.max_states) {
        return Err(VerifyError::StateSpace {
            required: cells,
            cap: opts.max_states,
        });
    }
    let unpack = |y: u64| -> Vec<u64> { (0..k).map(|i| (y / p.pow(i as u32)) % p).collect() };
    let mut witness = None;
    'outer: for y in 0..cells.0 as u64 {
        let base = unpack(y);
        let out = scheme.decode_packed(&base);
        for j in 0..k {
            for v in base[j] + 1..p {
                let mut other = base.clone();
                other[j] = v;
                if scheme.decode_packed(&other) == out {
                    witness = Some(Witness::DecoderCollision {
                        cell: base.iter().map(|&d| d as u32).collect(),
                        coordinate: j + 1,
                        other_value: v as u32,
                        output: vec![out as u32],
                    });
                    break 'outer;
                }
            }
        }
    }
    let mut r = timer.report(
        CheckName::DecoderLatinStructure,
        scheme,
        cells.0 as u64,
        witness,
        None,
    );
    r.decoder_hash = decoder_fingerprint(scheme);
    Ok(r)
}

/// Runs `checks`; collusion expands to every colluder set of size `1..=K-2`.
pub fn run_checks(
    scheme: &dyn Scheme,
    checks: &[CheckName],
    opts: &VerifyOptions,
) -> Result<Vec<CheckReport>, VerifyError> {
    let mut out = Vec::new();
    for &c in checks {
        match c {
            CheckName::Correctness => out.push(check_correctness(scheme, opts)?),
            CheckName::Anonymity => out.push(check_anonymity(scheme, opts)?),
            CheckName::Security => out.push(check_security(scheme, opts)?),
            CheckName::Collusion => {
                for set in colluder_sets(scheme.params().transmitters) {
                    out.push(check_collusion(scheme, &set, opts)?);
                }
            }
            CheckName::TranscriptUniform => out.push(check_transcript_uniform(scheme, opts)?),
            CheckName::ShareDeterminism => out.push(check_share_determinism(scheme, opts)?),
            CheckName::DecoderLatinStructure => out.push(check_decoder_latin_structure(scheme, opts)?),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::BuiltinScheme;

    fn builtin(k: usize, p: u32, l: usize) -> BuiltinScheme {
        BuiltinScheme::new(SchemeParams::new(k, p, l).unwrap()).unwrap()
    }

    #[test]
    fn builtin_passes_everything_small() {
        let opts = VerifyOptions::default();
        for (k, p, l) in [(2, 2, 1), (3, 2, 1), (3, 3, 1), (2, 3, 2), (4, 2, 1)] {
            let s = builtin(k, p, l);
            for r in run_checks(&s, &CheckName::ALL, &opts).unwrap() {
                assert_ne!(r.verdict, Verdict::Fail, "{k} {p} {l}: {r:?}");
                assert!(r.witness.is_none());
            }
        }
    }

    #[test]
    fn k3_transcripts_are_uniform_over_eight() {
        let s = builtin(3, 2, 1);
        for theta in 0..3 {
            let t = transcript_table(&s, theta, &VerifyOptions::default()).unwrap();
            assert_eq!(t.support_size(), 8);
            assert!(t.iter().all(|(_, c)| c == 4));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let s = builtin(3, 2, 1);
        let opts = VerifyOptions { max_states: 10 };
        assert_eq!(
            check_correctness(&s, &opts),
            Err(VerifyError::StateSpace {
                required: SpaceSize(96),
                cap: 10
            })
        );
    }

    #[test]
    fn collusion_guards() {
        let s = builtin(3, 2, 1);
        let opts = VerifyOptions::default();
        assert!(matches!(
            check_collusion(&s, &[2, 3], &opts),
            Err(VerifyError::Precondition(_))
        ));
        assert!(matches!(
            check_collusion(&s, &[4], &opts),
            Err(VerifyError::Precondition(_))
        ));
        assert!(matches!(
            check_collusion(&s, &[1, 1], &opts),
            Err(VerifyError::Precondition(_))
        ));
        assert!(check_collusion(&s, &[3], &opts).unwrap().passed());
    }

    #[test]
    fn colluder_sets_sizes() {
        assert_eq!(colluder_sets(3), vec![vec![1], vec![2], vec![3]]);
        assert_eq!(colluder_sets(4).len(), 4 + 6);
        assert!(colluder_sets(2).is_empty());
    }

    #[test]
    fn latin_skipped_for_vectors() {
        let r = check_decoder_latin_structure(&builtin(3, 2, 2), &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Skipped);
    }

    #[test]
    fn uniform_requires_rate_one_over_k() {
        use crate::search::description::SchemeDescription;
        let params = SchemeParams::with_channel_uses(2, 2, 1, 2).unwrap();
        let mut desc = SchemeDescription::builtin_linear(SchemeParams::new(2, 2, 1).unwrap());
        desc.params = params;
        let err = match desc.compile() {
            Ok(c) => check_transcript_uniform(&c, &VerifyOptions::default()).unwrap_err(),
            Err(_) => VerifyError::Precondition("shape".into()),
        };
        assert!(matches!(err, VerifyError::Precondition(_)));
    }

    #[test]
    fn reports_are_deterministic() {
        let s = builtin(3, 3, 1);
        let opts = VerifyOptions::default();
        let a: Vec<_> = run_checks(&s, &CheckName::ALL, &opts).unwrap().iter().map(CheckReport::without_timing).collect();
        let b: Vec<_> = run_checks(&s, &CheckName::ALL, &opts).unwrap().iter().map(CheckReport::without_timing).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn check_names_parse() {
        for c in CheckName::ALL {
            assert_eq!(c.as_str().parse::<CheckName>().unwrap(), c);
        }
        assert_eq!("latin".parse::<CheckName>().unwrap(), CheckName::DecoderLatinStructure);
        assert!("bogus".parse::<CheckName>().is_err());
    }
}
