//! Runs the protocol as independent actors exchanging wire frames: a dealer,
//! `K` transmitters and a receiver, with the harness as the sink for decoded
//! messages.
//!
//! Every actor reads its links in a fixed order and keeps a logical clock
//! that ticks once per frame sent or received, so round logs do not depend
//! on thread scheduling or on the transport.

pub mod transport;
pub mod wire;

use std::fmt;
use std::io::Write;
use std::thread;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::field::SymbolVector;
use crate::protocol::{self, Dealer, DesireFlag, Message, ProtocolError, SchemeParams, Seed, Share, Transcript};

use transport::{link, LinkError, LinkRx, LinkTx, Transport};
use wire::{MsgType, WireMessage};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("{actor} stopped: {cause}")]
    Actor { actor: Role, cause: String },
    #[error("refusing audit-mode logs: they carry the desired index")]
    AuditLogs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Dealer,
    Transmitter(usize),
    Receiver,
    Sink,
}

impl Role {
    pub fn wire_id(self, k: usize) -> u16 {
        match self {
            Role::Dealer => 0,
            Role::Transmitter(i) => i as u16,
            Role::Receiver => k as u16 + 1,
            Role::Sink => k as u16 + 2,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Dealer => f.write_str("dealer"),
            Role::Transmitter(i) => write!(f, "transmitter {i}"),
            Role::Receiver => f.write_str("receiver"),
            Role::Sink => f.write_str("sink"),
        }
    }
}

/// Where the dealer's desired index and seed come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DealerPlan {
    Random,
    /// `(theta, seed symbols)` per round, `theta` 1-based.
    Scripted(Vec<(usize, Vec<u32>)>),
}

/// Where each transmitter's messages come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MessagePlan {
    Random,
    /// `[round][transmitter]` message symbols.
    Scripted(Vec<Vec<Vec<u32>>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimConfig {
    pub params: SchemeParams,
    pub rounds: u32,
    pub transport: Transport,
    pub seed: u64,
    /// Record the desired index in round logs.
    pub audit: bool,
    pub dealer: DealerPlan,
    pub messages: MessagePlan,
    /// The dealer aborts this round after dealing to transmitter 1 only.
    pub shutdown_in_round: Option<u32>,
}

impl SimConfig {
    pub fn new(params: SchemeParams, rounds: u32, transport: Transport, seed: u64) -> Self {
        SimConfig {
            params,
            rounds,
            transport,
            seed,
            audit: false,
            dealer: DealerPlan::Random,
            messages: MessagePlan::Random,
            shutdown_in_round: None,
        }
    }

    fn validate(&self) -> Result<(), SimError> {
        self.params.validate()?;
        if self.params.channel_uses != self.params.message_len {
            return Err(SimError::Config("the built-in scheme uses N = L".into()));
        }
        if self.rounds == 0 {
            return Err(SimError::Config("rounds must be at least 1".into()));
        }
        if let DealerPlan::Scripted(s) = &self.dealer {
            if s.len() < self.rounds as usize {
                return Err(SimError::Config(format!("dealer script has {} of {} rounds", s.len(), self.rounds)));
            }
            for (theta, seed) in s {
                if !(1..=self.params.transmitters).contains(theta) {
                    return Err(SimError::Config(format!("scripted theta {theta} out of range")));
                }
                Seed::from_values(&self.params, seed)?;
            }
        }
        if let MessagePlan::Scripted(s) = &self.messages {
            if s.len() < self.rounds as usize {
                return Err(SimError::Config(format!("message script has {} of {} rounds", s.len(), self.rounds)));
            }
            for round in s {
                if round.len() != self.params.transmitters {
                    return Err(SimError::Config("message script needs one message per transmitter".into()));
                }
                for w in round {
                    Message::from_values(&self.params, w)?;
                }
            }
        }
        Ok(())
    }
}

/// Per-transmitter message generator; the harness builds an identical copy
/// to know the ground truth.
pub struct MessageSource {
    params: SchemeParams,
    index: usize,
    round: usize,
    plan: SourcePlan,
}

enum SourcePlan {
    Random(Box<ChaCha8Rng>),
    Scripted(Vec<Vec<Vec<u32>>>),
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

impl MessageSource {
    /// Source for transmitter `index` (1-based).
    pub fn new(cfg: &SimConfig, index: usize) -> Self {
        let plan = match &cfg.messages {
            MessagePlan::Random => SourcePlan::Random(Box::new(stream_rng(cfg.seed, index as u64))),
            MessagePlan::Scripted(s) => SourcePlan::Scripted(s.clone()),
        };
        MessageSource {
            params: cfg.params,
            index,
            round: 0,
            plan,
        }
    }

    pub fn next_message(&mut self) -> Message {
        self.round += 1;
        match &mut self.plan {
            SourcePlan::Random(rng) => Message::random(&self.params, rng),
            SourcePlan::Scripted(s) => {
                Message::from_values(&self.params, &s[self.round - 1][self.index - 1]).expect("validated script")
            }
        }
    }
}

/// A frame that broke the traffic policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub from: Role,
    pub to: Role,
    pub msg_type: String,
    pub round_id: u32,
    pub reason: String,
}

/// Checks one received frame against the allowed traffic between roles.
pub fn audit_frame(from: Role, to: Role, msg: &WireMessage, params: &SchemeParams) -> Option<Violation> {
    use MsgType::*;
    let k = params.transmitters;
    let expected_len = match (from, to, msg.msg_type) {
        (Role::Dealer, Role::Transmitter(_), DealShare) => Some(params.message_len),
        (Role::Dealer, Role::Transmitter(_), DesireFlag) => Some(1),
        (Role::Dealer, Role::Transmitter(_), Shutdown) => Some(0),
        (Role::Dealer, Role::Receiver, RoundBegin | Shutdown) => Some(0),
        (Role::Transmitter(_), Role::Receiver, Signal) => Some(params.channel_uses),
        (Role::Receiver, Role::Sink, Decoded) => Some(params.message_len),
        _ => None,
    };
    let reason = match expected_len {
        None => Some(format!("{} is not allowed from {from} to {to}", msg.msg_type)),
        Some(_) if msg.sender_id != from.wire_id(k) => Some(format!(
            "sender id {} does not match {from} ({})",
            msg.sender_id,
            from.wire_id(k)
        )),
        Some(_) if msg.modulus as u32 != params.modulus.get() => Some(format!("modulus {} on the wire", msg.modulus)),
        Some(n) if msg.symbols.len() != n => {
            Some(format!("payload has {} symbols, expected {n}", msg.symbols.len()))
        }
        Some(_) if msg.msg_type == DesireFlag && msg.symbols[0] > 1 => {
            Some(format!("desire flag carries {}", msg.symbols[0]))
        }
        Some(_) => None,
    };
    reason.map(|reason| Violation {
        from,
        to,
        msg_type: msg.msg_type.name().into(),
        round_id: msg.round_id,
        reason,
    })
}

/// An inbound link that audits every frame it delivers.
struct Inbox {
    rx: LinkRx,
    from: Role,
    to: Role,
    params: SchemeParams,
    violations: Vec<Violation>,
}

impl Inbox {
    fn recv(&mut self, clock: &mut u64) -> Result<WireMessage, LinkError> {
        let m = self.rx.recv()?;
        *clock += 1;
        if let Some(v) = audit_frame(self.from, self.to, &m, &self.params) {
            self.violations.push(v);
        }
        Ok(m)
    }
}

fn send(tx: &mut LinkTx, clock: &mut u64, msg: WireMessage) -> Result<(), LinkError> {
    *clock += 1;
    tx.send(&msg)
}

struct DealerOutcome {
    thetas: Vec<usize>,
    clocks: Vec<u64>,
    error: Option<String>,
}

fn run_dealer(cfg: &SimConfig, mut to_tx: Vec<LinkTx>, mut to_rx: LinkTx) -> DealerOutcome {
    let p = cfg.params.modulus;
    let k = cfg.params.transmitters;
    let id = Role::Dealer.wire_id(k);
    let mut out = DealerOutcome {
        thetas: Vec::new(),
        clocks: Vec::new(),
        error: None,
    };
    let mut clock = 0u64;
    let mut random = Dealer::new(cfg.params, stream_rng(cfg.seed, 0));
    let mut last_round = cfg.rounds;
    let mut deal_round = |r: u32, clock: &mut u64, out: &mut DealerOutcome| -> Result<bool, SimError> {
        let (theta, seed) = match &cfg.dealer {
            DealerPlan::Random => random.draw(),
            DealerPlan::Scripted(s) => {
                let (t, a) = &s[r as usize - 1];
                (*t, Seed::from_values(&cfg.params, a)?)
            }
        };
        out.thetas.push(theta);
        send(&mut to_rx, clock, WireMessage::new(MsgType::RoundBegin, r, id, p, &[]))?;
        let shares = protocol::deal(&cfg.params, &seed)?;
        let abort = cfg.shutdown_in_round == Some(r);
        let targets = if abort { 1 } else { k };
        for (i, tx) in to_tx.iter_mut().enumerate().take(targets) {
            send(tx, clock, WireMessage::from_vector(MsgType::DealShare, r, id, &shares[i].z))?;
            let flag = DesireFlag::for_round(k, theta)[i].is_desired as u32;
            send(tx, clock, WireMessage::new(MsgType::DesireFlag, r, id, p, &[flag]))?;
        }
        out.clocks.push(*clock);
        Ok(abort)
    };
    for r in 1..=cfg.rounds {
        match deal_round(r, &mut clock, &mut out) {
            Ok(false) => {}
            Ok(true) => {
                last_round = r;
                break;
            }
            Err(e) => {
                out.error = Some(e.to_string());
                last_round = r;
                break;
            }
        }
    }
    let bye = WireMessage::new(MsgType::Shutdown, last_round, id, p, &[]);
    for tx in to_tx.iter_mut() {
        let _ = send(tx, &mut clock, bye.clone());
    }
    let _ = send(&mut to_rx, &mut clock, bye);
    out
}

struct TransmitterOutcome {
    /// `(round, clock at SIGNAL)`.
    signals: Vec<(u32, u64)>,
    violations: Vec<Violation>,
    error: Option<String>,
}

fn run_transmitter(cfg: &SimConfig, index: usize, mut inbox: Inbox, mut to_rx: LinkTx) -> TransmitterOutcome {
    let id = Role::Transmitter(index).wire_id(cfg.params.transmitters);
    let mut source = MessageSource::new(cfg, index);
    let mut clock = 0u64;
    let mut signals = Vec::new();
    let mut step = |clock: &mut u64| -> Result<bool, SimError> {
        let m = inbox.recv(clock)?;
        match m.msg_type {
            MsgType::Shutdown => Ok(false),
            MsgType::DealShare => {
                let z = m.vector().map_err(LinkError::from)?;
                let f = inbox.recv(clock)?;
                if f.msg_type != MsgType::DesireFlag || f.round_id != m.round_id {
                    return Err(SimError::Actor {
                        actor: Role::Transmitter(index),
                        cause: format!("expected DESIRE_FLAG for round {}, got {} for {}", m.round_id, f.msg_type, f.round_id),
                    });
                }
                let flag = DesireFlag {
                    is_desired: f.symbols.first() == Some(&1),
                };
                let w = source.next_message();
                let x = protocol::encode(index, flag, &w, &Share { owner: index, z })?;
                send(&mut to_rx, clock, WireMessage::from_vector(MsgType::Signal, m.round_id, id, &x))?;
                signals.push((m.round_id, *clock));
                Ok(true)
            }
            other => Err(SimError::Actor {
                actor: Role::Transmitter(index),
                cause: format!("unexpected {other} from dealer"),
            }),
        }
    };
    let error = loop {
        match step(&mut clock) {
            Ok(true) => {}
            Ok(false) => break None,
            Err(e) => break Some(e.to_string()),
        }
    };
    TransmitterOutcome {
        signals,
        violations: inbox.violations,
        error,
    }
}

struct ReceiverRecord {
    round_id: u32,
    transcript: Vec<Vec<u32>>,
    decoded: Option<Vec<u32>>,
    failure: Option<String>,
    clock: u64,
}

struct ReceiverOutcome {
    records: Vec<ReceiverRecord>,
    violations: Vec<Violation>,
    error: Option<String>,
}

fn run_receiver(cfg: &SimConfig, mut from_dealer: Inbox, mut from_tx: Vec<Inbox>, mut to_sink: LinkTx) -> ReceiverOutcome {
    let id = Role::Receiver.wire_id(cfg.params.transmitters);
    let mut clock = 0u64;
    let mut records = Vec::new();
    let error = loop {
        let m = match from_dealer.recv(&mut clock) {
            Ok(m) => m,
            Err(e) => break Some(format!("dealer link: {e}")),
        };
        match m.msg_type {
            MsgType::Shutdown => break None,
            MsgType::RoundBegin => {}
            other => break Some(format!("unexpected {other} from dealer")),
        }
        let r = m.round_id;
        let mut signals = Vec::new();
        let mut failure = None;
        for (i, inbox) in from_tx.iter_mut().enumerate() {
            match inbox.recv(&mut clock) {
                Ok(s) if s.msg_type == MsgType::Signal && s.round_id == r => match s.vector() {
                    Ok(v) => signals.push(v),
                    Err(e) => {
                        failure = Some(format!("transmitter {}: {e}", i + 1));
                        break;
                    }
                },
                Ok(s) => {
                    failure = Some(format!("transmitter {}: unexpected {} for round {}", i + 1, s.msg_type, s.round_id));
                    break;
                }
                Err(e) => {
                    failure = Some(format!("transmitter {}: {e}", i + 1));
                    break;
                }
            }
        }
        let transcript: Vec<Vec<u32>> = signals.iter().map(SymbolVector::values).collect();
        let decoded = match failure {
            Some(_) => None,
            None => match Transcript::new(signals).and_then(|y| protocol::decode(&y)) {
                Ok(w) => Some(w.w),
                Err(e) => {
                    failure = Some(e.to_string());
                    None
                }
            },
        };
        if let Some(w) = &decoded {
            if let Err(e) = send(&mut to_sink, &mut clock, WireMessage::from_vector(MsgType::Decoded, r, id, w)) {
                failure = Some(format!("sink: {e}"));
            }
        }
        records.push(ReceiverRecord {
            round_id: r,
            transcript,
            decoded: decoded.map(|w| w.values()),
            failure,
            clock,
        });
    };
    let mut violations = from_dealer.violations;
    for inbox in from_tx {
        violations.extend(inbox.violations);
    }
    ReceiverOutcome {
        records,
        violations,
        error,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundStatus {
    Completed,
    Failed,
}

/// Logical clocks of each actor at its last action in the round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clocks {
    pub dealer: Option<u64>,
    pub transmitters: Vec<Option<u64>>,
    pub receiver: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLog {
    pub round_id: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<usize>,
    pub status: RoundStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub transcript: Vec<Vec<u32>>,
    pub decoded: Option<Vec<u32>>,
    pub clocks: Clocks,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub logs: Vec<RoundLog>,
    pub completed: u32,
    pub correct: u32,
    pub failed: u32,
    pub violations: Vec<Violation>,
    /// Actor-level errors, e.g. a transport failure.
    pub actor_errors: Vec<String>,
}

impl SimReport {
    pub fn all_correct(&self) -> bool {
        self.failed == 0 && self.correct == self.completed && self.actor_errors.is_empty()
    }
}

/// Runs `cfg.rounds` rounds over the configured transport.
pub fn run_simulation(cfg: &SimConfig) -> Result<SimReport, SimError> {
    cfg.validate()?;
    let k = cfg.params.transmitters;
    let t = cfg.transport;
    let inbox = |rx, from, to| Inbox {
        rx,
        from,
        to,
        params: cfg.params,
        violations: Vec::new(),
    };

    let mut dealer_tx = Vec::new();
    let mut tx_inboxes = Vec::new();
    for i in 1..=k {
        let (tx, rx) = link(t)?;
        dealer_tx.push(tx);
        tx_inboxes.push(inbox(rx, Role::Dealer, Role::Transmitter(i)));
    }
    let (dealer_rx_tx, rx) = link(t)?;
    let receiver_from_dealer = inbox(rx, Role::Dealer, Role::Receiver);
    let mut signal_tx = Vec::new();
    let mut receiver_from_tx = Vec::new();
    for i in 1..=k {
        let (tx, rx) = link(t)?;
        signal_tx.push(tx);
        receiver_from_tx.push(inbox(rx, Role::Transmitter(i), Role::Receiver));
    }
    let (sink_tx, sink_rx) = link(t)?;
    let mut sink = inbox(sink_rx, Role::Receiver, Role::Sink);

    let (dealer, transmitters, receiver, decoded_frames) = thread::scope(|s| {
        let dealer = s.spawn(|| run_dealer(cfg, dealer_tx, dealer_rx_tx));
        let handles: Vec<_> = tx_inboxes
            .into_iter()
            .zip(signal_tx)
            .enumerate()
            .map(|(i, (ib, tx))| s.spawn(move || run_transmitter(cfg, i + 1, ib, tx)))
            .collect();
        let receiver = s.spawn(|| run_receiver(cfg, receiver_from_dealer, receiver_from_tx, sink_tx));
        let mut frames = Vec::new();
        let mut sink_clock = 0;
        while let Ok(m) = sink.recv(&mut sink_clock) {
            frames.push(m);
        }
        let transmitters: Vec<TransmitterOutcome> =
            handles.into_iter().map(|h| h.join().expect("transmitter thread")).collect();
        (
            dealer.join().expect("dealer thread"),
            transmitters,
            receiver.join().expect("receiver thread"),
            frames,
        )
    });

    let mut violations = receiver.violations;
    violations.extend(sink.violations);
    let mut actor_errors = Vec::new();
    if let Some(e) = dealer.error {
        actor_errors.push(format!("dealer: {e}"));
    }
    if let Some(e) = &receiver.error {
        actor_errors.push(format!("receiver: {e}"));
    }
    for (i, t) in transmitters.iter().enumerate() {
        violations.extend(t.violations.iter().cloned());
        if let Some(e) = &t.error {
            actor_errors.push(format!("transmitter {}: {e}", i + 1));
        }
    }
    violations.sort_by_key(|v| (v.round_id, v.from, v.to));

    let mut sources: Vec<MessageSource> = (1..=k).map(|i| MessageSource::new(cfg, i)).collect();
    let mut logs = Vec::with_capacity(receiver.records.len());
    let (mut completed, mut correct, mut failed) = (0, 0, 0);
    for rec in receiver.records {
        let r = rec.round_id as usize;
        let theta = dealer.thetas.get(r - 1).copied();
        let clock_of = |t: &TransmitterOutcome| t.signals.iter().find(|(round, _)| *round == rec.round_id).map(|&(_, c)| c);
        let delivered = decoded_frames
            .iter()
            .find(|m| m.round_id == rec.round_id)
            .map(|m| m.symbols.iter().map(|&s| s as u32).collect::<Vec<u32>>());
        let mut failure = rec.failure;
        if failure.is_none() && delivered != rec.decoded {
            failure = Some("decoded frame lost before the sink".into());
        }
        let status = if failure.is_none() {
            completed += 1;
            let messages: Vec<Message> = sources.iter_mut().map(MessageSource::next_message).collect();
            if let (Some(t), Some(d)) = (theta, &delivered) {
                if messages[t - 1].w.values() == *d {
                    correct += 1;
                }
            }
            RoundStatus::Completed
        } else {
            failed += 1;
            RoundStatus::Failed
        };
        logs.push(RoundLog {
            round_id: rec.round_id,
            theta: if cfg.audit { theta } else { None },
            status,
            failure,
            transcript: rec.transcript,
            decoded: delivered,
            clocks: Clocks {
                dealer: dealer.clocks.get(r - 1).copied(),
                transmitters: transmitters.iter().map(clock_of).collect(),
                receiver: rec.clock,
            },
        });
    }
    Ok(SimReport {
        logs,
        completed,
        correct,
        failed,
        violations,
        actor_errors,
    })
}

/// One JSON object per line.
pub fn write_round_logs<W: Write>(logs: &[RoundLog], mut w: W) -> std::io::Result<()> {
    for log in logs {
        serde_json::to_writer(&mut w, log)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn round_logs_jsonl(logs: &[RoundLog]) -> String {
    let mut buf = Vec::new();
    write_round_logs(logs, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("json is utf-8")
}

pub fn read_round_logs(text: &str) -> Result<Vec<RoundLog>, serde_json::Error> {
    text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect()
}

/// What the receiver legitimately observes in one completed round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReceiverView {
    pub round_id: u32,
    pub transcript: Vec<Vec<u32>>,
    pub decoded: Vec<u32>,
}

/// Receiver-side dataset of completed rounds. Refuses logs recorded in audit
/// mode.
pub fn receiver_view_dump(logs: &[RoundLog]) -> Result<Vec<ReceiverView>, SimError> {
    if logs.iter().any(|l| l.theta.is_some()) {
        return Err(SimError::AuditLogs);
    }
    Ok(logs
        .iter()
        .filter(|l| l.status == RoundStatus::Completed)
        .filter_map(|l| {
            Some(ReceiverView {
                round_id: l.round_id,
                transcript: l.transcript.clone(),
                decoded: l.decoded.clone()?,
            })
        })
        .collect())
}

/// Significance of the uniformity screen.
pub const CHI_SQUARE_ALPHA: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareScreen {
    pub samples: u64,
    pub cells: u64,
    pub statistic: f64,
    pub degrees_of_freedom: u64,
    /// Upper `1 - alpha` quantile of the chi-square distribution.
    pub threshold: f64,
    pub pass: bool,
}

/// Pearson goodness-of-fit of observed transcripts against the uniform
/// distribution over all `p^(K N)` tuples. A coarse screen only.
pub fn chi_square_uniform(views: &[ReceiverView], params: &SchemeParams) -> Result<ChiSquareScreen, SimError> {
    let p = params.modulus.get() as u64;
    let symbols = params.transmitters * params.channel_uses;
    let cells = p
        .checked_pow(symbols as u32)
        .filter(|&c| (2..=1 << 20).contains(&c))
        .ok_or_else(|| SimError::Config("too many transcript cells for a chi-square screen".into()))?;
    let mut counts = vec![0u64; cells as usize];
    for v in views {
        let flat: Vec<u32> = v.transcript.iter().flatten().copied().collect();
        if flat.len() != symbols || flat.iter().any(|&s| s as u64 >= p) {
            return Err(SimError::Config(format!("round {} has a malformed transcript", v.round_id)));
        }
        let idx = flat.iter().rev().fold(0u64, |acc, &s| acc * p + s as u64);
        counts[idx as usize] += 1;
    }
    let n = views.len() as u64;
    let dof = cells - 1;
    let threshold = ChiSquared::new(dof as f64)
        .map_err(|e| SimError::Config(e.to_string()))?
        .inverse_cdf(1.0 - CHI_SQUARE_ALPHA);
    let expected = n as f64 / cells as f64;
    let statistic = if n == 0 {
        0.0
    } else {
        counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum()
    };
    Ok(ChiSquareScreen {
        samples: n,
        cells,
        statistic,
        degrees_of_freedom: dof,
        threshold,
        pass: statistic <= threshold,
    })
}
