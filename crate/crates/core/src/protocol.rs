//! The rate-1/K anonymous scheme.
//!
//! A trusted dealer draws `K-1` uniform symbols per message slot and hands
//! transmitter `i < K` the symbol `a_i`, transmitter `K` the negated sum of
//! all of them, so the `K` shares always add to zero. Over F_2 the negation
//! is the identity. Every transmitter sends its share, the desired one adds its message,
//! and the receiver adds up the `K` signals. Vector messages run one scalar
//! instance per slot with fresh seed symbols.

use std::fmt;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{self, FieldElement, FieldError, Prime, SymbolVector};
use crate::info::{self, EntropyValue, InfoError, SampleSpace};
use crate::scheme::Scheme;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("seed has {got} symbols, expected {expected}")]
    SeedLength { expected: usize, got: usize },
    #[error("share belongs to transmitter {owner}, not {index}")]
    OwnerMismatch { owner: usize, index: usize },
    #[error("desired index {theta} outside 1..={k}")]
    ThetaOutOfRange { theta: usize, k: usize },
    #[error("expected {expected} messages, got {got}")]
    MessageCount { expected: usize, got: usize },
    #[error("malformed transcript: {0}")]
    MalformedTranscript(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Info(#[from] InfoError),
}

/// `(K, p, L, N)`: transmitters, field, message symbols, channel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeParams {
    pub transmitters: usize,
    pub modulus: Prime,
    pub message_len: usize,
    pub channel_uses: usize,
}

impl SchemeParams {
    /// Parameters of the built-in scheme (`N = L`).
    pub fn new(transmitters: usize, modulus: u32, message_len: usize) -> Result<Self, ProtocolError> {
        Self::with_channel_uses(transmitters, modulus, message_len, message_len)
    }

    pub fn with_channel_uses(
        transmitters: usize,
        modulus: u32,
        message_len: usize,
        channel_uses: usize,
    ) -> Result<Self, ProtocolError> {
        let params = SchemeParams {
            transmitters,
            modulus: Prime::new(modulus)?,
            message_len,
            channel_uses,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        if self.transmitters < 2 {
            return Err(ProtocolError::InvalidParams(format!(
                "K = {} but at least 2 transmitters are required",
                self.transmitters
            )));
        }
        if self.message_len == 0 || self.channel_uses == 0 {
            return Err(ProtocolError::InvalidParams(
                "message length and channel uses must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// `L / (K N)`.
    pub fn rate(&self) -> Ratio<u64> {
        Ratio::new(
            self.message_len as u64,
            (self.transmitters * self.channel_uses) as u64,
        )
    }

    pub fn k(&self) -> usize {
        self.transmitters
    }
}

impl fmt::Display for SchemeParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "K={} p={} L={} N={}",
            self.transmitters, self.modulus, self.message_len, self.channel_uses
        )
    }
}

/// The dealer's uniform symbols, `a_1 .. a_{K-1}` each of length `L`, laid
/// out transmitter-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    pub a: SymbolVector,
}

impl Seed {
    pub fn new(params: &SchemeParams, a: SymbolVector) -> Result<Self, ProtocolError> {
        let expected = seed_len(params);
        if a.len() != expected {
            return Err(ProtocolError::SeedLength {
                expected,
                got: a.len(),
            });
        }
        if a.modulus() != params.modulus {
            return Err(FieldError::ModulusMismatch {
                left: a.modulus().get(),
                right: params.modulus.get(),
            }
            .into());
        }
        Ok(Seed { a })
    }

    pub fn from_values(params: &SchemeParams, values: &[u32]) -> Result<Self, ProtocolError> {
        Self::new(params, SymbolVector::new(params.modulus, values)?)
    }

    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Self {
        let values: Vec<u32> = (0..seed_len(params))
            .map(|_| rng.random_range(0..params.modulus.get()))
            .collect();
        Seed {
            a: SymbolVector::new(params.modulus, &values).expect("residues in range"),
        }
    }
}

pub fn seed_len(params: &SchemeParams) -> usize {
    (params.transmitters - 1) * params.message_len
}

/// Transmitter `owner`'s correlated randomness `Z_owner` (1-based owner).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Share {
    pub owner: usize,
    pub z: SymbolVector,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub w: SymbolVector,
}

impl Message {
    pub fn from_values(params: &SchemeParams, values: &[u32]) -> Result<Self, ProtocolError> {
        let w = SymbolVector::new(params.modulus, values)?;
        if w.len() != params.message_len {
            return Err(FieldError::LengthMismatch {
                left: w.len(),
                right: params.message_len,
            }
            .into());
        }
        Ok(Message { w })
    }

    pub fn zero(params: &SchemeParams) -> Self {
        Message {
            w: SymbolVector::zeros(params.modulus, params.message_len),
        }
    }

    pub fn random<R: Rng + ?Sized>(params: &SchemeParams, rng: &mut R) -> Self {
        let values: Vec<u32> = (0..params.message_len)
            .map(|_| rng.random_range(0..params.modulus.get()))
            .collect();
        Message::from_values(params, &values).expect("residues in range")
    }
}

/// All a transmitter learns about the desired index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DesireFlag {
    pub is_desired: bool,
}

impl DesireFlag {
    /// Flags for a round where `theta` (1-based) is desired.
    pub fn for_round(k: usize, theta: usize) -> Vec<DesireFlag> {
        (1..=k)
            .map(|i| DesireFlag {
                is_desired: i == theta,
            })
            .collect()
    }
}

/// The receiver's observation: one signal per transmitter, in index order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    signals: Vec<SymbolVector>,
}

impl Transcript {
    pub fn new(signals: Vec<SymbolVector>) -> Result<Self, ProtocolError> {
        let Some(first) = signals.first() else {
            return Err(ProtocolError::MalformedTranscript("no signals".into()));
        };
        for (i, s) in signals.iter().enumerate() {
            if s.len() != first.len() {
                return Err(ProtocolError::MalformedTranscript(format!(
                    "signal {} has length {}, expected {}",
                    i + 1,
                    s.len(),
                    first.len()
                )));
            }
            if s.modulus() != first.modulus() {
                return Err(ProtocolError::MalformedTranscript(format!(
                    "signal {} is over F_{}, expected F_{}",
                    i + 1,
                    s.modulus(),
                    first.modulus()
                )));
            }
        }
        Ok(Transcript { signals })
    }

    pub fn signals(&self) -> &[SymbolVector] {
        &self.signals
    }

    pub fn into_signals(self) -> Vec<SymbolVector> {
        self.signals
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, s) in self.signals.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}")?;
        }
        f.write_str(")")
    }
}

/// Shares `Z_1 .. Z_K`: `Z_i = a_i` for `i < K`, `Z_K = -(a_1 + ... + a_{K-1})`.
pub fn deal(params: &SchemeParams, seed: &Seed) -> Result<Vec<Share>, ProtocolError> {
    let expected = seed_len(params);
    if seed.a.len() != expected {
        return Err(ProtocolError::SeedLength {
            expected,
            got: seed.a.len(),
        });
    }
    let l = params.message_len;
    let mut shares = Vec::with_capacity(params.transmitters);
    let mut last = SymbolVector::zeros(params.modulus, l);
    for i in 0..params.transmitters - 1 {
        let z = seed.a.slice(i * l, l).expect("length checked");
        let minus_one = FieldElement::new(params.modulus.get() - 1, params.modulus)?;
        last = field::vec_add(&last, &field::scale(minus_one, &z)?)?;
        shares.push(Share { owner: i + 1, z });
    }
    shares.push(Share {
        owner: params.transmitters,
        z: last,
    });
    Ok(shares)
}

/// Transmitter `index`'s signal: its share, plus its message when desired.
pub fn encode(
    index: usize,
    flag: DesireFlag,
    w: &Message,
    z: &Share,
) -> Result<SymbolVector, ProtocolError> {
    if z.owner != index {
        return Err(ProtocolError::OwnerMismatch {
            owner: z.owner,
            index,
        });
    }
    if flag.is_desired {
        Ok(field::vec_add(&z.z, &w.w)?)
    } else {
        Ok(z.z.clone())
    }
}

/// Slotwise sum of all signals. Takes no desired index.
pub fn decode(y: &Transcript) -> Result<Message, ProtocolError> {
    let mut signals = y.signals.iter();
    let first = signals
        .next()
        .ok_or_else(|| ProtocolError::MalformedTranscript("no signals".into()))?;
    let w = signals.try_fold(first.clone(), |acc, s| field::vec_add(&acc, s))?;
    Ok(Message { w })
}

/// Deal, encode and decode one round with `theta` (1-based) desired.
pub fn run_round(
    params: &SchemeParams,
    theta: usize,
    messages: &[Message],
    seed: &Seed,
) -> Result<(Transcript, Message), ProtocolError> {
    params.validate()?;
    let k = params.transmitters;
    if !(1..=k).contains(&theta) {
        return Err(ProtocolError::ThetaOutOfRange { theta, k });
    }
    if messages.len() != k {
        return Err(ProtocolError::MessageCount {
            expected: k,
            got: messages.len(),
        });
    }
    let shares = deal(params, seed)?;
    let flags = DesireFlag::for_round(k, theta);
    let signals = shares
        .iter()
        .zip(&flags)
        .zip(messages)
        .map(|((z, &flag), w)| encode(z.owner, flag, w, z))
        .collect::<Result<Vec<_>, _>>()?;
    let transcript = Transcript::new(signals)?;
    let decoded = decode(&transcript)?;
    Ok((transcript, decoded))
}

/// Rate and randomness sizes of a scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    #[serde(serialize_with = "serialize_rational")]
    pub rate: Ratio<u64>,
    /// `H(Z_1) / L`.
    pub rho: EntropyValue,
    /// `H(Z_1, ..., Z_K) / L`.
    pub eta: EntropyValue,
}

fn serialize_rational<S: serde::Serializer>(r: &Ratio<u64>, s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeStruct;
    let mut st = s.serialize_struct("Rational", 2)?;
    st.serialize_field("value", &info::ratio_string(*r))?;
    st.serialize_field("units", "rational as num/den string")?;
    st.end()
}

/// Share entropies of any scheme, enumerated over its uniform seed.
pub fn share_entropies(
    scheme: &dyn Scheme,
    max_states: u64,
) -> Result<(Vec<EntropyValue>, EntropyValue), ProtocolError> {
    let params = scheme.params();
    let k = params.transmitters;
    let p = params.modulus;
    let share_radix = p
        .pow(scheme.share_dim())
        .ok_or(InfoError::KeySpaceOverflow)?;
    let space =
        SampleSpace::new(p, scheme.seed_dim(), vec![share_radix; k]).with_max_states(max_states);
    let table = info::enumerate(&space, |seed, out| scheme.deal_packed(seed, out))?;
    let individual = (0..k)
        .map(|i| info::entropy(&table.marginal(&[i])?, p))
        .collect::<Result<Vec<_>, _>>()?;
    let joint = info::entropy(&table, p)?;
    Ok((individual, joint))
}

/// Rate and randomness sizes of the built-in scheme, with entropies computed
/// from the dealt share distribution.
pub fn metrics(params: &SchemeParams) -> Result<Metrics, ProtocolError> {
    scheme_metrics(&BuiltinScheme::new(*params)?, info::DEFAULT_MAX_STATES)
}

pub fn scheme_metrics(scheme: &dyn Scheme, max_states: u64) -> Result<Metrics, ProtocolError> {
    let params = scheme.params();
    let (individual, joint) = share_entropies(scheme, max_states)?;
    let l = params.message_len as u64;
    Ok(Metrics {
        rate: params.rate(),
        rho: individual[0].per(l),
        eta: joint.per(l),
    })
}

/// Injectable source of per-round dealer randomness.
pub struct Dealer<R> {
    params: SchemeParams,
    rng: R,
}

impl<R: Rng> Dealer<R> {
    pub fn new(params: SchemeParams, rng: R) -> Self {
        Dealer { params, rng }
    }

    /// Draws the desired index (1-based) and a fresh seed.
    pub fn draw(&mut self) -> (usize, Seed) {
        let theta = self.rng.random_range(1..=self.params.transmitters);
        let seed = Seed::random(&self.params, &mut self.rng);
        (theta, seed)
    }
}

/// The built-in scheme behind the [`Scheme`] interface; every call goes
/// through [`deal`], [`encode`] and [`decode`].
#[derive(Debug, Clone, Copy)]
pub struct BuiltinScheme {
    params: SchemeParams,
}

impl BuiltinScheme {
    pub fn new(params: SchemeParams) -> Result<Self, ProtocolError> {
        params.validate()?;
        if params.channel_uses != params.message_len {
            return Err(ProtocolError::InvalidParams(format!(
                "built-in scheme uses N = L, got N = {} and L = {}",
                params.channel_uses, params.message_len
            )));
        }
        Ok(BuiltinScheme { params })
    }
}

impl Scheme for BuiltinScheme {
    fn params(&self) -> SchemeParams {
        self.params
    }

    fn seed_dim(&self) -> usize {
        seed_len(&self.params)
    }

    fn share_dim(&self) -> usize {
        self.params.message_len
    }

    fn deal_packed(&self, seed: u64, shares: &mut [u64]) {
        let seed = Seed {
            a: SymbolVector::unpack(self.params.modulus, seed_len(&self.params), seed),
        };
        let dealt = deal(&self.params, &seed).expect("seed length fixed by construction");
        for (out, s) in shares.iter_mut().zip(dealt) {
            *out = s.z.pack();
        }
    }

    fn encode_packed(&self, position: usize, desired: bool, message: u64, share: u64) -> u64 {
        let l = self.params.message_len;
        let p = self.params.modulus;
        let w = Message {
            w: SymbolVector::unpack(p, l, message),
        };
        let z = Share {
            owner: position + 1,
            z: SymbolVector::unpack(p, l, share),
        };
        encode(position + 1, DesireFlag { is_desired: desired }, &w, &z)
            .expect("owner and lengths fixed by construction")
            .pack()
    }

    fn decode_packed(&self, signals: &[u64]) -> u64 {
        let p = self.params.modulus;
        let n = self.params.channel_uses;
        let y = Transcript {
            signals: signals
                .iter()
                .map(|&s| SymbolVector::unpack(p, n, s))
                .collect(),
        };
        decode(&y).expect("non-empty transcript").w.pack()
    }

    fn label(&self) -> String {
        "builtin".into()
    }
}
