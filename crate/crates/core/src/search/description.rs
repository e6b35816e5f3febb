//! Serializable scheme descriptions: lookup tables (general model) or
//! coefficient matrices (linear model), compiled to flat tables for
//! evaluation.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldError, Matrix, Prime, SymbolVector};
use crate::protocol::{ProtocolError, SchemeParams};
use crate::scheme::Scheme;

/// Largest table a description may compile to.
const MAX_TABLE: u64 = 1 << 22;

#[derive(Debug, Error)]
pub enum SchemeError {
    #[error(transparent)]
    Params(#[from] ProtocolError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("malformed scheme: {0}")]
    Shape(String),
    #[error("scheme tables would need more than {MAX_TABLE} entries")]
    TooLarge,
    #[error("cannot parse scheme file: {0}")]
    Parse(String),
    #[error("cannot read scheme file {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// Plain coefficient matrix as stored in scheme files.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CoeffMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<u32>,
}

impl CoeffMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CoeffMatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn from_matrix(m: &Matrix) -> Self {
        CoeffMatrix {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.entries(),
        }
    }

    pub fn to_matrix(&self, p: Prime) -> Result<Matrix, FieldError> {
        Matrix::new(p, self.rows, self.cols, &self.entries)
    }

    fn expect_shape(&self, what: &str, rows: usize, cols: usize) -> Result<(), SchemeError> {
        if self.rows != rows || self.cols != cols {
            return Err(SchemeError::Shape(format!(
                "{what} is {}x{}, expected {rows}x{cols}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }
}

/// Dealer map from the seed to one transmitter's share.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ShareMap {
    /// `table[seed] = share`, both packed.
    Table { table: Vec<u32> },
    /// `share = matrix * seed`, `matrix` is `share_dim x seed_dim`.
    Linear { matrix: CoeffMatrix },
}

/// One transmitter's signal map for one value of its desire flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Encoder {
    /// `table[w + p^L * z] = x`, all packed.
    Table { table: Vec<u32> },
    /// `x = v * w + u * z (+ offset)`; `v` is `N x L`, `u` is `N x share_dim`.
    Linear {
        v: CoeffMatrix,
        u: CoeffMatrix,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<Vec<u32>>,
    },
}

/// Receiver map from the transcript to the message.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decoder {
    /// `table[y] = w` with `y = Σ_i x_i p^(N i)`.
    Table { table: Vec<u32> },
    /// `w = Σ_i filters[i] * x_i`, each filter `L x N`.
    Linear { filters: Vec<CoeffMatrix> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    General,
    Linear,
    /// Table decoder over a linear front end.
    Hybrid,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SchemeDescription {
    pub name: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
    pub params: SchemeParams,
    pub seed_dim: usize,
    pub share_dim: usize,
    pub share_maps: Vec<ShareMap>,
    pub desired: Vec<Encoder>,
    pub undesired: Vec<Encoder>,
    pub decoder: Decoder,
}

impl SchemeDescription {
    /// The built-in scheme written in the linear model.
    pub fn builtin_linear(params: SchemeParams) -> Self {
        let k = params.transmitters;
        let l = params.message_len;
        let minus_one = params.modulus.get() - 1;
        let s = (k - 1) * l;
        let share_maps = (0..k)
            .map(|i| {
                let mut m = CoeffMatrix::zeros(l, s);
                for r in 0..l {
                    if i + 1 < k {
                        m.entries[r * s + i * l + r] = 1;
                    } else {
                        for j in 0..k - 1 {
                            m.entries[r * s + j * l + r] = minus_one;
                        }
                    }
                }
                ShareMap::Linear { matrix: m }
            })
            .collect();
        let desired = vec![
            Encoder::Linear {
                v: CoeffMatrix::identity(l),
                u: CoeffMatrix::identity(l),
                offset: None,
            };
            k
        ];
        let undesired = vec![
            Encoder::Linear {
                v: CoeffMatrix::zeros(l, l),
                u: CoeffMatrix::identity(l),
                offset: None,
            };
            k
        ];
        SchemeDescription {
            name: "builtin".into(),
            note: String::new(),
            params: SchemeParams {
                channel_uses: l,
                ..params
            },
            seed_dim: s,
            share_dim: l,
            share_maps,
            desired,
            undesired,
            decoder: Decoder::Linear {
                filters: vec![CoeffMatrix::identity(l); k],
            },
        }
    }

    pub fn model(&self) -> Model {
        let linear_front = self
            .share_maps
            .iter()
            .all(|m| matches!(m, ShareMap::Linear { .. }))
            && self
                .desired
                .iter()
                .chain(&self.undesired)
                .all(|e| matches!(e, Encoder::Linear { .. }));
        match (&self.decoder, linear_front) {
            (Decoder::Linear { .. }, true) => Model::Linear,
            (Decoder::Table { .. }, true) => Model::Hybrid,
            _ => Model::General,
        }
    }

    pub fn from_toml_str(s: &str) -> Result<Self, SchemeError> {
        toml::from_str(s).map_err(|e| SchemeError::Parse(e.to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("descriptions serialize")
    }

    pub fn load(path: &Path) -> Result<Self, SchemeError> {
        let text = std::fs::read_to_string(path).map_err(|source| SchemeError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn compile(&self) -> Result<CompiledScheme, SchemeError> {
        let params = self.params;
        params.validate()?;
        let p = params.modulus;
        let k = params.transmitters;
        let (l, n) = (params.message_len, params.channel_uses);
        let size = |symbols: usize| -> Result<u64, SchemeError> {
            p.pow(symbols)
                .filter(|&v| v <= MAX_TABLE)
                .ok_or(SchemeError::TooLarge)
        };
        let seeds = size(self.seed_dim)?;
        let shares = size(self.share_dim)?;
        let enc_in = size(l + self.share_dim)?;
        let signals = size(n)?;
        let transcripts = size(k * n)?;
        let messages = size(l)?;

        for (what, len) in [
            ("share_maps", self.share_maps.len()),
            ("desired", self.desired.len()),
            ("undesired", self.undesired.len()),
        ] {
            if len != k {
                return Err(SchemeError::Shape(format!("{what} has {len} entries, expected {k}")));
            }
        }

        let share_tables = self
            .share_maps
            .iter()
            .map(|m| compile_share_map(m, p, self.seed_dim, self.share_dim, seeds, shares))
            .collect::<Result<Vec<_>, _>>()?;
        let compile_enc = |e: &Encoder| {
            compile_encoder(e, p, l, n, self.share_dim, enc_in, signals)
        };
        let desired = self.desired.iter().map(compile_enc).collect::<Result<Vec<_>, _>>()?;
        let undesired = self
            .undesired
            .iter()
            .map(compile_enc)
            .collect::<Result<Vec<_>, _>>()?;
        let decoder = compile_decoder(&self.decoder, p, k, l, n, transcripts, messages)?;

        Ok(CompiledScheme {
            name: self.name.clone(),
            params,
            seed_dim: self.seed_dim,
            share_dim: self.share_dim,
            share_tables,
            desired,
            undesired,
            decoder,
        })
    }
}

fn check_table(table: &[u32], what: &str, len: u64, range: u64) -> Result<Vec<u32>, SchemeError> {
    if table.len() as u64 != len {
        return Err(SchemeError::Shape(format!(
            "{what} table has {} entries, expected {len}",
            table.len()
        )));
    }
    if let Some(&bad) = table.iter().find(|&&v| v as u64 >= range) {
        return Err(SchemeError::Shape(format!(
            "{what} table value {bad} outside 0..{range}"
        )));
    }
    Ok(table.to_vec())
}

pub(crate) fn linear_share_table(m: &Matrix, seed_dim: usize, seeds: u64) -> Vec<u32> {
    let p = m.modulus();
    let mut out = vec![0u8; m.rows()];
    (0..seeds)
        .map(|seed| {
            let s = SymbolVector::unpack(p, seed_dim, seed);
            m.apply_residues(s.residues(), &mut out);
            pack_residues(p, &out) as u32
        })
        .collect()
}

fn compile_share_map(
    m: &ShareMap,
    p: Prime,
    seed_dim: usize,
    share_dim: usize,
    seeds: u64,
    shares: u64,
) -> Result<Vec<u32>, SchemeError> {
    match m {
        ShareMap::Table { table } => check_table(table, "share map", seeds, shares),
        ShareMap::Linear { matrix } => {
            matrix.expect_shape("share matrix", share_dim, seed_dim)?;
            Ok(linear_share_table(&matrix.to_matrix(p)?, seed_dim, seeds))
        }
    }
}

pub(crate) fn pack_residues(p: Prime, digits: &[u8]) -> u64 {
    let base = p.get() as u64;
    digits.iter().rev().fold(0, |acc, &d| acc * base + d as u64)
}

pub(crate) fn linear_encoder_table(
    v: &Matrix,
    u: &Matrix,
    offset: Option<&[u8]>,
    message_len: usize,
    share_dim: usize,
) -> Vec<u32> {
    let p = v.modulus();
    let n = v.rows();
    let messages = p.pow(message_len).expect("small");
    let shares = p.pow(share_dim).expect("small");
    let mut vw = vec![0u8; n];
    let mut uz = vec![0u8; n];
    let mut table = vec![0u32; (messages * shares) as usize];
    for z in 0..shares {
        let zs = SymbolVector::unpack(p, share_dim, z);
        u.apply_residues(zs.residues(), &mut uz);
        for w in 0..messages {
            let ws = SymbolVector::unpack(p, message_len, w);
            v.apply_residues(ws.residues(), &mut vw);
            let x: Vec<u8> = (0..n)
                .map(|r| {
                    let c = offset.map_or(0, |o| o[r]);
                    p.add(p.add(vw[r], uz[r]), c)
                })
                .collect();
            table[(w + messages * z) as usize] = pack_residues(p, &x) as u32;
        }
    }
    table
}

fn compile_encoder(
    e: &Encoder,
    p: Prime,
    l: usize,
    n: usize,
    share_dim: usize,
    inputs: u64,
    signals: u64,
) -> Result<Vec<u32>, SchemeError> {
    match e {
        Encoder::Table { table } => check_table(table, "encoder", inputs, signals),
        Encoder::Linear { v, u, offset } => {
            v.expect_shape("encoder V", n, l)?;
            u.expect_shape("encoder U", n, share_dim)?;
            let offset = match offset {
                Some(o) if o.len() != n => {
                    return Err(SchemeError::Shape(format!(
                        "encoder offset has {} entries, expected {n}",
                        o.len()
                    )))
                }
                Some(o) => Some(SymbolVector::new(p, o)?.residues().to_vec()),
                None => None,
            };
            Ok(linear_encoder_table(
                &v.to_matrix(p)?,
                &u.to_matrix(p)?,
                offset.as_deref(),
                l,
                share_dim,
            ))
        }
    }
}

pub(crate) fn linear_decoder_table(filters: &[Matrix], channel_uses: usize) -> Vec<u32> {
    let p = filters[0].modulus();
    let l = filters[0].rows();
    let k = filters.len();
    let transcripts = p.pow(k * channel_uses).expect("small");
    let mut part = vec![0u8; l];
    (0..transcripts)
        .map(|y| {
            let ys = SymbolVector::unpack(p, k * channel_uses, y);
            let mut acc = vec![0u8; l];
            for (i, g) in filters.iter().enumerate() {
                g.apply_residues(&ys.residues()[i * channel_uses..(i + 1) * channel_uses], &mut part);
                for (a, &b) in acc.iter_mut().zip(&part) {
                    *a = p.add(*a, b);
                }
            }
            pack_residues(p, &acc) as u32
        })
        .collect()
}

fn compile_decoder(
    d: &Decoder,
    p: Prime,
    k: usize,
    l: usize,
    n: usize,
    transcripts: u64,
    messages: u64,
) -> Result<Vec<u32>, SchemeError> {
    match d {
        Decoder::Table { table } => check_table(table, "decoder", transcripts, messages),
        Decoder::Linear { filters } => {
            if filters.len() != k {
                return Err(SchemeError::Shape(format!(
                    "decoder has {} filters, expected {k}",
                    filters.len()
                )));
            }
            let ms = filters
                .iter()
                .map(|g| {
                    g.expect_shape("decoder filter", l, n)?;
                    Ok(g.to_matrix(p)?)
                })
                .collect::<Result<Vec<_>, SchemeError>>()?;
            Ok(linear_decoder_table(&ms, n))
        }
    }
}

/// Flat lookup tables for every map of a scheme.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledScheme {
    pub(crate) name: String,
    pub(crate) params: SchemeParams,
    pub(crate) seed_dim: usize,
    pub(crate) share_dim: usize,
    pub(crate) share_tables: Vec<Vec<u32>>,
    pub(crate) desired: Vec<Vec<u32>>,
    pub(crate) undesired: Vec<Vec<u32>>,
    pub(crate) decoder: Vec<u32>,
}

impl CompiledScheme {
    pub fn decoder_table(&self) -> &[u32] {
        &self.decoder
    }
}

impl Scheme for CompiledScheme {
    fn params(&self) -> SchemeParams {
        self.params
    }

    fn seed_dim(&self) -> usize {
        self.seed_dim
    }

    fn share_dim(&self) -> usize {
        self.share_dim
    }

    fn deal_packed(&self, seed: u64, shares: &mut [u64]) {
        for (out, table) in shares.iter_mut().zip(&self.share_tables) {
            *out = table[seed as usize] as u64;
        }
    }

    fn encode_packed(&self, position: usize, desired: bool, message: u64, share: u64) -> u64 {
        let table = if desired {
            &self.desired[position]
        } else {
            &self.undesired[position]
        };
        let messages = self.params.modulus.pow(self.params.message_len).expect("small");
        table[(message + messages * share) as usize] as u64
    }

    fn decode_packed(&self, signals: &[u64]) -> u64 {
        let base = self.params.modulus.pow(self.params.channel_uses).expect("small");
        let y = signals.iter().rev().fold(0u64, |acc, &x| acc * base + x);
        self.decoder[y as usize] as u64
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}
