//! Candidate families and their option tables.
//!
//! A candidate is a decoder, one share map per transmitter, and one desired
//! and one undesired encoder per transmitter. Every transmitter draws its
//! share map and encoders from the same option lists, so a family is fully
//! described by four lists plus the dimensions.

use serde::Serialize;

use crate::field::{Matrix, Prime};
use crate::info::SpaceSize;
use crate::protocol::SchemeParams;

use super::description::{
    linear_decoder_table, linear_encoder_table, linear_share_table, CoeffMatrix, Decoder, Encoder, Model,
    SchemeDescription, ShareMap,
};
use super::SearchError;

/// Most options any single list may hold.
const MAX_OPTIONS: u128 = 1 << 20;
/// Largest lookup table an option may have.
const MAX_TABLE: u64 = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    /// Every map is an arbitrary lookup table; shares are one symbol.
    General,
    /// Share maps, encoders and decoder filters are all coefficient matrices.
    Linear,
    /// Linear shares and encoders with affine offsets on desired encoders,
    /// arbitrary decoder table.
    Hybrid,
    /// Each share is a raw selection of `share_dim` distinct seed symbols;
    /// encoders and decoder linear.
    Uncoded { share_dim: usize },
}

impl Family {
    pub fn model(self) -> Model {
        match self {
            Family::General => Model::General,
            Family::Linear | Family::Uncoded { .. } => Model::Linear,
            Family::Hybrid => Model::Hybrid,
        }
    }

    pub fn from_model(model: Model) -> Self {
        match model {
            Model::General => Family::General,
            Model::Linear => Family::Linear,
            Model::Hybrid => Family::Hybrid,
        }
    }

    pub fn name(self) -> String {
        match self {
            Family::General => "general".into(),
            Family::Linear => "linear".into(),
            Family::Hybrid => "hybrid".into(),
            Family::Uncoded { share_dim } => format!("uncoded(d={share_dim})"),
        }
    }
}

pub(crate) struct Options<T> {
    pub tables: Vec<Vec<u32>>,
    pub descs: Vec<T>,
}

impl<T> Options<T> {
    pub fn len(&self) -> usize {
        self.tables.len()
    }
}

pub(crate) struct Space {
    pub family: Family,
    pub params: SchemeParams,
    pub seed_dim: usize,
    pub share_dim: usize,
    pub decoders: Options<Decoder>,
    pub shares: Options<ShareMap>,
    pub desired: Options<Encoder>,
    pub undesired: Options<Encoder>,
}

/// Option counts of a family, known before anything is materialized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Counts {
    pub decoders: SpaceSize,
    pub shares: SpaceSize,
    pub desired: SpaceSize,
    pub undesired: SpaceSize,
}

impl Counts {
    pub fn space(&self, k: usize) -> SpaceSize {
        let pow = |s: SpaceSize| (0..k).fold(SpaceSize(1), |acc, _| acc.times(s.0));
        pow(self.shares)
            .times(pow(self.desired).0)
            .times(pow(self.undesired).0)
            .times(self.decoders.0)
    }
}

fn refuse(reason: impl Into<String>) -> SearchError {
    SearchError::Refused(reason.into())
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    (0..r).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Exponentiation of a space size by a space size; saturates.
fn tables_count(outputs: SpaceSize, inputs: SpaceSize) -> SpaceSize {
    if inputs.0 > 64 {
        return SpaceSize(u128::MAX);
    }
    (0..inputs.0).fold(SpaceSize(1), |acc, _| acc.times(outputs.0))
}

pub(crate) fn share_dim_for(family: Family, params: &SchemeParams) -> usize {
    match family {
        Family::General | Family::Linear | Family::Hybrid => params.message_len,
        Family::Uncoded { share_dim } => share_dim,
    }
}

/// Refuses parameter sets outside the documented limits of each family.
pub(crate) fn check_limits(family: Family, params: &SchemeParams, seed_dim: usize) -> Result<(), SearchError> {
    params.validate().map_err(|e| refuse(e.to_string()))?;
    let (k, p, l, n) = (
        params.transmitters,
        params.modulus.get(),
        params.message_len,
        params.channel_uses,
    );
    match family {
        Family::General => {
            if (k, p, l, n) != (2, 2, 1, 1) || seed_dim > 2 {
                return Err(refuse(format!(
                    "general model is limited to K=2, p=2, L=N=1, seed_dim<=2 (got K={k}, p={p}, L={l}, N={n}, seed_dim={seed_dim})"
                )));
            }
        }
        Family::Linear | Family::Uncoded { .. } => {
            if k > 3 || p > 3 || l > 2 || n > 2 || seed_dim > k {
                return Err(refuse(format!(
                    "linear model is limited to K<=3, p in {{2,3}}, L,N<=2, seed_dim<=K (got K={k}, p={p}, L={l}, N={n}, seed_dim={seed_dim})"
                )));
            }
            if let Family::Uncoded { share_dim } = family {
                if share_dim == 0 || share_dim > seed_dim {
                    return Err(refuse(format!(
                        "uncoded shares select 1..=seed_dim symbols, got {share_dim} of {seed_dim}"
                    )));
                }
            }
        }
        Family::Hybrid => {
            if k > 3 || p > 3 || l != 1 || n != 1 || seed_dim > k {
                return Err(refuse(format!(
                    "hybrid model is limited to K<=3, p in {{2,3}}, L=N=1, seed_dim<=K (got K={k}, p={p}, L={l}, N={n}, seed_dim={seed_dim})"
                )));
            }
        }
    }
    Ok(())
}

pub(crate) fn counts(family: Family, params: &SchemeParams, seed_dim: usize) -> Counts {
    let p = params.modulus.get();
    let (k, l, n) = (params.transmitters, params.message_len, params.channel_uses);
    let d = share_dim_for(family, params);
    let pw = |e: usize| SpaceSize::pow(p, e);
    let table_decoders = tables_count(pw(l), pw(k * n));
    let linear_decoders = pw(k * l * n);
    let linear_shares = pw(d * seed_dim);
    match family {
        Family::General => Counts {
            decoders: table_decoders,
            shares: tables_count(pw(d), pw(seed_dim)),
            desired: tables_count(pw(n), pw(l + d)),
            undesired: tables_count(pw(n), pw(l + d)),
        },
        Family::Linear => Counts {
            decoders: linear_decoders,
            shares: linear_shares,
            desired: pw(n * l + n * d),
            undesired: pw(n * d),
        },
        Family::Hybrid => Counts {
            decoders: table_decoders,
            shares: linear_shares,
            desired: pw(n * l + n * d + n),
            undesired: pw(n * d),
        },
        Family::Uncoded { share_dim } => Counts {
            decoders: linear_decoders,
            shares: SpaceSize(binomial(seed_dim, share_dim)),
            desired: pw(n * l + n * d),
            undesired: pw(n * d),
        },
    }
}

fn all_tables(p: Prime, in_symbols: usize, out_symbols: usize) -> Vec<Vec<u32>> {
    let inputs = p.pow(in_symbols).expect("checked") as usize;
    let outputs = p.pow(out_symbols).expect("checked");
    let count = (0..inputs).fold(1u64, |acc, _| acc * outputs);
    (0..count)
        .map(|mut idx| {
            (0..inputs)
                .map(|_| {
                    let v = idx % outputs;
                    idx /= outputs;
                    v as u32
                })
                .collect()
        })
        .collect()
}

fn linear_shares(p: Prime, d: usize, s: usize) -> Options<ShareMap> {
    let seeds = p.pow(s).expect("checked");
    let count = p.pow(d * s).expect("checked");
    let mut out = Options {
        tables: Vec::new(),
        descs: Vec::new(),
    };
    for idx in 0..count {
        let m = Matrix::from_index(p, d, s, idx);
        out.tables.push(linear_share_table(&m, s, seeds));
        out.descs.push(ShareMap::Linear {
            matrix: CoeffMatrix::from_matrix(&m),
        });
    }
    out
}

fn subsets(n: usize, r: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, r: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, r, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, r, &mut Vec::new(), &mut out);
    out
}

fn selection_shares(p: Prime, d: usize, s: usize) -> Options<ShareMap> {
    let seeds = p.pow(s).expect("checked");
    let mut out = Options {
        tables: Vec::new(),
        descs: Vec::new(),
    };
    for set in subsets(s, d) {
        let mut m = Matrix::zeros(p, d, s);
        for (r, &c) in set.iter().enumerate() {
            m.set(r, c, 1);
        }
        out.tables.push(linear_share_table(&m, s, seeds));
        out.descs.push(ShareMap::Linear {
            matrix: CoeffMatrix::from_matrix(&m),
        });
    }
    out
}

/// Encoders `x = v w + u z (+ c)`; `v` is omitted when `with_message` is false.
fn linear_encoders(p: Prime, l: usize, n: usize, d: usize, with_message: bool, with_offset: bool) -> Options<Encoder> {
    let v_count = if with_message { p.pow(n * l).expect("checked") } else { 1 };
    let u_count = p.pow(n * d).expect("checked");
    let c_count = if with_offset { p.pow(n).expect("checked") } else { 1 };
    let mut out = Options {
        tables: Vec::new(),
        descs: Vec::new(),
    };
    for vi in 0..v_count {
        let v = Matrix::from_index(p, n, l, vi);
        for ui in 0..u_count {
            let u = Matrix::from_index(p, n, d, ui);
            for ci in 0..c_count {
                let offset = with_offset.then(|| {
                    crate::field::SymbolVector::unpack(p, n, ci).residues().to_vec()
                });
                out.tables.push(linear_encoder_table(&v, &u, offset.as_deref(), l, d));
                out.descs.push(Encoder::Linear {
                    v: CoeffMatrix::from_matrix(&v),
                    u: CoeffMatrix::from_matrix(&u),
                    offset: offset.map(|o| o.iter().map(|&x| x as u32).collect()),
                });
            }
        }
    }
    out
}

fn linear_decoders(p: Prime, k: usize, l: usize, n: usize) -> Options<Decoder> {
    let per = p.pow(l * n).expect("checked");
    let count = p.pow(k * l * n).expect("checked");
    let mut out = Options {
        tables: Vec::new(),
        descs: Vec::new(),
    };
    for idx in 0..count {
        let filters: Vec<Matrix> = (0..k)
            .map(|i| Matrix::from_index(p, l, n, (idx / per.pow(i as u32)) % per))
            .collect();
        out.tables.push(linear_decoder_table(&filters, n));
        out.descs.push(Decoder::Linear {
            filters: filters.iter().map(CoeffMatrix::from_matrix).collect(),
        });
    }
    out
}

fn table_options<T>(tables: Vec<Vec<u32>>, wrap: impl Fn(Vec<u32>) -> T) -> Options<T> {
    let descs = tables.iter().cloned().map(wrap).collect();
    Options { tables, descs }
}

impl Space {
    /// Materializes every option list. Callers check limits and the
    /// candidate cap first.
    pub fn build(family: Family, params: SchemeParams, seed_dim: usize) -> Result<Space, SearchError> {
        check_limits(family, &params, seed_dim)?;
        let c = counts(family, &params, seed_dim);
        for (what, n) in [
            ("decoder", c.decoders),
            ("share map", c.shares),
            ("desired encoder", c.desired),
            ("undesired encoder", c.undesired),
        ] {
            if n.0 > MAX_OPTIONS {
                return Err(refuse(format!("{n} {what} options cannot be materialized")));
            }
        }
        let p = params.modulus;
        let (k, l, n) = (params.transmitters, params.message_len, params.channel_uses);
        let d = share_dim_for(family, &params);
        for symbols in [k * n, seed_dim, l + d] {
            if p.pow(symbols).is_none_or(|t| t > MAX_TABLE) {
                return Err(refuse("lookup tables too large for search"));
            }
        }
        let table_decoders = || table_options(all_tables(p, k * n, l), |table| Decoder::Table { table });
        let space = match family {
            Family::General => Space {
                family,
                params,
                seed_dim,
                share_dim: d,
                decoders: table_decoders(),
                shares: table_options(all_tables(p, seed_dim, d), |table| ShareMap::Table { table }),
                desired: table_options(all_tables(p, l + d, n), |table| Encoder::Table { table }),
                undesired: table_options(all_tables(p, l + d, n), |table| Encoder::Table { table }),
            },
            Family::Linear => Space {
                family,
                params,
                seed_dim,
                share_dim: d,
                decoders: linear_decoders(p, k, l, n),
                shares: linear_shares(p, d, seed_dim),
                desired: linear_encoders(p, l, n, d, true, false),
                undesired: linear_encoders(p, l, n, d, false, false),
            },
            Family::Hybrid => Space {
                family,
                params,
                seed_dim,
                share_dim: d,
                decoders: table_decoders(),
                shares: linear_shares(p, d, seed_dim),
                desired: linear_encoders(p, l, n, d, true, true),
                undesired: linear_encoders(p, l, n, d, false, false),
            },
            Family::Uncoded { share_dim } => Space {
                family,
                params,
                seed_dim,
                share_dim,
                decoders: linear_decoders(p, k, l, n),
                shares: selection_shares(p, share_dim, seed_dim),
                desired: linear_encoders(p, l, n, share_dim, true, false),
                undesired: linear_encoders(p, l, n, share_dim, false, false),
            },
        };
        debug_assert_eq!(space.decoders.len() as u128, c.decoders.0);
        debug_assert_eq!(space.shares.len() as u128, c.shares.0);
        debug_assert_eq!(space.desired.len() as u128, c.desired.0);
        debug_assert_eq!(space.undesired.len() as u128, c.undesired.0);
        Ok(space)
    }

    pub fn k(&self) -> usize {
        self.params.transmitters
    }

    /// Option indices of one candidate, per transmitter for the lists.
    pub fn describe(&self, c: &Candidate) -> SchemeDescription {
        let k = self.k();
        SchemeDescription {
            name: format!("{}#{}", self.family.name(), c.index),
            note: String::new(),
            params: self.params,
            seed_dim: self.seed_dim,
            share_dim: self.share_dim,
            share_maps: (0..k).map(|i| self.shares.descs[c.shares[i]].clone()).collect(),
            desired: (0..k).map(|i| self.desired.descs[c.desired[i]].clone()).collect(),
            undesired: (0..k).map(|i| self.undesired.descs[c.undesired[i]].clone()).collect(),
            decoder: self.decoders.descs[c.decoder].clone(),
        }
    }

    /// Splits a global candidate index. Layout, most significant first:
    /// decoder, share combo, desired combo, undesired combo; inside a combo
    /// transmitter 1 is the least significant digit.
    pub fn candidate(&self, index: u64) -> Candidate {
        let k = self.k();
        let (dn, sn, en, un) = (
            self.decoders.len() as u64,
            self.shares.len() as u64,
            self.desired.len() as u64,
            self.undesired.len() as u64,
        );
        let digits = |mut v: u64, base: u64| -> Vec<usize> {
            (0..k)
                .map(|_| {
                    let d = v % base;
                    v /= base;
                    d as usize
                })
                .collect()
        };
        let uc = un.pow(k as u32);
        let dc = en.pow(k as u32);
        let sc = sn.pow(k as u32);
        let undesired = digits(index % uc, un);
        let rest = index / uc;
        let desired = digits(rest % dc, en);
        let rest = rest / dc;
        let shares = digits(rest % sc, sn);
        let decoder = (rest / sc) as usize;
        debug_assert!((decoder as u64) < dn);
        Candidate {
            index,
            decoder,
            shares,
            desired,
            undesired,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Candidate {
    pub index: u64,
    pub decoder: usize,
    pub shares: Vec<usize>,
    pub desired: Vec<usize>,
    pub undesired: Vec<usize>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_materialized_lists() {
        let cases = [
            (Family::General, SchemeParams::new(2, 2, 1).unwrap(), 1),
            (Family::Linear, SchemeParams::new(3, 2, 1).unwrap(), 2),
            (Family::Linear, SchemeParams::with_channel_uses(2, 2, 2, 1).unwrap(), 1),
            (Family::Hybrid, SchemeParams::new(3, 2, 1).unwrap(), 2),
            (Family::Uncoded { share_dim: 2 }, SchemeParams::new(3, 2, 1).unwrap(), 3),
        ];
        for (family, params, s) in cases {
            let c = counts(family, &params, s);
            let space = Space::build(family, params, s).unwrap();
            assert_eq!(space.decoders.len() as u128, c.decoders.0);
            assert_eq!(space.shares.len() as u128, c.shares.0);
            assert_eq!(space.desired.len() as u128, c.desired.0);
            assert_eq!(space.undesired.len() as u128, c.undesired.0);
        }
    }

    #[test]
    fn documented_space_sizes() {
        let p2 = SchemeParams::new(2, 2, 1).unwrap();
        assert_eq!(counts(Family::General, &p2, 0).space(2), SpaceSize(4 * 65536 * 16));
        assert_eq!(counts(Family::General, &p2, 1).space(2), SpaceSize(16 * 65536 * 16));
        assert_eq!(counts(Family::General, &p2, 2).space(2), SpaceSize(256 * 65536 * 16));
        let p3 = SchemeParams::new(3, 2, 1).unwrap();
        assert_eq!(counts(Family::Hybrid, &p3, 2).space(3), SpaceSize(256 * 64 * 512 * 8));
    }

    #[test]
    fn candidate_round_trip() {
        let space = Space::build(Family::Linear, SchemeParams::new(3, 2, 1).unwrap(), 1).unwrap();
        let c = space.candidate(12345);
        let (sn, en, un) = (2u64, 4u64, 2u64);
        let digits = |v: &[usize], b: u64| v.iter().rev().fold(0u64, |a, &x| a * b + x as u64);
        let back = ((c.decoder as u64 * sn.pow(3) + digits(&c.shares, sn)) * en.pow(3) + digits(&c.desired, en))
            * un.pow(3)
            + digits(&c.undesired, un);
        assert_eq!(back, 12345);
    }

    #[test]
    fn limits() {
        let k3 = SchemeParams::new(3, 2, 1).unwrap();
        assert!(matches!(check_limits(Family::General, &k3, 1), Err(SearchError::Refused(_))));
        assert!(check_limits(Family::Linear, &k3, 3).is_ok());
        assert!(check_limits(Family::Linear, &k3, 4).is_err());
        let p5 = SchemeParams::new(2, 5, 1).unwrap();
        assert!(check_limits(Family::Linear, &p5, 1).is_err());
    }

    #[test]
    fn selections_are_unit_rows() {
        let sel = selection_shares(Prime::TWO, 2, 3);
        assert_eq!(sel.len(), 3);
        // seed bits (a1, a2, a3) packed little-endian; first subset is {1, 2}
        assert_eq!(sel.tables[0][0b110], 0b10);
    }
}
