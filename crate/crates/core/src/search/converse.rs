//! Converse oracles built on the exhaustive search: minimal seed size,
//! necessity of coded shares, the channel-use bound and the forced decoder.

use serde::Serialize;

use crate::field::{rank, Matrix};
use crate::protocol::SchemeParams;

use super::description::{Decoder, SchemeDescription, ShareMap};
use super::engine::{search, DecoderTally, SearchOptions, SearchResult};
use super::space::Family;
use super::SearchError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinSeedReport {
    pub family: Family,
    pub params: SchemeParams,
    /// `None` when no seed size up to the family limit admits a scheme.
    pub dimension: Option<usize>,
    pub searches: Vec<SearchResult>,
}

/// Largest seed size each family is searched at.
pub fn max_seed_dim(family: Family, params: &SchemeParams) -> usize {
    match family {
        Family::General => 2,
        _ => params.transmitters,
    }
}

/// Smallest seed size at which `family` contains a valid scheme.
pub fn min_seed_dimension(
    family: Family,
    params: SchemeParams,
    opts: &SearchOptions,
) -> Result<MinSeedReport, SearchError> {
    let first = SearchOptions {
        stop_at_first: true,
        collect_limit: 1,
        ..opts.clone()
    };
    let mut searches = Vec::new();
    for s in 0..=max_seed_dim(family, &params) {
        let r = search(family, params, s, &first)?;
        let found = r.valid_schemes_found > 0;
        searches.push(r);
        if found {
            return Ok(MinSeedReport {
                family,
                params,
                dimension: Some(s),
                searches,
            });
        }
    }
    Ok(MinSeedReport {
        family,
        params,
        dimension: None,
        searches,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CodedRandomnessReport {
    pub params: SchemeParams,
    pub seed_dim: usize,
    /// Valid schemes with arbitrary linear shares at `seed_dim = K-1`.
    pub coded_valid: u64,
    /// Valid schemes whose shares are raw selections of `L` seed symbols.
    pub uncoded_valid: u64,
    /// Coded shares are needed: coded schemes exist and uncoded ones do not.
    pub necessary: bool,
    pub note: String,
}

/// Compares the linear family against raw seed selections at `s = K-1`.
pub fn check_coded_randomness_necessity(
    params: SchemeParams,
    opts: &SearchOptions,
) -> Result<CodedRandomnessReport, SearchError> {
    let s = params.transmitters - 1;
    let full = SearchOptions {
        stop_at_first: false,
        collect_limit: 0,
        ..opts.clone()
    };
    let coded = search(Family::Linear, params, s, &full)?;
    let uncoded = search(
        Family::Uncoded {
            share_dim: params.message_len,
        },
        params,
        s,
        &full,
    )?;
    let necessary = coded.valid_schemes_found > 0 && uncoded.valid_schemes_found == 0;
    let note = if !necessary && uncoded.valid_schemes_found > 0 && s * params.message_len <= params.message_len {
        "seed holds a single share's worth of symbols: every share is the whole seed, so coding is vacuous".into()
    } else if necessary {
        "every valid scheme at the minimal seed size mixes seed symbols in some share".into()
    } else {
        String::new()
    };
    Ok(CodedRandomnessReport {
        params,
        seed_dim: s,
        coded_valid: coded.valid_schemes_found,
        uncoded_valid: uncoded.valid_schemes_found,
        necessary,
        note,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RateInfeasibility {
    pub params: SchemeParams,
    /// `(G, V)` pairs enumerated per transmitter.
    pub pairs_checked: u64,
    /// Pairs with `rank(G V) = L`.
    pub full_rank_pairs: u64,
    pub infeasible: bool,
}

/// Enumerates every decoder filter `G` (L x N) and desired message map `V`
/// (N x L) and counts pairs whose product has full rank `L`. A linear scheme
/// can only decode the desired message through such a pair.
pub fn check_rate_infeasible(params: SchemeParams) -> Result<RateInfeasibility, SearchError> {
    params.validate().map_err(|e| SearchError::Refused(e.to_string()))?;
    let p = params.modulus;
    let (l, n) = (params.message_len, params.channel_uses);
    let g_count = p
        .pow(l * n)
        .filter(|&c| c <= 1 << 16)
        .ok_or_else(|| SearchError::Refused("coefficient space too large".into()))?;
    let mut full = 0;
    for gi in 0..g_count {
        let g = Matrix::from_index(p, l, n, gi);
        for vi in 0..g_count {
            let v = Matrix::from_index(p, n, l, vi);
            if rank(&g.mul(&v).expect("shapes agree")) == l {
                full += 1;
            }
        }
    }
    Ok(RateInfeasibility {
        params,
        pairs_checked: g_count * g_count,
        full_rank_pairs: full,
        infeasible: full == 0,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CensusEntry {
    pub table: Vec<u32>,
    pub schemes: u64,
    /// Changing any one received symbol changes the output.
    pub latin: bool,
    /// `Some(w)` when the table is `y_1 + ... + y_K + w`.
    pub sum_offset: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub params: SchemeParams,
    pub seed_dim: usize,
    pub space_size: u64,
    pub valid_schemes_found: u64,
    pub decoders: Vec<CensusEntry>,
    pub all_latin: bool,
    pub all_sum_form: bool,
}

fn unpack_cell(y: u64, k: usize, p: u64) -> Vec<u64> {
    (0..k).map(|i| (y / p.pow(i as u32)) % p).collect()
}

/// Single-symbol decoder tables only.
pub fn decoder_is_latin(table: &[u32], k: usize, p: u64) -> bool {
    (0..table.len() as u64).all(|y| {
        let cell = unpack_cell(y, k, p);
        (0..k).all(|j| {
            (cell[j] + 1..p).all(|v| {
                let other = y + (v - cell[j]) * p.pow(j as u32);
                table[other as usize] != table[y as usize]
            })
        })
    })
}

pub fn decoder_sum_offset(table: &[u32], k: usize, p: u64) -> Option<u32> {
    let w = *table.first()?;
    (0..table.len() as u64)
        .all(|y| {
            let s: u64 = unpack_cell(y, k, p).iter().sum();
            table[y as usize] as u64 == (s + w as u64) % p
        })
        .then_some(w)
}

/// Every accepted decoder of the hybrid family (table decoder over a linear
/// front end with affine desired encoders) at `s = K-1`, `L = N = 1`.
pub fn forced_decoder_census(params: SchemeParams, opts: &SearchOptions) -> Result<CensusReport, SearchError> {
    if params.message_len != 1 || params.channel_uses != 1 {
        return Err(SearchError::Refused("the decoder census needs L = N = 1".into()));
    }
    let s = params.transmitters - 1;
    let r = search(
        Family::Hybrid,
        params,
        s,
        &SearchOptions {
            stop_at_first: false,
            collect_limit: 0,
            ..opts.clone()
        },
    )?;
    let p = params.modulus.get() as u64;
    let k = params.transmitters;
    let decoders: Vec<CensusEntry> = r
        .accepted_decoders
        .iter()
        .map(|DecoderTally { table, schemes }| CensusEntry {
            latin: decoder_is_latin(table, k, p),
            sum_offset: decoder_sum_offset(table, k, p),
            table: table.clone(),
            schemes: *schemes,
        })
        .collect();
    Ok(CensusReport {
        params,
        seed_dim: s,
        space_size: r.space_size,
        valid_schemes_found: r.valid_schemes_found,
        all_latin: decoders.iter().all(|d| d.latin),
        all_sum_form: decoders.iter().all(|d| d.sum_offset.is_some()),
        decoders,
    })
}

/// Stacked share matrices of a linear description, `(K*d) x s`.
pub fn joint_share_matrix(desc: &SchemeDescription) -> Option<Matrix> {
    let p = desc.params.modulus;
    let d = desc.share_dim;
    let s = desc.seed_dim;
    let mut entries = Vec::with_capacity(desc.share_maps.len() * d * s);
    for m in &desc.share_maps {
        match m {
            ShareMap::Linear { matrix } => entries.extend_from_slice(&matrix.entries),
            ShareMap::Table { .. } => return None,
        }
    }
    Matrix::new(p, desc.share_maps.len() * d, s, &entries).ok()
}

/// Nonzero scalars `c_i` with `sum c_i Z_i = 0` for every seed, if any.
pub fn share_relation(desc: &SchemeDescription) -> Option<Vec<u32>> {
    let p = desc.params.modulus;
    let k = desc.share_maps.len();
    let mats: Vec<Matrix> = desc
        .share_maps
        .iter()
        .map(|m| match m {
            ShareMap::Linear { matrix } => matrix.to_matrix(p).ok(),
            ShareMap::Table { .. } => None,
        })
        .collect::<Option<_>>()?;
    let q = p.get() as u64 - 1;
    (0..q.pow(k as u32)).find_map(|idx| {
        let coeffs: Vec<u8> = (0..k).map(|i| ((idx / q.pow(i as u32)) % q + 1) as u8).collect();
        let (rows, cols) = (mats[0].rows(), mats[0].cols());
        let zero = (0..rows).all(|r| {
            (0..cols).all(|c| {
                mats.iter()
                    .zip(&coeffs)
                    .fold(0u8, |acc, (m, &ci)| p.add(acc, p.mul(ci, m.get(r, c))))
                    == 0
            })
        });
        zero.then(|| coeffs.iter().map(|&c| c as u32).collect())
    })
}

/// True when the description uses a linear decoder that sums every signal.
pub fn is_sum_decoder(desc: &SchemeDescription) -> bool {
    matches!(&desc.decoder, Decoder::Linear { filters } if filters.iter().all(|g| g.rows == g.cols && g.entries == super::description::CoeffMatrix::identity(g.rows).entries))
}
