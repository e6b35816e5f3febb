//! Exhaustive enumeration of a candidate family.
//!
//! Candidates are grouped in blocks sharing a decoder and a share combo.
//! Inside a block, correctness with transmitter `k` desired depends only on
//! `k`'s desired encoder and the others' undesired encoders, so one table
//! per `k` decides correctness for the whole block. Anonymity is evaluated
//! only for correct candidates.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::info::{self, DistTable, EntropyValue, SpaceSize};
use crate::protocol::SchemeParams;

use super::description::SchemeDescription;
use super::space::{check_limits, counts, Family, Space};
use super::SearchError;

/// Candidates processed between checkpoint records.
const CHUNK_CANDIDATES: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchOptions {
    pub stop_at_first: bool,
    /// Accepted schemes to return in full, lowest index first.
    pub collect_limit: usize,
    pub max_states: u64,
    /// Appends one `start-end` line (inclusive candidate indices) per
    /// completed chunk.
    pub checkpoint: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            stop_at_first: false,
            collect_limit: 16,
            max_states: info::DEFAULT_MAX_STATES,
            checkpoint: None,
            workers: None,
        }
    }
}

impl SearchOptions {
    pub fn first_only() -> Self {
        SearchOptions {
            stop_at_first: true,
            collect_limit: 1,
            ..Self::default()
        }
    }
}

/// Accepted schemes per distinct decoder table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecoderTally {
    pub table: Vec<u32>,
    pub schemes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchResult {
    pub family: Family,
    pub params: SchemeParams,
    pub seed_dim: usize,
    pub share_dim: usize,
    pub space_size: u64,
    pub visited: u64,
    pub correct_candidates: u64,
    pub valid_schemes_found: u64,
    pub stopped_early: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_witness: Option<SchemeDescription>,
    /// Extremes of `H(Z_i)/L` over every share of every accepted scheme.
    pub min_rho: Option<EntropyValue>,
    pub max_rho: Option<EntropyValue>,
    /// Extremes of `H(Z_1..Z_K)/L` over accepted schemes.
    pub min_eta: Option<EntropyValue>,
    pub max_eta: Option<EntropyValue>,
    pub accepted_decoders: Vec<DecoderTally>,
    #[serde(skip)]
    pub accepted: Vec<SchemeDescription>,
    pub elapsed_ms: f64,
}

impl SearchResult {
    /// Copy with timing zeroed, for determinism comparisons.
    pub fn without_timing(&self) -> SearchResult {
        SearchResult {
            elapsed_ms: 0.0,
            ..self.clone()
        }
    }
}

/// Number of candidates in a family, without materializing it.
pub fn space_size(family: Family, params: &SchemeParams, seed_dim: usize) -> Result<SpaceSize, SearchError> {
    check_limits(family, params, seed_dim)?;
    Ok(counts(family, params, seed_dim).space(params.transmitters))
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Extremes {
    min: Option<EntropyValue>,
    max: Option<EntropyValue>,
}

impl Extremes {
    const EMPTY: Extremes = Extremes { min: None, max: None };

    fn add(&mut self, v: EntropyValue) {
        if self.min.is_none_or(|m| v.value < m.value) {
            self.min = Some(v);
        }
        if self.max.is_none_or(|m| v.value > m.value) {
            self.max = Some(v);
        }
    }

    fn merge(&mut self, o: &Extremes) {
        if let Some(v) = o.min {
            self.add(v);
        }
        if let Some(v) = o.max {
            self.add(v);
        }
    }
}

#[derive(Debug, Default)]
struct BlockResult {
    correct: u64,
    accepted: u64,
    /// Sorted positions inside the block, at most `collect_limit`.
    positions: Vec<u64>,
    first: Option<u64>,
    rho: Option<Extremes>,
    eta: Option<Extremes>,
}

/// Precomputed dimensions shared by all blocks.
struct Shape {
    k: usize,
    seeds: usize,
    messages: usize,
    msg_tuples: usize,
    sig_base: usize,
    transcripts: usize,
    n_desired: usize,
    n_undesired: usize,
    n_shares: usize,
    undesired_combos: usize,
    block_size: u64,
}

impl Shape {
    fn new(space: &Space) -> Shape {
        let p = space.params.modulus;
        let k = space.k();
        let messages = p.pow(space.params.message_len).expect("small") as usize;
        let sig_base = p.pow(space.params.channel_uses).expect("small") as usize;
        let n_desired = space.desired.len();
        let n_undesired = space.undesired.len();
        let undesired_combos = n_undesired.pow(k as u32);
        Shape {
            k,
            seeds: p.pow(space.seed_dim).expect("small") as usize,
            messages,
            msg_tuples: messages.pow(k as u32),
            sig_base,
            transcripts: sig_base.pow(k as u32),
            n_desired,
            n_undesired,
            n_shares: space.shares.len(),
            undesired_combos,
            block_size: (n_desired.pow(k as u32) * undesired_combos) as u64,
        }
    }

    fn digit(&self, combo: usize, i: usize, base: usize) -> usize {
        (combo / base.pow(i as u32)) % base
    }

    /// Undesired combo with position `k` removed, remaining digits in order.
    fn without(&self, combo: usize, k: usize) -> usize {
        let mut out = 0;
        let mut mult = 1;
        for j in 0..self.k {
            if j != k {
                out += self.digit(combo, j, self.n_undesired) * mult;
                mult *= self.n_undesired;
            }
        }
        out
    }
}

struct Block<'a> {
    space: &'a Space,
    shape: &'a Shape,
    decoder: &'a [u32],
    /// `shares[seed * K + i]`.
    shares: Vec<u32>,
}

impl<'a> Block<'a> {
    fn new(space: &'a Space, shape: &'a Shape, block: u64) -> Block<'a> {
        let share_combos = (shape.n_shares as u64).pow(shape.k as u32);
        let decoder = &space.decoders.tables[(block / share_combos) as usize];
        let sc = (block % share_combos) as usize;
        let share_choice: Vec<usize> = (0..shape.k).map(|i| shape.digit(sc, i, shape.n_shares)).collect();
        let mut shares = vec![0u32; shape.seeds * shape.k];
        for seed in 0..shape.seeds {
            for (i, &c) in share_choice.iter().enumerate() {
                shares[seed * shape.k + i] = space.shares.tables[c][seed];
            }
        }
        Block {
            space,
            shape,
            decoder,
            shares,
        }
    }

    #[inline]
    fn signal(&self, table: &[u32], message: usize, share: u32) -> usize {
        table[message + self.shape.messages * share as usize] as usize
    }

    /// `ok[k][d + D * rest]`: decoding succeeds with `k` desired using
    /// desired encoder `d` and undesired combo `rest` on the others.
    fn correctness_tables(&self) -> Vec<Vec<bool>> {
        let sh = self.shape;
        let rest_combos = sh.n_undesired.pow(sh.k as u32 - 1);
        let mut sig = vec![0usize; sh.k];
        let mut u = vec![0usize; sh.k];
        (0..sh.k)
            .map(|k| {
                let mut ok = vec![false; sh.n_desired * rest_combos];
                for rest in 0..rest_combos {
                    let mut r = rest;
                    for (j, slot) in u.iter_mut().enumerate() {
                        if j != k {
                            *slot = r % sh.n_undesired;
                            r /= sh.n_undesired;
                        }
                    }
                    for d in 0..sh.n_desired {
                        ok[d + sh.n_desired * rest] = self.decodes(k, d, &u, &mut sig);
                    }
                }
                ok
            })
            .collect()
    }

    fn decodes(&self, k: usize, d: usize, u: &[usize], sig: &mut [usize]) -> bool {
        let sh = self.shape;
        let desired = &self.space.desired.tables[d];
        for seed in 0..sh.seeds {
            let z = &self.shares[seed * sh.k..(seed + 1) * sh.k];
            for w in 0..sh.msg_tuples {
                let mut rest = w;
                let mut y = 0;
                let mut mult = 1;
                let mut wk = 0;
                for i in 0..sh.k {
                    let wi = rest % sh.messages;
                    rest /= sh.messages;
                    let x = if i == k {
                        wk = wi;
                        self.signal(desired, wi, z[i])
                    } else {
                        self.signal(&self.space.undesired.tables[u[i]], wi, z[i])
                    };
                    sig[i] = x;
                    y += x * mult;
                    mult *= sh.sig_base;
                }
                if self.decoder[y] as usize != wk {
                    return false;
                }
            }
        }
        true
    }

    fn transcript_counts(&self, theta: usize, d: &[usize], u: &[usize], out: &mut [u32]) {
        let sh = self.shape;
        out.fill(0);
        for seed in 0..sh.seeds {
            let z = &self.shares[seed * sh.k..(seed + 1) * sh.k];
            for w in 0..sh.msg_tuples {
                let mut rest = w;
                let mut y = 0;
                let mut mult = 1;
                for i in 0..sh.k {
                    let wi = rest % sh.messages;
                    rest /= sh.messages;
                    let x = if i == theta {
                        self.signal(&self.space.desired.tables[d[i]], wi, z[i])
                    } else {
                        self.signal(&self.space.undesired.tables[u[i]], wi, z[i])
                    };
                    y += x * mult;
                    mult *= sh.sig_base;
                }
                out[y] += 1;
            }
        }
    }

    fn anonymous(&self, d: &[usize], u: &[usize], first: &mut [u32], other: &mut [u32]) -> bool {
        self.transcript_counts(0, d, u, first);
        (1..self.shape.k).all(|theta| {
            self.transcript_counts(theta, d, u, other);
            first == other
        })
    }

    fn share_measures(&self) -> (Extremes, EntropyValue) {
        let sh = self.shape;
        let p = self.space.params.modulus;
        let l = self.space.params.message_len as u64;
        let share_radix = p.pow(self.space.share_dim).expect("small");
        let mut rho = Extremes::EMPTY;
        let table = |vars: &[usize]| {
            let mut counts: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
            for seed in 0..sh.seeds {
                let key = vars.iter().map(|&i| self.shares[seed * sh.k + i] as u64).collect();
                *counts.entry(key).or_default() += 1;
            }
            DistTable::from_counts(vec![share_radix; vars.len()], counts).expect("valid counts")
        };
        for i in 0..sh.k {
            rho.add(info::entropy(&table(&[i]), p).expect("nonempty").per(l));
        }
        let all: Vec<usize> = (0..sh.k).collect();
        let eta = info::entropy(&table(&all), p).expect("nonempty").per(l);
        (rho, eta)
    }

    /// Visits every candidate of the block with position `<= bound`.
    fn run(&self, collect: usize, bound: Option<u64>) -> BlockResult {
        let sh = self.shape;
        let ok = self.correctness_tables();
        let mut res = BlockResult::default();
        let mut u = vec![0usize; sh.k];
        let mut d = vec![0usize; sh.k];
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); sh.k];
        let mut first = vec![0u32; sh.transcripts];
        let mut other = vec![0u32; sh.transcripts];
        for uc in 0..sh.undesired_combos {
            for (i, slot) in u.iter_mut().enumerate() {
                *slot = sh.digit(uc, i, sh.n_undesired);
            }
            for (k, list) in lists.iter_mut().enumerate() {
                let base = sh.n_desired * sh.without(uc, k);
                list.clear();
                list.extend((0..sh.n_desired).filter(|&dk| ok[k][base + dk]));
            }
            if lists.iter().any(Vec::is_empty) {
                continue;
            }
            let combos: usize = lists.iter().map(Vec::len).product();
            for c in 0..combos {
                let mut r = c;
                let mut dc = 0;
                for (i, list) in lists.iter().enumerate() {
                    d[i] = list[r % list.len()];
                    r /= list.len();
                    dc += d[i] * sh.n_desired.pow(i as u32);
                }
                let pos = (dc * sh.undesired_combos + uc) as u64;
                if bound.is_some_and(|b| pos > b) {
                    continue;
                }
                res.correct += 1;
                if self.anonymous(&d, &u, &mut first, &mut other) {
                    res.accepted += 1;
                    res.first = Some(res.first.map_or(pos, |f| f.min(pos)));
                    res.positions.push(pos);
                }
            }
        }
        res.positions.sort_unstable();
        res.positions.truncate(collect);
        if res.accepted > 0 {
            let (rho, eta) = self.share_measures();
            res.rho = Some(rho);
            let mut e = Extremes::EMPTY;
            e.add(eta);
            res.eta = Some(e);
        }
        res
    }
}

/// Exhaustively enumerates `family` at `params` with `seed_dim` seed symbols.
pub fn search(
    family: Family,
    params: SchemeParams,
    seed_dim: usize,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let size = space_size(family, &params, seed_dim)?;
    if size.exceeds(opts.max_states) {
        return Err(SearchError::TooLarge {
            required: size,
            cap: opts.max_states,
        });
    }
    match opts.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| SearchError::Io(e.to_string()))?;
            pool.install(|| run_search(family, params, seed_dim, opts))
        }
        None => run_search(family, params, seed_dim, opts),
    }
}

fn run_search(
    family: Family,
    params: SchemeParams,
    seed_dim: usize,
    opts: &SearchOptions,
) -> Result<SearchResult, SearchError> {
    let start = Instant::now();
    let space = Space::build(family, params, seed_dim)?;
    let shape = Shape::new(&space);
    let blocks = (space.decoders.len() * shape.n_shares.pow(shape.k as u32)) as u64;
    let space_size = blocks * shape.block_size;
    let chunk = (CHUNK_CANDIDATES / shape.block_size).max(1);

    let mut checkpoint = match &opts.checkpoint {
        Some(path) => Some(
            OpenOptions::new()
                .create(true)
                .write(true)
                .truncate(true)
                .open(path)
                .map_err(|e| SearchError::Io(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };

    let mut visited = 0u64;
    let mut correct = 0u64;
    let mut accepted = 0u64;
    let mut positions: Vec<u64> = Vec::new();
    let mut rho = Extremes::EMPTY;
    let mut eta = Extremes::EMPTY;
    let mut tallies: BTreeMap<usize, u64> = BTreeMap::new();
    let mut stopped = false;
    let share_combos = (shape.n_shares as u64).pow(shape.k as u32);

    let mut b0 = 0;
    while b0 < blocks && !stopped {
        let b1 = (b0 + chunk).min(blocks);
        let limit = if opts.stop_at_first { 0 } else { opts.collect_limit };
        let results: Vec<BlockResult> = (b0..b1)
            .into_par_iter()
            .map(|b| Block::new(&space, &shape, b).run(limit, None))
            .collect();
        for (offset, r) in results.into_iter().enumerate() {
            let b = b0 + offset as u64;
            let base = b * shape.block_size;
            let r = match (opts.stop_at_first, r.first) {
                (true, Some(first)) => {
                    stopped = true;
                    visited += first + 1;
                    let mut r = Block::new(&space, &shape, b).run(1, Some(first));
                    r.positions = vec![first];
                    r
                }
                _ => {
                    visited += shape.block_size;
                    r
                }
            };
            correct += r.correct;
            accepted += r.accepted;
            if r.accepted > 0 {
                *tallies.entry((b / share_combos) as usize).or_default() += r.accepted;
            }
            let room = if opts.stop_at_first { 1 } else { opts.collect_limit };
            positions.extend(r.positions.iter().map(|&p| base + p).take(room.saturating_sub(positions.len())));
            if let Some(e) = &r.rho {
                rho.merge(e);
            }
            if let Some(e) = &r.eta {
                eta.merge(e);
            }
            if stopped {
                break;
            }
        }
        if let Some(f) = checkpoint.as_mut() {
            let end = if stopped { visited } else { b1 * shape.block_size };
            writeln!(f, "{}-{}", b0 * shape.block_size, end - 1)
                .and_then(|_| f.flush())
                .map_err(|e| SearchError::Io(e.to_string()))?;
        }
        b0 = b1;
    }

    let accepted_descs: Vec<SchemeDescription> = positions
        .iter()
        .map(|&i| space.describe(&space.candidate(i)))
        .collect();
    Ok(SearchResult {
        family,
        params,
        seed_dim,
        share_dim: space.share_dim,
        space_size,
        visited,
        correct_candidates: correct,
        valid_schemes_found: accepted,
        stopped_early: stopped,
        first_witness: accepted_descs.first().cloned(),
        min_rho: rho.min,
        max_rho: rho.max,
        min_eta: eta.min,
        max_eta: eta.max,
        accepted_decoders: tallies
            .into_iter()
            .map(|(d, schemes)| DecoderTally {
                table: space.decoders.tables[d].clone(),
                schemes,
            })
            .collect(),
        accepted: accepted_descs,
        elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{check_anonymity, check_correctness, VerifyOptions};

    fn p(k: usize, q: u32, l: usize) -> SchemeParams {
        SchemeParams::new(k, q, l).unwrap()
    }

    #[test]
    fn linear_k2_finds_the_builtin() {
        let r = search(Family::Linear, p(2, 2, 1), 1, &SearchOptions::default()).unwrap();
        assert_eq!(r.visited, r.space_size);
        assert!(r.valid_schemes_found >= 1);
        let builtin = SchemeDescription::builtin_linear(p(2, 2, 1));
        let found = r.accepted.iter().any(|d| {
            d.share_maps == builtin.share_maps && d.desired == builtin.desired && d.decoder == builtin.decoder
        });
        assert!(found || r.valid_schemes_found > r.accepted.len() as u64);
    }

    #[test]
    fn no_seed_no_scheme() {
        let r = search(Family::Linear, p(2, 2, 1), 0, &SearchOptions::default()).unwrap();
        assert_eq!(r.valid_schemes_found, 0);
        assert!(r.first_witness.is_none());
        assert!(r.min_rho.is_none());
    }

    #[test]
    fn accepted_schemes_pass_the_verifier() {
        let opts = SearchOptions {
            collect_limit: 200,
            ..SearchOptions::default()
        };
        for (family, params, s) in [
            (Family::Linear, p(2, 3, 1), 1),
            (Family::Linear, p(3, 2, 1), 2),
            (Family::Hybrid, p(2, 2, 1), 1),
        ] {
            let r = search(family, params, s, &opts).unwrap();
            assert!(!r.accepted.is_empty());
            for d in &r.accepted {
                let c = d.compile().unwrap();
                assert!(check_correctness(&c, &VerifyOptions::default()).unwrap().passed());
                assert!(check_anonymity(&c, &VerifyOptions::default()).unwrap().passed());
            }
        }
    }

    #[test]
    fn correct_count_matches_verifier_on_sample() {
        // every candidate of a tiny space, judged independently
        let params = p(2, 2, 1);
        let space = Space::build(Family::Linear, params, 1).unwrap();
        let r = search(Family::Linear, params, 1, &SearchOptions::default()).unwrap();
        let opts = VerifyOptions::default();
        let (mut correct, mut valid) = (0, 0);
        for i in 0..r.space_size {
            let c = space.describe(&space.candidate(i)).compile().unwrap();
            if check_correctness(&c, &opts).unwrap().passed() {
                correct += 1;
                if check_anonymity(&c, &opts).unwrap().passed() {
                    valid += 1;
                }
            }
        }
        assert_eq!((correct, valid), (r.correct_candidates, r.valid_schemes_found));
    }

    #[test]
    fn stop_at_first_agrees_with_full_search() {
        let full = search(Family::Linear, p(3, 2, 1), 2, &SearchOptions::default()).unwrap();
        let first = search(Family::Linear, p(3, 2, 1), 2, &SearchOptions::first_only()).unwrap();
        assert!(first.stopped_early);
        assert_eq!(first.valid_schemes_found, 1);
        assert_eq!(first.first_witness, full.first_witness);
        assert!(first.visited <= full.visited);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let one = SearchOptions {
            workers: Some(1),
            ..SearchOptions::default()
        };
        let three = SearchOptions {
            workers: Some(3),
            ..SearchOptions::default()
        };
        let a = search(Family::Linear, p(3, 2, 1), 2, &one).unwrap();
        let b = search(Family::Linear, p(3, 2, 1), 2, &three).unwrap();
        assert_eq!(a.without_timing(), b.without_timing());
    }

    #[test]
    fn cap_refuses_with_size() {
        let opts = SearchOptions {
            max_states: 1000,
            ..SearchOptions::default()
        };
        match search(Family::Linear, p(3, 2, 1), 2, &opts) {
            Err(SearchError::TooLarge { required, cap }) => {
                assert_eq!(cap, 1000);
                assert_eq!(required, space_size(Family::Linear, &p(3, 2, 1), 2).unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn checkpoint_ranges_cover_space() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.txt");
        let opts = SearchOptions {
            checkpoint: Some(path.clone()),
            ..SearchOptions::default()
        };
        let r = search(Family::Linear, p(2, 2, 1), 2, &opts).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        let mut next = 0u64;
        for line in text.lines() {
            let (a, b) = line.split_once('-').unwrap();
            assert_eq!(a.parse::<u64>().unwrap(), next);
            next = b.parse::<u64>().unwrap() + 1;
        }
        assert_eq!(next, r.space_size);
    }

    #[test]
    fn monotone_in_seed_dimension() {
        for s in 1..=2 {
            let r = search(Family::Linear, p(2, 3, 1), s, &SearchOptions::first_only()).unwrap();
            assert_eq!(r.valid_schemes_found, 1, "s={s}");
        }
    }
}
