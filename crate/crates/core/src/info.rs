//! Exact finite distributions as integer count tables.
//!
//! Every distribution here comes from exhausting a uniform input space, so
//! counts are exact integers. Distribution identity and independence are
//! decided on those integers; entropies are additionally reported as `f64`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use num_rational::Ratio;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::field::Prime;

/// Default bound on enumerated states.
pub const DEFAULT_MAX_STATES: u64 = 100_000_000;

/// Output key spaces up to this many cells are counted in a dense array.
const DENSE_CELLS: u64 = 1 << 23;

/// Size of an enumeration, saturating at `u128::MAX`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(into = "String")]
pub struct SpaceSize(pub u128);

impl SpaceSize {
    pub fn pow(base: u32, exp: usize) -> Self {
        let mut acc: u128 = 1;
        for _ in 0..exp {
            acc = acc.saturating_mul(base as u128);
        }
        SpaceSize(acc)
    }

    pub fn times(self, k: u128) -> Self {
        SpaceSize(self.0.saturating_mul(k))
    }

    pub fn exceeds(self, cap: u64) -> bool {
        self.0 > cap as u128
    }
}

impl fmt::Display for SpaceSize {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == u128::MAX {
            write!(f, ">=2^128")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl From<SpaceSize> for String {
    fn from(s: SpaceSize) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InfoError {
    #[error("state space of {required} states exceeds the cap of {cap}")]
    StateSpaceTooLarge { required: SpaceSize, cap: u64 },
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("variable index {index} out of range for arity {arity}")]
    BadVariable { index: usize, arity: usize },
    #[error("variable groups must be non-empty and disjoint")]
    BadGroups,
    #[error("outcome value {value} outside radix {radix}")]
    OutcomeOutOfRange { value: u64, radix: u64 },
    #[error("joint outcome space does not fit in 64 bits")]
    KeySpaceOverflow,
    #[error("distribution has zero total count")]
    EmptyTable,
}

/// Exact joint distribution over `arity` discrete variables.
///
/// Variable `j` takes values in `0..radices[j]`. Only outcomes with a nonzero
/// count are stored, sorted by packed key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistTable {
    radices: Vec<u64>,
    cells: Vec<(u64, u64)>,
    total: u64,
}

fn key_space(radices: &[u64]) -> Result<u64, InfoError> {
    radices
        .iter()
        .try_fold(1u64, |acc, &r| acc.checked_mul(r.max(1)))
        .ok_or(InfoError::KeySpaceOverflow)
}

impl DistTable {
    pub fn from_counts<I>(radices: Vec<u64>, counts: I) -> Result<Self, InfoError>
    where
        I: IntoIterator<Item = (Vec<u64>, u64)>,
    {
        key_space(&radices)?;
        let mut map = HashMap::new();
        for (outcome, c) in counts {
            if outcome.len() != radices.len() {
                return Err(InfoError::ArityMismatch {
                    left: outcome.len(),
                    right: radices.len(),
                });
            }
            let key = pack_key(&radices, &outcome)?;
            *map.entry(key).or_insert(0u64) += c;
        }
        Ok(Self::from_key_map(radices, map))
    }

    fn from_key_map(radices: Vec<u64>, map: HashMap<u64, u64>) -> Self {
        let mut cells: Vec<(u64, u64)> = map.into_iter().filter(|&(_, c)| c > 0).collect();
        cells.sort_unstable();
        let total = cells.iter().map(|&(_, c)| c).sum();
        DistTable {
            radices,
            cells,
            total,
        }
    }

    fn from_dense(radices: Vec<u64>, dense: Vec<u64>) -> Self {
        let cells: Vec<(u64, u64)> = dense
            .into_iter()
            .enumerate()
            .filter(|&(_, c)| c > 0)
            .map(|(k, c)| (k as u64, c))
            .collect();
        let total = cells.iter().map(|&(_, c)| c).sum();
        DistTable {
            radices,
            cells,
            total,
        }
    }

    pub fn arity(&self) -> usize {
        self.radices.len()
    }

    pub fn radices(&self) -> &[u64] {
        &self.radices
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn support_size(&self) -> usize {
        self.cells.len()
    }

    pub fn count(&self, outcome: &[u64]) -> u64 {
        let Ok(key) = pack_key(&self.radices, outcome) else {
            return 0;
        };
        self.cells
            .binary_search_by_key(&key, |&(k, _)| k)
            .map(|i| self.cells[i].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (Vec<u64>, u64)> + '_ {
        self.cells
            .iter()
            .map(|&(k, c)| (unpack_key(&self.radices, k), c))
    }

    /// True when every stored outcome has the same count.
    pub fn is_uniform(&self) -> bool {
        match self.cells.first() {
            Some(&(_, c0)) => self.cells.iter().all(|&(_, c)| c == c0),
            None => false,
        }
    }

    /// Size of the full outcome space (product of radices).
    pub fn outcome_space(&self) -> u64 {
        key_space(&self.radices).expect("checked at construction")
    }

    /// Marginal over `vars`, in the given order.
    pub fn marginal(&self, vars: &[usize]) -> Result<DistTable, InfoError> {
        for &v in vars {
            if v >= self.arity() {
                return Err(InfoError::BadVariable {
                    index: v,
                    arity: self.arity(),
                });
            }
        }
        let radices: Vec<u64> = vars.iter().map(|&v| self.radices[v]).collect();
        let mut map: HashMap<u64, u64> = HashMap::new();
        let mut outcome = vec![0u64; vars.len()];
        for &(k, c) in &self.cells {
            let full = unpack_key(&self.radices, k);
            for (o, &v) in outcome.iter_mut().zip(vars) {
                *o = full[v];
            }
            *map.entry(pack_key(&radices, &outcome)?).or_insert(0) += c;
        }
        Ok(Self::from_key_map(radices, map))
    }

    /// Adds `other`'s counts into `self`. Tables must share radices.
    pub fn merge(&mut self, other: &DistTable) -> Result<(), InfoError> {
        if self.radices != other.radices {
            return Err(InfoError::ArityMismatch {
                left: self.arity(),
                right: other.arity(),
            });
        }
        let mut map: HashMap<u64, u64> = self.cells.iter().copied().collect();
        for &(k, c) in &other.cells {
            *map.entry(k).or_insert(0) += c;
        }
        *self = Self::from_key_map(std::mem::take(&mut self.radices), map);
        Ok(())
    }
}

fn pack_key(radices: &[u64], outcome: &[u64]) -> Result<u64, InfoError> {
    let mut key = 0u64;
    for (&v, &r) in outcome.iter().zip(radices).rev() {
        if v >= r {
            return Err(InfoError::OutcomeOutOfRange { value: v, radix: r });
        }
        key = key * r + v;
    }
    Ok(key)
}

fn unpack_key(radices: &[u64], mut key: u64) -> Vec<u64> {
    radices
        .iter()
        .map(|&r| {
            let v = key % r;
            key /= r;
            v
        })
        .collect()
}

/// A uniform input space of `symbols` field symbols, mapped to `outputs.len()`
/// discrete variables with the given radices.
#[derive(Debug, Clone)]
pub struct SampleSpace {
    pub modulus: Prime,
    pub symbols: usize,
    pub outputs: Vec<u64>,
    pub max_states: u64,
}

impl SampleSpace {
    pub fn new(modulus: Prime, symbols: usize, outputs: Vec<u64>) -> Self {
        SampleSpace {
            modulus,
            symbols,
            outputs,
            max_states: DEFAULT_MAX_STATES,
        }
    }

    pub fn with_max_states(mut self, cap: u64) -> Self {
        self.max_states = cap;
        self
    }

    pub fn size(&self) -> SpaceSize {
        SpaceSize::pow(self.modulus.get(), self.symbols)
    }

    fn checked_size(&self) -> Result<u64, InfoError> {
        let size = self.size();
        if size.exceeds(self.max_states) {
            return Err(InfoError::StateSpaceTooLarge {
                required: size,
                cap: self.max_states,
            });
        }
        Ok(size.0 as u64)
    }
}

fn chunks(size: u64) -> Vec<(u64, u64)> {
    let n = (rayon::current_num_threads() as u64 * 8).clamp(1, size.max(1));
    let step = size.div_ceil(n).max(1);
    (0..size)
        .step_by(step as usize)
        .map(|s| (s, (s + step).min(size)))
        .collect()
}

/// Exact counts of `eval` over every state of `space`.
///
/// `eval` receives the state index (input symbols as little-endian base-p
/// digits) and writes one value per output variable. Work is split across the
/// current rayon pool; partial counts merge by summation.
pub fn enumerate<F>(space: &SampleSpace, eval: F) -> Result<DistTable, InfoError>
where
    F: Fn(u64, &mut [u64]) + Sync,
{
    let size = space.checked_size()?;
    let radices = space.outputs.clone();
    let cells = key_space(&radices)?;
    let arity = radices.len();
    let key_of = |out: &[u64]| -> u64 {
        let mut key = 0u64;
        for (&v, &r) in out.iter().zip(&radices).rev() {
            debug_assert!(v < r, "output {v} outside radix {r}");
            key = key * r + v;
        }
        key
    };

    if cells <= DENSE_CELLS {
        let dense: Vec<AtomicU64> = (0..cells).map(|_| AtomicU64::new(0)).collect();
        chunks(size).into_par_iter().for_each(|(start, end)| {
            let mut out = vec![0u64; arity];
            for state in start..end {
                eval(state, &mut out);
                dense[key_of(&out) as usize].fetch_add(1, Ordering::Relaxed);
            }
        });
        let dense = dense.into_iter().map(AtomicU64::into_inner).collect();
        Ok(DistTable::from_dense(radices.clone(), dense))
    } else {
        let merged = chunks(size)
            .into_par_iter()
            .map(|(start, end)| {
                let mut out = vec![0u64; arity];
                let mut map: HashMap<u64, u64> = HashMap::new();
                for state in start..end {
                    eval(state, &mut out);
                    *map.entry(key_of(&out)).or_insert(0) += 1;
                }
                map
            })
            .reduce(HashMap::new, |mut a, b| {
                for (k, c) in b {
                    *a.entry(k).or_insert(0) += c;
                }
                a
            });
        Ok(DistTable::from_key_map(radices.clone(), merged))
    }
}

/// Smallest state index in `0..size` for which `pred` holds.
pub fn find_first<F>(size: u64, pred: F) -> Option<u64>
where
    F: Fn(u64) -> bool + Sync,
{
    chunks(size)
        .into_par_iter()
        .find_map_first(|(start, end)| (start..end).find(|&s| pred(s)))
}

/// An entropy or information quantity in base-`base` units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyValue {
    pub value: f64,
    pub base: u32,
    /// Exact rational value when known without rounding.
    pub exact: Option<Ratio<u64>>,
}

impl EntropyValue {
    pub fn zero(base: u32) -> Self {
        EntropyValue {
            value: 0.0,
            base,
            exact: Some(Ratio::from_integer(0)),
        }
    }

    /// This quantity divided by a positive integer (e.g. per message symbol).
    pub fn per(self, divisor: u64) -> Self {
        EntropyValue {
            value: self.value / divisor as f64,
            base: self.base,
            exact: self.exact.map(|r| r / divisor),
        }
    }

    pub fn is_exactly(&self, r: Ratio<u64>) -> bool {
        self.exact == Some(r)
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exact {
            Some(r) => write!(f, "{r} (exact)"),
            None => write!(f, "{:.12}", self.value),
        }
    }
}

impl Serialize for EntropyValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("EntropyValue", 4)?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("units", "p-ary-units")?;
        st.serialize_field("base", &self.base)?;
        st.serialize_field("exact", &self.exact.map(ratio_string))?;
        st.end()
    }
}

/// `num/den` rendering used in reports.
pub fn ratio_string(r: Ratio<u64>) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Exact `log_base(n)` when `n` is a power of `base`.
fn exact_log(n: u64, base: u64) -> Option<u64> {
    let mut acc = 1u64;
    let mut e = 0;
    while acc < n {
        acc = acc.checked_mul(base)?;
        e += 1;
    }
    (acc == n).then_some(e)
}

fn neumaier_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

fn entropy_of_counts(counts: &[u64], total: u64, base: u32) -> EntropyValue {
    let ln_base = (base as f64).ln();
    if let Some(&c0) = counts.first() {
        if counts.iter().all(|&c| c == c0) {
            let support = counts.len() as u64;
            return EntropyValue {
                value: (support as f64).ln() / ln_base,
                base,
                exact: exact_log(support, base as u64).map(Ratio::from_integer),
            };
        }
    }
    let t = total as f64;
    let weighted = neumaier_sum(counts.iter().map(|&c| c as f64 * (c as f64).ln()));
    let nats = t.ln() - weighted / t;
    EntropyValue {
        value: (nats / ln_base).max(0.0),
        base,
        exact: None,
    }
}

/// `-Σ P log_base P` over the table.
pub fn entropy(d: &DistTable, base: Prime) -> Result<EntropyValue, InfoError> {
    if d.total == 0 {
        return Err(InfoError::EmptyTable);
    }
    let counts: Vec<u64> = d.cells.iter().map(|&(_, c)| c).collect();
    Ok(entropy_of_counts(&counts, d.total, base.get()))
}

fn check_groups(d: &DistTable, a: &[usize], b: &[usize]) -> Result<(), InfoError> {
    if a.is_empty() || b.is_empty() || a.iter().any(|x| b.contains(x)) {
        return Err(InfoError::BadGroups);
    }
    for &v in a.iter().chain(b) {
        if v >= d.arity() {
            return Err(InfoError::BadVariable {
                index: v,
                arity: d.arity(),
            });
        }
    }
    Ok(())
}

/// Joint table of the two groups as a pair of packed variables.
fn pair_table(d: &DistTable, a: &[usize], b: &[usize]) -> Result<(DistTable, u64), InfoError> {
    let vars: Vec<usize> = a.iter().chain(b).copied().collect();
    let joint = d.marginal(&vars)?;
    let ra = key_space(&joint.radices[..a.len()])?;
    let rb = key_space(&joint.radices[a.len()..])?;
    Ok((
        DistTable {
            radices: vec![ra, rb],
            cells: joint.cells,
            total: joint.total,
        },
        ra,
    ))
}

/// A cell where the joint count differs from the product of marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dependence {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub joint: u64,
    pub count_a: u64,
    pub count_b: u64,
    pub total: u64,
}

/// First cell (in key order) violating `count(a,b) * total == count(a) *
/// count(b)`, searching the product of the two marginal supports.
pub fn first_dependence(
    d: &DistTable,
    a: &[usize],
    b: &[usize],
) -> Result<Option<Dependence>, InfoError> {
    check_groups(d, a, b)?;
    let (pair, ra) = pair_table(d, a, b)?;
    let mut ca: BTreeMap<u64, u64> = BTreeMap::new();
    let mut cb: BTreeMap<u64, u64> = BTreeMap::new();
    for &(k, c) in &pair.cells {
        *ca.entry(k % ra).or_insert(0) += c;
        *cb.entry(k / ra).or_insert(0) += c;
    }
    let total = pair.total;
    let radices_a: Vec<u64> = a.iter().map(|&v| d.radices[v]).collect();
    let radices_b: Vec<u64> = b.iter().map(|&v| d.radices[v]).collect();
    let joint: HashMap<u64, u64> = pair.cells.iter().copied().collect();
    for (&kb, &nb) in &cb {
        for (&ka, &na) in &ca {
            let c = joint.get(&(ka + ra * kb)).copied().unwrap_or(0);
            if c as u128 * total as u128 != na as u128 * nb as u128 {
                return Ok(Some(Dependence {
                    a: unpack_key(&radices_a, ka),
                    b: unpack_key(&radices_b, kb),
                    joint: c,
                    count_a: na,
                    count_b: nb,
                    total,
                }));
            }
        }
    }
    Ok(None)
}

/// Exact independence test: `count(a,b) * total == count(a) * count(b)` for
/// every cell of the product of the marginal supports.
pub fn factorizes(d: &DistTable, a: &[usize], b: &[usize]) -> Result<bool, InfoError> {
    check_groups(d, a, b)?;
    let (pair, ra) = pair_table(d, a, b)?;
    let mut ca: HashMap<u64, u64> = HashMap::new();
    let mut cb: HashMap<u64, u64> = HashMap::new();
    for &(k, c) in &pair.cells {
        *ca.entry(k % ra).or_insert(0) += c;
        *cb.entry(k / ra).or_insert(0) += c;
    }
    if pair.cells.len() as u128 != ca.len() as u128 * cb.len() as u128 {
        return Ok(false);
    }
    let total = pair.total as u128;
    Ok(pair
        .cells
        .iter()
        .all(|&(k, c)| c as u128 * total == ca[&(k % ra)] as u128 * cb[&(k / ra)] as u128))
}

/// `I(A;B) = H(A) + H(B) - H(A,B)`; `exact` is set to zero when the joint
/// table factorizes.
pub fn mutual_information(
    d: &DistTable,
    a: &[usize],
    b: &[usize],
    base: Prime,
) -> Result<EntropyValue, InfoError> {
    check_groups(d, a, b)?;
    let ha = entropy(&d.marginal(a)?, base)?;
    let hb = entropy(&d.marginal(b)?, base)?;
    let vars: Vec<usize> = a.iter().chain(b).copied().collect();
    let hab = entropy(&d.marginal(&vars)?, base)?;
    let exact = if factorizes(d, a, b)? {
        Some(Ratio::from_integer(0))
    } else {
        match (ha.exact, hb.exact, hab.exact) {
            (Some(x), Some(y), Some(z)) if x + y >= z => Some(x + y - z),
            _ => None,
        }
    };
    Ok(EntropyValue {
        value: (ha.value + hb.value - hab.value).max(0.0),
        base: base.get(),
        exact,
    })
}

/// `H(target | given) = Σ_g P(g) H(target | given = g)`, computed from the
/// conditional slices directly.
pub fn conditional_entropy(
    d: &DistTable,
    target: &[usize],
    given: &[usize],
    base: Prime,
) -> Result<EntropyValue, InfoError> {
    check_groups(d, given, target)?;
    let (pair, rg) = pair_table(d, given, target)?;
    let mut slices: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(k, c) in &pair.cells {
        slices.entry(k % rg).or_default().push(c);
    }
    let total = pair.total as f64;
    let value = neumaier_sum(slices.values().map(|counts| {
        let sub: u64 = counts.iter().sum();
        sub as f64 / total * entropy_of_counts(counts, sub, base.get()).value
    }));
    Ok(EntropyValue {
        value,
        base: base.get(),
        exact: None,
    })
}

/// Exact equality of the normalized distributions.
pub fn same_distribution(d1: &DistTable, d2: &DistTable) -> Result<bool, InfoError> {
    if d1.arity() != d2.arity() {
        return Err(InfoError::ArityMismatch {
            left: d1.arity(),
            right: d2.arity(),
        });
    }
    Ok(first_difference(d1, d2).is_none())
}

/// First outcome (in sorted order) whose normalized probability differs,
/// with the two counts. Tables must have equal arity.
pub fn first_difference(d1: &DistTable, d2: &DistTable) -> Option<(Vec<u64>, u64, u64)> {
    let (t1, t2) = (d1.total as u128, d2.total as u128);
    if d1.radices == d2.radices {
        let mut i = 0;
        let mut j = 0;
        loop {
            let a = d1.cells.get(i);
            let b = d2.cells.get(j);
            let (key, c1, c2) = match (a, b) {
                (None, None) => return None,
                (Some(&(k, c)), None) => (k, c, 0),
                (None, Some(&(k, c))) => (k, 0, c),
                (Some(&(ka, ca)), Some(&(kb, cb))) => {
                    if ka == kb {
                        (ka, ca, cb)
                    } else if ka < kb {
                        (ka, ca, 0)
                    } else {
                        (kb, 0, cb)
                    }
                }
            };
            if c1 > 0 {
                i += 1;
            }
            if c2 > 0 {
                j += 1;
            }
            if c1 as u128 * t2 != c2 as u128 * t1 {
                return Some((unpack_key(&d1.radices, key), c1, c2));
            }
        }
    }
    let m1: BTreeMap<Vec<u64>, u64> = d1.iter().collect();
    let m2: BTreeMap<Vec<u64>, u64> = d2.iter().collect();
    let keys: std::collections::BTreeSet<Vec<u64>> = m1.keys().chain(m2.keys()).cloned().collect();
    keys.into_iter().find_map(|k| {
        let c1 = m1.get(&k).copied().unwrap_or(0);
        let c2 = m2.get(&k).copied().unwrap_or(0);
        (c1 as u128 * t2 != c2 as u128 * t1).then_some((k, c1, c2))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: u32) -> Prime {
        Prime::new(n).unwrap()
    }

    fn table(radices: &[u64], counts: &[(&[u64], u64)]) -> DistTable {
        DistTable::from_counts(
            radices.to_vec(),
            counts.iter().map(|(o, c)| (o.to_vec(), *c)),
        )
        .unwrap()
    }

    #[test]
    fn identity_map_over_f2_squared() {
        let space = SampleSpace::new(Prime::TWO, 2, vec![2, 2]);
        let d = enumerate(&space, |s, out| {
            out[0] = s % 2;
            out[1] = s / 2;
        })
        .unwrap();
        assert_eq!(d.support_size(), 4);
        assert!(d.iter().all(|(_, c)| c == 1));
    }

    #[test]
    fn sum_map_over_f2_squared() {
        let space = SampleSpace::new(Prime::TWO, 2, vec![2]);
        let d = enumerate(&space, |s, out| out[0] = (s % 2 + s / 2) % 2).unwrap();
        assert_eq!(d.count(&[0]), 2);
        assert_eq!(d.count(&[1]), 2);
    }

    #[test]
    fn sparse_path_matches_dense_path() {
        let space = SampleSpace::new(p(3), 6, vec![729]);
        let dense = enumerate(&space, |s, out| out[0] = (s * 7) % 729).unwrap();
        let wide = SampleSpace::new(p(3), 6, vec![1 << 30]);
        let sparse = enumerate(&wide, |s, out| out[0] = (s * 7) % 729).unwrap();
        assert_eq!(dense.support_size(), sparse.support_size());
        assert!(dense
            .iter()
            .zip(sparse.iter())
            .all(|(a, b)| a == b));
    }

    #[test]
    fn enumerate_refuses_over_cap() {
        let space = SampleSpace::new(Prime::TWO, 10, vec![2]).with_max_states(1000);
        let err = enumerate(&space, |_, out| out[0] = 0).unwrap_err();
        assert_eq!(
            err,
            InfoError::StateSpaceTooLarge {
                required: SpaceSize(1024),
                cap: 1000
            }
        );
    }

    #[test]
    fn entropy_examples() {
        let uniform = DistTable::from_counts(vec![27], (0..27).map(|k| (vec![k], 5))).unwrap();
        let h = entropy(&uniform, p(3)).unwrap();
        assert!(h.is_exactly(Ratio::from_integer(3)));
        assert!((h.value - 3.0).abs() < 1e-12);

        let point = table(&[4], &[(&[2], 9)]);
        let h = entropy(&point, Prime::TWO).unwrap();
        assert!(h.is_exactly(Ratio::from_integer(0)));
        assert_eq!(h.value, 0.0);

        let skewed = table(&[2], &[(&[0], 3), (&[1], 1)]);
        let h = entropy(&skewed, Prime::TWO).unwrap();
        let expect = -(0.75f64 * 0.75f64.log2() + 0.25 * 0.25f64.log2());
        assert!((h.value - expect).abs() < 1e-12);
        assert_eq!(h.exact, None);
    }

    #[test]
    fn mutual_information_examples() {
        let indep = table(&[2, 2], &[(&[0, 0], 1), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 1)]);
        let mi = mutual_information(&indep, &[0], &[1], Prime::TWO).unwrap();
        assert!(mi.is_exactly(Ratio::from_integer(0)));

        let copy = table(&[2, 2], &[(&[0, 0], 1), (&[1, 1], 1)]);
        let mi = mutual_information(&copy, &[0], &[1], Prime::TWO).unwrap();
        assert!((mi.value - 1.0).abs() < 1e-12);
        assert!(mi.is_exactly(Ratio::from_integer(1)));
        assert!(!factorizes(&copy, &[0], &[1]).unwrap());

        assert_eq!(
            mutual_information(&copy, &[0], &[0], Prime::TWO),
            Err(InfoError::BadGroups)
        );
        assert!(matches!(
            mutual_information(&copy, &[0], &[2], Prime::TWO),
            Err(InfoError::BadVariable { .. })
        ));
    }

    #[test]
    fn factorization_needs_full_product_support() {
        // Marginals uniform, joint missing a cell.
        let d = table(&[2, 2], &[(&[0, 0], 2), (&[1, 1], 1), (&[1, 0], 1)]);
        assert!(!factorizes(&d, &[0], &[1]).unwrap());
        let dep = first_dependence(&d, &[0], &[1]).unwrap().unwrap();
        assert_eq!((dep.a, dep.b, dep.joint), (vec![0], vec![0], 2));

        let gap = table(&[2, 2], &[(&[0, 0], 1), (&[1, 1], 1)]);
        let dep = first_dependence(&gap, &[0], &[1]).unwrap().unwrap();
        assert_eq!((dep.a, dep.b, dep.joint), (vec![0], vec![0], 1));
        let indep = table(&[2, 2], &[(&[0, 0], 1), (&[0, 1], 1), (&[1, 0], 1), (&[1, 1], 1)]);
        assert_eq!(first_dependence(&indep, &[0], &[1]).unwrap(), None);
    }

    #[test]
    fn same_distribution_examples() {
        let a = DistTable::from_counts(vec![8], (0..8).map(|k| (vec![k], 4))).unwrap();
        let b = DistTable::from_counts(vec![8], (0..8).map(|k| (vec![k], 1))).unwrap();
        assert!(same_distribution(&a, &a).unwrap());
        assert!(same_distribution(&a, &b).unwrap());
        let c = table(&[2], &[(&[0], 3), (&[1], 1)]);
        let d = table(&[2], &[(&[0], 1), (&[1], 1)]);
        assert!(!same_distribution(&c, &d).unwrap());
        assert_eq!(first_difference(&c, &d), Some((vec![0], 3, 1)));
        let e = table(&[2, 2], &[(&[0, 0], 1)]);
        assert!(matches!(
            same_distribution(&c, &e),
            Err(InfoError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn marginal_and_merge() {
        let mut d = table(&[2, 3], &[(&[0, 2], 1), (&[1, 2], 2), (&[1, 0], 1)]);
        let m = d.marginal(&[1]).unwrap();
        assert_eq!(m.count(&[2]), 3);
        assert_eq!(m.count(&[0]), 1);
        d.merge(&table(&[2, 3], &[(&[0, 2], 5)])).unwrap();
        assert_eq!(d.count(&[0, 2]), 6);
        assert_eq!(d.total(), 9);
    }

    #[test]
    fn find_first_returns_smallest() {
        assert_eq!(find_first(1_000_000, |s| s % 7919 == 7918), Some(7918));
        assert_eq!(find_first(100, |_| false), None);
    }

    use proptest::prelude::*;

    /// Random joint table over two variables with radices up to 4.
    fn pair_table() -> impl Strategy<Value = DistTable> {
        (1u64..=4, 1u64..=4).prop_flat_map(|(ra, rb)| {
            proptest::collection::vec(0u64..6, (ra * rb) as usize)
                .prop_filter("nonzero total", |c| c.iter().any(|&x| x > 0))
                .prop_map(move |counts| {
                    DistTable::from_counts(
                        vec![ra, rb],
                        counts.iter().enumerate().map(|(i, &c)| (vec![i as u64 % ra, i as u64 / ra], c)),
                    )
                    .unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn chain_rule(d in pair_table(), base in proptest::sample::select(vec![2u32, 3, 5])) {
            let b = p(base);
            let h_ab = entropy(&d, b).unwrap().value;
            let h_a = entropy(&d.marginal(&[0]).unwrap(), b).unwrap().value;
            let h_b_given_a = conditional_entropy(&d, &[1], &[0], b).unwrap().value;
            prop_assert!((h_ab - (h_a + h_b_given_a)).abs() <= 1e-12, "{} vs {}", h_ab, h_a + h_b_given_a);
        }

        #[test]
        fn mutual_information_is_symmetric_and_nonnegative(d in pair_table()) {
            let ab = mutual_information(&d, &[0], &[1], Prime::TWO).unwrap();
            let ba = mutual_information(&d, &[1], &[0], Prime::TWO).unwrap();
            prop_assert!((ab.value - ba.value).abs() <= 1e-12);
            prop_assert!(ab.value >= 0.0);
            let independent = factorizes(&d, &[0], &[1]).unwrap();
            prop_assert_eq!(ab.is_exactly(Ratio::from_integer(0)), independent);
            if independent {
                prop_assert!(ab.value <= 1e-12);
            }
        }
    }
}
