//! Arithmetic over small prime fields F_p and fixed-length symbol vectors.
//!
//! Residues are stored as `u8`; only the primes in [`SUPPORTED_PRIMES`] are
//! accepted, which keeps every product below 256 and every table the search
//! and verification code builds small enough to enumerate.

use std::fmt;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

/// Moduli accepted by [`Prime::new`].
pub const SUPPORTED_PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("unsupported modulus {0}; expected one of {SUPPORTED_PRIMES:?}")]
    UnsupportedModulus(u32),
    #[error("value {value} is not a residue modulo {modulus}")]
    ValueOutOfRange { value: u32, modulus: u32 },
    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u32, right: u32 },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dimension mismatch: {rows}x{cols} matrix applied to length {len}")]
    DimensionMismatch { rows: usize, cols: usize, len: usize },
    #[error("matrix shape {rows}x{cols} does not match {len} entries")]
    BadShape { rows: usize, cols: usize, len: usize },
}

/// A validated prime modulus.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Prime(u8);

impl Prime {
    pub const TWO: Prime = Prime(2);

    pub fn new(p: u32) -> Result<Self, FieldError> {
        if SUPPORTED_PRIMES.contains(&p) {
            Ok(Prime(p as u8))
        } else {
            Err(FieldError::UnsupportedModulus(p))
        }
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0 as u32
    }

    #[inline]
    pub fn add(self, a: u8, b: u8) -> u8 {
        let s = a + b;
        if s >= self.0 {
            s - self.0
        } else {
            s
        }
    }

    #[inline]
    pub fn neg(self, a: u8) -> u8 {
        if a == 0 {
            0
        } else {
            self.0 - a
        }
    }

    #[inline]
    pub fn sub(self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(self, a: u8, b: u8) -> u8 {
        ((a as u16 * b as u16) % self.0 as u16) as u8
    }

    pub fn inv(self, a: u8) -> Option<u8> {
        (1..self.0).find(|&b| self.mul(a, b) == 1)
    }

    /// `p^n`, or `None` on `u64` overflow.
    pub fn pow(self, n: usize) -> Option<u64> {
        (self.0 as u64).checked_pow(u32::try_from(n).ok()?)
    }
}

impl TryFrom<u32> for Prime {
    type Error = FieldError;
    fn try_from(p: u32) -> Result<Self, Self::Error> {
        Prime::new(p)
    }
}

impl From<Prime> for u32 {
    fn from(p: Prime) -> u32 {
        p.get()
    }
}

impl fmt::Debug for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.0)
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One residue together with its modulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElement {
    value: u8,
    modulus: Prime,
}

impl FieldElement {
    pub fn new(value: u32, modulus: Prime) -> Result<Self, FieldError> {
        if value >= modulus.get() {
            return Err(FieldError::ValueOutOfRange {
                value,
                modulus: modulus.get(),
            });
        }
        Ok(FieldElement {
            value: value as u8,
            modulus,
        })
    }

    pub fn zero(modulus: Prime) -> Self {
        FieldElement { value: 0, modulus }
    }

    pub fn value(self) -> u32 {
        self.value as u32
    }

    pub fn modulus(self) -> Prime {
        self.modulus
    }
}

fn same_modulus(a: Prime, b: Prime) -> Result<Prime, FieldError> {
    if a == b {
        Ok(a)
    } else {
        Err(FieldError::ModulusMismatch {
            left: a.get(),
            right: b.get(),
        })
    }
}

/// `(x + y) mod p`.
pub fn add(x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
    let p = same_modulus(x.modulus, y.modulus)?;
    Ok(FieldElement {
        value: p.add(x.value, y.value),
        modulus: p,
    })
}

/// `(x * y) mod p`.
pub fn mul(x: FieldElement, y: FieldElement) -> Result<FieldElement, FieldError> {
    let p = same_modulus(x.modulus, y.modulus)?;
    Ok(FieldElement {
        value: p.mul(x.value, y.value),
        modulus: p,
    })
}

type Symbols = SmallVec<[u8; 8]>;

/// A vector of field symbols sharing one modulus.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymbolVector {
    modulus: Prime,
    elems: Symbols,
}

impl SymbolVector {
    pub fn new(modulus: Prime, values: &[u32]) -> Result<Self, FieldError> {
        let mut elems = Symbols::with_capacity(values.len());
        for &v in values {
            elems.push(FieldElement::new(v, modulus)?.value);
        }
        Ok(SymbolVector { modulus, elems })
    }

    pub fn zeros(modulus: Prime, len: usize) -> Self {
        SymbolVector {
            modulus,
            elems: SmallVec::from_elem(0, len),
        }
    }

    pub fn from_elements(elems: &[FieldElement]) -> Result<Self, FieldError> {
        let Some(first) = elems.first() else {
            return Err(FieldError::LengthMismatch { left: 0, right: 1 });
        };
        let modulus = first.modulus;
        let mut out = Symbols::with_capacity(elems.len());
        for e in elems {
            same_modulus(modulus, e.modulus)?;
            out.push(e.value);
        }
        Ok(SymbolVector {
            modulus,
            elems: out,
        })
    }

    /// Little-endian base-`p` digits of `packed`, `len` of them.
    pub fn unpack(modulus: Prime, len: usize, mut packed: u64) -> Self {
        let p = modulus.get() as u64;
        let elems = (0..len)
            .map(|_| {
                let d = (packed % p) as u8;
                packed /= p;
                d
            })
            .collect();
        SymbolVector { modulus, elems }
    }

    /// Inverse of [`SymbolVector::unpack`].
    pub fn pack(&self) -> u64 {
        let p = self.modulus.get() as u64;
        self.elems
            .iter()
            .rev()
            .fold(0u64, |acc, &d| acc * p + d as u64)
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<FieldElement> {
        self.elems.get(i).map(|&value| FieldElement {
            value,
            modulus: self.modulus,
        })
    }

    pub fn residues(&self) -> &[u8] {
        &self.elems
    }

    pub fn values(&self) -> Vec<u32> {
        self.elems.iter().map(|&d| d as u32).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.elems.iter().all(|&d| d == 0)
    }

    /// Sub-vector `[start, start + len)`.
    pub fn slice(&self, start: usize, len: usize) -> Option<Self> {
        let elems = self.elems.get(start..start + len)?;
        Some(SymbolVector {
            modulus: self.modulus,
            elems: Symbols::from_slice(elems),
        })
    }
}

impl fmt::Display for SymbolVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, d) in self.elems.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{d}")?;
        }
        f.write_str("]")
    }
}

fn check_compatible(x: &SymbolVector, y: &SymbolVector) -> Result<Prime, FieldError> {
    let p = same_modulus(x.modulus, y.modulus)?;
    if x.len() != y.len() {
        return Err(FieldError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    Ok(p)
}

/// Elementwise sum.
pub fn vec_add(x: &SymbolVector, y: &SymbolVector) -> Result<SymbolVector, FieldError> {
    let p = check_compatible(x, y)?;
    let elems = x
        .elems
        .iter()
        .zip(&y.elems)
        .map(|(&a, &b)| p.add(a, b))
        .collect();
    Ok(SymbolVector { modulus: p, elems })
}

/// Elementwise `c * v`.
pub fn scale(c: FieldElement, v: &SymbolVector) -> Result<SymbolVector, FieldError> {
    let p = same_modulus(c.modulus, v.modulus)?;
    let elems = v.elems.iter().map(|&a| p.mul(c.value, a)).collect();
    Ok(SymbolVector { modulus: p, elems })
}

/// Dense row-major matrix over F_p.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    modulus: Prime,
    data: Vec<u8>,
}

impl Matrix {
    pub fn new(modulus: Prime, rows: usize, cols: usize, entries: &[u32]) -> Result<Self, FieldError> {
        if entries.len() != rows * cols {
            return Err(FieldError::BadShape {
                rows,
                cols,
                len: entries.len(),
            });
        }
        let data = entries
            .iter()
            .map(|&v| FieldElement::new(v, modulus).map(|e| e.value))
            .collect::<Result<_, _>>()?;
        Ok(Matrix {
            rows,
            cols,
            modulus,
            data,
        })
    }

    pub fn zeros(modulus: Prime, rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            modulus,
            data: vec![0; rows * cols],
        }
    }

    pub fn identity(modulus: Prime, n: usize) -> Self {
        let mut m = Matrix::zeros(modulus, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// The `index`-th matrix of this shape, reading entries as little-endian
    /// base-`p` digits of `index`. Used to enumerate coefficient spaces.
    pub fn from_index(modulus: Prime, rows: usize, cols: usize, index: u64) -> Self {
        let v = SymbolVector::unpack(modulus, rows * cols, index);
        Matrix {
            rows,
            cols,
            modulus,
            data: v.residues().to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn modulus(&self) -> Prime {
        self.modulus
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, value: u8) {
        debug_assert!(value < self.modulus.0);
        self.data[r * self.cols + c] = value;
    }

    pub fn row(&self, r: usize) -> &[u8] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> Vec<u32> {
        self.data.iter().map(|&d| d as u32).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&d| d == 0)
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix, FieldError> {
        let p = same_modulus(self.modulus, rhs.modulus)?;
        if self.cols != rhs.rows {
            return Err(FieldError::DimensionMismatch {
                rows: rhs.rows,
                cols: rhs.cols,
                len: self.cols,
            });
        }
        let mut out = Matrix::zeros(p, self.rows, rhs.cols);
        for r in 0..self.rows {
            for c in 0..rhs.cols {
                let mut acc = 0u8;
                for k in 0..self.cols {
                    acc = p.add(acc, p.mul(self.get(r, k), rhs.get(k, c)));
                }
                out.data[r * rhs.cols + c] = acc;
            }
        }
        Ok(out)
    }

    /// Residue-slice product used on hot paths; `v.len()` must equal `cols`.
    pub(crate) fn apply_residues(&self, v: &[u8], out: &mut [u8]) {
        let p = self.modulus;
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            *o = self
                .row(r)
                .iter()
                .zip(v)
                .fold(0u8, |acc, (&a, &b)| p.add(acc, p.mul(a, b)));
        }
    }
}

/// Matrix-vector product over F_p.
pub fn mat_apply(m: &Matrix, v: &SymbolVector) -> Result<SymbolVector, FieldError> {
    let p = same_modulus(m.modulus, v.modulus)?;
    if m.cols != v.len() {
        return Err(FieldError::DimensionMismatch {
            rows: m.rows,
            cols: m.cols,
            len: v.len(),
        });
    }
    let mut elems: Symbols = SmallVec::from_elem(0, m.rows);
    m.apply_residues(&v.elems, &mut elems);
    Ok(SymbolVector { modulus: p, elems })
}

/// Rank over F_p by Gaussian elimination.
pub fn rank(m: &Matrix) -> usize {
    let p = m.modulus;
    let mut a = m.data.clone();
    let cols = m.cols;
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..m.rows).find(|&r| a[r * cols + c] != 0) else {
            continue;
        };
        for k in 0..cols {
            a.swap(pivot * cols + k, rank * cols + k);
        }
        let inv = p.inv(a[rank * cols + c]).expect("nonzero pivot is invertible");
        for k in 0..cols {
            a[rank * cols + k] = p.mul(a[rank * cols + k], inv);
        }
        for r in 0..m.rows {
            let f = a[r * cols + c];
            if r == rank || f == 0 {
                continue;
            }
            for k in 0..cols {
                a[r * cols + k] = p.sub(a[r * cols + k], p.mul(f, a[rank * cols + k]));
            }
        }
        rank += 1;
        if rank == m.rows {
            break;
        }
    }
    rank
}
