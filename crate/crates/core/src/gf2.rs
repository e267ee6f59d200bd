//! Linear algebra over GF(2) on word-packed bit rows.
//!
//! Rows are `u64` words; elimination is XOR of whole words. The
//! [`EchelonBasis`] accumulator backs cycle-basis independence filtering and
//! [`solve`] backs sign recovery.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = u64::BITS as usize;

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// Fixed-length bit vector. Bits past `len` are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Gf2Vector {
    len: usize,
    words: Vec<u64>,
}

impl Gf2Vector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for i in 0..len {
            v.set(i, true);
        }
        v
    }

    /// Vector with ones exactly at `positions`.
    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v = Self::zeros(len);
        for p in positions {
            if p >= len {
                return Err(Error::input(format!("bit {p} out of range for length {len}")));
            }
            v.set(p, true);
        }
        Ok(v)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if bit {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &Gf2Vector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of `self AND other`.
    pub fn dot(&self, other: &Gf2Vector) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum::<u32>()
            % 2
            == 1
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| k * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Indices of set bits in ascending order.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * WORD_BITS + b)
                }
            })
        })
    }

    pub fn as_words(&self) -> &[u64] {
        &self.words
    }
}

impl fmt::Debug for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Vector({self})")
    }
}

impl fmt::Display for Gf2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Gf2Vector {
    type Err = Error;

    /// Parses strings such as `"1011"`, bit 0 first.
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::input(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_bools(&bits))
    }
}

/// Dense GF(2) matrix stored as packed rows.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gf2Matrix {
    cols: usize,
    rows: Vec<Gf2Vector>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            cols,
            rows: vec![Gf2Vector::zeros(cols); rows],
        }
    }

    pub fn from_rows(cols: usize, rows: Vec<Gf2Vector>) -> Result<Self> {
        if let Some(r) = rows.iter().position(|r| r.len() != cols) {
            return Err(Error::input(format!(
                "row {r} has length {}, expected {cols}",
                rows[r].len()
            )));
        }
        Ok(Self { cols, rows })
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &Gf2Vector {
        &self.rows[i]
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.rows[i].set(j, bit);
    }

    pub fn mul_vec(&self, x: &Gf2Vector) -> Result<Gf2Vector> {
        if x.len() != self.cols {
            return Err(Error::input(format!(
                "vector length {} does not match {} columns",
                x.len(),
                self.cols
            )));
        }
        Ok(Gf2Vector::from_bools(
            &self.rows.iter().map(|r| r.dot(x)).collect::<Vec<_>>(),
        ))
    }

    /// True iff column `j` is identically zero.
    pub fn column_is_zero(&self, j: usize) -> bool {
        self.rows.iter().all(|r| !r.get(j))
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.cols);
        self.rows
            .iter()
            .filter(|r| basis.rank_increment(r).expect("row length checked at construction"))
            .count()
    }
}

/// Row space accumulator kept in reduced row echelon form.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    cols: usize,
    rows: Vec<Gf2Vector>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(cols: usize) -> Self {
        Self {
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    /// Residue of `v` after eliminating every stored pivot.
    pub fn reduce(&self, v: &Gf2Vector) -> Result<Gf2Vector> {
        self.check_len(v)?;
        let mut r = v.clone();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            if r.get(p) {
                r.xor_assign(row);
            }
        }
        Ok(r)
    }

    pub fn contains(&self, v: &Gf2Vector) -> Result<bool> {
        Ok(self.reduce(v)?.is_zero())
    }

    /// Absorbs `v` and returns true if it is independent of the stored rows;
    /// returns false and leaves the accumulator untouched otherwise.
    pub fn rank_increment(&mut self, v: &Gf2Vector) -> Result<bool> {
        let r = self.reduce(v)?;
        let Some(p) = r.first_one() else {
            return Ok(false);
        };
        for row in &mut self.rows {
            if row.get(p) {
                row.xor_assign(&r);
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        Ok(true)
    }

    fn check_len(&self, v: &Gf2Vector) -> Result<()> {
        if v.len() != self.cols {
            return Err(Error::input(format!(
                "vector length {} does not match accumulator width {}",
                v.len(),
                self.cols
            )));
        }
        Ok(())
    }
}

/// Solves `A x = b` by Gauss-Jordan elimination on the augmented matrix.
///
/// Returns `Ok(None)` when the system is inconsistent. Free variables are set
/// to zero, so the answer is a deterministic function of `(A, b)`.
pub fn solve(a: &Gf2Matrix, b: &Gf2Vector) -> Result<Option<Gf2Vector>> {
    if a.nrows() != b.len() {
        return Err(Error::input(format!(
            "right-hand side has length {}, matrix has {} rows",
            b.len(),
            a.nrows()
        )));
    }
    let cols = a.ncols();
    // Augmented rows: bits 0..cols hold A, bit `cols` holds b.
    let mut rows: Vec<Gf2Vector> = a
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut aug = Gf2Vector::zeros(cols + 1);
            for j in r.ones_iter() {
                aug.set(j, true);
            }
            aug.set(cols, b.get(i));
            aug
        })
        .collect();

    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        let pivot_row = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row.get(col) {
                row.xor_assign(&pivot_row);
            }
        }
        pivots.push(col);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    if rows[next..].iter().any(|r| r.get(cols)) {
        return Ok(None);
    }
    let mut x = Gf2Vector::zeros(cols);
    for (r, &col) in pivots.iter().enumerate() {
        x.set(col, rows[r].get(cols));
    }
    Ok(Some(x))
}
