//! Dense GF(2) matrices and brute-force code metrics.
//!
//! Rows are packed into `u64` words, least significant bit first, so column
//! `j` of a row lives in word `j / 64` at bit `j % 64`. Bits past `cols` in
//! the last word of every row are always zero.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest message dimension for which codewords are enumerated exhaustively.
pub const MAX_ENUM_ROWS: usize = 24;

/// Work budget (in elementary set operations) for a single GHW search.
const GHW_WORK_LIMIT: f64 = 2e9;
/// Below this estimate the flat search runs without costing the alternative.
const CHEAP_WORK: f64 = 1e6;

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

#[inline]
pub(crate) fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameters(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        let words = words_for(cols);
        Ok(Self {
            rows,
            cols,
            words,
            data: vec![0; rows * words],
        })
    }

    pub fn identity(size: usize) -> Result<Self> {
        let mut m = Self::zeros(size, size)?;
        for i in 0..size {
            m.set(i, i, true);
        }
        Ok(m)
    }

    /// Builds a matrix from rows of 0/1 entries.
    pub fn from_bits<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols)?;
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    actual: row.len(),
                });
            }
            for (j, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(i, j, true),
                    _ => return Err(Error::Malformed(format!("entry ({i},{j}) is {b}"))),
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "({i},{j}) out of bounds");
        (self.data[i * self.words + j / 64] >> (j % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "({i},{j}) out of bounds");
        let w = &mut self.data[i * self.words + j / 64];
        let mask = 1u64 << (j % 64);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    /// Packed words of row `i`.
    #[inline]
    pub fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    /// Row `i` as 0/1 entries.
    pub fn row(&self, i: usize) -> Vec<u8> {
        (0..self.cols).map(|j| self.get(i, j) as u8).collect()
    }

    /// Column `j` as 0/1 entries.
    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.rows).map(|i| self.get(i, j) as u8).collect()
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_row_into(&mut self, src: usize, dst: usize) {
        assert!(src < self.rows && dst < self.rows);
        if src == dst {
            self.data[dst * self.words..(dst + 1) * self.words].fill(0);
            return;
        }
        for w in 0..self.words {
            let v = self.data[src * self.words + w];
            self.data[dst * self.words + w] ^= v;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.words {
            self.data.swap(a * self.words + w, b * self.words + w);
        }
    }

    /// New matrix made of the given columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(self.rows, cols.len())?;
        for (nj, &j) in cols.iter().enumerate() {
            if j >= self.cols {
                return Err(Error::IndexOutOfRange {
                    index: j,
                    limit: self.cols,
                });
            }
            for i in 0..self.rows {
                if self.get(i, j) {
                    out.set(i, nj, true);
                }
            }
        }
        Ok(out)
    }

    /// New matrix made of the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let mut out = Self::zeros(rows.len(), self.cols)?;
        for (ni, &i) in rows.iter().enumerate() {
            if i >= self.rows {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    limit: self.rows,
                });
            }
            out.data[ni * self.words..(ni + 1) * self.words].copy_from_slice(self.row_words(i));
        }
        Ok(out)
    }

    /// `msg · G` over GF(2); `msg` holds 0/1 entries.
    pub fn left_mul(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if msg.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                actual: msg.len(),
            });
        }
        let mut acc = vec![0u64; self.words];
        for (i, &b) in msg.iter().enumerate() {
            if b & 1 == 1 {
                for (a, w) in acc.iter_mut().zip(self.row_words(i)) {
                    *a ^= w;
                }
            }
        }
        Ok((0..self.cols)
            .map(|j| ((acc[j / 64] >> (j % 64)) & 1) as u8)
            .collect())
    }

    /// XOR of the listed columns, as a 0/1 vector of length `rows`.
    pub fn column_sum(&self, cols: &[usize]) -> Vec<u8> {
        let mut out = vec![0u8; self.rows];
        for &j in cols {
            for (i, o) in out.iter_mut().enumerate() {
                *o ^= self.get(i, j) as u8;
            }
        }
        out
    }

    /// Columns packed as integers (bit `i` = row `i`); requires `rows <= 64`.
    pub(crate) fn columns_as_u64(&self) -> Vec<u64> {
        assert!(self.rows <= 64);
        (0..self.cols)
            .map(|j| (0..self.rows).fold(0u64, |acc, i| acc | ((self.get(i, j) as u64) << i)))
            .collect()
    }

    pub fn is_zero_column(&self, j: usize) -> bool {
        (0..self.rows).all(|i| !self.get(i, j))
    }

    /// Row rank over GF(2), by Gaussian elimination on a copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            let Some(pivot) = (rank..m.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            m.swap_rows(rank, pivot);
            for r in 0..m.rows {
                if r != rank && m.get(r, col) {
                    m.xor_row_into(rank, r);
                }
            }
            rank += 1;
            if rank == m.rows {
                break;
            }
        }
        rank
    }

    fn require_enumerable(&self) -> Result<()> {
        if self.rows > MAX_ENUM_ROWS {
            return Err(Error::TooLarge(format!(
                "{} rows exceeds the enumeration limit of {MAX_ENUM_ROWS}",
                self.rows
            )));
        }
        let rank = self.rank();
        if rank != self.rows {
            return Err(Error::RankDeficient {
                rank,
                rows: self.rows,
            });
        }
        Ok(())
    }

    /// Minimum Hamming weight over all nonzero codewords of the row space.
    pub fn min_distance(&self) -> Result<usize> {
        self.require_enumerable()?;
        let mut cur = vec![0u64; self.words];
        let mut best = usize::MAX;
        // Gray-code walk: step g flips message bit trailing_zeros(g).
        for g in 1u64..(1u64 << self.rows) {
            let bit = g.trailing_zeros() as usize;
            for (c, w) in cur.iter_mut().zip(self.row_words(bit)) {
                *c ^= w;
            }
            best = best.min(popcount(&cur));
        }
        Ok(best)
    }

    /// Generalized Hamming weight `d_i`: the smallest support of any
    /// `i`-dimensional subcode.
    ///
    /// Two exact searches are available (see [`ghw_by_subcodes`] and
    /// [`ghw_by_flats`]); the one with the smaller work estimate is used.
    pub fn ghw(&self, i: usize) -> Result<usize> {
        self.require_enumerable()?;
        check_ghw_index(self, i)?;
        let flat = flat_work(self, i);
        if flat <= CHEAP_WORK {
            return Ok(search_flats(self, i));
        }
        let sub = SubcodeSearch::new(self, i);
        let sub_work = sub.work();
        if sub_work.min(flat) > GHW_WORK_LIMIT {
            return Err(Error::TooLarge(format!(
                "ghw index {i} of a {}x{} code",
                self.rows, self.cols
            )));
        }
        if sub_work <= flat {
            Ok(sub.run())
        } else {
            Ok(search_flats(self, i))
        }
    }
}

fn check_ghw_index(g: &Gf2Matrix, i: usize) -> Result<()> {
    if i == 0 || i > g.rows {
        return Err(Error::IndexOutOfRange {
            index: i,
            limit: g.rows,
        });
    }
    Ok(())
}

/// `d_i` by searching subcodes spanned by low-weight codewords.
pub fn ghw_by_subcodes(g: &Gf2Matrix, i: usize) -> Result<usize> {
    g.require_enumerable()?;
    check_ghw_index(g, i)?;
    Ok(SubcodeSearch::new(g, i).run())
}

/// `d_i` as `n` minus the largest flat of rank `k - i` in the column matroid.
pub fn ghw_by_flats(g: &Gf2Matrix, i: usize) -> Result<usize> {
    g.require_enumerable()?;
    check_ghw_index(g, i)?;
    Ok(search_flats(g, i))
}

/// Reduced echelon basis of a subspace of `F_2^k` with `k <= 64`.
#[derive(Clone, Default)]
struct Basis {
    rows: Vec<u64>,
}

impl Basis {
    fn reduce(&self, mut v: u64) -> u64 {
        for &r in &self.rows {
            let pivot = 63 - r.leading_zeros();
            if (v >> pivot) & 1 == 1 {
                v ^= r;
            }
        }
        v
    }

    fn contains(&self, v: u64) -> bool {
        self.reduce(v) == 0
    }

    /// Adds `v`; returns false if it was already in the span.
    fn insert(&mut self, v: u64) -> bool {
        let v = self.reduce(v);
        if v == 0 {
            return false;
        }
        let pivot = 63 - v.leading_zeros();
        for r in &mut self.rows {
            if (*r >> pivot) & 1 == 1 {
                *r ^= v;
            }
        }
        self.rows.push(v);
        self.rows.sort_unstable_by(|a, b| b.cmp(a));
        true
    }
}

fn log2_binom(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    (0..k)
        .map(|j| ((n - j) as f64).log2() - ((j + 1) as f64).log2())
        .sum()
}

/// log2 of the number of `j`-dimensional subspaces of `F_2^k`.
fn log2_gaussian(k: usize, j: usize) -> f64 {
    if j > k {
        return f64::NEG_INFINITY;
    }
    (0..j)
        .map(|t| {
            (2f64.powi((k - t) as i32) - 1.0).log2() - (2f64.powi((j - t) as i32) - 1.0).log2()
        })
        .sum()
}

fn flat_work(g: &Gf2Matrix, i: usize) -> f64 {
    let (k, n) = (g.rows, g.cols);
    (0..=k - i)
        .map(|j| 2f64.powf(log2_gaussian(k, j).min(log2_binom(n, j))))
        .sum::<f64>()
        * (n * n) as f64
}

struct SubcodeSearch {
    i: usize,
    words: usize,
    /// Support of `msg·G`, indexed by message value.
    supports: Vec<u64>,
    /// Support size of a greedily built `i`-dimensional subcode.
    bound: usize,
    /// `(weight, msg)` of every codeword lighter than `bound`, sorted.
    light: Vec<(usize, usize)>,
    k: usize,
}

impl SubcodeSearch {
    fn new(g: &Gf2Matrix, i: usize) -> Self {
        let (k, words) = (g.rows, g.words);
        let count = 1usize << k;
        let mut supports = vec![0u64; count * words];
        for msg in 1..count {
            let bit = msg.trailing_zeros() as usize;
            let prev = msg & (msg - 1);
            for w in 0..words {
                supports[msg * words + w] = supports[prev * words + w] ^ g.row_words(bit)[w];
            }
        }
        let mut s = Self {
            i,
            words,
            supports,
            bound: g.cols,
            light: Vec::new(),
            k,
        };

        let mut basis = Basis::default();
        let mut acc = vec![0u64; words];
        for _ in 0..i {
            let mut pick: Option<(usize, usize)> = None;
            for msg in 1..count {
                if basis.contains(msg as u64) {
                    continue;
                }
                let w = s.union_weight(&acc, msg);
                if pick.is_none_or(|(_, bw)| w < bw) {
                    pick = Some((msg, w));
                }
            }
            let (msg, _) = pick.expect("full rank allows another independent codeword");
            basis.insert(msg as u64);
            for (a, b) in acc.iter_mut().zip(s.support(msg)) {
                *a |= b;
            }
        }
        s.bound = popcount(&acc);
        let bound = s.bound;
        // Every codeword of a subcode with support < bound weighs < bound.
        s.light = (1..count)
            .map(|msg| (popcount(s.support(msg)), msg))
            .filter(|&(w, _)| w < bound)
            .collect();
        s.light.sort_unstable();
        s
    }

    fn support(&self, msg: usize) -> &[u64] {
        &self.supports[msg * self.words..(msg + 1) * self.words]
    }

    fn union_weight(&self, acc: &[u64], msg: usize) -> usize {
        acc.iter()
            .zip(self.support(msg))
            .map(|(a, b)| (a | b).count_ones() as usize)
            .sum()
    }

    fn work(&self) -> f64 {
        let l = self.light.len();
        (0..self.i)
            .map(|j| 2f64.powf(log2_gaussian(self.k, j).min(log2_binom(l, j))))
            .sum::<f64>()
            * (l * self.words) as f64
    }

    fn run(&self) -> usize {
        let mut best = self.bound;
        let mut visited: HashSet<Vec<u64>> = HashSet::new();
        let mut frontier: Vec<(Basis, Vec<u64>)> = vec![(Basis::default(), vec![0u64; self.words])];
        for depth in 0..self.i {
            let last = depth + 1 == self.i;
            let mut next = Vec::new();
            for (basis, acc) in &frontier {
                if popcount(acc) >= best {
                    continue;
                }
                for &(weight, msg) in &self.light {
                    if weight >= best {
                        break;
                    }
                    if basis.contains(msg as u64) {
                        continue;
                    }
                    let w = self.union_weight(acc, msg);
                    if w >= best {
                        continue;
                    }
                    if last {
                        best = w;
                        continue;
                    }
                    let mut nb = basis.clone();
                    nb.insert(msg as u64);
                    if !visited.insert(nb.rows.clone()) {
                        continue;
                    }
                    let na = acc
                        .iter()
                        .zip(self.support(msg))
                        .map(|(a, b)| a | b)
                        .collect();
                    next.push((nb, na));
                }
            }
            frontier = next;
        }
        best
    }
}

fn search_flats(g: &Gf2Matrix, i: usize) -> usize {
    let (k, n) = (g.rows, g.cols);
    let cols = g.columns_as_u64();
    let words = words_for(n);

    let closure = |basis: &Basis| -> Vec<u64> {
        let mut mask = vec![0u64; words];
        for (j, &c) in cols.iter().enumerate() {
            if basis.contains(c) {
                mask[j / 64] |= 1 << (j % 64);
            }
        }
        mask
    };

    let mut level = vec![(Basis::default(), closure(&Basis::default()))];
    for _ in 0..k - i {
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        let mut next = Vec::new();
        for (basis, mask) in &level {
            for (j, &c) in cols.iter().enumerate() {
                if (mask[j / 64] >> (j % 64)) & 1 == 1 {
                    continue;
                }
                let mut nb = basis.clone();
                nb.insert(c);
                let nm = closure(&nb);
                if seen.insert(nm.clone()) {
                    next.push((nb, nm));
                }
            }
        }
        level = next;
    }
    let largest = level.iter().map(|(_, m)| popcount(m)).max().unwrap_or(0);
    n - largest
}

impl fmt::Debug for Gf2Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Gf2Matrix {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {}", row_string(self, i))?;
        }
        Ok(())
    }
}

fn row_string(m: &Gf2Matrix, i: usize) -> String {
    (0..m.cols)
        .map(|j| if m.get(i, j) { '1' } else { '0' })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<String>,
}

impl From<Gf2Matrix> for MatrixJson {
    fn from(m: Gf2Matrix) -> Self {
        MatrixJson {
            rows: m.rows,
            cols: m.cols,
            data: (0..m.rows).map(|i| row_string(&m, i)).collect(),
        }
    }
}

impl TryFrom<MatrixJson> for Gf2Matrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.data.len() != j.rows {
            return Err(Error::DimensionMismatch {
                expected: j.rows,
                actual: j.data.len(),
            });
        }
        let mut m = Gf2Matrix::zeros(j.rows, j.cols)?;
        for (i, s) in j.data.iter().enumerate() {
            if s.len() != j.cols {
                return Err(Error::DimensionMismatch {
                    expected: j.cols,
                    actual: s.len(),
                });
            }
            for (col, ch) in s.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(i, col, true),
                    other => return Err(Error::Malformed(format!("bad matrix digit {other:?}"))),
                }
            }
        }
        Ok(m)
    }
}
