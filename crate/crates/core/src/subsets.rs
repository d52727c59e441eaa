//! Subsets of `[m] = {1, ..., m}` as bitmasks, binomials and colex ranking.
//!
//! Element `e` is stored at bit `e - 1`. Everything downstream indexes message
//! symbols by the colex rank of their `r`-subset and orders coordinates by
//! `(weight, colex)`; within one weight class colex order is the same as the
//! numeric order of the masks.

use std::fmt;

use crate::error::{Error, Result};

/// Largest universe size a mask can hold.
pub const MAX_UNIVERSE: usize = 63;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetMask {
    bits: u64,
    m: u8,
}

impl SubsetMask {
    pub fn new(bits: u64, m: usize) -> Result<Self> {
        if m > MAX_UNIVERSE {
            return Err(Error::InvalidParameters(format!(
                "universe size {m} exceeds {MAX_UNIVERSE}"
            )));
        }
        if bits >> m != 0 {
            return Err(Error::InvalidParameters(format!(
                "mask {bits:#b} has elements outside [1, {m}]"
            )));
        }
        Ok(Self { bits, m: m as u8 })
    }

    pub fn empty(m: usize) -> Self {
        Self::new(0, m).expect("universe within limit")
    }

    /// The full set `[m]`.
    pub fn full(m: usize) -> Self {
        Self::new(low_bits(m), m).expect("universe within limit")
    }

    /// Builds a subset from 1-based elements.
    pub fn from_elements(elements: &[usize], m: usize) -> Result<Self> {
        let mut bits = 0u64;
        for &e in elements {
            if e == 0 || e > m {
                return Err(Error::InvalidParameters(format!(
                    "element {e} is outside [1, {m}]"
                )));
            }
            bits |= 1 << (e - 1);
        }
        Self::new(bits, m)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn universe(self) -> usize {
        self.m as usize
    }

    pub fn weight(self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(self, e: usize) -> bool {
        e >= 1 && e <= self.universe() && (self.bits >> (e - 1)) & 1 == 1
    }

    pub fn is_subset_of(self, other: SubsetMask) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn union(self, other: SubsetMask) -> Self {
        Self {
            bits: self.bits | other.bits,
            m: self.m.max(other.m),
        }
    }

    /// `self \ {e}`.
    pub fn without(self, e: usize) -> Self {
        let bits = if e >= 1 {
            self.bits & !(1u64 << (e - 1))
        } else {
            self.bits
        };
        Self { bits, m: self.m }
    }

    pub fn complement(self) -> Self {
        Self {
            bits: !self.bits & low_bits(self.universe()),
            m: self.m,
        }
    }

    /// Sorted 1-based elements.
    pub fn elements(self) -> Vec<usize> {
        (0..self.universe())
            .filter(|b| (self.bits >> b) & 1 == 1)
            .map(|b| b + 1)
            .collect()
    }

    /// Key realising the canonical `(weight, colex)` order.
    pub fn canonical_key(self) -> (usize, u64) {
        (self.weight(), self.bits)
    }

    /// The point of `F_2^m` whose support is this set, leftmost = element 1.
    pub fn to_point(self) -> String {
        (1..=self.universe())
            .map(|e| if self.contains(e) { '1' } else { '0' })
            .collect()
    }
}

fn low_bits(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

impl fmt::Display for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl fmt::Debug for SubsetMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Exact binomial coefficient; zero when `k > n`.
pub fn binom(n: u64, k: u64) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::Overflow("binomial coefficient"));
        }
    }
    Ok(acc as u64)
}

/// Binomial for arguments already known to be small.
pub(crate) fn binom_small(n: usize, k: usize) -> usize {
    binom(n as u64, k as u64).expect("binomial fits in u64") as usize
}

/// Colex rank of `s` among all subsets of the same size.
pub fn colex_rank(s: SubsetMask) -> u64 {
    s.elements()
        .iter()
        .enumerate()
        .map(|(pos, &e)| binom((e - 1) as u64, (pos + 1) as u64).expect("small binomial"))
        .sum()
}

/// Inverse of [`colex_rank`]: the `idx`-th `size`-subset of `[m]`.
pub fn colex_unrank(idx: u64, size: usize, m: usize) -> Result<SubsetMask> {
    let total = binom(m as u64, size as u64)?;
    if idx >= total {
        return Err(Error::IndexOutOfRange {
            index: idx as usize,
            limit: total as usize,
        });
    }
    let mut rest = idx;
    let mut bits = 0u64;
    let mut upper = m;
    for pos in (1..=size).rev() {
        // Largest c < upper with binom(c, pos) <= rest.
        let mut c = upper - 1;
        loop {
            let b = binom(c as u64, pos as u64)?;
            if b <= rest {
                rest -= b;
                break;
            }
            c -= 1;
        }
        bits |= 1 << c;
        upper = c;
    }
    SubsetMask::new(bits, m)
}

/// All `size`-subsets of `[m]` in colex order.
pub fn subsets_of_size(size: usize, m: usize) -> Vec<SubsetMask> {
    let mut out = Vec::new();
    if size > m {
        return out;
    }
    if size == 0 {
        out.push(SubsetMask::empty(m));
        return out;
    }
    // Gosper's hack walks same-weight masks in increasing numeric order.
    let limit = 1u64 << m;
    let mut v = (1u64 << size) - 1;
    while v < limit {
        out.push(SubsetMask {
            bits: v,
            m: m as u8,
        });
        let c = v & v.wrapping_neg();
        let r = v + c;
        v = (((r ^ v) >> 2) / c) | r;
    }
    out
}

/// Every `T ⊆ s` with `|T| >= min_size`, in `(weight, colex)` order.
pub fn subsets_of(s: SubsetMask, min_size: usize) -> Vec<SubsetMask> {
    let positions: Vec<u64> = (0..64).filter(|b| (s.bits >> b) & 1 == 1).collect();
    let mut out = Vec::new();
    for w in min_size..=positions.len() {
        // Depositing increasing local masks onto `s` keeps colex order.
        for local in subsets_of_size(w, positions.len()) {
            let bits = positions
                .iter()
                .enumerate()
                .filter(|(i, _)| (local.bits >> i) & 1 == 1)
                .fold(0u64, |acc, (_, p)| acc | 1 << p);
            out.push(SubsetMask { bits, m: s.m });
        }
    }
    out
}
