//! Binary projective Reed-Muller PIR codes.
//!
//! `PRM(r, m-1)` evaluates homogeneous degree-`r` polynomials in `m` binary
//! variables at every point of weight at least `r`. Each coordinate is named by
//! the support `S` of its point and each message symbol by an `r`-subset `R`;
//! the generator entry at `(R, S)` is 1 iff `R ⊆ S`.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::Gf2Matrix;
use crate::subsets::{binom, colex_rank, subsets_of, subsets_of_size, SubsetMask, MAX_UNIVERSE};

/// Largest block length `build_prm` will materialise.
pub const MAX_BLOCK_LENGTH: u64 = 1 << 20;
/// Largest `k * n` (generator bits, and recovery-set entries) we materialise.
const MAX_MATERIALISED: u64 = 1 << 28;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub m: usize,
    pub r: usize,
    pub ell: usize,
    /// Number of message symbols zeroed out of the parent `PRM(r, m-1)`.
    pub gamma: usize,
}

impl CodeSpec {
    pub fn new(m: usize, r: usize) -> Result<Self> {
        if r == 0 || r > m {
            return Err(Error::InvalidParameters(format!(
                "need 1 <= r <= m, got m={m}, r={r}"
            )));
        }
        if m > MAX_UNIVERSE {
            return Err(Error::InvalidParameters(format!("m={m} is too large")));
        }
        Ok(Self {
            m,
            r,
            ell: m - r,
            gamma: 0,
        })
    }
}

/// `(n, k, tau)` of `PRM(r, m-1)`.
pub fn prm_params(m: usize, r: usize) -> Result<(u64, u64, u64)> {
    let spec = CodeSpec::new(m, r)?;
    let mut n = 0u64;
    for i in r..=m {
        n = n
            .checked_add(binom(m as u64, i as u64)?)
            .ok_or(Error::Overflow("block length"))?;
    }
    let k = binom(m as u64, r as u64)?;
    let tau = 1u64
        .checked_shl(spec.ell as u32)
        .filter(|_| spec.ell < 64)
        .ok_or(Error::Overflow("server count"))?;
    Ok((n, k, tau))
}

/// A linear PIR code with its coordinate and message naming.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PirCode {
    spec: CodeSpec,
    /// Message symbol `i` is the coefficient of the monomial on `messages[i]`.
    messages: Vec<SubsetMask>,
    coordinates: Vec<SubsetMask>,
    generator: Gf2Matrix,
    /// `recovery[i][t]`: sorted coordinate indices of the `t`-th set for symbol `i`.
    recovery: Vec<Vec<Vec<usize>>>,
    tau: usize,
}

/// The `tau` recovery sets of message symbol `msg` among `coords`.
///
/// Set `t` corresponds to the `t`-th subset `S` of `[m] \ msg` in increasing
/// mask order and holds every surviving coordinate `T ∪ S` with `T ⊆ msg`.
/// Terms with `|T| + |S| < r` are points of weight below `r` and are never
/// coordinates, so they drop out.
pub fn recovery_sets(
    m: usize,
    r: usize,
    msg: SubsetMask,
    coords: &[SubsetMask],
) -> Result<Vec<Vec<usize>>> {
    if msg.weight() != r || msg.universe() != m {
        return Err(Error::InvalidParameters(format!(
            "{msg} is not an {r}-subset of [{m}]"
        )));
    }
    let index: HashMap<u64, usize> = coords
        .iter()
        .enumerate()
        .map(|(j, c)| (c.bits(), j))
        .collect();
    Ok(recovery_sets_indexed(msg, &index))
}

fn recovery_sets_indexed(msg: SubsetMask, index: &HashMap<u64, usize>) -> Vec<Vec<usize>> {
    let rest = msg.complement();
    let mut outside: Vec<u64> = subsets_of(rest, 0).iter().map(|s| s.bits()).collect();
    outside.sort_unstable();
    let r = msg.weight();
    outside
        .iter()
        .map(|&s| {
            let needed = r.saturating_sub(s.count_ones() as usize);
            let mut set: Vec<usize> = subsets_of(msg, needed)
                .iter()
                .filter_map(|t| index.get(&(t.bits() | s)).copied())
                .collect();
            set.sort_unstable();
            set
        })
        .collect()
}

/// Builds `PRM(r, m-1)` in systematic canonical form.
pub fn build_prm(m: usize, r: usize) -> Result<PirCode> {
    let spec = CodeSpec::new(m, r)?;
    let (n, k, tau) = prm_params(m, r)?;
    if n > MAX_BLOCK_LENGTH || n.saturating_mul(k) > MAX_MATERIALISED {
        return Err(Error::TooLarge(format!(
            "PRM({r},{}) has n={n}, k={k}",
            m - 1
        )));
    }
    let messages = subsets_of_size(r, m);
    let coordinates: Vec<SubsetMask> = (r..=m).flat_map(|w| subsets_of_size(w, m)).collect();
    debug_assert_eq!(coordinates.len() as u64, n);

    let mut generator = Gf2Matrix::zeros(k as usize, n as usize)?;
    for (i, msg) in messages.iter().enumerate() {
        for (j, c) in coordinates.iter().enumerate() {
            if msg.is_subset_of(*c) {
                generator.set(i, j, true);
            }
        }
    }

    let index: HashMap<u64, usize> = coordinates
        .iter()
        .enumerate()
        .map(|(j, c)| (c.bits(), j))
        .collect();
    let recovery = messages
        .iter()
        .map(|&msg| recovery_sets_indexed(msg, &index))
        .collect();

    Ok(PirCode {
        spec,
        messages,
        coordinates,
        generator,
        recovery,
        tau: tau as usize,
    })
}

impl PirCode {
    /// Assembles a code from parts and checks every PIR-code invariant.
    pub fn from_parts(
        spec: CodeSpec,
        messages: Vec<SubsetMask>,
        coordinates: Vec<SubsetMask>,
        generator: Gf2Matrix,
        recovery: Vec<Vec<Vec<usize>>>,
        tau: usize,
    ) -> Result<Self> {
        let code =
            Self::from_parts_unchecked(spec, messages, coordinates, generator, recovery, tau);
        code.check()?;
        Ok(code)
    }

    pub(crate) fn from_parts_unchecked(
        spec: CodeSpec,
        messages: Vec<SubsetMask>,
        coordinates: Vec<SubsetMask>,
        generator: Gf2Matrix,
        recovery: Vec<Vec<Vec<usize>>>,
        tau: usize,
    ) -> Self {
        Self {
            spec,
            messages,
            coordinates,
            generator,
            recovery,
            tau,
        }
    }

    pub fn spec(&self) -> CodeSpec {
        self.spec
    }

    pub fn n(&self) -> usize {
        self.coordinates.len()
    }

    pub fn k(&self) -> usize {
        self.messages.len()
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn messages(&self) -> &[SubsetMask] {
        &self.messages
    }

    pub fn coordinates(&self) -> &[SubsetMask] {
        &self.coordinates
    }

    pub fn generator(&self) -> &Gf2Matrix {
        &self.generator
    }

    pub fn recovery(&self) -> &[Vec<Vec<usize>>] {
        &self.recovery
    }

    /// Index of the message symbol named by `subset`, if it survives.
    pub fn message_index(&self, subset: SubsetMask) -> Option<usize> {
        self.messages.iter().position(|&s| s == subset)
    }

    /// Codeword for `msg` via the support-set identity: the symbol at `S` is
    /// the XOR of every message symbol whose subset lies inside `S`.
    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if msg.len() != self.k() {
            return Err(Error::DimensionMismatch {
                expected: self.k(),
                actual: msg.len(),
            });
        }
        let value: HashMap<u64, u8> = self
            .messages
            .iter()
            .zip(msg)
            .map(|(s, &b)| (s.bits(), b & 1))
            .collect();
        Ok(self
            .coordinates
            .iter()
            .map(|&c| {
                subsets_of(c, self.spec.r)
                    .iter()
                    .filter(|t| t.weight() == self.spec.r)
                    .fold(0u8, |acc, t| {
                        acc ^ value.get(&t.bits()).copied().unwrap_or(0)
                    })
            })
            .collect())
    }

    /// XOR of `codeword` over recovery set `t` of message symbol `i`.
    pub fn retrieve(&self, codeword: &[u8], i: usize, t: usize) -> Result<u8> {
        if codeword.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: codeword.len(),
            });
        }
        let sets = self.recovery.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            limit: self.k(),
        })?;
        let set = sets.get(t).ok_or(Error::IndexOutOfRange {
            index: t,
            limit: sets.len(),
        })?;
        Ok(set.iter().fold(0u8, |acc, &j| acc ^ (codeword[j] & 1)))
    }

    /// Checks every PIR-code invariant, returning the first violation.
    pub fn check(&self) -> Result<()> {
        let violations = self.violations();
        match violations.into_iter().next() {
            Some(v) => Err(Error::Invariant(v)),
            None => Ok(()),
        }
    }

    /// All invariant violations, in a stable order.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let (k, n) = (self.k(), self.n());
        if self.generator.rows() != k || self.generator.cols() != n {
            out.push(format!(
                "generator is {}x{}, expected {k}x{n}",
                self.generator.rows(),
                self.generator.cols()
            ));
            return out;
        }
        if self.coordinates.iter().any(|c| c.weight() < self.spec.r) {
            out.push("coordinate of weight below r".into());
        }
        if !self
            .coordinates
            .windows(2)
            .all(|w| w[0].canonical_key() < w[1].canonical_key())
        {
            out.push("coordinates not strictly increasing in canonical order".into());
        }
        for i in 0..k {
            for j in 0..k.min(n) {
                if self.generator.get(i, j) != (i == j) {
                    out.push(format!("generator not systematic at ({i},{j})"));
                    break;
                }
            }
        }
        if self.recovery.len() != k {
            out.push(format!(
                "{} recovery families for {k} symbols",
                self.recovery.len()
            ));
            return out;
        }
        for (i, sets) in self.recovery.iter().enumerate() {
            if sets.len() != self.tau {
                out.push(format!(
                    "symbol {i} has {} sets, tau is {}",
                    sets.len(),
                    self.tau
                ));
            }
            let mut seen = HashSet::new();
            for (t, set) in sets.iter().enumerate() {
                if set.is_empty() {
                    out.push(format!("symbol {i} set {t} is empty"));
                }
                if let Some(&bad) = set.iter().find(|&&j| j >= n) {
                    out.push(format!("symbol {i} set {t} names coordinate {bad} >= n"));
                    continue;
                }
                for &j in set {
                    if !seen.insert(j) {
                        out.push(format!("symbol {i}: coordinate {j} shared between sets"));
                    }
                }
                let sum = self.generator.column_sum(set);
                if sum
                    .iter()
                    .enumerate()
                    .any(|(row, &b)| b != (row == i) as u8)
                {
                    out.push(format!("symbol {i} set {t} does not sum to e_{i}"));
                }
            }
        }
        out
    }

    /// Number of coordinates touched by some recovery set of symbol `i`.
    pub fn coverage(&self, i: usize) -> usize {
        self.recovery[i].iter().map(Vec::len).sum()
    }

    pub fn descriptor(&self) -> CodeDescriptor {
        CodeDescriptor {
            m: self.spec.m,
            r: self.spec.r,
            gamma: self.spec.gamma,
            n: self.n(),
            k: self.k(),
            tau: self.tau,
            messages: self.messages.iter().map(|s| s.bits()).collect(),
            coordinates: self.coordinates.iter().map(|s| s.bits()).collect(),
            generator: self.generator.clone(),
            recovery: self.recovery.clone(),
        }
    }

    pub fn from_descriptor(d: &CodeDescriptor) -> Result<Self> {
        let mut spec = CodeSpec::new(d.m, d.r)?;
        spec.gamma = d.gamma;
        let to_masks = |v: &[u64]| -> Result<Vec<SubsetMask>> {
            v.iter().map(|&b| SubsetMask::new(b, d.m)).collect()
        };
        let code = Self::from_parts(
            spec,
            to_masks(&d.messages)?,
            to_masks(&d.coordinates)?,
            d.generator.clone(),
            d.recovery.clone(),
            d.tau,
        )?;
        if code.n() != d.n || code.k() != d.k {
            return Err(Error::Malformed("n/k disagree with the lists".into()));
        }
        Ok(code)
    }

    /// Message subset names in colex rank, for display.
    pub fn message_ranks(&self) -> Vec<u64> {
        self.messages.iter().map(|&s| colex_rank(s)).collect()
    }

    pub(crate) fn spec_mut(&mut self) -> &mut CodeSpec {
        &mut self.spec
    }
}

/// JSON form of a [`PirCode`]. Subsets are integer bitmasks (bit `e-1` for
/// element `e`); message symbol `i` is `messages[i]`, which for an unshortened
/// code is the `i`-th `r`-subset in colex order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeDescriptor {
    pub m: usize,
    pub r: usize,
    pub gamma: usize,
    pub n: usize,
    pub k: usize,
    pub tau: usize,
    pub messages: Vec<u64>,
    pub coordinates: Vec<u64>,
    pub generator: Gf2Matrix,
    pub recovery: Vec<Vec<Vec<usize>>>,
}
