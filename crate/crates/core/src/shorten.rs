//! Shortened PRM codes for arbitrary `k`, plus puncturing.
//!
//! A shortening amount `gamma` is written uniquely as a vector
//! `(rho_{ell-1}, ..., rho_0)`; the vector selects a nested family of
//! `(r+t)`-subsets of `[m]`. Zeroing every message symbol whose `r`-subset sits
//! inside a family member forces every coordinate inside a family member to
//! zero as well, so those coordinates are deleted.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::prm::{build_prm, recovery_sets, PirCode};
use crate::subsets::{binom_small, subsets_of, SubsetMask};

/// `h(p, r, t) = sum_{i<p} C(r+t-i, r-i)`; zero for `p = 0`.
pub fn h(p: usize, r: usize, t: usize) -> usize {
    (0..p)
        .filter(|&i| i <= r)
        .map(|i| binom_small(r + t - i, r - i))
        .sum()
}

/// `h1 = sum_{j<=t} sum_{i<rho_t} C(r+t-i, r+j-i)`; zero for `rho_t = 0`.
pub fn h1(rho_t: usize, r: usize, t: usize) -> usize {
    let mut total = 0;
    for j in 0..=t {
        for i in (0..rho_t).filter(|&i| i <= r) {
            total += binom_small(r + t - i, r + j - i);
        }
    }
    total
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RhoDecomposition {
    pub gamma: usize,
    pub r: usize,
    pub ell: usize,
    /// `rho[t]` for `t` in `0..ell`.
    pub rho: Vec<usize>,
    /// `r_t = r - sum_{q>t} rho_q`.
    pub r_t: Vec<usize>,
    /// The set family; empty until [`set_family`] fills it.
    pub family: Vec<SubsetMask>,
}

impl RhoDecomposition {
    /// The vector in display order `(rho_{ell-1}, ..., rho_0)`.
    pub fn rho_display_order(&self) -> Vec<usize> {
        self.rho.iter().rev().copied().collect()
    }

    /// `sum_t h(rho_t, r_t, t)`.
    pub fn represented(&self) -> usize {
        (0..self.ell).map(|t| h(self.rho[t], self.r_t[t], t)).sum()
    }

    /// `gamma' = sum_t h1(rho_t, r_t, t)`.
    pub fn gamma_prime(&self) -> usize {
        (0..self.ell).map(|t| h1(self.rho[t], self.r_t[t], t)).sum()
    }
}

impl fmt::Display for RhoDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .rho_display_order()
            .iter()
            .map(|v| v.to_string())
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The number of `r`-subsets of an `(r + ell)`-set; `gamma` must stay below it.
fn gamma_limit(r: usize, ell: usize) -> usize {
    binom_small(r + ell, ell)
}

pub fn rho_decompose(gamma: usize, r: usize, ell: usize) -> Result<RhoDecomposition> {
    let limit = gamma_limit(r, ell);
    if gamma >= limit {
        return Err(Error::InvalidParameters(format!(
            "gamma={gamma} must be below C({}, {ell}) = {limit}",
            r + ell
        )));
    }
    let mut rho = vec![0; ell];
    let mut r_t = vec![0; ell];
    let mut residual = gamma;
    let mut budget = r;
    for t in (0..ell).rev() {
        r_t[t] = budget;
        // largest p in [0, r_t] with h(p, r_t, t) <= residual
        let p = (0..=budget)
            .take_while(|&p| h(p, budget, t) <= residual)
            .last()
            .expect("h(0, .) = 0");
        rho[t] = p;
        residual -= h(p, budget, t);
        budget -= p;
    }
    if residual != 0 {
        return Err(Error::Invariant(format!(
            "gamma={gamma} left residual {residual} after decomposition"
        )));
    }
    Ok(RhoDecomposition {
        gamma,
        r,
        ell,
        rho,
        r_t,
        family: Vec::new(),
    })
}

/// Builds the nested set family selected by `rho` inside `[m]`.
///
/// Starting from `[m]`, level `t` (sets of size `r + t`) derives candidates
/// `S_i = parent \ {r_t + t + 1 - i}`; the first `rho_t` join the family and
/// `S_{rho_t}` becomes the parent of the next level.
pub fn set_family(rho: &RhoDecomposition, m: usize) -> Result<Vec<SubsetMask>> {
    if rho.r + rho.ell != m {
        return Err(Error::InvalidParameters(format!(
            "decomposition for r={}, ell={} does not live in [{m}]",
            rho.r, rho.ell
        )));
    }
    let mut parent = SubsetMask::full(m);
    let mut family = Vec::new();
    for t in (0..rho.ell).rev() {
        let base = rho.r_t[t] + t + 1;
        for i in 0..rho.rho[t] {
            family.push(parent.without(base - i));
        }
        parent = parent.without(base - rho.rho[t]);
    }
    Ok(family)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShorteningPlan {
    pub decomposition: RhoDecomposition,
    /// `r`-subsets whose message symbols are set to zero, canonical order.
    pub zeroed_messages: Vec<SubsetMask>,
    /// Coordinates forced to zero, canonical order.
    pub deleted_coordinates: Vec<SubsetMask>,
    pub gamma_prime: usize,
}

pub fn shortening_plan(m: usize, r: usize, gamma: usize) -> Result<ShorteningPlan> {
    if r == 0 || r > m {
        return Err(Error::InvalidParameters(format!(
            "need 1 <= r <= m, got m={m}, r={r}"
        )));
    }
    let mut decomposition = rho_decompose(gamma, r, m - r)?;
    decomposition.family = set_family(&decomposition, m)?;

    let mut zeroed = BTreeSet::new();
    let mut deleted = BTreeSet::new();
    for &member in &decomposition.family {
        for s in subsets_of(member, r) {
            if s.weight() == r {
                zeroed.insert(s.canonical_key());
            }
            deleted.insert(s.canonical_key());
        }
    }
    let to_masks = |keys: BTreeSet<(usize, u64)>| -> Vec<SubsetMask> {
        keys.into_iter()
            .map(|(_, bits)| SubsetMask::new(bits, m).expect("subset of [m]"))
            .collect()
    };
    let zeroed_messages = to_masks(zeroed);
    let deleted_coordinates = to_masks(deleted);

    if zeroed_messages.len() != gamma {
        return Err(Error::Invariant(format!(
            "family zeroes {} messages, expected {gamma}",
            zeroed_messages.len()
        )));
    }
    let formula = decomposition.gamma_prime();
    if deleted_coordinates.len() != formula {
        return Err(Error::Invariant(format!(
            "family deletes {} coordinates, closed form gives {formula}",
            deleted_coordinates.len()
        )));
    }
    Ok(ShorteningPlan {
        decomposition,
        zeroed_messages,
        deleted_coordinates,
        gamma_prime: formula,
    })
}

/// `SPRM(r, m-1, gamma)`: the PRM code with the planned messages zeroed and
/// the forced-zero coordinates deleted.
pub fn build_sprm(m: usize, r: usize, gamma: usize) -> Result<PirCode> {
    let plan = shortening_plan(m, r, gamma)?;
    let prm = build_prm(m, r)?;
    if gamma == 0 {
        return Ok(prm);
    }
    let zeroed: BTreeSet<u64> = plan.zeroed_messages.iter().map(|s| s.bits()).collect();
    let deleted: BTreeSet<u64> = plan.deleted_coordinates.iter().map(|s| s.bits()).collect();

    let keep_rows: Vec<usize> = (0..prm.k())
        .filter(|&i| !zeroed.contains(&prm.messages()[i].bits()))
        .collect();
    let keep_cols: Vec<usize> = (0..prm.n())
        .filter(|&j| !deleted.contains(&prm.coordinates()[j].bits()))
        .collect();
    let messages: Vec<SubsetMask> = keep_rows.iter().map(|&i| prm.messages()[i]).collect();
    let coordinates: Vec<SubsetMask> = keep_cols.iter().map(|&j| prm.coordinates()[j]).collect();
    let generator = prm
        .generator()
        .select_rows(&keep_rows)?
        .select_columns(&keep_cols)?;
    let recovery = messages
        .iter()
        .map(|&msg| recovery_sets(m, r, msg, &coordinates))
        .collect::<Result<Vec<_>>>()?;

    let mut spec = prm.spec();
    spec.gamma = gamma;
    Ok(PirCode::from_parts_unchecked(
        spec,
        messages,
        coordinates,
        generator,
        recovery,
        prm.tau(),
    ))
}

/// Zeroes the message symbols at `msgs` and deletes every coordinate that
/// becomes identically zero. Recovery sets are the old ones restricted to the
/// surviving coordinates.
pub fn arbitrary_shorten(code: &PirCode, msgs: &[usize]) -> Result<PirCode> {
    let drop: BTreeSet<usize> = msgs.iter().copied().collect();
    if let Some(&bad) = drop.iter().find(|&&i| i >= code.k()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            limit: code.k(),
        });
    }
    if drop.len() == code.k() {
        return Err(Error::InvalidParameters(
            "shortening every message symbol leaves an empty code".into(),
        ));
    }
    let keep_rows: Vec<usize> = (0..code.k()).filter(|i| !drop.contains(i)).collect();
    let rows = code.generator().select_rows(&keep_rows)?;
    let keep_cols: Vec<usize> = (0..code.n()).filter(|&j| !rows.is_zero_column(j)).collect();
    let generator = rows.select_columns(&keep_cols)?;

    let mut new_index = vec![None; code.n()];
    for (nj, &j) in keep_cols.iter().enumerate() {
        new_index[j] = Some(nj);
    }
    let recovery = keep_rows
        .iter()
        .map(|&i| {
            code.recovery()[i]
                .iter()
                .map(|set| set.iter().filter_map(|&j| new_index[j]).collect())
                .collect()
        })
        .collect();

    let mut shortened = PirCode::from_parts_unchecked(
        code.spec(),
        keep_rows.iter().map(|&i| code.messages()[i]).collect(),
        keep_cols.iter().map(|&j| code.coordinates()[j]).collect(),
        generator,
        recovery,
        code.tau(),
    );
    shortened.spec_mut().gamma += drop.len();
    Ok(shortened)
}

/// Deletes the last coordinate (a parity symbol) and lowers `tau` by one.
pub fn puncture(code: &PirCode) -> Result<PirCode> {
    let (n, k) = (code.n(), code.k());
    if n <= k {
        return Err(Error::InvalidParameters(
            "code has no parity coordinate".into(),
        ));
    }
    if code.tau() < 2 {
        return Err(Error::InvalidParameters("tau is already 1".into()));
    }
    let removed = n - 1;
    let tau = code.tau() - 1;
    let keep: Vec<usize> = (0..removed).collect();
    let generator = code.generator().select_columns(&keep)?;
    let recovery = code
        .recovery()
        .iter()
        .map(|sets| {
            sets.iter()
                .filter(|set| !set.contains(&removed))
                .take(tau)
                .cloned()
                .collect()
        })
        .collect();
    Ok(PirCode::from_parts_unchecked(
        code.spec(),
        code.messages().to_vec(),
        code.coordinates()[..removed].to_vec(),
        generator,
        recovery,
        tau,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prm::prm_params;
    use crate::subsets::colex_rank;
    use rand::seq::index::sample;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn set(e: &[usize], m: usize) -> SubsetMask {
        SubsetMask::from_elements(e, m).unwrap()
    }

    #[test]
    fn h_values() {
        assert_eq!(h(1, 2, 1), 3);
        for r in 0..6 {
            for t in 0..5 {
                assert_eq!(h(0, r, t), 0);
                assert_eq!(h1(0, r, t), 0);
            }
        }
        for m in 2..10 {
            for r in 1..m {
                let ell = m - r;
                assert_eq!(h(r + 1, r, ell - 1), binom_small(m, r));
            }
        }
    }

    #[test]
    fn decompositions() {
        assert_eq!(
            rho_decompose(4, 2, 3).unwrap().rho_display_order(),
            vec![0, 1, 1]
        );
        assert_eq!(
            rho_decompose(9, 2, 3).unwrap().rho_display_order(),
            vec![2, 0, 0]
        );
        assert_eq!(rho_decompose(0, 3, 4).unwrap().rho, vec![0; 4]);
        assert!(rho_decompose(10, 2, 3).is_err());
    }

    #[test]
    fn families() {
        let fam = |g| {
            let d = rho_decompose(g, 2, 3).unwrap();
            set_family(&d, 5).unwrap()
        };
        assert_eq!(fam(4), vec![set(&[1, 2, 3], 5), set(&[1, 4], 5)]);
        assert_eq!(fam(8), vec![set(&[1, 2, 3, 4], 5), set(&[1, 2, 5], 5)]);
        assert_eq!(fam(6), vec![set(&[1, 2, 3, 4], 5)]);
    }

    #[test]
    fn plans() {
        assert_eq!(shortening_plan(5, 2, 5).unwrap().gamma_prime, 7);
        assert_eq!(shortening_plan(5, 2, 0).unwrap().gamma_prime, 0);
        assert_eq!(shortening_plan(5, 2, 9).unwrap().gamma_prime, 18);
        assert!(shortening_plan(5, 2, 10).is_err());
    }

    #[test]
    fn sprm_parameters() {
        let c = build_sprm(5, 2, 4).unwrap();
        assert_eq!((c.n(), c.k(), c.tau()), (21, 6, 8));
        c.check().unwrap();
        assert_eq!(build_sprm(5, 2, 0).unwrap(), build_prm(5, 2).unwrap());

        for m in 3..=8 {
            for ell in 1..m {
                let r = m - ell;
                if r < 2 {
                    continue;
                }
                let c = build_sprm(m, r, binom_small(m - 1, ell - 1)).unwrap();
                let (n, k, _) = prm_params(m - 1, m - 1 - ell).unwrap();
                assert_eq!((c.n() as u64, c.k() as u64), (n, k), "m={m} ell={ell}");
                assert_eq!(c.tau(), 1 << ell);
            }
        }
    }

    #[test]
    fn shorten_one_symbol() {
        let prm = build_prm(4, 2).unwrap();
        let x12 = colex_rank(set(&[1, 2], 4)) as usize;
        let s = arbitrary_shorten(&prm, &[x12]).unwrap();
        assert_eq!((s.n(), s.k(), s.tau()), (10, 5, 4));
        assert!(!s.coordinates().contains(&set(&[1, 2], 4)));
        s.check().unwrap();

        assert_eq!(arbitrary_shorten(&prm, &[]).unwrap(), prm);
        assert!(arbitrary_shorten(&prm, &(0..6).collect::<Vec<_>>()).is_err());
        assert!(arbitrary_shorten(&prm, &[6]).is_err());
    }

    #[test]
    fn random_shortenings_keep_tau() {
        let prm = build_prm(5, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let count = rng.random_range(0..prm.k());
            let msgs = sample(&mut rng, prm.k(), count).into_vec();
            let s = arbitrary_shorten(&prm, &msgs).unwrap();
            assert_eq!(s.tau(), 8);
            s.check().unwrap();
        }
    }

    #[test]
    fn planned_shortening_matches_linear_algebra() {
        // The set-family plan deletes exactly the columns forced to zero.
        for m in 2..=7 {
            for r in 1..m {
                let prm = build_prm(m, r).unwrap();
                for gamma in 0..binom_small(m, m - r) {
                    let plan = shortening_plan(m, r, gamma).unwrap();
                    let msgs: Vec<usize> = plan
                        .zeroed_messages
                        .iter()
                        .map(|&s| prm.message_index(s).unwrap())
                        .collect();
                    let via_matrix = arbitrary_shorten(&prm, &msgs).unwrap();
                    let via_plan = build_sprm(m, r, gamma).unwrap();
                    assert_eq!(via_matrix.coordinates(), via_plan.coordinates());
                    assert_eq!(via_matrix.generator(), via_plan.generator());
                }
            }
        }
    }

    #[test]
    fn puncturing() {
        let c = puncture(&build_prm(4, 2).unwrap()).unwrap();
        assert_eq!((c.n(), c.k(), c.tau()), (10, 6, 3));
        c.check().unwrap();
        assert!(!c.coordinates().contains(&SubsetMask::full(4)));

        for k in 2..8 {
            let c = puncture(&build_prm(k, k - 1).unwrap()).unwrap();
            assert_eq!((c.n(), c.k(), c.tau()), (k, k, 1));
            c.check().unwrap();
            assert!(puncture(&c).is_err());
        }

        // tau = 4 codes: n = k + m + 1 becomes n = k + m
        for m in 3..=7 {
            for gamma in 0..m - 1 {
                let c = build_sprm(m, m - 2, gamma).unwrap();
                assert_eq!(c.n(), c.k() + m + 1);
                let p = puncture(&c).unwrap();
                assert_eq!((p.n(), p.tau()), (p.k() + m, 3));
                p.check().unwrap();
            }
        }
    }
}
