//! Block-length lower bounds, best-construction selection and the reference
//! parameter tables.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::prm::{build_prm, prm_params, PirCode};
use crate::shorten::{build_sprm, puncture, shortening_plan};
use crate::subsets::{binom, SubsetMask};

/// Smallest `c` with `c >= (sqrt(8k+1) + 1) / 2`, in exact integer arithmetic.
fn triangular_ceiling(k: u64) -> u64 {
    let target = 8 * k as u128 + 1;
    // (2c - 1)^2 >= 8k + 1 is monotone in c
    let (mut lo, mut hi) = (1u128, 1u128 << 33);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if (2 * mid - 1) * (2 * mid - 1) >= target {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo as u64
}

/// Lower bound on the block length of a systematic `tau`-server PIR code of
/// dimension `k`.
pub fn lb_systematic(k: u64, tau: u64) -> Result<u64> {
    if k == 0 || tau == 0 {
        return Err(Error::InvalidParameters(format!(
            "need k >= 1 and tau >= 1, got k={k}, tau={tau}"
        )));
    }
    Ok(match tau {
        1 => k,
        2 => k + 1,
        _ => k + triangular_ceiling(k) + (tau - 3),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Construction {
    pub m: usize,
    pub r: usize,
    pub gamma: usize,
    pub punctured: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundReport {
    pub k: u64,
    pub tau: u64,
    pub lower: u64,
    pub achieved: u64,
    pub construction: Construction,
    pub optimal: bool,
}

/// `ell` with `tau = 2^ell` (`Some((ell, false))`) or `tau = 2^ell - 1`
/// (`Some((ell, true))`), for the server counts we can build.
fn tau_shape(tau: u64) -> Option<(usize, bool)> {
    if tau >= 2 && tau.is_power_of_two() {
        return Some((tau.trailing_zeros() as usize, false));
    }
    let up = tau + 1;
    if tau >= 3 && up.is_power_of_two() {
        return Some((up.trailing_zeros() as usize, true));
    }
    None
}

/// Smallest `m > ell` with `C(m, ell) >= k`.
fn smallest_universe(k: u64, ell: usize) -> Result<usize> {
    let mut m = ell + 1;
    loop {
        if binom(m as u64, ell as u64)? >= k {
            return Ok(m);
        }
        m += 1;
    }
}

/// The shortest code we know how to build for `(k, tau)`, with its bound report.
pub fn best_code(k: u64, tau: u64) -> Result<(BoundReport, PirCode)> {
    if k == 0 {
        return Err(Error::InvalidParameters("k must be at least 1".into()));
    }
    let (ell, punctured) = tau_shape(tau).ok_or_else(|| {
        Error::InvalidParameters(format!("tau={tau} is not of the form 2^l or 2^l - 1"))
    })?;
    let (code, construction) = if tau == 2 && k >= 2 {
        // the parity-check code
        let m = k as usize;
        (
            build_prm(m, m - 1)?,
            Construction {
                m,
                r: m - 1,
                gamma: 0,
                punctured: false,
            },
        )
    } else {
        let m = smallest_universe(k, ell)?;
        let gamma = (binom(m as u64, ell as u64)? - k) as usize;
        let base = build_sprm(m, m - ell, gamma)?;
        let code = if punctured { puncture(&base)? } else { base };
        (
            code,
            Construction {
                m,
                r: m - ell,
                gamma,
                punctured,
            },
        )
    };
    debug_assert_eq!(code.k() as u64, k);
    debug_assert_eq!(code.tau() as u64, tau);
    let lower = lb_systematic(k, tau)?;
    let achieved = code.n() as u64;
    let report = BoundReport {
        k,
        tau,
        lower,
        achieved,
        construction,
        optimal: lower == achieved,
    };
    if report.lower > report.achieved || ((tau == 3 || tau == 4) && !report.optimal) {
        return Err(Error::Invariant(format!(
            "bound report for k={k}, tau={tau}: lower {lower}, achieved {achieved}"
        )));
    }
    Ok((report, code))
}

/// Generalized Hamming weight bound `d_{k-gamma} <= n - gamma'` for `PRM(r, m-1)`.
pub fn ghw_upper(m: usize, r: usize, gamma: usize) -> Result<(usize, usize)> {
    let (n, k, _) = prm_params(m, r)?;
    if gamma as u64 >= k {
        return Err(Error::InvalidParameters(format!(
            "gamma={gamma} must be below k={k}"
        )));
    }
    let plan = shortening_plan(m, r, gamma)?;
    Ok((k as usize - gamma, n as usize - plan.gamma_prime))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table1Row {
    pub gamma: usize,
    /// `(rho_{ell-1}, ..., rho_0)`.
    pub rho: Vec<usize>,
    pub family: Vec<Vec<usize>>,
    pub gamma_prime: usize,
    pub k: usize,
    pub n: usize,
}

pub const TABLE1_M: usize = 5;
pub const TABLE1_R: usize = 2;

/// One parameter row of the shortened code `SPRM(r, m-1, gamma)`.
pub fn shortening_row(m: usize, r: usize, gamma: usize) -> Result<Table1Row> {
    let plan = shortening_plan(m, r, gamma)?;
    let (n, k, _) = prm_params(m, r)?;
    Ok(Table1Row {
        gamma,
        rho: plan.decomposition.rho_display_order(),
        family: plan
            .decomposition
            .family
            .iter()
            .map(|s| s.elements())
            .collect(),
        gamma_prime: plan.gamma_prime,
        k: k as usize - gamma,
        n: n as usize - plan.gamma_prime,
    })
}

/// All shortenings of `PRM(2, 4)`.
pub fn table1() -> Vec<Table1Row> {
    (0..10)
        .map(|g| shortening_row(TABLE1_M, TABLE1_R, g).expect("gamma in range"))
        .collect()
}

/// Published rows `(gamma, rho, family, gamma', k, n)` for `PRM(2, 4)`.
pub fn table1_golden() -> Vec<Table1Row> {
    type Row = (
        usize,
        [usize; 3],
        &'static [&'static [usize]],
        usize,
        usize,
        usize,
    );
    const ROWS: [Row; 10] = [
        (0, [0, 0, 0], &[], 0, 10, 26),
        (1, [0, 0, 1], &[&[1, 2]], 1, 9, 25),
        (2, [0, 0, 2], &[&[1, 2], &[1, 3]], 2, 8, 24),
        (3, [0, 1, 0], &[&[1, 2, 3]], 4, 7, 22),
        (4, [0, 1, 1], &[&[1, 2, 3], &[1, 4]], 5, 6, 21),
        (5, [0, 2, 0], &[&[1, 2, 3], &[1, 2, 4]], 7, 5, 19),
        (6, [1, 0, 0], &[&[1, 2, 3, 4]], 11, 4, 15),
        (7, [1, 0, 1], &[&[1, 2, 3, 4], &[1, 5]], 12, 3, 14),
        (8, [1, 1, 0], &[&[1, 2, 3, 4], &[1, 2, 5]], 14, 2, 12),
        (9, [2, 0, 0], &[&[1, 2, 3, 4], &[1, 2, 3, 5]], 18, 1, 8),
    ];
    ROWS.iter()
        .map(|(gamma, rho, family, gp, k, n)| Table1Row {
            gamma: *gamma,
            rho: rho.to_vec(),
            family: family.iter().map(|s| s.to_vec()).collect(),
            gamma_prime: *gp,
            k: *k,
            n: *n,
        })
        .collect()
}

fn family_key(family: &[Vec<usize>]) -> Vec<u64> {
    let mut v: Vec<u64> = family
        .iter()
        .map(|s| SubsetMask::from_elements(s, TABLE1_M).map_or(u64::MAX, |m| m.bits()))
        .collect();
    v.sort_unstable();
    v
}

/// Differences between computed and published rows (family compared as a set).
pub fn table1_diff(computed: &[Table1Row]) -> Vec<String> {
    let golden = table1_golden();
    let mut out = Vec::new();
    if computed.len() != golden.len() {
        out.push(format!(
            "{} rows, expected {}",
            computed.len(),
            golden.len()
        ));
    }
    for (c, g) in computed.iter().zip(&golden) {
        let same = c.gamma == g.gamma
            && c.rho == g.rho
            && family_key(&c.family) == family_key(&g.family)
            && c.gamma_prime == g.gamma_prime
            && c.k == g.k
            && c.n == g.n;
        if !same {
            out.push(format!("gamma={}: computed {c:?}, expected {g:?}", g.gamma));
        }
    }
    out
}

pub const TABLE2_TAUS: [u64; 4] = [3, 4, 8, 16];

/// Published `(n1, n2)` per `tau` in [`TABLE2_TAUS`] order, for `k = 2..=32`.
/// `n2` is the best previously known block length and is reference data only.
const TABLE2_GOLDEN: [[(u64, u64); 4]; 31] = [
    [(5, 5), (6, 6), (12, 12), (24, 24)],
    [(6, 6), (7, 7), (14, 14), (28, 28)],
    [(8, 8), (9, 9), (15, 15), (30, 30)],
    [(9, 10), (10, 11), (19, 19), (31, 31)],
    [(10, 11), (11, 12), (21, 21), (39, 40)],
    [(12, 12), (13, 13), (22, 23), (43, 43)],
    [(13, 13), (14, 14), (24, 28), (45, 54)],
    [(14, 14), (15, 15), (25, 30), (46, 60)],
    [(15, 17), (16, 18), (26, 35), (50, 61)],
    [(17, 19), (18, 20), (30, 37), (52, 67)],
    [(18, 20), (19, 21), (32, 39), (53, 69)],
    [(19, 21), (20, 22), (33, 41), (55, 71)],
    [(20, 22), (21, 23), (35, 43), (56, 74)],
    [(21, 23), (22, 24), (36, 44), (57, 80)],
    [(23, 24), (24, 25), (37, 45), (65, 84)],
    [(24, 27), (25, 28), (39, 46), (69, 86)],
    [(25, 28), (26, 29), (40, 47), (71, 88)],
    [(26, 29), (27, 30), (41, 48), (72, 90)],
    [(27, 30), (28, 31), (42, 49), (76, 92)],
    [(28, 31), (29, 32), (46, 50), (78, 94)],
    [(30, 32), (31, 33), (48, 51), (79, 100)],
    [(31, 33), (32, 34), (49, 52), (81, 104)],
    [(32, 34), (33, 35), (51, 53), (82, 106)],
    [(33, 35), (34, 36), (52, 54), (83, 108)],
    [(34, 38), (35, 39), (53, 55), (87, 110)],
    [(35, 39), (36, 40), (55, 56), (89, 112)],
    [(36, 40), (37, 41), (56, 57), (90, 114)],
    [(38, 41), (39, 42), (57, 58), (92, 116)],
    [(39, 42), (40, 43), (58, 59), (93, 118)],
    [(40, 43), (41, 44), (60, 60), (94, 120)],
    [(41, 44), (42, 45), (61, 61), (96, 122)],
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Table2Cell {
    pub k: u64,
    pub tau: u64,
    /// Block length of the code built here.
    pub n1: u64,
    pub n1_published: u64,
    pub n2_published: u64,
    pub lower: u64,
}

/// Published `(n1, n2)` for `(k, tau)`, when the table has the cell.
pub fn table2_published(k: u64, tau: u64) -> Option<(u64, u64)> {
    let col = TABLE2_TAUS.iter().position(|&t| t == tau)?;
    let row = k.checked_sub(2).filter(|&r| r < 31)?;
    Some(TABLE2_GOLDEN[row as usize][col])
}

pub fn table2() -> Result<Vec<Table2Cell>> {
    let mut cells = Vec::new();
    for k in 2..=32u64 {
        for tau in TABLE2_TAUS {
            let (report, _) = best_code(k, tau)?;
            let (n1_published, n2_published) = table2_published(k, tau).expect("cell in table");
            cells.push(Table2Cell {
                k,
                tau,
                n1: report.achieved,
                n1_published,
                n2_published,
                lower: report.lower,
            });
        }
    }
    Ok(cells)
}

pub fn table2_diff(cells: &[Table2Cell]) -> Vec<String> {
    let mut out = Vec::new();
    if cells.len() != 124 {
        out.push(format!("{} cells, expected 124", cells.len()));
    }
    for c in cells {
        if c.n1 != c.n1_published {
            out.push(format!(
                "k={} tau={}: built n={}, published n1={}",
                c.k, c.tau, c.n1, c.n1_published
            ));
        }
        if c.n1 > c.n2_published {
            out.push(format!(
                "k={} tau={}: n1={} exceeds best known n2={}",
                c.k, c.tau, c.n1, c.n2_published
            ));
        }
    }
    out
}
