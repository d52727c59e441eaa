//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.

use std::collections::HashSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use prm_pir::bounds::{best_code, table1, table1_diff, table2_published, TABLE2_TAUS};
use prm_pir::pirsim::{correctness_trials, privacy_audit, setup, ClientKind};
use prm_pir::prm::{build_prm, prm_params, PirCode};
use prm_pir::shorten::{arbitrary_shorten, build_sprm, h, rho_decompose, shortening_plan};
use prm_pir::subsets::binom;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    failures: Vec<String>,
    checked: usize,
}

impl Outcome {
    fn new() -> Self {
        Self {
            failures: Vec::new(),
            checked: 0,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failures.push(what());
        }
    }
}

fn sets_are_valid(code: &PirCode, i: usize, expect_tau: usize) -> Result<(), String> {
    let sets = &code.recovery()[i];
    if sets.len() != expect_tau {
        return Err(format!(
            "symbol {i}: {} sets, want {expect_tau}",
            sets.len()
        ));
    }
    let mut seen = HashSet::new();
    for set in sets {
        if !set.iter().all(|&j| seen.insert(j)) {
            return Err(format!("symbol {i}: sets overlap"));
        }
        let mut sum = vec![false; code.k()];
        for &j in set {
            for (row, acc) in sum.iter_mut().enumerate() {
                *acc ^= code.generator().get(row, j);
            }
        }
        if sum.iter().enumerate().any(|(row, &b)| b != (row == i)) {
            return Err(format!("symbol {i}: set {set:?} does not sum to e_{i}"));
        }
    }
    Ok(())
}

fn c1_table1() -> Outcome {
    let mut out = Outcome::new();
    let rows = table1();
    out.check(rows.len() == 10, || format!("{} rows", rows.len()));
    for d in table1_diff(&rows) {
        out.check(false, || d);
    }
    out
}

fn c2_table2() -> Outcome {
    let mut out = Outcome::new();
    for tau in TABLE2_TAUS {
        for k in 2..=32u64 {
            let Some((n1, n2)) = table2_published(k, tau) else {
                out.check(false, || format!("no published cell for k={k} tau={tau}"));
                continue;
            };
            match best_code(k, tau) {
                Ok((report, code)) => {
                    out.check(report.achieved == n1 && code.n() as u64 == n1, || {
                        format!("k={k} tau={tau}: n={} published {n1}", report.achieved)
                    });
                    out.check(n1 <= n2, || format!("k={k} tau={tau}: n1={n1} > n2={n2}"));
                }
                Err(e) => out.check(false, || format!("k={k} tau={tau}: {e}")),
            }
        }
    }
    out
}

fn c3_optimality() -> Outcome {
    let mut out = Outcome::new();
    for tau in [3u64, 4] {
        for k in 1..=100u64 {
            let c = (((8 * k + 1) as f64).sqrt() + 1.0) / 2.0;
            let expect = k + c.ceil() as u64 + (tau - 3);
            match best_code(k, tau) {
                Ok((report, _)) => out.check(report.achieved == expect && report.optimal, || {
                    format!("k={k} tau={tau}: n={} want {expect}", report.achieved)
                }),
                Err(e) => out.check(false, || format!("k={k} tau={tau}: {e}")),
            }
        }
    }
    out
}

fn c4_recovery_sets() -> Outcome {
    let mut out = Outcome::new();
    for m in 2..=8 {
        for r in 1..m {
            let tau = 1usize << (m - r);
            let k = binom(m as u64, (m - r) as u64).unwrap() as usize;
            for gamma in 0..k {
                let code = match build_sprm(m, r, gamma) {
                    Ok(c) => c,
                    Err(e) => {
                        out.check(false, || format!("SPRM({r},{m},{gamma}): {e}"));
                        continue;
                    }
                };
                for i in 0..code.k() {
                    let res = sets_are_valid(&code, i, tau);
                    out.check(res.is_ok(), || {
                        format!("SPRM({r},{m},{gamma}) {}", res.unwrap_err())
                    });
                    if gamma == 0 {
                        let covered: usize = code.recovery()[i].iter().map(Vec::len).sum();
                        out.check(covered == code.n(), || {
                            format!("PRM({r},{m}) symbol {i} covers {covered} of {}", code.n())
                        });
                    }
                }
            }
        }
    }
    out
}

fn c5_distances() -> Outcome {
    let mut out = Outcome::new();
    for m in 1..=6 {
        for r in 1..=m {
            let code = build_prm(m, r).unwrap();
            let g = code.generator();
            let ell = m - r;
            match g.min_distance() {
                Ok(d) => out.check(d == 1 << ell, || format!("PRM({r},{m}): d1={d}")),
                Err(e) => out.check(false, || format!("PRM({r},{m}) d1: {e}")),
            }
            if code.k() >= 2 && ell >= 1 {
                let bound = 3 << (ell - 1);
                match g.ghw(2) {
                    Ok(d2) => out.check(d2 <= bound, || format!("PRM({r},{m}): d2={d2} > {bound}")),
                    Err(e) => out.check(false, || format!("PRM({r},{m}) d2: {e}")),
                }
            }
            if m <= 5 {
                for gamma in 0..code.k() {
                    let plan = shortening_plan(m, r, gamma).unwrap();
                    let i = code.k() - gamma;
                    let bound = code.n() - plan.gamma_prime;
                    match g.ghw(i) {
                        Ok(d) => out.check(d <= bound, || {
                            format!("PRM({r},{m}): d_{i}={d} > n - gamma' = {bound}")
                        }),
                        Err(e) => out.check(false, || format!("PRM({r},{m}) d_{i}: {e}")),
                    }
                }
            }
        }
    }
    out
}

fn count_representations(gamma: usize, r: usize, ell: usize) -> usize {
    fn walk(t: isize, budget: usize, residual: usize) -> usize {
        if t < 0 {
            return usize::from(residual == 0);
        }
        (0..=budget)
            .map(|p| {
                let cost = h(p, budget, t as usize);
                if cost > residual {
                    0
                } else {
                    walk(t - 1, budget - p, residual - cost)
                }
            })
            .sum()
    }
    walk(ell as isize - 1, r, gamma)
}

fn c6_uniqueness() -> Outcome {
    let mut out = Outcome::new();
    for m in 1..=7 {
        for ell in 0..m {
            let r = m - ell;
            let (_, k, _) = prm_params(m, r).unwrap();
            for gamma in 0..k as usize {
                let count = count_representations(gamma, r, ell);
                out.check(count == 1, || {
                    format!("m={m} ell={ell} gamma={gamma}: {count} vectors")
                });
                let ok = rho_decompose(gamma, r, ell).is_ok_and(|d| d.represented() == gamma);
                out.check(ok, || {
                    format!("m={m} ell={ell} gamma={gamma}: decomposition wrong")
                });
            }
        }
    }
    out
}

fn c7_arbitrary_shortening() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..200 {
        let m = rng.random_range(2..=6);
        let r = rng.random_range(1..m);
        let code = build_prm(m, r).unwrap();
        let drop = rng.random_range(0..code.k());
        let mut msgs = sample(&mut rng, code.k(), drop).into_vec();
        msgs.sort_unstable();
        match arbitrary_shorten(&code, &msgs) {
            Ok(short) => {
                out.check(short.k() == code.k() - drop, || {
                    format!("PRM({r},{m}) minus {msgs:?}: k={}", short.k())
                });
                for i in 0..short.k() {
                    let res = sets_are_valid(&short, i, 1 << (m - r));
                    out.check(res.is_ok(), || {
                        format!("PRM({r},{m}) minus {msgs:?}: {}", res.unwrap_err())
                    });
                }
            }
            Err(e) => out.check(false, || format!("PRM({r},{m}) minus {msgs:?}: {e}")),
        }
    }
    out
}

fn criterion_codes() -> Vec<(&'static str, PirCode)> {
    vec![
        ("(5,4) parity", build_prm(4, 3).unwrap()),
        ("PRM(2,3)", build_prm(3, 2).unwrap()),
        ("SPRM(2,4,4)", build_sprm(4, 2, 4).unwrap()),
    ]
}

fn c8_retrieval() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (name, code) in criterion_codes() {
        match correctness_trials(&code, 8, 1000, &mut rng) {
            Ok(rep) => out.check(rep.correct == 1000, || {
                format!("{name}: {}/1000", rep.correct)
            }),
            Err(e) => out.check(false, || format!("{name}: {e}")),
        }
    }
    out
}

fn c9_privacy() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (name, code) in criterion_codes() {
        let array = setup(&code, &vec![vec![0, 1]; code.k()]).unwrap();
        match privacy_audit(&array, 20_000, 0.001, ClientKind::Honest, &mut rng) {
            Ok(rep) => out.check(rep.passed, || {
                let bad: Vec<usize> = rep
                    .servers
                    .iter()
                    .filter(|s| !s.passed)
                    .map(|s| s.server)
                    .collect();
                format!("{name}: honest client flagged on servers {bad:?}")
            }),
            Err(e) => out.check(false, || format!("{name}: {e}")),
        }
        match privacy_audit(&array, 20_000, 0.001, ClientKind::Plaintext, &mut rng) {
            Ok(rep) => out.check(!rep.passed, || format!("{name}: plaintext client passed")),
            Err(e) => out.check(false, || format!("{name}: {e}")),
        }
    }
    out
}

type Criterion = (&'static str, fn() -> Outcome, Option<Duration>);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "1 table 1 reproduction",
            c1_table1,
            Some(Duration::from_secs(1)),
        ),
        (
            "2 table 2 n1 reproduction",
            c2_table2,
            Some(Duration::from_secs(5)),
        ),
        ("3 optimality for tau in {3,4}", c3_optimality, None),
        (
            "4 recovery sets of SPRM, m <= 8",
            c4_recovery_sets,
            Some(Duration::from_secs(60)),
        ),
        (
            "5 brute-force distances",
            c5_distances,
            Some(Duration::from_secs(120)),
        ),
        ("6 unique rho vectors, m <= 7", c6_uniqueness, None),
        ("7 arbitrary shortening", c7_arbitrary_shortening, None),
        ("8 PIR retrieval correctness", c8_retrieval, None),
        (
            "9 PIR privacy audit",
            c9_privacy,
            Some(Duration::from_secs(30)),
        ),
    ];
    let mut all_ok = true;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let over_budget = budget.is_some_and(|b| elapsed > b);
        let ok = outcome.failures.is_empty() && !over_budget;
        all_ok &= ok;
        let budget_note = budget.map_or(String::new(), |b| format!(" (budget {:.0?})", b));
        println!(
            "criterion {name}: {} [{} checks, {} failures, {:.2?}{budget_note}]",
            if ok { "PASS" } else { "FAIL" },
            outcome.checked,
            outcome.failures.len(),
            elapsed,
        );
        for f in outcome.failures.iter().take(5) {
            println!("    {f}");
        }
        if over_budget {
            println!("    runtime exceeded budget");
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
