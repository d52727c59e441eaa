//! Structural self-checks over every small code, used by `prmpir verify`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{best_code, lb_systematic, table1, table1_diff, table2, table2_diff};
use crate::error::{Error, Result};
use crate::pirsim::correctness_trials;
use crate::prm::{build_prm, prm_params};
use crate::shorten::{build_sprm, shortening_plan};

/// Codes with `m` above this are too big to sweep every shortening.
pub const MAX_VERIFY_M: usize = 9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn from_failures(name: impl Into<String>, checked: usize, failures: Vec<String>) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            format!("{checked} cases")
        } else {
            let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
            format!(
                "{} of {checked} failed: {}",
                failures.len(),
                shown.join("; ")
            )
        };
        Self {
            name: name.into(),
            passed,
            detail,
        }
    }
}

fn prm_structure(max_m: usize) -> CheckResult {
    let mut failures = Vec::new();
    let mut checked = 0;
    for m in 1..=max_m {
        for r in 1..=m {
            checked += 1;
            let code = match build_prm(m, r) {
                Ok(c) => c,
                Err(e) => {
                    failures.push(format!("PRM({r},{m}): {e}"));
                    continue;
                }
            };
            let (n, k, tau) = prm_params(m, r).expect("built codes have parameters");
            if (code.n() as u64, code.k() as u64, code.tau() as u64) != (n, k, tau) {
                failures.push(format!("PRM({r},{m}): parameters differ from closed form"));
            }
            for v in code.violations() {
                failures.push(format!("PRM({r},{m}): {v}"));
            }
            if (0..code.k()).any(|i| code.coverage(i) != code.n()) {
                failures.push(format!(
                    "PRM({r},{m}): recovery sets do not cover all coordinates"
                ));
            }
        }
    }
    CheckResult::from_failures("prm invariants", checked, failures)
}

fn sprm_structure(max_m: usize) -> CheckResult {
    let mut failures = Vec::new();
    let mut checked = 0;
    for m in 1..=max_m {
        for r in 1..=m {
            let (n, k, tau) = prm_params(m, r).expect("small parameters");
            for gamma in 0..k as usize {
                checked += 1;
                let label = format!("SPRM({r},{m},{gamma})");
                let plan = match shortening_plan(m, r, gamma) {
                    Ok(p) => p,
                    Err(e) => {
                        failures.push(format!("{label}: {e}"));
                        continue;
                    }
                };
                match build_sprm(m, r, gamma) {
                    Ok(code) => {
                        let expect = (
                            n as usize - plan.gamma_prime,
                            k as usize - gamma,
                            tau as usize,
                        );
                        if (code.n(), code.k(), code.tau()) != expect {
                            failures.push(format!(
                                "{label}: got (n,k,tau)=({},{},{})",
                                code.n(),
                                code.k(),
                                code.tau()
                            ));
                        }
                        failures.extend(
                            code.violations()
                                .into_iter()
                                .map(|v| format!("{label}: {v}")),
                        );
                    }
                    Err(e) => failures.push(format!("{label}: {e}")),
                }
            }
        }
    }
    CheckResult::from_failures("shortened code invariants", checked, failures)
}

fn bound_consistency(max_k: u64) -> CheckResult {
    let mut failures = Vec::new();
    let mut checked = 0;
    for tau in [2u64, 3, 4, 7, 8] {
        for k in 1..=max_k {
            checked += 1;
            match best_code(k, tau) {
                Ok((report, code)) => {
                    if report.lower > report.achieved {
                        failures.push(format!("k={k} tau={tau}: lower bound exceeds length"));
                    }
                    if lb_systematic(k, tau).ok() != Some(report.lower) {
                        failures.push(format!("k={k} tau={tau}: lower bound mismatch"));
                    }
                    failures.extend(
                        code.violations()
                            .into_iter()
                            .map(|v| format!("k={k} tau={tau}: {v}")),
                    );
                }
                Err(e) => failures.push(format!("k={k} tau={tau}: {e}")),
            }
        }
    }
    CheckResult::from_failures("bounds below constructions", checked, failures)
}

fn retrieval(max_m: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut failures = Vec::new();
    let mut checked = 0;
    for m in 2..=max_m.min(6) {
        for r in 1..=m {
            let code = build_prm(m, r).expect("small code");
            checked += 1;
            match correctness_trials(&code, 3, 50, &mut rng) {
                Ok(rep) if rep.correct == rep.trials => {}
                Ok(rep) => failures.push(format!(
                    "PRM({r},{m}): {}/{} correct",
                    rep.correct, rep.trials
                )),
                Err(e) => failures.push(format!("PRM({r},{m}): {e}")),
            }
        }
    }
    CheckResult::from_failures("private retrieval decodes", checked, failures)
}

fn tables() -> Vec<CheckResult> {
    let t1 = table1_diff(&table1());
    let t2 = match table2() {
        Ok(cells) => table2_diff(&cells),
        Err(e) => vec![e.to_string()],
    };
    vec![
        CheckResult::from_failures("table 1 reproduction", 1, t1),
        CheckResult::from_failures("table 2 reproduction", 1, t2),
    ]
}

/// Runs every check on codes with `m <= max_m`.
pub fn run_checks(max_m: usize) -> Result<Vec<CheckResult>> {
    if max_m == 0 || max_m > MAX_VERIFY_M {
        return Err(Error::InvalidParameters(format!(
            "max_m must be in 1..={MAX_VERIFY_M}, got {max_m}"
        )));
    }
    let mut out = vec![
        prm_structure(max_m),
        sprm_structure(max_m),
        bound_consistency(40),
        retrieval(max_m),
    ];
    out.extend(tables());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_sweep_passes() {
        let results = run_checks(5).unwrap();
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
        assert_eq!(results.len(), 6);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(run_checks(0).is_err());
        assert!(run_checks(MAX_VERIFY_M + 1).is_err());
    }

    #[test]
    fn failure_detail_is_truncated() {
        let r = CheckResult::from_failures("x", 10, (0..8).map(|i| i.to_string()).collect());
        assert!(!r.passed);
        assert!(r.detail.starts_with("8 of 10 failed: 0; 1; 2; 3; 4"));
        assert!(!r.detail.contains("; 5"));
    }
}
