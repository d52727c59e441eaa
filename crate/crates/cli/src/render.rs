use std::fmt::Write as _;

use serde::Serialize;

use prm_pir::bounds::{BoundReport, Table1Row, Table2Cell, TABLE2_TAUS};
use prm_pir::pirsim::AuditReport;
use prm_pir::verify::CheckResult;
use prm_pir::PirCode;

use crate::commands::Format;

fn family_text(family: &[Vec<usize>]) -> String {
    if family.is_empty() {
        return "-".into();
    }
    family
        .iter()
        .map(|s| {
            let parts: Vec<String> = s.iter().map(usize::to_string).collect();
            format!("{{{}}}", parts.join(","))
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn rho_text(rho: &[usize]) -> String {
    let parts: Vec<String> = rho.iter().map(usize::to_string).collect();
    format!("({})", parts.join(","))
}

pub fn code_summary(code: &PirCode) -> String {
    let spec = code.spec();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "SPRM(r={}, m-1={}, gamma={}): n={} k={} tau={}",
        spec.r,
        spec.m - 1,
        spec.gamma,
        code.n(),
        code.k(),
        code.tau()
    );
    let points: Vec<String> = code.coordinates().iter().map(|c| c.to_point()).collect();
    let _ = writeln!(out, "coordinates: {}", points.join(" "));
    let _ = writeln!(out, "generator:");
    for (i, msg) in code.messages().iter().enumerate() {
        let row: String = code
            .generator()
            .row(i)
            .iter()
            .map(|&b| char::from(b'0' + b))
            .collect();
        let _ = writeln!(out, "  {} {row}", msg.to_point());
    }
    out
}

pub fn shortening_row(row: &Table1Row) -> String {
    format!(
        "gamma={} rho={} family={} gamma'={} k={} n={}\n",
        row.gamma,
        rho_text(&row.rho),
        family_text(&row.family),
        row.gamma_prime,
        row.k,
        row.n
    )
}

pub fn recovery(code: &PirCode, symbols: &[usize]) -> String {
    let mut out = String::new();
    for &i in symbols {
        let _ = writeln!(out, "symbol {i} ({}):", code.messages()[i].to_point());
        for (t, set) in code.recovery()[i].iter().enumerate() {
            let pts: Vec<String> = set
                .iter()
                .map(|&j| code.coordinates()[j].to_point())
                .collect();
            let _ = writeln!(out, "  R{t}: {{{}}}", pts.join(", "));
        }
    }
    out
}

pub fn bound_report(r: &BoundReport) -> String {
    let c = &r.construction;
    format!(
        "k={} tau={}: lower bound {}, achieved {} by SPRM({}, {}, {}){}{}\n",
        r.k,
        r.tau,
        r.lower,
        r.achieved,
        c.r,
        c.m - 1,
        c.gamma,
        if c.punctured { " punctured once" } else { "" },
        if r.optimal { " [optimal]" } else { "" }
    )
}

pub fn table1(rows: &[Table1Row], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => return serde_json::to_string_pretty(rows).expect("rows serialise") + "\n",
        Format::Csv => {
            out.push_str("gamma,rho,family,gamma_prime,k,n\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "{},\"{}\",\"{}\",{},{},{}",
                    r.gamma,
                    rho_text(&r.rho),
                    family_text(&r.family),
                    r.gamma_prime,
                    r.k,
                    r.n
                );
            }
        }
        Format::Md => {
            out.push_str("| gamma | rho | family | gamma' | k | n |\n");
            out.push_str("|---|---|---|---|---|---|\n");
            for r in rows {
                let _ = writeln!(
                    out,
                    "| {} | {} | {} | {} | {} | {} |",
                    r.gamma,
                    rho_text(&r.rho),
                    family_text(&r.family),
                    r.gamma_prime,
                    r.k,
                    r.n
                );
            }
        }
    }
    out
}

pub fn table2(cells: &[Table2Cell], format: Format) -> String {
    let mut out = String::new();
    match format {
        Format::Json => {
            return serde_json::to_string_pretty(cells).expect("cells serialise") + "\n"
        }
        Format::Csv => {
            out.push_str("k,tau,n1,n1_published,n2_published,lower\n");
            for c in cells {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    c.k, c.tau, c.n1, c.n1_published, c.n2_published, c.lower
                );
            }
        }
        Format::Md => {
            out.push_str("| k |");
            for tau in TABLE2_TAUS {
                let _ = write!(out, " n1 (tau={tau}) | n2 (tau={tau}) |");
            }
            out.push('\n');
            out.push_str(&"|---".repeat(1 + 2 * TABLE2_TAUS.len()));
            out.push_str("|\n");
            for row in cells.chunks(TABLE2_TAUS.len()) {
                let _ = write!(out, "| {} |", row[0].k);
                for c in row {
                    let _ = write!(out, " {} | {} |", c.n1, c.n2_published);
                }
                out.push('\n');
            }
        }
    }
    out
}

#[derive(Debug, Serialize)]
pub struct SimulationSummary {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub tau: usize,
    pub records: usize,
    pub trials: usize,
    pub correct: usize,
    pub audit: Option<AuditReport>,
}

pub fn simulation(s: &SimulationSummary) -> String {
    let mut out = format!(
        "code n={} k={} tau={}, B={}, seed={}\nretrievals: {}/{} correct\n",
        s.n, s.k, s.tau, s.records, s.seed, s.correct, s.trials
    );
    if let Some(a) = &s.audit {
        let _ = writeln!(
            out,
            "privacy audit: {} trials per target, {} targets, alpha={} (per test {:.2e}): {}",
            a.trials_per_target,
            a.targets,
            a.alpha,
            a.per_test_alpha,
            if a.passed { "PASS" } else { "FAIL" }
        );
        for sv in &a.servers {
            let worst = sv.statistics.iter().copied().fold(0.0, f64::max);
            let _ = writeln!(
                out,
                "  server {}: max chi2 {:.2}, min p {:.3e} {}",
                sv.server,
                worst,
                sv.min_p_value,
                if sv.passed { "ok" } else { "LEAK" }
            );
        }
    }
    out
}

pub fn checks(results: &[CheckResult]) -> String {
    let mut out = String::new();
    for r in results {
        let _ = writeln!(
            out,
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    out
}
