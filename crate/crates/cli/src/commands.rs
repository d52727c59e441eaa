use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use prm_pir::bounds::{best_code, shortening_row, table1, table1_diff, table2, table2_diff};
use prm_pir::pirsim::{execute, make_query_plan, privacy_audit, setup, ClientKind};
use prm_pir::verify::run_checks;
use prm_pir::{build_sprm, Error, PirCode};

use crate::render;

/// Environment variable that takes precedence over `--seed`.
pub const SEED_ENV: &str = "PIR_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "prmpir",
    version,
    about = "Shortened projective Reed-Muller PIR codes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build SPRM(r, m-1, gamma) and print its generator and parameters.
    Construct {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Print the shortening row (gamma, rho, family, gamma', k, n).
    Shorten {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        gamma: usize,
        #[arg(long, conflicts_with = "table")]
        json: bool,
        #[arg(long)]
        table: bool,
    },
    /// List the recovery sets of one or all message symbols.
    Recovery {
        #[command(flatten)]
        code: CodeArgs,
        /// 0-based message index; all symbols when omitted.
        #[arg(long)]
        symbol: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Encode a message given as a 0/1 string of length k.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        message: String,
        #[arg(long)]
        json: bool,
    },
    /// Compare the lower bound with the best construction for (k, tau).
    Bounds {
        #[arg(long)]
        k: u64,
        #[arg(long)]
        tau: u64,
        #[arg(long)]
        json: bool,
    },
    /// Reproduce a parameter table and diff it against the published values.
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        #[arg(long, value_enum, default_value_t = Format::Md)]
        format: Format,
    },
    /// Run private retrievals over simulated servers.
    Simulate {
        #[command(flatten)]
        code: CodeArgs,
        /// Records per message part.
        #[arg(long = "B", default_value_t = 4)]
        records: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Also run the single-server privacy audit.
        #[arg(long)]
        audit: bool,
        /// Trials per target for the audit; defaults to 1000 * 2^B.
        #[arg(long)]
        audit_trials: Option<usize>,
        #[arg(long, default_value_t = 0.001)]
        alpha: f64,
        /// Use the broken plaintext-query client.
        #[arg(long)]
        plaintext: bool,
        /// Write the server transcript as JSON lines.
        #[arg(long)]
        transcript: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the invariant suite on every code with m <= max-m.
    Verify {
        #[arg(long, default_value_t = 6)]
        max_m: usize,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct CodeArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 0)]
    gamma: usize,
}

impl CodeArgs {
    fn build(&self) -> Result<PirCode, Failure> {
        Ok(build_sprm(self.m, self.r, self.gamma)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Md,
    Json,
}

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or parameters; exit code 2.
    Usage(String),
    /// A check ran and failed; the text is still printed; exit code 1.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Invariant(_) | Error::RankDeficient { .. } => Failure::Check(format!("{e}\n")),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serialisable output") + "\n"
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(flag.unwrap_or(0)),
    }
}

pub fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Construct {
            code,
            json: as_json,
        } => {
            let code = code.build()?;
            Ok(if as_json {
                json(&code.descriptor())
            } else {
                render::code_summary(&code)
            })
        }
        Command::Shorten {
            m,
            r,
            gamma,
            json: as_json,
            table,
        } => {
            let row = shortening_row(m, r, gamma)?;
            Ok(if as_json {
                json(&row)
            } else if table {
                render::table1(std::slice::from_ref(&row), Format::Md)
            } else {
                render::shortening_row(&row)
            })
        }
        Command::Recovery {
            code,
            symbol,
            json: as_json,
        } => {
            let code = code.build()?;
            let symbols: Vec<usize> = match symbol {
                Some(i) if i >= code.k() => {
                    return Err(Failure::Usage(format!(
                        "symbol {i} out of range for k={}",
                        code.k()
                    )))
                }
                Some(i) => vec![i],
                None => (0..code.k()).collect(),
            };
            Ok(if as_json {
                let sets: Vec<_> = symbols.iter().map(|&i| &code.recovery()[i]).collect();
                json(&sets)
            } else {
                render::recovery(&code, &symbols)
            })
        }
        Command::Encode {
            code,
            message,
            json: as_json,
        } => {
            let code = code.build()?;
            let msg = parse_bits(&message)?;
            let word = code.encode(&msg)?;
            let text: String = word.iter().map(|b| char::from(b'0' + b)).collect();
            Ok(if as_json {
                json(&serde_json::json!({ "message": message, "codeword": text }))
            } else {
                text + "\n"
            })
        }
        Command::Bounds {
            k,
            tau,
            json: as_json,
        } => {
            let (report, _) = best_code(k, tau)?;
            Ok(if as_json {
                json(&report)
            } else {
                render::bound_report(&report)
            })
        }
        Command::Table { which, format } => {
            let (text, diff) = if which == 1 {
                let rows = table1();
                (render::table1(&rows, format), table1_diff(&rows))
            } else {
                let cells = table2()?;
                (render::table2(&cells, format), table2_diff(&cells))
            };
            if diff.is_empty() {
                Ok(text)
            } else {
                let mut out = text;
                for d in diff {
                    let _ = writeln!(out, "mismatch: {d}");
                }
                Err(Failure::Check(out))
            }
        }
        Command::Simulate {
            code,
            records,
            trials,
            seed,
            audit,
            audit_trials,
            alpha,
            plaintext,
            transcript,
            json: as_json,
        } => {
            let seed = resolve_seed(seed)?;
            let code = code.build()?;
            if records == 0 {
                return Err(Failure::Usage("--B must be at least 1".into()));
            }
            let client = if plaintext {
                ClientKind::Plaintext
            } else {
                ClientKind::Honest
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let db: Vec<Vec<u8>> = (0..code.k())
                .map(|_| (0..records).map(|_| rng.random_range(0..2u8)).collect())
                .collect();
            let mut array = setup(&code, &db)?;
            let mut correct = 0;
            for _ in 0..trials {
                let i = rng.random_range(0..code.k());
                let j = rng.random_range(0..records);
                let plan = make_query_plan(&code, i, j, records, client, &mut rng)?;
                if execute(&mut array, &plan)? == db[i][j] {
                    correct += 1;
                }
            }
            if let Some(path) = &transcript {
                fs::write(path, array.transcript_json_lines())
                    .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
            }
            let audit_report = if audit {
                let n = audit_trials.unwrap_or(1000 << records.min(16));
                Some(privacy_audit(&array, n, alpha, client, &mut rng)?)
            } else {
                None
            };
            let summary = render::SimulationSummary {
                seed,
                n: code.n(),
                k: code.k(),
                tau: code.tau(),
                records,
                trials,
                correct,
                audit: audit_report,
            };
            let text = if as_json {
                json(&summary)
            } else {
                render::simulation(&summary)
            };
            let audit_ok = summary.audit.as_ref().is_none_or(|a| a.passed);
            if correct == trials && audit_ok {
                Ok(text)
            } else {
                Err(Failure::Check(text))
            }
        }
        Command::Verify {
            max_m,
            json: as_json,
        } => {
            let results = run_checks(max_m)?;
            let text = if as_json {
                json(&results)
            } else {
                render::checks(&results)
            };
            if results.iter().all(|r| r.passed) {
                Ok(text)
            } else {
                Err(Failure::Check(text))
            }
        }
    }
}

fn parse_bits(s: &str) -> Result<Vec<u8>, Failure> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Failure::Usage(format!(
                "message must be a 0/1 string, found {other:?}"
            ))),
        })
        .collect()
}
