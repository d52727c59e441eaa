//! Private retrieval over `n` simulated servers holding coded columns.
//!
//! The database is `k` parts of `B` records each. Server `s` stores
//! `c_s = XOR_i G[i][s] * x_i`, componentwise over the `B` records. To read
//! record `j` of part `i` the client splits `e_j` into `tau` additive shares,
//! sends share `t` to every server in recovery set `t` of symbol `i`, and a
//! fresh uniform dummy query to every other server. Answers are inner
//! products over GF(2), so the XOR of the answers inside a recovery set equals
//! the share applied to `x_i`, and the XOR over all sets gives `x_i[j]`.

use rand::Rng;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::prm::PirCode;

/// Largest record count the privacy audit will tabulate.
pub const MAX_AUDIT_RECORDS: usize = 4;
/// Minimum audit trials per target, per possible query value.
pub const AUDIT_TRIALS_PER_CELL: usize = 1000;

/// A vector in `F_2^B`, packed least significant bit first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Word {
    bits: Vec<u64>,
    len: usize,
}

impl Word {
    pub fn zero(len: usize) -> Self {
        Self {
            bits: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn unit(len: usize, j: usize) -> Self {
        let mut w = Self::zero(len);
        w.flip(j);
        w
    }

    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        let mut w = Self::zero(len);
        for (i, b) in w.bits.iter_mut().enumerate() {
            let valid = (len - 64 * i).min(64);
            *b = rng.random::<u64>() & mask(valid);
        }
        w
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut w = Self::zero(bits.len());
        for (j, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                w.flip(j);
            }
        }
        w
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, j: usize) -> u8 {
        ((self.bits[j / 64] >> (j % 64)) & 1) as u8
    }

    pub fn flip(&mut self, j: usize) {
        assert!(j < self.len);
        self.bits[j / 64] ^= 1 << (j % 64);
    }

    pub fn xor_assign(&mut self, other: &Word) {
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a ^= b;
        }
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &Word) -> u8 {
        let ones: u32 = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        (ones & 1) as u8
    }

    /// The word as an integer; only meaningful for `len <= 64`.
    pub fn as_index(&self) -> usize {
        self.bits.first().copied().unwrap_or(0) as usize
    }
}

fn mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl std::fmt::Display for Word {
    /// Leftmost character is record 0.
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for j in 0..self.len {
            f.write_str(if self.get(j) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranscriptEntry {
    pub server: usize,
    pub query: String,
    pub answer: u8,
}

#[derive(Clone, Debug)]
pub struct ServerArray {
    code: PirCode,
    records: usize,
    shares: Vec<Word>,
    transcript: Vec<TranscriptEntry>,
}

/// Provisions `n` servers from a `k x B` database of 0/1 entries.
pub fn setup(code: &PirCode, database: &[Vec<u8>]) -> Result<ServerArray> {
    if database.len() != code.k() {
        return Err(Error::DimensionMismatch {
            expected: code.k(),
            actual: database.len(),
        });
    }
    let records = database.first().map_or(0, Vec::len);
    if records == 0 {
        return Err(Error::InvalidParameters(
            "need at least one record per part".into(),
        ));
    }
    if let Some(bad) = database.iter().find(|row| row.len() != records) {
        return Err(Error::DimensionMismatch {
            expected: records,
            actual: bad.len(),
        });
    }
    let parts: Vec<Word> = database.iter().map(|row| Word::from_bits(row)).collect();
    let g = code.generator();
    let shares = (0..code.n())
        .map(|s| {
            let mut share = Word::zero(records);
            for (i, part) in parts.iter().enumerate() {
                if g.get(i, s) {
                    share.xor_assign(part);
                }
            }
            share
        })
        .collect();
    Ok(ServerArray {
        code: code.clone(),
        records,
        shares,
        transcript: Vec::new(),
    })
}

impl ServerArray {
    pub fn code(&self) -> &PirCode {
        &self.code
    }

    pub fn records(&self) -> usize {
        self.records
    }

    pub fn shares(&self) -> &[Word] {
        &self.shares
    }

    pub fn transcript(&self) -> &[TranscriptEntry] {
        &self.transcript
    }

    pub fn clear_transcript(&mut self) {
        self.transcript.clear();
    }

    /// True when re-encoding `database` reproduces every stored share.
    pub fn consistent_with(&self, database: &[Vec<u8>]) -> bool {
        setup(&self.code, database).is_ok_and(|fresh| fresh.shares == self.shares)
    }

    /// Transcript as JSON lines, one object per server query.
    pub fn transcript_json_lines(&self) -> String {
        self.transcript
            .iter()
            .map(|e| serde_json::to_string(e).expect("plain struct serialises") + "\n")
            .collect()
    }
}

/// How the client forms its queries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClientKind {
    /// Uniform additive shares of `e_j`.
    Honest,
    /// Broken client: share 0 is `e_j` itself. Only for negative controls.
    Plaintext,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    pub part: usize,
    pub record: usize,
    /// The `tau` shares; their XOR is `e_record`.
    pub queries: Vec<Word>,
    /// Share index sent to each server, `None` for a dummy.
    pub assignment: Vec<Option<usize>>,
    /// The query each server actually receives.
    pub server_queries: Vec<Word>,
}

pub fn make_query_plan<R: Rng + ?Sized>(
    code: &PirCode,
    part: usize,
    record: usize,
    records: usize,
    client: ClientKind,
    rng: &mut R,
) -> Result<QueryPlan> {
    if part >= code.k() {
        return Err(Error::IndexOutOfRange {
            index: part,
            limit: code.k(),
        });
    }
    if record >= records {
        return Err(Error::IndexOutOfRange {
            index: record,
            limit: records,
        });
    }
    let sets = &code.recovery()[part];
    let tau = sets.len();
    let target = Word::unit(records, record);

    let mut queries: Vec<Word> = Vec::with_capacity(tau);
    let free_from = match client {
        ClientKind::Honest => 0,
        ClientKind::Plaintext => {
            queries.push(target.clone());
            1
        }
    };
    let mut last = match client {
        ClientKind::Honest => target,
        ClientKind::Plaintext => Word::zero(records),
    };
    for _ in free_from..tau.saturating_sub(1) {
        let q = Word::random(records, rng);
        last.xor_assign(&q);
        queries.push(q);
    }
    if queries.len() < tau {
        queries.push(last);
    }

    let mut assignment = vec![None; code.n()];
    for (t, set) in sets.iter().enumerate() {
        for &s in set {
            assignment[s] = Some(t);
        }
    }
    let server_queries = assignment
        .iter()
        .map(|a| match a {
            Some(t) => queries[*t].clone(),
            None => Word::random(records, rng),
        })
        .collect();
    Ok(QueryPlan {
        part,
        record,
        queries,
        assignment,
        server_queries,
    })
}

/// Sends one query to every server, logs the exchange, and decodes the bit.
pub fn execute(array: &mut ServerArray, plan: &QueryPlan) -> Result<u8> {
    let n = array.code.n();
    if plan.server_queries.len() != n || plan.assignment.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: plan.server_queries.len(),
        });
    }
    if plan.part >= array.code.k() || plan.queries.len() != array.code.recovery()[plan.part].len() {
        return Err(Error::InvalidParameters(
            "plan does not match this code".into(),
        ));
    }
    if plan.server_queries.iter().any(|q| q.len() != array.records) {
        return Err(Error::DimensionMismatch {
            expected: array.records,
            actual: plan.server_queries[0].len(),
        });
    }
    let answers: Vec<u8> = plan
        .server_queries
        .iter()
        .zip(&array.shares)
        .map(|(q, share)| q.dot(share))
        .collect();
    for (server, (q, &answer)) in plan.server_queries.iter().zip(&answers).enumerate() {
        array.transcript.push(TranscriptEntry {
            server,
            query: q.to_string(),
            answer,
        });
    }
    Ok(array.code.recovery()[plan.part]
        .iter()
        .flatten()
        .fold(0u8, |acc, &s| acc ^ answers[s]))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HarnessReport {
    pub trials: usize,
    pub correct: usize,
}

/// Random `(database, part, record)` retrievals, each on a fresh database.
pub fn correctness_trials<R: Rng + ?Sized>(
    code: &PirCode,
    records: usize,
    trials: usize,
    rng: &mut R,
) -> Result<HarnessReport> {
    let mut correct = 0;
    for _ in 0..trials {
        let db: Vec<Vec<u8>> = (0..code.k())
            .map(|_| (0..records).map(|_| rng.random_range(0..2u8)).collect())
            .collect();
        let mut array = setup(code, &db)?;
        let part = rng.random_range(0..code.k());
        let record = rng.random_range(0..records);
        let plan = make_query_plan(code, part, record, records, ClientKind::Honest, rng)?;
        if execute(&mut array, &plan)? == db[part][record] {
            correct += 1;
        }
    }
    Ok(HarnessReport { trials, correct })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ServerAudit {
    pub server: usize,
    /// Chi-square statistic against uniform, one per target `(part, record)`
    /// in row-major order.
    pub statistics: Vec<f64>,
    pub min_p_value: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub alpha: f64,
    pub trials_per_target: usize,
    pub records: usize,
    pub targets: usize,
    /// Each `(server, target)` test runs at `alpha / targets`, so a server
    /// fails with probability at most `alpha` when the client is private.
    pub per_test_alpha: f64,
    pub servers: Vec<ServerAudit>,
    pub passed: bool,
}

/// Empirical single-server privacy check.
///
/// For every target `(part, record)` the client issues `trials` plans; each
/// server's received queries are tallied and compared with the uniform
/// distribution on `F_2^B` by a chi-square test.
pub fn privacy_audit<R: Rng + ?Sized>(
    array: &ServerArray,
    trials: usize,
    alpha: f64,
    client: ClientKind,
    rng: &mut R,
) -> Result<AuditReport> {
    let records = array.records;
    if records > MAX_AUDIT_RECORDS {
        return Err(Error::TooLarge(format!(
            "audit tabulates 2^B query values; B={records} exceeds {MAX_AUDIT_RECORDS}"
        )));
    }
    let cells = 1usize << records;
    if trials < AUDIT_TRIALS_PER_CELL * cells {
        return Err(Error::InvalidParameters(format!(
            "audit needs at least {} trials per target for B={records}, got {trials}",
            AUDIT_TRIALS_PER_CELL * cells
        )));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "alpha={alpha} not in (0, 1)"
        )));
    }
    let code = &array.code;
    let n = code.n();
    let targets = code.k() * records;
    let dist = ChiSquared::new((cells - 1) as f64).expect("positive degrees of freedom");
    let expected = trials as f64 / cells as f64;
    let per_test_alpha = alpha / targets as f64;

    let mut stats = vec![Vec::with_capacity(targets); n];
    for part in 0..code.k() {
        for record in 0..records {
            let mut counts = vec![vec![0usize; cells]; n];
            for _ in 0..trials {
                let plan = make_query_plan(code, part, record, records, client, rng)?;
                for (s, q) in plan.server_queries.iter().enumerate() {
                    counts[s][q.as_index()] += 1;
                }
            }
            for (s, row) in counts.iter().enumerate() {
                let chi: f64 = row
                    .iter()
                    .map(|&o| (o as f64 - expected).powi(2) / expected)
                    .sum();
                stats[s].push(chi);
            }
        }
    }
    let servers: Vec<ServerAudit> = stats
        .into_iter()
        .enumerate()
        .map(|(server, statistics)| {
            let min_p_value = statistics
                .iter()
                .map(|&x| 1.0 - dist.cdf(x))
                .fold(1.0, f64::min);
            ServerAudit {
                server,
                statistics,
                min_p_value,
                passed: min_p_value >= per_test_alpha,
            }
        })
        .collect();
    let passed = servers.iter().all(|s| s.passed);
    Ok(AuditReport {
        alpha,
        trials_per_target: trials,
        records,
        targets,
        per_test_alpha,
        servers,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prm::build_prm;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The (5, 4) parity-check code: four data servers plus their XOR.
    fn parity_code() -> PirCode {
        build_prm(4, 3).unwrap()
    }

    #[test]
    fn parity_server_holds_xor() {
        let code = parity_code();
        let db = vec![vec![1, 0, 1], vec![0, 0, 1], vec![1, 1, 1], vec![0, 1, 0]];
        let array = setup(&code, &db).unwrap();
        let shares: Vec<String> = array.shares().iter().map(Word::to_string).collect();
        assert_eq!(shares, vec!["101", "001", "111", "010", "001"]);
        assert!(array.consistent_with(&db));
        assert!(!array.consistent_with(&vec![vec![0; 3]; 4]));
    }

    #[test]
    fn setup_errors() {
        let code = parity_code();
        assert!(setup(&code, &vec![vec![0; 3]; 3]).is_err());
        assert!(setup(&code, &vec![vec![]; 4]).is_err());
        assert!(setup(&code, &[vec![0; 3], vec![0; 3], vec![0; 2], vec![0; 3]]).is_err());
        let zero = setup(&code, &vec![vec![0; 2]; 4]).unwrap();
        assert!(zero.shares().iter().all(|s| s.as_index() == 0));
    }

    #[test]
    fn part_one_plan_shape() {
        let code = parity_code();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let plan = make_query_plan(&code, 0, 0, 1, ClientKind::Honest, &mut rng).unwrap();
        assert_eq!(
            plan.assignment,
            vec![Some(0), Some(1), Some(1), Some(1), Some(1)]
        );
        assert_eq!(plan.queries.len(), 2);
        // two-share XOR sharing of e_0 with B = 1
        assert_eq!(plan.queries[0].get(0) ^ plan.queries[1].get(0), 1);
        assert!(make_query_plan(&code, 4, 0, 1, ClientKind::Honest, &mut rng).is_err());
        assert!(make_query_plan(&code, 0, 1, 1, ClientKind::Honest, &mut rng).is_err());
    }

    #[test]
    fn shares_xor_to_unit_vector() {
        let code = build_prm(4, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let i = rng.random_range(0..code.k());
            let j = rng.random_range(0..70);
            for client in [ClientKind::Honest, ClientKind::Plaintext] {
                let plan = make_query_plan(&code, i, j, 70, client, &mut rng).unwrap();
                let mut acc = Word::zero(70);
                plan.queries.iter().for_each(|q| acc.xor_assign(q));
                assert_eq!(acc, Word::unit(70, j));
            }
        }
    }

    #[test]
    fn zero_database_reads_zero() {
        let code = build_prm(4, 2).unwrap();
        let mut array = setup(&code, &vec![vec![0; 3]; code.k()]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for i in 0..code.k() {
            let plan = make_query_plan(&code, i, 2, 3, ClientKind::Honest, &mut rng).unwrap();
            assert_eq!(execute(&mut array, &plan).unwrap(), 0);
        }
        assert_eq!(array.transcript().len(), code.k() * code.n());
    }

    #[test]
    fn replay_is_deterministic() {
        let code = build_prm(4, 2).unwrap();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let db: Vec<Vec<u8>> = (0..6)
                .map(|_| (0..4).map(|_| rng.random_range(0..2)).collect())
                .collect();
            let mut array = setup(&code, &db).unwrap();
            let mut answers = Vec::new();
            for _ in 0..10 {
                let plan = make_query_plan(&code, 3, 1, 4, ClientKind::Honest, &mut rng).unwrap();
                answers.push(execute(&mut array, &plan).unwrap());
            }
            (answers, array.transcript_json_lines())
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9).1, run(10).1);
    }

    #[test]
    fn transcript_line_format() {
        let code = parity_code();
        let mut array = setup(&code, &vec![vec![1, 0, 0, 1]; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plan = make_query_plan(&code, 1, 3, 4, ClientKind::Honest, &mut rng).unwrap();
        execute(&mut array, &plan).unwrap();
        let first = array
            .transcript_json_lines()
            .lines()
            .next()
            .unwrap()
            .to_string();
        let v: serde_json::Value = serde_json::from_str(&first).unwrap();
        assert_eq!(v["server"], 0);
        assert_eq!(v["query"].as_str().unwrap().len(), 4);
        assert!(v["answer"] == 0 || v["answer"] == 1);
    }

    #[test]
    fn audit_guards() {
        let code = parity_code();
        let array = setup(&code, &vec![vec![0; 5]; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(privacy_audit(&array, 100_000, 0.001, ClientKind::Honest, &mut rng).is_err());
        let array = setup(&code, &vec![vec![0; 2]; 4]).unwrap();
        assert!(privacy_audit(&array, 3999, 0.001, ClientKind::Honest, &mut rng).is_err());
        assert!(privacy_audit(&array, 4000, 0.0, ClientKind::Honest, &mut rng).is_err());
    }

    #[test]
    fn retrievals_are_correct() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let codes = [
            parity_code(),
            build_prm(3, 2).unwrap(),
            crate::shorten::build_sprm(4, 2, 4).unwrap(),
        ];
        for code in &codes {
            let rep = correctness_trials(code, 5, 1000, &mut rng).unwrap();
            assert_eq!(rep.correct, rep.trials);
        }
    }

    #[test]
    fn audit_separates_honest_from_plaintext() {
        let code = parity_code();
        let array = setup(&code, &vec![vec![0; 2]; 4]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let honest = privacy_audit(&array, 20_000, 0.001, ClientKind::Honest, &mut rng).unwrap();
        assert!(honest.passed, "{honest:?}");
        assert_eq!(honest.targets, 8);
        let leaky = privacy_audit(&array, 20_000, 0.001, ClientKind::Plaintext, &mut rng).unwrap();
        assert!(!leaky.passed);
        // the singleton recovery set of each part sees e_j in the clear
        assert!(!leaky.servers[0].passed);
    }
}
