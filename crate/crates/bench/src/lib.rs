//! Shared fixtures for the benchmarks.

use prm_pir::pirsim::{setup, ServerArray};
use prm_pir::PirCode;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A `k x records` database of uniform bits, reproducible from `seed`.
pub fn random_database(k: usize, records: usize, seed: u64) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| (0..records).map(|_| rng.random_range(0..2u8)).collect())
        .collect()
}

/// Servers provisioned with a random database for `code`.
pub fn provisioned(code: &PirCode, records: usize, seed: u64) -> ServerArray {
    setup(code, &random_database(code.k(), records, seed)).expect("database fits the code")
}
