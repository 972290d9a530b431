use serde::{Deserialize, Serialize};

use super::answer::{AnswerSet, CommonRandomness, RandomnessMode};
use super::query::{gen_queries, QuerySet};
use crate::error::{Error, Result};
use crate::network::{SimNetwork, User};
use crate::storage::{build_generator, encode, Database, GeneratorMatrix, StorageParams};

/// Record of one retrieval.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub params: StorageParams,
    /// Rows of the `M x N` generator.
    pub generator: Vec<Vec<u32>>,
    pub theta: usize,
    pub query_set: QuerySet,
    pub answer_set: AnswerSet,
    pub decoded_file: Vec<Vec<u32>>,
    /// Symbols downloaded, `stripes * N * M`.
    pub download_count: usize,
    /// Uniform symbols of `S` in play, `stripes * M^2` with full randomness.
    pub randomness_count: usize,
}

pub fn run_round(
    params: &StorageParams,
    db: &Database,
    theta: usize,
    user_seed: u64,
    node_seed: u64,
) -> Result<Transcript> {
    run_round_with(params, db, theta, user_seed, node_seed, RandomnessMode::Full)
}

/// Encode, query, let each node answer in isolation, decode.
pub fn run_round_with(
    params: &StorageParams,
    db: &Database,
    theta: usize,
    user_seed: u64,
    node_seed: u64,
    mode: RandomnessMode,
) -> Result<Transcript> {
    run_round_on(params, &build_generator(params)?, db, theta, user_seed, node_seed, mode)
}

/// [`run_round_with`] over a caller-supplied generator.
pub fn run_round_on(
    params: &StorageParams,
    g: &GeneratorMatrix,
    db: &Database,
    theta: usize,
    user_seed: u64,
    node_seed: u64,
    mode: RandomnessMode,
) -> Result<Transcript> {
    params.validate()?;
    if params.k < 2 {
        return Err(Error::TooFewFiles(params.k));
    }
    let shares = encode(params, db, g)?;
    let randomness = CommonRandomness::from_seed(params, mode, node_seed)?;
    let network = SimNetwork::new(params, g, shares, &randomness)?;

    let user = User::new(params, g, gen_queries(params, theta, user_seed)?)?;
    let answer_set = network.serve(user.queries())?;
    let decoded_file = user.receive(&answer_set)?;

    Ok(Transcript {
        params: *params,
        generator: g.to_rows(),
        theta,
        query_set: user.queries().clone(),
        download_count: answer_set.download_count(),
        answer_set,
        decoded_file,
        randomness_count: params.stripes * mode.random_symbols(params.m),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_and_recovery() {
        let p = StorageParams::new(5, 4, 2, 3, 2).unwrap();
        let db = Database::random(&p, &mut ChaCha8Rng::seed_from_u64(1));
        let t = run_round(&p, &db, 2, 10, 20).unwrap();
        assert_eq!(t.decoded_file, db.files[1]);
        assert_eq!(t.download_count, 2 * 4 * 2);
        assert_eq!(t.randomness_count, 2 * 4);
    }

    #[test]
    fn replicated_pair_downloads_two_symbols() {
        let p = StorageParams::new(2, 2, 1, 2, 1).unwrap();
        let db = Database::from_symbols(&p, &[1, 0]).unwrap();
        let t = run_round(&p, &db, 1, 0, 0).unwrap();
        assert_eq!(t.download_count, 2);
        assert_eq!(t.decoded_file, vec![vec![1]]);
    }

    #[test]
    fn single_file_is_rejected() {
        let p = StorageParams::new(5, 4, 2, 1, 1).unwrap();
        assert_eq!(run_round(&p, &Database::zeros(&p), 1, 0, 0), Err(Error::TooFewFiles(1)));
    }

    #[test]
    fn zeroed_randomness_still_decodes() {
        let p = StorageParams::new(7, 5, 2, 2, 1).unwrap();
        let db = Database::random(&p, &mut ChaCha8Rng::seed_from_u64(4));
        let t = run_round_with(&p, &db, 1, 1, 1, RandomnessMode::Zeroed).unwrap();
        assert_eq!(t.decoded_file, db.files[0]);
        assert_eq!(t.randomness_count, 0);
    }
}
