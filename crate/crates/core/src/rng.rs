//! Seeded randomness with disjoint domains.
//!
//! Every party draws from its own ChaCha stream, so a user seed and a node
//! seed with the same numeric value still produce unrelated sequences.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedDomain {
    /// Query masks `U`.
    User,
    /// Common randomness `S`.
    Node,
    /// Generated databases.
    Database,
    /// Monte Carlo audit sampling.
    Audit,
}

impl SeedDomain {
    fn stream(self) -> u64 {
        match self {
            SeedDomain::User => 1,
            SeedDomain::Node => 2,
            SeedDomain::Database => 3,
            SeedDomain::Audit => 4,
        }
    }
}

pub fn seeded(domain: SeedDomain, seed: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(domain.stream());
    rng
}
