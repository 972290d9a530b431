use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use spir_core::field::next_prime;
use spir_core::storage::{build_generator, column_subsets, encode, reconstruct};
use spir_core::{Database, StorageParams};

fn params(n: usize, m: usize, k: usize, stripes: usize) -> StorageParams {
    let q = if m == 1 { 2 } else { next_prime(n as u64) as u32 };
    StorageParams::new(q, n, m, k, stripes).unwrap()
}

#[test]
fn every_m_subset_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (n, m) in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3), (5, 2)] {
        let p = params(n, m, 3, 2);
        let g = build_generator(&p).unwrap();
        for _ in 0..20 {
            let db = Database::random(&p, &mut rng);
            let shares = encode(&p, &db, &g).unwrap();
            for cols in column_subsets(n, m) {
                let chosen: Vec<_> = cols.iter().map(|&c| shares[c].clone()).collect();
                let back = reconstruct(&p, &chosen, &g).unwrap();
                assert_eq!(back, db, "N = {n}, M = {m}, nodes {cols:?}");
                assert_eq!(encode(&p, &back, &g).unwrap(), shares);
            }
        }
    }
}

#[test]
fn larger_fields_work() {
    let p = StorageParams::new(65_521, 7, 3, 4, 3).unwrap();
    let g = build_generator(&p).unwrap();
    assert!(g.is_mds());
    let db = Database::random(&p, &mut ChaCha8Rng::seed_from_u64(3));
    let shares = encode(&p, &db, &g).unwrap();
    assert_eq!(reconstruct(&p, &shares[4..7], &g).unwrap(), db);
}

#[test]
fn subsets_are_counted_exactly() {
    let binom = |n: usize, k: usize| (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
    for n in 1..=8 {
        for k in 0..=n {
            let all: Vec<_> = column_subsets(n, k).collect();
            assert_eq!(all.len(), binom(n, k));
            assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }
}

proptest! {
    #[test]
    fn encode_is_linear(seed in any::<u64>(), shape in 0usize..6) {
        let (n, m) = [(2, 1), (3, 2), (4, 2), (5, 3), (5, 2), (4, 1)][shape];
        let p = params(n, m, 2, 2);
        let g = build_generator(&p).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Database::random(&p, &mut rng);
        let b = Database::random(&p, &mut rng);
        let sum: Vec<u32> = a.symbols().zip(b.symbols()).map(|(x, y)| (x + y) % p.q).collect();
        let sum = Database::from_symbols(&p, &sum).unwrap();
        let (ea, eb, es) = (encode(&p, &a, &g).unwrap(), encode(&p, &b, &g).unwrap(), encode(&p, &sum, &g).unwrap());
        for node in 0..n {
            let expect: Vec<u32> = ea[node].d.iter().zip(&eb[node].d).map(|(x, y)| (x + y) % p.q).collect();
            prop_assert_eq!(&es[node].d, &expect);
        }
    }
}
