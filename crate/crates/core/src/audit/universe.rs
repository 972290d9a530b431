use rand::Rng;
use rayon::prelude::*;

use super::AuditOptions;
use crate::error::{Error, Result};
use crate::protocol::{
    gen_answer, gen_queries_with_masks, AnswerSet, CommonRandomness, QueryPlan, QuerySet, RandomnessMode,
};
use crate::storage::{encode, Database, GeneratorMatrix, NodeData, StorageParams};

/// Every joint assignment of (requested file, database, masks, shared
/// randomness), each component uniform and independent.
///
/// Points are numbered `0..size()`. Index `i` maps to
/// `theta = i / points_per_theta() + 1` and the remainder is read as base-q
/// digits, least significant first: database symbols (file, row, column
/// order), then mask symbols, then the random symbols of `S`.
#[derive(Clone, Debug)]
pub struct Universe {
    params: StorageParams,
    generator: GeneratorMatrix,
    plan: QueryPlan,
    randomness: RandomnessMode,
    masked: bool,
    db_symbols: usize,
    mask_symbols: usize,
    live_per_stripe: usize,
}

/// One fully evaluated retrieval at a universe point.
#[derive(Clone, Debug)]
pub struct Trace {
    pub theta: usize,
    pub db: Database,
    pub shares: Vec<NodeData>,
    pub queries: QuerySet,
    pub randomness: CommonRandomness,
    pub answers: AnswerSet,
}

impl Universe {
    pub fn new(params: &StorageParams, generator: &GeneratorMatrix, opts: &AuditOptions) -> Result<Self> {
        params.validate()?;
        crate::storage::check_generator(params, generator)?;
        opts.randomness.check(params.m)?;
        let plan = QueryPlan::new(params)?;
        Ok(Universe {
            params: *params,
            generator: generator.clone(),
            plan,
            randomness: opts.randomness,
            masked: opts.masked_queries,
            db_symbols: params.k * params.file_len(),
            mask_symbols: if opts.masked_queries { params.stripes * params.m * params.stripe_len() } else { 0 },
            live_per_stripe: opts.randomness.random_symbols(params.m),
        })
    }

    pub fn params(&self) -> &StorageParams {
        &self.params
    }

    pub fn generator(&self) -> &GeneratorMatrix {
        &self.generator
    }

    pub fn randomness(&self) -> RandomnessMode {
        self.randomness
    }

    /// Uniform symbols per point: `K L + M (N - M) K stripes + |S|`.
    pub fn symbols(&self) -> usize {
        self.db_symbols + self.mask_symbols + self.params.stripes * self.live_per_stripe
    }

    /// `q^symbols()`, saturating.
    pub fn points_per_theta(&self) -> u128 {
        let q = u128::from(self.params.q);
        (0..self.symbols()).try_fold(1u128, |acc, _| acc.checked_mul(q)).unwrap_or(u128::MAX)
    }

    /// Total points including the uniform choice of `theta`.
    pub fn size(&self) -> u128 {
        self.points_per_theta().saturating_mul(self.params.k as u128)
    }

    pub fn check_ceiling(&self, ceiling: u128) -> Result<()> {
        let points = self.size();
        if points > ceiling || points > u128::from(u64::MAX) {
            return Err(Error::UniverseTooLarge { points, ceiling });
        }
        Ok(())
    }

    fn digits(&self, mut index: u128) -> Vec<u32> {
        let q = u128::from(self.params.q);
        (0..self.symbols())
            .map(|_| {
                let d = (index % q) as u32;
                index /= q;
                d
            })
            .collect()
    }

    /// Evaluate the scheme at point `index`.
    pub fn trace(&self, index: u128) -> Result<Trace> {
        let per = self.points_per_theta();
        let theta = (index / per) as usize + 1;
        let digits = self.digits(index % per);
        self.trace_from_digits(theta, &digits)
    }

    /// Evaluate the scheme at a uniformly drawn point.
    pub fn sample(&self, rng: &mut impl Rng) -> Result<Trace> {
        let theta = rng.gen_range(1..=self.params.k);
        let digits: Vec<u32> = (0..self.symbols()).map(|_| rng.gen_range(0..self.params.q)).collect();
        self.trace_from_digits(theta, &digits)
    }

    fn trace_from_digits(&self, theta: usize, digits: &[u32]) -> Result<Trace> {
        let p = &self.params;
        let (db_digits, rest) = digits.split_at(self.db_symbols);
        let (mask_digits, s_digits) = rest.split_at(self.mask_symbols);

        let db = Database::from_symbols(p, db_digits)?;
        let masks = if self.masked {
            mask_digits
                .chunks(p.m * p.stripe_len())
                .map(|stripe| stripe.chunks(p.stripe_len()).map(<[u32]>::to_vec).collect())
                .collect()
        } else {
            vec![vec![vec![0; p.stripe_len()]; p.m]; p.stripes]
        };
        let mut randomness = CommonRandomness::zeros(p);
        for (stripe, live) in randomness.s.iter_mut().zip(s_digits.chunks(self.live_per_stripe.max(1))) {
            for (slot, &v) in stripe.iter_mut().flatten().zip(live) {
                *slot = v;
            }
        }

        let shares = encode(p, &db, &self.generator)?;
        let queries = gen_queries_with_masks(p, &self.plan, theta, masks)?;
        let per_node = (0..p.n)
            .map(|n| gen_answer(p, n + 1, &queries.per_node[n], &shares[n], &randomness, &self.generator))
            .collect::<Result<Vec<_>>>()?;
        Ok(Trace { theta, db, shares, queries, randomness, answers: AnswerSet { per_node } })
    }

    /// Fold `step` over the points in `range`, in parallel partitions whose
    /// states are combined with `merge`.
    pub fn fold_range<S, I, F, M>(&self, range: std::ops::Range<u128>, init: I, step: F, merge: M) -> Result<S>
    where
        S: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &Trace) -> Result<()> + Sync + Send,
        M: Fn(S, S) -> S + Sync + Send,
    {
        let len = range.end.saturating_sub(range.start);
        let parts = len.clamp(1, 1024);
        let chunk = len.div_ceil(parts);
        (0..parts)
            .into_par_iter()
            .map(|part| {
                let lo = range.start + part * chunk;
                let hi = (lo + chunk).min(range.end);
                let mut state = init();
                for index in lo..hi {
                    step(&mut state, &self.trace(index)?)?;
                }
                Ok(state)
            })
            .try_reduce(&init, |a, b| Ok(merge(a, b)))
    }

    pub fn fold<S, I, F, M>(&self, init: I, step: F, merge: M) -> Result<S>
    where
        S: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, &Trace) -> Result<()> + Sync + Send,
        M: Fn(S, S) -> S + Sync + Send,
    {
        self.fold_range(0..self.size(), init, step, merge)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::storage::{build_generator, generator_from_parity};
    use std::collections::HashSet;

    fn universe(q: u32, n: usize, m: usize, opts: AuditOptions) -> Universe {
        let p = StorageParams::new(q, n, m, 2, 1).unwrap();
        // Lower-triangular ones where the field is too small for Cauchy.
        let g = build_generator(&p).unwrap_or_else(|_| {
            let parity: Vec<Vec<u32>> = (0..m).map(|i| (0..n - m).map(|j| u32::from(j <= i)).collect()).collect();
            generator_from_parity(&p, &parity).unwrap()
        });
        Universe::new(&p, &g, &opts).unwrap()
    }

    #[test]
    fn sizes_match_closed_form() {
        // q^(KL) q^(M (N-M) K) q^(M^2), times K choices of theta.
        let u = universe(2, 2, 1, AuditOptions::default());
        assert_eq!(u.size(), 2 * (1 << (2 + 2 + 1)));
        let u = universe(2, 3, 2, AuditOptions::default());
        assert_eq!(u.points_per_theta(), 1 << 12);
        let u = universe(3, 3, 2, AuditOptions::default());
        assert_eq!(u.points_per_theta(), 3u128.pow(12));
        let u = universe(2, 4, 2, AuditOptions::default());
        assert_eq!(u.points_per_theta(), 1 << 20);
        let zeroed = AuditOptions { randomness: RandomnessMode::Zeroed, ..AuditOptions::default() };
        assert_eq!(universe(2, 4, 2, zeroed).points_per_theta(), 1 << 16);
        let partial = AuditOptions { randomness: RandomnessMode::Partial(1), ..AuditOptions::default() };
        assert_eq!(universe(2, 4, 2, partial).points_per_theta(), 1 << 17);
    }

    #[test]
    fn enumeration_is_exhaustive_and_duplicate_free() {
        let u = universe(2, 3, 2, AuditOptions::default());
        let seen: HashSet<_> = (0..u.size())
            .map(|i| {
                let t = u.trace(i).unwrap();
                (t.theta, t.db, t.queries.masks, t.randomness)
            })
            .collect();
        assert_eq!(seen.len() as u128, u.size());
    }

    #[test]
    fn ceiling_is_enforced() {
        let u = universe(3, 4, 2, AuditOptions::default());
        assert!(matches!(u.check_ceiling(1 << 24), Err(Error::UniverseTooLarge { .. })));
        let u = universe(2, 2, 1, AuditOptions::default());
        assert!(u.check_ceiling(64).is_ok());
        assert!(u.check_ceiling(63).is_err());
    }

    #[test]
    fn partitioned_fold_matches_serial_count() {
        let u = universe(2, 3, 2, AuditOptions::default());
        let parallel = u
            .fold(|| 0u64, |acc, t| {
                *acc += t.answers.per_node[2].symbols[0][1] as u64;
                Ok(())
            }, |a, b| a + b)
            .unwrap();
        let serial: u64 = (0..u.size()).map(|i| u.trace(i).unwrap().answers.per_node[2].symbols[0][1] as u64).sum();
        assert_eq!(parallel, serial);
    }
}
