//! Exact verification of user privacy, database privacy and zero-error
//! decoding on instances small enough to enumerate.
//!
//! Mutual information is zero exactly when the joint distribution factors.
//! Every quantity in the universe is uniform over a finite set, so
//! factorization is the integer identity `total * joint = left * right`,
//! checked on every cell of the product of the supports. No entropies, no
//! tolerances.

mod counter;
pub mod monte_carlo;
mod universe;

use serde::{Deserialize, Serialize};

pub use counter::{DistributionCounter, Independence, KeyCodec, Witness};
pub use universe::{Trace, Universe};

use crate::error::Result;
use crate::protocol::{Decoder, RandomnessMode};
use crate::rng::{seeded, SeedDomain};
use crate::storage::{GeneratorMatrix, StorageParams};
use monte_carlo::{bucket, ContingencyTable, X_BUCKETS, Y_BUCKETS};

/// Default limit on enumerated points, `theta` choices included.
pub const DEFAULT_CEILING: u128 = 1 << 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditOptions {
    pub randomness: RandomnessMode,
    /// `false` sends the bare unit placements with no mask: a deliberately
    /// broken scheme for control experiments.
    pub masked_queries: bool,
    pub ceiling: u128,
    /// Sample instead of enumerating.
    pub monte_carlo: Option<MonteCarlo>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { randomness: RandomnessMode::Full, masked_queries: true, ceiling: DEFAULT_CEILING, monte_carlo: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// theta independent of (Q_n, A_n, D_n, S).
    UserPrivacy,
    /// Count table of (Q_n, A_n, D_n, S) identical under every theta.
    UserPrivacyConditional,
    /// Unrequested files independent of (theta, all queries, all answers).
    DatabasePrivacy,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CheckMode {
    Exact,
    /// Statistical verdict. `statistic_milli` is the chi-square statistic
    /// times 1000, rounded.
    MonteCarlo { samples: u64, seed: u64, statistic_milli: u64, degrees_of_freedom: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: CheckKind,
    /// 1-based node for the user-privacy checks.
    pub node: Option<usize>,
    pub independent: bool,
    pub witness: Option<Witness>,
    pub universe_size: u128,
    pub mode: CheckMode,
}

impl CheckResult {
    pub fn is_exact(&self) -> bool {
        self.mode == CheckMode::Exact
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub checks: Vec<CheckResult>,
}

impl AuditReport {
    pub fn all_independent(&self) -> bool {
        self.checks.iter().all(|c| c.independent)
    }

    pub fn first_failure(&self) -> Option<&CheckResult> {
        self.checks.iter().find(|c| !c.independent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessResult {
    pub passed: bool,
    pub universe_size: u128,
    pub exact: bool,
    /// `(theta, point)` of the first failing point, if any.
    pub failure: Option<(usize, u128)>,
}

/// Observations made by node `n` (0-based): query, answers, share, `S`.
fn node_view(trace: &Trace, n: usize) -> Vec<u32> {
    let mut y: Vec<u32> = trace.queries.per_node[n].vectors.iter().flatten().flatten().copied().collect();
    y.extend(trace.answers.per_node[n].symbols.iter().flatten());
    y.extend(&trace.shares[n].d);
    y.extend(trace.randomness.s.iter().flatten().flatten());
    y
}

/// Files other than `theta`, in index order.
fn unrequested_files(trace: &Trace) -> Vec<u32> {
    trace
        .db
        .files
        .iter()
        .enumerate()
        .filter(|(k, _)| k + 1 != trace.theta)
        .flat_map(|(_, f)| f.iter().flatten().copied())
        .collect()
}

/// What the user holds: theta (as theta - 1), every query, every answer.
///
/// The queries for the realized theta together with theta pin down the
/// masks, hence the queries the user would have sent for any other file.
fn user_view(trace: &Trace) -> Vec<u32> {
    let mut y = vec![(trace.theta - 1) as u32];
    for nq in &trace.queries.per_node {
        y.extend(nq.vectors.iter().flatten().flatten());
    }
    for a in &trace.answers.per_node {
        y.extend(a.symbols.iter().flatten());
    }
    y
}

fn user_view_codec(params: &StorageParams) -> Result<KeyCodec> {
    let p = params;
    let len = p.n * p.stripes * p.m * p.stripe_len() + p.n * p.stripes * p.m;
    let mut radices = vec![p.k as u32];
    radices.extend(std::iter::repeat_n(p.q, len));
    KeyCodec::new(radices)
}

fn node_view_codec(params: &StorageParams) -> Result<KeyCodec> {
    let p = params;
    let len = p.stripes * p.m * p.stripe_len() + p.stripes * p.m + p.node_len() + p.stripes * p.m * p.m;
    KeyCodec::uniform(p.q, len)
}

fn product_witness(ind: Independence, total: u64, x: impl Fn(u128) -> Vec<u32>, y: &KeyCodec) -> Option<Witness> {
    match ind {
        Independence::Independent => None,
        Independence::Violated { x: xk, y: yk, joint, left, right } => {
            Some(Witness::ProductRule { x: x(xk), y: y.decode(yk), joint, left, right, total })
        }
    }
}

fn monte_carlo_result(
    check: CheckKind,
    node: Option<usize>,
    table: &ContingencyTable,
    mc: MonteCarlo,
    universe_size: u128,
) -> CheckResult {
    let out = table.test();
    CheckResult {
        check,
        node,
        independent: !out.flagged(),
        witness: None,
        universe_size,
        mode: CheckMode::MonteCarlo {
            samples: mc.samples,
            seed: mc.seed,
            statistic_milli: (out.statistic * 1000.0).round() as u64,
            degrees_of_freedom: out.degrees_of_freedom,
        },
    }
}

/// Draw `mc.samples` traces sequentially from the audit seed stream.
fn sample_fold<S>(universe: &Universe, mc: MonteCarlo, mut state: S, mut step: impl FnMut(&mut S, &Trace)) -> Result<S> {
    let mut rng = seeded(SeedDomain::Audit, mc.seed);
    for _ in 0..mc.samples {
        step(&mut state, &universe.sample(&mut rng)?);
    }
    Ok(state)
}

/// For every node, test that theta is independent of everything the node
/// sees, and that the node's view has the same distribution under each theta.
pub fn audit_user_privacy(params: &StorageParams, g: &GeneratorMatrix, opts: &AuditOptions) -> Result<AuditReport> {
    let universe = Universe::new(params, g, opts)?;
    let n = params.n;
    let size = universe.size();

    if let Some(mc) = opts.monte_carlo {
        let tables = sample_fold(&universe, mc, vec![ContingencyTable::default(); n], |tables, t| {
            let x = (t.theta - 1) % X_BUCKETS;
            for (node, table) in tables.iter_mut().enumerate() {
                table.record(x, bucket(&node_view(t, node), Y_BUCKETS));
            }
        })?;
        let checks = tables
            .iter()
            .enumerate()
            .map(|(node, table)| monte_carlo_result(CheckKind::UserPrivacy, Some(node + 1), table, mc, size))
            .collect();
        return Ok(AuditReport { checks });
    }

    universe.check_ceiling(opts.ceiling)?;
    let codec = node_view_codec(params)?;
    let counters = universe.fold(
        || vec![DistributionCounter::new(); n],
        |counters, t| {
            for (node, c) in counters.iter_mut().enumerate() {
                c.record(t.theta as u128, codec.encode(&node_view(t, node)));
            }
            Ok(())
        },
        |a, b| a.into_iter().zip(b).map(|(x, y)| x.merge(y)).collect(),
    )?;

    let mut checks = Vec::with_capacity(2 * n);
    for (node, c) in counters.iter().enumerate() {
        let witness = product_witness(c.independence(), c.total(), |x| vec![x as u32], &codec);
        checks.push(CheckResult {
            check: CheckKind::UserPrivacy,
            node: Some(node + 1),
            independent: witness.is_none(),
            witness,
            universe_size: size,
            mode: CheckMode::Exact,
        });
        let witness = c.conditional_mismatch().map(|(y, a, ca, b, cb)| Witness::ConditionalMismatch {
            y: codec.decode(y),
            theta_a: a as u32,
            count_a: ca,
            theta_b: b as u32,
            count_b: cb,
        });
        checks.push(CheckResult {
            check: CheckKind::UserPrivacyConditional,
            node: Some(node + 1),
            independent: witness.is_none(),
            witness,
            universe_size: size,
            mode: CheckMode::Exact,
        });
    }
    Ok(AuditReport { checks })
}

/// Test that the files the user did not ask for are independent of
/// everything the user holds after the round.
pub fn audit_db_privacy(params: &StorageParams, g: &GeneratorMatrix, opts: &AuditOptions) -> Result<AuditReport> {
    let universe = Universe::new(params, g, opts)?;
    let size = universe.size();

    if let Some(mc) = opts.monte_carlo {
        let table = sample_fold(&universe, mc, ContingencyTable::default(), |table, t| {
            table.record(bucket(&unrequested_files(t), X_BUCKETS), bucket(&user_view(t), Y_BUCKETS));
        })?;
        return Ok(AuditReport { checks: vec![monte_carlo_result(CheckKind::DatabasePrivacy, None, &table, mc, size)] });
    }

    universe.check_ceiling(opts.ceiling)?;
    let x_codec = KeyCodec::uniform(params.q, (params.k - 1) * params.file_len())?;
    let y_codec = user_view_codec(params)?;
    let counter = universe.fold(
        DistributionCounter::new,
        |c, t| {
            c.record(x_codec.encode(&unrequested_files(t)), y_codec.encode(&user_view(t)));
            Ok(())
        },
        DistributionCounter::merge,
    )?;
    let witness = product_witness(counter.independence(), counter.total(), |x| x_codec.decode(x), &y_codec);
    Ok(AuditReport {
        checks: vec![CheckResult {
            check: CheckKind::DatabasePrivacy,
            node: None,
            independent: witness.is_none(),
            witness,
            universe_size: size,
            mode: CheckMode::Exact,
        }],
    })
}

/// Database privacy with `S` replaced according to `mode`.
pub fn leak_experiment(
    params: &StorageParams,
    g: &GeneratorMatrix,
    mode: RandomnessMode,
    opts: &AuditOptions,
) -> Result<AuditReport> {
    audit_db_privacy(params, g, &AuditOptions { randomness: mode, ..*opts })
}

/// Decode at every point of the universe and compare with the stored file.
pub fn check_correctness(params: &StorageParams, g: &GeneratorMatrix, opts: &AuditOptions) -> Result<CorrectnessResult> {
    let universe = Universe::new(params, g, opts)?;
    let size = universe.size();
    let decoders = (1..=params.k).map(|theta| Decoder::new(params, g, theta)).collect::<Result<Vec<_>>>()?;
    let decodes = |t: &Trace| -> Result<bool> {
        Ok(decoders[t.theta - 1].decode(&t.answers)? == t.db.files[t.theta - 1])
    };

    if let Some(mc) = opts.monte_carlo {
        let mut rng = seeded(SeedDomain::Audit, mc.seed);
        for i in 0..mc.samples {
            let t = universe.sample(&mut rng)?;
            if !decodes(&t)? {
                return Ok(CorrectnessResult { passed: false, universe_size: size, exact: false, failure: Some((t.theta, u128::from(i))) });
            }
        }
        return Ok(CorrectnessResult { passed: true, universe_size: size, exact: false, failure: None });
    }

    universe.check_ceiling(opts.ceiling)?;
    let per = universe.points_per_theta();
    let first_bad = universe.fold(
        || None::<u128>,
        |bad, t| {
            // Only theta is kept here; the point itself is located below.
            if bad.is_none() && !decodes(t)? {
                *bad = Some(t.theta as u128);
            }
            Ok(())
        },
        |a, b| a.or(b),
    )?;
    let failure = match first_bad {
        None => None,
        Some(theta) => {
            let start = (theta - 1) * per;
            (start..start + per)
                .find(|&i| universe.trace(i).and_then(|t| decodes(&t)).map_or(true, |ok| !ok))
                .map(|i| (theta as usize, i - start))
        }
    };
    Ok(CorrectnessResult { passed: failure.is_none(), universe_size: size, exact: true, failure })
}

/// `true` iff decoding returns the requested file at every point and theta.
pub fn audit_correctness(params: &StorageParams, g: &GeneratorMatrix, opts: &AuditOptions) -> Result<bool> {
    Ok(check_correctness(params, g, opts)?.passed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::storage::{build_generator, generator_from_parity};

    fn setup(q: u32, n: usize, m: usize) -> (StorageParams, GeneratorMatrix) {
        let p = StorageParams::new(q, n, m, 2, 1).unwrap();
        // Lower-triangular ones where the field is too small for Cauchy.
        let g = build_generator(&p).unwrap_or_else(|_| {
            let parity: Vec<Vec<u32>> = (0..m).map(|i| (0..n - m).map(|j| u32::from(j <= i)).collect()).collect();
            generator_from_parity(&p, &parity).unwrap()
        });
        (p, g)
    }

    #[test]
    fn replicated_pair_is_private_both_ways() {
        let (p, g) = setup(2, 2, 1);
        let opts = AuditOptions::default();
        let user = audit_user_privacy(&p, &g, &opts).unwrap();
        assert_eq!(user.checks.len(), 4);
        assert!(user.all_independent());
        assert!(user.checks.iter().all(|c| c.universe_size == 64 && c.witness.is_none()));
        assert!(audit_db_privacy(&p, &g, &opts).unwrap().all_independent());
        assert!(audit_correctness(&p, &g, &opts).unwrap());
    }

    #[test]
    fn three_two_over_f2_user_privacy() {
        let (p, g) = setup(2, 3, 2);
        let report = audit_user_privacy(&p, &g, &AuditOptions::default()).unwrap();
        assert_eq!(report.checks.len(), 6);
        assert!(report.all_independent());
    }

    #[test]
    fn unmasked_queries_reveal_theta() {
        let (p, g) = setup(2, 2, 1);
        let opts = AuditOptions { masked_queries: false, ..AuditOptions::default() };
        let report = audit_user_privacy(&p, &g, &opts).unwrap();
        let node1 = report.checks.iter().find(|c| c.node == Some(1) && c.check == CheckKind::UserPrivacy).unwrap();
        assert!(!node1.independent);
        assert!(matches!(node1.witness, Some(Witness::ProductRule { .. })));
        let cond = report.checks.iter().find(|c| c.node == Some(1) && c.check == CheckKind::UserPrivacyConditional).unwrap();
        assert!(matches!(cond.witness, Some(Witness::ConditionalMismatch { .. })));
    }

    #[test]
    fn zeroed_randomness_leaks_but_still_decodes() {
        let (p, g) = setup(2, 2, 1);
        let opts = AuditOptions::default();
        let full = leak_experiment(&p, &g, RandomnessMode::Full, &opts).unwrap();
        assert!(full.all_independent());
        let zeroed = leak_experiment(&p, &g, RandomnessMode::Zeroed, &opts).unwrap();
        let check = &zeroed.checks[0];
        assert!(!check.independent);
        match &check.witness {
            Some(Witness::ProductRule { x, joint, left, right, total, .. }) => {
                assert_eq!(x.len(), 1);
                assert_ne!(u128::from(*total) * u128::from(*joint), u128::from(*left) * u128::from(*right));
            }
            other => panic!("unexpected witness {other:?}"),
        }
        let zeroed_opts = AuditOptions { randomness: RandomnessMode::Zeroed, ..opts };
        assert!(audit_correctness(&p, &g, &zeroed_opts).unwrap());
    }

    #[test]
    fn oversized_instances_are_refused() {
        let (p, g) = setup(3, 4, 2);
        let opts = AuditOptions::default();
        assert!(matches!(audit_user_privacy(&p, &g, &opts), Err(Error::UniverseTooLarge { .. })));
        assert!(matches!(audit_db_privacy(&p, &g, &opts), Err(Error::UniverseTooLarge { .. })));
        assert!(matches!(audit_correctness(&p, &g, &opts), Err(Error::UniverseTooLarge { .. })));
    }

    #[test]
    fn monte_carlo_mode_is_labelled_and_separates_modes() {
        let (p, g) = setup(2, 2, 1);
        let mc = Some(MonteCarlo { samples: 20_000, seed: 5 });
        let full = audit_db_privacy(&p, &g, &AuditOptions { monte_carlo: mc, ..AuditOptions::default() }).unwrap();
        assert!(!full.checks[0].is_exact());
        assert!(full.all_independent());
        let zeroed = AuditOptions { monte_carlo: mc, randomness: RandomnessMode::Zeroed, ..AuditOptions::default() };
        assert!(!audit_db_privacy(&p, &g, &zeroed).unwrap().all_independent());
        let user = audit_user_privacy(&p, &g, &AuditOptions { monte_carlo: mc, ..AuditOptions::default() }).unwrap();
        assert!(user.all_independent());
        let c = check_correctness(&p, &g, &AuditOptions { monte_carlo: mc, ..AuditOptions::default() }).unwrap();
        assert!(c.passed && !c.exact);
    }

    #[test]
    fn monte_carlo_runs_past_the_ceiling() {
        let (p, g) = setup(5, 4, 2);
        let opts = AuditOptions { monte_carlo: Some(MonteCarlo { samples: 3_000, seed: 1 }), ..AuditOptions::default() };
        let report = audit_user_privacy(&p, &g, &opts).unwrap();
        assert_eq!(report.checks.len(), 4);
        assert!(report.all_independent());
    }
}
