use rand::Rng;
use serde::{Deserialize, Serialize};

use super::plan::QueryPlan;
use crate::error::{Error, Result};
use crate::rng::{seeded, SeedDomain};
use crate::storage::StorageParams;

/// The M query vectors sent to one node, per stripe: `vectors[stripe][t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeQuery {
    /// 1-based.
    pub node_index: usize,
    pub vectors: Vec<Vec<Vec<u32>>>,
}

/// Everything the user sends, plus the masks it was built from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuerySet {
    /// 1-based requested file.
    pub theta: usize,
    /// Masks `U_1..U_M` per stripe: `masks[stripe][t]`.
    pub masks: Vec<Vec<Vec<u32>>>,
    pub per_node: Vec<NodeQuery>,
}

/// Uniform masks for every stripe.
pub fn sample_masks(params: &StorageParams, rng: &mut impl Rng) -> Vec<Vec<Vec<u32>>> {
    (0..params.stripes)
        .map(|_| {
            (0..params.m)
                .map(|_| (0..params.stripe_len()).map(|_| rng.gen_range(0..params.q)).collect())
                .collect()
        })
        .collect()
}

/// Queries for file `theta` with masks drawn from the user's seeded stream.
pub fn gen_queries(params: &StorageParams, theta: usize, user_seed: u64) -> Result<QuerySet> {
    gen_queries_with_rng(params, theta, &mut seeded(SeedDomain::User, user_seed))
}

pub fn gen_queries_with_rng(params: &StorageParams, theta: usize, rng: &mut impl Rng) -> Result<QuerySet> {
    let plan = QueryPlan::new(params)?;
    check_theta(params, theta)?;
    let masks = sample_masks(params, rng);
    gen_queries_with_masks(params, &plan, theta, masks)
}

/// Queries built from caller-chosen masks (all-zero masks expose the bare
/// unit placements).
pub fn gen_queries_with_masks(
    params: &StorageParams,
    plan: &QueryPlan,
    theta: usize,
    masks: Vec<Vec<Vec<u32>>>,
) -> Result<QuerySet> {
    check_theta(params, theta)?;
    let shape_ok = masks.len() == params.stripes
        && masks
            .iter()
            .all(|s| s.len() == params.m && s.iter().all(|u| u.len() == params.stripe_len()));
    if !shape_ok {
        return Err(Error::DimensionMismatch(format!(
            "masks must be {} stripes of {} vectors of length {}",
            params.stripes,
            params.m,
            params.stripe_len()
        )));
    }
    let one = 1 % params.q;
    let per_node = (0..params.n)
        .map(|node| {
            let vectors = masks
                .iter()
                .map(|stripe| {
                    stripe
                        .iter()
                        .enumerate()
                        .map(|(t, u)| {
                            let mut v = u.clone();
                            if let Some(row) = plan.placement(node, t) {
                                let pos = params.slot(theta - 1, row);
                                v[pos] = (v[pos] + one) % params.q;
                            }
                            v
                        })
                        .collect()
                })
                .collect();
            NodeQuery { node_index: node + 1, vectors }
        })
        .collect();
    Ok(QuerySet { theta, masks, per_node })
}

pub(crate) fn check_theta(params: &StorageParams, theta: usize) -> Result<()> {
    if theta == 0 || theta > params.k {
        return Err(Error::InvalidParams(format!("theta = {theta} outside 1..={}", params.k)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_masks(p: &StorageParams) -> Vec<Vec<Vec<u32>>> {
        vec![vec![vec![0; p.stripe_len()]; p.m]; p.stripes]
    }

    #[test]
    fn zero_masks_expose_units_three_two() {
        let p = StorageParams::new(3, 3, 2, 2, 1).unwrap();
        let plan = QueryPlan::new(&p).unwrap();
        let qs = gen_queries_with_masks(&p, &plan, 1, zero_masks(&p)).unwrap();
        // Per-stripe vectors have length (N - M) K = 2; e_1 is file 1 row 1.
        assert_eq!(qs.per_node[0].vectors[0], vec![vec![1, 0], vec![0, 0]]);
        assert_eq!(qs.per_node[1].vectors[0], vec![vec![0, 0], vec![1, 0]]);
        assert_eq!(qs.per_node[2].vectors[0], vec![vec![0, 0], vec![0, 0]]);
    }

    #[test]
    fn theta_offsets_the_unit() {
        let p = StorageParams::new(2, 2, 1, 2, 1).unwrap();
        let plan = QueryPlan::new(&p).unwrap();
        let qs = gen_queries_with_masks(&p, &plan, 2, zero_masks(&p)).unwrap();
        assert_eq!(qs.per_node[0].vectors[0], vec![vec![0, 1]]);
        assert_eq!(qs.per_node[1].vectors[0], vec![vec![0, 0]]);
    }

    #[test]
    fn queries_are_translations_of_the_masks() {
        let p = StorageParams::new(5, 5, 2, 3, 2).unwrap();
        let plan = QueryPlan::new(&p).unwrap();
        for theta in 1..=p.k {
            let qs = gen_queries(&p, theta, 99).unwrap();
            for nq in &qs.per_node {
                for (s, stripe) in nq.vectors.iter().enumerate() {
                    for (t, v) in stripe.iter().enumerate() {
                        let diff: Vec<u32> =
                            v.iter().zip(&qs.masks[s][t]).map(|(a, b)| (a + p.q - b) % p.q).collect();
                        let mut expected = vec![0; p.stripe_len()];
                        if let Some(r) = plan.placement(nq.node_index - 1, t) {
                            expected[p.slot(theta - 1, r)] = 1;
                        }
                        assert_eq!(diff, expected);
                    }
                }
            }
        }
    }

    #[test]
    fn same_seed_same_queries() {
        let p = StorageParams::new(5, 4, 2, 3, 2).unwrap();
        assert_eq!(gen_queries(&p, 2, 7).unwrap(), gen_queries(&p, 2, 7).unwrap());
        assert_ne!(gen_queries(&p, 2, 7).unwrap().masks, gen_queries(&p, 2, 8).unwrap().masks);
    }

    #[test]
    fn theta_is_range_checked() {
        let p = StorageParams::new(5, 4, 2, 3, 1).unwrap();
        assert!(matches!(gen_queries(&p, 0, 1), Err(Error::InvalidParams(_))));
        assert!(matches!(gen_queries(&p, 4, 1), Err(Error::InvalidParams(_))));
        let one = StorageParams::new(5, 4, 2, 1, 1).unwrap();
        assert_eq!(gen_queries(&one, 1, 1), Err(Error::TooFewFiles(1)));
    }
}
