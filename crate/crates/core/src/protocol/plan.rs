use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::storage::StorageParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchemeCase {
    /// N - M <= M: every unit vector rides on a systematic node.
    Case1,
    /// N - M > M: `alpha` groups of M parity nodes carry units as well.
    Case2,
}

/// Where the user hides the unit vectors that select the requested file.
///
/// For each node and query-vector index the plan records which row of the
/// requested file (if any) is added on top of the random mask. Systematic
/// node `i` carries row `s` on vector `((i + s - 2) mod M) + 1`; in the
/// second case, parity group `g` carries row `beta + (g - 1) M + t` on
/// vector `t` at each of its M nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QueryPlan {
    case: SchemeCase,
    alpha: usize,
    beta: usize,
    n: usize,
    m: usize,
    // [node][t] -> row, all 0-based
    placements: Vec<Vec<Option<usize>>>,
}

impl QueryPlan {
    pub fn new(params: &StorageParams) -> Result<Self> {
        let (n, m) = (params.n, params.m);
        if m == 0 || m >= n {
            return Err(Error::InvalidParams(format!("need 1 <= M < N, got N = {n}, M = {m}")));
        }
        if params.k < 2 {
            return Err(Error::TooFewFiles(params.k));
        }
        let r = n - m;
        let (case, alpha, beta) = if r <= m { (SchemeCase::Case1, 0, r) } else { (SchemeCase::Case2, r / m, r % m) };
        // Rows retrieved directly at systematic nodes.
        let systematic_rows = if case == SchemeCase::Case1 { r } else { beta };

        let mut placements = vec![vec![None; m]; n];
        for (i, node) in placements.iter_mut().enumerate().take(m) {
            for s in 0..systematic_rows {
                node[(i + s) % m] = Some(s);
            }
        }
        for g in 0..alpha {
            for node in &mut placements[m + g * m..m + (g + 1) * m] {
                for (t, slot) in node.iter_mut().enumerate() {
                    *slot = Some(beta + g * m + t);
                }
            }
        }
        Ok(QueryPlan { case, alpha, beta, n, m, placements })
    }

    pub fn case(&self) -> SchemeCase {
        self.case
    }

    /// Number of full parity groups carrying units (0 in the first case).
    pub fn alpha(&self) -> usize {
        self.alpha
    }

    /// Rows retrieved at systematic nodes: `(N - M) mod M` in the second
    /// case, `N - M` in the first.
    pub fn beta(&self) -> usize {
        self.beta
    }

    /// Row (1-based) whose unit vector rides on vector `t` at node `node`,
    /// both 1-based.
    pub fn unit_row(&self, node: usize, t: usize) -> Option<usize> {
        self.placements[node - 1][t - 1].map(|r| r + 1)
    }

    /// 0-based view used by the query generator and decoder.
    #[inline]
    pub(crate) fn placement(&self, node: usize, t: usize) -> Option<usize> {
        self.placements[node][t]
    }

    pub fn nodes(&self) -> usize {
        self.n
    }

    pub fn vectors(&self) -> usize {
        self.m
    }

    pub fn unit_count(&self) -> usize {
        self.placements.iter().flatten().filter(|p| p.is_some()).count()
    }
}

pub fn make_query_plan(params: &StorageParams) -> Result<QueryPlan> {
    QueryPlan::new(params)
}
