use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::query::NodeQuery;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::rng::{seeded, SeedDomain};
use crate::storage::{GeneratorMatrix, NodeData, StorageParams};
use crate::FpMatrix;

/// How much of the shared matrix `S` is actually random.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RandomnessMode {
    /// All M^2 symbols per stripe uniform.
    #[default]
    Full,
    /// `S = 0`.
    Zeroed,
    /// The first `j` symbols per stripe (row-major) uniform, the rest zero.
    Partial(usize),
}

impl RandomnessMode {
    /// Random symbols per stripe.
    pub fn random_symbols(&self, m: usize) -> usize {
        match *self {
            RandomnessMode::Full => m * m,
            RandomnessMode::Zeroed => 0,
            RandomnessMode::Partial(j) => j.min(m * m),
        }
    }

    pub fn check(&self, m: usize) -> Result<()> {
        match *self {
            RandomnessMode::Partial(j) if j > m * m => Err(Error::InvalidParams(format!(
                "partial randomness of {j} symbols exceeds M^2 = {}",
                m * m
            ))),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for RandomnessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RandomnessMode::Full => f.write_str("full"),
            RandomnessMode::Zeroed => f.write_str("zeroed"),
            RandomnessMode::Partial(j) => write!(f, "partial={j}"),
        }
    }
}

impl FromStr for RandomnessMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(RandomnessMode::Full),
            "zeroed" => Ok(RandomnessMode::Zeroed),
            _ => s
                .strip_prefix("partial=")
                .and_then(|j| j.parse().ok())
                .map(RandomnessMode::Partial)
                .ok_or_else(|| Error::InvalidParams(format!("unknown randomness mode '{s}'"))),
        }
    }
}

impl Serialize for RandomnessMode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RandomnessMode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The M x M matrix `S` shared by all nodes, one per stripe: `s[stripe][i][t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CommonRandomness {
    pub s: Vec<Vec<Vec<u32>>>,
}

impl CommonRandomness {
    pub fn zeros(params: &StorageParams) -> Self {
        CommonRandomness { s: vec![vec![vec![0; params.m]; params.m]; params.stripes] }
    }

    /// Fresh symbols for every stripe from the node-side seeded stream.
    pub fn from_seed(params: &StorageParams, mode: RandomnessMode, node_seed: u64) -> Result<Self> {
        Self::sample(params, mode, &mut seeded(SeedDomain::Node, node_seed))
    }

    pub fn sample(params: &StorageParams, mode: RandomnessMode, rng: &mut impl Rng) -> Result<Self> {
        mode.check(params.m)?;
        let live = mode.random_symbols(params.m);
        let mut out = Self::zeros(params);
        for stripe in &mut out.s {
            for (idx, v) in stripe.iter_mut().flatten().enumerate() {
                if idx < live {
                    *v = rng.gen_range(0..params.q);
                }
            }
        }
        Ok(out)
    }

    /// Symbols in row-major order per stripe, stripes concatenated.
    pub fn from_symbols(params: &StorageParams, symbols: &[u32]) -> Result<Self> {
        let m = params.m;
        if symbols.len() != params.stripes * m * m {
            return Err(Error::DimensionMismatch(format!(
                "{} symbols for {} stripes of {m}x{m}",
                symbols.len(),
                params.stripes
            )));
        }
        let s = symbols
            .chunks(m * m)
            .map(|stripe| stripe.chunks(m).map(<[u32]>::to_vec).collect())
            .collect();
        Ok(CommonRandomness { s })
    }

    fn check(&self, params: &StorageParams) -> Result<()> {
        let ok = self.s.len() == params.stripes
            && self.s.iter().all(|st| st.len() == params.m && st.iter().all(|r| r.len() == params.m));
        if ok {
            Ok(())
        } else {
            Err(Error::DimensionMismatch("common randomness shape".into()))
        }
    }
}

/// `G^T S` for one stripe's `M x M` matrix `s`: row `n` holds what node `n`
/// adds to each of its M inner products.
pub fn encode_randomness(s: &FpMatrix, g: &GeneratorMatrix) -> Result<FpMatrix> {
    if s.rows() != g.m() || s.cols() != g.m() {
        return Err(Error::DimensionMismatch(format!(
            "S is {}x{}, expected {m}x{m}",
            s.rows(),
            s.cols(),
            m = g.m()
        )));
    }
    g.matrix().transpose().mul(s)
}

/// Answers from node `n` to its M query vectors, per stripe: `symbols[stripe][t]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NodeAnswer {
    /// 1-based.
    pub node_index: usize,
    pub symbols: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerSet {
    pub per_node: Vec<NodeAnswer>,
}

impl AnswerSet {
    pub fn download_count(&self) -> usize {
        self.per_node.iter().flat_map(|a| &a.symbols).map(Vec::len).sum()
    }
}

/// Node `node_index` answers its query using only its own share and `S`.
///
/// Answer `t` of each stripe is `<query_t, D_n> + sum_i g[i][n] S[i][t]`, so
/// that the parity answers are the code applied to the masked products.
pub fn gen_answer(
    params: &StorageParams,
    node_index: usize,
    query: &NodeQuery,
    data: &NodeData,
    randomness: &CommonRandomness,
    g: &GeneratorMatrix,
) -> Result<NodeAnswer> {
    if node_index == 0 || node_index > params.n {
        return Err(Error::InvalidParams(format!("node index {node_index} outside 1..={}", params.n)));
    }
    if data.d.len() != params.node_len() || query.vectors.len() != params.stripes {
        return Err(Error::DimensionMismatch("query or share does not match parameters".into()));
    }
    if query
        .vectors
        .iter()
        .any(|st| st.len() != params.m || st.iter().any(|v| v.len() != params.stripe_len()))
    {
        return Err(Error::DimensionMismatch(format!(
            "each stripe needs {} query vectors of length {}",
            params.m,
            params.stripe_len()
        )));
    }
    randomness.check(params)?;
    let f = params.field();
    let node = node_index - 1;
    let column = g.column(node);
    let symbols = query
        .vectors
        .iter()
        .zip(&randomness.s)
        .enumerate()
        .map(|(stripe, (vectors, s))| {
            let share = data.stripe(params, stripe);
            vectors
                .iter()
                .enumerate()
                .map(|(t, v)| {
                    let masked = (0..params.m).fold(0, |acc, i| f.add(&acc, &f.mul(&column[i], &s[i][t])));
                    f.add(&f.dot(v, share), &masked)
                })
                .collect()
        })
        .collect();
    Ok(NodeAnswer { node_index, symbols })
}
