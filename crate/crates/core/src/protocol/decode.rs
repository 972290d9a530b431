use super::answer::AnswerSet;
use super::plan::QueryPlan;
use super::query::{check_theta, QuerySet};
use crate::error::{Error, Result};
use crate::storage::{check_generator, GeneratorMatrix, StorageParams};
use crate::FpMatrix;

/// Recovers the requested file from the NM answers of each stripe.
///
/// Unknowns per stripe are the M^2 masked products `X[i][t]` (index
/// `i * M + t`) followed by the `(N - M) M` requested symbols `w[r][i]`
/// (index `M^2 + r * M + i`). Answer `t` of node `n` is equation
/// `n * M + t`. The system matrix depends only on the plan and the code, so
/// it is inverted once and reused for every stripe.
#[derive(Clone, Debug)]
pub struct Decoder {
    params: StorageParams,
    theta: usize,
    inverse: FpMatrix,
}

impl Decoder {
    pub fn new(params: &StorageParams, g: &GeneratorMatrix, theta: usize) -> Result<Self> {
        check_generator(params, g)?;
        check_theta(params, theta)?;
        let plan = QueryPlan::new(params)?;
        let system = system_matrix(params, g, &plan);
        let inverse = system.inverse()?;
        Ok(Decoder { params: *params, theta, inverse })
    }

    pub fn theta(&self) -> usize {
        self.theta
    }

    /// Decode one stripe from `answers[n][t]`; returns the `(N - M) x M` rows.
    pub fn decode_stripe(&self, answers: &[&[u32]]) -> Result<Vec<Vec<u32>>> {
        let (n, m) = (self.params.n, self.params.m);
        if answers.len() != n || answers.iter().any(|a| a.len() != m) {
            return Err(Error::DimensionMismatch(format!("need {m} answers from each of {n} nodes")));
        }
        let rhs: Vec<u32> = answers.iter().flat_map(|a| a.iter().copied()).collect();
        let solution = self.inverse.mul_vec(&rhs)?;
        Ok(solution[m * m..].chunks(m).map(<[u32]>::to_vec).collect())
    }

    /// Decode every stripe; returns the `(stripes * (N - M)) x M` file.
    pub fn decode(&self, answers: &AnswerSet) -> Result<Vec<Vec<u32>>> {
        let p = &self.params;
        if answers.per_node.len() != p.n
            || answers.per_node.iter().enumerate().any(|(i, a)| a.node_index != i + 1 || a.symbols.len() != p.stripes)
        {
            return Err(Error::DimensionMismatch(format!(
                "need answers from nodes 1..={} for {} stripes",
                p.n, p.stripes
            )));
        }
        let mut file = Vec::with_capacity(p.file_rows());
        for s in 0..p.stripes {
            let stripe: Vec<&[u32]> = answers.per_node.iter().map(|a| a.symbols[s].as_slice()).collect();
            file.extend(self.decode_stripe(&stripe)?);
        }
        Ok(file)
    }
}

/// The NM x NM coefficient matrix of the decoding system.
pub fn system_matrix(params: &StorageParams, g: &GeneratorMatrix, plan: &QueryPlan) -> FpMatrix {
    let (n, m) = (params.n, params.m);
    let size = n * m;
    let mut a = FpMatrix::zeros(params.field(), size, size);
    for node in 0..n {
        for t in 0..m {
            let eq = node * m + t;
            for i in 0..m {
                let c = g.coeff(i, node);
                if c == 0 {
                    continue;
                }
                a.set(eq, i * m + t, c);
                if let Some(r) = plan.placement(node, t) {
                    a.set(eq, m * m + r * m + i, c);
                }
            }
        }
    }
    a
}

/// Recover `W_theta` from a full set of answers.
pub fn decode(
    params: &StorageParams,
    g: &GeneratorMatrix,
    theta: usize,
    queries: &QuerySet,
    answers: &AnswerSet,
) -> Result<Vec<Vec<u32>>> {
    if queries.theta != theta {
        return Err(Error::InvalidParams(format!(
            "queries were built for file {}, not {theta}",
            queries.theta
        )));
    }
    Decoder::new(params, g, theta)?.decode(answers)
}
