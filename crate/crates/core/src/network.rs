//! In-process simulation of N non-communicating storage nodes and one user.
//!
//! Each node's state lives in a private slot; a [`NodeHandler`] is shown
//! only that node's [`NodeView`] (its index, its query, its share, the
//! shared randomness and the public code) and cannot reach any other slot.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::protocol::{gen_answer, AnswerSet, CommonRandomness, Decoder, NodeAnswer, NodeQuery, QuerySet};
use crate::storage::{GeneratorMatrix, NodeData, StorageParams};

/// Everything a single node may look at while answering.
#[derive(Clone, Copy, Debug)]
pub struct NodeView<'a> {
    pub params: &'a StorageParams,
    pub node_index: usize,
    pub query: &'a NodeQuery,
    pub data: &'a NodeData,
    pub randomness: &'a CommonRandomness,
    pub generator: &'a GeneratorMatrix,
}

pub trait NodeHandler: Send + Sync {
    fn answer(&self, view: NodeView<'_>) -> Result<NodeAnswer>;
}

/// Answers exactly as the scheme prescribes.
#[derive(Clone, Copy, Debug, Default)]
pub struct HonestNode;

impl NodeHandler for HonestNode {
    fn answer(&self, view: NodeView<'_>) -> Result<NodeAnswer> {
        gen_answer(view.params, view.node_index, view.query, view.data, view.randomness, view.generator)
    }
}

struct NodeSlot {
    index: usize,
    data: NodeData,
    randomness: CommonRandomness,
    handler: Box<dyn NodeHandler>,
}

pub struct SimNetwork {
    params: StorageParams,
    generator: GeneratorMatrix,
    nodes: Vec<NodeSlot>,
}

impl SimNetwork {
    /// One honest node per share; every node gets its own copy of `S`.
    pub fn new(
        params: &StorageParams,
        generator: &GeneratorMatrix,
        shares: Vec<NodeData>,
        randomness: &CommonRandomness,
    ) -> Result<Self> {
        if shares.len() != params.n || shares.iter().enumerate().any(|(i, s)| s.node_index != i + 1) {
            return Err(Error::DimensionMismatch(format!("need shares for nodes 1..={}", params.n)));
        }
        let nodes = shares
            .into_iter()
            .map(|data| NodeSlot {
                index: data.node_index,
                data,
                randomness: randomness.clone(),
                handler: Box::new(HonestNode),
            })
            .collect();
        Ok(SimNetwork { params: *params, generator: generator.clone(), nodes })
    }

    /// Replace the behavior of node `node_index` (1-based).
    pub fn set_handler(&mut self, node_index: usize, handler: Box<dyn NodeHandler>) -> Result<()> {
        let slot = self
            .nodes
            .get_mut(node_index.wrapping_sub(1))
            .ok_or_else(|| Error::InvalidParams(format!("no node {node_index}")))?;
        slot.handler = handler;
        Ok(())
    }

    /// Deliver `queries.per_node[n]` to node `n` only and collect the answers.
    /// Nodes run concurrently and never see each other.
    pub fn serve(&self, queries: &QuerySet) -> Result<AnswerSet> {
        if queries.per_node.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch("one query per node required".into()));
        }
        let per_node = self
            .nodes
            .par_iter()
            .zip(&queries.per_node)
            .map(|(slot, query)| {
                slot.handler.answer(NodeView {
                    params: &self.params,
                    node_index: slot.index,
                    query,
                    data: &slot.data,
                    randomness: &slot.randomness,
                    generator: &self.generator,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AnswerSet { per_node })
    }
}

/// The retrieving party: knows `theta`, its masks and the public code.
pub struct User {
    decoder: Decoder,
    queries: QuerySet,
}

impl User {
    pub fn new(params: &StorageParams, generator: &GeneratorMatrix, queries: QuerySet) -> Result<Self> {
        let decoder = Decoder::new(params, generator, queries.theta)?;
        Ok(User { decoder, queries })
    }

    pub fn queries(&self) -> &QuerySet {
        &self.queries
    }

    /// Waits for all N answers (the whole set) before decoding.
    pub fn receive(&self, answers: &AnswerSet) -> Result<Vec<Vec<u32>>> {
        self.decoder.decode(answers)
    }
}
