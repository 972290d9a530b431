//! The retrieval scheme: query plan, masked queries, answers carrying coded
//! common randomness, and the linear decoder.
//!
//! The user hides unit vectors selecting the requested file under uniform
//! masks `U_1..U_M`. Node `n` answers each query vector with its inner
//! product against `D_n` plus its coordinate of `G^T S`, so the answers of
//! the parity nodes are codewords of the masked products
//! `X[i][t] = <U_t, D_i> + S[i][t]`. The user solves for those products and
//! the requested symbols together; `S` keeps every other file hidden.

mod answer;
mod decode;
mod plan;
mod query;
mod round;

pub use answer::{encode_randomness, gen_answer, AnswerSet, CommonRandomness, NodeAnswer, RandomnessMode};
pub use decode::{decode, system_matrix, Decoder};
pub use plan::{make_query_plan, QueryPlan, SchemeCase};
pub use query::{gen_queries, gen_queries_with_masks, gen_queries_with_rng, sample_masks, NodeQuery, QuerySet};
pub use round::{run_round, run_round_on, run_round_with, Transcript};
