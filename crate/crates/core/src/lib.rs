//! Information-seeking task synthesis over a local knowledge graph.
//!
//! Tasks are written as lists of knowledge-projection triplets
//! ([`lang`]), evaluated exactly against a triple store ([`store`],
//! [`eval`]), analysed structurally ([`taskgraph`]), deepened by an
//! answer-preserving expander ([`expander`]), screened by validators
//! ([`validate`]) and finally assembled into datasets with solver
//! trajectories ([`pipeline`]).

pub mod eval;
pub mod expander;
pub mod fixtures;
pub mod lang;
pub mod pipeline;
pub mod store;
pub mod synthetic;
pub mod taskgraph;
pub mod validate;

pub use eval::{answer, eval_kp, evaluate, evaluate_expr, Binding, EvalError};
pub use lang::{
    flatten, merge_union, parse_task, print_task, Constant, Decoration, FormalTask, KpExpr, TaskError, Term,
    TripletExpr, Variable,
};
pub use store::{EntityId, EntitySet, Format, GraphBuilder, GraphError, KnowledgeGraph, RelationId, Triple};
pub use taskgraph::{StructureMetrics, TaskGraph};
