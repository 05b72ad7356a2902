//! Hypergraph b-matching under per-user capacities.
//!
//! Given records that can each belong to several users, select as many
//! records as possible while no user ends up owning more than its budget
//! `b(u)` of the selected ones. Records are hyperedges over the user
//! vertices; the selection is a b-matching.
//!
//! The crate provides:
//!
//! - [`hypergraph`]: the immutable ownership graph, capacities, validation;
//! - [`ordering`]: seeded universal preference orders over edges;
//! - [`engine`]: the round-synchronous propose/arbitrate/commit matcher;
//! - [`bsp`]: sharded multi-worker execution with bit-identical results
//!   for every worker count;
//! - [`baselines`]: a sequential greedy reference and an exact
//!   exhaustive-search oracle for small instances;
//! - [`metrics`]: run reports and cross-method ratios;
//! - [`io`]: text formats, the result bundle, and a seeded instance
//!   generator.
//!
//! Everything is deterministic: a fixed (instance, capacities, config)
//! triple produces identical results byte for byte, regardless of worker
//! count or repetition.

pub mod baselines;
pub mod bsp;
pub mod engine;
pub mod hypergraph;
pub mod io;
pub mod metrics;
pub mod ordering;

pub use engine::{EngineConfig, RunOutcome};
pub use hypergraph::{CapacityMap, EdgeId, Hyperedge, Hypergraph, VertexId};
pub use ordering::OrderingSpec;
