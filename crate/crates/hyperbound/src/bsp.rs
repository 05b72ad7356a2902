//! Deterministic multi-worker execution of the engine's round phases.
//!
//! The round is the synchronization unit: workers share the previous round's
//! committed state read-only, each writes into its own buffer, and buffers
//! merge single-threaded at the barrier in a canonical order. The outcome is
//! bit-identical to the serial engine for every worker count.

use std::thread;

use crate::engine::{self, EngineConfig, EngineError, ProposalMap, RoundState, RunOutcome};
use crate::hypergraph::{CapacityMap, EdgeId, Hypergraph, VertexId};
use crate::ordering::RankKey;

/// Worker owning a vertex: pure function of the id and the worker count.
pub fn vertex_worker(user: VertexId, workers: usize) -> usize {
    (user.0 % workers as u64) as usize
}

/// Worker owning an edge.
pub fn edge_worker(id: EdgeId, workers: usize) -> usize {
    (id.0 % workers as u64) as usize
}

/// Message counts of one round as the transport would see them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoundMessages {
    /// user -> edge proposal messages.
    pub proposals: u64,
    /// edge -> owner commit broadcasts.
    pub commits: u64,
}

/// Per-round message counts extracted from a trace.
pub fn phase_stats(trace: &engine::RoundTrace) -> Vec<RoundMessages> {
    trace
        .rounds
        .iter()
        .map(|r| RoundMessages {
            proposals: r.proposal_messages,
            commits: r.commit_messages,
        })
        .collect()
}

struct ThreadedPhases {
    vertex_shards: Vec<Vec<usize>>,
    edge_shards: Vec<Vec<usize>>,
}

impl ThreadedPhases {
    fn new(g: &Hypergraph, workers: usize) -> Self {
        let mut vertex_shards = vec![Vec::new(); workers];
        for (vslot, &user) in g.vertices().iter().enumerate() {
            vertex_shards[vertex_worker(user, workers)].push(vslot);
        }
        let mut edge_shards = vec![Vec::new(); workers];
        for (eslot, edge) in g.edges().iter().enumerate() {
            edge_shards[edge_worker(edge.id, workers)].push(eslot);
        }
        Self {
            vertex_shards,
            edge_shards,
        }
    }
}

impl engine::PhaseExecutor for ThreadedPhases {
    fn proposals(
        &self,
        g: &Hypergraph,
        caps: &CapacityMap,
        state: &RoundState,
        keys: &[RankKey],
    ) -> ProposalMap {
        let buffers: Vec<Vec<(VertexId, Vec<EdgeId>)>> = thread::scope(|scope| {
            let handles: Vec<_> = self
                .vertex_shards
                .iter()
                .map(|shard| {
                    scope.spawn(move || {
                        shard
                            .iter()
                            .filter_map(|&vslot| {
                                let user = g.vertices()[vslot];
                                let list =
                                    engine::propose_for_slot(g, caps, state, keys, vslot, user);
                                (!list.is_empty()).then_some((user, list))
                            })
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("proposal worker panicked"))
                .collect()
        });
        // shards are disjoint by vertex, so insertion order cannot matter
        let mut merged = ProposalMap::new();
        for buffer in buffers {
            for (user, list) in buffer {
                merged.insert(user, list);
            }
        }
        merged
    }

    fn arbitrate(&self, g: &Hypergraph, state: &RoundState, props: &ProposalMap) -> Vec<EdgeId> {
        let buffers: Vec<Vec<EdgeId>> = thread::scope(|scope| {
            let handles: Vec<_> = self
                .edge_shards
                .iter()
                .map(|shard| {
                    scope.spawn(move || {
                        shard
                            .iter()
                            .filter(|&&eslot| {
                                state.eligible_slot(eslot)
                                    && engine::edge_unanimous(g, props, eslot)
                            })
                            .map(|&eslot| g.edges()[eslot].id)
                            .collect()
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("arbitration worker panicked"))
                .collect()
        });
        let mut accepted: Vec<EdgeId> = buffers.concat();
        accepted.sort_unstable();
        accepted
    }
}

/// Runs the round loop with `workers` threads per phase. Proposal work is
/// sharded by vertex id, arbitration by edge id, and the commit is applied
/// once per round in ascending id order, so the output equals [`engine::run`]
/// for every worker count.
pub fn parallel_run(
    g: &Hypergraph,
    caps: &CapacityMap,
    config: &EngineConfig,
    workers: usize,
) -> Result<RunOutcome, EngineError> {
    if workers == 0 {
        return Err(EngineError::InvalidConfig(
            "worker count must be at least 1".into(),
        ));
    }
    let phases = ThreadedPhases::new(g, workers);
    engine::run_with(g, caps, config, &phases)
}
