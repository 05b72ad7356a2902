//! Sequential greedy baseline and an exact exhaustive-search oracle.
//!
//! Both exist to measure the round-based engine against: greedy is the
//! sequential reference it should reproduce under a shared ordering, and
//! the oracle gives the true optimum on instances small enough to enumerate.

use thiserror::Error;

use crate::hypergraph::{CapacityMap, EdgeId, Hypergraph};
use crate::metrics::MatchedOutcome;
use crate::ordering::{rank_all, OrderingError, OrderingSpec};

/// Edge-count ceiling for [`exact_optimal`]; 2^24 search nodes worst case.
pub const DEFAULT_EXACT_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BaselineError {
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error("instance has {edges} edges, over the exact-search limit {limit}")]
    TooLarge { edges: usize, limit: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Greedy,
    Exact,
}

/// Feasible matching produced by a baseline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaselineResult {
    /// Selected edges, ascending by id.
    pub matching: Vec<EdgeId>,
    pub method: Method,
    /// Optimal matching size; only the exact method knows it.
    pub optimum: Option<usize>,
    pub total_edges: usize,
}

impl MatchedOutcome for BaselineResult {
    fn matched_count(&self) -> usize {
        self.matching.len()
    }

    fn total_edges(&self) -> usize {
        self.total_edges
    }
}

/// Scans edges most-preferred first and keeps each edge whose owners all
/// still have budget left. The result is maximal for the scan order.
pub fn greedy(
    g: &Hypergraph,
    caps: &CapacityMap,
    ordering: &OrderingSpec,
) -> Result<BaselineResult, BaselineError> {
    let keys = rank_all(g, ordering)?;
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_unstable_by_key(|&eslot| keys[eslot]);

    let mut matched = vec![0u64; g.vertex_count()];
    let mut taken = vec![false; g.edge_count()];
    for eslot in order {
        let fits = g
            .owner_slots_of(eslot)
            .iter()
            .all(|&v| matched[v] < caps.get(g.vertices()[v]));
        if fits {
            taken[eslot] = true;
            for &v in g.owner_slots_of(eslot) {
                matched[v] += 1;
            }
        }
    }
    let matching = (0..g.edge_count())
        .filter(|&eslot| taken[eslot])
        .map(|eslot| g.edges()[eslot].id)
        .collect();
    Ok(BaselineResult {
        matching,
        method: Method::Greedy,
        optimum: None,
        total_edges: g.edge_count(),
    })
}

/// Exhaustive search over edge subsets with feasibility and size pruning.
/// Exact but exponential; refuses instances with more than `limit` edges.
pub fn exact_optimal(
    g: &Hypergraph,
    caps: &CapacityMap,
    limit: usize,
) -> Result<BaselineResult, BaselineError> {
    if g.edge_count() > limit {
        return Err(BaselineError::TooLarge {
            edges: g.edge_count(),
            limit,
        });
    }
    let mut search = Search {
        g,
        caps,
        matched: vec![0; g.vertex_count()],
        chosen: Vec::new(),
        best: Vec::new(),
    };
    search.explore(0);
    let mut matching: Vec<EdgeId> = search
        .best
        .iter()
        .map(|&eslot| g.edges()[eslot].id)
        .collect();
    matching.sort_unstable();
    Ok(BaselineResult {
        optimum: Some(matching.len()),
        matching,
        method: Method::Exact,
        total_edges: g.edge_count(),
    })
}

struct Search<'a> {
    g: &'a Hypergraph,
    caps: &'a CapacityMap,
    matched: Vec<u64>,
    chosen: Vec<usize>,
    best: Vec<usize>,
}

impl Search<'_> {
    fn explore(&mut self, eslot: usize) {
        // even taking every remaining edge cannot beat the incumbent
        if self.chosen.len() + (self.g.edge_count() - eslot) <= self.best.len() {
            return;
        }
        if eslot == self.g.edge_count() {
            self.best = self.chosen.clone();
            return;
        }
        let fits = self
            .g
            .owner_slots_of(eslot)
            .iter()
            .all(|&v| self.matched[v] < self.caps.get(self.g.vertices()[v]));
        if fits {
            for &v in self.g.owner_slots_of(eslot) {
                self.matched[v] += 1;
            }
            self.chosen.push(eslot);
            self.explore(eslot + 1);
            self.chosen.pop();
            for &v in self.g.owner_slots_of(eslot) {
                self.matched[v] -= 1;
            }
        }
        self.explore(eslot + 1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypergraph::VertexId;

    fn weighted_graph(edges: &[(u64, &[u64], f64)]) -> Hypergraph {
        let inputs = edges
            .iter()
            .map(|&(id, owners, w)| {
                (
                    EdgeId(id),
                    owners.iter().copied().map(VertexId).collect(),
                    Some(w),
                )
            })
            .collect();
        Hypergraph::build(inputs, &CapacityMap::uniform(1)).unwrap()
    }

    fn path() -> Hypergraph {
        // weights give preference order e1 < e2 < e3
        weighted_graph(&[(1, &[10, 11], 3.0), (2, &[11, 12], 2.0), (3, &[12, 13], 1.0)])
    }

    // independent oracle: plain enumeration of all 2^m subsets, no pruning
    fn enumerate_optimum(g: &Hypergraph, caps: &CapacityMap) -> usize {
        let m = g.edge_count();
        assert!(m <= 16, "enumeration oracle is for tiny instances");
        let mut best = 0;
        'subset: for mask in 0u32..(1 << m) {
            let mut matched = vec![0u64; g.vertex_count()];
            for eslot in 0..m {
                if mask & (1 << eslot) != 0 {
                    for &v in g.owner_slots_of(eslot) {
                        matched[v] += 1;
                        if matched[v] > caps.get(g.vertices()[v]) {
                            continue 'subset;
                        }
                    }
                }
            }
            best = best.max(mask.count_ones() as usize);
        }
        best
    }

    #[test]
    fn greedy_takes_outer_path_edges() {
        let g = path();
        let caps = CapacityMap::uniform(1);
        let spec = OrderingSpec::WeightDescending { seed: 0 };
        let result = greedy(&g, &caps, &spec).unwrap();
        assert_eq!(result.matching, vec![EdgeId(1), EdgeId(3)]);
        assert_eq!(enumerate_optimum(&g, &caps), 2);
    }

    #[test]
    fn greedy_can_be_half_of_optimal() {
        // weights put the middle edge first: e2 < e1 < e3
        let g = weighted_graph(&[(1, &[10, 11], 2.0), (2, &[11, 12], 3.0), (3, &[12, 13], 1.0)]);
        let caps = CapacityMap::uniform(1);
        let spec = OrderingSpec::WeightDescending { seed: 0 };
        let result = greedy(&g, &caps, &spec).unwrap();
        assert_eq!(result.matching, vec![EdgeId(2)]);
        let exact = exact_optimal(&g, &caps, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(exact.optimum, Some(2));
    }

    #[test]
    fn greedy_single_owner_users_keep_min_degree_budget() {
        let g = weighted_graph(&[
            (1, &[1], 4.0),
            (2, &[1], 3.0),
            (3, &[1], 2.0),
            (4, &[2], 1.0),
        ]);
        let caps = CapacityMap::uniform(2);
        let spec = OrderingSpec::WeightDescending { seed: 0 };
        let result = greedy(&g, &caps, &spec).unwrap();
        assert_eq!(result.matching, vec![EdgeId(1), EdgeId(2), EdgeId(4)]);
    }

    #[test]
    fn exact_on_triangle_is_one() {
        let g = weighted_graph(&[(1, &[1, 2], 3.0), (2, &[2, 3], 2.0), (3, &[1, 3], 1.0)]);
        let caps = CapacityMap::uniform(1);
        let exact = exact_optimal(&g, &caps, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(exact.optimum, Some(1));
        assert_eq!(exact.matching.len(), 1);
        assert_eq!(enumerate_optimum(&g, &caps), 1);
    }

    #[test]
    fn exact_on_path_is_two() {
        let g = path();
        let caps = CapacityMap::uniform(1);
        let exact = exact_optimal(&g, &caps, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(exact.optimum, Some(2));
        assert_eq!(exact.matching, vec![EdgeId(1), EdgeId(3)]);
    }

    #[test]
    fn exact_on_empty_graph_is_zero() {
        let g = Hypergraph::build(vec![], &CapacityMap::uniform(1)).unwrap();
        let exact = exact_optimal(&g, &CapacityMap::uniform(1), DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(exact.optimum, Some(0));
        assert!(exact.matching.is_empty());
    }

    #[test]
    fn exact_refuses_oversized_instances() {
        let inputs = (0..30u64)
            .map(|i| (EdgeId(i), vec![VertexId(i)], None))
            .collect();
        let g = Hypergraph::build(inputs, &CapacityMap::uniform(1)).unwrap();
        assert_eq!(
            exact_optimal(&g, &CapacityMap::uniform(1), 24).unwrap_err(),
            BaselineError::TooLarge {
                edges: 30,
                limit: 24
            }
        );
    }

    #[test]
    fn exact_matches_plain_enumeration_on_random_instances() {
        use crate::ordering::mix64;
        for seed in 0..40u64 {
            let n = 1 + (mix64(seed, 0) % 6);
            let m = mix64(seed, 1) % 11;
            let inputs: Vec<_> = (0..m)
                .map(|i| {
                    let size = (1 + mix64(seed, 100 + i) % 3).min(n);
                    let owners: Vec<VertexId> = (0..size)
                        .map(|j| VertexId(mix64(seed, 1000 + i * 10 + j) % n))
                        .collect();
                    (EdgeId(i), owners, None)
                })
                .collect();
            let caps = CapacityMap::uniform(mix64(seed, 2) % 3);
            let g = Hypergraph::build(inputs, &caps).unwrap();
            let exact = exact_optimal(&g, &caps, 16).unwrap();
            assert_eq!(exact.optimum.unwrap(), enumerate_optimum(&g, &caps));
        }
    }

    #[test]
    fn greedy_is_maximal_and_feasible() {
        use crate::ordering::mix64;
        for seed in 0..30u64 {
            let n = 2 + (mix64(seed, 0) % 10);
            let m = mix64(seed, 1) % 20;
            let inputs: Vec<_> = (0..m)
                .map(|i| {
                    let size = 1 + (mix64(seed, 100 + i) % 3);
                    let owners: Vec<VertexId> = (0..size)
                        .map(|j| VertexId(mix64(seed, 1000 + i * 10 + j) % n))
                        .collect();
                    (EdgeId(i), owners, None)
                })
                .collect();
            let caps = CapacityMap::uniform(1 + mix64(seed, 2) % 3);
            let g = Hypergraph::build(inputs, &caps).unwrap();
            let spec = OrderingSpec::UniversalRandom { seed };
            let result = greedy(&g, &caps, &spec).unwrap();

            let mut matched = vec![0u64; g.vertex_count()];
            for id in &result.matching {
                let eslot = g.edge_slot_of(*id).unwrap();
                for &v in g.owner_slots_of(eslot) {
                    matched[v] += 1;
                }
            }
            for (v, &user) in g.vertices().iter().enumerate() {
                assert!(matched[v] <= caps.get(user), "greedy broke feasibility");
            }
            // maximality: every rejected edge has a full owner
            for (eslot, edge) in g.edges().iter().enumerate() {
                if !result.matching.contains(&edge.id) {
                    assert!(
                        g.owner_slots_of(eslot)
                            .iter()
                            .any(|&v| matched[v] == caps.get(g.vertices()[v])),
                        "rejected edge {} has slack everywhere",
                        edge.id
                    );
                }
            }
        }
    }
}
