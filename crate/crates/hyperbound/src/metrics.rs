//! Utility and efficiency statistics for runs and cross-method comparisons.
//!
//! Reports recompute per-user degrees from the matching itself instead of
//! trusting engine state, so an infeasible matching is caught here no matter
//! where it came from.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::RoundTrace;
use crate::hypergraph::{CapacityMap, EdgeId, Hypergraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("edge {0} is not part of the instance being reported")]
    ForeignEdge(EdgeId),
    #[error("edge {0} appears more than once in the matching")]
    DuplicateEdge(EdgeId),
    #[error("infeasible matching: user {user} holds {matched} edges over capacity {capacity}")]
    InfeasibleInput {
        user: VertexId,
        matched: u64,
        capacity: u64,
    },
    #[error("trace accepts {trace_total} edges but the matching holds {matched}")]
    TraceMismatch { trace_total: usize, matched: usize },
    #[error("instance mismatch: outcomes cover {left} vs {right} edges")]
    InstanceMismatch { left: usize, right: usize },
}

/// Statistics of one matching, independent of how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchingReport {
    pub matched_count: usize,
    pub total_edges: usize,
    /// `matched_count / total_edges`; 0 for an empty instance.
    pub retention: f64,
    /// matched-degree -> number of users at that degree; covers every user.
    pub degree_histogram: BTreeMap<u64, u64>,
    pub saturated_users: u64,
}

/// Statistics of an engine run, including the round history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub matched_count: usize,
    pub total_edges: usize,
    pub retention: f64,
    pub rounds_executed: usize,
    pub per_round_accepted: Vec<usize>,
    pub degree_histogram: BTreeMap<u64, u64>,
    pub saturated_users: u64,
}

/// Anything that carries a matching size over a known edge universe.
pub trait MatchedOutcome {
    fn matched_count(&self) -> usize;
    fn total_edges(&self) -> usize;
}

impl MatchedOutcome for MatchingReport {
    fn matched_count(&self) -> usize {
        self.matched_count
    }

    fn total_edges(&self) -> usize {
        self.total_edges
    }
}

impl MatchedOutcome for RunReport {
    fn matched_count(&self) -> usize {
        self.matched_count
    }

    fn total_edges(&self) -> usize {
        self.total_edges
    }
}

/// Size ratio between two outcomes on the same instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRecord {
    pub numerator: usize,
    pub denominator: usize,
    /// `numerator / denominator`; 1.0 when both are empty, absent when only
    /// the denominator is.
    pub ratio: Option<f64>,
    pub undefined: bool,
}

impl RatioRecord {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        let (ratio, undefined) = match (numerator, denominator) {
            (0, 0) => (Some(1.0), false),
            (_, 0) => (None, true),
            (n, d) => (Some(n as f64 / d as f64), false),
        };
        Self {
            numerator,
            denominator,
            ratio,
            undefined,
        }
    }
}

/// Audits and summarizes a matching: degrees are recomputed from scratch and
/// checked against the capacities before anything is reported.
pub fn matching_report(
    g: &Hypergraph,
    caps: &CapacityMap,
    matching: &[EdgeId],
) -> Result<MatchingReport, MetricsError> {
    let mut degrees = vec![0u64; g.vertex_count()];
    let mut seen = vec![false; g.edge_count()];
    for &id in matching {
        let eslot = g
            .edge_slot_of(id)
            .ok_or(MetricsError::ForeignEdge(id))?;
        if seen[eslot] {
            return Err(MetricsError::DuplicateEdge(id));
        }
        seen[eslot] = true;
        for &vslot in g.owner_slots_of(eslot) {
            degrees[vslot] += 1;
        }
    }

    let mut degree_histogram = BTreeMap::new();
    let mut saturated_users = 0u64;
    for (vslot, &user) in g.vertices().iter().enumerate() {
        let capacity = caps.get(user);
        let matched = degrees[vslot];
        if matched > capacity {
            return Err(MetricsError::InfeasibleInput {
                user,
                matched,
                capacity,
            });
        }
        *degree_histogram.entry(matched).or_insert(0) += 1;
        if matched == capacity {
            saturated_users += 1;
        }
    }

    let total_edges = g.edge_count();
    let retention = if total_edges == 0 {
        0.0
    } else {
        matching.len() as f64 / total_edges as f64
    };
    Ok(MatchingReport {
        matched_count: matching.len(),
        total_edges,
        retention,
        degree_histogram,
        saturated_users,
    })
}

/// [`matching_report`] plus round statistics from the trace. The trace must
/// account for exactly the matched edges.
pub fn report(
    g: &Hypergraph,
    caps: &CapacityMap,
    matching: &[EdgeId],
    trace: &RoundTrace,
) -> Result<RunReport, MetricsError> {
    let base = matching_report(g, caps, matching)?;
    let per_round_accepted = trace.per_round_accepted();
    let trace_total = trace.accepted_total();
    if trace_total != base.matched_count {
        return Err(MetricsError::TraceMismatch {
            trace_total,
            matched: base.matched_count,
        });
    }
    Ok(RunReport {
        matched_count: base.matched_count,
        total_edges: base.total_edges,
        retention: base.retention,
        rounds_executed: trace.rounds.len(),
        per_round_accepted,
        degree_histogram: base.degree_histogram,
        saturated_users: base.saturated_users,
    })
}

/// Size ratio `|M_a| / |M_b|` of two outcomes over the same edge universe.
pub fn compare(
    a: &dyn MatchedOutcome,
    b: &dyn MatchedOutcome,
) -> Result<RatioRecord, MetricsError> {
    if a.total_edges() != b.total_edges() {
        return Err(MetricsError::InstanceMismatch {
            left: a.total_edges(),
            right: b.total_edges(),
        });
    }
    Ok(RatioRecord::new(a.matched_count(), b.matched_count()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{EngineConfig, run};
    use crate::ordering::OrderingSpec;

    fn graph(edges: &[(u64, &[u64])]) -> Hypergraph {
        let inputs = edges
            .iter()
            .map(|&(id, owners)| {
                (
                    EdgeId(id),
                    owners.iter().copied().map(VertexId).collect(),
                    None,
                )
            })
            .collect();
        Hypergraph::build(inputs, &CapacityMap::uniform(1)).unwrap()
    }

    #[test]
    fn empty_matching_has_zero_retention() {
        let g = graph(&[]);
        let rep = matching_report(&g, &CapacityMap::uniform(1), &[]).unwrap();
        assert_eq!(rep.matched_count, 0);
        assert_eq!(rep.retention, 0.0);
        assert!(rep.degree_histogram.is_empty());
    }

    #[test]
    fn path_outcome_histogram_and_saturation() {
        let g = graph(&[(1, &[10, 11]), (2, &[11, 12]), (3, &[12, 13])]);
        let caps = CapacityMap::uniform(1);
        let rep = matching_report(&g, &caps, &[EdgeId(1), EdgeId(3)]).unwrap();
        assert_eq!(rep.degree_histogram, BTreeMap::from([(1, 4)]));
        assert_eq!(rep.saturated_users, 4);
        assert_eq!(rep.retention, 2.0 / 3.0);
    }

    #[test]
    fn unmatched_users_land_in_the_zero_bucket() {
        let g = graph(&[(1, &[1, 2]), (2, &[3, 4])]);
        let caps = CapacityMap::uniform(1);
        let rep = matching_report(&g, &caps, &[EdgeId(1)]).unwrap();
        assert_eq!(rep.degree_histogram, BTreeMap::from([(0, 2), (1, 2)]));
        assert_eq!(rep.saturated_users, 2);
    }

    #[test]
    fn infeasible_matchings_are_rejected() {
        let g = graph(&[(1, &[7]), (2, &[7])]);
        let err = matching_report(&g, &CapacityMap::uniform(1), &[EdgeId(1), EdgeId(2)])
            .unwrap_err();
        assert_eq!(
            err,
            MetricsError::InfeasibleInput {
                user: VertexId(7),
                matched: 2,
                capacity: 1
            }
        );
    }

    #[test]
    fn foreign_and_duplicate_edges_are_rejected() {
        let g = graph(&[(1, &[1])]);
        let caps = CapacityMap::uniform(2);
        assert_eq!(
            matching_report(&g, &caps, &[EdgeId(9)]).unwrap_err(),
            MetricsError::ForeignEdge(EdgeId(9))
        );
        assert_eq!(
            matching_report(&g, &caps, &[EdgeId(1), EdgeId(1)]).unwrap_err(),
            MetricsError::DuplicateEdge(EdgeId(1))
        );
    }

    #[test]
    fn report_checks_the_trace_total() {
        let g = graph(&[(1, &[1])]);
        let caps = CapacityMap::uniform(1);
        let outcome = run(
            &g,
            &caps,
            &EngineConfig::new(OrderingSpec::UniversalRandom { seed: 0 }),
        )
        .unwrap();
        let rep = report(&g, &caps, &outcome.matching, &outcome.trace).unwrap();
        assert_eq!(rep.per_round_accepted, vec![1]);
        assert_eq!(rep.rounds_executed, 1);

        // a trace that accounts for a different total is rejected
        let err = report(&g, &caps, &[], &outcome.trace).unwrap_err();
        assert_eq!(
            err,
            MetricsError::TraceMismatch {
                trace_total: 1,
                matched: 0
            }
        );
    }

    #[test]
    fn report_degrees_match_engine_state() {
        let g = graph(&[(1, &[1, 2]), (2, &[2, 3]), (3, &[1, 3]), (4, &[4])]);
        let caps = CapacityMap::uniform(2);
        let outcome = run(
            &g,
            &caps,
            &EngineConfig::new(OrderingSpec::UniversalRandom { seed: 3 }),
        )
        .unwrap();
        let rep = report(&g, &caps, &outcome.matching, &outcome.trace).unwrap();
        for &user in g.vertices() {
            let engine_d = outcome.final_state.matched_of(&g, user).unwrap();
            let recount = outcome
                .matching
                .iter()
                .filter(|id| g.edge(**id).unwrap().owners().contains(&user))
                .count() as u64;
            assert_eq!(engine_d, recount);
        }
        let histogram_total: u64 = rep.degree_histogram.values().sum();
        assert_eq!(histogram_total, g.vertex_count() as u64);
    }

    #[test]
    fn ratio_conventions() {
        assert_eq!(RatioRecord::new(0, 0).ratio, Some(1.0));
        assert!(!RatioRecord::new(0, 0).undefined);
        let undef = RatioRecord::new(3, 0);
        assert_eq!(undef.ratio, None);
        assert!(undef.undefined);
        assert_eq!(RatioRecord::new(1, 2).ratio, Some(0.5));
    }

    #[test]
    fn compare_requires_matching_universes() {
        let g = graph(&[(1, &[1]), (2, &[2])]);
        let caps = CapacityMap::uniform(1);
        let a = matching_report(&g, &caps, &[EdgeId(1)]).unwrap();
        let b = matching_report(&g, &caps, &[EdgeId(1), EdgeId(2)]).unwrap();
        let ratio = compare(&a, &b).unwrap();
        assert_eq!(ratio.ratio, Some(0.5));

        let other = graph(&[(1, &[1])]);
        let c = matching_report(&other, &caps, &[EdgeId(1)]).unwrap();
        assert_eq!(
            compare(&a, &c).unwrap_err(),
            MetricsError::InstanceMismatch { left: 2, right: 1 }
        );
    }

    #[test]
    fn half_optimal_greedy_compares_at_half() {
        use crate::baselines::{exact_optimal, greedy};
        // weights put the middle path edge first, so greedy keeps one edge
        // where the optimum keeps two
        let inputs = vec![
            (EdgeId(1), vec![VertexId(10), VertexId(11)], Some(2.0)),
            (EdgeId(2), vec![VertexId(11), VertexId(12)], Some(3.0)),
            (EdgeId(3), vec![VertexId(12), VertexId(13)], Some(1.0)),
        ];
        let caps = CapacityMap::uniform(1);
        let g = Hypergraph::build(inputs, &caps).unwrap();
        let greedy_result = greedy(&g, &caps, &OrderingSpec::WeightDescending { seed: 0 }).unwrap();
        let exact_result = exact_optimal(&g, &caps, 24).unwrap();
        let ratio = compare(&greedy_result, &exact_result).unwrap();
        assert_eq!(ratio.ratio, Some(0.5));
        assert_eq!(ratio.numerator, 1);
        assert_eq!(ratio.denominator, 2);
    }

    #[test]
    fn identical_reports_compare_at_one() {
        let g = graph(&[(1, &[1]), (2, &[2])]);
        let caps = CapacityMap::uniform(1);
        let a = matching_report(&g, &caps, &[EdgeId(1), EdgeId(2)]).unwrap();
        assert_eq!(compare(&a, &a).unwrap().ratio, Some(1.0));
    }
}
