//! Behavioral tests that drive the engine round by round on randomized
//! instances and check it against independent recomputation.

use std::collections::BTreeSet;

use hyperbound::baselines;
use hyperbound::bsp;
use hyperbound::engine::{
    self, apply_accepted, arbitrate, init_state, proposals, run, validate_state, EngineConfig,
};
use hyperbound::io::{generate, EdgeSizeModel, GeneratorSpec, OwnerPopularity};
use hyperbound::ordering::{mix64, OrderingSpec};
use hyperbound::{CapacityMap, EdgeId, Hypergraph, VertexId};

/// Deterministic random instance: generated graph plus randomized
/// capacities with a few overrides.
fn instance(seed: u64, max_users: u64, max_edges: u64) -> (Hypergraph, CapacityMap) {
    let users = 1 + mix64(seed, 0) % max_users;
    let edges = mix64(seed, 1) % (max_edges + 1);
    let edge_size = match mix64(seed, 2) % 3 {
        0 => EdgeSizeModel::Fixed(1),
        1 => EdgeSizeModel::Fixed((2).min(users as usize)),
        _ => EdgeSizeModel::Zipf {
            exponent: 1.1,
            max_size: (users as usize).min(5),
        },
    };
    let popularity = if mix64(seed, 3).is_multiple_of(2) {
        OwnerPopularity::Uniform
    } else {
        OwnerPopularity::Zipf { exponent: 1.0 }
    };
    let g = generate(&GeneratorSpec {
        users,
        edges,
        edge_size,
        popularity,
        seed: mix64(seed, 4),
    })
    .unwrap();

    let mut caps = CapacityMap::uniform(mix64(seed, 5) % 4);
    for i in 0..mix64(seed, 6) % 5 {
        caps.set(
            VertexId(mix64(seed, 10 + i) % users),
            mix64(seed, 30 + i) % 6,
        );
    }
    (g, caps)
}

fn hash_config(seed: u64) -> EngineConfig {
    EngineConfig::new(OrderingSpec::UniversalRandom { seed })
}

/// Re-attach weights to a generated graph so the weight ordering can run,
/// with deliberate collisions to exercise tie-breaking.
fn with_weights(g: &Hypergraph, seed: u64) -> Hypergraph {
    let inputs = g
        .edges()
        .iter()
        .map(|e| {
            let w = (mix64(seed, e.id.0) % 16) as f64;
            (e.id, e.owners().to_vec(), Some(w))
        })
        .collect();
    Hypergraph::build_with_vertices(inputs, g.vertices().iter().copied()).unwrap()
}

#[test]
fn stepping_the_public_phases_reproduces_run() {
    for seed in 0..60u64 {
        let (g, caps) = instance(seed, 30, 60);
        let ordering = OrderingSpec::UniversalRandom { seed: seed ^ 0xABCD };
        let config = EngineConfig::new(ordering);
        let outcome = run(&g, &caps, &config).unwrap();

        let mut state = init_state(&g, &caps);
        let mut rounds = Vec::new();
        while state.eligible_count() > 0 {
            let props = proposals(&g, &caps, &state, &ordering).unwrap();

            // each unsaturated user proposes exactly min(slack, eligible incident)
            for &user in g.vertices() {
                let slack =
                    caps.get(user) - state.matched_of(&g, user).unwrap();
                let eligible_incident = g
                    .edges()
                    .iter()
                    .filter(|e| {
                        e.owners().contains(&user)
                            && state.is_eligible(&g, e.id).unwrap()
                    })
                    .count() as u64;
                let proposed = props.get(&user).map_or(0, |l| l.len() as u64);
                if state.is_saturated(&g, user).unwrap() {
                    assert_eq!(proposed, 0);
                } else {
                    assert_eq!(proposed, slack.min(eligible_incident));
                }
            }

            let accepted = arbitrate(&g, &state, &props);
            // only proposed edges can be accepted, so each user's count can
            // rise by at most its slack
            let before: Vec<u64> = g
                .vertices()
                .iter()
                .map(|&u| state.matched_of(&g, u).unwrap())
                .collect();
            apply_accepted(&g, &caps, &mut state, &accepted).unwrap();
            for (i, &user) in g.vertices().iter().enumerate() {
                let inc = state.matched_of(&g, user).unwrap() - before[i];
                assert!(inc <= caps.get(user) - before[i]);
            }
            validate_state(&g, &caps, &state).unwrap();
            let stalled = accepted.is_empty();
            rounds.push(accepted);
            if stalled {
                break;
            }
        }

        assert_eq!(state.matching(&g), outcome.matching, "seed {seed}");
        let stepped: Vec<Vec<EdgeId>> = rounds;
        let traced: Vec<Vec<EdgeId>> = outcome
            .trace
            .rounds
            .iter()
            .map(|r| r.accepted.clone())
            .collect();
        assert_eq!(stepped, traced, "seed {seed}");
        assert_eq!(state, outcome.final_state, "seed {seed}");
    }
}

#[test]
fn replaying_the_trace_reproduces_the_final_state() {
    for seed in 100..140u64 {
        let (g, caps) = instance(seed, 40, 80);
        let outcome = run(&g, &caps, &hash_config(seed)).unwrap();

        let mut state = init_state(&g, &caps);
        let mut union: BTreeSet<EdgeId> = BTreeSet::new();
        for round in &outcome.trace.rounds {
            for id in &round.accepted {
                assert!(union.insert(*id), "edge {id} accepted twice");
            }
            apply_accepted(&g, &caps, &mut state, &round.accepted).unwrap();
        }
        assert_eq!(state, outcome.final_state);
        let matched: BTreeSet<EdgeId> = outcome.matching.iter().copied().collect();
        assert_eq!(union, matched, "trace union must equal the matching");
    }
}

#[test]
fn state_evolves_monotonically() {
    for seed in 200..230u64 {
        let (g, caps) = instance(seed, 25, 50);
        let ordering = OrderingSpec::UniversalRandom { seed };
        let mut state = init_state(&g, &caps);
        loop {
            let prev = state.clone();
            let props = proposals(&g, &caps, &state, &ordering).unwrap();
            let accepted = arbitrate(&g, &state, &props);
            apply_accepted(&g, &caps, &mut state, &accepted).unwrap();

            assert!(state.eligible_count() <= prev.eligible_count());
            assert!(state.matched_count() >= prev.matched_count());
            for &u in g.vertices() {
                assert!(state.matched_of(&g, u) >= prev.matched_of(&g, u));
                if prev.is_saturated(&g, u).unwrap() {
                    assert!(state.is_saturated(&g, u).unwrap(), "saturation is absorbing");
                }
            }
            if accepted.is_empty() {
                break;
            }
        }
    }
}

#[test]
fn progress_and_maximality_under_universal_orderings() {
    for seed in 300..380u64 {
        let (g, caps) = instance(seed, 30, 60);
        let outcome = run(&g, &caps, &hash_config(seed)).unwrap();

        // every executed round accepts something; rounds are bounded by |H|
        for round in &outcome.trace.rounds {
            assert!(!round.accepted.is_empty(), "stalled round under universal order");
        }
        assert!(outcome.trace.rounds.len() <= g.edge_count());
        assert_eq!(outcome.final_state.eligible_count(), 0);

        // maximality: recompute degrees from M alone and look for slack
        let matched: BTreeSet<EdgeId> = outcome.matching.iter().copied().collect();
        for edge in g.edges() {
            if matched.contains(&edge.id) {
                continue;
            }
            let all_open = edge.owners().iter().all(|&u| {
                let d = outcome
                    .matching
                    .iter()
                    .filter(|id| g.edge(**id).unwrap().owners().contains(&u))
                    .count() as u64;
                d < caps.get(u)
            });
            assert!(!all_open, "unmatched edge {} has slack everywhere", edge.id);
        }
    }
}

#[test]
fn engine_equals_greedy_under_shared_hash_order() {
    for seed in 400..520u64 {
        let (g, caps) = instance(seed, 40, 80);
        let ordering = OrderingSpec::UniversalRandom { seed: seed * 31 + 1 };
        let engine_m = run(&g, &caps, &EngineConfig::new(ordering)).unwrap().matching;
        let greedy_m = baselines::greedy(&g, &caps, &ordering).unwrap().matching;
        assert_eq!(engine_m, greedy_m, "seed {seed}");
    }
}

#[test]
fn engine_equals_greedy_under_weight_order_with_ties() {
    for seed in 600..660u64 {
        let (g0, caps) = instance(seed, 25, 50);
        let g = with_weights(&g0, seed);
        let ordering = OrderingSpec::WeightDescending { seed: seed ^ 0xF00D };
        let engine_m = run(&g, &caps, &EngineConfig::new(ordering)).unwrap().matching;
        let greedy_m = baselines::greedy(&g, &caps, &ordering).unwrap().matching;
        assert_eq!(engine_m, greedy_m, "seed {seed}");
    }
}

#[test]
fn exact_oracle_dominates_engine_and_greedy() {
    for seed in 700..780u64 {
        let (g, caps) = instance(seed, 12, 14);
        let ordering = OrderingSpec::UniversalRandom { seed };
        let engine_m = run(&g, &caps, &EngineConfig::new(ordering)).unwrap().matching;
        let greedy_m = baselines::greedy(&g, &caps, &ordering).unwrap().matching;
        let exact = baselines::exact_optimal(&g, &caps, 24).unwrap();
        let optimum = exact.optimum.unwrap();
        assert!(optimum >= engine_m.len());
        assert!(optimum >= greedy_m.len());
    }
}

#[test]
fn worker_counts_agree_on_random_instances() {
    for seed in 800..830u64 {
        let (g, caps) = instance(seed, 30, 60);
        let config = hash_config(seed);
        let serial = run(&g, &caps, &config).unwrap();
        for workers in [1, 2, 3, 4, 8] {
            let parallel = bsp::parallel_run(&g, &caps, &config, workers).unwrap();
            assert_eq!(parallel, serial, "seed {seed}, workers {workers}");
        }
    }
}

#[test]
fn worker_counts_agree_on_a_two_hundred_edge_instance() {
    let g = generate(&GeneratorSpec {
        users: 60,
        edges: 200,
        edge_size: EdgeSizeModel::Fixed(3),
        popularity: OwnerPopularity::Uniform,
        seed: 424242,
    })
    .unwrap();
    let caps = CapacityMap::uniform(2);
    let config = hash_config(7);
    let baseline = bsp::parallel_run(&g, &caps, &config, 1).unwrap();
    for workers in [2, 4, 8] {
        let outcome = bsp::parallel_run(&g, &caps, &config, workers).unwrap();
        assert_eq!(outcome, baseline, "workers {workers}");
    }
    assert_eq!(baseline, run(&g, &caps, &config).unwrap());
}

#[test]
fn single_owner_instances_finish_in_one_accepting_round() {
    for seed in 900..950u64 {
        let (g0, _) = instance(seed, 30, 50);
        // rebuild every edge as single-owner, keeping ids
        let inputs = g0
            .edges()
            .iter()
            .map(|e| (e.id, vec![e.owners()[0]], None))
            .collect();
        let g = Hypergraph::build_with_vertices(inputs, g0.vertices().iter().copied()).unwrap();
        let caps = CapacityMap::uniform(mix64(seed, 77) % 4);
        let outcome = run(&g, &caps, &hash_config(seed)).unwrap();
        assert!(outcome.trace.rounds.len() <= 1);
        for &user in g.vertices() {
            let kept = outcome
                .matching
                .iter()
                .filter(|id| g.edge(**id).unwrap().owners() == [user])
                .count() as u64;
            let expected = (g.degree(user).unwrap() as u64).min(caps.get(user));
            assert_eq!(kept, expected, "seed {seed}, user {user}");
        }
    }
}

#[test]
fn engine_max_rounds_prefix_matches_unbounded_run() {
    // a bounded run's trace is a prefix of the unbounded run's trace
    for seed in 1000..1020u64 {
        let (g, caps) = instance(seed, 20, 40);
        let full = run(&g, &caps, &hash_config(seed)).unwrap();
        if full.trace.rounds.len() < 2 {
            continue;
        }
        let bounded = run(
            &g,
            &caps,
            &EngineConfig {
                ordering: OrderingSpec::UniversalRandom { seed },
                max_rounds: Some(1),
                early_stop: true,
            },
        )
        .unwrap();
        assert_eq!(bounded.trace.rounds.len(), 1);
        assert_eq!(bounded.trace.rounds[0], full.trace.rounds[0]);
    }
}

#[test]
fn engine_feasible_after_every_round_with_mixed_overrides() {
    for seed in 1100..1160u64 {
        let (g, caps) = instance(seed, 50, 100);
        let ordering = OrderingSpec::UniversalRandom { seed };
        let mut state = init_state(&g, &caps);
        validate_state(&g, &caps, &state).unwrap();
        loop {
            let props = proposals(&g, &caps, &state, &ordering).unwrap();
            let accepted = arbitrate(&g, &state, &props);
            apply_accepted(&g, &caps, &mut state, &accepted).unwrap();
            validate_state(&g, &caps, &state).unwrap();
            for &u in g.vertices() {
                assert!(state.matched_of(&g, u).unwrap() <= caps.get(u));
            }
            if accepted.is_empty() {
                break;
            }
        }
    }
}

#[test]
fn phase_stats_totals_match_trace() {
    let (g, caps) = instance(55, 30, 60);
    let outcome = run(&g, &caps, &hash_config(55)).unwrap();
    let stats = bsp::phase_stats(&outcome.trace);
    assert_eq!(stats.len(), outcome.trace.rounds.len());
    for (stat, round) in stats.iter().zip(&outcome.trace.rounds) {
        assert_eq!(stat.proposals, round.proposal_messages);
        assert_eq!(stat.commits, round.commit_messages);
        let owners: u64 = round
            .accepted
            .iter()
            .map(|id| g.edge(*id).unwrap().owners().len() as u64)
            .sum();
        assert_eq!(stat.commits, owners);
    }
}

#[test]
fn engine_error_type_is_exported() {
    // keep the error surface nailed down for library users
    let g = Hypergraph::build(vec![], &CapacityMap::uniform(1)).unwrap();
    let bad = EngineConfig {
        ordering: OrderingSpec::UniversalRandom { seed: 0 },
        max_rounds: None,
        early_stop: false,
    };
    let err: engine::EngineError = run(&g, &CapacityMap::uniform(1), &bad).unwrap_err();
    assert!(matches!(err, engine::EngineError::InvalidConfig(_)));
}
