//! Round-synchronous b-matching engine.
//!
//! Each round has three phases: every unsaturated user proposes its most
//! preferred eligible edges up to its remaining budget, an edge is accepted
//! exactly when all of its owners proposed it in the same round, and the
//! accepted edges are committed: counts update, freshly saturated users
//! drop out, and their remaining edges leave the eligible pool. The matching
//! respects every capacity after every round, not just at the end.
//!
//! Under a universal ordering the globally most-preferred eligible edge is
//! every owner's top proposal, so each round accepts at least one edge and
//! the engine needs at most one round per edge.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::hypergraph::{CapacityMap, EdgeId, Hypergraph, VertexId};
use crate::ordering::{rank_all, OrderingError, OrderingSpec, RankKey};

/// Proposals of one round: unsaturated users to their preference-ordered
/// edge lists. Users proposing nothing are absent.
pub type ProposalMap = BTreeMap<VertexId, Vec<EdgeId>>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("invalid engine config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Ordering(#[from] OrderingError),
    #[error("accepted edge {0} is not part of this graph")]
    UnknownEdge(EdgeId),
    #[error("accepted edge {0} is not eligible")]
    IneligibleAcceptance(EdgeId),
    #[error("committing would push user {user} past capacity {capacity}")]
    CapacityViolation { user: VertexId, capacity: u64 },
}

/// Violation found by [`validate_state`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StateViolation {
    #[error("state was built for a different graph shape")]
    ShapeMismatch,
    #[error("user {user} has {matched} matched edges, over capacity {capacity}")]
    CapacityExceeded {
        user: VertexId,
        matched: u64,
        capacity: u64,
    },
    #[error("user {user} saturation flag is {flag} with {matched}/{capacity} matched")]
    SaturationFlag {
        user: VertexId,
        flag: bool,
        matched: u64,
        capacity: u64,
    },
    #[error("edge {edge} is both matched and eligible")]
    MatchedAndEligible { edge: EdgeId },
    #[error("eligible edge {edge} has saturated owner {user}")]
    EligibleWithSaturatedOwner { edge: EdgeId, user: VertexId },
    #[error("user {user} matched-count {tracked} disagrees with recount {actual}")]
    CountDrift {
        user: VertexId,
        tracked: u64,
        actual: u64,
    },
    #[error("cached totals disagree with flag recount")]
    TotalsDrift,
}

/// Engine parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EngineConfig {
    pub ordering: OrderingSpec,
    /// Round budget; `None` runs until a fixed point.
    pub max_rounds: Option<u64>,
    /// Stop once a round accepts nothing. With `max_rounds: None` this must
    /// be on, otherwise nothing bounds the loop.
    pub early_stop: bool,
}

impl EngineConfig {
    pub fn new(ordering: OrderingSpec) -> Self {
        Self {
            ordering,
            max_rounds: None,
            early_stop: true,
        }
    }

    pub fn validate(&self) -> Result<(), EngineError> {
        if self.max_rounds.is_none() && !self.early_stop {
            return Err(EngineError::InvalidConfig(
                "an unbounded round budget requires early stop".into(),
            ));
        }
        if self.max_rounds == Some(0) {
            return Err(EngineError::InvalidConfig(
                "max_rounds must be positive; use None for unbounded".into(),
            ));
        }
        Ok(())
    }
}

/// Full algorithm state between rounds: matched counts d(u), saturation
/// flags S(u), the eligible pool E, and the matching M.
///
/// A state is meaningful only together with the graph it was initialized
/// from; accessors take that graph to translate ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundState {
    d: Vec<u64>,
    saturated: Vec<bool>,
    eligible: Vec<bool>,
    in_matching: Vec<bool>,
    eligible_count: usize,
    matched_count: usize,
    round: u64,
}

impl RoundState {
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn eligible_count(&self) -> usize {
        self.eligible_count
    }

    pub fn matched_count(&self) -> usize {
        self.matched_count
    }

    /// Matched-edge count d(u), or `None` for vertices outside the graph.
    pub fn matched_of(&self, g: &Hypergraph, user: VertexId) -> Option<u64> {
        g.vertex_slot_of(user).map(|v| self.d[v])
    }

    pub fn is_saturated(&self, g: &Hypergraph, user: VertexId) -> Option<bool> {
        g.vertex_slot_of(user).map(|v| self.saturated[v])
    }

    pub fn is_eligible(&self, g: &Hypergraph, id: EdgeId) -> Option<bool> {
        g.edge_slot_of(id).map(|e| self.eligible[e])
    }

    /// Accepted edges so far, ascending by id.
    pub fn matching(&self, g: &Hypergraph) -> Vec<EdgeId> {
        g.edges()
            .iter()
            .enumerate()
            .filter(|(slot, _)| self.in_matching[*slot])
            .map(|(_, e)| e.id)
            .collect()
    }

    pub(crate) fn eligible_slot(&self, eslot: usize) -> bool {
        self.eligible[eslot]
    }

    /// Eligible edges, ascending by id.
    pub fn eligible_edges(&self, g: &Hypergraph) -> Vec<EdgeId> {
        g.edges()
            .iter()
            .enumerate()
            .filter(|(slot, _)| self.eligible[*slot])
            .map(|(_, e)| e.id)
            .collect()
    }
}

/// One committed round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundRecord {
    /// Proposal messages emitted (one per user-edge pair proposed).
    pub proposal_messages: u64,
    /// Edges accepted this round, ascending.
    pub accepted: Vec<EdgeId>,
    /// Users that reached their capacity this round, ascending.
    pub newly_saturated: Vec<VertexId>,
    /// Commit messages emitted (one per owner of each accepted edge).
    pub commit_messages: u64,
}

/// Per-round history of a run.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RoundTrace {
    pub rounds: Vec<RoundRecord>,
}

impl RoundTrace {
    pub fn accepted_total(&self) -> usize {
        self.rounds.iter().map(|r| r.accepted.len()).sum()
    }

    pub fn per_round_accepted(&self) -> Vec<usize> {
        self.rounds.iter().map(|r| r.accepted.len()).collect()
    }
}

/// Result of a full run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOutcome {
    /// Accepted edges, ascending by id.
    pub matching: Vec<EdgeId>,
    pub trace: RoundTrace,
    pub final_state: RoundState,
}

/// Fresh state: zero counts, everyone unsaturated except zero-budget users,
/// and every edge eligible unless a zero-budget user owns it.
pub fn init_state(g: &Hypergraph, caps: &CapacityMap) -> RoundState {
    let mut saturated = vec![false; g.vertex_count()];
    for (vslot, &user) in g.vertices().iter().enumerate() {
        if caps.get(user) == 0 {
            saturated[vslot] = true;
        }
    }
    let mut eligible = vec![true; g.edge_count()];
    let mut eligible_count = g.edge_count();
    for (eslot, flag) in eligible.iter_mut().enumerate() {
        if g.owner_slots_of(eslot).iter().any(|&v| saturated[v]) {
            *flag = false;
            eligible_count -= 1;
        }
    }
    RoundState {
        d: vec![0; g.vertex_count()],
        saturated,
        eligible,
        in_matching: vec![false; g.edge_count()],
        eligible_count,
        matched_count: 0,
        round: 0,
    }
}

/// Proposal lists for every unsaturated user: its `b(u) - d(u)` most
/// preferred eligible incident edges (all of them when it has fewer).
pub fn proposals(
    g: &Hypergraph,
    caps: &CapacityMap,
    state: &RoundState,
    ordering: &OrderingSpec,
) -> Result<ProposalMap, OrderingError> {
    let keys = rank_all(g, ordering)?;
    Ok(proposals_with_keys(g, caps, state, &keys))
}

pub(crate) fn proposals_with_keys(
    g: &Hypergraph,
    caps: &CapacityMap,
    state: &RoundState,
    keys: &[RankKey],
) -> ProposalMap {
    let mut map = ProposalMap::new();
    for (vslot, &user) in g.vertices().iter().enumerate() {
        let list = propose_for_slot(g, caps, state, keys, vslot, user);
        if !list.is_empty() {
            map.insert(user, list);
        }
    }
    map
}

/// Top-slack selection for a single user; empty for saturated users.
pub(crate) fn propose_for_slot(
    g: &Hypergraph,
    caps: &CapacityMap,
    state: &RoundState,
    keys: &[RankKey],
    vslot: usize,
    user: VertexId,
) -> Vec<EdgeId> {
    if state.saturated[vslot] {
        return Vec::new();
    }
    let slack = caps.get(user).saturating_sub(state.d[vslot]);
    if slack == 0 {
        return Vec::new();
    }
    let mut candidates: Vec<(RankKey, EdgeId)> = g
        .incident_slots(vslot)
        .iter()
        .filter(|&&eslot| state.eligible[eslot])
        .map(|&eslot| (keys[eslot], g.edges()[eslot].id))
        .collect();
    let take = (candidates.len() as u64).min(slack) as usize;
    if take == 0 {
        return Vec::new();
    }
    if candidates.len() > take {
        candidates.select_nth_unstable(take - 1);
        candidates.truncate(take);
    }
    candidates.sort_unstable();
    candidates.into_iter().map(|(_, id)| id).collect()
}

/// Unanimity test for one edge: accepted only when every owner proposed it.
pub(crate) fn edge_unanimous(g: &Hypergraph, props: &ProposalMap, eslot: usize) -> bool {
    let edge = &g.edges()[eslot];
    edge.owners()
        .iter()
        .all(|u| props.get(u).is_some_and(|list| list.contains(&edge.id)))
}

/// Edges accepted this round: the eligible edges proposed by all of their
/// owners. Returned ascending by id; may be empty.
pub fn arbitrate(g: &Hypergraph, state: &RoundState, props: &ProposalMap) -> Vec<EdgeId> {
    let mut accepted = Vec::new();
    for (eslot, edge) in g.edges().iter().enumerate() {
        if state.eligible[eslot] && edge_unanimous(g, props, eslot) {
            accepted.push(edge.id);
        }
    }
    accepted
}

/// Effect of committing one round's accepted edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedRound {
    /// Users that reached capacity in this commit, ascending.
    pub newly_saturated: Vec<VertexId>,
    /// One message per (accepted edge, owner) pair.
    pub commit_messages: u64,
}

/// Commits `accepted` into the state: moves the edges from eligible to
/// matched, bumps owner counts, saturates users that hit their budget, and
/// prunes the remaining edges of freshly saturated users. Advances the
/// round counter even when nothing was accepted.
///
/// `accepted` must be a duplicate-free subset of the eligible pool that was
/// unanimously proposed; the state is untouched when a check fails. The
/// capacity check cannot fire for genuinely unanimous proposals; it guards
/// against miscomputed acceptance sets.
pub fn apply_accepted(
    g: &Hypergraph,
    caps: &CapacityMap,
    state: &mut RoundState,
    accepted: &[EdgeId],
) -> Result<AppliedRound, EngineError> {
    let mut slots = Vec::with_capacity(accepted.len());
    for &id in accepted {
        slots.push(g.edge_slot_of(id).ok_or(EngineError::UnknownEdge(id))?);
    }
    slots.sort_unstable();
    for (i, &eslot) in slots.iter().enumerate() {
        let id = g.edges()[eslot].id;
        if !state.eligible[eslot] {
            return Err(EngineError::IneligibleAcceptance(id));
        }
        if i > 0 && slots[i - 1] == eslot {
            return Err(EngineError::IneligibleAcceptance(id));
        }
    }

    // verify all increments fit before touching anything
    let mut increments: BTreeMap<usize, u64> = BTreeMap::new();
    for &eslot in &slots {
        for &vslot in g.owner_slots_of(eslot) {
            *increments.entry(vslot).or_insert(0) += 1;
        }
    }
    for (&vslot, &inc) in &increments {
        let user = g.vertices()[vslot];
        let capacity = caps.get(user);
        let fits = state.d[vslot]
            .checked_add(inc)
            .is_some_and(|total| total <= capacity);
        if !fits {
            return Err(EngineError::CapacityViolation { user, capacity });
        }
    }

    let mut commit_messages = 0u64;
    for &eslot in &slots {
        state.eligible[eslot] = false;
        state.eligible_count -= 1;
        state.in_matching[eslot] = true;
        state.matched_count += 1;
        commit_messages += g.owner_slots_of(eslot).len() as u64;
    }
    let mut newly = Vec::new();
    for (&vslot, &inc) in &increments {
        state.d[vslot] += inc;
        let user = g.vertices()[vslot];
        if !state.saturated[vslot] && state.d[vslot] == caps.get(user) {
            state.saturated[vslot] = true;
            newly.push(vslot);
        }
    }
    // increments iterate in ascending slot order, so `newly` is ascending
    for &vslot in &newly {
        for &eslot in g.incident_slots(vslot) {
            if state.eligible[eslot] {
                state.eligible[eslot] = false;
                state.eligible_count -= 1;
            }
        }
    }
    state.round += 1;
    Ok(AppliedRound {
        newly_saturated: newly.into_iter().map(|v| g.vertices()[v]).collect(),
        commit_messages,
    })
}

/// Phase computations a round driver plugs in; the serial engine and the
/// sharded executor provide different implementations that must produce
/// identical results.
pub(crate) trait PhaseExecutor {
    fn proposals(
        &self,
        g: &Hypergraph,
        caps: &CapacityMap,
        state: &RoundState,
        keys: &[RankKey],
    ) -> ProposalMap;

    fn arbitrate(&self, g: &Hypergraph, state: &RoundState, props: &ProposalMap) -> Vec<EdgeId>;
}

pub(crate) struct SerialPhases;

impl PhaseExecutor for SerialPhases {
    fn proposals(
        &self,
        g: &Hypergraph,
        caps: &CapacityMap,
        state: &RoundState,
        keys: &[RankKey],
    ) -> ProposalMap {
        proposals_with_keys(g, caps, state, keys)
    }

    fn arbitrate(&self, g: &Hypergraph, state: &RoundState, props: &ProposalMap) -> Vec<EdgeId> {
        arbitrate(g, state, props)
    }
}

pub(crate) fn run_with(
    g: &Hypergraph,
    caps: &CapacityMap,
    config: &EngineConfig,
    phases: &dyn PhaseExecutor,
) -> Result<RunOutcome, EngineError> {
    config.validate()?;
    let keys = rank_all(g, &config.ordering)?;
    let mut state = init_state(g, caps);
    let mut trace = RoundTrace::default();
    while state.eligible_count > 0 {
        if let Some(max) = config.max_rounds {
            if state.round >= max {
                break;
            }
        }
        let props = phases.proposals(g, caps, &state, &keys);
        let proposal_messages = props.values().map(|list| list.len() as u64).sum();
        let accepted = phases.arbitrate(g, &state, &props);
        let applied = apply_accepted(g, caps, &mut state, &accepted)?;
        let stalled = accepted.is_empty();
        trace.rounds.push(RoundRecord {
            proposal_messages,
            accepted,
            newly_saturated: applied.newly_saturated,
            commit_messages: applied.commit_messages,
        });
        if stalled && config.early_stop {
            break;
        }
    }
    Ok(RunOutcome {
        matching: state.matching(g),
        trace,
        final_state: state,
    })
}

/// Runs the full round loop serially. The result is a pure function of
/// `(g, caps, config)`.
pub fn run(
    g: &Hypergraph,
    caps: &CapacityMap,
    config: &EngineConfig,
) -> Result<RunOutcome, EngineError> {
    run_with(g, caps, config, &SerialPhases)
}

/// Checks every state invariant against the graph and capacities. Used by
/// tests after each round and available as a defense-in-depth audit.
pub fn validate_state(
    g: &Hypergraph,
    caps: &CapacityMap,
    state: &RoundState,
) -> Result<(), StateViolation> {
    if state.d.len() != g.vertex_count() || state.eligible.len() != g.edge_count() {
        return Err(StateViolation::ShapeMismatch);
    }
    let mut recount = vec![0u64; g.vertex_count()];
    for eslot in 0..g.edge_count() {
        if state.in_matching[eslot] && state.eligible[eslot] {
            return Err(StateViolation::MatchedAndEligible {
                edge: g.edges()[eslot].id,
            });
        }
        if state.in_matching[eslot] {
            for &vslot in g.owner_slots_of(eslot) {
                recount[vslot] += 1;
            }
        }
        if state.eligible[eslot] {
            if let Some(&vslot) = g
                .owner_slots_of(eslot)
                .iter()
                .find(|&&v| state.saturated[v])
            {
                return Err(StateViolation::EligibleWithSaturatedOwner {
                    edge: g.edges()[eslot].id,
                    user: g.vertices()[vslot],
                });
            }
        }
    }
    for (vslot, &user) in g.vertices().iter().enumerate() {
        let capacity = caps.get(user);
        let matched = state.d[vslot];
        if matched > capacity {
            return Err(StateViolation::CapacityExceeded {
                user,
                matched,
                capacity,
            });
        }
        if state.saturated[vslot] != (matched == capacity) {
            return Err(StateViolation::SaturationFlag {
                user,
                flag: state.saturated[vslot],
                matched,
                capacity,
            });
        }
        if recount[vslot] != matched {
            return Err(StateViolation::CountDrift {
                user,
                tracked: matched,
                actual: recount[vslot],
            });
        }
    }
    let eligible_recount = state.eligible.iter().filter(|&&e| e).count();
    let matched_recount = state.in_matching.iter().filter(|&&m| m).count();
    if eligible_recount != state.eligible_count || matched_recount != state.matched_count {
        return Err(StateViolation::TotalsDrift);
    }
    Ok(())
}
