//! Ownership hypergraph: users are vertices, records are hyperedges.
//!
//! A [`Hypergraph`] is immutable once built. Construction canonicalizes every
//! edge's owner list into a sorted set and builds a per-vertex incidence index,
//! so lookups during matching never have to scan the whole edge collection.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifies a user. Ids are arbitrary and need not be contiguous.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u64);

/// Identifies a record. Two edges with identical owner sets but distinct ids
/// are distinct parallel edges and count separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u64);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u64> for VertexId {
    fn from(id: u64) -> Self {
        VertexId(id)
    }
}

impl From<u64> for EdgeId {
    fn from(id: u64) -> Self {
        EdgeId(id)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(EdgeId),
    #[error("edge {0} has an empty owner list")]
    EmptyOwnerList(EdgeId),
    #[error("edge {0} has a weight that is negative or not finite")]
    InvalidWeight(EdgeId),
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
}

/// A record together with the set of users that own it.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperedge {
    pub id: EdgeId,
    owners: Vec<VertexId>,
    /// Optional preference weight; only the weight-based ordering reads it.
    pub weight: Option<f64>,
}

impl Hyperedge {
    /// Canonicalizes the owner list (sorted, duplicates collapsed) and
    /// validates the weight. Ownerless edges are rejected: an edge nobody
    /// owns can never be proposed, so accepting one silently would hide a
    /// data problem.
    pub fn new(
        id: EdgeId,
        mut owners: Vec<VertexId>,
        weight: Option<f64>,
    ) -> Result<Self, HypergraphError> {
        owners.sort_unstable();
        owners.dedup();
        if owners.is_empty() {
            return Err(HypergraphError::EmptyOwnerList(id));
        }
        let weight = match weight {
            Some(w) if !w.is_finite() || w < 0.0 => {
                return Err(HypergraphError::InvalidWeight(id))
            }
            // normalize -0.0 so weight bits order consistently
            Some(w) => Some(if w == 0.0 { 0.0 } else { w }),
            None => None,
        };
        Ok(Self { id, owners, weight })
    }

    /// Owners in ascending id order, without duplicates.
    pub fn owners(&self) -> &[VertexId] {
        &self.owners
    }
}

/// Per-user matching budget b(u): a default plus sparse per-user overrides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityMap {
    default: u64,
    overrides: BTreeMap<VertexId, u64>,
}

impl CapacityMap {
    /// Every user gets the same budget.
    pub fn uniform(default: u64) -> Self {
        Self {
            default,
            overrides: BTreeMap::new(),
        }
    }

    pub fn with_overrides(default: u64, overrides: BTreeMap<VertexId, u64>) -> Self {
        Self { default, overrides }
    }

    pub fn set(&mut self, user: VertexId, capacity: u64) {
        self.overrides.insert(user, capacity);
    }

    /// Budget for `user`: the override if present, otherwise the default.
    pub fn get(&self, user: VertexId) -> u64 {
        self.overrides.get(&user).copied().unwrap_or(self.default)
    }

    pub fn default_capacity(&self) -> u64 {
        self.default
    }

    pub fn overrides(&self) -> &BTreeMap<VertexId, u64> {
        &self.overrides
    }
}

/// Finding from [`Hypergraph::validate`]. These are advisory; none of them
/// stops a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnostic {
    /// The edge can never be matched because one of its owners has budget 0.
    UnmatchableEdge { edge: EdgeId, user: VertexId },
    /// A capacity override names a vertex that owns no edges.
    UnusedOverride { user: VertexId },
    /// A capacity override names a vertex absent from the graph.
    UnknownOverride { user: VertexId },
    /// The incidence index and an edge's owner set disagree.
    IncidenceMismatch { user: VertexId, edge: EdgeId },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnmatchableEdge { edge, user } => {
                write!(f, "edge {edge} unmatchable via user {user} (capacity 0)")
            }
            Diagnostic::UnusedOverride { user } => {
                write!(f, "capacity override for user {user} matches no edges")
            }
            Diagnostic::UnknownOverride { user } => {
                write!(f, "capacity override for user {user} names an unknown vertex")
            }
            Diagnostic::IncidenceMismatch { user, edge } => {
                write!(f, "incidence index mismatch between user {user} and edge {edge}")
            }
        }
    }
}

/// Immutable ownership hypergraph with a per-vertex incidence index.
///
/// Edges are stored in ascending id order and owner lists in ascending
/// vertex order, so iteration order is canonical everywhere. The structure
/// is read-only after `build` and safe to share across worker threads.
#[derive(Debug, Clone)]
pub struct Hypergraph {
    vertices: Vec<VertexId>,
    edges: Vec<Hyperedge>,
    vertex_slot: HashMap<VertexId, usize>,
    edge_slot: HashMap<EdgeId, usize>,
    owner_start: Vec<usize>,
    owner_slots: Vec<usize>,
    incidence_start: Vec<usize>,
    incidence: Vec<usize>,
}

impl PartialEq for Hypergraph {
    fn eq(&self, other: &Self) -> bool {
        // indexes are derived from these two
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Hypergraph {
    /// Builds a graph from `(edge id, owners, weight)` triples. The vertex
    /// set is the union of all owners plus any users named in `caps`
    /// overrides, so an override for an edge-less user still creates that
    /// vertex.
    pub fn build(
        edges: Vec<(EdgeId, Vec<VertexId>, Option<f64>)>,
        caps: &CapacityMap,
    ) -> Result<Self, HypergraphError> {
        Self::build_with_vertices(edges, caps.overrides().keys().copied())
    }

    /// Like [`Hypergraph::build`] but with an explicit set of extra vertices
    /// to include even when they own nothing (used by the synthetic
    /// generator, where the full user population matters for statistics).
    pub fn build_with_vertices(
        edge_inputs: Vec<(EdgeId, Vec<VertexId>, Option<f64>)>,
        extra_vertices: impl IntoIterator<Item = VertexId>,
    ) -> Result<Self, HypergraphError> {
        let mut edges = Vec::with_capacity(edge_inputs.len());
        for (id, owners, weight) in edge_inputs {
            edges.push(Hyperedge::new(id, owners, weight)?);
        }
        edges.sort_unstable_by_key(|e| e.id);
        for pair in edges.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(HypergraphError::DuplicateEdgeId(pair[1].id));
            }
        }

        let mut vertices: Vec<VertexId> = edges
            .iter()
            .flat_map(|e| e.owners().iter().copied())
            .chain(extra_vertices)
            .collect();
        vertices.sort_unstable();
        vertices.dedup();

        let vertex_slot: HashMap<VertexId, usize> = vertices
            .iter()
            .enumerate()
            .map(|(slot, &v)| (v, slot))
            .collect();
        let edge_slot: HashMap<EdgeId, usize> = edges
            .iter()
            .enumerate()
            .map(|(slot, e)| (e.id, slot))
            .collect();

        let mut owner_start = Vec::with_capacity(edges.len() + 1);
        owner_start.push(0);
        let mut owner_slots = Vec::new();
        for edge in &edges {
            for owner in edge.owners() {
                owner_slots.push(vertex_slot[owner]);
            }
            owner_start.push(owner_slots.len());
        }

        // counting sort; edge slots stay ascending within each vertex
        let mut incidence_start = vec![0usize; vertices.len() + 1];
        for &v in &owner_slots {
            incidence_start[v + 1] += 1;
        }
        for v in 0..vertices.len() {
            incidence_start[v + 1] += incidence_start[v];
        }
        let mut cursor = incidence_start.clone();
        let mut incidence = vec![0usize; owner_slots.len()];
        for (eslot, edge) in edges.iter().enumerate() {
            for owner in edge.owners() {
                let v = vertex_slot[owner];
                incidence[cursor[v]] = eslot;
                cursor[v] += 1;
            }
        }

        Ok(Self {
            vertices,
            edges,
            vertex_slot,
            edge_slot,
            owner_start,
            owner_slots,
            incidence_start,
            incidence,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// All vertices, ascending.
    pub fn vertices(&self) -> &[VertexId] {
        &self.vertices
    }

    /// All edges, ascending by id.
    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn contains_vertex(&self, user: VertexId) -> bool {
        self.vertex_slot.contains_key(&user)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Hyperedge> {
        self.edge_slot.get(&id).map(|&slot| &self.edges[slot])
    }

    /// Number of edges incident to `user`.
    pub fn degree(&self, user: VertexId) -> Result<usize, HypergraphError> {
        let slot = self
            .vertex_slot
            .get(&user)
            .copied()
            .ok_or(HypergraphError::UnknownVertex(user))?;
        Ok(self.incidence_start[slot + 1] - self.incidence_start[slot])
    }

    /// Sanity-checks an instance against a capacity map. An empty result
    /// means clean; findings never stop a run.
    pub fn validate(&self, caps: &CapacityMap) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        for edge in &self.edges {
            for &user in edge.owners() {
                if caps.get(user) == 0 {
                    out.push(Diagnostic::UnmatchableEdge { edge: edge.id, user });
                }
            }
        }
        for &user in caps.overrides().keys() {
            match self.vertex_slot.get(&user) {
                None => out.push(Diagnostic::UnknownOverride { user }),
                Some(&slot) if self.incidence_start[slot + 1] == self.incidence_start[slot] => {
                    out.push(Diagnostic::UnusedOverride { user });
                }
                Some(_) => {}
            }
        }
        // full cross-scan of the two index directions
        for (eslot, edge) in self.edges.iter().enumerate() {
            for &user in edge.owners() {
                let found = self.vertex_slot.get(&user).is_some_and(|&v| {
                    self.incident_slots(v).contains(&eslot)
                });
                if !found {
                    out.push(Diagnostic::IncidenceMismatch { user, edge: edge.id });
                }
            }
        }
        for (vslot, &user) in self.vertices.iter().enumerate() {
            for &eslot in self.incident_slots(vslot) {
                if !self.edges[eslot].owners().contains(&user) {
                    out.push(Diagnostic::IncidenceMismatch {
                        user,
                        edge: self.edges[eslot].id,
                    });
                }
            }
        }
        out
    }

    pub(crate) fn vertex_slot_of(&self, user: VertexId) -> Option<usize> {
        self.vertex_slot.get(&user).copied()
    }

    pub(crate) fn edge_slot_of(&self, id: EdgeId) -> Option<usize> {
        self.edge_slot.get(&id).copied()
    }

    /// Owner vertex slots of the edge at `eslot`, ascending.
    pub(crate) fn owner_slots_of(&self, eslot: usize) -> &[usize] {
        &self.owner_slots[self.owner_start[eslot]..self.owner_start[eslot + 1]]
    }

    /// Edge slots incident to the vertex at `vslot`, ascending.
    pub(crate) fn incident_slots(&self, vslot: usize) -> &[usize] {
        &self.incidence[self.incidence_start[vslot]..self.incidence_start[vslot + 1]]
    }
}
