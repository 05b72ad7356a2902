//! Universal preference orders over hyperedges.
//!
//! Every user ranks edges with the same key, so the order is consistent
//! across users and across machines. The seeded hash order is the default;
//! weight-based ordering is available when edges carry weights.

use std::cmp::Ordering as CmpOrdering;

use thiserror::Error;

use crate::hypergraph::{EdgeId, Hyperedge, Hypergraph};

const ID_FOLD: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX_A: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX_B: u64 = 0x94D0_49BB_1331_11EB;

/// Seeded avalanche hash of an edge id.
///
/// The recipe is a format contract: reimplementations in other languages
/// must match bit-for-bit. With all arithmetic modulo 2^64:
///
/// ```text
/// x  = seed XOR (id * 0x9E3779B97F4A7C15)
/// x  = (x XOR (x >> 30)) * 0xBF58476D1CE4E5B9
/// x  = (x XOR (x >> 27)) * 0x94D049BB133111EB
/// out = x XOR (x >> 31)
/// ```
///
/// For a fixed seed this is a bijection on 64-bit values, so distinct edge
/// ids never collide.
#[inline]
pub fn mix64(seed: u64, id: u64) -> u64 {
    let mut x = seed ^ id.wrapping_mul(ID_FOLD);
    x = (x ^ (x >> 30)).wrapping_mul(MIX_A);
    x = (x ^ (x >> 27)).wrapping_mul(MIX_B);
    x ^ (x >> 31)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OrderingError {
    #[error("edge {0} has no weight but the ordering requires one")]
    MissingWeight(EdgeId),
}

/// A strict total order over edges, shared by all users.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingSpec {
    /// Seeded hash order: edge with the smallest [`mix64`] value first.
    UniversalRandom { seed: u64 },
    /// Heaviest edge first; weight ties fall back to the seeded hash, then
    /// to ascending edge id.
    WeightDescending { seed: u64 },
}

impl OrderingSpec {
    pub fn seed(&self) -> u64 {
        match *self {
            OrderingSpec::UniversalRandom { seed } => seed,
            OrderingSpec::WeightDescending { seed } => seed,
        }
    }

    /// Stable name used in CLI flags and summary files.
    pub fn kind_name(&self) -> &'static str {
        match self {
            OrderingSpec::UniversalRandom { .. } => "hash",
            OrderingSpec::WeightDescending { .. } => "weight",
        }
    }

    /// Sort key for one edge; lower key = more preferred. Pure function of
    /// the spec and the edge, independent of which user asks.
    pub fn rank(&self, edge: &Hyperedge) -> Result<RankKey, OrderingError> {
        let hash = mix64(self.seed(), edge.id.0);
        let primary = match self {
            OrderingSpec::UniversalRandom { .. } => hash,
            OrderingSpec::WeightDescending { .. } => {
                let w = edge.weight.ok_or(OrderingError::MissingWeight(edge.id))?;
                // non-negative finite doubles order by their bit pattern;
                // complementing flips to descending
                !w.to_bits()
            }
        };
        Ok(RankKey {
            primary,
            hash,
            tie_break: edge.id,
        })
    }

    /// Strict comparison of two distinct edges under this order.
    pub fn compare(&self, a: &Hyperedge, b: &Hyperedge) -> Result<CmpOrdering, OrderingError> {
        debug_assert_ne!(a.id, b.id, "compare requires distinct edges");
        Ok(self.rank(a)?.cmp(&self.rank(b)?))
    }
}

/// Composite sort key. Lower = more preferred ("top").
///
/// `primary` carries the hash (or the order-inverted weight bits), `hash`
/// breaks weight ties with the seeded hash, and `tie_break` is the edge id,
/// which is unique and therefore makes the order total even if the first
/// two components ever collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RankKey {
    pub primary: u64,
    pub hash: u64,
    pub tie_break: EdgeId,
}

/// Rank keys for every edge of `g`, parallel to `g.edges()`.
pub fn rank_all(g: &Hypergraph, spec: &OrderingSpec) -> Result<Vec<RankKey>, OrderingError> {
    g.edges().iter().map(|e| spec.rank(e)).collect()
}
