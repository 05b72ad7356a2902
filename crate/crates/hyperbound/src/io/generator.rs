//! Synthetic hypergraph generation, deterministic in the seed.
//!
//! The pseudo-random stream is counter-mode [`mix64`]: value `i` of a run
//! is `mix64(seed, i)`. That keeps reproducibility on a single primitive
//! shared with the ordering code.

use thiserror::Error;

use crate::hypergraph::{EdgeId, Hypergraph, VertexId};
use crate::ordering::mix64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("edge size {size} exceeds the user count {users}")]
    Unsatisfiable { size: usize, users: u64 },
}

/// How many owners each edge gets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeSizeModel {
    Fixed(usize),
    /// Sizes `1..=max_size` with probability proportional to `size^-exponent`.
    Zipf { exponent: f64, max_size: usize },
}

/// How owners are drawn for an edge (always without replacement within it).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OwnerPopularity {
    Uniform,
    /// User `u` (0-based) drawn proportional to `(u+1)^-exponent`.
    Zipf { exponent: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub users: u64,
    pub edges: u64,
    pub edge_size: EdgeSizeModel,
    pub popularity: OwnerPopularity,
    pub seed: u64,
}

/// Generates users `0..users` and edges `0..edges`. The same spec always
/// yields the same graph, including users that end up owning nothing.
pub fn generate(spec: &GeneratorSpec) -> Result<Hypergraph, GenerateError> {
    validate_spec(spec)?;
    let n = spec.users;
    let mut stream = Mix64Stream::new(spec.seed);

    let size_table = match spec.edge_size {
        EdgeSizeModel::Fixed(_) => None,
        EdgeSizeModel::Zipf { exponent, max_size } => {
            Some(CumulativeTable::zipf(exponent, max_size))
        }
    };
    let mut popularity = match spec.popularity {
        OwnerPopularity::Uniform => None,
        OwnerPopularity::Zipf { exponent } => Some(FenwickWeights::zipf(exponent, n as usize)),
    };

    let mut edges = Vec::with_capacity(spec.edges as usize);
    for edge_id in 0..spec.edges {
        let size = match spec.edge_size {
            EdgeSizeModel::Fixed(k) => k,
            EdgeSizeModel::Zipf { .. } => {
                size_table.as_ref().expect("table built above").draw(&mut stream)
            }
        };
        let owners = match &mut popularity {
            None => draw_uniform_distinct(&mut stream, n, size),
            Some(fenwick) => fenwick.draw_distinct(&mut stream, size),
        };
        edges.push((EdgeId(edge_id), owners, None));
    }

    Hypergraph::build_with_vertices(edges, (0..n).map(VertexId))
        .map_err(|e| GenerateError::InvalidSpec(format!("generated graph rejected: {e}")))
}

fn validate_spec(spec: &GeneratorSpec) -> Result<(), GenerateError> {
    if spec.users == 0 {
        return Err(GenerateError::InvalidSpec("users must be at least 1".into()));
    }
    let max_size = match spec.edge_size {
        EdgeSizeModel::Fixed(k) => {
            if k == 0 {
                return Err(GenerateError::InvalidSpec("edge size must be at least 1".into()));
            }
            k
        }
        EdgeSizeModel::Zipf { exponent, max_size } => {
            if max_size == 0 {
                return Err(GenerateError::InvalidSpec("max edge size must be at least 1".into()));
            }
            if !exponent.is_finite() || exponent < 0.0 {
                return Err(GenerateError::InvalidSpec(
                    "edge size exponent must be finite and non-negative".into(),
                ));
            }
            max_size
        }
    };
    if (max_size as u64) > spec.users {
        return Err(GenerateError::Unsatisfiable {
            size: max_size,
            users: spec.users,
        });
    }
    if let OwnerPopularity::Zipf { exponent } = spec.popularity {
        if !exponent.is_finite() || exponent < 0.0 {
            return Err(GenerateError::InvalidSpec(
                "popularity exponent must be finite and non-negative".into(),
            ));
        }
    }
    Ok(())
}

/// Counter-mode stream over `mix64`.
struct Mix64Stream {
    seed: u64,
    counter: u64,
}

impl Mix64Stream {
    fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    fn next_u64(&mut self) -> u64 {
        let value = mix64(self.seed, self.counter);
        self.counter += 1;
        value
    }

    /// Unbiased uniform draw from `0..n` by rejection.
    fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        // reject the top partial block of the 64-bit range
        let residue = (u64::MAX % n).wrapping_add(1) % n;
        loop {
            let x = self.next_u64();
            if residue == 0 || x < u64::MAX - residue + 1 {
                return x % n;
            }
        }
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn draw_uniform_distinct(stream: &mut Mix64Stream, n: u64, size: usize) -> Vec<VertexId> {
    debug_assert!(size as u64 <= n);
    if size as u64 == n {
        return (0..n).map(VertexId).collect();
    }
    let mut owners: Vec<VertexId> = Vec::with_capacity(size);
    while owners.len() < size {
        let candidate = VertexId(stream.next_below(n));
        if !owners.contains(&candidate) {
            owners.push(candidate);
        }
    }
    owners
}

/// Cumulative distribution over `1..=max` for inverse-CDF sampling.
struct CumulativeTable {
    cumulative: Vec<f64>,
}

impl CumulativeTable {
    fn zipf(exponent: f64, max: usize) -> Self {
        let mut cumulative = Vec::with_capacity(max);
        let mut total = 0.0;
        for value in 1..=max {
            total += (value as f64).powf(-exponent);
            cumulative.push(total);
        }
        Self { cumulative }
    }

    fn draw(&self, stream: &mut Mix64Stream) -> usize {
        let total = *self.cumulative.last().expect("non-empty table");
        let target = stream.next_unit() * total;
        let idx = self.cumulative.partition_point(|&c| c <= target);
        idx.min(self.cumulative.len() - 1) + 1
    }
}

/// Fenwick tree over per-user weights for exact weighted sampling without
/// replacement: a drawn user's weight is removed and restored after the
/// edge is complete.
struct FenwickWeights {
    tree: Vec<f64>,
    weights: Vec<f64>,
    total: f64,
}

impl FenwickWeights {
    fn zipf(exponent: f64, n: usize) -> Self {
        let weights: Vec<f64> = (0..n).map(|u| ((u + 1) as f64).powf(-exponent)).collect();
        let mut fenwick = Self {
            tree: vec![0.0; n + 1],
            weights: vec![0.0; n],
            total: 0.0,
        };
        for (u, &w) in weights.iter().enumerate() {
            fenwick.add(u, w);
        }
        fenwick
    }

    fn add(&mut self, index: usize, delta: f64) {
        self.weights[index] += delta;
        self.total += delta;
        let mut i = index + 1;
        while i < self.tree.len() {
            self.tree[i] += delta;
            i += i & i.wrapping_neg();
        }
    }

    /// Smallest index whose cumulative weight exceeds `target`.
    fn locate(&self, mut target: f64) -> usize {
        let n = self.weights.len();
        let mut pos = 0usize;
        let mut step = n.next_power_of_two();
        while step > 0 {
            let next = pos + step;
            if next < self.tree.len() && self.tree[next] <= target {
                target -= self.tree[next];
                pos = next;
            }
            step >>= 1;
        }
        pos.min(n - 1)
    }

    fn draw_distinct(&mut self, stream: &mut Mix64Stream, size: usize) -> Vec<VertexId> {
        debug_assert!(size <= self.weights.len());
        let mut drawn: Vec<(usize, f64)> = Vec::with_capacity(size);
        for _ in 0..size {
            let target = stream.next_unit() * self.total;
            let mut pos = self.locate(target);
            // float rounding can land on an already-removed slot; take the
            // nearest live one deterministically
            if self.weights[pos] == 0.0 {
                pos = (0..self.weights.len())
                    .map(|offset| (pos + offset) % self.weights.len())
                    .find(|&p| self.weights[p] > 0.0)
                    .expect("size <= live users");
            }
            let weight = self.weights[pos];
            self.add(pos, -weight);
            drawn.push((pos, weight));
        }
        // restore the removed weights for the next edge
        for &(user, weight) in &drawn {
            self.add(user, weight);
        }
        drawn
            .into_iter()
            .map(|(user, _)| VertexId(user as u64))
            .collect()
    }
}
