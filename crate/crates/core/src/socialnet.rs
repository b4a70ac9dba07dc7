//! The standardized social network: every sibling tie, a random subset of
//! first-cousin ties under a per-person relative cap, then homophily
//! friendships by ascending trait distance up to a total degree cap.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Adjacency;
use crate::kinship::CohortAncestry;
use crate::seed::SimRng;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NetworkError {
    #[error("network caps must satisfy 0 < relative_cap <= total_cap (got {relative_cap} / {total_cap})")]
    InvalidCaps { relative_cap: usize, total_cap: usize },
}

/// Per-member trait in degrees on `[0, 360)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TraitMap(pub Vec<f64>);

impl TraitMap {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        compass_distance(self.0[i], self.0[j])
    }
}

pub fn assign_traits(n: usize, rng: &mut SimRng) -> TraitMap {
    TraitMap((0..n).map(|_| rng.random_range(0.0..360.0)).collect())
}

/// Circular distance between two compass readings, in `[0, 180]`.
#[inline]
pub fn compass_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    if d > 180.0 {
        360.0 - d
    } else {
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkCaps {
    pub relative_cap: usize,
    pub total_cap: usize,
}

impl Default for NetworkCaps {
    fn default() -> Self {
        Self {
            relative_cap: 50,
            total_cap: 60,
        }
    }
}

impl NetworkCaps {
    pub fn validate(&self) -> Result<(), NetworkError> {
        if self.relative_cap == 0 || self.relative_cap > self.total_cap {
            return Err(NetworkError::InvalidCaps {
                relative_cap: self.relative_cap,
                total_cap: self.total_cap,
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Sibling,
    Cousin,
    Friend,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Sibling => "sibling",
            EdgeKind::Cousin => "cousin",
            EdgeKind::Friend => "friend",
        }
    }

    pub fn is_relative(self) -> bool {
        !matches!(self, EdgeKind::Friend)
    }
}

/// Pairs `(i, j)`, `i < j`, with identical parent pairs.
pub fn sibling_edges(ancestry: &CohortAncestry) -> Vec<(usize, usize)> {
    let mut by_parents: Vec<(_, usize)> = ancestry
        .parents
        .iter()
        .enumerate()
        .filter_map(|(i, p)| p.map(|p| (p, i)))
        .collect();
    by_parents.sort_unstable();
    let mut edges = Vec::new();
    for group in by_parents.chunk_by(|a, b| a.0 == b.0) {
        for (x, &(_, i)) in group.iter().enumerate() {
            for &(_, j) in &group[x + 1..] {
                edges.push((i.min(j), i.max(j)));
            }
        }
    }
    edges.sort_unstable();
    edges
}

/// Pairs whose grandparent slots overlap in exactly two entries.
pub fn cousin_edges(ancestry: &CohortAncestry) -> Vec<(usize, usize)> {
    pairs_with_grandparent_overlap(ancestry, |shared| shared == 2)
}

/// Pairs that share all four grandparent slots without being siblings.
/// Under the literal cousin rule these get no cousin edge; they are only
/// counted for diagnostics.
pub fn double_first_cousins(ancestry: &CohortAncestry) -> Vec<(usize, usize)> {
    pairs_with_grandparent_overlap(ancestry, |shared| shared == 4)
        .into_iter()
        .filter(|&(i, j)| !ancestry.are_siblings(i, j))
        .collect()
}

fn pairs_with_grandparent_overlap(ancestry: &CohortAncestry, keep: impl Fn(u8) -> bool) -> Vec<(usize, usize)> {
    let n = ancestry.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if keep(ancestry.shared_grandparents(i, j)) {
                edges.push((i, j));
            }
        }
    }
    edges
}

/// One visited pair of the friendship pass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FriendVisit {
    pub i: usize,
    pub j: usize,
    pub delta: f64,
    pub degree_i: usize,
    pub degree_j: usize,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardNetwork {
    pub adjacency: Adjacency,
    /// Every edge with `i < j`, lexicographically sorted.
    pub edges: Vec<(usize, usize, EdgeKind)>,
    pub relative_degree: Vec<usize>,
}

impl StandardNetwork {
    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn provenance(&self, i: usize, j: usize) -> Option<EdgeKind> {
        let key = (i.min(j), i.max(j));
        self.edges
            .binary_search_by(|&(a, b, _)| (a, b).cmp(&key))
            .ok()
            .map(|pos| self.edges[pos].2)
    }

    pub fn count(&self, kind: EdgeKind) -> usize {
        self.edges.iter().filter(|e| e.2 == kind).count()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        2.0 * self.edges.len() as f64 / self.len() as f64
    }
}

struct Builder {
    n: usize,
    present: Vec<bool>,
    neighbors: Vec<Vec<u32>>,
    relative: Vec<usize>,
    edges: Vec<(usize, usize, EdgeKind)>,
}

impl Builder {
    fn new(n: usize) -> Self {
        Self {
            n,
            present: vec![false; n * n],
            neighbors: vec![Vec::new(); n],
            relative: vec![0; n],
            edges: Vec::new(),
        }
    }

    fn has(&self, i: usize, j: usize) -> bool {
        self.present[i * self.n + j]
    }

    fn add(&mut self, i: usize, j: usize, kind: EdgeKind) {
        self.present[i * self.n + j] = true;
        self.present[j * self.n + i] = true;
        self.neighbors[i].push(j as u32);
        self.neighbors[j].push(i as u32);
        if kind.is_relative() {
            self.relative[i] += 1;
            self.relative[j] += 1;
        }
        self.edges.push((i.min(j), i.max(j), kind));
    }

    fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    fn finish(mut self) -> StandardNetwork {
        self.edges.sort_unstable_by_key(|&(i, j, _)| (i, j));
        StandardNetwork {
            adjacency: Adjacency::from_neighbor_lists(self.neighbors),
            edges: self.edges,
            relative_degree: self.relative,
        }
    }
}

/// Three-step construction of the standardized network.
///
/// `rng` drives only the cousin order. Friend pairs are visited by ascending
/// trait distance with ties broken by `(i, j)`.
pub fn build_standard_network(
    ancestry: &CohortAncestry,
    traits: &TraitMap,
    caps: NetworkCaps,
    rng: &mut SimRng,
) -> Result<StandardNetwork, NetworkError> {
    build_standard_network_traced(ancestry, traits, caps, rng, None)
}

pub fn build_standard_network_traced(
    ancestry: &CohortAncestry,
    traits: &TraitMap,
    caps: NetworkCaps,
    rng: &mut SimRng,
    mut trace: Option<&mut Vec<FriendVisit>>,
) -> Result<StandardNetwork, NetworkError> {
    caps.validate()?;
    let n = ancestry.len();
    assert_eq!(traits.len(), n, "one trait per cohort member");
    let mut net = Builder::new(n);

    for (i, j) in sibling_edges(ancestry) {
        net.add(i, j, EdgeKind::Sibling);
    }

    let mut cousins = cousin_edges(ancestry);
    cousins.shuffle(rng);
    for (i, j) in cousins {
        if net.relative[i] < caps.relative_cap && net.relative[j] < caps.relative_cap {
            net.add(i, j, EdgeKind::Cousin);
        }
    }

    // Non-negative doubles order the same way as their bit patterns.
    let mut pairs: Vec<(u64, u32, u32)> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if !net.has(i, j) {
                pairs.push((traits.distance(i, j).to_bits(), i as u32, j as u32));
            }
        }
    }
    pairs.sort_unstable();

    let mut open = (0..n).filter(|&i| net.degree(i) < caps.total_cap).count();
    for (bits, i, j) in pairs {
        if open < 2 && trace.is_none() {
            break;
        }
        let (i, j) = (i as usize, j as usize);
        let (di, dj) = (net.degree(i), net.degree(j));
        let accepted = di < caps.total_cap && dj < caps.total_cap;
        if let Some(t) = trace.as_deref_mut() {
            t.push(FriendVisit {
                i,
                j,
                delta: f64::from_bits(bits),
                degree_i: di,
                degree_j: dj,
                accepted,
            });
        }
        if accepted {
            net.add(i, j, EdgeKind::Friend);
            open -= usize::from(di + 1 == caps.total_cap) + usize::from(dj + 1 == caps.total_cap);
        }
    }

    Ok(net.finish())
}
