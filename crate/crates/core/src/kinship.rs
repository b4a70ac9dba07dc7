//! Ancestor slots, shared great-great-grandparent counts, the primary kin
//! network and its shared-contact counts.
//!
//! Ancestry is tracked as slot vectors: depth 1 holds the two parents, depth 2
//! the four grandparents and depth 4 the sixteen great-great-grandparents, in
//! canonical order (mother side before father side at every level). Slots keep
//! their multiplicity, so an inbred pedigree can list the same ancestor twice.
//! Beyond the founder generation the slots are filled with virtual ancestors
//! derived from `(founder, path)`, which keeps founders mutually unrelated.

use crate::demography::{Agent, AgentId, Cohort, PopulationHistory};
use crate::graph::Adjacency;

pub use crate::graph::{common_neighbors, shared_contacts, SharedContactMatrix};

/// Minimum shared great-great-grandparent count for a primary kin edge.
pub const PRIMARY_KIN_THRESHOLD: u8 = 8;

pub const MAX_DEPTH: u32 = 4;

const VIRTUAL_BIT: u64 = 1 << 63;
const PATH_BITS: u32 = 8;

/// A slot entry: either a real agent or a virtual ancestor of a founder.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AncestorId(u64);

impl AncestorId {
    pub fn real(id: AgentId) -> Self {
        AncestorId(u64::from(id.0))
    }

    /// `path` is a bit string prefixed by a leading 1; each following bit
    /// picks the mother (0) or father (1) one step further back.
    fn virtual_of(founder: AgentId, path: u64) -> Self {
        AncestorId(VIRTUAL_BIT | (u64::from(founder.0) << PATH_BITS) | path)
    }

    pub fn is_virtual(self) -> bool {
        self.0 & VIRTUAL_BIT != 0
    }

    pub fn agent(self) -> Option<AgentId> {
        (!self.is_virtual()).then_some(AgentId(self.0 as u32))
    }
}

#[derive(Clone, Copy)]
enum Node {
    Real(AgentId),
    Virtual(AgentId, u64),
}

fn collect_slots(agents: &[Agent], node: Node, depth: u32, out: &mut Vec<AncestorId>) {
    if depth == 0 {
        out.push(match node {
            Node::Real(id) => AncestorId::real(id),
            Node::Virtual(f, path) => AncestorId::virtual_of(f, path),
        });
        return;
    }
    let (mother, father) = match node {
        Node::Real(id) => match agents[id.index()].parents() {
            Some((m, f)) => (Node::Real(m), Node::Real(f)),
            None => (Node::Virtual(id, 0b10), Node::Virtual(id, 0b11)),
        },
        Node::Virtual(f, path) => (Node::Virtual(f, path << 1), Node::Virtual(f, (path << 1) | 1)),
    };
    collect_slots(agents, mother, depth - 1, out);
    collect_slots(agents, father, depth - 1, out);
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AncestorVector {
    pub depth: u32,
    /// Exactly `2^depth` entries in canonical order.
    pub slots: Vec<AncestorId>,
}

impl AncestorVector {
    pub fn distinct(&self) -> usize {
        let mut s = self.slots.clone();
        s.sort_unstable();
        s.dedup();
        s.len()
    }

    pub fn sorted(&self) -> Vec<AncestorId> {
        let mut s = self.slots.clone();
        s.sort_unstable();
        s
    }
}

pub fn slots_in(agents: &[Agent], id: AgentId, depth: u32) -> AncestorVector {
    assert!((1..=MAX_DEPTH).contains(&depth), "depth must be in 1..=4");
    let mut slots = Vec::with_capacity(1 << depth);
    collect_slots(agents, Node::Real(id), depth, &mut slots);
    AncestorVector { depth, slots }
}

pub(crate) fn sorted_slots_in(agents: &[Agent], id: AgentId, depth: u32) -> Vec<AncestorId> {
    slots_in(agents, id, depth).sorted()
}

pub fn ancestor_slots(history: &PopulationHistory, id: AgentId, depth: u32) -> AncestorVector {
    slots_in(&history.agents, id, depth)
}

/// Multiset intersection size of two sorted slot lists.
pub fn multiset_intersection(a: &[AncestorId], b: &[AncestorId]) -> usize {
    let (mut x, mut y, mut count) = (0, 0, 0);
    while x < a.len() && y < b.len() {
        match a[x].cmp(&b[y]) {
            std::cmp::Ordering::Less => x += 1,
            std::cmp::Ordering::Greater => y += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                x += 1;
                y += 1;
            }
        }
    }
    count
}

pub fn shared_ancestor_count(history: &PopulationHistory, i: AgentId, j: AgentId, depth: u32) -> usize {
    let a = ancestor_slots(history, i, depth).sorted();
    let b = ancestor_slots(history, j, depth).sorted();
    multiset_intersection(&a, &b)
}

/// Sorted grandparent and great-great-grandparent slots of every cohort
/// member, indexed by cohort position.
#[derive(Clone, Debug)]
pub struct CohortAncestry {
    pub parents: Vec<Option<(AgentId, AgentId)>>,
    pub grandparents: Vec<[AncestorId; 4]>,
    pub gggp: Vec<[AncestorId; 16]>,
}

impl CohortAncestry {
    pub fn new(cohort: &Cohort, history: &PopulationHistory) -> Self {
        let mut parents = Vec::with_capacity(cohort.len());
        let mut grandparents = Vec::with_capacity(cohort.len());
        let mut gggp = Vec::with_capacity(cohort.len());
        for &id in &cohort.members {
            parents.push(history.agent(id).parents());
            let g2 = sorted_slots_in(&history.agents, id, 2);
            let g4 = sorted_slots_in(&history.agents, id, 4);
            grandparents.push(g2.try_into().expect("four grandparent slots"));
            gggp.push(g4.try_into().expect("sixteen great-great-grandparent slots"));
        }
        Self {
            parents,
            grandparents,
            gggp,
        }
    }

    pub fn len(&self) -> usize {
        self.gggp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gggp.is_empty()
    }

    pub fn shared_gggp(&self, i: usize, j: usize) -> u8 {
        multiset_intersection(&self.gggp[i], &self.gggp[j]) as u8
    }

    pub fn shared_grandparents(&self, i: usize, j: usize) -> u8 {
        multiset_intersection(&self.grandparents[i], &self.grandparents[j]) as u8
    }

    pub fn are_siblings(&self, i: usize, j: usize) -> bool {
        i != j && self.parents[i].is_some() && self.parents[i] == self.parents[j]
    }
}

/// Dense symmetric matrix of shared great-great-grandparent counts (0..=16)
/// with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelatednessMatrix {
    n: usize,
    values: Vec<u8>,
}

impl RelatednessMatrix {
    pub fn from_ancestry(ancestry: &CohortAncestry) -> Self {
        let n = ancestry.len();
        let mut values = vec![0u8; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = ancestry.shared_gggp(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self { n, values }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.values[i * self.n..(i + 1) * self.n]
    }
}

pub fn relatedness_matrix(cohort: &Cohort, history: &PopulationHistory) -> RelatednessMatrix {
    RelatednessMatrix::from_ancestry(&CohortAncestry::new(cohort, history))
}

/// Edge `(i, j)` iff `r[i][j] >= threshold`.
pub fn kin_network(relatedness: &RelatednessMatrix, threshold: u8) -> Adjacency {
    let n = relatedness.len();
    let neighbors = (0..n)
        .map(|i| {
            relatedness
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, &v)| j != i && v >= threshold)
                .map(|(j, _)| j as u32)
                .collect()
        })
        .collect();
    Adjacency::from_neighbor_lists(neighbors)
}

/// The primary kin network: siblings, first cousins and anyone else sharing
/// at least eight great-great-grandparents.
pub fn build_primary_kin_network(cohort: &Cohort, history: &PopulationHistory) -> Adjacency {
    kin_network(&relatedness_matrix(cohort, history), PRIMARY_KIN_THRESHOLD)
}

#[cfg(test)]
pub(crate) mod testing {
    use crate::demography::{Agent, AgentId, Gender, PopulationHistory};

    /// Hand-built pedigrees. Parents must be added before their children.
    #[derive(Default)]
    pub struct PedigreeBuilder {
        agents: Vec<Agent>,
    }

    impl PedigreeBuilder {
        pub fn new() -> Self {
            Self::default()
        }

        pub fn from_history(history: &PopulationHistory) -> Self {
            Self {
                agents: history.agents.clone(),
            }
        }

        pub fn founder(&mut self, gender: Gender) -> AgentId {
            let id = AgentId(self.agents.len() as u32);
            self.agents.push(Agent {
                id,
                generation: 1,
                gender,
                mother: None,
                father: None,
            });
            id
        }

        pub fn couple(&mut self) -> (AgentId, AgentId) {
            (self.founder(Gender::Female), self.founder(Gender::Male))
        }

        pub fn child(&mut self, mother: AgentId, father: AgentId, gender: Gender) -> AgentId {
            let id = AgentId(self.agents.len() as u32);
            let generation = self.agents[mother.index()].generation + 1;
            self.agents.push(Agent {
                id,
                generation,
                gender,
                mother: Some(mother),
                father: Some(father),
            });
            id
        }

        /// An agent in `generation` whose ancestry shares nobody with the rest.
        pub fn fresh(&mut self, generation: u32, gender: Gender) -> AgentId {
            if generation == 1 {
                return self.founder(gender);
            }
            let m = self.fresh(generation - 1, Gender::Female);
            let f = self.fresh(generation - 1, Gender::Male);
            self.child(m, f, gender)
        }

        /// An unrelated spouse in the same generation as `of`.
        pub fn spouse_for(&mut self, of: AgentId, gender: Gender) -> AgentId {
            let g = self.agents[of.index()].generation;
            self.fresh(g, gender)
        }

        pub fn build(self) -> PopulationHistory {
            PopulationHistory::from_agents(self.agents, 3.0, 0).expect("valid pedigree")
        }
    }
}
