//! Undirected simple graphs over cohort indices and common-neighbour counts.

/// Symmetric adjacency with sorted neighbour lists and no self loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adjacency {
    neighbors: Vec<Vec<u32>>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            neighbors: vec![Vec::new(); n],
        }
    }

    /// Builds from an undirected edge list. Self loops are dropped and
    /// duplicate edges collapse.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        for (i, j) in edges {
            assert!(i < n && j < n, "edge ({i}, {j}) out of range for n = {n}");
            if i == j {
                continue;
            }
            neighbors[i].push(j as u32);
            neighbors[j].push(i as u32);
        }
        Self::from_neighbor_lists(neighbors)
    }

    pub(crate) fn from_neighbor_lists(mut neighbors: Vec<Vec<u32>>) -> Self {
        for list in &mut neighbors {
            list.sort_unstable();
            list.dedup();
        }
        Self { neighbors }
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.neighbors[i].binary_search(&(j as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(i, list)| {
            list.iter()
                .map(|&j| j as usize)
                .filter(move |&j| j > i)
                .map(move |j| (i, j))
        })
    }

    /// True when every stored edge has its mirror and no node lists itself.
    pub fn is_symmetric_without_loops(&self) -> bool {
        self.neighbors.iter().enumerate().all(|(i, list)| {
            list.iter()
                .all(|&j| j as usize != i && self.has_edge(j as usize, i))
        })
    }

    /// Relabels nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut neighbors = vec![Vec::new(); self.len()];
        for (i, list) in self.neighbors.iter().enumerate() {
            neighbors[perm[i]] = list.iter().map(|&j| perm[j as usize] as u32).collect();
        }
        Self::from_neighbor_lists(neighbors)
    }
}

/// Dense symmetric matrix of common-neighbour counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharedContactMatrix {
    n: usize,
    counts: Vec<u16>,
}

impl SharedContactMatrix {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u16 {
        self.counts[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[u16] {
        &self.counts[i * self.n..(i + 1) * self.n]
    }
}

/// `c[i][j] = sum_k a[i][k] * a[j][k]`, evaluated by enumerating the
/// neighbour pairs of every node. The diagonal holds the degree and is
/// never read by the analyses.
pub fn shared_contacts(adjacency: &Adjacency) -> SharedContactMatrix {
    let n = adjacency.len();
    let mut counts = vec![0u16; n * n];
    for k in 0..n {
        let list = adjacency.neighbors(k);
        for (x, &i) in list.iter().enumerate() {
            let row = i as usize * n;
            for &j in &list[x + 1..] {
                counts[row + j as usize] += 1;
            }
        }
    }
    for i in 0..n {
        counts[i * n + i] = adjacency.degree(i) as u16;
        for j in (i + 1)..n {
            counts[j * n + i] = counts[i * n + j];
        }
    }
    SharedContactMatrix { n, counts }
}

/// Common neighbours of one pair by merging the two sorted neighbour lists.
/// Agrees with [`shared_contacts`] entry for entry.
pub fn common_neighbors(adjacency: &Adjacency, i: usize, j: usize) -> u16 {
    let (a, b) = (adjacency.neighbors(i), adjacency.neighbors(j));
    let (mut x, mut y, mut count) = (0, 0, 0u16);
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
