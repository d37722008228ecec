use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for {n} vertices")]
    OutOfRange { vertex: usize, n: usize },
    #[error("duplicate edge ({0}, {1})")]
    Duplicate(usize, usize),
}

/// Simple undirected graph on vertices `0..n`. Edges are stored as `(u, v)` with `u < v`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            edges: BTreeSet::new(),
        }
    }

    /// Build from an edge list; duplicates (in either orientation) are rejected.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, GraphError> {
        let mut g = Self::new(n);
        for (u, v) in edges {
            if !g.add_edge(u, v)? {
                return Err(GraphError::Duplicate(u.min(v), u.max(v)));
            }
        }
        Ok(g)
    }

    /// Returns `false` if the edge was already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        for vertex in [u, v] {
            if vertex >= self.n {
                return Err(GraphError::OutOfRange { vertex, n: self.n });
            }
        }
        Ok(self.edges.insert((u.min(v), u.max(v))))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&(u.min(v), u.max(v)))
    }

    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        adj
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.edges.insert((u, v));
            }
        }
        g
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            let v = (u + 1) % n;
            if u != v {
                g.edges.insert((u.min(v), u.max(v)));
            }
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Self::new(n);
        for u in 1..n {
            g.edges.insert((u - 1, u));
        }
        g
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut g = Self::new(a + b);
        for u in 0..a {
            for v in a..a + b {
                g.edges.insert((u, v));
            }
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_loops_duplicates_and_range() {
        assert_eq!(Graph::from_edges(3, [(1, 1)]), Err(GraphError::SelfLoop(1)));
        assert_eq!(Graph::from_edges(3, [(0, 1), (1, 0)]), Err(GraphError::Duplicate(0, 1)));
        assert_eq!(
            Graph::from_edges(3, [(0, 3)]),
            Err(GraphError::OutOfRange { vertex: 3, n: 3 })
        );
    }

    #[test]
    fn families() {
        assert_eq!(Graph::complete(5).edge_count(), 10);
        assert_eq!(Graph::cycle(6).edge_count(), 6);
        assert_eq!(Graph::complete_bipartite(3, 3).edge_count(), 9);
        assert!(Graph::cycle(4).has_edge(3, 0));
    }
}
