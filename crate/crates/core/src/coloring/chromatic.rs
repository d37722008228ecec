use alloc::vec;
use alloc::vec::Vec;

use super::Graph;

fn extend(adj: &[Vec<usize>], k: usize, colors: &mut [usize], v: usize, max_used: usize) -> bool {
    if v == colors.len() {
        return true;
    }
    // Colors above max_used + 1 are interchangeable with max_used + 1.
    for c in 0..k.min(max_used + 2) {
        if adj[v].iter().any(|&w| w < v && colors[w] == c) {
            continue;
        }
        colors[v] = c;
        if extend(adj, k, colors, v + 1, max_used.max(c)) {
            return true;
        }
    }
    false
}

/// A proper coloring with at most `k` colors, vertex 0 fixed to color 0.
pub fn color_with(g: &Graph, k: usize) -> Option<Vec<usize>> {
    let n = g.n();
    if n == 0 {
        return Some(Vec::new());
    }
    if k == 0 {
        return None;
    }
    let adj = g.adjacency();
    let mut colors = vec![0; n];
    extend(&adj, k, &mut colors, 1, 0).then_some(colors)
}

/// Minimum color count together with a witness coloring, found by trying
/// k = 1, 2, 3, ... with backtracking.
pub fn optimal_coloring(g: &Graph) -> (usize, Vec<usize>) {
    if g.n() == 0 {
        return (0, Vec::new());
    }
    let mut k = 1;
    loop {
        if let Some(c) = color_with(g, k) {
            return (k, c);
        }
        k += 1;
    }
}

pub fn chromatic_number_exact(g: &Graph) -> usize {
    optimal_coloring(g).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_families() {
        assert_eq!(chromatic_number_exact(&Graph::complete(3)), 3);
        assert_eq!(chromatic_number_exact(&Graph::cycle(6)), 2);
        assert_eq!(chromatic_number_exact(&Graph::cycle(5)), 3);
        assert_eq!(chromatic_number_exact(&Graph::complete(4)), 4);
        assert_eq!(chromatic_number_exact(&Graph::new(3)), 1);
        assert_eq!(chromatic_number_exact(&Graph::complete_bipartite(3, 3)), 2);
    }

    #[test]
    fn witness_is_proper() {
        let g = Graph::cycle(7);
        let (k, c) = optimal_coloring(&g);
        assert_eq!(k, 3);
        assert!(g.edges().all(|(u, v)| c[u] != c[v]));
        assert!(c.iter().all(|&x| x < k));
    }
}
