//! Canonical labeling by partition refinement and individualization,
//! used to discard isomorphic duplicates.

use alloc::vec;
use alloc::vec::Vec;

use super::Graph;

/// Isomorphism-invariant certificate: equal iff the graphs are isomorphic.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm {
    n: usize,
    edges: Vec<(usize, usize)>,
}

/// Split cells by neighbor counts into every cell until nothing changes.
fn refine(adj: &[Vec<usize>], mut cells: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let n = adj.len();
    loop {
        let mut cell_of = vec![0; n];
        for (ci, cell) in cells.iter().enumerate() {
            for &v in cell {
                cell_of[v] = ci;
            }
        }
        let mut next = Vec::with_capacity(cells.len());
        for cell in &cells {
            if cell.len() == 1 {
                next.push(cell.clone());
                continue;
            }
            let mut keyed: Vec<(Vec<usize>, usize)> = cell
                .iter()
                .map(|&v| {
                    let mut sig = vec![0; cells.len()];
                    for &w in &adj[v] {
                        sig[cell_of[w]] += 1;
                    }
                    (sig, v)
                })
                .collect();
            keyed.sort();
            let mut start = 0;
            for i in 1..=keyed.len() {
                if i == keyed.len() || keyed[i].0 != keyed[start].0 {
                    next.push(keyed[start..i].iter().map(|(_, v)| *v).collect());
                    start = i;
                }
            }
        }
        let changed = next.len() != cells.len();
        cells = next;
        if !changed {
            return cells;
        }
    }
}

fn certificate(g: &Graph, order: &[usize]) -> Vec<(usize, usize)> {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .map(|(u, v)| (pos[u].min(pos[v]), pos[u].max(pos[v])))
        .collect();
    edges.sort_unstable();
    edges
}

fn search(g: &Graph, adj: &[Vec<usize>], cells: Vec<Vec<usize>>, best: &mut Option<Vec<(usize, usize)>>) {
    let cells = refine(adj, cells);
    let target = cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.len() > 1)
        .min_by_key(|(i, c)| (c.len(), *i))
        .map(|(i, _)| i);
    let Some(ti) = target else {
        let order: Vec<usize> = cells.iter().map(|c| c[0]).collect();
        let cert = certificate(g, &order);
        if best.as_ref().is_none_or(|b| cert < *b) {
            *best = Some(cert);
        }
        return;
    };
    // Twins (equal neighborhoods up to each other) are swapped by an
    // automorphism fixing everything else, so one branch covers them all.
    let branches = if is_twin_class(adj, &cells[ti]) {
        &cells[ti][..1]
    } else {
        &cells[ti][..]
    };
    for &v in branches {
        let mut branch = Vec::with_capacity(cells.len() + 1);
        branch.extend_from_slice(&cells[..ti]);
        branch.push(vec![v]);
        branch.push(cells[ti].iter().copied().filter(|&w| w != v).collect());
        branch.extend_from_slice(&cells[ti + 1..]);
        search(g, adj, branch, best);
    }
}

fn is_twin_class(adj: &[Vec<usize>], cell: &[usize]) -> bool {
    let strip = |v: usize, other: usize| {
        let mut ns: Vec<usize> = adj[v].iter().copied().filter(|&w| w != other).collect();
        ns.sort_unstable();
        ns
    };
    cell.iter()
        .enumerate()
        .all(|(i, &u)| cell[i + 1..].iter().all(|&v| strip(u, v) == strip(v, u)))
}

pub fn canonical_form(g: &Graph) -> CanonicalForm {
    let n = g.n();
    if n == 0 {
        return CanonicalForm { n, edges: Vec::new() };
    }
    let adj = g.adjacency();
    let mut best = None;
    search(g, &adj, vec![(0..n).collect()], &mut best);
    CanonicalForm {
        n,
        edges: best.unwrap_or_default(),
    }
}
