//! Planarity via biconnected decomposition and path embedding
//! (Demoucron, Malgrange and Pertuiset).

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec;
use alloc::vec::Vec;

use super::Graph;

/// True iff `g` has a plane embedding.
pub fn is_planar(g: &Graph) -> bool {
    let n = g.n();
    if n <= 4 {
        return true;
    }
    if g.edge_count() > 3 * n - 6 {
        return false;
    }
    let adj = g.adjacency();
    biconnected_components(&adj)
        .iter()
        .all(|edges| component_is_planar(edges))
}

struct Tarjan<'a> {
    adj: &'a [Vec<usize>],
    disc: Vec<usize>,
    low: Vec<usize>,
    time: usize,
    stack: Vec<(usize, usize)>,
    out: Vec<Vec<(usize, usize)>>,
}

impl Tarjan<'_> {
    fn visit(&mut self, u: usize, parent: Option<usize>) {
        self.disc[u] = self.time;
        self.low[u] = self.time;
        self.time += 1;
        for idx in 0..self.adj[u].len() {
            let v = self.adj[u][idx];
            if self.disc[v] == usize::MAX {
                self.stack.push((u, v));
                self.visit(v, Some(u));
                self.low[u] = self.low[u].min(self.low[v]);
                if self.low[v] >= self.disc[u] {
                    let mut comp = Vec::new();
                    while let Some(e) = self.stack.pop() {
                        comp.push(e);
                        if e == (u, v) {
                            break;
                        }
                    }
                    self.out.push(comp);
                }
            } else if Some(v) != parent && self.disc[v] < self.disc[u] {
                self.stack.push((u, v));
                self.low[u] = self.low[u].min(self.disc[v]);
            }
        }
    }
}

/// Edge sets of the biconnected components.
fn biconnected_components(adj: &[Vec<usize>]) -> Vec<Vec<(usize, usize)>> {
    let n = adj.len();
    let mut t = Tarjan {
        adj,
        disc: vec![usize::MAX; n],
        low: vec![0; n],
        time: 0,
        stack: Vec::new(),
        out: Vec::new(),
    };
    for s in 0..n {
        if t.disc[s] == usize::MAX {
            t.visit(s, None);
        }
    }
    t.out
}

fn component_is_planar(edges: &[(usize, usize)]) -> bool {
    let mut index = BTreeMap::new();
    for &(u, v) in edges {
        for x in [u, v] {
            let next = index.len();
            index.entry(x).or_insert(next);
        }
    }
    let k = index.len();
    if k <= 4 {
        return true;
    }
    if edges.len() > 3 * k - 6 {
        return false;
    }
    let local: Vec<(usize, usize)> = edges.iter().map(|(u, v)| (index[u], index[v])).collect();
    let mut adj = vec![Vec::new(); k];
    for &(u, v) in &local {
        adj[u].push(v);
        adj[v].push(u);
    }
    Embedder::new(adj, local).run()
}

fn key(u: usize, v: usize) -> (usize, usize) {
    (u.min(v), u.max(v))
}

struct Fragment {
    attachments: Vec<usize>,
    /// Either a single chord between two embedded vertices, or the
    /// non-embedded vertices of one connected piece.
    chord: Option<(usize, usize)>,
    vertices: Vec<usize>,
}

struct Embedder {
    adj: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    placed: Vec<bool>,
    placed_edges: BTreeSet<(usize, usize)>,
    faces: Vec<Vec<usize>>,
}

impl Embedder {
    fn new(adj: Vec<Vec<usize>>, edges: Vec<(usize, usize)>) -> Self {
        let k = adj.len();
        Self {
            adj,
            edges,
            placed: vec![false; k],
            placed_edges: BTreeSet::new(),
            faces: Vec::new(),
        }
    }

    /// Shortest path from `a` to `b` not using the edge `a-b`.
    fn cycle_through(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.adj.len()];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if parent[y] != usize::MAX || (x == a && y == b) {
                    continue;
                }
                parent[y] = x;
                if y == b {
                    let mut path = vec![b];
                    let mut cur = b;
                    while cur != a {
                        cur = parent[cur];
                        path.push(cur);
                    }
                    path.reverse();
                    return Some(path);
                }
                queue.push_back(y);
            }
        }
        None
    }

    fn place_path(&mut self, path: &[usize]) {
        for w in path.windows(2) {
            self.placed_edges.insert(key(w[0], w[1]));
        }
        for &x in path {
            self.placed[x] = true;
        }
    }

    fn fragments(&self) -> Vec<Fragment> {
        let mut out = Vec::new();
        for &(u, v) in &self.edges {
            if self.placed[u] && self.placed[v] && !self.placed_edges.contains(&key(u, v)) {
                out.push(Fragment {
                    attachments: vec![u, v],
                    chord: Some((u, v)),
                    vertices: Vec::new(),
                });
            }
        }
        let mut seen = vec![false; self.adj.len()];
        for s in 0..self.adj.len() {
            if self.placed[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut vertices = vec![s];
            let mut attachments = BTreeSet::new();
            let mut queue = VecDeque::from([s]);
            while let Some(x) = queue.pop_front() {
                for &y in &self.adj[x] {
                    if self.placed[y] {
                        attachments.insert(y);
                    } else if !seen[y] {
                        seen[y] = true;
                        vertices.push(y);
                        queue.push_back(y);
                    }
                }
            }
            out.push(Fragment {
                attachments: attachments.into_iter().collect(),
                chord: None,
                vertices,
            });
        }
        out
    }

    /// A path through the fragment between two distinct attachment vertices.
    fn fragment_path(&self, frag: &Fragment) -> Vec<usize> {
        if let Some((u, v)) = frag.chord {
            return vec![u, v];
        }
        let a = frag.attachments[0];
        let inside: BTreeSet<usize> = frag.vertices.iter().copied().collect();
        let mut parent = BTreeMap::new();
        let mut queue = VecDeque::new();
        for &w in &self.adj[a] {
            if inside.contains(&w) && !parent.contains_key(&w) {
                parent.insert(w, a);
                queue.push_back(w);
            }
        }
        while let Some(x) = queue.pop_front() {
            for &y in &self.adj[x] {
                if self.placed[y] && y != a {
                    let mut path = vec![y, x];
                    let mut cur = x;
                    while let Some(&p) = parent.get(&cur) {
                        path.push(p);
                        if p == a {
                            break;
                        }
                        cur = p;
                    }
                    path.reverse();
                    return path;
                }
                if inside.contains(&y) && !parent.contains_key(&y) {
                    parent.insert(y, x);
                    queue.push_back(y);
                }
            }
        }
        unreachable!("fragment of a biconnected graph has two attachments")
    }

    fn split_face(&mut self, face_idx: usize, path: &[usize]) {
        let face = self.faces[face_idx].clone();
        let a = path[0];
        let b = path[path.len() - 1];
        let inner = &path[1..path.len() - 1];
        let i = face.iter().position(|&x| x == a).expect("attachment on face");
        let j = face.iter().position(|&x| x == b).expect("attachment on face");
        let len = face.len();
        let walk = |from: usize, to: usize| {
            let mut seg = Vec::new();
            let mut p = from;
            loop {
                seg.push(face[p]);
                if p == to {
                    break;
                }
                p = (p + 1) % len;
            }
            seg
        };
        let mut first = walk(i, j);
        first.extend(inner.iter().rev());
        let mut second = walk(j, i);
        second.extend(inner.iter());
        self.faces[face_idx] = first;
        self.faces.push(second);
    }

    fn run(mut self) -> bool {
        let (a, b) = self.edges[0];
        let Some(cycle) = self.cycle_through(a, b) else {
            return true;
        };
        self.place_path(&cycle);
        self.placed_edges.insert(key(a, b));
        self.faces = vec![cycle.clone(), cycle];

        loop {
            let frags = self.fragments();
            if frags.is_empty() {
                return true;
            }
            let mut choice = None;
            for (fi, frag) in frags.iter().enumerate() {
                let admissible: Vec<usize> = (0..self.faces.len())
                    .filter(|&f| frag.attachments.iter().all(|x| self.faces[f].contains(x)))
                    .collect();
                match admissible.len() {
                    0 => return false,
                    1 if !matches!(choice, Some((_, _, true))) => choice = Some((fi, admissible[0], true)),
                    _ if choice.is_none() => choice = Some((fi, admissible[0], false)),
                    _ => {}
                }
            }
            let (fi, face, _) = choice.expect("at least one fragment");
            let path = self.fragment_path(&frags[fi]);
            self.place_path(&path);
            self.split_face(face, &path);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn petersen() -> Graph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        Graph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn kuratowski_graphs() {
        assert!(!is_planar(&Graph::complete(5)));
        assert!(!is_planar(&Graph::complete_bipartite(3, 3)));
        assert!(is_planar(&Graph::complete(4)));
        assert!(is_planar(&Graph::complete_bipartite(2, 7)));
        assert!(!is_planar(&petersen()));
    }

    #[test]
    fn sparse_families_are_planar() {
        for n in 1..12 {
            assert!(is_planar(&Graph::path(n)));
            assert!(is_planar(&Graph::cycle(n)));
            assert!(is_planar(&Graph::new(n)));
        }
    }

    #[test]
    fn subdivided_k33_is_not_planar() {
        // K3,3 with every edge of vertex 0 subdivided once.
        let mut edges = Vec::new();
        let mut next = 6;
        for u in 0..3 {
            for v in 3..6 {
                if u == 0 {
                    edges.push((u, next));
                    edges.push((next, v));
                    next += 1;
                } else {
                    edges.push((u, v));
                }
            }
        }
        assert!(!is_planar(&Graph::from_edges(next, edges).unwrap()));
    }

    #[test]
    fn octahedron_and_grid_are_planar() {
        let mut oct = Graph::complete(6);
        oct = Graph::from_edges(6, oct.edges().filter(|&(u, v)| !(v == u + 3 && u < 3))).unwrap();
        assert_eq!(oct.edge_count(), 12);
        assert!(is_planar(&oct));

        let mut grid = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                let v = r * 4 + c;
                if c < 3 {
                    grid.push((v, v + 1));
                }
                if r < 3 {
                    grid.push((v, v + 4));
                }
            }
        }
        assert!(is_planar(&Graph::from_edges(16, grid).unwrap()));
    }

    #[test]
    fn two_k5_blocks_joined_at_a_vertex() {
        let mut edges: Vec<(usize, usize)> = Graph::complete(4).edges().collect();
        edges.extend(Graph::complete(5).edges().map(|(u, v)| (u + 3, v + 3)));
        let g = Graph::from_edges(8, edges).unwrap();
        assert!(!is_planar(&g));
    }
}
