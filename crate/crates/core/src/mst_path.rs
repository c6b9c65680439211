//! Euclidean MST (dense Prim) and the DFS-preorder Hamiltonian path.

use crate::error::{Result, SltError};
use crate::geometry::{PointCloud, Polyline};
use crate::graph::sorted_sum;

/// Spanning tree over point indices, rooted at `root`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub root: usize,
}

impl Tree {
    /// Total weight, summed in ascending order of edge weight.
    pub fn weight(&self) -> f64 {
        sorted_sum(self.edges.iter().map(|e| e.2))
    }

    /// Children lists in ascending index order.
    pub fn children(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v, _) in &self.edges {
            adj[u].push(v);
            adj[v].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Tie-break key for an edge: the unordered index pair.
fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Prim's algorithm on the complete Euclidean graph, `O(n^2)` time.
///
/// Equal weights are resolved by the smallest `(min index, max index)` pair.
pub fn euclidean_mst(pts: &PointCloud) -> Result<Tree> {
    let dups = pts.duplicates();
    if !dups.is_empty() {
        return Err(SltError::DuplicatePoints(dups));
    }
    let n = pts.len();
    let p = pts.points();
    let root = pts.root();
    let mut in_tree = vec![false; n];
    let mut key = vec![f64::INFINITY; n];
    let mut link = vec![usize::MAX; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));

    in_tree[root] = true;
    for v in 0..n {
        if v != root {
            key[v] = p[root].distance(&p[v]);
            link[v] = root;
        }
    }
    for _ in 1..n {
        let mut best = usize::MAX;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            if best == usize::MAX
                || key[v] < key[best]
                || (key[v] == key[best] && pair(v, link[v]) < pair(best, link[best]))
            {
                best = v;
            }
        }
        in_tree[best] = true;
        edges.push((link[best], best, key[best]));
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = p[best].distance(&p[v]);
            if d < key[v] || (d == key[v] && pair(v, best) < pair(v, link[v])) {
                key[v] = d;
                link[v] = best;
            }
        }
    }
    Ok(Tree { n, edges, root })
}

/// Hamiltonian path visiting the points in DFS preorder of an MST.
#[derive(Debug, Clone, PartialEq)]
pub struct HamPath {
    pub order: Vec<usize>,
    pub geometry: Polyline,
}

impl HamPath {
    pub fn weight(&self) -> f64 {
        self.geometry.total_length()
    }
}

/// Preorder DFS from the tree root, children visited in ascending index.
pub fn dfs_hamiltonian(tree: &Tree, pts: &PointCloud) -> Result<HamPath> {
    if tree.n != pts.len() || tree.root != pts.root() {
        return Err(SltError::InvalidInput(
            "tree does not match the point cloud".into(),
        ));
    }
    if tree.edges.len() + 1 != tree.n {
        return Err(SltError::InvalidInput(format!(
            "{} edges cannot span {} vertices",
            tree.edges.len(),
            tree.n
        )));
    }
    let children = tree.children();
    let mut seen = vec![false; tree.n];
    let mut order = Vec::with_capacity(tree.n);
    let mut stack = vec![tree.root];
    while let Some(u) = stack.pop() {
        if seen[u] {
            continue;
        }
        seen[u] = true;
        order.push(u);
        for &c in children[u].iter().rev() {
            if !seen[c] {
                stack.push(c);
            }
        }
    }
    if order.len() != tree.n {
        return Err(SltError::InvalidInput("tree is disconnected".into()));
    }
    let geometry = Polyline::new(order.iter().map(|&i| pts.points()[i].clone()).collect())?;
    Ok(HamPath { order, geometry })
}
