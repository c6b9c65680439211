//! Weighted geometric graphs over input and Steiner vertices, plus Dijkstra.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SltError};
use crate::geometry::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VertexKind {
    Input,
    Break,
    SecondaryBreak,
    EllSteiner,
    CoreApex,
    BaseGrid,
    Bend,
}

impl VertexKind {
    pub fn is_steiner(self) -> bool {
        self != VertexKind::Input
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub point: Point,
    pub kind: VertexKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Geometric graph whose first `input_count` vertices are the input points,
/// in input order. Edge weights are Euclidean lengths.
#[derive(Debug, Clone, PartialEq)]
pub struct SteinerGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    root: usize,
    input_count: usize,
}

impl SteinerGraph {
    pub fn with_inputs(points: &[Point], root: usize) -> Self {
        Self {
            vertices: points
                .iter()
                .map(|p| Vertex {
                    point: p.clone(),
                    kind: VertexKind::Input,
                })
                .collect(),
            edges: Vec::new(),
            root,
            input_count: points.len(),
        }
    }

    pub fn add_vertex(&mut self, point: Point, kind: VertexKind) -> usize {
        self.vertices.push(Vertex { point, kind });
        self.vertices.len() - 1
    }

    /// Adds `u -- v` weighted by the endpoint distance. Self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u == v {
            return;
        }
        let w = self.vertices[u].point.distance(&self.vertices[v].point);
        self.edges.push(Edge { u, v, w });
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn point(&self, v: usize) -> &Point {
        &self.vertices[v].point
    }

    pub fn total_weight(&self) -> f64 {
        sorted_sum(self.edges.iter().map(|e| e.w))
    }

    pub fn adjacency(&self) -> Adjacency {
        Adjacency::new(
            self.vertices.len(),
            self.edges.iter().map(|e| (e.u, e.v, e.w)),
        )
    }

    /// Reassembles a graph from explicit parts, checking index ranges.
    pub fn from_parts(
        vertices: Vec<Vertex>,
        edges: Vec<(usize, usize)>,
        root: usize,
        input_count: usize,
    ) -> Result<Self> {
        let n = vertices.len();
        if root >= n || input_count > n {
            return Err(SltError::InvalidInput(
                "root or input count out of range".into(),
            ));
        }
        let mut g = Self {
            vertices,
            edges: Vec::with_capacity(edges.len()),
            root,
            input_count,
        };
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(SltError::InvalidInput(format!(
                    "edge ({u}, {v}) out of range"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    /// The subgraph formed by shortest paths from the root to every input
    /// vertex, with the number of pruned Steiner vertices. Inputs keep their
    /// ids and the surviving Steiner vertices keep their relative order.
    pub fn shortest_path_tree(&self) -> Result<(SteinerGraph, usize)> {
        self.spt_covering(0..self.input_count)
    }

    /// Shortest-path tree spanning every vertex.
    pub fn full_shortest_path_tree(&self) -> Result<SteinerGraph> {
        Ok(self.spt_covering(0..self.vertices.len())?.0)
    }

    fn spt_covering(&self, targets: impl Iterator<Item = usize>) -> Result<(SteinerGraph, usize)> {
        let sp = dijkstra(&self.adjacency(), self.root);
        let mut keep = vec![false; self.vertices.len()];
        keep[self.root] = true;
        let mut tree_edges = Vec::new();
        for v in targets {
            if !sp.dist[v].is_finite() {
                return Err(SltError::Unreachable(v));
            }
            let mut cur = v;
            while !keep[cur] {
                keep[cur] = true;
                let p = sp.parent[cur].expect("reachable non-root vertex has a parent");
                tree_edges.push((p, cur));
                cur = p;
            }
        }
        let mut remap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, v) in self.vertices.iter().enumerate() {
            if keep[i] || i < self.input_count {
                remap[i] = vertices.len();
                vertices.push(v.clone());
            }
        }
        let pruned = self.vertices.len() - vertices.len();
        tree_edges.sort_unstable_by_key(|&(p, c)| (remap[c], remap[p]));
        let edges = tree_edges
            .into_iter()
            .map(|(p, c)| (remap[p], remap[c]))
            .collect();
        let tree = SteinerGraph::from_parts(vertices, edges, remap[self.root], self.input_count)?;
        Ok((tree, pruned))
    }
}

/// Compressed adjacency lists.
#[derive(Debug, Clone)]
pub struct Adjacency {
    offsets: Vec<usize>,
    targets: Vec<(usize, f64)>,
}

impl Adjacency {
    pub fn new(n: usize, edges: impl Iterator<Item = (usize, usize, f64)> + Clone) -> Self {
        let mut degree = vec![0usize; n + 1];
        for (u, v, _) in edges.clone() {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![(0usize, 0.0f64); offsets[n]];
        for (u, v, w) in edges {
            targets[fill[u]] = (v, w);
            fill[u] += 1;
            targets[fill[v]] = (u, w);
            fill[v] += 1;
        }
        // Sorted neighbor lists make relaxation order (and tie-breaks) independent
        // of edge insertion order.
        for i in 0..n {
            targets[offsets[i]..offsets[i + 1]]
                .sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        Self { offsets, targets }
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.targets[self.offsets[u]..self.offsets[u + 1]]
    }
}

#[derive(Debug, Clone)]
pub struct ShortestPaths {
    pub dist: Vec<f64>,
    pub parent: Vec<Option<usize>>,
}

#[derive(Copy, Clone, PartialEq)]
struct State {
    dist: f64,
    vertex: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Single-source shortest paths. Among equal-length paths the parent with
/// the smaller index wins, so the resulting tree is deterministic.
pub fn dijkstra(adj: &Adjacency, source: usize) -> ShortestPaths {
    dijkstra_bounded(adj, source, f64::INFINITY, None)
}

/// Dijkstra that stops once the frontier passes `cutoff` or `target` is
/// settled. Distances beyond the cutoff are left at infinity.
pub fn dijkstra_bounded(
    adj: &Adjacency,
    source: usize,
    cutoff: f64,
    target: Option<usize>,
) -> ShortestPaths {
    let n = adj.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(State {
        dist: 0.0,
        vertex: source,
    });
    while let Some(State { dist: d, vertex: u }) = heap.pop() {
        if done[u] {
            continue;
        }
        if d > cutoff {
            break;
        }
        done[u] = true;
        if Some(u) == target {
            break;
        }
        for &(v, w) in adj.neighbors(u) {
            if done[v] {
                continue;
            }
            let nd = d + w;
            let better = nd < dist[v] || (nd == dist[v] && parent[v].is_some_and(|p: usize| u < p));
            if better && nd <= cutoff {
                dist[v] = nd;
                parent[v] = Some(u);
                heap.push(State {
                    dist: nd,
                    vertex: v,
                });
            }
        }
    }
    ShortestPaths { dist, parent }
}

/// Sum of values in ascending order, so equal multisets give equal sums.
pub fn sorted_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_unstable_by(f64::total_cmp);
    v.into_iter().sum()
}
