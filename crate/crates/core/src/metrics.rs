//! Root stretch, lightness and the report that carries them.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SltError};
use crate::geometry::PointCloud;
use crate::graph::{dijkstra, SteinerGraph};
use crate::mst_path::euclidean_mst;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportFlags {
    pub truncated_surfaces: usize,
    pub split_surfaces: usize,
    pub pruned_vertices: usize,
    pub steiner_vertices: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SltReport {
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub eps: f64,
    pub gamma: Option<f64>,
    pub lambda: Option<f64>,
    pub mst_weight: f64,
    pub tree_weight: f64,
    pub lightness: f64,
    /// `d_T(s, v) / d(s, v)` for every input point, in input order.
    pub per_point_stretch: Vec<f64>,
    pub max_stretch: f64,
    pub surface_angles: Vec<f64>,
    pub phase1_weight: Option<f64>,
    pub flags: ReportFlags,
}

impl SltReport {
    /// Measures `tree` over its input vertices. Construction-specific
    /// fields are left empty for the caller to fill.
    pub fn measure(tree: &SteinerGraph, method: &str, eps: f64) -> Result<Self> {
        let per_point_stretch = root_stretch(tree)?;
        let mst_weight = input_mst_weight(tree)?;
        let tree_weight = tree.total_weight();
        Ok(Self {
            method: method.to_string(),
            n: tree.input_count(),
            d: tree.point(tree.root()).dim(),
            eps,
            gamma: None,
            lambda: None,
            mst_weight,
            tree_weight,
            lightness: lightness_of(tree_weight, mst_weight),
            max_stretch: per_point_stretch.iter().copied().fold(1.0, f64::max),
            per_point_stretch,
            surface_angles: Vec::new(),
            phase1_weight: None,
            flags: ReportFlags {
                steiner_vertices: tree.vertex_count() - tree.input_count(),
                ..ReportFlags::default()
            },
        })
    }

    pub fn within_stretch(&self) -> bool {
        self.max_stretch <= 1.0 + self.eps
    }
}

fn lightness_of(tree_weight: f64, mst_weight: f64) -> f64 {
    if mst_weight > 0.0 {
        tree_weight / mst_weight
    } else {
        1.0
    }
}

/// `d_T(s, v) / d(s, v)` for every input vertex `v`; 1 for the root.
pub fn root_stretch(tree: &SteinerGraph) -> Result<Vec<f64>> {
    let dist = oracle_spt(tree, tree.root())?;
    let s = tree.point(tree.root());
    (0..tree.input_count())
        .map(|v| {
            let d = s.distance(tree.point(v));
            if v == tree.root() || d == 0.0 {
                Ok(1.0)
            } else {
                Ok(dist[v] / d)
            }
        })
        .collect()
}

/// Weight of the Euclidean MST over the input vertices of `g`.
pub fn input_mst_weight(g: &SteinerGraph) -> Result<f64> {
    let pts = (0..g.input_count()).map(|v| g.point(v).clone()).collect();
    Ok(euclidean_mst(&PointCloud::new(pts, g.root())?)?.weight())
}

/// `w(T) / w(MST(V))` with the MST over input points only.
pub fn lightness(tree: &SteinerGraph) -> Result<f64> {
    if tree.input_count() < 2 {
        return Err(SltError::InvalidInput(
            "lightness needs at least two input points".into(),
        ));
    }
    Ok(lightness_of(tree.total_weight(), input_mst_weight(tree)?))
}

/// Shortest-path distances from `s`; every input vertex must be reachable.
pub fn oracle_spt(g: &SteinerGraph, s: usize) -> Result<Vec<f64>> {
    let dist = dijkstra(&g.adjacency(), s).dist;
    if let Some(v) = (0..g.input_count()).find(|&v| !dist[v].is_finite()) {
        return Err(SltError::Unreachable(v));
    }
    Ok(dist)
}

/// Slow reference algorithms used to cross-check the fast ones.
pub mod oracle {
    use crate::geometry::PointCloud;
    use crate::graph::sorted_sum;

    /// Kruskal's algorithm over all pairs with a union-find.
    pub fn kruskal_weight(pts: &PointCloud) -> f64 {
        let n = pts.len();
        let p = pts.points();
        let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n / 2);
        for i in 0..n {
            for j in i + 1..n {
                pairs.push((p[i].distance(&p[j]), i, j));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut used = Vec::with_capacity(n.saturating_sub(1));
        for (w, i, j) in pairs {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri] = rj;
                used.push(w);
            }
        }
        sorted_sum(used.into_iter())
    }

    /// All-pairs shortest paths by Floyd–Warshall.
    pub fn floyd_warshall(n: usize, edges: &[(usize, usize, f64)]) -> Vec<Vec<f64>> {
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in d.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for &(u, v, w) in edges {
            if w < d[u][v] {
                d[u][v] = w;
                d[v][u] = w;
            }
        }
        for k in 0..n {
            let row_k = d[k].clone();
            for row in d.iter_mut() {
                let dik = row[k];
                if !dik.is_finite() {
                    continue;
                }
                for (dij, dkj) in row.iter_mut().zip(&row_k) {
                    let via = dik + dkj;
                    if via < *dij {
                        *dij = via;
                    }
                }
            }
        }
        d
    }
}
