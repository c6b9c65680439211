//! JSON file formats for point sets and trees.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SltError};
use crate::geometry::{Point, PointCloud};
use crate::graph::{SteinerGraph, Vertex, VertexKind};

/// Point set with a root index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsFile {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub root: usize,
}

impl PointsFile {
    pub fn from_cloud(pts: &PointCloud) -> Self {
        Self {
            dim: pts.dim(),
            points: pts.points().iter().map(|p| p.coords().to_vec()).collect(),
            root: pts.root(),
        }
    }

    /// Validates the file and converts it to a point cloud.
    pub fn to_cloud(&self) -> Result<PointCloud> {
        if self.dim == 0 {
            return Err(SltError::Format("dim must be positive".into()));
        }
        if self.points.is_empty() {
            return Err(SltError::Format("no points".into()));
        }
        let pts = self
            .points
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.len() != self.dim {
                    return Err(SltError::Format(format!(
                        "point {i} has {} coordinates, expected {}",
                        c.len(),
                        self.dim
                    )));
                }
                Point::new(c.clone()).map_err(|e| SltError::Format(format!("point {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if self.root >= pts.len() {
            return Err(SltError::Format(format!(
                "root {} out of range for {} points",
                self.root,
                pts.len()
            )));
        }
        let cloud = PointCloud::new(pts, self.root)?;
        let dups = cloud.duplicates();
        if !dups.is_empty() {
            return Err(SltError::Format(format!("duplicate points at {dups:?}")));
        }
        Ok(cloud)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeVertex {
    pub id: usize,
    pub coords: Vec<f64>,
    pub kind: VertexKind,
}

/// Tree over input and Steiner vertices. Input vertices come first, in input
/// order, and ids equal positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    pub vertices: Vec<TreeVertex>,
    pub edges: Vec<[usize; 2]>,
    pub root: usize,
}

impl TreeFile {
    pub fn from_graph(g: &SteinerGraph) -> Self {
        Self {
            vertices: g
                .vertices()
                .iter()
                .enumerate()
                .map(|(id, v)| TreeVertex {
                    id,
                    coords: v.point.coords().to_vec(),
                    kind: v.kind,
                })
                .collect(),
            edges: g.edges().iter().map(|e| [e.u, e.v]).collect(),
            root: g.root(),
        }
    }

    /// Validates the file and converts it to a graph that is a tree.
    pub fn to_graph(&self) -> Result<SteinerGraph> {
        let n = self.vertices.len();
        if n == 0 {
            return Err(SltError::Format("no vertices".into()));
        }
        let dim = self.vertices[0].coords.len();
        let mut vertices = Vec::with_capacity(n);
        let mut input_count = 0;
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(SltError::Format(format!(
                    "vertex at position {i} has id {}",
                    v.id
                )));
            }
            if v.coords.len() != dim {
                return Err(SltError::Format(format!("vertex {i} has wrong dimension")));
            }
            if v.kind == VertexKind::Input {
                if input_count != i {
                    return Err(SltError::Format(format!(
                        "input vertex {i} follows a Steiner vertex"
                    )));
                }
                input_count += 1;
            }
            let point = Point::new(v.coords.clone())
                .map_err(|e| SltError::Format(format!("vertex {i}: {e}")))?;
            vertices.push(Vertex {
                point,
                kind: v.kind,
            });
        }
        if self.root >= input_count {
            return Err(SltError::Format(format!(
                "root {} is not an input vertex",
                self.root
            )));
        }
        if self.edges.len() != n - 1 {
            return Err(SltError::Format(format!(
                "{} edges for {n} vertices is not a tree",
                self.edges.len()
            )));
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &[u, v] in &self.edges {
            if u >= n || v >= n {
                return Err(SltError::Format(format!("edge ({u}, {v}) out of range")));
            }
            let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
            if ru == rv {
                return Err(SltError::Format(format!("edge ({u}, {v}) closes a cycle")));
            }
            parent[ru] = rv;
        }
        let edges = self.edges.iter().map(|&[u, v]| (u, v)).collect();
        SteinerGraph::from_parts(vertices, edges, self.root, input_count)
            .map_err(|e| SltError::Format(e.to_string()))
    }
}

/// Pretty JSON with sorted keys, shortest round-trip floats and a trailing
/// newline.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| SltError::Format(e.to_string()))?;
    let mut s = serde_json::to_string_pretty(&v).map_err(|e| SltError::Format(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| SltError::Format(e.to_string()))
}
