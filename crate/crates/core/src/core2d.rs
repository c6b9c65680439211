//! Recursive isosceles-triangle core: a binary tree of apices over a
//! subdivided base, with apex angles growing by `lambda` per level.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::error::{Result, SltError};
use crate::geometry::{Point, PointCloud};
use crate::graph::{dijkstra, SteinerGraph, VertexKind};
use crate::metrics::{input_mst_weight, SltReport};
use crate::unfolding::PlanePoint;

pub const DEFAULT_LAMBDA: f64 = 1.25;

/// Relative tolerance for the isosceles and on-base checks.
const SHAPE_TOL: f64 = 1e-9;

/// Number of subdivision levels, `ceil(log2 sqrt(1/eps)) + 1`.
pub fn level_count(eps: f64) -> usize {
    let x = 0.5 * (1.0 / eps).log2();
    (x - 1e-12).ceil().max(0.0) as usize + 1
}

/// Upper bound on the combined chain-edge weight of level `i` (unit legs).
pub fn level_weight_bound(lambda: f64, i: usize) -> f64 {
    4.0 / lambda.powi(i as i32)
}

/// Upper bound on the total chain weight over all levels (unit legs).
pub fn chain_weight_bound(lambda: f64) -> f64 {
    4.0 * lambda / (lambda - 1.0)
}

/// Upper bound on the slack of one chain edge of level `i` (unit legs).
pub fn slack_bound(alpha: f64, lambda: f64, i: usize) -> f64 {
    alpha * alpha / 4.0 * (lambda / 2.0).powi(i as i32)
}

/// Upper bound on the root stretch of base-grid vertices.
pub fn grid_stretch_bound(alpha: f64, lambda: f64) -> f64 {
    let c = (alpha / 2.0).cos();
    (c + alpha * alpha / (2.0 * (2.0 - lambda))) / c
}

/// Isosceles triangle with apex `apex`, base `base_a base_b` and points on
/// the base.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreInstance {
    pub apex: PlanePoint,
    pub base_a: PlanePoint,
    pub base_b: PlanePoint,
    pub base_points: Vec<PlanePoint>,
    pub eps: f64,
    pub lambda: f64,
    pub levels: usize,
}

impl CoreInstance {
    pub fn new(
        apex: PlanePoint,
        base_a: PlanePoint,
        base_b: PlanePoint,
        base_points: Vec<PlanePoint>,
        eps: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps < FRAC_PI_4) {
            return Err(SltError::EpsOutOfRange(eps));
        }
        if !(lambda > 1.0 && lambda < FRAC_PI_2.sqrt()) {
            return Err(SltError::InvalidInput(format!(
                "lambda {lambda} outside (1, sqrt(pi/2))"
            )));
        }
        let (la, lb) = (apex.distance(base_a), apex.distance(base_b));
        let leg = la.max(lb);
        if leg.is_nan() || leg <= 0.0 || (la - lb).abs() > SHAPE_TOL * leg {
            return Err(SltError::InvalidInput(format!(
                "triangle legs {la} and {lb} are not equal"
            )));
        }
        let base = base_b - base_a;
        let base_len = base.norm();
        if base_len <= SHAPE_TOL * leg {
            return Err(SltError::InvalidInput("triangle base is degenerate".into()));
        }
        for (i, p) in base_points.iter().enumerate() {
            let rel = *p - base_a;
            let t = rel.dot(base) / (base_len * base_len);
            let off = rel.cross(base).abs() / base_len;
            if off > SHAPE_TOL * leg || !(-SHAPE_TOL..=1.0 + SHAPE_TOL).contains(&t) {
                return Err(SltError::InvalidInput(format!(
                    "base point {i} is not on the triangle base"
                )));
            }
        }
        let inst = Self {
            apex,
            base_a,
            base_b,
            base_points,
            eps,
            lambda,
            levels: level_count(eps),
        };
        let alpha = inst.apex_angle();
        if alpha > eps.sqrt() + SHAPE_TOL {
            return Err(SltError::AngleOutOfRange {
                angle: alpha,
                max: eps.sqrt(),
            });
        }
        Ok(inst)
    }

    /// Unit-leg triangle with apex angle `sqrt(eps)`, apex on the positive
    /// y-axis and base on the x-axis. Base points are given by their
    /// parameter in `[0, 1]` from `base_a` to `base_b`.
    pub fn unit(eps: f64, lambda: f64, base_params: &[f64]) -> Result<Self> {
        let half = (eps.sqrt() / 2.0).sin();
        let a = PlanePoint::new(-half, 0.0);
        let b = PlanePoint::new(half, 0.0);
        let pts = base_params.iter().map(|&t| a.lerp(b, t)).collect();
        Self::new(
            PlanePoint::new(0.0, (eps.sqrt() / 2.0).cos()),
            a,
            b,
            pts,
            eps,
            lambda,
        )
    }

    pub fn leg(&self) -> f64 {
        0.5 * (self.apex.distance(self.base_a) + self.apex.distance(self.base_b))
    }

    pub fn apex_angle(&self) -> f64 {
        let u = self.base_a - self.apex;
        let v = self.base_b - self.apex;
        u.cross(v).abs().atan2(u.dot(v))
    }
}

/// The core graph. Vertex 0 is the apex (root), vertices `1..=n` are the
/// base points, followed by the apices of levels `1..=k` and the base grid.
#[derive(Debug, Clone)]
pub struct CoreGraph {
    pub graph: SteinerGraph,
    /// Apex ids per level, left to right; `apices[0] == [0]`.
    pub apices: Vec<Vec<usize>>,
    /// Base grid ids, left to right.
    pub grid: Vec<usize>,
    /// Chain edges per level `i = 0..=k`: apex of level `i` to its children
    /// (to its two base vertices on the last level).
    pub chain_edges: Vec<Vec<(usize, usize)>>,
    pub level_angles: Vec<f64>,
    pub alpha: f64,
    pub lambda: f64,
    pub leg: f64,
    /// Unit vector from the base midpoint toward the apex.
    pub axis: PlanePoint,
}

fn point2(p: PlanePoint) -> Point {
    Point::from([p.x, p.y])
}

/// Builds the core graph of `inst`.
pub fn build_core(inst: &CoreInstance) -> Result<CoreGraph> {
    let k = inst.levels;
    let alpha = inst.apex_angle();
    let lambda = inst.lambda;
    let level_angles: Vec<f64> = (0..=k).map(|i| alpha * lambda.powi(i as i32)).collect();
    for (i, &a) in level_angles.iter().enumerate() {
        if a >= FRAC_PI_2 {
            return Err(SltError::AngleOverflow { level: i, angle: a });
        }
    }

    // local frame: base midpoint at the origin, unit legs
    let leg = inst.leg();
    let mid = inst.base_a.lerp(inst.base_b, 0.5);
    let e = inst.base_b - inst.base_a;
    let e = e.scale(1.0 / e.norm());
    let up = inst.apex - mid;
    let axis = up.scale(1.0 / up.norm());
    let world = |x: f64, y: f64| mid + e.scale(leg * x) + axis.scale(leg * y);
    let local_x = |p: PlanePoint| (p - mid).dot(e) / leg;

    let half0 = (alpha / 2.0).sin();
    let mut inputs = vec![point2(inst.apex)];
    inputs.extend(inst.base_points.iter().map(|&p| point2(p)));
    let mut graph = SteinerGraph::with_inputs(&inputs, 0);

    let mut apices = vec![vec![0usize]];
    let mut chain_edges = Vec::with_capacity(k + 1);
    for i in 1..=k {
        let width = 2.0 * half0 / (1u64 << i) as f64;
        let height = 0.5 * width / (level_angles[i] / 2.0).tan();
        let level: Vec<usize> = (0..1usize << i)
            .map(|j| {
                let x = -half0 + (j as f64 + 0.5) * width;
                graph.add_vertex(point2(world(x, height)), VertexKind::CoreApex)
            })
            .collect();
        let parents = &apices[i - 1];
        chain_edges.push(
            level
                .iter()
                .enumerate()
                .map(|(j, &c)| (parents[j / 2], c))
                .collect::<Vec<_>>(),
        );
        apices.push(level);
    }

    let cells = 1usize << k;
    let width = 2.0 * half0 / cells as f64;
    let grid: Vec<usize> = (0..=cells)
        .map(|j| {
            let x = -half0 + j as f64 * width;
            graph.add_vertex(point2(world(x, 0.0)), VertexKind::BaseGrid)
        })
        .collect();
    chain_edges.push(
        apices[k]
            .iter()
            .enumerate()
            .flat_map(|(j, &s)| [(s, grid[j]), (s, grid[j + 1])])
            .collect(),
    );
    for level in &chain_edges {
        for &(u, v) in level {
            graph.add_edge(u, v);
        }
    }

    // base path through every vertex on the base, in order along it
    let mut on_base: Vec<(f64, usize)> = grid
        .iter()
        .enumerate()
        .map(|(j, &id)| (-half0 + j as f64 * width, id))
        .collect();
    on_base.extend(
        inst.base_points
            .iter()
            .enumerate()
            .map(|(i, &p)| (local_x(p), i + 1)),
    );
    on_base.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for w in on_base.windows(2) {
        graph.add_edge(w[0].1, w[1].1);
    }

    Ok(CoreGraph {
        graph,
        apices,
        grid,
        chain_edges,
        level_angles,
        alpha,
        lambda,
        leg,
        axis,
    })
}

/// Shortest-path tree of the core graph from the apex, spanning every vertex.
pub fn core_spt(g: &CoreGraph) -> Result<SteinerGraph> {
    g.graph.full_shortest_path_tree()
}

/// Measured quantities of a core tree. Chain weights and slacks are in
/// unit-leg terms.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreMetrics {
    pub level_weights: Vec<f64>,
    pub chain_weight: f64,
    /// Largest slack among the chain edges of each level.
    pub level_slack: Vec<f64>,
    pub tree_weight: f64,
    pub mst_weight: f64,
    pub lightness: f64,
    /// Root stretch of each base point, in input order.
    pub per_point_stretch: Vec<f64>,
    pub max_stretch: f64,
    pub grid_max_stretch: f64,
}

/// `d(u, v) - |proj_axis(uv)|`.
pub fn slack(u: &Point, v: &Point, axis: PlanePoint) -> f64 {
    let d = u.to(v);
    let along = (d[0] * axis.x + d[1] * axis.y).abs();
    u.distance(v) - along
}

/// Weights, slacks, lightness and stretch of the core tree `t` built on `g`.
pub fn core_metrics(g: &CoreGraph, t: &SteinerGraph) -> Result<CoreMetrics> {
    if t.vertex_count() != g.graph.vertex_count() {
        return Err(SltError::InvalidInput(
            "core tree does not span the core graph".into(),
        ));
    }
    let p = |v: usize| g.graph.point(v);
    let level_weights: Vec<f64> = g
        .chain_edges
        .iter()
        .map(|lv| lv.iter().map(|&(u, v)| p(u).distance(p(v))).sum::<f64>() / g.leg)
        .collect();
    let chain_weight = level_weights.iter().sum();
    let level_slack = g
        .chain_edges
        .iter()
        .map(|lv| {
            lv.iter()
                .map(|&(u, v)| slack(p(u), p(v), g.axis) / g.leg)
                .fold(0.0, f64::max)
        })
        .collect();

    let dist = dijkstra(&t.adjacency(), t.root()).dist;
    let s = t.point(t.root());
    let ratio = |v: usize| -> Result<f64> {
        if !dist[v].is_finite() {
            return Err(SltError::Unreachable(v));
        }
        let d = s.distance(t.point(v));
        Ok(if d == 0.0 { 1.0 } else { dist[v] / d })
    };
    let per_point_stretch = (1..t.input_count())
        .map(ratio)
        .collect::<Result<Vec<_>>>()?;
    let grid_stretch = g
        .grid
        .iter()
        .map(|&v| ratio(v))
        .collect::<Result<Vec<_>>>()?;
    let tree_weight = t.total_weight();
    let mst_weight = input_mst_weight(t)?;
    Ok(CoreMetrics {
        level_weights,
        chain_weight,
        level_slack,
        tree_weight,
        mst_weight,
        lightness: tree_weight / mst_weight,
        max_stretch: per_point_stretch.iter().copied().fold(1.0, f64::max),
        grid_max_stretch: grid_stretch.into_iter().fold(1.0, f64::max),
        per_point_stretch,
    })
}

/// Reads a core instance from a planar point set: the root is the apex and
/// the remaining points lie on the base, whose extreme points are the base
/// corners.
pub fn instance_from_points(pts: &PointCloud, eps: f64, lambda: f64) -> Result<CoreInstance> {
    if pts.dim() != 2 {
        return Err(SltError::InvalidInput(format!(
            "core instances are planar, got dimension {}",
            pts.dim()
        )));
    }
    let plane = |p: &Point| PlanePoint::new(p.coords()[0], p.coords()[1]);
    let base: Vec<PlanePoint> = (0..pts.len())
        .filter(|&i| i != pts.root())
        .map(|i| plane(&pts.points()[i]))
        .collect();
    if base.len() < 2 {
        return Err(SltError::InvalidInput(
            "core instance needs two base points".into(),
        ));
    }
    let far = |from: PlanePoint| {
        *base
            .iter()
            .max_by(|a, b| a.distance(from).total_cmp(&b.distance(from)))
            .expect("non-empty base")
    };
    let a = far(base[0]);
    let b = far(a);
    CoreInstance::new(plane(pts.root_point()), a, b, base, eps, lambda)
}

/// Core tree over `pts`, pruned to the input points, with input vertices in
/// input order.
pub fn core_slt(pts: &PointCloud, eps: f64, lambda: f64) -> Result<(SteinerGraph, SltReport)> {
    let g = build_core(&instance_from_points(pts, eps, lambda)?)?;
    let (tree, pruned) = g.graph.shortest_path_tree()?;
    // core ids put the apex first and the base points in input order after it
    let n = pts.len();
    let root = pts.root();
    let to_input = |v: usize| match v {
        0 => root,
        v if v <= root => v - 1,
        v => v,
    };
    let remap = |v: usize| if v < n { to_input(v) } else { v };
    let mut order: Vec<usize> = vec![0; tree.vertex_count()];
    for v in 0..tree.vertex_count() {
        order[remap(v)] = v;
    }
    let tree = SteinerGraph::from_parts(
        order.iter().map(|&v| tree.vertices()[v].clone()).collect(),
        tree.edges()
            .iter()
            .map(|e| (remap(e.u), remap(e.v)))
            .collect(),
        root,
        n,
    )?;
    let mut report = SltReport::measure(&tree, "core2d", eps)?;
    report.lambda = Some(lambda);
    report.flags.pruned_vertices = pruned;
    Ok((tree, report))
}
