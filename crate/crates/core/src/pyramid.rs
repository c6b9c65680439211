//! Right-pyramid core in `R^d`: hypercube bases split `2^(d-1)` ways per
//! level, a greedy spanner on the base hyperplane, and the apex tree.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::core2d::level_count;
use crate::error::{Result, SltError};
use crate::geometry::{Point, PointCloud};
use crate::graph::{SteinerGraph, VertexKind};
use crate::metrics::SltReport;

/// Spanner stretch used on the base hyperplane.
pub const BASE_SPANNER_T: f64 = 1.25;

/// Base point count up to which the base spanner considers every pair.
pub const EXACT_SPANNER_LIMIT: usize = 300;

/// Right pyramid over an axis-aligned hypercube orthogonal to `axis`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pyramid {
    pub base_center: Point,
    pub half_side: f64,
    pub apex: Point,
    pub apex_angle: f64,
    pub axis: usize,
}

impl Pyramid {
    /// Pyramid whose apex sees a body diagonal of the base under `angle`,
    /// with the apex on the positive side of the base.
    pub fn with_angle(base_center: Point, half_side: f64, angle: f64, axis: usize) -> Self {
        let d = base_center.dim();
        let half_diag = half_side * ((d - 1) as f64).sqrt();
        let height = half_diag / (angle / 2.0).tan();
        let mut apex = base_center.clone().into_coords();
        apex[axis] += height;
        Self {
            apex: Point::new(apex).expect("finite apex"),
            base_center,
            half_side,
            apex_angle: angle,
            axis,
        }
    }

    /// The root pyramid: apex at unit distance from every base corner,
    /// base centered at the origin in the hyperplane `x_0 = 0`.
    pub fn root(d: usize, eps: f64) -> Result<Self> {
        if d < 3 {
            return Err(SltError::DimensionTooSmall(d));
        }
        let alpha = eps.sqrt();
        let half_side = (alpha / 2.0).sin() / ((d - 1) as f64).sqrt();
        Ok(Self::with_angle(Point::origin(d), half_side, alpha, 0))
    }

    pub fn corners(&self) -> Vec<Point> {
        let d = self.base_center.dim();
        let free: Vec<usize> = (0..d).filter(|&a| a != self.axis).collect();
        (0..1usize << free.len())
            .map(|mask| {
                let mut c = self.base_center.clone().into_coords();
                for (bit, &a) in free.iter().enumerate() {
                    c[a] += if mask >> bit & 1 == 1 {
                        self.half_side
                    } else {
                        -self.half_side
                    };
                }
                Point::new(c).expect("finite corner")
            })
            .collect()
    }
}

/// Size of a grid instance: `n` points in a `per_axis^(d-1)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub n: usize,
    pub per_axis: usize,
    pub dim: usize,
}

impl GridSpec {
    /// `per_axis = ceil(n^(1/(d-1)))`; the first `n` grid points are used.
    pub fn new(n: usize, d: usize) -> Result<Self> {
        if d < 3 {
            return Err(SltError::DimensionTooSmall(d));
        }
        if n == 0 {
            return Err(SltError::InvalidInput(
                "grid needs at least one point".into(),
            ));
        }
        let mut per_axis = (n as f64).powf(1.0 / (d - 1) as f64).round().max(1.0) as usize;
        while per_axis.pow(d as u32 - 1) < n {
            per_axis += 1;
        }
        while per_axis > 1 && (per_axis - 1).pow(d as u32 - 1) >= n {
            per_axis -= 1;
        }
        Ok(Self {
            n,
            per_axis,
            dim: d,
        })
    }

    /// Smallest point count for which the constant-lightness claim applies.
    pub fn regime_minimum(d: usize, eps: f64) -> f64 {
        let df = d as f64;
        (2.0 * df.sqrt() * eps.powf(0.66 - df / 2.0)).powf((df - 1.0) / (df - 2.0))
    }

    /// Full grid with the fewest points inside the regime.
    pub fn for_regime(d: usize, eps: f64) -> Result<Self> {
        let min = Self::regime_minimum(d, eps);
        let mut per_axis = min.powf(1.0 / (d - 1) as f64).floor().max(1.0) as usize;
        while (per_axis.pow(d as u32 - 1) as f64) < min {
            per_axis += 1;
        }
        Self::new(per_axis.pow(d as u32 - 1), d)
    }

    pub fn in_regime(&self, eps: f64) -> bool {
        self.n as f64 >= Self::regime_minimum(self.dim, eps)
    }
}

/// The grid instance: root apex at index 0, then the grid points in
/// lexicographic order (cell centers of a `per_axis^(d-1)` subdivision).
pub fn pyramid_points(d: usize, eps: f64, grid: &GridSpec) -> Result<PointCloud> {
    if grid.dim != d {
        return Err(SltError::DimensionMismatch {
            left: grid.dim,
            right: d,
        });
    }
    let root = Pyramid::root(d, eps)?;
    let m = grid.per_axis;
    let step = 2.0 * root.half_side / m as f64;
    let mut pts = vec![root.apex.clone()];
    for idx in 0..grid.n {
        let mut c = vec![0.0; d];
        let mut rest = idx;
        for a in (1..d).rev() {
            c[a] = -root.half_side + (rest % m) as f64 * step + 0.5 * step;
            rest /= m;
        }
        pts.push(Point::new(c)?);
    }
    PointCloud::new(pts, 0)
}

/// `n sqrt(eps/d) / (2 n^(1/(d-1)))`, a lower bound on the MST weight of a
/// grid instance.
pub fn pyramid_mst_lower_bound(grid: &GridSpec, d: usize, eps: f64) -> Result<f64> {
    if grid.n < 2 {
        return Err(SltError::InvalidInput(
            "bound needs at least two points".into(),
        ));
    }
    let n = grid.n as f64;
    Ok(n * (eps / d as f64).sqrt() / (2.0 * n.powf(1.0 / (d - 1) as f64)))
}

/// `2^d eps^(1.16 - d/2)`, the reference lightness trend of grid instances.
pub fn lightness_trend(d: usize, eps: f64) -> f64 {
    2f64.powi(d as i32) * eps.powf(1.16 - d as f64 / 2.0)
}

/// Upper bound on the combined apex-edge weight of level `i`.
pub fn level_weight_bound(d: usize, lambda: f64, i: usize) -> f64 {
    2f64.powi(d as i32) * 2f64.powi(((d - 2) * i) as i32) / lambda.powi(i as i32)
}

#[derive(Copy, Clone, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then_with(|| o.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Graph under construction with a reusable bounded Dijkstra.
struct GrowingGraph {
    adj: Vec<Vec<(usize, f64)>>,
    dist: Vec<f64>,
    touched: Vec<usize>,
    heap: BinaryHeap<Entry>,
}

impl GrowingGraph {
    fn new(n: usize) -> Self {
        Self {
            adj: vec![Vec::new(); n],
            dist: vec![f64::INFINITY; n],
            touched: Vec::new(),
            heap: BinaryHeap::new(),
        }
    }

    /// Whether the graph distance from `s` to `t` is at most `bound`.
    fn within(&mut self, s: usize, t: usize, bound: f64) -> bool {
        self.dist[s] = 0.0;
        self.touched.push(s);
        self.heap.push(Entry(0.0, s));
        let mut found = false;
        while let Some(Entry(d, u)) = self.heap.pop() {
            if d > self.dist[u] {
                continue;
            }
            if u == t {
                found = true;
                break;
            }
            for &(v, w) in &self.adj[u] {
                let nd = d + w;
                if nd <= bound && nd < self.dist[v] {
                    if self.dist[v].is_infinite() {
                        self.touched.push(v);
                    }
                    self.dist[v] = nd;
                    self.heap.push(Entry(nd, v));
                }
            }
        }
        for &v in &self.touched {
            self.dist[v] = f64::INFINITY;
        }
        self.touched.clear();
        self.heap.clear();
        found
    }

    fn add(&mut self, u: usize, v: usize, w: f64) {
        self.adj[u].push((v, w));
        self.adj[v].push((u, w));
    }
}

fn greedy_over(pts: &[Point], t: f64, mut pairs: Vec<(f64, usize, usize)>) -> Vec<(usize, usize)> {
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut g = GrowingGraph::new(pts.len());
    let mut edges = Vec::new();
    for (d, i, j) in pairs {
        if !g.within(i, j, t * d) {
            g.add(i, j, d);
            edges.push((i, j));
        }
    }
    edges
}

/// Classic greedy `t`-spanner: pairs in order of length, each added unless
/// the graph already connects it within `t` times its length.
pub fn greedy_spanner(pts: &[Point], t: f64) -> Vec<(usize, usize)> {
    let n = pts.len();
    let mut pairs = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            pairs.push((pts[i].distance(&pts[j]), i, j));
        }
    }
    greedy_over(pts, t, pairs)
}

/// Greedy spanner restricted to pairs at most `radius` apart: every such
/// pair is `t`-spanned, longer pairs are not examined.
pub fn local_greedy_spanner(pts: &[Point], t: f64, radius: f64) -> Vec<(usize, usize)> {
    if pts.is_empty() {
        return Vec::new();
    }
    let key = |p: &Point| -> Vec<i64> {
        p.coords()
            .iter()
            .map(|x| (x / radius).floor() as i64)
            .collect()
    };
    let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (i, p) in pts.iter().enumerate() {
        cells.entry(key(p)).or_default().push(i);
    }
    let d = pts[0].dim();
    let mut pairs = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        let k = key(p);
        for off in 0..3usize.pow(d as u32) {
            let mut rest = off;
            let probe: Vec<i64> = k
                .iter()
                .map(|&c| {
                    let o = (rest % 3) as i64 - 1;
                    rest /= 3;
                    c + o
                })
                .collect();
            if let Some(list) = cells.get(&probe) {
                for &j in list {
                    if j > i {
                        let dij = p.distance(&pts[j]);
                        if dij <= radius {
                            pairs.push((dij, i, j));
                        }
                    }
                }
            }
        }
    }
    greedy_over(pts, t, pairs)
}

/// Graph, tree and measurements of one pyramid core.
#[derive(Debug, Clone)]
pub struct PyramidCore {
    pub graph: SteinerGraph,
    pub tree: SteinerGraph,
    pub report: SltReport,
    pub root: Pyramid,
    pub level_angles: Vec<f64>,
    /// Apex ids per level, `apices[0] == [0]`.
    pub apices: Vec<Vec<usize>>,
    /// Apex edges per level `i = 0..=k`: to the child apices, and on the
    /// last level to the base corners.
    pub level_edges: Vec<Vec<(usize, usize)>>,
    pub base_grid: Vec<usize>,
    pub base_edges: Vec<(usize, usize)>,
    /// Whether every base pair was examined by the spanner.
    pub exact_spanner: bool,
}

impl PyramidCore {
    pub fn level_weights(&self) -> Vec<f64> {
        self.level_edges
            .iter()
            .map(|lv| {
                lv.iter()
                    .map(|&(u, v)| self.graph.point(u).distance(self.graph.point(v)))
                    .sum()
            })
            .collect()
    }
}

/// Multi-index of `flat` in a grid with `side` cells per axis.
fn unflatten(mut flat: usize, side: usize, dims: usize) -> Vec<usize> {
    (0..dims)
        .map(|_| {
            let c = flat % side;
            flat /= side;
            c
        })
        .collect()
}

fn flatten(idx: &[usize], side: usize) -> usize {
    idx.iter().rev().fold(0, |acc, &c| acc * side + c)
}

/// Builds the pyramid core over the grid instance of `grid`.
pub fn build_pyramid_core(d: usize, eps: f64, grid: &GridSpec, lambda: f64) -> Result<PyramidCore> {
    let pts = pyramid_points(d, eps, grid)?;
    build_pyramid_core_on(&pts, eps, lambda)
}

/// Builds the pyramid core over `pts`, which must be a grid instance as
/// produced by [`pyramid_points`].
pub fn build_pyramid_core_on(pts: &PointCloud, eps: f64, lambda: f64) -> Result<PyramidCore> {
    let d = pts.dim();
    if !(eps > 0.0 && eps < std::f64::consts::PI.powi(2)) {
        return Err(SltError::EpsOutOfRange(eps));
    }
    let root = Pyramid::root(d, eps)?;
    if pts.root() != 0 || !pts.root_point().coincides(&root.apex) {
        return Err(SltError::InvalidInput(
            "point 0 must be the pyramid apex".into(),
        ));
    }
    let tol = 1e-9;
    for (i, p) in pts.points().iter().enumerate().skip(1) {
        let c = p.coords();
        if c[0].abs() > tol || c[1..].iter().any(|x| x.abs() > root.half_side + tol) {
            return Err(SltError::InvalidInput(format!(
                "point {i} is outside the pyramid base"
            )));
        }
    }

    let k = level_count(eps);
    let alpha = eps.sqrt();
    let level_angles: Vec<f64> = (0..=k).map(|i| alpha * lambda.powi(i as i32)).collect();
    for (i, &a) in level_angles.iter().enumerate() {
        if a >= std::f64::consts::FRAC_PI_2 {
            return Err(SltError::AngleOverflow { level: i, angle: a });
        }
    }

    let free = d - 1;
    let children = 1usize << free;
    let mut graph = SteinerGraph::with_inputs(pts.points(), 0);
    let mut apices = vec![vec![0usize]];
    let mut level_edges = Vec::with_capacity(k + 1);
    for i in 1..=k {
        let side = 1usize << i;
        let half = root.half_side / side as f64;
        let level: Vec<usize> = (0..side.pow(free as u32))
            .map(|flat| {
                let idx = unflatten(flat, side, free);
                let mut c = vec![0.0; d];
                for (a, &j) in idx.iter().enumerate() {
                    c[a + 1] = -root.half_side + (2 * j + 1) as f64 * half;
                }
                let p =
                    Pyramid::with_angle(Point::new(c).expect("finite"), half, level_angles[i], 0);
                graph.add_vertex(p.apex, VertexKind::CoreApex)
            })
            .collect();
        let parent_side = side / 2;
        let edges = (0..level.len())
            .map(|flat| {
                let idx = unflatten(flat, side, free);
                let up: Vec<usize> = idx.iter().map(|&j| j / 2).collect();
                (apices[i - 1][flatten(&up, parent_side)], level[flat])
            })
            .collect::<Vec<_>>();
        level_edges.push(edges);
        apices.push(level);
    }

    let cells = 1usize << k;
    let step = 2.0 * root.half_side / cells as f64;
    let base_grid: Vec<usize> = (0..(cells + 1).pow(free as u32))
        .map(|flat| {
            let idx = unflatten(flat, cells + 1, free);
            let mut c = vec![0.0; d];
            for (a, &j) in idx.iter().enumerate() {
                c[a + 1] = -root.half_side + j as f64 * step;
            }
            graph.add_vertex(Point::new(c).expect("finite"), VertexKind::BaseGrid)
        })
        .collect();
    let last = (0..apices[k].len())
        .flat_map(|flat| {
            let idx = unflatten(flat, cells, free);
            let apex = apices[k][flat];
            let grid = &base_grid;
            (0..children).map(move |mask| {
                let corner: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .map(|(a, &j)| j + (mask >> a & 1))
                    .collect();
                (apex, grid[flatten(&corner, cells + 1)])
            })
        })
        .collect::<Vec<_>>();
    level_edges.push(last);
    for lv in &level_edges {
        for &(u, v) in lv {
            graph.add_edge(u, v);
        }
    }

    // spanner over the inputs and base grid, all in the base hyperplane
    let base_ids: Vec<usize> = (1..pts.len()).chain(base_grid.iter().copied()).collect();
    let base_pts: Vec<Point> = base_ids.iter().map(|&v| graph.point(v).clone()).collect();
    let exact_spanner = base_pts.len() <= EXACT_SPANNER_LIMIT;
    let local = if exact_spanner {
        greedy_spanner(&base_pts, BASE_SPANNER_T)
    } else {
        // a full cell diagonal covers every input and its cell corners
        local_greedy_spanner(&base_pts, BASE_SPANNER_T, step * (free as f64).sqrt())
    };
    let base_edges: Vec<(usize, usize)> = local
        .into_iter()
        .map(|(i, j)| (base_ids[i], base_ids[j]))
        .collect();
    for &(u, v) in &base_edges {
        graph.add_edge(u, v);
    }

    let (tree, pruned) = graph.shortest_path_tree()?;
    let mut report = SltReport::measure(&tree, "pyramid", eps)?;
    report.lambda = Some(lambda);
    report.flags.pruned_vertices = pruned;
    Ok(PyramidCore {
        graph,
        tree,
        report,
        root,
        level_angles,
        apices,
        level_edges,
        base_grid,
        base_edges,
        exact_spanner,
    })
}
