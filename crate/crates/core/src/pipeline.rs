//! Folding pipeline: break points, folded surfaces, one planar gadget per
//! surface lifted back to `R^d`, their union, and the shortest-path tree
//! over the input points.

use std::f64::consts::FRAC_PI_4;

use crate::breakpoints::{select_breakpoints, subdivide, BreakpointSet, SubdividedPath};
use crate::core2d::{build_core, CoreInstance, DEFAULT_LAMBDA};
use crate::error::{Result, SltError};
use crate::geometry::{PointCloud, ANGLE_TOL};
use crate::graph::{SteinerGraph, VertexKind};
use crate::metrics::SltReport;
use crate::mst_path::{dfs_hamiltonian, euclidean_mst};
use crate::unfolding::{build_surfaces, sweep_bound, FoldedSurface, PlanePoint};

pub const DEFAULT_GAMMA: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineOptions {
    /// The path and gadgets are built for `eps / gamma`.
    pub gamma: f64,
    pub lambda: f64,
    /// Replace each lifted polyline by the chord between its endpoints.
    pub chord_shortcut: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            lambda: DEFAULT_LAMBDA,
            chord_shortcut: false,
        }
    }
}

/// `ceil(sqrt(1/eps))`, the secondary break point and Steiner point count.
pub fn sample_count(eps: f64) -> usize {
    ((1.0 / eps).sqrt() - 1e-12).ceil().max(1.0) as usize
}

/// Secondary break point on `hstar`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryBreak {
    pub arc: f64,
    /// `hstar` segment holding the point.
    pub segment: usize,
    pub plane: PlanePoint,
}

/// Line `ell` of one angular wedge of the surface and its Steiner points.
#[derive(Debug, Clone, PartialEq)]
pub struct Wedge {
    pub from_angle: f64,
    pub to_angle: f64,
    pub ell: (PlanePoint, PlanePoint),
    pub steiner: Vec<PlanePoint>,
    pub eps_core: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetNode {
    Root,
    Steiner(VertexKind),
    /// Index into `SurfaceGadget::secondary`.
    Secondary(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GadgetKind {
    /// Core trees and connector edges in the unfolded plane.
    Planar,
    /// Zero-angle surface: its vertices are chained by distance from `s`.
    Ray,
    /// No input point on the surface: a single spoke from `s`.
    Spoke,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGadget {
    pub surface: usize,
    pub kind: GadgetKind,
    /// Inclusive `hstar` vertex range covered by the surface.
    pub hstar_range: (usize, usize),
    /// `hstar` indices of the input points on the surface.
    pub inputs: Vec<usize>,
    pub input_plane: Vec<PlanePoint>,
    pub secondary: Vec<SecondaryBreak>,
    pub wedges: Vec<Wedge>,
    pub nodes: Vec<(PlanePoint, GadgetNode)>,
    /// Planar edges between `nodes`: core trees and connectors.
    pub edges: Vec<(usize, usize)>,
}

fn hstar_range(surf: &FoldedSurface, sub: &SubdividedPath) -> (usize, usize) {
    if surf.split {
        (surf.ray_vertex[0], *surf.ray_vertex.last().unwrap())
    } else {
        let seg = &sub.segments[surf.subpath];
        (seg.first_vertex, seg.last_vertex)
    }
}

/// Cone of `surf` holding `hstar` segment or vertex `j`.
fn cone_of(surf: &FoldedSurface, j: usize) -> usize {
    surf.ray_vertex
        .partition_point(|&rv| rv <= j)
        .saturating_sub(1)
        .min(surf.cone_count() - 1)
}

/// Builds the planar gadget of one surface.
pub fn build_gadget(
    surf: &FoldedSurface,
    index: usize,
    sub: &SubdividedPath,
    eps_int: f64,
    lambda: f64,
) -> Result<SurfaceGadget> {
    let (r0, r1) = hstar_range(surf, sub);
    let inputs: Vec<usize> = (r0..=r1).filter(|&x| sub.source[x].is_some()).collect();
    let mut gadget = SurfaceGadget {
        surface: index,
        kind: GadgetKind::Planar,
        hstar_range: (r0, r1),
        inputs,
        input_plane: Vec::new(),
        secondary: Vec::new(),
        wedges: Vec::new(),
        nodes: vec![(PlanePoint::default(), GadgetNode::Root)],
        edges: Vec::new(),
    };
    let total = surf.total_angle();
    if total <= ANGLE_TOL {
        gadget.kind = GadgetKind::Ray;
        return Ok(gadget);
    }
    if gadget.inputs.is_empty() {
        gadget.kind = GadgetKind::Spoke;
        return Ok(gadget);
    }

    let verts = sub.hstar.vertices();
    let cum = sub.hstar.cum_len();
    gadget.input_plane = gadget
        .inputs
        .iter()
        .map(|&x| surf.unfold_point(cone_of(surf, x), &verts[x]))
        .collect::<Result<_>>()?;

    let count = sample_count(eps_int);
    let length = cum[r1] - cum[r0];
    for q in 0..count {
        let arc = cum[r0] + (q as f64 + 0.5) * length / count as f64;
        let pos = sub.hstar.locate(arc)?;
        let p = sub.hstar.point_at(&pos);
        let plane = surf.unfold_point(cone_of(surf, pos.segment_index), &p)?;
        gadget.secondary.push(SecondaryBreak {
            arc,
            segment: pos.segment_index,
            plane,
        });
    }

    // wedges no wider than the sweep a regular sub-path can reach
    let cap = sweep_bound(eps_int);
    let m = ((total / cap) - 1e-12).ceil().max(1.0) as usize;
    let phi = total / m as f64;
    let wedge_of = |q: PlanePoint| ((q.angle().max(0.0) / phi) as usize).min(m - 1);
    for w in 0..m {
        let bisector = PlanePoint::from_polar(1.0, (w as f64 + 0.5) * phi);
        let members_in = |pts: &[PlanePoint]| -> Vec<usize> {
            (0..pts.len()).filter(|&i| wedge_of(pts[i]) == w).collect()
        };
        let sec_planes: Vec<PlanePoint> = gadget.secondary.iter().map(|b| b.plane).collect();
        let sec = members_in(&sec_planes);
        let inp = members_in(&gadget.input_plane);
        if sec.is_empty() && inp.is_empty() {
            continue;
        }
        // ell sits at the smallest projection onto the bisector, so every
        // member lies on its far side
        let h = sec
            .iter()
            .map(|&i| sec_planes[i])
            .chain(inp.iter().map(|&i| gadget.input_plane[i]))
            .map(|p| p.dot(bisector))
            .fold(f64::INFINITY, f64::min);
        let reach = h / (phi / 2.0).cos();
        let a = PlanePoint::from_polar(reach, w as f64 * phi);
        let b = PlanePoint::from_polar(reach, (w + 1) as f64 * phi);
        let steiner: Vec<PlanePoint> = (0..count)
            .map(|j| a.lerp(b, j as f64 / (count - 1).max(1) as f64))
            .collect();
        let eps_core = eps_int.max(phi * phi).min(FRAC_PI_4 * 0.999);
        let core = build_core(&CoreInstance::new(
            PlanePoint::default(),
            a,
            b,
            steiner.clone(),
            eps_core,
            lambda,
        )?)?;

        let base = gadget.nodes.len() - 1;
        let id = |v: usize| if v == 0 { 0 } else { base + v };
        for v in 1..core.graph.vertex_count() {
            let c = core.graph.point(v).coords();
            let kind = match core.graph.vertices()[v].kind {
                VertexKind::Input => VertexKind::EllSteiner,
                k => k,
            };
            gadget
                .nodes
                .push((PlanePoint::new(c[0], c[1]), GadgetNode::Steiner(kind)));
        }
        gadget
            .edges
            .extend(core.graph.edges().iter().map(|e| (id(e.u), id(e.v))));

        let ab = b - a;
        let ab2 = ab.dot(ab);
        for &i in &sec {
            let p = sec_planes[i];
            let foot = p.scale(h / p.dot(bisector));
            let t = ((foot - a).dot(ab) / ab2).clamp(0.0, 1.0);
            let j = ((t * (count - 1) as f64 - 0.5).ceil().max(0.0) as usize).min(count - 1);
            let node = gadget.nodes.len();
            gadget.nodes.push((p, GadgetNode::Secondary(i)));
            gadget.edges.push((id(1 + j), node));
        }
        gadget.wedges.push(Wedge {
            from_angle: w as f64 * phi,
            to_angle: (w + 1) as f64 * phi,
            ell: (a, b),
            steiner,
            eps_core,
        });
    }
    Ok(gadget)
}

/// Everything produced by one run of the folding pipeline.
#[derive(Debug, Clone)]
pub struct SltBuild {
    /// Union of all lifted gadgets and `H*`.
    pub graph: SteinerGraph,
    /// Shortest-path tree of `graph` pruned to the input points.
    pub tree: SteinerGraph,
    pub report: SltReport,
    pub breakpoints: BreakpointSet,
    pub subdivided: SubdividedPath,
    pub surfaces: Vec<FoldedSurface>,
    pub gadgets: Vec<SurfaceGadget>,
}

/// Builds a Steiner shallow-light tree for `pts` rooted at `pts.root()`.
pub fn assemble_slt(pts: &PointCloud, eps: f64, opts: &PipelineOptions) -> Result<SltBuild> {
    if pts.len() < 2 {
        return Err(SltError::InvalidInput(
            "at least two points are required".into(),
        ));
    }
    if !(eps > 0.0 && eps <= 0.25) {
        return Err(SltError::EpsOutOfRange(eps));
    }
    if !(opts.gamma >= 1.0 && opts.gamma.is_finite()) {
        return Err(SltError::InvalidInput(format!(
            "gamma {} below 1",
            opts.gamma
        )));
    }
    let eps_int = eps / opts.gamma;
    let tree = euclidean_mst(pts)?;
    let path = dfs_hamiltonian(&tree, pts)?;
    let breakpoints = select_breakpoints(&path, eps_int)?;
    let sub = subdivide(&path, &breakpoints)?;
    let s = pts.root_point().clone();
    let surfaces = build_surfaces(&sub, &s)?;
    let gadgets = surfaces
        .iter()
        .enumerate()
        .map(|(i, f)| build_gadget(f, i, &sub, eps_int, opts.lambda))
        .collect::<Result<Vec<_>>>()?;

    let root = pts.root();
    let mut g = SteinerGraph::with_inputs(pts.points(), root);
    let verts = sub.hstar.vertices();
    let hstar_id: Vec<usize> = verts
        .iter()
        .zip(&sub.source)
        .map(|(p, src)| match src {
            Some(i) => *i,
            None if p.coincides(&s) => root,
            None => g.add_vertex(p.clone(), VertexKind::Break),
        })
        .collect();

    // H* with the secondary break points spliced in
    let mut on_segment: Vec<Vec<(f64, usize)>> = vec![Vec::new(); verts.len()];
    let mut secondary_id: Vec<Vec<usize>> = Vec::with_capacity(gadgets.len());
    for gad in &gadgets {
        let ids = gad
            .secondary
            .iter()
            .map(|b| {
                let pos = sub.hstar.locate(b.arc)?;
                let id = g.add_vertex(sub.hstar.point_at(&pos), VertexKind::SecondaryBreak);
                on_segment[b.segment].push((b.arc, id));
                Ok(id)
            })
            .collect::<Result<Vec<_>>>()?;
        secondary_id.push(ids);
    }
    for j in 0..verts.len().saturating_sub(1) {
        let mut chain = std::mem::take(&mut on_segment[j]);
        chain.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut prev = hstar_id[j];
        for (_, id) in chain {
            g.add_edge(prev, id);
            prev = id;
        }
        g.add_edge(prev, hstar_id[j + 1]);
    }

    for (gad, sec_ids) in gadgets.iter().zip(&secondary_id) {
        let surf = &surfaces[gad.surface];
        let (r0, r1) = gad.hstar_range;
        match gad.kind {
            GadgetKind::Spoke => g.add_edge(root, hstar_id[r0]),
            GadgetKind::Ray => {
                let mut along: Vec<(f64, usize)> = (r0..=r1)
                    .filter(|&x| !verts[x].coincides(&s))
                    .map(|x| (s.distance(&verts[x]), hstar_id[x]))
                    .collect();
                along.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                let mut prev = root;
                for (_, id) in along {
                    g.add_edge(prev, id);
                    prev = id;
                }
            }
            GadgetKind::Planar => {
                let ids = gad
                    .nodes
                    .iter()
                    .map(|&(q, node)| match node {
                        GadgetNode::Root => Ok(root),
                        GadgetNode::Secondary(i) => Ok(sec_ids[i]),
                        GadgetNode::Steiner(kind) => Ok(g.add_vertex(surf.lift(q)?, kind)),
                    })
                    .collect::<Result<Vec<_>>>()?;
                for &(x, y) in &gad.edges {
                    if opts.chord_shortcut {
                        g.add_edge(ids[x], ids[y]);
                        continue;
                    }
                    let line = surf.lift_segment(gad.nodes[x].0, gad.nodes[y].0)?;
                    let inner = &line.vertices()[1..line.len().max(2) - 1];
                    let mut prev = ids[x];
                    for p in inner {
                        let b = g.add_vertex(p.clone(), VertexKind::Bend);
                        g.add_edge(prev, b);
                        prev = b;
                    }
                    g.add_edge(prev, ids[y]);
                }
            }
        }
    }

    let (tree, pruned) = g.shortest_path_tree()?;
    let mut report = SltReport::measure(&tree, "folding", eps)?;
    report.gamma = Some(opts.gamma);
    report.lambda = Some(opts.lambda);
    report.surface_angles = surfaces.iter().map(|f| f.total_angle()).collect();
    report.phase1_weight = Some(sub.hstar.total_length() + breakpoints.root_spoke_weight());
    report.flags.truncated_surfaces = surfaces.iter().filter(|f| f.truncated).count();
    report.flags.split_surfaces = surfaces.iter().filter(|f| f.split).count();
    report.flags.pruned_vertices = pruned;
    Ok(SltBuild {
        graph: g,
        tree,
        report,
        breakpoints,
        subdivided: sub,
        surfaces,
        gadgets,
    })
}
