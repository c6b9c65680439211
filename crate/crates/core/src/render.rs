//! SVG 1.1 rendering of planar trees, point sets and unfolded surfaces.
//! The y-axis points up. Input points are black, Steiner points gray, tree
//! edges solid and surface boundaries dashed.

use std::fmt::Write;

use crate::error::{Result, SltError};
use crate::geometry::PointCloud;
use crate::graph::SteinerGraph;
use crate::pipeline::{GadgetKind, GadgetNode, SltBuild};
use crate::unfolding::PlanePoint;

const PANEL: f64 = 400.0;
const MARGIN: f64 = 20.0;
const PANELS_PER_ROW: usize = 4;

/// Maps a world bounding box onto a square panel at `(ox, oy)`.
struct Panel {
    min: PlanePoint,
    scale: f64,
    ox: f64,
    oy: f64,
}

impl Panel {
    fn fit(pts: impl Iterator<Item = PlanePoint>, ox: f64, oy: f64) -> Self {
        let (mut lo, mut hi) = (
            PlanePoint::new(f64::INFINITY, f64::INFINITY),
            PlanePoint::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in pts {
            lo = PlanePoint::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = PlanePoint::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        if !lo.x.is_finite() {
            lo = PlanePoint::default();
            hi = PlanePoint::new(1.0, 1.0);
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        let scale = if span > 0.0 {
            (PANEL - 2.0 * MARGIN) / span
        } else {
            1.0
        };
        Self {
            min: lo,
            scale,
            ox,
            oy,
        }
    }

    fn map(&self, p: PlanePoint) -> (f64, f64) {
        (
            self.ox + MARGIN + (p.x - self.min.x) * self.scale,
            self.oy + PANEL - MARGIN - (p.y - self.min.y) * self.scale,
        )
    }

    fn line(&self, out: &mut String, a: PlanePoint, b: PlanePoint, style: &str) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        let _ = writeln!(
            out,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"#
        );
    }

    fn dot(&self, out: &mut String, p: PlanePoint, input: bool) {
        let (x, y) = self.map(p);
        let (r, fill) = if input { (3.0, "black") } else { (2.0, "gray") };
        let _ = writeln!(
            out,
            r#"<circle cx="{x:.3}" cy="{y:.3}" r="{r}" fill="{fill}"/>"#
        );
    }
}

const EDGE: &str = r#"stroke="black" stroke-width="1""#;
const PATH: &str = r#"stroke="steelblue" stroke-width="0.5""#;
const BOUNDARY: &str = r#"stroke="gray" stroke-width="0.75" stroke-dasharray="4 3""#;

fn document(width: f64, height: f64, body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n"
    )
}

fn planar(p: &[f64]) -> PlanePoint {
    PlanePoint::new(p[0], p[1])
}

fn require_planar(d: usize) -> Result<()> {
    if d == 2 {
        Ok(())
    } else {
        Err(SltError::InvalidInput(format!(
            "direct rendering needs planar input, got dimension {d}"
        )))
    }
}

/// Planar tree with its vertices.
pub fn svg_tree(tree: &SteinerGraph) -> Result<String> {
    require_planar(tree.point(tree.root()).dim())?;
    let at = |v: usize| planar(tree.point(v).coords());
    let panel = Panel::fit((0..tree.vertex_count()).map(at), 0.0, 0.0);
    let mut body = String::new();
    for e in tree.edges() {
        panel.line(&mut body, at(e.u), at(e.v), EDGE);
    }
    for (v, vert) in tree.vertices().iter().enumerate() {
        panel.dot(&mut body, at(v), !vert.kind.is_steiner());
    }
    Ok(document(PANEL, PANEL, &body))
}

/// Planar point set.
pub fn svg_points(pts: &PointCloud) -> Result<String> {
    require_planar(pts.dim())?;
    let panel = Panel::fit(pts.points().iter().map(|p| planar(p.coords())), 0.0, 0.0);
    let mut body = String::new();
    for p in pts.points() {
        panel.dot(&mut body, planar(p.coords()), true);
    }
    Ok(document(PANEL, PANEL, &body))
}

/// One panel per planar gadget: the unfolded surface boundary, the unfolded
/// path, inputs, Steiner points and gadget edges.
pub fn svg_gadgets(build: &SltBuild) -> String {
    let planar_gadgets: Vec<_> = build
        .gadgets
        .iter()
        .filter(|g| g.kind == GadgetKind::Planar)
        .collect();
    let cols = planar_gadgets.len().clamp(1, PANELS_PER_ROW);
    let rows = planar_gadgets.len().div_ceil(PANELS_PER_ROW).max(1);
    let mut body = String::new();
    for (k, gad) in planar_gadgets.iter().enumerate() {
        let surf = &build.surfaces[gad.surface];
        let rays: Vec<PlanePoint> = (0..=surf.cone_count())
            .map(|j| surf.unfold_ray_vertex(j))
            .collect();
        let reach = rays
            .iter()
            .chain(&gad.input_plane)
            .chain(gad.nodes.iter().map(|(p, _)| p))
            .map(|p| p.norm())
            .fold(0.0, f64::max);
        let ends = [
            PlanePoint::from_polar(reach, 0.0),
            PlanePoint::from_polar(reach, surf.total_angle()),
        ];
        let ox = (k % PANELS_PER_ROW) as f64 * PANEL;
        let oy = (k / PANELS_PER_ROW) as f64 * PANEL;
        let panel = Panel::fit(
            rays.iter()
                .chain(&ends)
                .chain(&gad.input_plane)
                .chain(gad.nodes.iter().map(|(p, _)| p))
                .copied()
                .chain(std::iter::once(PlanePoint::default())),
            ox,
            oy,
        );
        let _ = writeln!(body, "<g id=\"surface-{}\">", gad.surface);
        for e in ends {
            panel.line(&mut body, PlanePoint::default(), e, BOUNDARY);
        }
        for w in rays.windows(2) {
            panel.line(&mut body, w[0], w[1], PATH);
        }
        for &(x, y) in &gad.edges {
            panel.line(&mut body, gad.nodes[x].0, gad.nodes[y].0, EDGE);
        }
        for &(p, node) in &gad.nodes {
            panel.dot(&mut body, p, node == GadgetNode::Root);
        }
        for &p in &gad.input_plane {
            panel.dot(&mut body, p, true);
        }
        body.push_str("</g>\n");
    }
    document(cols as f64 * PANEL, rows as f64 * PANEL, &body)
}
