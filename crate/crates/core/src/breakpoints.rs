//! Break point selection along the Hamiltonian path and the subdivided
//! path `H*` carved into per-surface sub-paths.
//!
//! Starting from the second break point, each next break point `q` is the
//! first point after the current one `b` with
//! `d_H(b, q) = sqrt(eps) * d(s, q)`. On a segment `q(t) = p + t u` this is
//! the concave, strictly increasing function
//! `g(t) = (L0 + t) - sqrt(eps) * sqrt(t^2 + 2 t <u, p - s> + |p - s|^2)`,
//! whose zeros are the roots of a quadratic with leading coefficient
//! `1 - eps`.

use crate::error::{Result, SltError};
use crate::geometry::{dot, ArcPosition, Point, Polyline};
use crate::mst_path::HamPath;

/// Relative residual allowed on the defining equation.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Break points below this fraction of the path weight from the root are
/// treated as the path running into the root itself.
const ROOT_PROXIMITY: f64 = 1e-12;

/// How a break point was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BreakKind {
    /// The root itself, at arc length 0.
    Root,
    /// Far end of a path edge leaving the root.
    RootEdge,
    /// Solves the defining equation.
    Equation,
    /// The root again, where a path edge runs straight through it.
    RootPass,
    /// Path end, reached before the equation found a solution.
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakpointSet {
    pub positions: Vec<ArcPosition>,
    pub points: Vec<Point>,
    pub kinds: Vec<BreakKind>,
    pub eps: f64,
}

impl BreakpointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arc(&self, i: usize) -> f64 {
        self.positions[i].arc_len
    }

    /// `|d_H(b_i, b_{i+1}) - sqrt(eps) d(s, b_{i+1})| / d(s, b_{i+1})`.
    pub fn residual(&self, i: usize) -> f64 {
        let s = &self.points[0];
        let ds = s.distance(&self.points[i + 1]);
        let dh = self.arc(i + 1) - self.arc(i);
        (dh - self.eps.sqrt() * ds).abs() / ds
    }

    /// Whether `b_{i+1}` was fixed by the defining equation from `b_i`.
    pub fn solves_equation(&self, i: usize) -> bool {
        self.kinds.get(i + 1) == Some(&BreakKind::Equation)
    }

    pub fn truncated(&self) -> bool {
        self.kinds.last() == Some(&BreakKind::Truncated)
    }

    /// `sum_{i >= 2} d(s, b_i)` over every break point but the first.
    pub fn root_spoke_weight(&self) -> f64 {
        let s = &self.points[0];
        self.points[1..].iter().map(|b| s.distance(b)).sum()
    }
}

/// Smallest root of `a t^2 + b t + c` in `(lo, hi]`, if any.
fn smallest_root_in(a: f64, b: f64, c: f64, lo: f64, hi: f64) -> Option<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let mut roots = Vec::with_capacity(2);
    if q != 0.0 {
        roots.push(q / a);
        roots.push(c / q);
    } else {
        roots.push(0.0);
    }
    roots
        .into_iter()
        .filter(|&t| t > lo && t <= hi)
        .min_by(f64::total_cmp)
}

struct Segment<'a> {
    start: &'a Point,
    dir: Vec<f64>,
    len: f64,
    arc0: f64,
}

impl Segment<'_> {
    fn g(&self, s: &Point, from_arc: f64, sqrt_eps: f64, t: f64) -> f64 {
        let q = self.start.offset(&self.dir, t);
        (self.arc0 + t - from_arc) - sqrt_eps * q.distance(s)
    }

    /// First crossing of `g` to zero strictly after offset `lo`.
    fn crossing(&self, s: &Point, from_arc: f64, eps: f64, lo: f64) -> Option<f64> {
        let sqrt_eps = eps.sqrt();
        let diff = s.to(self.start);
        let l0 = self.arc0 - from_arc;
        let b = dot(&self.dir, &diff);
        let c = dot(&diff, &diff);
        let qa = 1.0 - eps;
        let qb = 2.0 * (l0 - eps * b);
        let qc = l0 * l0 - eps * c;
        let mut t = if qa.abs() < 1e-14 {
            self.bisect(s, from_arc, sqrt_eps, lo)?
        } else {
            // roots with l0 + t < 0 belong to the mirrored equation
            let t = smallest_root_in(qa, qb, qc, lo, self.len)?;
            if l0 + t < 0.0 {
                return None;
            }
            t
        };
        // Newton polish on g itself.
        for _ in 0..2 {
            let q = self.start.offset(&self.dir, t);
            let r = q.distance(s);
            if r == 0.0 {
                break;
            }
            let slope = 1.0 - sqrt_eps * (t + b) / r;
            if slope.abs() < 0.1 {
                break;
            }
            let next = t - self.g(s, from_arc, sqrt_eps, t) / slope;
            if next > lo && next <= self.len {
                t = next;
            }
        }
        Some(t)
    }

    /// Fallback: bisection on `[lo, argmax g]`, `g` being concave.
    fn bisect(&self, s: &Point, from_arc: f64, sqrt_eps: f64, lo: f64) -> Option<f64> {
        let (mut a, mut b) = (lo, self.len);
        // golden-section search for the concave maximum
        let phi = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let x1 = b - phi * (b - a);
            let x2 = a + phi * (b - a);
            if self.g(s, from_arc, sqrt_eps, x1) < self.g(s, from_arc, sqrt_eps, x2) {
                a = x1;
            } else {
                b = x2;
            }
        }
        let peak = 0.5 * (a + b);
        if self.g(s, from_arc, sqrt_eps, peak) < 0.0 {
            return None;
        }
        let (mut a, mut b) = (lo, peak);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if self.g(s, from_arc, sqrt_eps, m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        Some(b)
    }
}

/// Offset along the segment where it runs through `s`, if it does so
/// strictly after offset `lo`.
fn root_pass(seg: &Segment<'_>, s: &Point, lo: f64, tol: f64) -> Option<f64> {
    let t = dot(&seg.dir, &seg.start.to(s));
    if t <= lo || t >= seg.len {
        return None;
    }
    (seg.start.offset(&seg.dir, t).distance(s) <= tol).then_some(t)
}

/// Selects the break points of `path` for parameter `eps`.
///
/// The first break point is the root and the second is the far end of the
/// first path edge: from the root itself the defining equation has no
/// solution other than the root, since `d_H(s, q) >= d(s, q)`. The same
/// rule restarts wherever a path edge runs through the root.
pub fn select_breakpoints(path: &HamPath, eps: f64) -> Result<BreakpointSet> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(SltError::EpsOutOfRange(eps));
    }
    let h = &path.geometry;
    let verts = h.vertices();
    let cum = h.cum_len();
    let s = &verts[0];
    let total = h.total_length();
    let snap = 1e-12 * total.max(f64::MIN_POSITIVE);

    let mut set = BreakpointSet {
        positions: vec![h.locate(0.0)?],
        points: vec![s.clone()],
        kinds: vec![BreakKind::Root],
        eps,
    };
    if h.segment_count() == 0 {
        return Ok(set);
    }
    set.positions.push(h.locate(cum[1])?);
    set.points.push(verts[1].clone());
    set.kinds.push(BreakKind::RootEdge);

    let segment = |j: usize| {
        let len = h.segment_length(j);
        Segment {
            start: &verts[j],
            dir: verts[j].to(&verts[j + 1]).iter().map(|x| x / len).collect(),
            len,
            arc0: cum[j],
        }
    };

    let mut current = cum[1];
    while current < total {
        let mut found = None;
        // first segment starting at or containing `current`
        let mut j = cum.partition_point(|&c| c <= current).saturating_sub(1);
        let mut on_current_segment = true;
        while j < h.segment_count() {
            if h.segment_length(j) > 0.0 {
                let seg = segment(j);
                let lo = (current - cum[j]).max(0.0);
                if on_current_segment {
                    if let Some(t) = root_pass(&seg, s, lo, snap) {
                        found = Some((j, t, BreakKind::RootPass));
                        break;
                    }
                }
                if let Some(t) = seg.crossing(s, current, eps, lo) {
                    found = Some((j, t, BreakKind::Equation));
                    break;
                }
            }
            on_current_segment = false;
            j += 1;
        }
        let (arc, point, kind) = match found {
            None => (total, verts[verts.len() - 1].clone(), BreakKind::Truncated),
            Some((j, t, BreakKind::RootPass)) => (cum[j] + t, s.clone(), BreakKind::RootPass),
            Some((j, t, kind)) => {
                let arc = cum[j] + t;
                if total - arc <= snap {
                    (total, verts[verts.len() - 1].clone(), kind)
                } else if cum[j + 1] - arc <= snap {
                    (cum[j + 1], verts[j + 1].clone(), kind)
                } else if t <= snap && j > 0 {
                    (cum[j], verts[j].clone(), kind)
                } else {
                    let pos = ArcPosition {
                        segment_index: j,
                        t,
                        arc_len: arc,
                    };
                    (arc, h.point_at(&pos), kind)
                }
            }
        };
        if kind != BreakKind::RootPass && point.distance(s) <= ROOT_PROXIMITY * total {
            return Err(SltError::DegenerateRay(format!(
                "path grazes the root near arc length {arc}"
            )));
        }
        if arc <= current {
            return Err(SltError::InvalidInput(format!(
                "break point selection stalled at arc length {current}"
            )));
        }
        set.positions.push(h.locate(arc)?);
        set.points.push(point);
        set.kinds.push(kind);
        current = arc;
        if kind == BreakKind::RootPass {
            let j = cum.partition_point(|&c| c <= arc).saturating_sub(1);
            let end = cum[(j + 1).min(h.segment_count())];
            set.positions.push(h.locate(end)?);
            set.points
                .push(verts[(j + 1).min(h.segment_count())].clone());
            set.kinds.push(BreakKind::RootEdge);
            current = end;
        }
    }
    Ok(set)
}

/// One sub-path `H*_i` between consecutive break points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubPath {
    pub start_bp: usize,
    pub end_bp: usize,
    /// Inclusive range of `hstar` vertex indices.
    pub first_vertex: usize,
    pub last_vertex: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdividedPath {
    pub hstar: Polyline,
    /// For every `hstar` vertex, the input point index if it is one.
    pub source: Vec<Option<usize>>,
    /// `hstar` vertex index of every break point.
    pub bp_vertex: Vec<usize>,
    pub segments: Vec<SubPath>,
    pub eps: f64,
    /// Set when the last sub-path ends at a truncated break point.
    pub truncated: bool,
}

impl SubdividedPath {
    pub fn subpath_vertices(&self, seg: &SubPath) -> &[Point] {
        &self.hstar.vertices()[seg.first_vertex..=seg.last_vertex]
    }

    pub fn subpath_length(&self, seg: &SubPath) -> f64 {
        let cum = self.hstar.cum_len();
        cum[seg.last_vertex] - cum[seg.first_vertex]
    }
}

/// Inserts the break points into `path` as vertices.
pub fn subdivide(path: &HamPath, bps: &BreakpointSet) -> Result<SubdividedPath> {
    let h = &path.geometry;
    let verts = h.vertices();
    let cum = h.cum_len();
    let tol = 1e-12 * h.total_length().max(f64::MIN_POSITIVE);

    let mut out = Vec::with_capacity(verts.len() + bps.len());
    let mut source = Vec::with_capacity(verts.len() + bps.len());
    let mut bp_vertex = Vec::with_capacity(bps.len());
    let mut b = 0;
    for (j, v) in verts.iter().enumerate() {
        while b < bps.len() && bps.arc(b) < cum[j] - tol {
            bp_vertex.push(out.len());
            out.push(bps.points[b].clone());
            source.push(None);
            b += 1;
        }
        let idx = out.len();
        out.push(v.clone());
        source.push(Some(path.order[j]));
        while b < bps.len() && (bps.arc(b) - cum[j]).abs() <= tol {
            bp_vertex.push(idx);
            b += 1;
        }
    }
    if b != bps.len() {
        return Err(SltError::InvalidInput(
            "break points extend past the path end".into(),
        ));
    }
    let segments = bp_vertex
        .windows(2)
        .enumerate()
        .map(|(i, w)| SubPath {
            start_bp: i,
            end_bp: i + 1,
            first_vertex: w[0],
            last_vertex: w[1],
        })
        .collect();
    Ok(SubdividedPath {
        hstar: Polyline::new(out)?,
        source,
        bp_vertex,
        segments,
        eps: bps.eps,
        truncated: bps.truncated(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointCloud;
    use crate::mst_path::{dfs_hamiltonian, euclidean_mst};

    fn ham(pts: &[[f64; 2]]) -> HamPath {
        let cloud = PointCloud::new(pts.iter().map(|&c| Point::from(c)).collect(), 0).unwrap();
        HamPath {
            order: (0..pts.len()).collect(),
            geometry: Polyline::new(cloud.points().to_vec()).unwrap(),
        }
    }

    /// Bisection oracle for the first zero of g on a segment.
    fn bisect_oracle(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
        assert!(g(lo) < 0.0 && g(hi) > 0.0);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if g(m) < 0.0 {
                lo = m;
            } else {
                hi = m;
            }
        }
        hi
    }

    #[test]
    fn single_edge_path() {
        let h = ham(&[[0., 0.], [4., 0.]]);
        let b = select_breakpoints(&h, 0.25).unwrap();
        assert_eq!(b.points, vec![Point::from([0., 0.]), Point::from([4., 0.])]);
        assert!(!b.truncated());
    }

    #[test]
    fn l_path() {
        let h = ham(&[[0., 0.], [1., 0.], [1., 1.]]);
        let b = select_breakpoints(&h, 0.25).unwrap();
        assert_eq!(b.len(), 4);
        // t = 0.5 sqrt(1 + t^2)  =>  t = 1/sqrt(3)
        let oracle = bisect_oracle(|t| t - 0.5 * (1.0 + t * t).sqrt(), 0.0, 1.0);
        assert!((oracle - 1.0 / 3f64.sqrt()).abs() < 1e-12);
        assert!((b.points[2].coords()[1] - oracle).abs() < 1e-12);
        assert_eq!(b.points[2].coords()[0], 1.0);
        assert_eq!(b.points[3], Point::from([1., 1.]));
        assert!(b.truncated());
        assert!(b.solves_equation(1) && !b.solves_equation(2));
        assert_eq!(
            b.kinds,
            vec![
                BreakKind::Root,
                BreakKind::RootEdge,
                BreakKind::Equation,
                BreakKind::Truncated
            ]
        );
        assert!(b.residual(1) < 1e-12);

        let sub = subdivide(&h, &b).unwrap();
        assert_eq!(sub.hstar.len(), 4);
        assert_eq!(sub.bp_vertex, vec![0, 1, 2, 3]);
        assert_eq!(sub.source, vec![Some(0), Some(1), None, Some(2)]);
        assert!((sub.hstar.total_length() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn crossing_on_segment_heading_past_root() {
        // g is increasing on every segment (slope >= 1 - sqrt(eps)), so the
        // first sign change is the unique crossing.
        let h = ham(&[[0., 0.], [1., 0.], [1., 0.3], [-2., 0.3]]);
        let eps: f64 = 0.5;
        let b = select_breakpoints(&h, eps).unwrap();
        assert!(0.3 - eps.sqrt() * (1.0f64 + 0.09).sqrt() < 0.0);
        let g = |t: f64| 0.3 + t - eps.sqrt() * ((1.0 - t).powi(2) + 0.09).sqrt();
        let t = bisect_oracle(g, 0.0, 3.0);
        let expect = Point::from([1.0 - t, 0.3]);
        assert!(b.points[2].distance(&expect) < 1e-10, "{:?}", b.points);
    }

    #[test]
    fn residuals_hold_on_random_walks() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<Point> = (0..40)
                .map(|_| Point::new((0..3).map(|_| rng.gen::<f64>()).collect()).unwrap())
                .collect();
            let cloud = PointCloud::new(pts, 0).unwrap();
            let h = dfs_hamiltonian(&euclidean_mst(&cloud).unwrap(), &cloud).unwrap();
            for eps in [0.25, 0.04] {
                let b = select_breakpoints(&h, eps).unwrap();
                for i in 0..b.len() - 1 {
                    assert!(b.arc(i + 1) > b.arc(i));
                    if b.solves_equation(i) {
                        assert!(b.residual(i) <= RESIDUAL_TOL, "residual {}", b.residual(i));
                    } else if i >= 1 {
                        let dh = b.arc(i + 1) - b.arc(i);
                        assert!(dh <= eps.sqrt() * b.points[0].distance(&b.points[i + 1]));
                    }
                }
                assert_eq!(b.arc(b.len() - 1), h.weight());
                let sub = subdivide(&h, &b).unwrap();
                assert!((sub.hstar.total_length() - h.weight()).abs() <= 1e-9 * h.weight());
            }
        }
    }

    #[test]
    fn eps_range() {
        let h = ham(&[[0., 0.], [1., 0.]]);
        assert_eq!(
            select_breakpoints(&h, 0.0).unwrap_err(),
            SltError::EpsOutOfRange(0.0)
        );
        assert!(select_breakpoints(&h, 1.0).is_err());
    }

    #[test]
    fn path_through_root_restarts_at_root() {
        let h = ham(&[[0., 0.], [1., 0.], [-1., 0.], [-1., 1.]]);
        let b = select_breakpoints(&h, 0.04).unwrap();
        // b_1 already lies on the edge through the root, so the walk jumps there
        assert_eq!(
            b.kinds[..4].to_vec(),
            vec![
                BreakKind::Root,
                BreakKind::RootEdge,
                BreakKind::RootPass,
                BreakKind::RootEdge,
            ]
        );
        assert_eq!(b.points[2], Point::from([0., 0.]));
        assert_eq!(b.arc(2), 2.0);
        assert_eq!(b.points[3], Point::from([-1., 0.]));
        assert_eq!(b.arc(3), 3.0);
        for i in 3..b.len() - 1 {
            if b.solves_equation(i) {
                assert!(b.residual(i).abs() < RESIDUAL_TOL);
            }
        }
        let sub = subdivide(&h, &b).unwrap();
        assert_eq!(sub.hstar.vertices()[2], Point::from([0., 0.]));
        assert_eq!(sub.source[2], None);
    }

    #[test]
    fn breakpoints_on_vertices_keep_path() {
        let h = ham(&[[0., 0.], [2., 0.]]);
        let b = select_breakpoints(&h, 0.04).unwrap();
        let sub = subdivide(&h, &b).unwrap();
        assert_eq!(sub.hstar, h.geometry);
        assert_eq!(sub.segments.len(), 1);
    }
}
