//! Dimension-generic points, polylines and the planar rotation helper.
//!
//! Everything here works in 64-bit floating point. Two points are treated
//! as coincident when every coordinate differs by less than [`COINCIDENT_TOL`].

use serde::{Deserialize, Serialize};

use crate::error::{Result, SltError};

/// Max-coordinate difference under which two points count as equal.
pub const COINCIDENT_TOL: f64 = 1e-12;

/// Slack allowed when checking an angle argument against its valid range.
pub const ANGLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    /// Checked constructor: at least two coordinates, all finite.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(SltError::InvalidPoint(format!(
                "need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_finite()) {
            return Err(SltError::InvalidPoint(format!("non-finite coordinate {c}")));
        }
        Ok(Self(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Euclidean distance. Dimensions are assumed equal; see [`dist`] for
    /// the checked version.
    pub fn distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        norm_sq_diff(&self.0, &other.0).sqrt()
    }

    pub fn coincides(&self, other: &Point) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .all(|(a, b)| (a - b).abs() < COINCIDENT_TOL)
    }

    /// `self + t * dir`.
    pub fn offset(&self, dir: &[f64], t: f64) -> Point {
        Point(self.0.iter().zip(dir).map(|(a, d)| a + t * d).collect())
    }

    pub fn lerp(&self, other: &Point, t: f64) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| a + t * (b - a))
                .collect(),
        )
    }

    /// Vector `other - self`.
    pub fn to(&self, other: &Point) -> Vec<f64> {
        other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect()
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

impl From<[f64; 3]> for Point {
    fn from(c: [f64; 3]) -> Self {
        Point(c.to_vec())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn norm_sq_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_dims(p: &Point, q: &Point) -> Result<()> {
    if p.dim() != q.dim() {
        return Err(SltError::DimensionMismatch {
            left: p.dim(),
            right: q.dim(),
        });
    }
    Ok(())
}

pub fn dist(p: &Point, q: &Point) -> Result<f64> {
    check_dims(p, q)?;
    Ok(p.distance(q))
}

/// Angle in `[0, pi]` between the rays `s->u` and `s->v`.
///
/// Uses `2 atan2(| |b| a - |a| b |, | |b| a + |a| b |)`, which keeps full
/// relative accuracy for angles near 0 and near pi in any dimension.
pub fn angle_at_apex(s: &Point, u: &Point, v: &Point) -> Result<f64> {
    check_dims(s, u)?;
    check_dims(s, v)?;
    if u.coincides(s) || v.coincides(s) {
        return Err(SltError::DegenerateRay(
            "ray endpoint coincides with the apex".into(),
        ));
    }
    Ok(angle_between(&s.to(u), &s.to(v)))
}

pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let mut diff = 0.0;
    let mut sum = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x * nb - y * na;
        let s = x * nb + y * na;
        diff += d * d;
        sum += s * s;
    }
    2.0 * diff.sqrt().atan2(sum.sqrt())
}

/// Orthonormal frame of the 2-plane through `s` spanned by `u - s` and
/// `v - s`, with the first axis along `u - s`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFrame {
    pub origin: Point,
    pub e1: Vec<f64>,
    /// `None` when `v - s` is parallel to `u - s` (a zero-angle sector).
    pub e2: Option<Vec<f64>>,
    pub angle: f64,
}

impl PlaneFrame {
    pub fn new(s: &Point, u: &Point, v: &Point) -> Result<Self> {
        let angle = angle_at_apex(s, u, v)?;
        let a = s.to(u);
        let b = s.to(v);
        let na = norm(&a);
        let e1: Vec<f64> = a.iter().map(|x| x / na).collect();
        let proj = dot(&b, &e1);
        let w: Vec<f64> = b.iter().zip(&e1).map(|(x, e)| x - proj * e).collect();
        let nw = norm(&w);
        let e2 = if nw <= 1e-15 * norm(&b) || angle == 0.0 {
            if proj < 0.0 {
                return Err(SltError::DegenerateRay("antiparallel rays".into()));
            }
            None
        } else {
            if std::f64::consts::PI - angle < 1e-12 {
                return Err(SltError::DegenerateRay("antiparallel rays".into()));
            }
            Some(w.iter().map(|x| x / nw).collect())
        };
        Ok(Self {
            origin: s.clone(),
            e1,
            e2,
            angle,
        })
    }

    /// Point at polar coordinates `(r, theta)` of the sector, `theta`
    /// measured from the first ray toward the second.
    pub fn point_at(&self, theta: f64, r: f64) -> Result<Point> {
        if !(-ANGLE_TOL..=self.angle + ANGLE_TOL).contains(&theta) {
            return Err(SltError::AngleOutOfRange {
                angle: theta,
                max: self.angle,
            });
        }
        let theta = theta.clamp(0.0, self.angle);
        let (sn, cs) = theta.sin_cos();
        let coords = match &self.e2 {
            Some(e2) => self
                .origin
                .coords()
                .iter()
                .zip(self.e1.iter().zip(e2))
                .map(|(o, (a, b))| o + r * (cs * a + sn * b))
                .collect(),
            None => self
                .origin
                .coords()
                .iter()
                .zip(&self.e1)
                .map(|(o, a)| o + r * a)
                .collect(),
        };
        Ok(Point(coords))
    }

    /// Polar coordinates `(r, theta)` of a point lying in the sector.
    pub fn polar_of(&self, p: &Point) -> (f64, f64) {
        let v = self.origin.to(p);
        let r = norm(&v);
        if r == 0.0 {
            return (0.0, 0.0);
        }
        let x = dot(&v, &self.e1);
        let y = match &self.e2 {
            Some(e2) => dot(&v, e2),
            None => 0.0,
        };
        let theta = y.atan2(x).clamp(0.0, self.angle);
        (r, theta)
    }
}

/// `s + r * w` where `w` is the unit vector in the span of `u - s`, `v - s`
/// at angle `theta` from `u - s`, rotating toward `v`.
pub fn rotate_in_span(s: &Point, u: &Point, v: &Point, theta: f64, r: f64) -> Result<Point> {
    PlaneFrame::new(s, u, v)?.point_at(theta, r)
}

/// Position on a polyline addressed by segment and offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcPosition {
    pub segment_index: usize,
    pub t: f64,
    pub arc_len: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    vertices: Vec<Point>,
    cum_len: Vec<f64>,
}

impl Polyline {
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(SltError::InvalidInput("empty polyline".into()));
        }
        let dim = vertices[0].dim();
        let mut cum_len = Vec::with_capacity(vertices.len());
        cum_len.push(0.0);
        for w in vertices.windows(2) {
            check_dims(&w[0], &w[1])?;
            debug_assert_eq!(w[0].dim(), dim);
            let last = *cum_len.last().unwrap();
            cum_len.push(last + w[0].distance(&w[1]));
        }
        Ok(Self { vertices, cum_len })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cum_len(&self) -> &[f64] {
        &self.cum_len
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn total_length(&self) -> f64 {
        *self.cum_len.last().unwrap()
    }

    pub fn segment_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn segment_length(&self, j: usize) -> f64 {
        self.cum_len[j + 1] - self.cum_len[j]
    }

    /// Segment and offset containing arc length `arc`. Positions on a shared
    /// vertex resolve to the later segment, except at the very end.
    pub fn locate(&self, arc: f64) -> Result<ArcPosition> {
        let total = self.total_length();
        let tol = 1e-12 * total.max(1.0);
        if !(-tol..=total + tol).contains(&arc) || arc.is_nan() {
            return Err(SltError::ArcOutOfRange { arc, total });
        }
        let arc = arc.clamp(0.0, total);
        if self.segment_count() == 0 {
            return Ok(ArcPosition {
                segment_index: 0,
                t: 0.0,
                arc_len: 0.0,
            });
        }
        // last index with cum_len <= arc
        let j = self
            .cum_len
            .partition_point(|&c| c <= arc)
            .saturating_sub(1)
            .min(self.segment_count() - 1);
        Ok(ArcPosition {
            segment_index: j,
            t: (arc - self.cum_len[j]).clamp(0.0, self.segment_length(j)),
            arc_len: arc,
        })
    }

    pub fn point_at(&self, pos: &ArcPosition) -> Point {
        if self.segment_count() == 0 {
            return self.vertices[0].clone();
        }
        let j = pos.segment_index;
        let len = self.segment_length(j);
        if len == 0.0 {
            return self.vertices[j].clone();
        }
        if pos.t >= len {
            return self.vertices[j + 1].clone();
        }
        self.vertices[j].lerp(&self.vertices[j + 1], pos.t / len)
    }
}

/// Point at arc length `arc` along `path`.
pub fn point_at_arc(path: &Polyline, arc: f64) -> Result<Point> {
    let pos = path.locate(arc)?;
    Ok(path.point_at(&pos))
}

/// Finite point set with a distinguished root.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point>,
    root: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Point>, root: usize) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(SltError::InvalidInput("empty point cloud".into()));
        };
        let dim = first.dim();
        for p in &points {
            if p.dim() != dim {
                return Err(SltError::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
        }
        if root >= points.len() {
            return Err(SltError::InvalidInput(format!(
                "root {root} out of range for {} points",
                points.len()
            )));
        }
        Ok(Self { points, root })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn root_point(&self) -> &Point {
        &self.points[self.root]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }

    /// Index pairs `(i, j)`, `i < j`, of coincident points.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| {
            self.points[a].coords()[0]
                .total_cmp(&self.points[b].coords()[0])
                .then(a.cmp(&b))
        });
        let mut dups = Vec::new();
        for (k, &a) in order.iter().enumerate() {
            let xa = self.points[a].coords()[0];
            for &b in &order[k + 1..] {
                if self.points[b].coords()[0] - xa >= COINCIDENT_TOL {
                    break;
                }
                if self.points[a].coincides(&self.points[b]) {
                    dups.push((a.min(b), a.max(b)));
                }
            }
        }
        dups.sort_unstable();
        dups
    }
}
