//! Folded cone surfaces over the sub-paths of `H*` and their isometric
//! unfolding into the plane.
//!
//! A surface is a fan of planar sectors ("cones") with common apex `s`,
//! glued along shared rays. Unfolding lays the fan out counterclockwise
//! with `s` at the origin and the first ray on the positive x-axis; the
//! planar polar angle of a point is the accumulated cone angle `Θ_j` plus
//! its angle inside cone `j`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Sub};

use crate::breakpoints::SubdividedPath;
use crate::error::{Result, SltError};
use crate::geometry::{PlaneFrame, Point, Polyline, ANGLE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanePoint {
    pub x: f64,
    pub y: f64,
}

impl PlanePoint {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: r * c, y: r * s }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, o: PlanePoint) -> f64 {
        (self.x - o.x).hypot(self.y - o.y)
    }

    pub fn lerp(self, o: PlanePoint, t: f64) -> PlanePoint {
        PlanePoint::new(self.x + t * (o.x - self.x), self.y + t * (o.y - self.y))
    }

    pub fn dot(self, o: PlanePoint) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: PlanePoint) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn scale(self, k: f64) -> PlanePoint {
        PlanePoint::new(self.x * k, self.y * k)
    }
}

impl Add for PlanePoint {
    type Output = PlanePoint;

    fn add(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for PlanePoint {
    type Output = PlanePoint;

    fn sub(self, o: PlanePoint) -> PlanePoint {
        PlanePoint::new(self.x - o.x, self.y - o.y)
    }
}

/// Sector spanned by the rays `apex->ray_a` and `apex->ray_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cone {
    pub apex: Point,
    pub ray_a: Point,
    pub ray_b: Point,
    pub angle: f64,
    frame: PlaneFrame,
}

impl Cone {
    pub fn new(apex: &Point, ray_a: &Point, ray_b: &Point) -> Result<Self> {
        let frame = PlaneFrame::new(apex, ray_a, ray_b)?;
        Ok(Self {
            apex: apex.clone(),
            ray_a: ray_a.clone(),
            ray_b: ray_b.clone(),
            angle: frame.angle,
            frame,
        })
    }

    pub fn frame(&self) -> &PlaneFrame {
        &self.frame
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldedSurface {
    pub cones: Vec<Cone>,
    /// `cum_angle[j]` is the planar angle of the ray shared by cones `j-1`
    /// and `j`; `cum_angle[0] = 0` and the last entry is the total angle.
    pub cum_angle: Vec<f64>,
    /// `hstar` vertex index of every ray, one more than the cone count.
    pub ray_vertex: Vec<usize>,
    /// Index of the sub-path `H*_i` this surface covers.
    pub subpath: usize,
    pub truncated: bool,
    /// Set on pieces produced by splitting a surface of angle `>= pi`.
    pub split: bool,
}

impl FoldedSurface {
    pub fn apex(&self) -> &Point {
        &self.cones[0].apex
    }

    pub fn total_angle(&self) -> f64 {
        *self.cum_angle.last().unwrap()
    }

    pub fn cone_count(&self) -> usize {
        self.cones.len()
    }

    /// Planar image of a point given by cone index and local polar coordinates.
    pub fn unfold(&self, cone: usize, r: f64, theta_local: f64) -> Result<PlanePoint> {
        let c = self
            .cones
            .get(cone)
            .ok_or_else(|| SltError::InvalidInput(format!("cone {cone} out of range")))?;
        if r < 0.0 || !(-ANGLE_TOL..=c.angle + ANGLE_TOL).contains(&theta_local) {
            return Err(SltError::AngleOutOfRange {
                angle: theta_local,
                max: c.angle,
            });
        }
        let theta = self.cum_angle[cone] + theta_local.clamp(0.0, c.angle);
        Ok(PlanePoint::from_polar(r, theta))
    }

    /// Planar image of a point of `R^d` lying in cone `cone`.
    pub fn unfold_point(&self, cone: usize, p: &Point) -> Result<PlanePoint> {
        let c = self
            .cones
            .get(cone)
            .ok_or_else(|| SltError::InvalidInput(format!("cone {cone} out of range")))?;
        let (r, theta) = c.frame.polar_of(p);
        self.unfold(cone, r, theta)
    }

    /// Planar image of ray vertex `j` (`0 <= j <= cone_count`).
    pub fn unfold_ray_vertex(&self, j: usize) -> PlanePoint {
        let p = if j < self.cones.len() {
            &self.cones[j].ray_a
        } else {
            &self.cones[j - 1].ray_b
        };
        PlanePoint::from_polar(self.apex().distance(p), self.cum_angle[j])
    }

    /// Cone containing planar polar angle `theta` (clamped to the surface).
    fn cone_at(&self, theta: f64) -> usize {
        self.cum_angle
            .partition_point(|&c| c <= theta)
            .saturating_sub(1)
            .min(self.cones.len() - 1)
    }

    fn polar_angle(&self, q: PlanePoint) -> Result<f64> {
        let theta = q.angle();
        let total = self.total_angle();
        if !(-ANGLE_TOL..=total + ANGLE_TOL).contains(&theta) {
            return Err(SltError::AngleOutOfRange {
                angle: theta,
                max: total,
            });
        }
        Ok(theta.clamp(0.0, total))
    }

    /// Inverse of the unfolding: the point of the surface mapped to `q`.
    pub fn lift(&self, q: PlanePoint) -> Result<Point> {
        let r = q.norm();
        if r == 0.0 {
            return Ok(self.apex().clone());
        }
        let theta = self.polar_angle(q)?;
        let j = self.cone_at(theta);
        let local = (theta - self.cum_angle[j]).clamp(0.0, self.cones[j].angle);
        self.cones[j].frame.point_at(local, r)
    }

    /// Lifts the planar segment `q1 q2`, bending at every cone boundary it
    /// crosses, so that the lifted length equals the planar length.
    pub fn lift_segment(&self, q1: PlanePoint, q2: PlanePoint) -> Result<Polyline> {
        let start = self.lift(q1)?;
        if q1.distance(q2) == 0.0 {
            return Polyline::new(vec![start]);
        }
        let end = self.lift(q2)?;
        let t1 = if q1.norm() == 0.0 {
            self.polar_angle(q2)?
        } else {
            self.polar_angle(q1)?
        };
        let t2 = if q2.norm() == 0.0 {
            t1
        } else {
            self.polar_angle(q2)?
        };
        let (lo, hi) = (t1.min(t2), t1.max(t2));
        let d = q2 - q1;
        let mut crossings: Vec<f64> = Vec::new();
        let mut last_angle = f64::NAN;
        for &c in &self.cum_angle[1..self.cum_angle.len() - 1] {
            if c <= lo || c >= hi || c == last_angle {
                continue;
            }
            last_angle = c;
            let dir = PlanePoint::from_polar(1.0, c);
            let denom = dir.cross(d);
            if denom == 0.0 {
                continue;
            }
            let t = -dir.cross(q1) / denom;
            if t > 0.0 && t < 1.0 {
                crossings.push(t);
            }
        }
        crossings.sort_by(f64::total_cmp);
        let mut verts = vec![start];
        for t in crossings {
            let p = self.lift(q1.lerp(q2, t))?;
            if !p.coincides(verts.last().unwrap()) {
                verts.push(p);
            }
        }
        if !end.coincides(verts.last().unwrap()) || verts.len() == 1 {
            verts.push(end);
        }
        Polyline::new(verts)
    }
}

/// `sqrt(eps) / (2 (1 - sqrt(eps)))`: the angle bound claimed for
/// non-truncated surfaces.
pub fn halved_sweep_bound(eps: f64) -> f64 {
    let r = eps.sqrt();
    r / (2.0 * (1.0 - r))
}

/// `sqrt(eps) / (1 - sqrt(eps))`: the sweep of a sub-path of length
/// `sqrt(eps) d(s, b)` that stays at distance `>= (1 - sqrt(eps)) d(s, b)`
/// from the apex.
pub fn sweep_bound(eps: f64) -> f64 {
    let r = eps.sqrt();
    r / (1.0 - r)
}

fn cones_over(apex: &Point, rays: &[(usize, &Point)]) -> Result<Vec<Cone>> {
    if rays.len() == 1 {
        return Ok(vec![Cone::new(apex, rays[0].1, rays[0].1)?]);
    }
    rays.windows(2)
        .map(|w| Cone::new(apex, w[0].1, w[1].1))
        .collect()
}

fn make_surface(
    cones: Vec<Cone>,
    ray_vertex: Vec<usize>,
    subpath: usize,
    truncated: bool,
    split: bool,
) -> FoldedSurface {
    let mut cum_angle = Vec::with_capacity(cones.len() + 1);
    cum_angle.push(0.0);
    for c in &cones {
        cum_angle.push(cum_angle.last().unwrap() + c.angle);
    }
    FoldedSurface {
        cones,
        cum_angle,
        ray_vertex,
        subpath,
        truncated,
        split,
    }
}

/// One surface per sub-path of `sub`, in path order.
///
/// Zero-length path edges are dropped; the root vertex at the start of the
/// first sub-path, or bounding any sub-path, is skipped. A surface of
/// total angle `>= pi` is split at cone boundaries into pieces of angle
/// at most `pi/2` (a single wider cone forms its own piece).
pub fn build_surfaces(sub: &SubdividedPath, s: &Point) -> Result<Vec<FoldedSurface>> {
    let verts = sub.hstar.vertices();
    let last_seg = sub.segments.len().saturating_sub(1);
    let mut out = Vec::with_capacity(sub.segments.len());
    for (i, seg) in sub.segments.iter().enumerate() {
        let mut rays: Vec<(usize, &Point)> = Vec::new();
        for (idx, v) in verts
            .iter()
            .enumerate()
            .take(seg.last_vertex + 1)
            .skip(seg.first_vertex)
        {
            if v.coincides(s) {
                // the root may only bound a sub-path, never sit inside one
                if idx == seg.first_vertex || idx == seg.last_vertex {
                    continue;
                }
                return Err(SltError::DegenerateRay(format!(
                    "path vertex {idx} coincides with the root"
                )));
            }
            if rays.last().is_some_and(|(_, p)| p.coincides(v)) {
                continue;
            }
            rays.push((idx, v));
        }
        if rays.is_empty() {
            return Err(SltError::EmptySurface(i));
        }
        let truncated = sub.truncated && i == last_seg;
        let cones = cones_over(s, &rays)?;
        let mut ray_vertex: Vec<usize> = rays.iter().map(|r| r.0).collect();
        if cones.len() == 1 && rays.len() == 1 {
            ray_vertex.push(rays[0].0);
        }
        let total: f64 = cones.iter().map(|c| c.angle).sum();
        if total < PI {
            out.push(make_surface(cones, ray_vertex, i, truncated, false));
            continue;
        }
        let mut start = 0;
        let mut acc = 0.0;
        for j in 0..cones.len() {
            if j > start && acc + cones[j].angle > FRAC_PI_2 {
                out.push(make_surface(
                    cones[start..j].to_vec(),
                    ray_vertex[start..=j].to_vec(),
                    i,
                    false,
                    true,
                ));
                start = j;
                acc = 0.0;
            }
            acc += cones[j].angle;
        }
        out.push(make_surface(
            cones[start..].to_vec(),
            ray_vertex[start..].to_vec(),
            i,
            truncated,
            true,
        ));
    }
    Ok(out)
}
