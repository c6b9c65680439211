//! Instance generators. Every generator puts the root at index 0.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::core2d::{CoreInstance, DEFAULT_LAMBDA};
use crate::error::{Result, SltError};
use crate::geometry::{Point, PointCloud};
use crate::pipeline::sample_count;
use crate::pyramid::{pyramid_points, GridSpec};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(SltError::EpsOutOfRange(eps))
    }
}

/// `ceil(sqrt(1/eps))` evenly spaced points on the unit circle, root on the
/// positive x-axis.
pub fn circle(eps: f64) -> Result<PointCloud> {
    check_eps(eps)?;
    let n = sample_count(eps).max(2);
    let pts = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            Point::from([a.cos(), a.sin()])
        })
        .collect();
    PointCloud::new(pts, 0)
}

/// Pyramid apex followed by `n` grid points in the base of the root pyramid.
pub fn grid(d: usize, n: usize, eps: f64) -> Result<PointCloud> {
    check_eps(eps)?;
    pyramid_points(d, eps, &GridSpec::new(n, d)?)
}

/// `n` points uniform in the unit cube `[0, 1]^d`, root at index 0.
pub fn random(d: usize, n: usize, seed: u64) -> Result<PointCloud> {
    if d == 0 || n == 0 {
        return Err(SltError::InvalidInput(
            "random needs d >= 1 and n >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| Point::new((0..d).map(|_| rng.gen::<f64>()).collect()))
        .collect::<Result<Vec<_>>>()?;
    let cloud = PointCloud::new(pts, 0)?;
    if !cloud.duplicates().is_empty() {
        return Err(SltError::DuplicatePoints(cloud.duplicates()));
    }
    Ok(cloud)
}

/// Unit-leg isosceles triangle with apex angle `sqrt(eps)`: the apex, then
/// `n >= 2` evenly spaced base points including both base corners.
pub fn core(eps: f64, n: usize) -> Result<PointCloud> {
    if n < 2 {
        return Err(SltError::InvalidInput(
            "core needs at least two base points".into(),
        ));
    }
    let params: Vec<f64> = (0..n).map(|j| j as f64 / (n - 1) as f64).collect();
    let inst = CoreInstance::unit(eps, DEFAULT_LAMBDA, &params)?;
    let pts = std::iter::once(inst.apex)
        .chain(inst.base_points)
        .map(|p| Point::from([p.x, p.y]))
        .collect();
    PointCloud::new(pts, 0)
}

/// Random rotation matrix of size `d`, rows orthonormal.
pub fn random_rotation(d: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(d);
    while rows.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for r in &rows {
            let dot: f64 = v.iter().zip(r).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(r).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            rows.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    rows
}

/// Zero-pads `pts` to dimension `d` and applies a random rotation.
pub fn embed(pts: &PointCloud, d: usize, seed: u64) -> Result<PointCloud> {
    if d < pts.dim() {
        return Err(SltError::DimensionMismatch {
            left: pts.dim(),
            right: d,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rot = random_rotation(d, &mut rng);
    let out = pts
        .points()
        .iter()
        .map(|p| {
            let c = p.coords();
            Point::new(
                rot.iter()
                    .map(|row| row.iter().zip(c).map(|(a, b)| a * b).sum())
                    .collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    PointCloud::new(out, pts.root())
}
