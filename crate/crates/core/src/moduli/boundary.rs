//! Sampling points of `bdry(S_f)`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::ConvexExpr;
use crate::sampling::{box_points, rng, BoxDomain};
use crate::vecops::{axpy, sub};

/// Interior–exterior segment bisected to produce one boundary point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySegment {
    pub inner: Vec<f64>,
    pub outer: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub points: Vec<Vec<f64>>,
    pub segments: Vec<BoundarySegment>,
}

/// Tolerance on `|f(p)|` for a boundary point found from endpoints of size `scale`.
pub fn boundary_tol(scale: f64) -> f64 {
    1e-9 * (1.0 + scale)
}

pub fn boundary_sample(f: &ConvexExpr, b: &BoxDomain, n: usize, seed: u64) -> Result<BoundarySample> {
    check_dim(f.dim(), b.dim())?;
    if n == 0 {
        return Err(Error::Precondition("boundary sample count must be positive".into()));
    }
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for p in box_points(b, (4 * n).max(256), seed) {
        let v = f.value(&p);
        if v < 0.0 {
            inside.push(p);
        } else if v > 0.0 {
            outside.push(p);
        }
    }
    if inside.is_empty() || outside.is_empty() {
        return Err(Error::NoSignChangeInBox);
    }
    let mut pick = rng(seed ^ 0xb0da);
    let mut points = Vec::with_capacity(n);
    let mut segments = Vec::with_capacity(n);
    for _ in 0..n {
        let inner = inside[pick.random_range(0..inside.len())].clone();
        let outer = outside[pick.random_range(0..outside.len())].clone();
        let (p, iterations) = bisect_zero(f, &inner, &outer);
        points.push(p);
        segments.push(BoundarySegment {
            inner,
            outer,
            iterations,
        });
    }
    Ok(BoundarySample { points, segments })
}

/// Zero of `f` on `[inner, outer]` with `f(inner) < 0 < f(outer)`.
fn bisect_zero(f: &ConvexExpr, inner: &[f64], outer: &[f64]) -> (Vec<f64>, usize) {
    let d = sub(outer, inner);
    let scale = f.value(inner).abs().max(f.value(outer).abs());
    let tol = 1e-3 * boundary_tol(scale);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best = (f64::INFINITY, 0.0);
    let mut iterations = 0;
    while iterations < 200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f.value(&axpy(inner, mid, &d));
        if v.abs() < best.0 {
            best = (v.abs(), mid);
        }
        if v.abs() <= tol {
            break;
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    for t in [lo, hi] {
        let v = f.value(&axpy(inner, t, &d)).abs();
        if v < best.0 {
            best = (v, t);
        }
    }
    (axpy(inner, best.1, &d), iterations)
}
