//! Distance from an infeasible point to `S_f = {f ≤ 0}`.
//!
//! Feasible points give upper bounds; projections onto polyhedral outer
//! approximations built from subgradient cuts give lower bounds. The two are
//! refined until they meet.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::ConvexExpr;
use crate::geometry::SubdiffSet;
use crate::sampling::{box_points, BoxDomain};
use crate::sphere::beta;
use crate::vecops::{axpy, dist, dot, norm, sub};

const POLYAK_STEPS: usize = 200;
const CUT_ITERATIONS: usize = 100;
const MAX_CUTS: usize = 32;
const GAP_TOL: f64 = 1e-8;
const SCAN_SMALL: usize = 1024;
const SCAN_LARGE: usize = 65536;
const DESCENT_ROUNDS: usize = 20;

/// A point that makes distances to `S_f` computable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "point", rename_all = "snake_case")]
pub enum Anchor {
    /// `f(s) < 0`
    Slater(Vec<f64>),
    /// `S_f = {p}`: `f(p) = 0` and `β(f, p) > 0`, so `p` is a sharp minimizer.
    Singleton(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceEstimate {
    /// Distance to the best feasible point found.
    pub upper: f64,
    /// Certified lower bound on `d(x, S_f)`.
    pub lower: f64,
    pub nearest: Vec<f64>,
    pub iterations: usize,
}

/// Search box used when no box is supplied: a cube around `x` scaled to its size.
pub fn default_search_box(x: &[f64]) -> BoxDomain {
    let r = 10.0 * (1.0 + x.iter().fold(0.0f64, |a, v| a.max(v.abs())));
    BoxDomain::around(x, r).expect("finite point")
}

/// Upper-bounding estimate of `d(x, S_f)`; zero when `f(x) ≤ 0`.
pub fn distance_to_solution_set(f: &ConvexExpr, x: &[f64], slater: Option<&[f64]>) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    if f.value(x) <= 0.0 {
        return Ok(0.0);
    }
    let anchor = match slater {
        Some(_) => locate_anchor(f, slater, None, &default_search_box(x), 0)?,
        None => Anchor::Slater(find_slater_point(f, &default_search_box(x), Some(x), 0)?),
    };
    Ok(distance_from_anchor(f, x, &anchor)?.upper)
}

/// Strictly feasible point: descent from `hint`, then a seeded box scan with
/// descent from the best scanned point.
pub fn find_slater_point(
    f: &ConvexExpr,
    search: &BoxDomain,
    hint: Option<&[f64]>,
    seed: u64,
) -> Result<Vec<f64>> {
    check_dim(f.dim(), search.dim())?;
    if let Some(h0) = hint {
        check_dim(f.dim(), h0.len())?;
        if let Some(p) = descent_probe(f, h0)? {
            return Ok(p);
        }
    }
    for n in [SCAN_SMALL, SCAN_LARGE] {
        let best = box_points(search, n, seed)
            .into_iter()
            .map(|p| (f.value(&p), p))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        if let Some((_, p)) = best {
            if let Some(p) = descent_probe(f, &p)? {
                return Ok(p);
            }
        }
    }
    Err(Error::NoSlaterPoint)
}

/// Steepest-descent rounds with exact line search; stops at the first point with `f < 0`.
fn descent_probe(f: &ConvexExpr, start: &[f64]) -> Result<Option<Vec<f64>>> {
    let mut y = start.to_vec();
    for _ in 0..DESCENT_ROUNDS {
        let fy = f.value(&y);
        if fy < 0.0 {
            return Ok(Some(y));
        }
        let g = min_norm_subgradient(&f.subdifferential(&y)?)?;
        let gn = norm(&g);
        if gn <= 1e-14 {
            return Ok(None);
        }
        let h: Vec<f64> = g.iter().map(|v| -v / gn).collect();
        let phi = |t: f64| f.value(&axpy(&y, t, &h));
        let mut hi = (fy / gn).max(1e-12 * (1.0 + norm(&y)));
        while hi < 1e15 && phi(2.0 * hi) < phi(hi) {
            hi *= 2.0;
        }
        hi *= 2.0;
        let t = golden_section(phi, 0.0, hi);
        let next = axpy(&y, t, &h);
        if f.value(&next) >= fy {
            return Ok(None);
        }
        y = next;
    }
    Ok((f.value(&y) < 0.0).then_some(y))
}

/// Minimizer of a convex function on `[a, b]`.
fn golden_section(phi: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..120 {
        if fc < 0.0 {
            return c;
        }
        if fd < 0.0 {
            return d;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
    }
    if fc <= fd {
        c
    } else {
        d
    }
}

/// Picks the anchor for distance computations.
///
/// A declared Slater point is validated. A reference point that is a sharp
/// zero of `f` pins `S_f` down to that single point. Otherwise the box is searched.
pub fn locate_anchor(
    f: &ConvexExpr,
    declared: Option<&[f64]>,
    reference: Option<&[f64]>,
    search: &BoxDomain,
    seed: u64,
) -> Result<Anchor> {
    if let Some(s) = declared {
        check_dim(f.dim(), s.len())?;
        let v = f.value(s);
        if v < 0.0 {
            return Ok(Anchor::Slater(s.to_vec()));
        }
        return Err(Error::Precondition(format!(
            "declared slater point has f = {v}, expected f < 0"
        )));
    }
    if let Some(r) = reference {
        check_dim(f.dim(), r.len())?;
        if f.value(r).abs() <= 1e-9 && beta(f, r)?.beta > 0.0 {
            return Ok(Anchor::Singleton(r.to_vec()));
        }
    }
    find_slater_point(f, search, reference, seed).map(Anchor::Slater)
}

/// Feasible end of the zero crossing on `[a, s]`, where `f(a) > 0 > f(s)`.
pub(crate) fn bisect_to_boundary(f: &ConvexExpr, a: &[f64], s: &[f64]) -> Vec<f64> {
    let d = sub(s, a);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f.value(&axpy(a, mid, &d)) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    axpy(a, hi, &d)
}

/// Element of `set` maximizing `⟨g, dir⟩`.
fn deepest_subgradient(set: &SubdiffSet, dir: &[f64]) -> Vec<f64> {
    let g = set
        .generators()
        .iter()
        .max_by(|a, b| dot(a, dir).total_cmp(&dot(b, dir)))
        .expect("nonempty")
        .clone();
    let nd = norm(dir);
    if set.radius() > 0.0 && nd > 0.0 {
        axpy(&g, set.radius() / nd, dir)
    } else {
        g
    }
}

/// Minimum-norm element of `conv(G) + rB`.
pub(crate) fn min_norm_subgradient(set: &SubdiffSet) -> Result<Vec<f64>> {
    let mn = set.min_norm_point()?;
    if mn.hull_distance <= set.radius() {
        return Ok(vec![0.0; set.dim()]);
    }
    let shrink = 1.0 - set.radius() / mn.hull_distance;
    Ok(mn.point.iter().map(|v| v * shrink).collect())
}

struct Cut {
    g: Vec<f64>,
    c: f64,
}

/// Projection of `x` onto `{z : ⟨g_j, z⟩ ≤ c_j}` by dual coordinate ascent.
/// Returns the primal point and the dual value, which bounds `½ d²` from below.
fn project_onto_cuts(x: &[f64], cuts: &[Cut]) -> (Vec<f64>, f64) {
    let mut lambda = vec![0.0; cuts.len()];
    let mut z = x.to_vec();
    let g2: Vec<f64> = cuts.iter().map(|c| dot(&c.g, &c.g)).collect();
    for _ in 0..5000 {
        let mut moved = 0.0f64;
        for (j, cut) in cuts.iter().enumerate() {
            if g2[j] == 0.0 {
                continue;
            }
            let next = (lambda[j] + (dot(&cut.g, &z) - cut.c) / g2[j]).max(0.0);
            let delta = next - lambda[j];
            if delta != 0.0 {
                z = axpy(&z, -delta, &cut.g);
                lambda[j] = next;
                moved = moved.max(delta.abs() * g2[j].sqrt());
            }
        }
        if moved <= 1e-15 * (1.0 + norm(x)) {
            break;
        }
    }
    let shift = sub(x, &z);
    let dual = cuts
        .iter()
        .zip(&lambda)
        .map(|(c, l)| l * (dot(&c.g, x) - c.c))
        .sum::<f64>()
        - 0.5 * dot(&shift, &shift);
    (z, dual)
}

pub fn distance_from_anchor(f: &ConvexExpr, x: &[f64], anchor: &Anchor) -> Result<DistanceEstimate> {
    check_dim(f.dim(), x.len())?;
    let fx = f.value(x);
    if fx <= 0.0 {
        return Ok(DistanceEstimate {
            upper: 0.0,
            lower: 0.0,
            nearest: x.to_vec(),
            iterations: 0,
        });
    }
    let s = match anchor {
        Anchor::Singleton(p) => {
            let d = dist(x, p);
            return Ok(DistanceEstimate {
                upper: d,
                lower: d,
                nearest: p.clone(),
                iterations: 0,
            });
        }
        Anchor::Slater(s) => s,
    };

    let mut nearest = bisect_to_boundary(f, x, s);
    let mut upper = dist(x, &nearest);
    let consider = |p: Vec<f64>, upper: &mut f64, nearest: &mut Vec<f64>| {
        let d = dist(x, &p);
        if d < *upper {
            *upper = d;
            *nearest = p;
        }
    };

    // subgradient projection steps
    let mut y = x.to_vec();
    for _ in 0..POLYAK_STEPS {
        let fy = f.value(&y);
        if fy <= 1e-10 {
            break;
        }
        let g = min_norm_subgradient(&f.subdifferential(&y)?)?;
        let g2 = dot(&g, &g);
        if g2 <= 1e-300 {
            break;
        }
        y = axpy(&y, -fy / g2, &g);
    }
    let candidate = if f.value(&y) <= 0.0 { y } else { bisect_to_boundary(f, &y, s) };
    consider(candidate, &mut upper, &mut nearest);

    // cutting-plane refinement
    let mut cuts: Vec<Cut> = Vec::new();
    let mut lower = 0.0f64;
    let mut q = x.to_vec();
    let mut iterations = 0;
    while iterations < CUT_ITERATIONS {
        iterations += 1;
        let fq = f.value(&q);
        if fq <= 0.0 {
            let d = dist(x, &q);
            consider(q.clone(), &mut upper, &mut nearest);
            lower = lower.max(d.min(upper));
            break;
        }
        let g = deepest_subgradient(&f.subdifferential(&q)?, &sub(x, &q));
        cuts.push(Cut {
            c: dot(&g, &q) - fq,
            g,
        });
        if cuts.len() > MAX_CUTS {
            cuts.remove(1);
        }
        consider(bisect_to_boundary(f, &q, s), &mut upper, &mut nearest);
        let (z, dual) = project_onto_cuts(x, &cuts);
        lower = lower.max((2.0 * dual.max(0.0)).sqrt());
        if upper - lower <= GAP_TOL * upper.max(1.0) {
            break;
        }
        q = z;
    }
    Ok(DistanceEstimate {
        upper,
        lower: lower.min(upper),
        nearest,
        iterations,
    })
}
