//! Geometry of subdifferential sets `conv(G) + r·B`.
//!
//! The sets handled here are small: a handful of generators in low
//! dimension. Everything is computed exactly where possible (minimum-norm
//! point by Wolfe's active-set iteration, inradius by facet enumeration)
//! and with certified brackets otherwise.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vecops::{dist, dot, norm, scale};

/// Generators closer than this are merged.
pub const DEDUP_TOL: f64 = 1e-12;
/// Default tolerance of [`SubdiffSet::classify_origin`].
pub const DEFAULT_ORIGIN_TOL: f64 = 1e-9;
/// Certificate residual required of the minimum-norm point.
pub const MIN_NORM_CERT_TOL: f64 = 1e-10;

const WOLFE_MAX_ITER: usize = 1000;
const FACET_ENUM_LIMIT: usize = 200_000;
const BB_MAX_EVALS: usize = 2_000_000;

/// A compact convex set `conv(G) + r·B^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SubdiffSet {
    generators: Vec<Vec<f64>>,
    radius: f64,
}

/// Result of the minimum-norm point computation.
#[derive(Debug, Clone, PartialEq)]
pub struct MinNormPoint {
    /// Nearest point of `conv(G)` to the origin.
    pub point: Vec<f64>,
    /// `‖point‖`
    pub hull_distance: f64,
    /// Distance from the origin to the full set, `max(hull_distance − r, 0)`.
    pub distance: f64,
    /// `max_g (‖p‖² − ⟨p, g⟩)`, zero up to rounding at the optimum.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OriginTag {
    Outside,
    OnBoundary,
    Interior,
}

/// Where the origin sits relative to a [`SubdiffSet`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OriginLocation {
    pub tag: OriginTag,
    pub tol: f64,
}

/// Signed distance from the origin to the boundary, with a unit direction
/// attaining `min_{‖h‖=1} support(S, h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryDistance {
    pub value: f64,
    pub witness: Vec<f64>,
    pub hull_distance: f64,
}

impl SubdiffSet {
    pub fn new(generators: Vec<Vec<f64>>, radius: f64) -> Result<Self> {
        let dim = generators
            .first()
            .ok_or_else(|| Error::InvalidExpr("generator list is empty".into()))?
            .len();
        if dim == 0 {
            return Err(Error::InvalidExpr("generators must have positive dimension".into()));
        }
        if generators.iter().any(|g| g.len() != dim) {
            return Err(Error::InvalidExpr("generators differ in dimension".into()));
        }
        if generators.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidExpr("generators must be finite".into()));
        }
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::InvalidExpr(format!("ball radius {radius} must be finite and nonnegative")));
        }
        Ok(Self {
            generators: dedup(generators),
            radius,
        })
    }

    pub fn point(g: Vec<f64>) -> Result<Self> {
        Self::new(vec![g], 0.0)
    }

    pub fn dim(&self) -> usize {
        self.generators[0].len()
    }

    pub fn generators(&self) -> &[Vec<f64>] {
        &self.generators
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn scaled(&self, w: f64) -> Self {
        debug_assert!(w >= 0.0);
        Self {
            generators: dedup(self.generators.iter().map(|g| scale(g, w)).collect()),
            radius: self.radius * w,
        }
    }

    pub fn translated(&self, v: &[f64]) -> Self {
        Self {
            generators: self
                .generators
                .iter()
                .map(|g| g.iter().zip(v).map(|(a, b)| a + b).collect())
                .collect(),
            radius: self.radius,
        }
    }

    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        let gens = self
            .generators
            .iter()
            .cartesian_product(&other.generators)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Self::new(gens, self.radius + other.radius)
    }

    /// `conv(⋃ parts)`. Representable exactly when at most one part carries a
    /// ball and every other generator already lies inside that part.
    pub fn hull_of_union(parts: Vec<SubdiffSet>) -> Result<Self> {
        let mut balls = parts.iter().filter(|p| p.radius > 0.0);
        let Some(ball) = balls.next() else {
            let gens = parts.into_iter().flat_map(|p| p.generators).collect();
            return Self::new(gens, 0.0);
        };
        if balls.next().is_some() {
            return Err(Error::UnsupportedSubdiff(
                "hull of several sets with positive ball radius".into(),
            ));
        }
        for part in parts.iter().filter(|p| p.radius == 0.0) {
            for g in &part.generators {
                let shifted = ball.translated(&scale(g, -1.0));
                let d = shifted.min_norm_point()?.hull_distance;
                if d > ball.radius + DEDUP_TOL {
                    return Err(Error::UnsupportedSubdiff(
                        "hull of a ball-thickened set and an outside polytope".into(),
                    ));
                }
            }
        }
        Ok(ball.clone())
    }

    /// Support function `max_{g∈G} ⟨g, h⟩ + r‖h‖`.
    pub fn support(&self, h: &[f64]) -> f64 {
        assert_eq!(h.len(), self.dim(), "support direction has wrong dimension");
        let m = self
            .generators
            .iter()
            .map(|g| dot(g, h))
            .fold(f64::NEG_INFINITY, f64::max);
        m + self.radius * norm(h)
    }

    pub fn min_norm_point(&self) -> Result<MinNormPoint> {
        let mut mn = min_norm_hull(&self.generators)?;
        mn.distance = (mn.hull_distance - self.radius).max(0.0);
        Ok(mn)
    }

    pub fn classify_origin(&self, tol: f64) -> Result<OriginLocation> {
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("tolerance {tol} must be positive")));
        }
        let bd = self.boundary_distance()?;
        let tag = if -bd.value > tol {
            OriginTag::Outside
        } else if bd.value > tol {
            OriginTag::Interior
        } else {
            OriginTag::OnBoundary
        };
        Ok(OriginLocation { tag, tol })
    }

    /// `−d(0, S)` if the origin is outside, `+d(0, bdry S)` if inside, zero on the boundary.
    pub fn signed_boundary_distance(&self) -> Result<f64> {
        Ok(self.boundary_distance()?.value)
    }

    pub fn boundary_distance(&self) -> Result<BoundaryDistance> {
        let mn = self.min_norm_point()?;
        let scale = max_norm(&self.generators);
        if mn.hull_distance > 1e-12 * (1.0 + scale) {
            let witness = mn.point.iter().map(|v| -v / mn.hull_distance).collect();
            return Ok(BoundaryDistance {
                value: self.radius - mn.hull_distance,
                witness,
                hull_distance: mn.hull_distance,
            });
        }
        let (inradius, witness) = hull_inradius(&self.generators)?;
        Ok(BoundaryDistance {
            value: self.radius + inradius,
            witness,
            hull_distance: mn.hull_distance,
        })
    }
}

fn max_norm(gens: &[Vec<f64>]) -> f64 {
    gens.iter().map(|g| norm(g)).fold(0.0, f64::max)
}

fn dedup(gens: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(gens.len());
    for g in gens {
        if !out.iter().any(|o| dist(o, &g) <= DEDUP_TOL) {
            out.push(g);
        }
    }
    out
}

/// Weights `α` with `Σα = 1` minimizing `‖Σ α_i p_i‖` over the affine hull.
fn affine_minimizer(points: &[&Vec<f64>]) -> Vec<f64> {
    let k = points.len();
    if k == 1 {
        return vec![1.0];
    }
    let m = points[0].len();
    let base = points[0];
    let d = DMatrix::from_fn(m, k - 1, |r, c| points[c + 1][r] - base[r]);
    let rhs = DVector::from_iterator(m, base.iter().map(|v| -v));
    let svd = d.svd(true, true);
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let beta = svd
        .solve(&rhs, 1e-13 * smax.max(1e-300))
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.iter().sum::<f64>());
    alpha.extend(beta.iter());
    alpha
}

fn combine(gens: &[Vec<f64>], corral: &[usize], w: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; gens[0].len()];
    for (&i, &wi) in corral.iter().zip(w) {
        for (xv, gv) in x.iter_mut().zip(&gens[i]) {
            *xv += wi * gv;
        }
    }
    x
}

fn certificate_residual(gens: &[Vec<f64>], x: &[f64]) -> f64 {
    let nx2 = dot(x, x);
    gens.iter()
        .map(|g| nx2 - dot(x, g))
        .fold(0.0, f64::max)
}

/// Wolfe's minimum-norm-point iteration over `conv(gens)`.
pub(crate) fn min_norm_hull(gens: &[Vec<f64>]) -> Result<MinNormPoint> {
    let scale2 = gens.iter().map(|g| dot(g, g)).fold(0.0, f64::max);
    let stop_tol = 1e-13 * scale2.max(1.0);
    let j0 = (0..gens.len())
        .min_by(|&a, &b| dot(&gens[a], &gens[a]).total_cmp(&dot(&gens[b], &gens[b])))
        .expect("nonempty generator list");
    let mut corral = vec![j0];
    let mut w = vec![1.0];
    let mut x = gens[j0].clone();
    let mut iterations = 0;

    while iterations < WOLFE_MAX_ITER {
        iterations += 1;
        let nx2 = dot(&x, &x);
        if nx2 <= 1e-30 * scale2.max(1.0) {
            break;
        }
        let (j, min_dot) = gens
            .iter()
            .enumerate()
            .map(|(j, g)| (j, dot(&x, g)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if nx2 - min_dot <= stop_tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        w.push(0.0);

        for _ in 0..=gens.len() + 1 {
            let pts: Vec<&Vec<f64>> = corral.iter().map(|&i| &gens[i]).collect();
            let alpha = affine_minimizer(&pts);
            if alpha.iter().all(|a| *a > 0.0) {
                w = alpha;
                break;
            }
            let mut theta = 1.0f64;
            let mut leaving = 0;
            for (i, (&wi, &ai)) in w.iter().zip(&alpha).enumerate() {
                if ai <= 0.0 {
                    let denom = wi - ai;
                    let t = if denom > 0.0 { wi / denom } else { 0.0 };
                    if t < theta {
                        theta = t;
                        leaving = i;
                    }
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = (1.0 - theta) * *wi + theta * ai;
            }
            w[leaving] = 0.0;
            let keep: Vec<usize> = (0..w.len()).filter(|&i| w[i] > 1e-15).collect();
            corral = keep.iter().map(|&i| corral[i]).collect();
            w = keep.iter().map(|&i| w[i]).collect();
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|v| *v /= total);
            if corral.len() <= 1 {
                break;
            }
        }
        x = combine(gens, &corral, &w);
    }

    let residual = certificate_residual(gens, &x);
    if residual > MIN_NORM_CERT_TOL * scale2.max(1.0) {
        return Err(Error::NonConvergence {
            iterations,
            best: x,
            residual,
        });
    }
    let hull_distance = norm(&x);
    Ok(MinNormPoint {
        point: x,
        hull_distance,
        distance: hull_distance,
        residual,
        iterations,
    })
}

fn det(rows: &[Vec<f64>]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => rows[0][0],
        2 => rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0],
        3 => (0..3)
            .map(|c| {
                let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                rows[0][c] * (rows[1][a] * rows[2][b] - rows[1][b] * rows[2][a])
            })
            .sum(),
        n => DMatrix::from_fn(n, n, |r, c| rows[r][c]).determinant(),
    }
}

/// Vector orthogonal to the `m − 1` rows of `vs` (each of length `m`).
fn generalized_cross(vs: &[Vec<f64>], m: usize) -> Vec<f64> {
    (0..m)
        .map(|k| {
            let minor: Vec<Vec<f64>> = vs
                .iter()
                .map(|r| r.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, v)| *v).collect())
                .collect();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * det(&minor)
        })
        .collect()
}

/// Rank of the generator matrix and a unit vector of minimal `‖G h‖`.
fn rank_and_null_direction(gens: &[Vec<f64>], m: usize) -> (usize, Vec<f64>) {
    let rows = gens.len().max(m);
    let mat = DMatrix::from_fn(rows, m, |r, c| if r < gens.len() { gens[r][c] } else { 0.0 });
    let svd = mat.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sv = &svd.singular_values;
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let rank = sv.iter().filter(|s| **s > 1e-10 * smax.max(1e-300)).count();
    let (imin, _) = sv
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let h: Vec<f64> = v_t.row(imin).iter().copied().collect();
    (rank, h)
}

/// `min_{‖h‖=1} max_{g∈G} ⟨g, h⟩` for a hull that contains the origin.
pub(crate) fn hull_inradius(gens: &[Vec<f64>]) -> Result<(f64, Vec<f64>)> {
    let m = gens[0].len();
    if m == 1 {
        let lo = gens.iter().map(|g| g[0]).fold(f64::INFINITY, f64::min);
        let hi = gens.iter().map(|g| g[0]).fold(f64::NEG_INFINITY, f64::max);
        return Ok(if hi <= -lo { (hi, vec![1.0]) } else { (-lo, vec![-1.0]) });
    }
    let (rank, null_dir) = rank_and_null_direction(gens, m);
    if rank < m {
        // The hull lies in a proper subspace through the origin.
        let s = gens.iter().map(|g| dot(g, &null_dir)).fold(f64::NEG_INFINITY, f64::max);
        let t = gens.iter().map(|g| -dot(g, &null_dir)).fold(f64::NEG_INFINITY, f64::max);
        return Ok(if s <= t { (s, null_dir) } else { (t, scale(&null_dir, -1.0)) });
    }
    if binomial(gens.len(), m) <= FACET_ENUM_LIMIT {
        if let Some(found) = facet_inradius(gens, m) {
            return Ok(found);
        }
    }
    let lipschitz = max_norm(gens);
    let bracket = sphere_min_bracket(
        |h| gens.iter().map(|g| dot(g, h)).fold(f64::NEG_INFINITY, f64::max),
        m,
        lipschitz,
        1e-9 * (1.0 + lipschitz),
        BB_MAX_EVALS,
    );
    if bracket.upper - bracket.lower > 1e-9 * (1.0 + lipschitz) {
        return Err(Error::UndeterminedInradius {
            lower: bracket.lower,
            upper: bracket.upper,
        });
    }
    Ok((bracket.upper, bracket.witness))
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// Smallest offset among supporting hyperplanes spanned by `m` generators.
///
/// Each supporting hyperplane `{⟨n, y⟩ = c}` is a vertex `n / c` of the polar
/// polytope `{y : ⟨g, y⟩ ≤ 1}`, so this equals `1 / max ‖y_vertex‖`.
fn facet_inradius(gens: &[Vec<f64>], m: usize) -> Option<(f64, Vec<f64>)> {
    let scale = max_norm(gens);
    let tol = 1e-10 * (1.0 + scale);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for subset in (0..gens.len()).combinations(m) {
        let base = &gens[subset[0]];
        let edges: Vec<Vec<f64>> = subset[1..]
            .iter()
            .map(|&i| gens[i].iter().zip(base).map(|(a, b)| a - b).collect())
            .collect();
        let n = generalized_cross(&edges, m);
        let nn = norm(&n);
        if nn <= 1e-12 * (1.0 + scale).powi(m as i32 - 1) {
            continue;
        }
        let n = scale_vec(&n, 1.0 / nn);
        let c = dot(&n, base);
        let (lo, hi) = gens.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), g| {
            let v = dot(&n, g);
            (lo.min(v), hi.max(v))
        });
        let mut consider = |offset: f64, normal: Vec<f64>| {
            if best.as_ref().map_or(true, |(b, _)| offset < *b) {
                best = Some((offset, normal));
            }
        };
        if hi <= c + tol {
            consider(c, n.clone());
        }
        if lo >= c - tol {
            consider(-c, scale_vec(&n, -1.0));
        }
    }
    best
}

fn scale_vec(v: &[f64], s: f64) -> Vec<f64> {
    scale(v, s)
}

/// Certified bracket on the minimum of a function over the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereBracket {
    pub lower: f64,
    pub upper: f64,
    pub witness: Vec<f64>,
    pub evaluations: usize,
}

struct Cell {
    lower: f64,
    axis: usize,
    sign: f64,
    center: Vec<f64>,
    half_width: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.lower == other.lower
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    // reversed: BinaryHeap pops the smallest lower bound first
    fn cmp(&self, other: &Self) -> Ordering {
        other.lower.total_cmp(&self.lower)
    }
}

fn face_point(axis: usize, sign: f64, u: &[f64], m: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(m);
    let mut it = u.iter();
    for k in 0..m {
        v.push(if k == axis { sign } else { *it.next().unwrap() });
    }
    let n = norm(&v);
    scale(&v, 1.0 / n)
}

/// Lipschitz branch-and-bound over the cube faces radially projected onto
/// the sphere. `lipschitz` must bound `|f(h₁) − f(h₂)| / ‖h₁ − h₂‖` on the sphere.
pub fn sphere_min_bracket<F: Fn(&[f64]) -> f64>(
    f: F,
    m: usize,
    lipschitz: f64,
    tol: f64,
    max_evals: usize,
) -> SphereBracket {
    let spread = ((m - 1) as f64).sqrt();
    let mut heap = BinaryHeap::new();
    let mut upper = f64::INFINITY;
    let mut witness = vec![0.0; m];
    let mut pruned_lower = f64::INFINITY;
    let mut evaluations = 0;

    let push = |heap: &mut BinaryHeap<Cell>,
                    upper: &mut f64,
                    witness: &mut Vec<f64>,
                    pruned_lower: &mut f64,
                    evaluations: &mut usize,
                    axis: usize,
                    sign: f64,
                    center: Vec<f64>,
                    half_width: f64| {
        let h = face_point(axis, sign, &center, m);
        let v = f(&h);
        *evaluations += 1;
        if v < *upper {
            *upper = v;
            *witness = h;
        }
        let lower = v - lipschitz * half_width * spread;
        if lower >= *upper - tol {
            *pruned_lower = pruned_lower.min(lower);
        } else {
            heap.push(Cell {
                lower,
                axis,
                sign,
                center,
                half_width,
            });
        }
    };

    for axis in 0..m {
        for sign in [1.0, -1.0] {
            push(
                &mut heap,
                &mut upper,
                &mut witness,
                &mut pruned_lower,
                &mut evaluations,
                axis,
                sign,
                vec![0.0; m - 1],
                1.0,
            );
        }
    }

    while let Some(cell) = heap.peek() {
        if cell.lower >= upper - tol || evaluations >= max_evals {
            break;
        }
        let cell = heap.pop().unwrap();
        let hw = cell.half_width / 2.0;
        for mask in 0..(1usize << (m - 1)) {
            let center: Vec<f64> = cell
                .center
                .iter()
                .enumerate()
                .map(|(k, c)| if mask >> k & 1 == 1 { c + hw } else { c - hw })
                .collect();
            push(
                &mut heap,
                &mut upper,
                &mut witness,
                &mut pruned_lower,
                &mut evaluations,
                cell.axis,
                cell.sign,
                center,
                hw,
            );
        }
    }
    let open_lower = heap.peek().map_or(f64::INFINITY, |c| c.lower);
    SphereBracket {
        lower: open_lower.min(pruned_lower).min(upper),
        upper,
        witness,
        evaluations,
    }
}
