//! Convex-by-construction expression trees.
//!
//! Every [`ConvexExpr`] is finite on all of ℝ^m, so the subdifferential is
//! nonempty and compact at every point. Values, directional derivatives and
//! subdifferentials are computed exactly by structural recursion.

use crate::error::{check_dim, Error, Result};
use crate::geometry::SubdiffSet;
use crate::vecops::{dot, norm};

/// Kink detection threshold for the nonsmooth atoms (`|x_i|` and `‖x‖`).
pub const KINK_TOL: f64 = 1e-12;

/// Upper bound on the generator count of a Minkowski sum.
const MAX_GENERATORS: usize = 4096;

/// Relative tolerance used to decide which children of a `Max` node are active.
pub fn max_active_tol(value: f64) -> f64 {
    1e-10 * (1.0 + value.abs())
}

/// Node kinds of a convex expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    /// `⟨a, x⟩ + b`
    Affine { a: Vec<f64>, b: f64 },
    EuclidNorm,
    AbsCoord(usize),
    /// `e^{x_coord} + shift`
    Exp1D { coord: usize, shift: f64 },
    /// `(max(x_i, 0))²`
    PosPartSquare(usize),
    Max(Vec<ConvexExpr>),
    /// Nonnegative combination.
    Sum(Vec<(f64, ConvexExpr)>),
    /// `inner(A x + c)`, `A` stored row-major as `p` rows of length `m`.
    ComposeAffine {
        inner: Box<ConvexExpr>,
        matrix: Vec<Vec<f64>>,
        offset: Vec<f64>,
    },
}

/// A convex function `ℝ^m → ℝ` built from convexity-preserving rules.
///
/// Fields are private so every value in circulation satisfies the
/// construction invariants (consistent dimensions, nonnegative weights).
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexExpr {
    dim: usize,
    node: Node,
}

fn check_positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(Error::InvalidExpr("dimension must be positive".into()))
    } else {
        Ok(())
    }
}

fn check_finite(what: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidExpr(format!("{what} must be finite")))
    }
}

fn check_coord(dim: usize, i: usize) -> Result<()> {
    if i < dim {
        Ok(())
    } else {
        Err(Error::InvalidExpr(format!(
            "coordinate {i} out of range for dimension {dim}"
        )))
    }
}

impl ConvexExpr {
    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        check_positive_dim(dim)?;
        check_finite("constant", c)?;
        Ok(Self {
            dim,
            node: Node::Const(c),
        })
    }

    pub fn affine(a: Vec<f64>, b: f64) -> Result<Self> {
        check_positive_dim(a.len())?;
        check_finite("affine offset", b)?;
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidExpr("affine slope must be finite".into()));
        }
        Ok(Self {
            dim: a.len(),
            node: Node::Affine { a, b },
        })
    }

    pub fn norm(dim: usize) -> Result<Self> {
        check_positive_dim(dim)?;
        Ok(Self {
            dim,
            node: Node::EuclidNorm,
        })
    }

    pub fn abs(dim: usize, coord: usize) -> Result<Self> {
        check_coord(dim, coord)?;
        Ok(Self {
            dim,
            node: Node::AbsCoord(coord),
        })
    }

    pub fn exp1d(dim: usize, coord: usize, shift: f64) -> Result<Self> {
        check_coord(dim, coord)?;
        check_finite("exp shift", shift)?;
        Ok(Self {
            dim,
            node: Node::Exp1D { coord, shift },
        })
    }

    pub fn pos_part_square(dim: usize, coord: usize) -> Result<Self> {
        check_coord(dim, coord)?;
        Ok(Self {
            dim,
            node: Node::PosPartSquare(coord),
        })
    }

    pub fn max(children: Vec<ConvexExpr>) -> Result<Self> {
        let first = children
            .first()
            .ok_or_else(|| Error::InvalidExpr("max needs at least one child".into()))?;
        let dim = first.dim;
        for c in &children {
            check_dim(dim, c.dim)?;
        }
        Ok(Self {
            dim,
            node: Node::Max(children),
        })
    }

    pub fn sum(terms: Vec<(f64, ConvexExpr)>) -> Result<Self> {
        let dim = terms
            .first()
            .ok_or_else(|| Error::InvalidExpr("sum needs at least one term".into()))?
            .1
            .dim;
        for (w, e) in &terms {
            check_finite("sum weight", *w)?;
            if *w < 0.0 {
                return Err(Error::InvalidExpr(format!(
                    "sum weight {w} is negative; convexity requires nonnegative weights"
                )));
            }
            check_dim(dim, e.dim)?;
        }
        Ok(Self {
            dim,
            node: Node::Sum(terms),
        })
    }

    pub fn compose_affine(inner: ConvexExpr, matrix: Vec<Vec<f64>>, offset: Vec<f64>) -> Result<Self> {
        check_dim(inner.dim, matrix.len())?;
        check_dim(inner.dim, offset.len())?;
        let dim = matrix[0].len();
        check_positive_dim(dim)?;
        for row in &matrix {
            check_dim(dim, row.len())?;
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidExpr("matrix entries must be finite".into()));
            }
        }
        if offset.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidExpr("offset entries must be finite".into()));
        }
        Ok(Self {
            dim,
            node: Node::ComposeAffine {
                inner: Box::new(inner),
                matrix,
                offset,
            },
        })
    }

    /// `self + eps·⟨u, · − anchor⟩`. With `eps = 0` the expression is returned unchanged.
    pub fn linear_perturbation(&self, u: &[f64], eps: f64, anchor: &[f64]) -> Result<Self> {
        check_dim(self.dim, u.len())?;
        check_dim(self.dim, anchor.len())?;
        if eps < 0.0 {
            return Err(Error::Precondition(format!("eps = {eps} must be nonnegative")));
        }
        if eps == 0.0 {
            return Ok(self.clone());
        }
        let lin = ConvexExpr::affine(u.to_vec(), -dot(u, anchor))?;
        ConvexExpr::sum(vec![(1.0, self.clone()), (eps, lin)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.value(x))
    }

    pub(crate) fn value(&self, x: &[f64]) -> f64 {
        match &self.node {
            Node::Const(c) => *c,
            Node::Affine { a, b } => dot(a, x) + b,
            Node::EuclidNorm => norm(x),
            Node::AbsCoord(i) => x[*i].abs(),
            Node::Exp1D { coord, shift } => x[*coord].exp() + shift,
            Node::PosPartSquare(i) => {
                let p = x[*i].max(0.0);
                p * p
            }
            Node::Max(children) => children
                .iter()
                .map(|c| c.value(x))
                .fold(f64::NEG_INFINITY, f64::max),
            Node::Sum(terms) => terms.iter().map(|(w, e)| w * e.value(x)).sum(),
            Node::ComposeAffine {
                inner,
                matrix,
                offset,
            } => inner.value(&apply_affine(matrix, offset, x)),
        }
    }

    /// Exact one-sided directional derivative `f'(x, h)`; `h` need not be a unit vector.
    pub fn directional_derivative(&self, x: &[f64], h: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, h.len())?;
        Ok(self.dd(x, h))
    }

    pub(crate) fn dd(&self, x: &[f64], h: &[f64]) -> f64 {
        match &self.node {
            Node::Const(_) => 0.0,
            Node::Affine { a, .. } => dot(a, h),
            Node::EuclidNorm => {
                let nx = norm(x);
                if nx <= KINK_TOL {
                    norm(h)
                } else {
                    dot(x, h) / nx
                }
            }
            Node::AbsCoord(i) => {
                let xi = x[*i];
                if xi.abs() <= KINK_TOL {
                    h[*i].abs()
                } else {
                    xi.signum() * h[*i]
                }
            }
            Node::Exp1D { coord, .. } => x[*coord].exp() * h[*coord],
            Node::PosPartSquare(i) => 2.0 * x[*i].max(0.0) * h[*i],
            Node::Max(children) => {
                let values: Vec<f64> = children.iter().map(|c| c.value(x)).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tol = max_active_tol(top);
                children
                    .iter()
                    .zip(&values)
                    .filter(|(_, v)| **v >= top - tol)
                    .map(|(c, _)| c.dd(x, h))
                    .fold(f64::NEG_INFINITY, f64::max)
            }
            Node::Sum(terms) => terms.iter().map(|(w, e)| w * e.dd(x, h)).sum(),
            Node::ComposeAffine {
                inner,
                matrix,
                offset,
            } => {
                let y = apply_affine(matrix, offset, x);
                let ah = apply_linear(matrix, h);
                inner.dd(&y, &ah)
            }
        }
    }

    /// Difference quotients `(f(x + t h) − f(x)) / t` along a strictly decreasing positive grid.
    pub fn dd_quotient_scan(&self, x: &[f64], h: &[f64], t_grid: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, h.len())?;
        if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Precondition("step sizes must be positive".into()));
        }
        if t_grid.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Precondition(
                "step sizes must be strictly decreasing".into(),
            ));
        }
        let fx = self.value(x);
        Ok(t_grid
            .iter()
            .map(|&t| {
                let xt: Vec<f64> = x.iter().zip(h).map(|(a, b)| a + t * b).collect();
                (self.value(&xt) - fx) / t
            })
            .collect())
    }

    /// The subdifferential `∂f(x)` as `conv(G) + r·B`.
    pub fn subdifferential(&self, x: &[f64]) -> Result<SubdiffSet> {
        check_dim(self.dim, x.len())?;
        self.subdiff(x)
    }

    fn subdiff(&self, x: &[f64]) -> Result<SubdiffSet> {
        let m = self.dim;
        match &self.node {
            Node::Const(_) => SubdiffSet::point(vec![0.0; m]),
            Node::Affine { a, .. } => SubdiffSet::point(a.clone()),
            Node::EuclidNorm => {
                let nx = norm(x);
                if nx <= KINK_TOL {
                    SubdiffSet::new(vec![vec![0.0; m]], 1.0)
                } else {
                    SubdiffSet::point(x.iter().map(|v| v / nx).collect())
                }
            }
            Node::AbsCoord(i) => {
                let xi = x[*i];
                let mut e = vec![0.0; m];
                if xi.abs() <= KINK_TOL {
                    e[*i] = 1.0;
                    let mut neg = vec![0.0; m];
                    neg[*i] = -1.0;
                    SubdiffSet::new(vec![neg, e], 0.0)
                } else {
                    e[*i] = xi.signum();
                    SubdiffSet::point(e)
                }
            }
            Node::Exp1D { coord, .. } => {
                let mut g = vec![0.0; m];
                g[*coord] = x[*coord].exp();
                SubdiffSet::point(g)
            }
            Node::PosPartSquare(i) => {
                let mut g = vec![0.0; m];
                g[*i] = 2.0 * x[*i].max(0.0);
                SubdiffSet::point(g)
            }
            Node::Max(children) => {
                let values: Vec<f64> = children.iter().map(|c| c.value(x)).collect();
                let top = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let tol = max_active_tol(top);
                let parts = children
                    .iter()
                    .zip(&values)
                    .filter(|(_, v)| **v >= top - tol)
                    .map(|(c, _)| c.subdiff(x))
                    .collect::<Result<Vec<_>>>()?;
                SubdiffSet::hull_of_union(parts)
            }
            Node::Sum(terms) => {
                let mut acc = SubdiffSet::point(vec![0.0; m])?;
                for (w, e) in terms {
                    if *w == 0.0 {
                        continue;
                    }
                    let part = e.subdiff(x)?.scaled(*w);
                    acc = acc.minkowski_sum(&part)?;
                    if acc.generators().len() > MAX_GENERATORS {
                        return Err(Error::UnsupportedSubdiff(format!(
                            "Minkowski sum exceeds {MAX_GENERATORS} generators"
                        )));
                    }
                }
                Ok(acc)
            }
            Node::ComposeAffine {
                inner,
                matrix,
                offset,
            } => {
                let y = apply_affine(matrix, offset, x);
                let s = inner.subdiff(&y)?;
                let gens: Vec<Vec<f64>> = s
                    .generators()
                    .iter()
                    .map(|g| apply_transpose(matrix, g, m))
                    .collect();
                let radius = if s.radius() > 0.0 {
                    s.radius() * isotropic_scale(matrix, m)?
                } else {
                    0.0
                };
                SubdiffSet::new(gens, radius)
            }
        }
    }

    /// Signed switching values of every codimension-one kink in the tree.
    ///
    /// Each entry changes sign exactly when `x` crosses the corresponding kink
    /// surface (a tie between two `Max` children, or `x_i = 0` for `|x_i|`).
    /// The order is fixed by the tree, so entries of two points can be
    /// compared position by position.
    pub fn kink_residuals(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x.len())?;
        let mut out = Vec::new();
        self.collect_kinks(x, &mut out);
        Ok(out)
    }

    fn collect_kinks(&self, x: &[f64], out: &mut Vec<f64>) {
        match &self.node {
            Node::AbsCoord(i) => out.push(x[*i]),
            Node::EuclidNorm if self.dim == 1 => out.push(x[0]),
            Node::Max(children) => {
                let values: Vec<f64> = children.iter().map(|c| c.value(x)).collect();
                for i in 0..values.len() {
                    for j in i + 1..values.len() {
                        out.push(values[i] - values[j]);
                    }
                }
                for c in children {
                    c.collect_kinks(x, out);
                }
            }
            Node::Sum(terms) => {
                for (_, e) in terms {
                    e.collect_kinks(x, out);
                }
            }
            Node::ComposeAffine {
                inner,
                matrix,
                offset,
            } => inner.collect_kinks(&apply_affine(matrix, offset, x), out),
            _ => {}
        }
    }

    /// Number of kink residuals (independent of the evaluation point).
    pub fn kink_count(&self) -> usize {
        match &self.node {
            Node::AbsCoord(_) => 1,
            Node::EuclidNorm if self.dim == 1 => 1,
            Node::Max(children) => {
                let k = children.len();
                k * (k - 1) / 2 + children.iter().map(|c| c.kink_count()).sum::<usize>()
            }
            Node::Sum(terms) => terms.iter().map(|(_, e)| e.kink_count()).sum(),
            Node::ComposeAffine { inner, .. } => inner.kink_count(),
            _ => 0,
        }
    }
}

fn apply_linear(matrix: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    matrix.iter().map(|row| dot(row, x)).collect()
}

fn apply_affine(matrix: &[Vec<f64>], offset: &[f64], x: &[f64]) -> Vec<f64> {
    matrix
        .iter()
        .zip(offset)
        .map(|(row, c)| dot(row, x) + c)
        .collect()
}

fn apply_transpose(matrix: &[Vec<f64>], g: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (row, gi) in matrix.iter().zip(g) {
        for (o, a) in out.iter_mut().zip(row) {
            *o += a * gi;
        }
    }
    out
}

/// `σ` such that `AᵀA = σ² I`, so that `Aᵀ(r·B^p) = rσ·B^m`.
fn isotropic_scale(matrix: &[Vec<f64>], m: usize) -> Result<f64> {
    let mut gram = vec![vec![0.0; m]; m];
    for row in matrix {
        for i in 0..m {
            for j in 0..m {
                gram[i][j] += row[i] * row[j];
            }
        }
    }
    let sigma2 = (0..m).map(|i| gram[i][i]).sum::<f64>() / m as f64;
    let tol = 1e-12 * (1.0 + sigma2);
    for i in 0..m {
        for j in 0..m {
            let target = if i == j { sigma2 } else { 0.0 };
            if (gram[i][j] - target).abs() > tol {
                if sigma2 == 0.0 {
                    return Ok(0.0);
                }
                return Err(Error::UnsupportedSubdiff(
                    "affine image of a ball under a non-isotropic map is an ellipsoid".into(),
                ));
            }
        }
    }
    Ok(sigma2.sqrt())
}
