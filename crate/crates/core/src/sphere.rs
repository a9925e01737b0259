//! β(f, x) = min over unit h of f′(x, h), computed from the geometry of ∂f(x).

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::ConvexExpr;
use crate::geometry::{OriginLocation, OriginTag, SubdiffSet};
use crate::sampling::unit_directions;
use crate::vecops::{dot, norm, normalized, scale};

/// |β| at or below this is reported as exactly zero.
pub const BETA_ZERO_TOL: f64 = 1e-9;

const REFINE_STEPS: usize = 100;
const REFINE_STARTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaCertificate {
    pub beta: f64,
    pub witness: Vec<f64>,
    pub origin_location: OriginLocation,
    /// `|f′(x, witness) − beta|`
    pub residual: f64,
}

impl BetaCertificate {
    pub fn is_zero(&self) -> bool {
        self.origin_location.tag == OriginTag::OnBoundary
    }
}

/// Certificate from a subdifferential and the matching directional-derivative oracle.
pub fn beta_from_subdiff(set: &SubdiffSet, dd: impl Fn(&[f64]) -> f64) -> Result<BetaCertificate> {
    let bd = set.boundary_distance()?;
    let (beta, tag) = if bd.value < -BETA_ZERO_TOL {
        (bd.value, OriginTag::Outside)
    } else if bd.value > BETA_ZERO_TOL {
        (bd.value, OriginTag::Interior)
    } else {
        (0.0, OriginTag::OnBoundary)
    };
    let residual = (dd(&bd.witness) - beta).abs();
    Ok(BetaCertificate {
        beta,
        witness: bd.witness,
        origin_location: OriginLocation {
            tag,
            tol: BETA_ZERO_TOL,
        },
        residual,
    })
}

pub fn beta(f: &ConvexExpr, x: &[f64]) -> Result<BetaCertificate> {
    let set = f.subdifferential(x)?;
    beta_from_subdiff(&set, |h| f.dd(x, h))
}

/// Certificate for `g = f + ε⟨u, · − anchor⟩` at `x`, from ∂f(x) translated by `εu`.
pub fn beta_of_linear_perturbation(
    f: &ConvexExpr,
    x: &[f64],
    u: &[f64],
    eps: f64,
    anchor: &[f64],
) -> Result<BetaCertificate> {
    check_dim(f.dim(), u.len())?;
    check_dim(f.dim(), anchor.len())?;
    if norm(u) > 1.0 + 1e-12 {
        return Err(Error::Precondition(format!("‖u*‖ = {} exceeds 1", norm(u))));
    }
    if !(eps >= 0.0) {
        return Err(Error::Precondition(format!("ε = {eps} must be nonnegative")));
    }
    let shift = scale(u, eps);
    let set = f.subdifferential(x)?.translated(&shift);
    beta_from_subdiff(&set, |h| f.dd(x, h) + dot(&shift, h))
}

/// Upper bound on β from seeded sphere sampling plus local refinement.
pub fn beta_sampled(f: &ConvexExpr, x: &[f64], n: usize, seed: u64) -> Result<f64> {
    check_dim(f.dim(), x.len())?;
    if n == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let m = f.dim();
    if m == 1 {
        return Ok(f.dd(x, &[1.0]).min(f.dd(x, &[-1.0])));
    }
    let mut scored: Vec<(f64, Vec<f64>)> = unit_directions(m, n, seed)
        .into_iter()
        .map(|h| (f.dd(x, &h), h))
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    scored.truncate(REFINE_STARTS);

    let pattern = refine_pattern(m, seed);
    let mut best = f64::INFINITY;
    for (v, h) in scored {
        best = best.min(refine_on_sphere(|h| f.dd(x, h), h, v, &pattern));
    }
    Ok(best)
}

/// Coordinate axes, their pairwise diagonals, and a few seeded directions.
fn refine_pattern(m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..m {
        let mut e = vec![0.0; m];
        e[i] = 1.0;
        dirs.push(e);
        for j in i + 1..m {
            for s in [1.0, -1.0] {
                let mut d = vec![0.0; m];
                d[i] = std::f64::consts::FRAC_1_SQRT_2;
                d[j] = s * std::f64::consts::FRAC_1_SQRT_2;
                dirs.push(d);
            }
        }
    }
    dirs.extend(unit_directions(m, 4 * m, seed ^ 0x5eed));
    let neg: Vec<Vec<f64>> = dirs.iter().map(|d| scale(d, -1.0)).collect();
    dirs.extend(neg);
    dirs
}

fn refine_on_sphere(
    phi: impl Fn(&[f64]) -> f64,
    mut h: Vec<f64>,
    mut value: f64,
    pattern: &[Vec<f64>],
) -> f64 {
    let mut step = 0.1;
    for _ in 0..REFINE_STEPS {
        let mut improved = false;
        for d in pattern {
            let trial: Vec<f64> = h.iter().zip(d).map(|(a, b)| a + step * b).collect();
            let Some(trial) = normalized(&trial) else { continue };
            let v = phi(&trial);
            if v < value {
                value = v;
                h = trial;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn linf() -> ConvexExpr {
        ConvexExpr::max(vec![ConvexExpr::abs(2, 0).unwrap(), ConvexExpr::abs(2, 1).unwrap()]).unwrap()
    }

    #[test]
    fn beta_exp_at_zero() {
        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        let c = beta(&f, &[0.0]).unwrap();
        assert_eq!(c.beta, -1.0);
        assert_eq!(c.witness, vec![-1.0]);
        assert_eq!(c.origin_location.tag, OriginTag::Outside);
        assert!(c.residual <= 1e-15);
    }

    #[test]
    fn beta_linf_at_origin() {
        let c = beta(&linf(), &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(c.beta, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.witness[0].abs(), FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(c.witness[1].abs(), FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_eq!(c.origin_location.tag, OriginTag::Interior);
    }

    #[test]
    fn beta_zero_function() {
        let f = ConvexExpr::constant(2, 0.0).unwrap();
        let c = beta(&f, &[0.3, -1.0]).unwrap();
        assert_eq!(c.beta, 0.0);
        assert!(c.is_zero());
        assert_abs_diff_eq!(norm(&c.witness), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sampled_examples() {
        let v = beta_sampled(&linf(), &[0.0, 0.0], 10_000, 0).unwrap();
        assert!(v >= FRAC_1_SQRT_2 - 1e-15 && v <= FRAC_1_SQRT_2 + 1e-4, "{v}");
        let f = ConvexExpr::affine(vec![3.0, -4.0], 1.0).unwrap();
        assert_abs_diff_eq!(beta_sampled(&f, &[0.0, 0.0], 1000, 1).unwrap(), -5.0, epsilon = 1e-6);
        let f = ConvexExpr::constant(3, 0.0).unwrap();
        assert_eq!(beta_sampled(&f, &[0.0; 3], 10, 1).unwrap(), 0.0);
    }

    #[test]
    fn perturbation_examples() {
        let f = ConvexExpr::constant(1, 0.0).unwrap();
        let c = beta_of_linear_perturbation(&f, &[0.0], &[1.0], 0.1, &[0.0]).unwrap();
        assert_abs_diff_eq!(c.beta, -0.1, epsilon = 1e-15);

        // ∂g(0) = {1 + ε·u*} = {1 − ε} for u* = −1
        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        for eps in [0.1, 0.01, 0.5] {
            let c = beta_of_linear_perturbation(&f, &[0.0], &[-1.0], eps, &[0.0]).unwrap();
            assert_abs_diff_eq!(c.beta, -(1.0 - eps), epsilon = 1e-15);
            let g = f.linear_perturbation(&[-1.0], eps, &[0.0]).unwrap();
            assert_abs_diff_eq!(c.beta, beta(&g, &[0.0]).unwrap().beta, epsilon = 1e-15);
        }

        let c = beta_of_linear_perturbation(&linf(), &[0.0, 0.0], &[0.6, 0.8], 0.3, &[0.0, 0.0]).unwrap();
        assert!(c.beta >= FRAC_1_SQRT_2 - 0.3);
        assert!(c.residual <= 1e-12);
    }

    #[test]
    fn perturbation_preconditions() {
        let f = ConvexExpr::constant(1, 0.0).unwrap();
        assert!(beta_of_linear_perturbation(&f, &[0.0], &[2.0], 0.1, &[0.0]).is_err());
        assert!(beta_of_linear_perturbation(&f, &[0.0], &[1.0], -0.1, &[0.0]).is_err());
    }
}
