//! Stability verdicts for local and global error bounds under ε-linear perturbations.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::ConvexExpr;
use crate::moduli::boundary::{boundary_sample, BoundarySample};
use crate::sampling::{box_points, BoxDomain};
use crate::sphere::{beta, BETA_ZERO_TOL};
use crate::vecops::dist;

/// Relative margin around τ inside which a global verdict is left undetermined.
pub const VERDICT_MARGIN: f64 = 0.05;
/// A feasible/boundary pair is reported when `|ratio| < QC_RATIO_FRACTION·τ`.
pub const QC_RATIO_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Stable,
    Unstable,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `g = f + ε⟨direction, · − anchor⟩` loses the error bound for small ε.
    Perturbation { direction: Vec<f64>, anchor: Vec<f64> },
    /// Strictly feasible `z` with nearest sampled boundary point `x`:
    /// `ratio = (f(z) − f(x)) / ‖z − x‖` is near zero and `|β(f, z)| ≤ τ`.
    QcPair {
        z: Vec<f64>,
        x: Vec<f64>,
        ratio: f64,
        beta_z: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StabilityScope {
    Local { point: Vec<f64> },
    Global { tau: f64, lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub scope: StabilityScope,
    pub verdict: Verdict,
    /// β(f, x̄) for local scope.
    pub beta: Option<f64>,
    /// Infimum of |β| over the boundary sample, for global scope.
    pub beta_inf: Option<f64>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl StabilityVerdict {
    /// Direction and anchor of the first perturbation witness.
    pub fn perturbation(&self) -> Option<(&[f64], &[f64])> {
        self.witnesses.iter().find_map(|w| match w {
            Witness::Perturbation { direction, anchor } => Some((direction.as_slice(), anchor.as_slice())),
            _ => None,
        })
    }

    pub fn qc_pairs(&self) -> impl Iterator<Item = &Witness> {
        self.witnesses.iter().filter(|w| matches!(w, Witness::QcPair { .. }))
    }
}

/// The perturbed function `f + ε⟨h₀, · − x̄⟩` carried by an unstable verdict.
pub fn destabilizing_perturbation(f: &ConvexExpr, verdict: &StabilityVerdict, eps: f64) -> Result<Option<ConvexExpr>> {
    match verdict.perturbation() {
        Some((h, anchor)) => f.linear_perturbation(h, eps, anchor).map(Some),
        None => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryBetaCheck {
    /// `inf |β| > τ` over the sample.
    pub holds: bool,
    pub inf_abs_beta: f64,
    pub worst_point: Vec<f64>,
    /// β witness direction at the worst point.
    pub worst_direction: Vec<f64>,
}

/// Infimum of `|β(f, ·)|` over boundary points, compared against τ.
pub fn check_boundary_beta_condition(f: &ConvexExpr, tau: f64, boundary: &BoundarySample) -> Result<BoundaryBetaCheck> {
    if boundary.points.is_empty() {
        return Err(Error::Precondition("boundary sample is empty".into()));
    }
    let mut worst: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for p in &boundary.points {
        let c = beta(f, p)?;
        if worst.as_ref().map_or(true, |w| c.beta.abs() < w.0) {
            worst = Some((c.beta.abs(), p.clone(), c.witness));
        }
    }
    let (inf_abs_beta, worst_point, worst_direction) = worst.expect("nonempty boundary");
    Ok(BoundaryBetaCheck {
        holds: inf_abs_beta > tau,
        inf_abs_beta,
        worst_point,
        worst_direction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcSearch {
    /// Flagged pairs, sorted by `|ratio|`.
    pub witnesses: Vec<Witness>,
    pub feasible_samples: usize,
    pub boundary_samples: usize,
}

/// Scans strictly feasible points for pairs along which the error bound degenerates.
pub fn qc_witness_search(f: &ConvexExpr, tau: f64, b: &BoxDomain, n: usize, seed: u64) -> Result<QcSearch> {
    check_dim(f.dim(), b.dim())?;
    let boundary = match boundary_sample(f, b, n, seed) {
        Ok(s) => s,
        Err(Error::NoSignChangeInBox) => {
            return Ok(QcSearch {
                witnesses: Vec::new(),
                feasible_samples: 0,
                boundary_samples: 0,
            })
        }
        Err(e) => return Err(e),
    };
    qc_search_against(f, tau, b, n, seed, &boundary)
}

fn qc_search_against(
    f: &ConvexExpr,
    tau: f64,
    b: &BoxDomain,
    n: usize,
    seed: u64,
    boundary: &BoundarySample,
) -> Result<QcSearch> {
    let mut found: Vec<(f64, Witness)> = Vec::new();
    let mut feasible_samples = 0;
    for z in box_points(b, n, seed.wrapping_add(1)) {
        let fz = f.value(&z);
        if fz >= 0.0 {
            continue;
        }
        feasible_samples += 1;
        let x = boundary
            .points
            .iter()
            .min_by(|p, q| dist(p, &z).total_cmp(&dist(q, &z)))
            .expect("nonempty boundary");
        let gap = dist(x, &z);
        if gap == 0.0 {
            continue;
        }
        let ratio = (fz - f.value(x)) / gap;
        if ratio.abs() >= QC_RATIO_FRACTION * tau {
            continue;
        }
        let beta_z = beta(f, &z)?.beta;
        if beta_z.abs() <= tau {
            found.push((
                ratio.abs(),
                Witness::QcPair {
                    z,
                    x: x.clone(),
                    ratio,
                    beta_z,
                },
            ));
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(QcSearch {
        witnesses: found.into_iter().map(|(_, w)| w).collect(),
        feasible_samples,
        boundary_samples: boundary.points.len(),
    })
}

/// Stable exactly when `β(f, x̄) ≠ 0`.
pub fn classify_local_stability(f: &ConvexExpr, xbar: &[f64]) -> Result<StabilityVerdict> {
    check_dim(f.dim(), xbar.len())?;
    let v = f.value(xbar);
    if v.abs() > 1e-9 {
        return Err(Error::Precondition(format!("f(x̄) = {v}, expected 0")));
    }
    let cert = beta(f, xbar)?;
    let scope = StabilityScope::Local { point: xbar.to_vec() };
    if cert.beta.abs() > BETA_ZERO_TOL {
        return Ok(StabilityVerdict {
            scope,
            verdict: Verdict::Stable,
            beta: Some(cert.beta),
            beta_inf: None,
            witnesses: Vec::new(),
            notes: vec![format!("β = {} is nonzero", cert.beta)],
        });
    }
    Ok(StabilityVerdict {
        scope,
        verdict: Verdict::Unstable,
        beta: Some(cert.beta),
        beta_inf: None,
        witnesses: vec![Witness::Perturbation {
            direction: cert.witness,
            anchor: xbar.to_vec(),
        }],
        notes: vec!["β = 0: f′(x̄, h₀) = 0 along the witness direction h₀".into()],
    })
}

/// Box-relative global verdict from boundary |β| and the feasible-pair scan.
pub fn classify_global_stability(f: &ConvexExpr, tau: f64, b: &BoxDomain, n: usize, seed: u64) -> Result<StabilityVerdict> {
    check_dim(f.dim(), b.dim())?;
    if !(tau > 0.0) {
        return Err(Error::Precondition(format!("τ = {tau} must be positive")));
    }
    let boundary = boundary_sample(f, b, n, seed)?;
    let check = check_boundary_beta_condition(f, tau, &boundary)?;
    let qc = qc_search_against(f, tau, b, n, seed, &boundary)?;
    let mut notes = vec!["verdict is relative to the sampled box".to_string()];
    let mut witnesses = qc.witnesses;
    let verdict = if !witnesses.is_empty() {
        notes.push(format!("{} feasible pair(s) with vanishing slope and |β(z)| ≤ τ", witnesses.len()));
        Verdict::Unstable
    } else if check.inf_abs_beta <= tau * (1.0 - VERDICT_MARGIN) {
        notes.push(format!("boundary point with |β| = {} ≤ τ", check.inf_abs_beta));
        witnesses.push(Witness::Perturbation {
            direction: check.worst_direction.clone(),
            anchor: check.worst_point.clone(),
        });
        Verdict::Unstable
    } else if check.inf_abs_beta > tau * (1.0 + VERDICT_MARGIN) {
        Verdict::Stable
    } else {
        notes.push("boundary |β| lies within the margin around τ".into());
        Verdict::Undetermined
    };
    Ok(StabilityVerdict {
        scope: StabilityScope::Global {
            tau,
            lo: b.lo.clone(),
            hi: b.hi.clone(),
        },
        verdict,
        beta: None,
        beta_inf: Some(check.inf_abs_beta),
        witnesses,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linf_ball() -> ConvexExpr {
        let linf = ConvexExpr::max(vec![ConvexExpr::abs(2, 0).unwrap(), ConvexExpr::abs(2, 1).unwrap()]).unwrap();
        ConvexExpr::sum(vec![(1.0, linf), (1.0, ConvexExpr::constant(2, -1.0).unwrap())]).unwrap()
    }

    #[test]
    fn local_examples() {
        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        assert_eq!(classify_local_stability(&f, &[0.0]).unwrap().verdict, Verdict::Stable);

        let f = ConvexExpr::pos_part_square(1, 0).unwrap();
        let v = classify_local_stability(&f, &[0.0]).unwrap();
        assert_eq!(v.verdict, Verdict::Unstable);
        assert_eq!(v.perturbation().unwrap().0, &[1.0]);

        let f = ConvexExpr::constant(1, 0.0).unwrap();
        assert_eq!(classify_local_stability(&f, &[0.0]).unwrap().verdict, Verdict::Unstable);

        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        assert!(classify_local_stability(&f, &[1.0]).is_err());
    }

    #[test]
    fn boundary_condition_examples() {
        let b = BoxDomain::cube(1, -2.0, 2.0).unwrap();
        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        let c = check_boundary_beta_condition(&f, 0.5, &boundary_sample(&f, &b, 20, 0).unwrap()).unwrap();
        assert!(c.holds);
        assert!((c.inf_abs_beta - 1.0).abs() < 1e-8);

        let f = ConvexExpr::sum(vec![
            (1.0, ConvexExpr::pos_part_square(1, 0).unwrap()),
            (1.0, ConvexExpr::affine(vec![-1.0], 0.0).unwrap()),
        ])
        .unwrap();
        // (x₊)² − x vanishes at 0 and 1; β(f, 0) = −1, β(f, 1) = −1
        let c = check_boundary_beta_condition(&f, 0.5, &boundary_sample(&f, &b, 20, 0).unwrap()).unwrap();
        assert!(c.holds);

        let f = ConvexExpr::affine(vec![3.0, 4.0], -1.0).unwrap();
        let b2 = BoxDomain::cube(2, -2.0, 2.0).unwrap();
        let c = check_boundary_beta_condition(&f, 1.0, &boundary_sample(&f, &b2, 20, 0).unwrap()).unwrap();
        assert!(c.holds && (c.inf_abs_beta - 5.0).abs() < 1e-12);
    }

    #[test]
    fn qc_examples() {
        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        let b = BoxDomain::cube(1, -50.0, 2.0).unwrap();
        let s = qc_witness_search(&f, 0.5, &b, 256, 0).unwrap();
        assert!(!s.witnesses.is_empty());
        let ratios: Vec<f64> = s
            .witnesses
            .iter()
            .map(|w| match w {
                Witness::QcPair { ratio, .. } => ratio.abs(),
                _ => unreachable!(),
            })
            .collect();
        assert!(ratios.windows(2).all(|w| w[0] <= w[1]));

        let f = ConvexExpr::affine(vec![1.0, -1.0], 0.5).unwrap();
        let b = BoxDomain::cube(2, -3.0, 3.0).unwrap();
        assert!(qc_witness_search(&f, 1.0, &b, 256, 0).unwrap().witnesses.is_empty());
        assert!(qc_witness_search(&linf_ball(), 0.5, &b, 256, 0).unwrap().witnesses.is_empty());
    }

    #[test]
    fn global_examples() {
        let f = ConvexExpr::exp1d(1, 0, -1.0).unwrap();
        let b = BoxDomain::cube(1, -50.0, 2.0).unwrap();
        let v = classify_global_stability(&f, 0.5, &b, 256, 0).unwrap();
        assert_eq!(v.verdict, Verdict::Unstable);
        assert!(v.qc_pairs().count() > 0);

        let f = ConvexExpr::affine(vec![3.0, 4.0], -1.0).unwrap();
        let b = BoxDomain::cube(2, -3.0, 3.0).unwrap();
        assert_eq!(classify_global_stability(&f, 2.5, &b, 128, 0).unwrap().verdict, Verdict::Stable);

        assert_eq!(
            classify_global_stability(&linf_ball(), 0.5, &b, 256, 0).unwrap().verdict,
            Verdict::Stable
        );
    }
}
