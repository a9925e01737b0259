//! ε-linear perturbation sweeps `g = f + ε⟨u*, · − x̄⟩`.

use errbound::moduli::eta::{eta_global_with_anchor, eta_local_with_anchor};
use errbound::moduli::stability::classify_local_stability;
use errbound::vecops::norm;
use errbound::{beta, beta_of_linear_perturbation, Anchor, BoxDomain, Modulus, Result, Verdict};
use serde::{Deserialize, Serialize};

use crate::problem::ProblemFile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub u_star: Vec<f64>,
    pub beta_before: f64,
    pub beta_after: f64,
    pub tau_local: Modulus,
    /// Absent without a box.
    pub tau_global: Option<Modulus>,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timestamps {
    /// Seconds since the Unix epoch.
    pub started: f64,
    pub finished: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub point: Vec<f64>,
    pub rows: Vec<SweepRow>,
    pub seed: u64,
    pub timestamps: Option<Timestamps>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub levels: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            levels: 8,
            samples: 256,
            seed: 0,
        }
    }
}

/// One row per `(ε, u*)`, ordered by ε, then by the order of `dirs`.
pub fn run_perturbation_sweep(
    p: &ProblemFile,
    xbar: &[f64],
    dirs: &[Vec<f64>],
    eps: &[f64],
    domain: Option<&BoxDomain>,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    let f = p.function.sup_expr()?;
    let before = beta(&f, xbar)?.beta;
    let mut order: Vec<f64> = eps.to_vec();
    order.sort_by(f64::total_cmp);
    let mut rows = Vec::new();
    for &e in &order {
        for u in dirs {
            let g = f.linear_perturbation(u, e, xbar)?;
            let after = beta_of_linear_perturbation(&f, xbar, u, e, xbar)?.beta;
            debug_assert!((after - before).abs() <= e * norm(u) + 1e-9);
            // the declared Slater point of f may not be strictly feasible for g
            let anchor = p
                .slater
                .as_ref()
                .filter(|s| g.eval(s).is_ok_and(|v| v < 0.0))
                .map(|s| Anchor::Slater(s.clone()));
            let anchor = anchor.as_ref();
            let local = eta_local_with_anchor(&g, xbar, opts.levels, opts.samples, opts.seed, anchor)?;
            let global = match domain {
                Some(b) => Some(eta_global_with_anchor(&g, b, opts.samples * opts.levels, opts.seed, anchor)?.tau),
                None => None,
            };
            rows.push(SweepRow {
                epsilon: e,
                u_star: u.clone(),
                beta_before: before,
                beta_after: after,
                tau_local: local.tau,
                tau_global: global,
                verdict: classify_local_stability(&g, xbar)?.verdict,
            });
        }
    }
    Ok(SweepResult {
        point: xbar.to_vec(),
        rows,
        seed: opts.seed,
        timestamps: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::parse_problem;

    #[test]
    fn zero_eps_changes_nothing() {
        let p = parse_problem("dim 2\nexpr (sum 1 (max (abs 0) (abs 1)) 1 (const -1))\n").unwrap();
        let x = [1.0, 0.5];
        let s = run_perturbation_sweep(&p, &x, &[vec![0.6, -0.8]], &[0.0], None, &SweepOptions::default()).unwrap();
        let r = &s.rows[0];
        assert_eq!(r.beta_before, r.beta_after);
        assert_eq!(r.verdict, Verdict::Stable);
    }

    #[test]
    fn pos_part_square_local_modulus_blows_up() {
        let p = parse_problem("dim 1\nexpr (pospartsq 0)\n").unwrap();
        let s = run_perturbation_sweep(&p, &[0.0], &[vec![1.0]], &[0.01], None, &SweepOptions::default()).unwrap();
        assert!(s.rows[0].tau_local.value() >= 50.0, "{:?}", s.rows[0]);
        // g(x) = x₊² + εx has S_g = (−∞, 0]; the ratio at x = 1e−6 is 1/(x + ε)
        let x = 1e-6;
        let ratio = x / (x * x + 0.01 * x);
        assert!(ratio >= 50.0);
    }

    #[test]
    fn rows_are_sorted_by_eps() {
        let p = parse_problem("dim 1\nexpr (exp1d 0 -1)\n").unwrap();
        let s = run_perturbation_sweep(&p, &[0.0], &[vec![-1.0], vec![1.0]], &[0.1, 0.01], None, &SweepOptions::default()).unwrap();
        let eps: Vec<f64> = s.rows.iter().map(|r| r.epsilon).collect();
        assert_eq!(eps, vec![0.01, 0.01, 0.1, 0.1]);
        for r in &s.rows {
            assert!((r.beta_after - r.beta_before).abs() <= r.epsilon * norm(&r.u_star) + 1e-9);
        }
    }
}
