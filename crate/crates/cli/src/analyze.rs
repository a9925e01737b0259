//! Local and global analyses of a problem file.

use errbound::family::{classify_system_stability, SystemScope, TestedPoint};
use errbound::moduli::boundary::boundary_sample;
use errbound::moduli::eta::{eta_global_with_anchor, eta_local_with_anchor};
use errbound::moduli::stability::{check_boundary_beta_condition, classify_global_stability, classify_local_stability, BoundaryBetaCheck};
use errbound::{beta, Anchor, BetaCertificate, BoxDomain, Error, ModulusReport, OriginLocation, Result, StabilityVerdict};
use serde::{Deserialize, Serialize};

use crate::problem::{Function, ProblemFile};

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub levels: usize,
    pub samples_per_level: usize,
    pub global_samples: usize,
    pub seed: u64,
    /// Origin-classification tolerance.
    pub tol: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            levels: 8,
            samples_per_level: 256,
            global_samples: 4096,
            seed: 0,
            tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalAnalysis {
    pub point: Vec<f64>,
    pub beta: BetaCertificate,
    /// Origin location in ∂f(x̄) at the requested tolerance.
    pub origin: OriginLocation,
    pub modulus: ModulusReport,
    pub verdict: StabilityVerdict,
    /// Active members at x̄ for families.
    pub active: Option<Vec<TestedPoint>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalAnalysis {
    pub tau: f64,
    pub domain: BoxDomain,
    pub modulus: ModulusReport,
    pub boundary: BoundaryBetaCheck,
    pub verdict: StabilityVerdict,
    pub active: Option<Vec<TestedPoint>>,
}

fn anchor(p: &ProblemFile) -> Option<Anchor> {
    p.slater.clone().map(Anchor::Slater)
}

pub fn analyze_local(p: &ProblemFile, xbar: &[f64], opts: &AnalysisOptions) -> Result<LocalAnalysis> {
    let f = p.function.sup_expr()?;
    let set = f.subdifferential(xbar)?;
    let origin = set.classify_origin(opts.tol)?;
    let modulus = eta_local_with_anchor(&f, xbar, opts.levels, opts.samples_per_level, opts.seed, anchor(p).as_ref())?;
    let (verdict, active) = match &p.function {
        Function::Expr(_) => (classify_local_stability(&f, xbar)?, None),
        Function::Family(fam) => {
            let v = classify_system_stability(fam, &SystemScope::Local(xbar.to_vec()), opts.global_samples, opts.seed)?;
            (v.verdict, Some(v.active_sets))
        }
    };
    Ok(LocalAnalysis {
        point: xbar.to_vec(),
        beta: beta(&f, xbar)?,
        origin,
        modulus,
        verdict,
        active,
    })
}

pub fn analyze_global(p: &ProblemFile, tau: f64, domain: &BoxDomain, opts: &AnalysisOptions) -> Result<GlobalAnalysis> {
    if domain.dim() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: domain.dim(),
        });
    }
    let f = p.function.sup_expr()?;
    let n = opts.global_samples;
    let modulus = eta_global_with_anchor(&f, domain, n, opts.seed, anchor(p).as_ref())?;
    let sample = boundary_sample(&f, domain, n, opts.seed)?;
    let boundary = check_boundary_beta_condition(&f, tau, &sample)?;
    let (verdict, active) = match &p.function {
        Function::Expr(_) => (classify_global_stability(&f, tau, domain, n, opts.seed)?, None),
        Function::Family(fam) => {
            let scope = SystemScope::Global {
                tau,
                domain: domain.clone(),
            };
            let v = classify_system_stability(fam, &scope, n, opts.seed)?;
            (v.verdict, Some(v.active_sets))
        }
    };
    Ok(GlobalAnalysis {
        tau,
        domain: domain.clone(),
        modulus,
        boundary,
        verdict,
        active,
    })
}
