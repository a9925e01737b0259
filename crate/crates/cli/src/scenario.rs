//! Canned reproductions of the worked examples, each checked against its stated inequality.

use std::fmt;
use std::str::FromStr;

use errbound::family::{check_active_set_hypotheses, HypothesisStatus, Inclusion};
use errbound::moduli::distance::{distance_from_anchor, distance_to_solution_set};
use errbound::moduli::eta::{eta_global, eta_local_with_anchor};
use errbound::moduli::stability::{classify_local_stability, destabilizing_perturbation, qc_witness_search};
use errbound::sampling::rng;
use errbound::vecops::{dot, norm, sub};
use errbound::{beta, Anchor, BoxDomain, ConvexExpr, IndexedFamily, Result, Verdict};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::num::Num;
use crate::problem::{parse_problem, ProblemFile};
use crate::sweep::{run_perturbation_sweep, SweepOptions};

pub const REM10_TOL: f64 = 1e-9;
pub const REM12_BETA_TOL: f64 = 1e-12;
pub const HOFFMAN_AFFINE_TOL: f64 = 1e-10;
pub const HOFFMAN_REL_TOL: f64 = 0.10;
pub const HOFFMAN_GRID: usize = 401;
pub const HOFFMAN_SAMPLES: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    #[serde(rename = "REM8")]
    Rem8,
    #[serde(rename = "REM10")]
    Rem10,
    #[serde(rename = "REM12A")]
    Rem12A,
    #[serde(rename = "REM12B")]
    Rem12B,
    #[serde(rename = "HOFFMAN")]
    Hoffman,
    #[serde(rename = "T32-ZERO-BETA")]
    T32ZeroBeta,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::Rem8,
        Scenario::Rem10,
        Scenario::Rem12A,
        Scenario::Rem12B,
        Scenario::Hoffman,
        Scenario::T32ZeroBeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Rem8 => "REM8",
            Scenario::Rem10 => "REM10",
            Scenario::Rem12A => "REM12A",
            Scenario::Rem12B => "REM12B",
            Scenario::Hoffman => "HOFFMAN",
            Scenario::T32ZeroBeta => "T32-ZERO-BETA",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scenario::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                let names: Vec<&str> = Scenario::ALL.iter().map(|c| c.name()).collect();
                format!("unknown scenario '{s}' (expected one of {})", names.join(", "))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub observed: Num,
    /// The inequality the observed value must satisfy.
    pub expected: String,
    pub passed: bool,
}

impl Check {
    fn at_least(name: impl Into<String>, observed: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            observed: Num(observed),
            expected: format!(">= {bound:?}"),
            passed: observed >= bound,
        }
    }

    fn near(name: impl Into<String>, observed: f64, target: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            observed: Num(observed),
            expected: format!("{target:?} +/- {tol:e}"),
            passed: (observed - target).abs() <= tol,
        }
    }

    fn holds(name: impl Into<String>, observed: f64, expected: impl Into<String>, passed: bool) -> Self {
        Self {
            name: name.into(),
            observed: Num(observed),
            expected: expected.into(),
            passed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: Scenario,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    fn new(scenario: Scenario, checks: Vec<Check>, notes: Vec<String>) -> Self {
        Self {
            scenario,
            passed: checks.iter().all(|c| c.passed),
            checks,
            notes,
        }
    }
}

pub fn reproduce(s: Scenario, seed: u64) -> Result<ScenarioReport> {
    match s {
        Scenario::Rem8 => rem8(seed),
        Scenario::Rem10 => rem10(),
        Scenario::Rem12A => rem12a(seed),
        Scenario::Rem12B => rem12b(seed),
        Scenario::Hoffman => hoffman(seed),
        Scenario::T32ZeroBeta => t32_zero_beta(seed),
    }
}

/// Problem file of a scenario's unperturbed function, where it has one.
pub fn scenario_problem(s: Scenario) -> Option<ProblemFile> {
    let text = match s {
        Scenario::Rem8 => "name rem8\ndim 1\nexpr (exp1d 0 -1)\nslater [-1]\npoint [0]\nbox -50..2\ntau 0.5\n",
        Scenario::Rem10 => "name rem10\ndim 1\nexpr (exp1d 0 -1)\npoint [0]\n",
        Scenario::Rem12A => "name rem12a\ndim 2\nfamily finite [abs 0, abs 1]\npoint [0, 0]\n",
        Scenario::Rem12B => {
            "name rem12b\ndim 2\nfamily finite [affine [1, 0] 0, (sum 1 (affine [-1, 0] -1) 1 (abs 1))]\npoint [0, 0]\n"
        }
        Scenario::T32ZeroBeta => "name t32-zero-beta\ndim 1\nexpr (pospartsq 0)\npoint [0]\n",
        Scenario::Hoffman => return None,
    };
    Some(parse_problem(text).expect("built-in problems parse"))
}

fn rem8(seed: u64) -> Result<ScenarioReport> {
    let p = scenario_problem(Scenario::Rem8).expect("rem8 problem");
    let f = p.function.sup_expr()?;
    let mut checks = vec![Check::holds("beta(f, 0)", beta(&f, &[0.0])?.beta, "== -1", beta(&f, &[0.0])?.beta == -1.0)];
    for eps in [0.1, 0.01] {
        let g = f.linear_perturbation(&[-1.0], eps, &[0.0])?;
        let bound = 1.0 / (2.0 * eps);
        checks.push(Check::near(
            format!("beta(g_eps, 0), eps = {eps}"),
            beta(&g, &[0.0])?.beta,
            -(1.0 - eps),
            1e-12,
        ));
        let x = -1e3 / eps;
        let ratio = distance_to_solution_set(&g, &[x], None)? / g.eval(&[x])?;
        checks.push(Check::at_least(format!("d(x, S_g)/g(x) at x = {x}, eps = {eps}"), ratio, bound));
        let domain = BoxDomain::new(vec![x], vec![2.0])?;
        let sweep = run_perturbation_sweep(
            &p,
            &[0.0],
            &[vec![-1.0]],
            &[eps],
            Some(&domain),
            &SweepOptions {
                seed,
                ..SweepOptions::default()
            },
        )?;
        let tau = sweep.rows[0].tau_global.expect("box given").value();
        checks.push(Check::at_least(format!("tau_global(g_eps) on [{x}, 2], eps = {eps}"), tau, bound));
    }
    let qc = qc_witness_search(&f, 0.5, &BoxDomain::new(vec![-50.0], vec![2.0])?, 1024, seed)?;
    checks.push(Check::at_least("QC witnesses on [-50, 2], tau = 0.5", qc.witnesses.len() as f64, 1.0));
    Ok(ScenarioReport::new(
        Scenario::Rem8,
        checks,
        vec!["the perturbation with u* = -1 shifts beta to -(1 - eps)".into()],
    ))
}

fn rem10() -> Result<ScenarioReport> {
    let f = ConvexExpr::exp1d(1, 0, -1.0)?;
    let mut checks = Vec::new();
    for k in [1.0f64, 5.0, 10.0, 20.0] {
        checks.push(Check::near(format!("beta(f, -{k})"), beta(&f, &[-k])?.beta, -(-k).exp(), REM10_TOL));
    }
    Ok(ScenarioReport::new(Scenario::Rem10, checks, Vec::new()))
}

fn family_of(s: Scenario) -> IndexedFamily {
    match scenario_problem(s).expect("family scenario").function {
        crate::problem::Function::Family(f) => f,
        crate::problem::Function::Expr(_) => unreachable!("REM12 problems are families"),
    }
}

/// `d(z_δ, S)/g(z_δ)` at `z_δ = (0, δ)`, with `S = {0}`.
fn witness_ratio(g: &ConvexExpr, delta: f64) -> Result<f64> {
    let z = [0.0, delta];
    let d = distance_from_anchor(g, &z, &Anchor::Singleton(vec![0.0, 0.0]))?.upper;
    Ok(d / g.eval(&z)?)
}

fn rem12_checks(f: &IndexedFamily, g: &IndexedFamily, eps: f64, seed: u64, checks: &mut Vec<Check>) -> Result<HypothesisStatus> {
    let origin = [0.0, 0.0];
    let sup = g.materialize()?;
    let ratio = witness_ratio(&sup, eps / 2.0)?;
    checks.push(Check::at_least(format!("d(z, S)/g(z) at z = (0, eps/2), eps = {eps}"), ratio, (1.0 / eps) * (1.0 - 1e-9)));
    let local = eta_local_with_anchor(&sup, &origin, 8, 256, seed, Some(&Anchor::Singleton(origin.to_vec())))?;
    checks.push(Check::at_least(
        format!("tau_local(G_eps, 0), eps = {eps}"),
        local.tau.value(),
        (1.0 / eps) * (1.0 - 1e-9),
    ));
    Ok(check_active_set_hypotheses(f, g, &origin)?.status)
}

fn rem12a(seed: u64) -> Result<ScenarioReport> {
    let f = family_of(Scenario::Rem12A);
    let b = f.beta(&[0.0, 0.0])?.beta;
    let mut checks = vec![Check::near("beta(F, 0)", b, std::f64::consts::FRAC_1_SQRT_2, REM12_BETA_TOL)];
    for eps in [0.1, 0.01] {
        let g = IndexedFamily::finite(vec![
            ConvexExpr::sum(vec![(1.0, ConvexExpr::abs(2, 0)?), (eps, ConvexExpr::abs(2, 1)?)])?,
            ConvexExpr::sum(vec![(1.0, ConvexExpr::abs(2, 1)?), (1.0, ConvexExpr::constant(2, -eps)?)])?,
        ])?;
        let status = rem12_checks(&f, &g, eps, seed, &mut checks)?;
        checks.push(Check::holds(
            format!("active-set hypothesis, eps = {eps}"),
            0.0,
            format!("violated: {}", Inclusion::FInG),
            status == HypothesisStatus::Violated(Inclusion::FInG),
        ));
    }
    Ok(ScenarioReport::new(Scenario::Rem12A, checks, Vec::new()))
}

fn rem12b(seed: u64) -> Result<ScenarioReport> {
    let f = family_of(Scenario::Rem12B);
    let b = f.beta(&[0.0, 0.0])?.beta;
    let mut checks = vec![Check::holds("beta(F, 0)", b, "== -1", b == -1.0)];
    for eps in [0.1, 0.01] {
        let g = IndexedFamily::finite(vec![
            ConvexExpr::sum(vec![(1.0, ConvexExpr::affine(vec![1.0, 0.0], 0.0)?), (eps, ConvexExpr::abs(2, 1)?)])?,
            ConvexExpr::sum(vec![(1.0, ConvexExpr::affine(vec![-1.0, 0.0], 0.0)?), (eps, ConvexExpr::abs(2, 1)?)])?,
        ])?;
        let status = rem12_checks(&f, &g, eps, seed, &mut checks)?;
        checks.push(Check::holds(
            format!("active-set hypothesis, eps = {eps}"),
            0.0,
            format!("violated: {}", Inclusion::GInF),
            status == HypothesisStatus::Violated(Inclusion::GInF),
        ));
    }
    Ok(ScenarioReport::new(
        Scenario::Rem12B,
        checks,
        vec!["second member read as f_2(x) = -x_1 + |x_2| - 1".into()],
    ))
}

/// Exact distance to `{x ∈ ℝ² : ⟨a_i, x⟩ ≤ b_i}`: the nearest point is `x`, a
/// projection onto one edge line, or a vertex.
pub fn polyhedron_distance_2d(rows: &[(Vec<f64>, f64)], x: &[f64]) -> f64 {
    let feasible = |p: &[f64]| rows.iter().all(|(a, b)| dot(a, p) <= b + 1e-12 * (1.0 + b.abs()));
    if feasible(x) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (a, b) in rows {
        let t = (dot(a, x) - b) / dot(a, a);
        let p = vec![x[0] - t * a[0], x[1] - t * a[1]];
        if feasible(&p) {
            best = best.min(norm(&sub(x, &p)));
        }
    }
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (&rows[i].0, &rows[j].0);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let p = vec![
                (rows[i].1 * b[1] - a[1] * rows[j].1) / det,
                (a[0] * rows[j].1 - rows[i].1 * b[0]) / det,
            ];
            if feasible(&p) {
                best = best.min(norm(&sub(x, &p)));
            }
        }
    }
    best
}

fn solve_2x2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0] * b[1] - a[1] * b[0];
    if det.abs() < 1e-12 {
        return None;
    }
    Some([(c[0] * b[1] - a[1] * c[1]) / det, (a[0] * c[1] - c[0] * b[0]) / det])
}

fn system_value(rows: &[(Vec<f64>, f64)], x: &[f64]) -> f64 {
    rows.iter().map(|(a, c)| dot(a, x) - c).fold(f64::NEG_INFINITY, f64::max)
}

/// Cube twice as wide as the vertices of the max-arrangement of the system:
/// points where two active rows meet the zero level or a third active row.
/// Every face with `f > 0` then reaches into the cube, so truncating to it
/// leaves `inf d(0, ∂f)` unchanged.
pub fn arrangement_box(rows: &[(Vec<f64>, f64)]) -> Result<BoxDomain> {
    let mut half: f64 = 1.0;
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let ((ai, bi), (aj, bj)) = ((&rows[i].0, rows[i].1), (&rows[j].0, rows[j].1));
            let tie = [ai[0] - aj[0], ai[1] - aj[1]];
            let mut cands: Vec<[f64; 2]> = solve_2x2([ai[0], ai[1]], [aj[0], aj[1]], [bi, bj]).into_iter().collect();
            for (k, (ak, bk)) in rows.iter().enumerate() {
                if k != i && k != j {
                    cands.extend(solve_2x2(tie, [ai[0] - ak[0], ai[1] - ak[1]], [bi - bj, bi - bk]));
                }
            }
            for p in cands {
                let vi = dot(ai, &p) - bi;
                if (system_value(rows, &p) - vi).abs() <= 1e-9 * (1.0 + vi.abs()) {
                    half = half.max(p[0].abs()).max(p[1].abs());
                }
            }
        }
    }
    BoxDomain::cube(2, -2.0 * half, 2.0 * half)
}

/// `sup d(x, S)/[f(x)]₊` over a uniform `n × n` grid of the box, then zoomed
/// twice around the best node.
pub fn grid_ratio_oracle(rows: &[(Vec<f64>, f64)], b: &BoxDomain, n: usize) -> f64 {
    let ratio = |x: &[f64]| {
        let fx = system_value(rows, x);
        if fx > 1e-9 {
            polyhedron_distance_2d(rows, x) / fx
        } else {
            0.0
        }
    };
    let (mut lo, mut hi) = ([b.lo[0], b.lo[1]], [b.hi[0], b.hi[1]]);
    let (mut best, mut at) = (0.0f64, [0.0, 0.0]);
    for _ in 0..3 {
        for i in 0..n {
            for j in 0..n {
                let x = [
                    lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64,
                    lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64,
                ];
                let r = ratio(&x);
                if r > best {
                    (best, at) = (r, x);
                }
            }
        }
        for c in 0..2 {
            let cell = (hi[c] - lo[c]) / (n - 1) as f64;
            lo[c] = (at[c] - 2.0 * cell).max(b.lo[c]);
            hi[c] = (at[c] + 2.0 * cell).min(b.hi[c]);
        }
    }
    best
}

/// `max_i (⟨a_i, x⟩ − b_i)` with `b_i > 0`, so the origin is a Slater point.
pub fn random_polyhedral_system(r: &mut impl Rng) -> Vec<(Vec<f64>, f64)> {
    let k = r.random_range(2..=5);
    (0..k)
        .map(|_| {
            let theta = r.random_range(0.0..std::f64::consts::TAU);
            let len = r.random_range(0.5..3.0);
            (vec![len * theta.cos(), len * theta.sin()], r.random_range(0.2..1.5))
        })
        .collect()
}

pub fn system_expr(rows: &[(Vec<f64>, f64)]) -> Result<ConvexExpr> {
    ConvexExpr::max(
        rows.iter()
            .map(|(a, b)| ConvexExpr::affine(a.clone(), -b))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn hoffman(seed: u64) -> Result<ScenarioReport> {
    let mut r = rng(seed);
    let mut checks = Vec::new();
    let mut worst: f64 = 0.0;
    let mut k = 0;
    while k < 20 {
        let m = r.random_range(1..=4);
        let a: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        if norm(&a) < 1.0 {
            continue;
        }
        k += 1;
        let f = ConvexExpr::affine(a.clone(), r.random_range(-1.0..1.0))?;
        let tau = eta_global(&f, &BoxDomain::cube(m, -2.0, 2.0)?, 256, seed + k)?.tau.value();
        worst = worst.max((tau - 1.0 / norm(&a)).abs() * norm(&a));
    }
    checks.push(Check::holds(
        "max relative |tau - 1/|a|| over 20 affine inequalities",
        worst,
        format!("<= {HOFFMAN_AFFINE_TOL:e}"),
        worst <= HOFFMAN_AFFINE_TOL,
    ));
    for k in 0..10u64 {
        let rows = random_polyhedral_system(&mut r);
        let f = system_expr(&rows)?;
        let domain = arrangement_box(&rows)?;
        let tau = eta_global(&f, &domain, HOFFMAN_SAMPLES, seed + 100 + k)?.tau.value();
        let oracle = grid_ratio_oracle(&rows, &domain, HOFFMAN_GRID);
        let rel = (tau - oracle).abs() / oracle;
        checks.push(Check::holds(
            format!("system {k} ({} members): tau {tau:.6} vs grid {oracle:.6}", rows.len()),
            rel,
            format!("<= {HOFFMAN_REL_TOL}"),
            rel <= HOFFMAN_REL_TOL,
        ));
    }
    Ok(ScenarioReport::new(Scenario::Hoffman, checks, vec![
            "systems are random in m = 2 with the origin strictly feasible".into(),
            "each system is sampled on a cube containing every vertex of its max-arrangement".into(),
        ]))
}

fn t32_zero_beta(seed: u64) -> Result<ScenarioReport> {
    let p = scenario_problem(Scenario::T32ZeroBeta).expect("t32 problem");
    let f = p.function.sup_expr()?;
    let verdict = classify_local_stability(&f, &[0.0])?;
    let mut checks = vec![Check::holds(
        "local verdict at 0",
        verdict.beta.unwrap_or(f64::NAN),
        "Unstable",
        verdict.verdict == Verdict::Unstable,
    )];
    let eps = 0.01;
    let bound = 1.0 / (2.0 * eps);
    if let Some(g) = destabilizing_perturbation(&f, &verdict, eps)? {
        let local = eta_local_with_anchor(&g, &[0.0], 8, 256, seed, None)?;
        checks.push(Check::at_least("tau_local(g_eps, 0), eps = 0.01", local.tau.value(), bound));
        let (h, _) = verdict.perturbation().expect("unstable verdicts carry a perturbation");
        // g > 0 on the side h₀ points to, where the ratio is 1/(|x| + ε)
        let x = [1e-6 * h[0].signum()];
        let ratio = distance_to_solution_set(&g, &x, None)? / g.eval(&x)?;
        checks.push(Check::at_least(format!("d(x, S_g)/g(x) at x = {}", x[0]), ratio, bound));
    }
    Ok(ScenarioReport::new(Scenario::T32ZeroBeta, checks, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("rem9".parse::<Scenario>().is_err());
    }

    #[test]
    fn polyhedron_distance_cases() {
        // unit square
        let rows = vec![
            (vec![1.0, 0.0], 1.0),
            (vec![-1.0, 0.0], 1.0),
            (vec![0.0, 1.0], 1.0),
            (vec![0.0, -1.0], 1.0),
        ];
        assert_eq!(polyhedron_distance_2d(&rows, &[0.5, 0.5]), 0.0);
        assert!((polyhedron_distance_2d(&rows, &[3.0, 0.0]) - 2.0).abs() < 1e-15);
        assert!((polyhedron_distance_2d(&rows, &[4.0, 5.0]) - 5.0).abs() < 1e-15);
    }
}
