//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines reach the console; exits nonzero if any criterion fails.

use std::time::Instant;

use errbound::family::{check_active_set_hypotheses, HypothesisStatus, Inclusion};
use errbound::moduli::distance::{distance_from_anchor, distance_to_solution_set};
use errbound::moduli::eta::{eta_global, eta_local};
use errbound::moduli::stability::{classify_local_stability, destabilizing_perturbation, qc_witness_search};
use errbound::sampling::rng;
use errbound::testing::{random_case, random_direction, random_tied_family};
use errbound::vecops::{dot, norm};
use errbound::{beta, Anchor, BoxDomain, ConvexExpr, IndexedFamily, SubdiffSet, Verdict};
use errbound_cli::app::run;
use errbound_cli::scenario::{arrangement_box, grid_ratio_oracle, random_polyhedral_system, system_expr};
use rand::Rng;

const BETA_DISTANCE_TOL: f64 = 1e-8;
const DD_TOL: f64 = 1e-9;
const MAX_FORMULA_TOL: f64 = 1e-10;
const REM10_TOL: f64 = 1e-9;
const REM12_BETA_TOL: f64 = 1e-12;
const AFFINE_TAU_TOL: f64 = 1e-10;
const GRID_REL_TOL: f64 = 0.10;
const GRID_SIDE: usize = 401;
const BETA_ZERO: f64 = 1e-9;
const SUITE_CASES: usize = 200;
/// Relative rounding slack on `d/g ≥ 1/ε`.
const RATIO_SLACK: f64 = 1e-9;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Distance from the origin to `conv(G)` by enumerating affine hulls of generator subsets.
fn hull_distance_oracle(gens: &[Vec<f64>]) -> f64 {
    let m = gens[0].len();
    let n = gens.len();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let s: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        if s.len() > m + 1 {
            continue;
        }
        let k = s.len();
        let mut a = vec![vec![0.0; k + 1]; k + 1];
        for i in 0..k {
            for j in 0..k {
                a[i][j] = dot(&gens[s[i]], &gens[s[j]]);
            }
            a[i][k] = 1.0;
            a[k][i] = 1.0;
        }
        let mut b = vec![0.0; k + 1];
        b[k] = 1.0;
        let Some(y) = solve(a, b) else { continue };
        if y[..k].iter().all(|w| *w >= -1e-12) {
            let mut p = vec![0.0; m];
            for (i, &g) in s.iter().enumerate() {
                for c in 0..m {
                    p[c] += y[i] * gens[g][c];
                }
            }
            best = best.min(norm(&p));
        }
    }
    best
}

fn support_oracle(set: &SubdiffSet, h: &[f64]) -> f64 {
    set.generators().iter().map(|g| dot(g, h)).fold(f64::NEG_INFINITY, f64::max) + set.radius() * norm(h)
}

fn random_expr_case(seed: u64) -> (ConvexExpr, Vec<f64>) {
    let mut r = rng(seed);
    let m = r.random_range(1..=4);
    random_case(&mut r, m)
}

fn criterion_1() -> Outcome {
    let (mut tested, mut worst, mut seed) = (0, 0.0f64, 0u64);
    while tested < SUITE_CASES {
        let (f, x) = random_expr_case(seed);
        seed += 1;
        let b = beta(&f, &x).expect("beta").beta;
        if b >= 0.0 {
            continue;
        }
        let set = f.subdifferential(&x).expect("subdifferential");
        let d = (hull_distance_oracle(set.generators()) - set.radius()).max(0.0);
        worst = worst.max((-b - d).abs());
        tested += 1;
    }
    outcome(worst <= BETA_DISTANCE_TOL, format!("{tested} cases with beta < 0, max |-beta - d(0, df)| = {worst:.2e} (tol {BETA_DISTANCE_TOL:e})"))
}

fn criterion_2() -> Outcome {
    let grid: Vec<f64> = (0..16).map(|k| 2f64.powi(-k)).collect();
    let (mut mono, mut support) = (0.0f64, 0.0f64);
    for seed in 0..SUITE_CASES as u64 {
        let (f, x) = random_expr_case(10_000 + seed);
        let mut r = rng(seed);
        let h = random_direction(&mut r, x.len());
        let d = f.directional_derivative(&x, &h).expect("dd");
        let q = f.dd_quotient_scan(&x, &h, &grid).expect("quotients");
        for w in q.windows(2) {
            mono = mono.max(w[1] - w[0]);
        }
        mono = mono.max(d - q[q.len() - 1]);
        let set = f.subdifferential(&x).expect("subdifferential");
        support = support.max((d - support_oracle(&set, &h)).abs());
    }
    outcome(
        mono <= DD_TOL && support <= DD_TOL,
        format!("{SUITE_CASES} triples, worst quotient increase {mono:.2e}, worst |f'(x,h) - support| {support:.2e} (tol {DD_TOL:e})"),
    )
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..SUITE_CASES as u64 {
        let mut r = rng(20_000 + seed);
        let m = r.random_range(1..=4);
        let (fam, x) = random_tied_family(&mut r, m);
        let h = random_direction(&mut r, m);
        let formula = fam.dd_max_formula(&x, &h).expect("max formula");
        let direct = fam.materialize().expect("materialize").directional_derivative(&x, &h).expect("dd");
        worst = worst.max((formula - direct).abs());
    }
    outcome(worst <= MAX_FORMULA_TOL, format!("{SUITE_CASES} families, max gap {worst:.2e} (tol {MAX_FORMULA_TOL:e})"))
}

fn exp_minus_one() -> ConvexExpr {
    ConvexExpr::exp1d(1, 0, -1.0).expect("exp")
}

fn criterion_4() -> Outcome {
    let f = exp_minus_one();
    let b = beta(&f, &[0.0]).expect("beta").beta;
    let mut ok = b == -1.0;
    let mut detail = format!("beta(f, 0) = {b}");
    for eps in [0.1, 0.01] {
        let g = f.linear_perturbation(&[-1.0], eps, &[0.0]).expect("perturb");
        let x = -1e3 / eps;
        let ratio = distance_to_solution_set(&g, &[x], None).expect("distance") / g.eval(&[x]).expect("eval");
        ok &= ratio >= 1.0 / (2.0 * eps);
        detail += &format!(", ratio at {x} = {ratio:.4} (>= {})", 1.0 / (2.0 * eps));
    }
    let qc = qc_witness_search(&f, 0.5, &BoxDomain::new(vec![-50.0], vec![2.0]).expect("box"), 1024, 0).expect("qc");
    ok &= !qc.witnesses.is_empty();
    detail += &format!(", {} QC witnesses", qc.witnesses.len());
    outcome(ok, detail)
}

fn criterion_5() -> Outcome {
    let f = exp_minus_one();
    let mut worst = 0.0f64;
    for k in [1.0f64, 5.0, 10.0, 20.0] {
        let b = beta(&f, &[-k]).expect("beta").beta;
        worst = worst.max((b + (-k).exp()).abs());
    }
    outcome(worst <= REM10_TOL, format!("max |beta(f, -k) + e^-k| = {worst:.2e} over k in {{1, 5, 10, 20}} (tol {REM10_TOL:e})"))
}

/// `d(z_δ, S)/g(z_δ)` at `z_δ = (0, ε/2)` with `S = {0}`.
fn rem12_ratio(g: &IndexedFamily, eps: f64) -> f64 {
    let sup = g.materialize().expect("materialize");
    let z = [0.0, eps / 2.0];
    let d = distance_from_anchor(&sup, &z, &Anchor::Singleton(vec![0.0, 0.0])).expect("distance").upper;
    d / sup.eval(&z).expect("eval")
}

fn rem12_case(f: &IndexedFamily, target: f64, tol: f64, build: impl Fn(f64) -> IndexedFamily, side: Inclusion) -> Outcome {
    let b = f.beta(&[0.0, 0.0]).expect("beta").beta;
    let mut ok = (b - target).abs() <= tol;
    let mut detail = format!("beta = {b}");
    for eps in [0.1, 0.01] {
        let g = build(eps);
        let ratio = rem12_ratio(&g, eps);
        ok &= ratio >= (1.0 / eps) * (1.0 - RATIO_SLACK);
        let status = check_active_set_hypotheses(f, &g, &[0.0, 0.0]).expect("hypotheses").status;
        ok &= status == HypothesisStatus::Violated(side);
        detail += &format!(", eps {eps}: ratio {ratio:.6}, {status:?}");
    }
    outcome(ok, detail)
}

fn abs(i: usize) -> ConvexExpr {
    ConvexExpr::abs(2, i).expect("abs")
}

fn criterion_6() -> Outcome {
    let f = IndexedFamily::finite(vec![abs(0), abs(1)]).expect("family");
    let build = |eps: f64| {
        IndexedFamily::finite(vec![
            ConvexExpr::sum(vec![(1.0, abs(0)), (eps, abs(1))]).expect("g1"),
            ConvexExpr::sum(vec![(1.0, abs(1)), (1.0, ConvexExpr::constant(2, -eps).expect("c"))]).expect("g2"),
        ])
        .expect("family")
    };
    rem12_case(&f, std::f64::consts::FRAC_1_SQRT_2, REM12_BETA_TOL, build, Inclusion::FInG)
}

fn criterion_7() -> Outcome {
    let f2 = ConvexExpr::sum(vec![(1.0, ConvexExpr::affine(vec![-1.0, 0.0], -1.0).expect("a")), (1.0, abs(1))]).expect("f2");
    let f = IndexedFamily::finite(vec![ConvexExpr::affine(vec![1.0, 0.0], 0.0).expect("f1"), f2]).expect("family");
    let build = |eps: f64| {
        let side = |s: f64| ConvexExpr::sum(vec![(1.0, ConvexExpr::affine(vec![s, 0.0], 0.0).expect("a")), (eps, abs(1))]).expect("g");
        IndexedFamily::finite(vec![side(1.0), side(-1.0)]).expect("family")
    };
    rem12_case(&f, -1.0, 0.0, build, Inclusion::GInF)
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let mut worst_affine = 0.0f64;
    let mut n = 0;
    while n < 20 {
        let m = r.random_range(1..=4);
        let a: Vec<f64> = (0..m).map(|_| r.random_range(-3.0..3.0)).collect();
        if norm(&a) < 1.0 {
            continue;
        }
        n += 1;
        let f = ConvexExpr::affine(a.clone(), r.random_range(-1.0..1.0)).expect("affine");
        let tau = eta_global(&f, &BoxDomain::cube(m, -2.0, 2.0).expect("box"), 256, n).expect("eta").tau.value();
        worst_affine = worst_affine.max((tau - 1.0 / norm(&a)).abs());
    }
    let mut worst_rel = 0.0f64;
    for k in 0..10u64 {
        let rows = random_polyhedral_system(&mut r);
        let f = system_expr(&rows).expect("system");
        let domain = arrangement_box(&rows).expect("box");
        let tau = eta_global(&f, &domain, 4096, k).expect("eta").tau.value();
        let oracle = grid_ratio_oracle(&rows, &domain, GRID_SIDE);
        worst_rel = worst_rel.max((tau - oracle).abs() / oracle);
    }
    outcome(
        worst_affine <= AFFINE_TAU_TOL && worst_rel <= GRID_REL_TOL,
        format!(
            "affine max |tau - 1/|a|| = {worst_affine:.2e} (tol {AFFINE_TAU_TOL:e}); polyhedral max rel gap vs zoomed {GRID_SIDE}x{GRID_SIDE} grid = {worst_rel:.4} (tol {GRID_REL_TOL})"
        ),
    )
}

fn suite() -> Vec<(&'static str, ConvexExpr, Vec<f64>)> {
    let e = |s: &str| errbound_cli::parse_problem(s).expect("suite problem").function.sup_expr().expect("sup");
    vec![
        ("exp", e("dim 1\nexpr (exp1d 0 -1)"), vec![0.0]),
        ("affine", e("dim 2\nexpr (affine [3, -4] 0)"), vec![0.0, 0.0]),
        ("linf edge", e("dim 2\nexpr (sum 1 (max (abs 0) (abs 1)) 1 (const -1))"), vec![1.0, 0.5]),
        ("linf corner", e("dim 2\nexpr (sum 1 (max (abs 0) (abs 1)) 1 (const -1))"), vec![1.0, 1.0]),
        ("disc", e("dim 2\nexpr (sum 1 (norm) 1 (const -1))"), vec![0.6, 0.8]),
        ("cone apex", e("dim 2\nexpr (norm)"), vec![0.0, 0.0]),
        ("cross apex", e("dim 2\nfamily finite [abs 0, abs 1]"), vec![0.0, 0.0]),
        ("pos part square", e("dim 1\nexpr (pospartsq 0)"), vec![0.0]),
        ("pos part square 2d", e("dim 2\nexpr (sum 1 (pospartsq 0) 1 (pospartsq 1))"), vec![0.0, 0.0]),
        ("half line and square", e("dim 2\nexpr (max (affine [1, 0] 0) (pospartsq 1))"), vec![0.0, 0.0]),
        ("shifted square", e("dim 2\nexpr (compose [[1, 1]] [-1] (pospartsq 0))"), vec![0.5, 0.5]),
    ]
}

fn criterion_9() -> Outcome {
    let eps = 0.01;
    let mut bad = Vec::new();
    let (mut stable, mut unstable) = (0, 0);
    for (name, f, x) in suite() {
        let b = beta(&f, &x).expect("beta").beta;
        let v = classify_local_stability(&f, &x).expect("verdict");
        let expected = if b.abs() > BETA_ZERO { Verdict::Stable } else { Verdict::Unstable };
        if v.verdict != expected {
            bad.push(format!("{name}: {:?} with beta {b}", v.verdict));
            continue;
        }
        if v.verdict == Verdict::Stable {
            stable += 1;
            continue;
        }
        unstable += 1;
        let g = destabilizing_perturbation(&f, &v, eps).expect("perturb").expect("unstable verdicts carry a perturbation");
        let tau = eta_local(&g, &x, 8, 256, 0).expect("eta").tau.value();
        if !(tau > 1.0 / (2.0 * eps)) {
            bad.push(format!("{name}: perturbed tau {tau}"));
        }
    }
    // closed form for (x₊)² + εx at 0⁺: d/g = 1/(x + ε)
    let x = 1e-6;
    let closed = 1.0 / (x + eps);
    let g = ConvexExpr::pos_part_square(1, 0).expect("square").linear_perturbation(&[1.0], eps, &[0.0]).expect("perturb");
    let direct = distance_to_solution_set(&g, &[x], None).expect("distance") / g.eval(&[x]).expect("eval");
    if (direct - closed).abs() > 1e-6 * closed {
        bad.push(format!("closed form {closed} vs {direct}"));
    }
    outcome(
        bad.is_empty(),
        format!("{stable} stable, {unstable} unstable, ratio at 1e-6 = {direct:.6}{}", if bad.is_empty() { String::new() } else { format!("; {}", bad.join("; ")) }),
    )
}

fn criterion_10() -> Outcome {
    let dir = std::env::temp_dir().join(format!("errbound-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let file = dir.join("linf.eb");
    std::fs::write(&file, "name linf\ndim 2\nexpr (sum 1 (max (abs 0) (abs 1)) 1 (const -1))\npoint [1, 0.5]\nbox -3..3 -3..3\ntau 0.5\n")
        .expect("write problem");
    let path = file.to_str().expect("utf-8 path");
    let commands: Vec<Vec<&str>> = vec![
        vec!["reproduce", "all"],
        vec!["analyze-local", path],
        vec!["analyze-global", path],
        vec!["perturb", path, "--eps", "0.1,0.01", "--dir", "0,1"],
    ];
    let mut all_same = true;
    let mut bytes = 0;
    for c in &commands {
        let args = |_: ()| ["errbound", "--seed", "0", "--format", "json"].into_iter().chain(c.iter().copied());
        let (c1, a, _) = run(args(()));
        let (c2, b, _) = run(args(()));
        all_same &= c1 == 0 && c2 == 0 && a == b && !a.is_empty();
        bytes += a.len();
    }
    let _ = std::fs::remove_dir_all(&dir);
    outcome(all_same, format!("{} commands run twice with seed 0, {bytes} bytes of JSON, identical: {all_same}", commands.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("beta vs min-norm distance when beta < 0", criterion_1),
        ("quotient monotonicity and support identity", criterion_2),
        ("max formula vs materialized max", criterion_3),
        ("REM8 exponential counterexample", criterion_4),
        ("REM10 vanishing derivative", criterion_5),
        ("REM12A cross apex and I_f not in I_g", criterion_6),
        ("REM12B half plane and I_g not in I_f", criterion_7),
        ("Hoffman affine and polyhedral oracle", criterion_8),
        ("local stability dichotomy", criterion_9),
        ("seed-0 determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {:>2} {} {name}: {} [{secs:.1}s]", k + 1, if o.passed { "PASS" } else { "FAIL" }, o.detail);
        if !o.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
