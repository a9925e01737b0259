use errbound::moduli::boundary::boundary_sample;
use errbound::moduli::distance::distance_to_solution_set;
use errbound::moduli::eta::{eta_global, eta_local};
use errbound::sampling::rng;
use errbound::testing::random_direction;
use errbound::vecops::norm;
use errbound::{BoxDomain, ConvexExpr, Modulus, ModulusReport};
use rand::Rng;

fn linf_ball() -> ConvexExpr {
    let m = ConvexExpr::max(vec![ConvexExpr::abs(2, 0).unwrap(), ConvexExpr::abs(2, 1).unwrap()]).unwrap();
    ConvexExpr::sum(vec![(1.0, m), (1.0, ConvexExpr::constant(2, -1.0).unwrap())]).unwrap()
}

fn disc() -> ConvexExpr {
    ConvexExpr::sum(vec![(1.0, ConvexExpr::norm(2).unwrap()), (1.0, ConvexExpr::constant(2, -1.0).unwrap())]).unwrap()
}

fn wedge() -> ConvexExpr {
    ConvexExpr::max(vec![
        ConvexExpr::affine(vec![1.0, 2.0], -1.0).unwrap(),
        ConvexExpr::affine(vec![-1.0, 0.5], -0.5).unwrap(),
        ConvexExpr::affine(vec![0.0, -1.0], -1.0).unwrap(),
    ])
    .unwrap()
}

fn suite() -> Vec<(&'static str, ConvexExpr, BoxDomain)> {
    vec![
        ("exp", ConvexExpr::exp1d(1, 0, -1.0).unwrap(), BoxDomain::cube(1, -5.0, 2.0).unwrap()),
        ("linf", linf_ball(), BoxDomain::cube(2, -3.0, 3.0).unwrap()),
        ("disc", disc(), BoxDomain::cube(2, -3.0, 3.0).unwrap()),
        ("wedge", wedge(), BoxDomain::cube(2, -4.0, 4.0).unwrap()),
    ]
}

fn check_reciprocal(r: &ModulusReport) {
    match (r.eta, r.tau) {
        (Modulus::Finite(e), Modulus::Finite(t)) => assert_eq!(t, 1.0 / e),
        (Modulus::Infinite, Modulus::Finite(t)) => assert_eq!(t, 0.0),
        (Modulus::Finite(e), Modulus::Infinite) => assert_eq!(e, 0.0),
        (Modulus::Infinite, Modulus::Infinite) => panic!("eta and tau both infinite"),
    }
}

#[test]
fn reports_are_reciprocal_and_ratio_consistent() {
    for (name, f, b) in suite() {
        let g = eta_global(&f, &b, 512, 0).unwrap();
        check_reciprocal(&g);
        assert!(g.consistent, "{name}: ratio {:?} vs tau {:?}", g.empirical_ratio, g.tau);
        let bs = boundary_sample(&f, &b, 6, 0).unwrap();
        for p in &bs.points {
            let l = eta_local(&f, p, 8, 256, 0).unwrap();
            check_reciprocal(&l);
            assert!(l.consistent, "{name} at {p:?}: ratio {:?} vs tau {:?}", l.empirical_ratio, l.tau);
        }
    }
}

#[test]
fn affine_moduli_are_the_gradient_norm() {
    let mut r = rng(11);
    for seed in 0..10u64 {
        let m = r.random_range(1..=3);
        let a: Vec<f64> = random_direction(&mut r, m).iter().map(|v| v * r.random_range(0.2..5.0)).collect();
        let f = ConvexExpr::affine(a.clone(), 0.0).unwrap();
        let na = norm(&a);
        let g = eta_global(&f, &BoxDomain::cube(m, -2.0, 2.0).unwrap(), 128, seed).unwrap();
        let l = eta_local(&f, &vec![0.0; m], 4, 64, seed).unwrap();
        assert!((g.eta.value() - na).abs() <= 1e-12 * na, "{:?} vs {na}", g.eta);
        assert!((l.eta.value() - na).abs() <= 1e-12 * na, "{:?} vs {na}", l.eta);
    }
}

#[test]
fn global_tau_dominates_local_taus() {
    for (name, f, b) in suite() {
        let g = eta_global(&f, &b, 1024, 3).unwrap().tau.value();
        let bs = boundary_sample(&f, &b, 8, 3).unwrap();
        for p in &bs.points {
            let l = eta_local(&f, p, 8, 256, 3).unwrap().tau.value();
            assert!(g >= 0.95 * l, "{name} at {p:?}: global {g} < local {l}");
        }
    }
}

#[test]
fn tilted_exponential_has_global_modulus_near_eps() {
    // g(x) = e^x − 1 − εx: the feasible set is [x_ε, 0] and |g′| = ε − e^x left of it
    for eps in [0.1, 0.01] {
        let g = ConvexExpr::exp1d(1, 0, -1.0).unwrap().linear_perturbation(&[-1.0], eps, &[0.0]).unwrap();
        let b = BoxDomain::new(vec![-1e3 / eps], vec![2.0]).unwrap();
        let rep = eta_global(&g, &b, 4096, 0).unwrap();
        let eta = rep.eta.value();
        assert!(eta >= eps * 0.99 && eta <= eps, "eps {eps}: eta {eta}");
        assert!(rep.tau.value() >= 1.0 / (2.0 * eps));
        let x = -1e3 / eps;
        let ratio = distance_to_solution_set(&g, &[x], None).unwrap() / g.eval(&[x]).unwrap();
        assert!(ratio >= 1.0 / (2.0 * eps), "eps {eps}: ratio {ratio}");
    }
}

#[test]
fn pos_part_square_has_no_local_error_bound() {
    let f = ConvexExpr::pos_part_square(1, 0).unwrap();
    let rep = eta_local(&f, &[0.0], 8, 256, 0).unwrap();
    // d(x, S) / f(x) = 1/x on (0, 2^{−7}]: the sampled η is the finest-level 2x
    assert!(rep.eta.value() <= 2.0 * 2f64.powi(-7) + 1e-12, "{:?}", rep.eta);
    check_reciprocal(&rep);
}
