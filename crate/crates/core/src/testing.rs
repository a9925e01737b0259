//! Seeded random problem generators shared by the test suites.

use rand::Rng;

use crate::expr::ConvexExpr;
use crate::family::IndexedFamily;

fn coef(rng: &mut impl Rng) -> f64 {
    // small integers and halves make exact ties and kinks common
    match rng.random_range(0..4) {
        0 => rng.random_range(-4i32..=4) as f64 * 0.5,
        _ => rng.random_range(-2.0..2.0),
    }
}

fn vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| coef(rng)).collect()
}

/// Point whose coordinates are often exactly `0` or `±1`.
pub fn random_point(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim)
        .map(|_| match rng.random_range(0..6) {
            0 => 0.0,
            1 => 1.0,
            2 => -1.0,
            _ => rng.random_range(-2.0..2.0),
        })
        .collect()
}

pub fn random_atom(rng: &mut impl Rng, dim: usize) -> ConvexExpr {
    let i = rng.random_range(0..dim);
    match rng.random_range(0..8) {
        0 => ConvexExpr::constant(dim, coef(rng)).unwrap(),
        1 | 2 => ConvexExpr::affine(vector(rng, dim), coef(rng)).unwrap(),
        3 => ConvexExpr::norm(dim).unwrap(),
        4 => ConvexExpr::abs(dim, i).unwrap(),
        5 => ConvexExpr::exp1d(dim, i, coef(rng)).unwrap(),
        6 => ConvexExpr::pos_part_square(dim, i).unwrap(),
        _ => {
            // |⟨a, x⟩ + c|
            let row = vector(rng, dim);
            ConvexExpr::compose_affine(ConvexExpr::abs(1, 0).unwrap(), vec![row], vec![coef(rng)]).unwrap()
        }
    }
}

/// Random expression tree of the given depth over ℝ^dim.
pub fn random_expr(rng: &mut impl Rng, dim: usize, depth: usize) -> ConvexExpr {
    if depth == 0 {
        return random_atom(rng, dim);
    }
    match rng.random_range(0..3) {
        0 => random_atom(rng, dim),
        1 => {
            let k = rng.random_range(2..=3);
            ConvexExpr::max((0..k).map(|_| random_expr(rng, dim, depth - 1)).collect()).unwrap()
        }
        _ => {
            let k = rng.random_range(1..=2);
            ConvexExpr::sum(
                (0..k)
                    .map(|_| (rng.random_range(0.25..2.0), random_expr(rng, dim, depth - 1)))
                    .collect(),
            )
            .unwrap()
        }
    }
}

/// Random `(f, x)` whose subdifferential is representable.
pub fn random_case(rng: &mut impl Rng, dim: usize) -> (ConvexExpr, Vec<f64>) {
    loop {
        let f = random_expr(rng, dim, 2);
        let x = random_point(rng, dim);
        if f.subdifferential(&x).is_ok() {
            return (f, x);
        }
    }
}

/// Finite family of 2–5 members, with several members tied at the returned point.
pub fn random_tied_family(rng: &mut impl Rng, dim: usize) -> (IndexedFamily, Vec<f64>) {
    loop {
        let k = rng.random_range(2..=5);
        let x = random_point(rng, dim);
        let raw: Vec<ConvexExpr> = (0..k).map(|_| random_expr(rng, dim, 1)).collect();
        let top = raw.iter().map(|e| e.eval(&x).unwrap()).fold(f64::NEG_INFINITY, f64::max);
        let members: Vec<ConvexExpr> = raw
            .into_iter()
            .map(|e| {
                if rng.random_bool(0.5) {
                    let lift = top - e.eval(&x).unwrap();
                    ConvexExpr::sum(vec![(1.0, e), (1.0, ConvexExpr::constant(dim, lift).unwrap())]).unwrap()
                } else {
                    e
                }
            })
            .collect();
        let fam = IndexedFamily::finite(members).unwrap();
        if fam.system_subdifferential(&x).is_ok() && fam.materialize().unwrap().subdifferential(&x).is_ok() {
            return (fam, x);
        }
    }
}

/// Unit vector in ℝ^dim.
pub fn random_direction(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Some(u) = crate::vecops::normalized(&v) {
            if crate::vecops::norm(&v) > 1e-3 {
                return u;
            }
        }
    }
}
