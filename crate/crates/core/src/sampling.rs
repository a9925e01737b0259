//! Seeded low-discrepancy point sets.
//!
//! Points come from a Halton sequence with a Cranley–Patterson rotation drawn
//! from a ChaCha stream, so a seed fully determines every sample.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::vecops::{norm, scale};

const PRIMES: [u64; 24] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89,
];

/// Axis-aligned box `[lo_1, hi_1] × … × [lo_m, hi_m]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Precondition("box bounds must have equal positive length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Precondition("box requires finite lo ≤ hi on every axis".into()));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(dim: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; dim], vec![hi; dim])
    }

    /// Cube of half-width `r` around `c`.
    pub fn around(c: &[f64], r: f64) -> Result<Self> {
        Self::new(c.iter().map(|v| v - r).collect(), c.iter().map(|v| v + r).collect())
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    pub fn diameter(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// Randomly shifted Halton sequence in `[0,1)^dim`.
#[derive(Debug, Clone)]
pub struct Halton {
    shift: Vec<f64>,
    index: u64,
}

impl Halton {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(dim <= PRIMES.len(), "Halton sequence supports at most {} dimensions", PRIMES.len());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shift = (0..dim).map(|_| rng.random::<f64>()).collect();
        // skip the first points, which are strongly correlated across bases
        Self { shift, index: 20 }
    }

    pub fn next_point(&mut self) -> Vec<f64> {
        self.index += 1;
        self.shift
            .iter()
            .enumerate()
            .map(|(k, s)| (radical_inverse(self.index, PRIMES[k]) + s).fract())
            .collect()
    }
}

pub fn unit_cube_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut h = Halton::new(dim, seed);
    (0..n).map(|_| h.next_point()).collect()
}

pub fn box_points(b: &BoxDomain, n: usize, seed: u64) -> Vec<Vec<f64>> {
    unit_cube_points(b.dim(), n, seed)
        .into_iter()
        .map(|u| {
            u.iter()
                .zip(b.lo.iter().zip(&b.hi))
                .map(|(t, (lo, hi))| lo + t * (hi - lo))
                .collect()
        })
        .collect()
}

/// `n` points in the closed ball `B(center, radius)`, by rejection from the cube.
pub fn ball_points(center: &[f64], radius: f64, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut h = Halton::new(center.len(), seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let u: Vec<f64> = h.next_point().iter().map(|t| 2.0 * t - 1.0).collect();
        if norm(&u) <= 1.0 {
            out.push(center.iter().zip(&u).map(|(c, v)| c + radius * v).collect());
        }
    }
    out
}

/// Low-discrepancy unit directions via the Gaussian inverse CDF.
pub fn unit_directions(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    if dim == 1 {
        return (0..n).map(|i| vec![if i % 2 == 0 { 1.0 } else { -1.0 }]).collect();
    }
    let normal = Normal::standard();
    let mut h = Halton::new(dim, seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let g: Vec<f64> = h
            .next_point()
            .iter()
            .map(|u| normal.inverse_cdf(u.clamp(1e-12, 1.0 - 1e-12)))
            .collect();
        let r = norm(&g);
        if r > 1e-9 {
            out.push(scale(&g, 1.0 / r));
        }
    }
    out
}

/// Seeded uniform stream for the few places that need plain randomness.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
