//! Sampled estimates of `η = inf d(0, ∂f(x))` over `f(x) > 0`, and `τ = 1/η`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::ConvexExpr;
use crate::moduli::distance::{distance_from_anchor, locate_anchor, Anchor};
use crate::sampling::{ball_points, box_points, BoxDomain};
use crate::vecops::{axpy, dist, norm, sub};

/// Relative slack of the `empirical_ratio ≤ τ` gate.
pub const CONSISTENCY_SLACK: f64 = 0.05;

const KINK_BISECTIONS: usize = 60;
const MAX_KINK_POINTS: usize = 8192;
/// Local samples closer than this (relative) to x̄ are dropped.
const XBAR_EXCLUSION: f64 = 1e-9;

/// A nonnegative modulus that may be `+∞`. Serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModulusRepr", try_from = "ModulusRepr")]
pub enum Modulus {
    Finite(f64),
    Infinite,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ModulusRepr {
    Number(f64),
    Text(String),
}

impl From<Modulus> for ModulusRepr {
    fn from(m: Modulus) -> Self {
        match m {
            Modulus::Finite(v) => ModulusRepr::Number(v),
            Modulus::Infinite => ModulusRepr::Text("inf".into()),
        }
    }
}

impl TryFrom<ModulusRepr> for Modulus {
    type Error = String;
    fn try_from(r: ModulusRepr) -> std::result::Result<Self, String> {
        match r {
            ModulusRepr::Number(v) => Ok(Modulus::Finite(v)),
            ModulusRepr::Text(s) if s == "inf" => Ok(Modulus::Infinite),
            ModulusRepr::Text(s) => Err(format!("expected a number or \"inf\", found {s:?}")),
        }
    }
}

impl Modulus {
    pub fn from_value(v: f64) -> Self {
        if v.is_finite() {
            Modulus::Finite(v)
        } else {
            Modulus::Infinite
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Modulus::Finite(v) => v,
            Modulus::Infinite => f64::INFINITY,
        }
    }

    pub fn reciprocal(self) -> Self {
        match self {
            Modulus::Finite(v) if v > 0.0 => Modulus::from_value(1.0 / v),
            Modulus::Finite(_) => Modulus::Infinite,
            Modulus::Infinite => Modulus::Finite(0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModulusScope {
    Local { point: Vec<f64> },
    Global { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShrinkLevel {
    pub radius: f64,
    /// `None` when the ball held no point with `f > 0`.
    pub min_distance: Option<f64>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub scope: ModulusScope,
    pub eta: Modulus,
    pub tau: Modulus,
    pub sample_count: usize,
    pub shrink_levels: Vec<ShrinkLevel>,
    /// Largest `d(x, S_f) / f(x)` over the samples, when distances were computable.
    pub empirical_ratio: Option<f64>,
    /// `empirical_ratio ≤ (1 + CONSISTENCY_SLACK)·τ`, vacuously true without a ratio.
    pub consistent: bool,
    /// A finer ball produced a smaller minimum than a coarser one containing it.
    pub nonmonotone_levels: bool,
    pub notes: Vec<String>,
}

fn gate(ratio: Option<f64>, tau: Modulus) -> bool {
    match (ratio, tau) {
        (Some(r), Modulus::Finite(t)) => r <= (1.0 + CONSISTENCY_SLACK) * t,
        _ => true,
    }
}

/// `d(0, ∂f(x))`
pub fn subdiff_distance(f: &ConvexExpr, x: &[f64]) -> Result<f64> {
    Ok(f.subdifferential(x)?.min_norm_point()?.distance)
}

fn bisect_residual(f: &ConvexExpr, a: &[f64], b: &[f64], j: usize, ra: f64) -> Vec<f64> {
    let d = sub(b, a);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..KINK_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let r = f.kink_residuals(&axpy(a, mid, &d)).expect("dimension checked")[j];
        if r == 0.0 {
            return axpy(a, mid, &d);
        }
        if (r > 0.0) == (ra > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    axpy(a, 0.5 * (lo + hi), &d)
}

/// Points on the kink surfaces of `f` crossed by consecutive sample pairs, and
/// (in dimension ≥ 2) crossings between consecutive points of one surface.
///
/// Uniform samples land on a kink with probability zero, yet ∂f is largest
/// there and `d(0, ∂f)` can drop strictly below every smooth-point value.
pub fn kink_points(f: &ConvexExpr, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = f.kink_count();
    if k == 0 || samples.len() < 2 {
        return Vec::new();
    }
    let res: Vec<Vec<f64>> = samples
        .iter()
        .map(|p| f.kink_residuals(p).expect("dimension checked"))
        .collect();
    let mut by_surface: Vec<Vec<Vec<f64>>> = vec![Vec::new(); k];
    let mut out = Vec::new();
    for i in 0..samples.len() - 1 {
        for j in 0..k {
            if res[i][j] * res[i + 1][j] < 0.0 && out.len() < MAX_KINK_POINTS {
                let p = bisect_residual(f, &samples[i], &samples[i + 1], j, res[i][j]);
                by_surface[j].push(p.clone());
                out.push(p);
            }
        }
    }
    if f.dim() >= 2 {
        for (j, pts) in by_surface.iter().enumerate() {
            for w in pts.windows(2) {
                let ra = f.kink_residuals(&w[0]).expect("dimension checked");
                let rb = f.kink_residuals(&w[1]).expect("dimension checked");
                for jj in (0..k).filter(|&jj| jj != j) {
                    if ra[jj] * rb[jj] < 0.0 && out.len() < MAX_KINK_POINTS {
                        out.push(bisect_residual(f, &w[0], &w[1], jj, ra[jj]));
                    }
                }
            }
        }
    }
    out
}

/// Local estimate on shrinking balls `B(x̄, 2^{−k})`, `k = 0..levels`.
pub fn eta_local(
    f: &ConvexExpr,
    xbar: &[f64],
    levels: usize,
    samples_per_level: usize,
    seed: u64,
) -> Result<ModulusReport> {
    eta_local_with_anchor(f, xbar, levels, samples_per_level, seed, None)
}

pub fn eta_local_with_anchor(
    f: &ConvexExpr,
    xbar: &[f64],
    levels: usize,
    samples_per_level: usize,
    seed: u64,
    anchor: Option<&Anchor>,
) -> Result<ModulusReport> {
    check_dim(f.dim(), xbar.len())?;
    let f0 = f.value(xbar);
    if f0.abs() > 1e-9 {
        return Err(Error::Precondition(format!("f(x̄) = {f0}, expected 0")));
    }
    if levels == 0 || samples_per_level == 0 {
        return Err(Error::Precondition("levels and samples per level must be positive".into()));
    }
    let mut notes = Vec::new();
    let mut shrink_levels = Vec::with_capacity(levels);
    let mut sample_count = 0;
    let mut finest_points: Vec<Vec<f64>> = Vec::new();
    let mut finest_radius = 1.0;
    for k in 0..levels {
        let radius = 0.5f64.powi(k as i32);
        let mut pts = ball_points(xbar, radius, samples_per_level, seed.wrapping_add(k as u64));
        pts.extend(kink_points(f, &pts).into_iter().filter(|p| dist(p, xbar) <= radius));
        // kink crossings that collapse onto x̄ itself would report ∂f(x̄)
        let floor = XBAR_EXCLUSION * (1.0 + norm(xbar));
        let infeasible: Vec<Vec<f64>> = pts
            .into_iter()
            .filter(|p| f.value(p) > 0.0 && dist(p, xbar) > floor)
            .collect();
        sample_count += infeasible.len();
        let mut min_distance: Option<f64> = None;
        for p in &infeasible {
            let d = subdiff_distance(f, p)?;
            min_distance = Some(min_distance.map_or(d, |m| m.min(d)));
        }
        let count = infeasible.len();
        if count > 0 {
            finest_points = infeasible;
            finest_radius = radius;
        }
        shrink_levels.push(ShrinkLevel {
            radius,
            min_distance,
            count,
        });
    }

    let nonmonotone_levels = shrink_levels.windows(2).any(|w| match (w[0].min_distance, w[1].min_distance) {
        (Some(coarse), Some(fine)) => fine < coarse - 1e-9,
        _ => false,
    });
    if nonmonotone_levels {
        notes.push("a finer level undercut a coarser one; coarse levels are undersampled".into());
    }

    let last_two_empty = shrink_levels.iter().rev().take(2).all(|l| l.min_distance.is_none());
    let eta = if last_two_empty {
        notes.push("no point with f > 0 near x̄ on the finest levels; the local bound holds with τ = 0".into());
        Modulus::Infinite
    } else {
        let v = shrink_levels.iter().rev().find_map(|l| l.min_distance).expect("nonempty level");
        Modulus::Finite(v)
    };
    let tau = eta.reciprocal();

    let anchor = match anchor {
        Some(a) => Some(a.clone()),
        None => {
            let search = BoxDomain::around(xbar, 2.0)?;
            match locate_anchor(f, None, Some(xbar), &search, seed) {
                Ok(a) => Some(a),
                Err(e) => {
                    notes.push(format!("empirical ratio skipped: {e}"));
                    None
                }
            }
        }
    };
    let mut empirical_ratio = None;
    if let (Some(anchor), Modulus::Finite(_)) = (&anchor, eta) {
        let mut best = 0.0f64;
        for p in finest_points.iter().filter(|p| dist(p, xbar) <= 0.5 * finest_radius) {
            let d = distance_from_anchor(f, p, anchor)?.upper;
            best = best.max(d / f.value(p));
        }
        empirical_ratio = Some(best);
    }
    let consistent = gate(empirical_ratio, tau);
    Ok(ModulusReport {
        scope: ModulusScope::Local { point: xbar.to_vec() },
        eta,
        tau,
        sample_count,
        shrink_levels,
        empirical_ratio,
        consistent,
        nonmonotone_levels,
        notes,
    })
}

/// Global estimate over the sampled box (the infimum over ℝ^m is truncated to it).
pub fn eta_global(f: &ConvexExpr, b: &BoxDomain, n: usize, seed: u64) -> Result<ModulusReport> {
    eta_global_with_anchor(f, b, n, seed, None)
}

pub fn eta_global_with_anchor(
    f: &ConvexExpr,
    b: &BoxDomain,
    n: usize,
    seed: u64,
    anchor: Option<&Anchor>,
) -> Result<ModulusReport> {
    check_dim(f.dim(), b.dim())?;
    if n == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let mut notes = vec!["estimate is relative to the sampled box".to_string()];
    let base = box_points(b, n, seed);
    let mut pts = base.clone();
    pts.extend(kink_points(f, &base).into_iter().filter(|p| b.contains(p)));
    let infeasible: Vec<&Vec<f64>> = pts.iter().filter(|p| f.value(p) > 0.0).collect();

    let mut eta_value = f64::INFINITY;
    for p in &infeasible {
        eta_value = eta_value.min(subdiff_distance(f, p)?);
    }
    let eta = if infeasible.is_empty() {
        notes.push("no point with f > 0 in the box; η is vacuous".into());
        Modulus::Infinite
    } else {
        Modulus::Finite(eta_value)
    };
    let tau = eta.reciprocal();

    let anchor = match anchor {
        Some(a) => Some(a.clone()),
        None if infeasible.is_empty() => None,
        None => match locate_anchor(f, None, None, b, seed) {
            Ok(a) => Some(a),
            Err(e) => {
                notes.push(format!("empirical ratio skipped: {e}"));
                None
            }
        },
    };
    let mut empirical_ratio = None;
    if let Some(anchor) = &anchor {
        let mut best = 0.0f64;
        for p in &infeasible {
            let d = distance_from_anchor(f, p, anchor)?.upper;
            best = best.max(d / f.value(p));
        }
        empirical_ratio = Some(best);
    }
    let consistent = gate(empirical_ratio, tau);
    Ok(ModulusReport {
        scope: ModulusScope::Global {
            lo: b.lo.clone(),
            hi: b.hi.clone(),
        },
        eta,
        tau,
        sample_count: infeasible.len(),
        shrink_levels: Vec::new(),
        empirical_ratio,
        consistent,
        nonmonotone_levels: false,
        notes,
    })
}
