//! Semi-infinite systems `{f_i(x) ≤ 0 : i ∈ I}` with `I` finite or a closed interval.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::expr::ConvexExpr;
use crate::geometry::SubdiffSet;
use crate::moduli::boundary::boundary_sample;
use crate::moduli::stability::{classify_global_stability, classify_local_stability, StabilityVerdict};
use crate::sampling::BoxDomain;
use crate::sphere::{beta_from_subdiff, BetaCertificate};
use crate::vecops::{dot, norm};

/// System-level active tolerance `1e−8·(1 + |f(x)|)`.
pub fn system_active_tol(value: f64) -> f64 {
    1e-8 * (1.0 + value.abs())
}

/// Basis functions of a parameter-dependent coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Basis {
    /// `t^k`
    Pow(u32),
    /// `cos(ω t)`
    Cos(f64),
    /// `sin(ω t)`
    Sin(f64),
}

impl Basis {
    fn eval(self, t: f64) -> f64 {
        match self {
            Basis::Pow(k) => t.powi(k as i32),
            Basis::Cos(w) => (w * t).cos(),
            Basis::Sin(w) => (w * t).sin(),
        }
    }

    /// Bound on `|d/dt|` over `[a, b]`.
    fn slope_bound(self, a: f64, b: f64) -> f64 {
        match self {
            Basis::Pow(0) => 0.0,
            Basis::Pow(k) => k as f64 * a.abs().max(b.abs()).powi(k as i32 - 1),
            Basis::Cos(w) | Basis::Sin(w) => w.abs(),
        }
    }

    /// Enclosure of the range over `[a, b]`.
    fn range(self, a: f64, b: f64) -> (f64, f64) {
        match self {
            Basis::Pow(0) => (1.0, 1.0),
            Basis::Pow(k) => {
                let (pa, pb) = (a.powi(k as i32), b.powi(k as i32));
                let lo = if k % 2 == 0 && a < 0.0 && b > 0.0 { 0.0 } else { pa.min(pb) };
                (lo, pa.max(pb))
            }
            Basis::Cos(_) | Basis::Sin(_) => (-1.0, 1.0),
        }
    }
}

/// `c(t) = Σ amplitude·basis(t)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Coefficient {
    pub terms: Vec<(f64, Basis)>,
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Self {
            terms: vec![(c, Basis::Pow(0))],
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|(c, b)| c * b.eval(t)).sum()
    }

    pub fn slope_bound(&self, a: f64, b: f64) -> f64 {
        self.terms.iter().map(|(c, bs)| c.abs() * bs.slope_bound(a, b)).sum()
    }

    fn lower_bound(&self, a: f64, b: f64) -> f64 {
        self.terms
            .iter()
            .map(|(c, bs)| {
                let (lo, hi) = bs.range(a, b);
                (c * lo).min(c * hi)
            })
            .sum()
    }
}

/// `f_t(x) = Σ_k w_k(t)·g_k(x) + ⟨a(t), x⟩ + b(t)` for `t ∈ [lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTemplate {
    dim: usize,
    atoms: Vec<(Coefficient, ConvexExpr)>,
    linear: Vec<Coefficient>,
    constant: Coefficient,
}

impl ParamTemplate {
    pub fn new(
        dim: usize,
        atoms: Vec<(Coefficient, ConvexExpr)>,
        linear: Vec<Coefficient>,
        constant: Coefficient,
    ) -> Result<Self> {
        check_dim(dim, linear.len())?;
        for (_, g) in &atoms {
            check_dim(dim, g.dim())?;
        }
        Ok(Self {
            dim,
            atoms,
            linear,
            constant,
        })
    }

    pub fn atoms(&self) -> &[(Coefficient, ConvexExpr)] {
        &self.atoms
    }

    pub fn linear(&self) -> &[Coefficient] {
        &self.linear
    }

    pub fn constant(&self) -> &Coefficient {
        &self.constant
    }

    fn check_weights(&self, a: f64, b: f64) -> Result<()> {
        for (w, _) in &self.atoms {
            if w.lower_bound(a, b) < 0.0 {
                return Err(Error::InvalidExpr(
                    "template weight may be negative on the parameter interval".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn instantiate(&self, t: f64) -> Result<ConvexExpr> {
        let mut terms: Vec<(f64, ConvexExpr)> = self
            .atoms
            .iter()
            .map(|(w, g)| (w.eval(t).max(0.0), g.clone()))
            .collect();
        let a: Vec<f64> = self.linear.iter().map(|c| c.eval(t)).collect();
        terms.push((1.0, ConvexExpr::affine(a, self.constant.eval(t))?));
        ConvexExpr::sum(terms)
    }

    /// Bound on `|∂f_t(x)/∂t|` over `[lo, hi]`.
    pub fn param_lipschitz(&self, x: &[f64], lo: f64, hi: f64) -> f64 {
        let atoms: f64 = self
            .atoms
            .iter()
            .map(|(w, g)| w.slope_bound(lo, hi) * g.value(x).abs())
            .sum();
        let lin: f64 = self
            .linear
            .iter()
            .zip(x)
            .map(|(c, xi)| c.slope_bound(lo, hi) * xi.abs())
            .sum();
        atoms + lin + self.constant.slope_bound(lo, hi)
    }

    fn perturbed(&self, shift: &[f64], offset: f64) -> Self {
        let mut out = self.clone();
        for (c, s) in out.linear.iter_mut().zip(shift) {
            c.terms.push((*s, Basis::Pow(0)));
        }
        out.constant.terms.push((offset, Basis::Pow(0)));
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum IndexSet {
    Finite(Vec<String>),
    Interval { lo: f64, hi: f64, grid_count: usize },
}

/// A member index: position in a finite list, or a parameter value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Index {
    Label(usize),
    Param(f64),
}

#[derive(Debug, Clone, PartialEq)]
enum Members {
    Finite(Vec<ConvexExpr>),
    Template(ParamTemplate),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedFamily {
    dim: usize,
    index_set: IndexSet,
    members: Members,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSet {
    pub indices: Vec<Index>,
    pub tolerance: f64,
    pub sup_value: f64,
}

impl IndexedFamily {
    /// Finite family labelled `1, 2, …`.
    pub fn finite(members: Vec<ConvexExpr>) -> Result<Self> {
        let labels = (1..=members.len()).map(|i| i.to_string()).collect();
        Self::finite_labelled(members, labels)
    }

    pub fn finite_labelled(members: Vec<ConvexExpr>, labels: Vec<String>) -> Result<Self> {
        let dim = members
            .first()
            .ok_or_else(|| Error::InvalidExpr("family needs at least one member".into()))?
            .dim();
        for m in &members {
            check_dim(dim, m.dim())?;
        }
        if labels.len() != members.len() {
            return Err(Error::InvalidExpr("one label per member required".into()));
        }
        Ok(Self {
            dim,
            index_set: IndexSet::Finite(labels),
            members: Members::Finite(members),
        })
    }

    pub fn interval(lo: f64, hi: f64, grid_count: usize, template: ParamTemplate) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidExpr(format!("interval [{lo}, {hi}] must be finite and nondegenerate")));
        }
        if grid_count < 2 {
            return Err(Error::InvalidExpr("interval families need grid_count ≥ 2".into()));
        }
        template.check_weights(lo, hi)?;
        Ok(Self {
            dim: template.dim,
            index_set: IndexSet::Interval { lo, hi, grid_count },
            members: Members::Template(template),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn finite_members(&self) -> Option<&[ConvexExpr]> {
        match &self.members {
            Members::Finite(m) => Some(m),
            Members::Template(_) => None,
        }
    }

    pub fn template(&self) -> Option<&ParamTemplate> {
        match &self.members {
            Members::Template(t) => Some(t),
            Members::Finite(_) => None,
        }
    }

    pub fn label(&self, i: Index) -> String {
        match (i, &self.index_set) {
            (Index::Label(k), IndexSet::Finite(labels)) => labels.get(k).cloned().unwrap_or_else(|| k.to_string()),
            (Index::Label(k), _) => k.to_string(),
            (Index::Param(t), _) => format!("t={t}"),
        }
    }

    pub fn member(&self, i: Index) -> Result<ConvexExpr> {
        match (&self.members, i) {
            (Members::Finite(m), Index::Label(k)) => m
                .get(k)
                .cloned()
                .ok_or_else(|| Error::Precondition(format!("member {k} out of range"))),
            (Members::Template(t), Index::Param(p)) => t.instantiate(p),
            _ => Err(Error::Precondition("index kind does not match the index set".into())),
        }
    }

    fn grid(&self) -> Vec<f64> {
        match self.index_set {
            IndexSet::Interval { lo, hi, grid_count } => (0..grid_count)
                .map(|j| lo + (hi - lo) * j as f64 / (grid_count - 1) as f64)
                .collect(),
            IndexSet::Finite(_) => Vec::new(),
        }
    }

    fn template_value(t: &ParamTemplate, p: f64, x: &[f64]) -> f64 {
        let atoms: f64 = t.atoms.iter().map(|(w, g)| w.eval(p).max(0.0) * g.value(x)).sum();
        let lin: f64 = t.linear.iter().zip(x).map(|(c, xi)| c.eval(p) * xi).sum();
        atoms + lin + t.constant.eval(p)
    }

    /// Member values at the grid and the refined maximizer.
    fn scan(&self, x: &[f64]) -> Vec<(Index, f64)> {
        match &self.members {
            Members::Finite(m) => m
                .iter()
                .enumerate()
                .map(|(k, e)| (Index::Label(k), e.value(x)))
                .collect(),
            Members::Template(t) => {
                let grid = self.grid();
                let mut out: Vec<(Index, f64)> = grid
                    .iter()
                    .map(|&p| (Index::Param(p), Self::template_value(t, p, x)))
                    .collect();
                let (jbest, _) = out
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
                    .expect("nonempty grid");
                let a = grid[jbest.saturating_sub(1)];
                let b = grid[(jbest + 1).min(grid.len() - 1)];
                let p = golden_max(|p| Self::template_value(t, p, x), a, b);
                out.push((Index::Param(p), Self::template_value(t, p, x)));
                out
            }
        }
    }

    pub fn sup_value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.scan(x).iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn active_set(&self, x: &[f64], tol: f64) -> Result<ActiveSet> {
        check_dim(self.dim, x.len())?;
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("active tolerance {tol} must be positive")));
        }
        let scan = self.scan(x);
        let sup_value = scan.iter().map(|(_, v)| *v).fold(f64::NEG_INFINITY, f64::max);
        let indices = scan
            .into_iter()
            .filter(|(_, v)| *v >= sup_value - tol)
            .map(|(i, _)| i)
            .collect();
        Ok(ActiveSet {
            indices,
            tolerance: tol,
            sup_value,
        })
    }

    /// Active set with the default system tolerance.
    pub fn default_active_set(&self, x: &[f64]) -> Result<ActiveSet> {
        let v = self.sup_value(x)?;
        self.active_set(x, system_active_tol(v))
    }

    /// `f′(x, h) = max over active members of f_i′(x, h)`.
    pub fn dd_max_formula(&self, x: &[f64], h: &[f64]) -> Result<f64> {
        check_dim(self.dim, h.len())?;
        let act = self.default_active_set(x)?;
        let mut best = f64::NEG_INFINITY;
        for i in act.indices {
            best = best.max(self.member(i)?.dd(x, h));
        }
        Ok(best)
    }

    /// `co ⋃ ∂f_i(x)` over active members.
    pub fn system_subdifferential(&self, x: &[f64]) -> Result<SubdiffSet> {
        let act = self.default_active_set(x)?;
        let parts = act
            .indices
            .into_iter()
            .map(|i| self.member(i)?.subdifferential(x))
            .collect::<Result<Vec<_>>>()?;
        SubdiffSet::hull_of_union(parts)
    }

    pub fn beta(&self, x: &[f64]) -> Result<BetaCertificate> {
        let set = self.system_subdifferential(x)?;
        beta_from_subdiff(&set, |h| self.dd_max_formula(x, h).unwrap_or(f64::NAN))
    }

    /// The sup function as a single expression. Exact for finite families;
    /// interval families are discretized at the grid.
    pub fn materialize(&self) -> Result<ConvexExpr> {
        match &self.members {
            Members::Finite(m) if m.len() == 1 => Ok(m[0].clone()),
            Members::Finite(m) => ConvexExpr::max(m.clone()),
            Members::Template(t) => ConvexExpr::max(
                self.grid()
                    .into_iter()
                    .map(|p| t.instantiate(p))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }

    /// Every member gets the same `ε⟨u, · − anchor⟩`.
    pub fn perturb_system(&self, u: &[f64], eps: f64, anchor: &[f64]) -> Result<PerturbedFamily> {
        check_dim(self.dim, u.len())?;
        check_dim(self.dim, anchor.len())?;
        if norm(u) > 1.0 + 1e-12 {
            return Err(Error::Precondition(format!("‖u*‖ = {} exceeds 1", norm(u))));
        }
        if !(eps >= 0.0) {
            return Err(Error::Precondition(format!("ε = {eps} must be nonnegative")));
        }
        let family = if eps == 0.0 {
            self.clone()
        } else {
            let members = match &self.members {
                Members::Finite(m) => Members::Finite(
                    m.iter()
                        .map(|e| e.linear_perturbation(u, eps, anchor))
                        .collect::<Result<Vec<_>>>()?,
                ),
                Members::Template(t) => {
                    let shift: Vec<f64> = u.iter().map(|v| eps * v).collect();
                    Members::Template(t.perturbed(&shift, -eps * dot(u, anchor)))
                }
            };
            Self {
                dim: self.dim,
                index_set: self.index_set.clone(),
                members,
            }
        };
        Ok(PerturbedFamily {
            family,
            u: u.to_vec(),
            eps,
            anchor: anchor.to_vec(),
        })
    }
}

fn golden_max(phi: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (phi(c), phi(d));
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = phi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = phi(d);
        }
    }
    if fc >= fd {
        c
    } else {
        d
    }
}

/// A family produced by [`IndexedFamily::perturb_system`], with its perturbation data.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedFamily {
    pub family: IndexedFamily,
    pub u: Vec<f64>,
    pub eps: f64,
    pub anchor: Vec<f64>,
}

impl PerturbedFamily {
    /// `sup_i Lip(f_i − g_i)`: every difference is the same linear map `−ε⟨u, ·⟩`.
    pub fn lipschitz_gap(&self) -> f64 {
        self.eps * norm(&self.u)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inclusion {
    /// `I_g(x̄) ⊆ I_f(x̄)`, required when β < 0.
    GInF,
    /// `I_f(x̄) ⊆ I_g(x̄)`, required when β > 0.
    FInG,
}

impl fmt::Display for Inclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Inclusion::GInF => write!(f, "I_g ⊆ I_f"),
            Inclusion::FInG => write!(f, "I_f ⊆ I_g"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "side", rename_all = "snake_case")]
pub enum HypothesisStatus {
    Ok,
    Violated(Inclusion),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub beta: f64,
    pub required: Option<Inclusion>,
    pub status: HypothesisStatus,
    pub active_f: Vec<String>,
    pub active_g: Vec<String>,
}

fn same_index(a: Index, b: Index, spacing: f64) -> bool {
    match (a, b) {
        (Index::Label(x), Index::Label(y)) => x == y,
        (Index::Param(x), Index::Param(y)) => (x - y).abs() <= spacing,
        _ => false,
    }
}

fn included(sub: &ActiveSet, sup: &ActiveSet, spacing: f64) -> bool {
    sub.indices
        .iter()
        .all(|i| sup.indices.iter().any(|j| same_index(*i, *j, spacing)))
}

/// Active-set inclusion demanded by the sign of β(f, x).
pub fn check_active_set_hypotheses(f: &IndexedFamily, g: &IndexedFamily, x: &[f64]) -> Result<HypothesisCheck> {
    let same = match (&f.index_set, &g.index_set) {
        (IndexSet::Finite(a), IndexSet::Finite(b)) => a.len() == b.len(),
        (a, b) => a == b,
    };
    if !same || f.dim != g.dim {
        return Err(Error::Precondition("families must share the index set and dimension".into()));
    }
    let spacing = match f.index_set {
        IndexSet::Interval { lo, hi, grid_count } => (hi - lo) / (grid_count - 1) as f64,
        IndexSet::Finite(_) => 0.0,
    };
    let beta = f.beta(x)?.beta;
    let i_f = f.default_active_set(x)?;
    let i_g = g.default_active_set(x)?;
    let required = if beta < 0.0 {
        Some(Inclusion::GInF)
    } else if beta > 0.0 {
        Some(Inclusion::FInG)
    } else {
        None
    };
    let status = match required {
        Some(Inclusion::GInF) if !included(&i_g, &i_f, spacing) => HypothesisStatus::Violated(Inclusion::GInF),
        Some(Inclusion::FInG) if !included(&i_f, &i_g, spacing) => HypothesisStatus::Violated(Inclusion::FInG),
        _ => HypothesisStatus::Ok,
    };
    Ok(HypothesisCheck {
        beta,
        required,
        status,
        active_f: i_f.indices.iter().map(|i| f.label(*i)).collect(),
        active_g: i_g.indices.iter().map(|i| g.label(*i)).collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SystemScope {
    Local(Vec<f64>),
    Global { tau: f64, domain: BoxDomain },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestedPoint {
    pub point: Vec<f64>,
    pub active: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemVerdict {
    pub verdict: StabilityVerdict,
    pub active_sets: Vec<TestedPoint>,
}

/// Stability of the sup function, with active-set data at the tested points.
pub fn classify_system_stability(f: &IndexedFamily, scope: &SystemScope, n: usize, seed: u64) -> Result<SystemVerdict> {
    let sup = f.materialize()?;
    let tested = |p: &[f64]| -> Result<TestedPoint> {
        let act = f.default_active_set(p)?;
        Ok(TestedPoint {
            point: p.to_vec(),
            active: act.indices.iter().map(|i| f.label(*i)).collect(),
        })
    };
    match scope {
        SystemScope::Local(xbar) => {
            let verdict = classify_local_stability(&sup, xbar)?;
            Ok(SystemVerdict {
                verdict,
                active_sets: vec![tested(xbar)?],
            })
        }
        SystemScope::Global { tau, domain } => {
            let verdict = classify_global_stability(&sup, *tau, domain, n, seed)?;
            let sample = boundary_sample(&sup, domain, n, seed)?;
            let active_sets = sample
                .points
                .iter()
                .take(8)
                .map(|p| tested(p))
                .collect::<Result<Vec<_>>>()?;
            Ok(SystemVerdict { verdict, active_sets })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use crate::moduli::Verdict;

    fn rem12a() -> IndexedFamily {
        IndexedFamily::finite(vec![ConvexExpr::abs(2, 0).unwrap(), ConvexExpr::abs(2, 1).unwrap()]).unwrap()
    }

    fn rem12b() -> IndexedFamily {
        let f2 = ConvexExpr::sum(vec![
            (1.0, ConvexExpr::affine(vec![-1.0, 0.0], -1.0).unwrap()),
            (1.0, ConvexExpr::abs(2, 1).unwrap()),
        ])
        .unwrap();
        IndexedFamily::finite(vec![ConvexExpr::affine(vec![1.0, 0.0], 0.0).unwrap(), f2]).unwrap()
    }

    #[test]
    fn sup_and_active_examples() {
        assert_eq!(rem12a().sup_value(&[3.0, -4.0]).unwrap(), 4.0);
        assert_eq!(rem12b().sup_value(&[0.0, 0.0]).unwrap(), 0.0);
        let a = rem12a().active_set(&[0.0, 0.0], 1e-8).unwrap();
        assert_eq!(a.indices, vec![Index::Label(0), Index::Label(1)]);
        let a = rem12b().active_set(&[0.0, 0.0], 1e-8).unwrap();
        assert_eq!(a.indices, vec![Index::Label(0)]);
        let a = rem12a().active_set(&[1.0, 0.5], 1e-8).unwrap();
        assert_eq!(a.indices, vec![Index::Label(0)]);
    }

    #[test]
    fn max_formula_examples() {
        let h = [std::f64::consts::FRAC_1_SQRT_2; 2];
        assert_abs_diff_eq!(rem12a().dd_max_formula(&[0.0, 0.0], &h).unwrap(), h[0], epsilon = 1e-15);
        assert_eq!(rem12b().dd_max_formula(&[0.0, 0.0], &[-1.0, 0.0]).unwrap(), -1.0);
    }

    #[test]
    fn subdifferential_examples() {
        let s = rem12a().system_subdifferential(&[0.0, 0.0]).unwrap();
        assert_eq!(s.generators().len(), 4);
        let s = rem12b().system_subdifferential(&[0.0, 0.0]).unwrap();
        assert_eq!(s.generators(), &[vec![1.0, 0.0]]);
    }

    #[test]
    fn perturbation_commutes_with_sup() {
        let f = rem12a();
        let p = f.perturb_system(&[0.0, 1.0], 0.1, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(p.family.sup_value(&[0.0, 0.5]).unwrap(), 0.5 + 0.05, epsilon = 1e-15);
        assert_eq!(f.perturb_system(&[0.0, 1.0], 0.0, &[0.0, 0.0]).unwrap().family, f);
        assert_abs_diff_eq!(p.lipschitz_gap(), 0.1, epsilon = 1e-15);
        let ok = check_active_set_hypotheses(&f, &p.family, &[0.0, 0.0]).unwrap();
        assert_eq!(ok.status, HypothesisStatus::Ok);
    }

    #[test]
    fn rem12_violations() {
        let eps = 0.1;
        let g = IndexedFamily::finite(vec![
            ConvexExpr::sum(vec![(1.0, ConvexExpr::abs(2, 0).unwrap()), (eps, ConvexExpr::abs(2, 1).unwrap())]).unwrap(),
            ConvexExpr::sum(vec![(1.0, ConvexExpr::abs(2, 1).unwrap()), (1.0, ConvexExpr::constant(2, -eps).unwrap())])
                .unwrap(),
        ])
        .unwrap();
        let c = check_active_set_hypotheses(&rem12a(), &g, &[0.0, 0.0]).unwrap();
        assert_eq!(c.status, HypothesisStatus::Violated(Inclusion::FInG));
        assert_eq!(c.active_g, vec!["1"]);

        let g = IndexedFamily::finite(vec![
            ConvexExpr::sum(vec![
                (1.0, ConvexExpr::affine(vec![1.0, 0.0], 0.0).unwrap()),
                (eps, ConvexExpr::abs(2, 1).unwrap()),
            ])
            .unwrap(),
            ConvexExpr::sum(vec![
                (1.0, ConvexExpr::affine(vec![-1.0, 0.0], 0.0).unwrap()),
                (eps, ConvexExpr::abs(2, 1).unwrap()),
            ])
            .unwrap(),
        ])
        .unwrap();
        let c = check_active_set_hypotheses(&rem12b(), &g, &[0.0, 0.0]).unwrap();
        assert_eq!(c.beta, -1.0);
        assert_eq!(c.status, HypothesisStatus::Violated(Inclusion::GInF));
        assert_eq!(c.active_g, vec!["1", "2"]);
    }

    #[test]
    fn system_stability_examples() {
        let local = SystemScope::Local(vec![0.0, 0.0]);
        assert_eq!(classify_system_stability(&rem12a(), &local, 0, 0).unwrap().verdict.verdict, Verdict::Stable);
        assert_eq!(classify_system_stability(&rem12b(), &local, 0, 0).unwrap().verdict.verdict, Verdict::Stable);
        let f = IndexedFamily::finite(vec![ConvexExpr::pos_part_square(1, 0).unwrap()]).unwrap();
        let v = classify_system_stability(&f, &SystemScope::Local(vec![0.0]), 0, 0).unwrap();
        assert_eq!(v.verdict.verdict, Verdict::Unstable);
    }

    fn circle_template() -> ParamTemplate {
        // f_t(x) = cos(t) x₁ + sin(t) x₂ − 1 for t ∈ [0, 2π]: the unit disc
        ParamTemplate::new(
            2,
            vec![],
            vec![
                Coefficient { terms: vec![(1.0, Basis::Cos(1.0))] },
                Coefficient { terms: vec![(1.0, Basis::Sin(1.0))] },
            ],
            Coefficient::constant(-1.0),
        )
        .unwrap()
    }

    #[test]
    fn interval_family_sup() {
        let tau = 2.0 * std::f64::consts::PI;
        let f = IndexedFamily::interval(0.0, tau, 16, circle_template()).unwrap();
        let x = [0.3, -0.4];
        assert_abs_diff_eq!(f.sup_value(&x).unwrap(), 0.5 - 1.0, epsilon = 1e-10);
        let fine = IndexedFamily::interval(0.0, tau, 32, circle_template()).unwrap();
        let spacing = tau / 15.0;
        let bound = circle_template().param_lipschitz(&x, 0.0, tau) * spacing;
        assert!((f.sup_value(&x).unwrap() - fine.sup_value(&x).unwrap()).abs() <= bound);
        let p = f.perturb_system(&[1.0, 0.0], 0.5, &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(
            p.family.sup_value(&x).unwrap(),
            f.sup_value(&x).unwrap() + 0.5 * 0.3,
            epsilon = 1e-9
        );
    }

    #[test]
    fn interval_rejects_negative_weights() {
        let t = ParamTemplate::new(
            1,
            vec![(Coefficient { terms: vec![(1.0, Basis::Sin(1.0))] }, ConvexExpr::abs(1, 0).unwrap())],
            vec![Coefficient::default()],
            Coefficient::default(),
        )
        .unwrap();
        assert!(IndexedFamily::interval(0.0, 1.0, 4, t).is_err());
    }
}
