//! Report envelope and the human, JSON and CSV emitters.

use std::fmt::Write as _;

use errbound::moduli::stability::Witness;
use errbound::{Modulus, ModulusReport, StabilityVerdict};
use serde::{Deserialize, Serialize};

use crate::analyze::{GlobalAnalysis, LocalAnalysis};
use crate::scenario::ScenarioReport;
use crate::sweep::SweepResult;

pub const SCHEMA: &str = "eb-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Human,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Results {
    Local(LocalAnalysis),
    Global(GlobalAnalysis),
    Sweep(SweepResult),
    Reproduce { scenarios: Vec<ScenarioReport> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub problem: String,
    pub command: String,
    pub seed: u64,
    pub results: Results,
}

impl Report {
    pub fn new(problem: impl Into<String>, command: impl Into<String>, seed: u64, results: Results) -> Self {
        Self {
            schema: SCHEMA.into(),
            problem: problem.into(),
            command: command.into(),
            seed,
            results,
        }
    }
}

pub fn emit_report(r: &Report, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("reports serialize");
            s.push('\n');
            s
        }
        Format::Human => human(r),
        Format::Csv => csv_text(r),
    }
}

fn modulus(m: Modulus) -> String {
    match m {
        Modulus::Finite(v) => format!("{v:.6e}"),
        Modulus::Infinite => "inf".into(),
    }
}

fn vec_text(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("({})", parts.join(", "))
}

fn modulus_lines(out: &mut String, m: &ModulusReport) {
    let _ = writeln!(out, "  eta = {}, tau = {}  ({} samples)", modulus(m.eta), modulus(m.tau), m.sample_count);
    if let Some(r) = m.empirical_ratio {
        let _ = writeln!(out, "  largest sampled d(x,S)/f(x) = {r:.6e}  consistent: {}", m.consistent);
    }
    if m.nonmonotone_levels {
        let _ = writeln!(out, "  warning: nonmonotone shrink levels");
    }
    for n in &m.notes {
        let _ = writeln!(out, "  note: {n}");
    }
}

fn verdict_lines(out: &mut String, v: &StabilityVerdict) {
    let _ = writeln!(out, "  verdict: {:?}", v.verdict);
    for w in &v.witnesses {
        match w {
            Witness::Perturbation { direction, anchor } => {
                let _ = writeln!(out, "  witness: perturb along {} at {}", vec_text(direction), vec_text(anchor));
            }
            Witness::QcPair { z, x, ratio, beta_z } => {
                let _ = writeln!(out, "  witness: z = {}, x = {}, slope {ratio:.3e}, beta(z) = {beta_z:.3e}", vec_text(z), vec_text(x));
            }
        }
    }
    for n in &v.notes {
        let _ = writeln!(out, "  note: {n}");
    }
}

fn human(r: &Report) -> String {
    let mut out = format!("{} on {} (seed {})\n", r.command, r.problem, r.seed);
    match &r.results {
        Results::Local(a) => {
            let _ = writeln!(out, "  point {}", vec_text(&a.point));
            let _ = writeln!(out, "  beta = {} along {}  (origin {:?})", a.beta.beta, vec_text(&a.beta.witness), a.origin.tag);
            modulus_lines(&mut out, &a.modulus);
            verdict_lines(&mut out, &a.verdict);
        }
        Results::Global(a) => {
            let _ = writeln!(out, "  box {} .. {}, tau = {}", vec_text(&a.domain.lo), vec_text(&a.domain.hi), a.tau);
            modulus_lines(&mut out, &a.modulus);
            let _ = writeln!(
                out,
                "  inf |beta| on boundary = {:.6e} at {}  (> tau: {})",
                a.boundary.inf_abs_beta,
                vec_text(&a.boundary.worst_point),
                a.boundary.holds
            );
            verdict_lines(&mut out, &a.verdict);
        }
        Results::Sweep(s) => {
            let _ = writeln!(out, "  point {}", vec_text(&s.point));
            for row in &s.rows {
                let _ = writeln!(
                    out,
                    "  eps {:<8} u* {:<16} beta {:.6} -> {:.6}  tau_local {}  tau_global {}  {:?}",
                    row.epsilon,
                    vec_text(&row.u_star),
                    row.beta_before,
                    row.beta_after,
                    modulus(row.tau_local),
                    row.tau_global.map_or("-".into(), modulus),
                    row.verdict
                );
            }
        }
        Results::Reproduce { scenarios } => {
            for s in scenarios {
                let _ = writeln!(out, "{} {}", if s.passed { "PASS" } else { "FAIL" }, s.scenario);
                for c in &s.checks {
                    let _ = writeln!(
                        out,
                        "  [{}] {}: {} (expected {})",
                        if c.passed { "ok" } else { "FAIL" },
                        c.name,
                        c.observed,
                        c.expected
                    );
                }
                for n in &s.notes {
                    let _ = writeln!(out, "  note: {n}");
                }
            }
        }
    }
    out
}

fn csv_text(r: &Report) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    let res = match &r.results {
        Results::Local(a) => {
            let _ = w.write_record(["radius", "min_distance", "count"]);
            a.modulus
                .shrink_levels
                .iter()
                .try_for_each(|l| w.write_record([l.radius.to_string(), opt(l.min_distance), l.count.to_string()]))
        }
        Results::Global(a) => {
            let _ = w.write_record(["z", "x", "ratio", "beta_z"]);
            a.verdict.witnesses.iter().try_for_each(|wt| match wt {
                Witness::QcPair { z, x, ratio, beta_z } => {
                    w.write_record([vec_text(z), vec_text(x), ratio.to_string(), beta_z.to_string()])
                }
                Witness::Perturbation { .. } => Ok(()),
            })
        }
        Results::Sweep(s) => {
            let _ = w.write_record(["epsilon", "u_star", "beta_before", "beta_after", "tau_local", "tau_global", "verdict"]);
            s.rows.iter().try_for_each(|row| {
                let tau = |m: Modulus| match m {
                    Modulus::Finite(v) => v.to_string(),
                    Modulus::Infinite => "inf".into(),
                };
                w.write_record([
                    row.epsilon.to_string(),
                    vec_text(&row.u_star),
                    row.beta_before.to_string(),
                    row.beta_after.to_string(),
                    tau(row.tau_local),
                    row.tau_global.map_or(String::new(), tau),
                    format!("{:?}", row.verdict),
                ])
            })
        }
        Results::Reproduce { scenarios } => {
            let _ = w.write_record(["scenario", "check", "observed", "expected", "passed"]);
            scenarios.iter().try_for_each(|s| {
                s.checks.iter().try_for_each(|c| {
                    w.write_record([
                        s.scenario.name().to_string(),
                        c.name.clone(),
                        c.observed.to_string(),
                        c.expected.clone(),
                        c.passed.to_string(),
                    ])
                })
            })
        }
    };
    res.expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv is utf-8")
}
