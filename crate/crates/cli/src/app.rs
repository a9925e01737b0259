//! Command-line front end. [`run`] returns the exit code and stdout text so
//! tests can drive the binary in process.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use errbound::{BoxDomain, Error as CoreError};

use crate::analyze::{analyze_global, analyze_local, AnalysisOptions};
use crate::problem::{parse_problem, ProblemFile};
use crate::report::{emit_report, Format, Report, Results};
use crate::scenario::{reproduce, Scenario};
use crate::sweep::{run_perturbation_sweep, SweepOptions, Timestamps};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_SCENARIO_FAILED: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Human,
    Json,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Human => Format::Human,
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "errbound", version, about = "Error-bound moduli and their stability under linear perturbations")]
struct Cli {
    /// Seed for every randomized estimator.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Samples per shrink level (local) or in the box (global).
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Shrink levels for local estimates.
    #[arg(long, global = true, default_value_t = 8)]
    levels: usize,
    /// Tolerance for locating the origin in the subdifferential.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Human)]
    format: FormatArg,
    /// Record wall-clock start and end in sweep results.
    #[arg(long, global = true)]
    timestamps: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// β, local modulus and local stability verdict at a point.
    AnalyzeLocal {
        file: PathBuf,
        /// Point x̄ with f(x̄) = 0, e.g. `0,0`; defaults to the file's `point`.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
    },
    /// Global modulus over a box and the global stability verdict at threshold τ.
    AnalyzeGlobal {
        file: PathBuf,
        #[arg(long)]
        tau: Option<f64>,
        /// Box as `lo..hi` per axis, comma separated.
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: Option<String>,
    },
    /// Sweep g = f + ε⟨u*, · − x̄⟩ over ε and directions u*.
    Perturb {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: Option<String>,
        /// Comma-separated ε values.
        #[arg(long, allow_hyphen_values = true)]
        eps: String,
        /// Direction u*, comma separated; repeat for several.
        #[arg(long = "dir", required = true, allow_hyphen_values = true)]
        dirs: Vec<String>,
        #[arg(long = "box", allow_hyphen_values = true)]
        domain: Option<String>,
    },
    /// Run a built-in scenario, or `all`.
    Reproduce { scenario: String },
    /// Re-emit a saved JSON report in another format.
    Report { file: PathBuf },
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::NonConvergence { .. } | CoreError::UndeterminedInradius { .. } | CoreError::NoSlaterPoint => {
                EXIT_NONCONVERGENCE
            }
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn parse_vector(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let body = s.trim().trim_start_matches('[').trim_end_matches(']');
    body.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| usage(format!("bad {what} entry '{}'", t.trim())))
        })
        .collect()
}

fn parse_box(s: &str) -> Result<BoxDomain, Failure> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in s.split(',') {
        let (a, b) = part
            .trim()
            .split_once("..")
            .ok_or_else(|| usage(format!("box axis '{part}' is not lo..hi")))?;
        lo.push(a.parse::<f64>().map_err(|_| usage(format!("bad box bound '{a}'")))?);
        hi.push(b.parse::<f64>().map_err(|_| usage(format!("bad box bound '{b}'")))?);
    }
    Ok(BoxDomain::new(lo, hi)?)
}

fn load(path: &PathBuf) -> Result<ProblemFile, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_problem(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn point(p: &ProblemFile, at: &Option<String>) -> Result<Vec<f64>, Failure> {
    let x = match at {
        Some(s) => parse_vector(s, "point")?,
        None => p.point.clone().ok_or_else(|| usage("no --at given and the problem declares no point"))?,
    };
    if x.len() != p.dim {
        return Err(usage(format!("point has {} entries, problem dimension is {}", x.len(), p.dim)));
    }
    Ok(x)
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0.0, |d| d.as_secs_f64())
}

fn execute(cli: &Cli) -> Result<(Report, bool), Failure> {
    let opts = AnalysisOptions {
        levels: cli.levels,
        samples_per_level: cli.samples.unwrap_or(256),
        global_samples: cli.samples.unwrap_or(4096),
        seed: cli.seed,
        tol: cli.tol,
    };
    if !(cli.tol > 0.0) {
        return Err(usage("--tol must be positive"));
    }
    match &cli.command {
        Command::AnalyzeLocal { file, at } => {
            let p = load(file)?;
            let x = point(&p, at)?;
            let a = analyze_local(&p, &x, &opts)?;
            Ok((Report::new(&p.name, "analyze-local", cli.seed, Results::Local(a)), true))
        }
        Command::AnalyzeGlobal { file, tau, domain } => {
            let p = load(file)?;
            let tau = tau.or(p.tau).ok_or_else(|| usage("no --tau given and the problem declares none"))?;
            let domain = match domain {
                Some(s) => parse_box(s)?,
                None => p.domain.clone().ok_or_else(|| usage("no --box given and the problem declares none"))?,
            };
            let a = analyze_global(&p, tau, &domain, &opts)?;
            Ok((Report::new(&p.name, "analyze-global", cli.seed, Results::Global(a)), true))
        }
        Command::Perturb {
            file,
            at,
            eps,
            dirs,
            domain,
        } => {
            let p = load(file)?;
            let x = point(&p, at)?;
            let eps = parse_vector(eps, "eps")?;
            let dirs = dirs.iter().map(|d| parse_vector(d, "direction")).collect::<Result<Vec<_>, _>>()?;
            let domain = match domain {
                Some(s) => Some(parse_box(s)?),
                None => p.domain.clone(),
            };
            let started = now();
            let sweep_opts = SweepOptions {
                levels: opts.levels,
                samples: opts.samples_per_level,
                seed: cli.seed,
            };
            let mut s = run_perturbation_sweep(&p, &x, &dirs, &eps, domain.as_ref(), &sweep_opts)?;
            if cli.timestamps {
                s.timestamps = Some(Timestamps { started, finished: now() });
            }
            Ok((Report::new(&p.name, "perturb", cli.seed, Results::Sweep(s)), true))
        }
        Command::Reproduce { scenario } => {
            let list: Vec<Scenario> = if scenario.eq_ignore_ascii_case("all") {
                Scenario::ALL.to_vec()
            } else {
                vec![scenario.parse::<Scenario>().map_err(usage)?]
            };
            let reports = list.iter().map(|s| reproduce(*s, cli.seed)).collect::<Result<Vec<_>, _>>()?;
            let passed = reports.iter().all(|r| r.passed);
            Ok((
                Report::new(scenario.clone(), "reproduce", cli.seed, Results::Reproduce { scenarios: reports }),
                passed,
            ))
        }
        Command::Report { file } => {
            let text = std::fs::read_to_string(file).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            let r: Report = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", file.display())))?;
            if r.schema != crate::report::SCHEMA {
                return Err(usage(format!("unsupported schema '{}'", r.schema)));
            }
            let passed = match &r.results {
                Results::Reproduce { scenarios } => scenarios.iter().all(|s| s.passed),
                _ => true,
            };
            Ok((r, passed))
        }
    }
}

/// Exit code, stdout text and stderr text for the given argument list.
pub fn run<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            return if e.use_stderr() {
                (code, String::new(), text)
            } else {
                (code, text, String::new())
            };
        }
    };
    match execute(&cli) {
        Ok((report, passed)) => {
            let code = if passed { EXIT_PASS } else { EXIT_SCENARIO_FAILED };
            (code, emit_report(&report, cli.format.into()), String::new())
        }
        Err(f) => (f.code, String::new(), format!("error: {}\n", f.message)),
    }
}
