use std::path::PathBuf;

use errbound_cli::app::{run, EXIT_PASS, EXIT_USAGE};
use errbound_cli::scenario::{scenario_problem, Scenario};
use errbound_cli::{parse_problem, Report, Results};

fn write_temp(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("errbound-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn errbound(args: &[&str]) -> (i32, String, String) {
    run(std::iter::once("errbound").chain(args.iter().copied()))
}

#[test]
fn built_in_problems_round_trip() {
    for s in Scenario::ALL {
        let Some(p) = scenario_problem(s) else { continue };
        let text = p.to_string();
        assert_eq!(parse_problem(&text).unwrap(), p, "{s:?}");
    }
}

#[test]
fn analyze_local_json() {
    let f = write_temp("exp.eb", "name exp\ndim 1\nexpr (exp1d 0 -1)\npoint [0]\n");
    let (code, out, err) = errbound(&["--format", "json", "analyze-local", f.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let r: Report = serde_json::from_str(&out).unwrap();
    let Results::Local(a) = r.results else { panic!("not a local report") };
    assert_eq!(a.beta.beta, -1.0);
    assert!((a.modulus.tau.value() - 1.0).abs() < 0.05);
}

#[test]
fn vacuous_modulus_is_inf_in_json() {
    let f = write_temp("zero.eb", "name zero\ndim 1\nexpr (const 0)\npoint [0]\n");
    let (code, out, err) = errbound(&["--format", "json", "analyze-local", f.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS, "{err}");
    assert!(out.contains("\"eta\": \"inf\""), "{out}");
}

#[test]
fn parse_errors_are_usage_errors() {
    let f = write_temp("bad.eb", "dim 1\nexpr (sum -1 (norm))\n");
    let (code, out, err) = errbound(&["analyze-local", f.to_str().unwrap(), "--at", "0"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(out.is_empty());
    assert!(err.contains("line 2, column 7"), "{err}");
}

#[test]
fn unknown_scenario_and_missing_args() {
    assert_eq!(errbound(&["reproduce", "REM99"]).0, EXIT_USAGE);
    assert_eq!(errbound(&["perturb"]).0, EXIT_USAGE);
    assert_eq!(errbound(&["--help"]).0, EXIT_PASS);
}

#[test]
fn perturb_csv_and_report_reemit() {
    let f = write_temp("sq.eb", "name sq\ndim 1\nexpr (pospartsq 0)\npoint [0]\n");
    let path = f.to_str().unwrap();
    let (code, csv, err) = errbound(&["--format", "csv", "perturb", path, "--eps", "0.1,0.01", "--dir", "1"]);
    assert_eq!(code, EXIT_PASS, "{err}");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,u_star,beta_before,beta_after,tau_local,tau_global,verdict");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0.01,"));

    let (_, json, _) = errbound(&["--format", "json", "perturb", path, "--eps", "0.1,0.01", "--dir", "1"]);
    let saved = write_temp("sq.json", &json);
    let (code, again, _) = errbound(&["--format", "csv", "report", saved.to_str().unwrap()]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(again, csv);
}

#[test]
fn global_analysis_needs_a_box() {
    let f = write_temp("nobox.eb", "dim 1\nexpr (exp1d 0 -1)\ntau 0.5\n");
    let (code, _, err) = errbound(&["analyze-global", f.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--box"), "{err}");
    let (code, out, err) = errbound(&["analyze-global", f.to_str().unwrap(), "--box", "-50..2"]);
    assert_eq!(code, EXIT_PASS, "{err}");
    assert!(out.contains("verdict: Unstable"), "{out}");
}
