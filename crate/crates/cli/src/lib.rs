//! Problem files, perturbation sweeps, scenario reproduction and reports
//! for the `errbound` command.

pub mod analyze;
pub mod app;
pub mod num;
pub mod problem;
pub mod report;
pub mod scenario;
pub mod sweep;

pub use problem::{parse_problem, Function, ParseError, ParseErrorKind, ProblemFile};
pub use report::{emit_report, Format, Report, Results};
pub use scenario::{reproduce, Scenario, ScenarioReport};
pub use sweep::{run_perturbation_sweep, SweepResult, SweepRow};
