//! Scenario registry, check orchestration and reports.

pub mod checks;
pub mod report;
pub mod scenario;

pub use checks::{judge_run, run_checks, scenario_trajectory, CheckResult, FlowRun, RunVerdict};
pub use report::{
    emit_report, parse_report, render_text, Environment, Report, ReportFormat, REPORT_SCHEMA,
};
pub use scenario::{
    builtin, load_scenario, load_scenario_with, scenario_from_json, BuiltinParams, CheckKind,
    Scenario, ScenarioDoc, BUILTINS,
};
