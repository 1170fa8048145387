use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use geolab::catalog::SubalgebraDoc;
use geolab::error::{Error, Result};
use geolab::independence::{
    flag_conditions, replay_eschenburg_steps, replay_gromoll_meyer, ReplayReport,
};
use geolab::integrals::FamilyDoc;
use geolab::lab::{
    emit_report, judge_run, load_scenario_with, run_checks, scenario_trajectory, BuiltinParams,
    FlowRun, ReportFormat, Scenario, BUILTINS,
};

#[derive(Parser)]
#[command(
    name = "geolab",
    version,
    about = "Integrable geodesic flow laboratory"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Built-in name, e.g. `eschenburg` or `berger_cp(2,0.5)`, or a JSON file.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    m: Option<i64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<Scenario> {
        let params = BuiltinParams {
            m: self.m,
            n: self.n,
            t: self.t,
        };
        let mut s = load_scenario_with(&self.scenario, &params)?;
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(dt) = self.dt {
            s.dt = dt;
        }
        if let Some(steps) = self.steps {
            s.steps = steps;
        }
        geolab::lab::scenario::validate(&s)?;
        Ok(s)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario and print the report.
    Verify {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also write the report here (format follows `--format`).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "text")]
        format: ReportFormat,
        /// Export the first flow trajectory as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Integrate one trajectory of a scenario's flow.
    Flow {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Which seeded initial state to use.
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Step-by-step reproduction of a worked example.
    Replay {
        /// `2.1`, `4.7` or `4.8`.
        #[arg(long)]
        example: String,
        #[arg(long, default_value_t = 1)]
        m: i64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in scenarios.
    List {
        #[arg(long, default_value = "text")]
        format: ReportFormat,
        /// Print the subalgebra catalog and family of one scenario as JSON.
        #[arg(long)]
        scenario: Option<String>,
    },
}

fn set_threads() -> Result<()> {
    let Ok(v) = std::env::var("GEOLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::InvalidInput(format!(
            "GEOLAB_THREADS must be a positive integer, got `{v}`"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(e.to_string()))
}

fn export_csv(run: &FlowRun, path: &Path) -> Result<()> {
    let summary = run.trajectory().export(path)?;
    eprintln!("wrote {} and {}", path.display(), summary.display());
    Ok(())
}

fn verify(
    args: &ScenarioArgs,
    out: Option<&Path>,
    format: ReportFormat,
    csv: Option<&Path>,
) -> Result<bool> {
    let s = args.load()?;
    let report = run_checks(&s);
    print!("{}", emit_report(&report, format, None)?);
    if format == ReportFormat::Json {
        println!();
    }
    if let Some(p) = out {
        emit_report(&report, format, Some(p))?;
    }
    if let Some(p) = csv {
        export_csv(&scenario_trajectory(&s, s.dt, s.steps, 0)?, p)?;
    }
    Ok(report.passed)
}

fn flow(args: &ScenarioArgs, csv: Option<&Path>, index: u64) -> Result<bool> {
    let s = args.load()?;
    let run = scenario_trajectory(&s, s.dt, s.steps, index)?;
    let v = judge_run(&s, &run);
    let d = &v.drift;
    println!("{}  {} samples to t = {}", d.name, d.samples, d.final_time);
    let width = d
        .monitors
        .iter()
        .map(|m| m.label.len())
        .max()
        .unwrap_or(0)
        .max(6);
    for m in std::iter::once(&d.energy).chain(&d.monitors) {
        println!(
            "  {:<width$}  initial {:>+.6e}  drift {:.3e}  rel {:.3e}",
            m.label, m.initial, m.max_abs, m.max_rel
        );
    }
    println!("  constraint residual {:.3e}", d.constraint_residual);
    if let FlowRun::Glued(g) = &run {
        println!(
            "  seam crossings {}, largest continuous jump {:.3e}",
            g.seams.len(),
            g.max_continuous_jump
        );
    }
    if let Some(t) = &d.truncated {
        println!("  truncated: {t}");
    }
    println!(
        "{}  worst {:.3e}  tol {:.1e}",
        if v.passed { "PASS" } else { "FAIL" },
        v.worst,
        v.tolerance
    );
    if let Some(p) = csv {
        export_csv(&run, p)?;
    }
    Ok(v.passed)
}

fn print_replay(r: &ReplayReport) {
    println!("{}", r.name);
    for step in &r.steps {
        println!("step {}: {}", step.step, step.title);
        for (label, value) in &step.differentials {
            println!("    d{label}(v) = {value:+.6e}");
        }
        for c in &step.checks {
            println!(
                "  {} {} ({:.3e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.value
            );
        }
    }
    if let Some(c) = &r.certificate {
        println!(
            "rank {} of {} (threshold {:.1e})",
            c.rank,
            c.labels.len(),
            c.threshold
        );
        let sv: Vec<String> = c
            .singular_values
            .iter()
            .map(|s| format!("{s:.6e}"))
            .collect();
        println!("singular values {}", sv.join(" "));
        println!("sigma ratio {:.3e}", c.smallest_ratio);
    }
    for n in &r.notes {
        println!("note: {n}");
    }
    println!("{}", if r.passed { "PASS" } else { "FAIL" });
}

fn replay(example: &str, m: i64, out: Option<&Path>) -> Result<bool> {
    let value = match example {
        "2.1" | "flag" | "su3_flag" => {
            let r = flag_conditions()?;
            println!(
                "{} / {}: dim {} = 2 * {} + {} + 2: {}",
                r.group, r.subgroup, r.dim_g, r.dim_k, r.index, r.dimension_identity
            );
            println!("rank of Y -> [X, Y] on {}: {}", r.subgroup, r.bracket_rank);
            println!("{}", if r.passed { "PASS" } else { "FAIL" });
            (serde_json::to_value(&r)?, r.passed)
        }
        "4.7" | "eschenburg" => {
            let r = replay_eschenburg_steps(m)?;
            print_replay(&r);
            (serde_json::to_value(&r)?, r.passed)
        }
        "4.8" | "gromoll_meyer" => {
            let r = replay_gromoll_meyer()?;
            print_replay(&r);
            (serde_json::to_value(&r)?, r.passed)
        }
        other => {
            return Err(Error::Unknown {
                kind: "example",
                name: other.to_string(),
            })
        }
    };
    if let Some(p) = out {
        std::fs::write(p, serde_json::to_string_pretty(&value.0)?)?;
    }
    Ok(value.1)
}

fn list(format: ReportFormat, scenario: Option<&str>) -> Result<bool> {
    if let Some(name) = scenario {
        let s = load_scenario_with(name, &BuiltinParams::default())?;
        let mut subalgebras = vec![SubalgebraDoc::from_subalgebra(&s.algebra)];
        subalgebras.extend(s.chain.iter().map(SubalgebraDoc::from_subalgebra));
        let doc = json!({
            "scenario": s.name,
            "anchor": s.anchor,
            "subalgebras": subalgebras,
            "family": FamilyDoc::from_family(&s.family),
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
        return Ok(true);
    }
    match format {
        ReportFormat::Json => {
            let rows: Vec<_> = BUILTINS
                .iter()
                .map(|(key, sig, anchor, desc)| json!({"name": key, "signature": sig, "anchor": anchor, "description": desc}))
                .collect();
            println!("{}", serde_json::to_string_pretty(&rows)?);
        }
        ReportFormat::Text => {
            let w = BUILTINS.iter().map(|b| b.1.len()).max().unwrap_or(0);
            let a = BUILTINS.iter().map(|b| b.2.len()).max().unwrap_or(0);
            for (_, sig, anchor, desc) in BUILTINS {
                println!("{sig:<w$}  {anchor:<a$}  {desc}");
            }
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = set_threads().and_then(|()| match &cli.command {
        Command::Verify {
            scenario,
            out,
            format,
            csv,
        } => verify(scenario, out.as_deref(), *format, csv.as_deref()),
        Command::Flow {
            scenario,
            csv,
            index,
        } => flow(scenario, csv.as_deref(), *index),
        Command::Replay { example, m, out } => replay(example, *m, out.as_deref()),
        Command::List { format, scenario } => list(*format, scenario.as_deref()),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
