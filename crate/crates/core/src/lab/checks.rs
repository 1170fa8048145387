//! Runs the checks a scenario asks for and collects one result per check.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::exp;
use crate::error::{Error, Result};
use crate::flows::glued::{glued_flow, random_seam_crossing_state, GluedTrajectory};
use crate::flows::group::{integrate_euler_arnold, GroupState, Integrator};
use crate::flows::quotient::{
    integrate_quotient, random_horizontal_state, su2_times_sphere, QuotientKind,
};
use crate::flows::sphere::{integrate_berger_sphere, random_sphere_state, BergerState};
use crate::flows::{DriftSummary, Trajectory};
use crate::independence::{
    check_homogeneous_conditions, replay_eschenburg_steps, replay_gromoll_meyer,
};
use crate::integrals::{
    check_conjugation_invariance, check_invariance, check_involution, INVARIANCE_TOL,
    INVOLUTION_TOL,
};
use crate::lab::report::{Environment, Report, REPORT_SCHEMA};
use crate::lab::scenario::{ActionSpec, CheckKind, FlowSpec, IndependenceSpec, Scenario};
use crate::sampling::{random_element, random_unitary, rng_for_sample};

/// Points and parameter values per invariance generator.
pub const INVARIANCE_POINTS: usize = 20;
pub const INVARIANCE_PARAMS: usize = 20;
/// Smallest accepted `sigma_min / sigma_max` of a rank certificate.
pub const RATIO_TOL: f64 = 1e-6;
/// Relative drift bounds for the flow check.
pub const EXACT_FLOW_TOL: f64 = 1e-10;
pub const FLOW_TOL: f64 = 1e-8;
/// Conjugation-control members must change by more than this.
pub const CONTROL_TOL: f64 = 1e-6;
/// Seam jump the unsquared linear integral must show on some crossing.
pub const SEAM_JUMP_TOL: f64 = 1e-3;
/// Trajectories per flow check.
pub const FLOW_SAMPLES: usize = 3;
pub const GLUED_SAMPLES: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: CheckKind,
    pub passed: bool,
    /// Headline number compared against `tolerance`.
    pub measured: Option<f64>,
    pub tolerance: Option<f64>,
    pub summary: String,
    pub details: Value,
    pub error: Option<String>,
}

impl CheckResult {
    fn new(
        check: CheckKind,
        passed: bool,
        measured: f64,
        tolerance: f64,
        summary: String,
        details: Value,
    ) -> Self {
        Self {
            check,
            passed,
            measured: measured.is_finite().then_some(measured),
            tolerance: Some(tolerance),
            summary,
            details,
            error: None,
        }
    }

    fn failed(check: CheckKind, e: &Error) -> Self {
        Self {
            check,
            passed: false,
            measured: None,
            tolerance: None,
            summary: "error".into(),
            details: Value::Null,
            error: Some(e.to_string()),
        }
    }
}

/// One trajectory of a scenario's flow.
#[derive(Clone, Debug)]
pub enum FlowRun {
    Plain(Trajectory),
    Glued(GluedTrajectory),
}

impl FlowRun {
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            FlowRun::Plain(t) => t,
            FlowRun::Glued(g) => &g.trajectory,
        }
    }
}

/// Integrates the scenario's flow from the `index`-th seeded initial state.
pub fn scenario_trajectory(s: &Scenario, dt: f64, steps: usize, index: u64) -> Result<FlowRun> {
    match &s.flow {
        FlowSpec::None => Err(Error::InvalidInput(format!(
            "scenario `{}` has no flow",
            s.name
        ))),
        FlowSpec::Biquotient => {
            let ActionSpec::Biquotient(action) = &s.action else {
                return Err(Error::InvalidInput(
                    "biquotient flow without a biquotient action".into(),
                ));
            };
            let kind = QuotientKind::Biquotient {
                action: action.clone(),
                family: s.family.clone(),
            };
            let s0 = random_horizontal_state(&kind, s.seed, index);
            integrate_quotient(&kind, &s0, dt, steps).map(FlowRun::Plain)
        }
        FlowSpec::GroupTimesSphere => {
            let kind = su2_times_sphere();
            let s0 = random_horizontal_state(&kind, s.seed, index);
            integrate_quotient(&kind, &s0, dt, steps).map(FlowRun::Plain)
        }
        FlowSpec::Berger { n, t } => {
            let mut rng = rng_for_sample(s.seed, index);
            let (q, p) = random_sphere_state(2 * n + 2, &mut rng);
            integrate_berger_sphere(*n, *t, &BergerState { q, p, time: 0.0 }, dt, steps)
                .map(FlowRun::Plain)
        }
        FlowSpec::LeftInvariant { inertia } => {
            let mut rng = rng_for_sample(s.seed, index);
            let g = inertia.algebra();
            let s0 = GroupState {
                position: random_unitary(g, &mut rng),
                velocity: random_element(g, &mut rng),
                time: 0.0,
            };
            integrate_euler_arnold(inertia, &s0, dt, steps, Integrator::MidpointFourth)
                .map(FlowRun::Plain)
        }
        FlowSpec::Glued(cfg) => {
            let s0 = random_seam_crossing_state(cfg, s.seed, index)?;
            glued_flow(cfg, &s0, dt, steps).map(FlowRun::Glued)
        }
    }
}

fn invariance(s: &Scenario) -> Result<CheckResult> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    let mut passed = true;
    for (gi, g) in s.generators.iter().enumerate() {
        let mut rng = rng_for_sample(s.seed ^ 0x1a7a, gi as u64);
        let params: Vec<f64> = (0..INVARIANCE_PARAMS)
            .map(|_| rng.random::<f64>())
            .collect();
        for spec in &s.family.specs {
            let mut spec_worst = 0.0f64;
            for (k, &t) in params.iter().enumerate() {
                let two_pi_t = 2.0 * std::f64::consts::PI * t;
                let tau = (
                    exp(&g.pair.left.scale(two_pi_t)),
                    exp(&g.pair.right.scale(two_pi_t)),
                );
                let r = check_invariance(
                    spec,
                    &s.algebra,
                    &tau,
                    INVARIANCE_POINTS,
                    s.seed.wrapping_add(k as u64),
                )?;
                spec_worst = spec_worst.max(r.max_relative);
            }
            let ok = spec_worst <= INVARIANCE_TOL;
            passed &= ok;
            worst = worst.max(spec_worst);
            rows.push(json!({"generator": g.name, "spec": spec.label, "max_relative": spec_worst, "passed": ok}));
        }
    }
    let mut conj_rows = Vec::new();
    if let Some((fam, control)) = &s.conjugation {
        for spec in &fam.specs {
            let r = check_conjugation_invariance(spec, &s.algebra, INVARIANCE_POINTS, s.seed)?;
            passed &= r.passed;
            worst = worst.max(r.max_relative);
            conj_rows.push(json!({"spec": spec.label, "role": "invariant", "max_relative": r.max_relative, "passed": r.passed}));
        }
        for spec in &control.specs {
            let r = check_conjugation_invariance(spec, &s.algebra, INVARIANCE_POINTS, s.seed)?;
            let ok = r.max_relative > CONTROL_TOL;
            passed &= ok;
            conj_rows.push(json!({"spec": spec.label, "role": "control", "max_relative": r.max_relative, "passed": ok}));
        }
    }
    let summary = format!(
        "{} spec/generator pairs, {} conjugation rows, worst relative change {worst:.3e}",
        rows.len(),
        conj_rows.len()
    );
    Ok(CheckResult::new(
        CheckKind::Invariance,
        passed,
        worst,
        INVARIANCE_TOL,
        summary,
        json!({"generators": rows, "conjugation": conj_rows, "params": INVARIANCE_PARAMS, "points": INVARIANCE_POINTS}),
    ))
}

fn involution(s: &Scenario) -> Result<CheckResult> {
    let r = check_involution(&s.family, s.samples, s.seed)?;
    let arg = r
        .argmax
        .as_ref()
        .map(|(a, b)| format!(" at ({a}, {b})"))
        .unwrap_or_default();
    let summary = format!(
        "{} samples, worst scaled bracket {:.3e}{arg}",
        r.samples, r.max_relative
    );
    Ok(CheckResult::new(
        CheckKind::Involution,
        r.passed,
        r.max_relative,
        INVOLUTION_TOL,
        summary,
        serde_json::to_value(&r)?,
    ))
}

fn independence(s: &Scenario) -> Result<CheckResult> {
    let spec = s
        .independence
        .ok_or_else(|| Error::InvalidInput("no independence point".into()))?;
    let replay = match spec {
        IndependenceSpec::Eschenburg { m } => replay_eschenburg_steps(m)?,
        IndependenceSpec::GromollMeyer => replay_gromoll_meyer()?,
    };
    let cert = replay
        .certificate
        .as_ref()
        .ok_or_else(|| Error::Degenerate("replay produced no certificate".into()))?;
    let ratio = cert.smallest_ratio;
    let passed = replay.passed && cert.is_full() && ratio > RATIO_TOL;
    let mut summary = format!(
        "rank {} of {} on a {}-dimensional tangent space, sigma ratio {ratio:.3e}",
        cert.rank,
        cert.labels.len(),
        cert.tangent_dim
    );
    if let Some(f) = replay.first_failure() {
        summary.push_str(&format!("; first failing step {}: {}", f.step, f.title));
    }
    Ok(CheckResult::new(
        CheckKind::Independence,
        passed,
        ratio,
        RATIO_TOL,
        summary,
        serde_json::to_value(&replay)?,
    ))
}

fn conditions(s: &Scenario) -> Result<CheckResult> {
    let ActionSpec::Homogeneous { subgroup, witness } = &s.action else {
        return Err(Error::InvalidInput(
            "conditions need a homogeneous action".into(),
        ));
    };
    let r = check_homogeneous_conditions(&s.algebra, subgroup, witness)?;
    let summary = format!(
        "dim g = {}, dim k = {}, index {}, bracket rank {}",
        r.dim_g, r.dim_k, r.index, r.bracket_rank
    );
    Ok(CheckResult::new(
        CheckKind::Conditions,
        r.passed,
        r.bracket_rank as f64,
        r.dim_k as f64,
        summary,
        serde_json::to_value(&r)?,
    ))
}

/// Bound and the drifts it applies to for one flow kind.
fn flow_verdict(s: &Scenario, d: &DriftSummary) -> (f64, f64) {
    match &s.flow {
        // monitors are evaluated on exact geodesics
        FlowSpec::Biquotient => {
            let m = d.monitors.iter().fold(0.0f64, |a, m| a.max(m.max_rel));
            (m, EXACT_FLOW_TOL)
        }
        FlowSpec::GroupTimesSphere => {
            let m = d
                .monitors
                .iter()
                .fold(d.energy.max_abs, |a, m| a.max(m.max_abs));
            (m, FLOW_TOL)
        }
        _ => (d.worst(), FLOW_TOL),
    }
}

/// Verdict on a single trajectory.
#[derive(Clone, Debug, Serialize)]
pub struct RunVerdict {
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Drift of the quantities the verdict is based on.
    pub drift: DriftSummary,
}

pub fn judge_run(s: &Scenario, run: &FlowRun) -> RunVerdict {
    let traj = run.trajectory();
    let mut drift = traj.summary();
    let mut extra = 0.0f64;
    let mut seams_ok = true;
    if let FlowRun::Glued(g) = run {
        // linear values flip sign at each seam; their drift is not a conservation failure
        drift.monitors.retain(|m| g.continuous.contains(&m.label));
        seams_ok = g.seam_continuous;
        extra = g.max_continuous_jump;
    }
    let (w, tolerance) = flow_verdict(s, &drift);
    let worst = w.max(extra);
    RunVerdict {
        worst,
        tolerance,
        passed: seams_ok && worst <= tolerance && traj.truncated.is_none(),
        drift,
    }
}

fn flow(s: &Scenario) -> Result<CheckResult> {
    let count = if matches!(s.flow, FlowSpec::Glued(_)) {
        GLUED_SAMPLES
    } else {
        FLOW_SAMPLES
    };
    let runs: Vec<FlowRun> = (0..count as u64)
        .into_par_iter()
        .map(|k| scenario_trajectory(s, s.dt, s.steps, k))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut tol = FLOW_TOL;
    let mut passed = true;
    let mut rows = Vec::new();
    let mut seam_jump = 0.0f64;
    let mut seams = 0;
    for run in &runs {
        if let FlowRun::Glued(g) = run {
            seam_jump = seam_jump.max(g.max_jump("h1").unwrap_or(0.0));
            seams += g.seams.len();
        }
        let v = judge_run(s, run);
        tol = v.tolerance;
        worst = worst.max(v.worst);
        passed &= v.passed;
        rows.push(serde_json::to_value(&v.drift)?);
    }
    let mut details = json!({"dt": s.dt, "steps": s.steps, "trajectories": rows});
    let mut summary = format!(
        "{count} trajectories over t = {}, worst drift {worst:.3e}",
        s.dt * s.steps as f64
    );
    if matches!(s.flow, FlowSpec::Glued(_)) {
        let witnessed = seam_jump > SEAM_JUMP_TOL;
        passed &= witnessed && seams > 0;
        details["seam_crossings"] = json!(seams);
        details["max_unsquared_h1_jump"] = json!(seam_jump);
        summary.push_str(&format!(
            ", {seams} seam crossings, largest h1 jump {seam_jump:.3e}"
        ));
    }
    Ok(CheckResult::new(
        CheckKind::Flow,
        passed,
        worst,
        tol,
        summary,
        details,
    ))
}

fn run_one(s: &Scenario, k: CheckKind) -> CheckResult {
    let r = match k {
        CheckKind::Invariance => invariance(s),
        CheckKind::Involution => involution(s),
        CheckKind::Independence => independence(s),
        CheckKind::Conditions => conditions(s),
        CheckKind::Flow => flow(s),
    };
    r.unwrap_or_else(|e| CheckResult::failed(k, &e))
}

/// Runs the requested checks in the fixed order; a failing check does not stop the others.
pub fn run_checks(s: &Scenario) -> Report {
    let mut kinds = s.checks.clone();
    kinds.sort();
    kinds.dedup();
    let checks: Vec<CheckResult> = kinds.iter().map(|&k| run_one(s, k)).collect();
    let passed = checks.iter().all(|c| c.passed);
    Report {
        schema: REPORT_SCHEMA.to_string(),
        scenario: s.name.clone(),
        anchor: s.anchor.clone(),
        description: s.description.clone(),
        family: s.family.name.clone(),
        chain: s.chain.iter().map(|h| h.name().to_string()).collect(),
        environment: Environment::for_scenario(s),
        timestamp: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        checks,
        passed,
    }
}
