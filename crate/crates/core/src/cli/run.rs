use std::path::{Path, PathBuf};

use serde::Serialize;

use super::export::{
    write_adjoint_csv, write_continuation_csv, write_control_csv, write_json, write_trajectory_csv,
};
use super::scenario_file::{parse_scenario, ScenarioDocument};
use crate::adjoint::{ConfirmedJump, WindowSpec};
use crate::dynamics::{
    integrate_catching_up, integrate_regularized, penetration_report, BoundaryStructure,
};
use crate::error::{Error, Result};
use crate::optimizer::{continuation, solve_penalized, SolveReport};
use crate::pmp::{run_verification, PointingMode, TestFamily, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Optimize,
    Verify,
    Sweep,
}

/// Command-line overrides of the scenario's numerics block.
#[derive(Clone, Debug, Default)]
pub struct Flags {
    pub epsilon: Option<f64>,
    pub eps_schedule: Option<Vec<f64>>,
    pub intervals: Option<usize>,
    pub steps_per_interval: Option<usize>,
    pub out: Option<PathBuf>,
    pub pointing_mode: Option<PointingMode>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// The run completed but a reported check failed.
    ChecksFailed,
}

/// 0 success, 1 validation error, 2 numerical failure, 3 failed checks.
pub fn exit_code(result: &Result<Outcome>) -> i32 {
    match result {
        Ok(Outcome::Success) => 0,
        Ok(Outcome::ChecksFailed) => 3,
        Err(e) if e.is_validation() => 1,
        Err(_) => 2,
    }
}

pub fn load_scenario(path: &Path) -> Result<ScenarioDocument> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::validation(
            path.display().to_string(),
            format!("cannot read scenario: {e}"),
        )
    })?;
    parse_scenario(&text)
}

fn apply_flags(doc: &mut ScenarioDocument, flags: &Flags) -> Result<()> {
    let n = &mut doc.numerics;
    if let Some(e) = flags.epsilon {
        n.epsilon = Some(e);
    }
    if let Some(s) = &flags.eps_schedule {
        crate::adjoint::check_schedule(s)?;
        n.eps_schedule = Some(s.clone());
    }
    if let Some(i) = flags.intervals {
        if i == 0 {
            return Err(Error::validation("--intervals", "must be at least 1"));
        }
        n.control_intervals = i;
    }
    if let Some(m) = flags.steps_per_interval {
        if m == 0 {
            return Err(Error::validation(
                "--steps-per-interval",
                "must be at least 1",
            ));
        }
        n.steps_per_interval = Some(m);
    }
    if let Some(mode) = flags.pointing_mode {
        n.pointing_mode = mode;
    }
    if let Some(e) = flags.epsilon {
        doc.scenario.check_epsilon(e)?;
    }
    for e in flags.eps_schedule.iter().flatten() {
        doc.scenario.check_epsilon(*e)?;
    }
    Ok(())
}

/// Loads the scenario, runs `command` and writes its artifacts under
/// `flags.out` (default: the current directory).
pub fn run(command: Command, scenario_path: &Path, flags: &Flags) -> Result<Outcome> {
    let mut doc = load_scenario(scenario_path)?;
    apply_flags(&mut doc, flags)?;
    let out = flags.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    match command {
        Command::Simulate => simulate(&doc, &out),
        Command::Optimize => optimize(&doc, &out),
        Command::Verify => verify(&doc, &out),
        Command::Sweep => sweep(&doc, &out),
    }
}

fn simulate(doc: &ScenarioDocument, out: &Path) -> Result<Outcome> {
    let s = &doc.scenario;
    let eps = doc.numerics.epsilon()?;
    let u = doc.numerics.reference(s)?;
    let m = doc.numerics.grid().steps_per_interval(s.horizon, eps)?;
    let reg = integrate_regularized(s, &u, eps, m)?;
    let catching = integrate_catching_up(s, &u, m)?;
    let report = penetration_report(&reg, eps, s.beta(), s.gamma());
    write_trajectory_csv(&out.join("regularized.csv"), &reg)?;
    write_trajectory_csv(&out.join("catching_up.csv"), &catching)?;
    write_json(&out.join("penetration.json"), &report)?;
    eprintln!(
        "penetration: max d = {:.6e}, bound eps(beta+gamma) = {:.6e}, max ratio = {:.4} (limit {:.4}): {}",
        report.max_distance,
        report.bound,
        report.max_ratio,
        report.ratio_limit,
        if report.pass { "PASS" } else { "FAIL" }
    );
    Ok(if report.pass {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    })
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    epsilon: f64,
    steps_per_interval: usize,
    iterations: usize,
    converged: bool,
    stationarity: f64,
    pmp_residual: f64,
    final_cost: f64,
    terminal_state: Vec<f64>,
    cost_history: &'a [f64],
    u_opt: Vec<Vec<f64>>,
}

fn summary(rep: &SolveReport) -> SolveSummary<'_> {
    SolveSummary {
        epsilon: rep.epsilon,
        steps_per_interval: rep.traj.grid.steps_per_interval,
        iterations: rep.iterations,
        converged: rep.converged,
        stationarity: rep.stationarity,
        pmp_residual: rep.pmp_residual,
        final_cost: *rep.cost_history.last().expect("nonempty history"),
        terminal_state: rep.traj.final_state().iter().copied().collect(),
        cost_history: &rep.cost_history,
        u_opt: rep
            .u_opt
            .values()
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
    }
}

fn optimize(doc: &ScenarioDocument, out: &Path) -> Result<Outcome> {
    let s = &doc.scenario;
    let eps = doc.numerics.epsilon()?;
    let u_ref = doc.numerics.reference(s)?;
    let rep = solve_penalized(s, &u_ref, eps, doc.numerics.grid(), doc.numerics.solver)?;
    write_json(&out.join("solve.json"), &summary(&rep))?;
    write_control_csv(&out.join("control.csv"), &rep.u_opt)?;
    write_trajectory_csv(&out.join("trajectory.csv"), &rep.traj)?;
    write_adjoint_csv(&out.join("adjoint.csv"), &rep.adjoint)?;
    eprintln!(
        "optimize: eps = {eps:.3e}, {} iteration(s), stationarity {:.3e}, converged: {}",
        rep.iterations, rep.stationarity, rep.converged
    );
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct LimitSummary<'a> {
    schedule: Vec<f64>,
    max_distance: Vec<f64>,
    reference_structure: &'a BoundaryStructure,
    confirmed_jumps: &'a [ConfirmedJump],
    normal_component_sup: Option<f64>,
}

fn verify(doc: &ScenarioDocument, out: &Path) -> Result<Outcome> {
    let s = &doc.scenario;
    let n = &doc.numerics;
    let schedule = n.schedule()?;
    let u_ref = n.reference(s)?;
    let cont = continuation(s, &u_ref, &schedule, n.grid(), n.solver)?;
    let candidate = &cont.solves.last().expect("nonempty schedule").u_opt;
    let config = VerifyConfig {
        schedule: schedule.clone(),
        grid: n.grid(),
        mode: n.pointing_mode,
        thresholds: n.thresholds,
        windows: WindowSpec::default(),
        family: TestFamily::default(),
    };
    let v = run_verification(s, candidate, &config)?;
    let finest = v.study.limit();
    write_json(&out.join("pmp_report.json"), &v.report)?;
    write_json(&out.join("multipliers.json"), &v.multipliers)?;
    write_json(&out.join("weak_equation.json"), &v.weak)?;
    write_json(
        &out.join("limit_study.json"),
        &LimitSummary {
            schedule,
            max_distance: v
                .study
                .members
                .iter()
                .map(|m| m.traj.max_distance())
                .collect(),
            reference_structure: &v.reference_structure,
            confirmed_jumps: &v.study.jump_table,
            normal_component_sup: v.study.normal_component_sup,
        },
    )?;
    write_control_csv(&out.join("control.csv"), candidate)?;
    write_trajectory_csv(&out.join("trajectory.csv"), &finest.traj)?;
    write_trajectory_csv(&out.join("reference.csv"), &v.reference)?;
    write_adjoint_csv(&out.join("adjoint.csv"), &finest.path)?;
    print!("{}", v.report.summary());
    Ok(if v.report.passed {
        Outcome::Success
    } else {
        Outcome::ChecksFailed
    })
}

fn sweep(doc: &ScenarioDocument, out: &Path) -> Result<Outcome> {
    let s = &doc.scenario;
    let n = &doc.numerics;
    let schedule = n.schedule()?;
    let u_ref = n.reference(s)?;
    let cont = continuation(s, &u_ref, &schedule, n.grid(), n.solver)?;
    for (i, rep) in cont.solves.iter().enumerate() {
        write_json(&out.join(format!("solve_{i:02}.json")), &summary(rep))?;
    }
    write_continuation_csv(&out.join("continuation.csv"), &cont.table)?;
    for row in &cont.table {
        eprintln!(
            "eps = {:.3e}: control gap {:.3e}, state gap {:.3e}, cost gap {:.3e}",
            row.epsilon, row.control_gap, row.state_gap, row.cost_gap
        );
    }
    Ok(Outcome::Success)
}
