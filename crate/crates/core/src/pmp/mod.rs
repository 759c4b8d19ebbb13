//! Verification of the necessary optimality conditions on a candidate
//! control.

mod pointing;
mod report;
mod weak;

pub use pointing::{check_pointing, PointingMode, PointingReport, PointingVerdict};
pub use report::{verify_theorem, Check, PmpReport, Selection, Status, StructureFlags, Thresholds};
pub use weak::{verify_weak_equation, Profile, TestFamily, WeakDefect, WeakEquationReport};

use crate::adjoint::{extract_multipliers, limit_study, LimitStudy, MultiplierReport, WindowSpec};
use crate::dynamics::{
    detect_crossings, integrate_catching_up, BoundaryStructure, ControlSignal, GridPolicy,
    Scenario, Trajectory,
};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub schedule: Vec<f64>,
    pub grid: GridPolicy,
    pub mode: PointingMode,
    pub thresholds: Thresholds,
    pub windows: WindowSpec,
    pub family: TestFamily,
}

pub struct Verification {
    pub study: LimitStudy,
    /// Catching-up trajectory of the candidate on the finest grid.
    pub reference: Trajectory,
    pub reference_structure: BoundaryStructure,
    pub multipliers: MultiplierReport,
    pub weak: WeakEquationReport,
    pub report: PmpReport,
}

/// Runs the limit study for `u`, takes the contact structure from the
/// catching-up trajectory and checks every condition on the finest `ε`.
pub fn run_verification(
    scenario: &Scenario,
    u: &ControlSignal,
    config: &VerifyConfig,
) -> Result<Verification> {
    let study = limit_study(scenario, u, &config.schedule, config.grid)?;
    let finest = study.limit();
    let reference = integrate_catching_up(scenario, u, finest.traj.grid.steps_per_interval)?;
    let reference_structure = detect_crossings(scenario, &reference)?;
    let pointing = check_pointing(scenario, &reference, &reference_structure, config.mode)?;
    let multipliers = extract_multipliers(&finest.path, &finest.traj, config.windows)?;
    let weak = verify_weak_equation(
        scenario,
        &finest.traj,
        u,
        &finest.path,
        &multipliers,
        config.family,
    )?;
    let report = verify_theorem(
        scenario,
        &finest.traj,
        u,
        &finest.path,
        &reference_structure,
        pointing,
        &weak,
        config.thresholds,
    )?;
    Ok(Verification {
        study,
        reference,
        reference_structure,
        multipliers,
        weak,
        report,
    })
}
