//! Scenario files, run orchestration and result export for `sweepctl`.

mod export;
mod run;
mod scenario_file;

pub use export::{
    write_adjoint_csv, write_atomic, write_continuation_csv, write_control_csv, write_json,
    write_trajectory_csv,
};
pub use run::{exit_code, load_scenario, run, Command, Flags, Outcome};
pub use scenario_file::{
    emit_scenario, parse_scenario, Numerics, ReferenceControl, ScenarioDocument, ScenarioFile,
    SCHEMA_VERSION,
};
