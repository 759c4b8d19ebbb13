use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use sweep_core::cli::{exit_code, run, Command, Flags};
use sweep_core::pmp::PointingMode;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Cmd {
    /// Regularized and catching-up trajectories plus the penetration report.
    Simulate,
    /// Penalized optimal control at a single epsilon.
    Optimize,
    /// Continuation over the schedule, then the necessary-condition checks.
    Verify,
    /// Continuation table over the schedule.
    Sweep,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Mode {
    Full,
    SigmaOnly,
}

#[derive(Debug, Parser)]
#[command(
    name = "sweepctl",
    version,
    about = "Controlled sweeping processes: simulate, optimize, verify"
)]
struct Args {
    command: Cmd,
    scenario: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated, strictly decreasing.
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
    #[arg(long)]
    intervals: Option<usize>,
    #[arg(long)]
    steps_per_interval: Option<usize>,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pointing_mode: Option<Mode>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let command = match args.command {
        Cmd::Simulate => Command::Simulate,
        Cmd::Optimize => Command::Optimize,
        Cmd::Verify => Command::Verify,
        Cmd::Sweep => Command::Sweep,
    };
    let flags = Flags {
        epsilon: args.epsilon,
        eps_schedule: args.eps_schedule,
        intervals: args.intervals,
        steps_per_interval: args.steps_per_interval,
        out: args.out,
        pointing_mode: args.pointing_mode.map(|m| match m {
            Mode::Full => PointingMode::Full,
            Mode::SigmaOnly => PointingMode::SigmaOnly,
        }),
    };
    let result = run(command, &args.scenario, &flags);
    match &result {
        Ok(_) => {}
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
