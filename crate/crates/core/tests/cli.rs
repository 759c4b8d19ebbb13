use std::path::{Path, PathBuf};
use std::process::Command as Process;

use nalgebra::dvector;
use proptest::prelude::*;
use sweep_core::cli::{
    emit_scenario, exit_code, parse_scenario, run, Command, Flags, Outcome, ReferenceControl,
};
use sweep_core::dynamics::{CostModel, Dynamics};
use sweep_core::geometry::{ScalarPath, SetShape};
use sweep_core::pmp::PointingMode;
use sweep_core::Error;

fn example_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/example1.json")
}

fn example_text() -> String {
    std::fs::read_to_string(example_path()).unwrap()
}

fn edit(f: impl FnOnce(&mut serde_json::Value)) -> String {
    let mut v: serde_json::Value = serde_json::from_str(&example_text()).unwrap();
    f(&mut v);
    v.to_string()
}

fn validation_path(err: Error) -> String {
    match err {
        Error::Validation { path, .. } => path,
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn bundled_example_parses_to_the_half_plane_problem() {
    let doc = parse_scenario(&example_text()).unwrap();
    let s = &doc.scenario;
    match s.set.shape() {
        SetShape::Halfspace { normal, offset } => {
            assert_eq!(normal, &dvector![0.0, 1.0]);
            assert_eq!(offset, &ScalarPath::fixed(0.0));
        }
        other => panic!("unexpected set {other:?}"),
    }
    assert_eq!(s.dynamics, Dynamics::ControlDirect);
    assert_eq!(s.control_set.lo(), &dvector![-1.0, -1.0]);
    assert_eq!(s.control_set.hi(), &dvector![1.0, -0.5]);
    assert_eq!(
        s.cost,
        CostModel::Linear {
            coefficients: dvector![1.0, 1.0]
        }
    );
    assert_eq!(s.horizon, 1.0);
    assert_eq!(s.x0, dvector![0.0, 0.5]);
    assert_eq!(s.gamma(), 0.0);
    assert_eq!(doc.numerics.pointing_mode, PointingMode::SigmaOnly);
    assert_eq!(doc.numerics.schedule().unwrap(), vec![1e-2, 1e-3, 1e-4]);
}

#[test]
fn infeasible_initial_state_is_rejected() {
    let text = edit(|v| v["x0"] = serde_json::json!([0.0, -1.0]));
    let err = parse_scenario(&text).unwrap_err();
    assert!(
        matches!(err, Error::InfeasibleInitialState { .. }),
        "{err:?}"
    );
    assert!(err.is_validation());
}

#[test]
fn inverted_control_bounds_name_the_field() {
    let text = edit(|v| v["control_set"]["lo"] = serde_json::json!([2.0, -1.0]));
    let path = validation_path(parse_scenario(&text).unwrap_err());
    assert!(path.starts_with("control_set"), "{path}");
}

#[test]
fn unknown_fields_are_rejected_with_their_path() {
    let top = edit(|v| v["colour"] = serde_json::json!("red"));
    assert_eq!(validation_path(parse_scenario(&top).unwrap_err()), "colour");

    let nested = edit(|v| v["constants"]["delta"] = serde_json::json!(1.0));
    assert_eq!(
        validation_path(parse_scenario(&nested).unwrap_err()),
        "constants.delta"
    );

    let tagged = edit(|v| v["set"]["radius"] = serde_json::json!(1.0));
    assert!(validation_path(parse_scenario(&tagged).unwrap_err()).starts_with("set"));
}

#[test]
fn type_errors_carry_path_and_line() {
    let text = example_text().replace("\"horizon\": 1.0", "\"horizon\": \"one\"");
    let err = parse_scenario(&text).unwrap_err();
    let message = err.to_string();
    assert_eq!(validation_path(err), "horizon");
    assert!(message.contains("line"), "{message}");
}

#[test]
fn unregistered_dynamics_lists_the_known_names() {
    let text = edit(|v| v["dynamics"] = serde_json::json!({"kind": "custom", "name": "pendulum"}));
    let err = parse_scenario(&text).unwrap_err();
    assert!(err.to_string().contains("tanh_coupled"));
    assert_eq!(validation_path(err), "dynamics.name");
}

#[test]
fn missing_epsilon_and_schedule_is_rejected() {
    let text = edit(|v| {
        let n = v["numerics"].as_object_mut().unwrap();
        n.remove("epsilon");
        n.remove("eps_schedule");
    });
    assert_eq!(
        validation_path(parse_scenario(&text).unwrap_err()),
        "numerics"
    );
}

#[test]
fn example_round_trips() {
    let doc = parse_scenario(&example_text()).unwrap();
    let again = parse_scenario(&emit_scenario(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn moving_sets_and_overrides_round_trip() {
    let text = serde_json::json!({
        "schema_version": 1,
        "set": {
            "kind": "ball_complement",
            "center": [0.0, 0.0],
            "radius": 1.0,
            "motion": {"center": {"type": "linear", "rate": [0.1, -0.2]}, "radius": {"type": "linear", "rate": 0.05}}
        },
        "dynamics": {"kind": "affine", "a": [[0.0, 0.3], [-0.3, 0.0]], "b": [[1.0], [0.5]], "c": [0.1, 0.0]},
        "control_set": {"lo": [-1.0], "hi": [1.0]},
        "cost": {"kind": "quadratic", "target": [2.0, 0.0]},
        "horizon": 2.0,
        "x0": [1.5, 0.5],
        "constants": {"beta": 5.0, "k": 2.0, "sigma": 0.1, "rho": 0.8, "gamma": 0.5},
        "numerics": {
            "epsilon": 0.01,
            "control_intervals": 4,
            "steps_per_interval": 10,
            "reference_control": [[0.0], [0.5], [-0.5], [1.0]],
            "thresholds": {"weak_equation": 0.05},
            "solver": {"max_iters": 10}
        }
    })
    .to_string();
    let doc = parse_scenario(&text).unwrap();
    assert_eq!(doc.scenario.rho(), 0.8);
    assert_eq!(doc.scenario.gamma(), 0.5);
    assert_eq!(doc.numerics.thresholds.weak_equation, 0.05);
    assert_eq!(doc.numerics.thresholds.maximality, 1e-6);
    assert!(matches!(
        doc.numerics.reference_control,
        Some(ReferenceControl::PerInterval(_))
    ));
    let again = parse_scenario(&emit_scenario(&doc).unwrap()).unwrap();
    assert_eq!(doc, again);
}

#[test]
fn sublevel_and_custom_dynamics_round_trip() {
    let text = serde_json::json!({
        "schema_version": 1,
        "set": {"kind": "sublevel", "function": "ellipsoid", "center": [0.0, 0.0], "semi_axes": [2.0, 1.0],
                "motion": {"center": {"type": "linear", "rate": [0.1, 0.0]}}},
        "dynamics": {"kind": "custom", "name": "tanh_coupled"},
        "control_set": {"lo": [-1.0, -1.0], "hi": [1.0, 1.0]},
        "cost": {"kind": "linear", "coefficients": [1.0, 0.0]},
        "horizon": 1.0,
        "x0": [0.0, 0.0],
        "constants": {"beta": 3.0, "k": 1.0, "sigma": 0.2},
        "numerics": {"eps_schedule": [0.01, 0.005]}
    })
    .to_string();
    let doc = parse_scenario(&text).unwrap();
    assert_eq!(parse_scenario(&emit_scenario(&doc).unwrap()).unwrap(), doc);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn halfspace_scenarios_round_trip_exactly(
        offset in -1.0..0.0f64,
        rate in -0.3..0.3f64,
        x in -5.0..5.0f64,
        y in 0.0..3.0f64,
        beta in 2.0..5.0f64,
        sigma in 0.0..1.0f64,
    ) {
        let text = edit(|v| {
            v["set"]["offset"] = serde_json::json!(offset);
            v["set"]["motion"] = serde_json::json!({"offset": {"type": "linear", "rate": rate}});
            v["x0"] = serde_json::json!([x, y]);
            v["constants"]["beta"] = serde_json::json!(beta);
            v["constants"]["sigma"] = serde_json::json!(sigma);
        });
        let doc = parse_scenario(&text).unwrap();
        prop_assert_eq!(parse_scenario(&emit_scenario(&doc).unwrap()).unwrap(), doc);
    }
}

fn flags(out: &Path) -> Flags {
    Flags {
        out: Some(out.to_path_buf()),
        ..Flags::default()
    }
}

#[test]
fn verify_passes_on_the_bundled_example() {
    let dir = tempfile::tempdir().unwrap();
    let f = Flags {
        eps_schedule: Some(vec![1e-2, 1e-3, 1e-4]),
        ..flags(dir.path())
    };
    let result = run(Command::Verify, &example_path(), &f);
    assert_eq!(exit_code(&result), 0);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("pmp_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["passed"], true);
    assert!(report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["status"] != "FAIL"));
    let multipliers: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("multipliers.json")).unwrap(),
    )
    .unwrap();
    let atoms = multipliers["atoms"].as_array().unwrap();
    assert_eq!(
        atoms.last().unwrap()["mass"],
        serde_json::json!([0.0, -1.0])
    );
}

#[test]
fn full_pointing_mode_fails_the_example() {
    let dir = tempfile::tempdir().unwrap();
    let f = Flags {
        pointing_mode: Some(PointingMode::Full),
        ..flags(dir.path())
    };
    let result = run(Command::Verify, &example_path(), &f);
    assert_eq!(result.unwrap(), Outcome::ChecksFailed);
}

#[test]
fn simulate_reports_the_penetration_bound() {
    let dir = tempfile::tempdir().unwrap();
    let f = Flags {
        epsilon: Some(1e-3),
        ..flags(dir.path())
    };
    assert_eq!(exit_code(&run(Command::Simulate, &example_path(), &f)), 0);
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("penetration.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["pass"], true);
    let csv = std::fs::read_to_string(dir.path().join("regularized.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "t,x_1,x_2,d,d_signed");
    // 50 intervals of 80 steps.
    assert_eq!(csv.lines().count(), 1 + 4001);
    assert!(dir.path().join("catching_up.csv").exists());
}

#[test]
fn optimize_and_sweep_write_their_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        exit_code(&run(Command::Optimize, &example_path(), &flags(dir.path()))),
        0
    );
    for name in ["solve.json", "control.csv", "trajectory.csv", "adjoint.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let adjoint = std::fs::read_to_string(dir.path().join("adjoint.csv")).unwrap();
    assert_eq!(adjoint.lines().next().unwrap(), "t,p_1,p_2,xi,eta,p_normal");

    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        exit_code(&run(Command::Sweep, &example_path(), &flags(dir.path()))),
        0
    );
    let table = std::fs::read_to_string(dir.path().join("continuation.csv")).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("1.0000000000000000e-2,"));
    assert!(rows[3].starts_with("1.0000000000000000e-4,"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        run(Command::Verify, &example_path(), &flags(dir.path())).unwrap();
    }
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 5);
    for name in names {
        let x = std::fs::read(a.path().join(&name)).unwrap();
        let y = std::fs::read(b.path().join(&name)).unwrap();
        assert!(x == y, "{name:?} differs");
    }
}

#[test]
fn exit_codes_follow_the_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let missing = run(
        Command::Verify,
        Path::new("/nonexistent/scenario.json"),
        &flags(dir.path()),
    );
    assert_eq!(exit_code(&missing), 1);
    let bad_schedule = Flags {
        eps_schedule: Some(vec![1e-3, 1e-2]),
        ..flags(dir.path())
    };
    assert_eq!(
        exit_code(&run(Command::Sweep, &example_path(), &bad_schedule)),
        1
    );
    let numerical: sweep_core::Result<Outcome> = Err(Error::NonDecreasingCost {
        iteration: 3,
        halvings: 30,
    });
    assert_eq!(exit_code(&numerical), 2);
    assert_eq!(exit_code(&Ok(Outcome::ChecksFailed)), 3);
}

#[test]
fn binary_runs_verify_and_reports_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let out = Process::new(env!("CARGO_BIN_EXE_sweepctl"))
        .args(["verify"])
        .arg(example_path())
        .args(["--eps-schedule", "1e-2,1e-3,1e-4", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("overall: PASS"), "{stdout}");

    let missing = Process::new(env!("CARGO_BIN_EXE_sweepctl"))
        .args(["simulate", "/nonexistent.json"])
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8(missing.stderr)
        .unwrap()
        .starts_with("error:"));
}
