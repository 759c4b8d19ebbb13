use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::adjoint::AdjointPath;
use crate::dynamics::{ControlSignal, Trajectory};
use crate::error::Result;
use crate::optimizer::ContinuationRow;

pub(crate) fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

fn write_csv(
    path: &Path,
    header: Vec<String>,
    rows: impl Iterator<Item = Vec<String>>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    write_atomic(path, &bytes)
}

/// Columns `t, x_1..x_n, d, d_signed`.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let n = traj.states[0].len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    header.extend(["d".to_string(), "d_signed".to_string()]);
    let rows = (0..traj.times.len()).map(|k| {
        let mut row = vec![num(traj.times[k])];
        row.extend(traj.states[k].iter().map(|v| num(*v)));
        row.push(num(traj.distance[k]));
        row.push(num(traj.signed[k]));
        row
    });
    write_csv(path, header, rows)
}

/// Columns `t, p_1..p_n, xi, eta, p_normal`; `p_normal` is empty away
/// from the contact band.
pub fn write_adjoint_csv(path: &Path, adjoint: &AdjointPath) -> Result<()> {
    let n = adjoint.p[0].len();
    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|i| format!("p_{i}")));
    header.extend(["xi".to_string(), "eta".to_string(), "p_normal".to_string()]);
    let rows = (0..adjoint.times.len()).map(|k| {
        let mut row = vec![num(adjoint.times[k])];
        row.extend(adjoint.p[k].iter().map(|v| num(*v)));
        row.push(num(adjoint.xi[k]));
        row.push(num(adjoint.eta[k]));
        row.push(adjoint.p_normal[k].map(num).unwrap_or_default());
        row
    });
    write_csv(path, header, rows)
}

/// Columns `t_start, t_end, u_1..u_m`, one row per control interval.
pub fn write_control_csv(path: &Path, u: &ControlSignal) -> Result<()> {
    let dt = u.interval_length();
    let mut header = vec!["t_start".to_string(), "t_end".to_string()];
    header.extend((1..=u.dim()).map(|i| format!("u_{i}")));
    let rows = u.values().iter().enumerate().map(|(j, v)| {
        let mut row = vec![num(j as f64 * dt), num((j + 1) as f64 * dt)];
        row.extend(v.iter().map(|x| num(*x)));
        row
    });
    write_csv(path, header, rows)
}

pub fn write_continuation_csv(path: &Path, rows: &[ContinuationRow]) -> Result<()> {
    let header = [
        "epsilon",
        "control_gap",
        "state_gap",
        "terminal_cost",
        "catching_up_cost",
        "cost_gap",
        "iterations",
        "converged",
    ]
    .map(String::from)
    .to_vec();
    let rows = rows.iter().map(|r| {
        vec![
            num(r.epsilon),
            num(r.control_gap),
            num(r.state_gap),
            num(r.terminal_cost),
            num(r.catching_up_cost),
            num(r.cost_gap),
            r.iterations.to_string(),
            r.converged.to_string(),
        ]
    });
    write_csv(path, header, rows)
}
