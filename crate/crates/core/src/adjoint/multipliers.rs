use nalgebra::DVector;
use serde::Serialize;

use super::path::AdjointPath;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};

/// Smallest increment treated as a jump.
pub const MIN_JUMP: f64 = 1e-2;

/// Width of the window inside which a jump must complete: `max(50ε, 4h)`.
pub fn jump_window(epsilon: Option<f64>, h: f64) -> f64 {
    (50.0 * epsilon.unwrap_or(0.0)).max(4.0 * h)
}

#[derive(Clone, Debug, Serialize)]
pub struct Jump {
    pub time: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    /// Largest `|Δp|/h` inside the jump.
    pub peak_slope: f64,
}

impl Jump {
    /// `p(t-) - p(t+)`.
    pub fn size(&self) -> DVector<f64> {
        DVector::from_vec(self.left.clone()) - DVector::from_vec(self.right.clone())
    }
}

/// Runs of steps with slope at least `MIN_JUMP / width` whose total change
/// reaches `MIN_JUMP` within `width`. Runs touching `0` or `T` are placed at
/// the endpoint.
pub fn detect_jumps(times: &[f64], p: &[DVector<f64>], width: f64) -> Vec<Jump> {
    let last = p.len() - 1;
    let h = times[1] - times[0];
    let steep_slope = MIN_JUMP / width;
    let slope: Vec<f64> = p.windows(2).map(|w| (&w[1] - &w[0]).norm() / h).collect();
    let mut jumps = Vec::new();
    let mut k = 0;
    while k < last {
        if slope[k] < steep_slope {
            k += 1;
            continue;
        }
        let a = k;
        while k < last && slope[k] >= steep_slope {
            k += 1;
        }
        let b = k;
        let change = (&p[b] - &p[a]).norm();
        if times[b] - times[a] <= width && change >= MIN_JUMP {
            let time = if a == 0 {
                times[0]
            } else if b == last {
                times[last]
            } else {
                0.5 * (times[a] + times[b])
            };
            jumps.push(Jump {
                time,
                left: p[a].iter().copied().collect(),
                right: p[b].iter().copied().collect(),
                peak_slope: slope[a..b].iter().copied().fold(0.0, f64::max),
            });
        }
    }
    jumps
}

/// Binning of the time axis: `[0, w]`, `uniform` equal windows on
/// `[w, T - w]`, and `[T - w, T]`, with `w = endpoint_fraction · T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowSpec {
    pub uniform: usize,
    pub endpoint_fraction: f64,
}

impl Default for WindowSpec {
    fn default() -> Self {
        Self {
            uniform: 100,
            endpoint_fraction: 0.01,
        }
    }
}

impl WindowSpec {
    pub fn edges(&self, horizon: f64) -> Vec<f64> {
        let w = self.endpoint_fraction * horizon;
        let mut edges = vec![0.0];
        for i in 0..=self.uniform {
            edges.push(w + (horizon - 2.0 * w) * i as f64 / self.uniform as f64);
        }
        edges.push(horizon);
        edges
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MeasureAtom {
    pub window: [f64; 2],
    pub mass: Vec<f64>,
    /// Mass-weighted mean time, or the window midpoint for a null window.
    pub centroid: f64,
}

impl MeasureAtom {
    pub fn mass_vector(&self) -> DVector<f64> {
        DVector::from_vec(self.mass.clone())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplierReport {
    pub eta_profile: Vec<[f64; 2]>,
    pub eta_max: f64,
    /// `Σ_k |normal mass_k|`, the discrete `(1/ε) ∫ |ξ| dt`.
    pub xi_mass_total: f64,
    pub atoms: Vec<MeasureAtom>,
}

impl MultiplierReport {
    /// Atom whose window is `[T - w, T]`.
    pub fn terminal_atom(&self) -> &MeasureAtom {
        self.atoms.last().expect("at least two windows")
    }

    pub fn initial_atom(&self) -> &MeasureAtom {
        &self.atoms[0]
    }
}

/// Bins the per-step normal masses of `path` into windows.
pub fn extract_multipliers(
    path: &AdjointPath,
    traj: &Trajectory,
    windows: WindowSpec,
) -> Result<MultiplierReport> {
    if path.times.len() != traj.times.len() {
        return Err(Error::DimensionMismatch {
            what: "adjoint nodes vs trajectory nodes",
            expected: traj.times.len(),
            got: path.times.len(),
        });
    }
    if windows.uniform == 0 || !(windows.endpoint_fraction > 0.0 && windows.endpoint_fraction < 0.5)
    {
        return Err(Error::validation(
            "windows",
            "need at least one uniform window and an endpoint fraction in (0, 0.5)",
        ));
    }
    let horizon = path.horizon();
    let edges = windows.edges(horizon);
    let n_windows = edges.len() - 1;
    let dim = path.p[0].len();
    let mut mass = vec![DVector::<f64>::zeros(dim); n_windows];
    let mut weight = vec![0.0; n_windows];
    let mut moment = vec![0.0; n_windows];
    let h = path.step();
    let mut xi_mass_total = 0.0;
    for (k, st) in path.steps.iter().enumerate() {
        let mid = path.times[k] + 0.5 * h;
        let w = edges[1..].partition_point(|e| *e < mid).min(n_windows - 1);
        let size = st.normal_mass.norm();
        mass[w] += &st.normal_mass;
        weight[w] += size;
        moment[w] += size * mid;
        xi_mass_total += size;
    }
    let atoms = (0..n_windows)
        .map(|w| MeasureAtom {
            window: [edges[w], edges[w + 1]],
            mass: mass[w].iter().copied().collect(),
            centroid: if weight[w] > 0.0 {
                moment[w] / weight[w]
            } else {
                0.5 * (edges[w] + edges[w + 1])
            },
        })
        .collect();
    Ok(MultiplierReport {
        eta_profile: path
            .times
            .iter()
            .zip(path.eta.iter())
            .map(|(t, e)| [*t, *e])
            .collect(),
        eta_max: path.eta.iter().copied().fold(0.0, f64::max),
        xi_mass_total,
        atoms,
    })
}
