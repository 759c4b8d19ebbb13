use nalgebra::DVector;
use serde::Serialize;

use super::MovingSetModel;
use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct ProxReport {
    /// `max <ζ, y - x> - |y - x|² / (2ρ)` over all sampled pairs.
    pub max_violation: f64,
    pub pairs: usize,
}

/// Sampled check of the prox-regularity inequality
/// `<ζ, y - x> <= |y - x|² / (2ρ)` for boundary points `x` with external
/// normal `ζ` and points `y` of the set.
pub fn prox_check(
    set: &MovingSetModel,
    t: f64,
    boundary_samples: &[DVector<f64>],
    probe_samples: &[DVector<f64>],
) -> Result<ProxReport> {
    let rho = set.prox_radius();
    let mut max_violation = f64::NEG_INFINITY;
    let mut pairs = 0;
    for x in boundary_samples {
        let zeta = set.distance_gradient(t, x)?;
        for y in probe_samples {
            let diff = y - x;
            let violation = zeta.dot(&diff) - diff.norm_squared() / (2.0 * rho);
            max_violation = max_violation.max(violation);
            pairs += 1;
        }
    }
    Ok(ProxReport {
        max_violation,
        pairs,
    })
}
