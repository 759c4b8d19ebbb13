use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{BoundaryStructure, Scenario, Trajectory};
use crate::error::Result;

const RANDOM_CONTROLS: usize = 100;
const CONTROL_SEED: u64 = 0x5eed_c0de;

/// Which outward threshold the first pointing condition is compared with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointingMode {
    /// `min L >= γ + β + σ`.
    Full,
    /// `min L >= σ`.
    SigmaOnly,
}

impl PointingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            PointingMode::Full => "full",
            PointingMode::SigmaOnly => "sigma_only",
        }
    }
}

impl std::str::FromStr for PointingMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(PointingMode::Full),
            "sigma_only" => Ok(PointingMode::SigmaOnly),
            other => Err(format!(
                "unknown pointing mode `{other}` (expected full or sigma_only)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointingVerdict {
    /// Outward drift everywhere on `I_∂`.
    M1,
    /// Inward drift everywhere on `I_∂`.
    M2,
    Neither,
    /// `I_∂` is empty, so neither condition constrains anything.
    Vacuous,
}

#[derive(Clone, Debug, Serialize)]
pub struct PointingReport {
    pub verdict: PointingVerdict,
    pub threshold_mode: PointingMode,
    /// Slack of the winning condition; the larger of the two slacks (both
    /// negative) for `Neither`.
    pub margin: f64,
    pub min_l: f64,
    pub max_l: f64,
    pub outward_threshold: f64,
    pub inward_threshold: f64,
    pub nodes: usize,
}

/// Evaluates `L(t, v) = ∂_t d_S + <∇d_S, f(x(t), v)>` for `t` on the grid
/// nodes of `I_∂` and `v` over the corners of `U` plus seeded random samples.
pub fn check_pointing(
    scenario: &Scenario,
    traj: &Trajectory,
    structure: &BoundaryStructure,
    mode: PointingMode,
) -> Result<PointingReport> {
    let c = &scenario.constants;
    let outward_threshold = match mode {
        PointingMode::Full => scenario.gamma() + c.beta + c.sigma,
        PointingMode::SigmaOnly => c.sigma,
    };
    let inward_threshold = -c.sigma;

    let mut rng = ChaCha8Rng::seed_from_u64(CONTROL_SEED);
    let mut controls = scenario.control_set.vertices();
    controls.extend((0..RANDOM_CONTROLS).map(|_| scenario.control_set.sample(&mut rng)));

    let mut min_l = f64::INFINITY;
    let mut max_l = f64::NEG_INFINITY;
    let mut nodes = 0;
    for (k, t) in traj.times.iter().enumerate() {
        if !structure.on_boundary(*t) {
            continue;
        }
        nodes += 1;
        let x = &traj.states[k];
        let dt = scenario.set.set_velocity(*t, x)?;
        let n = scenario.set.signed_gradient(*t, x)?;
        for v in &controls {
            let l = dt + n.dot(&scenario.dynamics.eval(x, v));
            min_l = min_l.min(l);
            max_l = max_l.max(l);
        }
    }
    let (verdict, margin) = if nodes == 0 {
        (PointingVerdict::Vacuous, 0.0)
    } else {
        let out = min_l - outward_threshold;
        let inw = inward_threshold - max_l;
        if out >= 0.0 {
            (PointingVerdict::M1, out)
        } else if inw >= 0.0 {
            (PointingVerdict::M2, inw)
        } else {
            (PointingVerdict::Neither, out.max(inw))
        }
    };
    Ok(PointingReport {
        verdict,
        threshold_mode: mode,
        margin,
        min_l,
        max_l,
        outward_threshold,
        inward_threshold,
        nodes,
    })
}
