#![allow(dead_code)]

use nalgebra::{dmatrix, dvector, DVector};
use sweep_core::dynamics::{Constants, ControlSignal, CostModel, Dynamics, GridPolicy, Scenario};
use sweep_core::geometry::{MovingSetModel, ScalarPath, SetShape, VectorPath};
use sweep_core::optimizer::ControlSet;

pub const SCHEDULE: [f64; 3] = [1e-2, 1e-3, 1e-4];
pub const INTERVALS: usize = 50;

pub fn policy() -> GridPolicy {
    GridPolicy {
        intervals: INTERVALS,
        steps_per_interval: None,
        step_ratio: 0.25,
    }
}

/// Half-plane `y >= 0`, `f = u`, `U = [-1,1] x [-1,-1/2]`, cost `x + y`.
pub fn example1(y0: f64) -> Scenario {
    Scenario::new(
        MovingSetModel::halfspace(dvector![0.0, 1.0], ScalarPath::fixed(0.0)).unwrap(),
        Dynamics::ControlDirect,
        ControlSet::new(dvector![-1.0, -1.0], dvector![1.0, -0.5]).unwrap(),
        CostModel::Linear {
            coefficients: dvector![1.0, 1.0],
        },
        1.0,
        dvector![0.0, y0],
        Constants {
            beta: 2f64.sqrt(),
            k: 1.0,
            sigma: 0.5,
        },
    )
    .unwrap()
}

pub fn corner_control() -> ControlSignal {
    ControlSignal::constant(1.0, INTERVALS, dvector![-1.0, -1.0]).unwrap()
}

/// A large ball that the trajectory never leaves: `f = A x + u` with
/// `A` half a quarter-turn rotation.
pub fn interior_affine() -> Scenario {
    let shape = SetShape::Ball {
        center: VectorPath::fixed(dvector![0.0, 0.0]),
        radius: ScalarPath::fixed(50.0),
    };
    Scenario::new(
        MovingSetModel::new(shape, 1.0).unwrap(),
        Dynamics::Affine {
            a: dmatrix![0.0, -0.5; 0.5, 0.0],
            b: dmatrix![1.0, 0.0; 0.0, 1.0],
            c: dvector![0.0, 0.0],
        },
        ControlSet::new(dvector![-1.0, -1.0], dvector![1.0, 1.0]).unwrap(),
        CostModel::Quadratic {
            target: dvector![1.0, -1.0],
        },
        1.0,
        dvector![0.5, 0.3],
        Constants {
            beta: 4.0,
            k: 1.0,
            sigma: 0.5,
        },
    )
    .unwrap()
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.amax()
}
