use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    Constants, ControlSignal, CostModel, CustomDynamics, Dynamics, GridPolicy, Scenario,
};
use crate::error::{Error, Result};
use crate::geometry::{LevelFunction, MovingSetModel, ScalarPath, SetShape, VectorPath};
use crate::optimizer::{ControlSet, SolverOptions};
use crate::pmp::{PointingMode, Thresholds};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub schema_version: u32,
    pub set: SetBlock,
    pub dynamics: DynamicsBlock,
    pub control_set: ControlSetBlock,
    pub cost: CostBlock,
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub constants: ConstantsBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetBlock {
    Halfspace {
        normal: Vec<f64>,
        offset: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        motion: Option<HalfspaceMotion>,
    },
    Ball {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        motion: Option<BallMotion>,
    },
    BallComplement {
        center: Vec<f64>,
        radius: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        motion: Option<BallMotion>,
    },
    Sublevel {
        function: String,
        center: Vec<f64>,
        semi_axes: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        motion: Option<SublevelMotion>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScalarMotion {
    Static,
    Linear { rate: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum VectorMotion {
    Static,
    Linear { rate: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceMotion {
    pub offset: ScalarMotion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallMotion {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<VectorMotion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<ScalarMotion>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SublevelMotion {
    pub center: VectorMotion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DynamicsBlock {
    ControlDirect,
    /// Matrices are given row by row.
    Affine {
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<f64>,
    },
    Custom {
        name: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlSetBlock {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostBlock {
    Linear { coefficients: Vec<f64> },
    Quadratic { target: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsBlock {
    pub beta: f64,
    pub k: f64,
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ReferenceControl {
    Constant(Vec<f64>),
    PerInterval(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_schedule: Option<Vec<f64>>,
    #[serde(default = "default_intervals")]
    pub control_intervals: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps_per_interval: Option<usize>,
    #[serde(default = "default_step_ratio")]
    pub step_ratio: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_control: Option<ReferenceControl>,
    #[serde(default = "default_pointing_mode")]
    pub pointing_mode: PointingMode,
    #[serde(default)]
    pub thresholds: ThresholdsBlock,
    #[serde(default)]
    pub solver: SolverBlock,
}

fn default_intervals() -> usize {
    50
}

fn default_step_ratio() -> f64 {
    0.25
}

fn default_pointing_mode() -> PointingMode {
    PointingMode::Full
}

impl Default for NumericsBlock {
    fn default() -> Self {
        Self {
            epsilon: None,
            eps_schedule: None,
            control_intervals: default_intervals(),
            steps_per_interval: None,
            step_ratio: default_step_ratio(),
            reference_control: None,
            pointing_mode: default_pointing_mode(),
            thresholds: ThresholdsBlock::default(),
            solver: SolverBlock::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdsBlock {
    pub transversality: f64,
    pub maximality: f64,
    pub normal_component: f64,
    pub weak_equation: f64,
}

impl Default for ThresholdsBlock {
    fn default() -> Self {
        let t = Thresholds::default();
        Self {
            transversality: t.transversality,
            maximality: t.maximality,
            normal_component: t.normal_component,
            weak_equation: t.weak_equation,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub max_iters: usize,
    pub step0: f64,
    pub tol: f64,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let s = SolverOptions::default();
        Self {
            max_iters: s.max_iters,
            step0: s.step0,
            tol: s.tol,
        }
    }
}

/// Run settings carried alongside the scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Numerics {
    pub epsilon: Option<f64>,
    pub eps_schedule: Option<Vec<f64>>,
    pub control_intervals: usize,
    pub steps_per_interval: Option<usize>,
    pub step_ratio: f64,
    pub reference_control: Option<ReferenceControl>,
    pub pointing_mode: PointingMode,
    pub thresholds: Thresholds,
    pub solver: SolverOptions,
}

impl Numerics {
    pub fn grid(&self) -> GridPolicy {
        GridPolicy {
            intervals: self.control_intervals,
            steps_per_interval: self.steps_per_interval,
            step_ratio: self.step_ratio,
        }
    }

    /// Single `ε`: the explicit value, else the finest schedule entry.
    pub fn epsilon(&self) -> Result<f64> {
        self.epsilon
            .or_else(|| self.eps_schedule.as_ref().and_then(|s| s.last().copied()))
            .ok_or_else(|| {
                Error::validation("numerics.epsilon", "no epsilon or eps_schedule given")
            })
    }

    /// Schedule: the explicit list, else the single `ε`.
    pub fn schedule(&self) -> Result<Vec<f64>> {
        match (&self.eps_schedule, self.epsilon) {
            (Some(s), _) => Ok(s.clone()),
            (None, Some(e)) => Ok(vec![e]),
            (None, None) => Err(Error::validation(
                "numerics.eps_schedule",
                "no epsilon or eps_schedule given",
            )),
        }
    }

    /// Reference control on the configured grid; the center of `U` when
    /// none is given.
    pub fn reference(&self, scenario: &Scenario) -> Result<ControlSignal> {
        let n = self.control_intervals;
        let values = match &self.reference_control {
            None => vec![scenario.control_set.center(); n],
            Some(ReferenceControl::Constant(v)) => vec![DVector::from_vec(v.clone()); n],
            Some(ReferenceControl::PerInterval(vs)) => {
                if vs.len() != n {
                    return Err(Error::validation(
                        "numerics.reference_control",
                        format!("has {} intervals, control_intervals is {n}", vs.len()),
                    ));
                }
                vs.iter().map(|v| DVector::from_vec(v.clone())).collect()
            }
        };
        let signal = ControlSignal::new(scenario.horizon, values)?;
        if signal.dim() != scenario.control_dim() {
            return Err(Error::validation(
                "numerics.reference_control",
                format!(
                    "has dimension {}, control dimension is {}",
                    signal.dim(),
                    scenario.control_dim()
                ),
            ));
        }
        if !signal.is_admissible(&scenario.control_set) {
            return Err(Error::validation(
                "numerics.reference_control",
                "leaves the control set",
            ));
        }
        Ok(signal)
    }
}

/// A parsed scenario file.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioDocument {
    pub scenario: Scenario,
    pub numerics: Numerics,
}

/// Parses and validates a scenario document. Errors carry the offending
/// field path.
pub fn parse_scenario(text: &str) -> Result<ScenarioDocument> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::validation(
            if path == "." { "<root>".into() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    file.into_document()
}

/// Serializes a document so that [`parse_scenario`] reproduces it.
pub fn emit_scenario(doc: &ScenarioDocument) -> Result<String> {
    let file = ScenarioFile::from_document(doc)?;
    Ok(serde_json::to_string_pretty(&file)? + "\n")
}

fn vector(v: &[f64], path: &str) -> Result<DVector<f64>> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::validation(format!("{path}[{i}]"), "must be finite"));
    }
    Ok(DVector::from_row_slice(v))
}

fn matrix(rows: &[Vec<f64>], path: &str) -> Result<DMatrix<f64>> {
    let ncols = rows.first().map_or(0, |r| r.len());
    if let Some(i) = rows.iter().position(|r| r.len() != ncols) {
        return Err(Error::validation(
            format!("{path}[{i}]"),
            format!("row has {} entries, expected {ncols}", rows[i].len()),
        ));
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    if flat.iter().any(|x| !x.is_finite()) {
        return Err(Error::validation(path, "entries must be finite"));
    }
    Ok(DMatrix::from_row_slice(rows.len(), ncols, &flat))
}

fn scalar_path(initial: f64, motion: Option<&ScalarMotion>) -> ScalarPath {
    match motion {
        Some(ScalarMotion::Linear { rate }) => ScalarPath::linear(initial, *rate),
        _ => ScalarPath::fixed(initial),
    }
}

fn vector_path(
    initial: DVector<f64>,
    motion: Option<&VectorMotion>,
    path: &str,
) -> Result<VectorPath> {
    match motion {
        Some(VectorMotion::Linear { rate }) => {
            if rate.len() != initial.len() {
                return Err(Error::validation(
                    path,
                    format!(
                        "rate has length {}, center has {}",
                        rate.len(),
                        initial.len()
                    ),
                ));
            }
            Ok(VectorPath::linear(initial, vector(rate, path)?))
        }
        _ => Ok(VectorPath::fixed(initial)),
    }
}

fn scalar_motion(p: &ScalarPath) -> Option<ScalarMotion> {
    (p.rate != 0.0).then_some(ScalarMotion::Linear { rate: p.rate })
}

fn vector_motion(p: &VectorPath) -> Option<VectorMotion> {
    (p.rate.iter().any(|r| *r != 0.0)).then(|| VectorMotion::Linear {
        rate: p.rate.iter().copied().collect(),
    })
}

fn to_vec(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl ScenarioFile {
    pub fn into_document(self) -> Result<ScenarioDocument> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::validation(
                "schema_version",
                format!(
                    "unsupported version {} (expected {SCHEMA_VERSION})",
                    self.schema_version
                ),
            ));
        }
        let shape = match &self.set {
            SetBlock::Halfspace {
                normal,
                offset,
                motion,
            } => SetShape::Halfspace {
                normal: vector(normal, "set.normal")?,
                offset: scalar_path(*offset, motion.as_ref().map(|m| &m.offset)),
            },
            SetBlock::Ball {
                center,
                radius,
                motion,
            }
            | SetBlock::BallComplement {
                center,
                radius,
                motion,
            } => {
                let c = vector_path(
                    vector(center, "set.center")?,
                    motion.as_ref().and_then(|m| m.center.as_ref()),
                    "set.motion.center.rate",
                )?;
                let r = scalar_path(*radius, motion.as_ref().and_then(|m| m.radius.as_ref()));
                if matches!(self.set, SetBlock::Ball { .. }) {
                    SetShape::Ball {
                        center: c,
                        radius: r,
                    }
                } else {
                    SetShape::BallComplement {
                        center: c,
                        radius: r,
                    }
                }
            }
            SetBlock::Sublevel {
                function,
                center,
                semi_axes,
                motion,
            } => {
                if function != "ellipsoid" {
                    return Err(Error::validation(
                        "set.function",
                        format!("unknown level function `{function}` (expected ellipsoid)"),
                    ));
                }
                SetShape::Sublevel(LevelFunction::Ellipsoid {
                    center: vector_path(
                        vector(center, "set.center")?,
                        motion.as_ref().map(|m| &m.center),
                        "set.motion.center.rate",
                    )?,
                    semi_axes: vector(semi_axes, "set.semi_axes")?,
                })
            }
        };
        let mut set = MovingSetModel::new(shape, self.horizon)?;
        if let Some(rho) = self.constants.rho {
            set = set.with_prox_radius(rho)?;
        }
        if let Some(gamma) = self.constants.gamma {
            set = set.with_set_lipschitz(gamma)?;
        }
        let dynamics = match &self.dynamics {
            DynamicsBlock::ControlDirect => Dynamics::ControlDirect,
            DynamicsBlock::Affine { a, b, c } => Dynamics::Affine {
                a: matrix(a, "dynamics.a")?,
                b: matrix(b, "dynamics.b")?,
                c: vector(c, "dynamics.c")?,
            },
            DynamicsBlock::Custom { name } => {
                Dynamics::Custom(CustomDynamics::from_name(name).ok_or_else(|| {
                    let known: Vec<_> = CustomDynamics::ALL.iter().map(|d| d.name()).collect();
                    Error::validation(
                        "dynamics.name",
                        format!(
                            "unknown dynamics `{name}` (registered: {})",
                            known.join(", ")
                        ),
                    )
                })?)
            }
        };
        let control_set = ControlSet::new(
            vector(&self.control_set.lo, "control_set.lo")?,
            vector(&self.control_set.hi, "control_set.hi")?,
        )?;
        let cost = match &self.cost {
            CostBlock::Linear { coefficients } => CostModel::Linear {
                coefficients: vector(coefficients, "cost.coefficients")?,
            },
            CostBlock::Quadratic { target } => CostModel::Quadratic {
                target: vector(target, "cost.target")?,
            },
        };
        let scenario = Scenario::new(
            set,
            dynamics,
            control_set,
            cost,
            self.horizon,
            vector(&self.x0, "x0")?,
            Constants {
                beta: self.constants.beta,
                k: self.constants.k,
                sigma: self.constants.sigma,
            },
        )?;
        let numerics = self.numerics.into_numerics()?;
        let doc = ScenarioDocument { scenario, numerics };
        doc.numerics.reference(&doc.scenario)?;
        if let Some(e) = doc.numerics.epsilon {
            doc.scenario.check_epsilon(e)?;
        }
        if let Some(schedule) = &doc.numerics.eps_schedule {
            crate::adjoint::check_schedule(schedule)?;
            for e in schedule {
                doc.scenario.check_epsilon(*e)?;
            }
        }
        Ok(doc)
    }

    pub fn from_document(doc: &ScenarioDocument) -> Result<Self> {
        let s = &doc.scenario;
        let set = match s.set.shape() {
            SetShape::Halfspace { normal, offset } => SetBlock::Halfspace {
                normal: to_vec(normal),
                offset: offset.initial,
                motion: scalar_motion(offset).map(|offset| HalfspaceMotion { offset }),
            },
            SetShape::Ball { center, radius } | SetShape::BallComplement { center, radius } => {
                let (c, r) = (vector_motion(center), scalar_motion(radius));
                let motion = (c.is_some() || r.is_some()).then_some(BallMotion {
                    center: c,
                    radius: r,
                });
                if matches!(s.set.shape(), SetShape::Ball { .. }) {
                    SetBlock::Ball {
                        center: to_vec(&center.initial),
                        radius: radius.initial,
                        motion,
                    }
                } else {
                    SetBlock::BallComplement {
                        center: to_vec(&center.initial),
                        radius: radius.initial,
                        motion,
                    }
                }
            }
            SetShape::Sublevel(g @ LevelFunction::Ellipsoid { center, semi_axes }) => {
                SetBlock::Sublevel {
                    function: g.name().into(),
                    center: to_vec(&center.initial),
                    semi_axes: to_vec(semi_axes),
                    motion: vector_motion(center).map(|center| SublevelMotion { center }),
                }
            }
        };
        let natural = MovingSetModel::new(s.set.shape().clone(), s.horizon)?;
        let dynamics = match &s.dynamics {
            Dynamics::ControlDirect => DynamicsBlock::ControlDirect,
            Dynamics::Affine { a, b, c } => DynamicsBlock::Affine {
                a: to_rows(a),
                b: to_rows(b),
                c: to_vec(c),
            },
            Dynamics::Custom(d) => DynamicsBlock::Custom {
                name: d.name().into(),
            },
        };
        let cost = match &s.cost {
            CostModel::Linear { coefficients } => CostBlock::Linear {
                coefficients: to_vec(coefficients),
            },
            CostModel::Quadratic { target } => CostBlock::Quadratic {
                target: to_vec(target),
            },
        };
        let n = &doc.numerics;
        Ok(Self {
            schema_version: SCHEMA_VERSION,
            set,
            dynamics,
            control_set: ControlSetBlock {
                lo: to_vec(s.control_set.lo()),
                hi: to_vec(s.control_set.hi()),
            },
            cost,
            horizon: s.horizon,
            x0: to_vec(&s.x0),
            constants: ConstantsBlock {
                beta: s.constants.beta,
                k: s.constants.k,
                sigma: s.constants.sigma,
                rho: (s.rho() != natural.prox_radius()).then_some(s.rho()),
                gamma: (s.gamma() != natural.set_lipschitz()).then_some(s.gamma()),
            },
            numerics: NumericsBlock {
                epsilon: n.epsilon,
                eps_schedule: n.eps_schedule.clone(),
                control_intervals: n.control_intervals,
                steps_per_interval: n.steps_per_interval,
                step_ratio: n.step_ratio,
                reference_control: n.reference_control.clone(),
                pointing_mode: n.pointing_mode,
                thresholds: ThresholdsBlock {
                    transversality: n.thresholds.transversality,
                    maximality: n.thresholds.maximality,
                    normal_component: n.thresholds.normal_component,
                    weak_equation: n.thresholds.weak_equation,
                },
                solver: SolverBlock {
                    max_iters: n.solver.max_iters,
                    step0: n.solver.step0,
                    tol: n.solver.tol,
                },
            },
        })
    }
}

impl NumericsBlock {
    fn into_numerics(self) -> Result<Numerics> {
        if self.control_intervals == 0 {
            return Err(Error::validation(
                "numerics.control_intervals",
                "must be at least 1",
            ));
        }
        if self.steps_per_interval == Some(0) {
            return Err(Error::validation(
                "numerics.steps_per_interval",
                "must be at least 1",
            ));
        }
        if !(self.step_ratio > 0.0 && self.step_ratio.is_finite()) {
            return Err(Error::validation("numerics.step_ratio", "must be positive"));
        }
        if self.epsilon.is_none() && self.eps_schedule.is_none() {
            return Err(Error::validation(
                "numerics",
                "one of epsilon or eps_schedule is required",
            ));
        }
        let t = &self.thresholds;
        for (name, v) in [
            ("transversality", t.transversality),
            ("maximality", t.maximality),
            ("normal_component", t.normal_component),
            ("weak_equation", t.weak_equation),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::validation(
                    format!("numerics.thresholds.{name}"),
                    "must be nonnegative",
                ));
            }
        }
        let s = &self.solver;
        if !(s.step0 > 0.0 && s.tol >= 0.0) {
            return Err(Error::validation(
                "numerics.solver",
                "step0 must be positive and tol nonnegative",
            ));
        }
        Ok(Numerics {
            epsilon: self.epsilon,
            eps_schedule: self.eps_schedule,
            control_intervals: self.control_intervals,
            steps_per_interval: self.steps_per_interval,
            step_ratio: self.step_ratio,
            reference_control: self.reference_control,
            pointing_mode: self.pointing_mode,
            thresholds: Thresholds {
                transversality: t.transversality,
                maximality: t.maximality,
                normal_component: t.normal_component,
                weak_equation: t.weak_equation,
            },
            solver: SolverOptions {
                max_iters: s.max_iters,
                step0: s.step0,
                tol: s.tol,
            },
        })
    }
}
