//! Backward adjoint of the regularized problem and the multiplier objects
//! extracted from it.

mod limit;
mod multipliers;
mod path;

pub use limit::{
    check_schedule, limit_study, normal_component_sup, ConfirmedJump, LimitMember, LimitStudy,
};
pub use multipliers::{
    detect_jumps, extract_multipliers, jump_window, Jump, MeasureAtom, MultiplierReport,
    WindowSpec, MIN_JUMP,
};
pub use path::{integrate_adjoint, AdjointPath, StepTerms};
