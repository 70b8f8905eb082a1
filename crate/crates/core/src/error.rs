use alloc::string::String;
use alloc::vec::Vec;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown state-action pair (state {state}, action {action})")]
    UnknownStateAction { state: usize, action: usize },
    #[error("index {index} out of range for {what} of size {len}")]
    IndexOutOfRange { what: &'static str, index: usize, len: usize },
    #[error("model failed validation with {} violation(s)", .0.len())]
    InvalidModel(Vec<Violation>),
    #[error("{count} deterministic policies exceed the enumeration cap {cap}")]
    CapExceeded { count: u128, cap: u64 },
    #[error("model is not weakly communicating")]
    NotWeaklyCommunicating,
    #[error("step size {alpha} must lie in (0, {bound})")]
    InvalidAlpha { alpha: f64, bound: f64 },
    #[error("singular linear system: {0}")]
    SingularSystem(String),
    #[error("option {option} started in state {state} did not terminate within {cap} steps")]
    TerminationCapExceeded { option: usize, state: usize, cap: u64 },
    #[error("option {option} puts mass on action {action} in state {state} but the behavior policy does not")]
    AbsContinuityViolation { state: usize, option: usize, action: usize },
    #[error("behavior probability {prob} of action {action} in state {state} is below epsilon {epsilon}")]
    BehaviorBelowEpsilon { state: usize, action: usize, prob: f64, epsilon: f64 },
    #[error("empty update set")]
    EmptyUpdateSet,
    #[error("trajectory became non-finite at t = {time}")]
    NonFiniteState { time: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("policy row for state {state} is not a distribution over available actions")]
    InvalidPolicy { state: usize },
    #[error("oracle member fails verification: {0}")]
    InvalidOracle(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
