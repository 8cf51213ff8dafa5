use thiserror::Error;

use crate::gw_tree::NodeId;

/// Errors raised by tree construction, rotor dynamics and the solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid offspring distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid rotor matrix: {0}")]
    InvalidMatrix(String),
    #[error("offspring count {count} is outside the rotor matrix support 1..={k_max}")]
    OutOfSupport { count: u32, k_max: u32 },
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("node {0} has already been expanded")]
    AlreadyExpanded(NodeId),
    #[error("rotor at node {0} is unset")]
    RotorUnset(NodeId),
    #[error("node {0} has not been expanded")]
    NotExpanded(NodeId),
    #[error("the sink is absorbing; no step can start there")]
    StepFromSink,
    #[error("illegal move at {0}: not an occupied interior vertex")]
    IllegalMove(NodeId),
    #[error("invalid sink set: {0}")]
    InvalidSink(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("walk exceeded the step budget of {0}")]
    StepBudget(u64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// True for errors caused by bad input rather than misuse of the API.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidDistribution(_)
                | Error::InvalidMatrix(_)
                | Error::OutOfSupport { .. }
                | Error::InvalidSink(_)
                | Error::InvalidPath(_)
                | Error::InvalidArgument(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
