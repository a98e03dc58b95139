use thiserror::Error;

/// Errors returned by the model, sampling and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("unknown object id {0}")]
    UnknownObject(u64),

    #[error("object {0} does not carry a sensor")]
    NotASensor(u64),

    #[error("no eligible reference vehicles for this statistic")]
    EmptyEligibleSet,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
