use thiserror::Error;

use crate::validate::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("invalid criterion: {0}")]
    InvalidCriterion(String),

    #[error("invalid piece: {0}")]
    InvalidPiece(String),

    #[error("job {0} has no piece in the schedule")]
    UnknownJob(usize),

    #[error("incomplete schedule: job {job} is processed for {scheduled} instead of {required}")]
    IncompleteSchedule { job: usize, scheduled: String, required: String },

    #[error("malformed linear program: {0}")]
    MalformedLp(String),

    #[error("jobs {first} and {second} are not agreeable: {reason}")]
    NotAgreeable { first: usize, second: usize, reason: String },

    #[error("unsupported criterion: {0}")]
    UnsupportedCriterion(String),

    #[error("LP solution violates the flow-shop constraints: {0}")]
    InfeasibleLpSolution(String),

    #[error("input schedule is infeasible ({} violation(s))", .0.violations().len())]
    InfeasibleInput(ValidationReport),

    #[error("order hypothesis violated: {0}")]
    OrderHypothesisViolated(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),

    #[error("release dates differ; the closed form requires equal releases")]
    ReleasesPresent,

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("transformation stalled: {0}")]
    TransformStalled(String),

    #[error("internal invariant broken: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
