use thiserror::Error;

use crate::dag::{ArcId, NodeId};
use crate::two_layer::ConditionViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("graph contains a cycle")]
    CycleDetected,
    #[error("node {0} is the source")]
    NodeIsSource(NodeId),
    #[error("node {0} does not exist")]
    UnknownNode(NodeId),
    #[error("arc {0} does not exist")]
    UnknownArc(ArcId),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("duplicate arc id {0}")]
    DuplicateArcId(ArcId),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("vectors do not form a basis of the leading layers")]
    NotABasis,
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("search space exceeds the budget of {0} evaluations")]
    BudgetExceeded(u64),
    #[error("arcs do not form a path")]
    NotAPath,
    #[error("invalid fan-extension: {0}")]
    InvalidFanExtension(String),
    #[error("field of size {q} is too small, need more than {needed}")]
    FieldTooSmall { q: u32, needed: usize },
    #[error("height function violates the two-layer conditions: {0}")]
    ConditionsViolated(ConditionViolation),
    #[error("expected {expected} layers, got {got}")]
    WrongLayerCount { expected: usize, got: usize },
    #[error("demand is not proper at node {0}")]
    ImproperDemand(NodeId),
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("the source takes no protocol step")]
    SourceHasNoStep,
    #[error("assignment leaves clause {0} unsatisfied")]
    AssignmentNotSatisfying(usize),
    #[error("invalid formula: {0}")]
    InvalidFormula(String),
    #[error("edge {0}-{1} is not covered")]
    NotACover(usize, usize),
    #[error("no performance value for receiver {0}")]
    MissingPerformance(NodeId),
    #[error("code on arc {0} is not in the span of the codes entering its tail")]
    LinearCombinationViolated(ArcId),
    #[error("code is not feasible: {0}")]
    Infeasible(String),
}
