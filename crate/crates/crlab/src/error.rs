use thiserror::Error;

/// Errors raised by every module of the crate.
///
/// Variants are grouped by the exit code the command-line driver maps them to:
/// validation problems exit with 1, numerical failures with 2.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-conforming mesh: {0}")]
    NonConforming(String),
    #[error("degenerate triangle {0}")]
    DegenerateTriangle(usize),
    #[error("triangle {0} is oriented clockwise")]
    BadOrientation(usize),
    #[error("invalid fan angles: {0}")]
    InvalidAngles(String),
    #[error("eta = {eta} is not below eta0 = {eta0}")]
    EtaTooLarge { eta: f64, eta0: f64 },
    #[error("vertex {0} is eta-critical but matches none of the four classes")]
    UnclassifiableCritical(usize),
    #[error("apex {apex} of critical vertex {vertex} is itself eta-critical")]
    ApexCritical { vertex: usize, apex: usize },
    #[error("mesh has no interior vertex")]
    NoInnerVertex,
    #[error("extension sequence stalls: mesh is not edge-connected")]
    NotExhaustive,
    #[error("degree {k} does not have the parity required by this space")]
    ParityMismatch { k: usize },
    #[error("unsupported polynomial degree {0}")]
    InvalidDegree(usize),
    #[error("point lies outside the support")]
    PointOutside,
    #[error("weighted seminorm undefined: endpoint value {0:e} is not zero")]
    WeightedSeminormUndefined(f64),
    #[error("traces do not match at a vertex (mismatch {0:e})")]
    VertexMismatch(f64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("velocity space is empty")]
    EmptyVelocitySpace,
    #[error("pressure space is empty after removing constants")]
    EmptyPressureSpace,
    #[error("operator is not symmetric positive definite: {0}")]
    NotSpd(String),
    #[error("singular operator: {0}")]
    SingularOperator(String),
    #[error("singular interior solve on triangle {0}")]
    SingularInteriorSolve(usize),
    #[error("fan system is singular (|det| = {0:e})")]
    FanSingular(f64),
    #[error("constraint infeasible: {0}")]
    ConstraintInfeasible(String),
    #[error("divergence constraint infeasible (inf-sup constant vanishes)")]
    InfeasibleConstraint,
    #[error("trianglewise means cannot be matched by interior-edge bubbles (residual {0:e})")]
    UnderdeterminedMeans(f64),
    #[error("eigensolver failed: {0}")]
    Eigen(String),
}

impl Error {
    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NotSpd(_)
            | Error::SingularOperator(_)
            | Error::SingularInteriorSolve(_)
            | Error::FanSingular(_)
            | Error::ConstraintInfeasible(_)
            | Error::InfeasibleConstraint
            | Error::UnderdeterminedMeans(_)
            | Error::Eigen(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
