//! Error types shared across the library.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("p = {0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: divisor is zero at its precision floor")]
    PrecisionExhausted,
    #[error("cannot parse rational: {0:?}")]
    RationalParse(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinAlgError {
    #[error("inconsistent linear system")]
    InconsistentSystem,
    #[error("precision exhausted during elimination at pivot {0}")]
    PrecisionExhausted(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("operator is not semisimple at zero: ker(f) meets im(f)")]
    NotSemisimpleAtZero,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModuleError {
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("module invariant violated: {0}")]
    Invalid(String),
    #[error("flag is not phi- or N-stable at step {0}")]
    FlagNotStable(usize),
    #[error("Frobenius eigenvalue on a graded piece is not rational: {0}")]
    EigenvalueNotRational(String),
    #[error("phi is not scalar on this module")]
    PhiNotScalar,
    #[error("subspace is not phi- and N-stable")]
    NotPhiNStable,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CohomologyError {
    #[error("cup product degree overflow: {0} + {1} > 2")]
    DegreeOverflow(usize, usize),
    #[error("sequence is not strictly exact: {0}")]
    NotStrictExact(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Rank1Error {
    #[error("character outside the two semistable rank-1 families: {0}")]
    UnsupportedCharacter(String),
    #[error("class does not live over the expected rank-1 model: {0}")]
    WrongParent(String),
    #[error("target H^2 vanishes: need n - k >= 1, got n = {0}, k = {1}")]
    TargetH2Vanishes(u32, u32),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RobbaError {
    #[error("window exhausted: {0}")]
    WindowExhausted(String),
    #[error("singular diagonal in triangular solve at degree {0}")]
    SingularDiagonal(i64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("condition C4 violated: {0}")]
    C4Violation(String),
    #[error("local image has wrong rank: expected {expected}, got {got}")]
    RankDefect { expected: usize, got: usize },
    #[error("rho_c is not invertible: the y*-block of the local image is singular")]
    RhoCNotInvertible,
    #[error("global subspace is inconsistent with the local image: {0}")]
    GlobalLocalMismatch(String),
    #[error("the two closed forms of the interpolation factor disagree: {0} vs {1}")]
    FormsDisagree(String, String),
    #[error("module does not match the two-dimensional semistable shape: {0}")]
    ShapeMismatch(String),
    #[error("filtration line equals the monodromy image line; the slope is undefined")]
    LineIsD1,
    #[error("W_1 = 0 but W_0 != 0: run the pipeline on the dualized input")]
    DualizeFirst,
    #[error("condition failed: {0}")]
    ConditionFailed(String),
    #[error(transparent)]
    Module(#[from] ModuleError),
    #[error(transparent)]
    Cohomology(#[from] CohomologyError),
    #[error(transparent)]
    Rank1(#[from] Rank1Error),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
}
