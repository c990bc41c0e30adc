use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("inner jet has a nonzero constant term (component {component})")]
    NonzeroConstantTerm { component: usize },
    #[error("singular linearization (smallest singular value {sigma_min:e})")]
    SingularLinearization { sigma_min: f64 },
    #[error("empty matrix")]
    EmptyMatrix,
    #[error("odd row count {0}")]
    OddRowCount(usize),
    #[error("not an immersion point: real rank {rank} < {expected}")]
    NotImmersion { rank: usize, expected: usize },
    #[error("empty box")]
    EmptyBox,
    #[error("refinement diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("refinement converged to a nonsingular point (smallest singular value {residual:e})")]
    ConvergedNonsingular { residual: f64 },
    #[error("expected CR order {expected}, found {found}")]
    OrderMismatch { expected: usize, found: usize },
    #[error("ill-conditioned tangent decomposition (margin {margin:e})")]
    IllConditioned { margin: f64 },
    #[error("normalization failure: forbidden term {term} has magnitude {magnitude:e}")]
    NotNormalized { term: String, magnitude: f64 },
    #[error("rank {found} is below the required {required}")]
    RankTooLow { found: usize, required: usize },
    #[error("expected Coffman class {expected}, found {found}")]
    ClassMismatch { expected: usize, found: usize },
    #[error("constraint violated: {what} (residual {residual:e})")]
    ConstraintViolation { what: &'static str, residual: f64 },
    #[error("dimension range violated for (m, n) = ({m}, {n}): {reason}")]
    DimensionRange { m: usize, n: usize, reason: &'static str },
    #[error("epsilon {epsilon:e} is below ten times the rank tolerance")]
    EpsilonTooSmall { epsilon: f64 },
    #[error("target rank {0} cannot be reached")]
    UnreachableTarget(usize),
    #[error("precondition minor vanishes: {which} (|det| = {value:e})")]
    MinorVanishes { which: &'static str, value: f64 },
    #[error("linear program is unbounded")]
    LpUnbounded,
    #[error("linear program is infeasible")]
    LpInfeasible,
    #[error("rank-deficient least-squares system (rank {rank} of {cols})")]
    RankDeficientFit { rank: usize, cols: usize },
    #[error("monomial basis of {terms} terms exceeds the limit of {limit}")]
    BasisTooLarge { terms: usize, limit: usize },
    #[error("rank decision is indeterminate (singular value {sigma:e} within 10x of threshold {threshold:e})")]
    Indeterminate { sigma: f64, threshold: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}
