use thiserror::Error;

use crate::ensemble::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("operator is not Hermitian (max |A - A^dagger| = {defect:e})")]
    NotHermitian { defect: f64 },

    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },

    #[error("rank {rank} is outside 1..={dim}")]
    BadRank { rank: usize, dim: usize },

    #[error("invalid ensemble: {}", display_violations(.0))]
    InvalidEnsemble(Vec<Violation>),

    #[error("outcome index {index} out of range (n = {n})")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("confidence undefined: Tr(rho0 M_x) = {denominator:e} is not positive")]
    UndefinedConfidence { denominator: f64 },

    #[error("solver stalled after {iterations} Newton steps (gap bound {gap:e})")]
    SolverStall { iterations: usize, gap: f64 },

    #[error("joint dimension {dim} exceeds the direct-mode cap {cap}")]
    DimCapExceeded { dim: usize, cap: usize },

    #[error("operator is not in the maximum-confidence set (residual {residual:e})")]
    NotInMembershipSet { residual: f64 },

    #[error("dual part {step} is not a converged, support-checked solution")]
    PartNotConverged { step: usize },

    #[error("oracle limited to dim <= 4 and n <= 3 (got dim {dim}, n {n})")]
    ScaleCapExceeded { dim: usize, n: usize },

    #[error("{0} is out of scope")]
    OutOfScope(&'static str),

    #[error("parse error: {context}")]
    Parse { context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn display_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
