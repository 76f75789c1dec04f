//! Maximum-confidence discrimination of quantum states and quantum sequences.
//!
//! The crate computes maximum confidences, solves the primal and dual programs
//! for the best success probability among maximum-confidence measurements, and
//! checks the tensor-product factorization results numerically.
//!
//! Every numeric routine is generic over [`Real`] (`f32` or `f64`); the type
//! aliases at the crate root fix `f64`.

pub mod confidence;
pub mod ensemble;
pub mod error;
pub mod fixtures;
pub mod hermitian;
pub mod io;
pub mod matrix;
pub mod optimizer;
pub mod oracle;
pub mod scalar;
pub mod sequence;

pub use confidence::{
    baseline_mcm_measurement, confidence, confidence_profile, in_dual_set, is_mcm, lambda_over_n,
    max_confidence, ConfidenceProfile, MaxConfidenceResult, McmMembershipReport, Measurement,
    MeasurementViolation, Outcome,
};
pub use ensemble::{random_ensemble, tensor, Ensemble, SequenceEnsemble, SequenceIndex, Violation};
pub use error::{Error, Result};
pub use hermitian::{
    eig_hermitian, is_psd, kernel_projector, kron, kron_all, pinv_sqrt, plus_minus_decomposition,
    support_projector, EigenSystem, HermitianOperator, Parity, Projector,
};
pub use io::{Certificate, FactorizationDocument};
pub use matrix::CMatrix;
pub use optimizer::{certify, certify_pair, OptimizationCertificate, PairReport, SolverOptions, Tolerances};
pub use scalar::{Cx, Real};
pub use sequence::{FactorizationReport, Mode};

pub type Matrix = CMatrix<f64>;
pub type Operator = HermitianOperator<f64>;
pub type Proj = Projector<f64>;
pub type Ens = Ensemble<f64>;
pub type SeqEns = SequenceEnsemble<f64>;
pub type Meas = Measurement<f64>;
