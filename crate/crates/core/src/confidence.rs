//! Confidences, maximum confidences and maximum-confidence measurements.
//!
//! `C_x` is computed as the top eigenvalue of `S η_x ρ_x S` with `S` the
//! inverse square root of `ρ₀` on its support. The kernel projector of
//! `C_x ρ₀ − η_x ρ_x` then characterizes both the set of operators that attain
//! `C_x` and its dual cone.

use std::fmt;

use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::hermitian::{
    eig_hermitian, is_psd, pinv_sqrt, support_projector, HermitianOperator, Projector, RANK_TOL,
};
use crate::scalar::{count, lit, to_f64, Real};

/// Completeness and positivity tolerance for measurements.
pub const MEASUREMENT_TOL: f64 = 1e-9;
/// Smallest `Tr(ρ₀ M_x)` for which a confidence is reported.
pub const EPS_DENOMINATOR: f64 = 1e-12;

/// Outcome label of a measurement operator.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Inconclusive,
    Conclusive(usize),
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Inconclusive => write!(f, "M_?"),
            Outcome::Conclusive(i) => write!(f, "M_{}", i + 1),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasurementViolation {
    Empty,
    DimMismatch { outcome: Outcome, expected: usize, found: usize },
    NotPsd { outcome: Outcome, min_eigenvalue: f64 },
    Completeness { defect: f64 },
}

impl fmt::Display for MeasurementViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasurementViolation::Empty => write!(f, "measurement has no conclusive outcomes"),
            MeasurementViolation::DimMismatch { outcome, expected, found } => {
                write!(f, "{outcome}: dimension {found}, expected {expected}")
            }
            MeasurementViolation::NotPsd { outcome, min_eigenvalue } => {
                write!(f, "{outcome} not positive semidefinite (min eigenvalue {min_eigenvalue:e})")
            }
            MeasurementViolation::Completeness { defect } => {
                write!(f, "completeness: max |M_? + sum M_i - I| = {defect:e}")
            }
        }
    }
}

/// Measurement `{M_?} ∪ {M_i}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement<T> {
    inconclusive: HermitianOperator<T>,
    outcomes: Vec<HermitianOperator<T>>,
}

impl<T: Real> Measurement<T> {
    pub fn new(inconclusive: HermitianOperator<T>, outcomes: Vec<HermitianOperator<T>>) -> Self {
        Self {
            inconclusive,
            outcomes,
        }
    }

    /// Completes conclusive operators with `M_? = I − Σ M_i`.
    pub fn from_outcomes(outcomes: Vec<HermitianOperator<T>>) -> Self {
        let dim = outcomes.first().map_or(0, |m| m.dim());
        let mut rest = HermitianOperator::identity(dim);
        for m in &outcomes {
            rest = rest.sub(m);
        }
        Self::new(rest, outcomes)
    }

    pub fn dim(&self) -> usize {
        self.inconclusive.dim()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn inconclusive(&self) -> &HermitianOperator<T> {
        &self.inconclusive
    }

    pub fn outcomes(&self) -> &[HermitianOperator<T>] {
        &self.outcomes
    }

    pub fn outcome(&self, i: usize) -> &HermitianOperator<T> {
        &self.outcomes[i]
    }

    /// `max |M_? + Σ M_i − I|`.
    pub fn completeness_defect(&self) -> T {
        let mut acc = self.inconclusive.sub(&HermitianOperator::identity(self.dim()));
        for m in &self.outcomes {
            acc = acc.add(m);
        }
        acc.max_abs()
    }

    pub fn validate_with(&self, tol: T) -> Vec<MeasurementViolation> {
        let mut out = Vec::new();
        if self.outcomes.is_empty() {
            out.push(MeasurementViolation::Empty);
        }
        let dim = self.dim();
        let labelled = std::iter::once((Outcome::Inconclusive, &self.inconclusive)).chain(
            self.outcomes
                .iter()
                .enumerate()
                .map(|(i, m)| (Outcome::Conclusive(i), m)),
        );
        let mut dims_ok = true;
        for (label, m) in labelled {
            if m.dim() != dim {
                dims_ok = false;
                out.push(MeasurementViolation::DimMismatch {
                    outcome: label,
                    expected: dim,
                    found: m.dim(),
                });
                continue;
            }
            let min = m.min_eigenvalue();
            if min < -tol {
                out.push(MeasurementViolation::NotPsd {
                    outcome: label,
                    min_eigenvalue: to_f64(min),
                });
            }
        }
        if dims_ok {
            let defect = self.completeness_defect();
            if defect > tol {
                out.push(MeasurementViolation::Completeness {
                    defect: to_f64(defect),
                });
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<MeasurementViolation> {
        self.validate_with(lit(MEASUREMENT_TOL))
    }

    /// `Σ_i η_i Tr(ρ_i M_i)`.
    pub fn success_probability(&self, e: &Ensemble<T>) -> T {
        self.outcomes
            .iter()
            .enumerate()
            .map(|(i, m)| e.prior(i) * e.state(i).inner(m))
            .sum()
    }
}

/// Maximum confidence for one outcome together with its projector pair and a
/// witness operator attaining it.
#[derive(Clone, Debug)]
pub struct MaxConfidenceResult<T> {
    /// `C_x` clamped to `[0, 1]` for reporting.
    pub value: T,
    /// Unclamped top eigenvalue; used in every certificate.
    pub raw_value: T,
    /// Support projector `Π_x` of `C_x ρ₀ − η_x ρ_x`.
    pub pi_support: Projector<T>,
    /// Kernel projector `Π_x^⊥`.
    pub pi_kernel: Projector<T>,
    /// `E* = S|w⟩⟨w|S` with `Tr(ρ₀ E*) = 1` and `η_x Tr(ρ_x E*) = C_x`.
    pub witness: HermitianOperator<T>,
}

/// Shared spectral data of an ensemble plus the per-outcome results.
#[derive(Clone, Debug)]
pub struct ConfidenceProfile<T> {
    pub average: HermitianOperator<T>,
    pub pinv_sqrt: HermitianOperator<T>,
    /// `Π(E)`, the support of `ρ₀`.
    pub support: Projector<T>,
    pub outcomes: Vec<MaxConfidenceResult<T>>,
}

impl<T: Real> ConfidenceProfile<T> {
    /// `C_x ρ₀ − η_x ρ_x` with the raw `C_x`.
    pub fn gap_operator(&self, e: &Ensemble<T>, x: usize) -> HermitianOperator<T> {
        self.average
            .axpby(self.outcomes[x].raw_value, e.state(x), -e.prior(x))
    }

    pub fn values(&self) -> Vec<T> {
        self.outcomes.iter().map(|r| r.value).collect()
    }
}

fn outcome_result<T: Real>(
    e: &Ensemble<T>,
    x: usize,
    average: &HermitianOperator<T>,
    s: &HermitianOperator<T>,
    rank_tol: T,
) -> Result<MaxConfidenceResult<T>> {
    let whitened = e.weighted_state(x).sandwich(s);
    let es = eig_hermitian(&whitened);
    let top = es.values.len() - 1;
    let raw = es.values[top];
    // Highest-index eigenvector of the ascending spectrum; any top vector works.
    let w = es.vector(top);
    let witness = HermitianOperator::ket_bra(&s.matrix().mul_vec(&w));
    let gap = average.axpby(raw, e.state(x), -e.prior(x));
    let pi_support = support_projector(&gap, rank_tol)?;
    let pi_kernel = pi_support.complement();
    Ok(MaxConfidenceResult {
        value: raw.max(T::zero()).min(T::one()),
        raw_value: raw,
        pi_support,
        pi_kernel,
        witness,
    })
}

/// Spectral analysis of all outcomes with an explicit rank tolerance.
pub fn confidence_profile_with<T: Real>(e: &Ensemble<T>, rank_tol: T) -> Result<ConfidenceProfile<T>> {
    e.ensure_valid()?;
    let average = e.average_state();
    let s = pinv_sqrt(&average, rank_tol)?;
    let support = support_projector(&average, rank_tol)?;
    let outcomes = (0..e.len())
        .map(|x| outcome_result(e, x, &average, &s, rank_tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(ConfidenceProfile {
        average,
        pinv_sqrt: s,
        support,
        outcomes,
    })
}

pub fn confidence_profile<T: Real>(e: &Ensemble<T>) -> Result<ConfidenceProfile<T>> {
    confidence_profile_with(e, lit(RANK_TOL))
}

/// `C_x(E)` with projectors and witness.
pub fn max_confidence<T: Real>(e: &Ensemble<T>, x: usize) -> Result<MaxConfidenceResult<T>> {
    if x >= e.len() {
        return Err(Error::IndexOutOfRange { index: x, n: e.len() });
    }
    e.ensure_valid()?;
    let rank_tol = lit(RANK_TOL);
    let average = e.average_state();
    let s = pinv_sqrt(&average, rank_tol)?;
    outcome_result(e, x, &average, &s, rank_tol)
}

/// Confidence `η_x Tr(ρ_x M_x) / Tr(ρ₀ M_x)` of a measurement.
pub fn confidence<T: Real>(e: &Ensemble<T>, m: &Measurement<T>, x: usize) -> Result<T> {
    if x >= e.len() || x >= m.len() {
        return Err(Error::IndexOutOfRange {
            index: x,
            n: e.len().min(m.len()),
        });
    }
    let denom = e.average_state().inner(m.outcome(x));
    if denom <= lit(EPS_DENOMINATOR) {
        return Err(Error::UndefinedConfidence {
            denominator: to_f64(denom),
        });
    }
    Ok(e.prior(x) * e.state(x).inner(m.outcome(x)) / denom)
}

/// Measurement `M_i = Π E_i Π / Σ_j Tr(Π E_j Π)` built from the witnesses,
/// with `Π` the support of `ρ₀`.
pub fn baseline_mcm_measurement<T: Real>(e: &Ensemble<T>) -> Result<Measurement<T>> {
    let profile = confidence_profile(e)?;
    Ok(baseline_from_profile(&profile))
}

pub fn baseline_from_profile<T: Real>(profile: &ConfidenceProfile<T>) -> Measurement<T> {
    let projected: Vec<_> = profile
        .outcomes
        .iter()
        .map(|r| r.witness.sandwich(&profile.support.operator))
        .collect();
    let total: T = projected.iter().map(|p| p.trace()).sum();
    let outcomes = projected.iter().map(|p| p.scale(T::one() / total)).collect();
    Measurement::from_outcomes(outcomes)
}

/// Per-outcome residuals `r_i = Tr[(C_i ρ₀ − η_i ρ_i) M_i]`.
#[derive(Clone, Debug)]
pub struct McmMembershipReport<T> {
    pub residuals: Vec<T>,
    pub passes: Vec<bool>,
    pub tol: T,
}

impl<T: Real> McmMembershipReport<T> {
    pub fn all_pass(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |m, &r| m.max(r.abs()))
    }
}

pub fn is_mcm_with_profile<T: Real>(
    e: &Ensemble<T>,
    profile: &ConfidenceProfile<T>,
    m: &Measurement<T>,
    tol: T,
) -> McmMembershipReport<T> {
    let residuals: Vec<T> = m
        .outcomes()
        .iter()
        .enumerate()
        .map(|(i, mi)| profile.gap_operator(e, i).inner(mi))
        .collect();
    let passes = residuals.iter().map(|&r| r <= tol).collect();
    McmMembershipReport {
        residuals,
        passes,
        tol,
    }
}

/// Whether every conclusive outcome of `m` attains its maximum confidence.
pub fn is_mcm<T: Real>(e: &Ensemble<T>, m: &Measurement<T>, tol: T) -> Result<McmMembershipReport<T>> {
    if m.len() != e.len() || m.dim() != e.dim() {
        return Err(Error::DimMismatch {
            expected: e.len(),
            found: m.len(),
        });
    }
    let profile = confidence_profile(e)?;
    Ok(is_mcm_with_profile(e, &profile, m, tol))
}

/// Membership of `A` in the dual cone of outcome `x`: `Π_x^⊥ A Π_x^⊥ ⪰ 0`.
pub fn in_dual_set<T: Real>(e: &Ensemble<T>, x: usize, a: &HermitianOperator<T>, tol: T) -> Result<bool> {
    let r = max_confidence(e, x)?;
    Ok(is_psd(&a.sandwich(&r.pi_kernel.operator), tol))
}

/// Smallest nonzero eigenvalue of `ρ₀` divided by `n`.
pub fn lambda_over_n<T: Real>(e: &Ensemble<T>) -> T {
    let es = eig_hermitian(&e.average_state());
    let cut = es.rank_cut(lit(RANK_TOL));
    let lambda = es
        .values
        .iter()
        .copied()
        .find(|&l| l > cut)
        .unwrap_or_else(T::zero);
    lambda / count(e.len())
}
