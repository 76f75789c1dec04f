//! Quantum sequences: factorization of maximum confidences and of the optimal
//! success probability over tensor products of ensembles.
//!
//! Joint outcomes are flattened row-major with step 1 most significant, the
//! same packing as [`crate::hermitian::kron`].

use std::fmt;
use std::str::FromStr;

use crate::confidence::{confidence_profile, max_confidence, Measurement};
use crate::ensemble::{Ensemble, SequenceEnsemble};
use crate::error::{Error, Result};
use crate::hermitian::{kron_all, plus_minus_decomposition, support_projector, HermitianOperator, Parity, RANK_TOL};
use crate::matrix::CMatrix;
use crate::optimizer::{certify, check_dual_support, DualSolution, SolverOptions, Tolerances};
use crate::scalar::{lit, to_f64, Real};

pub const DIRECT_DIM_CAP: usize = 16;
pub const SEQUENCE_TOL: f64 = 1e-5;
/// Stall threshold for the per-step solves in product mode.
pub const STEP_TOL: f64 = 1e-8;
/// Residual tolerance of the membership pre-check in [`check_lemma_ppee`].
pub const PPEE_MEMBERSHIP_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Product,
    Direct,
    Both,
}

impl Mode {
    pub fn product(self) -> bool {
        matches!(self, Mode::Product | Mode::Both)
    }

    pub fn direct(self) -> bool {
        matches!(self, Mode::Direct | Mode::Both)
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "product" => Ok(Mode::Product),
            "direct" => Ok(Mode::Direct),
            "both" => Ok(Mode::Both),
            other => Err(format!("unknown mode {other:?} (expected product, direct or both)")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Product => "product",
            Mode::Direct => "direct",
            Mode::Both => "both",
        })
    }
}

/// Per-step values, their product, and the joint value when computed directly.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorizationReport<T> {
    pub mode: Mode,
    pub steps: Vec<T>,
    pub product: Option<T>,
    pub direct: Option<T>,
    /// Whether every certificate involved passed; always true for confidences.
    pub certified: bool,
}

impl<T: Real> FactorizationReport<T> {
    /// `|direct − product|` when both are present.
    pub fn deviation(&self) -> Option<T> {
        Some((self.direct? - self.product?).abs())
    }

    pub fn within(&self, tol: T) -> bool {
        self.deviation().is_none_or(|d| d <= tol)
    }
}

fn check_cap<T: Real>(seq: &SequenceEnsemble<T>, cap: usize) -> Result<()> {
    let dim = seq.joint_dim();
    if dim > cap {
        return Err(Error::DimCapExceeded { dim, cap });
    }
    Ok(())
}

fn check_index<T: Real>(seq: &SequenceEnsemble<T>, x: &[usize]) -> Result<usize> {
    if x.len() != seq.len() {
        return Err(Error::DimMismatch {
            expected: seq.len(),
            found: x.len(),
        });
    }
    seq.flatten_index(x)
}

/// `C_x⃗` for a joint outcome, as a product of per-step values and/or directly
/// on the flattened joint ensemble.
pub fn sequence_max_confidence<T: Real>(
    seq: &SequenceEnsemble<T>,
    x: &[usize],
    mode: Mode,
    dim_cap: usize,
) -> Result<FactorizationReport<T>> {
    let flat = check_index(seq, x)?;
    if mode.direct() {
        check_cap(seq, dim_cap)?;
    }
    let steps = seq
        .steps()
        .iter()
        .zip(x)
        .map(|(e, &xl)| max_confidence(e, xl).map(|r| r.raw_value))
        .collect::<Result<Vec<T>>>()?;
    let product = mode.product().then(|| steps.iter().copied().product());
    let direct = if mode.direct() {
        Some(max_confidence(&seq.joint()?, flat)?.raw_value)
    } else {
        None
    };
    Ok(FactorizationReport {
        mode,
        steps,
        product,
        direct,
        certified: true,
    })
}

/// Measurement on the joint space with outcomes in flattened order.
#[derive(Clone, Debug)]
pub struct SequenceMeasurement<T> {
    pub shape: Vec<usize>,
    pub joint: Measurement<T>,
}

impl<T: Real> SequenceMeasurement<T> {
    pub fn outcome(&self, idx: &[usize]) -> &HermitianOperator<T> {
        let flat = idx.iter().zip(&self.shape).fold(0, |acc, (&i, &n)| acc * n + i);
        self.joint.outcome(flat)
    }

    pub fn inconclusive(&self) -> &HermitianOperator<T> {
        self.joint.inconclusive()
    }
}

/// `M_c⃗ = ⊗_l M^l_{c_l}` and `M_? = I − Σ M_c⃗`.
pub fn product_measurement<T: Real>(parts: &[Measurement<T>]) -> Result<SequenceMeasurement<T>> {
    if parts.is_empty() {
        return Err(Error::DimMismatch {
            expected: 1,
            found: 0,
        });
    }
    let shape: Vec<usize> = parts.iter().map(|m| m.len()).collect();
    let total: usize = shape.iter().product();
    let mut outcomes = Vec::with_capacity(total);
    for flat in 0..total {
        let mut rem = flat;
        let mut idx = vec![0; shape.len()];
        for l in (0..shape.len()).rev() {
            idx[l] = rem % shape[l];
            rem /= shape[l];
        }
        let ops: Vec<_> = parts.iter().zip(&idx).map(|(m, &c)| m.outcome(c).clone()).collect();
        outcomes.push(kron_all(&ops));
    }
    Ok(SequenceMeasurement {
        shape,
        joint: Measurement::from_outcomes(outcomes),
    })
}

/// Same as [`product_measurement`] but checks step dimensions and counts.
pub fn product_measurement_for<T: Real>(
    seq: &SequenceEnsemble<T>,
    parts: &[Measurement<T>],
) -> Result<SequenceMeasurement<T>> {
    if parts.len() != seq.len() {
        return Err(Error::DimMismatch {
            expected: seq.len(),
            found: parts.len(),
        });
    }
    for (e, m) in seq.steps().iter().zip(parts) {
        if m.dim() != e.dim() {
            return Err(Error::DimMismatch {
                expected: e.dim(),
                found: m.dim(),
            });
        }
        if m.len() != e.len() {
            return Err(Error::DimMismatch {
                expected: e.len(),
                found: m.len(),
            });
        }
    }
    product_measurement(parts)
}

/// `p_G` of a sequence: product of certified per-step values and/or a
/// certified solve on the flattened joint ensemble.
pub fn sequence_p_g<T: Real>(
    seq: &SequenceEnsemble<T>,
    mode: Mode,
    dim_cap: usize,
    opts: &SolverOptions,
    tolerances: &Tolerances,
) -> Result<FactorizationReport<T>> {
    if mode.direct() {
        check_cap(seq, dim_cap)?;
    }
    let mut certified = true;
    let mut steps = Vec::with_capacity(seq.len());
    if mode.product() {
        let step_opts = SolverOptions {
            tol: opts.tol.min(STEP_TOL),
            ..opts.clone()
        };
        for e in seq.steps() {
            let cert = certify(e, &step_opts, tolerances)?;
            certified &= cert.certified;
            steps.push(cert.primal.value);
        }
    }
    let product = mode.product().then(|| steps.iter().copied().product());
    let direct = if mode.direct() {
        let cert = certify(&seq.joint()?, opts, tolerances)?;
        certified &= cert.certified;
        Some(cert.primal.value)
    } else {
        None
    };
    Ok(FactorizationReport {
        mode,
        steps,
        product,
        direct,
        certified,
    })
}

/// Residuals of the projector identities behind the sandwich condition on
/// members of the joint maximum-confidence set.
#[derive(Clone, Debug)]
pub struct PpeeReport<T> {
    /// `Tr[(C_x⃗ ρ₀ − η_x⃗ ρ_x⃗) E]`.
    pub membership: T,
    /// `max |K ΠEΠ K − ΠEΠ|` with `K = ⊗ Π^⊥_{x_l}` and `Π = ⊗ Π(E^l)`.
    pub sandwich: T,
    /// `max_l |(Π^l − Π^l_{x_l}) Π^{l⊥}_{x_l} − (Π^l − Π^l_{x_l})|`.
    pub step_nesting: T,
    /// `max |ΠEΠ ⊗(Π^l − Π^l_{x_l}) − ΠEΠ|`.
    pub support_factor: T,
}

/// All residuals of the sandwich condition for `E` at joint outcome `x⃗`.
///
/// Errors with [`Error::NotInMembershipSet`] when `E` is not positive
/// semidefinite or misses `C_x⃗` by more than [`PPEE_MEMBERSHIP_TOL`].
pub fn lemma_ppee_report<T: Real>(
    seq: &SequenceEnsemble<T>,
    x: &[usize],
    e_op: &HermitianOperator<T>,
) -> Result<PpeeReport<T>> {
    let flat = check_index(seq, x)?;
    if e_op.dim() != seq.joint_dim() {
        return Err(Error::DimMismatch {
            expected: seq.joint_dim(),
            found: e_op.dim(),
        });
    }
    let joint = seq.joint()?;
    let c = max_confidence(&joint, flat)?.raw_value;
    let gap = joint
        .average_state()
        .axpby(c, joint.state(flat), -joint.prior(flat));
    let membership = gap.inner(e_op);
    let negativity = -e_op.min_eigenvalue();
    let tol: T = lit(PPEE_MEMBERSHIP_TOL);
    if membership.abs() > tol || negativity > tol {
        return Err(Error::NotInMembershipSet {
            residual: to_f64(membership.abs().max(negativity)),
        });
    }

    let rank_tol = lit(RANK_TOL);
    let mut supports = Vec::with_capacity(seq.len());
    let mut kernels = Vec::with_capacity(seq.len());
    let mut differences = Vec::with_capacity(seq.len());
    let mut step_nesting = T::zero();
    for (e, &xl) in seq.steps().iter().zip(x) {
        let pi = support_projector(&e.average_state(), rank_tol)?.operator;
        let r = max_confidence(e, xl)?;
        let diff = pi.sub(&r.pi_support.operator);
        let nested = diff.matrix() * r.pi_kernel.operator.matrix();
        step_nesting = step_nesting.max((&nested - diff.matrix()).max_abs());
        supports.push(pi);
        kernels.push(r.pi_kernel.operator);
        differences.push(diff);
    }
    let pi = kron_all(&supports);
    let k = kron_all(&kernels);
    let core = e_op.sandwich(&pi);
    let sandwich = core.sandwich(&k).distance(&core);
    let factor = core.matrix() * kron_all(&differences).matrix();
    let support_factor = (&factor - core.matrix()).max_abs();
    Ok(PpeeReport {
        membership,
        sandwich,
        step_nesting,
        support_factor,
    })
}

/// `[⊗Π^⊥_{x_l}] ΠEΠ [⊗Π^⊥_{x_l}] = ΠEΠ` within `tol`.
pub fn check_lemma_ppee<T: Real>(
    seq: &SequenceEnsemble<T>,
    x: &[usize],
    e_op: &HermitianOperator<T>,
    tol: T,
) -> Result<bool> {
    lemma_ppee_report(seq, x, e_op).map(|r| r.sandwich <= tol)
}

/// Joint dual operator `H = ⊗ H^l` and its feasibility on the joint ensemble.
#[derive(Clone, Debug)]
pub struct TensorDual<T> {
    pub h: HermitianOperator<T>,
    /// `Π Tr H^l`.
    pub value: T,
    /// Minimum eigenvalue of `H`.
    pub positivity: T,
    /// Per joint outcome, the minimum eigenvalue of `Π^⊥_c⃗ (H − η_c⃗ ρ_c⃗) Π^⊥_c⃗`.
    pub feasibility: Vec<T>,
    pub feasible: bool,
}

/// Tensors converged, support-checked step duals into a joint dual operator
/// and checks its feasibility on the flattened joint ensemble.
pub fn dual_tensor_certificate<T: Real>(
    seq: &SequenceEnsemble<T>,
    parts: &[DualSolution<T>],
    tol: T,
) -> Result<TensorDual<T>> {
    if parts.len() != seq.len() {
        return Err(Error::DimMismatch {
            expected: seq.len(),
            found: parts.len(),
        });
    }
    for (step, (e, part)) in seq.steps().iter().zip(parts).enumerate() {
        if part.h.dim() != e.dim() {
            return Err(Error::DimMismatch {
                expected: e.dim(),
                found: part.h.dim(),
            });
        }
        if !part.converged || !check_dual_support(e, &part.h, tol) {
            return Err(Error::PartNotConverged { step });
        }
    }
    let hs: Vec<_> = parts.iter().map(|p| p.h.clone()).collect();
    let h = kron_all(&hs);
    let value = parts.iter().map(|p| p.h.trace()).product();
    let joint = seq.joint()?;
    let profile = confidence_profile(&joint)?;
    let feasibility: Vec<T> = (0..joint.len())
        .map(|c| {
            h.axpby(T::one(), joint.state(c), -joint.prior(c))
                .sandwich(&profile.outcomes[c].pi_kernel.operator)
                .min_eigenvalue()
        })
        .collect();
    let positivity = h.min_eigenvalue();
    let feasible = positivity >= -tol && feasibility.iter().all(|&f| f >= -tol);
    Ok(TensorDual {
        h,
        value,
        positivity,
        feasibility,
        feasible,
    })
}

/// `C_x⃗ ρ₀ − η_x⃗ ρ_x⃗` assembled from per-step data through the odd-parity
/// sum over `⊗[C_{x_l} ρ₀^l ± η_{x_l} ρ_{x_l}]`.
pub fn joint_gap_operator<T: Real>(seq: &SequenceEnsemble<T>, x: &[usize]) -> Result<CMatrix<T>> {
    check_index(seq, x)?;
    let mut xs = Vec::with_capacity(seq.len());
    let mut ys = Vec::with_capacity(seq.len());
    for (e, &xl) in seq.steps().iter().zip(x) {
        let c = max_confidence(e, xl)?.raw_value;
        xs.push(e.average_state().scale(c).into_matrix());
        ys.push(e.weighted_state(xl).into_matrix());
    }
    plus_minus_decomposition(&xs, &ys, Parity::Odd)
}

/// Product of per-step success probabilities of the given measurements.
pub fn product_success<T: Real>(steps: &[Ensemble<T>], parts: &[Measurement<T>]) -> T {
    steps
        .iter()
        .zip(parts)
        .map(|(e, m)| m.success_probability(e))
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::confidence::{baseline_mcm_measurement, is_mcm};
    use crate::ensemble::tensor;
    use crate::optimizer::solve_dual;

    fn ensemble_a() -> Ensemble<f64> {
        Ensemble::from_f64(
            &[0.5, 0.5],
            vec![
                HermitianOperator::basis_projector(2, 0),
                HermitianOperator::diag_f64(&[0.5, 0.5]),
            ],
        )
        .unwrap()
    }

    fn a_squared() -> SequenceEnsemble<f64> {
        tensor(&[ensemble_a(), ensemble_a()]).unwrap()
    }

    #[test]
    fn confidence_factorizes_on_a_squared() {
        let seq = a_squared();
        let r = sequence_max_confidence(&seq, &[0, 1], Mode::Both, DIRECT_DIM_CAP).unwrap();
        assert!((r.product.unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((r.direct.unwrap() - 2.0 / 3.0).abs() < 1e-10);
        let r = sequence_max_confidence(&seq, &[0, 0], Mode::Both, DIRECT_DIM_CAP).unwrap();
        assert!((r.product.unwrap() - 4.0 / 9.0).abs() < 1e-12);
        assert!(r.deviation().unwrap() < 1e-8);
    }

    #[test]
    fn direct_mode_respects_cap() {
        let seq = a_squared();
        assert!(matches!(
            sequence_max_confidence(&seq, &[0, 0], Mode::Direct, 3),
            Err(Error::DimCapExceeded { dim: 4, cap: 3 })
        ));
        assert!(sequence_max_confidence(&seq, &[0, 0], Mode::Product, 3).is_ok());
    }

    #[test]
    fn product_of_baselines_is_joint_mcm() {
        let seq = a_squared();
        let base = baseline_mcm_measurement(&ensemble_a()).unwrap();
        let sm = product_measurement_for(&seq, &[base.clone(), base.clone()]).unwrap();
        let joint = seq.joint().unwrap();
        let rep = is_mcm(&joint, &sm.joint, 1e-9).unwrap();
        assert!(rep.all_pass());
        let p = sm.joint.success_probability(&joint);
        assert!((p - (5.0f64 / 16.0).powi(2)).abs() < 1e-12);
        assert!(sm.joint.validate().is_empty());
    }

    #[test]
    fn projective_parts_leave_no_inconclusive_weight() {
        let m = Measurement::from_outcomes(vec![
            HermitianOperator::<f64>::basis_projector(2, 0),
            HermitianOperator::basis_projector(2, 1),
        ]);
        let sm = product_measurement(&[m.clone(), m]).unwrap();
        assert!(sm.inconclusive().max_abs() < 1e-15);
        assert!(sm.outcome(&[1, 0]).distance(&HermitianOperator::basis_projector(4, 2)) < 1e-15);
    }

    #[test]
    fn p_g_factorizes_on_a_squared() {
        let r = sequence_p_g(
            &a_squared(),
            Mode::Both,
            DIRECT_DIM_CAP,
            &SolverOptions::default(),
            &Tolerances::default(),
        )
        .unwrap();
        assert!(r.certified);
        assert!((r.product.unwrap() - 9.0 / 16.0).abs() < 1e-6);
        assert!((r.direct.unwrap() - 9.0 / 16.0).abs() < 1e-6);
        assert!(r.within(SEQUENCE_TOL));
    }

    #[test]
    fn ppee_examples() {
        let seq = a_squared();
        let m1 = HermitianOperator::diag_f64(&[1.0, 0.0]);
        let m2 = HermitianOperator::diag_f64(&[0.0, 1.0]);
        let e = m1.kron(&m2);
        let rep = lemma_ppee_report(&seq, &[0, 1], &e).unwrap();
        assert!(rep.sandwich < 1e-12);
        assert!(rep.step_nesting < 1e-12);
        assert!(rep.support_factor < 1e-12);
        assert!(check_lemma_ppee(&seq, &[0, 1], &HermitianOperator::zero(4), 1e-12).unwrap());
        assert!(matches!(
            check_lemma_ppee(&seq, &[0, 0], &HermitianOperator::identity(4), 1e-9),
            Err(Error::NotInMembershipSet { .. })
        ));
    }

    #[test]
    fn tensor_dual_of_hand_solution() {
        let seq = a_squared();
        let part = solve_dual(&ensemble_a(), &SolverOptions::default()).unwrap();
        let td = dual_tensor_certificate(&seq, &[part.clone(), part.clone()], 1e-8).unwrap();
        assert!((td.value - 9.0 / 16.0).abs() < 1e-7);
        assert!(td.feasible);
        assert_eq!(td.feasibility.len(), 4);

        let mut stalled = part;
        stalled.converged = false;
        assert!(matches!(
            dual_tensor_certificate(&seq, &[stalled.clone(), stalled], 1e-8),
            Err(Error::PartNotConverged { step: 0 })
        ));
    }

    #[test]
    fn parity_reconstruction_matches_joint_gap() {
        let seq = a_squared();
        let joint = seq.joint().unwrap();
        for x in seq.indices() {
            let flat = seq.flatten_index(&x).unwrap();
            let c = max_confidence(&joint, flat).unwrap().raw_value;
            let direct = joint.average_state().axpby(c, joint.state(flat), -joint.prior(flat));
            let rebuilt = joint_gap_operator(&seq, &x).unwrap();
            assert!((&rebuilt - direct.matrix()).max_abs() < 1e-10);
        }
    }

    #[test]
    fn mode_parses() {
        assert_eq!("both".parse::<Mode>().unwrap(), Mode::Both);
        assert!("joint".parse::<Mode>().is_err());
        assert_eq!(Mode::Direct.to_string(), "direct");
    }
}
