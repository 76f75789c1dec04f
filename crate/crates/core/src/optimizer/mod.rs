//! Optimal success probability under maximum-confidence measurements.
//!
//! Both programs are solved on the kernel parameterization `M_i = B_i G_i B_i†`
//! where the columns of `B_i` span the kernel of `C_i ρ₀ − η_i ρ_i`:
//!
//! - primal: maximize `Σ η_i Tr(ρ_i M_i)` subject to `G_i ⪰ 0`, `Σ M_i ⪯ I`;
//! - dual: minimize `Tr H` subject to `H ⪰ 0`, `B_i†(H − η_i ρ_i)B_i ⪰ 0`.
//!
//! Each is solved by a log-barrier method with damped Newton steps over the
//! real coordinates of the Hermitian unknowns. Optimality is never assumed:
//! [`certify`] reports the duality gap and the complementary slackness
//! residuals, and [`certify_pair`] rechecks any stored pair from scratch.

mod dual;
mod newton;
mod primal;

use serde::{Deserialize, Serialize};

use crate::confidence::{
    confidence_profile_with, is_mcm_with_profile, lambda_over_n, ConfidenceProfile, Measurement,
};
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};
use crate::hermitian::{kernel_basis, HermitianOperator, RANK_TOL};
use crate::matrix::CMatrix;
use crate::scalar::{lit, to_f64, Real};

use newton::{follow_path, Barrier};

pub const GAP_TOL: f64 = 1e-6;
pub const SLACK_TOL: f64 = 1e-6;
pub const FEASIBILITY_TOL: f64 = 1e-9;
pub const MEMBERSHIP_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 500;

/// Barrier schedule and stopping rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Largest acceptable gap bound when the step cap is reached.
    pub tol: f64,
    pub max_iter: usize,
    pub mu_start: f64,
    pub mu_final: f64,
    pub mu_factor: f64,
    pub rank_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: GAP_TOL,
            max_iter: MAX_ITER,
            mu_start: 1.0,
            mu_final: 1e-9,
            mu_factor: 10.0,
            rank_tol: RANK_TOL,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Tolerances used when judging a primal/dual pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub gap: f64,
    pub slack: f64,
    pub rank: f64,
    pub feasibility: f64,
    pub membership: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gap: GAP_TOL,
            slack: SLACK_TOL,
            rank: RANK_TOL,
            feasibility: FEASIBILITY_TOL,
            membership: MEMBERSHIP_TOL,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrimalSolution<T> {
    pub value: T,
    pub measurement: Measurement<T>,
    /// Objective value at every iterate, starting point included.
    pub history: Vec<T>,
    pub newton_steps: usize,
    /// `ν μ` at the last barrier parameter.
    pub gap_bound: T,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct DualSolution<T> {
    pub value: T,
    pub h: HermitianOperator<T>,
    pub history: Vec<T>,
    pub newton_steps: usize,
    pub gap_bound: T,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct OptimizationCertificate<T> {
    pub primal: PrimalSolution<T>,
    pub dual: DualSolution<T>,
    /// `q − p`.
    pub gap: T,
    /// `Tr(M_? H)` followed by `Tr[M_i(H − η_i ρ_i)]` for each outcome.
    pub slackness: Vec<T>,
    pub tolerances: Tolerances,
    pub certified: bool,
}

impl<T: Real> OptimizationCertificate<T> {
    /// Largest `p_k − q_l` over all recorded primal and dual iterates.
    pub fn weak_duality_violation(&self) -> T {
        let pmax = self.primal.history.iter().copied().fold(T::neg_infinity(), T::max);
        let qmin = self.dual.history.iter().copied().fold(T::infinity(), T::min);
        pmax - qmin
    }

    pub fn max_slackness(&self) -> T {
        self.slackness.iter().fold(T::zero(), |m, &r| m.max(r.abs()))
    }
}

/// Kernel bases of `C_i ρ₀ − η_i ρ_i` together with the confidence data.
#[derive(Clone, Debug)]
pub struct McmStructure<T> {
    pub profile: ConfidenceProfile<T>,
    pub bases: Vec<CMatrix<T>>,
}

impl<T: Real> McmStructure<T> {
    pub fn new(e: &Ensemble<T>, rank_tol: T) -> Result<Self> {
        let profile = confidence_profile_with(e, rank_tol)?;
        let bases = (0..e.len())
            .map(|i| kernel_basis(&profile.gap_operator(e, i), rank_tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { profile, bases })
    }

    /// `k_i`, the dimension of the kernel of `C_i ρ₀ − η_i ρ_i`.
    pub fn kernel_dims(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.cols()).collect()
    }
}

fn stall_check<T: Real>(converged: bool, steps: usize, gap_bound: T, tol: f64) -> Result<()> {
    if !converged && gap_bound > lit(tol) {
        return Err(Error::SolverStall {
            iterations: steps,
            gap: to_f64(gap_bound),
        });
    }
    Ok(())
}

pub fn solve_primal<T: Real>(e: &Ensemble<T>, opts: &SolverOptions) -> Result<PrimalSolution<T>> {
    let structure = McmStructure::new(e, lit(opts.rank_tol))?;
    solve_primal_with(e, &structure, opts)
}

pub fn solve_primal_with<T: Real>(
    e: &Ensemble<T>,
    structure: &McmStructure<T>,
    opts: &SolverOptions,
) -> Result<PrimalSolution<T>> {
    let dim = e.dim();
    let blocks: Vec<primal::Block<T>> = structure
        .bases
        .iter()
        .enumerate()
        .filter(|(_, b)| b.cols() > 0)
        .map(|(i, b)| primal::Block {
            outcome: i,
            basis: b.clone(),
            weight: b.adjoint_congruence(e.weighted_state(i).matrix()),
        })
        .collect();
    let problem = primal::PrimalBarrier::new(dim, blocks);
    let x0 = problem.initial_point(e.len(), lit(0.5));
    let path = follow_path(&problem, x0, opts);
    let gap_bound = path.mu * T::from_usize(problem.nu()).expect("size");
    stall_check(path.converged, path.steps, gap_bound, opts.tol)?;

    let mut outcomes = vec![HermitianOperator::zero(dim); e.len()];
    for (m, block) in problem.outcome_operators(&path.x).into_iter().zip(&problem.blocks) {
        outcomes[block.outcome] = HermitianOperator::from_hermitian_part(&m);
    }
    // The barrier keeps `Σ M_i` strictly inside `I`; scaling every outcome up
    // to the boundary stays feasible and in the maximum-confidence set.
    let top = outcomes
        .iter()
        .fold(HermitianOperator::zero(dim), |acc, m| acc.add(m))
        .max_eigenvalue();
    if top > T::zero() && top < T::one() {
        outcomes = outcomes.iter().map(|m| m.scale(T::one() / top)).collect();
    }
    let measurement = Measurement::from_outcomes(outcomes);
    let value = measurement.success_probability(e);
    let mut history = path.history;
    history.push(value);
    Ok(PrimalSolution {
        value,
        measurement,
        history,
        newton_steps: path.steps,
        gap_bound,
        converged: path.converged,
    })
}

pub fn solve_dual<T: Real>(e: &Ensemble<T>, opts: &SolverOptions) -> Result<DualSolution<T>> {
    let structure = McmStructure::new(e, lit(opts.rank_tol))?;
    solve_dual_with(e, &structure, opts)
}

pub fn solve_dual_with<T: Real>(
    e: &Ensemble<T>,
    structure: &McmStructure<T>,
    opts: &SolverOptions,
) -> Result<DualSolution<T>> {
    let constraints = structure
        .bases
        .iter()
        .enumerate()
        .filter(|(_, b)| b.cols() > 0)
        .map(|(i, b)| dual::Constraint {
            basis: b.clone(),
            offset: b.adjoint_congruence(e.weighted_state(i).matrix()),
        })
        .collect();
    let problem = dual::DualBarrier {
        dim: e.dim(),
        constraints,
    };
    let top = e.priors().iter().copied().fold(T::zero(), T::max);
    let x0 = problem.initial_point(T::one() + top);
    let path = follow_path(&problem, x0, opts);
    let gap_bound = path.mu * T::from_usize(problem.nu()).expect("size");
    stall_check(path.converged, path.steps, gap_bound, opts.tol)?;

    let h = HermitianOperator::from_hermitian_part(&problem.unpack(&path.x));
    Ok(DualSolution {
        value: h.trace(),
        h,
        history: path.history,
        newton_steps: path.steps,
        gap_bound,
        converged: path.converged,
    })
}

/// `Tr(M_? H)` and `Tr[M_i(H − η_i ρ_i)]`; they sum to `Tr H − Σ η_i Tr(ρ_i M_i)`.
pub fn slackness_residuals<T: Real>(
    e: &Ensemble<T>,
    m: &Measurement<T>,
    h: &HermitianOperator<T>,
) -> Vec<T> {
    std::iter::once(m.inconclusive().inner(h))
        .chain(
            m.outcomes()
                .iter()
                .enumerate()
                .map(|(i, mi)| mi.inner(&h.axpby(T::one(), e.state(i), -e.prior(i)))),
        )
        .collect()
}

/// Solves both programs and assembles the certificate.
pub fn certify<T: Real>(
    e: &Ensemble<T>,
    opts: &SolverOptions,
    tolerances: &Tolerances,
) -> Result<OptimizationCertificate<T>> {
    let structure = McmStructure::new(e, lit(tolerances.rank))?;
    let primal = solve_primal_with(e, &structure, opts)?;
    let dual = solve_dual_with(e, &structure, opts)?;
    let gap = dual.value - primal.value;
    let slackness = slackness_residuals(e, &primal.measurement, &dual.h);
    let certified = gap.abs() <= lit(tolerances.gap)
        && slackness.iter().all(|r| r.abs() <= lit(tolerances.slack));
    Ok(OptimizationCertificate {
        primal,
        dual,
        gap,
        slackness,
        tolerances: *tolerances,
        certified,
    })
}

/// One named check of [`certify_pair`].
#[derive(Clone, Debug, PartialEq)]
pub struct Check<T> {
    pub name: &'static str,
    /// Worst residual; the check passes iff `value <= tol`.
    pub value: T,
    pub tol: T,
    pub passed: bool,
}

impl<T: Real> Check<T> {
    fn new(name: &'static str, value: T, tol: f64) -> Self {
        let tol = lit(tol);
        Self {
            name,
            value,
            tol,
            passed: value <= tol,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PairReport<T> {
    pub primal_value: T,
    pub dual_value: T,
    pub gap: T,
    pub slackness: Vec<T>,
    pub checks: Vec<Check<T>>,
}

impl<T: Real> PairReport<T> {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &Check<T>> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check<T>> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Rechecks a stored measurement and dual operator without re-solving:
/// positivity, completeness, membership, dual feasibility, gap and slackness.
pub fn certify_pair<T: Real>(
    e: &Ensemble<T>,
    m: &Measurement<T>,
    h: &HermitianOperator<T>,
    tolerances: &Tolerances,
) -> Result<PairReport<T>> {
    if m.len() != e.len() {
        return Err(Error::DimMismatch {
            expected: e.len(),
            found: m.len(),
        });
    }
    for d in [m.dim(), h.dim()] {
        if d != e.dim() {
            return Err(Error::DimMismatch {
                expected: e.dim(),
                found: d,
            });
        }
    }
    let profile = confidence_profile_with(e, lit(tolerances.rank))?;

    let min_m = std::iter::once(m.inconclusive())
        .chain(m.outcomes())
        .map(|op| op.min_eigenvalue())
        .fold(T::infinity(), T::min);
    let membership = is_mcm_with_profile(e, &profile, m, lit(tolerances.membership));
    let dual_feas = (0..e.len())
        .map(|i| {
            h.axpby(T::one(), e.state(i), -e.prior(i))
                .sandwich(&profile.outcomes[i].pi_kernel.operator)
                .min_eigenvalue()
        })
        .fold(T::infinity(), T::min);

    let primal_value = m.success_probability(e);
    let dual_value = h.trace();
    let gap = dual_value - primal_value;
    let slackness = slackness_residuals(e, m, h);
    let max_slack = slackness.iter().fold(T::zero(), |a, &r| a.max(r.abs()));

    let checks = vec![
        Check::new("measurement-positivity", -min_m, tolerances.feasibility),
        Check::new("completeness", m.completeness_defect(), tolerances.feasibility),
        Check::new("membership", membership.max_residual(), tolerances.membership),
        Check::new("dual-positivity", -h.min_eigenvalue(), tolerances.feasibility),
        Check::new("dual-feasibility", -dual_feas, tolerances.feasibility),
        Check::new("gap", gap.abs(), tolerances.gap),
        Check::new("slackness", max_slack, tolerances.slack),
    ];
    Ok(PairReport {
        primal_value,
        dual_value,
        gap,
        slackness,
        checks,
    })
}

/// `λ/n` with `λ` the smallest nonzero eigenvalue of `ρ₀`.
pub fn lower_bound<T: Real>(e: &Ensemble<T>) -> T {
    lambda_over_n(e)
}

/// `max |Π(E) H Π(E) − H|`.
pub fn dual_support_residual<T: Real>(e: &Ensemble<T>, h: &HermitianOperator<T>, rank_tol: T) -> Result<T> {
    let support = crate::hermitian::support_projector(&e.average_state(), rank_tol)?;
    Ok(h.sandwich(&support.operator).distance(h))
}

/// Whether `H` lives on the support of `ρ₀` within `tol`.
pub fn check_dual_support<T: Real>(e: &Ensemble<T>, h: &HermitianOperator<T>, tol: T) -> bool {
    dual_support_residual(e, h, lit(RANK_TOL)).is_ok_and(|r| r <= tol)
}

/// Minimum-error discrimination without the maximum-confidence constraint.
pub fn minimum_error<T: Real>(_e: &Ensemble<T>) -> Result<PrimalSolution<T>> {
    Err(Error::OutOfScope("minimum-error discrimination"))
}
