//! State ensembles `{η_i, ρ_i}` and their tensor products.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::hermitian::{kron_all, HermitianOperator};
use crate::matrix::CMatrix;
use crate::scalar::{cx, lit, to_f64, Real};

/// Tolerance on prior sums, traces and PSD checks of ensemble data.
pub const ENSEMBLE_TOL: f64 = 1e-9;
/// Lower clamp applied to randomly drawn priors.
pub const MIN_RANDOM_PRIOR: f64 = 0.01;

/// A single broken ensemble invariant. Indices are zero-based.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    Empty,
    CountMismatch { priors: usize, states: usize },
    DimMismatch { index: usize, expected: usize, found: usize },
    ZeroPrior { index: usize },
    NegativePrior { index: usize, value: f64 },
    NonFinitePrior { index: usize },
    PriorsSum { sum: f64 },
    NotPsd { index: usize, min_eigenvalue: f64 },
    Trace { index: usize, trace: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "ensemble has no states"),
            Violation::CountMismatch { priors, states } => {
                write!(f, "{priors} priors but {states} states")
            }
            Violation::DimMismatch { index, expected, found } => {
                write!(f, "state {index}: dimension {found}, expected {expected}")
            }
            Violation::ZeroPrior { index } => write!(f, "prior {index} is zero"),
            Violation::NegativePrior { index, value } => {
                write!(f, "prior {index} is negative ({value})")
            }
            Violation::NonFinitePrior { index } => write!(f, "prior {index} is not finite"),
            Violation::PriorsSum { sum } => write!(f, "priors sum to {sum}, not 1"),
            Violation::NotPsd { index, min_eigenvalue } => write!(
                f,
                "state {index} is not positive semidefinite (min eigenvalue {min_eigenvalue:e})"
            ),
            Violation::Trace { index, trace } => {
                write!(f, "state {index} has trace {trace}, not 1")
            }
        }
    }
}

/// Priors and density operators on one Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble<T> {
    priors: Vec<T>,
    states: Vec<HermitianOperator<T>>,
}

impl<T: Real> Ensemble<T> {
    /// Builds a validated ensemble.
    pub fn new(priors: Vec<T>, states: Vec<HermitianOperator<T>>) -> Result<Self> {
        let e = Self { priors, states };
        let violations = e.validate();
        if violations.is_empty() {
            Ok(e)
        } else {
            Err(Error::InvalidEnsemble(violations))
        }
    }

    /// Builds an ensemble without checking; [`Ensemble::validate`] reports
    /// what is wrong with it.
    pub fn from_parts_unchecked(priors: Vec<T>, states: Vec<HermitianOperator<T>>) -> Self {
        Self { priors, states }
    }

    pub fn from_f64(priors: &[f64], states: Vec<HermitianOperator<T>>) -> Result<Self> {
        Self::new(priors.iter().map(|&p| lit(p)).collect(), states)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.states.first().map_or(0, |s| s.dim())
    }

    pub fn priors(&self) -> &[T] {
        &self.priors
    }

    pub fn states(&self) -> &[HermitianOperator<T>] {
        &self.states
    }

    pub fn prior(&self, i: usize) -> T {
        self.priors[i]
    }

    pub fn state(&self, i: usize) -> &HermitianOperator<T> {
        &self.states[i]
    }

    /// `η_i ρ_i`.
    pub fn weighted_state(&self, i: usize) -> HermitianOperator<T> {
        self.states[i].scale(self.priors[i])
    }

    /// Lists every broken invariant; empty iff the ensemble is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let tol: T = lit(ENSEMBLE_TOL);
        let mut out = Vec::new();
        if self.states.is_empty() {
            out.push(Violation::Empty);
            return out;
        }
        if self.priors.len() != self.states.len() {
            out.push(Violation::CountMismatch {
                priors: self.priors.len(),
                states: self.states.len(),
            });
        }
        for (i, &p) in self.priors.iter().enumerate() {
            if !p.is_finite() {
                out.push(Violation::NonFinitePrior { index: i });
            } else if p < T::zero() {
                out.push(Violation::NegativePrior {
                    index: i,
                    value: to_f64(p),
                });
            } else if p == T::zero() {
                out.push(Violation::ZeroPrior { index: i });
            }
        }
        let sum: T = self.priors.iter().copied().sum();
        if (sum - T::one()).abs() > tol {
            out.push(Violation::PriorsSum { sum: to_f64(sum) });
        }
        let dim = self.dim();
        for (i, s) in self.states.iter().enumerate() {
            if s.dim() != dim {
                out.push(Violation::DimMismatch {
                    index: i,
                    expected: dim,
                    found: s.dim(),
                });
                continue;
            }
            let min = s.min_eigenvalue();
            if min < -tol {
                out.push(Violation::NotPsd {
                    index: i,
                    min_eigenvalue: to_f64(min),
                });
            }
            let tr = s.trace();
            if (tr - T::one()).abs() > tol {
                out.push(Violation::Trace {
                    index: i,
                    trace: to_f64(tr),
                });
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidEnsemble(v))
        }
    }

    /// `ρ₀ = Σ η_i ρ_i`.
    pub fn average_state(&self) -> HermitianOperator<T> {
        let mut acc = HermitianOperator::zero(self.dim());
        for (p, s) in self.priors.iter().zip(&self.states) {
            acc = acc.axpby(T::one(), s, *p);
        }
        acc
    }

    /// Same ensemble on a larger space, padded with zeros (the extra basis
    /// vectors span the kernel of every state).
    pub fn embed(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        let d = self.dim();
        let states = self
            .states
            .iter()
            .map(|s| {
                let m = CMatrix::from_fn(dim, dim, |i, j| {
                    if i < d && j < d {
                        s.matrix()[(i, j)]
                    } else {
                        cx(T::zero(), T::zero())
                    }
                });
                HermitianOperator::from_hermitian_part(&m)
            })
            .collect();
        Self::new(self.priors.clone(), states)
    }
}

/// Joint index `(c₁, …, c_L)` into a sequence ensemble, zero-based.
pub type SequenceIndex = Vec<usize>;

/// Tensor product `⊗_l E^l` of step ensembles.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceEnsemble<T> {
    steps: Vec<Ensemble<T>>,
}

impl<T: Real> SequenceEnsemble<T> {
    pub fn steps(&self) -> &[Ensemble<T>] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Number of states per step, `n⃗`.
    pub fn shape(&self) -> Vec<usize> {
        self.steps.iter().map(|e| e.len()).collect()
    }

    pub fn joint_dim(&self) -> usize {
        self.steps.iter().map(|e| e.dim()).product()
    }

    pub fn joint_count(&self) -> usize {
        self.steps.iter().map(|e| e.len()).product()
    }

    /// Row-major flattening with step 1 most significant.
    pub fn flatten_index(&self, idx: &[usize]) -> Result<usize> {
        if idx.len() != self.steps.len() {
            return Err(Error::DimMismatch {
                expected: self.steps.len(),
                found: idx.len(),
            });
        }
        let mut flat = 0;
        for (e, &c) in self.steps.iter().zip(idx) {
            if c >= e.len() {
                return Err(Error::IndexOutOfRange { index: c, n: e.len() });
            }
            flat = flat * e.len() + c;
        }
        Ok(flat)
    }

    pub fn unflatten_index(&self, mut flat: usize) -> SequenceIndex {
        let mut idx = vec![0; self.steps.len()];
        for (l, e) in self.steps.iter().enumerate().rev() {
            idx[l] = flat % e.len();
            flat /= e.len();
        }
        idx
    }

    /// All joint indices in flattening order.
    pub fn indices(&self) -> impl Iterator<Item = SequenceIndex> + '_ {
        (0..self.joint_count()).map(|f| self.unflatten_index(f))
    }

    /// `η_c⃗ = Π_l η^l_{c_l}`.
    pub fn joint_prior(&self, idx: &[usize]) -> T {
        self.steps
            .iter()
            .zip(idx)
            .fold(T::one(), |acc, (e, &c)| acc * e.prior(c))
    }

    /// `ρ_c⃗ = ⊗_l ρ^l_{c_l}`.
    pub fn joint_state(&self, idx: &[usize]) -> HermitianOperator<T> {
        let parts: Vec<_> = self
            .steps
            .iter()
            .zip(idx)
            .map(|(e, &c)| e.state(c).clone())
            .collect();
        kron_all(&parts)
    }

    /// `⊗_l ρ₀^l`.
    pub fn average_state(&self) -> HermitianOperator<T> {
        let parts: Vec<_> = self.steps.iter().map(|e| e.average_state()).collect();
        kron_all(&parts)
    }

    /// The flattened ensemble `{η_c⃗, ρ_c⃗}` on the joint space.
    pub fn joint(&self) -> Result<Ensemble<T>> {
        let (priors, states) = self
            .indices()
            .map(|idx| (self.joint_prior(&idx), self.joint_state(&idx)))
            .unzip();
        Ensemble::new(priors, states)
    }
}

/// Tensor product of step ensembles.
pub fn tensor<T: Real>(ensembles: &[Ensemble<T>]) -> Result<SequenceEnsemble<T>> {
    if ensembles.is_empty() {
        return Err(Error::InvalidEnsemble(vec![Violation::Empty]));
    }
    for e in ensembles {
        e.ensure_valid()?;
    }
    Ok(SequenceEnsemble {
        steps: ensembles.to_vec(),
    })
}

fn complex_gaussian<T: Real>(rng: &mut ChaCha8Rng) -> crate::scalar::Cx<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    cx(lit(re * std::f64::consts::FRAC_1_SQRT_2), lit(im * std::f64::consts::FRAC_1_SQRT_2))
}

/// Random density operator `G G† / Tr(G G†)` with `G` a `dim × rank` complex
/// Gaussian matrix.
pub fn random_state<T: Real>(dim: usize, rank: usize, rng: &mut ChaCha8Rng) -> HermitianOperator<T> {
    let g = CMatrix::from_fn(dim, rank, |_, _| complex_gaussian::<T>(rng));
    let m = &g * &g.adjoint();
    let tr = m.trace().re;
    HermitianOperator::from_hermitian_part(&m.scale(T::one() / tr))
}

/// Priors from a flat Dirichlet draw, clamped below at [`MIN_RANDOM_PRIOR`]
/// and renormalized.
pub fn random_priors<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<T> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let clamped: Vec<f64> = raw
        .iter()
        .map(|x| (x / total).max(MIN_RANDOM_PRIOR))
        .collect();
    let total: f64 = clamped.iter().sum();
    clamped.iter().map(|x| lit(x / total)).collect()
}

/// Deterministic random ensemble of `n` rank-`rank` states in dimension `dim`.
pub fn random_ensemble<T: Real>(dim: usize, n: usize, rank: usize, seed: u64) -> Result<Ensemble<T>> {
    if rank == 0 || rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    if n == 0 {
        return Err(Error::InvalidEnsemble(vec![Violation::Empty]));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let priors = random_priors(n, &mut rng);
    let states = (0..n).map(|_| random_state(dim, rank, &mut rng)).collect();
    Ensemble::new(priors, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::support_projector;

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

    #[test]
    fn ensemble_a_is_valid() {
        assert!(ensemble_a().validate().is_empty());
    }

    #[test]
    fn prior_sum_violation() {
        let e = Ensemble::from_parts_unchecked(
            vec![0.5, 0.6],
            ensemble_a().states().to_vec(),
        );
        assert_eq!(e.validate(), vec![Violation::PriorsSum { sum: 1.1 }]);
    }

    #[test]
    fn zero_prior_violation() {
        let e = Ensemble::from_parts_unchecked(vec![0.0, 1.0], ensemble_a().states().to_vec());
        assert_eq!(e.validate(), vec![Violation::ZeroPrior { index: 0 }]);
    }

    #[test]
    fn trace_and_psd_violations_name_the_state() {
        let e = Ensemble::from_parts_unchecked(
            vec![0.5, 0.5],
            vec![
                HermitianOperator::diag_f64(&[0.9, 0.0]),
                HermitianOperator::diag_f64(&[1.5, -0.5]),
            ],
        );
        let v = e.validate();
        assert!(v.contains(&Violation::Trace { index: 0, trace: 0.9 }));
        assert!(v.iter().any(|x| matches!(x, Violation::NotPsd { index: 1, .. })));
    }

    #[test]
    fn average_state_examples() {
        let avg = ensemble_a().average_state();
        assert!(avg.distance(&HermitianOperator::diag_f64(&[0.75, 0.25])) < 1e-15);

        let single = Ensemble::<f64>::from_f64(&[1.0], vec![HermitianOperator::diag_f64(&[0.3, 0.7])])
            .unwrap();
        assert!(single.average_state().distance(single.state(0)) < 1e-15);

        let orth = Ensemble::<f64>::from_f64(
            &[0.5, 0.5],
            vec![
                HermitianOperator::basis_projector(2, 0),
                HermitianOperator::basis_projector(2, 1),
            ],
        )
        .unwrap();
        assert!(orth.average_state().distance(&HermitianOperator::diag_f64(&[0.5, 0.5])) < 1e-15);
    }

    #[test]
    fn tensor_examples() {
        let a = ensemble_a();
        let single = tensor(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.joint().unwrap(), a);

        let aa = tensor(&[a.clone(), a.clone()]).unwrap();
        let joint = aa.joint().unwrap();
        assert_eq!(joint.len(), 4);
        for p in joint.priors() {
            assert!((p - 0.25).abs() < 1e-15);
        }
        let expect = HermitianOperator::diag_f64(&[9.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 1.0 / 16.0]);
        assert!(joint.average_state().distance(&expect) < 1e-15);
        assert!(aa.average_state().distance(&expect) < 1e-15);
    }

    #[test]
    fn flattening_is_row_major() {
        let a = ensemble_a();
        let three = random_ensemble::<f64>(2, 3, 1, 5).unwrap();
        let seq = tensor(&[a, three]).unwrap();
        assert_eq!(seq.flatten_index(&[1, 2]).unwrap(), 5);
        assert_eq!(seq.unflatten_index(4), vec![1, 1]);
        assert!(matches!(seq.flatten_index(&[2, 0]), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn random_ensemble_examples() {
        let e = random_ensemble::<f64>(2, 2, 1, 7).unwrap();
        assert!(e.validate().is_empty());
        for s in e.states() {
            assert_eq!(support_projector(s, 1e-8).unwrap().rank, 1);
        }
        assert_eq!(e, random_ensemble::<f64>(2, 2, 1, 7).unwrap());

        let q = random_ensemble::<f64>(3, 4, 3, 1).unwrap();
        assert_eq!(support_projector(&q.average_state(), 1e-8).unwrap().rank, 3);
        assert!(q.priors().iter().all(|&p| p > 0.0));
    }

    #[test]
    fn random_ensemble_rejects_bad_rank() {
        assert!(matches!(random_ensemble::<f64>(2, 2, 3, 0), Err(Error::BadRank { .. })));
        assert!(matches!(random_ensemble::<f64>(2, 2, 0, 0), Err(Error::BadRank { .. })));
    }

    #[test]
    fn embedding_keeps_validity() {
        let e = ensemble_a().embed(3).unwrap();
        assert_eq!(e.dim(), 3);
        assert!(e.validate().is_empty());
        assert_eq!(support_projector(&e.average_state(), 1e-8).unwrap().rank, 2);
    }
}
