//! Brute-force bounds on `p_G` for tiny ensembles.
//!
//! The lower bound comes from sampled maximum-confidence measurements
//! `M_i = a_i Π_i^⊥ F_i Π_i^⊥` whose scale factors are improved by coordinate
//! ascent. The upper bound comes from sampled dual operators `H` made feasible
//! by eigenvalue shifting and then shrunk by local search. Only the Hermitian
//! primitives are shared with the rest of the crate; maximum confidences and
//! kernel projectors are recomputed here.
//!
//! Sample `s` draws from its own ChaCha stream `(seed, s)`, so the bounds for
//! `k` samples are the best over a prefix of the bounds for any `k' > k`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ensemble::{random_state, Ensemble};
use crate::error::{Error, Result};
use crate::hermitian::{eig_hermitian, kernel_projector, pinv_sqrt, HermitianOperator, RANK_TOL};
use crate::matrix::CMatrix;
use crate::scalar::{cx, lit, Real};

pub const MAX_DIM: usize = 4;
pub const MAX_STATES: usize = 3;
pub const ASCENT_STEP: f64 = 0.05;
pub const SWEEPS: usize = 200;
pub const DUAL_SWEEPS: usize = 40;
const MIN_STEP: f64 = 1e-4;
/// Smallest per-sweep decrease of `Tr H` that counts as progress.
const STALL: f64 = 1e-5;
/// Rounding allowance on feasibility tests.
const SLOP: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleBounds<T> {
    pub best_primal: T,
    pub best_dual: T,
    pub samples: usize,
}

impl<T: Real> OracleBounds<T> {
    pub fn width(&self) -> T {
        self.best_dual - self.best_primal
    }

    /// `best_primal − slack ≤ value ≤ best_dual + slack`.
    pub fn contains(&self, value: T, slack: T) -> bool {
        value >= self.best_primal - slack && value <= self.best_dual + slack
    }
}

struct Setup<T> {
    dim: usize,
    weighted: Vec<HermitianOperator<T>>,
    states: Vec<HermitianOperator<T>>,
    kernels: Vec<HermitianOperator<T>>,
}

impl<T: Real> Setup<T> {
    fn new(e: &Ensemble<T>) -> Result<Self> {
        let rank_tol = lit(RANK_TOL);
        let weighted: Vec<_> = (0..e.len()).map(|i| e.state(i).scale(e.prior(i))).collect();
        let rho0 = weighted
            .iter()
            .fold(HermitianOperator::zero(e.dim()), |acc, w| acc.add(w));
        let s = pinv_sqrt(&rho0, rank_tol)?;
        let kernels = weighted
            .iter()
            .map(|w| {
                let c = eig_hermitian(&w.sandwich(&s)).max_value();
                kernel_projector(&rho0.scale(c).sub(w), rank_tol).map(|p| p.operator)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            dim: e.dim(),
            weighted,
            states: e.states().to_vec(),
            kernels,
        })
    }

    fn n(&self) -> usize {
        self.weighted.len()
    }

    fn dual_feasible(&self, h: &HermitianOperator<T>) -> bool {
        let slop: T = lit(SLOP);
        h.min_eigenvalue() >= -slop
            && self
                .kernels
                .iter()
                .zip(&self.weighted)
                .all(|(k, w)| h.sub(w).sandwich(k).min_eigenvalue() >= -slop)
    }

    /// Clips negative eigenvalues, then adds `|λ| u u†` for every negative
    /// eigenpair of each `Π_i^⊥(H − η_i ρ_i)Π_i^⊥`.
    fn repair(&self, h: &HermitianOperator<T>) -> HermitianOperator<T> {
        let mut h = eig_hermitian(h).apply(|l| l.max(T::zero()));
        for (k, w) in self.kernels.iter().zip(&self.weighted) {
            let es = eig_hermitian(&h.sub(w).sandwich(k));
            for (idx, &l) in es.values.iter().enumerate() {
                if l < T::zero() {
                    h = h.add(&HermitianOperator::ket_bra(&es.vector(idx)).scale(-l + lit(SLOP)));
                }
            }
        }
        let mut pad: T = lit(SLOP);
        while !self.dual_feasible(&h) {
            h = h.add(&HermitianOperator::identity(self.dim).scale(pad));
            pad *= lit(10.0);
        }
        h
    }
}

fn max_eigenvalue<T: Real>(ops: &[HermitianOperator<T>], scales: &[T], dim: usize) -> T {
    let mut acc = HermitianOperator::zero(dim);
    for (op, &a) in ops.iter().zip(scales) {
        if a > T::zero() {
            acc = acc.axpby(T::one(), op, a);
        }
    }
    acc.max_eigenvalue()
}

fn unit_vector<T: Real>(dim: usize, rng: &mut ChaCha8Rng) -> Vec<crate::scalar::Cx<T>> {
    let v: Vec<_> = (0..dim)
        .map(|_| cx(lit::<T>(rng.random::<f64>() - 0.5), lit(rng.random::<f64>() - 0.5)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

fn primal_sample<T: Real>(setup: &Setup<T>, rng: &mut ChaCha8Rng) -> T {
    let (d, n) = (setup.dim, setup.n());
    let mut shapes = Vec::with_capacity(n);
    let mut gains = Vec::with_capacity(n);
    for i in 0..n {
        let f = match rng.random_range(0..3) {
            0 => setup.states[i].clone(),
            1 => HermitianOperator::identity(d),
            _ => random_state(d, rng.random_range(1..=d), rng),
        };
        let mut shape = f.sandwich(&setup.kernels[i]);
        if shape.trace() <= lit(SLOP) {
            shape = setup.kernels[i].clone();
        }
        let tr = shape.trace();
        let shape = if tr > lit(SLOP) {
            shape.scale(T::one() / tr)
        } else {
            HermitianOperator::zero(d)
        };
        gains.push(setup.weighted[i].inner(&shape));
        shapes.push(shape);
    }

    let mut a: Vec<T> = (0..n).map(|_| lit(rng.random::<f64>())).collect();
    let top = max_eigenvalue(&shapes, &a, d);
    if !(top > T::zero()) {
        return T::zero();
    }
    for ai in &mut a {
        *ai /= top;
    }
    let value = |a: &[T]| a.iter().zip(&gains).map(|(&x, &g)| x * g).sum::<T>();
    let feasible = |a: &[T]| max_eigenvalue(&shapes, a, d) <= T::one() + lit(SLOP);

    let mut order: Vec<usize> = (0..n).collect();
    let mut step: T = lit(ASCENT_STEP);
    for _ in 0..SWEEPS {
        let mut improved = false;
        order.shuffle(rng);
        for &i in &order {
            // Push outcome i outward.
            let mut trial = a.clone();
            trial[i] += step;
            if feasible(&trial) {
                a = trial;
                improved = true;
                continue;
            }
            // Transfer weight from a less rewarding outcome to i.
            for &j in &order {
                if j == i || a[j] <= T::zero() || gains[j] >= gains[i] {
                    continue;
                }
                let mut trial = a.clone();
                let moved = step.min(a[j]);
                trial[j] -= moved;
                trial[i] += moved;
                if value(&trial) > value(&a) && feasible(&trial) {
                    a = trial;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            step *= lit(0.5);
            if step < lit(MIN_STEP) {
                break;
            }
        }
    }
    value(&a)
}

fn dual_sample<T: Real>(setup: &Setup<T>, rng: &mut ChaCha8Rng) -> T {
    let d = setup.dim;
    let mut h = HermitianOperator::zero(d);
    for w in &setup.weighted {
        h = h.axpby(T::one(), w, lit(0.5 + 1.5 * rng.random::<f64>()));
    }
    let noise: HermitianOperator<T> = random_state(d, rng.random_range(1..=d), rng);
    h = h.axpby(T::one(), &noise, lit(0.3 * rng.random::<f64>()));
    let mut h = setup.repair(&h);

    let mut step: T = lit(ASCENT_STEP);
    for _ in 0..DUAL_SWEEPS {
        let start = h.trace();
        let es = eig_hermitian(&h);
        let mut moves: Vec<HermitianOperator<T>> = (0..d)
            .filter(|&k| es.values[k] > T::zero())
            .map(|k| HermitianOperator::ket_bra(&es.vector(k)).scale(es.values[k]))
            .collect();
        for _ in 0..2 {
            let w = unit_vector(d, rng);
            moves.push(HermitianOperator::ket_bra(&w).scale(h.trace() / lit(d as f64)));
        }
        moves.shuffle(rng);
        for m in moves {
            let trial = setup.repair(&h.axpby(T::one(), &m, -step));
            if trial.trace() < h.trace() {
                h = trial;
                step = (step * lit(1.5)).min(T::one());
            }
        }
        if start - h.trace() < lit(STALL) {
            step *= lit(0.5);
            if step < lit(MIN_STEP) {
                break;
            }
        }
    }
    h.trace()
}

fn sample_rng(seed: u64, sample: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

/// Best primal and dual values over `samples` independent restarts.
pub fn oracle_bounds<T: Real>(e: &Ensemble<T>, samples: usize, seed: u64) -> Result<OracleBounds<T>> {
    if e.dim() > MAX_DIM || e.len() > MAX_STATES {
        return Err(Error::ScaleCapExceeded {
            dim: e.dim(),
            n: e.len(),
        });
    }
    e.ensure_valid()?;
    let setup = Setup::new(e)?;
    let mut best_primal = T::zero();
    let mut best_dual = T::infinity();
    for s in 0..samples {
        let mut rng = sample_rng(seed, s);
        best_primal = best_primal.max(primal_sample(&setup, &mut rng));
        best_dual = best_dual.min(dual_sample(&setup, &mut rng));
    }
    Ok(OracleBounds {
        best_primal,
        best_dual,
        samples,
    })
}

/// Dense matrix of `Π_i^⊥` for every outcome, as computed by the oracle.
pub fn oracle_kernels<T: Real>(e: &Ensemble<T>) -> Result<Vec<CMatrix<T>>> {
    Ok(Setup::new(e)?
        .kernels
        .into_iter()
        .map(|k| k.into_matrix())
        .collect())
}
