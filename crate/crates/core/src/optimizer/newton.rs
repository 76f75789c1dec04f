//! Damped Newton path following for self-concordant log-barrier problems.

use crate::hermitian::{from_hermitian_coordinates, hermitian_coordinates};
use crate::matrix::CMatrix;
use crate::scalar::{cr, lit, Cx, Real};

use super::SolverOptions;

/// Newton steps allowed for a single barrier parameter before moving on.
const STAGE_LIMIT: usize = 60;
/// Squared Newton decrement below which a point counts as centered.
const CENTERED: f64 = 1e-12;
/// Below this decrement the damped step becomes a full step.
const FULL_STEP: f64 = 0.25;
const MIN_STEP: f64 = 1e-10;

/// Gradient and Hessian (row-major) of `t · cost(x) + φ(x)`.
pub(crate) struct Local<T> {
    pub gradient: Vec<T>,
    pub hessian: Vec<T>,
}

pub(crate) trait Barrier<T: Real> {
    fn len(&self) -> usize;
    /// Barrier parameter: a centered point at `t` is within `nu / t` of optimal.
    fn nu(&self) -> usize;
    /// Value reported to callers (the quantity being optimized).
    fn objective(&self, x: &[T]) -> T;
    /// `None` when `x` is not strictly inside the feasible cone.
    fn local(&self, x: &[T], t: T) -> Option<Local<T>>;
}

pub(crate) struct PathResult<T> {
    pub x: Vec<T>,
    pub history: Vec<T>,
    pub steps: usize,
    pub mu: T,
    pub converged: bool,
}

pub(crate) fn follow_path<T: Real, B: Barrier<T>>(
    problem: &B,
    x0: Vec<T>,
    opts: &SolverOptions,
) -> PathResult<T> {
    let mu_final: T = lit(opts.mu_final);
    let factor: T = lit(opts.mu_factor);
    let mut mu: T = lit(opts.mu_start);
    let mut x = x0;
    let mut history = vec![problem.objective(&x)];
    let mut steps = 0;
    let mut converged = false;

    'schedule: loop {
        let t = T::one() / mu;
        let mut prev = T::infinity();
        for _ in 0..STAGE_LIMIT {
            if steps >= opts.max_iter {
                break 'schedule;
            }
            let Some(local) = problem.local(&x, t) else {
                break;
            };
            let Some(dx) = newton_direction(&local) else {
                break;
            };
            let lam2 = -dot(&local.gradient, &dx);
            if !(lam2 > lit(CENTERED)) {
                break;
            }
            // Rounding floor: already in the quadratic region but no longer improving.
            if lam2 < lit(1e-4) && lam2 > prev * lit(0.5) {
                break;
            }
            prev = lam2;
            let lam = lam2.sqrt();
            let mut alpha = if lam > lit(FULL_STEP) {
                T::one() / (T::one() + lam)
            } else {
                T::one()
            };
            let next = loop {
                let trial: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a + alpha * d).collect();
                if problem.local(&trial, t).is_some() {
                    break Some(trial);
                }
                alpha *= lit(0.5);
                if alpha < lit(MIN_STEP) {
                    break None;
                }
            };
            let Some(next) = next else {
                break;
            };
            x = next;
            steps += 1;
            history.push(problem.objective(&x));
        }
        if mu <= mu_final {
            converged = true;
            break;
        }
        mu = (mu / factor).max(mu_final);
    }

    PathResult {
        x,
        history,
        steps,
        mu,
        converged,
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solves `H Δ = −g`, adding a growing ridge if `H` is numerically singular.
fn newton_direction<T: Real>(local: &Local<T>) -> Option<Vec<T>> {
    let n = local.gradient.len();
    let scale = (0..n)
        .map(|i| local.hessian[i * n + i].abs())
        .fold(T::zero(), T::max)
        .max(T::min_positive_value());
    let mut ridge = T::zero();
    for _ in 0..8 {
        let mut h = local.hessian.clone();
        for i in 0..n {
            h[i * n + i] += ridge;
        }
        if let Some(l) = cholesky(&mut h, n) {
            let rhs: Vec<T> = local.gradient.iter().map(|&g| -g).collect();
            return Some(cholesky_solve(l, n, rhs));
        }
        ridge = if ridge.is_zero() {
            scale * T::epsilon() * lit(16.0)
        } else {
            ridge * lit(100.0)
        };
    }
    None
}

/// In-place lower Cholesky factor of a real symmetric matrix.
fn cholesky<T: Real>(a: &mut [T], n: usize) -> Option<&[T]> {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > T::zero()) {
            return None;
        }
        let djj = d.sqrt();
        a[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / djj;
        }
    }
    Some(a)
}

fn cholesky_solve<T: Real>(l: &[T], n: usize, mut b: Vec<T>) -> Vec<T> {
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[i * n + k] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[k * n + i] * b[k];
        }
        b[i] = s / l[i * n + i];
    }
    b
}

/// One element of the orthonormal Hermitian basis used by
/// [`hermitian_coordinates`], in coordinate order.
#[derive(Clone, Copy, Debug)]
pub(crate) enum BasisElement {
    Diag(usize),
    Re(usize, usize),
    Im(usize, usize),
}

pub(crate) fn hermitian_basis(k: usize) -> Vec<BasisElement> {
    let mut out: Vec<_> = (0..k).map(BasisElement::Diag).collect();
    for j in 0..k {
        for l in (j + 1)..k {
            out.push(BasisElement::Re(j, l));
            out.push(BasisElement::Im(j, l));
        }
    }
    out
}

/// `A F A†` for a basis element `F`, from two columns of `A`.
pub(crate) fn basis_congruence<T: Real>(a: &CMatrix<T>, f: BasisElement) -> CMatrix<T> {
    let r = a.rows();
    let (p, q, coef, sign): (usize, usize, Cx<T>, T) = match f {
        BasisElement::Diag(p) => (p, p, cr(lit(0.5)), T::one()),
        BasisElement::Re(p, q) => (p, q, cr(T::FRAC_1_SQRT_2()), T::one()),
        BasisElement::Im(p, q) => (p, q, Cx::new(T::zero(), T::FRAC_1_SQRT_2()), -T::one()),
    };
    // coef · (a_p a_q† + sign · a_q a_p†); the diagonal case halves two equal terms.
    CMatrix::from_fn(r, r, |i, j| {
        let u = a[(i, p)] * a[(j, q)].conj();
        let v = a[(i, q)] * a[(j, p)].conj();
        coef * (u + v * sign)
    })
}

pub(crate) fn coordinates<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    hermitian_coordinates(m)
}

pub(crate) fn matrix<T: Real>(k: usize, x: &[T]) -> CMatrix<T> {
    from_hermitian_coordinates(k, x)
}
