//! Hermitian operator algebra.
//!
//! Everything downstream works with [`HermitianOperator`] values and with
//! projectors derived from their spectra; individual eigenvectors are only used
//! where a concrete witness vector is needed.
//!
//! Conventions:
//! - Inputs are symmetrized to `(A + A†)/2` once they pass the
//!   [`HERMITIAN_TOL`] check.
//! - An eigenvalue `λ` counts as nonzero iff `λ > rank_tol · max(λ_max, 1)`.
//! - Kronecker products are row-major: the left factor is the most significant
//!   index, so step 1 of a sequence is the leftmost tensor factor.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::scalar::{cr, cx, lit, to_f64, Cx, Real};

/// Absolute max-entry tolerance on `A − A†`.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Relative eigenvalue cut used for supports and kernels.
pub const RANK_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator<T> {
    m: CMatrix<T>,
}

impl<T: Real> HermitianOperator<T> {
    /// Validates and symmetrizes a square matrix.
    pub fn new(m: CMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare {
                rows: m.rows(),
                cols: m.cols(),
            });
        }
        if !m.is_finite() {
            return Err(Error::NonFinite);
        }
        let defect = m.hermitian_defect();
        if defect > lit(HERMITIAN_TOL) {
            return Err(Error::NotHermitian {
                defect: to_f64(defect),
            });
        }
        Ok(Self {
            m: m.hermitian_part(),
        })
    }

    /// Symmetrizes without checking; for operators Hermitian by construction.
    pub fn from_hermitian_part(m: &CMatrix<T>) -> Self {
        debug_assert!(m.is_square());
        Self {
            m: m.hermitian_part(),
        }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        Self::new(CMatrix::from_real_rows(rows))
    }

    pub fn diag(values: &[T]) -> Self {
        Self {
            m: CMatrix::diag_real(values),
        }
    }

    pub fn diag_f64(values: &[f64]) -> Self {
        let v: Vec<T> = values.iter().map(|&x| lit(x)).collect();
        Self::diag(&v)
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            m: CMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            m: CMatrix::identity(dim),
        }
    }

    /// `|v⟩⟨v|`.
    pub fn ket_bra(v: &[Cx<T>]) -> Self {
        Self::from_hermitian_part(&CMatrix::outer(v))
    }

    /// `|k⟩⟨k|` in dimension `dim`.
    pub fn basis_projector(dim: usize, k: usize) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = Cx::one();
        Self { m }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m.rows()
    }

    #[inline]
    pub fn matrix(&self) -> &CMatrix<T> {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix<T> {
        self.m
    }

    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    /// `Re Tr(self · other)`; exact for Hermitian pairs.
    pub fn inner(&self, other: &Self) -> T {
        self.m.trace_product(&other.m).re
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            m: &self.m - &other.m,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self { m: self.m.scale(s) }
    }

    /// `s · self + t · other`.
    pub fn axpby(&self, s: T, other: &Self, t: T) -> Self {
        Self {
            m: &self.m.scale(s) + &other.m.scale(t),
        }
    }

    /// `P · self · P` for Hermitian `P`.
    pub fn sandwich(&self, p: &HermitianOperator<T>) -> Self {
        Self::from_hermitian_part(&(&(&p.m * &self.m) * &p.m))
    }

    /// `B · self · B†` for arbitrary `B`.
    pub fn congruence(&self, b: &CMatrix<T>) -> Self {
        Self::from_hermitian_part(&b.congruence(&self.m))
    }

    /// `B† · self · B` for arbitrary `B`.
    pub fn adjoint_congruence(&self, b: &CMatrix<T>) -> Self {
        Self::from_hermitian_part(&b.adjoint_congruence(&self.m))
    }

    pub fn max_abs(&self) -> T {
        self.m.max_abs()
    }

    /// `max |self − other|` entrywise.
    pub fn distance(&self, other: &Self) -> T {
        (&self.m - &other.m).max_abs()
    }

    pub fn kron(&self, other: &Self) -> Self {
        kron(self, other)
    }

    pub fn eig(&self) -> EigenSystem<T> {
        eig_hermitian(self)
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eig().values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_eigenvalue(&self) -> T {
        self.eig().values.last().copied().unwrap_or_else(T::zero)
    }
}

/// Orthogonal projector with its rank.
#[derive(Clone, Debug, PartialEq)]
pub struct Projector<T> {
    pub operator: HermitianOperator<T>,
    pub rank: usize,
}

impl<T: Real> Projector<T> {
    fn from_vectors(dim: usize, vectors: &[Vec<Cx<T>>]) -> Self {
        let mut m = CMatrix::zeros(dim, dim);
        for v in vectors {
            m = &m + &CMatrix::outer(v);
        }
        Self {
            operator: HermitianOperator::from_hermitian_part(&m),
            rank: vectors.len(),
        }
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// `I − P`.
    pub fn complement(&self) -> Self {
        let d = self.dim();
        Self {
            operator: HermitianOperator::identity(d).sub(&self.operator),
            rank: d - self.rank,
        }
    }

    /// Idempotence residual `max |P² − P|`.
    pub fn idempotence_defect(&self) -> T {
        let p = self.operator.matrix();
        (&(p * p) - p).max_abs()
    }

    /// Orthonormal basis of the range (`dim × rank`), from the operator's own
    /// eigenvectors with eigenvalue near one.
    pub fn range_basis(&self) -> CMatrix<T> {
        let es = eig_hermitian(&self.operator);
        let d = self.dim();
        let cols: Vec<Vec<Cx<T>>> = (0..d)
            .rev()
            .take(self.rank)
            .map(|k| es.vector(k))
            .collect();
        CMatrix::from_columns(d, &cols)
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            operator: kron(&self.operator, &other.operator),
            rank: self.rank * other.rank,
        }
    }
}

/// Eigenvalues in ascending order with matching orthonormal eigenvector columns.
#[derive(Clone, Debug)]
pub struct EigenSystem<T> {
    pub values: Vec<T>,
    pub vectors: CMatrix<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn vector(&self, k: usize) -> Vec<Cx<T>> {
        self.vectors.column(k)
    }

    pub fn max_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }

    /// `Σ f(λ_k) v_k v_k†` over the eigenpairs.
    pub fn apply(&self, f: impl Fn(T) -> T) -> HermitianOperator<T> {
        let d = self.vectors.rows();
        let mut m = CMatrix::zeros(d, d);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w.is_zero() {
                continue;
            }
            let v = self.vector(k);
            for i in 0..d {
                let vi = v[i] * w;
                for j in 0..d {
                    m[(i, j)] += vi * v[j].conj();
                }
            }
        }
        HermitianOperator::from_hermitian_part(&m)
    }

    pub fn reconstruct(&self) -> HermitianOperator<T> {
        self.apply(|x| x)
    }

    /// Threshold separating nonzero from zero eigenvalues for a PSD operator.
    pub fn rank_cut(&self, rank_tol: T) -> T {
        rank_tol * self.max_value().max(T::one())
    }
}

/// Eigendecomposition of a Hermitian operator by cyclic complex Jacobi
/// rotations.
pub fn eig_hermitian<T: Real>(a: &HermitianOperator<T>) -> EigenSystem<T> {
    let n = a.dim();
    let mut m = a.matrix().clone();
    let mut v = CMatrix::<T>::identity(n);
    let eps = T::epsilon();
    let scale = m.max_abs().max(T::min_positive_value());

    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[(p, q)].norm_sqr();
            }
        }
        if off.sqrt() <= eps * eps.sqrt() * scale || off.is_zero() {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag <= T::min_positive_value() || mag <= eps * eps * scale {
                    m[(p, q)] = Cx::zero();
                    m[(q, p)] = Cx::zero();
                    continue;
                }
                let phase = apq / mag;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let theta = (aqq - app) / (mag + mag);
                let t = if theta.is_infinite() {
                    T::zero()
                } else {
                    let sign = if theta >= T::zero() { T::one() } else { -T::one() };
                    sign / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                let ph_conj = phase.conj();
                // Columns: A ← A W with W = [[c, s], [−s e^{−iφ}, c e^{−iφ}]].
                for k in 0..n {
                    let akp = m[(k, p)];
                    let akq = m[(k, q)];
                    m[(k, p)] = akp * c - akq * ph_conj * s;
                    m[(k, q)] = akp * s + akq * ph_conj * c;
                }
                // Rows: A ← W† A.
                for k in 0..n {
                    let apk = m[(p, k)];
                    let aqk = m[(q, k)];
                    m[(p, k)] = apk * c - aqk * phase * s;
                    m[(q, k)] = apk * s + aqk * phase * c;
                }
                m[(p, q)] = Cx::zero();
                m[(q, p)] = Cx::zero();
                m[(p, p)] = cr(m[(p, p)].re);
                m[(q, q)] = cr(m[(q, q)].re);
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c - vkq * ph_conj * s;
                    v[(k, q)] = vkp * s + vkq * ph_conj * c;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .re
            .partial_cmp(&m[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    EigenSystem { values, vectors }
}

/// Checks hermiticity of a raw matrix before decomposing it.
pub fn try_eig_hermitian<T: Real>(m: &CMatrix<T>) -> Result<EigenSystem<T>> {
    HermitianOperator::new(m.clone()).map(|h| eig_hermitian(&h))
}

/// `min λ ≥ −tol`.
pub fn is_psd<T: Real>(a: &HermitianOperator<T>, tol: T) -> bool {
    a.min_eigenvalue() >= -tol
}

fn psd_eigensystem<T: Real>(a: &HermitianOperator<T>, rank_tol: T) -> Result<EigenSystem<T>> {
    let es = eig_hermitian(a);
    let cut = es.rank_cut(rank_tol);
    let min = es.values.first().copied().unwrap_or_else(T::zero);
    if min < -cut {
        return Err(Error::NotPsd {
            min_eigenvalue: to_f64(min),
        });
    }
    Ok(es)
}

/// Projector onto the span of eigenvectors with `λ > rank_tol · max(λ_max, 1)`.
pub fn support_projector<T: Real>(a: &HermitianOperator<T>, rank_tol: T) -> Result<Projector<T>> {
    let es = psd_eigensystem(a, rank_tol)?;
    let cut = es.rank_cut(rank_tol);
    let vecs: Vec<_> = es
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > cut)
        .map(|(k, _)| es.vector(k))
        .collect();
    Ok(Projector::from_vectors(a.dim(), &vecs))
}

/// `I − support_projector(a)`.
pub fn kernel_projector<T: Real>(a: &HermitianOperator<T>, rank_tol: T) -> Result<Projector<T>> {
    support_projector(a, rank_tol).map(|p| p.complement())
}

/// Orthonormal basis (`dim × k`) of the kernel of a PSD operator, built from
/// the eigenvectors below the rank cut.
pub fn kernel_basis<T: Real>(a: &HermitianOperator<T>, rank_tol: T) -> Result<CMatrix<T>> {
    let es = psd_eigensystem(a, rank_tol)?;
    let cut = es.rank_cut(rank_tol);
    let cols: Vec<_> = es
        .values
        .iter()
        .enumerate()
        .filter(|(_, &l)| l <= cut)
        .map(|(k, _)| es.vector(k))
        .collect();
    Ok(CMatrix::from_columns(a.dim(), &cols))
}

/// Inverse square root on the support; zero on the kernel.
pub fn pinv_sqrt<T: Real>(rho: &HermitianOperator<T>, rank_tol: T) -> Result<HermitianOperator<T>> {
    let es = psd_eigensystem(rho, rank_tol)?;
    let cut = es.rank_cut(rank_tol);
    Ok(es.apply(|l| if l > cut { T::one() / l.sqrt() } else { T::zero() }))
}

pub fn kron<T: Real>(a: &HermitianOperator<T>, b: &HermitianOperator<T>) -> HermitianOperator<T> {
    HermitianOperator {
        m: a.matrix().kron(b.matrix()),
    }
}

/// `A₁ ⊗ A₂ ⊗ … ⊗ A_L`; the identity on a 1-dim space for an empty list.
pub fn kron_all<T: Real>(ops: &[HermitianOperator<T>]) -> HermitianOperator<T> {
    ops.iter()
        .fold(HermitianOperator::identity(1), |acc, op| kron(&acc, op))
}

/// Parity class `a` of bit strings, `ω₂(b) = Σ b_l mod 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn from_bit(a: u8) -> Self {
        if a.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

/// All `b ∈ Z₂^L` with `ω₂(b)` equal to the given parity, in lexicographic
/// order (`b₁` most significant).
pub fn parity_class(len: usize, parity: Parity) -> Vec<Vec<u8>> {
    assert!(len < usize::BITS as usize);
    (0..(1usize << len))
        .filter(|bits| (bits.count_ones() % 2) as u8 == parity.bit())
        .map(|bits| {
            (0..len)
                .map(|l| ((bits >> (len - 1 - l)) & 1) as u8)
                .collect()
        })
        .collect()
}

/// `2^{1−L} Σ_{ω₂(b)=a} ⊗_l [X_l + (−1)^{b_l} Y_l]`, which equals
/// `⊗X_l + (−1)^a ⊗Y_l`.
pub fn plus_minus_decomposition<T: Real>(
    xs: &[CMatrix<T>],
    ys: &[CMatrix<T>],
    parity: Parity,
) -> Result<CMatrix<T>> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::DimMismatch {
            expected: xs.len().max(1),
            found: ys.len(),
        });
    }
    for (x, y) in xs.iter().zip(ys) {
        if x.rows() != y.rows() || x.cols() != y.cols() {
            return Err(Error::DimMismatch {
                expected: x.rows() * x.cols(),
                found: y.rows() * y.cols(),
            });
        }
    }
    let sums: Vec<CMatrix<T>> = xs.iter().zip(ys).map(|(x, y)| x + y).collect();
    let diffs: Vec<CMatrix<T>> = xs.iter().zip(ys).map(|(x, y)| x - y).collect();
    let rows: usize = xs.iter().map(|x| x.rows()).product();
    let cols: usize = xs.iter().map(|x| x.cols()).product();
    let mut acc = CMatrix::zeros(rows, cols);
    for bits in parity_class(xs.len(), parity) {
        let term = bits
            .iter()
            .enumerate()
            .fold(CMatrix::identity(1), |t, (l, &b)| {
                t.kron(if b == 0 { &sums[l] } else { &diffs[l] })
            });
        acc = &acc + &term;
    }
    let weight = T::one() / T::from_u64(1u64 << (xs.len() - 1)).expect("2^(L-1) representable");
    Ok(acc.scale(weight))
}

/// Number of real coordinates of a `k × k` Hermitian matrix.
pub fn hermitian_coordinate_len(k: usize) -> usize {
    k * k
}

/// Coordinates of a Hermitian matrix in the orthonormal basis
/// `{E_jj, (E_jk + E_kj)/√2, i(E_jk − E_kj)/√2}` (trace inner product).
pub fn hermitian_coordinates<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    let k = m.rows();
    let sqrt2 = T::SQRT_2();
    let mut out = Vec::with_capacity(k * k);
    for j in 0..k {
        out.push(m[(j, j)].re);
    }
    for j in 0..k {
        for l in (j + 1)..k {
            out.push(m[(j, l)].re * sqrt2);
            out.push(m[(j, l)].im * sqrt2);
        }
    }
    out
}

/// Inverse of [`hermitian_coordinates`].
pub fn from_hermitian_coordinates<T: Real>(k: usize, x: &[T]) -> CMatrix<T> {
    assert_eq!(x.len(), k * k);
    let inv_sqrt2 = T::FRAC_1_SQRT_2();
    let mut m = CMatrix::zeros(k, k);
    for j in 0..k {
        m[(j, j)] = cr(x[j]);
    }
    let mut idx = k;
    for j in 0..k {
        for l in (j + 1)..k {
            let z = cx(x[idx] * inv_sqrt2, x[idx + 1] * inv_sqrt2);
            m[(j, l)] = z;
            m[(l, j)] = z.conj();
            idx += 2;
        }
    }
    m
}

/// Real symmetric `2k × 2k` image `[[Re X, −Im X], [Im X, Re X]]` of a
/// Hermitian matrix. Spectra coincide with each eigenvalue doubled.
pub fn real_embedding<T: Real>(m: &CMatrix<T>) -> Vec<Vec<T>> {
    let k = m.rows();
    let mut out = vec![vec![T::zero(); 2 * k]; 2 * k];
    for i in 0..k {
        for j in 0..k {
            let z = m[(i, j)];
            out[i][j] = z.re;
            out[i][j + k] = -z.im;
            out[i + k][j] = z.im;
            out[i + k][j + k] = z.re;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn diagonal_spectrum() {
        let es = eig_hermitian(&HermitianOperator::<f64>::diag_f64(&[1.0, 2.0]));
        assert_eq!(es.values, vec![1.0, 2.0]);
        assert!(close(es.vectors[(0, 0)].norm(), 1.0, 1e-15));
        assert!(close(es.vectors[(1, 1)].norm(), 1.0, 1e-15));
    }

    #[test]
    fn pauli_x_spectrum() {
        let x = HermitianOperator::<f64>::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
        let es = eig_hermitian(&x);
        assert!(close(es.values[0], -1.0, 1e-14));
        assert!(close(es.values[1], 1.0, 1e-14));
    }

    #[test]
    fn ensemble_a_average_spectrum_sorted() {
        let es = eig_hermitian(&HermitianOperator::<f64>::diag_f64(&[0.75, 0.25]));
        assert_eq!(es.values, vec![0.25, 0.75]);
    }

    #[test]
    fn complex_entries_reconstruct() {
        let m = CMatrix::from_fn(3, 3, |i, j| match (i, j) {
            (0, 1) => cx(0.3, 0.7),
            (1, 0) => cx(0.3, -0.7),
            (1, 2) => cx(-0.2, 0.1),
            (2, 1) => cx(-0.2, -0.1),
            (i, j) if i == j => cr(i as f64),
            _ => cx(0.0, 0.0),
        });
        let h = HermitianOperator::new(m).unwrap();
        let es = eig_hermitian(&h);
        assert!(es.reconstruct().distance(&h) < 1e-13);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::<f64>::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(try_eig_hermitian(&m), Err(Error::NotHermitian { .. })));
        let ns = CMatrix::<f64>::zeros(2, 3);
        assert!(matches!(HermitianOperator::new(ns), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&HermitianOperator::<f64>::identity(3), 1e-9));
        assert!(!is_psd(&HermitianOperator::<f64>::diag_f64(&[1.0, -1.0]), 1e-9));
        assert!(is_psd(&HermitianOperator::<f64>::diag_f64(&[0.0, 1.0 / 6.0]), 1e-9));
    }

    #[test]
    fn support_and_kernel_examples() {
        let a = HermitianOperator::<f64>::diag_f64(&[0.5, 0.0]);
        let p = support_projector(&a, 1e-8).unwrap();
        assert_eq!(p.rank, 1);
        assert!(p.operator.distance(&HermitianOperator::basis_projector(2, 0)) < 1e-15);
        let k = kernel_projector(&a, 1e-8).unwrap();
        assert!(k.operator.distance(&HermitianOperator::basis_projector(2, 1)) < 1e-15);

        let z = support_projector(&HermitianOperator::<f64>::zero(3), 1e-8).unwrap();
        assert_eq!(z.rank, 0);
        assert_eq!(z.operator.max_abs(), 0.0);

        let id = support_projector(&HermitianOperator::<f64>::identity(4), 1e-8).unwrap();
        assert_eq!(id.rank, 4);
        assert!(id.operator.distance(&HermitianOperator::identity(4)) < 1e-15);
        let kid = kernel_projector(&HermitianOperator::<f64>::identity(4), 1e-8).unwrap();
        assert!(kid.operator.max_abs() < 1e-15);

        let k1 = kernel_projector(&HermitianOperator::<f64>::diag_f64(&[0.0, 1.0 / 6.0]), 1e-8)
            .unwrap();
        assert!(k1.operator.distance(&HermitianOperator::basis_projector(2, 0)) < 1e-15);
    }

    #[test]
    fn support_rejects_indefinite() {
        let a = HermitianOperator::<f64>::diag_f64(&[1.0, -0.5]);
        assert!(matches!(support_projector(&a, 1e-8), Err(Error::NotPsd { .. })));
        assert!(matches!(pinv_sqrt(&a, 1e-8), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn pinv_sqrt_examples() {
        let s = pinv_sqrt(&HermitianOperator::<f64>::diag_f64(&[0.75, 0.25]), 1e-8).unwrap();
        let expect = HermitianOperator::diag_f64(&[2.0 / 3f64.sqrt(), 2.0]);
        assert!(s.distance(&expect) < 1e-14);
        let i = pinv_sqrt(&HermitianOperator::<f64>::identity(3), 1e-8).unwrap();
        assert!(i.distance(&HermitianOperator::identity(3)) < 1e-15);
        let d = pinv_sqrt(&HermitianOperator::<f64>::diag_f64(&[1.0, 0.0]), 1e-8).unwrap();
        assert!(d.distance(&HermitianOperator::diag_f64(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn kron_examples() {
        let i2 = HermitianOperator::<f64>::identity(2);
        assert!(kron(&i2, &i2).distance(&HermitianOperator::identity(4)) < 1e-15);
        let r = HermitianOperator::<f64>::diag_f64(&[0.75, 0.25]);
        let expect = HermitianOperator::diag_f64(&[9.0 / 16.0, 3.0 / 16.0, 3.0 / 16.0, 1.0 / 16.0]);
        assert!(kron(&r, &r).distance(&expect) < 1e-15);
    }

    #[test]
    fn plus_minus_scalar_examples() {
        let s = |v: f64| CMatrix::<f64>::diag_real(&[v]);
        let one = plus_minus_decomposition(&[s(3.0)], &[s(2.0)], Parity::Even).unwrap();
        assert!(close(one[(0, 0)].re, 5.0, 1e-15));
        let even = plus_minus_decomposition(&[s(2.0), s(2.0)], &[s(1.0), s(1.0)], Parity::Even)
            .unwrap();
        assert!(close(even[(0, 0)].re, 5.0, 1e-15));
        let odd = plus_minus_decomposition(&[s(2.0), s(2.0)], &[s(1.0), s(1.0)], Parity::Odd)
            .unwrap();
        assert!(close(odd[(0, 0)].re, 3.0, 1e-15));
    }

    #[test]
    fn plus_minus_rejects_mismatch() {
        let a = CMatrix::<f64>::identity(2);
        let b = CMatrix::<f64>::identity(3);
        assert!(plus_minus_decomposition(std::slice::from_ref(&a), &[b], Parity::Even).is_err());
        assert!(plus_minus_decomposition(&[a.clone(), a.clone()], &[a], Parity::Odd).is_err());
    }

    #[test]
    fn parity_classes_partition_bit_strings() {
        for len in 1..=6 {
            let even = parity_class(len, Parity::Even);
            let odd = parity_class(len, Parity::Odd);
            assert_eq!(even.len(), 1 << (len - 1));
            assert_eq!(odd.len(), 1 << (len - 1));
            let mut all: Vec<_> = even.iter().chain(&odd).cloned().collect();
            all.sort();
            all.dedup();
            assert_eq!(all.len(), 1 << len);
            assert!(even.iter().all(|b| b.iter().map(|&x| x as u32).sum::<u32>() % 2 == 0));
            assert!(odd.iter().all(|b| b.iter().map(|&x| x as u32).sum::<u32>() % 2 == 1));
        }
    }

    #[test]
    fn hermitian_coordinates_are_isometric() {
        let m = CMatrix::from_fn(3, 3, |i, j| {
            if i == j {
                cr(i as f64 - 0.5)
            } else if i < j {
                cx(0.1 * (i + j) as f64, 0.3)
            } else {
                cx(0.1 * (i + j) as f64, -0.3)
            }
        });
        let x = hermitian_coordinates(&m);
        let back = from_hermitian_coordinates(3, &x);
        assert!((&back - &m).max_abs() < 1e-15);
        let norm2: f64 = x.iter().map(|v| v * v).sum();
        assert!(close(norm2, m.trace_product(&m).re, 1e-13));
    }

    #[test]
    fn real_embedding_doubles_spectrum() {
        let m = CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => cr(1.0),
            (1, 1) => cr(-0.5),
            (0, 1) => cx(0.2, 0.4),
            _ => cx(0.2, -0.4),
        });
        let emb = real_embedding(&m);
        let emb_c = CMatrix::from_fn(4, 4, |i, j| cr(emb[i][j]));
        let big = eig_hermitian(&HermitianOperator::new(emb_c).unwrap()).values;
        let small = eig_hermitian(&HermitianOperator::new(m).unwrap()).values;
        for (k, v) in small.iter().enumerate() {
            assert!(close(big[2 * k], *v, 1e-13));
            assert!(close(big[2 * k + 1], *v, 1e-13));
        }
    }

    #[test]
    fn single_precision_path() {
        let x = HermitianOperator::<f32>::from_real_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        let es = eig_hermitian(&x);
        assert!((es.values[0] - 1.0).abs() < 1e-5);
        assert!((es.values[1] - 3.0).abs() < 1e-5);
        let s = pinv_sqrt(&HermitianOperator::<f32>::diag_f64(&[0.25, 0.0]), 1e-5).unwrap();
        assert!((s.matrix()[(0, 0)].re - 2.0).abs() < 1e-5);
    }
}
