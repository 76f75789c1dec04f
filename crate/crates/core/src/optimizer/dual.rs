//! Dual barrier: `H ≻ 0` with `B_i†(H − η_i ρ_i)B_i ≻ 0` for every outcome.

use crate::matrix::CMatrix;
use crate::scalar::Real;

use super::newton::{basis_congruence, coordinates, hermitian_basis, matrix, Barrier, Local};

pub(crate) struct Constraint<T> {
    pub basis: CMatrix<T>,
    /// `B_i† η_i ρ_i B_i`.
    pub offset: CMatrix<T>,
}

pub(crate) struct DualBarrier<T> {
    pub dim: usize,
    pub constraints: Vec<Constraint<T>>,
}

impl<T: Real> DualBarrier<T> {
    pub fn initial_point(&self, level: T) -> Vec<T> {
        coordinates(&CMatrix::identity(self.dim).scale(level))
    }

    pub fn unpack(&self, x: &[T]) -> CMatrix<T> {
        matrix(self.dim, x)
    }
}

impl<T: Real> Barrier<T> for DualBarrier<T> {
    fn len(&self) -> usize {
        self.dim * self.dim
    }

    fn nu(&self) -> usize {
        self.dim + self.constraints.iter().map(|c| c.basis.cols()).sum::<usize>()
    }

    fn objective(&self, x: &[T]) -> T {
        x[..self.dim].iter().copied().sum()
    }

    fn local(&self, x: &[T], t: T) -> Option<Local<T>> {
        let h = self.unpack(x);
        let (hinv, _) = h.hpd_inverse_logdet()?;
        let mut ks = Vec::with_capacity(self.constraints.len());
        for c in &self.constraints {
            let z = &c.basis.adjoint_congruence(&h) - &c.offset;
            let (zinv, _) = z.hpd_inverse_logdet()?;
            ks.push(c.basis.congruence(&zinv));
        }

        let mut g = &CMatrix::identity(self.dim).scale(t) - &hinv;
        for k in &ks {
            g = &g - k;
        }
        let gradient = coordinates(&g);

        let n = self.len();
        let mut hessian = vec![T::zero(); n * n];
        for (col, f) in hermitian_basis(self.dim).into_iter().enumerate() {
            let mut y = basis_congruence(&hinv, f);
            for k in &ks {
                y = &y + &basis_congruence(k, f);
            }
            for (r, v) in coordinates(&y).into_iter().enumerate() {
                hessian[r * n + col] = v;
            }
        }
        Some(Local { gradient, hessian })
    }
}
