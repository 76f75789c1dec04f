//! Primal barrier: `M_i = B_i G_i B_i†` with `G_i ≻ 0` and `I − Σ M_i ≻ 0`.

use crate::matrix::CMatrix;
use crate::scalar::Real;

use super::newton::{basis_congruence, coordinates, hermitian_basis, matrix, Barrier, Local};

pub(crate) struct Block<T> {
    pub outcome: usize,
    pub basis: CMatrix<T>,
    /// `η_i B_i† ρ_i B_i`.
    pub weight: CMatrix<T>,
}

impl<T: Real> Block<T> {
    fn k(&self) -> usize {
        self.basis.cols()
    }
}

pub(crate) struct PrimalBarrier<T> {
    pub dim: usize,
    pub blocks: Vec<Block<T>>,
    offsets: Vec<usize>,
}

impl<T: Real> PrimalBarrier<T> {
    pub fn new(dim: usize, blocks: Vec<Block<T>>) -> Self {
        let mut offsets = Vec::with_capacity(blocks.len() + 1);
        let mut acc = 0;
        for b in &blocks {
            offsets.push(acc);
            acc += b.k() * b.k();
        }
        offsets.push(acc);
        Self {
            dim,
            blocks,
            offsets,
        }
    }

    pub fn unpack(&self, x: &[T]) -> Vec<CMatrix<T>> {
        self.blocks
            .iter()
            .enumerate()
            .map(|(i, b)| matrix(b.k(), &x[self.offsets[i]..self.offsets[i + 1]]))
            .collect()
    }

    pub fn pack(&self, gs: &[CMatrix<T>]) -> Vec<T> {
        gs.iter().flat_map(coordinates).collect()
    }

    /// `Σ B_i G_i B_i†` per block, in block order.
    pub fn outcome_operators(&self, x: &[T]) -> Vec<CMatrix<T>> {
        self.unpack(x)
            .iter()
            .zip(&self.blocks)
            .map(|(g, b)| b.basis.congruence(g))
            .collect()
    }

    /// `G_i = ε/(n k_i) · I`, strictly feasible.
    pub fn initial_point(&self, n: usize, eps: T) -> Vec<T> {
        let gs: Vec<_> = self
            .blocks
            .iter()
            .map(|b| {
                let k = b.k();
                let s = eps / T::from_usize(n * k).expect("size");
                CMatrix::identity(k).scale(s)
            })
            .collect();
        self.pack(&gs)
    }
}

impl<T: Real> Barrier<T> for PrimalBarrier<T> {
    fn len(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    fn nu(&self) -> usize {
        self.dim + self.blocks.iter().map(|b| b.k()).sum::<usize>()
    }

    fn objective(&self, x: &[T]) -> T {
        self.unpack(x)
            .iter()
            .zip(&self.blocks)
            .map(|(g, b)| b.weight.trace_product(g).re)
            .sum()
    }

    fn local(&self, x: &[T], t: T) -> Option<Local<T>> {
        let gs = self.unpack(x);
        let mut ginv = Vec::with_capacity(gs.len());
        let mut slack = CMatrix::identity(self.dim);
        for (g, b) in gs.iter().zip(&self.blocks) {
            ginv.push(g.hpd_inverse_logdet()?.0);
            slack = &slack - &b.basis.congruence(g);
        }
        let (sinv, _) = slack.hpd_inverse_logdet()?;

        let nb = self.blocks.len();
        let sb: Vec<CMatrix<T>> = self.blocks.iter().map(|b| &sinv * &b.basis).collect();
        // q[i][j] = B_i† S⁻¹ B_j
        let q: Vec<Vec<CMatrix<T>>> = (0..nb)
            .map(|i| {
                let bi = self.blocks[i].basis.adjoint();
                (0..nb).map(|j| &bi * &sb[j]).collect()
            })
            .collect();

        let n = self.len();
        let mut gradient = vec![T::zero(); n];
        for i in 0..nb {
            let g = &(&q[i][i] - &ginv[i]) - &self.blocks[i].weight.scale(t);
            gradient[self.offsets[i]..self.offsets[i + 1]].copy_from_slice(&coordinates(&g));
        }

        let mut hessian = vec![T::zero(); n * n];
        for j in 0..nb {
            for (b, f) in hermitian_basis(self.blocks[j].k()).into_iter().enumerate() {
                let col = self.offsets[j] + b;
                for i in 0..nb {
                    let mut y = basis_congruence(&q[i][j], f);
                    if i == j {
                        y = &y + &basis_congruence(&ginv[j], f);
                    }
                    for (r, v) in coordinates(&y).into_iter().enumerate() {
                        hessian[(self.offsets[i] + r) * n + col] = v;
                    }
                }
            }
        }
        Some(Local { gradient, hessian })
    }
}
