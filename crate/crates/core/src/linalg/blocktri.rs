use nalgebra::DMatrix;

use super::DENSE_LIMIT;
use crate::{Error, Result};

/// Symmetric block-tridiagonal matrix with `n` square blocks of size `k`.
///
/// `sub[t]` holds the block at block-row `t+1`, block-column `t`; the upper
/// off-diagonal blocks are implied by symmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTridiag {
    pub diag: Vec<DMatrix<f64>>,
    pub sub: Vec<DMatrix<f64>>,
}

impl BlockTridiag {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self {
            diag: vec![DMatrix::zeros(k, k); n],
            sub: vec![DMatrix::zeros(k, k); n.saturating_sub(1)],
        }
    }

    /// Block-diagonal matrix with the given blocks.
    pub fn block_diag(blocks: Vec<DMatrix<f64>>) -> Self {
        let k = blocks.first().map_or(0, |b| b.nrows());
        let n = blocks.len();
        Self {
            diag: blocks,
            sub: vec![DMatrix::zeros(k, k); n.saturating_sub(1)],
        }
    }

    pub fn nblocks(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.diag.first().map_or(0, |b| b.nrows())
    }

    pub fn dim(&self) -> usize {
        self.nblocks() * self.block_size()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            diag: self.diag.iter().map(|b| b * c).collect(),
            sub: self.sub.iter().map(|b| b * c).collect(),
        }
    }

    /// `self + c * other`.
    pub fn add_scaled(&self, other: &Self, c: f64) -> Self {
        assert_eq!(self.nblocks(), other.nblocks());
        Self {
            diag: self
                .diag
                .iter()
                .zip(&other.diag)
                .map(|(a, b)| a + b * c)
                .collect(),
            sub: self
                .sub
                .iter()
                .zip(&other.sub)
                .map(|(a, b)| a + b * c)
                .collect(),
        }
    }

    /// Product with a dense `(n*k) x m` matrix.
    pub fn mul(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, k) = (self.nblocks(), self.block_size());
        assert_eq!(x.nrows(), n * k);
        let mut out = DMatrix::zeros(n * k, x.ncols());
        for t in 0..n {
            let mut acc = &self.diag[t] * x.rows(t * k, k);
            if t > 0 {
                acc += &self.sub[t - 1] * x.rows((t - 1) * k, k);
            }
            if t + 1 < n {
                acc += self.sub[t].transpose() * x.rows((t + 1) * k, k);
            }
            out.rows_mut(t * k, k).copy_from(&acc);
        }
        out
    }

    /// `x' A x` for a dense `(n*k) x m` matrix.
    pub fn quad(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        x.transpose() * self.mul(x)
    }

    /// True if every block is exactly zero.
    pub fn is_zero(&self) -> bool {
        self.diag
            .iter()
            .chain(&self.sub)
            .all(|b| b.iter().all(|v| *v == 0.0))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let (n, k) = (self.nblocks(), self.block_size());
        assert!(
            n * k <= DENSE_LIMIT,
            "refusing to densify a {0}x{0} band matrix",
            n * k
        );
        let mut d = DMatrix::zeros(n * k, n * k);
        for t in 0..n {
            d.view_mut((t * k, t * k), (k, k)).copy_from(&self.diag[t]);
            if t + 1 < n {
                d.view_mut(((t + 1) * k, t * k), (k, k))
                    .copy_from(&self.sub[t]);
                d.view_mut((t * k, (t + 1) * k), (k, k))
                    .copy_from(&self.sub[t].transpose());
            }
        }
        d
    }

    /// Reverse the block order (flip time).
    pub fn reversed(&self) -> Self {
        Self {
            diag: self.diag.iter().rev().cloned().collect(),
            sub: self.sub.iter().rev().map(|b| b.transpose()).collect(),
        }
    }
}

/// Lower block-bidiagonal Cholesky factor `L` of a [`BlockTridiag`], `P = L L'`.
#[derive(Clone, Debug)]
pub struct BlockCholesky {
    pub diag: Vec<DMatrix<f64>>,
    pub sub: Vec<DMatrix<f64>>,
}

impl BlockCholesky {
    pub fn factor(p: &BlockTridiag) -> Result<Self> {
        let n = p.nblocks();
        let mut diag: Vec<DMatrix<f64>> = Vec::with_capacity(n);
        let mut sub: Vec<DMatrix<f64>> = Vec::with_capacity(n.saturating_sub(1));
        for t in 0..n {
            let mut schur = p.diag[t].clone();
            if t > 0 {
                // L_{t,t-1}' = L_{t-1,t-1}⁻¹ P_{t,t-1}'
                let lt = diag[t - 1]
                    .solve_lower_triangular(&p.sub[t - 1].transpose())
                    .ok_or_else(|| Error::CholeskyFailure(format!("block {}", t - 1)))?;
                let l = lt.transpose();
                schur -= &l * &lt;
                sub.push(l);
            }
            let schur = super::symmetrize(&schur);
            let c = nalgebra::Cholesky::new(schur)
                .ok_or_else(|| Error::CholeskyFailure(format!("diagonal block {t}")))?;
            diag.push(c.l());
        }
        Ok(Self { diag, sub })
    }

    pub fn nblocks(&self) -> usize {
        self.diag.len()
    }

    pub fn block_size(&self) -> usize {
        self.diag.first().map_or(0, |b| b.nrows())
    }

    /// log|P|.
    pub fn logdet(&self) -> f64 {
        2.0 * self
            .diag
            .iter()
            .flat_map(|d| d.diagonal().iter().map(|v| v.ln()).collect::<Vec<_>>())
            .sum::<f64>()
    }

    /// Solve `L z = b`.
    pub fn solve_lower(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, k) = (self.nblocks(), self.block_size());
        let mut z = DMatrix::zeros(n * k, b.ncols());
        for t in 0..n {
            let mut rhs = b.rows(t * k, k).into_owned();
            if t > 0 {
                rhs -= &self.sub[t - 1] * z.rows((t - 1) * k, k);
            }
            let zt = self.diag[t]
                .solve_lower_triangular(&rhs)
                .expect("nonsingular factor");
            z.rows_mut(t * k, k).copy_from(&zt);
        }
        z
    }

    /// Solve `L' x = z`.
    pub fn solve_upper(&self, z: &DMatrix<f64>) -> DMatrix<f64> {
        let (n, k) = (self.nblocks(), self.block_size());
        let mut x = DMatrix::zeros(n * k, z.ncols());
        for t in (0..n).rev() {
            let mut rhs = z.rows(t * k, k).into_owned();
            if t + 1 < n {
                rhs -= self.sub[t].transpose() * x.rows((t + 1) * k, k);
            }
            let xt = self.diag[t]
                .tr_solve_lower_triangular(&rhs)
                .expect("nonsingular factor");
            x.rows_mut(t * k, k).copy_from(&xt);
        }
        x
    }

    /// Solve `P x = b`.
    pub fn solve(&self, b: &DMatrix<f64>) -> DMatrix<f64> {
        self.solve_upper(&self.solve_lower(b))
    }

    /// Diagonal and first sub-diagonal blocks of `P⁻¹`.
    pub fn selected_inverse(&self) -> BlockTridiag {
        let (n, k) = (self.nblocks(), self.block_size());
        let id = DMatrix::<f64>::identity(k, k);
        let linv: Vec<DMatrix<f64>> = self
            .diag
            .iter()
            .map(|l| l.solve_lower_triangular(&id).expect("nonsingular factor"))
            .collect();
        let mut diag = vec![DMatrix::zeros(k, k); n];
        let mut sub = vec![DMatrix::zeros(k, k); n.saturating_sub(1)];
        diag[n - 1] = linv[n - 1].transpose() * &linv[n - 1];
        for t in (0..n - 1).rev() {
            // Σ_{t+1,t} = -Σ_{t+1,t+1} L_{t+1,t} L_tt⁻¹
            let s_next = -&diag[t + 1] * &self.sub[t] * &linv[t];
            // Σ_tt = L_tt⁻ᵀ (L_tt⁻¹ - L_{t+1,t}' Σ_{t+1,t})
            let d = linv[t].transpose() * (&linv[t] - self.sub[t].transpose() * &s_next);
            diag[t] = super::symmetrize(&d);
            sub[t] = s_next;
        }
        BlockTridiag { diag, sub }
    }
}
