//! Real block-diagonal storage used inside the interior-point iteration.

use nalgebra::{DMatrix, DVector};

/// One real block: dense symmetric or diagonal.
#[derive(Debug, Clone)]
pub(super) enum Mat {
    Dense(DMatrix<f64>),
    Diag(DVector<f64>),
}

impl Mat {
    pub fn identity(dim: usize, diag: bool, scale: f64) -> Self {
        if diag {
            Mat::Diag(DVector::from_element(dim, scale))
        } else {
            Mat::Dense(DMatrix::identity(dim, dim) * scale)
        }
    }

    pub fn dot(&self, other: &Mat) -> f64 {
        match (self, other) {
            (Mat::Dense(a), Mat::Dense(b)) => a.dot(b),
            (Mat::Diag(a), Mat::Diag(b)) => a.dot(b),
            _ => unreachable!("block kinds differ"),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &Mat) -> Mat {
        match (self, other) {
            (Mat::Dense(a), Mat::Dense(b)) => Mat::Dense(a + b * alpha),
            (Mat::Diag(a), Mat::Diag(b)) => Mat::Diag(a + b * alpha),
            _ => unreachable!("block kinds differ"),
        }
    }

    pub fn scale(&self, alpha: f64) -> Mat {
        match self {
            Mat::Dense(a) => Mat::Dense(a * alpha),
            Mat::Diag(a) => Mat::Diag(a * alpha),
        }
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        match (self, other) {
            (Mat::Dense(a), Mat::Dense(b)) => Mat::Dense(a * b),
            (Mat::Diag(a), Mat::Diag(b)) => Mat::Diag(a.component_mul(b)),
            _ => unreachable!("block kinds differ"),
        }
    }

    pub fn symmetrize(&self) -> Mat {
        match self {
            Mat::Dense(a) => Mat::Dense((a + a.transpose()) * 0.5),
            Mat::Diag(_) => self.clone(),
        }
    }

    /// Inverse of a positive definite block, `None` if not PD.
    pub fn inverse_pd(&self) -> Option<Mat> {
        match self {
            Mat::Dense(a) => {
                let inv = a.clone().cholesky()?.inverse();
                Some(Mat::Dense((&inv + inv.transpose()) * 0.5))
            }
            Mat::Diag(a) => {
                if a.iter().all(|&v| v > 0.0) {
                    Some(Mat::Diag(a.map(|v| 1.0 / v)))
                } else {
                    None
                }
            }
        }
    }

    /// Largest `α ≤ cap` keeping `self + α d` positive semidefinite.
    ///
    /// `self` must be positive definite.
    pub fn max_step(&self, d: &Mat, cap: f64) -> f64 {
        let lmin = match (self, d) {
            (Mat::Diag(x), Mat::Diag(dx)) => {
                let mut step = cap;
                for (xi, di) in x.iter().zip(dx.iter()) {
                    if *di < 0.0 {
                        step = step.min(-xi / di);
                    }
                }
                return step;
            }
            (Mat::Dense(x), Mat::Dense(dx)) => {
                let Some(chol) = x.clone().cholesky() else {
                    return 0.0;
                };
                let l = chol.l();
                let Some(t) = l.solve_lower_triangular(dx) else {
                    return 0.0;
                };
                let Some(w) = l.solve_lower_triangular(&t.transpose()) else {
                    return 0.0;
                };
                let w = (&w + w.transpose()) * 0.5;
                w.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
            }
            _ => unreachable!("block kinds differ"),
        };
        if lmin >= 0.0 {
            cap
        } else {
            cap.min(-1.0 / lmin)
        }
    }

}

/// Coefficient of one constraint on one real block.
#[derive(Debug, Clone)]
pub(super) enum RealCoeff {
    /// Full list of nonzero entries `(i, j, v)` of a symmetric matrix (both
    /// triangles present).
    Sparse(Vec<(usize, usize, f64)>),
    Dense(DMatrix<f64>),
}

impl RealCoeff {
    pub fn dot(&self, m: &Mat) -> f64 {
        match (self, m) {
            (RealCoeff::Sparse(e), Mat::Dense(x)) => e.iter().map(|&(i, j, v)| v * x[(i, j)]).sum(),
            (RealCoeff::Sparse(e), Mat::Diag(x)) => e.iter().map(|&(i, _, v)| v * x[i]).sum(),
            (RealCoeff::Dense(a), Mat::Dense(x)) => a.dot(x),
            (RealCoeff::Dense(a), Mat::Diag(x)) => a.diagonal().dot(x),
        }
    }

    /// `acc += alpha * self`.
    pub fn add_to(&self, alpha: f64, acc: &mut Mat) {
        match (self, acc) {
            (RealCoeff::Sparse(e), Mat::Dense(x)) => {
                for &(i, j, v) in e {
                    x[(i, j)] += alpha * v;
                }
            }
            (RealCoeff::Sparse(e), Mat::Diag(x)) => {
                for &(i, _, v) in e {
                    x[i] += alpha * v;
                }
            }
            (RealCoeff::Dense(a), Mat::Dense(x)) => *x += a * alpha,
            (RealCoeff::Dense(a), Mat::Diag(x)) => *x += a.diagonal() * alpha,
        }
    }

}

/// Constraint data of one real block.
#[derive(Debug, Clone)]
pub(super) struct RealBlock {
    pub dim: usize,
    pub diag: bool,
    /// `(constraint index, coefficient)`, at most one entry per constraint.
    pub coeffs: Vec<(usize, RealCoeff)>,
    pub objective: Mat,
}

impl RealBlock {
    /// Keeps only the listed constraints, renumbering them by position in `keep`.
    pub fn restrict(&self, new_index: &[Option<usize>]) -> RealBlock {
        RealBlock {
            dim: self.dim,
            diag: self.diag,
            coeffs: self
                .coeffs
                .iter()
                .filter_map(|(k, c)| new_index[*k].map(|nk| (nk, c.clone())))
                .collect(),
            objective: self.objective.clone(),
        }
    }
}

/// `A(M)_k = Σ_b ⟨A_kb, M_b⟩`.
pub(super) fn apply_a(blocks: &[RealBlock], m: &[Mat], n_cons: usize) -> DVector<f64> {
    let mut out = DVector::zeros(n_cons);
    for (blk, mb) in blocks.iter().zip(m) {
        for (k, c) in &blk.coeffs {
            out[*k] += c.dot(mb);
        }
    }
    out
}

/// `Aᵀ(y)_b = Σ_k y_k A_kb`.
pub(super) fn apply_at(blocks: &[RealBlock], y: &DVector<f64>) -> Vec<Mat> {
    blocks
        .iter()
        .map(|blk| {
            let mut acc = Mat::identity(blk.dim, blk.diag, 0.0);
            for (k, c) in &blk.coeffs {
                if y[*k] != 0.0 {
                    c.add_to(y[*k], &mut acc);
                }
            }
            acc
        })
        .collect()
}
