//! Schur complement assembly and factorization.
//!
//! `M_kl = Σ_b tr(A_kb X_b A_lb Z_b⁻¹)` is assembled block by block. Dense
//! coefficients go through `G_k = X A_k Z⁻¹` and a single matrix product;
//! pairs of sparse coefficients are summed entry by entry.

use nalgebra::{Cholesky, DMatrix, DVector};

use super::block::{Mat, RealBlock, RealCoeff};

pub(super) fn build(blocks: &[RealBlock], x: &[Mat], zinv: &[Mat], m: usize) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m, m);
    for ((blk, xb), zb) in blocks.iter().zip(x).zip(zinv) {
        match (xb, zb) {
            (Mat::Diag(xv), Mat::Diag(zv)) => add_diag_block(&mut out, blk, xv, zv),
            (Mat::Dense(xm), Mat::Dense(zm)) => add_dense_block(&mut out, blk, xm, zm),
            _ => unreachable!("block kinds differ"),
        }
    }
    (&out + out.transpose()) * 0.5
}

fn add_diag_block(out: &mut DMatrix<f64>, blk: &RealBlock, x: &DVector<f64>, zinv: &DVector<f64>) {
    let mut by_index: Vec<Vec<(usize, f64)>> = vec![Vec::new(); blk.dim];
    for (k, c) in &blk.coeffs {
        match c {
            RealCoeff::Sparse(e) => {
                for &(i, _, v) in e {
                    by_index[i].push((*k, v));
                }
            }
            RealCoeff::Dense(a) => {
                for i in 0..blk.dim {
                    if a[(i, i)] != 0.0 {
                        by_index[i].push((*k, a[(i, i)]));
                    }
                }
            }
        }
    }
    for (i, list) in by_index.iter().enumerate() {
        let w = x[i] * zinv[i];
        for &(k, a) in list {
            for &(l, b) in list {
                out[(k, l)] += w * a * b;
            }
        }
    }
}

type SparseEntry = (usize, usize, f64);

fn add_dense_block(out: &mut DMatrix<f64>, blk: &RealBlock, x: &DMatrix<f64>, zinv: &DMatrix<f64>) {
    let n = blk.dim;
    let mut dense: Vec<(usize, &DMatrix<f64>)> = Vec::new();
    let mut sparse: Vec<(usize, &[SparseEntry])> = Vec::new();
    for (k, c) in &blk.coeffs {
        match c {
            RealCoeff::Dense(a) => dense.push((*k, a)),
            RealCoeff::Sparse(e) => sparse.push((*k, e.as_slice())),
        }
    }

    if !dense.is_empty() {
        let nd = dense.len();
        let mut avec = DMatrix::zeros(n * n, nd);
        let mut gvec = DMatrix::zeros(n * n, nd);
        for (col, (_, a)) in dense.iter().enumerate() {
            let g = x * *a * zinv;
            avec.column_mut(col).copy_from_slice(a.as_slice());
            gvec.column_mut(col).copy_from_slice(g.as_slice());
        }
        let mdd = avec.transpose() * &gvec;
        for (i, (k, _)) in dense.iter().enumerate() {
            for (j, (l, _)) in dense.iter().enumerate() {
                out[(*k, *l)] += mdd[(i, j)];
            }
        }
        for (col, (k, _)) in dense.iter().enumerate() {
            let g = gvec.column(col);
            for (l, entries) in &sparse {
                let v: f64 = entries.iter().map(|&(r, s, c)| c * g[r + s * n]).sum();
                out[(*k, *l)] += v;
                out[(*l, *k)] += v;
            }
        }
    }

    let xs = x.as_slice();
    let zs = zinv.as_slice();
    for (i, (k, ek)) in sparse.iter().enumerate() {
        for (l, el) in &sparse[i..] {
            let mut v = 0.0;
            for &(p, q, a) in ek.iter() {
                for &(r, s, c) in el.iter() {
                    v += a * c * xs[q + r * n] * zs[s + p * n];
                }
            }
            out[(*k, *l)] += v;
            if k != l {
                out[(*l, *k)] += v;
            }
        }
    }
}

/// Cholesky factor of the Schur matrix. When the factorization needed a
/// diagonal shift, solves are refined against the unshifted matrix.
pub(super) struct Factored {
    m: DMatrix<f64>,
    chol: BlockedCholesky,
    shifted: bool,
}

impl Factored {
    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let mut x = self.chol.solve(rhs);
        if self.shifted {
            for _ in 0..REFINEMENT_STEPS {
                let r = rhs - &self.m * &x;
                x += self.chol.solve(&r);
            }
        }
        x
    }
}

const REFINEMENT_STEPS: usize = 3;

const CHOLESKY_BLOCK: usize = 128;

/// Right-looking blocked Cholesky; the trailing updates are matrix products.
pub(super) struct BlockedCholesky {
    l: DMatrix<f64>,
}

impl BlockedCholesky {
    pub fn new(mut a: DMatrix<f64>) -> Option<Self> {
        let n = a.nrows();
        let mut k = 0;
        while k < n {
            let b = CHOLESKY_BLOCK.min(n - k);
            let l11 = Cholesky::new(a.view((k, k), (b, b)).clone_owned())?.unpack();
            a.view_mut((k, k), (b, b)).copy_from(&l11);
            let rest = n - k - b;
            if rest > 0 {
                // L21 = A21 L11^{-T}
                let l21t = l11.solve_lower_triangular(&a.view((k + b, k), (rest, b)).transpose())?;
                let l21 = l21t.transpose();
                a.view_mut((k + b, k), (rest, b)).copy_from(&l21);
                a.view_mut((k + b, k + b), (rest, rest)).gemm(-1.0, &l21, &l21t, 1.0);
            }
            k += b;
        }
        a.fill_upper_triangle(0.0, 1);
        Some(Self { l: a })
    }

    pub fn solve(&self, rhs: &DVector<f64>) -> DVector<f64> {
        let y = self.l.solve_lower_triangular(rhs).expect("nonzero diagonal");
        self.l.tr_solve_lower_triangular(&y).expect("nonzero diagonal")
    }
}

/// Cholesky factorization with escalating diagonal regularization.
pub(super) fn factor(m: DMatrix<f64>) -> Option<Factored> {
    let n = m.nrows();
    if let Some(chol) = BlockedCholesky::new(m.clone()) {
        return Some(Factored { m, chol, shifted: false });
    }
    let scale = (0..n).map(|i| m[(i, i)].abs()).fold(0.0, f64::max).max(1e-300);
    let mut reg = 1e-12 * scale;
    for _ in 0..8 {
        let mut shifted = m.clone();
        for i in 0..n {
            shifted[(i, i)] += reg;
        }
        if let Some(chol) = BlockedCholesky::new(shifted) {
            return Some(Factored { m, chol, shifted: true });
        }
        reg *= 100.0;
    }
    None
}

/// Indices of a maximal well-conditioned independent subset of the rows of a
/// Gram matrix, by greedy diagonal pivoting.
pub(super) fn independent_rows(gram: &DMatrix<f64>, rel_tol: f64) -> Vec<usize> {
    let n = gram.nrows();
    if n == 0 {
        return Vec::new();
    }
    // Fast path: a clean Cholesky with well-sized pivots means full rank.
    if let Some(ch) = BlockedCholesky::new(gram.clone()) {
        let l = &ch.l;
        let ok = (0..n).all(|i| {
            let g = gram[(i, i)];
            g > 0.0 && l[(i, i)] * l[(i, i)] > rel_tol * g
        });
        if ok {
            return (0..n).collect();
        }
    }

    let mut residual: Vec<f64> = (0..n).map(|i| gram[(i, i)]).collect();
    let d0 = residual.iter().copied().fold(0.0, f64::max);
    let mut chosen = Vec::new();
    let mut used = vec![false; n];
    // Columns of the partial factor, stored row-major by pivot.
    let mut factor_cols: Vec<Vec<f64>> = Vec::new();
    while chosen.len() < n {
        let (piv, &dmax) = residual
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("unused index remains");
        if dmax <= rel_tol * d0 {
            break;
        }
        let root = dmax.sqrt();
        let mut col: Vec<f64> = (0..n).map(|i| gram[(i, piv)]).collect();
        for prev in &factor_cols {
            let f = prev[piv];
            if f != 0.0 {
                for (c, p) in col.iter_mut().zip(prev) {
                    *c -= f * p;
                }
            }
        }
        for c in col.iter_mut() {
            *c /= root;
        }
        for i in 0..n {
            if !used[i] {
                residual[i] -= col[i] * col[i];
            }
        }
        used[piv] = true;
        chosen.push(piv);
        factor_cols.push(col);
    }
    chosen.sort_unstable();
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_rows_drops_dependent() {
        // rows: e1, e2, e1 + e2
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let g = &a * a.transpose();
        let keep = independent_rows(&g, 1e-10);
        assert_eq!(keep.len(), 2);
        let full = DMatrix::<f64>::identity(4, 4);
        assert_eq!(independent_rows(&full, 1e-10), vec![0, 1, 2, 3]);
    }

    #[test]
    fn blocked_cholesky_matches_unblocked() {
        let n = 250;
        let b = DMatrix::from_fn(n, n, |i, j| ((i * 7 + j * 13) % 17) as f64 / 17.0 - 0.5);
        let a = &b * b.transpose() + DMatrix::identity(n, n);
        let blocked = BlockedCholesky::new(a.clone()).unwrap();
        let plain = Cholesky::new(a.clone()).unwrap();
        assert!((&blocked.l - plain.l()).amax() < 1e-10);
        let rhs = DVector::from_fn(n, |i, _| i as f64);
        let x = blocked.solve(&rhs);
        assert!((&a * x - rhs).amax() < 1e-8);
        assert!(BlockedCholesky::new(-a).is_none());
    }

    #[test]
    fn factor_regularizes_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(factor(m).is_some());
    }
}
