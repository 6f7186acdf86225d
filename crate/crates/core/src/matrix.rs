//! Dense complex linear algebra primitives.
//!
//! Multi-partite operators follow the usual Kronecker convention: the first
//! subsystem is the most significant index, so `|a⟩ ⊗ |b⟩` sits at index
//! `a * d_b + b`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for every operator in the crate.
pub type ComplexMatrix = DMatrix<Complex64>;

/// Default relative cutoff for support projections.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;

/// Tolerance used when validating Hermiticity of inputs.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Which factor of a bipartite system to trace out.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn zeros(rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(rows, cols)
}

/// `|i⟩⟨j|` in dimension `d`.
pub fn ket_bra(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = zeros(d, d);
    m[(i, j)] = ONE;
    m
}

/// Outer product `|u⟩⟨v|`.
pub fn outer(u: &DVector<Complex64>, v: &DVector<Complex64>) -> ComplexMatrix {
    u * v.adjoint()
}

/// Real diagonal matrix.
pub fn diag(values: &[f64]) -> ComplexMatrix {
    let mut m = zeros(values.len(), values.len());
    for (i, &v) in values.iter().enumerate() {
        m[(i, i)] = c(v, 0.0);
    }
    m
}

/// Kronecker product `a ⊗ b`.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all<'a>(factors: impl IntoIterator<Item = &'a ComplexMatrix>) -> ComplexMatrix {
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(1, 1), |acc, f| acc.kronecker(f))
}

/// Partial trace of a square operator on `first ⊗ second`.
pub fn partial_trace(
    m: &ComplexMatrix,
    d_first: usize,
    d_second: usize,
    traced: Subsystem,
) -> Result<ComplexMatrix> {
    let n = d_first * d_second;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "partial trace expects {n}x{n}, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match traced {
        Subsystem::First => ComplexMatrix::from_fn(d_second, d_second, |b, bp| {
            (0..d_first).map(|a| m[(a * d_second + b, a * d_second + bp)]).sum()
        }),
        Subsystem::Second => ComplexMatrix::from_fn(d_first, d_first, |a, ap| {
            (0..d_second).map(|b| m[(a * d_second + b, ap * d_second + b)]).sum()
        }),
    })
}

/// Reorders tensor factors of a square operator.
///
/// `dims[k]` is the dimension of factor `k` in the current ordering; factor
/// `order[j]` of the input becomes factor `j` of the output.
pub fn permute_systems(m: &ComplexMatrix, dims: &[usize], order: &[usize]) -> Result<ComplexMatrix> {
    let n: usize = dims.iter().product();
    if m.nrows() != n || m.ncols() != n || order.len() != dims.len() {
        return Err(Error::DimensionMismatch(format!(
            "permute_systems: operator {}x{}, dims {dims:?}, order {order:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut seen = vec![false; dims.len()];
    for &o in order {
        if o >= dims.len() || seen[o] {
            return Err(Error::IndexOutOfRange(format!("bad permutation {order:?}")));
        }
        seen[o] = true;
    }
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    // map[new_index] = old_index
    let map: Vec<usize> = (0..n)
        .map(|new_idx| {
            let mut rem = new_idx;
            let mut digits = vec![0; dims.len()];
            for j in (0..new_dims.len()).rev() {
                digits[order[j]] = rem % new_dims[j];
                rem /= new_dims[j];
            }
            digits.iter().zip(dims).fold(0, |acc, (&d, &dim)| acc * dim + d)
        })
        .collect();
    Ok(ComplexMatrix::from_fn(n, n, |i, j| m[(map[i], map[j])]))
}

/// Largest entrywise deviation `|M_ij - conj(M_ji)|`.
pub fn hermitian_deviation(m: &ComplexMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_deviation(m) <= tol
}

/// `(M + M†) / 2`.
pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

fn check_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    let deviation = hermitian_deviation(m);
    // Relative slack for large-norm inputs.
    let scale = 1.0 + m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if deviation > tol * scale {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// `V diag(λ) V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let l = self.values[j];
            scaled.column_mut(j).scale_mut(l);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    check_hermitian(m, HERMITIAN_TOL)?;
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen { values: vec![], vectors: zeros(0, 0) });
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, col| eig.eigenvectors[(r, idx[col])]);
    Ok(HermitianEigen { values, vectors })
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn eigvals_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    check_hermitian(m, HERMITIAN_TOL)?;
    let mut vals: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

/// Orthogonal projector onto the support of a PSD matrix.
///
/// Eigenvalues above `rank_tol * λ_max` count as support.
pub fn support_projection(m: &ComplexMatrix, rank_tol: f64) -> Result<ComplexMatrix> {
    Ok(support_basis(m, rank_tol)?.projector())
}

/// Orthonormal bases of the support and kernel of a PSD matrix.
#[derive(Debug, Clone)]
pub struct SupportBasis {
    /// Columns span the support.
    pub support: ComplexMatrix,
    /// Columns span the orthogonal complement.
    pub kernel: ComplexMatrix,
}

impl SupportBasis {
    pub fn rank(&self) -> usize {
        self.support.ncols()
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.support * self.support.adjoint()
    }
}

pub fn support_basis(m: &ComplexMatrix, rank_tol: f64) -> Result<SupportBasis> {
    let eig = eig_hermitian(m)?;
    let n = eig.values.len();
    let lmax = eig.max().max(0.0);
    let floor = -1e-8 * lmax.max(1.0);
    if eig.min() < floor {
        return Err(Error::NotPositive { eigenvalue: eig.min() });
    }
    let cut = rank_tol * lmax;
    let split = eig.values.iter().position(|&l| l > cut && l > 0.0).unwrap_or(n);
    Ok(SupportBasis {
        support: eig.vectors.columns(split, n - split).into_owned(),
        kernel: eig.vectors.columns(0, split).into_owned(),
    })
}

/// Weyl–Heisenberg operator `X^a Z^b` on `C^d`.
pub fn generalized_pauli(d: usize, a: usize, b: usize) -> Result<ComplexMatrix> {
    if d == 0 || a >= d || b >= d {
        return Err(Error::IndexOutOfRange(format!("generalized_pauli(d={d}, a={a}, b={b})")));
    }
    let mut u = zeros(d, d);
    for j in 0..d {
        let phase = 2.0 * std::f64::consts::PI * ((b * j) % d) as f64 / d as f64;
        u[((j + a) % d, j)] = Complex64::from_polar(1.0, phase);
    }
    Ok(u)
}

/// All `d²` generalized Paulis, ordered by `(a, b)`.
pub fn generalized_paulis(d: usize) -> Vec<ComplexMatrix> {
    (0..d)
        .flat_map(|a| (0..d).map(move |b| (a, b)))
        .map(|(a, b)| generalized_pauli(d, a, b).expect("indices in range"))
        .collect()
}

/// Operator norm of a Hermitian matrix, `max |λ_i|`.
pub fn op_norm(m: &ComplexMatrix) -> Result<f64> {
    let vals = eigvals_hermitian(m)?;
    Ok(vals.iter().fold(0.0, |acc, l| acc.max(l.abs())))
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvals_hermitian(m)?.last().copied().unwrap_or(0.0))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn lambda_min(m: &ComplexMatrix) -> Result<f64> {
    Ok(eigvals_hermitian(m)?.first().copied().unwrap_or(0.0))
}

/// Real trace of a square matrix.
pub fn trace_re(m: &ComplexMatrix) -> f64 {
    m.trace().re
}

/// `Re tr(A† B)`.
pub fn inner_re(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        // Small LCG keeps the unit tests free of RNG plumbing.
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let g = ComplexMatrix::from_fn(n, n, |_, _| c(next(), next()));
        hermitian_part(&g)
    }

    #[test]
    fn tensor_identity_and_diagonals() {
        assert_eq!(tensor(&identity(2), &identity(3)), identity(6));
        let p = tensor(&ket_bra(2, 0, 0), &ket_bra(2, 1, 1));
        assert_eq!(p, ket_bra(4, 1, 1));
        let d = tensor(&diag(&[2.0, 3.0]), &diag(&[5.0, 7.0]));
        assert_eq!(d, diag(&[10.0, 14.0, 15.0, 21.0]));
    }

    #[test]
    fn partial_trace_examples() {
        let rho = diag(&[0.25, 0.75]);
        let sigma = random_hermitian(3, 4);
        let out = partial_trace(&tensor(&rho, &sigma), 2, 3, Subsystem::First).unwrap();
        assert!(max_abs_diff(&out, &sigma) < 1e-12);

        let s = 1.0 / 2f64.sqrt();
        let phi = DVector::from_vec(vec![c(s, 0.0), ZERO, ZERO, c(s, 0.0)]);
        let marg = partial_trace(&outer(&phi, &phi), 2, 2, Subsystem::Second).unwrap();
        assert!(max_abs_diff(&marg, &identity(2).scale(0.5)) < 1e-12);

        let delta2 = ket_bra(4, 0, 0) + ket_bra(4, 3, 3);
        let marg = partial_trace(&delta2, 2, 2, Subsystem::First).unwrap();
        assert!(max_abs_diff(&marg, &identity(2)) < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        assert!(matches!(
            partial_trace(&identity(5), 2, 2, Subsystem::First),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn eig_examples() {
        let e = eig_hermitian(&diag(&[3.0, 1.0])).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-12 && (e.values[1] - 3.0).abs() < 1e-12);
        let x = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let e = eig_hermitian(&x).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-12 && (e.values[1] - 1.0).abs() < 1e-12);

        let h = random_hermitian(5, 11);
        let e = eig_hermitian(&h).unwrap();
        let norm = op_norm(&h).unwrap();
        assert!(max_abs_diff(&e.reconstruct(), &h) <= 1e-9 * (1.0 + norm));
        let vv = e.vectors.adjoint() * &e.vectors;
        assert!(max_abs_diff(&vv, &identity(5)) < 1e-10);
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
        assert!(op_norm(&m).is_err());
    }

    #[test]
    fn support_projection_examples() {
        assert_eq!(support_projection(&diag(&[1.0, 0.0]), 1e-9).unwrap(), diag(&[1.0, 0.0]));
        let p = support_projection(&diag(&[5.0, 1e-15, 0.0]), 1e-9).unwrap();
        assert!(max_abs_diff(&p, &diag(&[1.0, 0.0, 0.0])) < 1e-12);

        // Choi matrix of the qubit identity channel: 2|Φ⟩⟨Φ|.
        let j = ComplexMatrix::from_fn(4, 4, |r, col| if r % 3 == 0 && col % 3 == 0 { ONE } else { ZERO });
        let p = support_projection(&j, 1e-9).unwrap();
        assert!(max_abs_diff(&p, &j.scale(0.5)) < 1e-12);
    }

    #[test]
    fn support_projection_rejects_negative() {
        assert!(matches!(
            support_projection(&diag(&[1.0, -1e-3]), 1e-9),
            Err(Error::NotPositive { .. })
        ));
    }

    #[test]
    fn qubit_paulis() {
        let ps = generalized_paulis(2);
        let x = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]);
        let z = diag(&[1.0, -1.0]);
        assert!(max_abs_diff(&ps[0], &identity(2)) < 1e-15);
        assert!(max_abs_diff(&ps[1], &z) < 1e-15);
        assert!(max_abs_diff(&ps[2], &x) < 1e-15);
        assert!(max_abs_diff(&ps[3], &(&x * &z)) < 1e-15);
        for d in 1..5 {
            for u in generalized_paulis(d) {
                assert!(max_abs_diff(&(u.adjoint() * &u), &identity(d)) < 1e-12);
            }
        }
        assert!(generalized_pauli(3, 3, 0).is_err());
    }

    #[test]
    fn weyl_twirl_is_completely_depolarizing() {
        let d = 3;
        let g = random_hermitian(d, 5);
        let rho = &g * &g;
        let twirl = generalized_paulis(d)
            .iter()
            .fold(zeros(d, d), |acc, u| acc + u * &rho * u.adjoint())
            .scale(1.0 / (d * d) as f64);
        let expected = identity(d).scale(trace_re(&rho) / d as f64);
        assert!(max_abs_diff(&twirl, &expected) < 1e-12);
    }

    #[test]
    fn op_norm_examples() {
        assert!((op_norm(&diag(&[1.0, 0.5])).unwrap() - 1.0).abs() < 1e-15);
        assert!((op_norm(&identity(4).scale(0.5)).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn permute_swaps_factors() {
        let a = random_hermitian(2, 1);
        let b = random_hermitian(3, 2);
        let swapped = permute_systems(&tensor(&a, &b), &[2, 3], &[1, 0]).unwrap();
        assert!(max_abs_diff(&swapped, &tensor(&b, &a)) < 1e-15);
        let x = random_hermitian(2, 3);
        let abx = tensor_all([&a, &b, &x]);
        let perm = permute_systems(&abx, &[2, 3, 2], &[2, 0, 1]).unwrap();
        assert!(max_abs_diff(&perm, &tensor_all([&x, &a, &b])) < 1e-15);
    }

    #[test]
    fn projector_spectrum_is_idempotent() {
        let g = random_hermitian(6, 9);
        let p = support_projection(&(&g * &g), 0.2).unwrap();
        let v1 = eigvals_hermitian(&p).unwrap();
        let v2 = eigvals_hermitian(&(&p * &p)).unwrap();
        for (x, y) in v1.iter().zip(&v2) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
