use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::matrix::{self, c, ComplexMatrix, HERMITIAN_TOL};

/// Real symmetric embedding `[[Re H, −Im H], [Im H, Re H]]` of a Hermitian
/// matrix.
///
/// The embedding preserves the spectrum (each eigenvalue twice), so `H ⪰ 0`
/// iff `realify(H) ⪰ 0`, and doubles traces and inner products.
pub fn realify(h: &ComplexMatrix) -> Result<DMatrix<f64>> {
    let deviation = matrix::hermitian_deviation(h);
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(realify_unchecked(h))
}

pub(crate) fn realify_unchecked(h: &ComplexMatrix) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Hermitian matrix closest (in the averaged sense) to a realified block:
/// `(X₁₁ + X₂₂)/2 + i (X₂₁ − X₁₂)/2`.
///
/// Inverts [`realify`] exactly and maps PSD matrices to PSD matrices.
pub fn unrealify(x: &DMatrix<f64>) -> ComplexMatrix {
    let n = x.nrows() / 2;
    ComplexMatrix::from_fn(n, n, |i, j| {
        c(
            0.5 * (x[(i, j)] + x[(i + n, j + n)]),
            0.5 * (x[(i + n, j)] - x[(i, j + n)]),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{identity, ONE, ZERO};

    #[test]
    fn realify_identity() {
        assert_eq!(realify(&identity(2)).unwrap(), DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn realify_pauli_y_spectrum() {
        let i = c(0.0, 1.0);
        let y = ComplexMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO]);
        let r = realify(&y).unwrap();
        let mut vals: Vec<f64> = r.symmetric_eigenvalues().iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        let expected = [-1.0, -1.0, 1.0, 1.0];
        for (v, e) in vals.iter().zip(expected) {
            assert!((v - e).abs() < 1e-12);
        }
    }

    #[test]
    fn realify_round_trip_and_inner_products() {
        let a = ComplexMatrix::from_row_slice(2, 2, &[ONE, c(0.3, -0.7), c(0.3, 0.7), c(-2.0, 0.0)]);
        let b = ComplexMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(-1.0, 0.2), c(-1.0, -0.2), ONE]);
        let ra = realify(&a).unwrap();
        let rb = realify(&b).unwrap();
        assert!(matrix::max_abs_diff(&unrealify(&ra), &a) < 1e-15);
        assert!((ra.trace() - 2.0 * a.trace().re).abs() < 1e-12);
        let complex_inner = (a.adjoint() * &b).trace().re;
        assert!((ra.dot(&rb) - 2.0 * complex_inner).abs() < 1e-12);
    }

    #[test]
    fn realify_rejects_non_hermitian() {
        let m = ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ZERO, ZERO]);
        assert!(realify(&m).is_err());
    }
}
