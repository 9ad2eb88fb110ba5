//! Brute-force reference computations used as ground truth by the tests and
//! the worksheet harness.
//!
//! Everything here is deliberately implemented by a different route than the
//! blocked variants and the instrumented kernels: triangular factors are
//! inverted explicitly (column-by-column substitution against the identity)
//! and products are plain dense triple loops. Nothing in this module reports
//! flops. Performance is a non-goal.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::triangular::{HermitianMatrix, TriangularMatrix};

/// Plain dense product C = A * B, dot-product form.
pub fn matmul<T: Scalar>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> DenseMatrix<T> {
    let (m, k) = (a.rows(), a.cols());
    let n = b.cols();
    assert_eq!(k, b.rows(), "oracle matmul shape mismatch");
    let mut c = DenseMatrix::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let mut s = T::ZERO;
            for p in 0..k {
                s += a.at(i, p) * b.at(p, j);
            }
            c.set(i, j, s);
        }
    }
    c
}

/// Conjugate transpose.
pub fn conj_transpose<T: Scalar>(a: &DenseMatrix<T>) -> DenseMatrix<T> {
    let mut out = DenseMatrix::zeros(a.cols(), a.rows());
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            out.set(j, i, a.at(i, j).conj());
        }
    }
    out
}

/// Explicit inverse of a lower-triangular factor: each column of the inverse
/// is obtained by forward substitution against a unit vector.
pub fn invert_lower<T: Scalar>(l: &TriangularMatrix<T>) -> Result<DenseMatrix<T>> {
    let n = l.dim();
    l.view().check_nonsingular()?;
    let lf = l.materialize();
    let mut inv = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let mut x = vec![T::ZERO; n];
        x[j] = T::ONE;
        for i in 0..n {
            let mut s = x[i];
            for p in 0..i {
                s -= lf.at(i, p) * x[p];
            }
            x[i] = s / lf.at(i, i);
        }
        for i in 0..n {
            inv.set(i, j, x[i]);
        }
    }
    Ok(inv)
}

/// Frobenius condition estimate ||L||_F * ||L^-1||_F.
pub fn condition_estimate_lower<T: Scalar>(l: &TriangularMatrix<T>) -> Result<f64> {
    if l.dim() == 0 {
        return Ok(1.0);
    }
    let inv = invert_lower(l)?;
    Ok(l.materialize().frobenius_norm() * inv.frobenius_norm())
}

/// C = L^-1 * A * L^-H as a full dense matrix, computed by explicit inversion
/// and two dense multiplications.
pub fn oracle_two_sided_trsm<T: Scalar>(
    a_hat: &HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
) -> Result<DenseMatrix<T>> {
    if a_hat.dim() != l.dim() {
        return Err(Error::dims(format!(
            "oracle: A is {0}x{0}, L is {1}x{1}",
            a_hat.dim(),
            l.dim()
        )));
    }
    let inv = invert_lower(l)?;
    let full = a_hat.materialize();
    let left = matmul(&inv, &full);
    Ok(matmul(&left, &conj_transpose(&inv)))
}

/// C = L^H * A * L as a full dense matrix, by two dense multiplications.
pub fn oracle_two_sided_trmm<T: Scalar>(
    a_hat: &HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
) -> Result<DenseMatrix<T>> {
    if a_hat.dim() != l.dim() {
        return Err(Error::dims(format!(
            "oracle: A is {0}x{0}, L is {1}x{1}",
            a_hat.dim(),
            l.dim()
        )));
    }
    let lf = l.materialize();
    let full = a_hat.materialize();
    let right = matmul(&full, &lf);
    Ok(matmul(&conj_transpose(&lf), &right))
}

/// Generalized eigenvalues of a Hermitian 2x2 pencil (A, B) with B positive
/// definite: the sorted real roots of det(A - lambda B) = 0.
pub fn oracle_generalized_eigenvalues_2x2<T: Scalar>(
    a: &HermitianMatrix<T>,
    b: &HermitianMatrix<T>,
) -> Result<(f64, f64)> {
    if a.dim() != 2 || b.dim() != 2 {
        return Err(Error::invalid("2x2 eigenvalue oracle needs 2x2 inputs".to_string()));
    }
    let (a00, a11) = (a.base().at(0, 0).re(), a.base().at(1, 1).re());
    let a10 = a.base().at(1, 0);
    let (b00, b11) = (b.base().at(0, 0).re(), b.base().at(1, 1).re());
    let b10 = b.base().at(1, 0);
    // det B and definiteness check.
    let det_b = b00 * b11 - b10.abs_sq();
    if b00 <= 0.0 || det_b <= 0.0 {
        return Err(Error::invalid("pencil matrix B is not positive definite".to_string()));
    }
    // det(A - t B) = t^2 detB - t (a00 b11 + a11 b00 - 2 Re(a10 conj(b10))) + detA
    let det_a = a00 * a11 - a10.abs_sq();
    let cross = a00 * b11 + a11 * b00 - 2.0 * (a10 * b10.conj()).re();
    let disc = (cross * cross - 4.0 * det_b * det_a).max(0.0).sqrt();
    let l1 = (cross - disc) / (2.0 * det_b);
    let l2 = (cross + disc) / (2.0 * det_b);
    Ok((l1, l2))
}

/// Sorted eigenvalues of a Hermitian 2x2 matrix (quadratic formula on the
/// characteristic polynomial).
pub fn eigenvalues_2x2_hermitian<T: Scalar>(a: &HermitianMatrix<T>) -> (f64, f64) {
    let (a00, a11) = (a.base().at(0, 0).re(), a.base().at(1, 1).re());
    let off = a.base().at(1, 0).abs_sq();
    let tr = a00 + a11;
    let det = a00 * a11 - off;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    ((tr - disc) / 2.0, (tr + disc) / 2.0)
}

/// Relative Frobenius reconstruction residual ||L C L^H - A||_F / ||A||_F,
/// computed with the oracle's dense routines.
pub fn reconstruction_residual<T: Scalar>(
    c: &HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    a_hat: &HermitianMatrix<T>,
) -> f64 {
    let lf = l.materialize();
    let rebuilt = matmul(&matmul(&lf, &c.materialize()), &conj_transpose(&lf));
    let target = a_hat.materialize();
    let mut diff = 0.0;
    for j in 0..target.cols() {
        for i in 0..target.rows() {
            diff += (rebuilt.at(i, j) - target.at(i, j)).abs_sq();
        }
    }
    let norm = target.frobenius_norm();
    if norm == 0.0 {
        diff.sqrt()
    } else {
        diff.sqrt() / norm
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_well_conditioned_lower};
    use num_complex::Complex64;

    fn herm2(a00: f64, a10: f64, a11: f64) -> HermitianMatrix<f64> {
        HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[a00, a10], &[a10, a11]])).unwrap()
    }

    fn lower2(l00: f64, l10: f64, l11: f64) -> TriangularMatrix<f64> {
        TriangularMatrix::from_base(DenseMatrix::from_rows(&[&[l00, 0.0], &[l10, l11]]), false)
            .unwrap()
    }

    #[test]
    fn trsm_oracle_worked_example() {
        let c = oracle_two_sided_trsm(&herm2(4.0, 2.0, 3.0), &lower2(2.0, 1.0, 1.0)).unwrap();
        assert!((c.at(0, 0) - 1.0).abs() < 1e-15);
        assert!(c.at(1, 0).abs() < 1e-15);
        assert!((c.at(1, 1) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn trsm_oracle_identity_and_scalar() {
        let a = herm2(4.0, 2.0, 3.0);
        let c = oracle_two_sided_trsm(&a, &TriangularMatrix::identity(2)).unwrap();
        assert!((c.at(1, 0) - 2.0).abs() < 1e-15);

        let a1 = HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[4.0]])).unwrap();
        let l1 = TriangularMatrix::from_base(DenseMatrix::from_rows(&[&[2.0]]), false).unwrap();
        let c1 = oracle_two_sided_trsm(&a1, &l1).unwrap();
        assert!((c1.at(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trmm_oracle_worked_examples() {
        let c = oracle_two_sided_trmm(&herm2(1.0, 0.0, 2.0), &lower2(2.0, 1.0, 1.0)).unwrap();
        assert!((c.at(0, 0) - 6.0).abs() < 1e-15);
        assert!((c.at(1, 0) - 2.0).abs() < 1e-15);
        assert!((c.at(1, 1) - 2.0).abs() < 1e-15);

        let a = herm2(4.0, 2.0, 3.0);
        let c2 = oracle_two_sided_trmm(&a, &TriangularMatrix::identity(2)).unwrap();
        assert!((c2.at(0, 0) - 4.0).abs() < 1e-15);

        let a1 = HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[3.0]])).unwrap();
        let l1 = TriangularMatrix::from_base(DenseMatrix::from_rows(&[&[2.0]]), false).unwrap();
        assert!((oracle_two_sided_trmm(&a1, &l1).unwrap().at(0, 0) - 12.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_oracle_examples() {
        let (l1, l2) =
            oracle_generalized_eigenvalues_2x2(&herm2(4.0, 2.0, 3.0), &herm2(4.0, 2.0, 2.0)).unwrap();
        assert!((l1 - 1.0).abs() < 1e-14 && (l2 - 2.0).abs() < 1e-14);

        let a = herm2(4.0, 2.0, 2.5);
        let (m1, m2) = oracle_generalized_eigenvalues_2x2(&a, &a).unwrap();
        assert!((m1 - 1.0).abs() < 1e-14 && (m2 - 1.0).abs() < 1e-14);

        let zero = herm2(0.0, 0.0, 0.0);
        let (z1, z2) = oracle_generalized_eigenvalues_2x2(&zero, &herm2(4.0, 2.0, 2.0)).unwrap();
        assert_eq!((z1, z2), (0.0, 0.0));

        assert!(oracle_generalized_eigenvalues_2x2(&a, &herm2(1.0, 2.0, 1.0)).is_err());
    }

    #[test]
    fn oracle_outputs_nearly_hermitian() {
        for seed in [1u64, 2] {
            let a = random_hermitian::<Complex64>(24, seed);
            let l = random_well_conditioned_lower::<Complex64>(24, seed + 10);
            for c in [
                oracle_two_sided_trsm(&a, &l).unwrap(),
                oracle_two_sided_trmm(&a, &l).unwrap(),
            ] {
                let mut asym = 0.0;
                for j in 0..24 {
                    for i in 0..24 {
                        asym += (c.at(i, j) - c.at(j, i).conj()).abs_sq();
                    }
                }
                let rel = asym.sqrt() / c.frobenius_norm();
                assert!(rel <= 1e-13, "asymmetry {rel}");
            }
        }
    }

    #[test]
    fn trsm_oracle_reconstructs_input() {
        let n = 96;
        let a = random_hermitian::<f64>(n, 5);
        let l = random_well_conditioned_lower::<f64>(n, 6);
        let c = oracle_two_sided_trsm(&a, &l).unwrap();
        let ch = HermitianMatrix::from_base(c).unwrap();
        let res = reconstruction_residual(&ch, &l, &a);
        assert!(res <= 1e-10, "reconstruction residual {res}");
    }

    #[test]
    fn conditioned_generator_stays_well_conditioned() {
        let l = random_well_conditioned_lower::<f64>(100, 3);
        let kappa = condition_estimate_lower(&l).unwrap();
        assert!(kappa < 1e3, "condition estimate {kappa}");
    }

    #[test]
    fn two_by_two_pipeline_consistency() {
        // Eigenvalues of the reduced matrix match the pencil oracle.
        let a = herm2(4.0, 2.0, 3.0);
        let b = herm2(4.0, 2.0, 2.0);
        let l = lower2(2.0, 1.0, 1.0); // Cholesky factor of B
        let c = oracle_two_sided_trsm(&a, &l).unwrap();
        let ch = HermitianMatrix::from_base(c).unwrap();
        let (e1, e2) = eigenvalues_2x2_hermitian(&ch);
        let (g1, g2) = oracle_generalized_eigenvalues_2x2(&a, &b).unwrap();
        assert!((e1 - g1).abs() < 1e-10 && (e2 - g2).abs() < 1e-10);
    }
}
