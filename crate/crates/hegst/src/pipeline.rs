//! End-to-end reduction of the generalized Hermitian-definite eigenvalue
//! problem A x = lambda B x to the standard problem C z = lambda z:
//! Cholesky-factor B = L L^H, form C = L^-1 A L^-H, and recover generalized
//! eigenvectors as x = L^-H z.
//!
//! No general eigensolver lives here: eigenvalue preservation is verified at
//! n <= 2 where closed forms exist.

use crate::error::{Error, Result};
use crate::kernels::{cholesky_lower, trsm_apply, Side, Trans};
use crate::ledger::FlopLedger;
use crate::matrix::DenseMatrix;
use crate::oracle;
use crate::scalar::Scalar;
use crate::triangular::{HermitianMatrix, TriangularMatrix};
use crate::trsm::{two_sided_trsm, TrsmVariant};

/// Outcome of one reduction: the standard-problem matrix, the factor, the
/// reconstruction residual, and the flop ledger of the run.
pub struct ReductionResult<T> {
    pub c: HermitianMatrix<T>,
    pub l: TriangularMatrix<T>,
    /// ||L C L^H - A||_F / ||A||_F, computed by explicit reconstruction.
    pub residual: f64,
    pub ledger: FlopLedger,
}

/// Reduce (A, B) to standard form with the chosen variant and block size.
pub fn reduce<T: Scalar>(
    a: &HermitianMatrix<T>,
    b: &HermitianMatrix<T>,
    variant: TrsmVariant,
    block_size: usize,
) -> Result<ReductionResult<T>> {
    if a.dim() != b.dim() {
        return Err(Error::dims(format!(
            "A is {0}x{0}, B is {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    let mut ledger = FlopLedger::new();
    let l = cholesky_lower(b, Some(&mut ledger))?;
    let mut c = a.clone();
    two_sided_trsm(&mut c, &l, variant, block_size, Some(&mut ledger), None)?;
    let residual = oracle::reconstruction_residual(&c, &l, a);
    Ok(ReductionResult {
        c,
        l,
        residual,
        ledger,
    })
}

/// Back-transform a standard-problem eigenvector: x = L^-H z, so that
/// z = L^H x.
pub fn recover_generalized_eigenvector<T: Scalar>(
    z: &[T],
    l: &TriangularMatrix<T>,
) -> Result<Vec<T>> {
    if z.len() != l.dim() {
        return Err(Error::dims(format!(
            "vector has length {}, L is {1}x{1}",
            z.len(),
            l.dim()
        )));
    }
    let mut x = DenseMatrix::from_col_major(z.len(), 1, z.to_vec())?;
    trsm_apply(x.view_mut(), l.view(), Side::Left, Trans::ConjTrans, None)?;
    Ok((0..z.len()).map(|i| x.at(i, 0)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{eigenvalues_2x2_hermitian, oracle_generalized_eigenvalues_2x2};
    use crate::random::{random_hermitian, random_hpd};

    fn herm2(a00: f64, a10: f64, a11: f64) -> HermitianMatrix<f64> {
        HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[a00, a10], &[a10, a11]])).unwrap()
    }

    #[test]
    fn worked_pair_reduces_by_hand() {
        let a = herm2(4.0, 2.0, 3.0);
        let b = herm2(4.0, 2.0, 2.0);
        let r = reduce(&a, &b, TrsmVariant::V4, 2).unwrap();
        assert_eq!(r.l.base().at(0, 0), 2.0);
        assert_eq!(r.l.base().at(1, 0), 1.0);
        assert_eq!(r.l.base().at(1, 1), 1.0);
        assert!((r.c.base().at(0, 0) - 1.0).abs() < 1e-14);
        assert!(r.c.base().at(1, 0).abs() < 1e-14);
        assert!((r.c.base().at(1, 1) - 2.0).abs() < 1e-14);
        assert!(r.residual <= 1e-14);

        let (e1, e2) = eigenvalues_2x2_hermitian(&r.c);
        let (g1, g2) = oracle_generalized_eigenvalues_2x2(&a, &b).unwrap();
        assert!((e1 - g1).abs() < 1e-12 && (e2 - g2).abs() < 1e-12);
    }

    #[test]
    fn identity_b_passes_a_through() {
        let a = random_hermitian::<f64>(9, 2);
        let b = HermitianMatrix::from_base(DenseMatrix::identity(9)).unwrap();
        let r = reduce(&a, &b, TrsmVariant::V1, 3).unwrap();
        for j in 0..9 {
            for i in j..9 {
                assert_eq!(r.c.base().at(i, j), a.base().at(i, j));
            }
        }
    }

    #[test]
    fn indefinite_b_is_rejected_with_pivot_index() {
        let a = herm2(1.0, 0.0, 1.0);
        let b = herm2(1.0, 2.0, 1.0);
        match reduce(&a, &b, TrsmVariant::V4, 2) {
            Err(Error::NotPositiveDefinite { index }) => assert_eq!(index, 1),
            other => panic!("expected not-positive-definite, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn reduction_is_variant_independent() {
        let n = 24;
        let a = random_hermitian::<f64>(n, 3);
        let b = random_hpd::<f64>(n, 4);
        let reference = reduce(&a, &b, TrsmVariant::V1, 4).unwrap();
        for variant in TrsmVariant::ALL {
            let r = reduce(&a, &b, variant, 8).unwrap();
            assert!(r.residual <= 1e-12, "variant {} residual {}", variant.name(), r.residual);
            let rel = r.c.rel_distance_lower(&reference.c.materialize());
            assert!(rel <= 1e-11, "variant {}: {rel}", variant.name());
        }
    }

    #[test]
    fn eigenvector_back_transform() {
        // x = L^-H z for the worked pair; A x = lambda B x with lambda = 1.
        let l = TriangularMatrix::from_base(
            DenseMatrix::from_rows(&[&[2.0, 0.0], &[1.0, 1.0]]),
            false,
        )
        .unwrap();
        let x = recover_generalized_eigenvector(&[1.0, 0.0], &l).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && x[1].abs() < 1e-15);
        // A x = [2, 1] = B x.
        let ax = [4.0 * x[0] + 2.0 * x[1], 2.0 * x[0] + 3.0 * x[1]];
        let bx = [4.0 * x[0] + 2.0 * x[1], 2.0 * x[0] + 2.0 * x[1]];
        assert!((ax[0] - bx[0]).abs() < 1e-12 && (ax[1] - bx[1]).abs() < 1e-12);

        // Identity factor and zero vector edge cases.
        let eye = TriangularMatrix::<f64>::identity(3);
        assert_eq!(
            recover_generalized_eigenvector(&[1.0, 2.0, 3.0], &eye).unwrap(),
            vec![1.0, 2.0, 3.0]
        );
        assert_eq!(
            recover_generalized_eigenvector(&[0.0, 0.0], &l).unwrap(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn residual_bound_holds_over_grid() {
        use crate::oracle::condition_estimate_lower;
        use num_complex::Complex64;
        for &n in &[1usize, 5, 16, 33, 64] {
            for &b in &[4usize, 8] {
                for seed in [1u64, 2] {
                    for variant in [TrsmVariant::V1, TrsmVariant::V4] {
                        let a = random_hermitian::<Complex64>(n, seed);
                        let bm = random_hpd::<Complex64>(n, seed + 50);
                        let r = reduce(&a, &bm, variant, b).unwrap();
                        let kappa = condition_estimate_lower(&r.l).unwrap();
                        let bound = 50.0 * n as f64 * f64::EPSILON * kappa * kappa;
                        assert!(
                            r.residual <= bound,
                            "n={n} b={b} seed={seed} variant {}: residual {:e} > bound {bound:e}",
                            variant.name(),
                            r.residual
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn random_two_by_two_eigenvalues_preserved() {
        for seed in 0..100u64 {
            let a = random_hermitian::<f64>(2, seed);
            let b = random_hpd::<f64>(2, seed + 1000);
            let r = reduce(&a, &b, TrsmVariant::V4, 2).unwrap();
            let (e1, e2) = eigenvalues_2x2_hermitian(&r.c);
            let (g1, g2) = oracle_generalized_eigenvalues_2x2(&a, &b).unwrap();
            assert!(
                (e1 - g1).abs() <= 1e-10 * (1.0 + g1.abs())
                    && (e2 - g2).abs() <= 1e-10 * (1.0 + g2.abs()),
                "seed {seed}: ({e1},{e2}) vs ({g1},{g2})"
            );
        }
    }
}
