//! Seeded test-matrix generation.
//!
//! All generators are pure functions of `(n, seed)`: ChaCha8 seeded with
//! `seed`, entries drawn column by column (real component before imaginary
//! for complex scalars), so outputs are reproducible across platforms.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::triangular::{HermitianMatrix, TriangularMatrix};

fn dense_uniform<T: Scalar>(n: usize, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> DenseMatrix<T> {
    let mut m = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            m.set(i, j, T::sample_uniform(rng, lo, hi));
        }
    }
    m
}

/// Random Hermitian matrix: entries uniform in [-1, 1) per component,
/// symmetrized as (M + M^H)/2. The full buffer is filled, so the strictly
/// upper triangle mirrors the lower one.
pub fn random_hermitian<T: Scalar>(n: usize, seed: u64) -> HermitianMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dense_uniform::<T>(n, &mut rng, -1.0, 1.0);
    let mut h = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            let v = (m.at(i, j) + m.at(j, i).conj()).scale(0.5);
            h.set(i, j, if i == j { T::from_re(v.re()) } else { v });
        }
    }
    HermitianMatrix::from_base(h).unwrap()
}

/// Random well-conditioned lower-triangular factor: strictly-lower entries
/// uniform in [-0.5, 0.5) per component, diagonal real uniform in [1, 2).
pub fn random_well_conditioned_lower<T: Scalar>(n: usize, seed: u64) -> TriangularMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i == j {
                l.set(i, j, T::from_re(f64::sample_uniform(&mut rng, 1.0, 2.0)));
            } else if i > j {
                l.set(i, j, T::sample_uniform(&mut rng, -0.5, 0.5));
            }
        }
    }
    TriangularMatrix::from_base(l, false).unwrap()
}

/// Random Hermitian positive-definite matrix: M M^H + n I for M with entries
/// uniform in [-1, 1) per component. Positive-definite by construction.
pub fn random_hpd<T: Scalar>(n: usize, seed: u64) -> HermitianMatrix<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = dense_uniform::<T>(n, &mut rng, -1.0, 1.0);
    let mut b = DenseMatrix::zeros(n, n);
    let shift = n as f64;
    for j in 0..n {
        for i in j..n {
            let mut s = T::ZERO;
            for p in 0..n {
                s += m.at(i, p) * m.at(j, p).conj();
            }
            if i == j {
                s = T::from_re(s.re() + shift);
            }
            b.set(i, j, s);
        }
    }
    // Mirror so the full buffer is Hermitian too.
    for j in 0..n {
        for i in 0..j {
            b.set(i, j, b.at(j, i).conj());
        }
    }
    HermitianMatrix::from_base(b).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn generators_are_deterministic() {
        let a1 = random_hermitian::<Complex64>(9, 42);
        let a2 = random_hermitian::<Complex64>(9, 42);
        assert!(a1.base().bitwise_eq(a2.base()));
        let l1 = random_well_conditioned_lower::<f64>(9, 42);
        let l2 = random_well_conditioned_lower::<f64>(9, 42);
        assert!(l1.base().bitwise_eq(l2.base()));
        let b1 = random_hpd::<f64>(9, 42);
        let b2 = random_hpd::<f64>(9, 42);
        assert!(b1.base().bitwise_eq(b2.base()));
        let b3 = random_hpd::<f64>(9, 43);
        assert!(!b1.base().bitwise_eq(b3.base()));
    }

    #[test]
    fn empty_inputs_are_legal() {
        assert_eq!(random_hermitian::<f64>(0, 1).dim(), 0);
        assert_eq!(random_well_conditioned_lower::<Complex64>(0, 1).dim(), 0);
        assert_eq!(random_hpd::<f64>(0, 1).dim(), 0);
    }

    #[test]
    fn hermitian_materializes_symmetric() {
        let h = random_hermitian::<Complex64>(50, 7);
        let f = h.materialize();
        let mut asym: f64 = 0.0;
        for j in 0..50 {
            for i in 0..50 {
                asym += (f.at(i, j) - f.at(j, i).conj()).abs_sq();
            }
        }
        assert_eq!(asym, 0.0);
    }

    #[test]
    fn lower_diagonal_in_range() {
        for seed in [1u64, 2, 3] {
            let l = random_well_conditioned_lower::<Complex64>(40, seed);
            for i in 0..40 {
                let d = l.base().at(i, i);
                assert_eq!(d.im(), 0.0);
                assert!((1.0..2.0).contains(&d.re()));
            }
        }
    }

    #[test]
    fn hpd_one_by_one_is_positive() {
        let b = random_hpd::<f64>(1, 5);
        assert!(b.base().at(0, 0) > 0.0);
    }
}
