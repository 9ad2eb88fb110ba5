//! Hermitian (lower storage) and triangular matrix wrappers.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, MatRef, MatMut};
use crate::scalar::Scalar;

/// Square matrix of which only the lower triangle is significant.
///
/// The strictly-upper part of the buffer may hold anything; algorithms read
/// and write the lower triangle only and leave the rest bitwise untouched.
#[derive(Clone, Debug)]
pub struct HermitianMatrix<T> {
    base: DenseMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    pub fn from_base(base: DenseMatrix<T>) -> Result<Self> {
        if !base.is_square() {
            return Err(Error::invalid("Hermitian matrix must be square".to_string()));
        }
        Ok(HermitianMatrix { base })
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            base: DenseMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    pub fn base(&self) -> &DenseMatrix<T> {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.base
    }

    pub fn into_base(self) -> DenseMatrix<T> {
        self.base
    }

    /// Full square form mirrored from the lower triangle: `F = F^H` exactly,
    /// with zero imaginary parts on the diagonal.
    pub fn materialize(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut f = DenseMatrix::zeros(n, n);
        for j in 0..n {
            f.set(j, j, T::from_re(self.base.at(j, j).re()));
            for i in j + 1..n {
                let v = self.base.at(i, j);
                f.set(i, j, v);
                f.set(j, i, v.conj());
            }
        }
        f
    }

    /// Frobenius norm of the Hermitian matrix (both triangles counted, via
    /// the lower storage).
    pub fn frobenius_norm(&self) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for j in 0..n {
            acc += self.base.at(j, j).re().powi(2);
            for i in j + 1..n {
                acc += 2.0 * self.base.at(i, j).abs_sq();
            }
        }
        acc.sqrt()
    }

    /// Relative Frobenius distance between the lower triangles of `self` and
    /// a full square reference.
    pub fn rel_distance_lower(&self, reference: &DenseMatrix<T>) -> f64 {
        let n = self.dim();
        assert_eq!(reference.rows(), n);
        let mut diff = 0.0;
        let mut norm = 0.0;
        for j in 0..n {
            for i in j..n {
                diff += (self.base.at(i, j) - reference.at(i, j)).abs_sq();
                norm += reference.at(i, j).abs_sq();
            }
        }
        if norm == 0.0 {
            diff.sqrt()
        } else {
            (diff / norm).sqrt()
        }
    }
}

/// Lower-triangular factor; strictly-upper entries are treated as zero.
#[derive(Clone, Debug)]
pub struct TriangularMatrix<T> {
    base: DenseMatrix<T>,
    unit_diagonal: bool,
}

impl<T: Scalar> TriangularMatrix<T> {
    pub fn from_base(base: DenseMatrix<T>, unit_diagonal: bool) -> Result<Self> {
        if !base.is_square() {
            return Err(Error::invalid("triangular factor must be square".to_string()));
        }
        Ok(TriangularMatrix { base, unit_diagonal })
    }

    pub fn identity(n: usize) -> Self {
        TriangularMatrix {
            base: DenseMatrix::identity(n),
            unit_diagonal: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.base.rows()
    }

    pub fn unit_diagonal(&self) -> bool {
        self.unit_diagonal
    }

    pub fn base(&self) -> &DenseMatrix<T> {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut DenseMatrix<T> {
        &mut self.base
    }

    pub fn view(&self) -> TriRef<'_, T> {
        TriRef {
            mat: self.base.view(),
            unit_diagonal: self.unit_diagonal,
        }
    }

    /// Full square form: lower triangle as stored (ones on the diagonal in
    /// the unit case), zeros above.
    pub fn materialize(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut f = DenseMatrix::zeros(n, n);
        for j in 0..n {
            f.set(j, j, if self.unit_diagonal { T::ONE } else { self.base.at(j, j) });
            for i in j + 1..n {
                f.set(i, j, self.base.at(i, j));
            }
        }
        f
    }
}

/// Borrowed triangular operand: a view plus the unit-diagonal flag.
#[derive(Copy, Clone)]
pub struct TriRef<'a, T> {
    pub mat: MatRef<'a, T>,
    pub unit_diagonal: bool,
}

impl<'a, T: Scalar> TriRef<'a, T> {
    pub fn new(mat: MatRef<'a, T>, unit_diagonal: bool) -> Self {
        TriRef { mat, unit_diagonal }
    }

    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline(always)]
    pub fn diag(&self, i: usize) -> T {
        if self.unit_diagonal {
            T::ONE
        } else {
            self.mat.at(i, i)
        }
    }

    /// Diagonal sub-block `[k, k+c)` as a triangular view.
    pub fn diag_block(&self, k: usize, c: usize) -> TriRef<'a, T> {
        TriRef {
            mat: self.mat.submatrix(k, k, c, c),
            unit_diagonal: self.unit_diagonal,
        }
    }

    pub fn check_nonsingular(&self) -> crate::error::Result<()> {
        if !self.unit_diagonal {
            for i in 0..self.dim() {
                if self.mat.at(i, i).abs_sq() == 0.0 {
                    return Err(Error::SingularFactor { index: i });
                }
            }
        }
        Ok(())
    }
}

/// Snapshot of the strictly-upper buffer contents, for untouched-memory checks.
pub fn strictly_upper_bits<T: Scalar>(m: &DenseMatrix<T>) -> Vec<u128> {
    let n = m.rows();
    let mut out = Vec::new();
    for j in 0..n {
        for i in 0..j.min(m.rows()) {
            out.push(m.at(i, j).to_bits());
        }
    }
    out
}

/// Copy only the lower triangle (including diagonal) of `src` into `dst`.
pub fn copy_lower<T: Scalar>(dst: &mut MatMut<'_, T>, src: MatRef<'_, T>) {
    let n = src.rows().min(src.cols());
    debug_assert!(dst.rows() == src.rows() && dst.cols() == src.cols());
    for j in 0..n {
        let rows = src.rows();
        dst.col_mut(j)[j..rows].copy_from_slice(&src.col(j)[j..rows]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn materialize_is_exactly_hermitian() {
        let base = DenseMatrix::from_rows(&[
            &[Complex64::new(2.0, 0.5), Complex64::new(777.0, 777.0)],
            &[Complex64::new(1.0, -3.0), Complex64::new(4.0, 0.0)],
        ]);
        let h = HermitianMatrix::from_base(base).unwrap();
        let f = h.materialize();
        // Diagonal imaginary parts are dropped; upper garbage ignored.
        assert_eq!(f.at(0, 0), Complex64::new(2.0, 0.0));
        assert_eq!(f.at(0, 1), Complex64::new(1.0, 3.0));
        let mut asym: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                asym += (f.at(i, j) - f.at(j, i).conj()).abs_sq();
            }
        }
        assert_eq!(asym, 0.0);
    }

    #[test]
    fn triangular_materialize_zeros_upper() {
        let base: DenseMatrix<f64> = DenseMatrix::from_rows(&[&[2.0, 99.0], &[1.0, 1.0]]);
        let t = TriangularMatrix::from_base(base, false).unwrap();
        let f = t.materialize();
        assert_eq!(f.at(0, 1), 0.0);
        assert_eq!(f.at(1, 0), 1.0);
        let u = TriangularMatrix::from_base(f.clone(), true).unwrap();
        assert_eq!(u.materialize().at(1, 1), 1.0);
    }

    #[test]
    fn singular_factor_detected() {
        let base: DenseMatrix<f64> = DenseMatrix::from_rows(&[&[1.0, 0.0], &[5.0, 0.0]]);
        let t = TriangularMatrix::from_base(base, false).unwrap();
        match t.view().check_nonsingular() {
            Err(Error::SingularFactor { index }) => assert_eq!(index, 1),
            other => panic!("expected singular factor error, got {other:?}"),
        }
    }
}
