//! Column-major dense matrix storage and the partitioning views used by the
//! blocked algorithms.
//!
//! Views (`MatRef`/`MatMut`) are stride-preserving windows into a base matrix:
//! taking a quadrant never copies, and writes through a mutable view are
//! visible in the base. Quadrants of one matrix occupy disjoint memory, which
//! is what lets a repartition hand out several mutable views at once.

use std::marker::PhantomData;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-major dense matrix with an explicit leading dimension.
///
/// Invariants: `data.len() >= ld * cols` and `ld >= rows`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    ld: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    /// All-zeros matrix with `ld == rows`.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            ld: rows,
            data: vec![T::ZERO; rows * cols],
        }
    }

    /// Build from a column-major element vector (`ld == rows`).
    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!(
                "expected {} elements for a {}x{} matrix, got {}",
                rows * cols,
                rows,
                cols,
                data.len()
            )));
        }
        Ok(DenseMatrix {
            rows,
            cols,
            ld: rows,
            data,
        })
    }

    /// Build from explicit parts, allowing `ld > rows`.
    pub fn from_parts(rows: usize, cols: usize, ld: usize, data: Vec<T>) -> Result<Self> {
        if ld < rows {
            return Err(Error::invalid(format!("leading dimension {ld} < rows {rows}")));
        }
        if data.len() < ld * cols {
            return Err(Error::dims(format!(
                "data length {} < ld*cols = {}",
                data.len(),
                ld * cols
            )));
        }
        Ok(DenseMatrix { rows, cols, ld, data })
    }

    /// Row-major literal constructor, convenient in tests:
    /// `DenseMatrix::from_rows(&[&[1.0, 2.0], &[3.0, 4.0]])`.
    pub fn from_rows(rows: &[&[T]]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut m = DenseMatrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged row in literal");
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::ONE);
        }
        m
    }

    #[inline(always)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline(always)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn leading_dimension(&self) -> usize {
        self.ld
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.ld]
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i + j * self.ld] = v;
    }

    pub fn view(&self) -> MatRef<'_, T> {
        MatRef {
            ptr: self.data.as_ptr(),
            rows: self.rows,
            cols: self.cols,
            ld: self.ld,
            _pd: PhantomData,
        }
    }

    pub fn view_mut(&mut self) -> MatMut<'_, T> {
        MatMut {
            ptr: self.data.as_mut_ptr(),
            rows: self.rows,
            cols: self.cols,
            ld: self.ld,
            _pd: PhantomData,
        }
    }

    /// The four quadrants split at `k`: (TL, TR, BL, BR). TL is `k x k`.
    ///
    /// The views alias `self` without copying.
    pub fn quadrant_views(&self, k: usize) -> Result<Quadrants<'_, T>> {
        let n = self.rows;
        if !self.is_square() {
            return Err(Error::invalid("quadrant split requires a square matrix"));
        }
        if k > n {
            return Err(Error::invalid(format!("split index {k} > dimension {n}")));
        }
        let v = self.view();
        Ok(Quadrants {
            tl: v.submatrix(0, 0, k, k),
            tr: v.submatrix(0, k, k, n - k),
            bl: v.submatrix(k, 0, n - k, k),
            br: v.submatrix(k, k, n - k, n - k),
        })
    }

    /// Frobenius norm: square root of the sum of squared magnitudes.
    pub fn frobenius_norm(&self) -> f64 {
        self.view().frobenius_norm()
    }

    /// Bit-exact equality of the logical `rows x cols` window.
    pub fn bitwise_eq(&self, other: &DenseMatrix<T>) -> bool {
        if self.rows != other.rows || self.cols != other.cols {
            return false;
        }
        for j in 0..self.cols {
            for i in 0..self.rows {
                if self.at(i, j).to_bits() != other.at(i, j).to_bits() {
                    return false;
                }
            }
        }
        true
    }
}

/// Immutable stride-preserving view.
pub struct MatRef<'a, T> {
    ptr: *const T,
    rows: usize,
    cols: usize,
    ld: usize,
    _pd: PhantomData<&'a T>,
}

impl<T> Copy for MatRef<'_, T> {}
impl<T> Clone for MatRef<'_, T> {
    fn clone(&self) -> Self {
        *self
    }
}

unsafe impl<T: Sync> Sync for MatRef<'_, T> {}
unsafe impl<T: Sync> Send for MatRef<'_, T> {}

impl<'a, T: Scalar> MatRef<'a, T> {
    #[inline(always)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline(always)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> T {
        assert!(i < self.rows && j < self.cols);
        unsafe { *self.ptr.add(i + j * self.ld) }
    }

    /// Column `j` as a contiguous slice of length `rows`.
    #[inline(always)]
    pub fn col(&self, j: usize) -> &'a [T] {
        assert!(j < self.cols);
        unsafe { std::slice::from_raw_parts(self.ptr.add(j * self.ld), self.rows) }
    }

    pub fn submatrix(&self, i: usize, j: usize, rows: usize, cols: usize) -> MatRef<'a, T> {
        assert!(i + rows <= self.rows && j + cols <= self.cols);
        MatRef {
            ptr: unsafe { self.ptr.add(i + j * self.ld) },
            rows,
            cols,
            ld: self.ld,
            _pd: PhantomData,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn to_owned(&self) -> DenseMatrix<T> {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for j in 0..self.cols {
            out.data[j * out.ld..j * out.ld + self.rows].copy_from_slice(self.col(j));
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.cols {
            for &x in self.col(j) {
                acc += x.abs_sq();
            }
        }
        acc.sqrt()
    }
}

/// Mutable stride-preserving view. Not `Copy`; reborrow with `rb`/`rb_mut`.
pub struct MatMut<'a, T> {
    ptr: *mut T,
    rows: usize,
    cols: usize,
    ld: usize,
    _pd: PhantomData<&'a mut T>,
}

unsafe impl<T: Send> Send for MatMut<'_, T> {}

impl<'a, T: Scalar> MatMut<'a, T> {
    #[inline(always)]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline(always)]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline(always)]
    pub fn at(&self, i: usize, j: usize) -> T {
        assert!(i < self.rows && j < self.cols);
        unsafe { *self.ptr.add(i + j * self.ld) }
    }

    #[inline(always)]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        assert!(i < self.rows && j < self.cols);
        unsafe { *self.ptr.add(i + j * self.ld) = v }
    }

    #[inline(always)]
    pub fn col_mut(&mut self, j: usize) -> &mut [T] {
        assert!(j < self.cols);
        unsafe { std::slice::from_raw_parts_mut(self.ptr.add(j * self.ld), self.rows) }
    }

    /// Immutable reborrow.
    #[inline(always)]
    pub fn rb(&self) -> MatRef<'_, T> {
        MatRef {
            ptr: self.ptr,
            rows: self.rows,
            cols: self.cols,
            ld: self.ld,
            _pd: PhantomData,
        }
    }

    /// Mutable reborrow with a shorter lifetime.
    #[inline(always)]
    pub fn rb_mut(&mut self) -> MatMut<'_, T> {
        MatMut {
            ptr: self.ptr,
            rows: self.rows,
            cols: self.cols,
            ld: self.ld,
            _pd: PhantomData,
        }
    }

    /// Consumes the view (reborrow with `rb_mut` to keep using the parent).
    pub fn submatrix_mut(self, i: usize, j: usize, rows: usize, cols: usize) -> MatMut<'a, T> {
        assert!(i + rows <= self.rows && j + cols <= self.cols);
        MatMut {
            ptr: unsafe { self.ptr.add(i + j * self.ld) },
            rows,
            cols,
            ld: self.ld,
            _pd: PhantomData,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn copy_from(&mut self, src: MatRef<'_, T>) {
        assert!(self.rows == src.rows() && self.cols == src.cols());
        for j in 0..self.cols {
            self.col_mut(j).copy_from_slice(src.col(j));
        }
    }
}

/// The four aliasing quadrant views of a square matrix.
pub struct Quadrants<'a, T> {
    pub tl: MatRef<'a, T>,
    pub tr: MatRef<'a, T>,
    pub bl: MatRef<'a, T>,
    pub br: MatRef<'a, T>,
}

/// The 3x3 repartition of the lower storage of a Hermitian matrix at boundary
/// `k` with current block size `c`. The strictly-upper blocks are neither
/// stored nor updated, so only the six lower blocks are exposed.
///
/// All six views are pairwise disjoint in memory, so they may be mutated
/// independently within one iteration.
pub struct LowerBlocks<'a, T> {
    pub a00: MatMut<'a, T>,
    pub a10: MatMut<'a, T>,
    pub a11: MatMut<'a, T>,
    pub a20: MatMut<'a, T>,
    pub a21: MatMut<'a, T>,
    pub a22: MatMut<'a, T>,
}

/// Split the lower storage of square `m` into the 3x3 blocks at (`k`, `c`).
pub fn repartition_lower<T: Scalar>(m: &mut DenseMatrix<T>, k: usize, c: usize) -> LowerBlocks<'_, T> {
    let n = m.rows;
    assert!(m.is_square() && k + c <= n);
    let rem = n - k - c;
    let ptr = m.data.as_mut_ptr();
    let ld = m.ld;
    // Disjointness: the six (row-range, col-range) windows never overlap, so
    // handing out raw-pointer views of each is sound.
    let make = |i: usize, j: usize, r: usize, cc: usize| MatMut {
        ptr: unsafe { ptr.add(i + j * ld) },
        rows: r,
        cols: cc,
        ld,
        _pd: PhantomData,
    };
    LowerBlocks {
        a00: make(0, 0, k, k),
        a10: make(k, 0, c, k),
        a11: make(k, k, c, c),
        a20: make(k + c, 0, rem, k),
        a21: make(k + c, k, rem, c),
        a22: make(k + c, k + c, rem, rem),
    }
}

/// Blocked iteration schedule: boundaries `k = 0, b, 2b, ...` with block size
/// `min(b, n - k)`. The final boundary reaches `n` exactly.
pub fn partition_schedule(n: usize, b: usize) -> Result<Vec<(usize, usize)>> {
    if b == 0 {
        return Err(Error::invalid("block size must be at least 1".to_string()));
    }
    let mut out = Vec::with_capacity(n.div_ceil(b.max(1)));
    let mut k = 0;
    while k < n {
        let kb = b.min(n - k);
        out.push((k, kb));
        k += kb;
    }
    Ok(out)
}

/// y += x * w elementwise; the workhorse of the unit-stride inner loops.
#[inline(always)]
pub(crate) fn axpy_slice<T: Scalar>(y: &mut [T], x: &[T], w: T) {
    debug_assert_eq!(y.len(), x.len());
    for (yi, xi) in y.iter_mut().zip(x.iter()) {
        *yi += *xi * w;
    }
}
