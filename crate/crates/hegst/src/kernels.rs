//! Reference implementations of the level-3 building blocks, instrumented to
//! report flops into a [`FlopLedger`] by kernel class.
//!
//! Semantics are fixed so results are reproducible: for every output element
//! the accumulation starts from the beta-scaled old value (`beta == 0` means
//! the old value is not read) and adds terms in ascending inner index `p`.
//! Forms with a no-transpose left operand add one term per `p`, each grouped
//! as `op(A)[i,p] * (alpha * op(B)[p,j])`; forms with a conjugate-transposed
//! left operand accumulate the inner products first and add `alpha * sum`
//! once. Triangular solves divide by the diagonal entry element by element.
//!
//! Kernel calls on empty operands return immediately and report nothing.

use crate::error::{Error, Result};
use crate::ledger::{third_of_cube, FlopLedger, KernelClass};
use crate::matrix::{axpy_slice, DenseMatrix, MatMut, MatRef};
use crate::scalar::Scalar;
use crate::triangular::{HermitianMatrix, TriangularMatrix, TriRef};

/// Operand orientation flag. Plain transposition without conjugation never
/// appears in the Hermitian algorithms, so only these two forms exist.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Trans {
    No,
    ConjTrans,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

#[inline]
fn op_dims(m: MatRef<'_, impl Scalar>, t: Trans) -> (usize, usize) {
    match t {
        Trans::No => (m.rows(), m.cols()),
        Trans::ConjTrans => (m.cols(), m.rows()),
    }
}

fn scale_matrix<T: Scalar>(c: &mut MatMut<'_, T>, beta: T) {
    if beta == T::ONE {
        return;
    }
    for j in 0..c.cols() {
        if beta == T::ZERO {
            c.col_mut(j).fill(T::ZERO);
        } else {
            for v in c.col_mut(j) {
                *v *= beta;
            }
        }
    }
}

fn scale_lower<T: Scalar>(c: &mut MatMut<'_, T>, beta: f64) {
    if beta == 1.0 {
        return;
    }
    let n = c.rows();
    for j in 0..c.cols() {
        let col = c.col_mut(j);
        for v in &mut col[j..n] {
            *v = if beta == 0.0 { T::ZERO } else { v.scale(beta) };
        }
    }
}

fn record(ledger: Option<&mut FlopLedger>, class: KernelClass, flops: u64, wr: usize, wc: usize) {
    if let Some(l) = ledger {
        l.record(class, flops, wr, wc);
    }
}

/// C := alpha * op(A) * op(B) + beta * C. Reports `2 m n k` to the gemm class.
#[allow(clippy::too_many_arguments)]
pub fn gemm_update<T: Scalar>(
    mut c: MatMut<'_, T>,
    alpha: T,
    a: MatRef<'_, T>,
    trans_a: Trans,
    b: MatRef<'_, T>,
    trans_b: Trans,
    beta: T,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    let (m, ka) = op_dims(a, trans_a);
    let (kb, n) = op_dims(b, trans_b);
    if m != c.rows() || n != c.cols() || ka != kb {
        return Err(Error::dims(format!(
            "gemm: C is {}x{}, op(A) is {}x{}, op(B) is {}x{}",
            c.rows(),
            c.cols(),
            m,
            ka,
            kb,
            n
        )));
    }
    let k = ka;
    if m == 0 || n == 0 {
        return Ok(());
    }
    scale_matrix(&mut c, beta);
    if k == 0 {
        return Ok(());
    }

    match (trans_a, trans_b) {
        (Trans::No, Trans::No) => {
            for j in 0..n {
                for p in 0..k {
                    let w = alpha * b.at(p, j);
                    axpy_slice(c.col_mut(j), a.col(p), w);
                }
            }
        }
        (Trans::No, Trans::ConjTrans) => {
            for j in 0..n {
                for p in 0..k {
                    let w = alpha * b.at(j, p).conj();
                    axpy_slice(c.col_mut(j), a.col(p), w);
                }
            }
        }
        (Trans::ConjTrans, Trans::No) => {
            for j in 0..n {
                let bj = b.col(j);
                for i in 0..m {
                    let ai = a.col(i);
                    let mut s = T::ZERO;
                    for p in 0..k {
                        s += ai[p].conj() * bj[p];
                    }
                    let v = c.at(i, j) + alpha * s;
                    c.set(i, j, v);
                }
            }
        }
        (Trans::ConjTrans, Trans::ConjTrans) => {
            for j in 0..n {
                for i in 0..m {
                    let ai = a.col(i);
                    let mut s = T::ZERO;
                    for p in 0..k {
                        s += ai[p].conj() * b.at(j, p).conj();
                    }
                    let v = c.at(i, j) + alpha * s;
                    c.set(i, j, v);
                }
            }
        }
    }
    record(
        ledger,
        KernelClass::Gemm,
        2 * (m * n * k) as u64,
        m,
        n,
    );
    Ok(())
}

/// C := alpha * H * B + beta * C (left) or alpha * B * H + beta * C (right),
/// where `h` is read through its lower triangle plus the conjugate mirror.
/// Reports `2 * dim(H)^2 * other` to the hemm class.
pub fn hemm_update<T: Scalar>(
    mut c: MatMut<'_, T>,
    alpha: T,
    h: MatRef<'_, T>,
    b: MatRef<'_, T>,
    side: Side,
    beta: T,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    if h.rows() != h.cols() {
        return Err(Error::dims("hemm: Hermitian operand must be square"));
    }
    let nh = h.rows();
    let (m, n) = (c.rows(), c.cols());
    let ok = match side {
        Side::Left => b.rows() == nh && b.cols() == n && m == nh,
        Side::Right => b.rows() == m && b.cols() == nh && n == nh,
    };
    if !ok {
        return Err(Error::dims(format!(
            "hemm: C is {}x{}, H is {}x{}, B is {}x{} ({side:?})",
            m,
            n,
            nh,
            nh,
            b.rows(),
            b.cols()
        )));
    }
    if m == 0 || n == 0 {
        return Ok(());
    }
    scale_matrix(&mut c, beta);
    if nh == 0 {
        return Ok(());
    }

    match side {
        Side::Left => {
            // Lower part of H: ascending-p axpys (adds terms p = 0..=i);
            // mirrored part: one grouped inner-product add per element.
            for j in 0..n {
                for p in 0..nh {
                    let w = alpha * b.at(p, j);
                    let hp = h.col(p);
                    let cj = c.col_mut(j);
                    for i in p..nh {
                        cj[i] += hp[i] * w;
                    }
                }
                let bj = b.col(j);
                for i in 0..nh {
                    let hi = h.col(i);
                    let mut s = T::ZERO;
                    for p in i + 1..nh {
                        s += hi[p].conj() * bj[p];
                    }
                    let v = c.at(i, j) + alpha * s;
                    c.set(i, j, v);
                }
            }
        }
        Side::Right => {
            for j in 0..nh {
                for p in 0..nh {
                    let hpj = if p >= j { h.at(p, j) } else { h.at(j, p).conj() };
                    let w = alpha * hpj;
                    axpy_slice(c.col_mut(j), b.col(p), w);
                }
            }
        }
    }
    record(
        ledger,
        KernelClass::Hemm,
        2 * (nh * nh) as u64 * if side == Side::Left { n } else { m } as u64,
        m,
        n,
    );
    Ok(())
}

/// Rank-2k update of the lower triangle of C. With `trans == No` (A, B of
/// shape n x k): C += alpha A B^H + conj(alpha) B A^H. With `trans ==
/// ConjTrans` (A, B of shape k x n): C += alpha A^H B + conj(alpha) B^H A.
/// `beta` is real. Reports `2 n^2 k` to the her2k class.
pub fn her2k_update<T: Scalar>(
    mut c: MatMut<'_, T>,
    alpha: T,
    a: MatRef<'_, T>,
    b: MatRef<'_, T>,
    trans: Trans,
    beta: f64,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    if c.rows() != c.cols() {
        return Err(Error::dims("her2k: C must be square"));
    }
    let n = c.rows();
    let (an, ak) = op_dims(a, trans);
    let (bn, bk) = op_dims(b, trans);
    if an != n || bn != n || ak != bk {
        return Err(Error::dims(format!(
            "her2k: C is {}x{}, op shapes {}x{} and {}x{}",
            n, n, an, ak, bn, bk
        )));
    }
    let k = ak;
    if n == 0 {
        return Ok(());
    }
    scale_lower(&mut c, beta);
    if k == 0 {
        return Ok(());
    }

    match trans {
        Trans::No => {
            for j in 0..n {
                for p in 0..k {
                    let w1 = alpha * b.at(j, p).conj();
                    let w2 = alpha.conj() * a.at(j, p).conj();
                    let ap = a.col(p);
                    let bp = b.col(p);
                    let cj = c.col_mut(j);
                    for i in j..n {
                        cj[i] += ap[i] * w1 + bp[i] * w2;
                    }
                }
            }
        }
        Trans::ConjTrans => {
            for j in 0..n {
                let aj = a.col(j);
                let bj = b.col(j);
                for i in j..n {
                    let ai = a.col(i);
                    let bi = b.col(i);
                    let mut s1 = T::ZERO;
                    let mut s2 = T::ZERO;
                    for p in 0..k {
                        s1 += ai[p].conj() * bj[p];
                        s2 += bi[p].conj() * aj[p];
                    }
                    let v = c.at(i, j) + alpha * s1 + alpha.conj() * s2;
                    c.set(i, j, v);
                }
            }
        }
    }
    record(
        ledger,
        KernelClass::Her2k,
        2 * (n * n * k) as u64,
        n,
        n,
    );
    Ok(())
}

/// Rank-k update of the lower triangle: C += alpha A A^H (`No`, A n x k) or
/// C += alpha A^H A (`ConjTrans`, A k x n), with real alpha and beta.
/// Reports `n^2 k` to the herk class.
pub fn herk_update<T: Scalar>(
    mut c: MatMut<'_, T>,
    alpha: f64,
    a: MatRef<'_, T>,
    trans: Trans,
    beta: f64,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    if c.rows() != c.cols() {
        return Err(Error::dims("herk: C must be square"));
    }
    let n = c.rows();
    let (an, k) = op_dims(a, trans);
    if an != n {
        return Err(Error::dims(format!(
            "herk: C is {}x{}, op(A) is {}x{}",
            n, n, an, k
        )));
    }
    if n == 0 {
        return Ok(());
    }
    scale_lower(&mut c, beta);
    if k == 0 {
        return Ok(());
    }

    match trans {
        Trans::No => {
            for j in 0..n {
                for p in 0..k {
                    let w = a.at(j, p).conj().scale(alpha);
                    let ap = a.col(p);
                    let cj = c.col_mut(j);
                    for i in j..n {
                        cj[i] += ap[i] * w;
                    }
                }
            }
        }
        Trans::ConjTrans => {
            for j in 0..n {
                let aj = a.col(j);
                for i in j..n {
                    let ai = a.col(i);
                    let mut s = T::ZERO;
                    for p in 0..k {
                        s += ai[p].conj() * aj[p];
                    }
                    let v = c.at(i, j) + s.scale(alpha);
                    c.set(i, j, v);
                }
            }
        }
    }
    record(ledger, KernelClass::Herk, (n * n * k) as u64, n, n);
    Ok(())
}

/// In-place triangular solve: B := L^-1 B, B L^-1, L^-H B, or B L^-H.
/// Reports `m^2 r` to the trsm class (`m` = triangular dimension, `r` = the
/// number of right-hand-side vectors).
pub fn trsm_apply<T: Scalar>(
    mut b: MatMut<'_, T>,
    l: TriRef<'_, T>,
    side: Side,
    trans: Trans,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    let m = l.dim();
    let (bm, bn) = (b.rows(), b.cols());
    let r = match side {
        Side::Left => {
            if bm != m {
                return Err(Error::dims(format!("trsm: B is {bm}x{bn}, L is {m}x{m}")));
            }
            bn
        }
        Side::Right => {
            if bn != m {
                return Err(Error::dims(format!("trsm: B is {bm}x{bn}, L is {m}x{m}")));
            }
            bm
        }
    };
    if m == 0 || r == 0 {
        return Ok(());
    }
    l.check_nonsingular()?;
    let unit = l.unit_diagonal;
    let lm = l.mat;

    match (side, trans) {
        (Side::Left, Trans::No) => {
            // Forward substitution down each column.
            for j in 0..bn {
                let col = b.col_mut(j);
                for p in 0..m {
                    let x = if unit { col[p] } else { col[p] / lm.at(p, p) };
                    col[p] = x;
                    let lp = lm.col(p);
                    for i in p + 1..m {
                        col[i] -= lp[i] * x;
                    }
                }
            }
        }
        (Side::Left, Trans::ConjTrans) => {
            // Back substitution: L^H is upper triangular.
            for j in 0..bn {
                let col = b.col_mut(j);
                for p in (0..m).rev() {
                    let lp = lm.col(p);
                    let mut s = col[p];
                    for q in p + 1..m {
                        s -= lp[q].conj() * col[q];
                    }
                    col[p] = if unit { s } else { s / lm.at(p, p).conj() };
                }
            }
        }
        (Side::Right, Trans::No) => {
            // X L = B, columns resolved from the last to the first.
            for q in (0..m).rev() {
                for p in q + 1..m {
                    let w = lm.at(p, q);
                    let (cq, cp) = two_cols(&mut b, q, p);
                    for i in 0..r {
                        cq[i] -= cp[i] * w;
                    }
                }
                if !unit {
                    let d = lm.at(q, q);
                    for v in b.col_mut(q) {
                        *v = *v / d;
                    }
                }
            }
        }
        (Side::Right, Trans::ConjTrans) => {
            // X L^H = B, columns resolved from the first to the last.
            for q in 0..m {
                for p in 0..q {
                    let w = lm.at(q, p).conj();
                    let (cq, cp) = two_cols(&mut b, q, p);
                    for i in 0..r {
                        cq[i] -= cp[i] * w;
                    }
                }
                if !unit {
                    let d = lm.at(q, q).conj();
                    for v in b.col_mut(q) {
                        *v = *v / d;
                    }
                }
            }
        }
    }
    record(
        ledger,
        KernelClass::Trsm,
        (m * m * r) as u64,
        bm,
        bn,
    );
    Ok(())
}

/// In-place triangular multiply: B := op(L) B or B op(L).
/// Reports `m^2 r` to the trmm class.
pub fn trmm_apply<T: Scalar>(
    mut b: MatMut<'_, T>,
    l: TriRef<'_, T>,
    side: Side,
    trans: Trans,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    let m = l.dim();
    let (bm, bn) = (b.rows(), b.cols());
    let r = match side {
        Side::Left => {
            if bm != m {
                return Err(Error::dims(format!("trmm: B is {bm}x{bn}, L is {m}x{m}")));
            }
            bn
        }
        Side::Right => {
            if bn != m {
                return Err(Error::dims(format!("trmm: B is {bm}x{bn}, L is {m}x{m}")));
            }
            bm
        }
    };
    if m == 0 || r == 0 {
        return Ok(());
    }
    let unit = l.unit_diagonal;
    let lm = l.mat;

    match (side, trans) {
        (Side::Left, Trans::No) => {
            for j in 0..bn {
                let col = b.col_mut(j);
                for q in (0..m).rev() {
                    let old = col[q];
                    col[q] = if unit { old } else { lm.at(q, q) * old };
                    let lq = lm.col(q);
                    for i in q + 1..m {
                        col[i] += lq[i] * old;
                    }
                }
            }
        }
        (Side::Left, Trans::ConjTrans) => {
            for j in 0..bn {
                let col = b.col_mut(j);
                for p in 0..m {
                    let lp = lm.col(p);
                    let mut s = if unit { col[p] } else { lm.at(p, p).conj() * col[p] };
                    for q in p + 1..m {
                        s += lp[q].conj() * col[q];
                    }
                    col[p] = s;
                }
            }
        }
        (Side::Right, Trans::No) => {
            for q in 0..m {
                if !unit {
                    let d = lm.at(q, q);
                    for v in b.col_mut(q) {
                        *v *= d;
                    }
                }
                for p in q + 1..m {
                    let w = lm.at(p, q);
                    let (cq, cp) = two_cols(&mut b, q, p);
                    for i in 0..r {
                        cq[i] += cp[i] * w;
                    }
                }
            }
        }
        (Side::Right, Trans::ConjTrans) => {
            for q in (0..m).rev() {
                if !unit {
                    let d = lm.at(q, q).conj();
                    for v in b.col_mut(q) {
                        *v *= d;
                    }
                }
                for p in 0..q {
                    let w = lm.at(q, p).conj();
                    let (cq, cp) = two_cols(&mut b, q, p);
                    for i in 0..r {
                        cq[i] += cp[i] * w;
                    }
                }
            }
        }
    }
    record(
        ledger,
        KernelClass::Trmm,
        (m * m * r) as u64,
        bm,
        bn,
    );
    Ok(())
}

/// Two distinct columns of `b`, the first mutable. Sound because the columns
/// are disjoint memory for `jw != jr`.
fn two_cols<'b, T: Scalar>(b: &'b mut MatMut<'_, T>, jw: usize, jr: usize) -> (&'b mut [T], &'b [T]) {
    assert_ne!(jw, jr);
    let rows = b.rows();
    let pw = b.col_mut(jw).as_mut_ptr();
    let pr = b.col_mut(jr).as_ptr();
    unsafe {
        (
            std::slice::from_raw_parts_mut(pw, rows),
            std::slice::from_raw_parts(pr, rows),
        )
    }
}

/// Elementwise update Y += alpha * X, reported to the `other` class with one
/// multiply-add per element. This is the half-update pass of the blocked
/// variants, not a BLAS-3 kernel.
pub fn axpy_update<T: Scalar>(
    mut y: MatMut<'_, T>,
    alpha: T,
    x: MatRef<'_, T>,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    if y.rows() != x.rows() || y.cols() != x.cols() {
        return Err(Error::dims(format!(
            "axpy: Y is {}x{}, X is {}x{}",
            y.rows(),
            y.cols(),
            x.rows(),
            x.cols()
        )));
    }
    if y.is_empty() {
        return Ok(());
    }
    for j in 0..y.cols() {
        axpy_slice(y.col_mut(j), x.col(j), alpha);
    }
    record(
        ledger,
        KernelClass::Other,
        (y.rows() * y.cols()) as u64,
        y.rows(),
        y.cols(),
    );
    Ok(())
}

/// Cholesky factorization B = L L^H of a Hermitian positive-definite matrix,
/// reading only the lower triangle. Returns the factor with a real positive
/// diagonal and zeros above it. Reports `n^3/3` (rounded) to the chol class.
pub fn cholesky_lower<T: Scalar>(
    b: &HermitianMatrix<T>,
    ledger: Option<&mut FlopLedger>,
) -> Result<TriangularMatrix<T>> {
    let n = b.dim();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let src = b.base();
        for i in j..n {
            l.set(i, j, src.at(i, j));
        }
    }
    // Right-looking factorization, all unit-stride column operations.
    let mut lv = l.view_mut();
    for p in 0..n {
        let pivot = lv.at(p, p).re();
        if pivot <= 0.0 || !pivot.is_finite() {
            return Err(Error::NotPositiveDefinite { index: p });
        }
        let d = pivot.sqrt();
        lv.set(p, p, T::from_re(d));
        {
            let col = lv.col_mut(p);
            for v in &mut col[p + 1..n] {
                *v = v.unscale(d);
            }
        }
        for j in p + 1..n {
            let w = lv.at(j, p).conj();
            let (cj, cp) = two_cols(&mut lv, j, p);
            for i in j..n {
                cj[i] -= cp[i] * w;
            }
            // The diagonal stays exactly real; pin it to silence drift.
            let dj = cj[j];
            cj[j] = T::from_re(dj.re());
        }
    }
    record(ledger, KernelClass::Chol, third_of_cube(n), n, n);
    TriangularMatrix::from_base(l, false)
}
