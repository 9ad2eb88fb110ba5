//! Blocked variants of the companion two-sided triangular product
//! A := L^H A L, in place on the lower triangle, plus the unblocked base
//! case.
//!
//! Two variants are provided. M1 is the classic panel algorithm: the finished
//! top-left block grows by one panel per iteration and everything below the
//! boundary stays untouched. M2 maintains the panel below the boundary
//! post-multiplied by L_TL, replacing M1's big triangular multiply with an
//! incremental matrix product over A20. Neither variant performs a single
//! triangular solve.

use crate::error::{Error, Result};
use crate::kernels::{gemm_update, hemm_update, her2k_update, trmm_apply, Side, Trans};
use crate::ledger::{FlopLedger, KernelClass};
use crate::matrix::{partition_schedule, repartition_lower, DenseMatrix, MatMut, MatRef};
use crate::scalar::Scalar;
use crate::trsm::BoundaryHook;
use crate::triangular::{HermitianMatrix, TriangularMatrix, TriRef};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum TrmmVariant {
    M1,
    M2,
}

impl TrmmVariant {
    pub const ALL: [TrmmVariant; 2] = [TrmmVariant::M1, TrmmVariant::M2];

    pub fn name(self) -> &'static str {
        match self {
            TrmmVariant::M1 => "m1",
            TrmmVariant::M2 => "m2",
        }
    }

    pub fn parse(s: &str) -> Option<TrmmVariant> {
        match s {
            "m1" | "M1" | "mv1" => Some(TrmmVariant::M1),
            "m2" | "M2" | "mv2" => Some(TrmmVariant::M2),
            _ => None,
        }
    }

    pub fn step_count(self) -> usize {
        match self {
            TrmmVariant::M1 => 6,
            TrmmVariant::M2 => 7,
        }
    }
}

/// Unblocked base case: overwrite the lower triangle of A with L^H A L.
/// Processes one row at a time; reports `n^3` to the base-case class.
pub fn two_sided_trmm_unblocked<T: Scalar>(
    a: &mut HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    if a.dim() != l.dim() {
        return Err(Error::dims(format!("A is {0}x{0}, L is {1}x{1}", a.dim(), l.dim())));
    }
    unblocked_trmm_view(a.base_mut().view_mut(), l.view(), ledger)
}

pub(crate) fn unblocked_trmm_view<T: Scalar>(
    mut a: MatMut<'_, T>,
    l: TriRef<'_, T>,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    let n = a.rows();
    if n == 0 {
        return Ok(());
    }
    let lm = l.mat;
    for k in 0..n {
        let akk = T::from_re(a.at(k, k).re());
        // Row k of the lower triangle: a10 := a10 L00, in place ascending.
        for j in 0..k {
            let lj = lm.col(j);
            let mut s = a.at(k, j) * l.diag(j);
            for p in j + 1..k {
                s += a.at(k, p) * lj[p];
            }
            a.set(k, j, s);
        }
        // a10 += akk/2 * l10, the rank-2 row update of A00, then the second
        // half-update and the scaling by conj(l_kk).
        let halfd = akk.scale(0.5);
        for j in 0..k {
            let v = a.at(k, j) + lm.at(k, j) * halfd;
            a.set(k, j, v);
        }
        for j in 0..k {
            let w1 = lm.at(k, j);
            let w2 = a.at(k, j);
            for i in j..k {
                let v = a.at(i, j) + a.at(k, i).conj() * w1 + lm.at(k, i).conj() * w2;
                a.set(i, j, v);
            }
            let djj = a.at(j, j);
            a.set(j, j, T::from_re(djj.re()));
        }
        let ck = l.diag(k).conj();
        for j in 0..k {
            let v = a.at(k, j) + lm.at(k, j) * halfd;
            a.set(k, j, v * ck);
        }
        let dk = l.diag(k);
        a.set(k, k, T::from_re(akk.re() * dk.abs_sq()));
    }
    if let Some(ledger) = ledger {
        ledger.record(KernelClass::TwoSidedBase, (n as u64).pow(3), n, n);
    }
    Ok(())
}

/// Blocked driver: A := L^H A L on the lower triangle.
pub fn two_sided_trmm<T: Scalar>(
    a: &mut HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    variant: TrmmVariant,
    block_size: usize,
    ledger: Option<&mut FlopLedger>,
    hook: Option<&mut dyn BoundaryHook<T>>,
) -> Result<()> {
    two_sided_trmm_with_fault(a, l, variant, block_size, ledger, hook, None)
}

/// Like [`two_sided_trmm`], optionally suppressing one update step per
/// iteration for the worksheet discrimination tests.
pub fn two_sided_trmm_with_fault<T: Scalar>(
    a: &mut HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    variant: TrmmVariant,
    block_size: usize,
    mut ledger: Option<&mut FlopLedger>,
    mut hook: Option<&mut dyn BoundaryHook<T>>,
    skip_step: Option<usize>,
) -> Result<()> {
    let n = a.dim();
    if l.dim() != n {
        return Err(Error::dims(format!("A is {n}x{n}, L is {0}x{0}", l.dim())));
    }
    if block_size == 0 {
        return Err(Error::invalid("block size must be at least 1".to_string()));
    }
    let schedule = partition_schedule(n, block_size)?;
    if let Some(h) = hook.as_deref_mut() {
        h.at_boundary(0, a.base(), None)?;
    }
    for &(k, c) in &schedule {
        let skip = |s: usize| skip_step == Some(s);
        match variant {
            TrmmVariant::M1 => m1_iteration(a.base_mut(), l, k, c, &mut ledger, &skip)?,
            TrmmVariant::M2 => m2_iteration(a.base_mut(), l, k, c, &mut ledger, &skip)?,
        }
        if let Some(h) = hook.as_deref_mut() {
            h.at_boundary(k + c, a.base(), None)?;
        }
    }
    Ok(())
}

struct LParts<'a, T> {
    l00: TriRef<'a, T>,
    l10: MatRef<'a, T>,
    l11: TriRef<'a, T>,
}

fn l_parts<'a, T: Scalar>(l: &'a TriangularMatrix<T>, k: usize, c: usize) -> LParts<'a, T> {
    let v = l.base().view();
    let unit = l.unit_diagonal();
    LParts {
        l00: TriRef::new(v.submatrix(0, 0, k, k), unit),
        l10: v.submatrix(k, 0, c, k),
        l11: TriRef::new(v.submatrix(k, k, c, c), unit),
    }
}

fn half<T: Scalar>() -> T {
    T::from_re(0.5)
}

fn m1_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // 1. A10 := A10 L00 (the big triangular multiply)
    if !skip(0) {
        trmm_apply(parts.a10.rb_mut(), lp.l00, Side::Right, Trans::No, ledger.as_deref_mut())?;
    }
    // 2. A10 := A10 + A11 L10 / 2
    if !skip(1) {
        hemm_update(
            parts.a10.rb_mut(),
            half::<T>(),
            parts.a11.rb(),
            lp.l10,
            Side::Left,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 3. A00 := A00 + A10^H L10 + L10^H A10 (the dominant rank-2k update)
    if !skip(2) {
        her2k_update(
            parts.a00.rb_mut(),
            T::ONE,
            parts.a10.rb(),
            lp.l10,
            Trans::ConjTrans,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    // 4. A10 := A10 + A11 L10 / 2
    if !skip(3) {
        hemm_update(
            parts.a10.rb_mut(),
            half::<T>(),
            parts.a11.rb(),
            lp.l10,
            Side::Left,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 5. A10 := L11^H A10
    if !skip(4) {
        trmm_apply(parts.a10.rb_mut(), lp.l11, Side::Left, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    // 6. A11 := base(A11, L11)
    if !skip(5) {
        unblocked_trmm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    Ok(())
}

fn m2_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // A10 already holds A10_hat L00 by the invariant.
    // 1. A10 := A10 + A11 L10 / 2
    if !skip(0) {
        hemm_update(
            parts.a10.rb_mut(),
            half::<T>(),
            parts.a11.rb(),
            lp.l10,
            Side::Left,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 2. A00 := A00 + A10^H L10 + L10^H A10
    if !skip(1) {
        her2k_update(
            parts.a00.rb_mut(),
            T::ONE,
            parts.a10.rb(),
            lp.l10,
            Trans::ConjTrans,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    // 3. A10 := A10 + A11 L10 / 2
    if !skip(2) {
        hemm_update(
            parts.a10.rb_mut(),
            half::<T>(),
            parts.a11.rb(),
            lp.l10,
            Side::Left,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 4. A10 := L11^H A10
    if !skip(3) {
        trmm_apply(parts.a10.rb_mut(), lp.l11, Side::Left, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    // 5. A20 := A20 + A21 L10 (extends the post-multiplied panel; A21 original)
    if !skip(4) {
        gemm_update(
            parts.a20.rb_mut(),
            T::ONE,
            parts.a21.rb(),
            Trans::No,
            lp.l10,
            Trans::No,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 6. A21 := A21 L11
    if !skip(5) {
        trmm_apply(parts.a21.rb_mut(), lp.l11, Side::Right, Trans::No, ledger.as_deref_mut())?;
    }
    // 7. A11 := base(A11, L11)
    if !skip(6) {
        unblocked_trmm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    Ok(())
}
