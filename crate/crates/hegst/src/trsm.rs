//! The blocked algorithm family computing A := L^-1 A L^-H in place on the
//! lower triangle, plus its unblocked base case.
//!
//! All five variants march a partition boundary through the matrix and
//! maintain a variant-specific loop invariant over the quadrant states (see
//! [`crate::worksheet`]). They produce the same result with different
//! per-iteration update sequences and kernel mixes:
//!
//! * V1: big right triangular solve per panel; the Hermitian multiply against
//!   the finished top-left block dominates.
//! * V2: keeps the panel below the boundary pre-solved against L_TL^H; the
//!   big operands are read but only panels are written.
//! * V3: like V2 but the product Y = L_BL C_TL is stored and maintained in a
//!   workspace instead of being recomputed.
//! * V4: right-looking; the trailing matrix is carried by one big rank-2k
//!   update per iteration (the default variant).
//! * V5: like V4 but the panel column is finished with a big left triangular
//!   solve against L_22.
//!
//! Each update step maps to exactly one instrumented kernel call. A step can
//! be suppressed through [`two_sided_trsm_with_fault`]; the worksheet harness
//! is expected to flag the resulting state corruption.

use crate::error::{Error, Result};
use crate::kernels::{
    axpy_update, gemm_update, hemm_update, her2k_update, trsm_apply, Side, Trans,
};
use crate::ledger::{FlopLedger, KernelClass};
use crate::matrix::{partition_schedule, repartition_lower, DenseMatrix, MatMut, MatRef};
use crate::scalar::Scalar;
use crate::triangular::{HermitianMatrix, TriangularMatrix, TriRef};

/// Identifies one member of the algorithm family.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum TrsmVariant {
    V1,
    V2,
    V3,
    V4,
    V5,
}

/// V4 is the default: its trailing rank-2k update gives it the best
/// scalability proxy of the family.
impl Default for TrsmVariant {
    fn default() -> Self {
        TrsmVariant::V4
    }
}

impl TrsmVariant {
    pub const ALL: [TrsmVariant; 5] = [
        TrsmVariant::V1,
        TrsmVariant::V2,
        TrsmVariant::V3,
        TrsmVariant::V4,
        TrsmVariant::V5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrsmVariant::V1 => "1",
            TrsmVariant::V2 => "2",
            TrsmVariant::V3 => "3",
            TrsmVariant::V4 => "4",
            TrsmVariant::V5 => "5",
        }
    }

    pub fn parse(s: &str) -> Option<TrsmVariant> {
        match s {
            "1" | "v1" | "V1" => Some(TrsmVariant::V1),
            "2" | "v2" | "V2" => Some(TrsmVariant::V2),
            "3" | "v3" | "V3" => Some(TrsmVariant::V3),
            "4" | "v4" | "V4" => Some(TrsmVariant::V4),
            "5" | "v5" | "V5" => Some(TrsmVariant::V5),
            _ => None,
        }
    }

    /// Number of update steps in one iteration, for fault enumeration.
    pub fn step_count(self) -> usize {
        match self {
            TrsmVariant::V1 => 7,
            TrsmVariant::V2 => 8,
            TrsmVariant::V3 => 12,
            TrsmVariant::V4 => 7,
            TrsmVariant::V5 => 6,
        }
    }
}

/// One stored block column of the V3 workspace: rows `row_start..n` of the
/// global columns `col_start..col_start + data.cols()` of Y = L_BL C_TL.
struct YBlock<T> {
    col_start: usize,
    row_start: usize,
    data: DenseMatrix<T>,
}

/// Scratch owned by one variant run.
///
/// V1 and V2 allocate a single `b x n` row panel for the Y10 product. V3
/// lazily accumulates the stored Y panel as packed block columns, each
/// allocated once with exactly the rows it will ever need; the high-water
/// mark is the total number of scalars held.
pub struct TrsmWorkspace<T> {
    n: usize,
    w_panel: Option<DenseMatrix<T>>,
    y_blocks: Vec<YBlock<T>>,
    allocated: usize,
    peak: usize,
}

impl<T: Scalar> TrsmWorkspace<T> {
    fn new(n: usize) -> Self {
        TrsmWorkspace {
            n,
            w_panel: None,
            y_blocks: Vec::new(),
            allocated: 0,
            peak: 0,
        }
    }

    fn w_panel_mut(&mut self, rows: usize, cols: usize, b: usize) -> MatMut<'_, T> {
        if self.w_panel.is_none() {
            self.w_panel = Some(DenseMatrix::zeros(b, self.n));
            self.allocated += b * self.n;
            self.peak = self.peak.max(self.allocated);
        }
        self.w_panel.as_mut().unwrap().view_mut().submatrix_mut(0, 0, rows, cols)
    }

    fn push_y_block(&mut self, col_start: usize, row_start: usize, data: DenseMatrix<T>) {
        self.allocated += data.rows() * data.cols();
        self.peak = self.peak.max(self.allocated);
        self.y_blocks.push(YBlock {
            col_start,
            row_start,
            data,
        });
    }

    /// Peak number of workspace scalars held at any point of the run.
    pub fn peak_scalars(&self) -> usize {
        self.peak
    }

    /// Assemble the stored Y panel restricted to rows `k..n`, columns `0..k`,
    /// as one dense matrix. Used by the worksheet harness.
    pub fn materialize_y(&self, k: usize) -> DenseMatrix<T> {
        let rows = self.n - k;
        let mut out = DenseMatrix::zeros(rows, k);
        for blk in &self.y_blocks {
            if blk.col_start >= k {
                continue;
            }
            let local_top = k - blk.row_start;
            for j in 0..blk.data.cols() {
                for i in 0..rows {
                    out.set(i, blk.col_start + j, blk.data.at(local_top + i, j));
                }
            }
        }
        out
    }

    /// Apply `f(y_view, col_start)` to the stored rows `row_range` of every
    /// block column left of `k`.
    fn for_each_y_block<F>(&mut self, k: usize, row_lo: usize, row_hi: usize, mut f: F) -> Result<()>
    where
        F: FnMut(MatMut<'_, T>, usize) -> Result<()>,
    {
        for blk in &mut self.y_blocks {
            if blk.col_start >= k {
                continue;
            }
            let lo = row_lo - blk.row_start;
            let hi = row_hi - blk.row_start;
            let cols = blk.data.cols();
            let view = blk.data.view_mut().submatrix_mut(lo, 0, hi - lo, cols);
            f(view, blk.col_start)?;
        }
        Ok(())
    }
}

/// Observer invoked with read access to the matrix at every partition
/// boundary (including k = 0 and k = n). Returning an error aborts the run.
pub trait BoundaryHook<T: Scalar> {
    fn at_boundary(
        &mut self,
        k: usize,
        a: &DenseMatrix<T>,
        workspace: Option<&TrsmWorkspace<T>>,
    ) -> Result<()>;
}

/// Summary facts about one completed run.
#[derive(Debug, Clone, Copy)]
pub struct TrsmRunInfo {
    pub workspace_peak_scalars: usize,
}

/// Unblocked base case: overwrite the lower triangle of A with the solution C
/// of L C L^H = A. Processes one column at a time (solve, half-update,
/// rank-2 trailing update, half-update, forward substitution). Reports `n^3`
/// to the base-case class.
pub fn two_sided_trsm_unblocked<T: Scalar>(
    a: &mut HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    if a.dim() != l.dim() {
        return Err(Error::dims(format!("A is {0}x{0}, L is {1}x{1}", a.dim(), l.dim())));
    }
    unblocked_trsm_view(a.base_mut().view_mut(), l.view(), ledger)
}

pub(crate) fn unblocked_trsm_view<T: Scalar>(
    mut a: MatMut<'_, T>,
    l: TriRef<'_, T>,
    ledger: Option<&mut FlopLedger>,
) -> Result<()> {
    let n = a.rows();
    if n == 0 {
        return Ok(());
    }
    let lm = l.mat;
    for p in 0..n {
        let lpp = l.diag(p);
        let lpp_sq = lpp.abs_sq();
        if lpp_sq == 0.0 {
            return Err(Error::SingularFactor { index: p });
        }
        let cpp = T::from_re(a.at(p, p).re() / lpp_sq);
        a.set(p, p, cpp);
        if p + 1 == n {
            continue;
        }
        let half = cpp.scale(0.5);
        let conj_lpp = lpp.conj();
        {
            let col = a.col_mut(p);
            let lcol = lm.col(p);
            for i in p + 1..n {
                col[i] = col[i] / conj_lpp - lcol[i] * half;
            }
        }
        // Rank-2 update of the trailing lower triangle with w = current a21:
        // A22 -= w l21^H + l21 w^H.
        for j in p + 1..n {
            let lcol = lm.col(p);
            let w1 = lcol[j].conj();
            let w2 = a.at(j, p).conj();
            for i in j..n {
                let v = a.at(i, j) - a.at(i, p) * w1 - lcol[i] * w2;
                a.set(i, j, v);
            }
            let djj = a.at(j, j);
            a.set(j, j, T::from_re(djj.re()));
        }
        // Second half-update, then the forward substitution with L22.
        {
            let col = a.col_mut(p);
            let lcol = lm.col(p);
            for i in p + 1..n {
                col[i] -= lcol[i] * half;
            }
        }
        for t in p + 1..n {
            let d = l.diag(t);
            let x = a.at(t, p) / d;
            a.set(t, p, x);
            let lt = lm.col(t);
            let col = a.col_mut(p);
            for i in t + 1..n {
                col[i] -= lt[i] * x;
            }
        }
    }
    if let Some(ledger) = ledger {
        ledger.record(KernelClass::TwoSidedBase, (n as u64).pow(3), n, n);
    }
    Ok(())
}

/// Blocked driver. `a` is overwritten with C where L C L^H = A; only the
/// lower triangle is read or written. The default variant elsewhere in the
/// crate is V4.
pub fn two_sided_trsm<T: Scalar>(
    a: &mut HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    variant: TrsmVariant,
    block_size: usize,
    ledger: Option<&mut FlopLedger>,
    hook: Option<&mut dyn BoundaryHook<T>>,
) -> Result<TrsmRunInfo> {
    two_sided_trsm_with_fault(a, l, variant, block_size, ledger, hook, None)
}

/// Like [`two_sided_trsm`] but optionally suppressing one update step (by its
/// per-iteration ordinal) in every iteration. Fault injection exists so the
/// worksheet harness can be shown to discriminate; it is not part of the
/// numerical API.
pub fn two_sided_trsm_with_fault<T: Scalar>(
    a: &mut HermitianMatrix<T>,
    l: &TriangularMatrix<T>,
    variant: TrsmVariant,
    block_size: usize,
    mut ledger: Option<&mut FlopLedger>,
    mut hook: Option<&mut dyn BoundaryHook<T>>,
    skip_step: Option<usize>,
) -> Result<TrsmRunInfo> {
    let n = a.dim();
    if l.dim() != n {
        return Err(Error::dims(format!("A is {n}x{n}, L is {0}x{0}", l.dim())));
    }
    if block_size == 0 {
        return Err(Error::invalid("block size must be at least 1".to_string()));
    }
    l.view().check_nonsingular()?;

    let schedule = partition_schedule(n, block_size)?;
    let mut ws = TrsmWorkspace::new(n);
    if let Some(h) = hook.as_deref_mut() {
        h.at_boundary(0, a.base(), Some(&ws))?;
    }
    for &(k, c) in &schedule {
        let skip = |s: usize| skip_step == Some(s);
        match variant {
            TrsmVariant::V1 => v1_iteration(a.base_mut(), l, k, c, block_size, &mut ws, &mut ledger, &skip)?,
            TrsmVariant::V2 => v2_iteration(a.base_mut(), l, k, c, block_size, &mut ws, &mut ledger, &skip)?,
            TrsmVariant::V3 => v3_iteration(a.base_mut(), l, k, c, &mut ws, &mut ledger, &skip)?,
            TrsmVariant::V4 => v4_iteration(a.base_mut(), l, k, c, &mut ledger, &skip)?,
            TrsmVariant::V5 => v5_iteration(a.base_mut(), l, k, c, &mut ledger, &skip)?,
        }
        if let Some(h) = hook.as_deref_mut() {
            h.at_boundary(k + c, a.base(), Some(&ws))?;
        }
    }
    Ok(TrsmRunInfo {
        workspace_peak_scalars: ws.peak_scalars(),
    })
}

struct LParts<'a, T> {
    l00: TriRef<'a, T>,
    l10: MatRef<'a, T>,
    l11: TriRef<'a, T>,
    l20: MatRef<'a, T>,
    l21: MatRef<'a, T>,
    l22: TriRef<'a, T>,
}

fn l_parts<'a, T: Scalar>(l: &'a TriangularMatrix<T>, k: usize, c: usize) -> LParts<'a, T> {
    let v = l.base().view();
    let n = l.dim();
    let m = n - k - c;
    let unit = l.unit_diagonal();
    LParts {
        l00: TriRef::new(v.submatrix(0, 0, k, k), unit),
        l10: v.submatrix(k, 0, c, k),
        l11: TriRef::new(v.submatrix(k, k, c, c), unit),
        l20: v.submatrix(k + c, 0, m, k),
        l21: v.submatrix(k + c, k, m, c),
        l22: TriRef::new(v.submatrix(k + c, k + c, m, m), unit),
    }
}

fn half<T: Scalar>() -> T {
    T::from_re(0.5)
}

#[allow(clippy::too_many_arguments)]
fn v1_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    b: usize,
    ws: &mut TrsmWorkspace<T>,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // 1. A10 := A10 L00^-H
    if !skip(0) {
        trsm_apply(parts.a10.rb_mut(), lp.l00, Side::Right, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    // 2. Y10 := L10 C00
    let mut y10 = ws.w_panel_mut(c, k, b);
    if !skip(1) {
        hemm_update(
            y10.rb_mut(),
            T::ONE,
            parts.a00.rb(),
            lp.l10,
            Side::Right,
            T::ZERO,
            ledger.as_deref_mut(),
        )?;
    }
    // 3. A10 := A10 - Y10/2
    if !skip(2) {
        axpy_update(parts.a10.rb_mut(), -half::<T>(), y10.rb(), ledger.as_deref_mut())?;
    }
    // 4. A11 := A11 - A10 L10^H - L10 A10^H
    if !skip(3) {
        her2k_update(
            parts.a11.rb_mut(),
            -T::ONE,
            parts.a10.rb(),
            lp.l10,
            Trans::No,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    // 5. A10 := A10 - Y10/2
    if !skip(4) {
        axpy_update(parts.a10.rb_mut(), -half::<T>(), y10.rb(), ledger.as_deref_mut())?;
    }
    // 6. A10 := L11^-1 A10
    if !skip(5) {
        trsm_apply(parts.a10.rb_mut(), lp.l11, Side::Left, Trans::No, ledger.as_deref_mut())?;
    }
    // 7. A11 := base(A11, L11)
    if !skip(6) {
        unblocked_trsm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn v2_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    b: usize,
    ws: &mut TrsmWorkspace<T>,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // A10 already holds A10_hat L00^-H by the invariant; run V1 steps 2-7.
    let mut y10 = ws.w_panel_mut(c, k, b);
    if !skip(0) {
        hemm_update(
            y10.rb_mut(),
            T::ONE,
            parts.a00.rb(),
            lp.l10,
            Side::Right,
            T::ZERO,
            ledger.as_deref_mut(),
        )?;
    }
    if !skip(1) {
        axpy_update(parts.a10.rb_mut(), -half::<T>(), y10.rb(), ledger.as_deref_mut())?;
    }
    if !skip(2) {
        her2k_update(
            parts.a11.rb_mut(),
            -T::ONE,
            parts.a10.rb(),
            lp.l10,
            Trans::No,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    if !skip(3) {
        axpy_update(parts.a10.rb_mut(), -half::<T>(), y10.rb(), ledger.as_deref_mut())?;
    }
    if !skip(4) {
        trsm_apply(parts.a10.rb_mut(), lp.l11, Side::Left, Trans::No, ledger.as_deref_mut())?;
    }
    if !skip(5) {
        unblocked_trsm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    // 8. A21 := A21 - A20 L10^H (the big operands A00, A20 are read, not written)
    if !skip(6) {
        gemm_update(
            parts.a21.rb_mut(),
            -T::ONE,
            parts.a20.rb(),
            Trans::No,
            lp.l10,
            Trans::ConjTrans,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 9. A21 := A21 L11^-H
    if !skip(7) {
        trsm_apply(parts.a21.rb_mut(), lp.l11, Side::Right, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    Ok(())
}

fn v3_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    ws: &mut TrsmWorkspace<T>,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let n = a.rows();
    let m = n - k - c;
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // A10 currently holds W10 = A10_hat L00^-H - Y10/2: exactly the rank-2k
    // operand, so the trailing update runs first.
    // 1. A11 := A11 - A10 L10^H - L10 A10^H
    if !skip(0) {
        her2k_update(
            parts.a11.rb_mut(),
            -T::ONE,
            parts.a10.rb(),
            lp.l10,
            Trans::No,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    // 2. A10 := A10 - Y10/2  (Y10 read from the stored panel)
    if !skip(1) {
        ws.for_each_y_block(k, k, k + c, |y, col| {
            let sub = parts.a10.rb_mut().submatrix_mut(0, col, c, y.cols());
            axpy_update(sub, -half::<T>(), y.rb(), ledger.as_deref_mut())
        })?;
    }
    // 3. A10 := L11^-1 A10
    if !skip(2) {
        trsm_apply(parts.a10.rb_mut(), lp.l11, Side::Left, Trans::No, ledger.as_deref_mut())?;
    }
    // 4. A11 := base(A11, L11)
    if !skip(3) {
        unblocked_trsm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    // 5. A20 := A20 + Y20/2  (restore the half-solved panel)
    if !skip(4) {
        ws.for_each_y_block(k, k + c, n, |y, col| {
            let sub = parts.a20.rb_mut().submatrix_mut(0, col, m, y.cols());
            axpy_update(sub, half::<T>(), y.rb(), ledger.as_deref_mut())
        })?;
    }
    // 6. A21 := A21 - A20 L10^H
    if !skip(5) {
        gemm_update(
            parts.a21.rb_mut(),
            -T::ONE,
            parts.a20.rb(),
            Trans::No,
            lp.l10,
            Trans::ConjTrans,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 7. A21 := A21 L11^-H
    if !skip(6) {
        trsm_apply(parts.a21.rb_mut(), lp.l11, Side::Right, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    // 8. Y20 := Y20 + L21 C10  (extend the stored columns downward in time)
    if !skip(7) {
        ws.for_each_y_block(k, k + c, n, |y, col| {
            let c10 = parts.a10.rb().submatrix(0, col, c, y.cols());
            gemm_update(y, T::ONE, lp.l21, Trans::No, c10, Trans::No, T::ONE, ledger.as_deref_mut())
        })?;
    }
    // 9+10. New block column Ynew := L20 C10^H + L21 C11
    if m > 0 {
        let mut ynew = DenseMatrix::zeros(m, c);
        if !skip(8) {
            gemm_update(
                ynew.view_mut(),
                T::ONE,
                lp.l20,
                Trans::No,
                parts.a10.rb(),
                Trans::ConjTrans,
                T::ZERO,
                ledger.as_deref_mut(),
            )?;
        }
        if !skip(9) {
            hemm_update(
                ynew.view_mut(),
                T::ONE,
                parts.a11.rb(),
                lp.l21,
                Side::Right,
                T::ONE,
                ledger.as_deref_mut(),
            )?;
        }
        // 11. A21 := A21 - Ynew/2
        if !skip(10) {
            axpy_update(parts.a21.rb_mut(), -half::<T>(), ynew.view(), ledger.as_deref_mut())?;
        }
        ws.push_y_block(k, k + c, ynew);
    }
    // 12. A20 := A20 - Y20/2  (Y20 now includes the L21 C10 extension)
    if !skip(11) {
        ws.for_each_y_block(k, k + c, n, |y, col| {
            let sub = parts.a20.rb_mut().submatrix_mut(0, col, m, y.cols());
            axpy_update(sub, -half::<T>(), y.rb(), ledger.as_deref_mut())
        })?;
    }
    Ok(())
}

fn v4_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // 1. A10 := L11^-1 A10 (yields C10)
    if !skip(0) {
        trsm_apply(parts.a10.rb_mut(), lp.l11, Side::Left, Trans::No, ledger.as_deref_mut())?;
    }
    // 2. A11 := base(A11, L11) (yields C11)
    if !skip(1) {
        unblocked_trsm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    // 3. A20 := A20 - L21 A10 (restores A20 = L22 C20)
    if !skip(2) {
        gemm_update(
            parts.a20.rb_mut(),
            -T::ONE,
            lp.l21,
            Trans::No,
            parts.a10.rb(),
            Trans::No,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 4. A21 := A21 L11^-H (strips the repartitioning factor)
    if !skip(3) {
        trsm_apply(parts.a21.rb_mut(), lp.l11, Side::Right, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    // 5. A21 := A21 - L21 A11 / 2 (forms W21 = L21 C11/2 + L22 C21 in place)
    if !skip(4) {
        hemm_update(
            parts.a21.rb_mut(),
            -half::<T>(),
            parts.a11.rb(),
            lp.l21,
            Side::Right,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 6. A22 := A22 - L21 A21^H - A21 L21^H (the dominant rank-2k update)
    if !skip(5) {
        her2k_update(
            parts.a22.rb_mut(),
            -T::ONE,
            lp.l21,
            parts.a21.rb(),
            Trans::No,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    // 7. A21 := A21 - L21 A11 / 2 (completes A21 = L22 C21)
    if !skip(6) {
        hemm_update(
            parts.a21.rb_mut(),
            -half::<T>(),
            parts.a11.rb(),
            lp.l21,
            Side::Right,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    Ok(())
}

fn v5_iteration<T: Scalar>(
    a: &mut DenseMatrix<T>,
    l: &TriangularMatrix<T>,
    k: usize,
    c: usize,
    ledger: &mut Option<&mut FlopLedger>,
    skip: &dyn Fn(usize) -> bool,
) -> Result<()> {
    let lp = l_parts(l, k, c);
    let mut parts = repartition_lower(a, k, c);

    // 1. A11 := base(A11, L11)
    if !skip(0) {
        unblocked_trsm_view(parts.a11.rb_mut(), lp.l11, ledger.as_deref_mut())?;
    }
    // 2. A21 := A21 L11^-H
    if !skip(1) {
        trsm_apply(parts.a21.rb_mut(), lp.l11, Side::Right, Trans::ConjTrans, ledger.as_deref_mut())?;
    }
    // 3. A21 := A21 - L21 A11 / 2 (W-form as in V4)
    if !skip(2) {
        hemm_update(
            parts.a21.rb_mut(),
            -half::<T>(),
            parts.a11.rb(),
            lp.l21,
            Side::Right,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 4. A22 := A22 - L21 W21^H - W21 L21^H
    if !skip(3) {
        her2k_update(
            parts.a22.rb_mut(),
            -T::ONE,
            lp.l21,
            parts.a21.rb(),
            Trans::No,
            1.0,
            ledger.as_deref_mut(),
        )?;
    }
    // 5. A21 := A21 - L21 A11 / 2
    if !skip(4) {
        hemm_update(
            parts.a21.rb_mut(),
            -half::<T>(),
            parts.a11.rb(),
            lp.l21,
            Side::Right,
            T::ONE,
            ledger.as_deref_mut(),
        )?;
    }
    // 6. A21 := L22^-1 A21 (the big triangular solve)
    if !skip(5) {
        trsm_apply(parts.a21.rb_mut(), lp.l22, Side::Left, Trans::No, ledger.as_deref_mut())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::oracle_two_sided_trsm;
    use crate::random::{random_hermitian, random_well_conditioned_lower};
    use crate::triangular::strictly_upper_bits;
    use num_complex::Complex64;

    fn check_variant<T: Scalar>(variant: TrsmVariant, n: usize, b: usize, seed: u64, tol: f64) {
        let a0 = random_hermitian::<T>(n, seed);
        let l = random_well_conditioned_lower::<T>(n, seed + 100);
        let want = oracle_two_sided_trsm(&a0, &l).unwrap();
        let mut a = a0.clone();
        two_sided_trsm(&mut a, &l, variant, b, None, None).unwrap();
        let rel = a.rel_distance_lower(&want);
        assert!(
            rel <= tol,
            "variant {} n={n} b={b} seed={seed}: residual {rel}",
            variant.name()
        );
    }

    #[test]
    fn two_by_two_worked_example_all_variants() {
        for variant in TrsmVariant::ALL {
            let a0 = HermitianMatrix::from_base(DenseMatrix::from_rows(&[
                &[4.0, 2.0],
                &[2.0, 3.0],
            ]))
            .unwrap();
            let l = TriangularMatrix::from_base(
                DenseMatrix::from_rows(&[&[2.0, 0.0], &[1.0, 1.0]]),
                false,
            )
            .unwrap();
            let mut a = a0.clone();
            two_sided_trsm(&mut a, &l, variant, 1, None, None).unwrap();
            assert!((a.base().at(0, 0) - 1.0).abs() < 1e-14);
            assert!(a.base().at(1, 0).abs() < 1e-14);
            assert!((a.base().at(1, 1) - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn unblocked_matches_oracle() {
        let a0 = random_hermitian::<f64>(17, 3);
        let l = random_well_conditioned_lower::<f64>(17, 4);
        let want = oracle_two_sided_trsm(&a0, &l).unwrap();
        let mut a = a0.clone();
        two_sided_trsm_unblocked(&mut a, &l, None).unwrap();
        assert!(a.rel_distance_lower(&want) < 1e-12);

        // n = 1 scalar case.
        let mut a1 =
            HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[9.0]])).unwrap();
        let l1 =
            TriangularMatrix::from_base(DenseMatrix::from_rows(&[&[3.0]]), false).unwrap();
        two_sided_trsm_unblocked(&mut a1, &l1, None).unwrap();
        assert_eq!(a1.base().at(0, 0), 1.0);
    }

    #[test]
    fn identity_factor_leaves_input() {
        let a0 = random_hermitian::<Complex64>(12, 9);
        let l = TriangularMatrix::<Complex64>::identity(12);
        for variant in TrsmVariant::ALL {
            let mut a = a0.clone();
            two_sided_trsm(&mut a, &l, variant, 4, None, None).unwrap();
            assert!(a.rel_distance_lower(&a0.materialize()) < 1e-14);
        }
    }

    #[test]
    fn variants_match_oracle_small_grid() {
        for variant in TrsmVariant::ALL {
            for &(n, b) in &[(5usize, 2usize), (8, 3), (13, 4), (16, 16), (9, 1)] {
                check_variant::<f64>(variant, n, b, 1, 1e-11);
                check_variant::<Complex64>(variant, n, b, 2, 1e-11);
            }
        }
    }

    #[test]
    fn oversized_block_degenerates_to_single_base_call() {
        let a0 = random_hermitian::<f64>(6, 1);
        let l = random_well_conditioned_lower::<f64>(6, 2);
        let mut a = a0.clone();
        let mut ledger = FlopLedger::new();
        two_sided_trsm(&mut a, &l, TrsmVariant::V1, 64, Some(&mut ledger), None).unwrap();
        assert_eq!(ledger.count(KernelClass::TwoSidedBase), 216);
        assert_eq!(ledger.total(), 216);
    }

    #[test]
    fn strictly_upper_buffer_untouched_bitwise() {
        for variant in TrsmVariant::ALL {
            let mut a = random_hermitian::<f64>(20, 5);
            // Poison the strictly-upper buffer to prove it is never written.
            for j in 0..20 {
                for i in 0..j {
                    a.base_mut().set(i, j, 1e300 + (i * 20 + j) as f64);
                }
            }
            let before = strictly_upper_bits(a.base());
            let l = random_well_conditioned_lower::<f64>(20, 6);
            two_sided_trsm(&mut a, &l, variant, 4, None, None).unwrap();
            assert_eq!(before, strictly_upper_bits(a.base()), "variant {}", variant.name());
        }
    }

    #[test]
    fn variants_agree_pairwise() {
        let n = 64;
        let a0 = random_hermitian::<f64>(n, 1);
        let l = random_well_conditioned_lower::<f64>(n, 101);
        let mut results = Vec::new();
        for variant in TrsmVariant::ALL {
            let mut a = a0.clone();
            two_sided_trsm(&mut a, &l, variant, 8, None, None).unwrap();
            results.push(a);
        }
        for i in 0..results.len() {
            for j in i + 1..results.len() {
                let rel = results[i].rel_distance_lower(&results[j].materialize());
                assert!(rel <= 1e-11, "variants {i} vs {j}: {rel}");
            }
        }
    }

    #[test]
    fn block_size_independence() {
        let n = 33;
        let a0 = random_hermitian::<Complex64>(n, 3);
        let l = random_well_conditioned_lower::<Complex64>(n, 103);
        for variant in TrsmVariant::ALL {
            let mut reference = a0.clone();
            two_sided_trsm(&mut reference, &l, variant, 1, None, None).unwrap();
            let ref_full = reference.materialize();
            for b in [2usize, 5, 8, 33, 100] {
                let mut a = a0.clone();
                two_sided_trsm(&mut a, &l, variant, b, None, None).unwrap();
                let rel = a.rel_distance_lower(&ref_full);
                assert!(rel <= 1e-11, "variant {} b={b}: {rel}", variant.name());
            }
        }
    }

    #[test]
    fn invalid_arguments_rejected() {
        let mut a = random_hermitian::<f64>(4, 1);
        let l = random_well_conditioned_lower::<f64>(4, 1);
        assert!(matches!(
            two_sided_trsm(&mut a, &l, TrsmVariant::V4, 0, None, None),
            Err(Error::InvalidArgument(_))
        ));
        let l3 = random_well_conditioned_lower::<f64>(3, 1);
        assert!(two_sided_trsm(&mut a, &l3, TrsmVariant::V4, 2, None, None).is_err());
    }

    #[test]
    fn empty_problem_is_legal() {
        let mut a = HermitianMatrix::<f64>::zeros(0);
        let l = TriangularMatrix::<f64>::identity(0);
        for variant in TrsmVariant::ALL {
            two_sided_trsm(&mut a, &l, variant, 4, None, None).unwrap();
        }
    }

    #[test]
    fn unit_diagonal_factor_is_supported() {
        let n = 12;
        let a0 = random_hermitian::<f64>(n, 8);
        let mut lb = random_well_conditioned_lower::<f64>(n, 9).base().clone();
        for i in 0..n {
            lb.set(i, i, 777.0); // ignored under the unit flag
        }
        let l = TriangularMatrix::from_base(lb, true).unwrap();
        let want = oracle_two_sided_trsm(&a0, &l).unwrap();
        for variant in TrsmVariant::ALL {
            let mut a = a0.clone();
            two_sided_trsm(&mut a, &l, variant, 4, None, None).unwrap();
            let rel = a.rel_distance_lower(&want);
            assert!(rel < 1e-11, "variant {} unit-diagonal: {rel}", variant.name());
        }
    }

    #[test]
    fn v3_workspace_is_bounded() {
        let n = 256;
        let b = 32;
        let mut a = random_hermitian::<f64>(n, 1);
        let l = random_well_conditioned_lower::<f64>(n, 2);
        let info = two_sided_trsm(&mut a, &l, TrsmVariant::V3, b, None, None).unwrap();
        let peak = info.workspace_peak_scalars;
        assert!(peak <= n * n / 2, "peak {peak}");
        assert!(peak >= (n / 2) * b, "peak {peak} too small for a stored panel");
    }
}
