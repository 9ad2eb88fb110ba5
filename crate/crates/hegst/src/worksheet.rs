//! Executable loop-invariant checking: the per-variant quadrant-state
//! predicates, evaluated at initialization, at every iteration boundary, and
//! at termination.
//!
//! Every reference quantity is assembled from the oracle module (explicit
//! inverses and plain dense products), never from the kernels under test.
//! Quadrants declared ORIGINAL are compared bitwise; everything else is a
//! relative Frobenius residual against the oracle-derived reference.

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::oracle;
use crate::scalar::Scalar;
use crate::triangular::{HermitianMatrix, TriangularMatrix};
use crate::trmm::TrmmVariant;
use crate::trsm::{BoundaryHook, TrsmVariant, TrsmWorkspace};

/// Which two-sided operation an invariant belongs to. FINAL states compare
/// against the corresponding oracle applied to the leading subproblem.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum OpKind {
    Trsm,
    Trmm,
}

/// Symbolic state of one quadrant at an iteration boundary.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum QuadrantState {
    /// Bitwise equal to the original contents.
    Original,
    /// Equals the (sub-)oracle result of the quadrant.
    Final,
    /// A_BL = Ahat_BL L_TL^-H.
    HalfSolved,
    /// A_BL = Ahat_BL L_TL^-H - Y_BL/2 with Y_BL = L_BL C_TL stored aside.
    HalfSolvedMinusHalfY,
    /// A_BL = L_BR C_BL.
    LBrTimesC,
    /// A_BR = Ahat_BR - L_BL W^H - W L_BL^H with W = L_BL C_TL/2 + L_BR C_BL.
    Rank2kUpdated,
    /// Custom state of the second two-sided product variant:
    /// A_BL = Ahat_BL L_TL.
    OriginalTimesLtl,
}

impl QuadrantState {
    pub fn name(self) -> &'static str {
        match self {
            QuadrantState::Original => "original",
            QuadrantState::Final => "final",
            QuadrantState::HalfSolved => "half_solved",
            QuadrantState::HalfSolvedMinusHalfY => "half_solved_minus_half_y",
            QuadrantState::LBrTimesC => "l_br_times_c",
            QuadrantState::Rank2kUpdated => "rank2k_updated",
            QuadrantState::OriginalTimesLtl => "original_times_l_tl",
        }
    }
}

/// The loop invariant of one variant: a state tag per stored quadrant, plus
/// whether a Y workspace panel is part of the predicate.
#[derive(Copy, Clone, Debug)]
pub struct InvariantSpec {
    pub op: OpKind,
    pub variant_name: &'static str,
    pub tl: QuadrantState,
    pub bl: QuadrantState,
    pub br: QuadrantState,
    pub tracks_y: bool,
}

impl InvariantSpec {
    pub fn for_trsm(variant: TrsmVariant) -> InvariantSpec {
        use QuadrantState::*;
        let (tl, bl, br, tracks_y, name) = match variant {
            TrsmVariant::V1 => (Final, Original, Original, false, "1"),
            TrsmVariant::V2 => (Final, HalfSolved, Original, false, "2"),
            TrsmVariant::V3 => (Final, HalfSolvedMinusHalfY, Original, true, "3"),
            TrsmVariant::V4 => (Final, LBrTimesC, Rank2kUpdated, false, "4"),
            TrsmVariant::V5 => (Final, Final, Rank2kUpdated, false, "5"),
        };
        InvariantSpec {
            op: OpKind::Trsm,
            variant_name: name,
            tl,
            bl,
            br,
            tracks_y,
        }
    }

    pub fn for_trmm(variant: TrmmVariant) -> InvariantSpec {
        use QuadrantState::*;
        let (bl, name) = match variant {
            TrmmVariant::M1 => (Original, "m1"),
            TrmmVariant::M2 => (OriginalTimesLtl, "m2"),
        };
        InvariantSpec {
            op: OpKind::Trmm,
            variant_name: name,
            tl: Final,
            bl,
            br: Original,
            tracks_y: false,
        }
    }
}

/// One residual record from a boundary check.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub k: usize,
    pub quadrant: &'static str,
    pub state: &'static str,
    pub residual: f64,
    pub bitwise_ok: bool,
    pub pass: bool,
}

/// All residual records produced by one checked run.
#[derive(Clone, Debug, Default)]
pub struct WorksheetTrace {
    pub tolerance: f64,
    pub rows: Vec<TraceRow>,
}

impl WorksheetTrace {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn first_failure(&self) -> Option<&TraceRow> {
        self.rows.iter().find(|r| !r.pass)
    }

    /// CSV rows under the header
    /// `variant,n,b,seed,k,quadrant,residual,bitwise_ok`.
    pub fn to_csv(&self, variant: &str, n: usize, b: usize, seed: u64) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&format!(
                "{variant},{n},{b},{seed},{},{},{:e},{}\n",
                r.k, r.quadrant, r.residual, r.bitwise_ok
            ));
        }
        out
    }
}

pub const TRACE_CSV_HEADER: &str = "variant,n,b,seed,k,quadrant,residual,bitwise_ok";

/// Boundary observer that evaluates an [`InvariantSpec`] against oracle
/// references. In strict mode the first failing check aborts the run;
/// otherwise the full trace is collected.
pub struct WorksheetChecker<T: Scalar> {
    spec: InvariantSpec,
    tolerance: f64,
    strict: bool,
    a_hat: DenseMatrix<T>,
    a_full: DenseMatrix<T>,
    l_full: DenseMatrix<T>,
    l_inv: Option<DenseMatrix<T>>,
    c_global: DenseMatrix<T>,
    a_hat_herm: HermitianMatrix<T>,
    l_factor: TriangularMatrix<T>,
    pub trace: WorksheetTrace,
}

impl<T: Scalar> WorksheetChecker<T> {
    pub fn new(
        spec: InvariantSpec,
        a_hat: &HermitianMatrix<T>,
        l: &TriangularMatrix<T>,
        tolerance: f64,
        strict: bool,
    ) -> Result<Self> {
        let c_global = match spec.op {
            OpKind::Trsm => oracle::oracle_two_sided_trsm(a_hat, l)?,
            OpKind::Trmm => oracle::oracle_two_sided_trmm(a_hat, l)?,
        };
        let l_inv = match spec.op {
            OpKind::Trsm => Some(oracle::invert_lower(l)?),
            OpKind::Trmm => None,
        };
        Ok(WorksheetChecker {
            spec,
            tolerance,
            strict,
            a_hat: a_hat.base().clone(),
            a_full: a_hat.materialize(),
            l_full: l.materialize(),
            l_inv,
            c_global,
            a_hat_herm: a_hat.clone(),
            l_factor: l.clone(),
            trace: WorksheetTrace {
                tolerance,
                rows: Vec::new(),
            },
        })
    }

    pub fn new_trsm(
        variant: TrsmVariant,
        a_hat: &HermitianMatrix<T>,
        l: &TriangularMatrix<T>,
        tolerance: f64,
        strict: bool,
    ) -> Result<Self> {
        Self::new(InvariantSpec::for_trsm(variant), a_hat, l, tolerance, strict)
    }

    pub fn new_trmm(
        variant: TrmmVariant,
        a_hat: &HermitianMatrix<T>,
        l: &TriangularMatrix<T>,
        tolerance: f64,
        strict: bool,
    ) -> Result<Self> {
        Self::new(InvariantSpec::for_trmm(variant), a_hat, l, tolerance, strict)
    }

    fn n(&self) -> usize {
        self.a_hat.rows()
    }

    /// The invariant must reduce to the precondition before the loop starts:
    /// with an empty top-left quadrant every state collapses to bitwise
    /// equality with the untouched input.
    pub fn check_initialization(&mut self, a: &DenseMatrix<T>) -> Result<()> {
        self.boundary_impl(0, a, None)
    }

    /// Evaluate the invariant at boundary `k`.
    pub fn check_boundary(
        &mut self,
        k: usize,
        a: &DenseMatrix<T>,
        workspace: Option<&TrsmWorkspace<T>>,
    ) -> Result<()> {
        self.boundary_impl(k, a, workspace)
    }

    /// At k = n the loop guard is false; the invariant over the full matrix
    /// must imply the postcondition. Returns the pass flag and the final
    /// top-left (full-matrix) residual.
    pub fn check_termination(&mut self, a: &DenseMatrix<T>) -> Result<(bool, f64)> {
        let n = self.n();
        self.boundary_impl(n, a, None)?;
        let final_res = self
            .trace
            .rows
            .iter()
            .rev()
            .find(|r| r.k == n && r.quadrant == "TL")
            .map(|r| r.residual)
            .unwrap_or(0.0);
        Ok((self.trace.passed(), final_res))
    }

    fn push_row(
        &mut self,
        k: usize,
        quadrant: &'static str,
        state: QuadrantState,
        residual: f64,
        bitwise_ok: bool,
        bitwise_checked: bool,
    ) -> Result<()> {
        let pass = if bitwise_checked {
            bitwise_ok
        } else {
            residual <= self.tolerance
        };
        self.trace.rows.push(TraceRow {
            k,
            quadrant,
            state: state.name(),
            residual,
            bitwise_ok,
            pass,
        });
        if self.strict && !pass {
            return Err(Error::InvariantViolated {
                k,
                quadrant: quadrant.to_string(),
                residual,
            });
        }
        Ok(())
    }

    fn boundary_impl(
        &mut self,
        k: usize,
        a: &DenseMatrix<T>,
        workspace: Option<&TrsmWorkspace<T>>,
    ) -> Result<()> {
        let n = self.n();
        debug_assert!(k <= n);
        let m = n - k;

        // At k = 0 every state reduces to bitwise equality with the input
        // (empty products vanish), so the initialization check is bitwise for
        // all quadrant states.
        let tl_state = self.spec.tl;
        let bl_state = self.spec.bl;
        let br_state = self.spec.br;

        // TL quadrant.
        if k == 0 {
            self.push_row(k, "TL", tl_state, 0.0, true, false)?;
        } else {
            let residual = match self.spec.op {
                OpKind::Trsm => {
                    let c_tl = self.c_global.view().submatrix(0, 0, k, k).to_owned();
                    rel_lower(a, 0, k, &c_tl)
                }
                OpKind::Trmm => {
                    let sub_a = sub_hermitian(&self.a_hat_herm, k);
                    let sub_l = sub_triangular(&self.l_factor, k);
                    let c_sub = oracle::oracle_two_sided_trmm(&sub_a, &sub_l)?;
                    rel_lower(a, 0, k, &c_sub)
                }
            };
            self.push_row(k, "TL", tl_state, residual, true, false)?;
        }

        // BL quadrant (rows k..n, cols 0..k).
        if k == 0 || m == 0 {
            let bitwise = bl_state == QuadrantState::Original || k == 0;
            self.push_row(k, "BL", bl_state, 0.0, true, bitwise)?;
        } else {
            match bl_state {
                QuadrantState::Original => {
                    let (ok, res) = self.bitwise_rect(a, k);
                    self.push_row(k, "BL", bl_state, res, ok, true)?;
                }
                state => {
                    let reference = self.bl_reference(k, state)?;
                    let res = rel_rect(a, k, 0, m, k, &reference);
                    self.push_row(k, "BL", bl_state, res, true, false)?;
                }
            }
        }

        // Y workspace, where the invariant tracks one.
        if self.spec.tracks_y {
            if k == 0 || m == 0 {
                self.push_row(k, "Y", QuadrantState::HalfSolvedMinusHalfY, 0.0, true, false)?;
            } else {
                let y_ref = self.y_reference(k);
                let y = workspace
                    .map(|w| w.materialize_y(k))
                    .unwrap_or_else(|| DenseMatrix::zeros(m, k));
                let res = rel_dense(&y, &y_ref);
                self.push_row(k, "Y", QuadrantState::HalfSolvedMinusHalfY, res, true, false)?;
            }
        }

        // BR quadrant (lower triangle of rows/cols k..n).
        if m == 0 {
            self.push_row(k, "BR", br_state, 0.0, true, br_state == QuadrantState::Original)?;
        } else if k == 0 || br_state == QuadrantState::Original {
            let (ok, res) = self.bitwise_lower_br(a, k);
            self.push_row(k, "BR", br_state, res, ok, true)?;
        } else {
            debug_assert_eq!(br_state, QuadrantState::Rank2kUpdated);
            let reference = self.br_rank2k_reference(k);
            let res = rel_lower_offset(a, k, &reference);
            self.push_row(k, "BR", br_state, res, true, false)?;
        }
        Ok(())
    }

    fn bl_reference(&self, k: usize, state: QuadrantState) -> Result<DenseMatrix<T>> {
        let n = self.n();
        let m = n - k;
        let a_bl = self.a_full.view().submatrix(k, 0, m, k).to_owned();
        let l_bl = self.l_full.view().submatrix(k, 0, m, k).to_owned();
        let c_tl = self.c_global.view().submatrix(0, 0, k, k).to_owned();
        Ok(match state {
            QuadrantState::HalfSolved => {
                let inv_tl = self.inv_tl(k);
                oracle::matmul(&a_bl, &oracle::conj_transpose(&inv_tl))
            }
            QuadrantState::HalfSolvedMinusHalfY => {
                let inv_tl = self.inv_tl(k);
                let mut t = oracle::matmul(&a_bl, &oracle::conj_transpose(&inv_tl));
                let y = oracle::matmul(&l_bl, &c_tl);
                for j in 0..k {
                    for i in 0..m {
                        let v = t.at(i, j) - y.at(i, j).scale(0.5);
                        t.set(i, j, v);
                    }
                }
                t
            }
            QuadrantState::LBrTimesC => {
                let l_br = self.l_full.view().submatrix(k, k, m, m).to_owned();
                let c_bl = self.c_global.view().submatrix(k, 0, m, k).to_owned();
                oracle::matmul(&l_br, &c_bl)
            }
            QuadrantState::Final => self.c_global.view().submatrix(k, 0, m, k).to_owned(),
            QuadrantState::OriginalTimesLtl => {
                let l_tl = self.l_full.view().submatrix(0, 0, k, k).to_owned();
                oracle::matmul(&a_bl, &l_tl)
            }
            other => {
                return Err(Error::invalid(format!(
                    "state {other:?} is not a BL-quadrant state"
                )))
            }
        })
    }

    fn y_reference(&self, k: usize) -> DenseMatrix<T> {
        let n = self.n();
        let m = n - k;
        let l_bl = self.l_full.view().submatrix(k, 0, m, k).to_owned();
        let c_tl = self.c_global.view().submatrix(0, 0, k, k).to_owned();
        oracle::matmul(&l_bl, &c_tl)
    }

    fn br_rank2k_reference(&self, k: usize) -> DenseMatrix<T> {
        let n = self.n();
        let m = n - k;
        let l_bl = self.l_full.view().submatrix(k, 0, m, k).to_owned();
        let l_br = self.l_full.view().submatrix(k, k, m, m).to_owned();
        let c_tl = self.c_global.view().submatrix(0, 0, k, k).to_owned();
        let c_bl = self.c_global.view().submatrix(k, 0, m, k).to_owned();
        // W = L_BL C_TL / 2 + L_BR C_BL
        let mut w = oracle::matmul(&l_bl, &c_tl);
        let w2 = oracle::matmul(&l_br, &c_bl);
        for j in 0..k {
            for i in 0..m {
                let v = w.at(i, j).scale(0.5) + w2.at(i, j);
                w.set(i, j, v);
            }
        }
        let lw = oracle::matmul(&l_bl, &oracle::conj_transpose(&w));
        let wl = oracle::matmul(&w, &oracle::conj_transpose(&l_bl));
        let mut reference = self.a_full.view().submatrix(k, k, m, m).to_owned();
        for j in 0..m {
            for i in 0..m {
                let v = reference.at(i, j) - lw.at(i, j) - wl.at(i, j);
                reference.set(i, j, v);
            }
        }
        reference
    }

    fn inv_tl(&self, k: usize) -> DenseMatrix<T> {
        self.l_inv
            .as_ref()
            .expect("triangular inverse cached for trsm specs")
            .view()
            .submatrix(0, 0, k, k)
            .to_owned()
    }

    fn bitwise_rect(&self, a: &DenseMatrix<T>, k: usize) -> (bool, f64) {
        let n = self.n();
        let mut ok = true;
        let mut diff = 0.0;
        let mut norm = 0.0;
        for j in 0..k {
            for i in k..n {
                let x = a.at(i, j);
                let y = self.a_hat.at(i, j);
                if x.to_bits() != y.to_bits() {
                    ok = false;
                }
                diff += (x - y).abs_sq();
                norm += y.abs_sq();
            }
        }
        (ok, rel_of(diff, norm))
    }

    fn bitwise_lower_br(&self, a: &DenseMatrix<T>, k: usize) -> (bool, f64) {
        let n = self.n();
        let mut ok = true;
        let mut diff = 0.0;
        let mut norm = 0.0;
        for j in k..n {
            for i in j..n {
                let x = a.at(i, j);
                let y = self.a_hat.at(i, j);
                if x.to_bits() != y.to_bits() {
                    ok = false;
                }
                diff += (x - y).abs_sq();
                norm += y.abs_sq();
            }
        }
        (ok, rel_of(diff, norm))
    }
}

impl<T: Scalar> BoundaryHook<T> for WorksheetChecker<T> {
    fn at_boundary(
        &mut self,
        k: usize,
        a: &DenseMatrix<T>,
        workspace: Option<&TrsmWorkspace<T>>,
    ) -> Result<()> {
        self.boundary_impl(k, a, workspace)
    }
}

fn rel_of(diff_sq: f64, norm_sq: f64) -> f64 {
    if norm_sq == 0.0 {
        diff_sq.sqrt()
    } else {
        (diff_sq / norm_sq).sqrt()
    }
}

/// Relative Frobenius distance over the lower triangle of the leading k x k
/// block of `a` (starting at `row0`) against a full reference.
fn rel_lower<T: Scalar>(a: &DenseMatrix<T>, row0: usize, k: usize, reference: &DenseMatrix<T>) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for j in 0..k {
        for i in j..k {
            diff += (a.at(row0 + i, row0 + j) - reference.at(i, j)).abs_sq();
            norm += reference.at(i, j).abs_sq();
        }
    }
    rel_of(diff, norm)
}

/// Relative Frobenius distance of the lower triangle of the BR quadrant at
/// offset `k` against a full (m x m) reference.
fn rel_lower_offset<T: Scalar>(a: &DenseMatrix<T>, k: usize, reference: &DenseMatrix<T>) -> f64 {
    let m = reference.rows();
    let mut diff = 0.0;
    let mut norm = 0.0;
    for j in 0..m {
        for i in j..m {
            diff += (a.at(k + i, k + j) - reference.at(i, j)).abs_sq();
            norm += reference.at(i, j).abs_sq();
        }
    }
    rel_of(diff, norm)
}

/// Relative Frobenius distance of the rectangle rows `r0..r0+rows`, cols
/// `c0..c0+cols` of `a` against a reference of the same shape.
fn rel_rect<T: Scalar>(
    a: &DenseMatrix<T>,
    r0: usize,
    c0: usize,
    rows: usize,
    cols: usize,
    reference: &DenseMatrix<T>,
) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for j in 0..cols {
        for i in 0..rows {
            diff += (a.at(r0 + i, c0 + j) - reference.at(i, j)).abs_sq();
            norm += reference.at(i, j).abs_sq();
        }
    }
    rel_of(diff, norm)
}

fn rel_dense<T: Scalar>(a: &DenseMatrix<T>, reference: &DenseMatrix<T>) -> f64 {
    let mut diff = 0.0;
    let mut norm = 0.0;
    for j in 0..a.cols() {
        for i in 0..a.rows() {
            diff += (a.at(i, j) - reference.at(i, j)).abs_sq();
            norm += reference.at(i, j).abs_sq();
        }
    }
    rel_of(diff, norm)
}

fn sub_hermitian<T: Scalar>(a: &HermitianMatrix<T>, k: usize) -> HermitianMatrix<T> {
    HermitianMatrix::from_base(a.base().view().submatrix(0, 0, k, k).to_owned()).unwrap()
}

fn sub_triangular<T: Scalar>(l: &TriangularMatrix<T>, k: usize) -> TriangularMatrix<T> {
    TriangularMatrix::from_base(
        l.base().view().submatrix(0, 0, k, k).to_owned(),
        l.unit_diagonal(),
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_hermitian, random_well_conditioned_lower};
    use crate::trmm::{two_sided_trmm, two_sided_trmm_with_fault};
    use crate::trsm::{two_sided_trsm, two_sided_trsm_with_fault};
    use num_complex::Complex64;

    #[test]
    fn initialization_passes_on_untouched_input() {
        let a = random_hermitian::<f64>(12, 1);
        let l = random_well_conditioned_lower::<f64>(12, 2);
        for variant in TrsmVariant::ALL {
            let mut checker = WorksheetChecker::new_trsm(variant, &a, &l, 1e-10, false).unwrap();
            checker.check_initialization(a.base()).unwrap();
            assert!(checker.trace.passed(), "variant {}", variant.name());
            assert!(checker.trace.rows.iter().all(|r| r.residual == 0.0));
        }
    }

    #[test]
    fn initialization_detects_corruption() {
        let a = random_hermitian::<f64>(8, 3);
        let l = random_well_conditioned_lower::<f64>(8, 4);
        let mut checker =
            WorksheetChecker::new_trsm(TrsmVariant::V1, &a, &l, 1e-10, false).unwrap();
        let mut corrupted = a.base().clone();
        corrupted.set(5, 2, corrupted.at(5, 2) + 1.0);
        checker.check_initialization(&corrupted).unwrap();
        assert!(!checker.trace.passed());
        let fail = checker.trace.first_failure().unwrap();
        assert!(!fail.bitwise_ok);
    }

    #[test]
    fn all_boundaries_pass_for_correct_runs() {
        let n = 24;
        let b = 4;
        for variant in TrsmVariant::ALL {
            let a0 = random_hermitian::<f64>(n, 1);
            let l = random_well_conditioned_lower::<f64>(n, 101);
            let mut checker = WorksheetChecker::new_trsm(variant, &a0, &l, 1e-10, false).unwrap();
            let mut a = a0.clone();
            two_sided_trsm(&mut a, &l, variant, b, None, Some(&mut checker)).unwrap();
            assert!(
                checker.trace.passed(),
                "variant {} failed: {:?}",
                variant.name(),
                checker.trace.first_failure()
            );
            let boundaries: std::collections::BTreeSet<usize> =
                checker.trace.rows.iter().map(|r| r.k).collect();
            assert_eq!(boundaries.len(), n / b + 1);
        }
        for variant in TrmmVariant::ALL {
            let a0 = random_hermitian::<Complex64>(n, 2);
            let l = random_well_conditioned_lower::<Complex64>(n, 102);
            let mut checker = WorksheetChecker::new_trmm(variant, &a0, &l, 1e-10, false).unwrap();
            let mut a = a0.clone();
            two_sided_trmm(&mut a, &l, variant, b, None, Some(&mut checker)).unwrap();
            assert!(
                checker.trace.passed(),
                "variant {} failed: {:?}",
                variant.name(),
                checker.trace.first_failure()
            );
        }
    }

    #[test]
    fn dropped_half_update_fails_at_first_interior_boundary() {
        let n = 24;
        let b = 4;
        let a0 = random_hermitian::<f64>(n, 1);
        let l = random_well_conditioned_lower::<f64>(n, 5);
        let mut checker =
            WorksheetChecker::new_trsm(TrsmVariant::V1, &a0, &l, 1e-10, false).unwrap();
        let mut a = a0.clone();
        // Step 2 is the first A10 -= Y10/2 pass.
        two_sided_trsm_with_fault(&mut a, &l, TrsmVariant::V1, b, None, Some(&mut checker), Some(2))
            .unwrap();
        let fail = checker.trace.first_failure().expect("fault must be caught");
        assert_eq!(fail.k, 2 * b, "first failure at the boundary after the corrupt block");
        assert!(fail.residual > 1e-3, "O(1) residual expected, got {}", fail.residual);
    }

    #[test]
    fn termination_equals_full_oracle_comparison() {
        let n = 16;
        let a0 = random_hermitian::<f64>(n, 9);
        let l = random_well_conditioned_lower::<f64>(n, 10);
        let mut checker =
            WorksheetChecker::new_trsm(TrsmVariant::V4, &a0, &l, 1e-10, false).unwrap();
        let mut a = a0.clone();
        two_sided_trsm(&mut a, &l, TrsmVariant::V4, 4, None, None).unwrap();
        let (pass, res) = checker.check_termination(a.base()).unwrap();
        assert!(pass);
        let want = crate::oracle::oracle_two_sided_trsm(&a0, &l).unwrap();
        let direct = a.rel_distance_lower(&want);
        assert!((res - direct).abs() <= 1e-12 * (1.0 + direct));
    }

    #[test]
    fn termination_is_vacuous_for_empty_problems() {
        let a = HermitianMatrix::<f64>::zeros(0);
        let l = TriangularMatrix::<f64>::identity(0);
        let mut checker =
            WorksheetChecker::new_trsm(TrsmVariant::V1, &a, &l, 1e-10, false).unwrap();
        let (pass, res) = checker.check_termination(a.base()).unwrap();
        assert!(pass);
        assert_eq!(res, 0.0);
    }

    #[test]
    fn strict_mode_aborts_the_run() {
        let n = 12;
        let a0 = random_hermitian::<f64>(n, 4);
        let l = random_well_conditioned_lower::<f64>(n, 6);
        let mut checker =
            WorksheetChecker::new_trsm(TrsmVariant::V2, &a0, &l, 1e-10, true).unwrap();
        let mut a = a0.clone();
        let err = two_sided_trsm_with_fault(
            &mut a,
            &l,
            TrsmVariant::V2,
            4,
            None,
            Some(&mut checker),
            Some(6),
        )
        .unwrap_err();
        match err {
            Error::InvariantViolated { k, .. } => assert!(k > 0 && k < n),
            other => panic!("expected invariant violation, got {other:?}"),
        }
    }

    #[test]
    fn every_dropped_step_is_caught() {
        let n = 24;
        let b = 4;
        let a0 = random_hermitian::<f64>(n, 1);
        let l = random_well_conditioned_lower::<f64>(n, 2);
        for variant in TrsmVariant::ALL {
            for step in 0..variant.step_count() {
                let mut checker =
                    WorksheetChecker::new_trsm(variant, &a0, &l, 1e-10, false).unwrap();
                let mut a = a0.clone();
                two_sided_trsm_with_fault(
                    &mut a,
                    &l,
                    variant,
                    b,
                    None,
                    Some(&mut checker),
                    Some(step),
                )
                .unwrap();
                assert!(
                    !checker.trace.passed(),
                    "variant {} step {step} removed but all checks passed",
                    variant.name()
                );
            }
        }
        for variant in TrmmVariant::ALL {
            for step in 0..variant.step_count() {
                let mut checker =
                    WorksheetChecker::new_trmm(variant, &a0, &l, 1e-10, false).unwrap();
                let mut a = a0.clone();
                two_sided_trmm_with_fault(
                    &mut a,
                    &l,
                    variant,
                    b,
                    None,
                    Some(&mut checker),
                    Some(step),
                )
                .unwrap();
                assert!(
                    !checker.trace.passed(),
                    "variant {} step {step} removed but all checks passed",
                    variant.name()
                );
            }
        }
    }

    #[test]
    fn csv_export_shape() {
        let n = 8;
        let a0 = random_hermitian::<f64>(n, 1);
        let l = random_well_conditioned_lower::<f64>(n, 2);
        let mut checker =
            WorksheetChecker::new_trsm(TrsmVariant::V3, &a0, &l, 1e-10, false).unwrap();
        let mut a = a0.clone();
        two_sided_trsm(&mut a, &l, TrsmVariant::V3, 4, None, Some(&mut checker)).unwrap();
        let csv = checker.trace.to_csv("3", n, 4, 1);
        for line in csv.lines() {
            assert_eq!(line.split(',').count(), 8, "bad row: {line}");
            assert!(line.starts_with("3,8,4,1,"));
        }
        // V3 tracks Y: four rows per boundary, three boundaries.
        assert_eq!(csv.lines().count(), 3 * 4);
    }
}
