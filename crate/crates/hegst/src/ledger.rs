//! Flop accounting by kernel class.
//!
//! Counts are "scalar multiply-add units" with the conventions: gemm `2mnk`,
//! hemm `2 m_h^2 n`, her2k `2n^2k`, herk `n^2 k`, trsm/trmm `m^2 r`, Cholesky
//! `n^3/3`, two-sided base case `n^3` (rounded). The same formulas apply to
//! real and complex fields; counts depend only on call shapes, never on
//! values.

use serde::{Deserialize, Serialize};

/// Classes the instrumented kernels report to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelClass {
    Gemm,
    Hemm,
    Her2k,
    Herk,
    Trsm,
    Trmm,
    Chol,
    TwoSidedBase,
    /// Elementwise passes (axpy-style half-updates) that belong to no BLAS-3
    /// class.
    Other,
}

impl KernelClass {
    pub const ALL: [KernelClass; 9] = [
        KernelClass::Gemm,
        KernelClass::Hemm,
        KernelClass::Her2k,
        KernelClass::Herk,
        KernelClass::Trsm,
        KernelClass::Trmm,
        KernelClass::Chol,
        KernelClass::TwoSidedBase,
        KernelClass::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            KernelClass::Gemm => "gemm",
            KernelClass::Hemm => "hemm",
            KernelClass::Her2k => "her2k",
            KernelClass::Herk => "herk",
            KernelClass::Trsm => "trsm",
            KernelClass::Trmm => "trmm",
            KernelClass::Chol => "chol",
            KernelClass::TwoSidedBase => "base",
            KernelClass::Other => "other",
        }
    }

    fn index(self) -> usize {
        match self {
            KernelClass::Gemm => 0,
            KernelClass::Hemm => 1,
            KernelClass::Her2k => 2,
            KernelClass::Herk => 3,
            KernelClass::Trsm => 4,
            KernelClass::Trmm => 5,
            KernelClass::Chol => 6,
            KernelClass::TwoSidedBase => 7,
            KernelClass::Other => 8,
        }
    }
}

/// One instrumented kernel invocation: class, operand shape, and the shape of
/// the operand that was written.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct KernelCall {
    pub class: KernelClass,
    pub flops: u64,
    pub written_rows: usize,
    pub written_cols: usize,
}

impl KernelCall {
    /// Smaller extent of the written operand.
    pub fn written_min_dim(&self) -> usize {
        self.written_rows.min(self.written_cols)
    }
}

/// Per-kernel-class flop counters, plus an optional per-call log.
///
/// Counters are monotonically non-decreasing during a run; merging two
/// ledgers sums them element-wise.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct FlopLedger {
    counts: [u64; 9],
    calls: Option<Vec<KernelCall>>,
}

impl FlopLedger {
    pub fn new() -> Self {
        FlopLedger::default()
    }

    /// Ledger that additionally records every kernel call.
    pub fn with_call_log() -> Self {
        FlopLedger {
            counts: [0; 9],
            calls: Some(Vec::new()),
        }
    }

    pub fn add(&mut self, class: KernelClass, flops: u64) {
        self.counts[class.index()] += flops;
    }

    pub fn record(&mut self, class: KernelClass, flops: u64, written_rows: usize, written_cols: usize) {
        self.add(class, flops);
        if let Some(calls) = self.calls.as_mut() {
            calls.push(KernelCall {
                class,
                flops,
                written_rows,
                written_cols,
            });
        }
    }

    pub fn count(&self, class: KernelClass) -> u64 {
        self.counts[class.index()]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn calls(&self) -> Option<&[KernelCall]> {
        self.calls.as_deref()
    }

    /// Element-wise sum; call logs are concatenated when both sides carry one.
    pub fn merge(&mut self, other: &FlopLedger) {
        for i in 0..9 {
            self.counts[i] += other.counts[i];
        }
        if let (Some(mine), Some(theirs)) = (self.calls.as_mut(), other.calls.as_ref()) {
            mine.extend_from_slice(theirs);
        }
    }

    pub fn per_class(&self) -> impl Iterator<Item = (KernelClass, u64)> + '_ {
        KernelClass::ALL.iter().map(|&c| (c, self.count(c)))
    }
}

/// n^3 / 3 rounded to the nearest integer.
pub fn third_of_cube(n: usize) -> u64 {
    let c = (n as u64).pow(3);
    (c + 1) / 3
}
