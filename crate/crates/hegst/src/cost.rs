//! Turns flop ledgers and kernel call logs into the cost analysis: per-class
//! fractions, the scalability proxy, and the written-extent report.
//!
//! "Scalability" is deliberately reduced to `1 - fraction(trsm)`: triangular
//! solves carry inherent dependencies, so the fraction of work spent in them
//! is the checkable proxy for how well a variant parallelizes. Kernel calls
//! with more than `n * b^2` flops are "big": for an out-of-core-friendly
//! variant these must write only panel-sized operands.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::error::Result;
use crate::ledger::{FlopLedger, KernelClass};
use crate::matrix::partition_schedule;
use crate::trmm::TrmmVariant;
use crate::trsm::TrsmVariant;

/// A variant of either two-sided operation.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum VariantId {
    Trsm(TrsmVariant),
    Trmm(TrmmVariant),
}

impl VariantId {
    pub fn op_name(self) -> &'static str {
        match self {
            VariantId::Trsm(_) => "trsm",
            VariantId::Trmm(_) => "trmm",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            VariantId::Trsm(v) => v.name(),
            VariantId::Trmm(v) => v.name(),
        }
    }

    pub fn all_trsm() -> Vec<VariantId> {
        TrsmVariant::ALL.iter().map(|&v| VariantId::Trsm(v)).collect()
    }

    pub fn all_trmm() -> Vec<VariantId> {
        TrmmVariant::ALL.iter().map(|&v| VariantId::Trmm(v)).collect()
    }
}

/// The cost analysis of one completed (or predicted) run.
#[derive(Clone, Debug, Serialize)]
pub struct CostReport {
    pub op: String,
    pub variant: String,
    pub n: usize,
    pub b: usize,
    pub total_flops: u64,
    pub flops_per_class: BTreeMap<String, u64>,
    pub fraction_per_class: BTreeMap<String, f64>,
    /// 1 - fraction(trsm).
    pub scalable_fraction: f64,
    /// Calls above this flop count are "big": n * b^2.
    pub big_kernel_threshold: u64,
    /// Max over big kernel calls of the smaller written-operand extent.
    /// Absent when the ledger carried no call log or had no big calls.
    pub largest_written_extent_of_big_kernels: Option<usize>,
    /// Set when the ledger was empty and the fractions are undefined.
    pub degenerate: bool,
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "op={} variant={} n={} b={}",
            self.op, self.variant, self.n, self.b
        )?;
        let n3 = (self.n as f64).powi(3);
        writeln!(
            f,
            "total flops {:>16}   total/n^3 = {:.6}",
            self.total_flops,
            if n3 > 0.0 { self.total_flops as f64 / n3 } else { 0.0 }
        )?;
        if self.degenerate {
            return writeln!(f, "(empty ledger; fractions undefined)");
        }
        writeln!(f, "{:<8} {:>16} {:>12}", "class", "flops", "fraction")?;
        for (class, flops) in &self.flops_per_class {
            writeln!(
                f,
                "{:<8} {:>16} {:>12.6}",
                class,
                flops,
                self.fraction_per_class.get(class).copied().unwrap_or(0.0)
            )?;
        }
        writeln!(f, "scalable fraction {:.6}", self.scalable_fraction)?;
        match self.largest_written_extent_of_big_kernels {
            Some(e) => writeln!(
                f,
                "big-kernel threshold {} flops; largest written extent of big kernels {}",
                self.big_kernel_threshold, e
            ),
            None => writeln!(f, "big-kernel threshold {} flops", self.big_kernel_threshold),
        }
    }
}

/// Deterministic arithmetic over a measured ledger.
pub fn analyze(ledger: &FlopLedger, n: usize, b: usize, variant: VariantId) -> CostReport {
    let total = ledger.total();
    let mut flops_per_class = BTreeMap::new();
    let mut fraction_per_class = BTreeMap::new();
    for (class, flops) in ledger.per_class() {
        flops_per_class.insert(class.name().to_string(), flops);
        fraction_per_class.insert(
            class.name().to_string(),
            if total > 0 { flops as f64 / total as f64 } else { 0.0 },
        );
    }
    let trsm_fraction = fraction_per_class.get("trsm").copied().unwrap_or(0.0);
    let threshold = (n * b * b) as u64;
    let extent = ledger.calls().map(|calls| {
        calls
            .iter()
            .filter(|c| c.flops > threshold)
            .map(|c| c.written_min_dim())
            .max()
            .unwrap_or(0)
    });
    CostReport {
        op: variant.op_name().to_string(),
        variant: variant.name().to_string(),
        n,
        b,
        total_flops: total,
        flops_per_class,
        fraction_per_class,
        scalable_fraction: if total > 0 { 1.0 - trsm_fraction } else { 0.0 },
        big_kernel_threshold: threshold,
        largest_written_extent_of_big_kernels: extent,
        degenerate: total == 0,
    }
}

/// Closed-form flop ledger: the per-iteration kernel formulas summed over the
/// partition schedule. Exact, not asymptotic; must equal the measured ledger
/// for every (variant, n, b) because counts are functions of shapes only.
pub fn predict_ledger(variant: VariantId, n: usize, b: usize) -> Result<FlopLedger> {
    let schedule = partition_schedule(n, b)?;
    let mut ledger = FlopLedger::new();
    let u = |x: usize| x as u64;
    for &(k, c) in &schedule {
        let m = n - k - c;
        let (k, c, m) = (u(k), u(c), u(m));
        use KernelClass::*;
        match variant {
            VariantId::Trsm(TrsmVariant::V1) => {
                ledger.add(Trsm, k * k * c + c * c * k);
                ledger.add(Hemm, 2 * k * k * c);
                ledger.add(Other, 2 * c * k);
                ledger.add(Her2k, 2 * c * c * k);
                ledger.add(TwoSidedBase, c * c * c);
            }
            VariantId::Trsm(TrsmVariant::V2) => {
                ledger.add(Hemm, 2 * k * k * c);
                ledger.add(Other, 2 * c * k);
                ledger.add(Her2k, 2 * c * c * k);
                ledger.add(Trsm, c * c * k + c * c * m);
                ledger.add(TwoSidedBase, c * c * c);
                ledger.add(Gemm, 2 * m * c * k);
            }
            VariantId::Trsm(TrsmVariant::V3) => {
                ledger.add(Her2k, 2 * c * c * k);
                ledger.add(Other, c * k + 2 * m * k + m * c);
                ledger.add(Trsm, c * c * k + c * c * m);
                ledger.add(TwoSidedBase, c * c * c);
                // A21 update, stored-column extension, and the new block column.
                ledger.add(Gemm, 2 * m * c * k + 2 * m * c * k + 2 * m * c * k);
                ledger.add(Hemm, 2 * c * c * m);
            }
            VariantId::Trsm(TrsmVariant::V4) => {
                ledger.add(Trsm, c * c * k + c * c * m);
                ledger.add(TwoSidedBase, c * c * c);
                ledger.add(Gemm, 2 * m * c * k);
                ledger.add(Hemm, 4 * c * c * m);
                ledger.add(Her2k, 2 * m * m * c);
            }
            VariantId::Trsm(TrsmVariant::V5) => {
                ledger.add(TwoSidedBase, c * c * c);
                ledger.add(Trsm, c * c * m + m * m * c);
                ledger.add(Hemm, 4 * c * c * m);
                ledger.add(Her2k, 2 * m * m * c);
            }
            VariantId::Trmm(TrmmVariant::M1) => {
                ledger.add(Trmm, k * k * c + c * c * k);
                ledger.add(Hemm, 4 * c * c * k);
                ledger.add(Her2k, 2 * k * k * c);
                ledger.add(TwoSidedBase, c * c * c);
            }
            VariantId::Trmm(TrmmVariant::M2) => {
                ledger.add(Hemm, 4 * c * c * k);
                ledger.add(Her2k, 2 * k * k * c);
                ledger.add(Trmm, c * c * k + c * c * m);
                ledger.add(Gemm, 2 * m * c * k);
                ledger.add(TwoSidedBase, c * c * c);
            }
        }
    }
    Ok(ledger)
}

/// Analytic fraction table from the closed-form ledger.
pub fn predict_fractions(variant: VariantId, n: usize, b: usize) -> Result<CostReport> {
    let ledger = predict_ledger(variant, n, b)?;
    Ok(analyze(&ledger, n, b, variant))
}
