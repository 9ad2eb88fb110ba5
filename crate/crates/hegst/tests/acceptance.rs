//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers once its assertions hold.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::Instant;

use num_complex::Complex64;

use hegst::cost::{analyze, predict_ledger, VariantId};
use hegst::kernels::cholesky_lower;
use hegst::ledger::{FlopLedger, KernelClass};
use hegst::oracle::{
    self, eigenvalues_2x2_hermitian, oracle_generalized_eigenvalues_2x2, oracle_two_sided_trmm,
    oracle_two_sided_trsm,
};
use hegst::pipeline::{recover_generalized_eigenvector, reduce};
use hegst::random::{random_hermitian, random_hpd, random_well_conditioned_lower};
use hegst::scalar::Scalar;
use hegst::triangular::HermitianMatrix;
use hegst::trmm::{two_sided_trmm, two_sided_trmm_with_fault, TrmmVariant};
use hegst::trsm::{two_sided_trsm, two_sided_trsm_with_fault, TrsmVariant};
use hegst::worksheet::WorksheetChecker;
use hegst::DenseMatrix;

const GRID_SIZES: [usize; 10] = [0, 1, 2, 3, 5, 8, 13, 33, 64, 129];
const GRID_BLOCKS: [usize; 4] = [1, 4, 8, 32];
const GRID_SEEDS: [u64; 3] = [1, 2, 3];

fn all_variants() -> Vec<VariantId> {
    let mut v = VariantId::all_trsm();
    v.extend(VariantId::all_trmm());
    v
}

fn run_variant<T: Scalar>(
    variant: VariantId,
    a: &mut HermitianMatrix<T>,
    l: &hegst::TriangularMatrix<T>,
    b: usize,
    ledger: Option<&mut FlopLedger>,
) {
    match variant {
        VariantId::Trsm(v) => {
            two_sided_trsm(a, l, v, b, ledger, None).unwrap();
        }
        VariantId::Trmm(v) => {
            two_sided_trmm(a, l, v, b, ledger, None).unwrap();
        }
    }
}

fn oracle_equivalence_grid<T: Scalar>(tol: f64) -> (usize, f64) {
    let mut runs = 0;
    let mut worst: f64 = 0.0;
    for &n in &GRID_SIZES {
        for &seed in &GRID_SEEDS {
            let a0 = random_hermitian::<T>(n, seed);
            let l = random_well_conditioned_lower::<T>(n, seed + 100);
            let c_trsm = oracle_two_sided_trsm(&a0, &l).unwrap();
            let c_trmm = oracle_two_sided_trmm(&a0, &l).unwrap();
            for variant in all_variants() {
                let reference = match variant {
                    VariantId::Trsm(_) => &c_trsm,
                    VariantId::Trmm(_) => &c_trmm,
                };
                for &b in &GRID_BLOCKS {
                    let mut a = a0.clone();
                    run_variant(variant, &mut a, &l, b, None);
                    let rel = a.rel_distance_lower(reference);
                    assert!(
                        rel <= tol,
                        "[criterion 1] FAIL: {} variant {} n={n} b={b} seed={seed} {}: residual {rel:e}",
                        variant.op_name(),
                        variant.name(),
                        T::FIELD_NAME
                    );
                    worst = worst.max(rel);
                    runs += 1;
                }
            }
        }
    }
    (runs, worst)
}

#[test]
fn criterion_01_oracle_equivalence() {
    let start = Instant::now();
    let (runs_r, worst_r) = oracle_equivalence_grid::<f64>(1e-10);
    let (runs_c, worst_c) = oracle_equivalence_grid::<Complex64>(1e-10);
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "[criterion 1] FAIL: took {secs:.1}s (limit 120s)");
    println!(
        "[criterion 1] PASS: oracle equivalence over {} runs (worst residual real {worst_r:.2e}, complex {worst_c:.2e}, tol 1e-10) in {secs:.1}s",
        runs_r + runs_c
    );
}

fn invariant_grid<T: Scalar>() -> usize {
    let (n, b) = (64, 8);
    let mut checked = 0;
    for &seed in &GRID_SEEDS {
        let a0 = random_hermitian::<T>(n, seed);
        let l = random_well_conditioned_lower::<T>(n, seed + 100);
        for v in TrsmVariant::ALL {
            let mut checker = WorksheetChecker::new_trsm(v, &a0, &l, 1e-10, false).unwrap();
            let mut a = a0.clone();
            two_sided_trsm(&mut a, &l, v, b, None, Some(&mut checker)).unwrap();
            assert!(
                checker.trace.passed(),
                "[criterion 2] FAIL: trsm variant {} seed={seed} {}: {:?}",
                v.name(),
                T::FIELD_NAME,
                checker.trace.first_failure()
            );
            checked += checker.trace.rows.len();
        }
        for v in TrmmVariant::ALL {
            let mut checker = WorksheetChecker::new_trmm(v, &a0, &l, 1e-10, false).unwrap();
            let mut a = a0.clone();
            two_sided_trmm(&mut a, &l, v, b, None, Some(&mut checker)).unwrap();
            assert!(
                checker.trace.passed(),
                "[criterion 2] FAIL: trmm variant {} seed={seed} {}: {:?}",
                v.name(),
                T::FIELD_NAME,
                checker.trace.first_failure()
            );
            checked += checker.trace.rows.len();
        }
    }
    checked
}

#[test]
fn criterion_02_worksheet_discrimination() {
    let start = Instant::now();
    let checks = invariant_grid::<f64>() + invariant_grid::<Complex64>();

    // Fault injection at n=24, b=4: removing any single update step must
    // produce at least one failing check.
    let (n, b) = (24, 4);
    let a0 = random_hermitian::<f64>(n, 1);
    let l = random_well_conditioned_lower::<f64>(n, 101);
    let mut faults = 0;
    for v in TrsmVariant::ALL {
        for step in 0..v.step_count() {
            let mut checker = WorksheetChecker::new_trsm(v, &a0, &l, 1e-10, false).unwrap();
            let mut a = a0.clone();
            two_sided_trsm_with_fault(&mut a, &l, v, b, None, Some(&mut checker), Some(step))
                .unwrap();
            assert!(
                !checker.trace.passed(),
                "[criterion 2] FAIL: trsm variant {} with step {step} removed passed all checks",
                v.name()
            );
            faults += 1;
        }
    }
    for v in TrmmVariant::ALL {
        for step in 0..v.step_count() {
            let mut checker = WorksheetChecker::new_trmm(v, &a0, &l, 1e-10, false).unwrap();
            let mut a = a0.clone();
            two_sided_trmm_with_fault(&mut a, &l, v, b, None, Some(&mut checker), Some(step))
                .unwrap();
            assert!(
                !checker.trace.passed(),
                "[criterion 2] FAIL: trmm variant {} with step {step} removed passed all checks",
                v.name()
            );
            faults += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 60.0, "[criterion 2] FAIL: took {secs:.1}s (limit 60s)");
    println!(
        "[criterion 2] PASS: {checks} boundary checks green at n=64 b=8; all {faults} injected faults caught at n=24 b=4; {secs:.1}s"
    );
}

/// Instrumented runs at the reference size n=2048, b=64, shared by the
/// ledger-based criteria. Counts are field-independent, so the real field is
/// used.
fn reference_ledgers() -> &'static BTreeMap<String, FlopLedger> {
    static LEDGERS: OnceLock<BTreeMap<String, FlopLedger>> = OnceLock::new();
    LEDGERS.get_or_init(|| {
        let (n, b) = (2048, 64);
        let a0 = random_hermitian::<f64>(n, 1);
        let l = random_well_conditioned_lower::<f64>(n, 101);
        let mut out = BTreeMap::new();
        for variant in all_variants() {
            let mut a = a0.clone();
            let mut ledger = FlopLedger::with_call_log();
            run_variant(variant, &mut a, &l, b, Some(&mut ledger));
            out.insert(format!("{}-{}", variant.op_name(), variant.name()), ledger);
        }
        out
    })
}

fn ledger_for(variant: VariantId) -> &'static FlopLedger {
    &reference_ledgers()[&format!("{}-{}", variant.op_name(), variant.name())]
}

#[test]
fn criterion_03_total_flops_about_n_cubed() {
    let start = Instant::now();
    let n3 = 2048f64.powi(3);
    let mut parts = Vec::new();
    for variant in all_variants() {
        let total = ledger_for(variant).total();
        let ratio = total as f64 / n3;
        assert!(
            (0.95..=1.10).contains(&ratio),
            "[criterion 3] FAIL: {} variant {} total/n^3 = {ratio:.4}",
            variant.op_name(),
            variant.name()
        );
        // Measured must equal the closed-form prediction class by class.
        let predicted = predict_ledger(variant, 2048, 64).unwrap();
        for class in KernelClass::ALL {
            assert_eq!(
                predicted.count(class),
                ledger_for(variant).count(class),
                "[criterion 3] FAIL: predicted != measured for {} {} class {}",
                variant.op_name(),
                variant.name(),
                class.name()
            );
        }
        parts.push(format!("{}={ratio:.4}", variant.name()));
    }
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 120.0, "[criterion 3] FAIL: took {secs:.1}s (limit 120s)");
    println!(
        "[criterion 3] PASS: total/n^3 at n=2048 b=64: {} (bounds [0.95, 1.10]) in {secs:.1}s",
        parts.join(" ")
    );
}

#[test]
fn criterion_04_trsm_fractions() {
    let frac = |v: VariantId| {
        let ledger = ledger_for(v);
        ledger.count(KernelClass::Trsm) as f64 / ledger.total() as f64
    };
    let f1 = frac(VariantId::Trsm(TrsmVariant::V1));
    let f5 = frac(VariantId::Trsm(TrsmVariant::V5));
    for (name, f) in [("1", f1), ("5", f5)] {
        assert!(
            (0.30..=0.37).contains(&f),
            "[criterion 4] FAIL: variant {name} trsm fraction {f:.4} outside [0.30, 0.37]"
        );
    }
    for v in [TrsmVariant::V2, TrsmVariant::V3, TrsmVariant::V4] {
        let f = frac(VariantId::Trsm(v));
        assert!(
            f <= 0.05,
            "[criterion 4] FAIL: variant {} trsm fraction {f:.4} > 0.05",
            v.name()
        );
    }
    let m1 = ledger_for(VariantId::Trmm(TrmmVariant::M1)).count(KernelClass::Trsm);
    assert_eq!(m1, 0, "[criterion 4] FAIL: trmm m1 performed triangular solves");
    println!(
        "[criterion 4] PASS: trsm fractions at n=2048 b=64: v1={f1:.4} v5={f5:.4} (in [0.30,0.37]); v2/v3/v4 <= 0.05; m1 exactly 0"
    );
}

#[test]
fn criterion_05_rank2k_dominance_and_scalability_order() {
    let report = |v: VariantId| analyze(ledger_for(v), 2048, 64, v);
    let her2k_v4 = report(VariantId::Trsm(TrsmVariant::V4)).fraction_per_class["her2k"];
    assert!(
        her2k_v4 >= 0.50,
        "[criterion 5] FAIL: variant 4 her2k fraction {her2k_v4:.4} < 0.50"
    );
    let scal = |v: TrsmVariant| report(VariantId::Trsm(v)).scalable_fraction;
    let (s1, s2, s3, s4, s5) = (
        scal(TrsmVariant::V1),
        scal(TrsmVariant::V2),
        scal(TrsmVariant::V3),
        scal(TrsmVariant::V4),
        scal(TrsmVariant::V5),
    );
    assert!(
        s4 >= s3 && s3 >= s2 && s2 > s1,
        "[criterion 5] FAIL: scalable-fraction order violated: v4={s4:.6} v3={s3:.6} v2={s2:.6} v1={s1:.6}"
    );
    assert!(
        s4 > s5,
        "[criterion 5] FAIL: v4 ({s4:.6}) not above v5 ({s5:.6})"
    );
    println!(
        "[criterion 5] PASS: v4 her2k fraction {her2k_v4:.4} >= 0.50; scalable fractions v4={s4:.6} >= v3={s3:.6} >= v2={s2:.6} > v1={s1:.6}, v4 > v5={s5:.6}"
    );
}

#[test]
fn criterion_06_variant2_writes_only_panels() {
    let (n, b) = (2048u64, 64u64);
    let threshold = n * b * b;
    let ledger = ledger_for(VariantId::Trsm(TrsmVariant::V2));
    let calls = ledger.calls().expect("call log enabled");
    let mut big = 0;
    for call in calls {
        if call.flops > threshold {
            big += 1;
            assert!(
                call.written_min_dim() as u64 <= b,
                "[criterion 6] FAIL: big {} call ({} flops) wrote a {}x{} operand",
                call.class.name(),
                call.flops,
                call.written_rows,
                call.written_cols
            );
        }
    }
    assert!(big > 0, "[criterion 6] FAIL: no big kernel calls recorded");
    println!(
        "[criterion 6] PASS: all {big} variant-2 kernel calls above {threshold} flops write operands with min dimension <= {b} (of {} logged calls)",
        calls.len()
    );
}

#[test]
fn criterion_07_eigenvalue_preservation() {
    // 100 random 2x2 pairs.
    for seed in 0..100u64 {
        let a = random_hermitian::<f64>(2, seed);
        let b = random_hpd::<f64>(2, seed + 1000);
        let r = reduce(&a, &b, TrsmVariant::V4, 2).unwrap();
        let (e1, e2) = eigenvalues_2x2_hermitian(&r.c);
        let (g1, g2) = oracle_generalized_eigenvalues_2x2(&a, &b).unwrap();
        assert!(
            (e1 - g1).abs() <= 1e-10 * (1.0 + g1.abs())
                && (e2 - g2).abs() <= 1e-10 * (1.0 + g2.abs()),
            "[criterion 7] FAIL: seed {seed}: reduced eigenvalues ({e1}, {e2}) vs pencil ({g1}, {g2})"
        );
    }

    // Worked pair: eigenvalues {1, 2} and eigenvector back-transform.
    let a = HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 3.0]])).unwrap();
    let b = HermitianMatrix::from_base(DenseMatrix::from_rows(&[&[4.0, 2.0], &[2.0, 2.0]])).unwrap();
    let r = reduce(&a, &b, TrsmVariant::V1, 1).unwrap();
    let (e1, e2) = eigenvalues_2x2_hermitian(&r.c);
    assert!(
        (e1 - 1.0).abs() <= 1e-12 && (e2 - 2.0).abs() <= 1e-12,
        "[criterion 7] FAIL: worked pair eigenvalues ({e1}, {e2}) != (1, 2)"
    );
    // z = e1-direction eigenvector of C for lambda = 1; x = L^-H z satisfies
    // A x = lambda B x componentwise.
    let z = [1.0, 0.0];
    let x = recover_generalized_eigenvector(&z, &r.l).unwrap();
    let af = a.materialize();
    let bf = b.materialize();
    for i in 0..2 {
        let ax = af.at(i, 0) * x[0] + af.at(i, 1) * x[1];
        let bx = bf.at(i, 0) * x[0] + bf.at(i, 1) * x[1];
        assert!(
            (ax - 1.0 * bx).abs() <= 1e-12,
            "[criterion 7] FAIL: component {i}: A x = {ax} vs lambda B x = {bx}"
        );
    }
    println!(
        "[criterion 7] PASS: 100 random 2x2 reductions preserve generalized eigenvalues to 1e-10; worked pair gives (1, 2) and A x = lambda B x to 1e-12"
    );
}

#[test]
fn criterion_08_cholesky_backward_error() {
    let mut worst: f64 = 0.0;
    for &n in &[1usize, 2, 3, 5, 8, 16, 33, 64, 129, 256, 512] {
        for seed in [1u64, 2] {
            let b = random_hpd::<f64>(n, seed);
            let l = cholesky_lower(&b, None).unwrap();
            let lf = l.materialize();
            let rebuilt = oracle::matmul(&lf, &oracle::conj_transpose(&lf));
            let bf = b.materialize();
            let mut diff = 0.0;
            for j in 0..n {
                for i in 0..n {
                    diff += (rebuilt.at(i, j) - bf.at(i, j)).abs_sq();
                }
            }
            let rel = diff.sqrt() / bf.frobenius_norm();
            let bound = 50.0 * n as f64 * f64::EPSILON;
            assert!(
                rel <= bound,
                "[criterion 8] FAIL: n={n} seed={seed}: ||LL^H - B||/||B|| = {rel:e} > {bound:e}"
            );
            worst = worst.max(rel / bound);
        }
    }
    println!(
        "[criterion 8] PASS: Cholesky reconstruction within 50 n eps up to n=512 (worst at {:.1}% of bound)",
        worst * 100.0
    );
}

#[test]
fn criterion_09_blocked_speedup() {
    let n = 1024;
    let a0 = random_hermitian::<f64>(n, 1);
    let l = random_well_conditioned_lower::<f64>(n, 101);
    let time_with_block = |b: usize| {
        let mut a = a0.clone();
        let start = Instant::now();
        two_sided_trsm(&mut a, &l, TrsmVariant::V1, b, None, None).unwrap();
        start.elapsed().as_secs_f64()
    };
    // Timing-based and flaky-tolerant: three attempts.
    let mut last = (0.0, 0.0);
    for attempt in 0..3 {
        let blocked = time_with_block(64);
        let unblocked = time_with_block(1);
        last = (blocked, unblocked);
        if unblocked >= 1.5 * blocked {
            println!(
                "[criterion 9] PASS: variant 1 at n=1024: b=64 took {blocked:.3}s vs b=1 {unblocked:.3}s ({:.1}x, attempt {})",
                unblocked / blocked,
                attempt + 1
            );
            return;
        }
    }
    panic!(
        "[criterion 9] FAIL: blocked {};s vs unblocked {}s after 3 attempts",
        last.0, last.1
    );
}

// Criterion 10 (byte-identical CLI output across reruns) lives in the CLI
// crate's integration tests, next to the binary it exercises.

#[test]
fn workspace_high_water_mark_at_reference_size() {
    // V3 must genuinely store a panel: more than one n/2-sized panel, never
    // more than n^2/2 scalars.
    let (n, b) = (2048, 64);
    let a0 = random_hermitian::<f64>(n, 1);
    let l = random_well_conditioned_lower::<f64>(n, 101);
    let mut a = a0.clone();
    let info = two_sided_trsm(&mut a, &l, TrsmVariant::V3, b, None, None).unwrap();
    let peak = info.workspace_peak_scalars;
    assert!(peak <= n * n / 2, "peak {peak} > n^2/2");
    assert!(peak >= (n / 2) * b, "peak {peak} below one n/2-sized panel");
    println!(
        "[extra] PASS: variant-3 workspace high-water {peak} scalars (bounds [{}, {}])",
        (n / 2) * b,
        n * n / 2
    );
}
