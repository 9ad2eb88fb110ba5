//! Command-line driver: verification against the brute-force oracles (with
//! optional per-iteration invariant checking), benchmarking with CSV/JSON
//! output, flop-ledger reports, and the reduction pipeline.
//!
//! Exit codes: 0 success, 1 verification or numerical failure, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use hegst::cost::{analyze, predict_fractions, predict_ledger, VariantId};
use hegst::ledger::{FlopLedger, KernelClass};
use hegst::market::{self, MarketMatrix};
use hegst::matrix::DenseMatrix;
use hegst::oracle;
use hegst::pipeline;
use hegst::random::{random_hermitian, random_well_conditioned_lower};
use hegst::scalar::Scalar;
use hegst::triangular::HermitianMatrix;
use hegst::trmm::{two_sided_trmm_with_fault, TrmmVariant};
use hegst::trsm::{two_sided_trsm_with_fault, TrsmVariant};
use hegst::worksheet::{WorksheetChecker, TRACE_CSV_HEADER};
use hegst::{Complex64, Error};

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Exact benchmark CSV header; a stable contract for downstream tooling.
const BENCH_CSV_HEADER: &str = "op,variant,n,b,seed,rep,elapsed_seconds,gflops,frac_gemm,frac_hemm,frac_her2k,frac_herk,frac_trsm,frac_trmm,frac_chol,frac_base";

#[derive(Parser)]
#[command(
    name = "hegst",
    version,
    about = "Blocked two-sided triangular solve/product variants with invariant checking and flop accounting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the oracle-equivalence grid and optionally the per-iteration
    /// invariant harness; exit 0 iff everything passes.
    Verify(VerifyArgs),
    /// Time variant runs and emit one record per (variant, n, b, rep).
    Bench(BenchArgs),
    /// Print predicted and measured flop reports for one configuration.
    Flops(FlopsArgs),
    /// Reduce a generalized pair (A, B) to standard form.
    Reduce(ReduceArgs),
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Operation: trsm or trmm.
    #[arg(long, default_value = "trsm")]
    op: String,
    /// Comma-separated variants (trsm: 1..5, trmm: m1,m2) or "all".
    #[arg(long, default_value = "all", value_delimiter = ',')]
    variants: Vec<String>,
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Comma-separated block sizes.
    #[arg(long, value_delimiter = ',')]
    block_sizes: Option<Vec<usize>>,
    /// Comma-separated seeds (default: TWOSIDED_SEED or 1,2,3 for verify / 1 for bench).
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Scalar field: real or complex.
    #[arg(long, default_value = "real")]
    field: String,
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write output to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; fields present in it override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Check the variant's loop invariant at every iteration boundary.
    #[arg(long)]
    check_invariants: bool,
    /// Abort a run on the first failed boundary check.
    #[arg(long)]
    strict: bool,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    /// Write the full invariant trace as CSV to this file.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Skip the given update step (0-based) in every iteration; the harness
    /// is expected to catch the corruption. For self-tests.
    #[arg(long)]
    inject_fault: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    grid: GridArgs,
    /// Repetitions per configuration cell.
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Run distinct (variant, n, b) cells on worker threads. Output order
    /// and all non-timing columns are unaffected.
    #[arg(long)]
    parallel_configs: bool,
}

#[derive(Args)]
struct FlopsArgs {
    #[arg(long, default_value = "trsm")]
    op: String,
    #[arg(long)]
    variant: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    b: usize,
    /// Output format: json (machine-readable) or text (aligned table).
    #[arg(long, default_value = "json")]
    format: String,
}

#[derive(Args)]
struct ReduceArgs {
    /// Matrix Market file holding Hermitian A.
    #[arg(long, requires = "in_b", conflicts_with = "random")]
    in_a: Option<PathBuf>,
    /// Matrix Market file holding Hermitian positive-definite B.
    #[arg(long, requires = "in_a", conflicts_with = "random")]
    in_b: Option<PathBuf>,
    /// Generate a random pair of this dimension instead of reading files.
    #[arg(long)]
    random: Option<usize>,
    /// Seed for --random (default: TWOSIDED_SEED or 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Solve variant (1..5).
    #[arg(long, default_value = "4")]
    variant: String,
    /// Block size.
    #[arg(long, default_value_t = 64)]
    b: usize,
    /// Write the reduced matrix C here (Matrix Market, lower storage).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Residual acceptance threshold; default is the conditioning-aware
    /// bound 50 n eps kappa(L)^2.
    #[arg(long)]
    tolerance: Option<f64>,
}

/// The resolved run configuration; round-trips through JSON.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default)]
struct RunConfig {
    op: String,
    variants: Vec<String>,
    sizes: Vec<usize>,
    block_sizes: Vec<usize>,
    seeds: Vec<u64>,
    field: String,
    reps: usize,
    tolerance: f64,
    check_invariants: bool,
    strict: bool,
    output: Option<String>,
    format: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            op: "trsm".to_string(),
            variants: vec!["all".to_string()],
            sizes: vec![33, 64],
            block_sizes: vec![8],
            seeds: vec![1, 2, 3],
            field: "real".to_string(),
            reps: 1,
            tolerance: 1e-10,
            check_invariants: false,
            strict: false,
            output: None,
            format: "csv".to_string(),
        }
    }
}

/// Optional fields of a JSON config file; present fields override flags.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    op: Option<String>,
    variants: Option<Vec<String>>,
    sizes: Option<Vec<usize>>,
    block_sizes: Option<Vec<usize>>,
    seeds: Option<Vec<u64>>,
    field: Option<String>,
    reps: Option<usize>,
    tolerance: Option<f64>,
    check_invariants: Option<bool>,
    strict: Option<bool>,
    output: Option<String>,
    format: Option<String>,
}

fn env_seed() -> Option<u64> {
    std::env::var("TWOSIDED_SEED").ok().and_then(|s| s.parse().ok())
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Flops(args) => cmd_flops(args),
        Command::Reduce(args) => cmd_reduce(args),
    }
}

fn build_config(grid: &GridArgs, default_seeds: Vec<u64>) -> Result<RunConfig, String> {
    let mut cfg = RunConfig {
        op: grid.op.clone(),
        variants: grid.variants.clone(),
        sizes: grid.sizes.clone().unwrap_or(RunConfig::default().sizes),
        block_sizes: grid
            .block_sizes
            .clone()
            .unwrap_or(RunConfig::default().block_sizes),
        seeds: grid
            .seeds
            .clone()
            .or_else(|| env_seed().map(|s| vec![s]))
            .unwrap_or(default_seeds),
        field: grid.field.clone(),
        format: grid.format.clone(),
        output: grid.out.as_ref().map(|p| p.display().to_string()),
        ..RunConfig::default()
    };
    if let Some(path) = &grid.config {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config: {e}"))?;
        let partial: PartialConfig =
            serde_json::from_str(&text).map_err(|e| format!("bad config file: {e}"))?;
        macro_rules! take {
            ($field:ident) => {
                if let Some(v) = partial.$field {
                    cfg.$field = v;
                }
            };
        }
        take!(op);
        take!(variants);
        take!(sizes);
        take!(block_sizes);
        take!(seeds);
        take!(field);
        take!(reps);
        take!(tolerance);
        take!(check_invariants);
        take!(strict);
        take!(format);
        if partial.output.is_some() {
            cfg.output = partial.output;
        }
    }
    // The parsed config must survive a JSON round-trip unchanged.
    let json = serde_json::to_string(&cfg).map_err(|e| e.to_string())?;
    let back: RunConfig = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    debug_assert_eq!(back, cfg);
    Ok(cfg)
}

fn resolve_variants(op: &str, names: &[String]) -> Result<Vec<VariantId>, String> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            match op {
                "trsm" => out.extend(VariantId::all_trsm()),
                "trmm" => out.extend(VariantId::all_trmm()),
                other => return Err(format!("unknown op: {other}")),
            }
            continue;
        }
        let id = match op {
            "trsm" => TrsmVariant::parse(name).map(VariantId::Trsm),
            "trmm" => TrmmVariant::parse(name).map(VariantId::Trmm),
            other => return Err(format!("unknown op: {other}")),
        };
        match id {
            Some(v) => out.push(v),
            None => return Err(format!("unknown variant: {name} (op {op})")),
        }
    }
    if out.is_empty() {
        return Err("no variants selected".to_string());
    }
    Ok(out)
}

fn write_output(path: Option<&Path>, content: &str) -> Result<(), String> {
    match path {
        Some(p) => fs::write(p, content).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{content}");
            std::io::stdout().flush().ok();
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOutcome {
    summary_line: String,
    trace_csv: String,
    passed: bool,
    failure: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn verify_one<T: Scalar>(
    variant: VariantId,
    n: usize,
    b: usize,
    seed: u64,
    tolerance: f64,
    check_invariants: bool,
    strict: bool,
    inject_fault: Option<usize>,
    oracle_cache: &mut std::collections::HashMap<(usize, u64), DenseMatrix<T>>,
) -> Result<VerifyOutcome, Error> {
    let a0 = random_hermitian::<T>(n, seed);
    let l = random_well_conditioned_lower::<T>(n, seed + 100);
    let mut a = a0.clone();

    let mut checker = if check_invariants {
        Some(match variant {
            VariantId::Trsm(v) => WorksheetChecker::new_trsm(v, &a0, &l, tolerance, strict)?,
            VariantId::Trmm(v) => WorksheetChecker::new_trmm(v, &a0, &l, tolerance, strict)?,
        })
    } else {
        None
    };

    let run = match variant {
        VariantId::Trsm(v) => two_sided_trsm_with_fault(
            &mut a,
            &l,
            v,
            b,
            None,
            checker.as_mut().map(|c| c as &mut dyn hegst::trsm::BoundaryHook<T>),
            inject_fault,
        )
        .map(|_| ()),
        VariantId::Trmm(v) => two_sided_trmm_with_fault(
            &mut a,
            &l,
            v,
            b,
            None,
            checker.as_mut().map(|c| c as &mut dyn hegst::trsm::BoundaryHook<T>),
            inject_fault,
        ),
    };
    if let Err(Error::InvariantViolated { k, quadrant, residual }) = &run {
        let msg = format!(
            "variant {} n={n} b={b} seed={seed}: invariant violated at boundary k={k} quadrant {quadrant} (residual {residual:.3e})",
            variant.name()
        );
        return Ok(VerifyOutcome {
            summary_line: format!(
                "{:<4} {:>5} {:>4} {:>4} {:>8} {:>10} {:>12} FAIL",
                variant.name(),
                n,
                b,
                seed,
                T::FIELD_NAME,
                "-",
                "-"
            ),
            trace_csv: checker
                .map(|c| c.trace.to_csv(variant.name(), n, b, seed))
                .unwrap_or_default(),
            passed: false,
            failure: Some(msg),
        });
    }
    run?;

    let reference = match oracle_cache.entry((n, seed)) {
        std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
        std::collections::hash_map::Entry::Vacant(e) => {
            let c = match variant {
                VariantId::Trsm(_) => oracle::oracle_two_sided_trsm(&a0, &l)?,
                VariantId::Trmm(_) => oracle::oracle_two_sided_trmm(&a0, &l)?,
            };
            e.insert(c)
        }
    };
    let residual = a.rel_distance_lower(reference);
    let res_ok = residual <= tolerance;
    let (inv_ok, trace_csv, first_fail) = match &checker {
        Some(c) => (
            c.trace.passed(),
            c.trace.to_csv(variant.name(), n, b, seed),
            c.trace.first_failure().map(|r| {
                format!(
                    "variant {} n={n} b={b} seed={seed}: boundary k={} quadrant {} residual {:.3e}",
                    variant.name(),
                    r.k,
                    r.quadrant,
                    r.residual
                )
            }),
        ),
        None => (true, String::new(), None),
    };
    let passed = res_ok && inv_ok;
    // A failed boundary is the more precise diagnosis; fall back to the
    // oracle residual when invariants were not checked (or all held).
    let failure = first_fail.or_else(|| {
        (!res_ok).then(|| {
            format!(
                "variant {} n={n} b={b} seed={seed}: oracle residual {residual:.3e} > {tolerance:.1e}",
                variant.name()
            )
        })
    });
    let summary_line = format!(
        "{:<4} {:>5} {:>4} {:>4} {:>8} {:>12.3e} {:>9} {}",
        variant.name(),
        n,
        b,
        seed,
        T::FIELD_NAME,
        residual,
        if inv_ok { "ok" } else { "violated" },
        if passed { "PASS" } else { "FAIL" }
    );
    Ok(VerifyOutcome {
        summary_line,
        trace_csv,
        passed,
        failure,
    })
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let cfg = match build_config(&args.grid, vec![1, 2, 3]) {
        Ok(mut cfg) => {
            cfg.tolerance = args.tolerance;
            cfg.check_invariants |= args.check_invariants;
            cfg.strict |= args.strict;
            cfg
        }
        Err(e) => return usage_error(e),
    };
    let variants = match resolve_variants(&cfg.op, &cfg.variants) {
        Ok(v) => v,
        Err(e) => return usage_error(e),
    };
    if cfg.field != "real" && cfg.field != "complex" {
        return usage_error(format!("unknown field: {}", cfg.field));
    }
    if cfg.block_sizes.contains(&0) {
        return usage_error("block size must be at least 1");
    }

    let mut table = String::new();
    let _ = writeln!(
        table,
        "{:<4} {:>5} {:>4} {:>4} {:>8} {:>12} {:>9} status",
        "var", "n", "b", "seed", "field", "residual", "invariant"
    );
    let mut traces = String::new();
    let mut failures: Vec<String> = Vec::new();
    let mut all_pass = true;

    let mut run_field = |table: &mut String, traces: &mut String| -> Result<(), Error> {
        macro_rules! run_for {
            ($t:ty) => {{
                let mut cache = std::collections::HashMap::new();
                for &variant in &variants {
                    for &n in &cfg.sizes {
                        for &b in &cfg.block_sizes {
                            for &seed in &cfg.seeds {
                                let out = verify_one::<$t>(
                                    variant,
                                    n,
                                    b,
                                    seed,
                                    cfg.tolerance,
                                    cfg.check_invariants,
                                    cfg.strict,
                                    args.inject_fault,
                                    &mut cache,
                                )?;
                                let _ = writeln!(table, "{}", out.summary_line);
                                traces.push_str(&out.trace_csv);
                                if !out.passed {
                                    all_pass = false;
                                    if let Some(f) = out.failure {
                                        failures.push(f);
                                    }
                                }
                            }
                        }
                    }
                    // The oracle cache keys on (n, seed); one per field pass.
                }
                Ok::<(), Error>(())
            }};
        }
        if cfg.field == "complex" {
            run_for!(Complex64)
        } else {
            run_for!(f64)
        }
    };
    if let Err(e) = run_field(&mut table, &mut traces) {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAIL);
    }

    let _ = writeln!(
        table,
        "{}",
        if all_pass { "all checks passed" } else { "FAILURES:" }
    );
    for f in &failures {
        let _ = writeln!(table, "  {f}");
    }
    if let Err(e) = write_output(cfg.output.as_deref().map(Path::new), &table) {
        return usage_error(e);
    }
    if let Some(path) = &args.trace_out {
        let content = format!("{TRACE_CSV_HEADER}\n{traces}");
        if let Err(e) = write_output(Some(path), &content) {
            return usage_error(e);
        }
    }
    if all_pass {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

// ---------------------------------------------------------------------------
// bench

#[derive(Serialize, Clone)]
struct BenchRecord {
    op: String,
    variant: String,
    n: usize,
    b: usize,
    seed: u64,
    rep: usize,
    elapsed_seconds: f64,
    gflops: f64,
    frac_gemm: f64,
    frac_hemm: f64,
    frac_her2k: f64,
    frac_herk: f64,
    frac_trsm: f64,
    frac_trmm: f64,
    frac_chol: f64,
    frac_base: f64,
    /// Elementwise half-update passes; part of the JSON record so the full
    /// fraction table sums to 1, omitted from the fixed CSV columns.
    frac_other: f64,
}

impl BenchRecord {
    fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.6e},{:.4},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.op,
            self.variant,
            self.n,
            self.b,
            self.seed,
            self.rep,
            self.elapsed_seconds,
            self.gflops,
            self.frac_gemm,
            self.frac_hemm,
            self.frac_her2k,
            self.frac_herk,
            self.frac_trsm,
            self.frac_trmm,
            self.frac_chol,
            self.frac_base
        )
    }
}

fn bench_cell<T: Scalar>(
    variant: VariantId,
    n: usize,
    b: usize,
    seed: u64,
    reps: usize,
) -> Result<Vec<BenchRecord>, Error> {
    let a0 = random_hermitian::<T>(n, seed);
    let l = random_well_conditioned_lower::<T>(n, seed + 100);
    let mut records = Vec::with_capacity(reps);
    for rep in 0..reps {
        let mut a = a0.clone();
        let mut ledger = FlopLedger::new();
        let start = Instant::now();
        match variant {
            VariantId::Trsm(v) => {
                two_sided_trsm_with_fault(&mut a, &l, v, b, Some(&mut ledger), None, None)?;
            }
            VariantId::Trmm(v) => {
                two_sided_trmm_with_fault(&mut a, &l, v, b, Some(&mut ledger), None, None)?;
            }
        }
        let elapsed = start.elapsed().as_secs_f64();
        let total = ledger.total();
        let frac = |c: KernelClass| {
            if total > 0 {
                ledger.count(c) as f64 / total as f64
            } else {
                0.0
            }
        };
        records.push(BenchRecord {
            op: variant.op_name().to_string(),
            variant: variant.name().to_string(),
            n,
            b,
            seed,
            rep,
            elapsed_seconds: elapsed,
            gflops: if elapsed > 0.0 && total > 0 {
                total as f64 / elapsed / 1e9
            } else {
                0.0
            },
            frac_gemm: frac(KernelClass::Gemm),
            frac_hemm: frac(KernelClass::Hemm),
            frac_her2k: frac(KernelClass::Her2k),
            frac_herk: frac(KernelClass::Herk),
            frac_trsm: frac(KernelClass::Trsm),
            frac_trmm: frac(KernelClass::Trmm),
            frac_chol: frac(KernelClass::Chol),
            frac_base: frac(KernelClass::TwoSidedBase),
            frac_other: frac(KernelClass::Other),
        });
    }
    Ok(records)
}

fn cmd_bench(args: BenchArgs) -> ExitCode {
    let cfg = match build_config(&args.grid, vec![1]) {
        Ok(mut cfg) => {
            cfg.reps = args.reps;
            cfg
        }
        Err(e) => return usage_error(e),
    };
    let variants = match resolve_variants(&cfg.op, &cfg.variants) {
        Ok(v) => v,
        Err(e) => return usage_error(e),
    };
    if cfg.reps == 0 {
        return usage_error("reps must be at least 1");
    }
    if cfg.block_sizes.contains(&0) {
        return usage_error("block size must be at least 1");
    }
    let complex = match cfg.field.as_str() {
        "real" => false,
        "complex" => true,
        other => return usage_error(format!("unknown field: {other}")),
    };

    let mut cells = Vec::new();
    for &variant in &variants {
        for &n in &cfg.sizes {
            for &b in &cfg.block_sizes {
                for &seed in &cfg.seeds {
                    cells.push((variant, n, b, seed));
                }
            }
        }
    }

    let run_cell = |(variant, n, b, seed): (VariantId, usize, usize, u64)| {
        if complex {
            bench_cell::<Complex64>(variant, n, b, seed, cfg.reps)
        } else {
            bench_cell::<f64>(variant, n, b, seed, cfg.reps)
        }
    };

    let results: Vec<Result<Vec<BenchRecord>, Error>> = if args.parallel_configs {
        std::thread::scope(|scope| {
            let handles: Vec<_> = cells
                .iter()
                .map(|cell| {
                    let cell = *cell;
                    scope.spawn(move || run_cell(cell))
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        })
    } else {
        cells.iter().map(|cell| run_cell(*cell)).collect()
    };

    let mut records = Vec::new();
    for r in results {
        match r {
            Ok(mut rs) => records.append(&mut rs),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_FAIL);
            }
        }
    }

    let content = match cfg.format.as_str() {
        "csv" => {
            let mut out = String::from(BENCH_CSV_HEADER);
            out.push('\n');
            for r in &records {
                out.push_str(&r.csv_row());
                out.push('\n');
            }
            out
        }
        "json" => {
            let mut out = serde_json::to_string_pretty(&records).unwrap();
            out.push('\n');
            out
        }
        other => return usage_error(format!("unknown format: {other}")),
    };
    if let Err(e) = write_output(cfg.output.as_deref().map(Path::new), &content) {
        return usage_error(e);
    }
    ExitCode::from(EXIT_OK)
}

// ---------------------------------------------------------------------------
// flops

fn cmd_flops(args: FlopsArgs) -> ExitCode {
    let variant = match resolve_variants(&args.op, std::slice::from_ref(&args.variant)) {
        Ok(v) => v[0],
        Err(e) => return usage_error(e),
    };
    if args.b == 0 {
        return usage_error("block size must be at least 1");
    }
    let predicted = match predict_ledger(variant, args.n, args.b) {
        Ok(l) => l,
        Err(e) => return usage_error(e),
    };

    // Real run with a call log; counts are field-independent.
    let a0 = random_hermitian::<f64>(args.n, 1);
    let l = random_well_conditioned_lower::<f64>(args.n, 101);
    let mut a = a0.clone();
    let mut measured = FlopLedger::with_call_log();
    let run = match variant {
        VariantId::Trsm(v) => {
            two_sided_trsm_with_fault(&mut a, &l, v, args.b, Some(&mut measured), None, None)
                .map(|_| ())
        }
        VariantId::Trmm(v) => {
            two_sided_trmm_with_fault(&mut a, &l, v, args.b, Some(&mut measured), None, None)
        }
    };
    if let Err(e) = run {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_FAIL);
    }

    let mut predicted_counts = serde_json::Map::new();
    let mut measured_counts = serde_json::Map::new();
    let mut difference = serde_json::Map::new();
    let mut mismatch = false;
    for class in KernelClass::ALL {
        let p = predicted.count(class);
        let m = measured.count(class);
        predicted_counts.insert(class.name().to_string(), p.into());
        measured_counts.insert(class.name().to_string(), m.into());
        difference.insert(class.name().to_string(), (m as i128 - p as i128).to_string().into());
        if p != m {
            mismatch = true;
        }
    }
    let report = analyze(&measured, args.n, args.b, variant);
    let predicted_report = predict_fractions(variant, args.n, args.b).unwrap();
    match args.format.as_str() {
        "json" => {
            let doc = serde_json::json!({
                "predicted_flops": predicted_counts,
                "measured_flops": measured_counts,
                "difference": difference,
                "predicted_report": predicted_report,
                "measured_report": report,
            });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
        }
        "text" => {
            println!("predicted:");
            println!("{predicted_report}");
            println!("measured:");
            println!("{report}");
            println!(
                "predicted == measured per class: {}",
                if mismatch { "NO" } else { "yes" }
            );
        }
        other => return usage_error(format!("unknown format: {other}")),
    }
    if mismatch {
        eprintln!("error: predicted and measured ledgers differ");
        return ExitCode::from(EXIT_FAIL);
    }
    ExitCode::from(EXIT_OK)
}

// ---------------------------------------------------------------------------
// reduce

fn hermitian_from_market(m: &MarketMatrix, name: &str) -> Result<MarketMatrix, String> {
    if m.rows() != m.cols() {
        return Err(format!("{name} must be square, got {}x{}", m.rows(), m.cols()));
    }
    // Validate conjugate symmetry of the materialized data.
    let tol = 1e-12;
    let ok = match m {
        MarketMatrix::Real(d) => is_hermitian(d, tol),
        MarketMatrix::Complex(d) => is_hermitian(d, tol),
    };
    if !ok {
        return Err(format!("{name} is not Hermitian"));
    }
    Ok(match m {
        MarketMatrix::Real(d) => MarketMatrix::Real(d.clone()),
        MarketMatrix::Complex(d) => MarketMatrix::Complex(d.clone()),
    })
}

fn is_hermitian<T: Scalar>(d: &DenseMatrix<T>, tol: f64) -> bool {
    let n = d.rows();
    let norm = d.frobenius_norm().max(1.0);
    let mut asym: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            asym += (d.at(i, j) - d.at(j, i).conj()).abs_sq();
        }
    }
    asym.sqrt() <= tol * norm
}

fn run_reduce<T: Scalar>(
    a: DenseMatrix<T>,
    b: DenseMatrix<T>,
    variant: TrsmVariant,
    block: usize,
    out: Option<&Path>,
    tolerance: Option<f64>,
) -> Result<(f64, f64), Error> {
    let a = HermitianMatrix::from_base(a)?;
    let b = HermitianMatrix::from_base(b)?;
    let result = pipeline::reduce(&a, &b, variant, block)?;
    let tol = match tolerance {
        Some(t) => t,
        None => {
            let kappa = oracle::condition_estimate_lower(&result.l)?;
            let n = a.dim().max(1) as f64;
            50.0 * n * f64::EPSILON * kappa * kappa
        }
    };
    if let Some(path) = out {
        market::write_hermitian_lower(path, &result.c)?;
    }
    Ok((result.residual, tol))
}

fn cmd_reduce(args: ReduceArgs) -> ExitCode {
    let variant = match TrsmVariant::parse(&args.variant) {
        Some(v) => v,
        None => return usage_error(format!("unknown variant: {}", args.variant)),
    };
    if args.b == 0 {
        return usage_error("block size must be at least 1");
    }

    let pair: Result<(MarketMatrix, MarketMatrix), ExitCode> = if let Some(n) = args.random {
        let seed = args.seed.or_else(env_seed).unwrap_or(1);
        let a = random_hermitian::<f64>(n, seed);
        let b = hegst::random::random_hpd::<f64>(n, seed + 1);
        Ok((
            MarketMatrix::Real(a.materialize()),
            MarketMatrix::Real(b.materialize()),
        ))
    } else {
        let (Some(pa), Some(pb)) = (&args.in_a, &args.in_b) else {
            return usage_error("provide --in-a and --in-b, or --random N");
        };
        let read = |p: &PathBuf| -> Result<MarketMatrix, ExitCode> {
            market::read_matrix_market(p).map_err(|e| usage_error(format!("{}: {e}", p.display())))
        };
        match (read(pa), read(pb)) {
            (Ok(a), Ok(b)) => Ok((a, b)),
            (Err(c), _) | (_, Err(c)) => Err(c),
        }
    };
    let (ma, mb) = match pair {
        Ok(p) => p,
        Err(code) => return code,
    };
    let ma = match hermitian_from_market(&ma, "A") {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    let mb = match hermitian_from_market(&mb, "B") {
        Ok(m) => m,
        Err(e) => return usage_error(e),
    };
    if ma.rows() != mb.rows() {
        return usage_error(format!("A is {0}x{0} but B is {1}x{1}", ma.rows(), mb.rows()));
    }

    let complex = matches!(ma, MarketMatrix::Complex(_)) || matches!(mb, MarketMatrix::Complex(_));
    let outcome = if complex {
        run_reduce::<Complex64>(
            ma.to_complex(),
            mb.to_complex(),
            variant,
            args.b,
            args.out.as_deref(),
            args.tolerance,
        )
    } else {
        let (MarketMatrix::Real(da), MarketMatrix::Real(db)) = (&ma, &mb) else {
            unreachable!()
        };
        run_reduce::<f64>(
            da.clone(),
            db.clone(),
            variant,
            args.b,
            args.out.as_deref(),
            args.tolerance,
        )
    };
    match outcome {
        Ok((residual, tol)) => {
            println!("residual {residual:e}");
            if residual <= tol {
                ExitCode::from(EXIT_OK)
            } else {
                eprintln!("error: residual {residual:e} exceeds tolerance {tol:e}");
                ExitCode::from(EXIT_FAIL)
            }
        }
        Err(Error::NotPositiveDefinite { index }) => {
            eprintln!("error: B is not positive definite (pivot at index {index})");
            ExitCode::from(EXIT_FAIL)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}

// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_config_round_trips_through_json() {
        let cfg = RunConfig {
            op: "trmm".into(),
            variants: vec!["m1".into(), "m2".into()],
            sizes: vec![5, 8],
            block_sizes: vec![2, 4],
            seeds: vec![7],
            field: "complex".into(),
            reps: 3,
            tolerance: 1e-9,
            check_invariants: true,
            strict: true,
            output: Some("out.csv".into()),
            format: "json".into(),
        };
        let json = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn variant_resolution() {
        let v = resolve_variants("trsm", &["all".to_string()]).unwrap();
        assert_eq!(v.len(), 5);
        let v = resolve_variants("trmm", &["m1".to_string()]).unwrap();
        assert_eq!(v[0].name(), "m1");
        assert!(resolve_variants("trsm", &["6".to_string()]).is_err());
        assert!(resolve_variants("qr", &["1".to_string()]).is_err());
    }

    #[test]
    fn bench_header_matches_contract() {
        assert_eq!(
            BENCH_CSV_HEADER,
            "op,variant,n,b,seed,rep,elapsed_seconds,gflops,frac_gemm,frac_hemm,frac_her2k,frac_herk,frac_trsm,frac_trmm,frac_chol,frac_base"
        );
    }
}
