//! Command-line driver: Gram-matrix computation, classification
//! experiments, numerical verification and scaling benchmarks.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use ndarray::Array2;
use sha2::{Digest, Sha256};

use matchkernel::circuit::{build_ansatz, AnsatzKind};
use matchkernel::data::{load_csv, minmax_scale, Dataset, LabelColumn, ScalingRecord};
use matchkernel::error::Error;
use matchkernel::gram::{gram_matrix, GramHeader};
use matchkernel::oracle::MAX_STATE_QUBITS;
use matchkernel::svm::{
    cross_validate, one_vs_rest, predict_multiclass, stratified_folds, ExperimentResult,
    FoldResult, ResultMeta, SvmParams,
};
use matchkernel::verify::{run_verification, FaultInjection, VerifyConfig};

const EXIT_CONFIG: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "matchkernel",
    version,
    about = "Matchgate-circuit kernel simulator and SVM experiment runner"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a Gram matrix over a dataset and write CSV plus a JSON header.
    Kernel(KernelArgs),
    /// Run kernel-SVM cross-validation experiments over (ansatz, qubits, seed) grids.
    Classify(ClassifyArgs),
    /// Run the randomized differential verification suite.
    Verify(VerifyArgs),
    /// Measure kernel-evaluation runtime scaling against qubit count.
    Bench(BenchArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset CSV path, or a name resolved as data/<name>.csv.
    #[arg(long)]
    dataset: String,
    /// Label column: header name or 0-based index.
    #[arg(long, default_value = "label")]
    label_col: String,
    /// Treat the first row as data, not a header.
    #[arg(long)]
    no_header: bool,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Ansatz kind (fpqc, hfpqc, tensor-fpqc, pqc, tensor-pqc).
    #[arg(long, default_value = "fpqc")]
    ansatz: String,
    /// Qubit count.
    #[arg(long)]
    qubits: usize,
    /// Encoding seed.
    #[arg(long, default_value_t = 42)]
    seeds: u64,
    /// Output CSV path; a .meta.json header is written next to it.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated ansatz kinds.
    #[arg(long, default_value = "fpqc")]
    ansatz: String,
    /// Comma list or dash range of qubit counts, e.g. "8,16" or "2-6".
    #[arg(long, default_value = "8")]
    qubits: String,
    /// Comma list or dash range of seeds.
    #[arg(long, default_value = "42")]
    seeds: String,
    /// Cross-validation folds.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    /// SVM regularization constant.
    #[arg(long, default_value_t = 1.0)]
    c_reg: f64,
    /// Scale features inside each fold (train statistics only) instead of
    /// once over the full dataset.
    #[arg(long)]
    scale_per_fold: bool,
    /// Results file (JSON lines, appended).
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    threads: Option<usize>,
    /// Truncate the results file before writing.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Largest qubit count exercised (at most 8).
    #[arg(long, default_value_t = 6)]
    max_qubits: usize,
    /// Trials per category.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma list or dash range of qubit counts.
    #[arg(long, default_value = "8,16,32,64")]
    qubits: String,
    /// Kernel evaluations per qubit count; the median is reported.
    #[arg(long, default_value_t = 9)]
    repeats: usize,
    /// Ansatz kind.
    #[arg(long, default_value = "fpqc")]
    ansatz: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Optional timing CSV output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_CONFIG);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let outcome = match cli.command {
        Command::Kernel(args) => cmd_kernel(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(e: &Error) -> u8 {
    match e {
        Error::Csv(_)
        | Error::CsvCell { .. }
        | Error::Io(_)
        | Error::Empty { .. }
        | Error::ClassSmallerThanFolds { .. } => EXIT_DATA,
        Error::ProbabilityRange { .. }
        | Error::ImaginaryResidue { .. }
        | Error::NotOrthogonal { .. }
        | Error::NotSkewSymmetric { .. }
        | Error::VerificationFailed { .. } => EXIT_NUMERICAL,
        _ => EXIT_CONFIG,
    }
}

fn configure_threads(threads: Option<usize>) -> Result<(), Error> {
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

/// Parses "4,8,16" or "2-6" (inclusive) into a list.
fn parse_u64_list(s: &str) -> Result<Vec<u64>, Error> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        if let Some((lo, hi)) = part.split_once('-') {
            let lo: u64 = lo
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad range start `{lo}`")))?;
            let hi: u64 = hi
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("bad range end `{hi}`")))?;
            if hi < lo {
                return Err(Error::Config(format!("empty range `{part}`")));
            }
            out.extend(lo..=hi);
        } else {
            out.push(
                part.parse()
                    .map_err(|_| Error::Config(format!("bad number `{part}`")))?,
            );
        }
    }
    if out.is_empty() {
        return Err(Error::Config(format!("empty list `{s}`")));
    }
    Ok(out)
}

fn parse_kinds(s: &str) -> Result<Vec<AnsatzKind>, Error> {
    s.split(',')
        .map(|p| AnsatzKind::from_str(p.trim()))
        .collect()
}

fn resolve_dataset(name: &str) -> PathBuf {
    let direct = Path::new(name);
    if direct.exists() {
        return direct.to_path_buf();
    }
    Path::new("data").join(format!("{name}.csv"))
}

fn load_scaled(args: &DataArgs) -> Result<(Dataset, PathBuf), Error> {
    let path = resolve_dataset(&args.dataset);
    let label = LabelColumn::parse(&args.label_col);
    let raw = load_csv(&path, &label, !args.no_header)?;
    let (scaled, _) = minmax_scale(&raw)?;
    Ok((scaled, path))
}

fn validate_kind_width(kind: AnsatzKind, n: usize) -> Result<(), Error> {
    if n < 2 {
        return Err(Error::TooFewQubits { n, min: 2 });
    }
    if !kind.is_fermionic() && kind != AnsatzKind::TensorPqc && n > MAX_STATE_QUBITS {
        return Err(Error::TooManyQubits {
            what: "statevector-backed ansatz",
            n,
            max: MAX_STATE_QUBITS,
        });
    }
    Ok(())
}

fn file_sha256(path: &Path) -> Result<String, Error> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(format!("{:x}", hasher.finalize()))
}

fn guard_overwrite(path: &Path, overwrite: bool) -> Result<(), Error> {
    if path.exists() && !overwrite {
        return Err(Error::Config(format!(
            "{} exists; pass --overwrite to replace it",
            path.display()
        )));
    }
    Ok(())
}

fn cmd_kernel(args: KernelArgs) -> Result<ExitCode, Error> {
    configure_threads(args.threads)?;
    let kind = AnsatzKind::from_str(&args.ansatz)?;
    validate_kind_width(kind, args.qubits)?;
    guard_overwrite(&args.out, args.overwrite)?;

    let (ds, path) = load_scaled(&args.data)?;
    let (spec, params) = build_ansatz(args.qubits, ds.feature_count(), kind, args.seeds)?;
    let gram = gram_matrix(&spec, &params, &ds.features.view())?;

    let mut file = std::fs::File::create(&args.out)?;
    gram.write_csv(&mut file)?;
    file.flush()?;

    let header = GramHeader {
        n_qubits: args.qubits,
        ansatz: kind.name().to_string(),
        seed: args.seeds,
        dataset_hash: file_sha256(&path)?,
        size: gram.len(),
    };
    let meta_path = args.out.with_extension("meta.json");
    guard_overwrite(&meta_path, args.overwrite)?;
    std::fs::write(
        &meta_path,
        serde_json::to_string_pretty(&header).expect("header serializes") + "\n",
    )?;
    println!(
        "wrote {} ({}x{}) and {}",
        args.out.display(),
        gram.len(),
        gram.len(),
        meta_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

/// Cross-validation with per-fold scaling: statistics come from the train
/// rows only, then the kernel blocks for that fold are computed on the
/// rescaled features.
fn cross_validate_per_fold_scaling(
    kind: AnsatzKind,
    n_qubits: usize,
    seed: u64,
    ds: &Dataset,
    folds: usize,
    svm_params: &SvmParams,
    meta: &ResultMeta,
) -> Result<ExperimentResult, Error> {
    let started = std::time::Instant::now();
    let assignment = stratified_folds(&ds.labels, folds, seed)?;
    let n = ds.samples();
    let mut per_fold = Vec::with_capacity(folds);
    for test_idx in &assignment {
        let train_idx: Vec<usize> = (0..n).filter(|i| !test_idx.contains(i)).collect();
        let record = ScalingRecord::from_rows(&ds.features.view(), &train_idx);
        let rescaled = record.apply(&ds.features.view());
        let (spec, params) = build_ansatz(n_qubits, ds.feature_count(), kind, seed)?;
        let gram = gram_matrix(&spec, &params, &rescaled.view())?;
        let k = gram.values();

        let slice = |rows: &[usize], cols: &[usize]| {
            Array2::from_shape_fn((rows.len(), cols.len()), |(a, b)| k[(rows[a], cols[b])])
        };
        let y_train: Vec<usize> = train_idx.iter().map(|&i| ds.labels[i]).collect();
        let y_test: Vec<usize> = test_idx.iter().map(|&i| ds.labels[i]).collect();
        let k_train = slice(&train_idx, &train_idx);
        let model = one_vs_rest(&k_train.view(), &y_train, ds.classes, svm_params)?;
        let pred_train = predict_multiclass(&model, &k_train.view())?;
        let k_cross = slice(test_idx, &train_idx);
        let pred_test = predict_multiclass(&model, &k_cross.view())?;
        let acc = |pred: &[usize], truth: &[usize]| {
            pred.iter().zip(truth).filter(|(p, t)| p == t).count() as f64 / truth.len() as f64
        };
        per_fold.push(FoldResult {
            train_acc: acc(&pred_train, &y_train),
            test_acc: acc(&pred_test, &y_test),
        });
    }
    let mean = |it: &dyn Fn(&FoldResult) -> f64| {
        per_fold.iter().map(|f| it(f)).sum::<f64>() / per_fold.len() as f64
    };
    let std = |m: f64, it: &dyn Fn(&FoldResult) -> f64| {
        (per_fold.iter().map(|f| (it(f) - m).powi(2)).sum::<f64>() / per_fold.len() as f64).sqrt()
    };
    let mean_test = mean(&|f: &FoldResult| f.test_acc);
    let mean_train = mean(&|f: &FoldResult| f.train_acc);
    Ok(ExperimentResult {
        ansatz: meta.ansatz.clone(),
        n_qubits: meta.n_qubits,
        seed: meta.seed,
        dataset: meta.dataset.clone(),
        c: svm_params.c,
        folds,
        std_test: std(mean_test, &|f: &FoldResult| f.test_acc),
        std_train: std(mean_train, &|f: &FoldResult| f.train_acc),
        per_fold,
        mean_test,
        mean_train,
        wall_time_s: started.elapsed().as_secs_f64(),
    })
}

fn cmd_classify(args: ClassifyArgs) -> Result<ExitCode, Error> {
    configure_threads(args.threads)?;
    let kinds = parse_kinds(&args.ansatz)?;
    let qubit_list: Vec<usize> = parse_u64_list(&args.qubits)?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    let seeds = parse_u64_list(&args.seeds)?;
    for &kind in &kinds {
        for &n in &qubit_list {
            validate_kind_width(kind, n)?;
        }
    }
    if args.folds < 2 {
        return Err(Error::Config("need at least 2 folds".into()));
    }

    let (ds, _) = load_scaled(&args.data)?;
    let svm_params = SvmParams {
        c: args.c_reg,
        ..Default::default()
    };

    if args.overwrite && args.out.exists() {
        std::fs::remove_file(&args.out)?;
    }
    let mut out = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(&args.out)?;

    let mut results: Vec<ExperimentResult> = Vec::new();
    for &kind in &kinds {
        for &n in &qubit_list {
            for &seed in &seeds {
                let meta = ResultMeta {
                    ansatz: kind.name().to_string(),
                    n_qubits: n,
                    seed,
                    dataset: ds.name.clone(),
                };
                let result = if args.scale_per_fold {
                    cross_validate_per_fold_scaling(
                        kind,
                        n,
                        seed,
                        &ds,
                        args.folds,
                        &svm_params,
                        &meta,
                    )?
                } else {
                    let (spec, params) = build_ansatz(n, ds.feature_count(), kind, seed)?;
                    let gram = gram_matrix(&spec, &params, &ds.features.view())?;
                    cross_validate(&gram, &ds.labels, args.folds, seed, &svm_params, &meta)?
                };
                writeln!(
                    out,
                    "{}",
                    serde_json::to_string(&result).expect("result serializes")
                )?;
                println!(
                    "{} N={:<3} seed={:<4} test {:.4} +/- {:.4}  train {:.4}",
                    kind.name(),
                    n,
                    seed,
                    result.mean_test,
                    result.std_test,
                    result.mean_train
                );
                results.push(result);
            }
        }
    }
    out.flush()?;
    print_summary(&results);
    Ok(ExitCode::SUCCESS)
}

fn print_summary(results: &[ExperimentResult]) {
    println!("\nsummary (mean over seeds):");
    println!("{:<14} {:>6} {:>12} {:>12} {:>10}", "ansatz", "qubits", "test", "std", "gap");
    let mut keys: Vec<(String, usize)> = results
        .iter()
        .map(|r| (r.ansatz.clone(), r.n_qubits))
        .collect();
    keys.sort();
    keys.dedup();
    for (ansatz, n) in keys {
        let group: Vec<&ExperimentResult> = results
            .iter()
            .filter(|r| r.ansatz == ansatz && r.n_qubits == n)
            .collect();
        let mean: f64 = group.iter().map(|r| r.mean_test).sum::<f64>() / group.len() as f64;
        let std: f64 = (group
            .iter()
            .map(|r| (r.mean_test - mean).powi(2))
            .sum::<f64>()
            / group.len() as f64)
            .sqrt();
        let gap: f64 = group
            .iter()
            .map(|r| r.mean_train - r.mean_test)
            .sum::<f64>()
            / group.len() as f64;
        println!("{ansatz:<14} {n:>6} {mean:>12.4} {std:>12.4} {gap:>10.4}");
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    if args.max_qubits > 8 {
        return Err(Error::Config(format!(
            "verify supports at most 8 qubits, got {}",
            args.max_qubits
        )));
    }
    if args.max_qubits < 2 {
        return Err(Error::Config("verify needs at least 2 qubits".into()));
    }
    let cfg = VerifyConfig {
        max_qubits: args.max_qubits,
        trials: args.trials,
        seed: args.seed,
    };
    let report = run_verification(&cfg, FaultInjection::None)?;
    if report.vacuous {
        println!("warning: 0 trials requested; verification is vacuous");
        return Ok(ExitCode::SUCCESS);
    }
    for cat in &report.categories {
        println!(
            "{:<14} trials={:<5} max_dev={:.3e} tol={:.1e} {}",
            cat.name,
            cat.trials,
            cat.max_deviation,
            cat.tolerance,
            if cat.passed { "PASS" } else { "FAIL" }
        );
        if let Some(case) = &cat.failing_case {
            println!("  smallest failing case: {case}");
        }
    }
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        Err(Error::VerificationFailed {
            category: report
                .categories
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name.clone())
                .collect::<Vec<_>>()
                .join(","),
            detail: "deviation exceeded tolerance; see the failing case above".into(),
        })
    }
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    values[values.len() / 2]
}

fn cmd_bench(args: BenchArgs) -> Result<ExitCode, Error> {
    let kind = AnsatzKind::from_str(&args.ansatz)?;
    let qubit_list: Vec<usize> = parse_u64_list(&args.qubits)?
        .into_iter()
        .map(|v| v as usize)
        .collect();
    for &n in &qubit_list {
        validate_kind_width(kind, n)?;
    }
    if args.repeats == 0 {
        return Err(Error::Config("--repeats must be at least 1".into()));
    }

    let mut rows = Vec::new();
    println!(
        "{:>6} {:>16} {:>16}",
        "qubits", "kernel_median_s", "gram_row_s"
    );
    for &n in &qubit_list {
        let chi = n;
        let (spec, params) = build_ansatz(n, chi, kind, args.seed)?;
        let x: Vec<f64> = (0..chi).map(|i| (0.37 * i as f64) % 1.0).collect();
        let y: Vec<f64> = (0..chi).map(|i| (0.71 * i as f64 + 0.1) % 1.0).collect();
        // Warm-up evaluation, then timed repeats.
        let _ = matchkernel::kernel_value(&spec, &params, &x, &y)?;
        let mut times = Vec::with_capacity(args.repeats);
        for _ in 0..args.repeats {
            let start = std::time::Instant::now();
            let _ = matchkernel::kernel_value(&spec, &params, &x, &y)?;
            times.push(start.elapsed().as_secs_f64());
        }
        let kernel_s = median(times);

        // One Gram row against a fixed batch of points.
        let row_points = 32;
        let data = Array2::from_shape_fn((row_points, chi), |(i, j)| {
            ((i + 1) as f64 * 0.13 + j as f64 * 0.29) % 1.0
        });
        let start = std::time::Instant::now();
        let (spec_row, params_row) = build_ansatz(n, chi, kind, args.seed)?;
        let _ = gram_matrix(&spec_row, &params_row, &data.view())?;
        let row_s = start.elapsed().as_secs_f64() / row_points as f64;

        println!("{n:>6} {kernel_s:>16.6e} {row_s:>16.6e}");
        rows.push((n, kernel_s, row_s));
    }

    // Least-squares power-law fit t = a * N^b on the kernel medians.
    let exponent = if rows.len() >= 2 {
        let logs: Vec<(f64, f64)> = rows
            .iter()
            .map(|&(n, t, _)| ((n as f64).ln(), t.ln()))
            .collect();
        let count = logs.len() as f64;
        let sx: f64 = logs.iter().map(|p| p.0).sum();
        let sy: f64 = logs.iter().map(|p| p.1).sum();
        let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
        let b = (count * sxy - sx * sy) / (count * sxx - sx * sx);
        println!("fitted runtime exponent b = {b:.3}");
        Some(b)
    } else {
        None
    };

    if let Some(out) = &args.out {
        let mut file = std::fs::File::create(out)?;
        writeln!(file, "qubits,kernel_median_s,gram_row_s")?;
        for (n, k, r) in &rows {
            writeln!(file, "{n},{k:.9e},{r:.9e}")?;
        }
        if let Some(b) = exponent {
            writeln!(file, "# fitted_exponent,{b:.6}")?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
