//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on runtime failure, 2 on usage errors
//! (bad flags, missing response column).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{bench_rmse, bench_time, BenchPlan, PlanKind};
use crate::container::{load_trace, save_trace};
use crate::data::{append_report, read_dataset, write_dataset, write_report, write_summary};
use crate::dgp::{gen_easy, gen_quadratic, gen_timing, DgpKind};
use crate::grid::GridScheme;
use crate::interface::{diagnostics, fit, predict, spread_points, Diagnostics, FitConfig, Trace};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// File names written by `fit` inside its output directory.
pub const TRACE_FILE: &str = "trace.bin";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const TEST_SUMMARY_FILE: &str = "test_summary.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.json";

#[derive(Debug, Parser)]
#[command(name = "bartforge", version, about = "Branchless BART sampler")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a forest to a CSV and write the trace and posterior summaries.
    Fit(FitArgs),
    /// Posterior summaries at new points from a saved trace.
    Predict(PredictArgs),
    /// Acceptance, leaf-count and cross-chain report of a saved trace.
    Diagnose(DiagnoseArgs),
    /// Write a synthetic dataset to CSV.
    Gen(GenArgs),
    /// Seconds per iteration over a size plan.
    BenchTime(BenchTimeArgs),
    /// Prediction error over a size plan.
    BenchRmse(BenchRmseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GridArg {
    Uniform,
    Midpoints,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlanArg {
    Low,
    HighP,
    HighTrees,
    HighBoth,
}

impl From<PlanArg> for PlanKind {
    fn from(p: PlanArg) -> Self {
        match p {
            PlanArg::Low => PlanKind::Low,
            PlanArg::HighP => PlanKind::HighP,
            PlanArg::HighTrees => PlanKind::HighTrees,
            PlanArg::HighBoth => PlanKind::HighBoth,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DgpArg {
    Timing,
    Easy,
    Quadratic,
}

impl From<DgpArg> for DgpKind {
    fn from(d: DgpArg) -> Self {
        match d {
            DgpArg::Timing => DgpKind::Timing,
            DgpArg::Easy => DgpKind::Easy,
            DgpArg::Quadratic => DgpKind::Quadratic,
        }
    }
}

#[derive(Debug, Args)]
struct ModelArgs {
    #[arg(long, default_value_t = 200)]
    ntree: usize,
    #[arg(long, default_value_t = 1000)]
    nburn: usize,
    #[arg(long, default_value_t = 1000)]
    nkept: usize,
    #[arg(long, default_value_t = 6)]
    depth: u8,
    #[arg(long, value_enum, default_value_t = GridArg::Uniform)]
    grid: GridArg,
    /// Cutpoints per axis of the uniform grid.
    #[arg(long, default_value_t = 100)]
    cutpoints: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    chains: usize,
}

impl ModelArgs {
    fn config(&self) -> FitConfig {
        FitConfig {
            n_trees: self.ntree,
            n_burn: self.nburn,
            n_kept: self.nkept,
            max_depth: self.depth,
            grid: match self.grid {
                GridArg::Uniform => GridScheme::Uniform(self.cutpoints),
                GridArg::Midpoints => GridScheme::Midpoints,
            },
            seed: self.seed,
            n_chains: self.chains,
            ..FitConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct FitArgs {
    #[arg(long)]
    train: PathBuf,
    /// Optional test predictors; a response column there is ignored.
    #[arg(long)]
    test: Option<PathBuf>,
    #[arg(long, default_value = "y")]
    response: String,
    #[command(flatten)]
    model: ModelArgs,
    /// Central interval level of the summaries.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Drop kept forests from the trace (disables `predict`).
    #[arg(long)]
    no_forests: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PredictArgs {
    #[arg(long)]
    trace: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Column of the test CSV to ignore, when present.
    #[arg(long, default_value = "y")]
    response: String,
    #[arg(long, default_value_t = 0.95)]
    level: f64,
    /// Summary CSV to write.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DiagnoseArgs {
    #[arg(long)]
    trace: PathBuf,
    /// Training rows compared across chains; defaults to 5 spread rows.
    #[arg(long, value_delimiter = ',')]
    points: Vec<usize>,
    /// JSON report path; printed to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    dgp: DgpArg,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlanArgs {
    #[arg(long, value_enum, default_value_t = PlanArg::Low)]
    plan: PlanArg,
    /// Training sizes of the plan.
    #[arg(long, value_delimiter = ',', default_value = "1024,2048,4096,8192,16384")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    depth: u8,
    #[arg(long, default_value_t = 100)]
    cutpoints: u8,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report CSV, appended to; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl PlanArgs {
    fn plan(&self) -> BenchPlan {
        BenchPlan {
            max_depth: self.depth,
            cutpoints: self.cutpoints,
            ..BenchPlan::new(self.plan.into(), &self.sizes)
        }
    }
}

#[derive(Debug, Args)]
struct BenchTimeArgs {
    #[command(flatten)]
    plan: PlanArgs,
    #[arg(long, default_value_t = 3)]
    warmup: usize,
    #[arg(long, default_value_t = 10)]
    measured: usize,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    /// Cells whose memory estimate exceeds this are skipped.
    #[arg(long, default_value_t = 4 << 30)]
    budget_bytes: usize,
}

#[derive(Debug, Args)]
struct BenchRmseArgs {
    #[command(flatten)]
    plan: PlanArgs,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "easy,quadratic")]
    dgp: Vec<DgpArg>,
    #[arg(long, default_value_t = 1000)]
    nburn: usize,
    #[arg(long, default_value_t = 1000)]
    nkept: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(&a),
        Command::Predict(a) => cmd_predict(&a),
        Command::Diagnose(a) => cmd_diagnose(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::BenchTime(a) => cmd_bench_time(&a),
        Command::BenchRmse(a) => cmd_bench_rmse(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("bartforge: {e}");
            match e {
                Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

fn cmd_fit(a: &FitArgs) -> Result<(), Error> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Error::Usage("--level must lie in (0, 1)".into()));
    }
    let train = read_dataset(&a.train, Some(&a.response))?;
    let y = train.y.clone().expect("response requested");
    let test = match &a.test {
        Some(p) => Some(read_test(p, &a.response)?),
        None => None,
    };
    let config = FitConfig {
        keep_forests: !a.no_forests,
        ..a.model.config()
    };
    let trace = fit(train.x.view(), &y, test.as_ref().map(|t| t.view()), &config)?;
    std::fs::create_dir_all(&a.out)?;
    save_trace(&a.out.join(TRACE_FILE), &trace)?;
    write_summary(&a.out.join(SUMMARY_FILE), &trace.train_prediction().summarize(a.level))?;
    if test.is_some() {
        write_summary(&a.out.join(TEST_SUMMARY_FILE), &trace.test_prediction()?.summarize(a.level))?;
    }
    let report = diagnostics(&trace, &spread_points(trace.n_train, 5))?;
    write_json(&a.out.join(DIAGNOSTICS_FILE), &report)?;
    print_diagnostics(&trace, &report);
    Ok(())
}

fn read_test(path: &Path, response: &str) -> Result<ndarray::Array2<f64>, Error> {
    match read_dataset(path, Some(response)) {
        Ok(d) => Ok(d.x),
        Err(Error::Usage(_)) => Ok(read_dataset(path, None)?.x),
        Err(e) => Err(e),
    }
}

fn cmd_predict(a: &PredictArgs) -> Result<(), Error> {
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(Error::Usage("--level must lie in (0, 1)".into()));
    }
    let trace = load_trace(&a.trace)?;
    let x = read_test(&a.test, &a.response)?;
    let prediction = predict(&trace, x.view())?;
    write_summary(&a.out, &prediction.summarize(a.level))
}

fn cmd_diagnose(a: &DiagnoseArgs) -> Result<(), Error> {
    let trace = load_trace(&a.trace)?;
    let points = if a.points.is_empty() {
        spread_points(trace.n_train, 5)
    } else {
        a.points.clone()
    };
    let report = diagnostics(&trace, &points)?;
    match &a.out {
        Some(p) => write_json(p, &report)?,
        None => println!("{}", serde_json::to_string_pretty(&report).map_err(|e| Error::Format(e.to_string()))?),
    }
    print_diagnostics(&trace, &report);
    Ok(())
}

fn write_json(path: &Path, report: &Diagnostics) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(report).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

fn print_diagnostics(trace: &Trace, d: &Diagnostics) {
    let worst_ks = d.cross_chain_ks.iter().copied().fold(0.0, f64::max);
    eprintln!(
        "chains={} draws={} acceptance={:.3} mean_leaves={:.2} max_cross_chain_ks={:.3}",
        trace.chains.len(),
        trace.n_draws(),
        d.acceptance_rate,
        d.mean_leaves,
        worst_ks
    );
    if d.too_many_leaves {
        eprintln!("warning: trees average more than 10 leaves; consider more trees");
    }
    if d.acceptance_collapse {
        eprintln!("warning: acceptance collapsed; the chain is likely stuck");
    }
}

fn cmd_gen(a: &GenArgs) -> Result<(), Error> {
    match a.dgp {
        DgpArg::Timing => {
            let (x, y) = gen_timing(a.n, a.p)?;
            write_dataset(&a.out, &x, &[("y", &y)])
        }
        DgpArg::Easy => {
            let d = gen_easy(a.n, a.p, a.seed)?;
            write_dataset(&a.out, &d.x, &[("y", &d.y), ("f", &d.f)])
        }
        DgpArg::Quadratic => {
            let (d, _) = gen_quadratic(a.n, 0, a.p, a.seed)?;
            write_dataset(&a.out, &d.x, &[("y", &d.y), ("f", &d.f)])
        }
    }
}

fn emit<T: serde::Serialize>(out: &Option<PathBuf>, rows: &[T]) -> Result<(), Error> {
    match out {
        Some(p) => append_report(p, rows),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_report(&mut lock, rows)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn cmd_bench_time(a: &BenchTimeArgs) -> Result<(), Error> {
    let plan = BenchPlan {
        warmup: a.warmup,
        measured: a.measured,
        repetitions: a.repetitions,
        ..a.plan.plan()
    };
    let result = bench_time(&plan, a.budget_bytes, a.plan.seed)?;
    for (cell, reason) in &result.skipped {
        eprintln!("skipped n={} p={} m={}: {reason}", cell.n, cell.p, cell.m);
    }
    emit(&a.plan.out, &result.rows)
}

fn cmd_bench_rmse(a: &BenchRmseArgs) -> Result<(), Error> {
    let plan = a.plan.plan();
    let base = FitConfig {
        n_burn: a.nburn,
        n_kept: a.nkept,
        n_chains: a.chains,
        seed: a.plan.seed,
        ..FitConfig::default()
    };
    let dgps: Vec<DgpKind> = a.dgp.iter().map(|&d| d.into()).collect();
    let rows = bench_rmse(&plan, &dgps, &base)?;
    emit(&a.plan.out, &rows)
}
