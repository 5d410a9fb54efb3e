use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use consensus_privacy::experiment::{run_experiment, ExperimentKind, ExperimentSpec, ResultTable};
use consensus_privacy::Error;

mod report;

/// Privacy-preserving distributed average consensus simulator.
#[derive(Debug, Parser)]
#[command(name = "cpsim", version)]
struct Cli {
    /// Directory for CSV and gnuplot output.
    #[arg(long, global = true, env = "CPSIM_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Error trajectories of every mechanism under PDMM (or linear) iterations.
    Convergence(ExperimentArgs),
    /// DP utility, privacy and lower bound over a noise grid.
    Tradeoff(ExperimentArgs),
    /// SMPC and DOSP privacy on the bundled graph pair.
    Topology(ExperimentArgs),
    /// Estimator calibration and the noise-floor check.
    Calibrate(ExperimentArgs),
    /// Connectivity, weights, dual subspace and adversary-model checks for a graph.
    CheckGraph(report::GraphArgs),
    /// Mechanism comparison with closed-form values.
    Table1(report::Table1Args),
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// Spec file (`key = value` lines).
    #[arg(long, short)]
    spec: Option<PathBuf>,
    /// Monte-Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Noise grid: `0,1,100` or `log:1e-3:1e3:13`.
    #[arg(long)]
    sigma_sq: Option<String>,
    /// Iterations T.
    #[arg(long)]
    iterations: Option<usize>,
    /// Estimator neighbour count.
    #[arg(long)]
    k: Option<usize>,
    /// Run trials on one thread.
    #[arg(long)]
    sequential: bool,
    /// Any spec key, e.g. `--set corrupted=5,8`. Applied after the spec file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Lib(Error::Io(_)) => 1,
            Failure::Lib(e) if e.is_model_violation() => 3,
            Failure::Lib(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn resolve(kind: ExperimentKind, args: &ExperimentArgs) -> Result<ExperimentSpec, Failure> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Spec {
                line: 0,
                message: format!("cannot read {}: {e}", path.display()),
            })?;
            ExperimentSpec::parse(&text, Some(kind))?
        }
        None => ExperimentSpec::default_for(kind),
    };
    let mut set = |key: &str, value: &str| {
        spec.set(key, value).map_err(|e| Error::Spec { line: 0, message: format!("--{key}: {e}") })
    };
    for kv in &args.overrides {
        let (key, value) = kv
            .split_once('=')
            .ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        set(key.trim(), value.trim())?;
    }
    if let Some(v) = args.trials {
        set("trials", &v.to_string())?;
    }
    if let Some(v) = args.seed {
        set("seed", &v.to_string())?;
    }
    if let Some(v) = &args.sigma_sq {
        set("sigma_sq", v)?;
    }
    if let Some(v) = args.iterations {
        set("iterations", &v.to_string())?;
    }
    if let Some(v) = args.k {
        set("k", &v.to_string())?;
    }
    if args.sequential {
        set("parallel", "false")?;
    }
    spec.validate()?;
    Ok(spec)
}

fn file_stem(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Convergence => "convergence",
        ExperimentKind::DpTradeoff => "tradeoff",
        ExperimentKind::Topology => "topology",
        ExperimentKind::Calibration => "calibration",
    }
}

pub(crate) fn prepare_out_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("output directory {} is not writable: {e}", dir.display())))
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn summarize(table: &ResultTable) {
    println!("{:<20} {:<6} {:>10} {:<26} {:<9} value", "experiment", "mech", "sigma_sq", "metric", "method");
    for r in &table.rows {
        let keep = match r.t {
            Some(_) => false,
            None => !r.metric.ends_with("_se") && !r.metric.ends_with("_bits") && !r.metric.ends_with("_std"),
        };
        if keep {
            let sigma = r.sigma_sq.map(|s| format!("{s:.4e}")).unwrap_or_else(|| "-".into());
            println!("{:<20} {:<6} {:>10} {:<26} {:<9} {:.6}", r.experiment, r.mechanism, sigma, r.metric, r.method, r.value);
        }
    }
}

fn experiment(kind: ExperimentKind, args: &ExperimentArgs, out_dir: &Path) -> Result<(), Failure> {
    let spec = resolve(kind, args)?;
    prepare_out_dir(out_dir)?;
    println!("# resolved spec");
    for line in spec.to_text().lines() {
        println!("#   {line}");
    }
    let table = run_experiment(&spec)?;
    let stem = file_stem(kind);
    let csv = out_dir.join(format!("{stem}.csv"));
    let dat = out_dir.join(format!("{stem}.dat"));
    write_file(&csv, &table.to_csv())?;
    write_file(&dat, &table.to_gnuplot())?;
    summarize(&table);
    println!("# {} rows -> {} and {}", table.len(), csv.display(), dat.display());
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Convergence(a) => experiment(ExperimentKind::Convergence, a, &cli.out_dir),
        Command::Tradeoff(a) => experiment(ExperimentKind::DpTradeoff, a, &cli.out_dir),
        Command::Topology(a) => experiment(ExperimentKind::Topology, a, &cli.out_dir),
        Command::Calibrate(a) => experiment(ExperimentKind::Calibration, a, &cli.out_dir),
        Command::CheckGraph(a) => report::check_graph(a),
        Command::Table1(a) => report::table1(a, &cli.out_dir),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("cpsim: {f}");
            ExitCode::from(f.code())
        }
    }
}
