use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod config;

#[derive(Parser, Debug)]
#[command(name = "hboa", version, about = "hBOA with distance-based bias")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat key=value file with defaults for the subcommand's flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate problem instances.
    Gen(GenArgs),
    /// One hBOA run with a trace.
    Run(RunArgs),
    /// Bisect the population size for one instance.
    Bisect(BisectArgs),
    /// Build a bias table from model dumps.
    Harvest(HarvestArgs),
    /// Crossvalidated bias experiment.
    Xval(XvalArgs),
    /// Bias from one instance set applied to another.
    Transfer(TransferArgs),
    /// Aggregate report files into a summary.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FamilyArg {
    Sg,
    Mvc,
    Maxsat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum TimerArg {
    Off,
    Wall,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum HarvestArg {
    Final,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ModeArg {
    PerTarget,
    Pooled,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyParams {
    /// Number of bits; a perfect cube for spin glasses. Defaults to 27, 40
    /// and 30 bits for sg, mvc and maxsat.
    #[arg(long)]
    pub n: Option<usize>,
    /// Edges per vertex for vertex cover.
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    /// Rewiring probability for morphed MAXSAT.
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
}

#[derive(Args, Debug, Clone)]
pub struct AlgoArgs {
    #[arg(long)]
    pub max_iterations: Option<usize>,
    #[arg(long)]
    pub rts_window: Option<usize>,
    #[arg(long, default_value_t = 0.5)]
    pub offspring_fraction: f64,
    /// Rebuild the model structure only every ceil(sqrt(n)/2) iterations.
    #[arg(long, num_args = 0..=1, default_missing_value = "true", default_value_t = false)]
    pub sporadic: bool,
}

#[derive(Args, Debug, Clone)]
pub struct ExperimentArgs {
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    #[arg(long, default_value_t = 32)]
    pub start_population: usize,
    #[arg(long, default_value_t = 1 << 20)]
    pub max_population: usize,
    #[arg(long, default_value_t = 1.05)]
    pub tolerance: f64,
    #[arg(long, value_enum, default_value_t = TimerArg::Off)]
    pub timer: TimerArg,
    #[arg(long, default_value_t = hboa::bias::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = HarvestArg::All)]
    pub harvest: HarvestArg,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: FamilyArg,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub bias: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 100)]
    pub population: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// auto, oracle (exact only), none, or a fitness value.
    #[arg(long, default_value = "auto")]
    pub optimum: String,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the run's models to this file.
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = HarvestArg::All)]
    pub harvest: HarvestArg,
}

#[derive(Args, Debug)]
pub struct BisectArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub bias: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "auto")]
    pub optimum: String,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub exp: ExperimentArgs,
    /// Models of the successful runs at the chosen size.
    #[arg(long)]
    pub models: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HarvestArgs {
    /// Model dump files, paired in order with --instances.
    #[arg(long, required = true, num_args = 1..)]
    pub models: Vec<PathBuf>,
    #[arg(long, required = true, num_args = 1..)]
    pub instances: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = ModeArg::PerTarget)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = hboa::bias::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct XvalArgs {
    /// Directory of instance files; otherwise instances are generated.
    #[arg(long)]
    pub instances: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Mvc)]
    pub problem: FamilyArg,
    #[command(flatten)]
    pub params: FamilyParams,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 10)]
    pub folds: usize,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub kappa: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[arg(long, default_value = "report.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TransferArgs {
    #[arg(long)]
    pub source: Option<PathBuf>,
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FamilyArg::Mvc)]
    pub problem: FamilyArg,
    #[arg(long)]
    pub source_n: Option<usize>,
    #[arg(long)]
    pub target_n: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.1)]
    pub p: f64,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Pooled)]
    pub mode: ModeArg,
    #[arg(long, value_delimiter = ',', default_value = "5")]
    pub kappa: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub algo: AlgoArgs,
    #[command(flatten)]
    pub exp: ExperimentArgs,
    #[arg(long, default_value = "transfer.csv")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Errors the CLI reports, with their exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(hboa::Error),
}

impl From<hboa::Error> for CliError {
    fn from(e: hboa::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use hboa::Error::*;
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(OracleRefused(_)) => 4,
            CliError::Core(Io(_)) => 1,
            CliError::Core(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let mut args: Vec<String> = std::env::args().collect();
    if let Some(path) = config::take_config_flag(&mut args) {
        match config::load(path.as_ref()) {
            Ok(pairs) => args = config::splice(args, &pairs),
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Gen(a) => commands::gen(a),
        Command::Run(a) => commands::run(a),
        Command::Bisect(a) => commands::bisect(a),
        Command::Harvest(a) => commands::harvest(a),
        Command::Xval(a) => commands::xval(a),
        Command::Transfer(a) => commands::transfer(a),
        Command::Report(a) => commands::report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
