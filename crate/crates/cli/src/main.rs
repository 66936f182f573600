//! `kforge`: run the synthesis loop over a problem set and report fast_p.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "kforge", version, about = "Iterative accelerator-kernel synthesis with profiling feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the refinement loop over a problem set.
    Run(Box<RunArgs>),
    /// Compute fast_p curves and per-problem results from a run directory.
    Report(ReportArgs),
    /// Show the problems available for a backend.
    Problems(ProblemsArgs),
    /// Export, check or preview prompt templates.
    Templates(TemplatesArgs),
    /// Write mock scripts or check an evaluation shim.
    Fixtures(FixturesArgs),
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    /// Run configuration file (TOML); flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Target backend: cuda or metal.
    #[arg(long)]
    pub backend: Option<String>,
    /// Problem set directory (holds manifest.toml).
    #[arg(long, value_name = "DIR")]
    pub problems: Option<PathBuf>,
    /// Only run this problem id; repeatable.
    #[arg(long = "problem", value_name = "ID")]
    pub problem_ids: Vec<String>,
    /// single-shot or iterative.
    #[arg(long)]
    pub mode: Option<String>,
    /// Generation budget per problem.
    #[arg(long, value_name = "N")]
    pub iterations: Option<u32>,
    /// Show a reference implementation from another backend.
    #[arg(long)]
    pub use_reference: bool,
    /// Reference corpus directory (holds index.json).
    #[arg(long, value_name = "DIR")]
    pub references: Option<PathBuf>,
    /// Feed profiler evidence through the analysis agent.
    #[arg(long)]
    pub use_profiling: bool,
    /// Generation model: PROVIDER or PROVIDER:MODEL_NAME.
    #[arg(long, value_name = "PROVIDER[:MODEL]")]
    pub model: Option<String>,
    /// Analysis model: PROVIDER or PROVIDER:MODEL_NAME.
    #[arg(long, value_name = "PROVIDER[:MODEL]")]
    pub analysis_model: Option<String>,
    /// Comma-separated device ids, e.g. 0,1,2,3.
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    pub devices: Option<Vec<String>>,
    /// Problems in flight at once (at most the number of devices).
    #[arg(long, value_name = "N")]
    pub parallelism: Option<usize>,
    /// Run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Resume the run with this id.
    #[arg(long, value_name = "RUN_ID")]
    pub resume: Option<String>,
    /// Directory holding run directories.
    #[arg(long, value_name = "DIR")]
    pub runs_dir: Option<PathBuf>,
    /// Executor: mock or shim.
    #[arg(long)]
    pub executor: Option<String>,
    /// Evaluation shim program, e.g. python3.
    #[arg(long, value_name = "PROGRAM")]
    pub shim: Option<PathBuf>,
    /// Argument passed to the shim before --request; repeatable.
    #[arg(long = "shim-arg", value_name = "ARG", allow_hyphen_values = true)]
    pub shim_args: Vec<String>,
    /// Mock executor script (JSON).
    #[arg(long, value_name = "FILE")]
    pub mock_executor_script: Option<PathBuf>,
    /// Mock generation-model script (JSON).
    #[arg(long, value_name = "FILE")]
    pub mock_generation_script: Option<PathBuf>,
    /// Mock analysis-model script (JSON).
    #[arg(long, value_name = "FILE")]
    pub mock_analysis_script: Option<PathBuf>,
    /// Print the effective configuration as TOML and exit.
    #[arg(long)]
    pub print_config: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ReportFormat {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Run directory.
    #[arg(long, value_name = "DIR")]
    pub run: PathBuf,
    /// Comma-separated speedup thresholds.
    #[arg(long, default_value = "0,0.5,1,1.5,2")]
    pub thresholds: String,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ReportFormat,
    /// Print per-problem best speedups (CSV) instead of curves.
    #[arg(long)]
    pub distribution: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ListFormat {
    Table,
    Json,
}

#[derive(Args, Debug)]
pub struct ProblemsArgs {
    /// Problem set directory (holds manifest.toml).
    #[arg(long, value_name = "DIR", default_value = "problems/kernelbench")]
    pub problems: PathBuf,
    /// Target backend: cuda or metal.
    #[arg(long, default_value = "cuda")]
    pub backend: String,
    #[arg(long, value_enum, default_value = "table")]
    pub format: ListFormat,
}

#[derive(Args, Debug)]
pub struct TemplatesArgs {
    #[command(subcommand)]
    pub action: TemplatesAction,
}

#[derive(Subcommand, Debug)]
pub enum TemplatesAction {
    /// Write the bundled templates into a directory.
    Export {
        #[arg(value_name = "DIR")]
        dir: PathBuf,
    },
    /// Validate the templates in a directory.
    Check {
        #[arg(value_name = "DIR")]
        dir: PathBuf,
    },
    /// Print the first generation prompt for one problem.
    Render {
        /// Problem id.
        #[arg(long = "problem", value_name = "ID")]
        problem_id: String,
        /// Problem set directory (holds manifest.toml).
        #[arg(long, value_name = "DIR", default_value = "problems/kernelbench")]
        problems: PathBuf,
        /// Target backend: cuda or metal.
        #[arg(long, default_value = "cuda")]
        backend: String,
        /// Template directory; the bundled templates when omitted.
        #[arg(long, value_name = "DIR")]
        templates: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct FixturesArgs {
    #[command(subcommand)]
    pub action: FixturesAction,
}

#[derive(Subcommand, Debug)]
pub enum FixturesAction {
    /// Write generation, analysis and executor scripts that replay STEPS.
    MockScripts {
        /// Comma-separated steps: none, compile, runtime, mismatch, infra,
        /// or a speedup for a correct program (e.g. "compile, 1.3, 1.6").
        #[arg(long)]
        steps: String,
        /// Directory for the scripts.
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Evaluate the bundled vector-add example through a shim.
    ShimCheck {
        /// Evaluation shim program, e.g. python3.
        #[arg(long, value_name = "PROGRAM")]
        shim: PathBuf,
        /// Argument passed to the shim before --request; repeatable.
        #[arg(long = "shim-arg", value_name = "ARG", allow_hyphen_values = true)]
        shim_args: Vec<String>,
        /// Target backend: cuda or metal.
        #[arg(long, default_value = "cuda")]
        backend: String,
        /// Device id handed to the shim.
        #[arg(long, default_value = "0")]
        device: String,
        /// Timed runs per side.
        #[arg(long, value_name = "N", default_value_t = 10)]
        timed_runs: u32,
        /// Time limit in seconds.
        #[arg(long, value_name = "SECONDS", default_value_t = 600.0)]
        timeout: f64,
        /// Where the request, sources and artifacts go.
        #[arg(long, value_name = "DIR")]
        work_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KFORGE_LOG", "info"))
        .format_timestamp_millis()
        .init();
    let result = match cli.command {
        Command::Run(a) => commands::run(*a),
        Command::Report(a) => commands::report(a),
        Command::Problems(a) => commands::problems(a),
        Command::Templates(a) => commands::templates(a),
        Command::Fixtures(a) => commands::fixtures(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
