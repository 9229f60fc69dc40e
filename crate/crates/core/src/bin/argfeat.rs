use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use argfeat::cli::{cmd_analyze, cmd_experiment, cmd_synth, cmd_validate};
use argfeat::config::{KernelKind, Overrides, PipelineConfig};
use argfeat::evaluation::Averaging;
use argfeat::synth::SyntheticSpec;

const EXIT_RUNTIME: u8 = 1;
const EXIT_VALIDATION: u8 = 3;

#[derive(Parser)]
#[command(name = "argfeat", version, about = "Argument-based features for review helpfulness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus file and print per-type counts and agreement.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        merge_clauses: bool,
    },
    /// Generate a synthetic annotated corpus.
    Synth(SynthArgs),
    /// Cross-validate every feature configuration.
    Experiment(ExperimentArgs),
    /// Summarize selected argument features from manifest files or directories.
    Analyze {
        #[arg(required = true)]
        manifests: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// Output corpus file.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 400)]
    reviews: usize,
    #[arg(long, default_value_t = 0.8)]
    signal: f64,
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 4)]
    min_clauses: usize,
    #[arg(long, default_value_t = 10)]
    max_clauses: usize,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, value_enum)]
    kernel: Option<KernelArg>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    merge_clauses: bool,
    #[arg(long, value_enum)]
    averaging: Option<AveragingArg>,
    /// Comma-separated configurations, e.g. `STR,STR+AF`.
    #[arg(long, value_delimiter = ',')]
    configurations: Option<Vec<String>>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum KernelArg {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum AveragingArg {
    Weighted,
    Macro,
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<argfeat::Error> for Failure {
    fn from(e: argfeat::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { corpus, merge_clauses } => {
            let report = cmd_validate(&corpus, merge_clauses)?;
            println!("{report}");
            if !report.is_valid() {
                return Err(Failure::Validation(anyhow::anyhow!("{} is invalid", corpus.display())));
            }
        }
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                seed: a.seed,
                reviews: a.reviews,
                signal_strength: a.signal,
                annotator_noise: a.noise,
                min_clauses: a.min_clauses,
                max_clauses: a.max_clauses,
                ..SyntheticSpec::default()
            };
            let n = cmd_synth(&spec, &a.out)?;
            println!("wrote {n} reviews to {}", a.out.display());
        }
        Command::Experiment(a) => {
            let mut config = match &a.config {
                Some(p) => PipelineConfig::load(p).map_err(argfeat::Error::from)?,
                None => PipelineConfig::default(),
            };
            config.apply(&Overrides {
                corpus: a.corpus,
                seed: a.seed,
                folds: a.folds,
                kernel: a.kernel.map(|k| match k {
                    KernelArg::Linear => KernelKind::Linear,
                    KernelArg::Rbf => KernelKind::Rbf,
                }),
                c: a.c,
                gamma: a.gamma,
                merge_clauses: a.merge_clauses.then_some(true),
                averaging: a.averaging.map(|v| match v {
                    AveragingArg::Weighted => Averaging::Weighted,
                    AveragingArg::Macro => Averaging::Macro,
                }),
                configurations: a.configurations,
            });
            let report = cmd_experiment(&config, &a.out_dir)
                .map_err(Failure::from)
                .map_err(|f| match f {
                    Failure::Runtime(e) => Failure::Runtime(e.context("experiment failed")),
                    v => v,
                })?;
            print!("{}", report.to_table());
            println!("outputs written to {}", a.out_dir.display());
        }
        Command::Analyze { manifests } => {
            let report = cmd_analyze(&manifests)
                .map_err(|e| Failure::Runtime(anyhow::Error::from(e).context("cannot analyze manifests")))?;
            print!("{report}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_millis()
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
