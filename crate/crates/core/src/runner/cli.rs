//! `kinsim generate|analyze|all`.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{ConfigLayer, PipelineConfig, Preset};
use super::{cmd_all, cmd_analyze, cmd_generate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "kinsim", version, about = "Kinship versus homophily network simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the population library and write run files plus manifest.
    Generate(Flags),
    /// Analyse a generated library and write the figure tables.
    Analyze(Flags),
    /// Generate, then analyse.
    All(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// TOML file with any of the flag names (underscored) as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    pop_size: Option<usize>,
    #[arg(long)]
    generations: Option<u32>,
    #[arg(long)]
    fertility_min: Option<f64>,
    #[arg(long)]
    fertility_max: Option<f64>,
    #[arg(long)]
    relative_cap: Option<usize>,
    #[arg(long)]
    total_cap: Option<usize>,
    /// Trait-distance bucket width in degrees for the surface tables.
    #[arg(long = "delta-bucket")]
    delta_bucket: Option<f64>,
    /// Pairs sampled per run for the regressions (0 = all pairs).
    #[arg(long)]
    pair_sample: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write r, a, c and the standardized network per run.
    #[arg(long)]
    dump_matrices: bool,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            runs: self.runs,
            pop_size: self.pop_size,
            generations: self.generations,
            fertility_min: self.fertility_min,
            fertility_max: self.fertility_max,
            seed: self.seed,
            relative_cap: self.relative_cap,
            total_cap: self.total_cap,
            delta_bucket: self.delta_bucket,
            pair_sample: self.pair_sample,
            workers: self.workers,
            out: self.out.clone(),
            dump_matrices: self.dump_matrices.then_some(true),
            ..ConfigLayer::default()
        }
    }

    fn resolve(&self) -> Result<PipelineConfig, super::RunnerError> {
        PipelineConfig::resolve(self.preset, self.config.as_deref(), &self.layer())
    }
}

type Action = fn(&PipelineConfig) -> Result<(), super::RunnerError>;

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let (flags, action): (&Flags, Action) = match &cli.command {
        Command::Generate(f) => (f, |c| cmd_generate(c).map(|m| {
            eprintln!("generated {} runs in {}", m.runs.len(), c.out.display());
        })),
        Command::Analyze(f) => (f, |c| cmd_analyze(c).map(|_| {
            eprintln!("wrote figure tables to {}", c.out.display());
        })),
        Command::All(f) => (f, |c| cmd_all(c).map(|_| {
            eprintln!("wrote library and figure tables to {}", c.out.display());
        })),
    };
    let config = match flags.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("kinsim: {e}");
            return EXIT_USAGE;
        }
    };
    match action(&config) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("kinsim: {e}");
            EXIT_RUNTIME
        }
    }
}
