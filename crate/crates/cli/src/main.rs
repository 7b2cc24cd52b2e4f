//! xsqueeze: generate and analyze strongly squeezed collective-spin states.
//!
//! Subcommands map onto the library pipeline: `extreme-state` solves the
//! variational target states, `optimize` searches pulse sequences that
//! prepare them, `sweep` drives the scaling studies, `ramsey` simulates the
//! interferometer readout, and `husimi` exports sphere plots. Every command
//! prints a JSON envelope (config echo, version, timing, payload) and is
//! deterministic for a fixed config and seed.

mod commands;
mod config;
mod envelope;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "xsqueeze", version, about = "Spin-squeezing toolkit")]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<std::path::PathBuf>,
    /// Write the JSON envelope here (atomically) in addition to stdout.
    #[arg(long, global = true)]
    out: Option<std::path::PathBuf>,
    /// Worker threads for sweep commands (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the optimal squeezed state at a given contrast.
    ExtremeState(ExtremeStateArgs),
    /// Optimize a pulse sequence toward an extreme-state target.
    Optimize(OptimizeArgs),
    /// Run a scaling sweep and export a CSV table.
    Sweep(SweepArgs),
    /// Simulate the Ramsey readout over a phase grid.
    Ramsey(RamseyArgs),
    /// Export a Husimi-Q grid for a chosen state.
    Husimi(HusimiArgs),
}

#[derive(Debug, Args)]
pub struct ExtremeStateArgs {
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long)]
    contrast: Option<f64>,
    /// Contrast tolerance of the ratio solve.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Husimi grid size NxM; triggers a CSV export alongside the envelope.
    #[arg(long)]
    husimi: Option<String>,
    /// CSV path for the Husimi grid (defaults next to --out).
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    atoms: Option<usize>,
    #[arg(long)]
    contrast: Option<f64>,
    #[arg(long)]
    pulses: Option<usize>,
    /// Fix the normalized shearing strength sqrt(N) sum Q_k to this value.
    #[arg(long)]
    q_tilde: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Directory for per-pulse Husimi snapshots.
    #[arg(long)]
    snapshots: Option<std::path::PathBuf>,
    /// Snapshot grid size NxM (default 64x128).
    #[arg(long)]
    husimi: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// extreme-scaling | oat-scaling | gain-vs-shear
    #[arg(long)]
    kind: Option<String>,
    /// Comma-separated atom numbers, e.g. 50,100,200,350.
    #[arg(long)]
    atoms: Option<String>,
    #[arg(long)]
    contrast: Option<f64>,
    #[arg(long)]
    pulses: Option<usize>,
    /// q-tilde grid: comma list or start:end:count.
    #[arg(long)]
    q_tilde: Option<String>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    /// CSV output path for the table.
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
    /// Reuse rows from an existing CSV, skipping completed (N, q~) keys.
    #[arg(long)]
    resume: bool,
}

#[derive(Debug, Args)]
pub struct RamseyArgs {
    #[arg(long)]
    atoms: Option<usize>,
    /// css | extreme | sequence
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    contrast: Option<f64>,
    #[arg(long)]
    pulses: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    /// Phase grid start:end:count (radians), default 0:3.14159:13.
    #[arg(long)]
    phases: Option<String>,
    /// Readout pulse axis: x | y.
    #[arg(long)]
    readout: Option<String>,
    /// Pre-free-evolution alignment rotation about x, radians.
    /// Default: -pi/2 for squeezed states (maps the squeezed z axis onto
    /// the measured quadrature), 0 for a coherent state.
    #[arg(long)]
    pre_rotation: Option<f64>,
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
pub struct HusimiArgs {
    #[arg(long)]
    atoms: Option<usize>,
    /// css | extreme | sequence
    #[arg(long)]
    state: Option<String>,
    #[arg(long)]
    contrast: Option<f64>,
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    pulses: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    /// Grid size NxM (default 64x128).
    #[arg(long)]
    husimi: Option<String>,
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
}

/// Failures are reported as one JSON object on stderr; the exit code
/// distinguishes bad parameters (2) from I/O trouble (1).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Io(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

impl From<xsqueeze_core::Error> for CliError {
    fn from(err: xsqueeze_core::Error) -> Self {
        CliError::Validation(err.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        // Sweeps fan out over rayon; everything else stays single-threaded.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    let file_config = match config::load(cli.config.as_deref()) {
        Ok(cfg) => cfg,
        Err(err) => return fail(err),
    };
    let result = match cli.command {
        Command::ExtremeState(args) => {
            commands::extreme_state(args, &file_config, cli.out.as_deref())
        }
        Command::Optimize(args) => commands::optimize(args, &file_config, cli.out.as_deref()),
        Command::Sweep(args) => commands::sweep(args, &file_config, cli.out.as_deref()),
        Command::Ramsey(args) => commands::ramsey(args, &file_config, cli.out.as_deref()),
        Command::Husimi(args) => commands::husimi(args, &file_config, cli.out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => fail(err),
    }
}

fn fail(err: CliError) -> ExitCode {
    eprintln!(
        "{}",
        serde_json::json!({ "error": { "kind": err.kind(), "message": err.message() } })
    );
    ExitCode::from(err.exit_code())
}
