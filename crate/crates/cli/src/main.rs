//! Batch front end: constants, orbits, shadowing, verification, stability.
//!
//! Exit codes: 0 PASS, 1 contract FAIL, 2 input error, 3 ε too large.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use quasishadow::{Error, SkewModel};

use commands::{dispatch, Run};
use manifest::{Inputs, Manifest, Params};

#[derive(Parser)]
#[command(name = "quasishadow", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print and save rates, transversality constants and the (ε, δ) choice.
    Constants(Opts),
    /// Generate a seeded δ-pseudo-orbit.
    Orbit(Opts),
    /// Quasi-shadow an orbit file and write the trace.
    Shadow(Opts),
    /// Check a trace file against its orbit file.
    Verify(Opts),
    /// Sample the semiconjugacy of a perturbed map on a grid.
    Stability(Opts),
    /// Run the plaque-expansiveness probe.
    Probe(Opts),
    /// Rerun a command from its manifest.
    Replay {
        manifest: PathBuf,
        /// Output directory; defaults to the manifest's directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Opts {
    /// Built-in model (`linear`, `default`) or a TOML model file.
    #[arg(long, default_value = "default")]
    model: String,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
    window: Option<Vec<i64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, num_args = 3, value_names = ["N1", "N2", "N3"])]
    grid: Option<Vec<usize>>,
    #[arg(long)]
    half_length: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Perturbation amplitude for `stability`.
    #[arg(long)]
    amplitude: Option<f64>,
    /// Orbit file; defaults to `orbit.txt` in the output directory.
    #[arg(long)]
    orbit: Option<PathBuf>,
    /// Trace file; defaults to `trace.txt` in the output directory.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

impl Opts {
    fn into_run(self, command: &str) -> Result<Run> {
        let model = SkewModel::resolve(&self.model)?;
        Ok(Run {
            command: command.to_string(),
            model,
            model_label: self.model,
            params: Params {
                epsilon: self.epsilon,
                delta: self.delta,
                window: self.window.map(|w| [w[0], w[1]]),
                seed: self.seed,
                grid: self.grid.map(|g| [g[0], g[1], g[2]]),
                half_length: self.half_length,
                eta: self.eta,
                trials: self.trials,
                amplitude: self.amplitude,
            },
            inputs: Inputs { orbit: self.orbit, trace: self.trace },
            out: self.out,
        })
    }
}

fn replay(path: PathBuf, out: Option<PathBuf>) -> Result<Run> {
    let m = Manifest::read(&path)?;
    let model = m.model.build().context("model in manifest")?;
    let out = out.unwrap_or_else(|| path.parent().map(PathBuf::from).unwrap_or_default());
    Ok(Run {
        command: m.command,
        model,
        model_label: m.model_label,
        params: m.params,
        inputs: m.inputs,
        out,
    })
}

fn build(cli: Cli) -> Result<Run> {
    match cli.command {
        Command::Constants(o) => o.into_run("constants"),
        Command::Orbit(o) => o.into_run("orbit"),
        Command::Shadow(o) => o.into_run("shadow"),
        Command::Verify(o) => o.into_run("verify"),
        Command::Stability(o) => o.into_run("stability"),
        Command::Probe(o) => o.into_run("probe"),
        Command::Replay { manifest, out } => replay(manifest, out),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let core = err.chain().find_map(|e| e.downcast_ref::<Error>());
    match core {
        Some(Error::Parameter(_)) => 3,
        Some(
            Error::Construction { .. }
            | Error::InsufficientWindow { .. }
            | Error::OutsideRadius { .. }
            | Error::LeafMembership { .. }
            | Error::Inversion(_),
        ) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match build(cli).and_then(|run| dispatch(&run)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
