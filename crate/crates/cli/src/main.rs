use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use rvdp_cli::config::{parse_config, Command, RunConfig};
use rvdp_cli::run::{execute, exit, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Single oscillator (vdp, rayleigh, rvdp, homogeneous, stuart_landau)
    Ode,
    /// Discrete chain of coupled oscillators
    Chain,
    /// Explicit finite-difference solve of the field equation
    Pde,
    /// Linear oscillator network
    Network,
    /// Run the acceptance criteria
    Verify,
    /// Phase velocity over a list of coupling strengths
    Sweep,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Ode => Command::Ode,
            Cmd::Chain => Command::Chain,
            Cmd::Pde => Command::Pde,
            Cmd::Network => Command::Network,
            Cmd::Verify => Command::Verify,
            Cmd::Sweep => Command::Sweep,
        }
    }
}

/// Simulate the spatially extended Rayleigh-van der Pol oscillator.
#[derive(Debug, Parser)]
#[command(name = "rvdp", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Configuration file; defaults are used when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overrides `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Snapshot stride, overrides `output.stride`
    #[arg(long)]
    stride: Option<usize>,
    /// `section.key=value`, may be repeated
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load(args: &Args) -> Result<RunConfig, RunError> {
    let text = match &args.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?,
        None => String::new(),
    };
    let mut overrides = args.overrides.clone();
    if let Some(out) = &args.out {
        overrides.push(format!("output.dir={}", out.display()));
    }
    if let Some(stride) = args.stride {
        overrides.push(format!("output.stride={stride}"));
    }
    Ok(parse_config(&text, args.command.into(), &overrides)?)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = load(&args).and_then(|config| execute(&config));
    match result {
        Ok(outcome) => {
            println!("{}", outcome.report);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
