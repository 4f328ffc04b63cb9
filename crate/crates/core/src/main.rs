use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use folia::cli::{run, Command, Config, RunOptions};
use folia::Error;

/// Numerical experiments on foliated bundles over a genus-2 surface.
#[derive(Parser)]
#[command(name = "folia", version)]
struct Args {
    #[command(subcommand)]
    command: Sub,
    /// JSON config; fields left out take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for the report and grid files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Leave the wall time out of the report so runs compare byte for byte.
    #[arg(long, global = true)]
    no_timestamp: bool,
}

#[derive(Subcommand)]
enum Sub {
    /// Invariance, holomorphy, holonomy and leaf checks for the cone example.
    VerifyCone,
    /// Classify a linear representation by compactness or proximality.
    Classify {
        /// Representation JSON; defaults to the lattice acting on CP^1.
        rep: Option<PathBuf>,
    },
    /// Finite-difference checks of the Laplacian identity.
    LaplacianCheck,
    /// Action and orbit-limit checks on the space of bounded holomorphic maps.
    UniversalOrbit,
    /// CSV and PGM dumps of the cone function over the fundamental domain.
    LeafGrid,
}

fn load(args: &Args) -> Result<Config, Error> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            let (config, warnings) = Config::from_json(&text)?;
            for w in warnings {
                eprintln!("warning: {w}");
            }
            config
        }
        None => Config::default(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Sub::Classify { rep: Some(rep) } = &args.command {
        config.representation = Some(rep.clone());
    }
    Ok(config)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let command = match args.command {
        Sub::VerifyCone => Command::VerifyCone,
        Sub::Classify { .. } => Command::Classify,
        Sub::LaplacianCheck => Command::LaplacianCheck,
        Sub::UniversalOrbit => Command::UniversalOrbit,
        Sub::LeafGrid => Command::LeafGrid,
    };
    let opts = RunOptions {
        out: args.out.clone(),
        timestamp: !args.no_timestamp,
    };
    let result = load(&args).and_then(|config| run(command, &config, &opts));
    match result {
        Ok(report) => {
            print!("{}", report.to_json());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
