use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use qid_cli::{
    execute, parse_complex, parse_dim_range, Experiment, ExperimentConfig, Format, InputSpec, DEFAULT_GRID,
    DEFAULT_XI, OUTPUT_DIR_ENV,
};

#[derive(Parser)]
#[command(name = "qid", version, about = "Quantum information distributor experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for every random draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file. Defaults to $QID_OUTPUT_DIR/<command>.<format>, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json.
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetric cloner fidelity across dimensions.
    Clone {
        /// Inclusive range A:B.
        #[arg(long, default_value = "2:16", value_parser = parse_dim_range)]
        dim_range: (usize, usize),
        #[command(flatten)]
        common: Common,
    },
    /// Simulate the distributor for one input and program.
    Distribute {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        alpha: f64,
        /// random:<seed>, or comma-separated amplitudes (complex as re:im).
        #[arg(long, default_value = "random:0")]
        input: InputSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Covariance under shifts of the input.
    Covariance {
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Continuous-variable distributor on a vacuum input.
    Cv {
        /// Comma-separated squeezing values.
        #[arg(long, value_delimiter = ',')]
        xi: Vec<f64>,
        /// Retain amplitude; symmetric when omitted.
        #[arg(long)]
        alpha: Option<f64>,
        /// Grid points per axis.
        #[arg(long, default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Gaussian coherent-state cloner.
    CoherentClone {
        /// Input displacements as re:im, comma-separated.
        #[arg(long, value_delimiter = ',', default_value = "0:0,1.5:-0.5,3:4", value_parser = parse_complex)]
        z: Vec<Complex64>,
        #[command(flatten)]
        common: Common,
    },
}

fn config(command: Command) -> ExperimentConfig {
    let (experiment, common) = match command {
        Command::Clone { dim_range, common } => (Experiment::Clone { dims: dim_range }, common),
        Command::Distribute { dim, alpha, input, common } => (Experiment::Distribute { dim, alpha, input }, common),
        Command::Covariance { dim, trials, common } => (Experiment::Covariance { dim, trials }, common),
        Command::Cv { xi, alpha, grid, common } => {
            let xi = if xi.is_empty() { DEFAULT_XI.to_vec() } else { xi };
            (Experiment::Cv { xi, alpha, grid }, common)
        }
        Command::CoherentClone { z, common } => (Experiment::CoherentClone { displacements: z }, common),
    };
    ExperimentConfig { experiment, seed: common.seed, out: common.out, format: common.format }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = config(cli.command);
    match execute(&config) {
        Ok(outcome) if outcome.passed() => ExitCode::SUCCESS,
        Ok(outcome) => {
            for failure in &outcome.failures {
                eprintln!("check failed: {failure}");
            }
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            if std::env::var_os(OUTPUT_DIR_ENV).is_some() && config.out.is_none() {
                eprintln!("(output directory taken from {OUTPUT_DIR_ENV})");
            }
            ExitCode::from(2)
        }
    }
}
