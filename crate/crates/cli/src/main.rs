use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ruin_cli::figure::cmd_figure;
use ruin_cli::output::{emit, to_json};
use ruin_cli::simulate::cmd_simulate;
use ruin_cli::solve::cmd_solve;
use ruin_cli::sweep::{cmd_sweep, DEFAULT_PROBES};
use ruin_cli::{CliError, CliResult, Config};
use ruin_core::Regime;

/// Minimum probability of lifetime ruin under borrowing constraints.
#[derive(Parser)]
#[command(name = "ruin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one regime and write a JSON report.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// unconstrained, noborrow or borrow; overrides the configuration.
        #[arg(long)]
        regime: Option<Regime>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 512)]
        grid_points: usize,
    },
    /// Write the CSV table behind figure 1, 2, 3 or 4.
    Figure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        figure: u8,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 512)]
        grid_points: usize,
    },
    /// Monte Carlo estimate of the ruin probability, as JSON.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        regime: Option<Regime>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Diagnostics for each value of one parameter, as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// b, lambda, mu, sigma, c or p.
        #[arg(long)]
        parameter: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Wealth levels for the psi columns.
        #[arg(long, value_delimiter = ',')]
        probes: Option<Vec<f64>>,
        /// Defaults to the configuration's regime, else borrow.
        #[arg(long)]
        regime: Option<Regime>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Solve {
            config,
            regime,
            output,
            grid_points,
        } => {
            let cfg = Config::load(&config)?;
            let report = cmd_solve(&cfg, cfg.regime(regime)?, grid_points)?;
            emit(&to_json(&report)?, output.as_deref())
        }
        Command::Figure {
            config,
            figure,
            output,
            grid_points,
        } => {
            let cfg = Config::load(&config)?;
            emit(
                &cmd_figure(&cfg, figure, grid_points)?.to_csv(),
                output.as_deref(),
            )
        }
        Command::Simulate {
            config,
            regime,
            seed,
            output,
        } => {
            let cfg = Config::load(&config)?;
            let report = cmd_simulate(&cfg, cfg.regime(regime)?, seed)?;
            emit(&to_json(&report)?, output.as_deref())
        }
        Command::Sweep {
            config,
            parameter,
            values,
            probes,
            regime,
            output,
        } => {
            let cfg = Config::load(&config)?;
            let regime = match (regime, &cfg.regime) {
                (None, None) => Regime::Borrow,
                _ => cfg.regime(regime)?,
            };
            let probes = probes.unwrap_or_else(|| DEFAULT_PROBES.to_vec());
            let table = cmd_sweep(&cfg, regime, &parameter, &values, &probes)?;
            emit(&table.to_csv(), output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors share the configuration exit code.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &CliError) -> u8 {
    e.exit_code() as u8
}
