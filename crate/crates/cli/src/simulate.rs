//! `simulate`: Monte Carlo estimate against the analytic ruin probability.

use ruin_core::simulator::{simulate, OptimalStrategy, SimConfig, SimResult};
use ruin_core::Regime;
use serde::{Deserialize, Serialize};

use crate::solve::SolveReport;
use crate::{CliError, CliResult, Config};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub regime: Regime,
    pub config: SimConfig,
    /// `optimal`, or the path of the strategy table that was used.
    pub strategy: String,
    pub result: SimResult,
    pub analytic_psi: f64,
    /// `(estimate - analytic) / std_error`; zero when the estimate has no variance.
    pub z_score: f64,
}

pub fn cmd_simulate(
    config: &Config,
    regime: Regime,
    seed: Option<u64>,
) -> CliResult<SimulationReport> {
    let section = config
        .simulation
        .as_ref()
        .ok_or_else(|| CliError::Config("configuration has no \"simulation\" block".into()))?;
    let mut sim = section.config;
    if let Some(s) = seed {
        sim.seed = s;
    }
    let model = config.model(regime)?;
    sim.validate(model.params().lambda)?;
    let optimal = OptimalStrategy::solve(&model)?;
    let (result, strategy) = match &section.strategy {
        None => (simulate(&model, &optimal, &sim)?, "optimal".to_string()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("cannot read strategy {}: {e}", path.display()))
            })?;
            let report: SolveReport = serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("invalid strategy report {}: {e}", path.display()))
            })?;
            let table = report.grid.strategy_table()?;
            (simulate(&model, &table, &sim)?, path.display().to_string())
        }
    };
    let analytic_psi = optimal.psi(sim.w_start)?;
    let diff = result.ruin_probability - analytic_psi;
    Ok(SimulationReport {
        regime,
        config: sim,
        strategy,
        result,
        analytic_psi,
        z_score: if result.std_error > 0.0 {
            diff / result.std_error
        } else {
            0.0
        },
    })
}
