//! `solve`: boundaries, constants and the sampled solution for one regime.

use ruin_core::assembler::Region;
use ruin_core::closedform::{solve_proportional, PowerCase};
use ruin_core::simulator::StrategyTable;
use ruin_core::{solve, ConsumptionSpec, MarketParams, Model, Regime, RuinSolution};
use serde::{Deserialize, Serialize};

use crate::{CliError, CliResult, Config};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub regime: Regime,
    pub params: MarketParams,
    pub consumption: ConsumptionSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundaries: Option<Boundaries>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerSummary>,
    pub grid: Grid,
}

/// Constant-consumption structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub d: f64,
    pub x: f64,
    pub w_l: f64,
    pub safe_level: f64,
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w_mu: Option<f64>,
    pub regions: Vec<Region>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualSummary {
    pub b1: f64,
    pub b2: f64,
    pub v0: f64,
    pub vb: f64,
    pub rho: f64,
    pub leverage_at_zero: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSummary {
    pub exponent: f64,
    pub w0: f64,
    pub investment_fraction: f64,
    pub case: PowerCase,
}

/// `psi` and `pistar` sampled on a uniform wealth grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub wealth: Vec<f64>,
    pub psi: Vec<f64>,
    pub pistar: Vec<f64>,
}

impl Grid {
    pub fn strategy_table(&self) -> CliResult<StrategyTable> {
        StrategyTable::from_samples(self.wealth.clone(), self.pistar.clone())
            .map_err(|e| CliError::Config(format!("unusable strategy table: {e}")))
    }
}

/// `n` uniform points over `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Upper end of the reported grid for proportional consumption, in units of `w0`.
const POWER_GRID_SPAN: f64 = 20.0;

pub fn cmd_solve(config: &Config, regime: Regime, grid_points: usize) -> CliResult<SolveReport> {
    let model = config.model(regime)?;
    match *model.consumption() {
        ConsumptionSpec::Constant { .. } => {
            let sol = solve(&model)?;
            constant_report(&model, &sol, grid_points)
        }
        ConsumptionSpec::Proportional { w0, .. } => {
            let sol = solve_proportional(&model)?;
            let wealth = uniform_grid(w0, POWER_GRID_SPAN * w0, grid_points);
            Ok(SolveReport {
                regime,
                params: *model.params(),
                consumption: *model.consumption(),
                boundaries: None,
                dual: None,
                power: Some(PowerSummary {
                    exponent: sol.exponent,
                    w0: sol.w0,
                    investment_fraction: sol.investment_fraction,
                    case: sol.case,
                }),
                grid: Grid {
                    psi: wealth.iter().map(|&w| sol.psi(w)).collect(),
                    pistar: wealth.iter().map(|&w| sol.pistar(w)).collect(),
                    wealth,
                },
            })
        }
    }
}

fn constant_report(
    model: &Model,
    sol: &RuinSolution,
    grid_points: usize,
) -> CliResult<SolveReport> {
    let k = sol.constants();
    let wealth = uniform_grid(0.0, k.safe_level, grid_points);
    let evals = wealth
        .iter()
        .map(|&w| sol.evaluate(w))
        .collect::<ruin_core::Result<Vec<_>>>()?;
    let dual = match sol.dual() {
        Some(d) => Some(DualSummary {
            b1: d.b1,
            b2: d.b2,
            v0: d.v0,
            vb: d.vb,
            rho: d.rho,
            leverage_at_zero: sol.pistar(0.0)?,
        }),
        None => None,
    };
    Ok(SolveReport {
        regime: model.regime(),
        params: *model.params(),
        consumption: *model.consumption(),
        boundaries: Some(Boundaries {
            d: k.d,
            x: k.x,
            w_l: k.w_l,
            safe_level: k.safe_level,
            beta: sol.beta(),
            w_b: sol.w_b(),
            w_mu: sol.w_mu(),
            regions: sol.regions().to_vec(),
        }),
        dual,
        power: None,
        grid: Grid {
            wealth,
            psi: evals.iter().map(|e| e.psi).collect(),
            pistar: evals.iter().map(|e| e.pistar).collect(),
        },
    })
}
