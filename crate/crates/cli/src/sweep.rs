//! `sweep`: solver diagnostics as one parameter varies.

use ruin_core::closedform::solve_proportional;
use ruin_core::{solve, ConsumptionSpec, Regime};

use crate::output::{format_sig, Table};
use crate::{CliError, CliResult, Config};

pub const SWEEP_PARAMETERS: [&str; 6] = ["b", "lambda", "mu", "sigma", "c", "p"];

/// Default probe wealths for the `psi` columns.
pub const DEFAULT_PROBES: [f64; 3] = [5.0, 10.0, 20.0];

/// Copy of `config` with `parameter` set to `value`.
fn with_parameter(config: &Config, parameter: &str, value: f64) -> CliResult<Config> {
    let mut c = config.clone();
    match parameter {
        "b" => c.b = Some(value),
        "lambda" => c.lambda = value,
        "mu" => c.mu = value,
        "sigma" => c.sigma = value,
        "c" => match &mut c.consumption {
            ConsumptionSpec::Constant { c } => *c = value,
            _ => {
                return Err(CliError::Config(
                    "sweeping c needs constant consumption".into(),
                ))
            }
        },
        "p" => match &mut c.consumption {
            ConsumptionSpec::Proportional { p, .. } => *p = value,
            _ => {
                return Err(CliError::Config(
                    "sweeping p needs proportional consumption".into(),
                ))
            }
        },
        other => {
            return Err(CliError::Config(format!(
                "cannot sweep {other:?}; choose one of {}",
                SWEEP_PARAMETERS.join(", ")
            )))
        }
    }
    Ok(c)
}

struct Row {
    w_b: Option<f64>,
    w_l: Option<f64>,
    beta: Option<f64>,
    leverage_at_zero: Option<f64>,
    psi: Vec<f64>,
}

fn diagnostics(config: &Config, regime: Regime, probes: &[f64]) -> CliResult<Row> {
    let model = config.model(regime)?;
    match model.consumption() {
        ConsumptionSpec::Constant { .. } => {
            let sol = solve(&model)?;
            Ok(Row {
                w_b: sol.w_b(),
                w_l: Some(sol.w_l()),
                beta: Some(sol.beta()),
                leverage_at_zero: Some(sol.pistar(0.0)?),
                psi: probes
                    .iter()
                    .map(|&w| sol.psi(w))
                    .collect::<ruin_core::Result<_>>()?,
            })
        }
        ConsumptionSpec::Proportional { .. } => {
            let sol = solve_proportional(&model)?;
            Ok(Row {
                w_b: None,
                w_l: None,
                beta: None,
                leverage_at_zero: None,
                psi: probes.iter().map(|&w| sol.psi(w)).collect(),
            })
        }
    }
}

/// One row per value; values that fail validation or solving keep their row
/// with an `error` status and the message.
pub fn cmd_sweep(
    config: &Config,
    regime: Regime,
    parameter: &str,
    values: &[f64],
    probes: &[f64],
) -> CliResult<Table> {
    if !SWEEP_PARAMETERS.contains(&parameter) {
        with_parameter(config, parameter, 0.0)?;
    }
    if values.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    let mut headers: Vec<String> = [
        parameter,
        "status",
        "w_b",
        "w_l",
        "beta_b",
        "leverage_at_zero",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    headers.extend(probes.iter().map(|w| format!("psi({})", format_sig(*w))));
    let mut table = Table {
        headers,
        ..Table::default()
    };
    table.meta("sweep", parameter);
    table.meta("regime", regime.label());
    let opt = |v: Option<f64>| v.map(format_sig).unwrap_or_default();
    for &value in values {
        let outcome =
            with_parameter(config, parameter, value).and_then(|c| diagnostics(&c, regime, probes));
        let mut row = vec![format_sig(value)];
        match outcome {
            Ok(d) => {
                row.push("ok".into());
                row.extend([opt(d.w_b), opt(d.w_l), opt(d.beta), opt(d.leverage_at_zero)]);
                row.extend(d.psi.iter().map(|&p| format_sig(p)));
            }
            Err(e) => {
                row.push(format!("error: {e}"));
                row.extend(std::iter::repeat_n(String::new(), 4 + probes.len()));
            }
        }
        table.rows.push(row);
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Config {
        Config::parse(
            r#"{"r":0.02,"b":0.04,"mu":0.06,"sigma":0.2,"lambda":0.04,
                "consumption":{"type":"constant","c":1.0}}"#,
        )
        .unwrap()
    }

    #[test]
    fn leverage_increases_toward_mu() {
        let t = cmd_sweep(
            &base(),
            Regime::Borrow,
            "b",
            &[0.04, 0.055, 0.059],
            &DEFAULT_PROBES,
        )
        .unwrap();
        let lev = t.column("leverage_at_zero").unwrap();
        assert!(lev[0] < lev[1] && lev[1] < lev[2], "{lev:?}");
    }

    #[test]
    fn invalid_values_are_marked_and_the_run_continues() {
        let t = cmd_sweep(&base(), Regime::Borrow, "b", &[0.02, 0.03], &[5.0]).unwrap();
        assert!(t.rows[0][1].starts_with("error"));
        assert_eq!(t.rows[1][1], "ok");
        assert_eq!(t.rows[0].len(), t.headers.len());
    }

    #[test]
    fn wb_rises_toward_lending_level_as_b_falls() {
        let t = cmd_sweep(&base(), Regime::Borrow, "b", &[0.03, 0.021, 0.0201], &[]).unwrap();
        let wb = t.column("w_b").unwrap();
        let wl = t.column("w_l").unwrap()[0];
        assert!(wb[0] < wb[1] && wb[1] < wb[2] && wb[2] < wl);
    }

    #[test]
    fn rejects_unknown_parameter() {
        assert!(cmd_sweep(&base(), Regime::Borrow, "gamma", &[1.0], &[]).is_err());
        assert!(cmd_sweep(&base(), Regime::Borrow, "p", &[0.05], &[])
            .unwrap()
            .rows[0][1]
            .starts_with("error"));
    }
}
