//! `figure`: tables behind the four comparison plots.
//!
//! 1. `y` with the lines `z` and `z_b` on `[0, w_l]`
//! 2. ruin probabilities `psi`, `psi_0`, `psi_b` on `[0, c/r]`
//! 3. riskless positions `zeta = w - pistar` in the three regimes
//! 4. `zeta_b` for `b` in {0.04, 0.055, 0.059}

use ruin_core::assembler::RegimeSet;
use ruin_core::riccati::{aux_line, find_wb, find_wmu, solve_riccati, AuxKind, RiccatiOptions};
use ruin_core::{solve, validate, ConsumptionSpec, MarketParams, Regime};

use crate::output::Table;
use crate::solve::uniform_grid;
use crate::{CliError, CliResult, Config};

/// Borrowing rates of the fourth figure.
pub const FIGURE4_RATES: [f64; 3] = [0.04, 0.055, 0.059];

pub fn cmd_figure(config: &Config, figure: u8, grid_points: usize) -> CliResult<Table> {
    let c = config.constant_rate()?;
    let params = config.params();
    let mut table = match figure {
        1 => figure1(&params, c, grid_points)?,
        2 | 3 => regimes_figure(&params, c, figure, grid_points)?,
        4 => figure4(&params, c, grid_points)?,
        _ => {
            return Err(CliError::Config(format!(
                "figure must be 1, 2, 3 or 4, got {figure}"
            )))
        }
    };
    let mut meta = vec![("figure".to_string(), figure.to_string())];
    for (k, v) in [
        ("r", params.r),
        ("b", params.b),
        ("mu", params.mu),
        ("sigma", params.sigma),
        ("lambda", params.lambda),
        ("c", c),
    ] {
        meta.push((k.into(), crate::output::format_sig(v)));
    }
    meta.append(&mut table.metadata);
    table.metadata = meta;
    Ok(table)
}

fn borrow_model_check(params: &MarketParams, c: f64) -> CliResult<()> {
    validate(*params, ConsumptionSpec::Constant { c }, Regime::Borrow)?;
    Ok(())
}

fn figure1(params: &MarketParams, c: f64, n: usize) -> CliResult<Table> {
    borrow_model_check(params, c)?;
    let k = ruin_core::derive_constants(params, c);
    let ric = solve_riccati(params, c, &k, RiccatiOptions::default())?;
    let z = aux_line(AuxKind::Z, params, c);
    let zb = aux_line(AuxKind::ZB, params, c);
    let mut t = Table::new(&["w", "y", "z", "z_b"]);
    t.meta(
        "series",
        "y: Riccati solution; z, z_b: lines through (0, -c/lambda)",
    );
    t.meta_num("w_b", find_wb(&ric, params, c)?);
    t.meta_num("w_l", k.w_l);
    t.meta_num("w_mu", find_wmu(&ric, params, c)?);
    for w in uniform_grid(0.0, k.w_l, n) {
        t.push_numbers(&[w, ric.y(w), z.at(w), zb.at(w)]);
    }
    Ok(t)
}

fn regimes_figure(params: &MarketParams, c: f64, figure: u8, n: usize) -> CliResult<Table> {
    borrow_model_check(params, c)?;
    let set = RegimeSet::solve(*params, c)?;
    let headers: [&str; 4] = if figure == 2 {
        ["w", "psi", "psi_0", "psi_b"]
    } else {
        ["w", "zeta", "zeta_0", "zeta_b"]
    };
    let mut t = Table::new(&headers);
    t.meta(
        "series",
        format!(
            "{}: b = r; {}: no borrowing; {}: borrowing at b",
            headers[1], headers[2], headers[3]
        ),
    );
    t.meta_num("w_b", set.borrow.w_b().expect("borrow regime"));
    t.meta_num("w_l", set.no_borrow.w_l());
    t.meta_num("w_mu", set.no_borrow.w_mu().expect("no-borrow regime"));
    for w in uniform_grid(0.0, set.no_borrow.safe_level(), n) {
        let mut row = vec![w];
        for regime in Regime::ALL {
            let e = set.get(regime).evaluate(w)?;
            row.push(if figure == 2 {
                e.psi
            } else {
                e.riskless_position
            });
        }
        t.push_numbers(&row);
    }
    Ok(t)
}

fn figure4(params: &MarketParams, c: f64, n: usize) -> CliResult<Table> {
    let mut sols = Vec::with_capacity(FIGURE4_RATES.len());
    for b in FIGURE4_RATES {
        let model = validate(
            params.with_borrowing_rate(b),
            ConsumptionSpec::Constant { c },
            Regime::Borrow,
        )?;
        sols.push(solve(&model)?);
    }
    let names: Vec<String> = FIGURE4_RATES
        .iter()
        .map(|b| format!("zeta_b={b}"))
        .collect();
    let mut headers = vec!["w"];
    headers.extend(names.iter().map(String::as_str));
    let mut t = Table::new(&headers);
    t.meta(
        "series",
        "riskless position w - pistar_b for each borrowing rate b",
    );
    for (b, s) in FIGURE4_RATES.iter().zip(&sols) {
        t.meta_num(&format!("w_b(b={b})"), s.w_b().expect("borrow regime"));
    }
    t.meta_num("w_l", sols[0].w_l());
    for w in uniform_grid(0.0, sols[0].safe_level(), n) {
        let mut row = vec![w];
        for s in &sols {
            row.push(s.evaluate(w)?.riskless_position);
        }
        t.push_numbers(&row);
    }
    Ok(t)
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
    fn figure1_curves_touch_at_lending_level() {
        let t = cmd_figure(&base(), 1, 65).unwrap();
        let (y, z) = (t.column("y").unwrap(), t.column("z").unwrap());
        assert!((y[64] - z[64]).abs() < 1e-6);
        assert!(y[1..64].iter().zip(&z[1..64]).all(|(a, b)| a > b));
    }

    #[test]
    fn figure2_starts_at_one() {
        let t = cmd_figure(&base(), 2, 33).unwrap();
        for col in ["psi", "psi_0", "psi_b"] {
            assert_eq!(t.column(col).unwrap()[0], 1.0);
        }
        assert!(t.metadata.iter().any(|(k, _)| k == "w_b"));
    }

    #[test]
    fn figure3_no_borrow_holds_nothing_riskless_below_lending_level() {
        let t = cmd_figure(&base(), 3, 101).unwrap();
        let w = t.column("w").unwrap();
        let z0 = t.column("zeta_0").unwrap();
        for (w, z) in w.iter().zip(&z0) {
            if *w <= 14.64 {
                assert_eq!(*z, 0.0);
            }
        }
    }

    #[test]
    fn figure4_leverage_grows_with_b() {
        let t = cmd_figure(&base(), 4, 17).unwrap();
        let first: Vec<f64> = t.rows[0][1..].iter().map(|s| s.parse().unwrap()).collect();
        assert!(first[0] > first[1] && first[1] > first[2], "{first:?}");
    }

    #[test]
    fn unknown_figure_is_config_error() {
        assert_eq!(cmd_figure(&base(), 5, 10).unwrap_err().exit_code(), 1);
    }
}
