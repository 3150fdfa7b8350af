//! Closed-form solutions: the unconstrained constant-consumption problem,
//! the power-law solutions under proportional consumption, and the CRRA
//! parameters that reproduce the same behaviour.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};
use crate::model::{ConsumptionSpec, DerivedConstants, MarketParams, Model, Regime};

const CASE_TOL: f64 = 1e-12;

/// Minimum ruin probability `(1 - r w / c)^d` with unrestricted borrowing at `r`.
pub fn psi_unconstrained(w: f64, constants: &DerivedConstants) -> Result<f64> {
    if !(w >= 0.0) {
        return Err(RuinError::Domain(format!(
            "wealth must be non-negative, got {w}"
        )));
    }
    if w >= constants.safe_level {
        return Ok(0.0);
    }
    Ok((1.0 - w / constants.safe_level).powf(constants.d))
}

/// Unconstrained optimal risky holding, linear and decreasing to zero at `c/r`.
pub fn pistar_unconstrained(w: f64, constants: &DerivedConstants) -> Result<f64> {
    if !(0.0..=constants.safe_level).contains(&w) {
        return Err(RuinError::Domain(format!(
            "wealth {w} outside [0, {}]",
            constants.safe_level
        )));
    }
    Ok(constants.x * (constants.safe_level - w))
}

/// Positive root `a` of `lambda = a (p - rate) - a m / (a + 1)` with `p > rate`.
fn power_exponent(rate: f64, m: f64, lambda: f64, p: f64) -> f64 {
    let q = rate - p + lambda + m;
    let spread = p - rate;
    (q + (q * q + 4.0 * lambda * spread).sqrt()) / (2.0 * spread)
}

/// Exponent when the optimal holding is an interior fraction financed at `r`.
pub fn exponent_ar(params: &MarketParams, p: f64) -> f64 {
    power_exponent(params.r, params.m(), params.lambda, p)
}

/// Exponent when the whole of wealth sits in the risky asset.
pub fn exponent_k(params: &MarketParams, p: f64) -> f64 {
    let s2 = params.sigma * params.sigma;
    let q = params.mu - p - 0.5 * s2;
    (q + (q * q + 2.0 * s2 * params.lambda).sqrt()) / s2
}

/// Exponent when the optimal holding is leveraged at the borrowing rate `b`.
pub fn exponent_ab(params: &MarketParams, p: f64) -> f64 {
    power_exponent(params.b, params.m_b(), params.lambda, p)
}

/// Which branch of the proportional-consumption solution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerCase {
    /// Interior fraction below one, financed at `r`.
    Lending,
    /// Holding pinned to current wealth.
    FullyInvested,
    /// Leveraged, borrowing at `b`.
    Leveraged,
}

/// `psi(w) = (w / w0)^(-a)` with optimal holding `investment_fraction * w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerSolution {
    pub exponent: f64,
    pub w0: f64,
    pub investment_fraction: f64,
    pub case: PowerCase,
}

impl PowerSolution {
    /// Ruin probability; wealth at or below `w0` is already ruined.
    pub fn psi(&self, w: f64) -> f64 {
        if w <= self.w0 {
            1.0
        } else {
            (w / self.w0).powf(-self.exponent)
        }
    }

    pub fn pistar(&self, w: f64) -> f64 {
        self.investment_fraction * w
    }
}

/// Merton fraction `((mu - rate)/sigma^2) / (a + 1)`.
fn merton_fraction(params: &MarketParams, rate: f64, a: f64) -> f64 {
    (params.mu - rate) / (params.sigma * params.sigma) / (a + 1.0)
}

/// Power-law minimum ruin probability under proportional consumption.
pub fn solve_proportional(model: &Model) -> Result<PowerSolution> {
    let ConsumptionSpec::Proportional { p, w0 } = *model.consumption() else {
        return Err(RuinError::Parameter(
            "proportional consumption required".into(),
        ));
    };
    let params = model.params();
    let a_r = exponent_ar(params, p);
    let theta_r = merton_fraction(params, params.r, a_r);

    let solution = |exponent, investment_fraction, case| PowerSolution {
        exponent,
        w0,
        investment_fraction,
        case,
    };

    match model.regime() {
        Regime::Unconstrained => Ok(solution(a_r, theta_r, PowerCase::Lending)),
        Regime::NoBorrow => {
            if theta_r < 1.0 {
                Ok(solution(a_r, theta_r, PowerCase::Lending))
            } else {
                Ok(solution(
                    exponent_k(params, p),
                    1.0,
                    PowerCase::FullyInvested,
                ))
            }
        }
        Regime::Borrow => {
            let k = exponent_k(params, p);
            let a_b = exponent_ab(params, p);
            let lending = theta_r;
            let full_b = merton_fraction(params, params.b, k);
            let full_r = merton_fraction(params, params.r, k);
            let lever = merton_fraction(params, params.b, a_b);

            let fires = [lending < 1.0, full_b < 1.0 && 1.0 <= full_r, lever > 1.0];
            let n = fires.iter().filter(|&&f| f).count();
            // ties at exactly one go to the fully-invested branch
            let near_tie = (lending - 1.0).abs() <= CASE_TOL
                || (full_b - 1.0).abs() <= CASE_TOL
                || (full_r - 1.0).abs() <= CASE_TOL
                || (lever - 1.0).abs() <= CASE_TOL;
            if n == 1 && !near_tie {
                if fires[0] {
                    return Ok(solution(a_r, lending, PowerCase::Lending));
                }
                if fires[2] {
                    return Ok(solution(a_b, lever, PowerCase::Leveraged));
                }
                return Ok(solution(k, 1.0, PowerCase::FullyInvested));
            }
            if near_tie {
                return Ok(solution(k, 1.0, PowerCase::FullyInvested));
            }
            Err(RuinError::CaseSelection(format!(
                "{n} case conditions hold (lending {lending}, fully invested {full_b}/{full_r}, leveraged {lever})"
            )))
        }
    }
}

/// Constant-relative-risk-aversion utility maximiser with identical
/// consumption and investment behaviour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrraEquivalent {
    /// Power-utility exponent `eta = -a`.
    pub eta: f64,
    /// Relative risk aversion `1 + a`.
    pub relative_risk_aversion: f64,
    /// Subjective discount rate `lambda + p`.
    pub discount: f64,
}

pub fn crra_equivalent(a: f64, params: &MarketParams, p: f64) -> CrraEquivalent {
    CrraEquivalent {
        eta: -a,
        relative_risk_aversion: 1.0 + a,
        discount: params.lambda + p,
    }
}

/// Generator of `psi = (w/w0)^(-a)` divided by `psi`, for holding fraction
/// `kappa`, with borrowing (if any) charged at `borrow_rate`.
///
/// Zero exactly when the HJB equation holds with that control.
pub fn power_generator(params: &MarketParams, p: f64, a: f64, kappa: f64, borrow_rate: f64) -> f64 {
    let growth = params.r * (1.0 - kappa).max(0.0) - borrow_rate * (kappa - 1.0).max(0.0)
        + params.mu * kappa
        - p;
    -a * growth + 0.5 * params.sigma * params.sigma * kappa * kappa * a * (a + 1.0) - params.lambda
}
