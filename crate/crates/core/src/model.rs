//! Market parameters, consumption rules and the regime taxonomy shared by
//! every solver.
//!
//! All rates are annual and real (net of inflation). A [`Model`] can only be
//! obtained through [`validate`], so downstream code may rely on the
//! inequalities checked there.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};

/// Financial market: lending rate, borrowing rate, risky drift and
/// volatility, and the hazard rate of the exponential death time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    pub r: f64,
    pub b: f64,
    pub mu: f64,
    pub sigma: f64,
    pub lambda: f64,
}

impl MarketParams {
    pub fn new(r: f64, b: f64, mu: f64, sigma: f64, lambda: f64) -> Self {
        Self {
            r,
            b,
            mu,
            sigma,
            lambda,
        }
    }

    /// Copy of the market with the borrowing rate replaced.
    pub fn with_borrowing_rate(&self, b: f64) -> Self {
        Self { b, ..*self }
    }

    /// Half the squared Sharpe ratio of the risky asset against `rate`.
    pub fn half_sharpe_sq(&self, rate: f64) -> f64 {
        let s = (self.mu - rate) / self.sigma;
        0.5 * s * s
    }

    /// `m` measured against the lending rate.
    pub fn m(&self) -> f64 {
        self.half_sharpe_sq(self.r)
    }

    /// `m` measured against the borrowing rate.
    pub fn m_b(&self) -> f64 {
        self.half_sharpe_sq(self.b)
    }
}

/// How the retiree consumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ConsumptionSpec {
    /// Fixed real dollar rate `c` per year; ruin at zero wealth.
    Constant { c: f64 },
    /// Consumption `p * w`; ruin when wealth falls to `w0`.
    Proportional { p: f64, w0: f64 },
}

impl ConsumptionSpec {
    /// Consumption rate at wealth `w`.
    pub fn rate(&self, w: f64) -> f64 {
        match *self {
            ConsumptionSpec::Constant { c } => c,
            ConsumptionSpec::Proportional { p, .. } => p * w,
        }
    }

    /// Wealth level at which the path is declared ruined.
    pub fn ruin_level(&self) -> f64 {
        match *self {
            ConsumptionSpec::Constant { .. } => 0.0,
            ConsumptionSpec::Proportional { w0, .. } => w0,
        }
    }
}

/// Borrowing constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// Borrow and lend at the same rate `r`; `b` is ignored.
    Unconstrained,
    /// Risky holding confined to `[0, w]`; `b` is ignored.
    NoBorrow,
    /// Borrowing allowed at `b > r`.
    Borrow,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::Unconstrained, Regime::NoBorrow, Regime::Borrow];

    pub fn label(&self) -> &'static str {
        match self {
            Regime::Unconstrained => "unconstrained",
            Regime::NoBorrow => "noborrow",
            Regime::Borrow => "borrow",
        }
    }

    /// Rate charged on the borrowed amount `(pi - w)+`, if borrowing is allowed.
    pub fn borrowing_rate(&self, params: &MarketParams) -> Option<f64> {
        match self {
            Regime::Unconstrained => Some(params.r),
            Regime::NoBorrow => None,
            Regime::Borrow => Some(params.b),
        }
    }
}

impl std::str::FromStr for Regime {
    type Err = RuinError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unconstrained" => Ok(Regime::Unconstrained),
            "noborrow" | "no-borrow" | "no_borrow" => Ok(Regime::NoBorrow),
            "borrow" => Ok(Regime::Borrow),
            other => Err(RuinError::Parameter(format!("unknown regime `{other}`"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A parameter set that passed [`validate`] for its regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Model {
    params: MarketParams,
    consumption: ConsumptionSpec,
    regime: Regime,
}

impl Model {
    pub fn params(&self) -> &MarketParams {
        &self.params
    }

    pub fn consumption(&self) -> &ConsumptionSpec {
        &self.consumption
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// Constant consumption rate, if this is a constant-consumption model.
    pub fn constant_rate(&self) -> Option<f64> {
        match self.consumption {
            ConsumptionSpec::Constant { c } => Some(c),
            ConsumptionSpec::Proportional { .. } => None,
        }
    }

    /// Wealth `c/r` that funds constant consumption forever.
    pub fn safe_level(&self) -> Option<f64> {
        self.constant_rate().map(|c| c / self.params.r)
    }

    /// Same parameters under another regime, revalidated.
    pub fn with_regime(&self, regime: Regime) -> Result<Model> {
        validate(self.params, self.consumption, regime)
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(RuinError::Parameter(msg.to_string()))
    }
}

/// Check the inequalities required by `regime` and wrap the inputs in a
/// [`Model`].
pub fn validate(
    params: MarketParams,
    consumption: ConsumptionSpec,
    regime: Regime,
) -> Result<Model> {
    let MarketParams {
        r,
        b,
        mu,
        sigma,
        lambda,
    } = params;
    for (name, v) in [
        ("r", r),
        ("b", b),
        ("mu", mu),
        ("sigma", sigma),
        ("lambda", lambda),
    ] {
        check(v.is_finite(), &format!("{name} must be finite"))?;
    }
    check(sigma > 0.0, "sigma must be positive")?;
    check(lambda > 0.0, "lambda must be positive")?;
    check(r > 0.0, "r must be positive")?;
    check(mu > r, "mu must exceed r")?;

    if regime == Regime::Borrow {
        check(
            b > r,
            "b must exceed r in the borrow regime (use unconstrained for b = r)",
        )?;
        check(mu > b, "mu must exceed b")?;
    }

    match consumption {
        ConsumptionSpec::Constant { c } => {
            check(c.is_finite() && c > 0.0, "c must be positive")?;
        }
        ConsumptionSpec::Proportional { p, w0 } => {
            check(p.is_finite() && p > r, "p must exceed r")?;
            check(w0.is_finite() && w0 > 0.0, "w0 must be positive")?;
            if regime == Regime::Borrow {
                check(b < p, "b must be below p for proportional consumption")?;
            }
        }
    }

    Ok(Model {
        params,
        consumption,
        regime,
    })
}

/// Closed-form constants of the constant-consumption problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Half squared Sharpe ratio against `r`.
    pub m: f64,
    /// Half squared Sharpe ratio against `b`.
    pub m_b: f64,
    /// Exponent of the unconstrained ruin probability, always above 1.
    pub d: f64,
    /// Ratio of risky holding to riskless shortfall, `((mu - r)/sigma^2)/(d - 1)`.
    pub x: f64,
    /// Lending level.
    pub w_l: f64,
    /// Safe level `c/r`.
    pub safe_level: f64,
}

/// Exponent `d` of `(1 - r w / c)^d`, with `r` as the lending rate.
pub(crate) fn exponent_d(r: f64, lambda: f64, m: f64) -> f64 {
    let s = r + lambda + m;
    (s + (s * s - 4.0 * r * lambda).sqrt()) / (2.0 * r)
}

pub fn derive_constants(params: &MarketParams, c: f64) -> DerivedConstants {
    let m = params.m();
    let d = exponent_d(params.r, params.lambda, m);
    let x = (params.mu - params.r) / (params.sigma * params.sigma) / (d - 1.0);
    let safe_level = c / params.r;
    DerivedConstants {
        m,
        m_b: params.m_b(),
        d,
        x,
        w_l: x / (1.0 + x) * safe_level,
        safe_level,
    }
}

impl Model {
    /// Derived constants for a constant-consumption model.
    pub fn constants(&self) -> Result<DerivedConstants> {
        let c = self.constant_rate().ok_or_else(|| {
            RuinError::Parameter("derived constants need constant consumption".into())
        })?;
        Ok(derive_constants(&self.params, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::base_params;

    #[test]
    fn base_parameters_validate_in_every_regime() {
        for regime in Regime::ALL {
            assert!(validate(base_params(), ConsumptionSpec::Constant { c: 1.0 }, regime).is_ok());
        }
    }

    #[test]
    fn rejects_mu_equal_r() {
        let p = MarketParams::new(0.02, 0.04, 0.02, 0.2, 0.04);
        let err = validate(p, ConsumptionSpec::Constant { c: 1.0 }, Regime::NoBorrow).unwrap_err();
        assert_eq!(err, RuinError::Parameter("mu must exceed r".into()));
    }

    #[test]
    fn rejects_p_below_r() {
        let err = validate(
            base_params(),
            ConsumptionSpec::Proportional { p: 0.01, w0: 1.0 },
            Regime::NoBorrow,
        )
        .unwrap_err();
        assert_eq!(err, RuinError::Parameter("p must exceed r".into()));
    }

    #[test]
    fn borrow_regime_bounds() {
        let c = ConsumptionSpec::Constant { c: 1.0 };
        assert!(validate(base_params().with_borrowing_rate(0.02), c, Regime::Borrow).is_err());
        assert!(validate(base_params().with_borrowing_rate(0.06), c, Regime::Borrow).is_err());
        // b is ignored outside the borrow regime
        assert!(validate(base_params().with_borrowing_rate(0.5), c, Regime::NoBorrow).is_ok());
        let prop = ConsumptionSpec::Proportional { p: 0.03, w0: 1.0 };
        assert!(validate(base_params(), prop, Regime::Borrow).is_err());
        assert!(validate(base_params(), prop, Regime::NoBorrow).is_ok());
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let c = ConsumptionSpec::Constant { c: 1.0 };
        let mut p = base_params();
        p.sigma = 0.0;
        assert!(validate(p, c, Regime::NoBorrow).is_err());
        let mut p = base_params();
        p.lambda = -0.1;
        assert!(validate(p, c, Regime::NoBorrow).is_err());
        assert!(validate(
            base_params(),
            ConsumptionSpec::Constant { c: 0.0 },
            Regime::NoBorrow
        )
        .is_err());
        let prop = ConsumptionSpec::Proportional { p: 0.05, w0: 0.0 };
        assert!(validate(base_params(), prop, Regime::NoBorrow).is_err());
    }

    #[test]
    fn base_constants() {
        // m = 0.5 (0.04/0.2)^2; d = (0.08 + sqrt(0.0064 - 0.0032)) / 0.04 = 2 + sqrt 2
        let k = derive_constants(&base_params(), 1.0);
        assert!((k.m - 0.02).abs() < 1e-15);
        assert!((k.d - (2.0 + 2f64.sqrt())).abs() < 1e-12);
        assert!((k.x - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((k.w_l - 14.64).abs() < 0.005);
        assert!((k.safe_level - 50.0).abs() < 1e-12);
        assert!((k.m_b - 0.005).abs() < 1e-15);
    }

    #[test]
    fn constants_invariants() {
        let k = derive_constants(&base_params(), 3.0);
        assert!(k.d > 1.0 && k.m > 0.0);
        let frac = 1.0 - base_params().r * k.w_l / 3.0;
        assert!(frac > 0.0 && frac < 1.0);
    }

    #[test]
    fn regime_parses() {
        assert_eq!("noborrow".parse::<Regime>().unwrap(), Regime::NoBorrow);
        assert_eq!("Borrow".parse::<Regime>().unwrap(), Regime::Borrow);
        assert!("leverage".parse::<Regime>().is_err());
    }

    #[test]
    fn consumption_serde_shape() {
        let c: ConsumptionSpec =
            serde_json::from_str(r#"{"type":"proportional","p":0.05,"w0":2.0}"#).unwrap();
        assert_eq!(c, ConsumptionSpec::Proportional { p: 0.05, w0: 2.0 });
        assert_eq!(c.ruin_level(), 2.0);
        assert_eq!(c.rate(10.0), 0.5);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn lending_level_scales_with_consumption(
                r in 0.005f64..0.05, dmu in 0.005f64..0.1, sigma in 0.05f64..0.5,
                lambda in 0.01f64..0.2, c in 0.1f64..10.0,
            ) {
                let p = MarketParams::new(r, r, r + dmu, sigma, lambda);
                let one = derive_constants(&p, c);
                let two = derive_constants(&p, 2.0 * c);
                prop_assert!((two.w_l - 2.0 * one.w_l).abs() <= 1e-12 * two.w_l);
                prop_assert_eq!(one.d, two.d);
                prop_assert_eq!(one.m, two.m);
                prop_assert_eq!(one.x, two.x);
                prop_assert!(one.d > 1.0);
                prop_assert!(one.w_l > 0.0 && one.w_l < one.safe_level);
            }

            #[test]
            fn m_b_tends_to_m(r in 0.005f64..0.05, dmu in 0.005f64..0.1, sigma in 0.05f64..0.5) {
                let p = MarketParams::new(r, r + 1e-9, r + dmu, sigma, 0.04);
                prop_assert!((p.m_b() - p.m()).abs() < 1e-6 * p.m());
            }
        }
    }
}
