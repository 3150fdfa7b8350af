//! Piecewise assembly of the minimum ruin probability and the optimal
//! strategy for constant consumption, in each borrowing regime.
//!
//! Regions, left to right:
//!
//! | region | strategy                     | ruin probability                   |
//! |--------|------------------------------|------------------------------------|
//! | dual   | leveraged at `b`             | Legendre dual                      |
//! | unit   | whole wealth in risky asset  | `h` from the Riccati solution      |
//! | tail   | linear, lends the remainder  | `beta (1 - r w / c)^d`             |
//! | safe   | nothing in the risky asset   | zero                               |
//!
//! Intervals are half-open on the right, so a boundary point is evaluated by
//! the region that starts there.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dual::{dual_to_primal, solve_dual, DualSolution};
use crate::error::{Result, RuinError};
use crate::model::{validate, ConsumptionSpec, DerivedConstants, MarketParams, Model, Regime};
use crate::riccati::{find_wb, find_wmu, solve_riccati, HProfile, RiccatiOptions, RiccatiSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Dual,
    Unit,
    Tail,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub start: f64,
    /// Exclusive; infinite for the safe region (`null` in JSON).
    #[serde(with = "unbounded")]
    pub end: f64,
    pub kind: RegionKind,
}

mod unbounded {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

/// Ruin probability, optimal risky holding and the riskless position
/// `w - pistar` (negative when borrowing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub psi: f64,
    pub pistar: f64,
    pub riskless_position: f64,
}

/// Minimum ruin probability and optimal strategy for one constant-consumption model.
#[derive(Debug, Clone)]
pub struct RuinSolution {
    model: Model,
    constants: DerivedConstants,
    regions: Vec<Region>,
    beta: f64,
    w_b: Option<f64>,
    w_mu: Option<f64>,
    riccati: Option<Arc<RiccatiSolution>>,
    unit_log_scale: f64,
    dual: Option<DualSolution>,
}

fn constant_rate(model: &Model) -> Result<f64> {
    match *model.consumption() {
        ConsumptionSpec::Constant { c } => Ok(c),
        ConsumptionSpec::Proportional { .. } => Err(RuinError::Parameter(
            "piecewise assembly needs constant consumption; use the proportional closed form"
                .into(),
        )),
    }
}

/// Solve the constant-consumption problem in the model's regime.
pub fn solve(model: &Model) -> Result<RuinSolution> {
    let c = constant_rate(model)?;
    if model.regime() == Regime::Unconstrained {
        return assemble(model, None);
    }
    let constants = model.constants()?;
    let ric = solve_riccati(model.params(), c, &constants, RiccatiOptions::default())?;
    assemble(model, Some(Arc::new(ric)))
}

/// Like [`solve`], reusing a Riccati solution computed for the same
/// `r`, `mu`, `sigma`, `lambda` and `c` (it does not depend on `b`).
pub fn solve_with_riccati(model: &Model, riccati: Arc<RiccatiSolution>) -> Result<RuinSolution> {
    constant_rate(model)?;
    if model.regime() == Regime::Unconstrained {
        return assemble(model, None);
    }
    let constants = model.constants()?;
    if (riccati.w_l() - constants.w_l).abs() > 1e-12 * constants.w_l {
        return Err(RuinError::Parameter(
            "Riccati solution was computed for a different market".into(),
        ));
    }
    assemble(model, Some(riccati))
}

fn assemble(model: &Model, riccati: Option<Arc<RiccatiSolution>>) -> Result<RuinSolution> {
    let c = constant_rate(model)?;
    let params = model.params();
    let constants = model.constants()?;
    let safe = constants.safe_level;
    let w_l = constants.w_l;
    let tail_factor = |w: f64| (1.0 - w / safe).powf(constants.d);

    let mut sol = RuinSolution {
        model: *model,
        constants,
        regions: Vec::new(),
        beta: 1.0,
        w_b: None,
        w_mu: None,
        riccati: None,
        unit_log_scale: 0.0,
        dual: None,
    };

    let Some(ric) = riccati else {
        sol.regions = vec![
            Region {
                start: 0.0,
                end: safe,
                kind: RegionKind::Tail,
            },
            Region {
                start: safe,
                end: f64::INFINITY,
                kind: RegionKind::Safe,
            },
        ];
        return Ok(sol);
    };

    sol.w_mu = Some(find_wmu(&ric, params, c)?);
    let mut regions = Vec::with_capacity(4);
    match model.regime() {
        Regime::NoBorrow => {
            sol.unit_log_scale = ric.profile(0.0, 1.0)?.log_scale();
            regions.push(Region {
                start: 0.0,
                end: w_l,
                kind: RegionKind::Unit,
            });
        }
        Regime::Borrow => {
            let w_b = find_wb(&ric, params, c)?;
            let dual = solve_dual(params, c, w_b)?;
            let h_wb = dual.h_tilde(dual.vb) - w_b * dual.vb;
            sol.unit_log_scale = ric.profile(w_b, h_wb)?.log_scale();
            sol.w_b = Some(w_b);
            sol.dual = Some(dual);
            regions.push(Region {
                start: 0.0,
                end: w_b,
                kind: RegionKind::Dual,
            });
            regions.push(Region {
                start: w_b,
                end: w_l,
                kind: RegionKind::Unit,
            });
        }
        Regime::Unconstrained => unreachable!("handled above"),
    }
    regions.push(Region {
        start: w_l,
        end: safe,
        kind: RegionKind::Tail,
    });
    regions.push(Region {
        start: safe,
        end: f64::INFINITY,
        kind: RegionKind::Safe,
    });
    sol.regions = regions;
    let h_l = ric.profile_from_log_scale(sol.unit_log_scale).h(w_l);
    sol.beta = h_l / tail_factor(w_l);
    sol.riccati = Some(ric);
    Ok(sol)
}

impl RuinSolution {
    pub fn model(&self) -> &Model {
        &self.model
    }

    pub fn regime(&self) -> Regime {
        self.model.regime()
    }

    pub fn constants(&self) -> &DerivedConstants {
        &self.constants
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Multiplier of `(1 - r w / c)^d` on the tail region.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn w_l(&self) -> f64 {
        self.constants.w_l
    }

    pub fn safe_level(&self) -> f64 {
        self.constants.safe_level
    }

    pub fn w_b(&self) -> Option<f64> {
        self.w_b
    }

    /// Inflection point of the no-borrowing solution (zero when `mu <= lambda`);
    /// `None` for the unconstrained closed form.
    pub fn w_mu(&self) -> Option<f64> {
        self.w_mu
    }

    pub fn dual(&self) -> Option<&DualSolution> {
        self.dual.as_ref()
    }

    pub fn riccati(&self) -> Option<&Arc<RiccatiSolution>> {
        self.riccati.as_ref()
    }

    fn profile(&self) -> HProfile<'_> {
        self.riccati
            .as_ref()
            .expect("unit region implies a Riccati solution")
            .profile_from_log_scale(self.unit_log_scale)
    }

    pub fn region_at(&self, w: f64) -> RegionKind {
        self.regions
            .iter()
            .find(|r| w >= r.start && w < r.end)
            .map(|r| r.kind)
            .unwrap_or(RegionKind::Safe)
    }

    fn check(w: f64) -> Result<()> {
        if w >= 0.0 {
            Ok(())
        } else {
            Err(RuinError::Domain(format!(
                "wealth must be non-negative, got {w}"
            )))
        }
    }

    fn tail(&self, w: f64) -> (f64, f64) {
        let k = &self.constants;
        let psi = self.beta * (1.0 - w / k.safe_level).powf(k.d);
        (psi, k.x * (k.safe_level - w))
    }

    /// Ruin probability, optimal holding and riskless position at `w`.
    pub fn evaluate(&self, w: f64) -> Result<Evaluation> {
        Self::check(w)?;
        let (psi, pistar) = match self.region_at(w) {
            RegionKind::Dual => {
                let dual = self
                    .dual
                    .as_ref()
                    .expect("dual region implies a dual solution");
                let p = dual_to_primal(dual, w)?;
                (p.psi, p.pistar)
            }
            RegionKind::Unit => (self.profile().h(w), w),
            RegionKind::Tail => self.tail(w),
            RegionKind::Safe => (0.0, 0.0),
        };
        Ok(Evaluation {
            psi: psi.clamp(0.0, 1.0),
            pistar,
            riskless_position: w - pistar,
        })
    }

    pub fn psi(&self, w: f64) -> Result<f64> {
        self.evaluate(w).map(|e| e.psi)
    }

    pub fn pistar(&self, w: f64) -> Result<f64> {
        self.evaluate(w).map(|e| e.pistar)
    }

    /// `psi'(w)` from the region formulas.
    pub fn psi_prime(&self, w: f64) -> Result<f64> {
        Self::check(w)?;
        Ok(match self.region_at(w) {
            RegionKind::Dual => -self.dual.as_ref().unwrap().invert(w)?,
            RegionKind::Unit => self.profile().h_prime(w),
            RegionKind::Tail => {
                let k = &self.constants;
                -self.beta * k.d / k.safe_level * (1.0 - w / k.safe_level).powf(k.d - 1.0)
            }
            RegionKind::Safe => 0.0,
        })
    }

    /// `psi''(w)` from the region formulas; on the dual region `-1 / h~''(v)`.
    pub fn psi_second(&self, w: f64) -> Result<f64> {
        Self::check(w)?;
        Ok(match self.region_at(w) {
            RegionKind::Dual => {
                let dual = self.dual.as_ref().unwrap();
                -1.0 / dual.h_tilde_second(dual.invert(w)?)
            }
            RegionKind::Unit => self.profile().h_second(w),
            RegionKind::Tail => {
                let k = &self.constants;
                self.beta * k.d * (k.d - 1.0) / (k.safe_level * k.safe_level)
                    * (1.0 - w / k.safe_level).powf(k.d - 2.0)
            }
            RegionKind::Safe => 0.0,
        })
    }
}

/// One row of the regime comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub w: f64,
    pub psi: f64,
    pub psi_0: f64,
    pub psi_b: f64,
}

impl RegimeRow {
    /// `psi <= psi_b <= psi_0` up to `slack`.
    pub fn is_ordered(&self, slack: f64) -> bool {
        self.psi <= self.psi_b + slack && self.psi_b <= self.psi_0 + slack
    }
}

/// The three solutions for one market.
#[derive(Debug, Clone)]
pub struct RegimeSet {
    pub unconstrained: RuinSolution,
    pub no_borrow: RuinSolution,
    pub borrow: RuinSolution,
}

impl RegimeSet {
    pub fn solve(params: MarketParams, c: f64) -> Result<Self> {
        let consumption = ConsumptionSpec::Constant { c };
        let nb = validate(params, consumption, Regime::NoBorrow)?;
        let no_borrow = solve(&nb)?;
        let ric = no_borrow
            .riccati()
            .cloned()
            .expect("no-borrow solution carries y");
        Ok(Self {
            unconstrained: solve(&validate(params, consumption, Regime::Unconstrained)?)?,
            borrow: solve_with_riccati(&validate(params, consumption, Regime::Borrow)?, ric)?,
            no_borrow,
        })
    }

    pub fn get(&self, regime: Regime) -> &RuinSolution {
        match regime {
            Regime::Unconstrained => &self.unconstrained,
            Regime::NoBorrow => &self.no_borrow,
            Regime::Borrow => &self.borrow,
        }
    }
}

/// Ruin probabilities of all three regimes on `w_grid`.
pub fn compare_regimes(params: MarketParams, c: f64, w_grid: &[f64]) -> Result<Vec<RegimeRow>> {
    let set = RegimeSet::solve(params, c)?;
    w_grid
        .iter()
        .map(|&w| {
            Ok(RegimeRow {
                w,
                psi: set.unconstrained.psi(w)?,
                psi_0: set.no_borrow.psi(w)?,
                psi_b: set.borrow.psi(w)?,
            })
        })
        .collect()
}

/// Diagnostics of the borrowing solution at one borrowing rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub b: f64,
    pub w_b: f64,
    pub w_l: f64,
    pub beta_b: f64,
    pub leverage_at_zero: f64,
    /// `(w, psi_b(w))` at the probe wealths.
    pub probes: Vec<(f64, f64)>,
}

/// Solve the borrowing regime for each `b`, sharing one Riccati solution.
pub fn limit_sweep(
    params: MarketParams,
    c: f64,
    b_values: &[f64],
    probe_wealth: &[f64],
) -> Result<Vec<SweepRow>> {
    let consumption = ConsumptionSpec::Constant { c };
    let nb = validate(params, consumption, Regime::NoBorrow)?;
    let ric = Arc::new(solve_riccati(
        &params,
        c,
        &nb.constants()?,
        RiccatiOptions::default(),
    )?);
    b_values
        .iter()
        .map(|&b| {
            let model = validate(params.with_borrowing_rate(b), consumption, Regime::Borrow)?;
            let sol = solve_with_riccati(&model, ric.clone())?;
            let probes = probe_wealth
                .iter()
                .map(|&w| sol.psi(w).map(|p| (w, p)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepRow {
                b,
                w_b: sol.w_b().expect("borrow regime"),
                w_l: sol.w_l(),
                beta_b: sol.beta(),
                leverage_at_zero: sol.pistar(0.0)?,
                probes,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closedform::psi_unconstrained;
    use crate::testutil::base_params;
    use std::sync::OnceLock;

    fn base_set() -> &'static RegimeSet {
        static SET: OnceLock<RegimeSet> = OnceLock::new();
        SET.get_or_init(|| RegimeSet::solve(base_params(), 1.0).unwrap())
    }

    // (w, psi, psi_0, psi_b) from tests/oracles/ruin_oracle.py
    const ORACLE: [(f64, f64, f64, f64); 8] = [
        (
            1.0,
            0.9333487466829699,
            0.9595828568442295,
            0.9455379612626799,
        ),
        (
            5.0,
            0.6978693987758658,
            0.786840069841467,
            0.7384995143995596,
        ),
        (
            10.0,
            0.46679749763972633,
            0.5493142139988307,
            0.508073807651945,
        ),
        (
            12.0,
            0.3918069634691548,
            0.4620965540903029,
            0.42740234589474324,
        ),
        (
            14.0,
            0.3257636890279143,
            0.38430310037129434,
            0.35544962449821416,
        ),
        (
            20.0,
            0.17480787370966167,
            0.20622085805932097,
            0.1907377965206778,
        ),
        (
            25.0,
            0.09380355681162048,
            0.11066006103842607,
            0.10235170391562183,
        ),
        (
            40.0,
            0.004107401255338012,
            0.004845501482825493,
            0.004481701242877926,
        ),
    ];

    #[test]
    fn matches_oracle() {
        let set = base_set();
        for (w, psi, psi0, psib) in ORACLE {
            assert!((set.unconstrained.psi(w).unwrap() - psi).abs() < 1e-12);
            assert!(
                (set.no_borrow.psi(w).unwrap() - psi0).abs() < 1e-8,
                "psi_0({w})"
            );
            assert!(
                (set.borrow.psi(w).unwrap() - psib).abs() < 1e-8,
                "psi_b({w})"
            );
        }
        assert!((set.no_borrow.beta() - 1.1797000540252158).abs() < 1e-8);
        assert!((set.borrow.beta() - 1.0911281767403345).abs() < 1e-8);
    }

    #[test]
    fn region_layout() {
        let set = base_set();
        let nb: Vec<_> = set.no_borrow.regions().iter().map(|r| r.kind).collect();
        assert_eq!(nb, [RegionKind::Unit, RegionKind::Tail, RegionKind::Safe]);
        let b = set.borrow.regions();
        assert_eq!(b[0].kind, RegionKind::Dual);
        assert!((b[0].end - 10.62).abs() < 0.005);
        assert!((b[1].end - 14.64).abs() < 0.005);
        let u: Vec<_> = set.unconstrained.regions().iter().map(|r| r.kind).collect();
        assert_eq!(u, [RegionKind::Tail, RegionKind::Safe]);
    }

    #[test]
    fn no_borrow_invests_wealth_below_lending_level() {
        let s = &base_set().no_borrow;
        for w in [0.5, 5.0, 10.0, 14.6] {
            assert_eq!(s.pistar(w).unwrap(), w);
        }
        assert!(s.pistar(15.0).unwrap() < 15.0);
    }

    #[test]
    fn borrow_regime_positions() {
        let s = &base_set().borrow;
        assert!(s.evaluate(5.0).unwrap().riskless_position < 0.0);
        for w in [10.7, 12.0, 14.6] {
            assert_eq!(s.evaluate(w).unwrap().riskless_position, 0.0);
        }
        assert!(s.evaluate(20.0).unwrap().riskless_position > 0.0);
    }

    #[test]
    fn unconstrained_is_closed_form() {
        let s = &base_set().unconstrained;
        for i in 0..=60 {
            let w = i as f64;
            assert_eq!(
                s.psi(w).unwrap(),
                psi_unconstrained(w, s.constants()).unwrap()
            );
        }
    }

    #[test]
    fn boundary_values() {
        for regime in Regime::ALL {
            let s = base_set().get(regime);
            assert_eq!(s.psi(0.0).unwrap(), 1.0, "{regime}");
            let far = s.evaluate(60.0).unwrap();
            assert_eq!((far.psi, far.pistar), (0.0, 0.0));
            assert_eq!(s.psi(50.0).unwrap(), 0.0);
            assert!(s.evaluate(-1.0).is_err());
        }
    }

    #[test]
    fn beta_ordering() {
        let set = base_set();
        assert!(set.no_borrow.beta() >= set.borrow.beta());
        assert!(set.borrow.beta() >= 1.0);
    }

    #[test]
    fn derivative_continuity_at_free_boundaries() {
        for regime in [Regime::NoBorrow, Regime::Borrow] {
            let s = base_set().get(regime);
            let mut points = vec![s.w_l()];
            points.extend(s.w_b());
            for w in points {
                let eps = 1e-9 * w;
                let left = s.psi_prime(w - eps).unwrap();
                let right = s.psi_prime(w).unwrap();
                assert!(
                    (left - right).abs() < 1e-6 * right.abs(),
                    "{regime} at {w}: {left} vs {right}"
                );
                let pl = s.pistar(w - eps).unwrap();
                let pr = s.pistar(w).unwrap();
                assert!(
                    (pl - pr).abs() < 1e-6,
                    "{regime} strategy at {w}: {pl} vs {pr}"
                );
            }
            assert!(s.psi_prime(s.safe_level() * (1.0 - 1e-9)).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn borrow_hjb_residual_on_dual_region() {
        let s = &base_set().borrow;
        let p = base_params();
        let wb = s.w_b().unwrap();
        for i in 1..50 {
            let w = wb * i as f64 / 50.0;
            let (h, h1, h2) = (
                s.psi(w).unwrap(),
                s.psi_prime(w).unwrap(),
                s.psi_second(w).unwrap(),
            );
            let resid = (p.b * w - 1.0) * h1
                - (p.mu - p.b).powi(2) * h1 * h1 / (2.0 * p.sigma.powi(2) * h2)
                - p.lambda * h;
            assert!(resid.abs() < 1e-8, "w = {w}: {resid}");
        }
    }

    #[test]
    fn regime_comparison_ordering() {
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.5).collect();
        let rows = compare_regimes(base_params(), 1.0, &grid).unwrap();
        assert!(rows.iter().all(|r| r.is_ordered(1e-9)));
        assert!(rows[0].psi == 1.0 && rows[0].psi_0 == 1.0 && rows[0].psi_b == 1.0);
        let last = rows.last().unwrap();
        assert!(last.psi == 0.0 && last.psi_0 == 0.0 && last.psi_b == 0.0);
    }

    #[test]
    fn sweep_near_lending_rate_converges_to_unconstrained() {
        let rows = limit_sweep(base_params(), 1.0, &[0.02 + 1e-4], &[5.0, 25.0]).unwrap();
        let k = crate::model::derive_constants(&base_params(), 1.0);
        for &(w, p) in &rows[0].probes {
            assert!((p - psi_unconstrained(w, &k).unwrap()).abs() < 1e-3);
        }
    }

    #[test]
    fn sweep_rejects_b_equal_r() {
        assert!(limit_sweep(base_params(), 1.0, &[0.02], &[]).is_err());
    }

    #[test]
    fn rejects_proportional_model() {
        let m = validate(
            base_params(),
            ConsumptionSpec::Proportional { p: 0.05, w0: 1.0 },
            Regime::NoBorrow,
        )
        .unwrap();
        assert!(solve(&m).is_err());
    }
}
