//! Monte Carlo estimation of the lifetime ruin probability under an
//! arbitrary allocation rule.
//!
//! Wealth follows an Euler–Maruyama discretisation of
//!
//! ```text
//! dW = [r (W - pi)+ - b (pi - W)+ + mu pi - c(W)] dt + sigma pi dB
//! ```
//!
//! with the death time drawn once per path from an exponential law. Each
//! path owns a ChaCha8 stream keyed by `(seed, path index)`, so results do
//! not depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::assembler::{solve, RuinSolution};
use crate::closedform::{solve_proportional, PowerSolution};
use crate::error::{Result, RuinError};
use crate::model::{ConsumptionSpec, Model};

/// Paths per work unit; partial sums are combined in index order.
const CHUNK: u64 = 4096;

/// Paths stepped in turn by one worker.
const LANES: usize = 8;

/// Crossing probabilities below `exp(-BRIDGE_CUTOFF)` are treated as zero.
const BRIDGE_CUTOFF: f64 = 40.0;

/// Slack on the no-borrowing bound `0 <= pi <= W`.
const FEASIBILITY_SLACK: f64 = 1e-9;

fn default_bridge() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: u64,
    /// Step length in years.
    pub dt: f64,
    pub seed: u64,
    pub w_start: f64,
    /// Paths alive at this time are censored; defaults to `60 / lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_horizon: Option<f64>,
    /// Test for a ruin crossing between grid points with the Brownian
    /// bridge of each step.
    #[serde(default = "default_bridge")]
    pub bridge_correction: bool,
}

impl SimConfig {
    pub fn new(n_paths: u64, dt: f64, seed: u64, w_start: f64) -> Self {
        Self {
            n_paths,
            dt,
            seed,
            w_start,
            max_horizon: None,
            bridge_correction: true,
        }
    }

    pub fn horizon(&self, lambda: f64) -> f64 {
        self.max_horizon.unwrap_or(60.0 / lambda)
    }

    pub fn validate(&self, lambda: f64) -> Result<()> {
        let fail = |msg: String| Err(RuinError::Config(msg));
        if self.n_paths < 1 {
            return fail("n_paths must be at least 1".into());
        }
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return fail(format!("dt must lie in (0, 0.1], got {}", self.dt));
        }
        if !(self.w_start.is_finite() && self.w_start >= 0.0) {
            return fail(format!(
                "w_start must be finite and non-negative, got {}",
                self.w_start
            ));
        }
        let horizon = self.horizon(lambda);
        if !(horizon.is_finite() && horizon >= 10.0 / lambda * (1.0 - 1e-12)) {
            return fail(format!(
                "max_horizon must be at least 10/lambda, got {horizon}"
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub ruin_probability: f64,
    pub std_error: f64,
    pub n_paths: u64,
    pub n_ruined: u64,
    pub n_died: u64,
    /// Paths stopped at the safe level or at the horizon.
    pub n_censored: u64,
    /// Part of `n_censored` that reached the safe level.
    pub n_safe: u64,
    pub mean_time_to_absorption: f64,
}

/// Amount held in the risky asset as a function of wealth.
pub trait AllocationRule: Sync {
    fn allocation(&self, w: f64) -> f64;
}

impl<F: Fn(f64) -> f64 + Sync> AllocationRule for F {
    fn allocation(&self, w: f64) -> f64 {
        self(w)
    }
}

impl AllocationRule for PowerSolution {
    fn allocation(&self, w: f64) -> f64 {
        self.pistar(w)
    }
}

/// Direct evaluation; slow on the dual region, prefer [`StrategyTable`].
impl AllocationRule for RuinSolution {
    fn allocation(&self, w: f64) -> f64 {
        self.pistar(w).unwrap_or(f64::NAN)
    }
}

/// Benchmark strategies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Heuristic {
    AllRiskless,
    ConstantFraction { fraction: f64 },
    AllRisky,
}

impl AllocationRule for Heuristic {
    fn allocation(&self, w: f64) -> f64 {
        match *self {
            Heuristic::AllRiskless => 0.0,
            Heuristic::ConstantFraction { fraction } => fraction * w,
            Heuristic::AllRisky => w,
        }
    }
}

/// Piecewise-linear allocation through sampled `(w, pi)` pairs, constant
/// beyond the end points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable")]
pub struct StrategyTable {
    wealth: Vec<f64>,
    allocation: Vec<f64>,
    /// Intercept and slope of each cell, `pi = a + s w`.
    #[serde(skip)]
    cells: Vec<[f64; 2]>,
    #[serde(skip)]
    uniform: Option<(f64, f64)>,
}

#[derive(Deserialize)]
struct RawTable {
    wealth: Vec<f64>,
    allocation: Vec<f64>,
}

impl TryFrom<RawTable> for StrategyTable {
    type Error = RuinError;

    fn try_from(raw: RawTable) -> Result<Self> {
        Self::from_samples(raw.wealth, raw.allocation)
    }
}

impl StrategyTable {
    pub fn from_samples(wealth: Vec<f64>, allocation: Vec<f64>) -> Result<Self> {
        if wealth.len() != allocation.len() || wealth.len() < 2 {
            return Err(RuinError::Strategy(
                "strategy table needs at least two (w, pi) pairs of equal length".into(),
            ));
        }
        if wealth.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(RuinError::Strategy(
                "strategy wealth grid must be strictly increasing".into(),
            ));
        }
        if allocation.iter().chain(&wealth).any(|v| !v.is_finite()) {
            return Err(RuinError::Strategy(
                "strategy table contains non-finite values".into(),
            ));
        }
        let cells = wealth
            .windows(2)
            .zip(allocation.windows(2))
            .map(|(x, y)| {
                let slope = (y[1] - y[0]) / (x[1] - x[0]);
                [y[0] - slope * x[0], slope]
            })
            .collect();
        let mut table = Self {
            wealth,
            allocation,
            cells,
            uniform: None,
        };
        table.detect_uniform();
        Ok(table)
    }

    /// Samples the optimal strategy on `n_points` uniform points over `[0, c/r]`.
    pub fn from_solution(solution: &RuinSolution, n_points: usize) -> Result<Self> {
        let n = n_points.max(2);
        let top = solution.safe_level();
        let wealth: Vec<f64> = (0..n).map(|i| top * i as f64 / (n - 1) as f64).collect();
        let allocation = wealth
            .iter()
            .map(|&w| solution.pistar(w))
            .collect::<Result<Vec<_>>>()?;
        Self::from_samples(wealth, allocation)
    }

    fn detect_uniform(&mut self) {
        let n = self.wealth.len();
        let (a, b) = (self.wealth[0], self.wealth[n - 1]);
        let h = (b - a) / (n - 1) as f64;
        let uniform = self
            .wealth
            .iter()
            .enumerate()
            .all(|(i, &w)| (w - (a + h * i as f64)).abs() <= 1e-12 * b.abs().max(1.0));
        self.uniform = uniform.then_some((a, 1.0 / h));
    }

    pub fn wealth(&self) -> &[f64] {
        &self.wealth
    }

    pub fn allocations(&self) -> &[f64] {
        &self.allocation
    }

    pub fn eval(&self, w: f64) -> f64 {
        let n = self.wealth.len();
        if w <= self.wealth[0] {
            return self.allocation[0];
        }
        if w >= self.wealth[n - 1] {
            return self.allocation[n - 1];
        }
        let i = match self.uniform {
            Some((a, inv_h)) => (((w - a) * inv_h) as usize).min(n - 2),
            None => self.wealth.partition_point(|&x| x <= w) - 1,
        };
        let [a, s] = self.cells[i];
        a + s * w
    }
}

impl AllocationRule for StrategyTable {
    fn allocation(&self, w: f64) -> f64 {
        self.eval(w)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Ruined,
    Died,
    Safe,
    Horizon,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    ruined: u64,
    died: u64,
    safe: u64,
    horizon: u64,
    time: f64,
}

impl Tally {
    fn add(&mut self, outcome: Outcome, t: f64) {
        match outcome {
            Outcome::Ruined => self.ruined += 1,
            Outcome::Died => self.died += 1,
            Outcome::Safe => self.safe += 1,
            Outcome::Horizon => self.horizon += 1,
        }
        self.time += t;
    }

    fn merge(&mut self, other: &Tally) {
        self.ruined += other.ruined;
        self.died += other.died;
        self.safe += other.safe;
        self.horizon += other.horizon;
        self.time += other.time;
    }
}

struct Dynamics {
    r: f64,
    b: Option<f64>,
    mu: f64,
    sigma: f64,
    lambda: f64,
    consumption: ConsumptionSpec,
    ruin: f64,
    safe: f64,
}

impl Dynamics {
    fn new(model: &Model) -> Self {
        let p = model.params();
        Self {
            r: p.r,
            b: model.regime().borrowing_rate(p),
            mu: p.mu,
            sigma: p.sigma,
            lambda: p.lambda,
            consumption: *model.consumption(),
            ruin: model.consumption().ruin_level(),
            safe: model.safe_level().unwrap_or(f64::INFINITY),
        }
    }

    #[inline(always)]
    fn check(&self, w: f64, pi: f64) -> Result<()> {
        let infeasible = self.b.is_none() && {
            let slack = FEASIBILITY_SLACK * w.max(1.0);
            pi < -slack || pi > w + slack
        };
        if pi.is_finite() && !infeasible {
            Ok(())
        } else {
            Err(strategy_error(w, pi))
        }
    }

    #[inline(always)]
    fn drift(&self, w: f64, pi: f64) -> f64 {
        let riskless = w - pi;
        let carry = if riskless >= 0.0 {
            self.r * riskless
        } else {
            self.b.unwrap_or(self.r) * riskless
        };
        carry + self.mu * pi - self.consumption.rate(w)
    }

    /// Opens path `index`, or resolves it at once when it starts absorbed.
    fn start(
        &self,
        cfg: &SimConfig,
        horizon: f64,
        index: u64,
    ) -> std::result::Result<Lane, (Outcome, f64)> {
        if cfg.w_start <= self.ruin {
            return Err((Outcome::Ruined, 0.0));
        }
        if cfg.w_start >= self.safe {
            return Err((Outcome::Safe, 0.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index);
        let e: f64 = rng.sample(Exp1);
        let death = e / self.lambda;
        let (end, last) = if death < horizon {
            (death, Outcome::Died)
        } else {
            (horizon, Outcome::Horizon)
        };
        let full_steps = (end / cfg.dt).floor() as u64;
        Ok(Lane {
            index,
            rng,

            w: cfg.w_start,
            step: 0,
            full_steps,
            partial: end - full_steps as f64 * cfg.dt,
            end,
            last,
        })
    }

    /// Moves a path one step; returns its outcome once it is absorbed.
    #[inline(always)]
    fn step_lane<R: AllocationRule + ?Sized>(
        &self,
        rule: &R,
        cfg: &SimConfig,
        full: &Step,
        lane: &mut Lane,
    ) -> Result<Option<(Outcome, f64)>> {
        if lane.step < lane.full_steps {
            lane.step += 1;
            let t = lane.step as f64 * cfg.dt;
            return Ok(match self.advance(rule, cfg, full, lane)? {
                None => Some((Outcome::Ruined, t)),
                Some(next) if next >= self.safe => Some((Outcome::Safe, t)),
                Some(next) => {
                    lane.w = next;
                    None
                }
            });
        }
        if lane.partial > 0.0 {
            match self.advance(rule, cfg, &Step::new(lane.partial), lane)? {
                None => return Ok(Some((Outcome::Ruined, lane.end))),
                Some(next) if next >= self.safe => return Ok(Some((Outcome::Safe, lane.end))),
                Some(_) => {}
            }
        }
        Ok(Some((lane.last, lane.end)))
    }

    /// Simulates paths `first..last`, stepping up to `LANES` of them in
    /// turn so that their serial dependency chains overlap.
    fn run_chunk<R: AllocationRule + ?Sized>(
        &self,
        rule: &R,
        cfg: &SimConfig,
        horizon: f64,
        first: u64,
        last: u64,
    ) -> Result<Tally> {
        let mut outcomes = vec![(Outcome::Horizon, 0.0); (last - first) as usize];
        let mut lanes: Vec<Lane> = Vec::with_capacity(LANES);
        let full = Step::new(cfg.dt);
        let mut next = first;
        loop {
            while lanes.len() < LANES && next < last {
                match self.start(cfg, horizon, next) {
                    Ok(lane) => lanes.push(lane),
                    Err(done) => outcomes[(next - first) as usize] = done,
                }
                next += 1;
            }
            if lanes.is_empty() {
                break;
            }
            let mut k = 0;
            while k < lanes.len() {
                match self.step_lane(rule, cfg, &full, &mut lanes[k])? {
                    Some(done) => {
                        outcomes[(lanes[k].index - first) as usize] = done;
                        lanes.swap_remove(k);
                    }
                    None => k += 1,
                }
            }
        }
        let mut tally = Tally::default();
        for (outcome, t) in outcomes {
            tally.add(outcome, t);
        }
        Ok(tally)
    }

    /// One Euler step; `None` when the path is ruined during it.
    #[inline(always)]
    fn advance<R: AllocationRule + ?Sized>(
        &self,
        rule: &R,
        cfg: &SimConfig,
        step: &Step,
        lane: &mut Lane,
    ) -> Result<Option<f64>> {
        let w = lane.w;
        let pi = rule.allocation(w);
        self.check(w, pi)?;
        let vol = self.sigma * pi;
        let z: f64 = lane.rng.sample(StandardNormal);
        let next = w + self.drift(w, pi) * step.h + vol * step.sqrt_h * z;
        if next <= self.ruin {
            return Ok(None);
        }
        if cfg.bridge_correction {
            // Crossing probability exp(-k), k = 2 (w - L)(next - L) / (vol^2 h).
            let gap = 2.0 * (w - self.ruin) * (next - self.ruin);
            let scale = vol * vol * step.h;
            if gap < BRIDGE_CUTOFF * scale && lane.rng.random::<f64>() < (-gap / scale).exp() {
                return Ok(None);
            }
        }
        Ok(Some(next))
    }
}

#[cold]
fn strategy_error(w: f64, pi: f64) -> RuinError {
    if pi.is_finite() {
        RuinError::Strategy(format!(
            "no-borrowing allocation {pi} at w = {w} lies outside [0, w]"
        ))
    } else {
        RuinError::Strategy(format!("allocation at w = {w} is not finite"))
    }
}

struct Lane {
    index: u64,
    rng: ChaCha8Rng,

    w: f64,
    step: u64,
    full_steps: u64,
    partial: f64,
    end: f64,
    last: Outcome,
}

struct Step {
    h: f64,
    sqrt_h: f64,
}

impl Step {
    fn new(h: f64) -> Self {
        Self {
            h,
            sqrt_h: h.sqrt(),
        }
    }
}

/// Estimate the ruin probability from `config.w_start` under `rule`.
pub fn simulate<R: AllocationRule + ?Sized>(
    model: &Model,
    rule: &R,
    config: &SimConfig,
) -> Result<SimResult> {
    let dynamics = Dynamics::new(model);
    config.validate(dynamics.lambda)?;
    let horizon = config.horizon(dynamics.lambda);
    let n = config.n_paths;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Result<Tally>> = (0..chunks)
        .into_par_iter()
        .map(|k| dynamics.run_chunk(rule, config, horizon, k * CHUNK, ((k + 1) * CHUNK).min(n)))
        .collect();
    let mut total = Tally::default();
    for part in &partial {
        total.merge(part.as_ref().map_err(Clone::clone)?);
    }
    let p = total.ruined as f64 / n as f64;
    Ok(SimResult {
        ruin_probability: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        n_paths: n,
        n_ruined: total.ruined,
        n_died: total.died,
        n_censored: total.safe + total.horizon,
        n_safe: total.safe,
        mean_time_to_absorption: total.time / n as f64,
    })
}

/// The analytic optimum for a model, whichever consumption rule it uses.
pub enum OptimalStrategy {
    Constant(Box<RuinSolution>, StrategyTable),
    Proportional(PowerSolution),
}

/// Table resolution used for the optimal constant-consumption strategy.
pub const STRATEGY_TABLE_POINTS: usize = 8193;

impl OptimalStrategy {
    pub fn solve(model: &Model) -> Result<Self> {
        match model.consumption() {
            ConsumptionSpec::Constant { .. } => {
                let sol = solve(model)?;
                let table = StrategyTable::from_solution(&sol, STRATEGY_TABLE_POINTS)?;
                Ok(Self::Constant(Box::new(sol), table))
            }
            ConsumptionSpec::Proportional { .. } => {
                Ok(Self::Proportional(solve_proportional(model)?))
            }
        }
    }

    pub fn psi(&self, w: f64) -> Result<f64> {
        match self {
            Self::Constant(sol, _) => sol.psi(w),
            Self::Proportional(sol) => Ok(sol.psi(w)),
        }
    }
}

impl AllocationRule for OptimalStrategy {
    fn allocation(&self, w: f64) -> f64 {
        match self {
            Self::Constant(_, table) => table.eval(w),
            Self::Proportional(sol) => sol.pistar(w),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub dt: f64,
    pub w_start: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub analytic: f64,
    pub error: f64,
    /// `error / std_error`, zero when the estimate has no variance.
    pub z_score: f64,
}

/// Simulate the optimal strategy at every `(dt, w)` pair, with the same seed
/// on each rung.
pub fn convergence_study(
    model: &Model,
    base: &SimConfig,
    w_probes: &[f64],
    dt_ladder: &[f64],
) -> Result<Vec<ConvergenceRow>> {
    let optimal = OptimalStrategy::solve(model)?;
    let mut rows = Vec::with_capacity(w_probes.len() * dt_ladder.len());
    for &dt in dt_ladder {
        for &w in w_probes {
            let cfg = SimConfig {
                dt,
                w_start: w,
                ..*base
            };
            let res = simulate(model, &optimal, &cfg)?;
            let analytic = optimal.psi(w)?;
            let error = res.ruin_probability - analytic;
            rows.push(ConvergenceRow {
                dt,
                w_start: w,
                estimate: res.ruin_probability,
                std_error: res.std_error,
                analytic,
                error,
                z_score: if res.std_error > 0.0 {
                    error / res.std_error
                } else {
                    0.0
                },
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate;
    use crate::model::Regime;
    use crate::testutil::base_params;

    fn model(regime: Regime) -> Model {
        validate(base_params(), ConsumptionSpec::Constant { c: 1.0 }, regime).unwrap()
    }

    #[test]
    fn config_validation() {
        let m = model(Regime::NoBorrow);
        let ok = SimConfig::new(10, 0.01, 1, 5.0);
        assert!(ok.validate(0.04).is_ok());
        for bad in [
            SimConfig { n_paths: 0, ..ok },
            SimConfig { dt: 0.0, ..ok },
            SimConfig { dt: 0.2, ..ok },
            SimConfig {
                max_horizon: Some(100.0),
                ..ok
            },
            SimConfig {
                w_start: -1.0,
                ..ok
            },
        ] {
            assert!(matches!(
                simulate(&m, &Heuristic::AllRisky, &bad),
                Err(RuinError::Config(_))
            ));
        }
        assert!(SimConfig {
            max_horizon: Some(250.0),
            ..ok
        }
        .validate(0.04)
        .is_ok());
    }

    #[test]
    fn trivial_starts() {
        let m = model(Regime::Borrow);
        let zero = simulate(
            &m,
            &Heuristic::AllRisky,
            &SimConfig::new(1000, 0.01, 3, 0.0),
        )
        .unwrap();
        assert_eq!(
            (zero.ruin_probability, zero.std_error, zero.n_ruined),
            (1.0, 0.0, 1000)
        );
        let safe = simulate(
            &m,
            &Heuristic::AllRisky,
            &SimConfig::new(1000, 0.01, 3, 50.0),
        )
        .unwrap();
        assert_eq!(
            (safe.ruin_probability, safe.n_safe, safe.n_censored),
            (0.0, 1000, 1000)
        );
        assert_eq!(safe.mean_time_to_absorption, 0.0);
    }

    #[test]
    fn counts_add_up_and_error_formula() {
        let m = model(Regime::NoBorrow);
        let r = simulate(
            &m,
            &Heuristic::ConstantFraction { fraction: 0.5 },
            &SimConfig::new(5000, 0.05, 9, 10.0),
        )
        .unwrap();
        assert_eq!(r.n_ruined + r.n_died + r.n_censored, 5000);
        let p = r.ruin_probability;
        assert_eq!(r.std_error, (p * (1.0 - p) / 5000.0).sqrt());
        assert!(r.mean_time_to_absorption > 0.0);
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let m = model(Regime::Borrow);
        let cfg = SimConfig::new(3 * CHUNK + 17, 0.02, 42, 8.0);
        let rule = Heuristic::ConstantFraction { fraction: 1.5 };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate(&m, &rule, &cfg).unwrap())
        };
        let a = run(1);
        assert_eq!(a, run(3));
        assert_eq!(a, simulate(&m, &rule, &cfg).unwrap());
        let other = simulate(&m, &rule, &SimConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.n_ruined, other.n_ruined);
    }

    #[test]
    fn no_borrow_rejects_leverage_and_short_sales() {
        let m = model(Regime::NoBorrow);
        let cfg = SimConfig::new(10, 0.01, 0, 5.0);
        let lev = simulate(&m, &|w: f64| 1.5 * w, &cfg);
        assert!(matches!(lev, Err(RuinError::Strategy(_))));
        let short = simulate(&m, &|_w: f64| -1.0, &cfg);
        assert!(matches!(short, Err(RuinError::Strategy(_))));
        let nan = simulate(&model(Regime::Borrow), &|_w: f64| f64::NAN, &cfg);
        assert!(matches!(nan, Err(RuinError::Strategy(_))));
        assert!(simulate(&model(Regime::Borrow), &|w: f64| 1.5 * w, &cfg).is_ok());
    }

    #[test]
    fn all_riskless_ruin_is_survival_to_exhaustion() {
        // W' = r W - c exhausts wealth at T = -ln(1 - r w / c) / r.
        let m = model(Regime::NoBorrow);
        let w: f64 = 20.0;
        let exhaust = -(1.0 - 0.02 * w).ln() / 0.02;
        let exact = (-0.04 * exhaust).exp();
        let r = simulate(
            &m,
            &Heuristic::AllRiskless,
            &SimConfig::new(40_000, 0.01, 5, w),
        )
        .unwrap();
        assert!(
            (r.ruin_probability - exact).abs() < 3.0 * r.std_error + 2e-3,
            "{r:?} vs {exact}"
        );
    }

    #[test]
    fn strategy_table_lookup() {
        let t = StrategyTable::from_samples(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 2.0, 2.0, 0.0])
            .unwrap();
        assert_eq!(t.eval(-1.0), 0.0);
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(3.0), 1.0);
        assert_eq!(t.eval(9.0), 0.0);
        let u = StrategyTable::from_samples(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 4.0]).unwrap();
        assert!(u.uniform.is_some());
        assert_eq!(u.eval(1.5), 2.5);
        assert_eq!(u.eval(2.0), 4.0);
        assert!(StrategyTable::from_samples(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(StrategyTable::from_samples(vec![0.0], vec![1.0]).is_err());
        let json = serde_json::to_string(&u).unwrap();
        let back: StrategyTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, u);
        assert!(
            serde_json::from_str::<StrategyTable>(r#"{"wealth":[1,0],"allocation":[0,0]}"#)
                .is_err()
        );
    }

    #[test]
    fn table_from_solution_tracks_optimum() {
        let sol = solve(&model(Regime::Borrow)).unwrap();
        let t = StrategyTable::from_solution(&sol, 4097).unwrap();
        for w in [0.3, 2.0, 7.7, 10.0, 12.0, 14.0, 30.0] {
            let exact = sol.pistar(w).unwrap();
            assert!((t.eval(w) - exact).abs() < 1e-3 * exact.max(1.0), "w = {w}");
        }
    }

    #[test]
    fn moderate_sample_agrees_with_analytic() {
        let m = model(Regime::NoBorrow);
        let rows = convergence_study(
            &m,
            &SimConfig::new(20_000, 0.02, 11, 10.0),
            &[10.0],
            &[0.02],
        )
        .unwrap();
        assert!(
            rows[0].z_score.abs() < 3.0 + 2e-3 / rows[0].std_error,
            "{:?}",
            rows[0]
        );
    }
}
