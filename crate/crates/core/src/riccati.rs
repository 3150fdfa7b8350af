//! The Riccati reduction `y = h / h'` of the fully-invested HJB equation,
//! its auxiliary lines, and the free boundaries read off from them.
//!
//! On the region where the whole of wealth is held in the risky asset the
//! ruin probability `h` solves `lambda h = (mu w - c) h' + sigma^2 w^2 h'' / 2`.
//! Writing `y = h / h'` gives the first-order equation
//!
//! ```text
//! sigma^2 w^2 (y' - 1) = -2 lambda y^2 + 2 (mu w - c) y
//! ```
//!
//! which is integrated backward from the lending level, where `y` is known
//! exactly, toward the singular point `w = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};
use crate::interp::MonotoneCubic;
use crate::model::{DerivedConstants, MarketParams};
use crate::ode::{integrate_through, Stats, Tolerances};
use crate::roots::{bracketed_root, sign_changes};

/// Number of dense-output points on `[0, w_l]`.
pub const DEFAULT_GRID_POINTS: usize = 2048;

/// Below this fraction of `w_l` the solution is taken from its Taylor expansion.
pub const TAYLOR_FRACTION: f64 = 1e-6;

const ROOT_XTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct RiccatiOptions {
    pub grid_points: usize,
    pub tolerances: Tolerances,
}

impl Default for RiccatiOptions {
    fn default() -> Self {
        Self {
            grid_points: DEFAULT_GRID_POINTS,
            tolerances: Tolerances::default(),
        }
    }
}

/// Coefficients of the Riccati equation for one market and consumption rate.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Coefficients {
    mu: f64,
    sigma2: f64,
    lambda: f64,
    c: f64,
}

impl Coefficients {
    fn slope(&self, w: f64, y: f64) -> f64 {
        // -2 lambda y^2 + 2 (mu w - c) y = -2 y (lambda y + c - mu w)
        1.0 - 2.0 * y * (self.lambda * y + self.c - self.mu * w) / (self.sigma2 * w * w)
    }

    /// Second-order expansion about the singular point.
    fn taylor(&self, w: f64) -> (f64, f64) {
        let curvature = self.sigma2 * (self.mu - self.lambda) / (self.lambda * self.c);
        let y = -self.c / self.lambda + self.mu / self.lambda * w + 0.5 * curvature * w * w;
        let dy = self.mu / self.lambda + curvature * w;
        (y, dy)
    }
}

/// Dense solution of the Riccati equation on `[0, w_l]`.
#[derive(Debug, Clone)]
pub struct RiccatiSolution {
    coeffs: Coefficients,
    w_l: f64,
    taylor_below: f64,
    interpolant: MonotoneCubic,
    /// `y` at `TAYLOR_FRACTION * w_l` from the integrator, for the accuracy check.
    integrated_at_floor: f64,
    stats: Stats,
    log_h: Vec<f64>,
}

/// Backward-integrate the Riccati equation from the lending level.
pub fn solve_riccati(
    params: &MarketParams,
    c: f64,
    constants: &DerivedConstants,
    options: RiccatiOptions,
) -> Result<RiccatiSolution> {
    let n = options.grid_points.max(8);
    let coeffs = Coefficients {
        mu: params.mu,
        sigma2: params.sigma * params.sigma,
        lambda: params.lambda,
        c,
    };
    let w_l = constants.w_l;
    let y_l = -(constants.safe_level - w_l) / constants.d;
    let floor = TAYLOR_FRACTION * w_l;

    let grid: Vec<f64> = (0..n).map(|i| w_l * i as f64 / (n - 1) as f64).collect();
    // grid points strictly above the floor, in integration order, then the floor itself
    let mut targets: Vec<f64> = grid[1..n - 1]
        .iter()
        .rev()
        .copied()
        .filter(|&w| w > floor)
        .collect();
    targets.push(floor);

    let rhs = |w: f64, y: f64| coeffs.slope(w, y);
    let (values, stats) = integrate_through(rhs, w_l, y_l, &targets, options.tolerances)?;
    let integrated_at_floor = *values.last().expect("floor target");

    let mut ys = vec![0.0; n];
    ys[n - 1] = y_l;
    let mut k = 0;
    for i in (1..n - 1).rev() {
        if grid[i] > floor {
            ys[i] = values[k];
            k += 1;
        } else {
            ys[i] = coeffs.taylor(grid[i]).0;
        }
    }
    ys[0] = coeffs.taylor(0.0).0;
    if let Some(i) = ys.iter().position(|&y| !(y < 0.0)) {
        return Err(RuinError::Integration(format!(
            "y reached {} at w = {}, expected negative values",
            ys[i], grid[i]
        )));
    }
    let ds: Vec<f64> = grid
        .iter()
        .zip(&ys)
        .map(|(&w, &y)| {
            if w <= floor {
                coeffs.taylor(w).1
            } else {
                coeffs.slope(w, y)
            }
        })
        .collect();
    let interpolant = MonotoneCubic::with_slopes(grid, ys, ds)?;

    let mut sol = RiccatiSolution {
        coeffs,
        w_l,
        taylor_below: floor,
        interpolant,
        integrated_at_floor,
        stats,
        log_h: Vec::new(),
    };
    sol.log_h = sol.cumulative_log_h();
    Ok(sol)
}

// Five-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

impl RiccatiSolution {
    pub fn w_l(&self) -> f64 {
        self.w_l
    }

    pub fn grid(&self) -> &[f64] {
        self.interpolant.xs()
    }

    pub fn y_values(&self) -> &[f64] {
        self.interpolant.ys()
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    /// `y` from the integrator at the Taylor floor, and the Taylor value there.
    pub fn floor_check(&self) -> (f64, f64) {
        (
            self.integrated_at_floor,
            self.coeffs.taylor(self.taylor_below).0,
        )
    }

    /// `y(w)` for `w` in `[0, w_l]`.
    pub fn y(&self, w: f64) -> f64 {
        if w < self.taylor_below {
            self.coeffs.taylor(w).0
        } else {
            self.interpolant.eval(w)
        }
    }

    /// Derivative of the interpolant.
    pub fn y_prime(&self, w: f64) -> f64 {
        if w < self.taylor_below {
            self.coeffs.taylor(w).1
        } else {
            self.interpolant.derivative(w)
        }
    }

    /// `y'` taken from the differential equation itself rather than the interpolant.
    pub fn y_prime_ode(&self, w: f64) -> f64 {
        if w < self.taylor_below {
            self.coeffs.taylor(w).1
        } else {
            self.coeffs.slope(w, self.y(w))
        }
    }

    /// Residual `sigma^2 w^2 (y' - 1) + 2 lambda y^2 - 2 (mu w - c) y` using the
    /// interpolant derivative.
    pub fn residual(&self, w: f64) -> f64 {
        let Coefficients {
            mu,
            sigma2,
            lambda,
            c,
        } = self.coeffs;
        let y = self.y(w);
        sigma2 * w * w * (self.y_prime(w) - 1.0) + 2.0 * lambda * y * y - 2.0 * (mu * w - c) * y
    }

    fn integral_of_reciprocal(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(x, wt)| wt / self.y(mid + half * x))
            .sum::<f64>()
            * half
    }

    /// `ln h(w_i) - ln h(0)` at every grid node.
    fn cumulative_log_h(&self) -> Vec<f64> {
        let grid = self.grid();
        let mut out = Vec::with_capacity(grid.len());
        out.push(0.0);
        let mut acc = 0.0;
        for pair in grid.windows(2) {
            acc += self.integral_of_reciprocal(pair[0], pair[1]);
            out.push(acc);
        }
        out
    }

    /// `ln h(w) - ln h(0)` for `w` in `[0, w_l]`.
    pub fn log_h(&self, w: f64) -> f64 {
        let grid = self.grid();
        let n = grid.len();
        let i = grid
            .partition_point(|&g| g <= w)
            .saturating_sub(1)
            .min(n - 2);
        self.log_h[i] + self.integral_of_reciprocal(grid[i], w)
    }

    /// Profile `h` anchored at `h(anchor_w) = anchor_value`.
    pub fn profile(&self, anchor_w: f64, anchor_value: f64) -> Result<HProfile<'_>> {
        if !(0.0..=self.w_l).contains(&anchor_w) {
            return Err(RuinError::Domain(format!(
                "anchor {anchor_w} outside [0, {}]",
                self.w_l
            )));
        }
        if !(anchor_value > 0.0 && anchor_value <= 1.0) {
            return Err(RuinError::Domain(format!(
                "anchor value {anchor_value} outside (0, 1]"
            )));
        }
        Ok(HProfile {
            riccati: self,
            log_scale: anchor_value.ln() - self.log_h(anchor_w),
        })
    }

    /// Profile with `ln h(w) = log_scale + ln h(w) - ln h(0)`, as returned by
    /// [`HProfile::log_scale`].
    pub fn profile_from_log_scale(&self, log_scale: f64) -> HProfile<'_> {
        HProfile {
            riccati: self,
            log_scale,
        }
    }
}

/// `h` on the fully-invested region, recovered from `h'/h = 1/y`.
#[derive(Debug, Clone, Copy)]
pub struct HProfile<'a> {
    riccati: &'a RiccatiSolution,
    log_scale: f64,
}

impl HProfile<'_> {
    pub fn h(&self, w: f64) -> f64 {
        (self.log_scale + self.riccati.log_h(w)).exp()
    }

    pub fn h_prime(&self, w: f64) -> f64 {
        self.h(w) / self.riccati.y(w)
    }

    /// From `h''/h = (1 - y') / y^2`.
    pub fn h_second(&self, w: f64) -> f64 {
        let y = self.riccati.y(w);
        self.h(w) * (1.0 - self.riccati.y_prime_ode(w)) / (y * y)
    }

    /// Owned copy of the scale, for storage next to the Riccati solution.
    pub fn log_scale(&self) -> f64 {
        self.log_scale
    }
}

/// Reconstruct `h` on `targets` from `h(anchor_w) = anchor_value`.
pub fn reconstruct_h(
    riccati: &RiccatiSolution,
    anchor_w: f64,
    anchor_value: f64,
    targets: &[f64],
) -> Result<Vec<f64>> {
    let profile = riccati.profile(anchor_w, anchor_value)?;
    targets
        .iter()
        .map(|&w| {
            if (0.0..=riccati.w_l).contains(&w) {
                Ok(profile.h(w))
            } else {
                Err(RuinError::Domain(format!(
                    "target {w} outside [0, {}]",
                    riccati.w_l
                )))
            }
        })
        .collect()
}

/// Which auxiliary line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuxKind {
    /// Slope `(mu + r) / 2 lambda`; touches `y` at `0` and `w_l`.
    Z,
    /// Slope `(mu + b) / 2 lambda`; crosses `y` at the borrowing level.
    ZB,
    /// Slope `mu / lambda`; crosses `y` at the inflection point.
    ZMu,
}

/// Straight line `slope * w + intercept` compared against `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxLine {
    pub slope: f64,
    pub intercept: f64,
}

impl AuxLine {
    pub fn at(&self, w: f64) -> f64 {
        self.slope * w + self.intercept
    }
}

pub fn aux_line(kind: AuxKind, params: &MarketParams, c: f64) -> AuxLine {
    let l2 = 2.0 * params.lambda;
    let slope = match kind {
        AuxKind::Z => (params.mu + params.r) / l2,
        AuxKind::ZB => (params.mu + params.b) / l2,
        AuxKind::ZMu => params.mu / params.lambda,
    };
    AuxLine {
        slope,
        intercept: -c / params.lambda,
    }
}

/// First crossing of `y` from above to below `line` on `(0, w_l]`.
fn crossing(riccati: &RiccatiSolution, line: AuxLine, what: &str) -> Result<f64> {
    let grid = riccati.grid();
    let gaps: Vec<f64> = grid[1..]
        .iter()
        .map(|&w| riccati.y(w) - line.at(w))
        .collect();
    let first = sign_changes(&gaps)
        .into_iter()
        .find(|&i| gaps[i] > 0.0)
        .ok_or_else(|| {
            RuinError::Root(format!("{what}: y never drops below the auxiliary line"))
        })?;
    let (lo, hi) = (grid[first + 1], grid[first + 2]);
    bracketed_root(|w| riccati.y(w) - line.at(w), lo, hi, ROOT_XTOL)
}

/// Borrowing level: where `y` meets `z_b`.
pub fn find_wb(riccati: &RiccatiSolution, params: &MarketParams, c: f64) -> Result<f64> {
    if !(params.b > params.r && params.b < params.mu) {
        return Err(RuinError::Parameter(
            "borrowing level needs r < b < mu".into(),
        ));
    }
    crossing(riccati, aux_line(AuxKind::ZB, params, c), "borrowing level")
}

/// Inflection point of the no-borrowing ruin probability; zero when `mu <= lambda`.
pub fn find_wmu(riccati: &RiccatiSolution, params: &MarketParams, c: f64) -> Result<f64> {
    if params.mu <= params.lambda {
        return Ok(0.0);
    }
    crossing(
        riccati,
        aux_line(AuxKind::ZMu, params, c),
        "inflection point",
    )
}
