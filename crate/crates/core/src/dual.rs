//! Legendre-dual solution on the leveraged band `[0, w_b)`.
//!
//! Below the borrowing level the HJB equation is fully nonlinear, but its
//! concave dual `h~(v) = min_w [h(w) + w v]` solves the linear equation
//!
//! ```text
//! lambda h~ + (b - lambda) v h~' - m_b v^2 h~'' = c v
//! ```
//!
//! whose general solution is `D1 v^B1 + D2 v^B2 + (c/b) v`. The two
//! constants follow from the conditions at `v_b = -h'(w_b)` and the ratio
//! `rho = v_0 / v_b` from `h~'(v_0) = 0`. All evaluation goes through
//! `v / v_b`, which stays well scaled even when `B1` is in the hundreds of
//! thousands (borrowing rate close to the drift).

use serde::{Deserialize, Serialize};

use crate::error::{Result, RuinError};
use crate::model::MarketParams;
use crate::roots::bracketed_root;

const MAX_LOG_RHO: f64 = 27.631_021_115_928_547; // ln 1e12

/// Roots `B1 > 1` and `B2 < 0` of `m_b B^2 - (b - lambda + m_b) B - lambda = 0`.
pub fn dual_exponents(params: &MarketParams) -> (f64, f64) {
    let mb = params.m_b();
    let q = params.b - params.lambda + mb;
    let disc = (q * q + 4.0 * params.lambda * mb).sqrt();
    // B2 via Vieta avoids cancellation when q > 0 and m_b is tiny
    if q >= 0.0 {
        let b1 = (q + disc) / (2.0 * mb);
        (b1, -params.lambda / (mb * b1))
    } else {
        let b2 = (q - disc) / (2.0 * mb);
        (-params.lambda / (mb * b2), b2)
    }
}

/// Solved dual value function on the leveraged band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualSolution {
    pub b1: f64,
    pub b2: f64,
    /// Coefficient of `v^B1`; may under- or overflow for extreme exponents,
    /// evaluation never uses it directly.
    pub d1: f64,
    pub d2: f64,
    /// `-h'(0)`.
    pub v0: f64,
    /// `-h'(w_b)`.
    pub vb: f64,
    pub wb: f64,
    /// `c / b`.
    pub cb_ratio: f64,
    /// `v0 / vb`.
    pub rho: f64,
    /// `(mu - b) / sigma^2`.
    pub leverage_scale: f64,
    k1: f64,
    k2: f64,
}

/// Primal quantities recovered from the dual at one wealth level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrimalPoint {
    pub v: f64,
    pub psi: f64,
    pub pistar: f64,
}

impl DualSolution {
    /// `w_b sigma^2/(mu - b) + (c/b - w_b)(1 - B2)`; positive for a valid solution.
    pub fn growth_coefficient(&self) -> f64 {
        self.k1
    }

    fn ratio_terms(&self, v: f64) -> (f64, f64) {
        let t = (v / self.vb).ln();
        let span = self.b1 - self.b2;
        (
            self.k1 / span * ((self.b1 - 1.0) * t).exp(),
            self.k2 / span * ((self.b2 - 1.0) * t).exp(),
        )
    }

    /// `h~(v)`.
    pub fn h_tilde(&self, v: f64) -> f64 {
        let (p1, p2) = self.ratio_terms(v);
        v * (-p1 / self.b1 - p2 / self.b2 + self.cb_ratio)
    }

    /// `h~'(v)`; decreasing on `[vb, v0]` from `w_b` to `0`.
    pub fn h_tilde_prime(&self, v: f64) -> f64 {
        let (p1, p2) = self.ratio_terms(v);
        self.cb_ratio - p1 - p2
    }

    /// `h~''(v)`.
    pub fn h_tilde_second(&self, v: f64) -> f64 {
        let (p1, p2) = self.ratio_terms(v);
        -((self.b1 - 1.0) * p1 + (self.b2 - 1.0) * p2) / v
    }

    /// `h~` evaluated through the stored `D1`, `D2` directly.
    pub fn h_tilde_direct(&self, v: f64) -> f64 {
        self.d1 * v.powf(self.b1) + self.d2 * v.powf(self.b2) + self.cb_ratio * v
    }

    /// Optimal risky holding `-((mu - b)/sigma^2) v h~''(v)` in dual form.
    pub fn pistar_at(&self, v: f64) -> f64 {
        let (p1, p2) = self.ratio_terms(v);
        self.leverage_scale * ((self.b1 - 1.0) * p1 + (self.b2 - 1.0) * p2)
    }

    /// Dual variable `v` in `[vb, v0]` with `h~'(v) = w`.
    pub fn invert(&self, w: f64) -> Result<f64> {
        if !(0.0..=self.wb).contains(&w) {
            return Err(RuinError::Domain(format!(
                "wealth {w} outside [0, {}]",
                self.wb
            )));
        }
        let top = self.rho.ln();
        let (mut lo, mut hi) = (0.0_f64, top);
        // h~' decreasing in t = ln(v / vb): value wb at t = 0, 0 at t = top
        for _ in 0..200 {
            if hi - lo <= 1e-15 * top.max(1e-300) {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if self.h_tilde_prime(self.vb * mid.exp()) > w {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = self.vb * (0.5 * (lo + hi)).exp();
        if !v.is_finite() {
            return Err(RuinError::Inversion(format!(
                "no dual point for wealth {w}"
            )));
        }
        Ok(v)
    }
}

/// Solve for `rho`, `v0`, `vb`, `D1` and `D2` given the borrowing level.
pub fn solve_dual(params: &MarketParams, c: f64, wb: f64) -> Result<DualSolution> {
    if !(params.b > params.r && params.b < params.mu) {
        return Err(RuinError::Parameter(
            "dual solution needs r < b < mu".into(),
        ));
    }
    if !(wb > 0.0 && wb < c / params.b) {
        return Err(RuinError::Domain(format!(
            "borrowing level {wb} outside (0, c/b)"
        )));
    }
    let (b1, b2) = dual_exponents(params);
    let cb = c / params.b;
    let leverage_scale = (params.mu - params.b) / (params.sigma * params.sigma);
    let k1 = wb / leverage_scale + (cb - wb) * (1.0 - b2);
    let k2 = -wb / leverage_scale + (cb - wb) * (b1 - 1.0);
    if !(k1 > 0.0) {
        return Err(RuinError::Root(format!(
            "growth coefficient {k1} is not positive; no ratio root exists"
        )));
    }
    let span = b1 - b2;
    // left side of the ratio equation minus c/b, in t = ln rho
    let g = |t: f64| k1 / span * ((b1 - 1.0) * t).exp() + k2 / span * ((b2 - 1.0) * t).exp() - cb;

    let mut hi = 1.0 / (b1 - 1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > MAX_LOG_RHO {
            return Err(RuinError::Root("ratio v0/vb exceeds 1e12".into()));
        }
    }
    let mut t = bracketed_root(g, 0.0, hi, 1e-16)?;
    // Newton polish
    for _ in 0..3 {
        let d = k1 / span * (b1 - 1.0) * ((b1 - 1.0) * t).exp()
            + k2 / span * (b2 - 1.0) * ((b2 - 1.0) * t).exp();
        let step = g(t) / d;
        if !step.is_finite() || step.abs() > 0.1 * t {
            break;
        }
        t -= step;
    }
    let rho = t.exp();

    let p1 = k1 / span * ((b1 - 1.0) * t).exp();
    let p2 = k2 / span * ((b2 - 1.0) * t).exp();
    let bracket = -p1 / b1 - p2 / b2 + cb;
    let v0 = 1.0 / bracket;
    if !(v0.is_finite() && v0 > 0.0) {
        return Err(RuinError::Root(format!(
            "non-positive marginal value v0 = {v0}"
        )));
    }
    let vb = v0 / rho;
    let d1 = -(((1.0 - b1) * vb.ln()).exp()) * k1 / (b1 * span);
    let d2 = -(((1.0 - b2) * vb.ln()).exp()) * k2 / (b2 * span);

    Ok(DualSolution {
        b1,
        b2,
        d1,
        d2,
        v0,
        vb,
        wb,
        cb_ratio: cb,
        rho,
        leverage_scale,
        k1,
        k2,
    })
}

/// Ruin probability and optimal holding at `w` in `[0, w_b)`.
pub fn dual_to_primal(dual: &DualSolution, w: f64) -> Result<PrimalPoint> {
    if !(0.0..dual.wb).contains(&w) {
        return Err(RuinError::Domain(format!(
            "wealth {w} outside [0, {})",
            dual.wb
        )));
    }
    let v = dual.invert(w)?;
    Ok(PrimalPoint {
        v,
        psi: dual.h_tilde(v) - w * v,
        pistar: dual.pistar_at(v),
    })
}

/// Optimal risky holding at zero wealth, in closed form from the solved ratio.
pub fn leverage_at_zero(params: &MarketParams, c: f64, wb: f64) -> Result<f64> {
    let d = solve_dual(params, c, wb)?;
    Ok(closed_form_leverage(&d))
}

fn closed_form_leverage(d: &DualSolution) -> f64 {
    let growth = d.rho.ln() * (d.b1 - 1.0);
    d.leverage_scale * (d.b2 - 1.0) * d.cb_ratio
        + growth.exp() * (d.wb + d.leverage_scale * (d.cb_ratio - d.wb) * (1.0 - d.b2))
}
