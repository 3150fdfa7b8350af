//! Adaptive Dormand–Prince 5(4) integration of a scalar ODE `y' = f(x, y)`.

use crate::error::{Result, RuinError};

#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates from `x0` through each of `targets` in turn (monotone in the
/// direction of integration) and returns `y` at every target.
pub fn integrate_through<F>(
    f: F,
    x0: f64,
    y0: f64,
    targets: &[f64],
    tol: Tolerances,
) -> Result<(Vec<f64>, Stats)>
where
    F: Fn(f64, f64) -> f64,
{
    let mut out = Vec::with_capacity(targets.len());
    let mut stats = Stats::default();
    let Some(&last) = targets.last() else {
        return Ok((out, stats));
    };
    let dir = if last >= x0 { 1.0 } else { -1.0 };
    let span = (last - x0).abs();
    let mut x = x0;
    let mut y = y0;
    let mut k1 = f(x, y);
    let mut h = (span * 1e-6).max(1e-12);

    for &target in targets {
        if (target - x) * dir < 0.0 {
            return Err(RuinError::Integration(format!(
                "target {target} lies behind current position {x}"
            )));
        }
        while (target - x) * dir > 0.0 {
            if stats.accepted + stats.rejected >= tol.max_steps {
                return Err(RuinError::Integration(format!(
                    "step budget exhausted at x = {x}"
                )));
            }
            let remaining = (target - x).abs();
            let hit = h >= remaining;
            let step = if hit { remaining } else { h };
            let hs = dir * step;

            let k2 = f(x + C2 * hs, y + hs * A21 * k1);
            let k3 = f(x + C3 * hs, y + hs * (A31 * k1 + A32 * k2));
            let k4 = f(x + C4 * hs, y + hs * (A41 * k1 + A42 * k2 + A43 * k3));
            let k5 = f(
                x + C5 * hs,
                y + hs * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            );
            let xn = if hit { target } else { x + hs };
            let k6 = f(
                xn,
                y + hs * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            );
            let yn = y + hs * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let k7 = f(xn, yn);
            let err = hs * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let scale = tol.atol + tol.rtol * y.abs().max(yn.abs());
            let ratio = (err / scale).abs();

            if !yn.is_finite() || !ratio.is_finite() {
                stats.rejected += 1;
                h = step * 0.1;
            } else if ratio <= 1.0 {
                stats.accepted += 1;
                x = xn;
                y = yn;
                k1 = k7;
                let grow = if ratio == 0.0 {
                    5.0
                } else {
                    (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
                };
                // a clipped final step says nothing about the natural step size
                h = if hit { h.max(step * grow) } else { step * grow };
            } else {
                stats.rejected += 1;
                h = step * (0.9 * ratio.powf(-0.2)).max(0.1);
            }
            if h < 1e-15 * x.abs().max(1.0) {
                return Err(RuinError::Integration(format!(
                    "step size underflow at x = {x}"
                )));
            }
        }
        out.push(y);
    }
    Ok((out, stats))
}
