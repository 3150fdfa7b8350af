//! Piecewise cubic Hermite interpolation with Fritsch–Carlson slope limiting.

use crate::error::{Result, RuinError};

/// Cubic Hermite interpolant on a strictly increasing grid.
///
/// Slopes are either supplied (for example exact ODE derivatives) or
/// estimated from the data; in both cases they are limited so that the
/// interpolant is monotone on every cell where the data are.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

fn check_grid(xs: &[f64], ys: &[f64]) -> Result<()> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(RuinError::Domain(format!(
            "interpolation needs at least two matching points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(RuinError::Domain(
            "interpolation grid must be strictly increasing".into(),
        ));
    }
    if ys.iter().any(|y| !y.is_finite()) {
        return Err(RuinError::Domain(
            "interpolation data must be finite".into(),
        ));
    }
    Ok(())
}

fn limit_slopes(xs: &[f64], ys: &[f64], ds: &mut [f64]) {
    for i in 0..xs.len() - 1 {
        let delta = (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
        if delta == 0.0 {
            ds[i] = 0.0;
            ds[i + 1] = 0.0;
            continue;
        }
        if ds[i].signum() != delta.signum() && ds[i] != 0.0 {
            ds[i] = 0.0;
        }
        if ds[i + 1].signum() != delta.signum() && ds[i + 1] != 0.0 {
            ds[i + 1] = 0.0;
        }
        let a = ds[i] / delta;
        let b = ds[i + 1] / delta;
        let s = a * a + b * b;
        if s > 9.0 {
            let t = 3.0 / s.sqrt();
            ds[i] = t * a * delta;
            ds[i + 1] = t * b * delta;
        }
    }
}

impl MonotoneCubic {
    /// Interpolant through `(xs, ys)` with the given node slopes.
    pub fn with_slopes(xs: Vec<f64>, ys: Vec<f64>, mut ds: Vec<f64>) -> Result<Self> {
        check_grid(&xs, &ys)?;
        if ds.len() != xs.len() {
            return Err(RuinError::Domain("slope count must match grid".into()));
        }
        limit_slopes(&xs, &ys, &mut ds);
        Ok(Self { xs, ys, ds })
    }

    /// PCHIP: slopes from weighted harmonic means of neighbouring secants.
    pub fn pchip(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        check_grid(&xs, &ys)?;
        let n = xs.len();
        let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
        let mut ds = vec![0.0; n];
        if n == 2 {
            ds[0] = delta[0];
            ds[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    ds[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            ds[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            ds[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        limit_slopes(&xs, &ys, &mut ds);
        Ok(Self { xs, ys, ds })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn slopes(&self) -> &[f64] {
        &self.ds
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// Cell index containing `x`, clamped to the grid.
    fn cell(&self, x: f64) -> usize {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&g| g <= x);
        i.saturating_sub(1).min(n - 2)
    }

    fn basis(&self, x: f64) -> (usize, f64, f64) {
        let i = self.cell(x);
        let h = self.xs[i + 1] - self.xs[i];
        (i, h, (x - self.xs[i]) / h)
    }

    /// Value at `x`; outside the grid the end cells are extrapolated.
    pub fn eval(&self, x: f64) -> f64 {
        let (i, h, t) = self.basis(x);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.ys[i] + h10 * h * self.ds[i] + h01 * self.ys[i + 1] + h11 * h * self.ds[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, h, t) = self.basis(x);
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.ys[i] + d01 * self.ys[i + 1]) / h + d10 * self.ds[i] + d11 * self.ds[i + 1]
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}
