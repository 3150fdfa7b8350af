//! Bracketed scalar root finding: bisection safeguarding Illinois-style
//! secant steps.

use crate::error::{Result, RuinError};

/// Find a root of `f` in `[lo, hi]`, where `f(lo)` and `f(hi)` differ in sign.
///
/// Iterates until the bracket is narrower than `xtol * max(1, |x|)` or an
/// exact zero is hit.
pub fn bracketed_root<F>(mut f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(RuinError::Root(format!(
            "no sign change on [{lo}, {hi}] (f = {fa}, {fb})"
        )));
    }
    // side that was retained on the previous step: -1 for a, +1 for b
    let mut kept = 0i8;
    for _ in 0..400 {
        let width = (b - a).abs();
        let x_scale = a.abs().max(b.abs()).max(1.0);
        if width <= xtol * x_scale {
            break;
        }
        let mid = 0.5 * (a + b);
        let secant = (a * fb - b * fa) / (fb - fa);
        // secant only while it stays well inside the bracket
        let lo_in = a.min(b) + 0.01 * width;
        let hi_in = a.max(b) - 0.01 * width;
        let x = if secant.is_finite() && secant > lo_in && secant < hi_in {
            secant
        } else {
            mid
        };
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if !fx.is_finite() {
            return Err(RuinError::Root(format!("non-finite value at {x}")));
        }
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
            if kept == 1 {
                fb *= 0.5;
            }
            kept = 1;
        } else {
            b = x;
            fb = fx;
            if kept == -1 {
                fa *= 0.5;
            }
            kept = -1;
        }
        // plain bisection every time the secant fails to halve the bracket
        if (b - a).abs() > 0.5 * width {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            kept = 0;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Indices `i` such that `values[i]` and `values[i + 1]` have strictly
/// opposite signs (or `values[i + 1]` is exactly zero).
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] > 0.0 && w[1] <= 0.0) || (w[0] < 0.0 && w[1] >= 0.0))
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let x = bracketed_root(|x| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((x - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn steep_function() {
        let x = bracketed_root(|x: f64| (50.0 * (x - 0.3)).exp() - 1.0, 0.0, 1.0, 1e-14).unwrap();
        assert!((x - 0.3).abs() < 1e-13);
    }

    #[test]
    fn no_sign_change_is_an_error() {
        assert!(matches!(
            bracketed_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12),
            Err(RuinError::Root(_))
        ));
    }

    #[test]
    fn sign_change_indices() {
        assert_eq!(sign_changes(&[1.0, 0.5, -0.1, -0.2, 0.3]), vec![1, 3]);
        assert!(sign_changes(&[1.0, 2.0]).is_empty());
    }
}
