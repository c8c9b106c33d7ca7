//! Scalar root finding: bracketed bisection followed by a safeguarded Newton polish.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Bisection stops once the bracket is narrower than this.
    pub bisect_width: f64,
    /// Required |f| at the returned point.
    pub ftol: f64,
    pub max_iter: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            bisect_width: 1e-6,
            ftol: 1e-12,
            max_iter: 200,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// Finds a root of `f` inside `[lo, hi]`, where `f(lo)` and `f(hi)` have opposite signs.
///
/// Newton steps that would leave the current bracket fall back to bisection.
/// Once `|f| < ftol` the iteration keeps polishing until the Newton update stalls
/// at the level of a few ulps, so the result is as accurate as `f` can be evaluated.
pub fn bisect_newton<F, D>(
    what: &'static str,
    f: F,
    df: D,
    lo: f64,
    hi: f64,
    opts: RootOptions,
) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, bracket: (a, b), iterations: 0 });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, bracket: (a, b), iterations: 0 });
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::Bracket { what, lo: a, hi: b });
    }
    let bracket = (a, b);
    let mut it = 0;
    while b - a > opts.bisect_width && it < opts.max_iter {
        let m = 0.5 * (a + b);
        let fm = f(m);
        it += 1;
        if fm == 0.0 {
            return Ok(Root { x: m, fx: 0.0, bracket, iterations: it });
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let mut x = 0.5 * (a + b);
    let mut fx = f(x);
    let mut polish = 0;
    while it < opts.max_iter {
        it += 1;
        if fx == 0.0 {
            break;
        }
        if fx.signum() == fa.signum() {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let mut xn = x - fx / d;
        if !(xn > a && xn < b) || !xn.is_finite() {
            xn = 0.5 * (a + b);
        }
        let step = (xn - x).abs();
        x = xn;
        fx = f(x);
        if fx.abs() < opts.ftol {
            polish += 1;
            if step <= 4.0 * f64::EPSILON * x.abs().max(1.0) || polish > 3 {
                break;
            }
        }
        if b - a <= 2.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    if fx.abs() >= opts.ftol {
        return Err(Error::NoConvergence { what, iterations: it, residual: fx });
    }
    Ok(Root { x, fx, bracket, iterations: it })
}

/// Plain bisection to an absolute x-width. Used where no derivative is at hand.
pub fn bisect<F: Fn(f64) -> f64>(what: &'static str, f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Bracket { what, lo, hi });
    }
    for _ in 0..200 {
        if (b - a).abs() <= xtol {
            break;
        }
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}
