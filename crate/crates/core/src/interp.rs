//! Piecewise cubic interpolation on strictly increasing abscissae.

use crate::error::{Error, Result};

fn locate(x: &[f64], t: f64) -> Result<usize> {
    let n = x.len();
    if n < 2 || !(t >= x[0] && t <= x[n - 1]) {
        return Err(Error::Grid(format!("{t} outside [{}, {}]", x.first().unwrap_or(&f64::NAN), x.last().unwrap_or(&f64::NAN))));
    }
    let i = x.partition_point(|&v| v <= t);
    Ok(i.clamp(1, n - 1) - 1)
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = x1 - x0;
    let s = (t - x0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

/// Cubic Hermite interpolant with prescribed slopes.
#[derive(Debug, Clone)]
pub struct Hermite {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Hermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        check(&x, &y)?;
        if d.len() != x.len() {
            return Err(Error::Grid("slope length mismatch".into()));
        }
        Ok(Hermite { x, y, d })
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        let i = locate(&self.x, t)?;
        Ok(hermite(self.x[i], self.x[i + 1], self.y[i], self.y[i + 1], self.d[i], self.d[i + 1], t))
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Grid("need at least two aligned samples".into()));
    }
    if x.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Grid("abscissae must be strictly increasing".into()));
    }
    Ok(())
}

/// Monotone piecewise cubic (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip(Hermite);

impl Pchip {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        check(&x, &y)?;
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
            return Ok(Pchip(Hermite { x, y, d }));
        }
        for i in 1..n - 1 {
            if del[i - 1] * del[i] > 0.0 {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
            let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
            if s.signum() != d0.signum() {
                0.0
            } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
                3.0 * d0
            } else {
                s
            }
        };
        d[0] = end(h[0], h[1], del[0], del[1]);
        d[n - 1] = end(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        Ok(Pchip(Hermite { x, y, d }))
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        self.0.eval(t)
    }
}

/// Piecewise linear interpolation.
pub fn linear(x: &[f64], y: &[f64], t: f64) -> Result<f64> {
    let i = locate(x, t)?;
    let s = (t - x[i]) / (x[i + 1] - x[i]);
    Ok(y[i] + s * (y[i + 1] - y[i]))
}
