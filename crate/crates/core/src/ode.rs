//! Adaptive Dormand–Prince 5(4) integration for small fixed-size systems.
//!
//! The driver lands exactly on requested output times by clipping steps, reports each accepted
//! step to an observer, and can stop at a sign change of an event function located by
//! bisection on the step length.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the initial slope when `None`.
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { rtol: 1e-10, atol: 1e-12, h_init: None, h_max: f64::INFINITY, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Reached,
    Event,
    Stopped,
}

#[derive(Debug, Clone, Copy)]
pub struct OdeEnd<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
    pub status: Termination,
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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct Dense<const N: usize> {
    pub t0: f64,
    pub h: f64,
    #[serde(skip)]
    r: [[f64; N]; 5],
}

impl<const N: usize> Dense<N> {
    fn new(t0: f64, h: f64, y0: &[f64; N], dy: &[f64; N], k1: &[f64; N], k7: &[f64; N], d: &[f64; N]) -> Self {
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            r[0][i] = y0[i];
            r[1][i] = dy[i];
            r[2][i] = h * k1[i] - dy[i];
            r[3][i] = dy[i] - h * k7[i] - r[2][i];
            r[4][i] = d[i];
        }
        Dense { t0, h, r }
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut y = [0.0; N];
        for i in 0..N {
            let r = &self.r;
            y[i] = r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])));
        }
        y
    }
}

/// What the observer sees at each accepted point.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a, const N: usize> {
    pub t: f64,
    pub y: &'a [f64; N],
    pub dy: &'a [f64; N],
    /// Interpolant of the step that ended here; `None` at the initial point.
    pub dense: Option<&'a Dense<N>>,
}

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut s = 0.0;
        for (a, k) in terms {
            s += a * k[i];
        }
        out[i] += h * s;
    }
    out
}

struct Trial<const N: usize> {
    /// Increment `y1 - y0`, kept apart for compensated accumulation.
    dy: [f64; N],
    k7: [f64; N],
    err: [f64; N],
    d: [f64; N],
}

fn trial<const N: usize, F>(f: &F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Trial<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let k2 = f(t + C2 * h, &comb(y, h, &[(A21, k1)]));
    let k3 = f(t + C3 * h, &comb(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(t + C4 * h, &comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(t + C5 * h, &comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(t + h, &comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let mut dy = [0.0; N];
    for i in 0..N {
        dy[i] = h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i]);
    }
    let mut y1 = *y;
    for i in 0..N {
        y1[i] += dy[i];
    }
    let k7 = f(t + h, &y1);
    let mut err = [0.0; N];
    let mut d = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        d[i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    Trial { dy, k7, err, d }
}

fn finite<const N: usize>(v: &[f64; N]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Integrates `y' = f(t, y)` from `t0` to `t_end` (either direction).
///
/// `stops` are visited exactly and handed to the observer; they must be ordered in the
/// direction of integration. The observer sees every accepted point, including the initial
/// one, and returns `false` to stop early. When `event` changes sign across a step the crossing
/// is located to a few ulps and integration ends there.
pub fn integrate<const N: usize, F>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t_end: f64,
    stops: &[f64],
    opts: &OdeOptions,
    event: Option<&dyn Fn(f64, &[f64; N]) -> f64>,
    observe: &mut dyn FnMut(Point<'_, N>) -> bool,
) -> Result<OdeEnd<N>>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let dir = if t_end >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut comp = [0.0; N];
    let mut k1 = f(t, &y);
    if !finite(&k1) {
        return Err(Error::Integration { t, reason: "non-finite slope at the initial point".into() });
    }
    let mut out = OdeEnd { t, y, dy: k1, status: Termination::Reached, accepted: 0, rejected: 0 };
    if !observe(Point { t, y: &y, dy: &k1, dense: None }) {
        out.status = Termination::Stopped;
        return Ok(out);
    }
    if t0 == t_end {
        return Ok(out);
    }
    let mut g_prev = event.map(|g| g(t, &y));

    let scale = |a: &[f64; N], b: &[f64; N], i: usize| opts.atol + opts.rtol * a[i].abs().max(b[i].abs());
    let mut h = match opts.h_init {
        Some(h) => h.abs(),
        None => {
            let mut d0: f64 = 0.0;
            let mut d1: f64 = 0.0;
            for i in 0..N {
                let s = scale(&y, &y, i);
                d0 = d0.max((y[i] / s).abs());
                d1 = d1.max((k1[i] / s).abs());
            }
            let guess = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
            guess.min((t_end - t0).abs())
        }
    }
    .min(opts.h_max);

    let mut stop_idx = 0;
    while stop_idx < stops.len() && (stops[stop_idx] - t) * dir <= 0.0 {
        stop_idx += 1;
    }
    let mut last_rejected = false;
    loop {
        if out.accepted + out.rejected >= opts.max_steps {
            return Err(Error::Integration { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        let target = if stop_idx < stops.len() && (stops[stop_idx] - t_end) * dir < 0.0 {
            stops[stop_idx]
        } else {
            t_end
        };
        let mut hs = dir * h;
        let mut hits = false;
        if (target - t).abs() <= 8.0 * f64::EPSILON * t.abs().max(target.abs()) {
            // already on the target up to rounding
            t = target;
            if target == t_end {
                out.t = t;
                out.status = Termination::Reached;
                return Ok(out);
            }
            stop_idx += 1;
            continue;
        }
        if (t + hs - target) * dir >= 0.0 {
            hs = target - t;
            hits = true;
        }
        if t + hs == t || hs.abs() < 1e-15 * t.abs().max(1e-300) {
            return Err(Error::Integration {
                t,
                reason: "step size underflow; the orbit may need a different independent variable".into(),
            });
        }
        let tr = trial(&f, t, &y, &k1, hs);
        let ok = finite(&tr.dy) && finite(&tr.k7) && finite(&tr.err);
        let mut err = f64::INFINITY;
        if ok {
            let mut acc = 0.0;
            for i in 0..N {
                let mut y1 = y[i] + tr.dy[i];
                if !y1.is_finite() {
                    y1 = y[i];
                }
                let s = opts.atol + opts.rtol * y[i].abs().max(y1.abs());
                acc += (tr.err[i] / s).powi(2);
            }
            err = (acc / N as f64).sqrt();
        }
        if !(err <= 1.0) {
            out.rejected += 1;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.25 };
            h = hs.abs() * fac;
            last_rejected = true;
            continue;
        }
        // compensated update of y and t
        let dense = Dense::new(t, hs, &y, &tr.dy, &k1, &tr.k7, &tr.d);
        let y_prev = y;
        let k1_prev = k1;
        let t_prev = t;
        for i in 0..N {
            let d = tr.dy[i] - comp[i];
            let s = y[i] + d;
            comp[i] = (s - y[i]) - d;
            y[i] = s;
        }
        t = if hits { target } else { t + hs };
        k1 = tr.k7;
        out.accepted += 1;

        if let (Some(g), Some(gp)) = (event, g_prev) {
            let gn = g(t, &y);
            if gp != 0.0 && (gn == 0.0 || gn.signum() != gp.signum()) {
                let (te, ye, ke, de) = locate_event(&f, g, t_prev, &y_prev, &k1_prev, hs, gp);
                out.t = te;
                out.y = ye;
                out.dy = ke;
                out.status = Termination::Event;
                observe(Point { t: te, y: &ye, dy: &ke, dense: Some(&de) });
                return Ok(out);
            }
            g_prev = Some(gn);
        }
        out.t = t;
        out.y = y;
        out.dy = k1;
        if !observe(Point { t, y: &y, dy: &k1, dense: Some(&dense) }) {
            out.status = Termination::Stopped;
            return Ok(out);
        }
        if hits {
            if target == t_end {
                out.status = Termination::Reached;
                return Ok(out);
            }
            stop_idx += 1;
        }
        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, if last_rejected { 1.0 } else { 5.0 });
        // a clipped step says nothing about the controller's preferred size
        if !hits || fac * hs.abs() > h {
            h = (fac * hs.abs()).min(opts.h_max);
        }
        last_rejected = false;
    }
}

fn locate_event<const N: usize, F>(
    f: &F,
    g: &dyn Fn(f64, &[f64; N]) -> f64,
    t0: f64,
    y0: &[f64; N],
    k0: &[f64; N],
    h: f64,
    g0: f64,
) -> (f64, [f64; N], [f64; N], Dense<N>)
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let at = |hh: f64| {
        let tr = trial(f, t0, y0, k0, hh);
        let mut y = *y0;
        for i in 0..N {
            y[i] += tr.dy[i];
        }
        (t0 + hh, y, tr.k7, Dense::new(t0, hh, y0, &tr.dy, k0, &tr.k7, &tr.d))
    };
    let mut lo = 0.0;
    let mut hi = h;
    let mut best = at(hi);
    let mut gbest = g(best.0, &best.1).abs();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let p = at(mid);
        let gm = g(p.0, &p.1);
        if gm.abs() <= gbest && gm.is_finite() {
            gbest = gm.abs();
            best = p;
        }
        if gm == 0.0 {
            break;
        }
        if gm.signum() == g0.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    best
}
