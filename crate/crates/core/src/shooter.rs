//! Construction of solitary waves by shooting along the unstable manifold of `(1, 0)`.
//!
//! The left half (`xi < 0`) is integrated in `xi` until the density is close to its peak value,
//! then in a density variable where the degenerate end point is regular. Halves are mirrored
//! about the peak at `xi = 0`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, Termination};
use crate::quad;
use crate::wavealg::{Params, PeakDensity, PhasePoint};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShootOptions {
    /// Distance of the seed from `(1, 0)` along the unstable direction.
    pub delta: f64,
    /// Per-step relative tolerance of the integrator.
    pub tol: f64,
    /// Fraction of `[1, rho*]` covered in `xi` before switching to the density variable.
    pub switch_fraction: f64,
    /// Cold case: density where the numerical orbit is handed to the asymptotic tail.
    pub rho_max: f64,
    /// Output samples per decade of the density variable near the peak.
    pub per_decade: usize,
    /// Largest step in `xi`; keeps Hermite resampling of the half orbit accurate.
    pub max_step: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions { delta: 1e-8, tol: 1e-10, switch_fraction: 0.99, rho_max: 1e4, per_decade: 400, max_step: 0.02 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OrbitKind {
    /// Ends at the density peak with `h = 0` (or `rho = inf` when `kappa = 0`).
    Peaked,
    /// Subcritical speed: `E` returns to zero at a regular turning point.
    Smooth,
}

/// Left half orbit `xi <= 0`, shifted so the peak sits at `xi = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct HalfOrbit {
    pub params: Params,
    pub kind: OrbitKind,
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub e: Vec<f64>,
    pub drho: Vec<f64>,
    pub de: Vec<f64>,
    /// Density and field where the numerical orbit stopped.
    pub terminal_rho: f64,
    pub terminal_e: f64,
    /// Cold case: width of the analytic tail between the last numerical point and the peak.
    /// Continuous extension of the `xi`-form steps, in the unshifted clock.
    #[serde(skip)]
    pub segments: Vec<ode::Dense<2>>,
    /// Clock offset removed so that the peak sits at `xi = 0`.
    pub shift: f64,
    /// Shifted `xi` where the density variable takes over.
    pub phase1_end: f64,
    pub tail_width: f64,
    /// `max |Psi - g(1)| / g(1)` over the `xi`-form samples.
    pub max_drift: f64,
    pub tol: f64,
    pub steps: usize,
}

/// Seed `(1, 0) + delta w` on the unstable eigenvector `w`, oriented into `rho > 1`, `E < 0`.
pub fn unstable_seed(p: &Params, delta: f64) -> Result<PhasePoint> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::domain("delta", delta, "(0, inf)"));
    }
    let h1 = p.c * p.c - p.kappa;
    let lam2 = (h1 - 1.0) / h1;
    if !(lam2 > 0.0) {
        return Err(Error::Inconsistent(format!("lambda^2 = {lam2} is not positive")));
    }
    let (wr, we) = (1.0f64, -lam2.sqrt() * h1);
    let n = wr.hypot(we);
    Ok(PhasePoint { rho: 1.0 + delta * wr / n, e: delta * we / n })
}

fn lambda(p: &Params) -> f64 {
    let h1 = p.c * p.c - p.kappa;
    ((h1 - 1.0) / h1).sqrt()
}

// Quantities at rho = rho* - eps with eps carried exactly: (rho, h, phi, g - g(1)).
fn below_peak(p: &Params, rs: f64, eps: f64) -> (f64, f64, f64, f64) {
    let rho = rs - eps;
    let u = eps / rho;
    let h = p.kappa / rho * u * (2.0 + u);
    let psi = if u.abs() < 1e-3 {
        p.kappa * u * u * (1.0 - u / 3.0 + u * u / 4.0 - u * u * u / 5.0)
    } else {
        p.kappa * (u + 0.5 * u * u - u.ln_1p())
    };
    // g(rho) - g(rho*), the peak level being g(1) at the critical speed
    let gap = p.kappa * eps * eps / rho + p.phi_star.exp() * (-psi).exp_m1();
    (rho, h, p.phi_star - psi, gap)
}

fn hermite_at(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let s = (x - x0) / h;
    let (s2, s3) = (s * s, s * s * s);
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0 + (s3 - 2.0 * s2 + s) * h * d0 + (-2.0 * s3 + 3.0 * s2) * y1 + (s3 - s2) * h * d1
}

fn geometric(from: f64, to: f64, per_decade: usize) -> Vec<f64> {
    let n = ((from / to).log10() * per_decade as f64).ceil().max(1.0) as usize;
    (1..=n).map(|i| from * (to / from).powf(i as f64 / n as f64)).collect()
}

/// Integrates the left half orbit from `seed` to the peak (or turning point).
///
/// The `xi`-form is integrated until the density passes the switch value. From there the
/// orbit is continued in the density variable with `E^2 = 2 (g - g(1))` taken from the first
/// integral, which keeps the degenerate end point `h = E = 0` regular.
pub fn integrate_half(p: &Params, seed: PhasePoint, opts: &ShootOptions) -> Result<HalfOrbit> {
    if !(seed.rho > 1.0 && seed.e < 0.0) {
        return Err(Error::Inconsistent("seed must satisfy rho > 1 and E < 0".into()));
    }
    let g1 = p.far_level();
    let kind = if p.critical { OrbitKind::Peaked } else { OrbitKind::Smooth };
    let rho_switch = match (kind, p.rho_star) {
        (OrbitKind::Smooth, _) => f64::INFINITY,
        (_, PeakDensity::Bounded(rs)) => 1.0 + opts.switch_fraction * (rs - 1.0),
        (_, PeakDensity::Unbounded) => 0.01 * opts.rho_max,
    };
    let ode_opts = OdeOptions { rtol: opts.tol, atol: opts.tol, h_max: opts.max_step, ..Default::default() };

    let mut xi = Vec::new();
    let mut rho = Vec::new();
    let mut ee = Vec::new();
    let mut drho = Vec::new();
    let mut de = Vec::new();
    let mut segments = Vec::new();
    let mut bad: Option<String> = None;

    // phase 1: independent variable xi
    let f = |_: f64, y: &[f64; 2]| {
        let h = p.slope(y[0]);
        [-y[1] / h, y[0] - p.potential(y[0]).exp()]
    };
    let ev_switch = |_: f64, y: &[f64; 2]| y[0] - rho_switch;
    let ev_turn = |_: f64, y: &[f64; 2]| y[1];
    let event: &dyn Fn(f64, &[f64; 2]) -> f64 = if kind == OrbitKind::Smooth { &ev_turn } else { &ev_switch };
    let xi_end = 60.0 / lambda(p) + 200.0;
    let end1 = ode::integrate(f, 0.0, [seed.rho, seed.e], xi_end, &[], &ode_opts, Some(event), &mut |pt| {
        let (t, y) = (pt.t, pt.y);
        if let Some(&last) = rho.last() {
            if y[0] < last && bad.is_none() {
                bad = Some(format!("density decreased at xi = {t}"));
            }
        }
        if kind == OrbitKind::Peaked && y[1] > 0.0 && bad.is_none() {
            bad = Some(format!("E changed sign at xi = {t} before the peak"));
        }
        xi.push(t);
        rho.push(y[0]);
        ee.push(y[1]);
        drho.push(pt.dy[0]);
        de.push(pt.dy[1]);
        if let Some(d) = pt.dense {
            segments.push(*d);
        }
        bad.is_none()
    })?;
    if let Some(msg) = bad {
        return Err(Error::Inconsistent(format!("orbit left the expected quadrant: {msg}")));
    }
    if end1.status != Termination::Event {
        return Err(Error::Integration { t: end1.t, reason: "orbit did not reach its stopping event".into() });
    }
    let max_drift = rho
        .iter()
        .zip(&ee)
        .map(|(&r, &e)| (p.energy_gap(r) - 0.5 * e * e).abs() / g1)
        .fold(0.0, f64::max);
    let phase1_end = end1.t;
    let mut steps = end1.accepted;
    let mut tail_width = 0.0;
    let o2 = OdeOptions { rtol: opts.tol, atol: opts.tol * 1e-6, h_max: f64::INFINITY, ..Default::default() };

    if kind == OrbitKind::Peaked {
        match p.rho_star {
            PeakDensity::Bounded(rs) => {
                // phase 2: eps = rho* - rho decreasing to zero
                let eps0 = rs - end1.y[0];
                let floor = 1e-30 * rs;
                let mut stops = geometric(eps0, 1e-14 * rs, opts.per_decade);
                stops.pop();
                let slope_over_e = |eps: f64| {
                    let (_, h, _, gap) = below_peak(p, rs, eps.max(floor));
                    (h, (2.0 * gap.max(0.0)).sqrt())
                };
                let f2 = |eps: f64, _: &[f64; 1]| {
                    let (h, e) = slope_over_e(eps);
                    [-h / e]
                };
                let mut first = true;
                let end2 = ode::integrate(f2, eps0, [end1.t], 0.0, &stops, &o2, None, &mut |pt| {
                    if std::mem::take(&mut first) {
                        return true;
                    }
                    let eps = pt.t;
                    let (r, _, phi, _) = below_peak(p, rs, eps);
                    let (h, e) = slope_over_e(eps);
                    if pt.y[0] <= *xi.last().expect("phase 1 samples") {
                        // no resolvable progress in xi: keep the later point only
                        xi.pop();
                        rho.pop();
                        ee.pop();
                        drho.pop();
                        de.pop();
                    }
                    xi.push(pt.y[0]);
                    rho.push(r);
                    ee.push(if eps == 0.0 { 0.0 } else { -e });
                    drho.push(e / h);
                    de.push(r - phi.exp());
                    true
                })?;
                steps += end2.accepted;
            }
            PeakDensity::Unbounded => {
                // phase 2: t = ln rho up to ln rho_max
                let c2 = p.c * p.c;
                let t0 = end1.y[0].ln();
                let t1 = opts.rho_max.ln();
                let mut stops: Vec<f64> =
                    geometric(opts.rho_max, end1.y[0], opts.per_decade).iter().rev().map(|r| r.ln()).collect();
                stops.retain(|&t| t > t0 && t < t1);
                let f2 = |t: f64, _: &[f64; 1]| {
                    let r = t.exp();
                    [r * p.slope(r) / (2.0 * p.energy_gap(r)).sqrt()]
                };
                let mut first = true;
                let end2 = ode::integrate(f2, t0, [end1.t], t1, &stops, &o2, None, &mut |pt| {
                    if std::mem::take(&mut first) {
                        return true;
                    }
                    let r = pt.t.exp();
                    let e = -(2.0 * p.energy_gap(r)).sqrt();
                    xi.push(pt.y[0]);
                    rho.push(r);
                    ee.push(e);
                    drho.push(-e * r * r * r / c2);
                    de.push(r - p.potential(r).exp());
                    true
                })?;
                steps += end2.accepted;
                // remaining width to rho = inf from g - g(1) ~ c^2 / rho
                tail_width = (2.0 / 3.0) * p.c / std::f64::consts::SQRT_2 * opts.rho_max.powf(-1.5);
            }
        }
    }

    let n = xi.len();
    let shift = xi[n - 1] + tail_width;
    for x in xi.iter_mut() {
        *x -= shift;
    }
    Ok(HalfOrbit {
        params: *p,
        kind,
        terminal_rho: rho[n - 1],
        terminal_e: ee[n - 1],
        xi,
        rho,
        e: ee,
        drho,
        de,
        segments,
        shift,
        phase1_end: phase1_end - shift,
        tail_width,
        max_drift,
        tol: opts.tol,
        steps,
    })
}

impl HalfOrbit {
    /// `(rho, E)` at `xi` inside the computed range.
    ///
    /// The `xi`-form part uses the integrator's continuous extension; the density-variable
    /// part uses Hermite interpolation of its samples.
    pub fn state_at(&self, x: f64) -> Result<(f64, f64)> {
        let (lo, hi) = (self.xi[0], *self.xi.last().expect("non-empty orbit"));
        if !(x >= lo && x <= hi) {
            return Err(Error::Grid(format!("xi = {x} outside the computed orbit [{lo}, {hi}]")));
        }
        if x <= self.phase1_end && !self.segments.is_empty() {
            let t = x + self.shift;
            let i = self.segments.partition_point(|d| d.t1() < t).min(self.segments.len() - 1);
            let y = self.segments[i].eval(t);
            return Ok((y[0], y[1]));
        }
        let i = self.xi.partition_point(|&v| v <= x).clamp(1, self.xi.len() - 1) - 1;
        let (x0, x1) = (self.xi[i], self.xi[i + 1]);
        let hr = hermite_at(x0, x1, self.rho[i], self.rho[i + 1], self.drho[i], self.drho[i + 1], x);
        let he = hermite_at(x0, x1, self.e[i], self.e[i + 1], self.de[i], self.de[i + 1], x);
        Ok((hr, he))
    }

    /// `xi` at which the orbit passes density `r`.
    pub fn xi_at_rho(&self, r: f64) -> Result<f64> {
        let n = self.rho.len();
        if !(r >= self.rho[0] && r <= self.rho[n - 1]) {
            return Err(Error::Grid(format!("density {r} outside the computed orbit")));
        }
        let i = self.rho.partition_point(|&v| v < r).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xi[i], self.xi[i + 1]);
        crate::roots::bisect(
            "orbit density",
            |x| self.state_at(x.clamp(x0, x1)).map(|s| s.0 - r).unwrap_or(f64::NAN),
            x0,
            x1,
            1e-15 * x0.abs().max(1.0),
        )
    }

    /// Length of the computed orbit in `xi`.
    pub fn length(&self) -> f64 {
        -self.xi[0]
    }
}

/// `int h / sqrt(2 (g - g(1))) drho` from `rho_from` to `rho_to`, the `xi`-distance along the orbit.
///
/// Near a bounded peak density the substitution `rho = rho* - t^2` removes the `0/0` endpoint;
/// an unbounded upper limit (`rho_to = inf`, cold case) uses `rho = u^-2`.
pub fn xi_of_rho_quadrature(p: &Params, rho_from: f64, rho_to: f64, tol: f64) -> Result<f64> {
    if !(rho_from > 1.0) {
        return Err(Error::domain("rho_from", rho_from, "(1, rho_to]"));
    }
    if rho_from == rho_to {
        return Ok(0.0);
    }
    if !(rho_to > rho_from) {
        return Err(Error::domain("rho_to", rho_to, format!("[{rho_from}, rho*]")));
    }
    let integrand = |r: f64| {
        let d = p.energy_gap(r);
        p.slope(r) / (2.0 * d.max(0.0)).sqrt()
    };
    match p.rho_star {
        PeakDensity::Bounded(rs) => {
            if rho_to > rs {
                return Err(Error::domain("rho_to", rho_to, format!("[{rho_from}, {rs}]")));
            }
            let rm = 0.5 * (1.0 + rs).max(rho_from);
            let mut total = 0.0;
            let lo_end = rm.min(rho_to);
            if lo_end > rho_from {
                total += quad::integrate(integrand, rho_from, lo_end, tol, tol)?.value;
            }
            let lo = rm.max(rho_from);
            if rho_to > lo {
                let t_hi = (rs - lo).sqrt();
                let t_lo = (rs - rho_to).sqrt();
                let g = |t: f64| {
                    if t == 0.0 {
                        return 0.0;
                    }
                    let (_, h, _, d) = below_peak(p, rs, t * t);
                    2.0 * t * h / (2.0 * d.max(0.0)).sqrt()
                };
                total += quad::integrate(g, t_lo, t_hi, tol, tol)?.value;
            }
            Ok(total)
        }
        PeakDensity::Unbounded => {
            if rho_to.is_infinite() {
                let split = rho_from.max(4.0);
                let mut total = 0.0;
                if split > rho_from {
                    total += quad::integrate(integrand, rho_from, split, tol, tol)?.value;
                }
                let g = |u: f64| {
                    if u == 0.0 {
                        return 0.0;
                    }
                    let r = 1.0 / (u * u);
                    2.0 * integrand(r) / (u * u * u)
                };
                total += quad::integrate(g, 0.0, 1.0 / split.sqrt(), tol, tol)?.value;
                Ok(total)
            } else {
                Ok(quad::integrate(integrand, rho_from, rho_to, tol, tol)?.value)
            }
        }
    }
}

/// Resampling grid: `xi = 0` plus `per_side` points per side, log-spaced in `|xi|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GridSpec {
    pub per_side: usize,
    pub s_min: f64,
    /// Outer edge; defaults to the computed orbit length.
    pub s_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { per_side: 2000, s_min: 1e-6, s_max: None }
    }
}

impl GridSpec {
    pub fn with_per_side(per_side: usize) -> Self {
        GridSpec { per_side, ..Default::default() }
    }

    /// Positive half `s_min .. s_max` in increasing order.
    pub fn half(&self, s_max: f64) -> Vec<f64> {
        let n = self.per_side.max(2);
        let (a, b) = (self.s_min.ln(), s_max.ln());
        let mut s: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
        s[0] = self.s_min;
        s[n - 1] = s_max;
        s
    }
}

/// A symmetric wave sampled on a grid with `xi[peak_index] = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct WaveProfile {
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    /// `E = -phi'`.
    pub e: Vec<f64>,
    pub params: Params,
    pub solver_tol: f64,
    pub peak_index: usize,
    /// Largest relative first-integral defect over the grid.
    pub max_drift: f64,
}

impl WaveProfile {
    fn from_right_half(p: &Params, tol: f64, s: &[f64], rho: &[f64], e_right: &[f64], peak: (f64, f64)) -> Self {
        let n = s.len();
        let mut xi = Vec::with_capacity(2 * n + 1);
        let mut r = Vec::with_capacity(2 * n + 1);
        let mut e = Vec::with_capacity(2 * n + 1);
        for i in (0..n).rev() {
            xi.push(-s[i]);
            r.push(rho[i]);
            e.push(-e_right[i]);
        }
        xi.push(0.0);
        r.push(peak.0);
        e.push(peak.1);
        for i in 0..n {
            xi.push(s[i]);
            r.push(rho[i]);
            e.push(e_right[i]);
        }
        let v = r.iter().map(|&x| if x.is_finite() { p.c * (1.0 - 1.0 / x) } else { p.c }).collect();
        let phi = r.iter().map(|&x| if x.is_finite() { p.phi_star - p.peak_gap(x) } else { p.phi_star }).collect();
        let g1 = p.far_level();
        let max_drift = r
            .iter()
            .zip(&e)
            .filter(|(x, _)| x.is_finite())
            .map(|(&x, &ei)| (p.energy_gap(x) - 0.5 * ei * ei).abs() / g1)
            .fold(0.0, f64::max);
        WaveProfile { xi, rho: r, v, phi, e, params: *p, solver_tol: tol, peak_index: n, max_drift }
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Right half `(s, index)` pairs with `s = xi > 0`.
    pub fn right(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        (self.peak_index + 1..self.xi.len()).map(move |i| (self.xi[i], i))
    }

    /// Checks symmetry, monotonicity, the algebraic identities and the drift bound.
    pub fn check_invariants(&self) -> Result<()> {
        let n = self.len();
        let k = self.peak_index;
        let p = &self.params;
        for j in 1..=k {
            let (a, b) = (k - j, k + j);
            if (self.xi[a] + self.xi[b]).abs() > 1e-14 * self.xi[b].abs()
                || self.rho[a] != self.rho[b]
                || self.v[a] != self.v[b]
                || self.phi[a] != self.phi[b]
            {
                return Err(Error::Inconsistent(format!("asymmetric at index {b}")));
            }
        }
        for i in 1..=k {
            if !(self.rho[i] >= self.rho[i - 1] && self.v[i] >= self.v[i - 1] && self.phi[i] >= self.phi[i - 1]) {
                return Err(Error::Inconsistent(format!("not monotone at index {i}")));
            }
        }
        for i in 0..n {
            let r = self.rho[i];
            if r.is_finite() {
                if (self.v[i] - p.c * (1.0 - 1.0 / r)).abs() > 1e-10 {
                    return Err(Error::Inconsistent(format!("v != c(1 - 1/rho) at index {i}")));
                }
                if (self.phi[i] - p.potential(r)).abs() > 1e-10 {
                    return Err(Error::Inconsistent(format!("phi != H(rho) at index {i}")));
                }
            }
        }
        if self.max_drift > 100.0 * self.solver_tol {
            return Err(Error::Inconsistent(format!("first-integral drift {} exceeds 100 tol", self.max_drift)));
        }
        Ok(())
    }
}

/// Mirrors the half orbit about the peak and resamples it on `grid`.
pub fn assemble_peakon(orbit: &HalfOrbit, grid: &GridSpec) -> Result<WaveProfile> {
    let p = &orbit.params;
    let len = orbit.length();
    let s_max = grid.s_max.unwrap_or(len);
    if s_max > len * (1.0 + 1e-12) || !(grid.s_min > 0.0) || grid.s_min >= s_max {
        return Err(Error::Grid(format!("grid [{}, {s_max}] outside the computed orbit of length {len}", grid.s_min)));
    }
    let s = grid.half(s_max.min(len));
    let x_first = orbit.xi[0];
    let x_last = *orbit.xi.last().expect("non-empty orbit");
    let a0 = cold_constant(p.c);
    let mut rho = Vec::with_capacity(s.len());
    let mut e = Vec::with_capacity(s.len());
    for &si in &s {
        let x = (-si).max(x_first);
        if x > x_last {
            // inside the cold analytic tail
            rho.push(4.0 / 9.0 * a0 * si.powf(-2.0 / 3.0));
            e.push(4.0 / 3.0 * a0 * si.cbrt());
        } else {
            let (r, ei) = orbit.state_at(x)?;
            rho.push(r);
            e.push(-ei);
        }
    }
    let peak = match (orbit.kind, p.rho_star) {
        (OrbitKind::Peaked, PeakDensity::Unbounded) => (f64::INFINITY, 0.0),
        _ => (orbit.terminal_rho, 0.0),
    };
    Ok(WaveProfile::from_right_half(p, orbit.tol, &s, &rho, &e, peak))
}

/// `A_0 = (3 sqrt(c/2))^{4/3} / 2`, the cold peak coefficient `phi* - phi ~ A_0 |xi|^{4/3}`.
pub fn cold_constant(c: f64) -> f64 {
    0.5 * (3.0 * (0.5 * c).sqrt()).powf(4.0 / 3.0)
}

/// Shoots and assembles the critical wave for `kappa` with the given options.
pub fn peakon(kappa: f64, opts: &ShootOptions, grid: &GridSpec) -> Result<(HalfOrbit, WaveProfile)> {
    let p = Params::critical(kappa)?;
    wave(&p, opts, grid)
}

/// Shoots and assembles the wave for arbitrary parameters.
pub fn wave(p: &Params, opts: &ShootOptions, grid: &GridSpec) -> Result<(HalfOrbit, WaveProfile)> {
    let seed = unstable_seed(p, opts.delta)?;
    let orbit = integrate_half(p, seed, opts)?;
    let prof = assemble_peakon(&orbit, grid)?;
    Ok((orbit, prof))
}

/// Cold wave from the second-order equation `phi'' = e^phi - c / sqrt(c^2 - 2 phi)`.
///
/// Works with `Phi = phi* - phi` from the peak outward. Starting data at `Phi_0` take
/// `s_0 = (Phi_0 / A_0)^{3/4}` from the peak law and `Phi'` from the energy relation
/// `Phi'^2 / 2 = e^{phi*} expm1(-Phi) + c sqrt(2 Phi)`, so the start lies on the level set.
pub fn solve_phi_ode_cold(c0: f64, tol: f64, grid: &GridSpec, s_max: f64) -> Result<WaveProfile> {
    let p = Params::with_speed(0.0, c0)?;
    let phi_star = 0.5 * c0 * c0;
    let a0 = cold_constant(c0);
    let big0 = 1e-8;
    let s0 = (big0 / a0).powf(0.75);
    let energy = |b: f64| phi_star.exp() * (-b).exp_m1() + c0 * (2.0 * b).sqrt();
    let d0 = (2.0 * energy(big0)).sqrt();
    let s = grid.half(s_max);
    let stops: Vec<f64> = s.iter().copied().filter(|&x| x > s0 && x < s_max).collect();
    let f = |_: f64, y: &[f64; 2]| {
        if !(y[0] > 0.0) {
            return [f64::NAN, f64::NAN];
        }
        [y[1], c0 / (2.0 * y[0]).sqrt() - (phi_star - y[0]).exp()]
    };
    let opts = OdeOptions { rtol: tol, atol: tol * 1e-4, h_init: Some(1e-3 * s0), ..Default::default() };
    let mut out: Vec<(f64, f64, f64)> = Vec::with_capacity(s.len());
    let end = ode::integrate(f, s0, [big0, d0], s_max, &stops, &opts, None, &mut |pt| {
        let (t, y) = (pt.t, pt.y);
        if y[0] >= phi_star {
            return false;
        }
        out.push((t, y[0], y[1]));
        true
    })?;
    if end.status == Termination::Stopped {
        return Err(Error::Integration { t: end.t, reason: "phi reached zero or below".into() });
    }
    let mut rho = Vec::with_capacity(s.len());
    let mut e = Vec::with_capacity(s.len());
    let mut j = 0;
    for &si in &s {
        if si <= s0 {
            let b = a0 * si.powf(4.0 / 3.0);
            rho.push(c0 / (2.0 * b).sqrt());
            e.push(4.0 / 3.0 * a0 * si.cbrt());
            continue;
        }
        while j < out.len() && out[j].0 < si {
            j += 1;
        }
        let (t, b, db) = out.get(j).copied().filter(|o| o.0 == si).ok_or_else(|| Error::Grid(format!("missing output at {si}")))?;
        let _ = t;
        rho.push(crate::wavealg::h_inverse(phi_star - b, &p, 1e-15)?);
        e.push(db);
    }
    let mut prof = WaveProfile::from_right_half(&p, tol, &s, &rho, &e, (f64::INFINITY, 0.0));
    // phi taken straight from the ODE rather than through H(rho)
    let k = prof.peak_index;
    for (i, &si) in s.iter().enumerate() {
        let b = if si <= s0 {
            a0 * si.powf(4.0 / 3.0)
        } else {
            out.iter().find(|o| o.0 == si).map(|o| o.1).unwrap_or(f64::NAN)
        };
        prof.phi[k + 1 + i] = phi_star - b;
        prof.phi[k - 1 - i] = phi_star - b;
    }
    Ok(prof)
}

/// Residual of `phi'^2/2 = e^phi + c sqrt(c^2 - 2 phi) - (1 + c^2)` at each grid point of a cold profile.
pub fn cold_energy_residual(prof: &WaveProfile) -> Vec<f64> {
    let c = prof.params.c;
    let phi_star = 0.5 * c * c;
    prof.phi
        .iter()
        .zip(&prof.e)
        .enumerate()
        .filter(|(i, _)| *i != prof.peak_index)
        .map(|(_, (&phi, &e))| {
            let b = phi_star - phi;
            0.5 * e * e - (phi_star.exp() * (-b).exp_m1() + c * (2.0 * b).sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_orientation_and_accuracy() {
        let p = Params::critical(1.0).unwrap();
        let s = unstable_seed(&p, 1e-8).unwrap();
        assert!(s.rho > 1.0 && s.e < 0.0);
        assert!(unstable_seed(&p, 0.0).is_err());
        let d1 = (p.energy_gap(unstable_seed(&p, 1e-3).unwrap().rho) - 0.5 * unstable_seed(&p, 1e-3).unwrap().e.powi(2)).abs();
        let s2 = unstable_seed(&p, 5e-4).unwrap();
        let d2 = (p.energy_gap(s2.rho) - 0.5 * s2.e * s2.e).abs();
        assert!(d1 / d2 >= 4.0, "{d1} {d2}");
    }

    #[test]
    fn geometric_stops() {
        let g = geometric(1.0, 1e-2, 10);
        assert_eq!(g.len(), 20);
        assert!((g[19] - 1e-2).abs() < 1e-15);
    }

    #[test]
    fn quadrature_empty_and_domain() {
        let p = Params::critical(1.0).unwrap();
        assert_eq!(xi_of_rho_quadrature(&p, 1.2, 1.2, 1e-12).unwrap(), 0.0);
        assert!(xi_of_rho_quadrature(&p, 1.2, 2.0, 1e-12).is_err());
    }
}
