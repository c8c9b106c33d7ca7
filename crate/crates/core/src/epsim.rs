//! Pseudo-spectral Crank–Nicolson solver for the full Euler–Poisson system on `[-L, L)`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use crate::asympt::PowerFit;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    /// Half-length; the domain is `[-L, L)` with periodic ends.
    pub l: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub kappa: f64,
    pub t_max: f64,
    /// Run stops once `min v_x < -blowup_threshold`.
    pub blowup_threshold: f64,
    pub picard_tol: f64,
    pub picard_damping: f64,
    pub picard_max_iter: usize,
    pub poisson_tol: f64,
    pub dealias: bool,
    /// A state counts as resolved while at most this fraction of the spectral energy of `rho`
    /// and of `v` sits in the upper half of the retained band. Exponent fits use the last
    /// resolved state.
    pub resolved_tail: f64,
    /// Steps between stored snapshots; 0 keeps only the first and last states.
    pub snap_every: usize,
}

impl SimConfig {
    /// Defaults for half-length `l`: `dx = L / 2^9`, `dt = 0.001`.
    pub fn new(l: f64) -> Self {
        SimConfig {
            l,
            n_modes: 1024,
            dt: 1e-3,
            kappa: 0.0,
            t_max: 10.0,
            blowup_threshold: 1e3,
            picard_tol: 1e-10,
            picard_damping: 0.8,
            picard_max_iter: 100,
            poisson_tol: 1e-11,
            dealias: true,
            resolved_tail: 1e-2,
            snap_every: 0,
        }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l / self.n_modes as f64
    }

    fn validate(&self) -> Result<()> {
        if !(self.l > 0.0) {
            return Err(Error::domain("L", self.l, "(0, inf)"));
        }
        if !self.n_modes.is_power_of_two() || self.n_modes < 8 {
            return Err(Error::domain("n_modes", self.n_modes as f64, "powers of two >= 8"));
        }
        if !(self.dt > 0.0) {
            return Err(Error::domain("dt", self.dt, "(0, inf)"));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::domain("kappa", self.kappa, "[0, inf)"));
        }
        if !(self.picard_damping > 0.0 && self.picard_damping <= 1.0) {
            return Err(Error::domain("picard_damping", self.picard_damping, "(0, 1]"));
        }
        Ok(())
    }
}

/// FFT plans, wavenumbers and the dealiasing mask for one grid.
pub struct Spectral {
    n: usize,
    k: Vec<f64>,
    mask: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(n: usize, l: f64) -> Self {
        let mut planner = FftPlanner::new();
        let k: Vec<f64> = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                if j == n / 2 { 0.0 } else { m * std::f64::consts::PI / l }
            })
            .collect();
        let cut = n / 3;
        let mask = (0..n)
            .map(|j| {
                let m = if j <= n / 2 { j } else { n - j };
                if m <= cut { 1.0 } else { 0.0 }
            })
            .collect();
        Spectral { n, k, mask, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n) }
    }

    fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = f.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fwd.process(&mut buf);
        buf
    }

    fn inverse(&self, mut buf: Vec<Complex64>) -> Vec<f64> {
        self.inv.process(&mut buf);
        let s = 1.0 / self.n as f64;
        buf.iter().map(|c| c.re * s).collect()
    }

    /// `d/dx` (with the upper third removed when `filter` is set).
    pub fn dx(&self, f: &[f64], filter: bool) -> Vec<f64> {
        let mut h = self.forward(f);
        for j in 0..self.n {
            let m = if filter { self.mask[j] } else { 1.0 };
            h[j] *= Complex64::new(0.0, self.k[j] * m);
        }
        self.inverse(h)
    }

    /// `d^2/dx^2`.
    pub fn dxx(&self, f: &[f64]) -> Vec<f64> {
        let mut h = self.forward(f);
        for j in 0..self.n {
            h[j] *= -self.k[j] * self.k[j];
        }
        self.inverse(h)
    }

    /// Removes the upper third of the modes.
    pub fn filter(&self, f: &[f64]) -> Vec<f64> {
        let mut h = self.forward(f);
        for j in 0..self.n {
            h[j] *= self.mask[j];
        }
        self.inverse(h)
    }

    /// Solves `(-d^2/dx^2 + m) u = f`.
    fn helmholtz(&self, f: &[f64], m: f64) -> Vec<f64> {
        let mut h = self.forward(f);
        for j in 0..self.n {
            h[j] /= self.k[j] * self.k[j] + m;
        }
        self.inverse(h)
    }

    /// Fraction of the (non-mean) spectral energy in the upper half of the retained band.
    pub fn tail_fraction(&self, f: &[f64]) -> f64 {
        let h = self.forward(f);
        let cut = self.n / 3;
        let (mut tail, mut total) = (0.0, 0.0);
        for j in 1..self.n {
            let m = if j <= self.n / 2 { j } else { self.n - j };
            if m > cut {
                continue;
            }
            let e = h[j].norm_sqr();
            total += e;
            if m > cut / 2 {
                tail += e;
            }
        }
        if total > 0.0 { tail / total } else { 0.0 }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |a, b| a.max(b.abs()))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PoissonStats {
    pub newton_iterations: usize,
    pub residual: f64,
}

/// Solves `-phi_xx = rho - exp(phi)` by Newton's method. Each linear step
/// `(-d^2/dx^2 + e^phi) delta = -F` is solved by conjugate gradients preconditioned with
/// `-d^2/dx^2 + mean(e^phi)`.
///
/// The residual is accepted below `tol` or below the rounding floor of the spectral second
/// derivative, whichever is larger.
pub fn poisson_solve(sp: &Spectral, rho: &[f64], phi_guess: &[f64], tol: f64) -> Result<(Vec<f64>, PoissonStats)> {
    if rho.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::domain("rho", rho.iter().cloned().fold(f64::INFINITY, f64::min), "(0, inf)"));
    }
    let n = rho.len();
    let mut phi = phi_guess.to_vec();
    let residual = |phi: &[f64]| -> Vec<f64> {
        let pxx = sp.dxx(phi);
        (0..n).map(|j| -pxx[j] + phi[j].exp() - rho[j]).collect()
    };
    let kmax2 = sp.k.iter().fold(0.0f64, |a, k| a.max(k * k));
    let rmax = rho.iter().cloned().fold(0.0, f64::max);
    let floor = |phi: &[f64]| 64.0 * f64::EPSILON * (kmax2 * max_abs(phi) + rmax + max_abs(phi).exp());
    let mut f = residual(&phi);
    let mut res = max_abs(&f);
    let mut tol = tol.max(floor(&phi));
    for it in 0..50 {
        if res < tol {
            return Ok((phi, PoissonStats { newton_iterations: it, residual: res }));
        }
        let e: Vec<f64> = phi.iter().map(|p| p.exp()).collect();
        let m = e.iter().sum::<f64>() / n as f64;
        let apply = |x: &[f64]| -> Vec<f64> {
            let xx = sp.dxx(x);
            (0..n).map(|j| -xx[j] + e[j] * x[j]).collect()
        };
        let b: Vec<f64> = f.iter().map(|v| -v).collect();
        let delta = pcg(&apply, &|r| sp.helmholtz(r, m), &b, (1e-4 * res).max(0.1 * tol), 500);
        // backtrack on the residual: the underlying functional is convex
        let mut step = 1.0;
        loop {
            let trial: Vec<f64> = phi.iter().zip(&delta).map(|(p, d)| p + step * d).collect();
            let ft = residual(&trial);
            let rt = max_abs(&ft);
            if rt.is_finite() && (rt < res || step < 1e-3) {
                phi = trial;
                f = ft;
                res = rt;
                tol = tol.max(floor(&phi));
                break;
            }
            step *= 0.5;
        }
    }
    if res < tol {
        return Ok((phi, PoissonStats { newton_iterations: 50, residual: res }));
    }
    Err(Error::NoConvergence { what: "Poisson Newton iteration", iterations: 50, residual: res })
}

fn pcg(
    apply: &dyn Fn(&[f64]) -> Vec<f64>,
    precond: &dyn Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..max_iter {
        if max_abs(&r) < tol {
            break;
        }
        let ap = apply(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if !(pap > 0.0) {
            break;
        }
        let alpha = rz / pap;
        for j in 0..n {
            x[j] += alpha * p[j];
            r[j] -= alpha * ap[j];
        }
        z = precond(&r);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for j in 0..n {
            p[j] = z[j] + beta * p[j];
        }
    }
    x
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub min_dxv: f64,
    pub max_abs_dxv: f64,
    pub max_abs_dxrho: f64,
    pub max_rho: f64,
    /// `int (rho - 1) dx`.
    pub mass: f64,
    /// Larger of the `rho` and `v` tail fractions.
    pub tail_fraction: f64,
    pub poisson_residual: f64,
    pub picard_iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimState {
    pub t: f64,
    pub step: usize,
    pub x: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    pub diag: Diagnostics,
}

fn grid(cfg: &SimConfig) -> Vec<f64> {
    let dx = cfg.dx();
    (0..cfg.n_modes).map(|j| -cfg.l + j as f64 * dx).collect()
}

impl SimState {
    /// State from initial `rho` and `v` on the grid; `phi` from the Poisson relation.
    pub fn new(cfg: &SimConfig, sp: &Spectral, rho: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        cfg.validate()?;
        let x = grid(cfg);
        if rho.len() != x.len() || v.len() != x.len() {
            return Err(Error::Grid("initial data must match the grid".into()));
        }
        let guess: Vec<f64> = rho.iter().map(|r| r.max(1e-300).ln()).collect();
        let (phi, ps) = poisson_solve(sp, &rho, &guess, cfg.poisson_tol)?;
        let mut s = SimState { t: 0.0, step: 0, x, rho, v, phi, diag: empty_diag() };
        s.diag = diagnostics(cfg, sp, &s.rho, &s.v, ps.residual, 0);
        Ok(s)
    }
}

fn empty_diag() -> Diagnostics {
    Diagnostics {
        min_dxv: 0.0,
        max_abs_dxv: 0.0,
        max_abs_dxrho: 0.0,
        max_rho: 0.0,
        mass: 0.0,
        tail_fraction: 0.0,
        poisson_residual: 0.0,
        picard_iterations: 0,
    }
}

fn diagnostics(cfg: &SimConfig, sp: &Spectral, rho: &[f64], v: &[f64], pres: f64, iters: usize) -> Diagnostics {
    let vx = sp.dx(v, false);
    let rx = sp.dx(rho, false);
    Diagnostics {
        min_dxv: vx.iter().cloned().fold(f64::INFINITY, f64::min),
        max_abs_dxv: max_abs(&vx),
        max_abs_dxrho: max_abs(&rx),
        max_rho: rho.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        mass: mass(cfg, rho),
        tail_fraction: sp.tail_fraction(v).max(sp.tail_fraction(rho)),
        poisson_residual: pres,
        picard_iterations: iters,
    }
}

/// `int (rho - 1) dx` on the periodic grid.
pub fn mass(cfg: &SimConfig, rho: &[f64]) -> f64 {
    let mut s = 0.0;
    let mut c = 0.0;
    for &r in rho {
        let y = (r - 1.0) - c;
        let t = s + y;
        c = (t - s) - y;
        s = t;
    }
    s * cfg.dx()
}

/// Tendencies `(rho_t, v_t)` for given `phi`:
/// `rho_t = -(rho v)_x`, `v_t = -(v^2/2)_x - kappa (ln rho)_x - phi_x`.
pub fn rhs(cfg: &SimConfig, sp: &Spectral, rho: &[f64], v: &[f64], phi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(j) = rho.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::domain("rho", rho[j], "(0, inf)"));
    }
    let d = cfg.dealias;
    let (rf, vf) = if d { (sp.filter(rho), sp.filter(v)) } else { (rho.to_vec(), v.to_vec()) };
    let n = rho.len();
    let flux: Vec<f64> = (0..n).map(|j| rf[j] * vf[j]).collect();
    let mut pot: Vec<f64> = (0..n).map(|j| 0.5 * vf[j] * vf[j] + phi[j]).collect();
    if cfg.kappa > 0.0 {
        for j in 0..n {
            pot[j] += cfg.kappa * rho[j].ln();
        }
    }
    let rt: Vec<f64> = sp.dx(&flux, d).iter().map(|x| -x).collect();
    let vt: Vec<f64> = sp.dx(&pot, d).iter().map(|x| -x).collect();
    Ok((rt, vt))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GradientThreshold,
    PicardDivergence,
    Nan,
    TMax,
}

/// Outcome of one Crank–Nicolson step.
pub enum StepOutcome {
    Accepted(SimState),
    Diverged { iterations: usize, residual: f64 },
    NonFinite,
}

/// One trapezoidal step solved by damped fixed-point iteration, `phi` re-solved each sweep.
pub fn step_cn(cfg: &SimConfig, sp: &Spectral, s: &SimState) -> Result<StepOutcome> {
    let n = s.rho.len();
    let (r0, v0) = rhs(cfg, sp, &s.rho, &s.v, &s.phi)?;
    let h = 0.5 * cfg.dt;
    let mut rho: Vec<f64> = (0..n).map(|j| s.rho[j] + cfg.dt * r0[j]).collect();
    let mut v: Vec<f64> = (0..n).map(|j| s.v[j] + cfg.dt * v0[j]).collect();
    let mut phi = s.phi.clone();
    let w = cfg.picard_damping;
    let mut last = f64::INFINITY;
    let mut growth = 0;
    for it in 1..=cfg.picard_max_iter {
        if rho.iter().any(|&r| !(r > 0.0)) || v.iter().any(|x| !x.is_finite()) {
            return Ok(StepOutcome::NonFinite);
        }
        let (p, _) = match poisson_solve(sp, &rho, &phi, cfg.poisson_tol) {
            Ok(r) => r,
            Err(_) => return Ok(StepOutcome::Diverged { iterations: it, residual: last }),
        };
        phi = p;
        let (r1, v1) = rhs(cfg, sp, &rho, &v, &phi)?;
        let mut diff: f64 = 0.0;
        for j in 0..n {
            let gr = s.rho[j] + h * (r0[j] + r1[j]);
            let gv = s.v[j] + h * (v0[j] + v1[j]);
            diff = diff.max((gr - rho[j]).abs()).max((gv - v[j]).abs());
            rho[j] += w * (gr - rho[j]);
            v[j] += w * (gv - v[j]);
        }
        if !diff.is_finite() {
            return Ok(StepOutcome::NonFinite);
        }
        if diff < cfg.picard_tol {
            let (p, ps) = match poisson_solve(sp, &rho, &phi, cfg.poisson_tol) {
                Ok(r) => r,
                Err(_) => return Ok(StepOutcome::Diverged { iterations: it, residual: diff }),
            };
            let diag = diagnostics(cfg, sp, &rho, &v, ps.residual, it);
            return Ok(StepOutcome::Accepted(SimState {
                t: s.t + cfg.dt,
                step: s.step + 1,
                x: s.x.clone(),
                rho,
                v,
                phi: p,
                diag,
            }));
        }
        growth = if diff > last { growth + 1 } else { 0 };
        if growth >= 10 {
            return Ok(StepOutcome::Diverged { iterations: it, residual: diff });
        }
        last = diff;
    }
    Ok(StepOutcome::Diverged { iterations: cfg.picard_max_iter, residual: last })
}

/// Named initial data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// `rho = 1`, `v = 3 exp(-x^2)`, `L = 10`.
    GaussianV,
    /// `rho = 1 + 13 sech x`, `v = 0`, `L = 15`.
    SechRho,
}

impl Experiment {
    pub fn default_l(self) -> f64 {
        match self {
            Experiment::GaussianV => 10.0,
            Experiment::SechRho => 15.0,
        }
    }

    pub fn config(self) -> SimConfig {
        SimConfig::new(self.default_l())
    }

    pub fn initial(self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        match self {
            Experiment::GaussianV => (vec![1.0; x.len()], x.iter().map(|&s| 3.0 * (-s * s).exp()).collect()),
            Experiment::SechRho => (x.iter().map(|&s| 1.0 + 13.0 / s.cosh()).collect(), vec![0.0; x.len()]),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Experiment::GaussianV => "gaussian-v",
            Experiment::SechRho => "sech-rho",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// `v` has a steep descending front at an inflection point.
    Shock,
    /// `v` has a cusp-like local maximum at the density peak.
    Peaked,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub t_star_estimate: f64,
    pub x_star_estimate: f64,
    /// Location of the density maximum.
    pub x_star_rho_max: f64,
    /// Location of the most negative `v_x`.
    pub x_star_grad_min: f64,
    pub kind: ProfileKind,
    pub termination: Termination,
    pub t_final: f64,
    pub steps: usize,
    pub left_concavity_sign: i8,
    pub right_concavity_sign: i8,
    pub dxv_sign_left: i8,
    pub dxv_sign_right: i8,
    pub v_exponent_fit: Option<PowerFit>,
    pub rho_exponent_fit: Option<PowerFit>,
    /// Too few cells outside the excluded core for the local fits.
    pub window_underflow: bool,
    /// Time and `x*` of the state the exponent fits were taken from.
    pub fit_time: f64,
    pub fit_x_star: f64,
    pub max_abs_dxv: f64,
    pub max_abs_dxrho: f64,
    pub mass_drift: f64,
    /// Steps between `|v_x|` and `|rho_x|` first exceeding the threshold, when both did.
    pub gradient_lag_steps: Option<i64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub t: f64,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
}

impl Snapshot {
    fn of(s: &SimState) -> Self {
        Snapshot { step: s.step, t: s.t, rho: s.rho.clone(), v: s.v.clone(), phi: s.phi.clone() }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HistoryRow {
    pub t: f64,
    pub max_abs_dxv: f64,
    pub max_abs_dxrho: f64,
    pub mass: f64,
}

impl HistoryRow {
    fn of(s: &SimState) -> Self {
        HistoryRow { t: s.t, max_abs_dxv: s.diag.max_abs_dxv, max_abs_dxrho: s.diag.max_abs_dxrho, mass: s.diag.mass }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    /// One row per accepted step.
    pub history: Vec<HistoryRow>,
}

/// Marches from the initial data until `t_max` or a termination signal.
pub fn run(cfg: &SimConfig, rho0: Vec<f64>, v0: Vec<f64>) -> Result<(Trajectory, BlowupReport)> {
    cfg.validate()?;
    let sp = Spectral::new(cfg.n_modes, cfg.l);
    let mut state = SimState::new(cfg, &sp, rho0, v0)?;
    let m0 = state.diag.mass;
    let mut traj = Trajectory {
        x: state.x.clone(),
        snapshots: vec![Snapshot::of(&state)],
        history: vec![HistoryRow::of(&state)],
    };
    let mut resolved: Option<SimState> = None;
    let mut v_hit: Option<usize> = None;
    let mut r_hit: Option<usize> = None;
    let termination = loop {
        if state.t >= cfg.t_max - 0.5 * cfg.dt {
            break Termination::TMax;
        }
        let next = match step_cn(cfg, &sp, &state)? {
            StepOutcome::Accepted(s) => s,
            StepOutcome::Diverged { .. } => break Termination::PicardDivergence,
            StepOutcome::NonFinite => break Termination::Nan,
        };
        if next.diag.tail_fraction > cfg.resolved_tail && resolved.is_none() {
            resolved = Some(state.clone());
        }
        state = next;
        let d = &state.diag;
        traj.history.push(HistoryRow::of(&state));
        if cfg.snap_every > 0 && state.step % cfg.snap_every == 0 {
            traj.snapshots.push(Snapshot::of(&state));
        }
        if d.max_abs_dxv > cfg.blowup_threshold && v_hit.is_none() {
            v_hit = Some(state.step);
        }
        if d.max_abs_dxrho > cfg.blowup_threshold && r_hit.is_none() {
            r_hit = Some(state.step);
        }
        if -d.min_dxv > cfg.blowup_threshold {
            break Termination::GradientThreshold;
        }
    };
    if traj.snapshots.last().map(|s| s.step) != Some(state.step) {
        traj.snapshots.push(Snapshot::of(&state));
    }
    let mut report = blowup_profile_analysis(cfg, &state.x, &state.rho, &state.v)?;
    if let Some(r) = &resolved {
        let fit = blowup_profile_analysis(cfg, &r.x, &r.rho, &r.v)?;
        report.v_exponent_fit = fit.v_exponent_fit;
        report.rho_exponent_fit = fit.rho_exponent_fit;
        report.window_underflow = fit.window_underflow;
        report.fit_time = r.t;
        report.fit_x_star = fit.x_star_estimate;
    } else {
        report.fit_time = state.t;
    }
    report.termination = termination;
    report.t_final = state.t;
    report.steps = state.step;
    // a peaked singularity grows in rho_x first; fall back to it when |v_x| gives no trend
    let tail = |f: fn(&HistoryRow) -> f64| {
        let pts: Vec<(f64, f64)> = traj.history.iter().map(|h| (h.t, f(h))).collect();
        t_star_estimate(&pts, 50)
    };
    report.t_star_estimate = tail(|h| h.max_abs_dxv)
        .or_else(|| tail(|h| h.max_abs_dxrho))
        .unwrap_or(state.t)
        .max(state.t);
    report.mass_drift = (state.diag.mass - m0).abs();
    report.gradient_lag_steps = match (v_hit, r_hit) {
        (Some(a), Some(b)) => Some(a as i64 - b as i64),
        _ => None,
    };
    Ok((traj, report))
}

/// Runs a named experiment with `cfg` (use `Experiment::config` for the defaults).
pub fn run_experiment(exp: Experiment, cfg: &SimConfig) -> Result<(Trajectory, BlowupReport)> {
    let x = grid(cfg);
    let (r, v) = exp.initial(&x);
    run(cfg, r, v)
}

/// Zero of the straight line fitted to `1 / g` against `t` over the last `window` points of
/// `(t, g)`, where `g` is a gradient maximum. `None` when `1 / g` is not decreasing.
pub fn t_star_estimate(history: &[(f64, f64)], window: usize) -> Option<f64> {
    let n = history.len();
    if n < 3 {
        return None;
    }
    let pts = &history[n.saturating_sub(window)..];
    let m = pts.len() as f64;
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| 1.0 / p.1).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return None;
    }
    Some(mx - my / slope)
}

/// Cells on each side of `x*` left out of the local fits.
pub const CORE_CELLS: usize = 3;
/// Cells on each side of `x*` used by the local fits and concavity averages.
pub const FIT_CELLS: usize = 24;

fn sign(x: f64) -> i8 {
    if x > 0.0 {
        1
    } else if x < 0.0 {
        -1
    } else {
        0
    }
}

fn local_fit(d: &[f64], y: &[f64], min_points: usize) -> Option<PowerFit> {
    let pts: Vec<(f64, f64)> = d.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < min_points {
        return None;
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss: f64 = pts.iter().map(|p| (p.1 - icpt - slope * p.0).powi(2)).sum();
    let lo = d.iter().cloned().filter(|v| *v > 0.0).fold(f64::INFINITY, f64::min);
    let hi = d.iter().cloned().fold(0.0, f64::max);
    Some(PowerFit {
        exponent: slope,
        coefficient: icpt.exp(),
        r_squared: if syy > 0.0 { (1.0 - ss / syy).clamp(0.0, 1.0) } else { 1.0 },
        window: (lo, hi),
        n_points: pts.len(),
    })
}

/// Locates `x*`, classifies the profile and fits local power laws around it.
///
/// `x*` is the density maximum when `v` peaks there (`v_x > 0` left, `< 0` right) and the
/// most negative `v_x` otherwise. Mirror-symmetric states are analysed on `x >= 0`. Fits use
/// `|v - v(x*)|` and `|rho - 1|` against `|x - x*|` on cells `CORE_CELLS + 1 ..= FIT_CELLS`
/// on both sides.
pub fn blowup_profile_analysis(cfg: &SimConfig, x: &[f64], rho: &[f64], v: &[f64]) -> Result<BlowupReport> {
    let n = x.len();
    let sp = Spectral::new(n, cfg.l);
    let vx = sp.dx(v, false);
    let vxx = sp.dxx(v);
    // mirror symmetry about x = 0 (index n/2 on this grid)
    let sym = (1..n / 2).all(|j| (rho[n / 2 + j] - rho[n / 2 - j]).abs() <= 1e-8 * rho[n / 2 + j].abs().max(1.0));
    let range: Vec<usize> = if sym { (n / 2..n).collect() } else { (0..n).collect() };
    let arg = |f: &dyn Fn(usize) -> f64| range.iter().cloned().max_by(|&a, &b| f(a).total_cmp(&f(b))).expect("non-empty");
    let i_rho = arg(&|j| rho[j]);
    let i_grad = arg(&|j| -vx[j]);
    let at = |j: isize| ((j % n as isize + n as isize) % n as isize) as usize;
    let side_mean = |f: &[f64], i: usize, dir: isize| {
        let mut s = 0.0;
        for c in (CORE_CELLS + 1)..=FIT_CELLS {
            s += f[at(i as isize + dir * c as isize)];
        }
        s / (FIT_CELLS - CORE_CELLS) as f64
    };
    let peaked = side_mean(&vx, i_rho, -1) > 0.0 && side_mean(&vx, i_rho, 1) < 0.0;
    let (kind, i) = if peaked { (ProfileKind::Peaked, i_rho) } else { (ProfileKind::Shock, i_grad) };
    let dx = cfg.dx();
    let mut dist = Vec::new();
    let mut dv = Vec::new();
    let mut dr = Vec::new();
    for dir in [-1isize, 1] {
        for c in (CORE_CELLS + 1)..=FIT_CELLS {
            let j = at(i as isize + dir * c as isize);
            dist.push(c as f64 * dx);
            dv.push((v[j] - v[i]).abs());
            dr.push((rho[j] - 1.0).abs());
        }
    }
    let vfit = local_fit(&dist, &dv, 8);
    let rfit = local_fit(&dist, &dr, 8);
    Ok(BlowupReport {
        t_star_estimate: f64::NAN,
        x_star_estimate: x[i],
        x_star_rho_max: x[i_rho],
        x_star_grad_min: x[i_grad],
        kind,
        termination: Termination::TMax,
        t_final: f64::NAN,
        steps: 0,
        left_concavity_sign: sign(side_mean(&vxx, i, -1)),
        right_concavity_sign: sign(side_mean(&vxx, i, 1)),
        dxv_sign_left: sign(side_mean(&vx, i, -1)),
        dxv_sign_right: sign(side_mean(&vx, i, 1)),
        window_underflow: vfit.is_none() || rfit.is_none(),
        fit_time: f64::NAN,
        fit_x_star: x[i],
        v_exponent_fit: vfit,
        rho_exponent_fit: rfit,
        max_abs_dxv: max_abs(&vx),
        max_abs_dxrho: max_abs(&sp.dx(rho, false)),
        mass_drift: 0.0,
        gradient_lag_steps: None,
    })
}
