//! Peak asymptotics, transition-layer width and cold-limit norms measured on sampled waves.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::Pchip;
use crate::quad::gauss_legendre;
use crate::shooter::{
    assemble_peakon, cold_constant, integrate_half, peakon, unstable_seed, GridSpec, HalfOrbit, ShootOptions, WaveProfile,
};
use crate::wavealg::{Params, PeakDensity};

/// Default fit window in `|xi|`.
pub const DEFAULT_WINDOW: (f64, f64) = (1e-5, 1e-3);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub coefficient: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Least squares of `ln y` on `ln |xi|` over points with `|xi|` in `window`.
pub fn fit_power(xi: &[f64], y: &[f64], window: (f64, f64)) -> Result<PowerFit> {
    if xi.len() != y.len() {
        return Err(Error::Fit("xi and y differ in length".into()));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    for (&x, &v) in xi.iter().zip(y) {
        let a = x.abs();
        if a >= window.0 && a <= window.1 {
            if !(v > 0.0) {
                return Err(Error::Fit(format!("non-positive value {v} at |xi| = {a}")));
            }
            lx.push(a.ln());
            ly.push(v.ln());
        }
    }
    let n = lx.len();
    if n < 20 {
        return Err(Error::Fit(format!("{n} points in window [{}, {}], need 20", window.0, window.1)));
    }
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - icpt - slope * x).powi(2)).sum();
    let r2 = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(PowerFit { exponent: slope, coefficient: icpt.exp(), r_squared: r2, window, n_points: n })
}

/// Slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::Fit("need at least two aligned points".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n as f64;
    let my = ly.iter().sum::<f64>() / n as f64;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// One fitted quantity against its closed-form law `coefficient |xi|^exponent`.
#[derive(Debug, Clone, Serialize)]
pub struct FitCheck {
    pub quantity: String,
    pub fit: PowerFit,
    pub expected_exponent: f64,
    pub expected_coefficient: f64,
    /// `y / |xi|^p` at the innermost window point with `p` the expected exponent.
    pub limit_coefficient: f64,
}

impl FitCheck {
    pub fn exponent_error(&self) -> f64 {
        (self.fit.exponent - self.expected_exponent).abs()
    }

    /// Relative error of the limit coefficient.
    pub fn coefficient_error(&self) -> f64 {
        (self.limit_coefficient / self.expected_coefficient - 1.0).abs()
    }

    /// Relative error of the free-fit intercept, which absorbs higher-order corrections.
    pub fn fit_coefficient_error(&self) -> f64 {
        (self.fit.coefficient / self.expected_coefficient - 1.0).abs()
    }
}

fn check(quantity: &str, s: &[f64], y: &[f64], window: (f64, f64), p: f64, c: f64) -> Result<FitCheck> {
    let fit = fit_power(s, y, window)?;
    let i = s
        .iter()
        .position(|&x| x >= window.0 && x <= window.1)
        .ok_or_else(|| Error::Fit("empty window".into()))?;
    Ok(FitCheck {
        quantity: quantity.to_string(),
        fit,
        expected_exponent: p,
        expected_coefficient: c,
        limit_coefficient: y[i] / s[i].powf(p),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PeakReport {
    pub kappa: f64,
    pub c: f64,
    pub checks: Vec<FitCheck>,
    /// Warm case: measured `-phi''(0+)` and its value `rho* - e^{phi*}`.
    pub curvature: Option<(f64, f64)>,
}

impl PeakReport {
    pub fn max_exponent_error(&self) -> f64 {
        self.checks.iter().map(FitCheck::exponent_error).fold(0.0, f64::max)
    }

    pub fn max_coefficient_error(&self) -> f64 {
        self.checks.iter().map(FitCheck::coefficient_error).fold(0.0, f64::max)
    }
}

fn right_half(prof: &WaveProfile) -> Vec<usize> {
    prof.right().map(|(_, i)| i).collect()
}

/// Cold peak laws: `phi* - phi ~ A_0 s^{4/3}`, `|phi'| ~ 4/3 A_0 s^{1/3}`,
/// `rho ~ 4/9 A_0 s^{-2/3}`, `v* - v ~ sqrt(2 A_0) s^{2/3}`.
pub fn verify_peak_cold(prof: &WaveProfile, window: (f64, f64)) -> Result<PeakReport> {
    let p = &prof.params;
    if p.rho_star != PeakDensity::Unbounded || !p.critical {
        return Err(Error::Inconsistent("cold peak laws need kappa = 0 at the critical speed".into()));
    }
    let a0 = cold_constant(p.c);
    let idx = right_half(prof);
    let s: Vec<f64> = idx.iter().map(|&i| prof.xi[i]).collect();
    let psi: Vec<f64> = idx.iter().map(|&i| p.peak_gap(prof.rho[i])).collect();
    let dphi: Vec<f64> = idx.iter().map(|&i| prof.e[i].abs()).collect();
    let rho: Vec<f64> = idx.iter().map(|&i| prof.rho[i]).collect();
    let dv: Vec<f64> = idx.iter().map(|&i| p.c / prof.rho[i]).collect();
    Ok(PeakReport {
        kappa: p.kappa,
        c: p.c,
        checks: vec![
            check("phi_star_minus_phi", &s, &psi, window, 4.0 / 3.0, a0)?,
            check("abs_dphi", &s, &dphi, window, 1.0 / 3.0, 4.0 / 3.0 * a0)?,
            check("rho", &s, &rho, window, -2.0 / 3.0, 4.0 / 9.0 * a0)?,
            check("v_star_minus_v", &s, &dv, window, 2.0 / 3.0, (2.0 * a0).sqrt())?,
        ],
        curvature: None,
    })
}

/// Warm peak laws: `phi* - phi ~ (rho* - e^{phi*}) s^2 / 2`, `rho* - rho ~ r s`,
/// `v* - v ~ (c / rho*^2) r s` with `r = sqrt((rho* - e^{phi*}) / (-h'(rho*)))`.
pub fn verify_peak_isothermal(prof: &WaveProfile, window: (f64, f64)) -> Result<PeakReport> {
    let p = &prof.params;
    let rs = match p.rho_star {
        PeakDensity::Bounded(r) if p.critical => r,
        _ => return Err(Error::Inconsistent("warm peak laws need kappa > 0 at the critical speed".into())),
    };
    let jump = rs - p.phi_star.exp();
    let radical = (jump / -p.slope_prime(rs)).sqrt();
    let idx = right_half(prof);
    let s: Vec<f64> = idx.iter().map(|&i| prof.xi[i]).collect();
    let psi: Vec<f64> = idx.iter().map(|&i| p.peak_gap(prof.rho[i])).collect();
    let dr: Vec<f64> = idx.iter().map(|&i| rs - prof.rho[i]).collect();
    let dv: Vec<f64> = idx.iter().map(|&i| p.c * (rs - prof.rho[i]) / (prof.rho[i] * rs)).collect();
    let i0 = idx[0];
    let curvature = prof.e[i0] / prof.xi[i0];
    Ok(PeakReport {
        kappa: p.kappa,
        c: p.c,
        checks: vec![
            check("phi_star_minus_phi", &s, &psi, window, 2.0, 0.5 * jump)?,
            check("rho_star_minus_rho", &s, &dr, window, 1.0, radical)?,
            check("v_star_minus_v", &s, &dv, window, 1.0, p.c / (rs * rs) * radical)?,
        ],
        curvature: Some((curvature, jump)),
    })
}

/// Half-width of `I = { phi >= H(rho*/M) }`, the point `xi > 0` where `rho = rho*/M`.
pub fn transition_thickness(prof: &WaveProfile, m: f64) -> Result<f64> {
    if !(m >= 2.0) || !m.is_finite() {
        return Err(Error::domain("M", m, "[2, inf)"));
    }
    let p = &prof.params;
    let rs = p
        .rho_star_value()
        .ok_or_else(|| Error::Inconsistent("transition layer needs kappa > 0".into()))?;
    let target = rs / m;
    let idx = right_half(prof);
    let j = idx
        .windows(2)
        .position(|w| prof.rho[w[0]] >= target && prof.rho[w[1]] < target)
        .ok_or_else(|| Error::Grid(format!("density {target} not crossed on the grid")))?;
    let (a, b) = (idx[j], idx[j + 1]);
    // Hermite in xi with rho' = -E / h
    let (x0, x1) = (prof.xi[a], prof.xi[b]);
    let d0 = -prof.e[a] / p.slope(prof.rho[a]);
    let d1 = -prof.e[b] / p.slope(prof.rho[b]);
    let g = |x: f64| {
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * prof.rho[a] + (t3 - 2.0 * t2 + t) * h * d0 + (-2.0 * t3 + 3.0 * t2) * prof.rho[b]
            + (t3 - t2) * h * d1
            - target
    };
    crate::roots::bisect("transition edge", g, x0, x1, 1e-15 * x1)
}

/// Band `(min, max)` of `(phi* - phi) / xi^{4/3}` over `J \ I`, where
/// `J = { phi* - phi <= eps0 }` and `I` is the transition interval for `M`.
pub fn scaling_band(prof: &WaveProfile, m: f64, eps0: f64) -> Result<(f64, f64)> {
    let p = &prof.params;
    let rs = p
        .rho_star_value()
        .ok_or_else(|| Error::Inconsistent("scaling band needs kappa > 0".into()))?;
    let inner = p.peak_gap(rs / m);
    if !(eps0 > inner) {
        return Err(Error::domain("eps0", eps0, format!("({inner}, inf)")));
    }
    let mut band = (f64::INFINITY, 0.0_f64);
    for (s, i) in prof.right() {
        let psi = p.peak_gap(prof.rho[i]);
        if psi > inner && psi <= eps0 {
            let r = psi / s.powf(4.0 / 3.0);
            band = (band.0.min(r), band.1.max(r));
        }
    }
    if band.0.is_infinite() {
        return Err(Error::Grid("no grid points between the transition and outer levels".into()));
    }
    Ok(band)
}

/// Discrete Hölder seminorm `sup |f(x) - f(y)| / |x - y|^alpha`.
///
/// Pairs: every pair within distance 1, and beyond that each point paired with the grid points
/// nearest to it at distances `2, 4, 8, ...`.
pub fn holder_seminorm(x: &[f64], f: &[f64], alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain("alpha", alpha, "(0, 1)"));
    }
    if x.len() != f.len() {
        return Err(Error::Grid("grid and values differ in length".into()));
    }
    let n = x.len();
    let best = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut b = 0.0_f64;
            let mut j = i + 1;
            while j < n && x[j] - x[i] <= 1.0 {
                b = b.max((f[j] - f[i]).abs() / (x[j] - x[i]).powf(alpha));
                j += 1;
            }
            let mut d = 2.0;
            while x[i] + d <= x[n - 1] {
                let k = x.partition_point(|&v| v < x[i] + d).min(n - 1);
                let k = if k > i + 1 && (x[k - 1] - x[i] - d).abs() < (x[k] - x[i] - d).abs() { k - 1 } else { k };
                if k > i {
                    b = b.max((f[k] - f[i]).abs() / (x[k] - x[i]).powf(alpha));
                }
                d *= 2.0;
            }
            b
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `C^alpha` norm (`order = 0`) or `C^{1,alpha}` norm (`order = 1`, `df` supplied).
pub fn holder_norm(x: &[f64], f: &[f64], df: Option<&[f64]>, alpha: f64, order: u8) -> Result<f64> {
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
    match (order, df) {
        (0, _) => Ok(sup(f) + holder_seminorm(x, f, alpha)?),
        (1, Some(d)) => Ok(sup(f) + sup(d) + holder_seminorm(x, d, alpha)?),
        (1, None) => Err(Error::Inconsistent("first-order norm needs the derivative".into())),
        _ => Err(Error::domain("derivative order", order as f64, "{0, 1}")),
    }
}

/// Fields of a profile on another grid.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub v: Vec<f64>,
    pub phi: Vec<f64>,
    pub e: Vec<f64>,
}

/// Evaluates the profile on `grid` (increasing, symmetric about 0, containing 0), copying
/// values at shared nodes and interpolating elsewhere with monotone cubics on each half.
pub fn resample(prof: &WaveProfile, grid: &[f64]) -> Result<Resampled> {
    let k = prof.peak_index;
    let sr: Vec<f64> = prof.xi[k + 1..].to_vec();
    let side = |v: &[f64]| Pchip::new(sr.clone(), v[k + 1..].to_vec());
    let pr = side(&prof.rho)?;
    let pv = side(&prof.v)?;
    let pp = side(&prof.phi)?;
    let pe = side(&prof.e)?;
    let n = grid.len();
    let mut out = Resampled { xi: grid.to_vec(), rho: vec![0.0; n], v: vec![0.0; n], phi: vec![0.0; n], e: vec![0.0; n] };
    for (j, &x) in grid.iter().enumerate() {
        let s = x.abs();
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        if s == 0.0 {
            out.rho[j] = prof.rho[k];
            out.v[j] = prof.v[k];
            out.phi[j] = prof.phi[k];
            out.e[j] = prof.e[k];
            continue;
        }
        let pos = sr.binary_search_by(|v| v.total_cmp(&s));
        let (r, v, p, e) = match pos {
            Ok(i) => (prof.rho[k + 1 + i], prof.v[k + 1 + i], prof.phi[k + 1 + i], prof.e[k + 1 + i]),
            Err(_) => (pr.eval(s)?, pv.eval(s)?, pp.eval(s)?, pe.eval(s)?),
        };
        out.rho[j] = r;
        out.v[j] = v;
        out.phi[j] = p;
        out.e[j] = sign * e;
    }
    Ok(out)
}

/// Union of the profiles' grids restricted to their common range.
pub fn union_grid(profiles: &[&WaveProfile]) -> Result<Vec<f64>> {
    let reach = profiles
        .iter()
        .map(|p| *p.xi.last().expect("non-empty profile"))
        .fold(f64::INFINITY, f64::min);
    let mut s: Vec<f64> = profiles
        .iter()
        .flat_map(|p| p.right().map(|(s, _)| s))
        .filter(|&s| s <= reach)
        .collect();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 2 {
        return Err(Error::Grid("profiles share no common range".into()));
    }
    let mut g: Vec<f64> = s.iter().rev().map(|v| -v).collect();
    g.push(0.0);
    g.extend_from_slice(&s);
    Ok(g)
}

/// `||rho_k - rho_0||_{L^p}` on a symmetric grid. The cells touching `xi = 0`, where the cold
/// density is unbounded, use `rho_0 = 4/9 A_0 |xi|^{-2/3}` and a linear `rho_k`.
pub fn lp_density_difference(grid: &[f64], rho_k: &[f64], rho_0: &[f64], p: f64, a0: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::domain("p", p, "[1, inf)"));
    }
    let n = grid.len();
    let k = grid
        .iter()
        .position(|&x| x == 0.0)
        .ok_or_else(|| Error::Grid("grid must contain 0".into()))?;
    let mut total = 0.0;
    for i in 0..n - 1 {
        if i == k || i + 1 == k {
            continue;
        }
        let a = (rho_k[i] - rho_0[i]).abs().powf(p);
        let b = (rho_k[i + 1] - rho_0[i + 1]).abs().powf(p);
        total += 0.5 * (a + b) * (grid[i + 1] - grid[i]);
    }
    let (t, w) = gauss_legendre(40);
    for (j, s1) in [(k - 1, -grid[k - 1]), (k + 1, grid[k + 1])] {
        let (r0, r1) = (rho_k[k], rho_k[j]);
        let mut cell = 0.0;
        for (ti, wi) in t.iter().zip(&w) {
            // s = s1 u^5 on u in (0, 1)
            let u = 0.5 * (ti + 1.0);
            let s = s1 * u.powi(5);
            let rk = r0 + (r1 - r0) * s / s1;
            let cold = 4.0 / 9.0 * a0 * s.powf(-2.0 / 3.0);
            cell += 0.5 * wi * (rk - cold).abs().powf(p) * 5.0 * s1 * u.powi(4);
        }
        total += cell;
    }
    Ok(total.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NormName {
    #[serde(rename = "C1alpha")]
    C1Alpha,
    #[serde(rename = "Calpha_seminorm")]
    CAlphaSeminorm,
    #[serde(rename = "Lp")]
    Lp,
    #[serde(rename = "Cbeta")]
    CBeta,
}

impl NormName {
    pub fn as_str(self) -> &'static str {
        match self {
            NormName::C1Alpha => "C1alpha",
            NormName::CAlphaSeminorm => "Calpha_seminorm",
            NormName::Lp => "Lp",
            NormName::CBeta => "Cbeta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub kappa: f64,
    pub norm_name: NormName,
    pub alpha_or_p: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColdLimitReport {
    pub rows: Vec<ConvergenceRow>,
    /// `4/3 A_0`, the limit of `|phi_0'| / |xi|^{1/3}` at the peak.
    pub witness_level: f64,
    pub grid_points: usize,
    pub s_max: f64,
}

impl ColdLimitReport {
    /// Values of one norm column in the order of the requested kappas.
    pub fn column(&self, name: NormName, param: f64) -> Vec<f64> {
        self.rows.iter().filter(|r| r.norm_name == name && r.alpha_or_p == param).map(|r| r.value).collect()
    }
}

/// Distances between each `kappa > 0` wave and the cold wave:
/// `C^{1,alpha}` of `phi`, `L^p` of `rho`, `C^beta` of `v`, and the `C^{1/3}` seminorm of
/// `phi'` that stays away from zero.
pub fn cold_limit_report(
    kappas: &[f64],
    alphas: &[f64],
    betas: &[f64],
    ps: &[f64],
    opts: &ShootOptions,
    grid: &GridSpec,
) -> Result<ColdLimitReport> {
    if kappas.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Inconsistent("cold-limit kappas must be positive".into()));
    }
    let mut all: Vec<f64> = vec![0.0];
    all.extend_from_slice(kappas);
    let orbits: Vec<HalfOrbit> = all
        .par_iter()
        .map(|&k| {
            let p = Params::critical(k)?;
            integrate_half(&p, unstable_seed(&p, opts.delta)?, opts)
        })
        .collect::<Result<_>>()?;
    let reach = orbits.iter().map(HalfOrbit::length).fold(f64::INFINITY, f64::min);
    let s_max = grid.s_max.unwrap_or(reach.min(20.0));
    let profiles: Vec<WaveProfile> =
        orbits.iter().map(|o| assemble_peakon(o, &GridSpec { s_max: Some(s_max), ..*grid })).collect::<Result<_>>()?;
    let refs: Vec<&WaveProfile> = profiles.iter().collect();
    let g = union_grid(&refs)?;
    let fields: Vec<Resampled> = profiles.iter().map(|p| resample(p, &g)).collect::<Result<_>>()?;
    let cold = &fields[0];
    let a0 = cold_constant(profiles[0].params.c);

    let rows: Vec<Vec<ConvergenceRow>> = kappas
        .par_iter()
        .enumerate()
        .map(|(j, &kappa)| {
            let w = &fields[j + 1];
            let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<f64>>();
            let dphi = diff(&w.phi, &cold.phi);
            let de = diff(&w.e, &cold.e);
            let dv = diff(&w.v, &cold.v);
            let mut out = Vec::new();
            for &a in alphas {
                out.push(ConvergenceRow {
                    kappa,
                    norm_name: NormName::C1Alpha,
                    alpha_or_p: a,
                    value: holder_norm(&g, &dphi, Some(&de), a, 1)?,
                });
            }
            for &p in ps {
                out.push(ConvergenceRow {
                    kappa,
                    norm_name: NormName::Lp,
                    alpha_or_p: p,
                    value: lp_density_difference(&g, &w.rho, &cold.rho, p, a0)?,
                });
            }
            for &b in betas {
                out.push(ConvergenceRow { kappa, norm_name: NormName::CBeta, alpha_or_p: b, value: holder_norm(&g, &dv, None, b, 0)? });
            }
            out.push(ConvergenceRow {
                kappa,
                norm_name: NormName::CAlphaSeminorm,
                alpha_or_p: 1.0 / 3.0,
                value: holder_seminorm(&g, &de, 1.0 / 3.0)?,
            });
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(ColdLimitReport { rows: rows.into_iter().flatten().collect(), witness_level: 4.0 / 3.0 * a0, grid_points: g.len(), s_max })
}

/// Thickness of the transition layer for each `kappa`.
pub fn thickness_sweep(kappas: &[f64], m: f64, opts: &ShootOptions, grid: &GridSpec) -> Result<Vec<(f64, f64)>> {
    kappas
        .par_iter()
        .map(|&k| {
            let (_, prof) = peakon(k, opts, grid)?;
            Ok((k, transition_thickness(&prof, m)?))
        })
        .collect()
}
