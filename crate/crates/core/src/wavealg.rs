//! Traveling-wave algebra of the reduced system.
//!
//! A wave `(rho, v, phi)(x - c t)` decaying to `(1, 0, 0)` satisfies `v = c (1 - 1/rho)` and
//! `phi = H(rho)` with
//!
//! ```text
//! H(rho) = c^2/2 (1 - 1/rho^2) - kappa ln rho,     h = H'(rho) = c^2/rho^3 - kappa/rho,
//! ```
//!
//! and `(rho, E = -phi')` solves `-h(rho) rho' = E`, `E' = rho - exp(H(rho))`, which conserves
//! `Psi(rho, E) = -E^2/2 + g(rho)` with `g(rho) = c^2/rho + kappa rho + exp(H(rho))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect_newton, RootOptions};
use crate::speeds;

/// Peak density of the critical wave. Unbounded in the cold model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PeakDensity {
    Bounded(f64),
    Unbounded,
}

impl PeakDensity {
    pub fn value(self) -> Option<f64> {
        match self {
            PeakDensity::Bounded(r) => Some(r),
            PeakDensity::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub kappa: f64,
    pub c: f64,
    /// `c / sqrt(kappa)` for `kappa > 0`, where `h` vanishes.
    pub rho_star: PeakDensity,
    pub v_star: f64,
    /// Supremum of `H` on the branch where it is increasing.
    pub phi_star: f64,
    pub rho_hat: f64,
    /// Whether `c` is the critical speed of this `kappa`.
    pub critical: bool,
}

impl Params {
    /// Parameters at the critical speed `c_kappa`.
    pub fn critical(kappa: f64) -> Result<Self> {
        let s = speeds::critical_speed(kappa, speeds::DEFAULT_TOL)?;
        Self::build(kappa, s.c, true)
    }

    /// Parameters for an arbitrary supersonic speed `sqrt(1 + kappa) < c <= c_kappa`.
    pub fn with_speed(kappa: f64, c: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::domain("kappa", kappa, "[0, inf)"));
        }
        let crit = speeds::critical_speed(kappa, speeds::DEFAULT_TOL)?.c;
        let sonic = (1.0 + kappa).sqrt();
        if !(c > sonic && c <= crit) {
            return Err(Error::domain("c", c, format!("({sonic}, {crit}]")));
        }
        Self::build(kappa, c, c == crit)
    }

    fn build(kappa: f64, c: f64, critical: bool) -> Result<Self> {
        let rho_hat = speeds::solve_rho_hat(kappa, c, 1e-13)?;
        let (rho_star, v_star, phi_star) = if kappa > 0.0 {
            let rs = c / kappa.sqrt();
            let phi = 0.5 * c * c * (1.0 - 1.0 / (rs * rs)) - kappa * rs.ln();
            (PeakDensity::Bounded(rs), c - kappa.sqrt(), phi)
        } else {
            (PeakDensity::Unbounded, c, 0.5 * c * c)
        };
        Ok(Params { kappa, c, rho_star, v_star, phi_star, rho_hat, critical })
    }

    /// `H(rho)`.
    pub fn potential(&self, rho: f64) -> f64 {
        0.5 * self.c * self.c * (1.0 - 1.0 / (rho * rho)) - self.kappa * rho.ln()
    }

    /// `h(rho) = H'(rho)`. Evaluated as `(kappa/rho)(r^2 - 1)`, `r = rho*/rho`, when `kappa > 0`
    /// so that the zero at the peak density carries no cancellation.
    pub fn slope(&self, rho: f64) -> f64 {
        match self.rho_star {
            PeakDensity::Bounded(rs) => {
                let u = (rs - rho) / rho;
                self.kappa / rho * u * (2.0 + u)
            }
            PeakDensity::Unbounded => self.c * self.c / (rho * rho * rho),
        }
    }

    /// `dh/drho`.
    pub fn slope_prime(&self, rho: f64) -> f64 {
        -3.0 * self.c * self.c / rho.powi(4) + self.kappa / (rho * rho)
    }

    /// `g(rho)`.
    pub fn energy(&self, rho: f64) -> f64 {
        self.c * self.c / rho + self.kappa * rho + self.potential(rho).exp()
    }

    /// `dg/drho = -h(rho) (rho - exp(H(rho)))`.
    pub fn energy_prime(&self, rho: f64) -> f64 {
        -self.slope(rho) * (rho - self.potential(rho).exp())
    }

    /// `phi* - H(rho)`, accurate when `rho` is close to the peak density.
    pub fn peak_gap(&self, rho: f64) -> f64 {
        match self.rho_star {
            PeakDensity::Bounded(rs) => {
                // kappa ((r^2 - 1)/2 - ln r) with r = rho*/rho = 1 + u
                let u = (rs - rho) / rho;
                let tail = if u.abs() < 1e-3 {
                    // u - ln(1+u) - u^2/2 + u^2/2 ... collected as a series
                    u * u * (1.0 - u / 3.0 + u * u / 4.0 - u * u * u / 5.0)
                } else {
                    u + 0.5 * u * u - u.ln_1p()
                };
                self.kappa * tail
            }
            PeakDensity::Unbounded => 0.5 * self.c * self.c / (rho * rho),
        }
    }

    /// `g(rho) - g(1)`, the level distance that sets `E^2/2` on the separatrix.
    ///
    /// Near the peak density (warm case) and at large density (cold case) the difference is
    /// assembled from pieces that are individually small. At the critical speed the level of
    /// the peak equals `g(1)` exactly, so its rounding residual is dropped.
    pub fn energy_gap(&self, rho: f64) -> f64 {
        let c2 = self.c * self.c;
        match self.rho_star {
            PeakDensity::Bounded(rs) if (rs - rho).abs() < 0.1 * (rs - 1.0) => {
                // g(rho) - g(rho*) + (g(rho*) - g(1))
                let eps = rs - rho;
                let local = self.kappa * eps * eps / rho
                    + self.phi_star.exp() * (-self.peak_gap(rho)).exp_m1();
                local + if self.critical { 0.0 } else { self.peak_energy_offset() }
            }
            PeakDensity::Unbounded if rho > 2.0 => {
                // exp(c^2/2) = c^2 + 1 holds for the critical cold speed; keep its residual
                let far = if self.critical { 0.0 } else { (0.5 * c2).exp() - (c2 + 1.0) };
                c2 / rho + (0.5 * c2).exp() * (-0.5 * c2 / (rho * rho)).exp_m1() + far
            }
            _ => c2 * (1.0 - rho) / rho + self.kappa * (rho - 1.0) + self.potential(rho).exp_m1(),
        }
    }

    /// `g(rho*) - g(1)`; zero at the critical speed up to rounding.
    pub fn peak_energy_offset(&self) -> f64 {
        match self.rho_star {
            PeakDensity::Bounded(rs) => {
                let c2 = self.c * self.c;
                c2 / rs + self.kappa * rs + self.phi_star.exp() - (c2 + self.kappa + 1.0)
            }
            PeakDensity::Unbounded => 0.0,
        }
    }

    /// Far-field level `g(1) = c^2 + kappa + 1`.
    pub fn far_level(&self) -> f64 {
        self.c * self.c + self.kappa + 1.0
    }

    /// Reduced vector field `(rho', E')`.
    pub fn vector_field(&self, rho: f64, e: f64) -> (f64, f64) {
        (-e / self.slope(rho), rho - self.potential(rho).exp())
    }

    /// Analytic Jacobian of the reduced vector field.
    pub fn jacobian(&self, rho: f64, e: f64) -> [[f64; 2]; 2] {
        let h = self.slope(rho);
        [
            [e * self.slope_prime(rho) / (h * h), -1.0 / h],
            [1.0 - h * self.potential(rho).exp(), 0.0],
        ]
    }

    pub fn rho_star_value(&self) -> Option<f64> {
        self.rho_star.value()
    }
}

/// A point `(rho, E)` of the reduced phase plane, `E = -phi'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub rho: f64,
    pub e: f64,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= 1.0) || rho.is_nan() {
        return Err(Error::domain("rho", rho, "[1, inf)"));
    }
    Ok(())
}

/// `H(rho)` for `rho >= 1`.
pub fn eval_potential(rho: f64, p: &Params) -> Result<f64> {
    check_rho(rho)?;
    Ok(p.potential(rho))
}

/// `h(rho)` for `rho >= 1`.
pub fn eval_slope(rho: f64, p: &Params) -> Result<f64> {
    check_rho(rho)?;
    Ok(p.slope(rho))
}

/// `g(rho)` for `rho >= 1`.
pub fn eval_energy(rho: f64, p: &Params) -> Result<f64> {
    check_rho(rho)?;
    Ok(p.energy(rho))
}

/// `Psi(rho, E) = -E^2/2 + g(rho)`.
pub fn first_integral(pt: PhasePoint, p: &Params) -> Result<f64> {
    check_rho(pt.rho)?;
    Ok(-0.5 * pt.e * pt.e + p.energy(pt.rho))
}

/// Inverse of `H` on its increasing branch `[1, rho*]`.
///
/// The cold case uses the closed form `c / sqrt(c^2 - 2 phi)`. For `kappa > 0` that same
/// expression is a lower bound (the warm `H` lies below the cold one), so it seeds the
/// lower end of a bisection/Newton bracket whose upper end is `rho*`.
pub fn h_inverse(phi: f64, p: &Params, tol: f64) -> Result<f64> {
    let c2 = p.c * p.c;
    match p.rho_star {
        PeakDensity::Unbounded => {
            if !(phi >= 0.0 && phi < 0.5 * c2) {
                return Err(Error::domain("phi", phi, format!("[0, {})", 0.5 * c2)));
            }
            Ok(p.c / (c2 - 2.0 * phi).sqrt())
        }
        PeakDensity::Bounded(rs) => {
            if !(phi >= 0.0 && phi <= p.phi_star) {
                return Err(Error::domain("phi", phi, format!("[0, {}]", p.phi_star)));
            }
            if phi == 0.0 {
                return Ok(1.0);
            }
            if phi == p.phi_star {
                return Ok(rs);
            }
            let seed = if 2.0 * phi < c2 { p.c / (c2 - 2.0 * phi).sqrt() } else { rs };
            let mut lo = seed.clamp(1.0, rs);
            if p.potential(lo) > phi {
                lo = 1.0;
            }
            let opts = RootOptions { bisect_width: 1e-6 * rs, ftol: tol, max_iter: 400 };
            let r = bisect_newton(
                "H(rho) - phi",
                |r| if r >= rs { p.phi_star - phi } else { phi_gap_rev(p, r, phi) },
                |r| p.slope(r),
                lo,
                rs,
                opts,
            )?;
            Ok(r.x)
        }
    }
}

// H(r) - phi written as (phi* - phi) - (phi* - H(r)) so the flat top near rho* keeps its digits
fn phi_gap_rev(p: &Params, r: f64, phi: f64) -> f64 {
    if p.peak_gap(r) < 0.25 * p.phi_star {
        (p.phi_star - phi) - p.peak_gap(r)
    } else {
        p.potential(r) - phi
    }
}

/// Smallest `N` with `N^-1 <= H^-1(phi) sqrt(phi* - phi) <= N` over `n` samples of
/// `phi in (0, H(rho*/M))`.
pub fn sandwich_constant(p: &Params, m: f64, n: usize) -> Result<f64> {
    let rs = p
        .rho_star_value()
        .ok_or_else(|| Error::Inconsistent("sandwich bound needs kappa > 0".into()))?;
    if !(m >= 2.0) {
        return Err(Error::domain("M", m, "[2, inf)"));
    }
    let top = p.potential(rs / m);
    let mut worst = 1.0_f64;
    for i in 1..n {
        let phi = top * i as f64 / n as f64;
        let rho = h_inverse(phi, p, 1e-14)?;
        let r = rho * (p.phi_star - phi).sqrt();
        worst = worst.max(r).max(1.0 / r);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryClassification {
    /// `(c^2 - (1+kappa)) / (c^2 - kappa)` from the closed form.
    pub saddle_lambda_sq: f64,
    /// Same quantity from a central-difference Jacobian at `(1, 0)`.
    pub saddle_lambda_sq_fd: f64,
    pub center_location: f64,
    pub center_trace: f64,
    pub center_det: f64,
    /// Squared imaginary part of the center eigenvalues (`det` when the trace vanishes).
    pub center_eigen_imag_sq: f64,
}

fn fd_jacobian(p: &Params, rho: f64, e: f64) -> [[f64; 2]; 2] {
    let dr = 1e-6 * rho.abs().max(1.0);
    let de = 1e-6;
    let (a1, b1) = p.vector_field(rho + dr, e);
    let (a0, b0) = p.vector_field(rho - dr, e);
    let (a3, b3) = p.vector_field(rho, e + de);
    let (a2, b2) = p.vector_field(rho, e - de);
    [
        [(a1 - a0) / (2.0 * dr), (a3 - a2) / (2.0 * de)],
        [(b1 - b0) / (2.0 * dr), (b3 - b2) / (2.0 * de)],
    ]
}

/// Saddle at `(1, 0)` and center at `(rho_hat, 0)`.
pub fn classify_stationary(p: &Params) -> Result<StationaryClassification> {
    let c2 = p.c * p.c;
    let lam2 = (c2 - (1.0 + p.kappa)) / (c2 - p.kappa);
    if !(lam2 > 0.0) {
        return Err(Error::Inconsistent(format!("lambda^2 = {lam2} at the far-field state")));
    }
    let js = fd_jacobian(p, 1.0, 0.0);
    // trace is zero on E = 0, so lambda^2 = -det
    let lam2_fd = js[0][0] * js[0][0] + js[0][1] * js[1][0];
    let jc = fd_jacobian(p, p.rho_hat, 0.0);
    let tr = jc[0][0] + jc[1][1];
    let det = jc[0][0] * jc[1][1] - jc[0][1] * jc[1][0];
    if det.abs() < 1e-14 || js[0][1] * js[1][0] == 0.0 {
        return Err(Error::Inconsistent("degenerate Jacobian at a stationary point".into()));
    }
    Ok(StationaryClassification {
        saddle_lambda_sq: lam2,
        saddle_lambda_sq_fd: lam2_fd,
        center_location: p.rho_hat,
        center_trace: tr,
        center_det: det,
        center_eigen_imag_sq: det - 0.25 * tr * tr,
    })
}

/// Linear dispersion relation about `(1, 0, 0)`: `omega = +- k sqrt(kappa + 1/(1 + k^2))`.
pub fn dispersion(k: f64, kappa: f64) -> (f64, f64) {
    let w = k * (kappa + 1.0 / (1.0 + k * k)).sqrt();
    (w, -w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseRow {
    pub rho: f64,
    pub potential: f64,
    pub slope: f64,
    pub energy: f64,
    /// `|E|` on the level `Psi = g(1)`; NaN where the level set does not reach.
    pub separatrix_e: f64,
}

/// Tabulates `H`, `h`, `g` and the separatrix on `n` densities in `[1, rho_max]`.
pub fn phase_table(p: &Params, n: usize) -> Vec<PhaseRow> {
    let top = match p.rho_star {
        PeakDensity::Bounded(rs) => rs,
        PeakDensity::Unbounded => 4.0 * p.rho_hat,
    };
    (0..n)
        .map(|i| {
            let rho = 1.0 + (top - 1.0) * i as f64 / (n.max(2) - 1) as f64;
            let gap = p.energy_gap(rho);
            PhaseRow {
                rho,
                potential: p.potential(rho),
                slope: p.slope(rho),
                energy: p.energy(rho),
                separatrix_e: if gap >= 0.0 { (2.0 * gap).sqrt() } else { f64::NAN },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cold() -> Params {
        Params::critical(0.0).unwrap()
    }
    fn warm() -> Params {
        Params::critical(1.0).unwrap()
    }

    #[test]
    fn params_invariants() {
        let p = warm();
        let rs = p.rho_star_value().unwrap();
        assert!((rs - p.c).abs() < 1e-15);
        assert!((p.v_star - (p.c - 1.0)).abs() < 1e-15);
        assert!((p.phi_star - p.potential(rs)).abs() < 1e-15);
        assert!(1.0 < p.c / 2f64.sqrt() && p.c / 2f64.sqrt() < p.rho_hat && p.rho_hat < rs);
        let q = cold();
        assert_eq!(q.rho_star, PeakDensity::Unbounded);
        assert!((q.v_star - q.c).abs() < 1e-15);
        assert!((q.phi_star - 0.5 * q.c * q.c).abs() < 1e-15);
        assert!(q.rho_hat > q.c);
    }

    #[test]
    fn potential_values() {
        let p = warm();
        assert_eq!(eval_potential(1.0, &p).unwrap(), 0.0);
        assert!(eval_potential(0.5, &p).is_err());
        let c = p.c;
        let expect = 0.5 * c * c * (1.0 - 1.0 / (c * c)) - c.ln();
        assert!((p.potential(c) - expect).abs() < 1e-15);
        assert!((p.potential(c) - 0.280892967).abs() < 1e-8);
        let q = cold();
        assert!((q.potential(1e6) - 0.5 * q.c * q.c).abs() < 1e-10);
    }

    #[test]
    fn slope_and_energy() {
        let p = warm();
        assert!(p.slope(p.c).abs() < 1e-16);
        assert!((eval_energy(1.0, &p).unwrap() - (p.c * p.c + 2.0)).abs() < 1e-14);
        assert!((p.energy(1.0) - p.energy(p.c)).abs() < 1e-9);
        assert!(p.peak_energy_offset().abs() < 1e-13);
        // slope formula against the direct expression
        for &r in &[1.0f64, 1.2, 1.5] {
            let direct = p.c * p.c / r.powi(3) - p.kappa / r;
            assert!((p.slope(r) - direct).abs() < 1e-15);
        }
    }

    #[test]
    fn energy_derivative_matches_fd() {
        for p in [warm(), cold(), Params::critical(0.05).unwrap()] {
            let top = p.rho_star_value().unwrap_or(50.0);
            for i in 0..40 {
                let r = 1.01 + (0.99 * top - 1.01) * i as f64 / 39.0;
                let d = 1e-5 * r;
                let fd = (p.energy(r + d) - p.energy(r - d)) / (2.0 * d);
                let an = p.energy_prime(r);
                assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-3), "rho={r} fd={fd} an={an}");
            }
        }
    }

    #[test]
    fn energy_gap_agrees_with_direct_difference() {
        for p in [warm(), cold(), Params::critical(0.01).unwrap()] {
            let top = p.rho_star_value().unwrap_or(20.0);
            for i in 1..30 {
                let r = 1.0 + (top - 1.0) * i as f64 / 30.0;
                let direct = p.energy(r) - p.energy(1.0);
                assert!((p.energy_gap(r) - direct).abs() < 1e-12, "rho {r}");
            }
        }
    }

    #[test]
    fn peak_gap_agrees_with_direct_difference() {
        let p = warm();
        for &r in &[1.0, 1.2, 1.5, 1.56] {
            assert!((p.peak_gap(r) - (p.phi_star - p.potential(r))).abs() < 1e-14);
        }
        let q = cold();
        assert!((q.peak_gap(3.0) - (q.phi_star - q.potential(3.0))).abs() < 1e-14);
    }

    #[test]
    fn g_monotone_on_either_side_of_center() {
        for p in [warm(), cold()] {
            let top = p.rho_star_value().unwrap_or(100.0);
            let n = 400;
            let mut prev = p.energy(1.0);
            for i in 1..=n {
                let r = 1.0 + (top - 1.0) * i as f64 / n as f64;
                let g = p.energy(r);
                if r < p.rho_hat - 1e-9 {
                    assert!(g > prev);
                } else if r > p.rho_hat + (top - 1.0) / n as f64 {
                    assert!(g < prev, "rho {r}");
                }
                prev = g;
            }
        }
    }

    #[test]
    fn first_integral_levels() {
        let p = warm();
        let g1 = p.energy(1.0);
        assert_eq!(first_integral(PhasePoint { rho: 1.0, e: 0.0 }, &p).unwrap(), g1);
        let rs = p.rho_star_value().unwrap();
        assert!((first_integral(PhasePoint { rho: rs, e: 0.0 }, &p).unwrap() - g1).abs() < 1e-9);
        let q = cold();
        let g1 = q.energy(1.0);
        for &r in &[1.1, 2.0, 10.0] {
            let e = -(2.0 * (q.energy(r) - g1)).sqrt();
            assert!((first_integral(PhasePoint { rho: r, e }, &q).unwrap() - g1).abs() < 1e-12);
        }
    }

    #[test]
    fn direction_signs_on_separatrix() {
        let p = warm();
        let rs = p.rho_star_value().unwrap();
        for i in 1..50 {
            let r = 1.0 + (rs - 1.0) * i as f64 / 50.0;
            let e = (2.0 * p.energy_gap(r)).sqrt();
            assert!(p.vector_field(r, -e).0 > 0.0);
            assert!(p.vector_field(r, e).0 < 0.0);
        }
    }

    #[test]
    fn inverse_closed_form_and_bisection() {
        let q = cold();
        assert_eq!(h_inverse(0.0, &q, 1e-14).unwrap(), 1.0);
        let r = h_inverse(0.5, &q, 1e-14).unwrap();
        let b = crate::roots::bisect("H", |x| q.potential(x) - 0.5, 1.0, 100.0, 1e-15).unwrap();
        assert!((r - b).abs() < 1e-12);
        assert!(h_inverse(q.phi_star, &q, 1e-12).is_err());
        assert!(h_inverse(-0.1, &q, 1e-12).is_err());
    }

    #[test]
    fn inverse_round_trip_warm() {
        for k in [1.0, 0.01, 1e-4] {
            let p = Params::critical(k).unwrap();
            let tol = 1e-13;
            for i in 0..1000 {
                let phi = p.phi_star * i as f64 / 999.0;
                let r = h_inverse(phi, &p, tol).unwrap();
                assert!(r >= 1.0 && r <= p.rho_star_value().unwrap());
                assert!((p.potential(r) - phi).abs() < 10.0 * tol, "kappa {k} phi {phi}");
            }
            assert!(h_inverse(p.phi_star * 1.01, &p, tol).is_err());
        }
    }

    #[test]
    fn sandwich_constant_small_kappa() {
        let p = Params::critical(0.01).unwrap();
        let n = sandwich_constant(&p, 2.0, 400).unwrap();
        assert!(n > 1.0 && n < 10.0, "N = {n}");
    }

    #[test]
    fn stationary_points() {
        let q = cold();
        let s = classify_stationary(&q).unwrap();
        assert!((s.saddle_lambda_sq - (1.0 - 1.0 / (q.c * q.c))).abs() < 1e-14);
        assert!((s.saddle_lambda_sq - 0.6020).abs() < 1e-4);
        assert!((s.saddle_lambda_sq_fd - s.saddle_lambda_sq).abs() / s.saddle_lambda_sq < 1e-6);
        assert!(s.center_trace.abs() < 1e-8);
        assert!(s.center_det > 0.0);
        assert!(1.0 - (q.c / q.rho_hat).powi(2) > 0.0);
        let p = warm();
        let s = classify_stationary(&p).unwrap();
        assert!((s.saddle_lambda_sq_fd - s.saddle_lambda_sq).abs() / s.saddle_lambda_sq < 1e-6);
        assert!(s.center_det > 0.0 && s.center_trace.abs() < 1e-8);
    }

    #[test]
    fn analytic_jacobian_matches_fd() {
        let p = warm();
        let ja = p.jacobian(1.0, 0.0);
        let jf = fd_jacobian(&p, 1.0, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                assert!((ja[i][j] - jf[i][j]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn dispersion_values() {
        assert_eq!(dispersion(0.0, 0.3), (0.0, -0.0));
        let k = 1e-3;
        assert!((dispersion(k, 0.0).0 - (k - k.powi(3) / 2.0)).abs() < 1e-14);
        let (a, b) = dispersion(1.0, 3.0);
        assert!((a - 3.5f64.sqrt()).abs() < 1e-15 && (b + 3.5f64.sqrt()).abs() < 1e-15);
        // long-wave expansion up to O(k^5)
        for &kap in &[0.0f64, 0.5, 2.0] {
            let k = 1e-2f64;
            let s = (1.0 + kap).sqrt();
            let series = s * k - k.powi(3) / (2.0 * s);
            assert!((dispersion(k, kap).0 - series).abs() < 10.0 * k.powi(5));
        }
    }

    #[test]
    fn subcritical_params() {
        let p = Params::with_speed(0.0, 1.5).unwrap();
        assert!(!p.critical);
        assert!(Params::with_speed(0.0, 1.7).is_err());
        assert!(Params::with_speed(0.0, 0.99).is_err());
    }
}
