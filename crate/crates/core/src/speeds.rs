//! Critical traveling speeds.
//!
//! For `kappa > 0` the critical speed `c_kappa` is the root above `sqrt(1 + kappa)` of
//!
//! ```text
//! f_kappa(z) = kappa ln z - kappa ln sqrt(kappa) + ln((z - sqrt(kappa))^2 + 1) - (z^2 - kappa)/2
//! ```
//!
//! and for the cold case `c_0` is the positive root of `f_0(z) = ln(z^2 + 1) - z^2/2`.
//! The other positive zero of `f_kappa`, `z = sqrt(kappa)`, is excluded by the bracket.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::roots::{bisect_newton, RootOptions};

pub const DEFAULT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedResult {
    pub kappa: f64,
    pub c: f64,
    /// `f_kappa(c)`.
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

/// `f_kappa(z)`. The cold case is its own closed form, never a limit of the warm one.
pub fn f_log_residual(z: f64, kappa: f64) -> Result<f64> {
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::domain("z", z, "(0, inf)"));
    }
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(Error::domain("kappa", kappa, "[0, inf)"));
    }
    Ok(f_kappa(z, kappa))
}

fn f_kappa(z: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        (z * z).ln_1p() - 0.5 * z * z
    } else {
        let sk = kappa.sqrt();
        let d = z - sk;
        kappa * (z / sk).ln() + (d * d).ln_1p() - 0.5 * (z * z - kappa)
    }
}

fn df_kappa(z: f64, kappa: f64) -> f64 {
    if kappa == 0.0 {
        2.0 * z / (z * z + 1.0) - z
    } else {
        let d = z - kappa.sqrt();
        kappa / z + 2.0 * d / (d * d + 1.0) - z
    }
}

fn opts(tol: f64) -> RootOptions {
    RootOptions {
        bisect_width: 1e-6,
        ftol: tol,
        max_iter: 300,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::domain("tol", tol, "(0, inf)"));
    }
    Ok(())
}

/// Brackets the root on `(sqrt(1 + kappa), inf)`: `f` is positive just above the
/// sonic speed and tends to `-inf`, so the width is doubled until the sign flips.
fn bracket(kappa: f64) -> Result<(f64, f64)> {
    let lo = (1.0 + kappa).sqrt() + 1e-8;
    if f_kappa(lo, kappa) <= 0.0 {
        return Err(Error::Bracket { what: "f_kappa", lo, hi: lo });
    }
    let mut width = 1.0;
    for _ in 0..64 {
        let hi = lo + width;
        if f_kappa(hi, kappa) < 0.0 {
            return Ok((lo, hi));
        }
        width *= 2.0;
    }
    Err(Error::Bracket { what: "f_kappa", lo, hi: lo + width })
}

fn solve(kappa: f64, tol: f64) -> Result<SpeedResult> {
    check_tol(tol)?;
    let (lo, hi) = bracket(kappa)?;
    let root = bisect_newton("f_kappa", |z| f_kappa(z, kappa), |z| df_kappa(z, kappa), lo, hi, opts(tol))?;
    Ok(SpeedResult {
        kappa,
        c: root.x,
        residual: root.fx,
        bracket: root.bracket,
        iterations: root.iterations,
    })
}

/// Critical speed of the cold model, the positive root of `z^2 + 1 = exp(z^2 / 2)`.
pub fn solve_c0(tol: f64) -> Result<SpeedResult> {
    solve(0.0, tol)
}

pub fn solve_c_kappa(kappa: f64, tol: f64) -> Result<SpeedResult> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::domain("kappa", kappa, "(0, inf)"));
    }
    solve(kappa, tol)
}

/// Dispatches on `kappa == 0`.
pub fn critical_speed(kappa: f64, tol: f64) -> Result<SpeedResult> {
    if kappa == 0.0 {
        solve_c0(tol)
    } else {
        solve_c_kappa(kappa, tol)
    }
}

fn potential(rho: f64, kappa: f64, c: f64) -> f64 {
    0.5 * c * c * (1.0 - 1.0 / (rho * rho)) - kappa * rho.ln()
}

/// Nontrivial zero `rho_hat` of `l(rho) = ln rho - H(rho)`, the center of the
/// reduced phase plane. The trivial zero `rho = 1` lies left of the bracket.
pub fn solve_rho_hat(kappa: f64, c: f64, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    if !(kappa >= 0.0) {
        return Err(Error::domain("kappa", kappa, "[0, inf)"));
    }
    if !(c > (1.0 + kappa).sqrt()) {
        return Err(Error::domain("c", c, format!("({}, inf)", (1.0 + kappa).sqrt())));
    }
    let l = |r: f64| r.ln() - potential(r, kappa, c);
    let dl = |r: f64| (1.0 + kappa) / r - c * c / (r * r * r);
    let lo = c / (1.0 + kappa).sqrt();
    let hi = if kappa > 0.0 {
        let hi = c / kappa.sqrt();
        if l(hi) <= 0.0 {
            return Err(Error::Bracket { what: "ln rho - H(rho)", lo, hi });
        }
        hi
    } else {
        let mut hi = 2.0 * lo;
        let mut n = 0;
        while l(hi) <= 0.0 {
            hi *= 2.0;
            n += 1;
            if n > 200 {
                return Err(Error::Bracket { what: "ln rho - H(rho)", lo, hi });
            }
        }
        hi
    };
    let root = bisect_newton("ln rho - H(rho)", l, dl, lo, hi, opts(tol))?;
    Ok(root.x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedGapRow {
    pub kappa: f64,
    pub c: f64,
    pub residual: f64,
    pub gap: f64,
    pub gap_over_sqrt_kappa: f64,
}

/// `c_0 - c_kappa` and its `sqrt(kappa)`-scaled version for each kappa, rows in input order.
/// A zero kappa gives the cold row with gap 0 and a NaN ratio.
pub fn speed_gap_scan(kappas: &[f64], tol: f64) -> Result<Vec<SpeedGapRow>> {
    if kappas.is_empty() {
        return Ok(Vec::new());
    }
    let c0 = solve_c0(tol)?.c;
    kappas
        .par_iter()
        .map(|&k| {
            let s = critical_speed(k, tol)?;
            let gap = c0 - s.c;
            Ok(SpeedGapRow {
                kappa: k,
                c: s.c,
                residual: s.residual,
                gap,
                gap_over_sqrt_kappa: gap / k.sqrt(),
            })
        })
        .collect()
}

/// Leading-order prediction for `(c_0 - c_kappa)/sqrt(kappa)`:
/// `2 c_0 / ((c_0^2 + 1) |f_0'(c_0)|)`.
pub fn gap_ratio_limit(tol: f64) -> Result<f64> {
    let c0 = solve_c0(tol)?.c;
    Ok(2.0 * c0 / ((c0 * c0 + 1.0) * df_kappa(c0, 0.0).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cold_residual_values() {
        assert!((f_log_residual(1.0, 0.0).unwrap() - (2f64.ln() - 0.5)).abs() < 1e-15);
        assert!((f_log_residual(2.0, 0.0).unwrap() - (5f64.ln() - 2.0)).abs() < 1e-15);
    }

    #[test]
    fn residual_vanishes_at_sqrt_kappa() {
        for &k in &[0.25f64, 1e-6, 1.0, 3.7] {
            assert!(f_log_residual(k.sqrt(), k).unwrap().abs() < 1e-15);
        }
    }

    #[test]
    fn residual_rejects_nonpositive_z() {
        assert!(f_log_residual(0.0, 1.0).is_err());
        assert!(f_log_residual(-1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for &k in &[0.0, 0.01, 1.0] {
            for &z in &[0.5, 1.3, 2.0, 3.1] {
                let h = 1e-6;
                let fd = (f_kappa(z + h, k) - f_kappa(z - h, k)) / (2.0 * h);
                assert!((fd - df_kappa(z, k)).abs() < 1e-8, "k={k} z={z}");
            }
        }
    }

    #[test]
    fn c0_value() {
        let s = solve_c0(1e-9).unwrap();
        assert!((s.c - 1.585201).abs() < 1e-6);
        assert!(s.residual.abs() < 1e-12);
        let c2 = s.c * s.c;
        assert!((c2 + 1.0 - (0.5 * c2).exp()).abs() < 1e-8);
    }

    #[test]
    fn c1_value() {
        let s = solve_c_kappa(1.0, 1e-10).unwrap();
        assert!((s.c - 2f64.sqrt() - 0.1552702843).abs() < 1e-9);
    }

    #[test]
    fn tiny_kappa_close_to_c0() {
        let c0 = solve_c0(DEFAULT_TOL).unwrap().c;
        let s = solve_c_kappa(1e-6, DEFAULT_TOL).unwrap();
        assert!((s.c - c0).abs() < 1e-2);
        assert!(s.c < c0);
    }

    #[test]
    fn sign_structure_around_root() {
        for &k in &[1e-4, 0.1, 1.0, 5.0] {
            let tol = 1e-12;
            let s = solve_c_kappa(k, tol).unwrap();
            assert!(s.c > (1.0 + k).sqrt());
            let d = 1e-6;
            assert!(f_kappa(s.c - d, k) > 0.0);
            assert!(f_kappa(s.c + d, k) < 0.0);
            assert!(s.bracket.0 < s.c && s.c < s.bracket.1);
        }
    }

    #[test]
    fn rho_hat_cold() {
        let c0 = solve_c0(DEFAULT_TOL).unwrap().c;
        let r = solve_rho_hat(0.0, c0, 1e-13).unwrap();
        assert!(r > c0);
        assert!((r - potential(r, 0.0, c0).exp()).abs() / r < 1e-12);
        // independent bisection on l(rho) from just above rho_1
        let l = |x: f64| x.ln() - potential(x, 0.0, c0);
        let b = crate::roots::bisect("l", l, c0 * 1.0000001, 100.0, 1e-14).unwrap();
        assert!((b - r).abs() < 1e-12);
    }

    #[test]
    fn rho_hat_warm_bounds() {
        let c1 = solve_c_kappa(1.0, DEFAULT_TOL).unwrap().c;
        let r = solve_rho_hat(1.0, c1, 1e-13).unwrap();
        assert!(r > c1 / 2f64.sqrt() && r < c1);
        let l = |x: f64| x.ln() - potential(x, 1.0, c1);
        let b = crate::roots::bisect("l", l, c1 / 2f64.sqrt(), c1, 1e-14).unwrap();
        assert!((b - r).abs() < 1e-12);
        // the trivial zero at rho = 1
        assert!(l(1.0).abs() < 1e-16);
    }

    #[test]
    fn rho_hat_rejects_subsonic() {
        assert!(solve_rho_hat(0.0, 0.9, 1e-12).is_err());
    }

    #[test]
    fn gap_scan_rows() {
        assert!(speed_gap_scan(&[], 1e-12).unwrap().is_empty());
        let rows = speed_gap_scan(&[1e-2, 1e-4, 1e-6], 1e-12).unwrap();
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.gap > 0.0);
        }
        let lim = gap_ratio_limit(1e-12).unwrap();
        let last = rows[2].gap_over_sqrt_kappa;
        assert!((last - lim).abs() / lim < 0.05, "ratio {last} vs limit {lim}");
        let r8 = speed_gap_scan(&[1e-8], 1e-12).unwrap()[0];
        assert!(r8.gap > 0.0 && r8.gap < 1e-3);
    }
}
