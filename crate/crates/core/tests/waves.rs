use approx::assert_relative_eq;
use proptest::prelude::*;

use peakon_core::shooter::{self, GridSpec, OrbitKind, ShootOptions};
use peakon_core::wavealg::{self, Params};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn h_inverse_round_trip(kappa in 0.0f64..2.0, s in 0.01f64..0.99) {
        let p = Params::critical(kappa).unwrap();
        let top = p.rho_star_value().map_or(0.5 * p.c * p.c, |_| p.phi_star);
        let phi = s * top;
        let rho = wavealg::h_inverse(phi, &p, 1e-14).unwrap();
        prop_assert!((p.potential(rho) - phi).abs() < 1e-11 * (1.0 + phi));
    }

    #[test]
    fn energy_prime_matches_difference(kappa in 0.0f64..2.0, rho in 1.05f64..1.5) {
        let p = Params::critical(kappa).unwrap();
        let d = 1e-6;
        let fd = (p.energy(rho + d) - p.energy(rho - d)) / (2.0 * d);
        prop_assert!((fd - p.energy_prime(rho)).abs() < 1e-7);
    }
}

#[test]
fn warm_profile_is_symmetric_and_consistent() {
    let (_, prof) = shooter::peakon(0.5, &ShootOptions::default(), &GridSpec::default()).unwrap();
    let p = prof.params;
    let n = prof.xi.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        assert_relative_eq!(prof.xi[i], -prof.xi[j], epsilon = 1e-12);
        assert_relative_eq!(prof.rho[i], prof.rho[j], epsilon = 1e-12);
    }
    for i in 0..n {
        assert_relative_eq!(prof.v[i], p.c * (1.0 - 1.0 / prof.rho[i]), epsilon = 1e-12);
        assert_relative_eq!(prof.phi[i], p.potential(prof.rho[i]), epsilon = 1e-10);
    }
    let rs = p.rho_star_value().unwrap();
    assert_relative_eq!(prof.rho[prof.peak_index], rs, epsilon = 1e-9);
}

#[test]
fn subcritical_wave_is_smooth() {
    let p = Params::with_speed(0.0, 1.3).unwrap();
    let (orbit, prof) = shooter::wave(&p, &ShootOptions::default(), &GridSpec::default()).unwrap();
    assert_eq!(orbit.kind, OrbitKind::Smooth);
    assert!(prof.rho.iter().all(|r| r.is_finite() && *r >= 1.0));
    assert!(prof.max_drift < 1e-7, "drift {}", prof.max_drift);
}

#[test]
fn cold_peakon_keeps_first_integral() {
    let (orbit, prof) = shooter::peakon(0.0, &ShootOptions::default(), &GridSpec::default()).unwrap();
    assert_eq!(orbit.kind, OrbitKind::Peaked);
    assert!(prof.max_drift < 1e-7, "drift {}", prof.max_drift);
    let far = prof.params.far_level();
    for i in (0..prof.xi.len()).step_by(97) {
        if prof.xi[i].abs() < 1e-3 {
            continue;
        }
        let pt = wavealg::PhasePoint { rho: prof.rho[i], e: prof.e[i] };
        let psi = wavealg::first_integral(pt, &prof.params).unwrap();
        assert!((psi - far).abs() < 1e-6 * far, "xi {} psi {psi}", prof.xi[i]);
    }
}
