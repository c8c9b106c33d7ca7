//! Peaked solitary waves of the one-dimensional Euler–Poisson system with Boltzmann electrons.
//!
//! ```text
//! rho_t + (rho v)_x = 0
//! rho (v_t + v v_x) + kappa rho_x = -rho phi_x
//! -phi_xx = rho - exp(phi)
//! ```

pub mod error;
pub mod roots;
pub mod speeds;
pub mod wavealg;
pub mod ode;
pub mod quad;
pub mod interp;
pub mod shooter;
pub mod asympt;
pub mod epsim;

pub use error::{Error, Result};
