//! Numerical laboratory for finite-time blow-up of two-speed semilinear wave
//! systems on radial asymptotically Euclidean metrics.
//!
//! * [`metric`]: radial metrics `K(r)^2 dr^2 + r^2 dω^2` and their checks.
//! * [`eigenfunction`]: the positive radial solution of `Δ_g φ = λ^2 φ` and
//!   weighted cone integrals built from it.
//! * [`critical_curves`]: critical-curve algebra, classification, lifespan
//!   iterations and the vector Kato criterion.
//! * [`comparison_ode`]: comparison ODE systems, blow-up detection and
//!   power-law fits of lifespans.
//! * [`wave_sim`]: a radial finite-difference solver for the coupled PDEs.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison_ode;
pub mod critical_curves;
pub mod eigenfunction;
pub mod error;
pub mod fit;
pub mod metric;
pub mod quadrature;
pub mod rk;
pub mod wave_sim;

pub use error::{Error, Result};
pub use metric::{MetricKind, MetricProfile, RadialGrid};

/// Crate version, recorded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
