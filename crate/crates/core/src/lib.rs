//! Geometry of the space of oriented lines in R³ and the geodesic flow on
//! its twisting holomorphic spheres.
//!
//! The space `L` of oriented affine lines in R³ is identified with the
//! tangent bundle of the 2-sphere. In the chart `(ξ, η)` (ξ the stereographic
//! direction, η the fibre coordinate) it carries a symplectic form Ω and a
//! neutral, signature (2,2) Kähler metric G, both invariant under the
//! Euclidean group.
//!
//! Global holomorphic sections of `L → S²` are quadratics
//! `η = β₁ + β₂ξ + β₃ξ²`; up to a Euclidean motion they reduce to
//! `η = c·i·ξ` with `c ≥ 0`. For `c > 0` the induced metric is
//! `−4c(1−|ξ|²)/(1+|ξ|²)³ dξ dξ̄`, definite on either hemisphere and degenerate
//! on the equator. Its geodesic flow conserves a squared speed `I₁` and an
//! angular momentum `I₂`:
//!
//! - `I₂ = 0`: the geodesic runs radially and hits the equator after a finite
//!   affine time `≈ 0.599070 / √I₁` (starting at the pole).
//! - `I₂ ≠ 0`: the radius oscillates inside the well of
//!   `U_eff(R) = (1+R²)³/((1−R²)R²)` cut at the level `I₁/I₂²`.
//!
//! Modules:
//! - [`line_space`]: chart points, Euclidean motions, Ω and G.
//! - [`sections`]: quadratic sections, normal form, induced metric.
//! - [`geodesics`]: geodesic ODE, first integrals, adaptive integration.
//! - [`analysis`]: radial quadrature, Appell F₁ series, blow-up time,
//!   effective potential and turning points.
//! - [`check`]: the cross-module invariant suite.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod check;
mod error;
pub mod fmt;
pub mod geodesics;
pub mod line_space;
mod ode;
mod quadrature;
pub mod sections;
pub mod serde_complex;

pub use num_complex::Complex64;

pub use analysis::{
    appell_f1_series, blowup_time, oscillation_check, pochhammer, radial_quadrature, turning_points, u_eff,
    OscillationReport, PolarState, TurningPoints, CRITICAL_RADIUS, MIN_POTENTIAL,
};
pub use error::{Error, Result};
pub use geodesics::{
    christoffel, first_integrals, integrate, rhs, FirstIntegrals, GeodesicState, Termination, Trajectory,
};
pub use line_space::{ComplexPair, EuclideanMotion, Rotation, TangentVector, Translation};
pub use sections::{NormalizationCertificate, QuadraticSection, StandardSphere};
