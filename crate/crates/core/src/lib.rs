//! Numerical geometry of optimal transport and Monge-Ampère structures on `R3 x R3`.
//!
//! The crate builds two pseudo-Riemannian metrics on the phase space of a
//! transport problem with cost `c(x, xbar)` and densities `rho`, `rhobar`:
//!
//! - the KMW metric `h_c`, from the mixed Hessian `D_x D_xbar c`;
//! - the LR metric `g_alpha` of the Monge-Ampère structure
//!   `(omega_c, alpha)`, from contractions of the effective 3-form.
//!
//! It checks the conformal relation `g = (rho rhobar)^(2/3) h` pointwise,
//! and ties the geometry back to discrete transport through exact and
//! entropic solvers, duality diagnostics and Monge-Ampère residuals.

// `!(v > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exterior;
pub mod fields;
pub mod ma_structure;
pub mod ot_solver;
pub mod sampling;
pub mod semigeostrophic;
pub mod transport_geometry;

pub use error::{Error, Result};
pub use exterior::{AltForm, GraphSection};
pub use fields::{CostFunction, CostKind, Density, DomainBox, IntervalDensity, Point, ScalarField};
pub use ma_structure::{MAStructure, MetricAtPoint};
pub use transport_geometry::{ConformalReport, GraphCheck, Signature};
