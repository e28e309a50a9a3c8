//! Randomized solvers for linear equations, least squares problems, linear
//! inequalities and convex feasibility, together with the conditioning
//! quantities (condition numbers, Hoffman constants, distance to
//! infeasibility, metric-regularity moduli) that govern their expected linear
//! convergence rates.
//!
//! The crate is organized around six modules:
//!
//! * [`linalg`] — dense row-major matrices/vectors and spectral quantities
//!   (norms, singular values, condition numbers).
//! * [`sampling`] — reproducible weighted index sampling on top of a fixed
//!   xoshiro256** generator; every probability distribution used by the
//!   solvers lives here.
//! * [`solvers`] — randomized coordinate descent for positive-semidefinite
//!   and general least-squares systems, randomized row projection (Kaczmarz),
//!   and its extension to mixed inequality/equality systems.
//! * [`geometry`] — closed-form projectable convex sets, randomized /
//!   no-repeat / averaged / alternating projection schedules, the product
//!   space formulation, and a Dykstra-based polyhedral distance oracle.
//! * [`conditioning`] — rate reports: every contraction factor promised by
//!   the convergence theory, with the constants that enter it.
//! * [`harness`] — seeded Gaussian experiment generators, the experiment
//!   runner (CSV + SVG output), and log-slope fitting.
//!
//! All randomness flows through the seeded generator in [`sampling`], so any
//! run is reproducible from its seed.

// `!(x > 0.0)` is used deliberately throughout as a NaN-rejecting positivity
// check; the suggested `x <= 0.0` would silently accept NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conditioning;
pub mod geometry;
pub mod harness;
pub mod io;
pub mod linalg;
pub mod sampling;
pub mod solvers;

pub use linalg::{DenseMatrix, DenseVector};
