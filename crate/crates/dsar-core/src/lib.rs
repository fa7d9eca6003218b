//! Doppler synthetic aperture radar (DSAR) simulation and imaging laboratory.
//!
//! A continuous-wave radar on a known flight path illuminates a flat scene;
//! a windowed Fourier transform of the echo yields data `W(s, omega)` over
//! slow time and frequency. This crate provides:
//!
//! - [`geometry`]: flight trajectories and the range function with all slow-time
//!   derivatives and ground-plane gradients in closed form, plus a finite
//!   difference oracle.
//! - [`forward`]: the exact raw echo, a quadrature oracle for the windowed
//!   transform, and the linearized forward operators (start-stop and
//!   first-order corrected), with binary/CSV grid I/O.
//! - [`canonical`]: the canonical relation of the forward operator, projection
//!   Jacobians, the degeneracy locus, numerical fold/blowdown/cusp
//!   classification, and injectivity analysis for the circular path.
//! - [`imaging`]: backprojection with beam-pattern masking, the left-right
//!   mirror artifact map for linear tracks, and artifact metrics.
//! - [`verify`]: seeded, machine-checkable suites driving the invariants of
//!   all modules.

// Validation predicates use the negated forms (`!(x > 0.0)`) on purpose:
// they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod quad;
pub mod verify;

pub use error::{DsarError, Result};
pub use geometry::{GroundPoint, RangeState, Trajectory};

/// Complex sample type used throughout the crate.
pub type Complex64 = num_complex::Complex<f64>;
