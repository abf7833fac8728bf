//! Random walks on tori driven by commuting affine expanding maps, and
//! normality of typical points in self-similar sets.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact`]: scalars over ℚ extended by declared irrationals, integer
//!   matrices, expansion tests and the adapted norm.
//! * [`groupcond`]: exact density test for finite subsets of the torus and
//!   the two irrationality conditions built on it.
//! * [`fractal`]: affine IFSs, coding maps, walk maps and the exact orbit
//!   identities relating them, plus a high-precision orbit engine.
//! * [`chains`]: the rational case: finite stationary supports, the η
//!   chain and its exact stationary law.
//! * [`spectral`]: Fourier coefficients of atomic and self-similar measures.
//! * [`stats`]: Weyl sums, star discrepancy and digit statistics.
//! * [`cli`]: experiment configs, reports and verification suites.

pub mod chains;
pub mod cli;
pub mod error;
pub mod exact;
pub mod fractal;
pub mod groupcond;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
