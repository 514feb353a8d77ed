//! Gaussian quantum states, channels and measurements at the
//! covariance-matrix level.
//!
//! Everything works in the real phase-space picture: a system of n modes has
//! coordinates ordered (x_1, y_1, ..., x_n, y_n), the standard commutation
//! form Delta is block-diagonal with 2x2 blocks [[0, -1], [1, 0]], and the
//! vacuum state has covariance I/2. States, channels and observables carry
//! plain real matrices; no operator-level objects appear anywhere.
//!
//! The decision procedures live in [`eb`] and [`one_mode`]: whether a channel
//! admits a measure-and-reprepare split (with an explicit matrix certificate
//! when it does), the weaker partial-transpose necessary condition, the
//! classical-quantum degeneracy test, a complete classification of one-mode
//! channels with closed-form split domains, and a conjectured one-shot
//! capacity formula for the classified families.

pub mod channels;
pub mod eb;
pub mod error;
pub mod observables;
pub mod one_mode;
pub mod states;
pub mod symplectic;

pub use error::{GaussError, Result};

/// Default relative tolerance for PSD checks and classification thresholds.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default feasibility tolerance for the split-certificate solver.
pub const DEFAULT_FEAS_TOL: f64 = 1e-8;
