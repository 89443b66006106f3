//! Scaled relative graph (SRG) analysis of nonlinear feedback systems.
//!
//! The crate bounds the SRG of each block of a linear fractional
//! representation, combines the bounds with a sound set calculus and turns the
//! result into well-posedness, stability and (incremental) L2-gain
//! certificates. A time-domain simulator provides empirical gains to check
//! the certificates against.
//!
//! Modules:
//! - [`region`]: disk-algebra and ε-cover regions and the set calculus;
//! - [`lti`]: state-space models, frequency sweeps and LTI SRG bounds;
//! - [`nonlin`]: sector bounds and concrete static nonlinearities;
//! - [`analysis`]: feedback and LFR certification, loop transformations;
//! - [`sim`]: RK4 simulation and empirical gain estimation;
//! - [`models`]: the built-in example systems.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod kdtree;
pub mod lti;
pub mod models;
pub mod nonlin;
pub mod par;
pub mod plot;
pub mod region;
pub mod sim;

pub use num_complex::Complex64 as C64;
