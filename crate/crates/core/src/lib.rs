//! Fixed-point analysis of standard-interference (SI) and positive concave (PC)
//! mappings on the nonnegative cone.
//!
//! The crate is `no_std` and only needs `alloc`. It provides:
//!
//! * [`cone`]: positive vectors, the cone partial order, Thompson's metric and
//!   the log/exp isometry onto `(ℝᵏ, ‖·‖∞)`.
//! * [`mapping`]: the [`Mapping`](mapping::Mapping) abstraction, randomized
//!   property falsifiers, asymptotic mappings and a few reference mappings.
//! * [`solver`]: fixed-point iteration with diagnostics, nonlinear spectral
//!   radius and feasibility tests, local contraction certificates in
//!   Thompson's metric and convergence-rate diagnostics.
//! * [`wireless`]: OFDMA load coupling and uplink power control with receive
//!   beamforming, built on top of the above.
//!
//! File formats, the experiment CLI and anything touching IO live in the
//! `conefix` companion crate.
#![no_std]
#![warn(missing_debug_implementations)]
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cone;
pub mod error;
pub mod linalg;
pub mod mapping;
mod math;
pub mod solver;
pub mod wireless;

pub use cone::{ConeBox, ConeOrder, Norm, PositiveVector};
pub use error::{Error, Result};
pub use mapping::{Flags, Mapping};
