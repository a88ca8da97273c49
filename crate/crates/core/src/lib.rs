//! Numerics for laser-driven low-energy free-electron Rabi dynamics.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation: coupling constants and regime classification, the
//! semiclassical sideband ladder, a Crank-Nicolson solver for the slow
//! envelope, quantized electron-photon (Jaynes-Cummings) dynamics,
//! two-level pulse sequences, and spectral recovery of photon statistics.
//! File formats and the command-line front end live in the `rabi` crate.
//!
//! Units are SI at every public boundary (seconds, rad/s, metres, V/m)
//! unless a type states otherwise. Sideband labels are [`HalfInt`] values so
//! that the two-level pair is `±1/2`.

#![no_std]
// Float math resolves through `num_traits::Float` (libm). Whenever std is
// linked into the build its inherent methods win and the import reads as unused.
#![allow(unused_imports)]

extern crate alloc;

pub mod analysis;
pub mod constants;
mod error;
mod halfint;
pub mod interferometry;
pub mod ladder;
pub mod params;
pub mod quantum;
pub mod tdse;
pub mod tridiag;

pub use error::{Error, Result};
pub use halfint::HalfInt;
pub use num_complex::Complex64;
