//! LEO satellite-to-ground channel simulation by planar-wavefront
//! shooting-and-bouncing rays.
//!
//! The pipeline: TLE → SGP4 (TEME) → ECI → ECEF → local scene frame →
//! SBR trace → per-path power, delay and Doppler → snapshot statistics.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod doppler;
pub mod frames;
pub mod link;
pub mod propagator;
pub mod sbr;
pub mod sim;
pub mod scene;
pub mod time;
pub mod tle;

pub use nalgebra;
