//! Harmonic analysis on bounded Vilenkin groups.
//!
//! Functions measurable with respect to a finite cylinder rank are stored as
//! [`step::StepFunction`]s. Their Vilenkin-Fourier coefficients come from a
//! separable per-axis transform, and all Fejér means up to a bound are swept
//! in one pass per point by [`cesaro`]. The [`experiments`] module builds
//! verification reports on top of these pieces.
//!
//! With the default `parallel` feature, per-point and per-axis work runs on
//! the rayon pool; without it everything runs sequentially.

pub mod cesaro;
pub mod character;
pub mod error;
pub mod experiments;
pub mod group;
pub mod io;
pub mod kernels;
pub mod operators;
mod par;
pub mod spaces;
pub mod step;
pub mod transform;
