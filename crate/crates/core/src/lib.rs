//! Numerical laboratory for the Benjamin–Ono equation on a large periodic box.
//!
//! The crate provides a Fourier grid with Hilbert and Szegő projections,
//! exact multisoliton profiles, a Galerkin discretization of the Lax operator
//! with its conserved quantities, a stiff time integrator, and a fitter that
//! projects data onto the multisoliton manifold.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod experiments;
pub mod fit;
pub mod flow;
pub mod grid;
pub mod io;
pub mod lax;
pub mod multisoliton;

pub use error::{Error, Result};
pub use grid::{Grid, HardyField, NormSpec, RealField, SpectralField, Spectrum};
pub use multisoliton::SolitonConfig;
