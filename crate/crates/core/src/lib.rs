//! Resolvent kernel, spectral decomposition and band-filtered Schrödinger
//! evolution on the tadpole graph: a half-line (the queue) glued at one
//! vertex to a circle of length `L` (the head), with Kirchhoff coupling.

// `!(x > 0.0)` is deliberate: NaN has to fail parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// index loops mirror the matrix and block notation
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod graph;
mod par;
pub mod propagator;
pub mod quadrature;
pub mod reference;
pub mod resolvent;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{
    Edge, GraphFunction, GraphPoint, GridSpec, HalfLineFunction, Norms, SpectralBand,
    TadpoleGeometry, TransmissionResiduals,
};
pub use resolvent::{CoefficientMode, Frequency};
