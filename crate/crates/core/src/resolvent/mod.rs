//! Transmission coefficients, resolvent kernels and their application.

mod apply;
mod coefficients;
mod kernel;
mod separable;

pub use apply::{apply_resolvent, apply_resolvent_fast};
pub use coefficients::{
    assembled_determinant, boundary_coefficients, coefficients_closed_form, coefficients_oracle,
    determinant, BoundaryCoefficients, CoefficientMode, Frequency, KirchhoffSign,
    TransmissionCoefficients,
};
pub use kernel::{
    kernel_continuous, kernel_difference, kernel_difference_closed_form, kernel_full,
    kernel_neumann_halfline, kernel_point,
};
pub use separable::{KernelPart, SeparableKernel};
