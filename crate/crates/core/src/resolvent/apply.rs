//! Resolvent applied to sampled functions.

use num_complex::Complex64;

use super::coefficients::{CoefficientMode, Frequency};
use super::separable::{KernelPart, SeparableKernel};
use crate::error::{Error, Result};
use crate::graph::{trapezoid_weights, GraphFunction, GraphPoint};
use crate::par;

fn full_kernel(g: &GraphFunction, z: Frequency, mode: CoefficientMode) -> Result<SeparableKernel> {
    if z.z().im <= 0.0 {
        return Err(Error::Domain(format!("resolvent needs Im z > 0, got z = {}", z.z())));
    }
    SeparableKernel::new(z, g.geometry.length(), mode, KernelPart::Full)
}

/// `(H − z²)⁻¹ g` by trapezoid quadrature of the kernel at every grid point.
///
/// Each output point is an independent fixed-order sum, so the result does
/// not depend on the thread count. Quadratic cost; see
/// [`apply_resolvent_fast`] for the linear-time equivalent.
pub fn apply_resolvent(g: &GraphFunction, z: Frequency, mode: CoefficientMode) -> Result<GraphFunction> {
    let kernel = full_kernel(g, z, mode)?;
    let grid = g.grid;
    let geo = g.geometry;
    let wq = trapezoid_weights(grid.n_queue, g.queue_spacing());
    let wh = trapezoid_weights(grid.n_head, g.head_spacing());
    let sources: Vec<(GraphPoint, Complex64)> = (0..grid.n_queue)
        .map(|j| (GraphPoint::queue(grid.queue_x(j)), g.queue[j] * wq[j]))
        .chain((0..grid.n_head).map(|j| (GraphPoint::head(grid.head_s(j, &geo)), g.head[j] * wh[j])))
        .collect();
    let targets: Vec<GraphPoint> = sources.iter().map(|(p, _)| *p).collect();
    let values = par::map_slice(&targets, |&x| {
        -sources.iter().map(|&(y, gw)| kernel.eval(x, y) * gw).sum::<Complex64>()
    });
    g.with_values(values)
}

/// Same quadrature as [`apply_resolvent`] in linear time.
pub fn apply_resolvent_fast(g: &GraphFunction, z: Frequency, mode: CoefficientMode) -> Result<GraphFunction> {
    let kernel = full_kernel(g, z, mode)?;
    Ok(kernel.apply(g).scale(Complex64::new(-1.0, 0.0)))
}
