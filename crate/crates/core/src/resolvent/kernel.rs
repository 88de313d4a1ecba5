//! Pointwise resolvent kernels.
//!
//! `K(x, y, z²)` is the kernel of `(z² − H)⁻¹`. The sign matches the
//! half-line example `K₀(0, 0, −1) = −1`; the standard resolvent
//! `(H − z²)⁻¹` has kernel `−K`.

use num_complex::Complex64;

use super::coefficients::{
    boundary_coefficients, coefficients_closed_form, CoefficientMode, Frequency,
};
use crate::error::{Error, Result};
use crate::graph::{Edge, GraphPoint};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[inline]
fn eiz(z: Complex64, s: f64) -> Complex64 {
    (I * z * s).exp()
}

fn require_upper(z: Frequency) -> Result<()> {
    if z.z().im > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("full kernel needs Im z > 0, got z = {}", z.z())))
    }
}

fn require_nonzero(z: Frequency) -> Result<()> {
    if z.z().norm() == 0.0 {
        Err(Error::Domain("kernel undefined at z = 0".into()))
    } else if z.z().im < 0.0 {
        Err(Error::Domain(format!("no continuation to Im z < 0, got z = {}", z.z())))
    } else {
        Ok(())
    }
}

/// The four edge-pair formulas, without the `Im z > 0` check. Poles of the
/// head–head coefficients surface as errors.
fn kernel_cases(
    x: GraphPoint,
    y: GraphPoint,
    z: Frequency,
    length: f64,
    mode: CoefficientMode,
) -> Result<Complex64> {
    let zz = z.z();
    let pre = 1.0 / (2.0 * I * zz);
    let (xs, ys) = (x.s, y.s);
    Ok(match (x.edge, y.edge) {
        (Edge::Queue, Edge::Queue) => {
            let c = boundary_coefficients(z, length, mode)?;
            pre * (eiz(zz, (xs - ys).abs()) - c.f1 * eiz(zz, xs + ys))
        }
        (Edge::Queue, Edge::Head) => {
            let c = boundary_coefficients(z, length, mode)?;
            -pre * (c.f2 * eiz(zz, ys + xs) + c.f3 * eiz(zz, xs - ys))
        }
        (Edge::Head, Edge::Queue) => {
            let c = boundary_coefficients(z, length, mode)?;
            pre * (c.g1 * eiz(zz, ys + xs) + c.h1 * eiz(zz, ys - xs))
        }
        (Edge::Head, Edge::Head) => {
            let c = coefficients_closed_form(z, length, mode)?;
            pre * (eiz(zz, (xs - ys).abs())
                + c.g2 * eiz(zz, ys + xs)
                + c.g3 * eiz(zz, xs - ys)
                + c.h2 * eiz(zz, ys - xs)
                + c.h3 * eiz(zz, -(xs + ys)))
        }
    })
}

/// Full resolvent kernel, `Im z > 0`.
pub fn kernel_full(
    x: GraphPoint,
    y: GraphPoint,
    z: Frequency,
    length: f64,
    mode: CoefficientMode,
) -> Result<Complex64> {
    require_upper(z)?;
    kernel_cases(x, y, z, length, mode)
}

/// Meromorphic part `cos(zL/2) / (2z sin(zL/2)) · sin(zx) sin(zy)`, zero
/// unless both points lie on the head.
pub fn kernel_point(x: GraphPoint, y: GraphPoint, z: Frequency, length: f64) -> Result<Complex64> {
    if x.edge != Edge::Head || y.edge != Edge::Head {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let zz = z.z();
    let half = zz * length / 2.0;
    let sin_half = half.sin();
    if zz.norm() == 0.0 || sin_half.norm() < 1e-14 {
        return Err(Error::Pole { what: "point-spectrum kernel", k: z.nearest_eigen_index(length) });
    }
    Ok(half.cos() / (2.0 * zz * sin_half) * (zz * x.s).sin() * (zz * y.s).sin())
}

/// Continuous part `K_c = K − K_p`, defined for `Im z ≥ 0`, `z ≠ 0`.
///
/// In corrected mode the head–head block is evaluated from a closed form
/// with only `(X − 3)` denominators, finite at `z = 2kπ/L`. In verbatim mode
/// it is `K − K_p` and fails at the poles.
pub fn kernel_continuous(
    x: GraphPoint,
    y: GraphPoint,
    z: Frequency,
    length: f64,
    mode: CoefficientMode,
) -> Result<Complex64> {
    require_nonzero(z)?;
    match (x.edge, y.edge, mode) {
        (Edge::Head, Edge::Head, CoefficientMode::Corrected) => {
            let zz = z.z();
            let xph = z.phase_factor(length);
            if (xph - 3.0).norm() < 1e-14 {
                return Err(Error::Pole { what: "continuous kernel (X = 3)", k: z.nearest_eigen_index(length) });
            }
            let (xs, ys) = (x.s, y.s);
            let bracket = eiz(zz, (xs - ys).abs()) + (1.0 + 2.0 / (xph - 3.0)) * (zz * xs).sin() * (zz * ys).sin()
                - (2.0 * (xph - 1.0) * (zz * (xs - ys)).cos() + (xph + 1.0) * eiz(zz, -(xs + ys)))
                    / (xph - 3.0);
            Ok(bracket / (2.0 * I * zz))
        }
        (Edge::Head, Edge::Head, CoefficientMode::PaperVerbatim) => {
            Ok(kernel_cases(x, y, z, length, mode)? - kernel_point(x, y, z, length)?)
        }
        _ => kernel_cases(x, y, z, length, mode),
    }
}

/// Neumann half-line kernel `(e^{iz|x−y|} + e^{iz(x+y)}) / (2iz)`.
pub fn kernel_neumann_halfline(x: f64, y: f64, z: Frequency) -> Result<Complex64> {
    require_nonzero(z)?;
    let zz = z.z();
    Ok((eiz(zz, (x - y).abs()) + eiz(zz, x + y)) / (2.0 * I * zz))
}

/// Queue–queue difference `K_c − K₀` at real `μ > 0`, by direct
/// subtraction. `length = 0` is the degenerate shrunken head.
pub fn kernel_difference(
    x: f64,
    y: f64,
    mu: f64,
    length: f64,
    mode: CoefficientMode,
) -> Result<Complex64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("difference kernel needs mu > 0, got {mu}")));
    }
    if !(length >= 0.0) {
        return Err(Error::Domain(format!("head length must be >= 0, got {length}")));
    }
    let z = Frequency::real(mu);
    let tadpole = kernel_cases(GraphPoint::queue(x), GraphPoint::queue(y), z, length, mode)?;
    Ok(tadpole - kernel_neumann_halfline(x, y, z)?)
}

/// `(2i/μ)·(X − 1)/(X − 3)·e^{iμ(x+y)}` with `X = e^{iμL}`.
pub fn kernel_difference_closed_form(x: f64, y: f64, mu: f64, length: f64) -> Complex64 {
    let xph = Complex64::cis(mu * length);
    2.0 * I / mu * (xph - 1.0) / (xph - 3.0) * Complex64::cis(mu * (x + y))
}
