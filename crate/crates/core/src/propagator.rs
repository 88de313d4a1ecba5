//! Band-filtered Schrödinger evolution `e^{itH} 𝟙_{(a,b)}(H)`.
//!
//! The continuous-spectrum part comes from the spectral density
//! `−(1/π) Im K_c(x, y, μ²)`; with `λ = μ²` the band operator has kernel
//!
//! ```text
//! −(2/π) ∫_{√a}^{√b} e^{itμ²} Im K_c(x, y, μ²) μ dμ
//! ```
//!
//! and the point spectrum adds a finite sum over the head eigenmodes.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{trapezoid_weights, GraphFunction, GraphPoint, HalfLineFunction, SpectralBand};
use crate::quadrature::{initial_panels, integrate, integrate_vector, QuadratureSpec};
use crate::resolvent::{kernel_continuous, CoefficientMode, Frequency, KernelPart, SeparableKernel};
use crate::spectral::pp_band_evolution;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const TWO_OVER_PI: f64 = std::f64::consts::FRAC_2_PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandKernelValue {
    pub x: GraphPoint,
    pub y: GraphPoint,
    pub t: f64,
    pub band: SpectralBand,
    pub value: Complex64,
    pub error: f64,
}

/// Largest linear phase rate in `μ` of the kernel over a queue of length `x_max`.
fn phase_rate(x_max: f64, length: f64) -> f64 {
    2.0 * x_max + 3.0 * length
}

/// Records the first failure inside a quadrature integrand.
#[derive(Default)]
struct FirstError(OnceLock<Error>);

impl FirstError {
    fn set(&self, e: Error) {
        let _ = self.0.set(e);
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Kernel of the continuous-spectrum band evolution.
#[allow(clippy::too_many_arguments)]
pub fn band_kernel(
    x: GraphPoint,
    y: GraphPoint,
    band: &SpectralBand,
    t: f64,
    length: f64,
    quad: &QuadratureSpec,
    mode: CoefficientMode,
) -> Result<BandKernelValue> {
    band.require_positive_floor()?;
    let (m1, m2) = band.wavenumbers();
    let failure = FirstError::default();
    let n0 = initial_panels(t, x.s + y.s + 3.0 * length, m1, m2);
    let r = integrate(m1, m2, n0, quad, |mu| {
        match kernel_continuous(x, y, Frequency::real(mu), length, mode) {
            Ok(k) => Complex64::from_polar(-TWO_OVER_PI * mu * k.im, t * mu * mu),
            Err(e) => {
                failure.set(e);
                ZERO
            }
        }
    })?;
    failure.check()?;
    Ok(BandKernelValue { x, y, t, band: *band, value: r.value, error: r.error })
}

/// Continuous-spectrum part of `e^{itH} 𝟙_{(a,b)}(H) f`.
pub fn evolve_ac(
    f: &GraphFunction,
    band: &SpectralBand,
    t: f64,
    quad: &QuadratureSpec,
    mode: CoefficientMode,
) -> Result<GraphFunction> {
    band.require_positive_floor()?;
    let length = f.geometry.length();
    let (m1, m2) = band.wavenumbers();
    let n = f.grid.len();
    let is_real = f.queue.iter().chain(&f.head).all(|v| v.im == 0.0);
    let failure = FirstError::default();
    let n0 = initial_panels(t, phase_rate(f.grid.x_max, length), m1, m2);
    let r = integrate_vector(m1, m2, n0, quad, n, |mu, out| {
        let kernel = match SeparableKernel::new(Frequency::real(mu), length, mode, KernelPart::Continuous) {
            Ok(k) => k,
            Err(e) => {
                failure.set(e);
                out.fill(ZERO);
                return;
            }
        };
        let mut scratch = if is_real { Vec::new() } else { vec![ZERO; n] };
        kernel.apply_imaginary_part_into(f, is_real, out, &mut scratch);
        let w = Complex64::from_polar(-TWO_OVER_PI * mu, t * mu * mu);
        for v in out.iter_mut() {
            *v *= w;
        }
    })?;
    failure.check()?;
    log::debug!("evolve_ac: t = {t}, {} panels, error {:.2e}", r.panels, r.error);
    f.with_values(r.values)
}

/// `e^{itH} 𝟙_{(a,b)}(H) f`: continuous part plus the eigenmodes in the band.
pub fn evolve(
    f: &GraphFunction,
    band: &SpectralBand,
    t: f64,
    quad: &QuadratureSpec,
    mode: CoefficientMode,
    k_max: usize,
) -> Result<GraphFunction> {
    let ac = evolve_ac(f, band, t, quad, mode)?;
    ac.add(&pp_band_evolution(f, band, t, k_max))
}

/// `∫ cos(μy) u₀(y) dy` by the trapezoid rule.
pub fn cosine_transform(u0: &HalfLineFunction, mu: f64) -> Complex64 {
    let w = trapezoid_weights(u0.values.len(), u0.spacing());
    u0.values
        .iter()
        .enumerate()
        .map(|(j, v)| v * (w[j] * (mu * u0.x(j)).cos()))
        .sum()
}

/// Band evolution on the half-line with a Neumann condition at 0:
/// `(2/π) ∫_{√a}^{√b} e^{itμ²} cos(μx) û₀(μ) dμ`. Here `a = 0` is allowed.
pub fn evolve_neumann_halfline(
    u0: &HalfLineFunction,
    band: &SpectralBand,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<HalfLineFunction> {
    let (m1, m2) = band.wavenumbers();
    let n = u0.values.len();
    let xs: Vec<f64> = (0..n).map(|i| u0.x(i)).collect();
    let n0 = initial_panels(t, 2.0 * u0.x_max, m1, m2);
    let r = integrate_vector(m1, m2, n0, quad, n, |mu, out| {
        let c = cosine_transform(u0, mu) * Complex64::from_polar(TWO_OVER_PI, t * mu * mu);
        for (v, &x) in out.iter_mut().zip(&xs) {
            *v = c * (mu * x).cos();
        }
    })?;
    Ok(HalfLineFunction { x_max: u0.x_max, values: r.values })
}

/// Queue values of the tadpole band evolution minus the half-line one, for
/// queue-supported data, integrated directly from the difference kernel
/// `D(x, y, μ) = (2i/μ)(X − 1)/(X − 3) e^{iμ(x+y)}`, `X = e^{iμL}`, as
/// `−(2/π) ∫ e^{itμ²} μ Im D(x, y, μ) u₀(y) dy dμ`. `L = 0` is allowed.
pub fn evolve_difference_queue(
    u0: &HalfLineFunction,
    band: &SpectralBand,
    t: f64,
    length: f64,
    quad: &QuadratureSpec,
) -> Result<HalfLineFunction> {
    if !(length >= 0.0 && length.is_finite()) {
        return Err(Error::InvalidParameter(format!("head length must be ≥ 0, got {length}")));
    }
    band.require_positive_floor()?;
    let (m1, m2) = band.wavenumbers();
    let n = u0.values.len();
    let xs: Vec<f64> = (0..n).map(|i| u0.x(i)).collect();
    let w = trapezoid_weights(n, u0.spacing());
    let n0 = initial_panels(t, 2.0 * u0.x_max + 3.0 * length, m1, m2);
    let r = integrate_vector(m1, m2, n0, quad, n, |mu, out| {
        let xph = Complex64::from_polar(1.0, mu * length);
        let amp = 2.0 * I / mu * (xph - 1.0) / (xph - 3.0);
        let e: Vec<Complex64> = xs.iter().map(|&x| Complex64::from_polar(1.0, mu * x)).collect();
        // moments of u₀ and of its conjugate against e^{iμy}
        let mut m_f = ZERO;
        let mut m_c = ZERO;
        for j in 0..n {
            m_f += e[j] * u0.values[j] * w[j];
            m_c += e[j] * u0.values[j].conj() * w[j];
        }
        let (a, b) = (amp * m_f, (amp * m_c).conj());
        let pre = Complex64::from_polar(-TWO_OVER_PI * mu, t * mu * mu) / (2.0 * I);
        for (v, ex) in out.iter_mut().zip(&e) {
            *v = pre * (a * ex - b * ex.conj());
        }
    })?;
    Ok(HalfLineFunction { x_max: u0.x_max, values: r.values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, GridSpec, TadpoleGeometry};
    use crate::spectral::{eigenfunction, k_max_for};
    use std::f64::consts::PI;

    fn gaussian(x: f64, c: f64, s: f64) -> Complex64 {
        Complex64::new((-(x - c).powi(2) / (2.0 * s * s)).exp(), 0.0)
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn band() -> SpectralBand {
        SpectralBand::new(0.25, 4.0).unwrap()
    }

    #[test]
    fn band_kernel_is_hermitian_in_time_reversal() {
        let pts = [GraphPoint::queue(0.7), GraphPoint::queue(2.5), GraphPoint::head(0.3), GraphPoint::head(0.85)];
        for &x in &pts {
            for &y in &pts {
                let a = band_kernel(x, y, &band(), 1.3, 1.0, &quad(), CoefficientMode::Corrected).unwrap();
                let b = band_kernel(y, x, &band(), -1.3, 1.0, &quad(), CoefficientMode::Corrected).unwrap();
                assert!((a.value - b.value.conj()).norm() < 1e-9, "{x:?} {y:?}");
            }
        }
    }

    #[test]
    fn band_kernel_matches_brute_force_midpoint_sum() {
        let (x, y) = (GraphPoint::queue(1.2), GraphPoint::head(0.4));
        let (t, l) = (0.8, 1.0);
        let v = band_kernel(x, y, &band(), t, l, &quad(), CoefficientMode::Corrected).unwrap();
        let (m1, m2) = band().wavenumbers();
        let n = 200_000;
        let h = (m2 - m1) / n as f64;
        let brute: Complex64 = (0..n)
            .map(|i| {
                let mu = m1 + (i as f64 + 0.5) * h;
                let k = kernel_continuous(x, y, Frequency::real(mu), l, CoefficientMode::Corrected).unwrap();
                Complex64::from_polar(-TWO_OVER_PI * mu * k.im * h, t * mu * mu)
            })
            .sum();
        assert!((v.value - brute).norm() < 1e-9);
    }

    #[test]
    fn band_floor_must_be_positive() {
        let b = SpectralBand::new(0.0, 1.0).unwrap();
        let p = GraphPoint::queue(1.0);
        assert!(band_kernel(p, p, &b, 1.0, 1.0, &quad(), CoefficientMode::Corrected).is_err());
    }

    #[test]
    fn eigenfunction_picks_up_a_pure_phase() {
        let l = 1.0;
        let geo = TadpoleGeometry::new(l).unwrap();
        let grid = GridSpec::with_spacing(2.0, l, 0.0025).unwrap();
        let phi = eigenfunction(1, geo, grid).unwrap();
        let lam = 4.0 * PI * PI;
        let band = SpectralBand::new(30.0, 50.0).unwrap();
        for t in [0.0, 0.4] {
            let u = evolve(&phi, &band, t, &quad(), CoefficientMode::Corrected, k_max_for(&geo, band.b().sqrt()))
                .unwrap();
            let expected = phi.scale(Complex64::from_polar(1.0, lam * t));
            let err = u.sub(&expected).unwrap().sup_norm();
            assert!(err < 1e-4, "t = {t}: {err}");
        }
    }

    fn packet(x_max: f64, h: f64) -> GraphFunction {
        let geo = TadpoleGeometry::new(1.0).unwrap();
        let grid = GridSpec::with_spacing(x_max, 1.0, h).unwrap();
        GraphFunction::from_fn(geo, grid, |p| match p.edge {
            Edge::Queue => gaussian(p.s, 3.0, 0.5) * Complex64::from_polar(1.0, 1.3 * p.s),
            Edge::Head => Complex64::new(0.2 * (PI * p.s).sin().powi(2), 0.0),
        })
    }

    #[test]
    fn conjugation_reverses_time() {
        let f = packet(20.0, 0.05);
        let b = band();
        let k = k_max_for(&f.geometry, b.b().sqrt());
        let u = evolve(&f, &b, 0.9, &quad(), CoefficientMode::Corrected, k).unwrap();
        let v = evolve(&f.conj(), &b, -0.9, &quad(), CoefficientMode::Corrected, k).unwrap();
        assert!(v.sub(&u.conj()).unwrap().sup_norm() < 1e-9 * (1.0 + u.sup_norm()));
    }

    #[test]
    fn sharp_filter_preserves_the_norm_in_time() {
        let f = packet(80.0, 0.05);
        let b = band();
        let k = k_max_for(&f.geometry, b.b().sqrt());
        let ev = |t: f64| evolve(&f, &b, t, &quad(), CoefficientMode::Corrected, k).unwrap();
        let n0 = ev(0.0).norms().l2;
        assert!(n0 < f.norms().l2);
        for t in [0.5, 2.0] {
            let n = ev(t).norms().l2;
            assert!((n - n0).abs() / n0 < 1e-5, "t = {t}: {n} vs {n0}");
        }
    }

    #[test]
    fn filtering_is_idempotent_and_a_group_on_band_limited_data() {
        // a broad packet whose wavenumbers sit well inside (√a, √b); data
        // with content at the band edges would leave slowly decaying tails
        // that no truncated queue can hold
        let geo = TadpoleGeometry::new(1.0).unwrap();
        let grid = GridSpec::with_spacing(160.0, 1.0, 0.05).unwrap();
        let f = GraphFunction::queue_only(geo, grid, |x| gaussian(x, 60.0, 8.0) * Complex64::from_polar(1.0, 1.25 * x));
        let b = band();
        let k = k_max_for(&geo, b.b().sqrt());
        let ev = |g: &GraphFunction, t: f64| evolve(g, &b, t, &quad(), CoefficientMode::Corrected, k).unwrap();
        let w = ev(&f, 0.0);
        assert!(w.relative_l2_distance(&f).unwrap() < 1e-6);
        assert!(ev(&w, 0.0).relative_l2_distance(&w).unwrap() < 1e-6);
        let direct = ev(&f, 1.5);
        let stepped = ev(&ev(&f, 0.5), 1.0);
        assert!(direct.relative_l2_distance(&stepped).unwrap() < 1e-6);
        assert!((direct.norms().l2 - f.norms().l2).abs() < 1e-6);
    }

    #[test]
    fn queue_data_has_no_point_component_and_modes_have_no_continuous_one() {
        let f = packet(20.0, 0.05);
        let q = GraphFunction::from_parts(f.geometry, f.grid, f.queue.clone(), vec![ZERO; f.grid.n_head]).unwrap();
        assert_eq!(pp_band_evolution(&q, &band(), 1.0, 10).sup_norm(), 0.0);
        let geo = TadpoleGeometry::new(1.0).unwrap();
        let grid = GridSpec::with_spacing(2.0, 1.0, 0.0025).unwrap();
        let phi = eigenfunction(1, geo, grid).unwrap();
        let wide = SpectralBand::new(30.0, 50.0).unwrap();
        let ac = evolve_ac(&phi, &wide, 0.3, &quad(), CoefficientMode::Corrected).unwrap();
        assert!(ac.sup_norm() < 1e-4, "{}", ac.sup_norm());
    }

    #[test]
    fn halfline_inner_transform_of_gaussian() {
        let u0 = HalfLineFunction::from_fn(20.0, 2001, |y| gaussian(y, 0.0, 1.0));
        for mu in [0.0f64, 0.5, 1.7, 3.0] {
            let exact = (PI / 2.0).sqrt() * (-mu * mu / 2.0).exp();
            assert!((cosine_transform(&u0, mu) - exact).norm() < 1e-10);
        }
    }

    #[test]
    fn halfline_inversion_at_time_zero() {
        let u0 = HalfLineFunction::from_fn(20.0, 2001, |y| gaussian(y, 0.0, 1.0));
        let wide = SpectralBand::new(0.0, 100.0).unwrap();
        let u = evolve_neumann_halfline(&u0, &wide, 0.0, &quad()).unwrap();
        for (a, b) in u.values.iter().zip(&u0.values) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn halfline_evolution_keeps_the_neumann_condition() {
        let u0 = HalfLineFunction::from_fn(30.0, 3001, |y| gaussian(y, 4.0, 0.7));
        let u = evolve_neumann_halfline(&u0, &band(), 1.5, &quad()).unwrap();
        let h = u.spacing();
        let v = &u.values;
        let d0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        assert!(d0.norm() < 20.0 * h * h, "{}", d0.norm());
    }

    #[test]
    fn difference_paths_agree_and_respect_the_bound() {
        let l = 0.3;
        let geo = TadpoleGeometry::new(l).unwrap();
        let grid = GridSpec::with_spacing(20.0, l, 0.02).unwrap();
        let f = GraphFunction::queue_only(geo, grid, |x| gaussian(x, 3.0, 0.5));
        let u0 = HalfLineFunction::from(&f);
        let b = band();
        let t = 2.0;
        let tad = evolve(&f, &b, t, &quad(), CoefficientMode::Corrected, 8).unwrap();
        let half = evolve_neumann_halfline(&u0, &b, t, &quad()).unwrap();
        let diff = evolve_difference_queue(&u0, &b, t, l, &quad()).unwrap();
        let mut sup: f64 = 0.0;
        let mut gap: f64 = 0.0;
        for i in 0..u0.values.len() {
            let sub = tad.queue[i] - half.values[i];
            sup = sup.max(sub.norm());
            gap = gap.max((sub - diff.values[i]).norm());
        }
        assert!(gap < 1e-8 * (1.0 + sup), "gap {gap}, sup {sup}");
        let (a, bb) = (b.a(), b.b());
        let bound = 2.0 * 2f64.sqrt() * l * (4.0 * (2.0 * bb.sqrt() - a.sqrt()) + l * (bb - a)) * u0.l1_norm()
            / t.sqrt();
        assert!(sup <= bound, "{sup} > {bound}");
        let zero = evolve_difference_queue(&u0, &b, t, 0.0, &quad()).unwrap();
        assert_eq!(zero.sup_norm(), 0.0);
    }
}
