//! Panel Gauss–Legendre quadrature for oscillatory integrands.
//!
//! The interval is cut into panels holding about one oscillation each; the
//! panel count is then doubled until two successive estimates agree.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rtol: f64,
    pub max_panels: usize,
    pub nodes_per_panel: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { rtol: 1e-8, max_panels: 1 << 20, nodes_per_panel: 16 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.rtol.is_finite()) {
            return Err(Error::InvalidParameter(format!("rtol must be positive, got {}", self.rtol)));
        }
        if self.max_panels == 0 || self.nodes_per_panel == 0 {
            return Err(Error::InvalidParameter("panel and node counts must be positive".into()));
        }
        Ok(())
    }
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`, by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Panels needed for about one oscillation of `e^{i(tμ² + cμ)}` per panel.
pub fn initial_panels(t: f64, c: f64, m1: f64, m2: f64) -> usize {
    let phase_range = t.abs() * (m2 * m2 - m1 * m1).abs() + c.abs() * (m2 - m1);
    (phase_range / (2.0 * PI)).ceil() as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorQuadratureResult {
    pub values: Vec<Complex64>,
    pub error: f64,
    pub panels: usize,
}

/// Panel groups summed independently and then combined in order, so the
/// result is the same for any thread count.
const CHUNKS: usize = 64;

fn panel_sum_vector<F>(m1: f64, m2: f64, panels: usize, gl: &(Vec<f64>, Vec<f64>), dim: usize, f: &F) -> Vec<Complex64>
where
    F: Fn(f64, &mut [Complex64]) + Sync,
{
    let width = (m2 - m1) / panels as f64;
    let chunks = panels.min(CHUNKS);
    let per = panels.div_ceil(chunks);
    let partial = par::map_range(chunks, |c| {
        let mut acc = vec![Complex64::new(0.0, 0.0); dim];
        let mut buf = vec![Complex64::new(0.0, 0.0); dim];
        for p in c * per..((c + 1) * per).min(panels) {
            let lo = m1 + p as f64 * width;
            for (x, w) in gl.0.iter().zip(&gl.1) {
                let mu = lo + 0.5 * width * (x + 1.0);
                f(mu, &mut buf);
                let scale = 0.5 * width * w;
                for (a, b) in acc.iter_mut().zip(&buf) {
                    *a += b * scale;
                }
            }
        }
        acc
    });
    let mut total = vec![Complex64::new(0.0, 0.0); dim];
    for part in partial {
        for (a, b) in total.iter_mut().zip(part) {
            *a += b;
        }
    }
    total
}

/// `∫_{m1}^{m2} f(μ) dμ` for a vector-valued integrand written into a buffer
/// of length `dim`. Convergence is declared when the sup-norm change under
/// panel doubling drops below `rtol·(1 + sup|I|)`.
pub fn integrate_vector<F>(
    m1: f64,
    m2: f64,
    initial: usize,
    quad: &QuadratureSpec,
    dim: usize,
    f: F,
) -> Result<VectorQuadratureResult>
where
    F: Fn(f64, &mut [Complex64]) + Sync,
{
    quad.validate()?;
    if !(m1 < m2) {
        return Err(Error::InvalidParameter(format!("integration limits must satisfy m1 < m2, got [{m1}, {m2}]")));
    }
    let gl = gauss_legendre(quad.nodes_per_panel);
    let mut panels = initial.max(1).min(quad.max_panels);
    let mut prev = panel_sum_vector(m1, m2, panels, &gl, dim, &f);
    let mut error = f64::INFINITY;
    while panels * 2 <= quad.max_panels {
        panels *= 2;
        let next = panel_sum_vector(m1, m2, panels, &gl, dim, &f);
        error = next.iter().zip(&prev).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prev = next;
        if error < quad.rtol * (1.0 + scale) {
            return Ok(VectorQuadratureResult { values: prev, error, panels });
        }
    }
    Err(Error::NonConvergence { panels, error })
}

/// Scalar version of [`integrate_vector`].
pub fn integrate<F>(m1: f64, m2: f64, initial: usize, quad: &QuadratureSpec, f: F) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let r = integrate_vector(m1, m2, initial, quad, 1, |mu, out| out[0] = f(mu))?;
    Ok(QuadratureResult { value: r.values[0], error: r.error, panels: r.panels })
}

/// `∫_{m1}^{m2} e^{i(tμ² + cμ)} ψ(μ) dμ`.
pub fn oscillatory_integral<F>(
    t: f64,
    c: f64,
    m1: f64,
    m2: f64,
    amplitude: F,
    quad: &QuadratureSpec,
) -> Result<QuadratureResult>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    integrate(m1, m2, initial_panels(t, c, m1, m2), quad, |mu| {
        Complex64::from_polar(1.0, t * mu * mu + c * mu) * amplitude(mu)
    })
}
