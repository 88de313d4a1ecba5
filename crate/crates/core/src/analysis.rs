//! Experiment drivers: dispersive decay scans, the shrinking-head
//! perturbation estimate, scale invariance and the cycle expansion.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{GraphFunction, GridSpec, HalfLineFunction, SpectralBand, TadpoleGeometry};
use crate::propagator::{evolve, evolve_difference_queue, evolve_neumann_halfline};
use crate::quadrature::QuadratureSpec;
use crate::resolvent::CoefficientMode;
use crate::spectral::{eigenfunction, k_max_for, project_ac};

/// Band floor used on the tadpole when `a = 0` is requested.
pub const A_EFF: f64 = 1e-6;

/// `∫_{−1}^{1} exp(−1/(1−u²)) du`.
const BUMP_L1: f64 = 0.443_993_816_168_079_4;
/// `∫_{−1}^{1} exp(−2/(1−u²)) du`.
const BUMP_L2_SQ: f64 = 0.133_086_120_844_994_27;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// `exp(−(x−c)²/(2s²))` on the queue.
    Gaussian { center: f64, width: f64 },
    /// `exp(−1/(1−((x−c)/r)²))` on `|x − c| < r` of the queue.
    Bump { center: f64, radius: f64 },
    /// Head eigenmode `φ⁽²ᵏ⁾`.
    Eigen { k: usize },
}

impl InitialCondition {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            InitialCondition::Gaussian { center, width } => center >= 0.0 && width > 0.0,
            InitialCondition::Bump { center, radius } => radius > 0.0 && center - radius >= 0.0,
            InitialCondition::Eigen { k } => k >= 1,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid initial condition {self:?}")))
        }
    }

    pub fn queue_profile(&self, x: f64) -> f64 {
        match *self {
            InitialCondition::Gaussian { center, width } => (-(x - center).powi(2) / (2.0 * width * width)).exp(),
            InitialCondition::Bump { center, radius } => {
                let u = (x - center) / radius;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            InitialCondition::Eigen { .. } => 0.0,
        }
    }

    pub fn sample(&self, geometry: TadpoleGeometry, grid: GridSpec) -> Result<GraphFunction> {
        self.validate()?;
        match *self {
            InitialCondition::Eigen { k } => eigenfunction(k, geometry, grid),
            _ => Ok(GraphFunction::queue_only(geometry, grid, |x| Complex64::new(self.queue_profile(x), 0.0))),
        }
    }

    /// Right end of the (effective) support on the queue.
    pub fn support_end(&self) -> f64 {
        match *self {
            InitialCondition::Gaussian { center, width } => center + 8.0 * width,
            InitialCondition::Bump { center, radius } => center + radius,
            InitialCondition::Eigen { .. } => 0.0,
        }
    }

    /// Closed-form L¹ norm; for Gaussians this neglects the part beyond the
    /// vertex, below `e^{−c²/2s²}`.
    pub fn l1_norm(&self, geometry: &TadpoleGeometry) -> f64 {
        let l = geometry.length();
        match *self {
            InitialCondition::Gaussian { width, .. } => width * (2.0 * std::f64::consts::PI).sqrt(),
            InitialCondition::Bump { radius, .. } => radius * BUMP_L1,
            InitialCondition::Eigen { .. } => 2.0 * (2.0 * l).sqrt() / std::f64::consts::PI,
        }
    }

    pub fn l2_norm(&self) -> f64 {
        match *self {
            InitialCondition::Gaussian { width, .. } => (width * std::f64::consts::PI.sqrt()).sqrt(),
            InitialCondition::Bump { radius, .. } => (radius * BUMP_L2_SQ).sqrt(),
            InitialCondition::Eigen { .. } => 1.0,
        }
    }

    /// Grid with spacing close to `h` and a queue long enough for
    /// `support + 2√b·t_max + 5`.
    pub fn experiment_grid(&self, geometry: &TadpoleGeometry, band: &SpectralBand, t_max: f64, h: f64) -> Result<GridSpec> {
        let x_max = GridSpec::truncation_length(self.support_end(), band.b(), t_max);
        GridSpec::with_spacing(x_max, geometry.length(), h)
    }
}

/// The tadpole band with `a = 0` replaced by [`A_EFF`].
pub fn tadpole_band(band: &SpectralBand) -> Result<SpectralBand> {
    if band.a() > 0.0 {
        Ok(*band)
    } else {
        log::info!("band floor a = 0 replaced by {A_EFF:e} on the tadpole");
        SpectralBand::new(A_EFF, band.b())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`.
pub fn least_squares(x: &[f64], y: &[f64]) -> Result<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(Error::InvalidParameter("a line fit needs at least two points".into()));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("a line fit needs distinct abscissae".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(LineFit { slope, intercept, residual })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayRow {
    pub t: f64,
    pub sup_norm: f64,
    pub scaled: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayScanResult {
    pub rows: Vec<DecayRow>,
    pub fitted_exponent: f64,
    /// Largest `√t·sup` over the scan.
    pub fitted_constant: f64,
    pub fit: LineFit,
}

impl DecayScanResult {
    /// Ratio of the largest to the smallest scaled value.
    pub fn scaled_spread(&self) -> f64 {
        let max = self.rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
        let min = self.rows.iter().map(|r| r.scaled).fold(f64::INFINITY, f64::min);
        max / min
    }
}

/// Sup norm of `e^{itH} 𝟙_band P_ac u₀` at each time, with a log–log fit
/// over the rows with `t ≥ 1`.
pub fn decay_scan(
    u0: &GraphFunction,
    band: &SpectralBand,
    times: &[f64],
    quad: &QuadratureSpec,
    mode: CoefficientMode,
) -> Result<DecayScanResult> {
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParameter("decay scan times must be positive".into()));
    }
    let band = tadpole_band(band)?;
    let k_max = k_max_for(&u0.geometry, band.b().sqrt());
    let ac = project_ac(u0, k_max);
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(sorted.len());
    for &t in &sorted {
        let u = evolve(&ac, &band, t, quad, mode, k_max)?;
        let sup = u.sup_norm();
        log::info!("decay scan: t = {t}, sup = {sup:.6e}");
        rows.push(DecayRow { t, sup_norm: sup, scaled: t.sqrt() * sup });
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) =
        rows.iter().filter(|r| r.t >= 1.0).map(|r| (r.t.ln(), r.sup_norm.ln())).unzip();
    let fit = least_squares(&lx, &ly)?;
    let fitted_constant = rows.iter().map(|r| r.scaled).fold(0.0, f64::max);
    Ok(DecayScanResult { rows, fitted_exponent: fit.slope, fitted_constant, fit })
}

/// `8/√(2t)·(|Ψ(m₂)| + ∫|Ψ′|)`, the oscillatory-integral bound for the
/// phase `tμ² + cμ` on `[m₁, m₂]`.
pub fn van_der_corput_bound(m1: f64, m2: f64, t: f64, amplitude_boundary_value: f64, amplitude_derivative_l1: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("the bound needs t > 0, got {t}")));
    }
    if !(m1 < m2) {
        return Err(Error::InvalidParameter(format!("need m1 < m2, got [{m1}, {m2}]")));
    }
    Ok(8.0 / (2.0 * t).sqrt() * (amplitude_boundary_value + amplitude_derivative_l1))
}

/// `t^{−1/2}·2√2·L·(4(2√b−√a) + L(b−a))·‖u₀‖₁`.
pub fn perturbation_bound(band: &SpectralBand, length: f64, t: f64, l1: f64) -> f64 {
    let (a, b) = (band.a(), band.b());
    2.0 * 2f64.sqrt() * length * (4.0 * (2.0 * b.sqrt() - a.sqrt()) + length * (b - a)) * l1 / t.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationRow {
    pub length: f64,
    pub t: f64,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Sup distance between the direct difference path and the subtraction.
    pub path_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationReport {
    pub rows: Vec<PerturbationRow>,
    /// Log–log slope of `measured` against `L`, one entry per time.
    pub slopes: Vec<(f64, f64)>,
    /// Worst relative gap between the two difference paths.
    pub max_relative_gap: f64,
    /// Bound on what the `a = 0 → A_EFF` substitution can change, `(2/π)√A_EFF‖u₀‖₁`.
    pub floor_substitution_error: f64,
}

/// Queue sup of the tadpole evolution minus the half-line evolution of the
/// same queue data, over a set of head lengths and times.
pub fn perturbation_experiment(
    u0: &HalfLineFunction,
    band: &SpectralBand,
    lengths: &[f64],
    times: &[f64],
    quad: &QuadratureSpec,
) -> Result<PerturbationReport> {
    if lengths.is_empty() || lengths.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameter("head lengths must be positive".into()));
    }
    if times.is_empty() || times.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::InvalidParameter("times must be positive".into()));
    }
    let tad_band = tadpole_band(band)?;
    let l1 = u0.l1_norm();
    let h = u0.spacing();
    let n_queue = u0.values.len();
    let mut rows = Vec::new();
    let mut max_relative_gap: f64 = 0.0;
    for &t in times {
        let half = evolve_neumann_halfline(u0, band, t, quad)?;
        for &length in lengths {
            let geo = TadpoleGeometry::new(length)?;
            let n_head = ((length / h).round() as usize).max(2) + 1;
            let grid = GridSpec::new(u0.x_max, n_queue, n_head)?;
            let f = GraphFunction::from_parts(geo, grid, u0.values.clone(), vec![Complex64::new(0.0, 0.0); n_head])?;
            let k_max = k_max_for(&geo, tad_band.b().sqrt());
            let tad = evolve(&f, &tad_band, t, quad, CoefficientMode::Corrected, k_max)?;
            let direct = evolve_difference_queue(u0, &tad_band, t, length, quad)?;
            let mut measured: f64 = 0.0;
            let mut gap: f64 = 0.0;
            for i in 0..n_queue {
                let d = tad.queue[i] - half.values[i];
                measured = measured.max(d.norm());
                gap = gap.max((d - direct.values[i]).norm());
            }
            max_relative_gap = max_relative_gap.max(gap / measured.max(f64::MIN_POSITIVE));
            let bound = perturbation_bound(band, length, t, l1);
            log::info!("perturbation: L = {length}, t = {t}, measured {measured:.6e}, bound {bound:.6e}");
            rows.push(PerturbationRow { length, t, measured, bound, ratio: measured / bound, path_gap: gap });
        }
    }
    let mut slopes = Vec::new();
    if lengths.len() >= 2 {
        for &t in times {
            let (lx, ly): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r.t == t)
                .map(|r| (r.length.ln(), r.measured.ln()))
                .unzip();
            slopes.push((t, least_squares(&lx, &ly)?.slope));
        }
    }
    let floor_substitution_error =
        if band.a() > 0.0 { 0.0 } else { std::f64::consts::FRAC_2_PI * A_EFF.sqrt() * l1 };
    Ok(PerturbationReport { rows, slopes, max_relative_gap, floor_substitution_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleReport {
    /// Max pointwise distance between the two solutions on matching nodes.
    pub discrepancy: f64,
    pub sup_original: f64,
    pub sup_rescaled: f64,
    pub l1_original: f64,
    pub l1_rescaled: f64,
}

/// Evolves `u₀` on the tadpole of length `L` and the rescaled problem
/// `û₀(x̂) = u₀(Lx̂)` on the unit tadpole with band `L²·(a, b)` to time
/// `t/L²`, and compares the two on corresponding nodes.
pub fn scale_invariance_check(
    u0: &GraphFunction,
    band: &SpectralBand,
    t: f64,
    quad: &QuadratureSpec,
    mode: CoefficientMode,
) -> Result<ScaleReport> {
    let l = u0.geometry.length();
    let band = tadpole_band(band)?;
    let k_max = k_max_for(&u0.geometry, band.b().sqrt());
    let u = evolve(u0, &band, t, quad, mode, k_max)?;
    let unit = TadpoleGeometry::new(1.0)?;
    let grid = GridSpec::new(u0.grid.x_max / l, u0.grid.n_queue, u0.grid.n_head)?;
    // x̂_i = x_i / L, so the samples carry over unchanged
    let w0 = GraphFunction::from_parts(unit, grid, u0.queue.clone(), u0.head.clone())?;
    let scaled_band = band.scaled(l * l)?;
    let w = evolve(&w0, &scaled_band, t / (l * l), quad, mode, k_max_for(&unit, scaled_band.b().sqrt()))?;
    let discrepancy = u
        .queue
        .iter()
        .zip(&w.queue)
        .chain(u.head.iter().zip(&w.head))
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(ScaleReport {
        discrepancy,
        sup_original: u.sup_norm(),
        sup_rescaled: w.sup_norm(),
        l1_original: u0.norms().l1,
        l1_rescaled: w0.norms().l1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CycleExpansion {
    /// Partial sums over `k = 0..=K` loops around the head.
    pub partial_sums: Vec<Complex64>,
    /// `½·3^{−(K+1)}·(2/μ)|X − 1|` for each truncation.
    pub remainder_bounds: Vec<f64>,
    pub limit: Complex64,
}

/// Geometric expansion of the difference kernel
/// `(2i/μ)(X−1)/(X−3) e^{iμ(x+y)}` via `1/(X−3) = −(1/3) Σ (X/3)^k`.
pub fn cycle_expansion(x: f64, y: f64, mu: f64, length: f64, terms: usize) -> Result<CycleExpansion> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("cycle expansion needs μ > 0, got {mu}")));
    }
    let i = Complex64::new(0.0, 1.0);
    let xph = Complex64::from_polar(1.0, mu * length);
    let pre = 2.0 * i / mu * (xph - 1.0) * Complex64::from_polar(1.0, mu * (x + y));
    let sup = 2.0 / mu * (xph - 1.0).norm();
    let mut partial_sums = Vec::with_capacity(terms + 1);
    let mut remainder_bounds = Vec::with_capacity(terms + 1);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut power = Complex64::new(1.0, 0.0);
    for k in 0..=terms {
        acc += -pre * power / 3.0;
        power *= xph / 3.0;
        partial_sums.push(acc);
        remainder_bounds.push(0.5 * 3f64.powi(-(k as i32 + 1)) * sup);
    }
    Ok(CycleExpansion { partial_sums, remainder_bounds, limit: pre / (xph - 3.0) })
}
