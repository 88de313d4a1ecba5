//! Head-confined eigenpairs and the point/continuous spectral projections.
//!
//! The point spectrum consists of `λ²_{2k} = (2kπ/L)²`, `k ≥ 1`, with
//! eigenfunctions `√(2/L) sin(2kπs/L)` on the head and zero on the queue.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{GraphFunction, GridSpec, SpectralBand, TadpoleGeometry};

/// Band edges closer than this to an eigenvalue trigger a warning.
pub const BAND_COLLISION_TOL: f64 = 1e-9;

/// Padding added to the mode count in [`k_max_for`].
pub const K_PAD: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub k: usize,
    /// Wavenumber `2kπ/L`.
    pub lambda: f64,
    pub lambda_sq: f64,
    pub eigenfunction: GraphFunction,
}

fn require_index(k: usize, what: &str) -> Result<()> {
    if k == 0 {
        Err(Error::InvalidParameter(format!("{what} index must be at least 1")))
    } else {
        Ok(())
    }
}

/// `4k²π²/L²`.
pub fn eigenvalue(k: usize, geometry: &TadpoleGeometry) -> Result<f64> {
    require_index(k, "eigen")?;
    let w = 2.0 * PI * k as f64 / geometry.length();
    Ok(w * w)
}

/// Head sine `√(2/L) sin(ℓπs/L)` with zero queue values. Only even `ℓ`
/// gives an element of the operator domain.
pub fn dirichlet_mode(l: usize, geometry: TadpoleGeometry, grid: GridSpec) -> Result<GraphFunction> {
    require_index(l, "Dirichlet mode")?;
    let len = geometry.length();
    let amp = (2.0 / len).sqrt();
    let w = l as f64 * PI / len;
    Ok(GraphFunction::head_only(geometry, grid, |s| Complex64::new(amp * (w * s).sin(), 0.0)))
}

pub fn eigenfunction(k: usize, geometry: TadpoleGeometry, grid: GridSpec) -> Result<GraphFunction> {
    require_index(k, "eigen")?;
    dirichlet_mode(2 * k, geometry, grid)
}

pub fn eigenpair(k: usize, geometry: TadpoleGeometry, grid: GridSpec) -> Result<EigenPair> {
    let lambda_sq = eigenvalue(k, &geometry)?;
    Ok(EigenPair {
        k,
        lambda: lambda_sq.sqrt(),
        lambda_sq,
        eigenfunction: eigenfunction(k, geometry, grid)?,
    })
}

/// Number of eigenmodes to keep: `ceil(L μ_max / 2π) + K_PAD`.
pub fn k_max_for(geometry: &TadpoleGeometry, mu_max: f64) -> usize {
    (geometry.length() * mu_max / (2.0 * PI)).ceil().max(0.0) as usize + K_PAD
}

/// Largest eigen-index the head grid resolves: beyond it the sampled sines
/// alias onto lower ones and lose discrete orthogonality.
pub fn resolvable_modes(grid: &GridSpec) -> usize {
    grid.n_head.saturating_sub(2) / 2
}

fn effective_k_max(f: &GraphFunction, k_max: usize) -> usize {
    let cap = resolvable_modes(&f.grid);
    if k_max > cap {
        log::debug!("mode count {k_max} capped at {cap} by the head grid");
    }
    k_max.min(cap)
}

/// Mode count for unfiltered data: the head grid's Nyquist wavenumber `π/h`.
pub fn k_max_nyquist(f: &GraphFunction) -> usize {
    k_max_for(&f.geometry, PI / f.head_spacing())
}

/// Coefficients `⟨f, φ⁽²ᵏ⁾⟩` for `k = 1..=k_max`, by trapezoid quadrature on the head.
pub fn pp_coefficients(f: &GraphFunction, k_max: usize) -> Vec<Complex64> {
    let grid = f.grid;
    let geo = f.geometry;
    let len = geo.length();
    let h = f.head_spacing();
    let amp = (2.0 / len).sqrt();
    let n = grid.n_head;
    crate::par::map_range(k_max, |i| {
        let w = 2.0 * PI * (i + 1) as f64 / len;
        let mut acc = Complex64::new(0.0, 0.0);
        // the sine vanishes at both endpoints, so the trapezoid end weights do not matter
        for j in 1..n - 1 {
            acc += f.head[j] * (amp * (w * grid.head_s(j, &geo)).sin());
        }
        acc * h
    })
}

fn synthesize(f: &GraphFunction, coeffs: &[(usize, Complex64)]) -> GraphFunction {
    let len = f.geometry.length();
    let amp = (2.0 / len).sqrt();
    let terms: Vec<(f64, Complex64)> =
        coeffs.iter().map(|&(k, c)| (2.0 * PI * k as f64 / len, c * amp)).collect();
    GraphFunction::head_only(f.geometry, f.grid, |s| {
        terms.iter().map(|&(w, c)| c * (w * s).sin()).sum()
    })
}

/// `Σ_{k ≤ k_max} ⟨f, φ⁽²ᵏ⁾⟩ φ⁽²ᵏ⁾`, with `k_max` capped at [`resolvable_modes`].
pub fn project_pp(f: &GraphFunction, k_max: usize) -> GraphFunction {
    let c: Vec<(usize, Complex64)> =
        pp_coefficients(f, effective_k_max(f, k_max)).into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect();
    synthesize(f, &c)
}

/// `f − P_pp f`.
pub fn project_ac(f: &GraphFunction, k_max: usize) -> GraphFunction {
    f.sub(&project_pp(f, k_max)).expect("same grid")
}

/// Eigen-indices `k ≤ k_max` with `a < λ²_{2k} < b`.
pub fn band_modes(band: &SpectralBand, geometry: &TadpoleGeometry, k_max: usize) -> Vec<usize> {
    (1..=k_max)
        .filter(|&k| band.contains(eigenvalue(k, geometry).expect("k ≥ 1")))
        .collect()
}

/// Eigenvalues lying within [`BAND_COLLISION_TOL`] (relative) of a band edge.
pub fn band_edge_collisions(band: &SpectralBand, geometry: &TadpoleGeometry) -> Vec<(usize, f64)> {
    let kmax = k_max_for(geometry, band.b().sqrt());
    (1..=kmax)
        .filter_map(|k| {
            let lam = eigenvalue(k, geometry).ok()?;
            let hit = [band.a(), band.b()]
                .iter()
                .any(|&e| (lam - e).abs() <= BAND_COLLISION_TOL * e.max(1.0));
            hit.then_some((k, lam))
        })
        .collect()
}

pub(crate) fn warn_band_collisions(band: &SpectralBand, geometry: &TadpoleGeometry) {
    for (k, lam) in band_edge_collisions(band, geometry) {
        log::warn!(
            "eigenvalue λ²_{{{}}} = {lam} sits on an edge of the band ({}, {}); membership is fragile",
            2 * k,
            band.a(),
            band.b()
        );
    }
}

/// Point-spectrum part of `e^{itH} 𝟙_{(a,b)}(H) f`.
pub fn pp_band_evolution(f: &GraphFunction, band: &SpectralBand, t: f64, k_max: usize) -> GraphFunction {
    warn_band_collisions(band, &f.geometry);
    let k_max = effective_k_max(f, k_max);
    let modes = band_modes(band, &f.geometry, k_max);
    let all = pp_coefficients(f, k_max);
    let coeffs: Vec<(usize, Complex64)> = modes
        .into_iter()
        .map(|k| {
            let lam = eigenvalue(k, &f.geometry).expect("k ≥ 1");
            (k, all[k - 1] * Complex64::from_polar(1.0, t * lam))
        })
        .collect();
    synthesize(f, &coeffs)
}
