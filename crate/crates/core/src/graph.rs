//! Tadpole geometry, sampled functions on its two edges, and the quantities
//! read off them: vertex traces, transmission residuals, norms and inner
//! products.
//!
//! The queue is the half-line `[0, ∞)` truncated at `x_max`; the head is a
//! loop of length `L` charted by `s ∈ [0, L]`, both chart ends glued to the
//! vertex. Both edges carry uniform grids with endpoints included.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Head circumference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TadpoleGeometry {
    length: f64,
}

impl TadpoleGeometry {
    pub fn new(length: f64) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "head length must be positive and finite, got {length}"
            )));
        }
        Ok(Self { length })
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.length
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Queue,
    Head,
}

/// A location on the graph: an edge and a chart coordinate on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub edge: Edge,
    pub s: f64,
}

impl GraphPoint {
    pub fn queue(s: f64) -> Self {
        Self { edge: Edge::Queue, s }
    }

    pub fn head(s: f64) -> Self {
        Self { edge: Edge::Head, s }
    }

    pub fn validate(&self, geometry: &TadpoleGeometry) -> Result<()> {
        let ok = match self.edge {
            Edge::Queue => self.s >= 0.0 && self.s.is_finite(),
            Edge::Head => (0.0..=geometry.length()).contains(&self.s),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "point {:?} outside its edge (L = {})",
                self,
                geometry.length()
            )))
        }
    }
}

/// Uniform grids on the truncated queue and on the head.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_max: f64,
    pub n_queue: usize,
    pub n_head: usize,
}

impl GridSpec {
    pub fn new(x_max: f64, n_queue: usize, n_head: usize) -> Result<Self> {
        let grid = Self { x_max, n_queue, n_head };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid whose spacings on both edges are as close as possible to `h`.
    pub fn with_spacing(x_max: f64, length: f64, h: f64) -> Result<Self> {
        let n_queue = ((x_max / h).round() as usize).max(2) + 1;
        let n_head = ((length / h).round() as usize).max(2) + 1;
        Self::new(x_max, n_queue, n_head)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x_max.is_finite() && self.x_max > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "x_max must be positive, got {}",
                self.x_max
            )));
        }
        if self.n_queue < 2 || self.n_head < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least two points per edge, got n_queue = {}, n_head = {}",
                self.n_queue, self.n_head
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn queue_spacing(&self) -> f64 {
        self.x_max / (self.n_queue - 1) as f64
    }

    #[inline]
    pub fn head_spacing(&self, geometry: &TadpoleGeometry) -> f64 {
        geometry.length() / (self.n_head - 1) as f64
    }

    #[inline]
    pub fn queue_x(&self, i: usize) -> f64 {
        // last node pinned exactly to x_max
        if i + 1 == self.n_queue {
            self.x_max
        } else {
            i as f64 * self.queue_spacing()
        }
    }

    #[inline]
    pub fn head_s(&self, i: usize, geometry: &TadpoleGeometry) -> f64 {
        if i + 1 == self.n_head {
            geometry.length()
        } else {
            i as f64 * self.head_spacing(geometry)
        }
    }

    /// Total number of samples, queue first then head.
    pub fn len(&self) -> usize {
        self.n_queue + self.n_head
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Truncation rule for the queue: `support + 2√b·t_max + 5`.
    pub fn truncation_length(support: f64, band_top: f64, t_max: f64) -> f64 {
        support + 2.0 * band_top.sqrt() * t_max.abs() + 5.0
    }
}

/// Trapezoid weights on a uniform grid of `n` points with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}

/// Complex samples on both edges of a tadpole.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFunction {
    pub geometry: TadpoleGeometry,
    pub grid: GridSpec,
    pub queue: Vec<Complex64>,
    pub head: Vec<Complex64>,
}

impl GraphFunction {
    pub fn zeros(geometry: TadpoleGeometry, grid: GridSpec) -> Self {
        Self {
            geometry,
            grid,
            queue: vec![Complex64::new(0.0, 0.0); grid.n_queue],
            head: vec![Complex64::new(0.0, 0.0); grid.n_head],
        }
    }

    pub fn from_parts(
        geometry: TadpoleGeometry,
        grid: GridSpec,
        queue: Vec<Complex64>,
        head: Vec<Complex64>,
    ) -> Result<Self> {
        if queue.len() != grid.n_queue || head.len() != grid.n_head {
            return Err(Error::GridMismatch(format!(
                "expected {}+{} samples, got {}+{}",
                grid.n_queue,
                grid.n_head,
                queue.len(),
                head.len()
            )));
        }
        let f = Self { geometry, grid, queue, head };
        if !f.is_finite() {
            return Err(Error::InvalidParameter("non-finite sample".into()));
        }
        Ok(f)
    }

    /// Samples `f` at every grid point of both edges.
    pub fn from_fn<F>(geometry: TadpoleGeometry, grid: GridSpec, f: F) -> Self
    where
        F: Fn(GraphPoint) -> Complex64,
    {
        let queue = (0..grid.n_queue)
            .map(|i| f(GraphPoint::queue(grid.queue_x(i))))
            .collect();
        let head = (0..grid.n_head)
            .map(|i| f(GraphPoint::head(grid.head_s(i, &geometry))))
            .collect();
        Self { geometry, grid, queue, head }
    }

    pub fn queue_only<F: Fn(f64) -> Complex64>(
        geometry: TadpoleGeometry,
        grid: GridSpec,
        f: F,
    ) -> Self {
        Self::from_fn(geometry, grid, |p| match p.edge {
            Edge::Queue => f(p.s),
            Edge::Head => Complex64::new(0.0, 0.0),
        })
    }

    pub fn head_only<F: Fn(f64) -> Complex64>(
        geometry: TadpoleGeometry,
        grid: GridSpec,
        f: F,
    ) -> Self {
        Self::from_fn(geometry, grid, |p| match p.edge {
            Edge::Queue => Complex64::new(0.0, 0.0),
            Edge::Head => f(p.s),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.queue.iter().chain(&self.head).all(|v| v.is_finite())
    }

    pub fn queue_spacing(&self) -> f64 {
        self.grid.queue_spacing()
    }

    pub fn head_spacing(&self) -> f64 {
        self.grid.head_spacing(&self.geometry)
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.geometry == other.geometry && self.grid == other.grid
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{:?}/{:?} vs {:?}/{:?}",
                self.geometry, self.grid, other.geometry, other.grid
            )))
        }
    }

    /// Samples as one vector, queue first.
    pub fn to_vec(&self) -> Vec<Complex64> {
        self.queue.iter().chain(&self.head).copied().collect()
    }

    /// Inverse of [`to_vec`](Self::to_vec).
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                self.grid.len(),
                values.len()
            )));
        }
        let mut queue = values;
        let head = queue.split_off(self.grid.n_queue);
        Ok(Self { geometry: self.geometry, grid: self.grid, queue, head })
    }

    pub fn map<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Self {
        Self {
            geometry: self.geometry,
            grid: self.grid,
            queue: self.queue.iter().map(|&v| f(v)).collect(),
            head: self.head.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|v| v * c)
    }

    pub fn zip_with<F>(&self, other: &Self, f: F) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        self.check_grid(other)?;
        Ok(Self {
            geometry: self.geometry,
            grid: self.grid,
            queue: self.queue.iter().zip(&other.queue).map(|(&a, &b)| f(a, b)).collect(),
            head: self.head.iter().zip(&other.head).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest modulus over both grids.
    pub fn sup_norm(&self) -> f64 {
        self.queue.iter().chain(&self.head).map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn queue_sup_norm(&self) -> f64 {
        self.queue.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `(f₁(0), f₂(0), f₂(L))`.
    pub fn vertex_trace(&self) -> (Complex64, Complex64, Complex64) {
        (self.queue[0], self.head[0], self.head[self.grid.n_head - 1])
    }

    /// Continuity and Kirchhoff residuals at the vertex.
    ///
    /// Derivatives use one-sided three-point stencils, second order in the
    /// spacing of each edge.
    pub fn transmission_residuals(&self) -> Result<TransmissionResiduals> {
        if self.grid.n_queue < 3 || self.grid.n_head < 3 {
            return Err(Error::InvalidParameter(
                "transmission residuals need at least three points per edge".into(),
            ));
        }
        let (q0, h0, hl) = self.vertex_trace();
        let continuity = (q0 - h0).norm().max((h0 - hl).norm());

        let hq = self.queue_spacing();
        let hh = self.head_spacing();
        let q = &self.queue;
        let h = &self.head;
        let n = h.len();
        let dq0 = (-3.0 * q[0] + 4.0 * q[1] - q[2]) / (2.0 * hq);
        let dh0 = (-3.0 * h[0] + 4.0 * h[1] - h[2]) / (2.0 * hh);
        let dhl = (3.0 * h[n - 1] - 4.0 * h[n - 2] + h[n - 3]) / (2.0 * hh);
        let kirchhoff = (dq0 + dh0 - dhl).norm();
        Ok(TransmissionResiduals { continuity, kirchhoff })
    }

    /// Trapezoid L¹, L² norms summed over the edges, and the sup norm.
    pub fn norms(&self) -> Norms {
        let wq = trapezoid_weights(self.grid.n_queue, self.queue_spacing());
        let wh = trapezoid_weights(self.grid.n_head, self.head_spacing());
        let weighted = |p: fn(f64) -> f64| -> f64 {
            let q: f64 = self.queue.iter().zip(&wq).map(|(v, w)| w * p(v.norm())).sum();
            let h: f64 = self.head.iter().zip(&wh).map(|(v, w)| w * p(v.norm())).sum();
            q + h
        };
        Norms {
            l1: weighted(|a| a),
            l2: weighted(|a| a * a).sqrt(),
            linf: self.sup_norm(),
        }
    }

    /// Trapezoid approximation of Σ_k ∫ f_k conj(g_k).
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_grid(other)?;
        let wq = trapezoid_weights(self.grid.n_queue, self.queue_spacing());
        let wh = trapezoid_weights(self.grid.n_head, self.head_spacing());
        let q: Complex64 = self
            .queue
            .iter()
            .zip(&other.queue)
            .zip(&wq)
            .map(|((a, b), w)| a * b.conj() * w)
            .sum();
        let h: Complex64 = self
            .head
            .iter()
            .zip(&other.head)
            .zip(&wh)
            .map(|((a, b), w)| a * b.conj() * w)
            .sum();
        Ok(q + h)
    }

    /// Relative L² distance `‖self − other‖ / ‖other‖`.
    pub fn relative_l2_distance(&self, other: &Self) -> Result<f64> {
        let diff = self.sub(other)?;
        Ok(diff.norms().l2 / other.norms().l2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionResiduals {
    pub continuity: f64,
    pub kirchhoff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Norms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Samples on a uniform grid of `[0, x_max]`, endpoints included. Used for
/// the Neumann half-line problem and for queue-only quantities.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineFunction {
    pub x_max: f64,
    pub values: Vec<Complex64>,
}

impl HalfLineFunction {
    pub fn from_fn<F: Fn(f64) -> Complex64>(x_max: f64, n: usize, f: F) -> Self {
        let h = x_max / (n - 1) as f64;
        let values = (0..n)
            .map(|i| f(if i + 1 == n { x_max } else { i as f64 * h }))
            .collect();
        Self { x_max, values }
    }

    pub fn spacing(&self) -> f64 {
        self.x_max / (self.values.len() - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.values.len() {
            self.x_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l1_norm(&self) -> f64 {
        let w = trapezoid_weights(self.values.len(), self.spacing());
        self.values.iter().zip(&w).map(|(v, w)| v.norm() * w).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        let w = trapezoid_weights(self.values.len(), self.spacing());
        self.values.iter().zip(&w).map(|(v, w)| v.norm_sqr() * w).sum::<f64>().sqrt()
    }
}

impl From<&GraphFunction> for HalfLineFunction {
    /// Queue restriction.
    fn from(f: &GraphFunction) -> Self {
        Self { x_max: f.grid.x_max, values: f.queue.clone() }
    }
}

/// Spectral window `(a, b)` with `0 ≤ a < b < ∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBand {
    a: f64,
    b: f64,
}

impl SpectralBand {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a >= 0.0 && a < b && b.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "band requires 0 <= a < b < inf, got ({a}, {b})"
            )));
        }
        Ok(Self { a, b })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Wavenumber range `(√a, √b)`.
    pub fn wavenumbers(&self) -> (f64, f64) {
        (self.a.sqrt(), self.b.sqrt())
    }

    /// Strict membership `a < λ < b`.
    pub fn contains(&self, lambda: f64) -> bool {
        self.a < lambda && lambda < self.b
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.a * factor, self.b * factor)
    }

    /// Tadpole continuous-spectrum work needs `a > 0`.
    pub fn require_positive_floor(&self) -> Result<()> {
        if self.a > 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(
                "the continuous-spectrum kernel is singular at z = 0; use a band with a > 0".into(),
            ))
        }
    }
}
