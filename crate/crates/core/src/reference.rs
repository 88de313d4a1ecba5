//! Crank–Nicolson finite differences on the truncated tadpole.
//!
//! Unknowns are the interior queue nodes, the interior head nodes and one
//! shared vertex value; the far queue end is a homogeneous Dirichlet wall.
//! The discrete operator is `A = W⁻¹S` with `S` real symmetric and `W` the
//! diagonal lumped-mass matrix (`h` at interior nodes, `(h_q + 2h_h)/2` at
//! the vertex), so `A` is self-adjoint in `⟨u, v⟩_W = Σ W_j u_j conj(v_j)`.
//! The vertex row is the flux balance `Σ (u_V − u_neighbour)/h_edge`, which
//! enforces continuity exactly and Kirchhoff's condition weakly; it is
//! second-order accurate when both edges share the same spacing.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{GraphFunction, GridSpec, TadpoleGeometry};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Far-end amplitude above which the wall is considered to be reflecting.
pub const REFLECTION_WARNING: f64 = 1e-8;

/// The assembled operator. Unknown ordering: queue interior (`1..n_q−1`),
/// vertex, head interior (`1..n_h−1`).
#[derive(Debug, Clone)]
pub struct FdHamiltonian {
    pub geometry: TadpoleGeometry,
    pub grid: GridSpec,
    nq: usize,
    nh: usize,
    hq: f64,
    hh: f64,
    weights: Vec<f64>,
}

pub fn assemble_hamiltonian(grid: GridSpec, geometry: TadpoleGeometry) -> Result<FdHamiltonian> {
    grid.validate()?;
    if grid.n_queue < 3 || grid.n_head < 3 {
        return Err(Error::InvalidParameter("finite differences need at least three points per edge".into()));
    }
    let nq = grid.n_queue - 2;
    let nh = grid.n_head - 2;
    let hq = grid.queue_spacing();
    let hh = grid.head_spacing(&geometry);
    let mut weights = vec![hq; nq];
    weights.push(0.5 * (hq + 2.0 * hh));
    weights.extend(std::iter::repeat_n(hh, nh));
    Ok(FdHamiltonian { geometry, grid, nq, nh, hq, hh, weights })
}

impl FdHamiltonian {
    pub fn dim(&self) -> usize {
        self.nq + 1 + self.nh
    }

    fn vertex(&self) -> usize {
        self.nq
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Entries `(row, col, value)` of `S`; repeated positions add up.
    pub fn stiffness_triplets(&self) -> Vec<(usize, usize, f64)> {
        let v = self.vertex();
        let h0 = v + 1;
        let (iq, ih) = (1.0 / self.hq, 1.0 / self.hh);
        let mut t = vec![(v, v, iq + 2.0 * ih)];
        let mut pair = |i: usize, j: usize, x: f64| {
            t.push((i, j, x));
            t.push((j, i, x));
        };
        pair(0, v, -iq);
        for j in 0..self.nq.saturating_sub(1) {
            pair(j, j + 1, -iq);
        }
        pair(h0, v, -ih);
        pair(h0 + self.nh - 1, v, -ih);
        for j in 0..self.nh - 1 {
            pair(h0 + j, h0 + j + 1, -ih);
        }
        t.extend((0..self.nq).map(|j| (j, j, 2.0 * iq)));
        t.extend((0..self.nh).map(|j| (h0 + j, h0 + j, 2.0 * ih)));
        t
    }

    pub fn stiffness_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (r, c, x) in self.stiffness_triplets() {
            m[r][c] += x;
        }
        m
    }

    /// `S u`.
    pub fn apply_stiffness(&self, u: &[Complex64], out: &mut [Complex64]) {
        let v = self.vertex();
        let uv = u[v];
        let (iq, ih) = (1.0 / self.hq, 1.0 / self.hh);
        for j in 0..self.nq {
            let left = if j == 0 { uv } else { u[j - 1] };
            let right = if j + 1 < self.nq { u[j + 1] } else { ZERO };
            out[j] = (2.0 * u[j] - left - right) * iq;
        }
        let h0 = v + 1;
        for j in 0..self.nh {
            let left = if j == 0 { uv } else { u[h0 + j - 1] };
            let right = if j + 1 < self.nh { u[h0 + j + 1] } else { uv };
            out[h0 + j] = (2.0 * u[h0 + j] - left - right) * ih;
        }
        let q1 = if self.nq > 0 { u[0] } else { ZERO };
        out[v] = (uv - q1) * iq + (2.0 * uv - u[h0] - u[h0 + self.nh - 1]) * ih;
    }

    /// `A u = W⁻¹ S u`.
    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![ZERO; u.len()];
        self.apply_stiffness(u, &mut out);
        for (o, w) in out.iter_mut().zip(&self.weights) {
            *o /= w;
        }
        out
    }

    /// Grid function to unknowns. The vertex value is the mean of the three
    /// edge-end samples.
    pub fn pack(&self, f: &GraphFunction) -> Result<Vec<Complex64>> {
        if f.grid != self.grid || f.geometry != self.geometry {
            return Err(Error::GridMismatch("function and operator live on different grids".into()));
        }
        let (a, b, c) = f.vertex_trace();
        let mut u = Vec::with_capacity(self.dim());
        u.extend_from_slice(&f.queue[1..f.queue.len() - 1]);
        u.push((a + b + c) / 3.0);
        u.extend_from_slice(&f.head[1..f.head.len() - 1]);
        Ok(u)
    }

    pub fn unpack(&self, u: &[Complex64]) -> GraphFunction {
        let v = u[self.vertex()];
        let mut queue = Vec::with_capacity(self.grid.n_queue);
        queue.push(v);
        queue.extend_from_slice(&u[..self.nq]);
        queue.push(ZERO);
        let mut head = Vec::with_capacity(self.grid.n_head);
        head.push(v);
        head.extend_from_slice(&u[self.nq + 1..]);
        head.push(v);
        GraphFunction { geometry: self.geometry, grid: self.grid, queue, head }
    }

    pub fn weighted_norm(&self, u: &[Complex64]) -> f64 {
        u.iter().zip(&self.weights).map(|(x, w)| w * x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Factorization of `p W + q S`.
    pub fn factor(&self, p: Complex64, q: Complex64) -> Result<BorderedSolver> {
        BorderedSolver::new(self, p, q)
    }
}

/// Thomas factors of a constant-coefficient tridiagonal chain.
#[derive(Debug, Clone)]
struct Chain {
    off: Complex64,
    // modified upper coefficients and pivots
    cp: Vec<Complex64>,
    piv: Vec<Complex64>,
}

impl Chain {
    fn new(n: usize, diag: Complex64, off: Complex64) -> Result<Self> {
        let mut cp = vec![ZERO; n];
        let mut piv = vec![ZERO; n];
        for j in 0..n {
            let d = if j == 0 { diag } else { diag - off * cp[j - 1] };
            if d.norm() < 1e-300 || !d.is_finite() {
                return Err(Error::LinearSolve(format!("zero pivot at chain row {j}")));
            }
            piv[j] = d;
            cp[j] = off / d;
        }
        Ok(Self { off, cp, piv })
    }

    fn solve(&self, rhs: &mut [Complex64]) {
        let n = rhs.len();
        rhs[0] /= self.piv[0];
        for j in 1..n {
            rhs[j] = (rhs[j] - self.off * rhs[j - 1]) / self.piv[j];
        }
        for j in (0..n.saturating_sub(1)).rev() {
            rhs[j] -= self.cp[j] * rhs[j + 1];
        }
    }
}

/// Direct solver for `p W + q S` via the Schur complement on the vertex.
#[derive(Debug, Clone)]
pub struct BorderedSolver {
    nq: usize,
    queue: Chain,
    head: Chain,
    // chain responses to a unit vertex value, and the vertex couplings
    zq: Vec<Complex64>,
    zh: Vec<Complex64>,
    bq: Complex64,
    bh: Complex64,
    schur: Complex64,
}

impl BorderedSolver {
    fn new(op: &FdHamiltonian, p: Complex64, q: Complex64) -> Result<Self> {
        let (iq, ih) = (1.0 / op.hq, 1.0 / op.hh);
        let queue = Chain::new(op.nq, p * op.hq + q * 2.0 * iq, -q * iq)?;
        let head = Chain::new(op.nh, p * op.hh + q * 2.0 * ih, -q * ih)?;
        let (bq, bh) = (-q * iq, -q * ih);
        let mut zq = vec![ZERO; op.nq];
        zq[0] = bq;
        queue.solve(&mut zq);
        let mut zh = vec![ZERO; op.nh];
        zh[0] += bh;
        zh[op.nh - 1] += bh;
        head.solve(&mut zh);
        let diag_v = p * op.weights[op.nq] + q * (iq + 2.0 * ih);
        let schur = diag_v - bq * zq[0] - bh * (zh[0] + zh[op.nh - 1]);
        if schur.norm() < 1e-300 || !schur.is_finite() {
            return Err(Error::LinearSolve("singular vertex Schur complement".into()));
        }
        Ok(Self { nq: op.nq, queue, head, zq, zh, bq, bh, schur })
    }

    /// Solves in place.
    pub fn solve(&self, rhs: &mut [Complex64]) {
        let nq = self.nq;
        let (rq, rest) = rhs.split_at_mut(nq);
        let (rv, rh) = rest.split_at_mut(1);
        self.queue.solve(rq);
        self.head.solve(rh);
        let nh = rh.len();
        let xv = (rv[0] - self.bq * rq[0] - self.bh * (rh[0] + rh[nh - 1])) / self.schur;
        rv[0] = xv;
        for (r, z) in rq.iter_mut().zip(&self.zq) {
            *r -= z * xv;
        }
        for (r, z) in rh.iter_mut().zip(&self.zh) {
            *r -= z * xv;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdScheme {
    pub geometry: TadpoleGeometry,
    pub grid: GridSpec,
    pub dt: f64,
    pub t_final: f64,
}

impl FdScheme {
    /// Scheme with the default step `min(h_q, h_h)²/2`.
    pub fn new(geometry: TadpoleGeometry, grid: GridSpec, t_final: f64) -> Result<Self> {
        let h = grid.queue_spacing().min(grid.head_spacing(&geometry));
        Self::with_dt(geometry, grid, t_final, 0.5 * h * h)
    }

    pub fn with_dt(geometry: TadpoleGeometry, grid: GridSpec, t_final: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt}")));
        }
        if !(t_final >= 0.0 && t_final.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time must be ≥ 0, got {t_final}")));
        }
        grid.validate()?;
        Ok(Self { geometry, grid, dt, t_final })
    }

    /// Number of steps; the step is shortened so that they land on `t_final`.
    pub fn steps(&self) -> usize {
        let n = self.t_final / self.dt;
        // 0.07 / 0.01 is 7.000000000000001
        if (n - n.round()).abs() <= 1e-9 * n.max(1.0) {
            n.round() as usize
        } else {
            n.ceil() as usize
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceReport {
    pub state: GraphFunction,
    pub steps: usize,
    pub dt: f64,
    /// Largest amplitude seen at the last interior queue node.
    pub far_end_peak: f64,
    /// Relative change of the weighted norm over the whole run.
    pub norm_drift: f64,
    pub warnings: Vec<String>,
}

/// Crank–Nicolson approximation of `e^{itH} u₀`: each step solves
/// `(W − i dt/2 S) u⁺ = (W + i dt/2 S) u`.
pub fn evolve_reference(u0: &GraphFunction, scheme: &FdScheme) -> Result<ReferenceReport> {
    evolve_reference_observed(u0, scheme, |_, _| {})
}

/// [`evolve_reference`] calling `observe(t, state)` after every step.
pub fn evolve_reference_observed<F>(u0: &GraphFunction, scheme: &FdScheme, mut observe: F) -> Result<ReferenceReport>
where
    F: FnMut(f64, &[Complex64]),
{
    let op = assemble_hamiltonian(scheme.grid, scheme.geometry)?;
    let mut u = op.pack(u0)?;
    let steps = scheme.steps();
    let dt = if steps == 0 { scheme.dt } else { scheme.t_final / steps as f64 };
    let beta = Complex64::new(0.0, 0.5 * dt);
    let solver = op.factor(Complex64::new(1.0, 0.0), -beta)?;
    let norm0 = op.weighted_norm(&u);
    let far = op.grid.n_queue - 3;
    let mut far_end_peak = u[far].norm();
    let mut su = vec![ZERO; u.len()];
    for n in 0..steps {
        op.apply_stiffness(&u, &mut su);
        for ((x, s), w) in u.iter_mut().zip(&su).zip(&op.weights) {
            *x = *x * *w + beta * s;
        }
        solver.solve(&mut u);
        far_end_peak = far_end_peak.max(u[far].norm());
        observe((n + 1) as f64 * dt, &u);
    }
    if u.iter().any(|x| !x.is_finite()) {
        return Err(Error::LinearSolve("non-finite state after time stepping".into()));
    }
    let norm_drift = if norm0 > 0.0 { (op.weighted_norm(&u) - norm0).abs() / norm0 } else { 0.0 };
    let mut warnings = Vec::new();
    if far_end_peak > REFLECTION_WARNING {
        let w = format!(
            "amplitude {far_end_peak:.3e} reached the queue wall at x = {}; reflections may contaminate the result",
            op.grid.x_max
        );
        log::warn!("{w}");
        warnings.push(w);
    }
    Ok(ReferenceReport { state: op.unpack(&u), steps, dt, far_end_peak, norm_drift, warnings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEigenpair {
    pub eigenvalue: f64,
    pub eigenvector: GraphFunction,
    pub iterations: usize,
}

/// Eigenpair of `A` nearest `shift`, by shifted inverse iteration from `start`.
pub fn nearest_eigenvalue(op: &FdHamiltonian, shift: f64, start: &GraphFunction) -> Result<DiscreteEigenpair> {
    let solver = op.factor(Complex64::new(-shift, 0.0), Complex64::new(1.0, 0.0))?;
    let mut x = op.pack(start)?;
    let nrm = op.weighted_norm(&x);
    if nrm == 0.0 {
        return Err(Error::InvalidParameter("start vector is zero".into()));
    }
    x.iter_mut().for_each(|v| *v /= nrm);
    let rayleigh = |x: &[Complex64]| {
        let mut s = vec![ZERO; x.len()];
        op.apply_stiffness(x, &mut s);
        let num: Complex64 = x.iter().zip(&s).map(|(a, b)| a.conj() * b).sum();
        num.re / op.weighted_norm(x).powi(2)
    };
    let mut lam = rayleigh(&x);
    for it in 1..=100 {
        let mut y: Vec<Complex64> = x.iter().zip(&op.weights).map(|(v, w)| v * *w).collect();
        solver.solve(&mut y);
        let n = op.weighted_norm(&y);
        y.iter_mut().for_each(|v| *v /= n);
        let next = rayleigh(&y);
        x = y;
        let done = (next - lam).abs() <= 1e-14 * next.abs().max(1.0);
        lam = next;
        if done {
            return Ok(DiscreteEigenpair { eigenvalue: lam, eigenvector: op.unpack(&x), iterations: it });
        }
    }
    Err(Error::LinearSolve("inverse iteration did not settle".into()))
}
