//! Kernels written as a free term plus separable exponentials.
//!
//! On every edge pair (observation edge, source edge) each kernel has the form
//!
//! ```text
//! c·e^{iz|x−y|}·[same edge] + Σ_{p,q ∈ {+,−}} M_pq · e^{p·izx} · e^{q·izy}
//! ```
//!
//! which lets a trapezoid quadrature against a sampled function run in
//! linear time: separable terms reduce to two moments of the source, and the
//! free term to two running sums along the grid.

use num_complex::Complex64;

use super::coefficients::{boundary_coefficients, coefficients_closed_form, CoefficientMode, Frequency};
use crate::error::{Error, Result};
use crate::graph::{trapezoid_weights, Edge, GraphFunction, GraphPoint};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelPart {
    Full,
    Continuous,
    Point,
}

#[derive(Debug, Clone, Copy, Default)]
struct Block {
    free: Complex64,
    // m[p][q]: p sign on the observation exponent, q on the source, 0 ↔ +, 1 ↔ −
    m: [[Complex64; 2]; 2],
}

#[inline]
fn idx(e: Edge) -> usize {
    match e {
        Edge::Queue => 0,
        Edge::Head => 1,
    }
}

#[derive(Debug, Clone)]
pub struct SeparableKernel {
    z: Complex64,
    blocks: [[Block; 2]; 2],
}

impl SeparableKernel {
    pub fn new(z: Frequency, length: f64, mode: CoefficientMode, part: KernelPart) -> Result<Self> {
        let zz = z.z();
        if zz.norm() == 0.0 {
            return Err(Error::Domain("kernel undefined at z = 0".into()));
        }
        let c = 1.0 / (2.0 * I * zz);
        let mut blocks = [[Block::default(); 2]; 2];

        let point_block = || -> Result<Block> {
            let half = zz * length / 2.0;
            if half.sin().norm() < 1e-14 {
                return Err(Error::Pole { what: "point-spectrum kernel", k: z.nearest_eigen_index(length) });
            }
            let kappa = half.cos() / (2.0 * zz * half.sin());
            // κ sin(zx) sin(zy) = −κ/4 (e⁺e⁺ − e⁺e⁻ − e⁻e⁺ + e⁻e⁻)
            let q = kappa / 4.0;
            Ok(Block { free: ZERO, m: [[-q, q], [q, -q]] })
        };

        if part == KernelPart::Point {
            blocks[1][1] = point_block()?;
            return Ok(Self { z: zz, blocks });
        }

        let b = boundary_coefficients(z, length, mode)?;
        blocks[0][0] = Block { free: c, m: [[-c * b.f1, ZERO], [ZERO, ZERO]] };
        blocks[0][1] = Block { free: ZERO, m: [[-c * b.f2, -c * b.f3], [ZERO, ZERO]] };
        blocks[1][0] = Block { free: ZERO, m: [[c * b.g1, ZERO], [c * b.h1, ZERO]] };

        blocks[1][1] = match (part, mode) {
            (KernelPart::Continuous, CoefficientMode::Corrected) => {
                let xph = z.phase_factor(length);
                let alpha = (xph - 1.0) / (xph - 3.0);
                let beta = (xph + 1.0) / (xph - 3.0);
                // α sin sin − 2α cos(z(x−y)) − β e^{−iz(x+y)}
                Block {
                    free: c,
                    m: [
                        [-c * alpha / 4.0, -3.0 * c * alpha / 4.0],
                        [-3.0 * c * alpha / 4.0, c * (-alpha / 4.0 - beta)],
                    ],
                }
            }
            _ => {
                let t = coefficients_closed_form(z, length, mode)?;
                let full = Block { free: c, m: [[c * t.g2, c * t.g3], [c * t.h2, c * t.h3]] };
                if part == KernelPart::Full {
                    full
                } else {
                    let p = point_block()?;
                    let mut m = full.m;
                    for (row, prow) in m.iter_mut().zip(p.m.iter()) {
                        for (v, pv) in row.iter_mut().zip(prow) {
                            *v -= pv;
                        }
                    }
                    Block { free: c, m }
                }
            }
        };
        Ok(Self { z: zz, blocks })
    }

    pub fn z(&self) -> Complex64 {
        self.z
    }

    /// Pointwise value.
    pub fn eval(&self, x: GraphPoint, y: GraphPoint) -> Complex64 {
        let b = &self.blocks[idx(x.edge)][idx(y.edge)];
        let mut v = ZERO;
        if b.free != ZERO {
            v += b.free * (I * self.z * (x.s - y.s).abs()).exp();
        }
        for (p, sp) in [(0, 1.0), (1, -1.0)] {
            for (q, sq) in [(0, 1.0), (1, -1.0)] {
                if b.m[p][q] != ZERO {
                    v += b.m[p][q] * (I * self.z * (sp * x.s + sq * y.s)).exp();
                }
            }
        }
        v
    }

    /// Trapezoid quadrature `∫ K(x, y) f(y) dy` at every grid point, written
    /// into `out` (queue samples first). Linear in the number of samples;
    /// valid for `Im z ≥ 0`.
    pub fn apply_into(&self, f: &GraphFunction, out: &mut [Complex64]) {
        let grid = f.grid;
        let nq = grid.n_queue;
        assert_eq!(out.len(), grid.len());
        let hq = f.queue_spacing();
        let hh = f.head_spacing();
        let coords = [
            (0..nq).map(|i| grid.queue_x(i)).collect::<Vec<_>>(),
            (0..grid.n_head).map(|i| grid.head_s(i, &f.geometry)).collect::<Vec<_>>(),
        ];
        let weights = [trapezoid_weights(nq, hq), trapezoid_weights(grid.n_head, hh)];
        let values = [&f.queue, &f.head];
        let spacing = [hq, hh];

        // which exponential signs each edge needs as observation / source
        let mut need_obs = [[false; 2]; 2];
        let mut need_src = [[false; 2]; 2];
        for o in 0..2 {
            for s in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        if self.blocks[o][s].m[p][q] != ZERO {
                            need_obs[o][p] = true;
                            need_src[s][q] = true;
                        }
                    }
                }
            }
        }

        let expo = |e: usize, sign: f64| -> Vec<Complex64> {
            coords[e].iter().map(|&s| (I * self.z * (sign * s)).exp()).collect()
        };
        let mut table: [[Option<Vec<Complex64>>; 2]; 2] = Default::default();
        for e in 0..2 {
            for (p, sign) in [(0, 1.0), (1, -1.0)] {
                if need_obs[e][p] || need_src[e][p] {
                    table[e][p] = Some(expo(e, sign));
                }
            }
        }

        // source moments S[e][q] = Σ w e^{q·izy} f
        let mut moments = [[ZERO; 2]; 2];
        for e in 0..2 {
            for q in 0..2 {
                if need_src[e][q] {
                    let ex = table[e][q].as_ref().unwrap();
                    moments[e][q] = values[e]
                        .iter()
                        .zip(&weights[e])
                        .zip(ex)
                        .map(|((v, w), x)| v * w * x)
                        .sum();
                }
            }
        }

        let (out_q, out_h) = out.split_at_mut(nq);
        let outs: [&mut [Complex64]; 2] = [out_q, out_h];
        for (o, dst) in outs.into_iter().enumerate() {
            // separable part: coefficient of e^{p·izx}
            let mut coef = [ZERO; 2];
            for s in 0..2 {
                let b = &self.blocks[o][s];
                for p in 0..2 {
                    for q in 0..2 {
                        if b.m[p][q] != ZERO {
                            coef[p] += b.m[p][q] * moments[s][q];
                        }
                    }
                }
            }
            for (i, d) in dst.iter_mut().enumerate() {
                let mut v = ZERO;
                for p in 0..2 {
                    if coef[p] != ZERO {
                        v += coef[p] * table[o][p].as_ref().unwrap()[i];
                    }
                }
                *d = v;
            }

            let free = self.blocks[o][o].free;
            if free != ZERO {
                let step = (I * self.z * spacing[o]).exp();
                let w = &weights[o];
                let fv = values[o];
                let n = fv.len();
                // left sums Σ_{j<i} w_j e^{iz(x_i − y_j)} f_j
                let mut left = ZERO;
                for i in 0..n {
                    dst[i] += free * (left + w[i] * fv[i]);
                    left = (left + w[i] * fv[i]) * step;
                }
                let mut right = ZERO;
                for i in (0..n).rev() {
                    dst[i] += free * right;
                    right = (right + w[i] * fv[i]) * step;
                }
            }
        }
    }

    pub fn apply(&self, f: &GraphFunction) -> GraphFunction {
        let mut out = vec![ZERO; f.grid.len()];
        self.apply_into(f, &mut out);
        f.with_values(out).expect("length matches grid")
    }

    /// Quadrature of the real kernel `Im K(x, y)` against `f`, for real `z`.
    /// `scratch` must have the grid length.
    pub fn apply_imaginary_part_into(
        &self,
        f: &GraphFunction,
        f_is_real: bool,
        out: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        debug_assert!(self.z.im == 0.0);
        self.apply_into(f, out);
        if f_is_real {
            for v in out.iter_mut() {
                *v = Complex64::new(v.im, 0.0);
            }
        } else {
            self.apply_into(&f.conj(), scratch);
            for (v, b) in out.iter_mut().zip(scratch.iter()) {
                *v = (*v - b.conj()) / (2.0 * I);
            }
        }
    }
}
