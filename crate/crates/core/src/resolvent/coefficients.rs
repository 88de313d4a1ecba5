//! Vertex coefficients of the resolvent ansatz.
//!
//! With `ω = −iz` and `E = e^{−ωL} = e^{izL}`, the queue and head components
//! of `(z² − H)⁻¹g` are combinations of `e^{±ωx}`; continuity and Kirchhoff's
//! law at the vertex fix nine coefficients through three 3×3 systems sharing
//! one matrix
//!
//! ```text
//! [ 1   1      1       ]
//! [ 1   E      1/E     ]   (unknowns F_i, G_i, H_i)
//! [ 1   E−1    1−1/E   ]
//! ```
//!
//! with determinant `D(ω) = e^{ωL}(E − 1)(E − 3)`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Spectral parameter `z` (the resolvent is evaluated at `z²`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frequency(pub Complex64);

impl Frequency {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn real(mu: f64) -> Self {
        Self(Complex64::new(mu, 0.0))
    }

    /// Principal square root of `λ`, so `Im z ≥ 0`.
    pub fn from_spectral(lambda: Complex64) -> Self {
        Self(lambda.sqrt())
    }

    #[inline]
    pub fn z(&self) -> Complex64 {
        self.0
    }

    /// `ω = −iz`.
    #[inline]
    pub fn omega(&self) -> Complex64 {
        -Complex64::i() * self.0
    }

    /// `X = e^{izL} = e^{−ωL}`.
    #[inline]
    pub fn phase_factor(&self, length: f64) -> Complex64 {
        (Complex64::i() * self.0 * length).exp()
    }

    /// `round(Re z · L / 2π)`, the eigen-index nearest to `z`.
    pub fn nearest_eigen_index(&self, length: f64) -> i64 {
        (self.0.re * length / (2.0 * std::f64::consts::PI)).round() as i64
    }
}

/// Which closed forms to use for `F₃, G₃, H₃`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoefficientMode {
    /// Third Kirchhoff right side `−e^{−ωL}`; yields a symmetric kernel.
    #[default]
    Corrected,
    /// The printed formulas, third Kirchhoff right side `+e^{−ωL}`.
    PaperVerbatim,
}

impl CoefficientMode {
    pub fn kirchhoff_sign(self) -> KirchhoffSign {
        match self {
            CoefficientMode::Corrected => KirchhoffSign::DerivedMinus,
            CoefficientMode::PaperVerbatim => KirchhoffSign::PaperPlus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CoefficientMode::Corrected => "corrected",
            CoefficientMode::PaperVerbatim => "paper",
        }
    }
}

/// Sign of the right side of the third Kirchhoff equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KirchhoffSign {
    PaperPlus,
    DerivedMinus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionCoefficients {
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
    pub g1: Complex64,
    pub g2: Complex64,
    pub g3: Complex64,
    pub h1: Complex64,
    pub h2: Complex64,
    pub h3: Complex64,
    pub mode: CoefficientMode,
}

impl TransmissionCoefficients {
    /// `[F_i, G_i, H_i]` for system `i ∈ {1, 2, 3}`.
    pub fn system(&self, i: usize) -> [Complex64; 3] {
        match i {
            1 => [self.f1, self.g1, self.h1],
            2 => [self.f2, self.g2, self.h2],
            3 => [self.f3, self.g3, self.h3],
            _ => panic!("system index must be 1, 2 or 3"),
        }
    }

    pub fn as_array(&self) -> [(&'static str, Complex64); 9] {
        [
            ("F1", self.f1),
            ("F2", self.f2),
            ("F3", self.f3),
            ("G1", self.g1),
            ("G2", self.g2),
            ("G3", self.g3),
            ("H1", self.h1),
            ("H2", self.h2),
            ("H3", self.h3),
        ]
    }

    /// Largest of `|G1 + F2|`, `|H1 + F3|`, `|G3 − H2|`.
    pub fn symmetry_defect(&self) -> f64 {
        (self.g1 + self.f2)
            .norm()
            .max((self.h1 + self.f3).norm())
            .max((self.g3 - self.h2).norm())
    }

    /// Residuals of the nine vertex equations, ordered system by system
    /// (two continuity rows then the Kirchhoff row).
    pub fn system_residuals(&self, z: Frequency, length: f64, sign: KirchhoffSign) -> [f64; 9] {
        let e = z.phase_factor(length);
        let (matrix, rhs) = vertex_system(e, sign);
        let mut out = [0.0; 9];
        for (s, b) in rhs.iter().enumerate() {
            let x = self.system(s + 1);
            for r in 0..3 {
                let lhs: Complex64 = (0..3).map(|c| matrix[r][c] * x[c]).sum();
                out[3 * s + r] = (lhs - b[r]).norm();
            }
        }
        out
    }

    pub fn max_system_residual(&self, z: Frequency, length: f64, sign: KirchhoffSign) -> f64 {
        self.system_residuals(z, length, sign).iter().fold(0.0, |a, &b| a.max(b))
    }
}

/// `D(ω) = e^{ωL}(e^{−ωL} − 1)(e^{−ωL} − 3)`.
pub fn determinant(z: Frequency, length: f64) -> Complex64 {
    let e = z.phase_factor(length);
    (e - 1.0) * (e - 3.0) / e
}

const POLE_EPS: f64 = 1e-14;

fn check_x3(z: Frequency, length: f64, e: Complex64) -> Result<()> {
    if (e - 3.0).norm() < POLE_EPS {
        return Err(Error::Pole { what: "vertex coefficients (e^{-wL} = 3)", k: z.nearest_eigen_index(length) });
    }
    Ok(())
}

/// The five coefficients that only carry `(E − 3)` denominators: `F₁, F₂,
/// F₃, G₁, H₁`. Finite on the whole real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCoefficients {
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
    pub g1: Complex64,
    pub h1: Complex64,
}

pub fn boundary_coefficients(
    z: Frequency,
    length: f64,
    mode: CoefficientMode,
) -> Result<BoundaryCoefficients> {
    let e = z.phase_factor(length);
    check_x3(z, length, e)?;
    let d3 = e - 3.0;
    let f3 = match mode {
        CoefficientMode::Corrected => 2.0 * e / d3,
        CoefficientMode::PaperVerbatim => -2.0 * e * e / d3,
    };
    Ok(BoundaryCoefficients {
        f1: 1.0 + 2.0 * (e + 1.0) / d3,
        f2: 2.0 / d3,
        f3,
        g1: -2.0 / d3,
        h1: -2.0 * e / d3,
    })
}

/// Closed-form coefficients.
pub fn coefficients_closed_form(
    z: Frequency,
    length: f64,
    mode: CoefficientMode,
) -> Result<TransmissionCoefficients> {
    let b = boundary_coefficients(z, length, mode)?;
    let e = z.phase_factor(length);
    if (e - 1.0).norm() < POLE_EPS {
        return Err(Error::Pole { what: "head coefficients (D = 0)", k: z.nearest_eigen_index(length) });
    }
    let d = (e - 1.0) * (e - 3.0) / e;
    let (g3, h3) = match mode {
        CoefficientMode::Corrected => ((2.0 - e) / d, -e / d),
        CoefficientMode::PaperVerbatim => (e / d, e * (2.0 * e - 3.0) / d),
    };
    Ok(TransmissionCoefficients {
        f1: b.f1,
        f2: b.f2,
        f3: b.f3,
        g1: b.g1,
        g2: -(1.0 / e) / d,
        g3,
        h1: b.h1,
        h2: (2.0 - e) / d,
        h3,
        mode,
    })
}

type Matrix3 = [[Complex64; 3]; 3];

fn vertex_system(e: Complex64, sign: KirchhoffSign) -> (Matrix3, [[Complex64; 3]; 3]) {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let inv = 1.0 / e;
    let matrix = [[one, one, one], [one, e, inv], [one, e - 1.0, 1.0 - inv]];
    let k3 = match sign {
        KirchhoffSign::PaperPlus => e,
        KirchhoffSign::DerivedMinus => -e,
    };
    let rhs = [
        // G1 + H1 = 1 − F1, G1 E + H1/E = 1 − F1, Kirchhoff = −1
        [one, one, -one],
        // 1 + G2 + H2 = −F2, G2 E + H2/E = −F2, Kirchhoff = −1
        [-one, zero, -one],
        // G3 + H3 = −F3, (1 + G3) E + H3/E = −F3, Kirchhoff = ∓E
        [zero, -e, k3],
    ];
    (matrix, rhs)
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve3(mut a: Matrix3, mut b: [Complex64; 3]) -> Option<[Complex64; 3]> {
    let scale = a.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))?;
        if a[pivot][col].norm() <= 1e-13 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let factor = a[row][col] / a[col][col];
            for k in col..3 {
                let v = a[col][k];
                a[row][k] -= factor * v;
            }
            let v = b[col];
            b[row] -= factor * v;
        }
    }
    let mut x = [Complex64::new(0.0, 0.0); 3];
    for row in (0..3).rev() {
        let s: Complex64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Assembles the three vertex systems and solves them numerically.
pub fn coefficients_oracle(
    z: Frequency,
    length: f64,
    sign: KirchhoffSign,
) -> Result<TransmissionCoefficients> {
    let e = z.phase_factor(length);
    let (matrix, rhs) = vertex_system(e, sign);
    let mut sol = [[Complex64::new(0.0, 0.0); 3]; 3];
    for (s, b) in rhs.iter().enumerate() {
        sol[s] = solve3(matrix, *b).ok_or(Error::Pole {
            what: "vertex system (singular matrix)",
            k: z.nearest_eigen_index(length),
        })?;
    }
    Ok(TransmissionCoefficients {
        f1: sol[0][0],
        g1: sol[0][1],
        h1: sol[0][2],
        f2: sol[1][0],
        g2: sol[1][1],
        h2: sol[1][2],
        f3: sol[2][0],
        g3: sol[2][1],
        h3: sol[2][2],
        mode: match sign {
            KirchhoffSign::DerivedMinus => CoefficientMode::Corrected,
            KirchhoffSign::PaperPlus => CoefficientMode::PaperVerbatim,
        },
    })
}

/// Determinant of the assembled vertex matrix, by cofactor expansion.
pub fn assembled_determinant(z: Frequency, length: f64) -> Complex64 {
    let (m, _) = vertex_system(z.phase_factor(length), KirchhoffSign::DerivedMinus);
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}
