//! Spin-½ and spin-1 operators.
//!
//! Spin-½ components use the Pauli normalization (eigenvalues ±1); the
//! physical ±½ values differ by an overall factor that never matters for the
//! checks in this crate.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::linalg::{c, re, tensor, CMatrix, StateVector};

/// A direction on the unit sphere in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    /// `phi` is wrapped into `[0, 2π)`.
    pub fn new(theta: f64, phi: f64) -> Self {
        Self {
            theta,
            phi: phi.rem_euclid(2.0 * PI),
        }
    }

    pub fn from_degrees(theta_deg: f64, phi_deg: f64) -> Self {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians())
    }

    /// A direction in the x–y plane at azimuth `phi_deg`.
    pub fn in_plane_deg(phi_deg: f64) -> Self {
        Self::new(PI / 2.0, phi_deg.to_radians())
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn x() -> Self {
        Self::new(PI / 2.0, 0.0)
    }

    pub fn y() -> Self {
        Self::new(PI / 2.0, PI / 2.0)
    }

    /// Normalizes `v`; returns `None` for the zero vector.
    pub fn from_vector(v: [f64; 3]) -> Option<Self> {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if n == 0.0 || !n.is_finite() {
            return None;
        }
        let z = (v[2] / n).clamp(-1.0, 1.0);
        Some(Self::new(z.acos(), v[1].atan2(v[0])))
    }

    pub fn vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn dot(&self, other: &Direction) -> f64 {
        let (a, b) = (self.vector(), other.vector());
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
    }

    /// The opposite direction `(π − θ, φ + π)`.
    pub fn antipode(&self) -> Self {
        Self::new(PI - self.theta, self.phi + PI)
    }

    /// Uniform on the sphere.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v: [f64; 3] = [
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
                rng.sample(StandardNormal),
            ];
            if let Some(d) = Self::from_vector(v) {
                return d;
            }
        }
    }

    /// Applies a 3×3 real rotation matrix.
    pub fn rotated(&self, r: &[[f64; 3]; 3]) -> Self {
        let v = self.vector();
        let w = [0, 1, 2].map(|i| r[i][0] * v[0] + r[i][1] * v[1] + r[i][2] * v[2]);
        Self::from_vector(w).expect("rotation preserves norm")
    }
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
}

pub fn pauli_y() -> CMatrix {
    CMatrix::from_rows(&[[re(0.0), c(0.0, -1.0)], [c(0.0, 1.0), re(0.0)]])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::diag_real(&[1.0, -1.0])
}

/// Spin component along `d`:
/// `[[cos θ, e^{−iφ} sin θ], [e^{iφ} sin θ, −cos θ]]`.
pub fn sigma(d: &Direction) -> CMatrix {
    let (st, ct) = d.theta.sin_cos();
    let e = c(0.0, d.phi).exp();
    CMatrix::from_rows(&[[re(ct), e.conj() * st], [e * st, re(-ct)]])
}

/// `cos(θ/2)|↑⟩ + sin(θ/2)e^{iφ}|↓⟩`
pub fn spin_up(d: &Direction) -> StateVector {
    let (s, co) = (d.theta / 2.0).sin_cos();
    let e = c(0.0, d.phi).exp();
    StateVector::new(vec![2], vec![re(co), e * s]).expect("unit vector")
}

/// `sin(θ/2)e^{−iφ}|↑⟩ − cos(θ/2)|↓⟩`
pub fn spin_down(d: &Direction) -> StateVector {
    let (s, co) = (d.theta / 2.0).sin_cos();
    let e = c(0.0, -d.phi).exp();
    StateVector::new(vec![2], vec![e * s, re(-co)]).expect("unit vector")
}

/// `(|↑↓⟩ − |↓↑⟩)/√2` in the z basis.
pub fn singlet() -> StateVector {
    StateVector::from_real(vec![2, 2], &[0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0])
        .expect("unit vector")
}

/// The singlet written with the eigenvectors of `sigma(d)`:
/// `(|↑d⟩|↓d⟩ − |↓d⟩|↑d⟩)/√2`.
pub fn singlet_in_direction(d: &Direction) -> StateVector {
    let up = spin_up(d);
    let down = spin_down(d);
    let a = up.tensor(&down);
    let b = down.tensor(&up);
    let amps = a
        .amps()
        .iter()
        .zip(b.amps())
        .map(|(x, y)| x - y)
        .collect();
    StateVector::new(vec![2, 2], amps).expect("nonzero")
}

/// `σ(d)⊗I + I⊗σ(d)`
pub fn total_spin(d: &Direction) -> CMatrix {
    let s = sigma(d);
    let i2 = CMatrix::identity(2);
    &tensor(&s, &i2) + &tensor(&i2, &s)
}

/// Spin-1 generators `(Sx, Sy, Sz)` in the `m = +1, 0, −1` basis.
pub fn spin1_generators() -> [CMatrix; 3] {
    let h = FRAC_1_SQRT_2;
    let sx = CMatrix::from_real_rows(&[[0.0, h, 0.0], [h, 0.0, h], [0.0, h, 0.0]]);
    let z = re(0.0);
    let sy = CMatrix::from_rows(&[
        [z, c(0.0, -h), z],
        [c(0.0, h), z, c(0.0, -h)],
        [z, c(0.0, h), z],
    ]);
    let sz = CMatrix::diag_real(&[1.0, 0.0, -1.0]);
    [sx, sy, sz]
}

/// Spin-1 component along `d`, `n̂·S`.
pub fn spin1_component(d: &Direction) -> CMatrix {
    let [sx, sy, sz] = spin1_generators();
    let n = d.vector();
    &(&sx.scale(re(n[0])) + &sy.scale(re(n[1]))) + &sz.scale(re(n[2]))
}

/// Square of the spin-1 component along `d`; eigenvalues `{0, 1, 1}`.
pub fn spin1_squared(d: &Direction) -> CMatrix {
    let s = spin1_component(d);
    &s * &s
}

/// `s²` along a Cartesian axis (0 = x, 1 = y, 2 = z), built without
/// trigonometric rounding.
pub fn spin1_squared_axis(axis: usize) -> CMatrix {
    let g = &spin1_generators()[axis];
    g * g
}
