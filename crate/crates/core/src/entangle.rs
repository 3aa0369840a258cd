//! Maximally entangled states generated by anti-unitary maps.
//!
//! An anti-unitary map is stored as `U = Ū·K`, where `K` conjugates entries
//! in the computational basis and `Ū` is unitary. The computational basis is
//! therefore the invariant basis of `K`, and the partner observable reduces
//! to `Ã = Ū·conj(A)·Ū†`.
//!
//! For any such `U` and orthonormal basis `{φₙ}`,
//! `ψ = n^{-1/2} Σₙ U|φₙ⟩ ⊗ |φₙ⟩` does not depend on the basis, and
//! `(Ã⊗I − I⊗A)ψ = 0` for every Hermitian `A`.

use serde::Serialize;

use crate::linalg::{hermitian_eig, inner, re, tensor, CMatrix, StateVector, C64, TOL};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct AntiUnitaryMap {
    ubar: CMatrix,
}

impl AntiUnitaryMap {
    pub fn new(ubar: CMatrix) -> Result<Self> {
        if !ubar.is_unitary(TOL) {
            return Err(Error::NotUnitary);
        }
        Ok(Self { ubar })
    }

    /// Plain complex conjugation `K` on `C^n`.
    pub fn conjugation(n: usize) -> Self {
        Self {
            ubar: CMatrix::identity(n),
        }
    }

    /// `Ū = [[0, 1], [−1, 0]]`, the map that generates the spin singlet.
    pub fn singlet_map() -> Self {
        Self {
            ubar: CMatrix::from_real_rows(&[[0.0, 1.0], [-1.0, 0.0]]),
        }
    }

    pub fn ubar(&self) -> &CMatrix {
        &self.ubar
    }

    pub fn dim(&self) -> usize {
        self.ubar.rows()
    }

    /// `U² = 1`, i.e. `Ū·conj(Ū) = I`.
    pub fn is_involution(&self) -> bool {
        (&self.ubar * &self.ubar.conj()).approx_eq(&CMatrix::identity(self.dim()), TOL)
    }

    /// `U⁻¹ = K·Ū† = Ūᵀ·K`.
    pub fn inverse(&self) -> Self {
        Self {
            ubar: self.ubar.transpose(),
        }
    }

    /// `Ū·conj(v)` on raw amplitudes.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        let conj: Vec<C64> = v.iter().map(|z| z.conj()).collect();
        self.ubar.mul_vec(&conj)
    }
}

pub fn anti_apply(u: &AntiUnitaryMap, v: &StateVector) -> Result<StateVector> {
    if v.dim() != u.dim() {
        return Err(Error::DimMismatch(format!(
            "map on C^{} applied to a {}-dim state",
            u.dim(),
            v.dim()
        )));
    }
    StateVector::new(v.dims().to_vec(), u.apply(v.amps())?)
}

#[derive(Clone, Debug)]
pub struct MaxEntangledState {
    pub n: usize,
    pub u: AntiUnitaryMap,
    /// Columns are the basis vectors `φₙ`.
    pub basis: CMatrix,
    pub state: StateVector,
}

fn check_orthonormal(basis: &CMatrix) -> Result<()> {
    if !basis.is_square() {
        return Err(Error::DimMismatch(format!(
            "basis matrix is {}x{}",
            basis.rows(),
            basis.cols()
        )));
    }
    let dev = (&basis.dagger() * basis).max_diff(&CMatrix::identity(basis.rows()));
    if dev > TOL {
        return Err(Error::BasisNotOrthonormal(dev));
    }
    Ok(())
}

/// `ψ = n^{-1/2} Σₙ U|φₙ⟩ ⊗ |φₙ⟩` for the basis given as matrix columns.
pub fn me_state(u: &AntiUnitaryMap, basis: &CMatrix) -> Result<MaxEntangledState> {
    check_orthonormal(basis)?;
    let n = u.dim();
    if basis.rows() != n {
        return Err(Error::DimMismatch(format!(
            "basis of C^{} for a map on C^{n}",
            basis.rows()
        )));
    }
    let mut amps = vec![re(0.0); n * n];
    for k in 0..n {
        let phi = basis.column(k);
        let uphi = u.apply(&phi)?;
        for (i, a) in uphi.iter().enumerate() {
            for (j, b) in phi.iter().enumerate() {
                amps[i * n + j] += a * b;
            }
        }
    }
    let state = StateVector::new(vec![n, n], amps)?;
    Ok(MaxEntangledState {
        n,
        u: u.clone(),
        basis: basis.clone(),
        state,
    })
}

/// [`me_state`] in the computational basis.
pub fn me_state_canonical(u: &AntiUnitaryMap) -> MaxEntangledState {
    me_state(u, &CMatrix::identity(u.dim())).expect("identity basis is orthonormal")
}

/// `Ã = U A U⁻¹ = Ū·conj(A)·Ū†`, computed by direct conjugation.
pub fn tilde(a: &CMatrix, u: &AntiUnitaryMap) -> Result<CMatrix> {
    if !a.is_square() || a.rows() != u.dim() {
        return Err(Error::DimMismatch(format!(
            "{}x{} observable for a map on C^{}",
            a.rows(),
            a.cols(),
            u.dim()
        )));
    }
    let dev = a.hermitian_deviation();
    if dev > TOL {
        return Err(Error::NotHermitian(dev));
    }
    Ok(&(&u.ubar * &a.conj()) * &u.ubar.dagger())
}

/// `‖(Ã⊗I − I⊗A)ψ‖₂`
pub fn perfect_correlation_residual(s: &MaxEntangledState, a: &CMatrix) -> Result<f64> {
    let at = tilde(a, &s.u)?;
    let id = CMatrix::identity(s.n);
    let op = &tensor(&at, &id) - &tensor(&id, a);
    let v = s.state.apply(&op)?;
    Ok(crate::linalg::norm(&v))
}

/// `n^{-1/2} Σₙ |φₙ⟩ ⊗ C|φₙ⟩`, available when the map is an involution.
pub fn roles_swapped_state(s: &MaxEntangledState) -> Result<StateVector> {
    if !s.u.is_involution() {
        return Err(Error::NotInvolution);
    }
    let n = s.n;
    let mut amps = vec![re(0.0); n * n];
    for k in 0..n {
        let phi = s.basis.column(k);
        let cphi = s.u.apply(&phi)?;
        for (i, a) in phi.iter().enumerate() {
            for (j, b) in cphi.iter().enumerate() {
                amps[i * n + j] += a * b;
            }
        }
    }
    StateVector::new(vec![n, n], amps)
}

/// Exchanges the two factors of a bipartite state.
pub fn swap_subsystems(s: &StateVector) -> Result<StateVector> {
    let [d1, d2] = bipartite_dims(s)?;
    let mut amps = vec![re(0.0); d1 * d2];
    for i in 0..d1 {
        for j in 0..d2 {
            amps[j * d1 + i] = s.amps()[i * d2 + j];
        }
    }
    StateVector::new(vec![d2, d1], amps)
}

pub(crate) fn bipartite_dims(s: &StateVector) -> Result<[usize; 2]> {
    match s.dims() {
        &[a, b] => Ok([a, b]),
        other => Err(Error::DimMismatch(format!(
            "expected a bipartite state, got dims {other:?}"
        ))),
    }
}

/// Schmidt coefficients, descending, from the reduced density matrix of the
/// first factor.
pub fn schmidt_coefficients(s: &StateVector) -> Result<Vec<f64>> {
    let [d1, d2] = bipartite_dims(s)?;
    let psi = CMatrix::from_vec(d1, d2, s.amps().to_vec())?;
    let rho = &psi * &psi.dagger();
    let mut vals: Vec<f64> = hermitian_eig(&rho)?
        .values
        .into_iter()
        .map(|x| x.max(0.0).sqrt())
        .collect();
    vals.reverse();
    Ok(vals)
}

/// Summary of the numerical checks over a family of ME states.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub dim: usize,
    pub trials: usize,
    pub max_residual: f64,
    pub max_basis_invariance_residual: f64,
    pub max_eigenvalue_drift: f64,
}

/// Random maps, bases and observables at dimension `n`: perfect-correlation
/// residual, basis-invariance residual and `A`/`Ã` spectrum agreement.
pub fn verify_random<R: rand::Rng + ?Sized>(
    n: usize,
    trials: usize,
    rng: &mut R,
) -> Result<VerificationReport> {
    use crate::linalg::random;
    let mut max_residual: f64 = 0.0;
    let mut max_basis: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    for _ in 0..trials {
        let u = AntiUnitaryMap::new(random::unitary(n, rng))?;
        let canonical = me_state_canonical(&u);
        let a = random::hermitian(n, rng);
        max_residual = max_residual.max(perfect_correlation_residual(&canonical, &a)?);
        let rotated = me_state(&u, &random::unitary(n, rng))?;
        max_basis = max_basis.max(rotated.state.max_diff(&canonical.state));
        let ea = hermitian_eig(&a)?.values;
        let et = hermitian_eig(&tilde(&a, &u)?)?.values;
        for (x, y) in ea.iter().zip(&et) {
            max_drift = max_drift.max((x - y).abs());
        }
    }
    Ok(VerificationReport {
        dim: n,
        trials,
        max_residual,
        max_basis_invariance_residual: max_basis,
        max_eigenvalue_drift: max_drift,
    })
}

/// `⟨Uv, Uw⟩` vs `conj(⟨v, w⟩)`; returns the absolute discrepancy.
pub fn antiunitarity_defect(u: &AntiUnitaryMap, v: &[C64], w: &[C64]) -> Result<f64> {
    let uv = u.apply(v)?;
    let uw = u.apply(w)?;
    Ok((inner(&uv, &uw) - inner(v, w).conj()).norm())
}
