//! Density-matrix reconstruction from a linear expectation functional, and
//! the value-map cases where linearity cannot hold.

use rand::Rng;
use serde::Serialize;

use crate::linalg::{hermitian_eig, random, re, CMatrix, C64};
use crate::rng;
use crate::{Error, Result};

pub const ROUNDTRIP_TRIALS: usize = 20;
pub const VN_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct VnReport {
    pub density: CMatrix,
    /// Largest `|e(O) − Tr(U O)|` over the random test operators.
    pub roundtrip_error: f64,
    pub trace: C64,
    /// `Some(ok)` when `e(I) = 1`, so the trace condition applies.
    pub trace_ok: Option<bool>,
    /// Smallest `e(|χ⟩⟨χ|)` over sampled unit vectors.
    pub min_projection_value: f64,
    /// Smallest eigenvalue of the Hermitian part of `U`.
    pub min_eigenvalue: f64,
    /// `Some(ok)` when `e` was nonnegative on every sampled projection.
    pub positive: Option<bool>,
}

fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = re(1.0);
    m
}

/// Builds `U` with `U[n,m] = e(|m⟩⟨n|)` and checks that `e(O) = Tr(U O)`
/// on random operators, that `Tr U = 1` when `e(I) = 1`, and that `U` is
/// positive when `e` is nonnegative on projections.
pub fn vn_reconstruct(n: usize, e: &dyn Fn(&CMatrix) -> C64, seed: u64) -> Result<VnReport> {
    if n == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let density = CMatrix::from_fn(n, n, |row, col| e(&matrix_unit(n, col, row)));
    let mut rng = rng::stream(seed, 0);

    let mut roundtrip_error: f64 = 0.0;
    for _ in 0..ROUNDTRIP_TRIALS {
        let o = CMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let direct = e(&o);
        let via = (&density * &o).trace();
        let err = (direct - via).norm();
        if err > VN_TOL * direct.norm().max(1.0) {
            return Err(Error::NonlinearFunctional(err));
        }
        roundtrip_error = roundtrip_error.max(err);
    }

    let trace = density.trace();
    let trace_ok = ((e(&CMatrix::identity(n)) - re(1.0)).norm() <= VN_TOL)
        .then(|| (trace - re(1.0)).norm() <= VN_TOL);

    let mut min_projection_value = f64::INFINITY;
    let mut probes: Vec<Vec<C64>> = (0..n)
        .map(|k| (0..n).map(|i| re(if i == k { 1.0 } else { 0.0 })).collect())
        .collect();
    for _ in 0..ROUNDTRIP_TRIALS {
        probes.push(random::state(vec![n], &mut rng).amps().to_vec());
    }
    for chi in &probes {
        let v = e(&CMatrix::outer(chi, chi)).re;
        min_projection_value = min_projection_value.min(v);
    }
    let herm = (&density + &density.dagger()).scale(re(0.5));
    let min_eigenvalue = hermitian_eig(&herm)?.values[0];
    let positive = (min_projection_value >= -VN_TOL).then_some(min_eigenvalue >= -VN_TOL);

    Ok(VnReport {
        density,
        roundtrip_error,
        trace,
        trace_ok,
        min_projection_value,
        min_eigenvalue,
        positive,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpinLinearityRow {
    pub v_sx: f64,
    pub v_sy: f64,
    /// `(v(σx) + v(σy))/√2`, the value linearity would force on `σ'`.
    pub needed: f64,
    /// Eigenvalues of `σ'` equal to `needed`.
    pub satisfied_by: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct OscillatorSample {
    pub a: f64,
    pub v_p2: f64,
    pub v_q2: f64,
    /// `(v(p²) + a² v(q²)) / (aħ)`; a legal value of `H` needs an odd integer.
    pub ratio: f64,
    pub odd_integer: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LinearityReport {
    pub spin_rows: Vec<SpinLinearityRow>,
    pub spin_satisfying: usize,
    pub spin_candidates: usize,
    /// First levels of `H = p² + a²q²` in units of `aħ`.
    pub oscillator_levels: Vec<f64>,
    pub oscillator_samples: Vec<OscillatorSample>,
    pub oscillator_failures: usize,
}

fn is_odd_integer(x: f64) -> bool {
    let r = x.round();
    (x - r).abs() <= 1e-9 && (r as i64).rem_euclid(2) == 1
}

pub fn oscillator_sample(a: f64, v_p2: f64, v_q2: f64, hbar: f64) -> OscillatorSample {
    let ratio = (v_p2 + a * a * v_q2) / (a * hbar);
    OscillatorSample {
        a,
        v_p2,
        v_q2,
        ratio,
        odd_integer: is_odd_integer(ratio),
    }
}

/// Spin case: every ±1 assignment to `σx`, `σy` checked against the two
/// eigenvalues of `σ' = (σx + σy)/√2`. Oscillator case: random positive `a`
/// and nonnegative values for `p²`, `q²` (with `ħ = 1`), plus the zero
/// assignment.
pub fn linearity_counterexamples(samples: usize, seed: u64) -> LinearityReport {
    let eig_sigma_prime = [-1.0, 1.0];
    let mut spin_rows = Vec::new();
    for v_sx in [1.0, -1.0] {
        for v_sy in [1.0, -1.0] {
            let needed = (v_sx + v_sy) / std::f64::consts::SQRT_2;
            let satisfied_by = eig_sigma_prime
                .iter()
                .copied()
                .filter(|&s: &f64| (s - needed).abs() <= 1e-12)
                .collect();
            spin_rows.push(SpinLinearityRow {
                v_sx,
                v_sy,
                needed,
                satisfied_by,
            });
        }
    }
    let spin_satisfying = spin_rows.iter().map(|r| r.satisfied_by.len()).sum();

    let mut rng = rng::stream(seed, 0);
    let mut oscillator_samples = vec![oscillator_sample(1.0, 0.0, 0.0, 1.0)];
    for _ in 0..samples {
        let a = rng.random_range(0.1..10.0);
        let vp: f64 = rng.random_range(0.0..20.0);
        let vq: f64 = rng.random_range(0.0..20.0);
        oscillator_samples.push(oscillator_sample(a, vp, vq, 1.0));
    }
    let oscillator_failures = oscillator_samples.iter().filter(|s| !s.odd_integer).count();

    LinearityReport {
        spin_rows,
        spin_satisfying,
        spin_candidates: 4 * eig_sigma_prime.len(),
        oscillator_levels: (0..8).map(|k| (2 * k + 1) as f64).collect(),
        oscillator_samples,
        oscillator_failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;

    #[test]
    fn pure_state_roundtrip() {
        let mut r = rng::stream(5, 1);
        for n in [2, 3, 5] {
            let psi = random::state(vec![n], &mut r);
            let a = psi.amps().to_vec();
            let e = move |o: &CMatrix| inner(&a, &o.mul_vec(&a).unwrap());
            let rep = vn_reconstruct(n, &e, 9).unwrap();
            let want = CMatrix::outer(psi.amps(), psi.amps());
            assert!(rep.density.max_diff(&want) < 1e-10);
            assert!(rep.roundtrip_error < 1e-10);
            assert_eq!(rep.trace_ok, Some(true));
            assert_eq!(rep.positive, Some(true));
        }
    }

    #[test]
    fn maximally_mixed() {
        let n = 4;
        let e = |o: &CMatrix| o.trace() / n as f64;
        let rep = vn_reconstruct(n, &e, 1).unwrap();
        assert!(rep.density.max_diff(&CMatrix::identity(n).scale(re(0.25))) < 1e-12);
        assert_eq!(rep.trace_ok, Some(true));
    }

    #[test]
    fn nonlinear_functional_rejected() {
        let e = |o: &CMatrix| re(o[(0, 0)].norm_sqr());
        assert!(matches!(
            vn_reconstruct(2, &e, 0),
            Err(Error::NonlinearFunctional(_))
        ));
    }

    #[test]
    fn unnormalized_skips_trace_check() {
        let e = |o: &CMatrix| o.trace() * 2.0;
        let rep = vn_reconstruct(2, &e, 0).unwrap();
        assert_eq!(rep.trace_ok, None);
        assert!((rep.trace - re(4.0)).norm() < 1e-12);
    }

    #[test]
    fn counterexamples() {
        let r = linearity_counterexamples(200, 3);
        assert_eq!(r.spin_satisfying, 0);
        assert_eq!(r.spin_candidates, 8);
        assert!((r.spin_rows[0].needed - std::f64::consts::SQRT_2).abs() < 1e-15);
        let zero = &r.oscillator_samples[0];
        assert_eq!(zero.ratio, 0.0);
        assert!(!zero.odd_integer);
        assert_eq!(r.oscillator_failures, r.oscillator_samples.len());
        assert_eq!(r.oscillator_levels[..4], [1.0, 3.0, 5.0, 7.0]);
        assert!(is_odd_integer(3.0) && is_odd_integer(-1.0) && !is_odd_integer(2.0));
    }
}
