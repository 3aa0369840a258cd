//! Quantum and local-hidden-variable correlation functions and Bell's
//! inequality `|P(a,b) − P(a,c)| ≤ 1 + P(b,c)`.
//!
//! A hidden-variable strategy is a deterministic response `A(λ, d) = ±1` for
//! particle 1; particle 2 always answers `B(λ, d) = −A(λ, d)`, which is what
//! forces `P(a, a) = −1`. Correlations are Monte Carlo averages over `λ`
//! drawn from a [`LambdaDistribution`].

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{tensor, CMatrix, StateVector};
use crate::rng::{self, StreamRng};
use crate::spin::Direction;
use crate::{Error, Result};

/// Default Monte Carlo sample count.
pub const DEFAULT_SAMPLES: usize = 100_000;
/// Tolerance on the analytic violation flag.
pub const ANALYTIC_TOL: f64 = 1e-12;
/// Sampled violations must exceed this many standard errors.
pub const SAMPLED_SIGMAS: f64 = 4.0;

const CHUNK: usize = 4096;

pub type Vec3 = [f64; 3];

/// `⟨ψ|(a1⊗a2)|ψ⟩` for a bipartite state.
pub fn quantum_correlation(s: &StateVector, a1: &CMatrix, a2: &CMatrix) -> Result<f64> {
    let [d1, d2] = crate::entangle::bipartite_dims(s)?;
    if a1.rows() != d1 || a2.rows() != d2 || !a1.is_square() || !a2.is_square() {
        return Err(Error::DimMismatch(format!(
            "operators {}x{} and {}x{} on subsystems {d1} and {d2}",
            a1.rows(),
            a1.cols(),
            a2.rows(),
            a2.cols()
        )));
    }
    let v = s.expectation(&tensor(a1, a2))?;
    if v.im.abs() > 1e-10 {
        return Err(Error::NonrealExpectation(v.im));
    }
    Ok(v.re)
}

/// `P(a,b)` for the spin singlet with Pauli-normalized spin components.
pub fn singlet_correlation(a: &Direction, b: &Direction) -> f64 {
    use crate::spin::{sigma, singlet};
    quantum_correlation(&singlet(), &sigma(a), &sigma(b)).expect("2x2 operators on a 2x2 state")
}

type ResponseFn = dyn Fn(&Vec3, &Vec3) -> bool + Send + Sync;

/// Deterministic local response for particle 1: `true` means `+1`.
#[derive(Clone)]
pub struct LhvStrategy {
    name: String,
    respond: Arc<ResponseFn>,
}

impl fmt::Debug for LhvStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LhvStrategy").field("name", &self.name).finish()
    }
}

impl LhvStrategy {
    pub fn new(
        name: impl Into<String>,
        respond: impl Fn(&Vec3, &Vec3) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            respond: Arc::new(respond),
        }
    }

    /// `A(λ, d) = sgn(λ·d)`, with `sgn(0) = +1`.
    pub fn sign_model() -> Self {
        Self::new("sign", |l, d| l[0] * d[0] + l[1] * d[1] + l[2] * d[2] >= 0.0)
    }

    /// `A ≡ +1`.
    pub fn constant() -> Self {
        Self::new("const", |_, _| true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Particle 1's answer, `±1`.
    pub fn a(&self, lambda: &Vec3, d: &Vec3) -> f64 {
        if (self.respond)(lambda, d) {
            1.0
        } else {
            -1.0
        }
    }

    /// Particle 2's answer, always `−A`.
    pub fn b(&self, lambda: &Vec3, d: &Vec3) -> f64 {
        -self.a(lambda, d)
    }
}

type SamplerFn = dyn Fn(&mut StreamRng) -> Vec3 + Send + Sync;
type DensityFn = dyn Fn(&Vec3) -> f64 + Send + Sync;

/// Distribution of the hidden variable over the unit sphere.
#[derive(Clone)]
pub struct LambdaDistribution {
    sampler: Arc<SamplerFn>,
    density: Arc<DensityFn>,
}

impl fmt::Debug for LambdaDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LambdaDistribution")
    }
}

impl Default for LambdaDistribution {
    fn default() -> Self {
        Self::uniform_sphere()
    }
}

impl LambdaDistribution {
    /// `sampler` must draw from the distribution whose surface density
    /// (with respect to solid angle) is `density`.
    pub fn new(
        sampler: impl Fn(&mut StreamRng) -> Vec3 + Send + Sync + 'static,
        density: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            sampler: Arc::new(sampler),
            density: Arc::new(density),
        }
    }

    pub fn uniform_sphere() -> Self {
        Self::new(
            |rng| loop {
                let v: Vec3 = [
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                ];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n > 1e-12 {
                    return [v[0] / n, v[1] / n, v[2] / n];
                }
            },
            |_| 1.0 / (4.0 * PI),
        )
    }

    pub fn sample(&self, rng: &mut StreamRng) -> Vec3 {
        (self.sampler)(rng)
    }

    pub fn density(&self, lambda: &Vec3) -> f64 {
        (self.density)(lambda)
    }
}

/// A Monte Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: usize,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    n: usize,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(self, o: Moments) -> Moments {
        Moments {
            n: self.n + o.n,
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
        }
    }

    fn estimate(self) -> Estimate {
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 {
            ((self.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            std_err: (var / n).sqrt(),
            samples: self.n,
        }
    }
}

/// Runs `per_sample` over `n` λ-draws split into fixed-size chunks, each on
/// its own RNG stream; chunk results are merged in chunk order.
fn sample_chunks<const K: usize>(
    dist: &LambdaDistribution,
    n: usize,
    seed: u64,
    per_sample: impl Fn(&Vec3) -> [f64; K] + Sync,
) -> [Moments; K] {
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<[Moments; K]> = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = rng::stream(seed, ci as u64);
            let len = CHUNK.min(n - ci * CHUNK);
            let mut m = [Moments::default(); K];
            for _ in 0..len {
                let lambda = dist.sample(&mut rng);
                let xs = per_sample(&lambda);
                for (mk, x) in m.iter_mut().zip(xs) {
                    mk.push(x);
                }
            }
            m
        })
        .collect();
    partial
        .into_iter()
        .fold([Moments::default(); K], |acc, p| {
            let mut out = acc;
            for k in 0..K {
                out[k] = acc[k].merge(p[k]);
            }
            out
        })
}

/// Monte Carlo estimate of `P(a,b) = ∫ρ(λ) A(λ,a) B(λ,b) dλ`.
///
/// Deterministic for a fixed seed. When `a == b` every term is `−A² = −1`,
/// so the estimate is exactly `−1` with zero standard error.
pub fn lhv_correlation(
    strat: &LhvStrategy,
    dist: &LambdaDistribution,
    a: &Direction,
    b: &Direction,
    n: usize,
    seed: u64,
) -> Result<Estimate> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let (va, vb) = (a.vector(), b.vector());
    let [m] = sample_chunks(dist, n, seed, |l| [strat.a(l, &va) * strat.b(l, &vb)]);
    Ok(m.estimate())
}

/// The three correlations of one Bell triple on a common set of λ draws,
/// plus the intermediate bound `∫ρ[1 − A(λ,b)A(λ,c)]`.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BellTerms {
    pub p_ab: Estimate,
    pub p_ac: Estimate,
    pub p_bc: Estimate,
    pub intermediate_bound: f64,
}

pub fn lhv_bell_terms(
    strat: &LhvStrategy,
    dist: &LambdaDistribution,
    a: &Direction,
    b: &Direction,
    c: &Direction,
    n: usize,
    seed: u64,
) -> Result<BellTerms> {
    if n == 0 {
        return Err(Error::InvalidInput("sample count must be at least 1".into()));
    }
    let (va, vb, vc) = (a.vector(), b.vector(), c.vector());
    let [ab, ac, bc, bound] = sample_chunks(dist, n, seed, |l| {
        let (aa, ab, ac) = (strat.a(l, &va), strat.a(l, &vb), strat.a(l, &vc));
        [
            aa * strat.b(l, &vb),
            aa * strat.b(l, &vc),
            ab * strat.b(l, &vc),
            1.0 - ab * ac,
        ]
    });
    Ok(BellTerms {
        p_ab: ab.estimate(),
        p_ac: ac.estimate(),
        p_bc: bc.estimate(),
        intermediate_bound: bound.estimate().mean,
    })
}

/// Closed form of the sign model on a uniform sphere: `2θ/π − 1`.
pub fn sign_model_correlation(a: &Direction, b: &Direction) -> f64 {
    let theta = a.dot(b).clamp(-1.0, 1.0).acos();
    2.0 * theta / PI - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BellCheck {
    /// `|P(a,b) − P(a,c)|`
    pub lhs: f64,
    /// `1 + P(b,c)`
    pub rhs: f64,
    pub margin: f64,
    pub violated: bool,
}

/// Evaluates Bell's inequality for an exact correlation function.
pub fn bell_inequality(
    p: impl Fn(&Direction, &Direction) -> f64,
    a: &Direction,
    b: &Direction,
    c: &Direction,
) -> BellCheck {
    let lhs = (p(a, b) - p(a, c)).abs();
    let rhs = 1.0 + p(b, c);
    BellCheck {
        lhs,
        rhs,
        margin: lhs - rhs,
        violated: lhs > rhs + ANALYTIC_TOL,
    }
}

/// Bell check on sampled correlations: violated only if `lhs − rhs` exceeds
/// four combined standard errors.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct SampledBellCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub sigma: f64,
    pub violated: bool,
}

pub fn bell_inequality_sampled(p_ab: Estimate, p_ac: Estimate, p_bc: Estimate) -> SampledBellCheck {
    let lhs = (p_ab.mean - p_ac.mean).abs();
    let rhs = 1.0 + p_bc.mean;
    let sigma = (p_ab.std_err.powi(2) + p_ac.std_err.powi(2) + p_bc.std_err.powi(2)).sqrt();
    SampledBellCheck {
        lhs,
        rhs,
        margin: lhs - rhs,
        sigma,
        violated: lhs - rhs > SAMPLED_SIGMAS * sigma,
    }
}

/// One grid point of a coplanar scan (angles in degrees, x–y plane).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_c: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
}

/// A correlation function tabulated on a regular grid of in-plane azimuths.
pub struct CoplanarTable {
    pub grid_deg: f64,
    angles: Vec<f64>,
    table: Vec<f64>,
}

impl CoplanarTable {
    pub fn new(p: impl Fn(&Direction, &Direction) -> f64 + Sync, grid_deg: f64) -> Result<Self> {
        if !(grid_deg > 0.0 && grid_deg <= 180.0) {
            return Err(Error::InvalidInput(format!(
                "grid spacing {grid_deg} deg not in (0, 180]"
            )));
        }
        let m = (360.0 / grid_deg).round() as usize;
        let angles: Vec<f64> = (0..m).map(|i| i as f64 * grid_deg).collect();
        let dirs: Vec<Direction> = angles.iter().map(|&a| Direction::in_plane_deg(a)).collect();
        let table: Vec<f64> = (0..m * m)
            .into_par_iter()
            .map(|k| p(&dirs[k / m], &dirs[k % m]))
            .collect();
        Ok(Self {
            grid_deg,
            angles,
            table,
        })
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    fn p(&self, i: usize, j: usize) -> f64 {
        self.table[i * self.angles.len() + j]
    }

    pub fn row(&self, i: usize, j: usize, k: usize) -> ScanRow {
        let lhs = (self.p(i, j) - self.p(i, k)).abs();
        let rhs = 1.0 + self.p(j, k);
        ScanRow {
            phi_a: self.angles[i],
            phi_b: self.angles[j],
            phi_c: self.angles[k],
            lhs,
            rhs,
            margin: lhs - rhs,
        }
    }

    /// Visits every ordered triple in lexicographic order.
    pub fn for_each(&self, mut f: impl FnMut(ScanRow)) {
        let m = self.len();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    f(self.row(i, j, k));
                }
            }
        }
    }

    /// Grid triple with the largest margin (first in lexicographic order on
    /// ties).
    pub fn best(&self) -> ScanRow {
        let m = self.len();
        let per_a: Vec<ScanRow> = (0..m)
            .into_par_iter()
            .map(|i| {
                let mut best = self.row(i, 0, 0);
                for j in 0..m {
                    for k in 0..m {
                        let r = self.row(i, j, k);
                        if r.margin > best.margin {
                            best = r;
                        }
                    }
                }
                best
            })
            .collect();
        per_a
            .into_iter()
            .reduce(|best, r| if r.margin > best.margin { r } else { best })
            .expect("nonempty grid")
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ViolationSearch {
    pub grid_deg: f64,
    pub grid_best: ScanRow,
    pub best: ScanRow,
}

/// Coarse coplanar grid search followed (optionally) by a compass search on
/// the three azimuths, step halving down to 1e-7 degrees.
///
/// Refinement only accepts strict improvements, so the refined margin is
/// never below the grid margin. Leave `refine` off for noisy correlations.
pub fn maximize_violation(
    p: impl Fn(&Direction, &Direction) -> f64 + Sync,
    grid_deg: f64,
    refine: bool,
) -> Result<ViolationSearch> {
    let table = CoplanarTable::new(&p, grid_deg)?;
    let grid_best = table.best();
    let mut best = grid_best;
    if refine {
        let eval = |x: [f64; 3]| {
            let [a, b, c] = x.map(Direction::in_plane_deg);
            let chk = bell_inequality(&p, &a, &b, &c);
            ScanRow {
                phi_a: x[0].rem_euclid(360.0),
                phi_b: x[1].rem_euclid(360.0),
                phi_c: x[2].rem_euclid(360.0),
                lhs: chk.lhs,
                rhs: chk.rhs,
                margin: chk.margin,
            }
        };
        let mut x = [best.phi_a, best.phi_b, best.phi_c];
        let mut step = grid_deg / 2.0;
        while step > 1e-7 {
            let mut improved = false;
            for axis in 0..3 {
                for sgn in [1.0, -1.0] {
                    let mut y = x;
                    y[axis] += sgn * step;
                    let r = eval(y);
                    if r.margin > best.margin {
                        best = r;
                        x = y;
                        improved = true;
                    }
                }
            }
            if !improved {
                step /= 2.0;
            }
        }
    }
    Ok(ViolationSearch {
        grid_deg,
        grid_best,
        best,
    })
}
