//! Bohmian trajectories through a Stern–Gerlach magnet, reduced to the
//! vertical coordinate.
//!
//! The spin-up component feels the potential `bias + gradient·z` and the
//! spin-down component its negative while the particle is inside the magnet
//! (`0 ≤ t ≤ t_exit`); afterwards both drift freely. A Gaussian stays
//! Gaussian under a linear potential, so both branches are evaluated in
//! closed form and only the guidance equation is integrated numerically.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{c, re, C64};
use crate::rng;
use crate::{Error, Result};

/// Densities below this are treated as a node of the wave function.
pub const NODE_DENSITY: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FieldConfig {
    /// Field-gradient coupling; the spin-up force is `−gradient`.
    pub gradient: f64,
    /// Uniform-field coupling; contributes only a phase.
    pub bias: f64,
    pub mass: f64,
    pub hbar: f64,
    /// Initial position spread: `|ψ₀|²` is `N(0, width²)`.
    pub width: f64,
    /// Time spent inside the magnet.
    pub t_exit: f64,
}

impl Default for FieldConfig {
    fn default() -> Self {
        Self {
            gradient: -5.0,
            bias: 0.0,
            mass: 1.0,
            hbar: 1.0,
            width: 1.0,
            t_exit: 1.0,
        }
    }
}

impl FieldConfig {
    /// Field increasing downward: spin-up is pushed up.
    pub fn experiment1() -> Self {
        Self::default()
    }

    /// Inverted field: spin-up is pushed down.
    pub fn experiment2() -> Self {
        Self {
            gradient: 5.0,
            ..Self::default()
        }
    }

    pub fn with_gradient(self, gradient: f64) -> Self {
        Self { gradient, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.mass > 0.0
            && self.hbar > 0.0
            && self.width > 0.0
            && self.t_exit >= 0.0
            && self.gradient.is_finite()
            && self.bias.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad field configuration {self:?}")))
        }
    }

    fn force(&self, spin: f64) -> f64 {
        -spin * self.gradient
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Component {
    /// `+1` for spin up, `−1` for spin down.
    pub spin: f64,
    pub weight: C64,
    pub center: f64,
    /// Wave number `k`; the mean velocity is `ħk/m`.
    pub momentum: f64,
    pub phase: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpinorPacket {
    pub t: f64,
    pub width0: f64,
    /// `s(t) = width0·√(1+τ²)`
    pub width: f64,
    /// `τ = ħt/(2m·width0²)`
    pub tau: f64,
    pub mass: f64,
    pub hbar: f64,
    pub components: [Component; 2],
}

impl SpinorPacket {
    /// Equal superposition of up and down with a common real Gaussian
    /// profile centered at 0.
    pub fn initial(f: &FieldConfig) -> Self {
        let w = re(std::f64::consts::FRAC_1_SQRT_2);
        let comp = |spin| Component {
            spin,
            weight: w,
            center: 0.0,
            momentum: 0.0,
            phase: 0.0,
        };
        Self {
            t: 0.0,
            width0: f.width,
            width: f.width,
            tau: 0.0,
            mass: f.mass,
            hbar: f.hbar,
            components: [comp(1.0), comp(-1.0)],
        }
    }

    pub fn up(&self) -> &Component {
        &self.components[0]
    }

    pub fn down(&self) -> &Component {
        &self.components[1]
    }

    /// `Σ|w|²`
    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.weight.norm_sqr()).sum()
    }

    fn log_gauss(&self, comp: &Component, z: f64) -> f64 {
        let s2 = self.width * self.width;
        let d = z - comp.center;
        comp.weight.norm_sqr().ln() - 0.5 * (2.0 * std::f64::consts::PI * s2).ln() - d * d / (2.0 * s2)
    }

    /// `|χ↑(z)|² + |χ↓(z)|²`
    pub fn density(&self, z: f64) -> f64 {
        self.components
            .iter()
            .map(|c| self.log_gauss(c, z).exp())
            .sum()
    }

    pub fn component_density(&self, k: usize, z: f64) -> f64 {
        self.log_gauss(&self.components[k], z).exp()
    }

    /// Complex amplitude of one spin component at `z`.
    pub fn amplitude(&self, k: usize, z: f64) -> C64 {
        let comp = &self.components[k];
        let one_i_tau = c(1.0, self.tau);
        let d = z - comp.center;
        let s0 = self.width0;
        let norm = (2.0 * std::f64::consts::PI * s0 * s0).powf(-0.25);
        let expo = -re(d * d) / (one_i_tau * (4.0 * s0 * s0)) + c(0.0, comp.momentum * d + comp.phase);
        comp.weight * norm * expo.exp() / one_i_tau.sqrt()
    }

    /// Velocity of the probability current of one component alone.
    pub fn component_velocity(&self, k: usize, z: f64) -> f64 {
        let comp = &self.components[k];
        let s0 = self.width0;
        let spread = (z - comp.center) * self.tau / (2.0 * s0 * s0 * (1.0 + self.tau * self.tau));
        self.hbar / self.mass * (comp.momentum + spread)
    }
}

/// Closed-form evolution of the t=0 packet `p0` to time `t`.
pub fn evolve_packet(p0: &SpinorPacket, f: &FieldConfig, t: f64) -> Result<SpinorPacket> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    f.validate()?;
    let (m, hbar) = (f.mass, f.hbar);
    let s0 = p0.width0;
    let tau = hbar * t / (2.0 * m * s0 * s0);
    let inside = t.min(f.t_exit);
    let drift = (t - f.t_exit).max(0.0);
    let mut comps = p0.components;
    for comp in comps.iter_mut() {
        let force = f.force(comp.spin);
        let p = force * inside;
        comp.momentum = p / hbar;
        comp.center = force * inside * inside / (2.0 * m) + p * drift / m;
        // Zeeman phase from the uniform part of the field
        comp.phase = -comp.spin * f.bias * inside / hbar;
    }
    Ok(SpinorPacket {
        t,
        width0: s0,
        width: s0 * (1.0 + tau * tau).sqrt(),
        tau,
        mass: m,
        hbar,
        components: comps,
    })
}

/// `(ħ/m)·Im[Σ χ_c* ∂χ_c / Σ |χ_c|²]`: the density-weighted mean of the
/// component velocities (distinct spin components do not interfere).
pub fn guidance_velocity(p: &SpinorPacket, z: f64) -> Result<f64> {
    Frame::new(p).velocity(z)
}

/// Per-time constants of the guidance field, so the integrator does no
/// logarithms in its inner loop.
#[derive(Clone, Copy, Debug)]
struct Frame {
    log_norm: [f64; 2],
    center: [f64; 2],
    inv_two_s2: f64,
    v0: [f64; 2],
    spread: f64,
    width: f64,
}

impl Frame {
    fn new(p: &SpinorPacket) -> Self {
        let s2 = p.width * p.width;
        let base = 0.5 * (2.0 * std::f64::consts::PI * s2).ln();
        let k = p.hbar / p.mass;
        let c = &p.components;
        Self {
            log_norm: [c[0].weight.norm_sqr().ln() - base, c[1].weight.norm_sqr().ln() - base],
            center: [c[0].center, c[1].center],
            inv_two_s2: 1.0 / (2.0 * s2),
            v0: [k * c[0].momentum, k * c[1].momentum],
            spread: k * p.tau / (2.0 * p.width0 * p.width0 * (1.0 + p.tau * p.tau)),
            width: p.width,
        }
    }

    fn velocity(&self, z: f64) -> Result<f64> {
        self.velocity_density(z).map(|(v, _)| v)
    }

    fn velocity_density(&self, z: f64) -> Result<(f64, f64)> {
        let d = [z - self.center[0], z - self.center[1]];
        let l = [
            self.log_norm[0] - d[0] * d[0] * self.inv_two_s2,
            self.log_norm[1] - d[1] * d[1] * self.inv_two_s2,
        ];
        let (top, rest) = if l[0] >= l[1] { (0, 1) } else { (1, 0) };
        let ratio = (l[rest] - l[top]).exp();
        let density = l[top].exp() * (1.0 + ratio);
        if !(density >= NODE_DENSITY) {
            return Err(Error::NodeRegion { z, density });
        }
        let v = |k: usize| self.v0[k] + d[k] * self.spread;
        Ok(((v(top) + ratio * v(rest)) / (1.0 + ratio), density))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Branch {
    Upper,
    Lower,
}

/// Reading of the apparatus: upper branch means spin up when the spin-up
/// force points up (`gradient < 0`) and spin down otherwise. Zero for a
/// field without gradient.
pub fn outcome(branch: Branch, f: &FieldConfig) -> i32 {
    let s = if f.gradient < 0.0 {
        1
    } else if f.gradient > 0.0 {
        -1
    } else {
        0
    };
    match branch {
        Branch::Upper => s,
        Branch::Lower => -s,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
    pub density: Vec<f64>,
    pub final_branch: Branch,
    pub outcome: i32,
    /// Steps at which `z` changed sign.
    pub crossings: usize,
}

struct Endpoint {
    z: f64,
    crossings: usize,
}

fn packet_at(p0: &SpinorPacket, f: &FieldConfig, t: f64) -> SpinorPacket {
    evolve_packet(p0, f, t).expect("t >= 0 and config validated")
}

fn check_run(z0: f64, f: &FieldConfig, dt: f64, t_total: f64) -> Result<()> {
    f.validate()?;
    if z0 == 0.0 || !z0.is_finite() {
        return Err(Error::InvalidInput(
            "z0 must be nonzero: the symmetry plane carries no trajectory".into(),
        ));
    }
    if !(dt > 0.0) || !(t_total >= 0.0) {
        return Err(Error::InvalidInput(format!("need dt > 0 and T >= 0, got {dt}, {t_total}")));
    }
    Ok(())
}

/// Guidance frames at every half step of a run; shared by all trajectories
/// of an ensemble.
struct Schedule {
    h: f64,
    frames: Vec<Frame>,
}

impl Schedule {
    fn new(f: &FieldConfig, dt: f64, t_total: f64) -> Self {
        let p0 = SpinorPacket::initial(f);
        let steps = (t_total / dt).round().max(0.0) as usize;
        let h = if steps == 0 { 0.0 } else { t_total / steps as f64 };
        let frames = (0..=2 * steps)
            .map(|j| Frame::new(&packet_at(&p0, f, j as f64 * h / 2.0)))
            .collect();
        Self { h, frames }
    }

    fn steps(&self) -> usize {
        self.frames.len() / 2
    }
}

/// RK4 on `dz/dt = v(z, t)`; `visit` sees every accepted state as
/// `(step, z, v, density)`.
fn integrate(z0: f64, sched: &Schedule, mut visit: impl FnMut(usize, f64, f64, f64)) -> Result<Endpoint> {
    let h = sched.h;
    let mut z = z0;
    let mut crossings = 0;
    let (v, rho) = sched.frames[0].velocity_density(z)?;
    visit(0, z, v, rho);
    for i in 0..sched.steps() {
        let (now, mid, end) = (&sched.frames[2 * i], &sched.frames[2 * i + 1], &sched.frames[2 * i + 2]);
        let k1 = now.velocity(z)?;
        let k2 = mid.velocity(z + h / 2.0 * k1)?;
        let k3 = mid.velocity(z + h / 2.0 * k2)?;
        let k4 = end.velocity(z + h * k3)?;
        let dz = h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if dz.abs() > now.width / 10.0 {
            return Err(Error::StepTooLarge { dz, width: now.width });
        }
        let next = z + dz;
        if next.signum() != z.signum() {
            crossings += 1;
        }
        z = next;
        let (v, rho) = end.velocity_density(z)?;
        visit(i + 1, z, v, rho);
    }
    Ok(Endpoint { z, crossings })
}

fn branch_of(z: f64, p: &SpinorPacket) -> Branch {
    let midpoint = 0.5 * (p.up().center + p.down().center);
    if z > midpoint {
        Branch::Upper
    } else {
        Branch::Lower
    }
}

/// Integrates the guidance equation from `z0` over `[0, t_total]`, recording
/// every step.
pub fn integrate_trajectory(z0: f64, f: &FieldConfig, dt: f64, t_total: f64) -> Result<Trajectory> {
    let (mut times, mut zs, mut vs, mut ds) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    check_run(z0, f, dt, t_total)?;
    let sched = Schedule::new(f, dt, t_total);
    let end = integrate(z0, &sched, |i, z, v, rho| {
        times.push(i as f64 * sched.h);
        zs.push(z);
        vs.push(v);
        ds.push(rho);
    })?;
    let last = packet_at(&SpinorPacket::initial(f), f, t_total);
    let final_branch = branch_of(end.z, &last);
    Ok(Trajectory {
        times,
        z: zs,
        v: vs,
        density: ds,
        final_branch,
        outcome: outcome(final_branch, f),
        crossings: end.crossings,
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EnsembleParams {
    pub n: usize,
    pub dt: f64,
    pub t_total: f64,
    pub bins: usize,
    pub seed: u64,
}

impl Default for EnsembleParams {
    fn default() -> Self {
        Self {
            n: 10_000,
            dt: 1e-3,
            t_total: 5.0,
            bins: 30,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivarianceReport {
    pub n: usize,
    pub upper_fraction: f64,
    pub upper_std_err: f64,
    /// `|upper_fraction − |w↑|²| ≤ 4σ`
    pub upper_within_4_sigma: bool,
    /// Total-variation distance between the endpoint histogram and the
    /// `|ψ_T|²` bin masses (mass outside the binned range forms one more
    /// bin).
    pub tv_distance: f64,
    pub crossings: usize,
    /// No gradient: the branches never separate.
    pub degenerate: bool,
    pub bin_edges: Vec<f64>,
    pub histogram: Vec<f64>,
    pub expected: Vec<f64>,
}

/// Composite Simpson rule with `m` (even) panels.
fn simpson(g: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let mut s = g(a) + g(b);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * g(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Samples `z0` from `|ψ₀|²`, integrates every trajectory, and compares the
/// branch frequencies and endpoint distribution with `|ψ_T|²`.
pub fn equivariance_check(f: &FieldConfig, params: &EnsembleParams) -> Result<EquivarianceReport> {
    f.validate()?;
    let EnsembleParams {
        n,
        dt,
        t_total,
        bins,
        seed,
    } = *params;
    if n < 100 {
        return Err(Error::InvalidInput(format!("ensemble of {n} is below 100")));
    }
    if bins == 0 {
        return Err(Error::InvalidInput("need at least one bin".into()));
    }
    check_run(1.0, f, dt, t_total)?;
    let sched = Schedule::new(f, dt, t_total);
    const CHUNK: usize = 256;
    let normal = Normal::new(0.0, f.width).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let endpoints: Vec<(f64, usize)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|ci| {
            let mut r = rng::stream(seed, ci as u64);
            let len = CHUNK.min(n - ci * CHUNK);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                let mut z0 = normal.sample(&mut r);
                while z0 == 0.0 {
                    z0 = normal.sample(&mut r);
                }
                let e = integrate(z0, &sched, |_, _, _, _| {})?;
                out.push((e.z, e.crossings));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    let last = packet_at(&SpinorPacket::initial(f), f, t_total);
    let upper = endpoints
        .iter()
        .filter(|(z, _)| branch_of(*z, &last) == Branch::Upper)
        .count();
    let crossings = endpoints.iter().map(|e| e.1).sum();
    let nf = n as f64;
    let upper_fraction = upper as f64 / nf;
    let p_up = last.up().weight.norm_sqr() / last.norm_sqr();
    let upper_std_err = (p_up * (1.0 - p_up) / nf).sqrt();

    let centers = [last.up().center, last.down().center];
    let lo = centers[0].min(centers[1]) - 4.0 * last.width;
    let hi = centers[0].max(centers[1]) + 4.0 * last.width;
    let bin_edges: Vec<f64> = (0..=bins)
        .map(|i| lo + (hi - lo) * i as f64 / bins as f64)
        .collect();
    let mut histogram = vec![0.0; bins + 1];
    for (z, _) in &endpoints {
        let k = if *z < lo || *z >= hi {
            bins
        } else {
            (((z - lo) / (hi - lo)) * bins as f64).floor().min(bins as f64 - 1.0) as usize
        };
        histogram[k] += 1.0 / nf;
    }
    let mut expected: Vec<f64> = bin_edges
        .windows(2)
        .map(|w| simpson(|z| last.density(z), w[0], w[1], 64))
        .collect();
    let inside: f64 = expected.iter().sum();
    expected.push((last.norm_sqr() - inside).max(0.0));
    let tv_distance = 0.5
        * histogram
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>();

    Ok(EquivarianceReport {
        n,
        upper_fraction,
        upper_std_err,
        upper_within_4_sigma: (upper_fraction - p_up).abs() <= 4.0 * upper_std_err,
        tv_distance,
        crossings,
        degenerate: f.gradient == 0.0,
        bin_edges,
        histogram,
        expected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn packet(f: &FieldConfig, t: f64) -> SpinorPacket {
        evolve_packet(&SpinorPacket::initial(f), f, t).unwrap()
    }

    #[test]
    fn initial_packet() {
        let f = FieldConfig::default();
        let p = SpinorPacket::initial(&f);
        assert!((p.norm_sqr() - 1.0).abs() < 1e-15);
        for z in [0.3, 1.1, 2.7] {
            assert_eq!(p.density(z), p.density(-z));
            assert_eq!(guidance_velocity(&p, z).unwrap(), 0.0);
        }
        let total = simpson(|z| p.density(z), -12.0, 12.0, 2000);
        assert!((total - 1.0).abs() < 1e-10);
    }

    #[test]
    fn no_gradient_only_spreads() {
        let f = FieldConfig::default().with_gradient(0.0);
        let p = packet(&f, 3.0);
        assert_eq!(p.up().center, 0.0);
        assert_eq!(p.down().center, 0.0);
        assert!(p.width > f.width);
    }

    #[test]
    fn mirror_centers() {
        for f in [FieldConfig::experiment1(), FieldConfig::experiment2()] {
            for k in 0..50 {
                let p = packet(&f, 0.1 * k as f64);
                assert_eq!(p.up().center, -p.down().center);
                assert_eq!(p.up().momentum, -p.down().momentum);
            }
        }
        let p = packet(&FieldConfig::experiment1(), 5.0);
        assert!(p.up().center > 0.0);
        assert!(packet(&FieldConfig::experiment2(), 5.0).up().center < 0.0);
    }

    #[test]
    fn ehrenfest_oracle() {
        // RK4 on z'' = F/m for the spin-up center
        let f = FieldConfig {
            gradient: -3.0,
            mass: 2.0,
            t_exit: 1.3,
            ..FieldConfig::default()
        };
        // the force switches off at t_exit, so each phase gets its own grid
        let rk4 = |z: &mut f64, v: &mut f64, a: f64, t_end: f64, steps: usize| {
            let h = t_end / steps as f64;
            for _ in 0..steps {
                let (k1z, k1v) = (*v, a);
                let (k2z, k2v) = (*v + h / 2.0 * k1v, a);
                let (k3z, k3v) = (*v + h / 2.0 * k2v, a);
                let (k4z, k4v) = (*v + h * k3v, a);
                *z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
                *v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            }
        };
        let (mut z, mut v) = (0.0, 0.0);
        rk4(&mut z, &mut v, -f.gradient / f.mass, f.t_exit, 13_000);
        rk4(&mut z, &mut v, 0.0, 2.7, 27_000);
        let t = f.t_exit + 2.7;
        let p = packet(&f, t);
        assert!((p.up().center - z).abs() < 1e-8, "{} vs {z}", p.up().center);
        assert!((p.up().momentum * f.hbar / f.mass - v).abs() < 1e-8);
    }

    #[test]
    fn velocity_matches_finite_difference_current() {
        let f = FieldConfig {
            bias: 0.7,
            ..FieldConfig::experiment2()
        };
        let p = packet(&f, 0.8);
        let h = 1e-6;
        for z in [-2.0, -0.4, 0.3, 1.5] {
            let mut num = 0.0;
            let mut den = 0.0;
            for k in 0..2 {
                let a = p.amplitude(k, z);
                let da = (p.amplitude(k, z + h) - p.amplitude(k, z - h)) / (2.0 * h);
                num += (a.conj() * da).im;
                den += a.norm_sqr();
            }
            let v_fd = f.hbar / f.mass * num / den;
            assert!((v_fd - guidance_velocity(&p, z).unwrap()).abs() < 1e-6);
            assert!((den - p.density(z)).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetry_plane_is_at_rest() {
        let f = FieldConfig::experiment1();
        for k in 0..50 {
            let p = packet(&f, 0.1 * k as f64);
            assert!(guidance_velocity(&p, 0.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn branch_velocity_late() {
        let f = FieldConfig::experiment1();
        let p = packet(&f, 5.0);
        let zc = p.up().center;
        let v = guidance_velocity(&p, zc).unwrap();
        let want = f.hbar * p.up().momentum / f.mass;
        assert!((v - want).abs() <= 0.01 * want.abs());
    }

    #[test]
    fn node_region() {
        let p = packet(&FieldConfig::default(), 0.0);
        assert!(matches!(guidance_velocity(&p, 60.0), Err(Error::NodeRegion { .. })));
    }

    #[test]
    fn rejects_bad_runs() {
        let f = FieldConfig::default();
        assert!(matches!(integrate_trajectory(0.0, &f, 1e-3, 1.0), Err(Error::InvalidInput(_))));
        assert!(matches!(integrate_trajectory(0.1, &f, 0.0, 1.0), Err(Error::InvalidInput(_))));
        assert_eq!(
            evolve_packet(&SpinorPacket::initial(&f), &f, -1.0).unwrap_err(),
            Error::NegativeTime(-1.0)
        );
        let err = integrate_trajectory(0.5, &f.with_gradient(-400.0), 0.05, 1.0).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }), "{err:?}");
    }

    #[test]
    fn contextual_outcomes() {
        let t1 = integrate_trajectory(0.3, &FieldConfig::experiment1(), 1e-3, 5.0).unwrap();
        let t2 = integrate_trajectory(0.3, &FieldConfig::experiment2(), 1e-3, 5.0).unwrap();
        assert_eq!(t1.final_branch, Branch::Upper);
        assert_eq!(t2.final_branch, Branch::Upper);
        assert_eq!((t1.outcome, t2.outcome), (1, -1));
        assert_eq!(t1.crossings + t2.crossings, 0);
        assert_eq!(t1.times.len(), 5001);
    }

    #[test]
    fn mirror_trajectories() {
        let f = FieldConfig::experiment2();
        let a = integrate_trajectory(0.8, &f, 1e-3, 2.0).unwrap();
        let b = integrate_trajectory(-0.8, &f, 1e-3, 2.0).unwrap();
        for (x, y) in a.z.iter().zip(&b.z) {
            assert!((x + y).abs() < 1e-8);
        }
        assert_eq!(a.outcome, -b.outcome);
    }

    #[test]
    fn small_ensemble() {
        let params = EnsembleParams {
            n: 400,
            dt: 5e-3,
            seed: 2,
            ..EnsembleParams::default()
        };
        let r = equivariance_check(&FieldConfig::experiment1(), &params).unwrap();
        assert_eq!(r.crossings, 0);
        assert!(r.upper_within_4_sigma);
        assert!(!r.degenerate);
        let total: f64 = r.expected.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        let flat = equivariance_check(&FieldConfig::default().with_gradient(0.0), &params).unwrap();
        assert!(flat.degenerate);
    }
}
