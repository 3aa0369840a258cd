//! Born-rule measurement simulation and the nonlocality demonstrations built
//! on maximally entangled states.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contextuality::joint::{joint_spectrum, tuples_close, CommutingSet, JointEigenspace};
use crate::contextuality::ks::{build_triad_graph, ks_color, ks_color_parallel, KsOutcome, Vec3, ORTHO_TOL};
use crate::contextuality::mermin::{commuting_sets_mermin, mermin_check, MerminObservables};
use crate::entangle::{me_state_canonical, perfect_correlation_residual, tilde, AntiUnitaryMap};
use crate::linalg::{inner, re, tensor, CMatrix, StateVector, C64};
use crate::rng::{self, StreamRng};
use crate::spin::{sigma, spin1_squared, Direction};
use crate::{Error, Result};

/// Trials per RNG stream in parallel sampling loops.
const CHUNK: usize = 4096;

#[derive(Clone, Debug)]
pub struct MeasurementOutcome {
    pub values: Vec<f64>,
    pub post_state: StateVector,
}

/// A commuting set prepared for repeated measurement: its joint eigenspaces.
#[derive(Clone, Debug)]
pub struct JointMeasurement {
    pub labels: Vec<String>,
    pub spaces: Vec<JointEigenspace>,
    dim: usize,
}

impl JointMeasurement {
    pub fn new(cs: &CommutingSet) -> Result<Self> {
        Ok(Self {
            labels: cs.labels.clone(),
            spaces: joint_spectrum(cs)?,
            dim: cs.dim(),
        })
    }

    fn check_dim(&self, s: &StateVector) -> Result<()> {
        if s.dim() != self.dim {
            return Err(Error::DimMismatch(format!(
                "state of dimension {} measured with {}x{} operators",
                s.dim(),
                self.dim,
                self.dim
            )));
        }
        Ok(())
    }

    /// Born weights `⟨ψ|P_a|ψ⟩`, one per joint eigenspace.
    pub fn probabilities(&self, s: &StateVector) -> Result<Vec<f64>> {
        self.check_dim(s)?;
        let psi = s.amps();
        Ok(self
            .spaces
            .iter()
            .map(|js| {
                (0..js.basis.cols())
                    .map(|k| inner(&js.basis.column(k), psi).norm_sqr())
                    .sum()
            })
            .collect())
    }

    /// Inverse-CDF draw from `probs`; zero-weight entries are never chosen.
    pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> Result<usize> {
        let total: f64 = probs.iter().sum();
        if !(total > 1e-300) {
            return Err(Error::ZeroState);
        }
        let u = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (k, &p) in probs.iter().enumerate() {
            if p <= 0.0 {
                continue;
            }
            acc += p;
            last = k;
            if u < acc {
                return Ok(k);
            }
        }
        Ok(last)
    }

    /// `P_a ψ / ‖P_a ψ‖`
    pub fn project(&self, k: usize, s: &StateVector) -> Result<StateVector> {
        self.check_dim(s)?;
        let js = &self.spaces[k];
        let coeffs: Vec<C64> = (0..js.basis.cols())
            .map(|c| inner(&js.basis.column(c), s.amps()))
            .collect();
        let amps = js.basis.mul_vec(&coeffs)?;
        StateVector::new(s.dims().to_vec(), amps)
    }

    pub fn sample<R: Rng + ?Sized>(&self, s: &StateVector, rng: &mut R) -> Result<MeasurementOutcome> {
        let probs = self.probabilities(s)?;
        let k = Self::sample_index(&probs, rng)?;
        Ok(MeasurementOutcome {
            values: self.spaces[k].values.clone(),
            post_state: self.project(k, s)?,
        })
    }
}

/// One Born-rule measurement of a commuting set.
pub fn sample_joint_outcome(
    s: &StateVector,
    cs: &CommutingSet,
    rng: &mut StreamRng,
) -> Result<MeasurementOutcome> {
    JointMeasurement::new(cs)?.sample(s, rng)
}

/// Measures the inputs of the set's derivation jointly and assigns the
/// derived member its value through the derivation, so the relation holds
/// on every trial by construction.
pub fn product_procedure_measure(
    s: &StateVector,
    cs: &CommutingSet,
    rng: &mut StreamRng,
) -> Result<MeasurementOutcome> {
    let d = cs
        .derivation
        .as_ref()
        .ok_or_else(|| Error::InvalidInput(format!("set {} has no derived member", cs.name)))?;
    let members: Vec<(String, CMatrix)> = d
        .inputs
        .iter()
        .map(|&i| (cs.labels[i].clone(), cs.ops[i].clone()))
        .collect();
    let sub = CommutingSet::new(format!("{}-inputs", cs.name), members)?;
    let inner_outcome = JointMeasurement::new(&sub)?.sample(s, rng)?;
    let derived = d.evaluate(&inner_outcome.values);
    let mut values = vec![0.0; cs.len()];
    for (slot, &i) in d.inputs.iter().enumerate() {
        values[i] = inner_outcome.values[slot];
    }
    values[d.target] = derived;
    // members outside the derivation keep their joint value with the inputs
    for i in 0..cs.len() {
        if i != d.target && !d.inputs.contains(&i) {
            let v = inner_outcome.post_state.expectation(&cs.ops[i])?;
            values[i] = v.re;
        }
    }
    Ok(MeasurementOutcome {
        values,
        post_state: inner_outcome.post_state,
    })
}

// ---- embedded observables ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EmbedMap {
    Plain,
    /// Template conjugated by the singlet anti-unitary map before embedding.
    TildePartner,
}

/// An operator on `C^N` that acts as `template` on the span of `block` and
/// as zero on its orthogonal complement.
#[derive(Clone, Debug)]
pub struct EmbeddedObservable {
    pub op: CMatrix,
    pub block: Vec<usize>,
    pub template: CMatrix,
}

impl EmbeddedObservable {
    /// Projector onto the block.
    pub fn block_projector(&self) -> CMatrix {
        block_projector(self.op.rows(), &self.block).expect("validated at construction")
    }
}

fn check_block(n: usize, block: &[usize]) -> Result<()> {
    let bad = block.iter().any(|&i| i >= n)
        || (0..block.len()).any(|i| block[i + 1..].contains(&block[i]));
    if bad || block.is_empty() {
        return Err(Error::BadIndices(format!("block {block:?} in dimension {n}")));
    }
    Ok(())
}

pub fn block_projector(n: usize, block: &[usize]) -> Result<CMatrix> {
    check_block(n, block)?;
    let mut p = CMatrix::zeros(n, n);
    for &i in block {
        p[(i, i)] = re(1.0);
    }
    Ok(p)
}

pub fn embed(n: usize, block: &[usize], template: &CMatrix) -> Result<EmbeddedObservable> {
    check_block(n, block)?;
    if template.rows() != block.len() || !template.is_square() {
        return Err(Error::DimMismatch(format!(
            "{}x{} template for a block of {}",
            template.rows(),
            template.cols(),
            block.len()
        )));
    }
    let mut op = CMatrix::zeros(n, n);
    for (a, &i) in block.iter().enumerate() {
        for (b, &j) in block.iter().enumerate() {
            op[(i, j)] = template[(a, b)];
        }
    }
    Ok(EmbeddedObservable {
        op,
        block: block.to_vec(),
        template: template.clone(),
    })
}

pub fn embed_spin_half(
    n: usize,
    block: [usize; 2],
    d: &Direction,
    which: EmbedMap,
) -> Result<EmbeddedObservable> {
    if n < 2 {
        return Err(Error::BadIndices(format!("dimension {n} has no 2-dimensional block")));
    }
    let s = sigma(d);
    let template = match which {
        EmbedMap::Plain => s,
        EmbedMap::TildePartner => tilde(&s, &AntiUnitaryMap::singlet_map())?,
    };
    embed(n, &block, &template)
}

pub fn embed_spin1_squared(n: usize, block: [usize; 3], d: &Direction) -> Result<EmbeddedObservable> {
    embed(n, &block, &spin1_squared(d))
}

/// `(|01⟩ − |10⟩ + Σ_{k≥2} |kk⟩)/√N` on `C^N ⊗ C^N`.
pub fn bellext_state(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("dimension {n} is below 2")));
    }
    let mut amps = vec![re(0.0); n * n];
    amps[1] = re(1.0);
    amps[n] = re(-1.0);
    for k in 2..n {
        amps[k * n + k] = re(1.0);
    }
    StateVector::new(vec![n, n], amps)
}

// ---- conditional correlation ----

#[derive(Clone, Debug, Serialize)]
pub struct ConditionalEstimate {
    pub estimate: f64,
    pub std_err: f64,
    pub kept: usize,
    pub trials: usize,
    pub keep_fraction: f64,
    /// `⟨ψ|P⁽¹⁾P⁽²⁾|ψ⟩`
    pub keep_probability: f64,
    /// `⟨ψ|ξ⁽¹⁾ξ⁽²⁾|ψ⟩ / ⟨ψ|P⁽¹⁾P⁽²⁾|ψ⟩`
    pub analytic: f64,
}

/// Samples the joint measurement of `{ξ⁽¹⁾(a), P⁽¹⁾}` on the first factor and
/// `{ξ⁽²⁾(b), P⁽²⁾}` on the second, discards trials where either projector
/// reads 0, and averages `ξ⁽¹⁾ξ⁽²⁾` over the first `kept` surviving trials.
pub fn conditional_correlation(
    s: &StateVector,
    a: &Direction,
    b: &Direction,
    blocks: ([usize; 2], [usize; 2]),
    kept: usize,
    seed: u64,
) -> Result<ConditionalEstimate> {
    let n = match s.dims() {
        &[x, y] if x == y && x >= 2 => x,
        other => {
            return Err(Error::DimMismatch(format!(
                "expected dims (N, N) with N >= 2, got {other:?}"
            )))
        }
    };
    if kept == 0 {
        return Err(Error::InvalidInput("kept trial count must be at least 1".into()));
    }
    let id = CMatrix::identity(n);
    let xi1 = embed_spin_half(n, blocks.0, a, EmbedMap::Plain)?;
    let xi2 = embed_spin_half(n, blocks.1, b, EmbedMap::Plain)?;
    let p1 = tensor(&xi1.block_projector(), &id);
    let p2 = tensor(&id, &xi2.block_projector());
    let x1 = tensor(&xi1.op, &id);
    let x2 = tensor(&id, &xi2.op);

    let keep_probability = s.expectation(&(&p1 * &p2))?.re;
    if keep_probability <= 1e-15 {
        return Err(Error::NoKeptTrials);
    }
    let analytic = s.expectation(&(&x1 * &x2))?.re / keep_probability;

    let cs = CommutingSet::new(
        "conditional",
        vec![("xi1", x1), ("P1", p1), ("xi2", x2), ("P2", p2)],
    )?;
    let m = JointMeasurement::new(&cs)?;
    let probs = m.probabilities(s)?;

    // chunks are drawn in parallel rounds and consumed in chunk order
    let mut products: Vec<f64> = Vec::with_capacity(kept);
    let mut trials = 0usize;
    let mut next_chunk = 0u64;
    let round = rayon::current_num_threads().max(1) as u64;
    'outer: while products.len() < kept {
        let results: Vec<Result<Vec<Option<f64>>>> = (next_chunk..next_chunk + round)
            .into_par_iter()
            .map(|ci| {
                let mut r = rng::stream(seed, ci);
                (0..CHUNK)
                    .map(|_| {
                        let k = JointMeasurement::sample_index(&probs, &mut r)?;
                        let v = &m.spaces[k].values;
                        let keep = v[1] > 0.5 && v[3] > 0.5;
                        // on the block ξ reads ±1; drop eigensolver rounding
                        Ok(keep.then(|| v[0].signum() * v[2].signum()))
                    })
                    .collect()
            })
            .collect();
        next_chunk += round;
        for chunk in results {
            for t in chunk? {
                trials += 1;
                if let Some(x) = t {
                    products.push(x);
                    if products.len() == kept {
                        break 'outer;
                    }
                }
            }
        }
    }

    let k = products.len() as f64;
    let mean = products.iter().sum::<f64>() / k;
    let var = if products.len() > 1 {
        products.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0)
    } else {
        0.0
    };
    Ok(ConditionalEstimate {
        estimate: mean,
        std_err: (var / k).sqrt(),
        kept: products.len(),
        trials,
        keep_fraction: k / trials as f64,
        keep_probability,
        analytic,
    })
}

// ---- Kochen–Specker demonstration ----

#[derive(Clone, Debug)]
pub struct KsDemoReport {
    pub dim: usize,
    pub directions: usize,
    pub triads: usize,
    /// Largest perfect-correlation residual over every `s²(d)` (and `P`).
    pub residual_max: f64,
    pub outcome: KsOutcome,
    /// For `N > 3`: whether the joint spectrum of `{P, ζ²x, ζ²y, ζ²z}` with
    /// `P = 1` reproduces the spin-1 triad spectrum.
    pub restricted_spectrum_ok: Option<bool>,
}

impl KsDemoReport {
    /// Every `s²(d)` has a perfectly correlated partner, yet no value map on
    /// the directions exists.
    pub fn contradiction(&self) -> bool {
        self.residual_max < 1e-10 && matches!(self.outcome, KsOutcome::Uncolorable { .. })
    }
}

pub fn schrodinger_ks_demo(
    n: usize,
    directions: &[Vec3],
    workers: Option<usize>,
) -> Result<KsDemoReport> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("dimension {n} is below 3")));
    }
    let me = me_state_canonical(&AntiUnitaryMap::conjugation(n));
    let graph = build_triad_graph(directions, ORTHO_TOL);
    let block = [0, 1, 2];

    let residuals: Vec<f64> = graph
        .directions
        .par_iter()
        .map(|v| {
            let d = Direction::from_vector(*v).ok_or_else(|| {
                Error::InvalidInput(format!("direction {v:?} has no angles"))
            })?;
            let op = embed_spin1_squared(n, block, &d)?.op;
            perfect_correlation_residual(&me, &op)
        })
        .collect::<Result<_>>()?;
    let mut residual_max = residuals.iter().fold(0.0f64, |a, &b| a.max(b));

    let mut restricted_spectrum_ok = None;
    if n > 3 {
        let p = block_projector(n, &block)?;
        residual_max = residual_max.max(perfect_correlation_residual(&me, &p)?);
        let mut members = vec![("P".to_string(), p)];
        for (axis, label) in ["zx2", "zy2", "zz2"].into_iter().enumerate() {
            let tmpl = crate::spin::spin1_squared_axis(axis);
            members.push((label.to_string(), embed(n, &block, &tmpl)?.op));
        }
        let cs = CommutingSet::new("P-zeta", members)?;
        let restricted: Vec<(Vec<f64>, usize)> = joint_spectrum(&cs)?
            .into_iter()
            .filter(|js| (js.values[0] - 1.0).abs() <= 1e-8)
            .map(|js| (js.values[1..].to_vec(), js.multiplicity()))
            .collect();
        let want = [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        restricted_spectrum_ok = Some(
            restricted.len() == 3
                && restricted
                    .iter()
                    .zip(want)
                    .all(|((v, m), w)| *m == 1 && tuples_close(v, &w)),
        );
    }

    let outcome = match workers {
        Some(w) if w > 1 => ks_color_parallel(&graph, w),
        _ => ks_color(&graph),
    };
    Ok(KsDemoReport {
        dim: n,
        directions: graph.len(),
        triads: graph.triads.len(),
        residual_max,
        outcome,
        restricted_spectrum_ok,
    })
}

// ---- Mermin demonstration ----

#[derive(Clone, Debug, Serialize)]
pub struct ContextRun {
    pub observable: String,
    pub context: String,
    pub trials: usize,
    pub kept: usize,
    pub equal: usize,
    /// Fraction of kept trials in which the partner read +1.
    pub partner_plus_fraction: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NoSignalingCheck {
    pub observable: String,
    pub difference: f64,
    pub sigma: f64,
    pub within_4_sigma: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MerminDemoReport {
    pub dim: usize,
    pub trials: usize,
    pub residual_max: f64,
    pub equality_rate: f64,
    pub contexts: Vec<ContextRun>,
    pub no_signaling: Vec<NoSignalingCheck>,
    pub assignments_all_plus_one: bool,
    pub operator_product_deviation: f64,
}

impl MerminDemoReport {
    pub fn contradiction(&self) -> bool {
        self.residual_max < 1e-10
            && self.equality_rate == 1.0
            && self.assignments_all_plus_one
            && self.operator_product_deviation <= 1e-12
    }
}

/// For each of the ten observables `M` on the second factor (on the block
/// `0..4`, identified with two qubits as `σ⁽¹⁾⊗σ⁽²⁾`) and each of the two
/// commuting sets containing it, measures that set together with the
/// partner `M̃` on the first factor of the canonical maximally entangled
/// state and compares the two readings.
pub fn schrodinger_mermin_demo(n: usize, trials: usize, seed: u64) -> Result<MerminDemoReport> {
    if n < 4 {
        return Err(Error::InvalidInput(format!("dimension {n} is below 4")));
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trial count must be at least 1".into()));
    }
    let u = AntiUnitaryMap::conjugation(n);
    let me = me_state_canonical(&u);
    let block = [0, 1, 2, 3];
    let id = CMatrix::identity(n);
    let lift = |m: &CMatrix| -> Result<CMatrix> { Ok(embed(n, &block, m)?.op) };
    let proj = block_projector(n, &block)?;

    let sets = commuting_sets_mermin();
    let obs = MerminObservables::new();
    let mut jobs = Vec::new();
    let mut residual_max: f64 = 0.0;
    for label in MerminObservables::labels() {
        let m = lift(&obs.get(label).expect("known label"))?;
        residual_max = residual_max.max(perfect_correlation_residual(&me, &m)?);
        let partner = tensor(&tilde(&m, &u)?, &id);
        for set in sets.iter().filter(|s| s.index_of(label).is_some()) {
            let mut members = vec![("partner".to_string(), partner.clone())];
            for (l, op) in set.labels.iter().zip(&set.ops) {
                members.push((l.clone(), tensor(&id, &lift(op)?)));
            }
            if n > 4 {
                members.push(("P".to_string(), tensor(&id, &proj)));
            }
            let cs = CommutingSet::new(format!("{label}@{}", set.name), members)?;
            let idx = 1 + set.index_of(label).expect("filtered");
            jobs.push((label.to_string(), set.name.clone(), cs, idx));
        }
    }

    let contexts: Vec<ContextRun> = jobs
        .par_iter()
        .enumerate()
        .map(|(j, (label, ctx, cs, idx))| {
            let m = JointMeasurement::new(cs)?;
            let probs = m.probabilities(&me.state)?;
            let mut r = rng::stream(seed, j as u64);
            let (mut kept, mut equal, mut plus) = (0, 0, 0);
            for _ in 0..trials {
                let v = &m.spaces[JointMeasurement::sample_index(&probs, &mut r)?].values;
                if n > 4 && v[v.len() - 1] < 0.5 {
                    continue;
                }
                kept += 1;
                if (v[0] - v[*idx]).abs() < 1e-8 {
                    equal += 1;
                }
                if v[0] > 0.0 {
                    plus += 1;
                }
            }
            Ok(ContextRun {
                observable: label.clone(),
                context: ctx.clone(),
                trials,
                kept,
                equal,
                partner_plus_fraction: if kept > 0 { plus as f64 / kept as f64 } else { 0.0 },
            })
        })
        .collect::<Result<_>>()?;

    let kept: usize = contexts.iter().map(|c| c.kept).sum();
    let equal: usize = contexts.iter().map(|c| c.equal).sum();
    if kept == 0 {
        return Err(Error::NoKeptTrials);
    }
    let no_signaling = contexts
        .chunks(2)
        .map(|pair| {
            let (a, b) = (&pair[0], &pair[1]);
            let p = (a.partner_plus_fraction * a.kept as f64 + b.partner_plus_fraction * b.kept as f64)
                / (a.kept + b.kept).max(1) as f64;
            let sigma = (p * (1.0 - p) * (1.0 / a.kept.max(1) as f64 + 1.0 / b.kept.max(1) as f64)).sqrt();
            let difference = a.partner_plus_fraction - b.partner_plus_fraction;
            NoSignalingCheck {
                observable: a.observable.clone(),
                difference,
                sigma,
                within_4_sigma: difference.abs() <= 4.0 * sigma,
            }
        })
        .collect();

    let mc = mermin_check();
    Ok(MerminDemoReport {
        dim: n,
        trials,
        residual_max,
        equality_rate: equal as f64 / kept as f64,
        contexts,
        no_signaling,
        assignments_all_plus_one: mc.all_assignments_plus_one(),
        operator_product_deviation: mc.product_deviation_from_minus_identity(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contextuality::ks::{axes, peres33};
    use crate::contextuality::spin1_triad_set;
    use crate::spin::{singlet, spin_up};

    #[test]
    fn eigenstate_is_certain() {
        let cs = spin1_triad_set();
        let m = JointMeasurement::new(&cs).unwrap();
        let v = StateVector::new(vec![3], m.spaces[1].basis.column(0)).unwrap();
        let mut r = rng::stream(0, 0);
        for _ in 0..50 {
            let o = m.sample(&v, &mut r).unwrap();
            assert_eq!(o.values, m.spaces[1].values);
            assert!(o.post_state.overlap_modulus(&v) > 1.0 - 1e-12);
        }
    }

    #[test]
    fn singlet_outcomes_sum_to_zero() {
        let d = Direction::from_degrees(40.0, 75.0);
        let id = CMatrix::identity(2);
        let cs = CommutingSet::new(
            "dd",
            vec![("1", tensor(&sigma(&d), &id)), ("2", tensor(&id, &sigma(&d)))],
        )
        .unwrap();
        let m = JointMeasurement::new(&cs).unwrap();
        let s = singlet();
        let mut r = rng::stream(2, 0);
        let n = 10_000;
        let mut up = 0;
        for _ in 0..n {
            let o = m.sample(&s, &mut r).unwrap();
            assert!((o.values[0] + o.values[1]).abs() < 1e-12);
            if o.values[0] > 0.0 {
                up += 1;
            }
        }
        let f = up as f64 / n as f64;
        assert!((f - 0.5).abs() < 3.0 * (0.25 / n as f64).sqrt());
    }

    #[test]
    fn repeat_measurement_is_stable() {
        let sets = commuting_sets_mermin();
        let mut r = rng::stream(4, 0);
        let s = crate::linalg::random::state(vec![4], &mut r);
        for cs in &sets {
            let m = JointMeasurement::new(cs).unwrap();
            let first = m.sample(&s, &mut r).unwrap();
            for _ in 0..5 {
                let again = m.sample(&first.post_state, &mut r).unwrap();
                assert_eq!(again.values, first.values);
            }
        }
    }

    #[test]
    fn product_procedure_relation() {
        let sets = commuting_sets_mermin();
        let mut r = rng::stream(8, 0);
        for cs in &sets {
            let spec = joint_spectrum(cs).unwrap();
            let d = cs.derivation.as_ref().unwrap();
            for _ in 0..50 {
                let s = crate::linalg::random::state(vec![4], &mut r);
                let o = product_procedure_measure(&s, cs, &mut r).unwrap();
                let args: Vec<f64> = d.inputs.iter().map(|&i| o.values[i]).collect();
                assert_eq!(o.values[d.target], d.evaluate(&args));
                assert!(spec.iter().any(|js| tuples_close(&js.values, &o.values)));
            }
        }
    }

    #[test]
    fn embedding() {
        let z = Direction::z();
        let e = embed_spin_half(4, [0, 1], &z, EmbedMap::Plain).unwrap();
        assert!(e.op.approx_eq(&CMatrix::diag_real(&[1.0, -1.0, 0.0, 0.0]), 0.0));
        let e2 = embed_spin_half(2, [0, 1], &z, EmbedMap::Plain).unwrap();
        assert!(e2.op.approx_eq(&sigma(&z), 0.0));
        let comp = &CMatrix::identity(4) - &e.block_projector();
        assert_eq!((&e.op * &comp).max_abs(), 0.0);
        let t = embed_spin_half(3, [2, 0], &z, EmbedMap::TildePartner).unwrap();
        assert!(t.template.approx_eq(&sigma(&z).scale(re(-1.0)), 1e-15));
        assert!(matches!(
            embed_spin_half(3, [0, 3], &z, EmbedMap::Plain),
            Err(Error::BadIndices(_))
        ));
        assert!(matches!(
            embed_spin_half(3, [1, 1], &z, EmbedMap::Plain),
            Err(Error::BadIndices(_))
        ));
    }

    #[test]
    fn bellext_is_total_spin_zero() {
        let n = 4;
        let s = bellext_state(n).unwrap();
        let id = CMatrix::identity(n);
        let mut r = rng::stream(1, 1);
        for _ in 0..20 {
            let d = Direction::random(&mut r);
            let xi = embed_spin_half(n, [0, 1], &d, EmbedMap::Plain).unwrap().op;
            let total = &tensor(&xi, &id) + &tensor(&id, &xi);
            assert!(crate::linalg::norm(&s.apply(&total).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn conditional_equal_directions() {
        let s = bellext_state(4).unwrap();
        let a = Direction::from_degrees(30.0, 10.0);
        let est = conditional_correlation(&s, &a, &a, ([0, 1], [0, 1]), 2000, 3).unwrap();
        assert_eq!(est.estimate, -1.0);
        assert_eq!(est.kept, 2000);
        assert!((est.keep_probability - 0.5).abs() < 1e-12);
    }

    #[test]
    fn conditional_two_dim_keeps_all() {
        let s = singlet();
        let (a, b) = (Direction::from_degrees(20.0, 0.0), Direction::from_degrees(80.0, 45.0));
        let est = conditional_correlation(&s, &a, &b, ([0, 1], [0, 1]), 10_000, 5).unwrap();
        assert_eq!(est.keep_fraction, 1.0);
        assert!((est.analytic + a.dot(&b)).abs() < 1e-12);
        assert!((est.estimate + a.dot(&b)).abs() < 3.0 * est.std_err.max(1e-3));
    }

    #[test]
    fn conditional_none_kept() {
        // product state living entirely outside the block
        let s = StateVector::basis(vec![3, 3], 8).unwrap();
        let z = Direction::z();
        assert_eq!(
            conditional_correlation(&s, &z, &z, ([0, 1], [0, 1]), 10, 0).unwrap_err(),
            Error::NoKeptTrials
        );
    }

    #[test]
    fn ks_demo_small() {
        let rep = schrodinger_ks_demo(3, &axes(), None).unwrap();
        assert!(rep.residual_max < 1e-10);
        assert!(matches!(rep.outcome, KsOutcome::Colorable { .. }));
        assert!(!rep.contradiction());
        let rep4 = schrodinger_ks_demo(4, &axes(), None).unwrap();
        assert_eq!(rep4.restricted_spectrum_ok, Some(true));
    }

    #[test]
    fn ks_demo_peres() {
        let rep = schrodinger_ks_demo(3, &peres33(), None).unwrap();
        assert!(rep.contradiction(), "{rep:?}");
    }

    #[test]
    fn mermin_demo_equal_readings() {
        let rep = schrodinger_mermin_demo(4, 300, 11).unwrap();
        assert_eq!(rep.contexts.len(), 20);
        assert_eq!(rep.equality_rate, 1.0);
        assert!(rep.contradiction());
        assert!(rep.no_signaling.iter().all(|c| c.within_4_sigma));
        let rep5 = schrodinger_mermin_demo(5, 200, 11).unwrap();
        assert_eq!(rep5.equality_rate, 1.0);
        assert!(rep5.contexts.iter().all(|c| c.kept < c.trials));
    }

    #[test]
    fn born_frequencies() {
        let d = Direction::from_degrees(60.0, 0.0);
        let s = spin_up(&Direction::z());
        let cs = CommutingSet::new("sd", vec![("s", sigma(&d))]).unwrap();
        let m = JointMeasurement::new(&cs).unwrap();
        let probs = m.probabilities(&s).unwrap();
        let mut r = rng::stream(6, 0);
        let n = 10_000;
        let hits = (0..n)
            .filter(|_| JointMeasurement::sample_index(&probs, &mut r).unwrap() == 1)
            .count();
        let p = probs[1];
        assert!((p - 0.75).abs() < 1e-12);
        assert!((hits as f64 / n as f64 - p).abs() < 4.0 * (p * (1.0 - p) / n as f64).sqrt());
    }
}
