//! Commuting sets of observables and their joint spectra.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::linalg::{commutator, hermitian_eig, CMatrix, TOL};
use crate::rng;
use crate::{Error, Result};

/// Eigenvalues closer than this belong to one eigenspace.
pub const CLUSTER_TOL: f64 = 1e-8;

const WEIGHT_SEED: u64 = 0x4A01_57EC;

type RelationFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A relation `f(o₁, o₂, …) = 0` on a tuple of simultaneous values.
#[derive(Clone)]
pub struct Constraint {
    pub label: String,
    eval: Arc<RelationFn>,
}

impl fmt::Debug for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Constraint({})", self.label)
    }
}

impl Constraint {
    pub fn new(label: impl Into<String>, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            eval: Arc::new(f),
        }
    }

    pub fn residual(&self, values: &[f64]) -> f64 {
        (self.eval)(values)
    }
}

/// `ops[target] = f(ops[inputs])`: how a derived member of the set is
/// obtained from the others in a product-procedure measurement.
#[derive(Clone)]
pub struct Derivation {
    pub target: usize,
    pub inputs: Vec<usize>,
    f: Arc<RelationFn>,
}

impl fmt::Debug for Derivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Derivation")
            .field("target", &self.target)
            .field("inputs", &self.inputs)
            .finish()
    }
}

impl Derivation {
    pub fn evaluate(&self, input_values: &[f64]) -> f64 {
        (self.f)(input_values)
    }
}

/// Pairwise-commuting Hermitian operators of equal dimension.
#[derive(Clone, Debug)]
pub struct CommutingSet {
    pub name: String,
    pub labels: Vec<String>,
    pub ops: Vec<CMatrix>,
    pub constraints: Vec<Constraint>,
    pub derivation: Option<Derivation>,
}

/// Largest pairwise commutator entry.
pub fn max_commutator(ops: &[CMatrix]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            worst = worst.max(commutator(&ops[i], &ops[j])?.max_abs());
        }
    }
    Ok(worst)
}

impl CommutingSet {
    pub fn new(
        name: impl Into<String>,
        members: Vec<(impl Into<String>, CMatrix)>,
    ) -> Result<Self> {
        let (labels, ops): (Vec<String>, Vec<CMatrix>) =
            members.into_iter().map(|(l, m)| (l.into(), m)).unzip();
        if ops.is_empty() {
            return Err(Error::InvalidInput("empty commuting set".into()));
        }
        let n = ops[0].rows();
        for op in &ops {
            if !op.is_square() || op.rows() != n {
                return Err(Error::DimMismatch("commuting set members differ in shape".into()));
            }
            let dev = op.hermitian_deviation();
            if dev > TOL {
                return Err(Error::NotHermitian(dev));
            }
        }
        let worst = max_commutator(&ops)?;
        if worst > TOL {
            return Err(Error::NotCommuting(worst));
        }
        Ok(Self {
            name: name.into(),
            labels,
            ops,
            constraints: Vec::new(),
            derivation: None,
        })
    }

    pub fn with_constraint(
        mut self,
        label: impl Into<String>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.constraints.push(Constraint::new(label, f));
        self
    }

    /// Designates `ops[target] = f(ops[inputs])` and records it as a
    /// constraint as well.
    pub fn with_derivation(
        mut self,
        label: impl Into<String>,
        target: usize,
        inputs: Vec<usize>,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        let f: Arc<RelationFn> = Arc::new(f);
        let (g, idx) = (f.clone(), inputs.clone());
        self.constraints.push(Constraint::new(label, move |v: &[f64]| {
            let args: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
            v[target] - g(&args)
        }));
        self.derivation = Some(Derivation { target, inputs, f });
        self
    }

    pub fn dim(&self) -> usize {
        self.ops[0].rows()
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn max_commutator(&self) -> f64 {
        max_commutator(&self.ops).expect("shapes checked at construction")
    }
}

/// One joint eigenspace: the simultaneous values and an orthonormal basis
/// (columns of `basis`).
#[derive(Clone, Debug)]
pub struct JointEigenspace {
    pub values: Vec<f64>,
    pub basis: CMatrix,
}

impl JointEigenspace {
    pub fn multiplicity(&self) -> usize {
        self.basis.cols()
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * &self.basis.dagger()
    }
}

/// Splits sorted eigenvalues into runs whose consecutive gaps are within
/// [`CLUSTER_TOL`].
fn clusters(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > CLUSTER_TOL {
            out.push(start..k);
            start = k;
        }
    }
    out
}

fn select_columns(m: &CMatrix, range: std::ops::Range<usize>) -> CMatrix {
    let cols: Vec<_> = range.map(|k| m.column(k)).collect();
    CMatrix::from_columns(&cols).expect("equal-length columns")
}

/// Simultaneous diagonalization of a commuting set.
///
/// The weighted sum `Σ rᵢOᵢ` (fixed pseudo-random weights) is diagonalized
/// first; each resulting cluster is then re-split by every operator in
/// turn, which separates accidental degeneracies of the sum. Eigenspaces
/// with equal value tuples are merged and the result is sorted
/// lexicographically by tuple.
pub fn joint_spectrum(cs: &CommutingSet) -> Result<Vec<JointEigenspace>> {
    let worst = max_commutator(&cs.ops)?;
    if worst > TOL {
        return Err(Error::NotCommuting(worst));
    }
    let n = cs.dim();
    let mut wrng = rng::stream(WEIGHT_SEED, cs.len() as u64);
    let mut combo = CMatrix::zeros(n, n);
    for op in &cs.ops {
        let w: f64 = wrng.random_range(0.5..1.5);
        combo = &combo + &op.scale(crate::linalg::re(w));
    }
    let eig = hermitian_eig(&combo)?;

    let mut blocks: Vec<(Vec<f64>, CMatrix)> = clusters(&eig.values)
        .into_iter()
        .map(|r| (Vec::new(), select_columns(&eig.vectors, r)))
        .collect();

    for op in &cs.ops {
        let mut next = Vec::with_capacity(blocks.len());
        for (vals, q) in blocks {
            let restricted = &(&q.dagger() * op) * &q;
            let e = hermitian_eig(&restricted)?;
            let rotated = &q * &e.vectors;
            for r in clusters(&e.values) {
                let mean = e.values[r.clone()].iter().sum::<f64>() / r.len() as f64;
                let mut v = vals.clone();
                v.push(mean);
                next.push((v, select_columns(&rotated, r)));
            }
        }
        blocks = next;
    }

    blocks.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    let mut merged: Vec<JointEigenspace> = Vec::new();
    for (values, basis) in blocks {
        if let Some(last) = merged.last_mut() {
            if tuples_close(&last.values, &values) {
                let mut cols: Vec<_> = (0..last.basis.cols()).map(|k| last.basis.column(k)).collect();
                cols.extend((0..basis.cols()).map(|k| basis.column(k)));
                last.basis = CMatrix::from_columns(&cols)?;
                continue;
            }
        }
        merged.push(JointEigenspace { values, basis });
    }
    Ok(merged)
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        if (x - y).abs() > CLUSTER_TOL {
            return x.total_cmp(y);
        }
    }
    std::cmp::Ordering::Equal
}

pub fn tuples_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= CLUSTER_TOL)
}

/// True iff every joint eigenvalue tuple satisfies every constraint within
/// `1e-8`.
pub fn check_spectrum_constraints(cs: &CommutingSet) -> Result<bool> {
    let spec = joint_spectrum(cs)?;
    Ok(spec.iter().all(|js| {
        cs.constraints
            .iter()
            .all(|c| c.residual(&js.values).abs() <= CLUSTER_TOL)
    }))
}

/// Distinct eigenvalues of each member, ascending.
pub fn eigenvalue_grid(cs: &CommutingSet) -> Result<Vec<Vec<f64>>> {
    cs.ops
        .iter()
        .map(|op| {
            let e = hermitian_eig(op)?;
            Ok(clusters(&e.values)
                .into_iter()
                .map(|r| e.values[r.clone()].iter().sum::<f64>() / r.len() as f64)
                .collect())
        })
        .collect()
}

/// Every tuple from the per-operator eigenvalue grid that satisfies all
/// constraints, in lexicographic order.
pub fn constraint_solutions(cs: &CommutingSet) -> Result<Vec<Vec<f64>>> {
    let grid = eigenvalue_grid(cs)?;
    let mut out = Vec::new();
    let mut idx = vec![0usize; grid.len()];
    loop {
        let t: Vec<f64> = idx.iter().zip(&grid).map(|(&i, g)| g[i]).collect();
        if cs
            .constraints
            .iter()
            .all(|c| c.residual(&t).abs() <= CLUSTER_TOL)
        {
            out.push(t);
        }
        // odometer increment, last index fastest
        let mut k = grid.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < grid[k].len() {
                break;
            }
            idx[k] = 0;
        }
    }
}

/// Whether the constraints characterize the joint spectrum exactly: the
/// grid tuples satisfying them are precisely the joint eigenvalues.
pub fn constraints_match_spectrum(cs: &CommutingSet) -> Result<bool> {
    let spec: Vec<Vec<f64>> = joint_spectrum(cs)?.into_iter().map(|j| j.values).collect();
    let sols = constraint_solutions(cs)?;
    Ok(spec.len() == sols.len() && spec.iter().zip(&sols).all(|(a, b)| tuples_close(a, b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::spin1_squared_axis;

    fn s2_triad() -> CommutingSet {
        CommutingSet::new(
            "s2-triad",
            vec![
                ("sx2", spin1_squared_axis(0)),
                ("sy2", spin1_squared_axis(1)),
                ("sz2", spin1_squared_axis(2)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn spin1_triad_spectrum() {
        let spec = joint_spectrum(&s2_triad()).unwrap();
        let want = [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]];
        assert_eq!(spec.len(), 3);
        for (js, w) in spec.iter().zip(want) {
            assert!(tuples_close(&js.values, &w));
            assert_eq!(js.multiplicity(), 1);
        }
    }

    #[test]
    fn diagonal_pairs() {
        let cs = CommutingSet::new(
            "diag",
            vec![
                ("d1", CMatrix::diag_real(&[1.0, 2.0, 1.0, 3.0])),
                ("d2", CMatrix::diag_real(&[5.0, 6.0, 5.0, 7.0])),
            ],
        )
        .unwrap();
        let spec = joint_spectrum(&cs).unwrap();
        let tuples: Vec<_> = spec.iter().map(|j| (j.values.clone(), j.multiplicity())).collect();
        assert_eq!(
            tuples,
            vec![(vec![1.0, 5.0], 2), (vec![2.0, 6.0], 1), (vec![3.0, 7.0], 1)]
        );
    }

    #[test]
    fn accidental_degeneracy_is_split() {
        // weighted sums cannot separate (a, b) from (b, a) when the weights
        // happen to coincide; the per-operator pass must still split them
        let cs = CommutingSet::new(
            "swap",
            vec![
                ("p", CMatrix::diag_real(&[1.0, 0.0, 0.0])),
                ("q", CMatrix::diag_real(&[0.0, 1.0, 0.0])),
                ("r", CMatrix::diag_real(&[0.0, 0.0, 0.0])),
            ],
        )
        .unwrap();
        let spec = joint_spectrum(&cs).unwrap();
        assert_eq!(spec.len(), 3);
        let mult: usize = spec.iter().map(JointEigenspace::multiplicity).sum();
        assert_eq!(mult, 3);
    }

    #[test]
    fn sum_rule_constraints() {
        let good = s2_triad().with_constraint("sum = 2", |v| v[0] + v[1] + v[2] - 2.0);
        assert!(check_spectrum_constraints(&good).unwrap());
        assert!(constraints_match_spectrum(&good).unwrap());
        let bad = s2_triad().with_constraint("sum = 3", |v| v[0] + v[1] + v[2] - 3.0);
        assert!(!check_spectrum_constraints(&bad).unwrap());
    }

    #[test]
    fn projector_sum() {
        let p1 = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
        let p2 = CMatrix::diag_real(&[0.0, 1.0, 0.0]);
        let p = &p1 + &p2;
        let cs = CommutingSet::new("proj", vec![("P", p), ("P1", p1), ("P2", p2)])
            .unwrap()
            .with_derivation("P = P1 + P2", 0, vec![1, 2], |v| v[0] + v[1]);
        assert!(check_spectrum_constraints(&cs).unwrap());
        assert!(constraints_match_spectrum(&cs).unwrap());
    }

    #[test]
    fn non_commuting_is_rejected() {
        let r = CommutingSet::new(
            "xz",
            vec![("x", crate::spin::pauli_x()), ("z", crate::spin::pauli_z())],
        );
        assert!(matches!(r, Err(Error::NotCommuting(_))));
    }
}
