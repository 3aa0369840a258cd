//! Mermin's two-qubit parity argument.

use serde::Serialize;

use super::joint::CommutingSet;
use crate::linalg::{tensor, CMatrix};
use crate::spin::{pauli_x, pauli_y};

/// The ten two-qubit observables of the argument.
#[derive(Clone, Debug)]
pub struct MerminObservables {
    pub sx1: CMatrix,
    pub sy1: CMatrix,
    pub sx2: CMatrix,
    pub sy2: CMatrix,
    pub a: CMatrix,
    pub b: CMatrix,
    pub x: CMatrix,
    pub y: CMatrix,
    pub c: CMatrix,
    pub z: CMatrix,
}

impl MerminObservables {
    pub fn new() -> Self {
        let id = CMatrix::identity(2);
        let sx1 = tensor(&pauli_x(), &id);
        let sy1 = tensor(&pauli_y(), &id);
        let sx2 = tensor(&id, &pauli_x());
        let sy2 = tensor(&id, &pauli_y());
        let a = &sx1 * &sy2;
        let b = &sy1 * &sx2;
        let x = &sx1 * &sx2;
        let y = &sy1 * &sy2;
        let c = &a * &b;
        let z = &x * &y;
        Self {
            sx1,
            sy1,
            sx2,
            sy2,
            a,
            b,
            x,
            y,
            c,
            z,
        }
    }

    pub fn labels() -> [&'static str; 10] {
        ["sx1", "sy1", "sx2", "sy2", "A", "B", "X", "Y", "C", "Z"]
    }

    pub fn all(&self) -> Vec<(&'static str, CMatrix)> {
        Self::labels()
            .into_iter()
            .zip([
                &self.sx1, &self.sy1, &self.sx2, &self.sy2, &self.a, &self.b, &self.x, &self.y,
                &self.c, &self.z,
            ])
            .map(|(l, m)| (l, m.clone()))
            .collect()
    }

    pub fn get(&self, label: &str) -> Option<CMatrix> {
        self.all().into_iter().find(|(l, _)| *l == label).map(|p| p.1)
    }
}

impl Default for MerminObservables {
    fn default() -> Self {
        Self::new()
    }
}

/// Values derived from one ±1 assignment to the four single-spin observables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MerminAssignment {
    pub sx1: i32,
    pub sy1: i32,
    pub sx2: i32,
    pub sy2: i32,
    pub a: i32,
    pub b: i32,
    pub x: i32,
    pub y: i32,
    pub c: i32,
    pub z: i32,
    pub cz: i32,
}

#[derive(Clone, Debug)]
pub struct MerminReport {
    pub assignments: Vec<MerminAssignment>,
    /// `σx⁽¹⁾σy⁽²⁾σy⁽¹⁾σx⁽²⁾σx⁽¹⁾σx⁽²⁾σy⁽¹⁾σy⁽²⁾` as a matrix.
    pub operator_product: CMatrix,
}

impl MerminReport {
    pub fn assignment_products(&self) -> Vec<i32> {
        self.assignments.iter().map(|a| a.cz).collect()
    }

    pub fn all_assignments_plus_one(&self) -> bool {
        self.assignments.iter().all(|a| a.cz == 1)
    }

    /// `max |P + I|` over entries.
    pub fn product_deviation_from_minus_identity(&self) -> f64 {
        let n = self.operator_product.rows();
        (&self.operator_product + &CMatrix::identity(n)).max_abs()
    }

    pub fn contradiction(&self) -> bool {
        self.all_assignments_plus_one() && self.product_deviation_from_minus_identity() <= 1e-12
    }
}

pub fn mermin_check() -> MerminReport {
    let mut assignments = Vec::with_capacity(16);
    for bits in 0..16u32 {
        let s = |k: u32| if bits >> k & 1 == 0 { 1 } else { -1 };
        let (sx1, sy1, sx2, sy2) = (s(3), s(2), s(1), s(0));
        let (a, b, x, y) = (sx1 * sy2, sy1 * sx2, sx1 * sx2, sy1 * sy2);
        let (c, z) = (a * b, x * y);
        assignments.push(MerminAssignment {
            sx1,
            sy1,
            sx2,
            sy2,
            a,
            b,
            x,
            y,
            c,
            z,
            cz: c * z,
        });
    }
    let o = MerminObservables::new();
    let operator_product = [&o.sy2, &o.sy1, &o.sx2, &o.sx1, &o.sx2, &o.sy1, &o.sy2]
        .into_iter()
        .fold(o.sx1.clone(), |acc, m| &acc * m);
    MerminReport {
        assignments,
        operator_product,
    }
}

fn product_set(name: &str, members: [(&str, CMatrix); 3]) -> CommutingSet {
    let relation = format!("{} = {}·{}", members[0].0, members[1].0, members[2].0);
    CommutingSet::new(name, members.to_vec())
        .expect("commuting by construction")
        .with_derivation(relation, 0, vec![1, 2], |v| v[0] * v[1])
}

/// The seven commuting sets: four pairing a product with its two factors,
/// `{C, A, B}`, `{Z, X, Y}` and `{C, Z}` with `C = −Z`.
pub fn commuting_sets_mermin() -> Vec<CommutingSet> {
    let o = MerminObservables::new();
    vec![
        product_set("A", [("A", o.a.clone()), ("sx1", o.sx1.clone()), ("sy2", o.sy2.clone())]),
        product_set("B", [("B", o.b.clone()), ("sy1", o.sy1.clone()), ("sx2", o.sx2.clone())]),
        product_set("X", [("X", o.x.clone()), ("sx1", o.sx1.clone()), ("sx2", o.sx2.clone())]),
        product_set("Y", [("Y", o.y.clone()), ("sy1", o.sy1.clone()), ("sy2", o.sy2.clone())]),
        product_set("C", [("C", o.c.clone()), ("A", o.a.clone()), ("B", o.b.clone())]),
        product_set("Z", [("Z", o.z.clone()), ("X", o.x.clone()), ("Y", o.y.clone())]),
        CommutingSet::new("CZ", vec![("C", o.c.clone()), ("Z", o.z.clone())])
            .expect("commuting by construction")
            .with_derivation("C = -Z", 0, vec![1], |v| -v[0]),
    ]
}

#[cfg(test)]
mod tests {
    use super::super::joint::{check_spectrum_constraints, constraints_match_spectrum, joint_spectrum};
    use super::*;

    #[test]
    fn parity_gap() {
        let r = mermin_check();
        assert_eq!(r.assignments.len(), 16);
        assert!(r.all_assignments_plus_one());
        assert!(r.product_deviation_from_minus_identity() < 1e-12);
        assert!(r.contradiction());
        let o = MerminObservables::new();
        assert!((&(&o.c * &o.z) + &CMatrix::identity(4)).max_abs() < 1e-12);
    }

    #[test]
    fn seven_sets() {
        let sets = commuting_sets_mermin();
        assert_eq!(sets.len(), 7);
        for s in &sets {
            assert!(s.max_commutator() < 1e-12, "{}", s.name);
            assert!(check_spectrum_constraints(s).unwrap(), "{}", s.name);
            assert!(constraints_match_spectrum(s).unwrap(), "{}", s.name);
        }
        // every observable sits in exactly two sets
        for l in MerminObservables::labels() {
            let k = sets.iter().filter(|s| s.index_of(l).is_some()).count();
            assert_eq!(k, 2, "{l}");
        }
    }

    #[test]
    fn a_set_products_by_eigenvectors() {
        let sets = commuting_sets_mermin();
        let spec = joint_spectrum(&sets[0]).unwrap();
        assert_eq!(spec.len(), 4);
        for js in &spec {
            assert_eq!(js.multiplicity(), 1);
            // recompute each value as an expectation on the joint eigenvector
            let v = js.basis.column(0);
            let vals: Vec<f64> = sets[0]
                .ops
                .iter()
                .map(|op| crate::linalg::inner(&v, &op.mul_vec(&v).unwrap()).re)
                .collect();
            assert!((vals[0] - vals[1] * vals[2]).abs() < 1e-12);
        }
        let cz = joint_spectrum(&sets[6]).unwrap();
        for js in cz {
            assert!((js.values[0] * js.values[1] + 1.0).abs() < 1e-12);
        }
    }
}
