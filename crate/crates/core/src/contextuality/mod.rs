//! Value-map impossibility checks.

pub mod joint;
pub mod ks;
pub mod mermin;
pub mod vonneumann;

pub use joint::{
    check_spectrum_constraints, constraints_match_spectrum, joint_spectrum, CommutingSet,
    Constraint, Derivation, JointEigenspace,
};
pub use ks::{
    build_triad_graph, ks_color, ks_color_parallel, octant_coloring, verify_coloring, Coloring,
    ColoringCertificate, KsOutcome, TriadGraph,
};
pub use mermin::{commuting_sets_mermin, mermin_check, MerminObservables, MerminReport};
pub use vonneumann::{linearity_counterexamples, vn_reconstruct, LinearityReport, VnReport};

use crate::linalg::CMatrix;
use crate::spin::spin1_squared_axis;

/// `{P, P₁, P₂}` in dimension 3 with `P = P₁ + P₂` projecting onto
/// orthogonal lines.
pub fn projector_sum_set() -> CommutingSet {
    let p1 = CMatrix::diag_real(&[1.0, 0.0, 0.0]);
    let p2 = CMatrix::diag_real(&[0.0, 1.0, 0.0]);
    CommutingSet::new("projector-sum", vec![("P", &p1 + &p2), ("P1", p1), ("P2", p2)])
        .expect("diagonal")
        .with_derivation("P = P1 + P2", 0, vec![1, 2], |v| v[0] + v[1])
}

/// The squared spin-1 components along the axes, with their sum rule.
pub fn spin1_triad_set() -> CommutingSet {
    CommutingSet::new(
        "s2-triad",
        vec![
            ("sx2", spin1_squared_axis(0)),
            ("sy2", spin1_squared_axis(1)),
            ("sz2", spin1_squared_axis(2)),
        ],
    )
    .expect("spin-1 squares commute")
    .with_constraint("sx2 + sy2 + sz2 = 2", |v| v[0] + v[1] + v[2] - 2.0)
}
