use nll_core::contextuality::joint::{constraints_match_spectrum, joint_spectrum, tuples_close};
use nll_core::contextuality::ks::{self, build_triad_graph, ks_color, verify_coloring, KsOutcome};
use nll_core::contextuality::{commuting_sets_mermin, projector_sum_set, spin1_triad_set, CommutingSet};
use nll_core::entangle::{me_state, me_state_canonical, tilde, AntiUnitaryMap};
use nll_core::lhv::{
    lhv_bell_terms, lhv_correlation, quantum_correlation, LambdaDistribution, LhvStrategy,
};
use nll_core::linalg::{hermitian_eig, random, tensor, CMatrix};
use nll_core::rng;
use nll_core::schrodinger_nl::{embed_spin_half, EmbedMap, JointMeasurement};
use nll_core::spin::{sigma, singlet, spin1_squared, spin_down, spin_up};
use nll_core::sterngerlach::{equivariance_check, integrate_trajectory, EnsembleParams, FieldConfig};
use nll_core::Direction;
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU).prop_map(|(t, p)| Direction::new(t, p))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn tensor_mixed_product(seed in any::<u64>(), m in 1usize..4, n in 1usize..4, k in 1usize..4) {
        let mut r = rng::stream(seed, 0);
        let rand_m = |rows: usize, cols: usize, r: &mut rng::StreamRng| {
            CMatrix::from_fn(rows, cols, |_, _| random::complex_vector(1, r)[0])
        };
        let (a, c) = (rand_m(m, n, &mut r), rand_m(n, k, &mut r));
        let (b, d) = (rand_m(k, m, &mut r), rand_m(m, n, &mut r));
        let lhs = &tensor(&a, &b) * &tensor(&c, &d);
        let rhs = tensor(&(&a * &c), &(&b * &d));
        prop_assert!(lhs.max_diff(&rhs) <= 1e-12);
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>(), m in 1usize..4, n in 1usize..4) {
        // Gaussian-integer entries keep every product exact
        let mut r = rng::stream(seed, 0);
        let mut int_m = |rows: usize, cols: usize| {
            CMatrix::from_fn(rows, cols, |_, _| {
                let v = random::complex_vector(1, &mut r)[0] * 4.0;
                nll_core::linalg::c(v.re.round(), v.im.round())
            })
        };
        let (a, b, e) = (int_m(m, n), int_m(n, m), int_m(2, 1));
        prop_assert_eq!(tensor(&tensor(&a, &b), &e), tensor(&a, &tensor(&b, &e)));
    }

    #[test]
    fn real_diagonal_spectrum_is_exact(vals in prop::collection::vec(-10.0f64..10.0, 1..9)) {
        let e = hermitian_eig(&CMatrix::diag_real(&vals)).unwrap();
        let mut sorted = vals.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(e.values, sorted);
    }

    #[test]
    fn pauli_direction_squares_to_identity(d in direction()) {
        let s = sigma(&d);
        prop_assert!((&s * &s).max_diff(&CMatrix::identity(2)) <= 1e-12);
        let a = d.antipode();
        prop_assert!((spin_up(&a).overlap_modulus(&spin_down(&d)) - 1.0).abs() <= 1e-10);
        prop_assert!(spin1_squared(&a).max_diff(&spin1_squared(&d)) <= 1e-12);
    }

    #[test]
    fn singlet_correlation_is_minus_dot(a in direction(), b in direction()) {
        let p = quantum_correlation(&singlet(), &sigma(&a), &sigma(&b)).unwrap();
        prop_assert!((p + a.dot(&b)).abs() <= 1e-10);
    }

    #[test]
    fn singlet_correlation_is_rotation_invariant(a in direction(), b in direction(), seed in any::<u64>()) {
        let mut r = rng::stream(seed, 0);
        let o = random::orthogonal(3, &mut r);
        let mut rot = [[0.0; 3]; 3];
        for (i, row) in rot.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = o[(i, j)].re;
            }
        }
        let s = singlet();
        let p0 = quantum_correlation(&s, &sigma(&a), &sigma(&b)).unwrap();
        let p1 = quantum_correlation(&s, &sigma(&a.rotated(&rot)), &sigma(&b.rotated(&rot))).unwrap();
        prop_assert!((p0 - p1).abs() <= 1e-10);
    }

    #[test]
    fn tilde_preserves_spectrum_and_inverts(seed in any::<u64>(), n in 2usize..7) {
        let mut r = rng::stream(seed, 0);
        let u = AntiUnitaryMap::new(random::unitary(n, &mut r)).unwrap();
        let a = random::hermitian(n, &mut r);
        let at = tilde(&a, &u).unwrap();
        let (ea, et) = (hermitian_eig(&a).unwrap(), hermitian_eig(&at).unwrap());
        for (x, y) in ea.values.iter().zip(&et.values) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
        let back = tilde(&at, &u.inverse()).unwrap();
        prop_assert!(back.max_diff(&a) <= 1e-10);
    }

    #[test]
    fn lhv_equal_settings_are_exactly_anticorrelated(d in direction(), seed in any::<u64>()) {
        let dist = LambdaDistribution::uniform_sphere();
        for strat in [LhvStrategy::sign_model(), LhvStrategy::constant()] {
            let e = lhv_correlation(&strat, &dist, &d, &d, 2000, seed).unwrap();
            prop_assert_eq!(e.mean, -1.0);
            prop_assert_eq!(e.std_err, 0.0);
        }
    }

    #[test]
    fn lhv_intermediate_bound(a in direction(), b in direction(), c in direction(), seed in any::<u64>()) {
        let dist = LambdaDistribution::uniform_sphere();
        let t = lhv_bell_terms(&LhvStrategy::sign_model(), &dist, &a, &b, &c, 3000, seed).unwrap();
        let lhs = (t.p_ab.mean - t.p_ac.mean).abs();
        prop_assert!(lhs <= t.intermediate_bound + 1e-12);
        prop_assert!(lhs <= 1.0 + t.p_bc.mean + 1e-12);
    }

    #[test]
    fn returned_colorings_are_valid(mask in prop::collection::vec(any::<bool>(), 33)) {
        let all = ks::peres33();
        let dirs: Vec<_> = all.iter().zip(&mask).filter(|(_, &m)| m).map(|(d, _)| *d).collect();
        prop_assume!(!dirs.is_empty());
        let g = build_triad_graph(&dirs, ks::ORTHO_TOL);
        match ks_color(&g) {
            KsOutcome::Colorable { coloring, .. } => {
                prop_assert!(verify_coloring(&g, &coloring).unwrap().is_empty());
                prop_assert!(ks::pair_violations(&g, &coloring).is_empty());
            }
            KsOutcome::Uncolorable { nodes } => prop_assert!(nodes > 0),
        }
        let mut doubled = dirs.clone();
        doubled.extend(dirs.iter().map(|v| v.map(|x| -x)));
        prop_assert_eq!(build_triad_graph(&doubled, ks::ORTHO_TOL), g);
    }

    #[test]
    fn embedded_observable_vanishes_off_block(n in 2usize..7, d in direction(), i in 0usize..7, j in 0usize..7) {
        prop_assume!(i < n && j < n && i != j);
        let e = embed_spin_half(n, [i, j], &d, EmbedMap::Plain).unwrap();
        let comp = &CMatrix::identity(n) - &e.block_projector();
        prop_assert_eq!((&e.op * &comp).max_abs(), 0.0);
        prop_assert_eq!((&comp * &e.op).max_abs(), 0.0);
    }
}

#[test]
fn eigensolver_round_trip_1000() {
    let mut r = rng::stream(17, 0);
    for k in 0..1000 {
        let n = 2 + k % 7;
        let m = random::hermitian(n, &mut r);
        let e = hermitian_eig(&m).unwrap();
        let d = CMatrix::diag_real(&e.values);
        let back = &(&e.vectors * &d) * &e.vectors.dagger();
        assert!(back.max_diff(&m) <= 1e-10, "n={n}");
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn me_state_basis_invariance() {
    let mut r = rng::stream(23, 0);
    for n in 2..=5 {
        let u = AntiUnitaryMap::new(random::unitary(n, &mut r)).unwrap();
        let base = me_state_canonical(&u);
        for _ in 0..50 {
            let w = random::unitary(n, &mut r);
            let other = me_state(&u, &w).unwrap();
            assert!(other.state.max_diff(&base.state) <= 1e-10);
        }
    }
}

#[test]
fn perfect_correlation_by_sampling() {
    let mut r = rng::stream(29, 0);
    for n in [2, 3, 3, 4, 5] {
        let u = AntiUnitaryMap::new(random::unitary(n, &mut r)).unwrap();
        let me = me_state_canonical(&u);
        let a = random::hermitian(n, &mut r);
        let id = CMatrix::identity(n);
        let cs = CommutingSet::new(
            "pair",
            vec![("At", tensor(&tilde(&a, &u).unwrap(), &id)), ("A", tensor(&id, &a))],
        )
        .unwrap();
        let m = JointMeasurement::new(&cs).unwrap();
        let probs = m.probabilities(&me.state).unwrap();
        for _ in 0..10_000 {
            let k = JointMeasurement::sample_index(&probs, &mut r).unwrap();
            let v = &m.spaces[k].values;
            assert!((v[0] - v[1]).abs() <= 1e-8, "{v:?}");
        }
    }
}

fn shipped_sets() -> Vec<CommutingSet> {
    let mut sets = commuting_sets_mermin();
    sets.push(projector_sum_set());
    sets.push(spin1_triad_set());
    sets
}

#[test]
fn constraints_characterize_joint_spectra() {
    for cs in shipped_sets() {
        assert!(constraints_match_spectrum(&cs).unwrap(), "{}", cs.name);
    }
}

#[test]
fn born_frequencies_within_four_sigma() {
    let mut r = rng::stream(31, 0);
    let trials = 10_000;
    for cs in shipped_sets() {
        let s = random::state(vec![cs.dim()], &mut r);
        let m = JointMeasurement::new(&cs).unwrap();
        let probs = m.probabilities(&s).unwrap();
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let mut counts = vec![0usize; probs.len()];
        for _ in 0..trials {
            counts[JointMeasurement::sample_index(&probs, &mut r).unwrap()] += 1;
        }
        for (c, p) in counts.iter().zip(&probs) {
            let sd = (p * (1.0 - p) / trials as f64).sqrt();
            assert!((*c as f64 / trials as f64 - p).abs() <= 4.0 * sd + 1e-12, "{}", cs.name);
        }
    }
}

#[test]
fn post_state_repeats_tuple() {
    let mut r = rng::stream(37, 0);
    for cs in shipped_sets() {
        let m = JointMeasurement::new(&cs).unwrap();
        let spec = joint_spectrum(&cs).unwrap();
        for _ in 0..20 {
            let s = random::state(vec![cs.dim()], &mut r);
            let first = m.sample(&s, &mut r).unwrap();
            assert!(spec.iter().any(|js| tuples_close(&js.values, &first.values)));
            let again = m.sample(&first.post_state, &mut r).unwrap();
            assert_eq!(again.values, first.values);
        }
    }
}

#[test]
fn trajectories_never_cross_the_symmetry_plane() {
    for f in [FieldConfig::experiment1(), FieldConfig::experiment2()] {
        let params = EnsembleParams {
            n: 500,
            seed: 41,
            ..EnsembleParams::default()
        };
        let rep = equivariance_check(&f, &params).unwrap();
        assert_eq!(rep.crossings, 0);
    }
}

#[test]
fn trajectories_are_deterministic() {
    let f = FieldConfig::experiment2();
    let a = integrate_trajectory(0.37, &f, 1e-3, 5.0).unwrap();
    let b = integrate_trajectory(0.37, &f, 1e-3, 5.0).unwrap();
    assert_eq!(a.z, b.z);
    assert_eq!(a.v, b.v);
    let p = EnsembleParams { n: 200, seed: 5, ..EnsembleParams::default() };
    let r1 = equivariance_check(&f, &p).unwrap();
    let r2 = equivariance_check(&f, &p).unwrap();
    assert_eq!(r1.histogram, r2.histogram);
}
