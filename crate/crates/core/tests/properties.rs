//! Invariants that should hold across randomized instances: unitarity of the
//! operator stacks, gauge and unitary invariance of the projective metrics,
//! exactness of the closed-form step laws, and integrator convergence order.

use num_complex::Complex64;
use proptest::prelude::*;

use qsearch_core::geometry::{
    bargmann_angle, fs_distance, grover_step_estimate, one_step_displacement,
    rotor_steps_by_distance, OverlapMagnitude,
};
use qsearch_core::grover::{build_q, SearchSpec};
use qsearch_core::speedlimit::{evolve, Hamiltonian};
use qsearch_core::unitary::{haar_random_unitary, two_plane_rotation};
use qsearch_core::{inner_product, make_frame, walsh_hadamard, StateVector, UnitaryOp};

fn with_phase(v: &StateVector, phi: f64) -> StateVector {
    let rot = Complex64::from_polar(1.0, phi);
    StateVector::from_amplitudes(v.amplitudes().iter().map(|a| a * rot).collect()).unwrap()
}

/// A stack mixing every operator variant, parameterized by seeds.
fn mixed_stack(n: u32, seed: u64, angle: f64) -> UnitaryOp {
    let dim = 1usize << n;
    let marked = StateVector::random(n, seed).unwrap();
    let frame = make_frame(
        &StateVector::random(n, seed ^ 0x5bd1e995).unwrap(),
        &StateVector::random(n, seed.wrapping_add(17)).unwrap(),
    )
    .unwrap();
    let generator = [
        [Complex64::new(0.3, 0.0), Complex64::new(0.8, -0.2)],
        [Complex64::new(0.8, 0.2), Complex64::new(-0.5, 0.0)],
    ];
    UnitaryOp::Composition(vec![
        UnitaryOp::Scalar(Complex64::from_polar(1.0, angle / 2.0)),
        two_plane_rotation(&frame, generator, angle).unwrap(),
        UnitaryOp::SelectiveInversion(marked),
        haar_random_unitary(dim, seed.wrapping_mul(31)).unwrap(),
        UnitaryOp::WalshHadamard,
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn operator_stacks_preserve_norm(
        n in 2u32..=5,
        seed in any::<u64>(),
        state_seed in any::<u64>(),
        angle in -3.0f64..3.0,
    ) {
        let op = mixed_stack(n, seed, angle);
        let v = StateVector::random(n, state_seed).unwrap();
        let moved = op.apply(&v).unwrap();
        prop_assert!((moved.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compositions_invert_exactly(
        n in 2u32..=5,
        seed in any::<u64>(),
        state_seed in any::<u64>(),
        angle in -3.0f64..3.0,
    ) {
        let op = mixed_stack(n, seed, angle);
        let v = StateVector::random(n, state_seed).unwrap();
        let round_trip = op.inverse().apply(&op.apply(&v).unwrap()).unwrap();
        let max_diff = v
            .amplitudes()
            .iter()
            .zip(round_trip.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(max_diff < 1e-10, "round trip diff {max_diff}");
    }

    #[test]
    fn walsh_hadamard_is_involutive_on_random_states(
        n in 1u32..=8,
        seed in any::<u64>(),
    ) {
        let v = StateVector::random(n, seed).unwrap();
        let round_trip = walsh_hadamard(&walsh_hadamard(&v));
        let max_diff = v
            .amplitudes()
            .iter()
            .zip(round_trip.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        prop_assert!(max_diff < 1e-13);
    }

    #[test]
    fn frames_reconstruct_their_second_vector(
        n in 1u32..=6,
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        prop_assume!(seed_a != seed_b);
        let a = StateVector::random(n, seed_a).unwrap();
        let b = StateVector::random(n, seed_b).unwrap();
        let frame = make_frame(&a, &b).unwrap();
        let c = frame.overlap();
        let w = (1.0 - c.norm_sqr()).sqrt();
        let max_diff = b
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, bk)| {
                (bk - c * frame.e0().amplitudes()[k] - w * frame.e1().amplitudes()[k]).norm()
            })
            .fold(0.0, f64::max);
        prop_assert!(max_diff < 1e-12);
    }

    #[test]
    fn projective_metrics_ignore_phases(
        n in 1u32..=6,
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
        phi_a in -3.2f64..3.2,
        phi_b in -3.2f64..3.2,
    ) {
        let a = StateVector::random(n, seed_a).unwrap();
        let b = StateVector::random(n, seed_b).unwrap();
        let fs = fs_distance(&a, &b).unwrap();
        let barg = bargmann_angle(&a, &b).unwrap();
        let fs_rot = fs_distance(&with_phase(&a, phi_a), &with_phase(&b, phi_b)).unwrap();
        let barg_rot =
            bargmann_angle(&with_phase(&a, phi_a), &with_phase(&b, phi_b)).unwrap();
        prop_assert!((fs - fs_rot).abs() < 1e-12);
        prop_assert!((barg - barg_rot).abs() < 1e-12);
    }

    #[test]
    fn projective_metrics_are_unitarily_invariant(
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
        seed_u in any::<u64>(),
    ) {
        let a = StateVector::random(4, seed_a).unwrap();
        let b = StateVector::random(4, seed_b).unwrap();
        let u = haar_random_unitary(16, seed_u).unwrap();
        let fs = fs_distance(&a, &b).unwrap();
        let fs_moved = fs_distance(&u.apply(&a).unwrap(), &u.apply(&b).unwrap()).unwrap();
        prop_assert!((fs - fs_moved).abs() < 1e-11);
    }

    #[test]
    fn chord_and_angle_agree(
        n in 1u32..=6,
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
    ) {
        let a = StateVector::random(n, seed_a).unwrap();
        let b = StateVector::random(n, seed_b).unwrap();
        let fs = fs_distance(&a, &b).unwrap();
        prop_assume!(fs > 1e-3); // colliding seeds
        let barg = bargmann_angle(&a, &b).unwrap();
        prop_assert!((fs - 2.0 * (barg / 2.0).sin()).abs() < 1e-9);
    }

    #[test]
    fn distance_estimates_satisfy_the_factor_two_identity(
        u in 1e-6f64..0.999,
    ) {
        let u = OverlapMagnitude::new(u).unwrap();
        let composite = grover_step_estimate(u);
        let rotor = rotor_steps_by_distance(u, 1.0).unwrap();
        prop_assert!(!composite.divergent && !rotor.divergent);
        prop_assert!((rotor.steps - 2.0 * composite.steps).abs() <= 1e-12 * rotor.steps);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn one_composite_step_moves_exactly_the_closed_form_distance(
        n in 2u32..=7,
        target_raw in any::<usize>(),
        seed in any::<u64>(),
        use_haar in any::<bool>(),
    ) {
        let dim = 1usize << n;
        let target = target_raw % dim;
        let prep = if use_haar {
            haar_random_unitary(dim, seed).unwrap()
        } else {
            UnitaryOp::WalshHadamard
        };
        let spec = SearchSpec::new(
            n,
            target,
            prep,
            StateVector::basis(n, 0).unwrap(),
            1.0,
        )
        .unwrap();
        let u = spec.coupling().unwrap().norm();
        prop_assume!(u > 1e-8 && u < 1.0 - 1e-8);
        let q = build_q(&spec).unwrap();
        let moved = q.apply(spec.initial()).unwrap();
        let measured = fs_distance(spec.initial(), &moved).unwrap();
        let expected = one_step_displacement(OverlapMagnitude::new(u).unwrap()).exact;
        prop_assert!(
            (measured - expected).abs() < 1e-10,
            "u = {u}: measured {measured} vs exact {expected}"
        );
    }

    #[test]
    fn composite_negates_the_orthogonal_complement(
        n in 2u32..=6,
        target_raw in any::<usize>(),
        probe_seed in any::<u64>(),
    ) {
        let dim = 1usize << n;
        let spec = SearchSpec::exhaustive(n, target_raw % dim).unwrap();
        let reference = spec.pulled_back_target().unwrap();
        let probe = StateVector::random(n, probe_seed).unwrap();
        let c_i = inner_product(spec.initial(), &probe).unwrap();
        let c_f = inner_product(&reference, &probe).unwrap();
        // Project out the search plane (the two rays are not orthogonal, so
        // orthogonalize the reference against the initial state first).
        let c = inner_product(spec.initial(), &reference).unwrap();
        let w = (1.0 - c.norm_sqr()).sqrt();
        prop_assume!(w > 1e-6);
        let c_perp = (c_f - c.conj() * c_i) / w;
        let raw: Vec<Complex64> = probe
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let e1 = (reference.amplitudes()[k] - c * spec.initial().amplitudes()[k]) / w;
                p - c_i * spec.initial().amplitudes()[k] - c_perp * e1
            })
            .collect();
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let off_plane = StateVector::normalized(raw).unwrap();
        let q = build_q(&spec).unwrap();
        let moved = q.apply(&off_plane).unwrap();
        let max_diff = off_plane
            .amplitudes()
            .iter()
            .zip(moved.amplitudes())
            .map(|(a, b)| (a + b).norm())
            .fold(0.0, f64::max);
        prop_assert!(max_diff < 1e-9, "Q should negate off-plane vectors, diff {max_diff}");
    }
}

#[test]
fn integrator_converges_at_fourth_order() {
    // P(0.5) = sin^2(pi/4) = 1/2 exactly for the resonant two-level flip;
    // halving the step must cut the endpoint error by ~16, and certainly 8.
    let h = Hamiltonian::constant_rabi(std::f64::consts::PI).unwrap();
    let initial = StateVector::basis(1, 0).unwrap();
    let target = StateVector::basis(1, 1).unwrap();
    let error_at = |steps: usize| -> f64 {
        let trace = evolve(&h, &initial, &target, 0.5, steps).unwrap();
        (trace.p.last().unwrap() - 0.5).abs()
    };
    let errors: Vec<f64> = [32, 64, 128, 256].iter().map(|&s| error_at(s)).collect();
    for pair in errors.windows(2).take(2) {
        assert!(
            pair[0] / pair[1] >= 8.0,
            "convergence ratio {} below fourth order",
            pair[0] / pair[1]
        );
    }
    assert!(errors[3] < errors[2]);
}

#[test]
fn rotor_advances_add_up_along_the_geodesic()
{
    // In an engineered orthogonal frame every application advances the
    // Bargmann angle by exactly alpha, so k steps advance by k alpha.
    let frame = make_frame(
        &StateVector::basis(3, 1).unwrap(),
        &StateVector::basis(3, 6).unwrap(),
    )
    .unwrap();
    let v = qsearch_core::rotor::VOperator::from_frame(
        frame,
        OverlapMagnitude::new(0.125).unwrap(),
        0.5,
    )
    .unwrap();
    let initial = StateVector::basis(3, 1).unwrap();
    let mut state = initial.clone();
    for k in 1..=4 {
        state = v.apply(&state).unwrap();
        let angle = bargmann_angle(&initial, &state).unwrap();
        assert!(
            (angle - k as f64 * v.alpha()).abs() < 1e-9,
            "step {k}: angle {angle} vs {}",
            k as f64 * v.alpha()
        );
    }
}
