//! Invariants of the pathway machinery on randomly drawn systems and pulses.

use nalgebra::{Complex, DMatrix};
use proptest::prelude::*;
use qpath::decoder::{decode, phase_degrees};
use qpath::encoding::{assign_frequencies, modulation_factors, sweep};
use qpath::linalg::unitarity_defect;
use qpath::optimizer::random_pulse;
use qpath::propagator::{preserves_hermiticity, propagate_with, ExpMethod, PropagateOptions};
use qpath::{
    build_report, build_two_qubit_system, classify, enumerate_pathways, fidelity, propagate, transition_graph, Mode,
    Pulse, System, TargetGate, TransitionGraph,
};

fn two_qubit(w1: f64, w2: f64, j: f64) -> System {
    build_two_qubit_system(w1, w2, j).unwrap()
}

fn flip_graph() -> TransitionGraph {
    transition_graph(&two_qubit(1.0, 2.0, 0.5))
}

/// Walk counts by order from powers of the adjacency matrix.
fn walk_counts(graph: &TransitionGraph, a: usize, b: usize, n_max: usize) -> Vec<u64> {
    let dim = graph.dim();
    let adj = DMatrix::from_fn(dim, dim, |j, i| u64::from(graph.contains(i, j)));
    let mut power = DMatrix::<u64>::identity(dim, dim);
    let mut counts = Vec::new();
    for _ in 0..=n_max {
        counts.push(power[(b, a)]);
        power = &adj * &power;
    }
    counts
}

fn pulse_strategy(steps: usize) -> impl Strategy<Value = Pulse> {
    (0u64..1000, 0.5f64..2.5, 0.2f64..2.0)
        .prop_map(move |(seed, t, amp)| random_pulse(2, t, steps, seed, amp).unwrap())
}

fn system_strategy() -> impl Strategy<Value = System> {
    (0.2f64..3.0, 0.2f64..3.0, -2.0f64..2.0).prop_map(|(w1, w2, j)| two_qubit(w1, w2, j))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn walk_counts_match_adjacency_powers(a in 0usize..4, b in 0usize..4, n_max in 0usize..8) {
        let graph = flip_graph();
        let walks = enumerate_pathways(&graph, a, b, n_max);
        let expected = walk_counts(&graph, a, b, n_max);
        for (n, &count) in expected.iter().enumerate() {
            prop_assert_eq!(walks.iter().filter(|p| p.order() == n).count() as u64, count);
        }
        prop_assert!(walks.iter().all(|p| p.is_walk_on(&graph) && p.start() == a && p.end() == b));
    }

    #[test]
    fn orders_share_the_parity_of_the_hamming_distance(a in 0usize..4, b in 0usize..4, n_max in 0usize..9) {
        let parity = (a ^ b).count_ones() as usize % 2;
        for p in enumerate_pathways(&flip_graph(), a, b, n_max) {
            prop_assert_eq!(p.order() % 2, parity);
        }
    }

    #[test]
    fn nh_classes_refine_h_classes(a in 0usize..4, b in 0usize..4, n_max in 1usize..7) {
        let walks = enumerate_pathways(&flip_graph(), a, b, n_max);
        let nh = classify(&walks, Mode::NH);
        let h = classify(&walks, Mode::H);
        prop_assert!(nh.len() >= h.len());
        prop_assert_eq!(nh.iter().map(|c| c.members).sum::<usize>(), walks.len());
        for hc in &h {
            let children: usize = nh.iter().filter(|c| c.key.to_hermitian() == hc.key).map(|c| c.members).sum();
            prop_assert_eq!(children, hc.members);
        }
        for c in nh.iter().chain(&h) {
            prop_assert_eq!(c.representative.key(c.mode), c.key.clone());
        }
    }

    #[test]
    fn hermitian_factors_keep_generators_hermitian(n_max in 1usize..6, s in -10.0f64..10.0) {
        let scheme = assign_frequencies(&flip_graph(), Mode::H, n_max).unwrap();
        prop_assert!(preserves_hermiticity(&modulation_factors(&scheme, s)));
        let nh = assign_frequencies(&flip_graph(), Mode::NH, n_max.min(3)).unwrap();
        prop_assert!(!preserves_hermiticity(&modulation_factors(&nh, 1.0 + s.abs())));
    }

    #[test]
    fn hermitian_encoding_stays_unitary(system in system_strategy(), pulse in pulse_strategy(16), s in -7.0f64..7.0) {
        let scheme = assign_frequencies(&transition_graph(&system), Mode::H, 4).unwrap();
        let factors = modulation_factors(&scheme, s);
        let options = PropagateOptions { method: ExpMethod::Eigen, keep_trajectory: false };
        let u = propagate_with(&system, &pulse, Some(&factors), options).unwrap().u_final;
        prop_assert!(unitarity_defect(&u) < 1e-10);
    }

    #[test]
    fn propagation_composes_over_a_split(system in system_strategy(), pulse in pulse_strategy(12), k in 1usize..12) {
        let (first, second) = pulse.split_at(k).unwrap();
        let whole = propagate(&system, &pulse, None).unwrap().u_final;
        let parts = propagate(&system, &second, None).unwrap().u_final * propagate(&system, &first, None).unwrap().u_final;
        prop_assert!(qpath::linalg::max_abs(&(whole - parts)) < 1e-12);
    }

    #[test]
    fn fidelity_ignores_global_phase(system in system_strategy(), pulse in pulse_strategy(8), phi in -3.2f64..3.2) {
        let u = propagate(&system, &pulse, None).unwrap().u_final;
        let target = TargetGate::new("U", u.clone()).unwrap();
        let rotated = u.map(|z| z * Complex::from_polar(1.0, phi));
        prop_assert!((fidelity(&rotated, &target).unwrap() - 1.0).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn decoded_bins_sum_to_the_gate_element(
        system in system_strategy(),
        pulse in pulse_strategy(8),
        a in 0usize..4,
        b in 0usize..4,
        mode in prop_oneof![Just(Mode::H), Just(Mode::NH)],
    ) {
        let scheme = assign_frequencies(&transition_graph(&system), mode, 3).unwrap();
        let report = build_report(&system, &pulse, &scheme, (b, a), 0.0).unwrap();
        prop_assert!(report.partition_residual() < 1e-10);
        prop_assert!(report.classes.windows(2).all(|w| w[0].magnitude >= w[1].magnitude));
    }

    #[test]
    fn first_sample_is_the_unmodulated_element(system in system_strategy(), pulse in pulse_strategy(8)) {
        let graph = transition_graph(&system);
        let direct = propagate(&system, &pulse, None).unwrap().u_final;
        let scheme = assign_frequencies(&graph, Mode::H, 3).unwrap();
        let sw = sweep(&system, &pulse, &scheme, &[(3, 0), (1, 1)]).unwrap();
        prop_assert_eq!(sw.samples[0][0], direct[(3, 0)]);
        prop_assert_eq!(sw.samples[1][0], direct[(1, 1)]);
    }

    #[test]
    fn a_global_phase_rotates_every_class(system in system_strategy(), pulse in pulse_strategy(8), phi in -3.0f64..3.0) {
        let scheme = assign_frequencies(&transition_graph(&system), Mode::NH, 2).unwrap();
        let sw = sweep(&system, &pulse, &scheme, &[(2, 0)]).unwrap();
        let classes = scheme.classes(0, 2);
        let plain = decode(&sw.samples[0], &scheme, &classes).unwrap();
        let turn = Complex::from_polar(1.0, phi);
        let rotated: Vec<_> = sw.samples[0].iter().map(|z| z * turn).collect();
        let turned = decode(&rotated, &scheme, &classes).unwrap();
        for (p, t) in plain.classes.iter().zip(&turned.classes) {
            prop_assert!((p.magnitude - t.magnitude).abs() < 1e-12);
            if p.magnitude > 1e-6 {
                let shift = (phase_degrees(t.amplitude) - phase_degrees(p.amplitude) - phi.to_degrees()).rem_euclid(360.0);
                prop_assert!(shift.min(360.0 - shift) < 1e-6);
            }
        }
    }
}
