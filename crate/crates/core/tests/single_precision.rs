use approx::assert_abs_diff_eq;
use qpath::{
    assign_frequencies, build_report, build_x_gate_system, propagate, transition_graph, xgate_analytic, Mode, Pulse32,
    System32,
};

#[test]
fn x_gate_decodes_in_f32() {
    let (system, pulse): (System32, Pulse32) = build_x_gate_system();
    let scheme = assign_frequencies(&transition_graph(&system), Mode::NH, 6).unwrap();
    let report = build_report(&system, &pulse, &scheme, (1, 0), 0.0f32).unwrap();
    for n in [1usize, 3, 5] {
        let class = report.classes.iter().find(|c| c.class.order() == n).unwrap();
        assert_abs_diff_eq!(class.magnitude, xgate_analytic::<f32>(n, (1, 0)).norm(), epsilon = 1e-4);
    }
    assert!(report.partition_residual() < 1e-5);
    let u = propagate(&system, &pulse, None).unwrap().u_final;
    assert_abs_diff_eq!(u[(1, 0)].im, -1.0, epsilon = 1e-5);
}

#[test]
fn h_encoding_in_f32_sums_to_one() {
    let (system, pulse): (System32, Pulse32) = build_x_gate_system();
    let scheme = assign_frequencies(&transition_graph(&system), Mode::H, 6).unwrap();
    let report = build_report(&system, &pulse, &scheme, (1, 0), 0.0f32).unwrap();
    assert_eq!(report.classes[0].class.order(), 1);
    assert_abs_diff_eq!(report.coherent_sum.norm(), 1.0, epsilon = 1e-5);
}
