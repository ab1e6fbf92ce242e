//! Acceptance gate over the shipped configs. Each test prints one
//! `criterion N: PASS|FAIL` line to stderr (uncaptured) before asserting.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use qpath::decoder::phase_degrees;
use qpath::optimizer::{fidelity_gradient, pulse_fidelity, random_pulse};
use qpath::{build_two_qubit_system, xgate_analytic, Mode, Report, TargetGate};
use qpath_cli::config::SystemSpec;
use qpath_cli::pipeline::{PARTITION_TOL, UNITARITY_TOL};
use qpath_cli::{analyze, prepare, verify, Analysis, Prepared, RunConfig};

struct Scenario {
    config: RunConfig,
    prepared: Prepared,
    analysis: Analysis,
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn load(name: &str) -> Scenario {
    let path = configs_dir().join(format!("{name}.cfg"));
    let config = RunConfig::load(&path).unwrap();
    let prepared = prepare(&config, &configs_dir()).unwrap();
    let analysis = analyze(&config, &prepared).unwrap();
    Scenario { config, prepared, analysis }
}

macro_rules! scenario {
    ($fn_name:ident, $file:literal) => {
        fn $fn_name() -> &'static Scenario {
            static CELL: OnceLock<Scenario> = OnceLock::new();
            CELL.get_or_init(|| load($file))
        }
    };
}

scenario!(xgate, "xgate");
scenario!(cnot_i, "cnot-i");
scenario!(cnot_ii, "cnot-ii");
scenario!(swap, "swap");

fn all() -> [(&'static str, &'static Scenario); 4] {
    [("xgate", xgate()), ("cnot-i", cnot_i()), ("cnot-ii", cnot_ii()), ("swap", swap())]
}

fn report<'a>(s: &'a Scenario, mode: Mode, from: &str, to: &str) -> &'a Report {
    let system = &s.prepared.system;
    let element = (system.index_of(to).unwrap(), system.index_of(from).unwrap());
    s.analysis
        .encodings
        .iter()
        .filter(|e| e.spec.mode == mode)
        .flat_map(|e| &e.reports)
        .find(|r| r.element == element)
        .unwrap_or_else(|| panic!("no {mode} report for {from}→{to}"))
}

fn verdict(n: u32, title: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "criterion {n}: {status} [{title}] {detail}");
}

/// Angular distance in degrees, modulo 360.
fn phase_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[test]
fn criterion_1_x_gate_table() {
    let s = xgate();
    let mut failures = Vec::new();
    let tables = [
        (("0", "0"), (0, 0), [0usize, 2, 4, 6], [1.000, 1.234, 0.254, 0.021], [0.0, 180.0, 0.0, 180.0]),
        (("0", "1"), (1, 0), [1, 3, 5, 7], [1.571, 0.646, 0.080, 0.005], [270.0, 90.0, 270.0, 90.0]),
    ];
    for ((from, to), element, orders, printed, phases) in tables {
        let r = report(s, Mode::NH, from, to);
        for ((n, shown), phase) in orders.into_iter().zip(printed).zip(phases) {
            let class = r.classes.iter().find(|c| c.class.order() == n);
            let Some(c) = class else {
                failures.push(format!("{from}→{to}: no order-{n} class"));
                continue;
            };
            let exact = xgate_analytic::<f64>(n, element);
            let ok = (c.magnitude - exact.norm()).abs() < 1e-3
                && (c.magnitude - shown).abs() < 5e-4 + 1e-9
                && phase_gap(phase_degrees(c.amplitude), phase) < 0.1;
            if !ok {
                failures.push(format!("{from}→{to} order {n}: {:.6} at {:.2}°", c.magnitude, phase_degrees(c.amplitude)));
            }
        }
    }
    let s00 = report(s, Mode::NH, "0", "0").coherent_sum;
    let s10 = report(s, Mode::NH, "0", "1").coherent_sum;
    if s00.norm() >= 1e-6 {
        failures.push(format!("|Σ00| = {:e}", s00.norm()));
    }
    if (s10.norm() - 1.0).abs() > 1e-6 || phase_gap(phase_degrees(s10), 270.0) > 0.1 {
        failures.push(format!("Σ10 = {:.9} at {:.4}°", s10.norm(), phase_degrees(s10)));
    }
    let detail = format!("|Σ00| = {:.1e}, |Σ10| = {:.9} at {:.3}° {}", s00.norm(), s10.norm(), phase_degrees(s10).rem_euclid(360.0), failures.join("; "));
    verdict(1, "X-gate table", failures.is_empty(), &detail);
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn criterion_2_partition_identity() {
    let mut worst = (0.0f64, String::new());
    let mut count = 0;
    for (name, s) in all() {
        for r in s.analysis.encodings.iter().flat_map(|e| &e.reports) {
            count += 1;
            let res = r.partition_residual();
            if res.is_nan() || res > worst.0 {
                worst = (res, format!("{name} {} {}", r.element_label(), r.mode));
            }
        }
    }
    let ok = worst.0 <= PARTITION_TOL;
    verdict(2, "partition identity", ok, &format!("{count} reports, worst {:.2e} ({})", worst.0, worst.1));
    assert!(ok);
}

#[test]
fn criterion_3_oracle_equivalence() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, s) in all() {
        let mut config = s.config.clone();
        config.verify.max_order = config.verify.max_order.max(3);
        config.verify.refine = true;
        let outcome = verify(&config, &s.prepared).unwrap();
        let ratio = outcome.ratio.unwrap_or(f64::NAN);
        let pass = !outcome.coarse.rows.is_empty() && outcome.coarse.max_gap < 1e-4 && (3.5..=4.5).contains(&ratio);
        ok &= pass;
        lines.push(format!("{name}: {} classes, gap {:.2e}, ratio {ratio:.3}", outcome.coarse.rows.len(), outcome.coarse.max_gap));
    }
    verdict(3, "oracle equivalence", ok, &lines.join("; "));
    assert!(ok, "{lines:?}");
}

#[test]
fn criterion_4_destructive_interference() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, s) in [("cnot-i", cnot_i()), ("cnot-ii", cnot_ii())] {
        let fid = s.analysis.gate_fidelity.unwrap();
        let r = report(s, Mode::NH, "10", "10");
        let above: f64 = r.classes.iter().filter(|c| c.magnitude > 0.2).map(|c| c.magnitude).sum();
        let sum = r.coherent_sum.norm();
        let pass = fid >= 0.999 && sum < 1e-2 && above > 1.0;
        ok &= pass;
        lines.push(format!("{name}: F = {fid:.8}, |Σ| = {sum:.2e}, Σ|a| above 0.2 = {above:.3}"));
    }
    verdict(4, "zero element from interference", ok, &lines.join("; "));
    assert!(ok, "{lines:?}");
}

#[test]
fn criterion_5_swap_structure() {
    let s = swap();
    let fid = s.analysis.gate_fidelity.unwrap();
    let r = report(s, Mode::H, "01", "10");
    let no_first_order = r.classes.iter().all(|c| c.class.order() != 1);
    let mut top: Vec<String> = r.classes.iter().take(2).map(|c| c.class.display(&r.labels)).collect();
    top.sort();
    let expected = ["[01→00→10]^H".to_string(), "[01→11→10]^H".to_string()];
    let sum = r.coherent_sum.norm();
    let ok = fid >= 0.999 && no_first_order && top == expected && (sum - 1.0).abs() <= 1e-3;
    let detail = format!(
        "F = {fid:.8}, top two {} ({:.3}, {:.3}), |Σ| = {sum:.6}, order-1 classes absent: {no_first_order}",
        top.join(" "),
        r.classes[0].magnitude,
        r.classes[1].magnitude
    );
    verdict(5, "SWAP mechanism", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_6_h_nh_consistency() {
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, s) in [("xgate", xgate()), ("swap", swap())] {
        assert!(!s.analysis.consistency.is_empty(), "{name} has no NH/H pair");
        for c in &s.analysis.consistency {
            ok &= c.pass && !c.residuals.is_empty();
            lines.push(format!(
                "{name} {}: {} classes, residual {:.2e} ≤ allowance {:.2e}",
                c.element,
                c.residuals.len(),
                c.max_residual,
                c.allowance
            ));
        }
    }
    verdict(6, "H/NH consistency", ok, &lines.join("; "));
    assert!(ok, "{lines:?}");
}

#[test]
fn criterion_7_unitarity_and_gradient() {
    let mut worst = 0.0f64;
    let mut sweeps = 0;
    for (_, s) in all() {
        for e in &s.analysis.encodings {
            if let Some(d) = e.sweep.max_unitarity_defect {
                sweeps += 1;
                worst = worst.max(d);
            }
        }
    }

    let system = build_two_qubit_system(0.9, 2.3, 1.7).unwrap();
    let pulse = random_pulse(2, 1.5, 24, 5, 2.0).unwrap();
    let target = TargetGate::cnot();
    let (_, grad) = fidelity_gradient(&system, &pulse, &target).unwrap();
    let h = 1e-6;
    let mut fd = grad.clone();
    for k in 0..grad.nrows() {
        for c in 0..grad.ncols() {
            let shifted = |delta: f64| {
                let mut p = pulse.clone();
                p.amplitudes_mut()[(k, c)] += delta;
                pulse_fidelity(&system, &p, &target).unwrap()
            };
            fd[(k, c)] = (shifted(h) - shifted(-h)) / (2.0 * h);
        }
    }
    let rel = (&grad - &fd).norm() / fd.norm();
    let ok = sweeps > 0 && worst <= UNITARITY_TOL && rel < 1e-5;
    let detail = format!("{sweeps} H sweeps, worst defect {worst:.2e}; gradient relative error {rel:.2e}");
    verdict(7, "unitarity and gradient", ok, &detail);
    assert!(ok, "{detail}");
}

#[test]
fn criterion_8_documented_exclusion() {
    let readme = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md")).unwrap_or_default();
    let readme = readme.split_whitespace().collect::<Vec<_>>().join(" ");
    let chosen_parameters = ["cnot-i", "cnot-ii", "swap"].iter().all(|name| {
        let config = RunConfig::load(&configs_dir().join(format!("{name}.cfg"))).unwrap();
        matches!(config.system, SystemSpec::TwoQubit { .. })
    });
    let documented = readme.contains("parameters are chosen here") && readme.contains("are not reproduced");
    let ok = chosen_parameters && documented;
    verdict(
        8,
        "excluded: exact two-qubit table entries and global phases",
        ok,
        "drift parameters and fields are chosen in the configs; README documents the exclusion",
    );
    assert!(ok);
}
