//! Computation stages of `run` and `verify`, separated from file output.

use std::path::Path;

use qpath::decoder::HnResidual;
use qpath::encoding::assign_frequencies_with;
use qpath::io::OracleRow;
use qpath::linalg::unitarity_defect;
use qpath::oracle::dyson_amplitudes;
use qpath::propagator::PopulationTrajectory;
use qpath::{
    build_reports, fidelity, hn_consistency, optimize, population_trajectory, propagate, transition_graph, CMatrix64,
    EncodingOptions, EncodingScheme, Gate, Mode, Pulse, Report, Run, Sweep, System,
};
use serde::Serialize;

use crate::config::{EncodingSpec, PulseSpec, RunConfig};
use crate::error::CliError;

/// Largest accepted `|Σ bins − U_ba| / max(1, |U_ba|)`.
pub const PARTITION_TOL: f64 = 1e-10;
/// Largest accepted `‖U†U − I‖_max`.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Allowance added to the unassigned mass when grouping `NH` under `H`.
pub const CONSISTENCY_TOL: f64 = 1e-6;
/// Oracle gaps below this are rounding noise and carry no convergence rate.
const GAP_NOISE: f64 = 1e-12;

/// False for NaN.
fn within(x: f64, tol: f64) -> bool {
    x <= tol
}

pub struct Prepared {
    pub system: System,
    pub pulse: Pulse,
    /// `(b, a)` pairs.
    pub elements: Vec<(usize, usize)>,
    pub populations: Vec<usize>,
    pub target: Option<Gate>,
    pub optimization: Option<Run>,
}

/// Builds the system, resolves labels and produces the pulse, running the
/// optimizer when the config asks for it.
pub fn prepare(config: &RunConfig, base_dir: &Path) -> Result<Prepared, CliError> {
    let system = config.system.build()?;
    let elements = config.resolve_elements(&system)?;
    let populations = config.resolve_populations(&system)?;
    let (pulse, target, optimization) = match &config.pulse {
        PulseSpec::Optimize(spec) => {
            let target = spec.target()?;
            if target.dim() != system.dim() {
                return Err(CliError::Config(format!(
                    "target {} acts on dimension {}, the system has {}",
                    spec.target,
                    target.dim(),
                    system.dim()
                )));
            }
            let run = optimize(&system, &target, &spec.options())?;
            (run.pulse.clone(), Some(target), Some(run))
        }
        _ => (config.fixed_pulse(base_dir)?.expect("fixed pulse source"), None, None),
    };
    Ok(Prepared { system, pulse, elements, populations, target, optimization })
}

pub struct EncodedRun {
    pub spec: EncodingSpec,
    pub scheme: EncodingScheme,
    /// One per requested element, in config order.
    pub reports: Vec<Report>,
    pub sweep: Sweep<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Consistency {
    pub element: String,
    pub nh_n_max: usize,
    pub h_n_max: usize,
    pub residuals: Vec<HnResidual<f64>>,
    pub max_residual: f64,
    pub allowance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Checks {
    pub partition_tol: f64,
    pub max_partition_residual: f64,
    pub unitarity_tol: f64,
    pub max_unitarity_defect: f64,
    pub violations: Vec<String>,
}

pub struct Analysis {
    pub u_final: CMatrix64,
    pub gate_fidelity: Option<f64>,
    pub encodings: Vec<EncodedRun>,
    pub populations: Vec<(usize, PopulationTrajectory<f64>)>,
    pub consistency: Vec<Consistency>,
    pub checks: Checks,
}

pub fn encode(prepared: &Prepared, spec: EncodingSpec, floor: f64) -> Result<EncodedRun, CliError> {
    let mut options = EncodingOptions::new(spec.mode, spec.n_max);
    if let Some(guard) = spec.guard_order {
        options.guard_order = guard;
    }
    let scheme = assign_frequencies_with(&transition_graph(&prepared.system), &options)?;
    let (reports, sweep) = build_reports(&prepared.system, &prepared.pulse, &scheme, &prepared.elements, floor)?;
    Ok(EncodedRun { spec, scheme, reports, sweep })
}

/// Every `NH` report grouped under every `H` report of the same element.
pub fn consistency(encodings: &[EncodedRun]) -> Vec<Consistency> {
    let mut out = Vec::new();
    for nh in encodings.iter().filter(|e| e.spec.mode == Mode::NH) {
        for h in encodings.iter().filter(|e| e.spec.mode == Mode::H) {
            for (nr, hr) in nh.reports.iter().zip(&h.reports) {
                let residuals = hn_consistency(nr, hr);
                let max_residual = residuals.iter().map(|r| r.residual).fold(0.0, f64::max);
                let allowance = CONSISTENCY_TOL + nr.unassigned_mass + hr.unassigned_mass;
                out.push(Consistency {
                    element: nr.element_label(),
                    nh_n_max: nh.spec.n_max,
                    h_n_max: h.spec.n_max,
                    residuals,
                    max_residual,
                    allowance,
                    pass: max_residual <= allowance,
                });
            }
        }
    }
    out
}

pub fn analyze(config: &RunConfig, prepared: &Prepared) -> Result<Analysis, CliError> {
    let u_final = propagate(&prepared.system, &prepared.pulse, None)?.u_final;
    let gate_fidelity = prepared.target.as_ref().map(|t| fidelity(&u_final, t)).transpose()?;
    let encodings = config
        .encoding
        .iter()
        .map(|&spec| encode(prepared, spec, config.floor))
        .collect::<Result<Vec<_>, _>>()?;
    let populations = prepared
        .populations
        .iter()
        .map(|&i| Ok((i, population_trajectory(&prepared.system, &prepared.pulse, i)?)))
        .collect::<Result<Vec<_>, CliError>>()?;

    let mut checks = Checks { partition_tol: PARTITION_TOL, unitarity_tol: UNITARITY_TOL, ..Default::default() };
    let direct_defect = unitarity_defect(&u_final);
    checks.max_unitarity_defect = direct_defect;
    if !within(direct_defect, UNITARITY_TOL) {
        checks.violations.push(format!("U(T) unitarity defect {direct_defect:e}"));
    }
    for run in &encodings {
        if let Some(defect) = run.sweep.max_unitarity_defect {
            checks.max_unitarity_defect = checks.max_unitarity_defect.max(defect);
            if !within(defect, UNITARITY_TOL) {
                checks.violations.push(format!("{} n_max {} sweep unitarity defect {defect:e}", run.spec.mode, run.spec.n_max));
            }
        }
        for report in &run.reports {
            let r = report.partition_residual();
            checks.max_partition_residual = checks.max_partition_residual.max(r);
            if !within(r, PARTITION_TOL) {
                checks.violations.push(format!(
                    "{} {} n_max {} partition residual {r:e}",
                    report.element_label(),
                    report.mode,
                    report.n_max
                ));
            }
        }
    }
    let consistency = consistency(&encodings);
    Ok(Analysis { u_final, gate_fidelity, encodings, populations, consistency, checks })
}

#[derive(Debug, Clone, Serialize)]
pub struct Comparison {
    pub dt: f64,
    pub rows: Vec<OracleRow>,
    pub max_gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub n_max: usize,
    pub tolerance: f64,
    pub coarse: Comparison,
    pub refined: Option<Comparison>,
    /// Coarse over refined maximum gap, when the coarse gap is above noise.
    pub ratio: Option<f64>,
    pub pass: bool,
}

/// Decoded singleton `NH` classes of order `1..=max_order` against the
/// oracle quadrature on the same pulse.
pub fn compare_with_oracle(prepared: &Prepared, pulse: &Pulse, max_order: usize) -> Result<Comparison, CliError> {
    let spec = EncodingSpec { mode: Mode::NH, n_max: max_order, guard_order: None };
    let scheme = assign_frequencies_with(&transition_graph(&prepared.system), &EncodingOptions::new(spec.mode, spec.n_max))?;
    let (reports, _) = build_reports(&prepared.system, pulse, &scheme, &prepared.elements, 0.0)?;
    let mut pathways = Vec::new();
    let mut decoded = Vec::new();
    for report in &reports {
        for c in report.classes.iter().filter(|c| c.class.is_singleton() && (1..=max_order).contains(&c.class.order())) {
            pathways.push(c.class.representative.clone());
            decoded.push(c.amplitude);
        }
    }
    let oracle = dyson_amplitudes(&prepared.system, pulse, &pathways, max_order)?;
    let labels = prepared.system.basis_labels();
    let rows: Vec<OracleRow> = oracle.iter().zip(decoded).map(|(o, d)| OracleRow::new(o, d, labels)).collect();
    let max_gap = rows.iter().map(|r| r.gap).fold(0.0, f64::max);
    Ok(Comparison { dt: pulse.dt(), rows, max_gap })
}

pub fn verify(config: &RunConfig, prepared: &Prepared) -> Result<VerifyOutcome, CliError> {
    let v = config.verify;
    let coarse = compare_with_oracle(prepared, &prepared.pulse, v.max_order)?;
    let refined = v.refine.then(|| compare_with_oracle(prepared, &prepared.pulse.refine(2), v.max_order)).transpose()?;
    let ratio = refined
        .as_ref()
        .filter(|r| coarse.max_gap > GAP_NOISE && r.max_gap > 0.0)
        .map(|r| coarse.max_gap / r.max_gap);
    let pass = coarse.max_gap < v.tolerance;
    Ok(VerifyOutcome { n_max: v.max_order, tolerance: v.tolerance, coarse, refined, ratio, pass })
}
