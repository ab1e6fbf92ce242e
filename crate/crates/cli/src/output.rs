//! Artifact rendering. Every file is rendered in memory first and written
//! only once all of them exist.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qpath::io::{
    write_oracle_csv, write_population_csv, write_pulse_csv, write_report_json, write_sweep_csv, write_table_csv,
    SchemeRecord, SystemConfig,
};
use qpath::plot::{line_plot, vector_plot};
use qpath::{Mode, Report};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{write_error, CliError};
use crate::pipeline::{Analysis, Checks, Consistency, Prepared, VerifyOutcome};

/// Files keyed by name relative to the output directory.
pub type Artifacts = BTreeMap<String, Vec<u8>>;

fn slug(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '-' }).collect()
}

fn report_stem(report: &Report) -> String {
    let (b, a) = report.element;
    format!(
        "{}{}_{}_{}",
        report.mode.as_str().to_lowercase(),
        report.n_max,
        slug(&report.labels[a]),
        slug(&report.labels[b])
    )
}

fn json<S: Serialize>(value: &S) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::Core(e.into()))?;
    out.push(b'\n');
    Ok(out)
}

fn render<F>(f: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut Vec<u8>) -> qpath::Result<()>,
{
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub element: String,
    pub mode: Mode,
    pub n_max: usize,
    pub n_s: usize,
    pub coherent_sum: [f64; 2],
    pub direct_value: [f64; 2],
    pub partition_residual: f64,
    pub unassigned_mass: f64,
    pub flagged: bool,
    pub visible_classes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationSummary {
    pub target: String,
    pub seed: u64,
    pub iterations: usize,
    pub converged: bool,
    pub final_fidelity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub status: &'static str,
    pub gate_fidelity: Option<f64>,
    pub optimization: Option<OptimizationSummary>,
    pub checks: Checks,
    pub reports: Vec<ReportSummary>,
    pub consistency: Vec<ConsistencySummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsistencySummary {
    pub element: String,
    pub nh_n_max: usize,
    pub h_n_max: usize,
    pub compared: usize,
    pub max_residual: f64,
    pub allowance: f64,
    pub pass: bool,
}

impl From<&Consistency> for ConsistencySummary {
    fn from(c: &Consistency) -> Self {
        Self {
            element: c.element.clone(),
            nh_n_max: c.nh_n_max,
            h_n_max: c.h_n_max,
            compared: c.residuals.len(),
            max_residual: c.max_residual,
            allowance: c.allowance,
            pass: c.pass,
        }
    }
}

pub fn summarize(config: &RunConfig, prepared: &Prepared, analysis: &Analysis) -> RunSummary {
    RunSummary {
        name: config.name.clone(),
        status: if analysis.checks.violations.is_empty() { "ok" } else { "failed" },
        gate_fidelity: analysis.gate_fidelity,
        optimization: prepared.optimization.as_ref().zip(prepared.target.as_ref()).map(|(run, target)| {
            OptimizationSummary {
                target: target.name.clone(),
                seed: run.seed,
                iterations: run.iterations,
                converged: run.converged,
                final_fidelity: run.final_fidelity(),
            }
        }),
        checks: analysis.checks.clone(),
        reports: analysis
            .encodings
            .iter()
            .flat_map(|e| &e.reports)
            .map(|r| ReportSummary {
                element: r.element_label(),
                mode: r.mode,
                n_max: r.n_max,
                n_s: r.n_s,
                coherent_sum: [r.coherent_sum.re, r.coherent_sum.im],
                direct_value: [r.direct_value.re, r.direct_value.im],
                partition_residual: r.partition_residual(),
                unassigned_mass: r.unassigned_mass,
                flagged: r.flagged(),
                visible_classes: r.visible().count(),
            })
            .collect(),
        consistency: analysis.consistency.iter().map(ConsistencySummary::from).collect(),
    }
}

/// `NH` class display → rank of its parent among the `H` classes.
fn parent_groups(nh: &Report, h: &Report) -> BTreeMap<String, usize> {
    let rank: BTreeMap<_, _> = h.classes.iter().enumerate().map(|(i, c)| (&c.class.key, i)).collect();
    nh.classes
        .iter()
        .filter_map(|c| rank.get(&c.class.key.to_hermitian()).map(|&i| (c.class.display(&nh.labels), i)))
        .collect()
}

#[derive(Serialize)]
struct PulseMeta {
    dt: f64,
    steps: usize,
    n_controls: usize,
    duration: f64,
}

#[derive(Serialize)]
struct RunMeta<'a> {
    config: &'a RunConfig,
    system: SystemConfig,
    pulse: PulseMeta,
    schemes: Vec<SchemeRecord>,
    optimization: Option<&'a qpath::Run>,
}

pub fn run_artifacts(config: &RunConfig, prepared: &Prepared, analysis: &Analysis) -> Result<Artifacts, CliError> {
    let mut files = Artifacts::new();
    let labels = prepared.system.basis_labels();
    let pulse = &prepared.pulse;

    for run in &analysis.encodings {
        for (i, report) in run.reports.iter().enumerate() {
            let stem = report_stem(report);
            files.insert(format!("{stem}.csv"), render(|w| write_table_csv(report, w))?);
            files.insert(format!("{stem}.json"), render(|w| write_report_json(report, w))?);
            let parents = (report.mode == Mode::NH)
                .then(|| analysis.encodings.iter().find(|e| e.spec.mode == Mode::H))
                .flatten()
                .map(|h| parent_groups(report, &h.reports[i]));
            files.insert(format!("{stem}.svg"), vector_plot(report, parents.as_ref()).into_bytes());
        }
        if config.cache_sweeps {
            let name = format!("sweep_{}{}.csv", run.spec.mode.as_str().to_lowercase(), run.spec.n_max);
            files.insert(name, render(|w| write_sweep_csv(&run.sweep, labels, w))?);
        }
    }

    for (initial, traj) in &analysis.populations {
        let label = &labels[*initial];
        files.insert(format!("populations_{}.csv", slug(label)), render(|w| write_population_csv(traj, labels, w))?);
        let series: Vec<(String, Vec<(f64, f64)>)> = (0..labels.len())
            .map(|j| {
                let pts = traj.times.iter().zip(&traj.populations).map(|(&t, p)| (t, p[j])).collect();
                (format!("P({})", labels[j]), pts)
            })
            .collect();
        let title = format!("populations from |{label}⟩");
        files.insert(format!("populations_{}.svg", slug(label)), line_plot(&title, "t", "population", &series).into_bytes());
    }

    files.insert("pulse.csv".into(), render(|w| write_pulse_csv(pulse, w))?);
    let columns = qpath::io::control_columns(pulse.n_controls());
    let series: Vec<(String, Vec<(f64, f64)>)> = columns
        .iter()
        .enumerate()
        .map(|(c, name)| (name.clone(), (0..pulse.steps()).map(|k| (pulse.midpoint(k), pulse.amplitude(k, c))).collect()))
        .collect();
    files.insert("pulse.svg".into(), line_plot("control pulse", "t", "amplitude", &series).into_bytes());

    if let Some(run) = &prepared.optimization {
        let trace: Vec<(f64, f64)> = run.fidelity_trace.iter().enumerate().map(|(i, &f)| (i as f64, f)).collect();
        files.insert("fidelity.svg".into(), line_plot("optimization", "iteration", "fidelity", &[("F".into(), trace)]).into_bytes());
    }

    let meta = RunMeta {
        config,
        system: SystemConfig::from_system(&prepared.system),
        pulse: PulseMeta { dt: pulse.dt(), steps: pulse.steps(), n_controls: pulse.n_controls(), duration: pulse.duration() },
        schemes: analysis.encodings.iter().map(|e| SchemeRecord::new(&e.scheme, labels)).collect(),
        optimization: prepared.optimization.as_ref(),
    };
    files.insert("run.json".into(), json(&meta)?);
    files.insert("summary.json".into(), json(&summarize(config, prepared, analysis))?);
    Ok(files)
}

pub fn verify_artifacts(outcome: &VerifyOutcome) -> Result<Artifacts, CliError> {
    let mut files = Artifacts::new();
    files.insert("oracle.csv".into(), render(|w| write_oracle_csv(&outcome.coarse.rows, w))?);
    if let Some(refined) = &outcome.refined {
        files.insert("oracle_refined.csv".into(), render(|w| write_oracle_csv(&refined.rows, w))?);
    }
    files.insert("verify.json".into(), json(outcome)?);
    Ok(files)
}

pub fn write_all(dir: &Path, files: &Artifacts) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(write_error(dir.to_path_buf()))?;
    files
        .iter()
        .map(|(name, bytes)| {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(write_error(path.clone()))?;
            Ok(path)
        })
        .collect()
}
