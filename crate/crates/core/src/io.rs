//! Text formats: system and pulse configs, CSV tables and JSON records.

use std::io::{Read, Write};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::decoder::{format_phase, MechanismReport};
use crate::encoding::{EncodingScheme, Sweep};
use crate::error::{Error, Result};
use crate::oracle::OracleAmplitude;
use crate::pathways::Mode;
use crate::propagator::PopulationTrajectory;
use crate::{CMatrix64, Pulse, System};

/// Dense complex matrix as a row-major list of `[re, im]` pairs.
pub type ComplexEntries = Vec<[f64; 2]>;

fn matrix_from_entries(dim: usize, entries: &[[f64; 2]], what: &str) -> Result<CMatrix64> {
    if entries.len() != dim * dim {
        return Err(Error::ShapeMismatch {
            expected: format!("{} entries for {what}", dim * dim),
            found: entries.len().to_string(),
        });
    }
    Ok(DMatrix::from_row_iterator(dim, dim, entries.iter().map(|&[re, im]| Complex::new(re, im))))
}

pub fn matrix_to_entries(m: &CMatrix64) -> ComplexEntries {
    (0..m.nrows()).flat_map(|r| (0..m.ncols()).map(move |c| [m[(r, c)].re, m[(r, c)].im])).collect()
}

/// Explicit system description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub dim: usize,
    pub h0: ComplexEntries,
    pub controls: Vec<ComplexEntries>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
}

impl SystemConfig {
    pub fn build(&self) -> Result<System> {
        let h0 = matrix_from_entries(self.dim, &self.h0, "h0")?;
        let controls = self
            .controls
            .iter()
            .enumerate()
            .map(|(i, c)| matrix_from_entries(self.dim, c, &format!("control {i}")))
            .collect::<Result<Vec<_>>>()?;
        match &self.labels {
            Some(labels) => System::with_labels(h0, controls, labels.clone()),
            None => System::new(h0, controls),
        }
    }

    pub fn from_system(system: &System) -> Self {
        Self {
            dim: system.dim(),
            h0: matrix_to_entries(system.h0()),
            controls: system.controls().iter().map(matrix_to_entries).collect(),
            labels: Some(system.basis_labels().to_vec()),
        }
    }
}

/// Explicit pulse description: one row of amplitudes per step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseConfig {
    pub dt: f64,
    pub steps: usize,
    pub amplitudes: Vec<Vec<f64>>,
}

impl PulseConfig {
    pub fn build(&self) -> Result<Pulse> {
        if self.amplitudes.len() != self.steps {
            return Err(Error::ShapeMismatch {
                expected: format!("{} amplitude rows", self.steps),
                found: self.amplitudes.len().to_string(),
            });
        }
        Pulse::from_rows(self.dt, &self.amplitudes)
    }
}

/// Column names for a pulse with `n` controls.
pub fn control_columns(n: usize) -> Vec<String> {
    match n {
        1 => vec!["eps_x".into()],
        2 => vec!["eps_x".into(), "eps_y".into()],
        _ => (0..n).map(|i| format!("eps_{i}")).collect(),
    }
}

/// `t, eps_x, eps_y` with `t` the start of each interval.
pub fn write_pulse_csv<W: Write>(pulse: &Pulse, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(control_columns(pulse.n_controls()));
    w.write_record(&header)?;
    for k in 0..pulse.steps() {
        let mut row = vec![pulse.time(k).to_string()];
        row.extend((0..pulse.n_controls()).map(|c| pulse.amplitude(k, c).to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_pulse_csv`]. The step is taken from the span of the
/// time column, so at least two rows are required.
pub fn read_pulse_csv<R: Read>(input: R) -> Result<Pulse> {
    let mut r = csv::Reader::from_reader(input);
    let width = r.headers()?.len();
    if width < 2 {
        return Err(Error::Parse("pulse CSV needs a time column and at least one control".into()));
    }
    let mut times = Vec::new();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let values = record
            .iter()
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("pulse CSV value `{f}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        times.push(values[0]);
        rows.push(values[1..].to_vec());
    }
    if rows.len() < 2 {
        return Err(Error::InvalidPulse("pulse CSV needs at least two rows".into()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let amps = DMatrix::from_fn(rows.len(), width - 1, |k, c| rows[k][c]);
    Pulse::starting_at(times[0], dt, amps)
}

/// `t, P_<label>…`, one row per grid time.
pub fn write_population_csv<W: Write>(traj: &PopulationTrajectory<f64>, labels: &[String], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string()];
    header.extend(labels.iter().map(|l| format!("P_{l}")));
    w.write_record(&header)?;
    for (t, p) in traj.times.iter().zip(&traj.populations) {
        let mut row = vec![t.to_string()];
        row.extend(p.iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Mechanism table: `gamma, class, magnitude, phase_deg` for every class
/// above the floor, then the coherent sum.
pub fn write_table_csv<W: Write>(report: &MechanismReport<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["gamma", "class", "magnitude", "phase_deg"])?;
    for c in report.visible() {
        w.write_record([
            c.frequency().to_string(),
            c.class.display(&report.labels),
            format!("{:.6}", c.magnitude),
            format_phase(c.amplitude),
        ])?;
    }
    w.write_record([
        String::new(),
        "Sum".to_string(),
        format!("{:.6}", report.coherent_sum.norm()),
        format_phase(report.coherent_sum),
    ])?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassRecord {
    pub mode: Mode,
    pub key: crate::pathways::ClassKey,
    pub class: String,
    pub representative: Vec<String>,
    pub order: usize,
    pub members: usize,
    pub frequency: i64,
    pub re: f64,
    pub im: f64,
    pub magnitude: f64,
    pub phase_deg: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportRecord {
    pub mode: Mode,
    pub element: String,
    pub b: String,
    pub a: String,
    pub n_max: usize,
    pub n_s: usize,
    pub floor: f64,
    pub coherent_sum: [f64; 2],
    pub coherent_sum_magnitude: f64,
    pub coherent_sum_phase_deg: Option<f64>,
    pub direct_value: [f64; 2],
    pub partition_residual: f64,
    pub unassigned_mass: f64,
    pub flagged: bool,
    pub classes: Vec<ClassRecord>,
}

fn phase_or_none(z: Complex<f64>) -> Option<f64> {
    (z.norm() >= crate::decoder::PHASE_FLOOR).then(|| crate::decoder::phase_degrees(z))
}

impl ReportRecord {
    pub fn new(report: &MechanismReport<f64>) -> Self {
        let labels = &report.labels;
        Self {
            mode: report.mode,
            element: report.element_label(),
            b: labels[report.element.0].clone(),
            a: labels[report.element.1].clone(),
            n_max: report.n_max,
            n_s: report.n_s,
            floor: report.floor,
            coherent_sum: [report.coherent_sum.re, report.coherent_sum.im],
            coherent_sum_magnitude: report.coherent_sum.norm(),
            coherent_sum_phase_deg: phase_or_none(report.coherent_sum),
            direct_value: [report.direct_value.re, report.direct_value.im],
            partition_residual: report.partition_residual(),
            unassigned_mass: report.unassigned_mass,
            flagged: report.flagged(),
            classes: report
                .classes
                .iter()
                .map(|c| ClassRecord {
                    mode: c.class.mode,
                    key: c.class.key.clone(),
                    class: c.class.display(labels),
                    representative: c.class.representative.states.iter().map(|&s| labels[s].clone()).collect(),
                    order: c.class.order(),
                    members: c.class.members,
                    frequency: c.frequency(),
                    re: c.amplitude.re,
                    im: c.amplitude.im,
                    magnitude: c.magnitude,
                    phase_deg: phase_or_none(c.amplitude),
                })
                .collect(),
        }
    }
}

pub fn write_report_json<W: Write>(report: &MechanismReport<f64>, out: W) -> Result<()> {
    serde_json::to_writer_pretty(out, &ReportRecord::new(report))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeRecord {
    pub mode: Mode,
    pub n_max: usize,
    pub n_s: usize,
    pub gamma_max_path: i64,
    /// `(from, to, γ)` with labels.
    pub gamma: Vec<(String, String, i64)>,
}

impl SchemeRecord {
    pub fn new(scheme: &EncodingScheme, labels: &[String]) -> Self {
        Self {
            mode: scheme.mode(),
            n_max: scheme.n_max(),
            n_s: scheme.n_s(),
            gamma_max_path: scheme.gamma_max_path(),
            gamma: scheme.gammas().iter().map(|(t, &g)| (labels[t.from].clone(), labels[t.to].clone(), g)).collect(),
        }
    }
}

/// `k, re_<b>_<a>, im_<b>_<a>…`.
pub fn write_sweep_csv<W: Write>(sweep: &Sweep<f64>, labels: &[String], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["k".to_string()];
    for &(b, a) in &sweep.elements {
        header.push(format!("re_{}_{}", labels[b], labels[a]));
        header.push(format!("im_{}_{}", labels[b], labels[a]));
    }
    w.write_record(&header)?;
    let n = sweep.samples.first().map_or(0, Vec::len);
    for k in 0..n {
        let mut row = vec![k.to_string()];
        for s in &sweep.samples {
            row.push(format!("{:e}", s[k].re));
            row.push(format!("{:e}", s[k].im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Samples per element column pair, in header order.
pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<Vec<Complex<f64>>>> {
    let mut r = csv::Reader::from_reader(input);
    let columns = r.headers()?.len();
    if columns < 3 || columns % 2 == 0 {
        return Err(Error::Parse("sweep CSV needs `k` plus re/im column pairs".into()));
    }
    let mut out = vec![Vec::new(); (columns - 1) / 2];
    for record in r.records() {
        let record = record?;
        let values = record
            .iter()
            .skip(1)
            .map(|f| f.trim().parse::<f64>().map_err(|e| Error::Parse(format!("sweep CSV value `{f}`: {e}"))))
            .collect::<Result<Vec<f64>>>()?;
        for (e, pair) in values.chunks(2).enumerate() {
            out[e].push(Complex::new(pair[0], pair[1]));
        }
    }
    Ok(out)
}

/// One oracle comparison row.
#[derive(Debug, Clone, Serialize)]
pub struct OracleRow {
    pub pathway: String,
    pub oracle: Complex<f64>,
    pub decoded: Complex<f64>,
    pub gap: f64,
}

impl OracleRow {
    pub fn new(oracle: &OracleAmplitude<f64>, decoded: Complex<f64>, labels: &[String]) -> Self {
        Self {
            pathway: oracle.pathway.display(labels),
            oracle: oracle.amplitude,
            decoded,
            gap: (oracle.amplitude - decoded).norm(),
        }
    }
}

/// `pathway, oracle_re, oracle_im, decoded_re, decoded_im, gap`.
pub fn write_oracle_csv<W: Write>(rows: &[OracleRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["pathway", "oracle_re", "oracle_im", "decoded_re", "decoded_im", "gap"])?;
    for row in rows {
        w.write_record([
            row.pathway.clone(),
            format!("{:e}", row.oracle.re),
            format!("{:e}", row.oracle.im),
            format!("{:e}", row.decoded.re),
            format!("{:e}", row.decoded.im),
            format!("{:e}", row.gap),
        ])?;
    }
    w.flush()?;
    Ok(())
}
