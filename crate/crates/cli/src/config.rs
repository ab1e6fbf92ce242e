//! Run configuration: parsing, validation and construction of the system
//! and pulse it describes.

use std::path::{Path, PathBuf};

use qpath::io::{read_pulse_csv, ComplexEntries, PulseConfig, SystemConfig};
use qpath::{build_two_qubit_system, build_x_gate_system, Gate, Mode, OptimizeOptions, Pulse, System, TargetGate};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const DEFAULT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: String,
    /// Gate elements `⟨to|U(T)|from⟩` to analyse.
    pub elements: Vec<ElementSpec>,
    /// Initial basis states whose population trajectories are written.
    #[serde(default)]
    pub populations: Vec<String>,
    #[serde(default = "default_floor")]
    pub floor: f64,
    /// Output directory, relative to the working directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Also write the raw `s`-sweep samples.
    #[serde(default)]
    pub cache_sweeps: bool,
    pub system: SystemSpec,
    pub pulse: PulseSpec,
    pub encoding: Vec<EncodingSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSpec {
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Single qubit driven by `S_x`, no drift.
    Xgate,
    TwoQubit {
        omega1: f64,
        omega2: f64,
        j: f64,
    },
    Custom {
        dim: usize,
        h0: ComplexEntries,
        controls: Vec<ComplexEntries>,
        #[serde(default)]
        labels: Option<Vec<String>>,
    },
}

impl SystemSpec {
    pub fn build(&self) -> Result<System, CliError> {
        Ok(match self {
            SystemSpec::Xgate => build_x_gate_system::<f64>().0,
            &SystemSpec::TwoQubit { omega1, omega2, j } => build_two_qubit_system(omega1, omega2, j)?,
            SystemSpec::Custom { dim, h0, controls, labels } => SystemConfig {
                dim: *dim,
                h0: h0.clone(),
                controls: controls.clone(),
                labels: labels.clone(),
            }
            .build()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum PulseSpec {
    /// The constant π-pulse of the `xgate` system.
    Builtin,
    /// Pulse CSV with columns `t, eps_x, eps_y`, relative to the config file.
    File { path: PathBuf },
    Inline { dt: f64, steps: usize, amplitudes: Vec<Vec<f64>> },
    Zeros { dt: f64, steps: usize },
    Optimize(OptimizeSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    pub target: String,
    pub t_final: f64,
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_init_amplitude")]
    pub init_amplitude: f64,
    #[serde(default)]
    pub max_amplitude: Option<f64>,
}

fn default_max_iters() -> usize {
    2000
}

fn default_tol() -> f64 {
    1e-6
}

fn default_init_amplitude() -> f64 {
    1.0
}

impl OptimizeSpec {
    pub fn target(&self) -> Result<Gate, CliError> {
        Ok(TargetGate::by_name(&self.target)?)
    }

    pub fn options(&self) -> OptimizeOptions<f64> {
        let mut options = OptimizeOptions::new(self.t_final, self.steps);
        options.seed = self.seed;
        options.max_iters = self.max_iters;
        options.tol = self.tol;
        options.init_amplitude = self.init_amplitude;
        options.max_amplitude = self.max_amplitude;
        options
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EncodingSpec {
    pub mode: Mode,
    pub n_max: usize,
    #[serde(default)]
    pub guard_order: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    /// Highest pathway order compared against the oracle.
    pub max_order: usize,
    /// Largest accepted `|decoded − oracle|`.
    pub tolerance: f64,
    /// Repeat the comparison on the pulse with halved steps.
    pub refine: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        Self { max_order: 3, tolerance: 1e-4, refine: true }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.check()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        Self::parse(&text)
    }

    /// Checks that do not need the built system.
    fn check(&self) -> Result<(), CliError> {
        if self.elements.is_empty() {
            return Err(CliError::Config("at least one element is required".into()));
        }
        if self.encoding.is_empty() {
            return Err(CliError::Config("at least one [[encoding]] table is required".into()));
        }
        if !(self.floor.is_finite() && self.floor >= 0.0) {
            return Err(CliError::Config(format!("floor must be a non-negative number, got {}", self.floor)));
        }
        if self.verify.max_order == 0 || self.verify.tolerance.is_nan() || self.verify.tolerance <= 0.0 {
            return Err(CliError::Config("verify needs max_order ≥ 1 and a positive tolerance".into()));
        }
        if matches!(self.pulse, PulseSpec::Builtin) && self.system != SystemSpec::Xgate {
            return Err(CliError::Config("the builtin pulse belongs to the xgate system".into()));
        }
        Ok(())
    }

    /// `(b, a)` index pairs of the requested elements.
    pub fn resolve_elements(&self, system: &System) -> Result<Vec<(usize, usize)>, CliError> {
        self.elements
            .iter()
            .map(|e| Ok((system.index_of(&e.to)?, system.index_of(&e.from)?)))
            .collect()
    }

    pub fn resolve_populations(&self, system: &System) -> Result<Vec<usize>, CliError> {
        self.populations.iter().map(|l| Ok(system.index_of(l)?)).collect()
    }

    /// Pulse for every source except `optimize`, which needs the optimizer.
    pub fn fixed_pulse(&self, base_dir: &Path) -> Result<Option<Pulse>, CliError> {
        Ok(match &self.pulse {
            PulseSpec::Builtin => Some(build_x_gate_system::<f64>().1),
            PulseSpec::File { path } => {
                let path = base_dir.join(path);
                let file = std::fs::File::open(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
                Some(read_pulse_csv(file)?)
            }
            PulseSpec::Inline { dt, steps, amplitudes } => {
                Some(PulseConfig { dt: *dt, steps: *steps, amplitudes: amplitudes.clone() }.build()?)
            }
            PulseSpec::Zeros { dt, steps } => Some(Pulse::zeros(*dt, *steps, self.system.build()?.controls().len())?),
            PulseSpec::Optimize(_) => None,
        })
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output.clone().unwrap_or_else(|| PathBuf::from("out").join(&self.name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "t"
elements = [{ from = "0", to = "1" }]

[system]
builder = "xgate"

[pulse]
source = "builtin"

[[encoding]]
mode = "NH"
n_max = 4
"#;

    #[test]
    fn minimal_config_uses_defaults() {
        let config = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(config.floor, DEFAULT_FLOOR);
        assert_eq!(config.verify, VerifySpec::default());
        assert_eq!(config.encoding[0].mode, Mode::NH);
        assert_eq!(config.output_dir(), PathBuf::from("out/t"));
        let system = config.system.build().unwrap();
        assert_eq!(config.resolve_elements(&system).unwrap(), vec![(1, 0)]);
    }

    #[test]
    fn unknown_label_is_rejected() {
        let config = RunConfig::parse(&MINIMAL.replace(r#"to = "1""#, r#"to = "7""#)).unwrap();
        let system = config.system.build().unwrap();
        assert!(matches!(config.resolve_elements(&system), Err(CliError::Core(qpath::Error::UnknownLabel(_)))));
    }

    #[test]
    fn bad_mode_and_unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::parse(&MINIMAL.replace(r#""NH""#, r#""XY""#)), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::parse(&format!("colour = 1\n{MINIMAL}")), Err(CliError::Config(_))));
    }

    #[test]
    fn builtin_pulse_needs_the_xgate_system() {
        let text = MINIMAL.replace(r#"builder = "xgate""#, "builder = \"two_qubit\"\nomega1 = 1.0\nomega2 = 2.0\nj = 0.5");
        assert!(matches!(RunConfig::parse(&text), Err(CliError::Config(_))));
    }

    #[test]
    fn optimize_section_parses() {
        let text = MINIMAL.replace(
            "source = \"builtin\"",
            "source = \"optimize\"\ntarget = \"X\"\nt_final = 1.0\nsteps = 50\nseed = 9",
        );
        let config = RunConfig::parse(&text).unwrap();
        let PulseSpec::Optimize(spec) = &config.pulse else { panic!("expected optimize") };
        assert_eq!(spec.options().seed, 9);
        assert_eq!(spec.target().unwrap().dim(), 2);
        assert!(config.fixed_pulse(Path::new(".")).unwrap().is_none());
    }
}
