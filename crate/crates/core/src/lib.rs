//! Quantum pathway amplitudes for controlled qubit gates.
//!
//! The evolution operator of a driven qubit system is decomposed into
//! pathways between computational basis states. Each pathway carries a
//! complex amplitude (a term of the Dyson series in the interaction picture)
//! and pathways are grouped into Hermitian (`H`) or non-Hermitian (`NH`)
//! classes. Class amplitudes are extracted by *Hamiltonian encoding*: every
//! interaction-picture matrix element is modulated by `exp(i γ s)`, the
//! modulated system is propagated on a uniform `s` grid, and a discrete
//! Fourier transform of each gate element recovers the amplitude sitting at
//! every integer pathway frequency.
//!
//! The numerical core is generic over the real scalar type ([`Real`], backed
//! by `f32` or `f64`); the aliases at the bottom of this file fix it to `f64`
//! for the I/O layer and the command-line driver.

pub mod decoder;
pub mod encoding;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optimizer;
pub mod oracle;
pub mod pathways;
pub mod plot;
pub mod propagator;
pub mod system;

use nalgebra::{Complex, DMatrix, RealField};
use num_traits::{FromPrimitive, ToPrimitive};

pub use decoder::{build_report, build_reports, decode, hn_consistency, ClassAmplitude, MechanismReport};
pub use encoding::{assign_frequencies, modulation_factors, sweep, EncodingOptions, EncodingScheme, Sweep};
pub use error::{Error, Result};
pub use optimizer::{fidelity, optimize, OptimizationRun, OptimizeOptions, TargetGate};
pub use oracle::{dyson_amplitude, xgate_analytic, OracleAmplitude};
pub use pathways::{classify, enumerate_pathways, ClassKey, Mode, Pathway, PathwayClass};
pub use propagator::{population_trajectory, propagate, step_exponential, EvolutionResult, ExpMethod};
pub use system::{
    build_two_qubit_system, build_x_gate_system, interaction_hamiltonian, transition_graph, ControlPulse,
    QuantumSystem, TransitionGraph,
};

/// Real scalar usable by the numerical core.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + serde::Serialize {
    /// Lossy conversion of an `f64` literal.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Dense complex matrix over the scalar `T`.
pub type CMatrix<T> = DMatrix<Complex<T>>;

pub type C64 = Complex<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type System = QuantumSystem<f64>;
pub type Pulse = ControlPulse<f64>;
pub type Report = MechanismReport<f64>;
pub type Run = OptimizationRun<f64>;
pub type Gate = TargetGate<f64>;

pub type C32 = Complex<f32>;
pub type System32 = QuantumSystem<f32>;
pub type Pulse32 = ControlPulse<f32>;
