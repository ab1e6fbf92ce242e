//! Piecewise-constant propagation of the (optionally modulated)
//! interaction-picture Schrödinger equation,
//! `U(T; s) = ∏_k exp(-i V_k(s) Δt)` with later intervals on the left.

use nalgebra::{Complex, DVector};

use crate::error::{Error, Result};
use crate::linalg::{self, expm, expm_hermitian, identity};
use crate::system::{check_compatible, ControlPulse, QuantumSystem};
use crate::{CMatrix, Real};

const HERMITIAN_FACTOR_TOL: f64 = 1e-12;

/// Which exponential routine a propagation uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExpMethod {
    /// Diagonalisation when the generator is Hermitian, Padé otherwise.
    #[default]
    Auto,
    Eigen,
    Pade,
}

/// `exp(-i·m·dt)`. Hermitian generators are diagonalised; anything else
/// goes through scaling and squaring.
pub fn step_exponential<T: Real>(m: &CMatrix<T>, dt: T, hermitian: bool) -> Result<CMatrix<T>> {
    if !linalg::is_finite(m) || !dt.is_finite() {
        return Err(Error::NonFinite("step generator".into()));
    }
    Ok(exp_unchecked(m, dt, hermitian))
}

fn exp_unchecked<T: Real>(m: &CMatrix<T>, dt: T, hermitian: bool) -> CMatrix<T> {
    if hermitian {
        expm_hermitian(m, dt)
    } else {
        expm(&(m * Complex::new(T::zero(), -dt)))
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult<T: Real> {
    pub u_final: CMatrix<T>,
    /// `U(t_k)` after each step, when requested.
    pub trajectory: Option<Vec<CMatrix<T>>>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PropagateOptions {
    pub method: ExpMethod,
    pub keep_trajectory: bool,
}

/// Whether elementwise factors keep every Hermitian matrix Hermitian.
pub fn preserves_hermiticity<T: Real>(factors: &CMatrix<T>) -> bool {
    let n = factors.nrows();
    let tol = T::lit(HERMITIAN_FACTOR_TOL);
    (0..n).all(|i| (i..n).all(|j| linalg::modulus(factors[(i, j)] - factors[(j, i)].conj()) <= tol))
}

fn apply_factors<T: Real>(v: &CMatrix<T>, factors: &CMatrix<T>) -> CMatrix<T> {
    let one = Complex::new(T::one(), T::zero());
    let mut out = v.clone();
    for (z, f) in out.iter_mut().zip(factors.iter()) {
        if *f != one {
            *z *= *f;
        }
    }
    out
}

/// Interaction Hamiltonians `V(t_k)` at every interval midpoint, computed once
/// and reused across modulated propagations.
#[derive(Debug, Clone)]
pub struct InteractionSeries<T: Real> {
    dt: T,
    dim: usize,
    v: Vec<CMatrix<T>>,
}

impl<T: Real> InteractionSeries<T> {
    pub fn new(system: &QuantumSystem<T>, pulse: &ControlPulse<T>) -> Result<Self> {
        check_compatible(system, pulse)?;
        let frame = system.frame();
        let v = (0..pulse.steps())
            .map(|k| frame.apply(&system.control_hamiltonian(pulse, k), pulse.midpoint(k)))
            .collect();
        Ok(Self { dt: pulse.dt(), dim: system.dim(), v })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrices(&self) -> &[CMatrix<T>] {
        &self.v
    }

    pub fn propagate(&self, modulation: Option<&CMatrix<T>>, options: PropagateOptions) -> Result<EvolutionResult<T>> {
        if let Some(f) = modulation {
            if f.nrows() != self.dim || f.ncols() != self.dim {
                return Err(Error::ShapeMismatch {
                    expected: format!("{0}x{0} modulation", self.dim),
                    found: format!("{}x{}", f.nrows(), f.ncols()),
                });
            }
        }
        let hermitian = match options.method {
            ExpMethod::Eigen => true,
            ExpMethod::Pade => false,
            ExpMethod::Auto => modulation.is_none_or(preserves_hermiticity),
        };
        let mut u = identity::<T>(self.dim);
        let mut trajectory = options.keep_trajectory.then(|| Vec::with_capacity(self.v.len()));
        for v in &self.v {
            let step = match modulation {
                Some(f) => exp_unchecked(&apply_factors(v, f), self.dt, hermitian),
                None => exp_unchecked(v, self.dt, hermitian),
            };
            u = step * u;
            if let Some(traj) = trajectory.as_mut() {
                traj.push(u.clone());
            }
        }
        if !linalg::is_finite(&u) {
            return Err(Error::NonFinite("propagator".into()));
        }
        Ok(EvolutionResult { u_final: u, trajectory })
    }
}

/// Propagates over the whole pulse. `modulation` multiplies each element
/// `(j, i)` of every `V(t_k)` by its factor.
pub fn propagate<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    modulation: Option<&CMatrix<T>>,
) -> Result<EvolutionResult<T>> {
    propagate_with(system, pulse, modulation, PropagateOptions::default())
}

pub fn propagate_with<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    modulation: Option<&CMatrix<T>>,
    options: PropagateOptions,
) -> Result<EvolutionResult<T>> {
    InteractionSeries::new(system, pulse)?.propagate(modulation, options)
}

/// Basis-state populations over time for one initial basis state.
#[derive(Debug, Clone)]
pub struct PopulationTrajectory<T: Real> {
    /// `t_0 = t0, …, t_steps = T`.
    pub times: Vec<T>,
    /// One row per time, one column per basis state.
    pub populations: Vec<Vec<T>>,
}

pub fn population_trajectory<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    initial: usize,
) -> Result<PopulationTrajectory<T>> {
    let dim = system.dim();
    if initial >= dim {
        return Err(Error::IndexOutOfRange { index: initial, len: dim });
    }
    let series = InteractionSeries::new(system, pulse)?;
    let mut psi = DVector::from_element(dim, Complex::new(T::zero(), T::zero()));
    psi[initial] = Complex::new(T::one(), T::zero());
    let populations_of = |psi: &DVector<Complex<T>>| psi.iter().map(|z| z.norm_sqr()).collect::<Vec<T>>();
    let mut times = vec![pulse.t0()];
    let mut populations = vec![populations_of(&psi)];
    for (k, v) in series.matrices().iter().enumerate() {
        psi = exp_unchecked(v, pulse.dt(), true) * psi;
        times.push(pulse.time(k + 1));
        populations.push(populations_of(&psi));
    }
    Ok(PopulationTrajectory { times, populations })
}
