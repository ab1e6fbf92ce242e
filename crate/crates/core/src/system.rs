//! Qubit Hamiltonians, piecewise-constant control pulses and the
//! interaction picture.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, cis, hermiticity_defect, identity, kron, spin_x, spin_y, spin_z};
use crate::{CMatrix, Real};

const HERMITIAN_TOL: f64 = 1e-12;
const EDGE_TOL: f64 = 1e-14;

/// Drift Hamiltonian plus control operators on `dim = 2^n` computational
/// basis states (ħ = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem<T: Real> {
    h0: CMatrix<T>,
    controls: Vec<CMatrix<T>>,
    basis_labels: Vec<String>,
}

fn binary_labels(dim: usize) -> Result<Vec<String>> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::InvalidLabels(format!("dimension {dim} is not a power of two")));
    }
    let bits = dim.trailing_zeros() as usize;
    Ok((0..dim)
        .map(|i| if bits == 0 { "0".to_string() } else { format!("{i:0bits$b}") })
        .collect())
}

impl<T: Real> QuantumSystem<T> {
    pub fn new(h0: CMatrix<T>, controls: Vec<CMatrix<T>>) -> Result<Self> {
        let dim = h0.nrows();
        let labels = binary_labels(dim)?;
        Self::with_labels(h0, controls, labels)
    }

    /// Builds a system with explicit basis labels; labels must be the
    /// binary enumeration `0..dim` at width `log2(dim)`.
    pub fn with_labels(h0: CMatrix<T>, controls: Vec<CMatrix<T>>, basis_labels: Vec<String>) -> Result<Self> {
        let dim = h0.nrows();
        let square = |m: &CMatrix<T>| m.nrows() == dim && m.ncols() == dim;
        if !square(&h0) {
            return Err(Error::ShapeMismatch {
                expected: format!("{dim}x{dim}"),
                found: format!("{}x{}", h0.nrows(), h0.ncols()),
            });
        }
        if dim == 1 {
            return Err(Error::InvalidLabels("a qubit system needs dim >= 2".into()));
        }
        if basis_labels != binary_labels(dim)? {
            return Err(Error::InvalidLabels(format!("{basis_labels:?} do not enumerate 0..{dim} in binary")));
        }
        let check = |m: &CMatrix<T>, what: String| -> Result<()> {
            if !linalg::is_finite(m) {
                return Err(Error::NonFinite(what));
            }
            let deviation = hermiticity_defect(m).to_f64_lossy();
            if deviation > HERMITIAN_TOL {
                return Err(Error::NotHermitian { what, deviation });
            }
            Ok(())
        };
        check(&h0, "h0".into())?;
        for (k, control) in controls.iter().enumerate() {
            if !square(control) {
                return Err(Error::ShapeMismatch {
                    expected: format!("{dim}x{dim}"),
                    found: format!("{}x{}", control.nrows(), control.ncols()),
                });
            }
            check(control, format!("control {k}"))?;
        }
        Ok(Self { h0, controls, basis_labels })
    }

    pub fn dim(&self) -> usize {
        self.h0.nrows()
    }

    pub fn h0(&self) -> &CMatrix<T> {
        &self.h0
    }

    pub fn controls(&self) -> &[CMatrix<T>] {
        &self.controls
    }

    pub fn basis_labels(&self) -> &[String] {
        &self.basis_labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.basis_labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.basis_labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Control Hamiltonian `Σ_c ε_c(k) C_c` on interval `k`.
    pub fn control_hamiltonian(&self, pulse: &ControlPulse<T>, k: usize) -> CMatrix<T> {
        let dim = self.dim();
        let mut hc = DMatrix::zeros(dim, dim);
        for (c, op) in self.controls.iter().enumerate() {
            let eps = pulse.amplitude(k, c);
            if eps != T::zero() {
                hc += op * Complex::new(eps, T::zero());
            }
        }
        hc
    }

    pub fn frame(&self) -> InteractionFrame<T> {
        InteractionFrame::new(&self.h0)
    }
}

/// Piecewise-constant control amplitudes on a uniform grid starting at `t0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPulse<T: Real> {
    dt: T,
    t0: T,
    /// `steps × controls`.
    amplitudes: DMatrix<T>,
}

impl<T: Real> ControlPulse<T> {
    pub fn new(dt: T, amplitudes: DMatrix<T>) -> Result<Self> {
        Self::starting_at(T::zero(), dt, amplitudes)
    }

    pub fn starting_at(t0: T, dt: T, amplitudes: DMatrix<T>) -> Result<Self> {
        if !(dt.is_finite() && dt > T::zero()) {
            return Err(Error::InvalidPulse(format!("time step must be positive and finite, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(Error::InvalidPulse("start time is not finite".into()));
        }
        if amplitudes.nrows() == 0 {
            return Err(Error::InvalidPulse("pulse needs at least one step".into()));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("pulse amplitudes".into()));
        }
        Ok(Self { dt, t0, amplitudes })
    }

    /// Builds a pulse from per-step rows.
    pub fn from_rows(dt: T, rows: &[Vec<T>]) -> Result<Self> {
        let controls = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != controls) {
            return Err(Error::InvalidPulse("ragged amplitude rows".into()));
        }
        let flat: Vec<T> = rows.iter().flatten().copied().collect();
        Self::new(dt, DMatrix::from_row_slice(rows.len(), controls, &flat))
    }

    pub fn zeros(dt: T, steps: usize, controls: usize) -> Result<Self> {
        Self::new(dt, DMatrix::zeros(steps, controls))
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn t0(&self) -> T {
        self.t0
    }

    pub fn steps(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn n_controls(&self) -> usize {
        self.amplitudes.ncols()
    }

    /// Pulse length `steps · dt`.
    pub fn duration(&self) -> T {
        self.dt * T::from_usize(self.steps()).unwrap()
    }

    pub fn amplitudes(&self) -> &DMatrix<T> {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut DMatrix<T> {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, k: usize, control: usize) -> T {
        self.amplitudes[(k, control)]
    }

    /// Start of interval `k`.
    pub fn time(&self, k: usize) -> T {
        self.t0 + self.dt * T::from_usize(k).unwrap()
    }

    /// Midpoint of interval `k`.
    pub fn midpoint(&self, k: usize) -> T {
        self.t0 + self.dt * (T::from_usize(k).unwrap() + T::lit(0.5))
    }

    /// Same piecewise-constant function on a grid `factor` times finer.
    pub fn refine(&self, factor: usize) -> Self {
        assert!(factor > 0, "refinement factor must be positive");
        let rows = self.steps() * factor;
        let amplitudes = DMatrix::from_fn(rows, self.n_controls(), |r, c| self.amplitudes[(r / factor, c)]);
        Self { dt: self.dt / T::from_usize(factor).unwrap(), t0: self.t0, amplitudes }
    }

    /// Splits into `[t0, t_k)` and `[t_k, T)`.
    pub fn split_at(&self, k: usize) -> Result<(Self, Self)> {
        if k == 0 || k >= self.steps() {
            return Err(Error::IndexOutOfRange { index: k, len: self.steps() });
        }
        let head = self.amplitudes.rows(0, k).into_owned();
        let tail = self.amplitudes.rows(k, self.steps() - k).into_owned();
        Ok((Self::starting_at(self.t0, self.dt, head)?, Self::starting_at(self.time(k), self.dt, tail)?))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self { amplitudes: &self.amplitudes * factor, ..self.clone() }
    }
}

/// Directed transition `from → to` coupled by the control Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
}

impl Transition {
    pub fn new(from: usize, to: usize) -> Self {
        Self { from, to }
    }

    pub fn reversed(self) -> Self {
        Self { from: self.to, to: self.from }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionGraph {
    dim: usize,
    edges: BTreeSet<Transition>,
    adjacency: Vec<Vec<usize>>,
}

impl TransitionGraph {
    pub fn new(dim: usize, edges: impl IntoIterator<Item = Transition>) -> Self {
        let edges: BTreeSet<Transition> = edges.into_iter().filter(|e| e.from != e.to).collect();
        let mut adjacency = vec![Vec::new(); dim];
        for e in &edges {
            adjacency[e.from].push(e.to);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self { dim, edges, adjacency }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edges(&self) -> &BTreeSet<Transition> {
        &self.edges
    }

    pub fn contains(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&Transition::new(from, to))
    }

    /// Successors of `state` in increasing index order.
    pub fn neighbors(&self, state: usize) -> &[usize] {
        &self.adjacency[state]
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Undirected edges `{i, j}` as `(i, j)` with `i < j`.
    pub fn undirected(&self) -> Vec<(usize, usize)> {
        self.edges.iter().filter(|e| e.from < e.to).map(|e| (e.from, e.to)).collect()
    }
}

pub fn transition_graph<T: Real>(system: &QuantumSystem<T>) -> TransitionGraph {
    let dim = system.dim();
    let tol = T::lit(EDGE_TOL);
    let mut edges = Vec::new();
    for from in 0..dim {
        for to in 0..dim {
            if from != to && system.controls().iter().any(|op| linalg::modulus(op[(to, from)]) > tol) {
                edges.push(Transition::new(from, to));
            }
        }
    }
    TransitionGraph::new(dim, edges)
}

/// Eigen-frame of the drift used to move operators into the interaction
/// picture, `V(t) = e^{iH₀t} H_c e^{-iH₀t}`.
#[derive(Debug, Clone)]
pub struct InteractionFrame<T: Real> {
    energies: DVector<T>,
    /// `None` when `h0` is already diagonal in the computational basis.
    basis: Option<CMatrix<T>>,
}

impl<T: Real> InteractionFrame<T> {
    pub fn new(h0: &CMatrix<T>) -> Self {
        if linalg::is_diagonal(h0) {
            let energies = DVector::from_iterator(h0.nrows(), h0.diagonal().iter().map(|z| z.re));
            Self { energies, basis: None }
        } else {
            let eig = h0.clone().symmetric_eigen();
            Self { energies: eig.eigenvalues, basis: Some(eig.eigenvectors) }
        }
    }

    pub fn is_identity(&self) -> bool {
        self.basis.is_none() && self.energies.iter().all(|e| *e == T::zero())
    }

    /// Conjugates `op` into the interaction picture at time `t`.
    pub fn apply(&self, op: &CMatrix<T>, t: T) -> CMatrix<T> {
        if self.is_identity() {
            return op.clone();
        }
        let e = &self.energies;
        let rotate = |m: &CMatrix<T>| {
            let n = m.nrows();
            DMatrix::from_fn(n, n, |r, c| if r == c { m[(r, c)] } else { m[(r, c)] * cis((e[r] - e[c]) * t) })
        };
        match &self.basis {
            None => rotate(op),
            Some(w) => {
                let in_eigenbasis = w.adjoint() * op * w;
                w * rotate(&in_eigenbasis) * w.adjoint()
            }
        }
    }
}

/// Interaction Hamiltonian at the midpoint of interval `k`.
pub fn interaction_hamiltonian<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    k: usize,
) -> Result<CMatrix<T>> {
    if k >= pulse.steps() {
        return Err(Error::IndexOutOfRange { index: k, len: pulse.steps() });
    }
    check_compatible(system, pulse)?;
    let hc = system.control_hamiltonian(pulse, k);
    Ok(system.frame().apply(&hc, pulse.midpoint(k)))
}

pub(crate) fn check_compatible<T: Real>(system: &QuantumSystem<T>, pulse: &ControlPulse<T>) -> Result<()> {
    if pulse.n_controls() != system.controls().len() {
        return Err(Error::ShapeMismatch {
            expected: format!("{} control channels", system.controls().len()),
            found: format!("{} pulse columns", pulse.n_controls()),
        });
    }
    Ok(())
}

pub const X_GATE_STEPS: usize = 100;

/// Two-level system with `H₀ = 0`, control `S_x` and the π-pulse on `[0, 1)`.
pub fn build_x_gate_system<T: Real>() -> (QuantumSystem<T>, ControlPulse<T>) {
    x_gate_with_steps(X_GATE_STEPS)
}

pub fn x_gate_with_steps<T: Real>(steps: usize) -> (QuantumSystem<T>, ControlPulse<T>) {
    let system = QuantumSystem::new(DMatrix::zeros(2, 2), vec![spin_x()]).expect("S_x is Hermitian");
    let dt = T::one() / T::from_usize(steps).unwrap();
    let pulse = ControlPulse::new(dt, DMatrix::from_element(steps, 1, T::lit(PI))).expect("valid π-pulse");
    (system, pulse)
}

/// Two coupled qubits: `H₀ = ω₁ S_z⊗I + ω₂ I⊗S_z + J S_z⊗S_z`, controls
/// `X_tot = S_x⊗I + I⊗S_x` and `Y_tot = S_y⊗I + I⊗S_y`. The first label
/// digit is the control qubit.
pub fn build_two_qubit_system<T: Real>(omega1: T, omega2: T, j_coupling: T) -> Result<QuantumSystem<T>> {
    if !(omega1.is_finite() && omega2.is_finite() && j_coupling.is_finite()) {
        return Err(Error::NonFinite("two-qubit parameters".into()));
    }
    let id = identity::<T>(2);
    let (sx, sy, sz) = (spin_x::<T>(), spin_y::<T>(), spin_z::<T>());
    let re = |x: T| Complex::new(x, T::zero());
    let h0 = kron(&sz, &id) * re(omega1) + kron(&id, &sz) * re(omega2) + kron(&sz, &sz) * re(j_coupling);
    let x_tot = kron(&sx, &id) + kron(&id, &sx);
    let y_tot = kron(&sy, &id) + kron(&id, &sy);
    QuantumSystem::new(h0, vec![x_tot, y_tot])
}
