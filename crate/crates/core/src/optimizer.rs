//! Gradient-ascent pulse engineering for a target gate.
//!
//! The objective is the phase-insensitive overlap `|tr(G†U)|/dim` of the
//! interaction-picture propagator `U` with the target `G`. Gradients are
//! exact: the derivative of each interval exponential is taken in the
//! eigenbasis of its generator.

use nalgebra::{Complex, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, c, identity, modulus};
use crate::system::{ControlPulse, QuantumSystem};
use crate::{CMatrix, Real};

#[derive(Debug, Clone, Serialize)]
pub struct TargetGate<T: Real> {
    pub name: String,
    pub matrix: CMatrix<T>,
}

impl<T: Real> TargetGate<T> {
    pub fn new(name: impl Into<String>, matrix: CMatrix<T>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::ShapeMismatch {
                expected: "square target".into(),
                found: format!("{}x{}", matrix.nrows(), matrix.ncols()),
            });
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::NonFinite("target gate".into()));
        }
        let defect = linalg::unitarity_defect(&matrix).to_f64_lossy();
        if defect >= 1e-10 {
            return Err(Error::NotUnitary { what: "target gate".into(), deviation: defect });
        }
        Ok(Self { name: name.into(), matrix })
    }

    fn permutation(name: &str, images: &[usize]) -> Self {
        let n = images.len();
        let mut m = DMatrix::zeros(n, n);
        for (col, &row) in images.iter().enumerate() {
            m[(row, col)] = c(1.0, 0.0);
        }
        Self { name: name.into(), matrix: m }
    }

    pub fn identity(dim: usize) -> Self {
        Self { name: "I".into(), matrix: identity(dim) }
    }

    pub fn x() -> Self {
        Self::permutation("X", &[1, 0])
    }

    /// Flips the second qubit when the first is set: `10 ↔ 11`.
    pub fn cnot() -> Self {
        Self::permutation("CNOT", &[0, 1, 3, 2])
    }

    /// `01 ↔ 10`.
    pub fn swap() -> Self {
        Self::permutation("SWAP", &[0, 2, 1, 3])
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_uppercase().as_str() {
            "X" => Ok(Self::x()),
            "CNOT" => Ok(Self::cnot()),
            "SWAP" => Ok(Self::swap()),
            "I2" => Ok(Self::identity(2)),
            "I4" => Ok(Self::identity(4)),
            _ => Err(Error::Parse(format!("unknown target gate `{name}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `|tr(G†U)| / dim`.
pub fn fidelity<T: Real>(u: &CMatrix<T>, target: &TargetGate<T>) -> Result<T> {
    if u.shape() != target.matrix.shape() {
        return Err(Error::ShapeMismatch {
            expected: format!("{0}x{0}", target.dim()),
            found: format!("{}x{}", u.nrows(), u.ncols()),
        });
    }
    Ok(modulus(overlap(u, &target.matrix)) / T::lit(target.dim() as f64))
}

/// `tr(G†U)` without forming the product.
fn overlap<T: Real>(u: &CMatrix<T>, g: &CMatrix<T>) -> Complex<T> {
    g.iter().zip(u.iter()).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
}

#[derive(Debug, Clone)]
pub struct OptimizeOptions<T: Real> {
    pub t_final: T,
    pub steps: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Stop once the fidelity reaches `1 − tol`.
    pub tol: T,
    /// Starting pulse; a smooth random pulse from `seed` when absent.
    pub init: Option<ControlPulse<T>>,
    /// Peak scale of the random starting pulse.
    pub init_amplitude: T,
    /// Amplitudes are clipped to `±max_amplitude` when set.
    pub max_amplitude: Option<T>,
    pub initial_step: T,
    /// Polak–Ribière directions when set, plain steepest ascent otherwise.
    pub conjugate: bool,
}

impl<T: Real> OptimizeOptions<T> {
    pub fn new(t_final: T, steps: usize) -> Self {
        Self {
            t_final,
            steps,
            seed: 0,
            max_iters: 2000,
            tol: T::lit(1e-6),
            init: None,
            init_amplitude: T::one(),
            max_amplitude: None,
            initial_step: T::one(),
            conjugate: true,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationRun<T: Real> {
    #[serde(skip)]
    pub pulse: ControlPulse<T>,
    pub fidelity_trace: Vec<T>,
    pub converged: bool,
    pub seed: u64,
    pub iterations: usize,
}

impl<T: Real> OptimizationRun<T> {
    pub fn final_fidelity(&self) -> T {
        *self.fidelity_trace.last().expect("trace starts with the initial fidelity")
    }
}

/// Smooth pulse: a few random Fourier modes per control, scaled so the
/// largest mode sum is about `amplitude`.
pub fn random_pulse<T: Real>(n_controls: usize, t_final: T, steps: usize, seed: u64, amplitude: T) -> Result<ControlPulse<T>> {
    const MODES: usize = 5;
    if steps == 0 || t_final.partial_cmp(&T::zero()) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidPulse("final time and step count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut amps = DMatrix::zeros(steps, n_controls);
    for ctrl in 0..n_controls {
        let coeffs: Vec<(f64, f64)> =
            (0..MODES).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        for k in 0..steps {
            let x = (k as f64 + 0.5) / steps as f64;
            let value: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(m, &(a, b))| {
                    let w = std::f64::consts::TAU * (m + 1) as f64 * x;
                    a * w.cos() + b * w.sin()
                })
                .sum::<f64>()
                / MODES as f64;
            amps[(k, ctrl)] = amplitude * T::lit(value);
        }
    }
    ControlPulse::new(t_final / T::lit(steps as f64), amps)
}

/// Precomputed interaction-picture control operators `W_kc` at every
/// interval midpoint, so that `V_k = Σ_c ε_kc W_kc`.
struct Problem<T: Real> {
    ops: Vec<Vec<CMatrix<T>>>,
    dt: T,
    target: CMatrix<T>,
    dim: usize,
}

struct StepEigen<T: Real> {
    values: DVector<T>,
    vectors: CMatrix<T>,
    phases: Vec<Complex<T>>,
}

impl<T: Real> StepEigen<T> {
    fn exponential(&self) -> CMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, p) in self.phases.iter().enumerate() {
            for i in 0..scaled.nrows() {
                scaled[(i, j)] *= *p;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

impl<T: Real> Problem<T> {
    fn new(system: &QuantumSystem<T>, pulse: &ControlPulse<T>, target: &TargetGate<T>) -> Result<Self> {
        if target.dim() != system.dim() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} target", system.dim()),
                found: format!("{0}x{0}", target.dim()),
            });
        }
        if pulse.n_controls() != system.controls().len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} control channels", system.controls().len()),
                found: format!("{} pulse columns", pulse.n_controls()),
            });
        }
        let frame = system.frame();
        let ops = (0..pulse.steps())
            .map(|k| system.controls().iter().map(|op| frame.apply(op, pulse.midpoint(k))).collect())
            .collect();
        Ok(Self { ops, dt: pulse.dt(), target: target.matrix.clone(), dim: system.dim() })
    }

    fn generator(&self, amps: &DMatrix<T>, k: usize) -> CMatrix<T> {
        let mut v = DMatrix::zeros(self.dim, self.dim);
        for (c, op) in self.ops[k].iter().enumerate() {
            v += op * Complex::new(amps[(k, c)], T::zero());
        }
        v
    }

    fn eigen(&self, amps: &DMatrix<T>, k: usize) -> StepEigen<T> {
        let eig = self.generator(amps, k).symmetric_eigen();
        let phases = eig.eigenvalues.iter().map(|&l| linalg::cis(-l * self.dt)).collect();
        StepEigen { values: eig.eigenvalues, vectors: eig.eigenvectors, phases }
    }

    fn propagator(&self, amps: &DMatrix<T>) -> CMatrix<T> {
        (0..self.ops.len()).fold(identity(self.dim), |u, k| self.eigen(amps, k).exponential() * u)
    }

    fn fidelity(&self, amps: &DMatrix<T>) -> T {
        modulus(overlap(&self.propagator(amps), &self.target)) / T::lit(self.dim as f64)
    }

    fn fidelity_and_gradient(&self, amps: &DMatrix<T>) -> (T, DMatrix<T>) {
        let steps = self.ops.len();
        let eigs: Vec<StepEigen<T>> = (0..steps).map(|k| self.eigen(amps, k)).collect();
        let props: Vec<CMatrix<T>> = eigs.iter().map(StepEigen::exponential).collect();
        // forward[k] = P_{k-1} ⋯ P_0.
        let mut forward = Vec::with_capacity(steps + 1);
        forward.push(identity::<T>(self.dim));
        for p in &props {
            let next = p * forward.last().expect("nonempty");
            forward.push(next);
        }
        let z = overlap(&forward[steps], &self.target);
        let dim = T::lit(self.dim as f64);
        let abs_z = modulus(z).max(T::default_epsilon());
        let g_dag = self.target.adjoint();
        let mut grad = DMatrix::zeros(steps, amps.ncols());
        // backward = P_{steps-1} ⋯ P_{k+1}.
        let mut backward = identity::<T>(self.dim);
        for k in (0..steps).rev() {
            let e = &eigs[k];
            let w = &e.vectors;
            let m = w.adjoint() * &forward[k] * &g_dag * &backward * w;
            let gamma = self.divided_differences(e);
            for (c, op) in self.ops[k].iter().enumerate() {
                let h = w.adjoint() * op * w;
                let mut dz = Complex::new(T::zero(), T::zero());
                for p in 0..self.dim {
                    for q in 0..self.dim {
                        dz += m[(q, p)] * gamma[(p, q)] * h[(p, q)];
                    }
                }
                grad[(k, c)] = (z.conj() * dz).re / (abs_z * dim);
            }
            backward = &backward * &props[k];
        }
        (abs_z / dim, grad)
    }

    /// `Γ_pq = (f(λ_p) − f(λ_q)) / (λ_p − λ_q)` for `f(λ) = e^{-iλ dt}`, with
    /// the derivative `-i dt f(λ_p)` on (near-)coincident eigenvalues.
    fn divided_differences(&self, e: &StepEigen<T>) -> CMatrix<T> {
        let n = self.dim;
        let tiny = T::lit(1e-10);
        DMatrix::from_fn(n, n, |p, q| {
            let d = e.values[p] - e.values[q];
            if (d * self.dt).abs() < tiny {
                e.phases[p] * Complex::new(T::zero(), -self.dt)
            } else {
                (e.phases[p] - e.phases[q]) / d
            }
        })
    }
}

/// Fidelity of `pulse` and its exact gradient with respect to every
/// amplitude (rows: steps, columns: controls).
pub fn fidelity_gradient<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    target: &TargetGate<T>,
) -> Result<(T, DMatrix<T>)> {
    Ok(Problem::new(system, pulse, target)?.fidelity_and_gradient(pulse.amplitudes()))
}

/// Fidelity of `pulse` as the optimizer evaluates it.
pub fn pulse_fidelity<T: Real>(system: &QuantumSystem<T>, pulse: &ControlPulse<T>, target: &TargetGate<T>) -> Result<T> {
    Ok(Problem::new(system, pulse, target)?.fidelity(pulse.amplitudes()))
}

fn clip<T: Real>(amps: &mut DMatrix<T>, bound: Option<T>) {
    if let Some(b) = bound {
        amps.iter_mut().for_each(|x| *x = x.clamp(-b, b));
    }
}

/// Polak–Ribière conjugate-gradient ascent with a backtracking line search.
/// A step is only taken when it raises the fidelity, so the trace is
/// nondecreasing.
pub fn optimize<T: Real>(
    system: &QuantumSystem<T>,
    target: &TargetGate<T>,
    options: &OptimizeOptions<T>,
) -> Result<OptimizationRun<T>> {
    let OptimizeOptions { t_final, steps, seed, max_iters, tol, .. } = *options;
    let mut pulse = match &options.init {
        Some(p) => p.clone(),
        None => random_pulse(system.controls().len(), t_final, steps, seed, options.init_amplitude)?,
    };
    clip(pulse.amplitudes_mut(), options.max_amplitude);
    let problem = Problem::new(system, &pulse, target)?;
    let goal = T::one() - tol;

    let (mut f, mut grad) = problem.fidelity_and_gradient(pulse.amplitudes());
    let mut trace = vec![f];
    let mut direction = grad.clone();
    let mut step = options.initial_step;
    let mut iterations = 0;
    while f < goal && iterations < max_iters {
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteGradient { iteration: iterations });
        }
        if direction.dot(&grad) <= T::zero() {
            direction = grad.clone();
        }
        let mut accepted = None;
        for _ in 0..40 {
            let mut trial = pulse.amplitudes() + &direction * step;
            clip(&mut trial, options.max_amplitude);
            let f_trial = problem.fidelity(&trial);
            if f_trial > f {
                accepted = Some((trial, f_trial));
                break;
            }
            step /= T::lit(2.0);
        }
        let Some((amps, f_new)) = accepted else { break };
        iterations += 1;
        *pulse.amplitudes_mut() = amps;
        let (f_eval, g_new) = problem.fidelity_and_gradient(pulse.amplitudes());
        f = f_eval.max(f_new);
        trace.push(f);
        let denom = grad.dot(&grad);
        let beta = if options.conjugate && denom > T::zero() { ((g_new.dot(&g_new) - g_new.dot(&grad)) / denom).max(T::zero()) } else { T::zero() };
        direction = &g_new + &direction * beta;
        grad = g_new;
        step *= T::lit(1.5);
    }
    Ok(OptimizationRun { pulse, converged: f >= goal, fidelity_trace: trace, seed, iterations })
}
