//! Frequency assignment for Hamiltonian encoding and the `s`-grid sweep.
//!
//! Every modulated transition `i → j` carries an integer `γ_ji`; a pathway's
//! frequency is the sum over its transitions. Schemes are built so that
//! distinct classes with the same endpoints and order `≤ n_max` never share a
//! frequency.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, cis};
use crate::pathways::{classify, enumerate_pathways, ClassKey, Mode, PathwayClass};
use crate::propagator::{ExpMethod, InteractionSeries, PropagateOptions};
use crate::system::{ControlPulse, QuantumSystem, Transition, TransitionGraph};
use crate::{CMatrix, Real};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingOptions {
    pub mode: Mode,
    pub n_max: usize,
    /// Orders beyond `n_max` up to this one are kept from wrapping around the
    /// grid onto claimed bins.
    pub guard_order: usize,
    /// Largest admissible `|γ|` per transition.
    pub max_frequency: i64,
}

impl EncodingOptions {
    pub fn new(mode: Mode, n_max: usize) -> Self {
        Self { mode, n_max, guard_order: 24, max_frequency: 1 << 16 }
    }
}

#[derive(Debug, Clone)]
pub struct EncodingScheme {
    mode: Mode,
    n_max: usize,
    n_s: usize,
    gamma: BTreeMap<Transition, i64>,
    gamma_max_path: i64,
    graph: TransitionGraph,
}

impl EncodingScheme {
    /// A scheme with explicitly chosen frequencies; `n_s` must be a power of
    /// two.
    pub fn from_parts(
        graph: &TransitionGraph,
        mode: Mode,
        n_max: usize,
        gamma: BTreeMap<Transition, i64>,
        n_s: usize,
    ) -> Result<Self> {
        if !n_s.is_power_of_two() {
            return Err(Error::SampleCount { expected: n_s.next_power_of_two(), found: n_s });
        }
        if let Some(t) = graph.edges().iter().find(|t| !gamma.contains_key(t)) {
            return Err(Error::Parse(format!("no frequency for transition {} -> {}", t.from, t.to)));
        }
        let mut scheme = Self { mode, n_max, n_s, gamma, gamma_max_path: 0, graph: graph.clone() };
        scheme.gamma_max_path = all_keys(graph, mode, n_max)
            .values()
            .flatten()
            .map(|k| scheme.frequency(k).abs())
            .max()
            .unwrap_or(0);
        Ok(scheme)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn gamma_max_path(&self) -> i64 {
        self.gamma_max_path
    }

    pub fn graph(&self) -> &TransitionGraph {
        &self.graph
    }

    pub fn gammas(&self) -> &BTreeMap<Transition, i64> {
        &self.gamma
    }

    /// `γ` for the transition `from → to`.
    pub fn gamma(&self, from: usize, to: usize) -> Option<i64> {
        self.gamma.get(&Transition::new(from, to)).copied()
    }

    pub fn frequency(&self, key: &ClassKey) -> i64 {
        key.edges.iter().map(|&(f, t, c)| c * self.gamma(f, t).unwrap_or(0)).sum()
    }

    /// Grid bin holding frequency `freq`.
    pub fn bin(&self, freq: i64) -> usize {
        freq.rem_euclid(self.n_s as i64) as usize
    }

    /// `s_k = 2πk / n_s`.
    pub fn s<T: Real>(&self, k: usize) -> T {
        T::two_pi() * T::lit(k as f64) / T::lit(self.n_s as f64)
    }

    /// Classes from `a` to `b` up to `n_max`, frequencies filled in.
    pub fn classes(&self, a: usize, b: usize) -> Vec<PathwayClass> {
        let mut classes = classify(&enumerate_pathways(&self.graph, a, b, self.n_max), self.mode);
        for c in &mut classes {
            c.frequency = Some(self.frequency(&c.key));
        }
        classes
    }

    /// Phase factor `e^{iγ s_k}` with the product `γk` reduced on the grid
    /// first, so large frequencies lose no accuracy.
    fn grid_factor<T: Real>(&self, gamma: i64, k: usize) -> Complex<T> {
        let n = self.n_s as i64;
        let mut r = (gamma * k as i64).rem_euclid(n);
        if 2 * r > n {
            r -= n;
        }
        cis(T::two_pi() * T::lit(r as f64) / T::lit(n as f64))
    }

    fn grid_factors<T: Real>(&self, dim: usize, k: usize) -> CMatrix<T> {
        let mut f = DMatrix::from_element(dim, dim, Complex::new(T::one(), T::zero()));
        if k != 0 {
            for (t, &g) in &self.gamma {
                f[(t.to, t.from)] = self.grid_factor(g, k);
            }
        }
        f
    }
}

/// Elementwise factors `e^{iγ_ji s}` for every modulated `(j, i)`; ones
/// elsewhere.
pub fn modulation_factors<T: Real>(scheme: &EncodingScheme, s: T) -> CMatrix<T> {
    let dim = scheme.graph.dim();
    let mut f = DMatrix::from_element(dim, dim, Complex::new(T::one(), T::zero()));
    for (t, &g) in &scheme.gamma {
        f[(t.to, t.from)] = cis(T::lit(g as f64) * s);
    }
    f
}

/// Keys of every class with order `≤ n_max`, grouped by endpoints.
fn all_keys(graph: &TransitionGraph, mode: Mode, n_max: usize) -> BTreeMap<(usize, usize), Vec<ClassKey>> {
    let dim = graph.dim();
    let mut out = BTreeMap::new();
    for a in 0..dim {
        for b in 0..dim {
            let keys: Vec<ClassKey> =
                classify(&enumerate_pathways(graph, a, b, n_max), mode).into_iter().map(|c| c.key).collect();
            if !keys.is_empty() {
                out.insert((a, b), keys);
            }
        }
    }
    out
}

/// Sparse integer constraint `Σ coeff · g_var ≠ 0`, stored sorted by variable.
type Constraint = Vec<(usize, i64)>;

fn difference(x: &[(usize, i64)], y: &[(usize, i64)]) -> Constraint {
    let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
    for &(v, c) in x {
        *acc.entry(v).or_default() += c;
    }
    for &(v, c) in y {
        *acc.entry(v).or_default() -= c;
    }
    let mut d: Constraint = acc.into_iter().filter(|&(_, c)| c != 0).collect();
    if d.first().is_some_and(|&(_, c)| c < 0) {
        d.iter_mut().for_each(|e| e.1 = -e.1);
    }
    d
}

/// Chooses one value per variable, in order, so that no constraint sums to
/// zero. A constraint is checked when its last variable is fixed.
fn greedy_assign(
    n_vars: usize,
    constraints: &BTreeSet<Constraint>,
    candidates: impl Fn(&[i64]) -> Box<dyn Iterator<Item = i64>>,
    limit: i64,
    n_max: usize,
) -> Result<Vec<i64>> {
    let mut by_last: Vec<Vec<&Constraint>> = vec![Vec::new(); n_vars];
    for c in constraints {
        if let Some(&(v, _)) = c.last() {
            by_last[v].push(c);
        }
    }
    let mut values: Vec<i64> = Vec::with_capacity(n_vars);
    for checks in by_last.iter() {
        let chosen = candidates(&values).take_while(|g| g.abs() <= limit).find(|&g| {
            checks.iter().all(|c| {
                let (&(_, last), rest) = c.split_last().expect("nonempty constraint");
                rest.iter().map(|&(v, k)| k * values[v]).sum::<i64>() + last * g != 0
            })
        });
        match chosen {
            Some(g) => values.push(g),
            None => return Err(Error::InjectivityUnachievable { n_max, limit }),
        }
    }
    Ok(values)
}

fn smallest_grid(gamma_max_path: i64, gamma_max_edge: i64, guard_order: usize) -> usize {
    let need = (2 * gamma_max_path + 1).max(gamma_max_path + guard_order as i64 * gamma_max_edge + 1);
    let mut n = 1usize;
    while (n as i64) <= need {
        n *= 2;
    }
    n
}

pub fn assign_frequencies(graph: &TransitionGraph, mode: Mode, n_max: usize) -> Result<EncodingScheme> {
    assign_frequencies_with(graph, &EncodingOptions::new(mode, n_max))
}

/// `H` mode gives each undirected edge `{i<j}` a positive `g` with
/// `γ(i→j) = g`, `γ(j→i) = -g`. `NH` mode gives each directed edge a distinct
/// offset `g ≥ 0` and sets `γ = M + g`, with `M` large enough that each order
/// occupies its own frequency band; offsets then only have to separate
/// classes of equal order.
pub fn assign_frequencies_with(graph: &TransitionGraph, options: &EncodingOptions) -> Result<EncodingScheme> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let EncodingOptions { mode, n_max, guard_order, max_frequency } = *options;
    let keys = all_keys(graph, mode, n_max);
    let mut constraints = BTreeSet::new();

    let gamma = match mode {
        Mode::H => {
            let undirected = graph.undirected();
            let var = |f: usize, t: usize| undirected.iter().position(|&p| p == (f.min(t), f.max(t))).expect("edge");
            let coords = |k: &ClassKey| -> Vec<(usize, i64)> {
                k.edges.iter().map(|&(f, t, c)| (var(f, t), if f < t { c } else { -c })).collect()
            };
            for group in keys.values() {
                for (i, x) in group.iter().enumerate() {
                    for y in &group[i + 1..] {
                        constraints.insert(difference(&coords(x), &coords(y)));
                    }
                }
            }
            let g = greedy_assign(undirected.len(), &constraints, |_| Box::new(1..), max_frequency, n_max)?;
            undirected
                .iter()
                .zip(&g)
                .flat_map(|(&(i, j), &g)| [(Transition::new(i, j), g), (Transition::new(j, i), -g)])
                .collect::<BTreeMap<_, _>>()
        }
        Mode::NH => {
            let directed: Vec<Transition> = graph.edges().iter().copied().collect();
            let var = |f: usize, t: usize| directed.binary_search(&Transition::new(f, t)).expect("edge");
            let coords = |k: &ClassKey| -> Vec<(usize, i64)> { k.edges.iter().map(|&(f, t, c)| (var(f, t), c)).collect() };
            for group in keys.values() {
                for (i, x) in group.iter().enumerate() {
                    for y in group[i + 1..].iter().filter(|y| y.order() == x.order()) {
                        constraints.insert(difference(&coords(x), &coords(y)));
                    }
                }
            }
            let offsets = greedy_assign(
                directed.len(),
                &constraints,
                |used| {
                    let used = used.to_vec();
                    Box::new((0..).filter(move |g| !used.contains(g)))
                },
                max_frequency,
                n_max,
            )?;
            let spread = offsets.iter().max().expect("nonempty") - offsets.iter().min().expect("nonempty");
            let band = n_max.max(1) as i64 * spread + 1;
            if band + spread > max_frequency {
                return Err(Error::InjectivityUnachievable { n_max, limit: max_frequency });
            }
            directed.iter().zip(&offsets).map(|(&t, &g)| (t, band + g)).collect()
        }
    };

    let frequency = |k: &ClassKey| -> i64 { k.edges.iter().map(|&(f, t, c)| c * gamma[&Transition::new(f, t)]).sum() };
    for ((a, b), group) in &keys {
        let mut seen: BTreeMap<i64, &ClassKey> = BTreeMap::new();
        for k in group {
            if let Some(prev) = seen.insert(frequency(k), k) {
                return Err(Error::BinCollision {
                    bin: frequency(k).unsigned_abs() as usize,
                    first: format!("{a}->{b} {:?}", prev.edges),
                    second: format!("{a}->{b} {:?}", k.edges),
                });
            }
        }
    }
    let gamma_max_path = keys.values().flatten().map(|k| frequency(k).abs()).max().unwrap_or(0);
    let gamma_max_edge = gamma.values().map(|g| g.abs()).max().unwrap_or(0);
    let n_s = smallest_grid(gamma_max_path, gamma_max_edge, guard_order);
    Ok(EncodingScheme { mode, n_max, n_s, gamma, gamma_max_path, graph: graph.clone() })
}

/// Samples `U_ba(s_k)` for every requested element `(b, a)`.
#[derive(Debug, Clone)]
pub struct Sweep<T: Real> {
    pub mode: Mode,
    pub elements: Vec<(usize, usize)>,
    /// `samples[e][k]` for element `e` at `s_k`.
    pub samples: Vec<Vec<Complex<T>>>,
    /// Largest `‖U†U − I‖_max` over the grid, tracked for `H` schemes.
    pub max_unitarity_defect: Option<T>,
}

impl<T: Real> Sweep<T> {
    pub fn samples_for(&self, element: (usize, usize)) -> Option<&[Complex<T>]> {
        self.elements.iter().position(|&e| e == element).map(|i| self.samples[i].as_slice())
    }
}

/// Propagates the modulated system at every `s_k` (in parallel) and records
/// the requested elements. `H` schemes use diagonalisation at every step and
/// `NH` schemes use scaling and squaring at every step, including `k = 0`.
pub fn sweep<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    scheme: &EncodingScheme,
    elements: &[(usize, usize)],
) -> Result<Sweep<T>> {
    let dim = system.dim();
    if scheme.graph.dim() != dim {
        return Err(Error::ShapeMismatch { expected: format!("dimension {dim}"), found: format!("scheme of dimension {}", scheme.graph.dim()) });
    }
    if let Some(&(b, a)) = elements.iter().find(|&&(b, a)| b >= dim || a >= dim) {
        return Err(Error::IndexOutOfRange { index: b.max(a), len: dim });
    }
    let series = InteractionSeries::new(system, pulse)?;
    let method = match scheme.mode {
        Mode::H => ExpMethod::Eigen,
        Mode::NH => ExpMethod::Pade,
    };
    let options = PropagateOptions { method, keep_trajectory: false };
    let per_k: Vec<(Vec<Complex<T>>, T)> = (0..scheme.n_s)
        .into_par_iter()
        .map(|k| {
            let factors = scheme.grid_factors::<T>(dim, k);
            let u = series.propagate(Some(&factors), options)?.u_final;
            let defect = if scheme.mode == Mode::H { linalg::unitarity_defect(&u) } else { T::zero() };
            Ok((elements.iter().map(|&(b, a)| u[(b, a)]).collect(), defect))
        })
        .collect::<Result<_>>()?;
    let mut samples = vec![Vec::with_capacity(scheme.n_s); elements.len()];
    let mut worst = T::zero();
    for (values, defect) in per_k {
        worst = worst.max(defect);
        for (e, v) in values.into_iter().enumerate() {
            samples[e].push(v);
        }
    }
    Ok(Sweep {
        mode: scheme.mode,
        elements: elements.to_vec(),
        samples,
        max_unitarity_defect: (scheme.mode == Mode::H).then_some(worst),
    })
}
