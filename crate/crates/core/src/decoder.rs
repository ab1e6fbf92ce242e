//! Spectral decoding of `s`-grid samples into class amplitudes, and the
//! per-element mechanism report.

use std::collections::BTreeMap;

use nalgebra::Complex;
use serde::Serialize;

use crate::encoding::{sweep, EncodingScheme, Sweep};
use crate::error::{Error, Result};
use crate::linalg::modulus;
use crate::pathways::{ClassKey, Mode, PathwayClass};
use crate::propagator::propagate;
use crate::system::{ControlPulse, QuantumSystem};
use crate::Real;

/// Bins with magnitude above this count towards the unassigned mass.
pub const UNASSIGNED_TOL: f64 = 1e-12;
/// Reports whose unassigned mass exceeds this are flagged.
pub const UNASSIGNED_FLAG: f64 = 1e-3;
/// Phases of smaller magnitudes are printed as undefined.
pub const PHASE_FLOOR: f64 = 1e-9;

/// In-place radix-2 decimation-in-time transform with kernel
/// `e^{-2πi mk/n}`. `x.len()` must be a power of two.
pub fn fft_forward<T: Real>(x: &mut [Complex<T>]) {
    let n = x.len();
    assert!(n.is_power_of_two(), "transform length must be a power of two");
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            x.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let twiddles: Vec<Complex<T>> = (0..half)
            .map(|m| {
                let theta = -T::two_pi() * T::lit(m as f64) / T::lit(len as f64);
                Complex::new(theta.cos(), theta.sin())
            })
            .collect();
        for chunk in x.chunks_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((a, b), w) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let t = *b * *w;
                *b = *a - t;
                *a += t;
            }
        }
        len *= 2;
    }
}

/// `bins[m] = (1/n) Σ_k samples[k] e^{-2πi mk/n}`: the amplitude at every
/// frequency `≡ m (mod n)`.
pub fn spectrum<T: Real>(samples: &[Complex<T>]) -> Vec<Complex<T>> {
    let mut bins = samples.to_vec();
    fft_forward(&mut bins);
    let scale = T::one() / T::lit(samples.len() as f64);
    bins.iter_mut().for_each(|z| *z *= scale);
    bins
}

/// Degrees in `(-180, 180]`.
pub fn phase_degrees<T: Real>(z: Complex<T>) -> T {
    let deg = z.im.atan2(z.re) * T::lit(180.0) / T::pi();
    if deg <= T::lit(-180.0) {
        deg + T::lit(360.0)
    } else {
        deg
    }
}

/// Phase for display: `—` when the magnitude is below [`PHASE_FLOOR`].
pub fn format_phase<T: Real>(z: Complex<T>) -> String {
    if modulus(z).to_f64_lossy() < PHASE_FLOOR {
        "—".to_string()
    } else {
        let deg = phase_degrees(z).to_f64_lossy().round() + 0.0;
        format!("{}", if deg == -180.0 { 180.0 } else { deg })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassAmplitude<T: Real> {
    pub class: PathwayClass,
    pub amplitude: Complex<T>,
    pub magnitude: T,
    pub phase_deg: T,
}

impl<T: Real> ClassAmplitude<T> {
    pub fn new(class: PathwayClass, amplitude: Complex<T>) -> Self {
        Self { magnitude: modulus(amplitude), phase_deg: phase_degrees(amplitude), class, amplitude }
    }

    pub fn frequency(&self) -> i64 {
        self.class.frequency.unwrap_or(0)
    }
}

/// Class amplitudes of one element, in class order, plus the full spectrum.
#[derive(Debug, Clone)]
pub struct Decoded<T: Real> {
    pub bins: Vec<Complex<T>>,
    pub classes: Vec<ClassAmplitude<T>>,
    pub unassigned_mass: T,
}

/// Reads every class amplitude off its bin. Classes without a frequency are
/// assigned one from the scheme.
pub fn decode<T: Real>(
    samples: &[Complex<T>],
    scheme: &EncodingScheme,
    classes: &[PathwayClass],
) -> Result<Decoded<T>> {
    if samples.len() != scheme.n_s() {
        return Err(Error::SampleCount { expected: scheme.n_s(), found: samples.len() });
    }
    let bins = spectrum(samples);
    let mut owner: BTreeMap<usize, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(classes.len());
    for (i, class) in classes.iter().enumerate() {
        let mut class = class.clone();
        let freq = *class.frequency.get_or_insert_with(|| scheme.frequency(&class.key));
        let bin = scheme.bin(freq);
        if let Some(&j) = owner.get(&bin) {
            return Err(Error::BinCollision {
                bin,
                first: format!("{:?}", classes[j].representative.states),
                second: format!("{:?}", class.representative.states),
            });
        }
        owner.insert(bin, i);
        out.push(ClassAmplitude::new(class, bins[bin]));
    }
    let tol = T::lit(UNASSIGNED_TOL);
    let unassigned_mass = bins
        .iter()
        .enumerate()
        .filter(|(m, _)| !owner.contains_key(m))
        .map(|(_, z)| modulus(*z))
        .filter(|&m| m > tol)
        .fold(T::zero(), |a, b| a + b);
    Ok(Decoded { bins, classes: out, unassigned_mass })
}

#[derive(Debug, Clone, Serialize)]
pub struct MechanismReport<T: Real> {
    pub mode: Mode,
    /// `(b, a)` for `⟨b|U(T)|a⟩`.
    pub element: (usize, usize),
    pub labels: Vec<String>,
    pub n_max: usize,
    pub n_s: usize,
    /// Every enumerated class, largest magnitude first.
    pub classes: Vec<ClassAmplitude<T>>,
    /// Sum over all bins, which equals the `s = 0` sample.
    pub coherent_sum: Complex<T>,
    pub direct_value: Complex<T>,
    pub unassigned_mass: T,
    pub floor: T,
}

impl<T: Real> MechanismReport<T> {
    /// Classes whose magnitude exceeds the display floor.
    pub fn visible(&self) -> impl Iterator<Item = &ClassAmplitude<T>> {
        self.classes.iter().filter(move |c| c.magnitude > self.floor)
    }

    pub fn with_floor(mut self, floor: T) -> Self {
        self.floor = floor;
        self
    }

    pub fn flagged(&self) -> bool {
        self.unassigned_mass > T::lit(UNASSIGNED_FLAG)
    }

    /// `|coherent_sum − direct_value| / max(1, |direct_value|)`.
    pub fn partition_residual(&self) -> T {
        modulus(self.coherent_sum - self.direct_value) / T::one().max(modulus(self.direct_value))
    }

    pub fn element_label(&self) -> String {
        format!("{}→{}", self.labels[self.element.1], self.labels[self.element.0])
    }

    pub fn find(&self, display: &str) -> Option<&ClassAmplitude<T>> {
        self.classes.iter().find(|c| c.class.display(&self.labels) == display)
    }
}

fn assemble<T: Real>(
    system: &QuantumSystem<T>,
    scheme: &EncodingScheme,
    element: (usize, usize),
    samples: &[Complex<T>],
    direct_value: Complex<T>,
    floor: T,
) -> Result<MechanismReport<T>> {
    let (b, a) = element;
    let classes = scheme.classes(a, b);
    let decoded = decode(samples, scheme, &classes)?;
    let mut ranked = decoded.classes;
    ranked.sort_by(|x, y| y.magnitude.partial_cmp(&x.magnitude).unwrap_or(std::cmp::Ordering::Equal));
    let coherent_sum = decoded.bins.iter().fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z);
    Ok(MechanismReport {
        mode: scheme.mode(),
        element,
        labels: system.basis_labels().to_vec(),
        n_max: scheme.n_max(),
        n_s: scheme.n_s(),
        classes: ranked,
        coherent_sum,
        direct_value,
        unassigned_mass: decoded.unassigned_mass,
        floor,
    })
}

/// Sweeps, decodes and ranks the classes of `⟨b|U(T)|a⟩`.
pub fn build_report<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    scheme: &EncodingScheme,
    element: (usize, usize),
    floor: T,
) -> Result<MechanismReport<T>> {
    Ok(build_reports(system, pulse, scheme, &[element], floor)?.0.remove(0))
}

/// Reports for several elements from a single sweep. The sweep is returned
/// for callers that cache it.
pub fn build_reports<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    scheme: &EncodingScheme,
    elements: &[(usize, usize)],
    floor: T,
) -> Result<(Vec<MechanismReport<T>>, Sweep<T>)> {
    let sw = sweep(system, pulse, scheme, elements)?;
    let u = propagate(system, pulse, None)?.u_final;
    let reports = elements
        .iter()
        .zip(&sw.samples)
        .map(|(&element, samples)| assemble(system, scheme, element, samples, u[element], floor))
        .collect::<Result<_>>()?;
    Ok((reports, sw))
}

/// One `H` class against the sum of its `NH` children.
#[derive(Debug, Clone, Serialize)]
pub struct HnResidual<T: Real> {
    pub class: String,
    pub h_amplitude: Complex<T>,
    pub grouped_sum: Complex<T>,
    pub children: usize,
    pub residual: T,
}

/// Groups `NH` amplitudes under their parent `H` key and compares each group
/// sum with the `H`-decoded amplitude.
pub fn hn_consistency<T: Real>(nh: &MechanismReport<T>, h: &MechanismReport<T>) -> Vec<HnResidual<T>> {
    let mut groups: BTreeMap<ClassKey, (Complex<T>, usize)> = BTreeMap::new();
    for c in &nh.classes {
        let entry = groups.entry(c.class.key.to_hermitian()).or_insert((Complex::new(T::zero(), T::zero()), 0));
        entry.0 += c.amplitude;
        entry.1 += 1;
    }
    h.classes
        .iter()
        .filter_map(|c| {
            let &(sum, children) = groups.get(&c.class.key)?;
            Some(HnResidual {
                class: c.class.display(&h.labels),
                h_amplitude: c.amplitude,
                grouped_sum: sum,
                children,
                residual: modulus(sum - c.amplitude),
            })
        })
        .collect()
}
