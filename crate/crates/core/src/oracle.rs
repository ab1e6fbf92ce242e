//! Direct quadrature of single-pathway Dyson integrals, and the closed-form
//! X-gate amplitudes.

use nalgebra::Complex;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathways::Pathway;
use crate::system::{check_compatible, ControlPulse, QuantumSystem};
use crate::Real;

pub const DEFAULT_ORDER_CAP: usize = 4;

#[derive(Debug, Clone, Serialize)]
pub struct OracleAmplitude<T: Real> {
    pub pathway: Pathway,
    pub amplitude: Complex<T>,
    pub dt_used: T,
}

pub fn dyson_amplitude<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    pathway: &Pathway,
) -> Result<OracleAmplitude<T>> {
    dyson_amplitude_with_cap(system, pulse, pathway, DEFAULT_ORDER_CAP)
}

/// Nested time-ordered integral of `v_{b l} ⋯ v_{l₁ a}` with
/// `v_ji(t) = -i⟨j|V(t)|i⟩`.
///
/// Each level is a running trapezoid sum on the pulse grid, so the cost is
/// `O(order · steps)`. Within an interval the drive is constant but `V(t)`
/// still rotates with the drift, so the two trapezoid nodes use the one-sided
/// values of `V` at the interval ends. The error is `O(dt²)`.
pub fn dyson_amplitude_with_cap<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    pathway: &Pathway,
    cap: usize,
) -> Result<OracleAmplitude<T>> {
    check_compatible(system, pulse)?;
    let order = pathway.order();
    if order > cap {
        return Err(Error::OrderCapExceeded { order, cap });
    }
    let dim = system.dim();
    if let Some(&s) = pathway.states.iter().find(|&&s| s >= dim) {
        return Err(Error::IndexOutOfRange { index: s, len: dim });
    }
    let zero = Complex::new(T::zero(), T::zero());
    let minus_i = Complex::new(T::zero(), -T::one());
    let half_dt = pulse.dt() / T::lit(2.0);
    let frame = system.frame();
    let links: Vec<(usize, usize)> = pathway.transitions().map(|t| (t.to, t.from)).collect();

    // level[m] = I_m at the current grid time, with I_0 ≡ 1.
    let mut level = vec![zero; order + 1];
    level[0] = Complex::new(T::one(), T::zero());
    for k in 0..pulse.steps() {
        let hc = system.control_hamiltonian(pulse, k);
        let left = frame.apply(&hc, pulse.time(k));
        let right = frame.apply(&hc, pulse.time(k + 1));
        let mut next = level.clone();
        for (m, &(j, i)) in links.iter().enumerate() {
            let v_left = minus_i * left[(j, i)];
            let v_right = minus_i * right[(j, i)];
            next[m + 1] = level[m + 1] + (v_left * level[m] + v_right * next[m]) * half_dt;
        }
        level = next;
    }
    let amplitude = level[order];
    if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
        return Err(Error::NonFinite("oracle amplitude".into()));
    }
    Ok(OracleAmplitude { pathway: pathway.clone(), amplitude, dt_used: pulse.dt() })
}

/// Oracle amplitudes for many pathways, in input order.
pub fn dyson_amplitudes<T: Real>(
    system: &QuantumSystem<T>,
    pulse: &ControlPulse<T>,
    pathways: &[Pathway],
    cap: usize,
) -> Result<Vec<OracleAmplitude<T>>> {
    pathways.par_iter().map(|p| dyson_amplitude_with_cap(system, pulse, p, cap)).collect()
}

/// `(1/n!)(-iπ/2)ⁿ` for the constant π-pulse when `n` has the parity of
/// `b − a`, zero otherwise.
pub fn xgate_analytic<T: Real>(n: usize, element: (usize, usize)) -> Complex<T> {
    let (b, a) = element;
    assert!(a < 2 && b < 2, "X-gate states are 0 and 1");
    if !(n + a + b).is_multiple_of(2) {
        return Complex::new(T::zero(), T::zero());
    }
    let base = Complex::new(T::zero(), -T::frac_pi_2());
    (1..=n).fold(Complex::new(T::one(), T::zero()), |acc, k| acc * base / T::lit(k as f64))
}
