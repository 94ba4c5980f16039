//! Pulse-train metrics computed from simulated traces.

use super::{FieldTrace, PulseHistogram};
use crate::error::{Error, Result};
use crate::float::Real;
use num_complex::Complex;

/// A dB ratio whose denominator may have been empty.
///
/// `Censored` carries the lower bound obtained by substituting a single count
/// for the empty denominator; the true ratio is at least that large.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DbRatio<T> {
    Exact(T),
    Censored(T),
}

impl<T: Copy> DbRatio<T> {
    /// The measured value or, when censored, the lower bound.
    pub fn value(&self) -> T {
        match self {
            DbRatio::Exact(v) | DbRatio::Censored(v) => *v,
        }
    }

    /// True when the denominator was empty and only a lower bound is known.
    pub fn is_censored(&self) -> bool {
        matches!(self, DbRatio::Censored(_))
    }
}

/// Extinction ratio of a pulse histogram: `10·log10(N_max / N_min)` over all
/// bins. An empty minimum bin censors the result to the lower bound
/// `10·log10(N_max / 1)`.
pub fn extinction_ratio<T: Real>(hist: &PulseHistogram<T>) -> Result<DbRatio<T>> {
    let n_max = hist.counts.iter().copied().max().unwrap_or(0);
    if n_max == 0 {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    let n_min = hist.counts.iter().copied().min().unwrap();
    let ten = T::of(10.0);
    if n_min == 0 {
        Ok(DbRatio::Censored(
            ten * T::from_u64(n_max).unwrap().log10(),
        ))
    } else {
        Ok(DbRatio::Exact(
            ten * (T::from_u64(n_max).unwrap() / T::from_u64(n_min).unwrap()).log10(),
        ))
    }
}

/// Side-mode suppression ratio of a trace: time-averaged injected-mode power
/// over the strongest time-averaged side-mode power, in dB. All side modes
/// empty censors the result.
pub fn mode_suppression_ratio<T: Real>(trace: &FieldTrace<T>) -> Result<DbRatio<T>> {
    if trace.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    let n = T::from_usize(trace.len()).unwrap();
    let main: T = trace.field.iter().map(|e| e.norm_sqr()).sum::<T>() / n;
    let strongest = trace
        .side_modes
        .iter()
        .map(|s| s.iter().copied().sum::<T>() / n)
        .fold(T::zero(), T::max);
    let ten = T::of(10.0);
    if strongest > T::zero() {
        Ok(DbRatio::Exact(ten * (main / strongest).log10()))
    } else {
        Ok(DbRatio::Censored(ten * main.max(T::one()).log10()))
    }
}

/// Energy of each pulse window (`|E|²` integrated over one clock period),
/// in photon·ps units.
pub fn pulse_energies<T: Real>(trace: &FieldTrace<T>, clock_ghz: T) -> Vec<T> {
    let period = T::of(1000.0) / clock_ghz;
    let dt = trace.dt_ps();
    let t0 = trace.time_ps[0];
    let n_pulses = ((trace.time_ps[trace.len() - 1] - t0) / period).floor().as_f64() as usize;
    let mut energies = vec![T::zero(); n_pulses];
    for i in 0..trace.len() {
        let k = ((trace.time_ps[i] - t0) / period).floor().as_f64() as usize;
        if k < n_pulses {
            energies[k] += trace.field[i].norm_sqr() * dt;
        }
    }
    energies
}

/// Energy-weighted mean field phase of each pulse window, rad.
///
/// Windows are consecutive clock periods from the start of the trace. A
/// window whose energy falls below 10⁻⁶ of the strongest pulse yields `None`.
pub fn pulse_phases<T: Real>(trace: &FieldTrace<T>, clock_ghz: T) -> Vec<Option<T>> {
    let period = T::of(1000.0) / clock_ghz;
    let t0 = trace.time_ps[0];
    let n_pulses = ((trace.time_ps[trace.len() - 1] - t0) / period).floor().as_f64() as usize;
    let mut sums = vec![Complex::<T>::new(T::zero(), T::zero()); n_pulses];
    let mut energies = vec![T::zero(); n_pulses];
    for i in 0..trace.len() {
        let k = ((trace.time_ps[i] - t0) / period).floor().as_f64() as usize;
        if k < n_pulses {
            let e = trace.field[i];
            let w = e.norm_sqr();
            energies[k] += w;
            if w > T::zero() {
                // Weight the unit phasor by |E|² so bright samples dominate.
                sums[k] += e * e.norm();
            }
        }
    }
    let peak = energies.iter().cloned().fold(T::zero(), T::max);
    let floor = peak * T::of(1e-6);
    (0..n_pulses)
        .map(|k| {
            if energies[k] > floor && energies[k] > T::zero() {
                Some(sums[k].arg())
            } else {
                None
            }
        })
        .collect()
}

/// Interference visibility of adjacent pulses:
/// `V = |mean over k of exp(i(φ_k − φ_{k+1}))|`.
pub fn interference_visibility<T: Real>(phases: &[T]) -> Result<T> {
    if phases.len() < 2 {
        return Err(Error::InsufficientData {
            required: 2,
            actual: phases.len(),
        });
    }
    let mut acc = Complex::<T>::new(T::zero(), T::zero());
    for w in phases.windows(2) {
        let d = w[0] - w[1];
        acc += Complex::new(d.cos(), d.sin());
    }
    Ok(acc.norm() / T::from_usize(phases.len() - 1).unwrap())
}

/// Circular mean of a phase sample, rad.
pub fn circular_mean<T: Real>(phases: &[T]) -> T {
    let mut acc = Complex::<T>::new(T::zero(), T::zero());
    for p in phases {
        acc += Complex::new(p.cos(), p.sin());
    }
    acc.arg()
}

/// Circular standard deviation `√(−2 ln R̄)` of a phase sample, rad.
pub fn circular_std<T: Real>(phases: &[T]) -> T {
    if phases.is_empty() {
        return T::zero();
    }
    let mut acc = Complex::<T>::new(T::zero(), T::zero());
    for p in phases {
        acc += Complex::new(p.cos(), p.sin());
    }
    let r = (acc.norm() / T::from_usize(phases.len()).unwrap()).min(T::one());
    if r <= T::zero() {
        return T::infinity();
    }
    (-(T::of(2.0)) * r.ln()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laser::PulseHistogram;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn hist(counts: Vec<u64>) -> PulseHistogram<f64> {
        let edges = (0..=counts.len()).map(|i| i as f64).collect();
        PulseHistogram::new(edges, counts).unwrap()
    }

    #[test]
    fn test_extinction_ratio_direct_values() {
        assert_relative_eq!(
            extinction_ratio(&hist(vec![1000, 1])).unwrap().value(),
            30.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            extinction_ratio(&hist(vec![100, 100])).unwrap().value(),
            0.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            extinction_ratio(&hist(vec![2000, 1])).unwrap().value(),
            33.010_299_956_639_81,
            epsilon = 1e-9
        );
    }

    #[test]
    fn test_extinction_ratio_censors_empty_minimum() {
        let er = extinction_ratio(&hist(vec![1000, 0])).unwrap();
        assert!(er.is_censored());
        assert_relative_eq!(er.value(), 30.0, epsilon = 1e-12);
    }

    #[test]
    fn test_extinction_ratio_all_zero_is_error() {
        assert!(extinction_ratio(&hist(vec![0, 0])).is_err());
    }

    fn flat_trace(main: f64, side: f64, n: usize) -> FieldTrace<f64> {
        FieldTrace {
            time_ps: (0..n).map(|i| i as f64).collect(),
            field: vec![Complex::new(main.sqrt(), 0.0); n],
            side_modes: vec![vec![side; n]],
            side_mode_wavelengths_nm: vec![1548.75],
            injected_wavelength_nm: 1550.0,
            carrier_per_m3: vec![1e24; n],
            rng_seed: 0,
        }
    }

    #[test]
    fn test_mode_suppression_ratio_direct_value() {
        let t = flat_trace(1000.0, 1.0, 64);
        assert_relative_eq!(
            mode_suppression_ratio(&t).unwrap().value(),
            30.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn test_mode_suppression_ratio_censors_empty_side_modes() {
        let t = flat_trace(1000.0, 0.0, 64);
        let r = mode_suppression_ratio(&t).unwrap();
        assert!(r.is_censored());
        assert_relative_eq!(r.value(), 30.0, epsilon = 1e-9);
    }

    #[test]
    fn test_visibility_of_equal_phases_is_one() {
        let phases = vec![0.7_f64; 50];
        assert_relative_eq!(interference_visibility(&phases).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn test_visibility_of_alternating_pi_is_one() {
        let phases: Vec<f64> = (0..50)
            .map(|i| if i % 2 == 0 { 0.0 } else { std::f64::consts::PI })
            .collect();
        assert_relative_eq!(interference_visibility(&phases).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn test_visibility_of_uniform_phases_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phases: Vec<f64> = (0..10_000)
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        assert!(interference_visibility(&phases).unwrap() < 0.05);
    }

    #[test]
    fn test_visibility_needs_two_phases() {
        assert!(interference_visibility(&[0.3_f64]).is_err());
    }

    #[test]
    fn test_single_pulse_yields_one_phase() {
        let n = 501;
        let phi = 0.9_f64;
        let t = FieldTrace {
            time_ps: (0..n).map(|i| i as f64).collect(),
            field: (0..n)
                .map(|i| {
                    let amp = (-((i as f64 - 250.0) / 30.0).powi(2)).exp();
                    Complex::from_polar(amp, phi)
                })
                .collect(),
            side_modes: vec![],
            side_mode_wavelengths_nm: vec![],
            injected_wavelength_nm: 1550.0,
            carrier_per_m3: vec![1e24; n],
            rng_seed: 0,
        };
        let phases = pulse_phases(&t, 2.0);
        assert_eq!(phases.len(), 1);
        assert_relative_eq!(phases[0].unwrap(), phi, epsilon = 1e-9);
    }

    #[test]
    fn test_empty_pulse_window_is_marked_missing() {
        // Light only in the first of two windows.
        let n = 1001;
        let t = FieldTrace {
            time_ps: (0..n).map(|i| i as f64).collect(),
            field: (0..n)
                .map(|i| {
                    if i < 400 {
                        Complex::new(1.0, 0.0)
                    } else {
                        Complex::new(0.0, 0.0)
                    }
                })
                .collect(),
            side_modes: vec![],
            side_mode_wavelengths_nm: vec![],
            injected_wavelength_nm: 1550.0,
            carrier_per_m3: vec![1e24; n],
            rng_seed: 0,
        };
        let phases = pulse_phases(&t, 2.0);
        assert_eq!(phases.len(), 2);
        assert!(phases[0].is_some());
        assert!(phases[1].is_none());
    }

    #[test]
    fn test_circular_std_detects_scatter() {
        let tight = vec![0.50_f64, 0.52, 0.48, 0.51, 0.49];
        assert!(circular_std(&tight) < 0.1);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let wide: Vec<f64> = (0..2000)
            .map(|_| rng.gen::<f64>() * std::f64::consts::TAU)
            .collect();
        assert!(circular_std(&wide) > 1.0);
    }
}
