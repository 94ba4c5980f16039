//! Time-bin/phase BB84 symbol generation with decoy intensities.
//!
//! Each symbol occupies two time bins. Z-basis symbols place all their energy
//! in the early (bit 0) or late (bit 1) bin; X-basis symbols split it equally
//! with a relative phase of 0 (bit 0) or π (bit 1) on the late bin. Every
//! symbol additionally carries one of `phase_randomization_levels` discrete
//! global phases on the pair, and one of three intensities (signal, decoy,
//! vacuum) for decoy-state estimation. Basis choice is biased toward Z so
//! most symbols contribute to key.

use crate::error::{Error, Result};
use crate::float::Real;
use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Measurement basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    Z,
    X,
}

impl Basis {
    /// Stable column label.
    pub fn label(self) -> &'static str {
        match self {
            Basis::Z => "Z",
            Basis::X => "X",
        }
    }
}

/// Pulse-pair intensity class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityClass {
    Signal,
    Decoy,
    Vacuum,
}

impl IntensityClass {
    /// All classes in tally order.
    pub const ALL: [IntensityClass; 3] =
        [IntensityClass::Signal, IntensityClass::Decoy, IntensityClass::Vacuum];

    /// Stable column label.
    pub fn label(self) -> &'static str {
        match self {
            IntensityClass::Signal => "signal",
            IntensityClass::Decoy => "decoy",
            IntensityClass::Vacuum => "vacuum",
        }
    }

    /// Index into per-class arrays.
    pub fn index(self) -> usize {
        match self {
            IntensityClass::Signal => 0,
            IntensityClass::Decoy => 1,
            IntensityClass::Vacuum => 2,
        }
    }
}

/// Protocol parameters.
///
/// `intensity_per_pulse = false` reads the class intensities as mean photon
/// numbers per symbol (pulse pair); `true` reads them as per occupied pulse,
/// so X symbols carry twice the energy of Z symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct ProtocolConfig<T> {
    pub symbol_rate_ghz: T,
    pub z_basis_probability: T,
    pub signal_intensity: T,
    pub decoy_intensity: T,
    pub vacuum_intensity: T,
    pub intensity_probabilities: [T; 3],
    pub phase_randomization_levels: u32,
    pub intensity_per_pulse: bool,
}

impl<T: Real> Default for ProtocolConfig<T> {
    fn default() -> Self {
        ProtocolConfig {
            symbol_rate_ghz: T::one(),
            z_basis_probability: T::of(0.9375),
            signal_intensity: T::of(0.4),
            decoy_intensity: T::of(0.1),
            vacuum_intensity: T::zero(),
            intensity_probabilities: [T::of(0.75), T::of(0.125), T::of(0.125)],
            phase_randomization_levels: 10,
            intensity_per_pulse: false,
        }
    }
}

impl<T: Real> ProtocolConfig<T> {
    /// Checks `0 <= vacuum < ν < μ`, probabilities in range and summing to 1,
    /// and at least two phase levels.
    pub fn validate(&self) -> Result<()> {
        if !(self.symbol_rate_ghz > T::zero()) {
            return Err(Error::config(
                "protocol.symbol_rate_ghz",
                format!("must be > 0, got {}", self.symbol_rate_ghz),
            ));
        }
        if !(self.signal_intensity > T::zero()) {
            return Err(Error::config(
                "protocol.signal_intensity",
                format!("must be > 0, got {}", self.signal_intensity),
            ));
        }
        if !(self.decoy_intensity > T::zero() && self.decoy_intensity < self.signal_intensity) {
            return Err(Error::config(
                "protocol.decoy_intensity",
                format!(
                    "requires 0 < nu < mu, got nu = {}, mu = {}",
                    self.decoy_intensity, self.signal_intensity
                ),
            ));
        }
        if !(self.vacuum_intensity >= T::zero() && self.vacuum_intensity < self.decoy_intensity) {
            return Err(Error::config(
                "protocol.vacuum_intensity",
                format!(
                    "requires 0 <= vacuum < nu, got vacuum = {}, nu = {}",
                    self.vacuum_intensity, self.decoy_intensity
                ),
            ));
        }
        if !(self.z_basis_probability > T::zero() && self.z_basis_probability < T::one()) {
            return Err(Error::config(
                "protocol.z_basis_probability",
                format!("must lie in (0, 1), got {}", self.z_basis_probability),
            ));
        }
        let sum: T = self.intensity_probabilities.iter().copied().sum();
        if (sum - T::one()).abs() > T::of(1e-9) {
            return Err(Error::config(
                "protocol.intensity_probabilities",
                format!("must sum to 1, got {sum}"),
            ));
        }
        for p in self.intensity_probabilities {
            if !(p > T::zero() && p < T::one()) {
                return Err(Error::config(
                    "protocol.intensity_probabilities",
                    format!("each probability must lie in (0, 1), got {p}"),
                ));
            }
        }
        if self.phase_randomization_levels < 2 {
            return Err(Error::config(
                "protocol.phase_randomization_levels",
                format!("must be >= 2, got {}", self.phase_randomization_levels),
            ));
        }
        Ok(())
    }

    /// Intensity of a class as configured (per pulse pair or per pulse).
    pub fn class_intensity(&self, class: IntensityClass) -> T {
        match class {
            IntensityClass::Signal => self.signal_intensity,
            IntensityClass::Decoy => self.decoy_intensity,
            IntensityClass::Vacuum => self.vacuum_intensity,
        }
    }

    /// Total mean photon number of a symbol of the given class and basis.
    pub fn symbol_intensity(&self, class: IntensityClass, basis: Basis) -> T {
        let base = self.class_intensity(class);
        if self.intensity_per_pulse && basis == Basis::X {
            base * T::of(2.0)
        } else {
            base
        }
    }

    /// Symbol period, ps.
    pub fn symbol_period_ps(&self) -> T {
        T::of(1000.0) / self.symbol_rate_ghz
    }
}

/// One transmitted symbol with its encoded pulse-pair amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol<T> {
    pub basis: Basis,
    pub bit: u8,
    pub intensity_class: IntensityClass,
    pub global_phase_index: u32,
    /// (early, late) coherent amplitudes; `|early|² + |late|²` equals the
    /// symbol intensity.
    pub bin_amplitudes: (Complex<T>, Complex<T>),
}

impl<T: Real> Symbol<T> {
    /// Total mean photon number of the pair.
    pub fn total_intensity(&self) -> T {
        self.bin_amplitudes.0.norm_sqr() + self.bin_amplitudes.1.norm_sqr()
    }

    /// Relative phase between late and early bin, rad (X symbols only).
    pub fn relative_phase(&self) -> T {
        if self.bit == 0 {
            T::zero()
        } else {
            T::PI()
        }
    }
}

/// Draws one symbol. The global phase `θ = 2πk/levels` anchors the early bin;
/// the late bin carries `θ + φ` with the relative phase `φ ∈ {0, π}` encoding
/// the X bit.
pub fn sample_symbol<T: Real, R: Rng + ?Sized>(rng: &mut R, config: &ProtocolConfig<T>) -> Symbol<T> {
    let basis = if T::unit_uniform(rng) < config.z_basis_probability {
        Basis::Z
    } else {
        Basis::X
    };
    let bit: u8 = if rng.gen::<bool>() { 1 } else { 0 };
    let u = T::unit_uniform(rng);
    let class = if u < config.intensity_probabilities[0] {
        IntensityClass::Signal
    } else if u < config.intensity_probabilities[0] + config.intensity_probabilities[1] {
        IntensityClass::Decoy
    } else {
        IntensityClass::Vacuum
    };
    let global_phase_index = rng.gen_range(0..config.phase_randomization_levels);
    build_symbol(config, basis, bit, class, global_phase_index)
}

/// Constructs the symbol deterministically from its discrete labels.
pub fn build_symbol<T: Real>(
    config: &ProtocolConfig<T>,
    basis: Basis,
    bit: u8,
    class: IntensityClass,
    global_phase_index: u32,
) -> Symbol<T> {
    let theta = T::TAU() * T::from_u32(global_phase_index).unwrap()
        / T::from_u32(config.phase_randomization_levels).unwrap();
    let intensity = config.symbol_intensity(class, basis);
    let zero = Complex::new(T::zero(), T::zero());
    let bin_amplitudes = match basis {
        Basis::Z => {
            let amp = Complex::from_polar(intensity.sqrt(), theta);
            if bit == 0 {
                (amp, zero)
            } else {
                (zero, amp)
            }
        }
        Basis::X => {
            let r = (intensity * T::of(0.5)).sqrt();
            let phi = if bit == 0 { T::zero() } else { T::PI() };
            (
                Complex::from_polar(r, theta),
                Complex::from_polar(r, theta + phi),
            )
        }
    };
    Symbol {
        basis,
        bit,
        intensity_class: class,
        global_phase_index,
        bin_amplitudes,
    }
}

/// Returns the coherent-state amplitudes of a symbol's pulse pair.
pub fn ideal_pulse_pair<T: Real>(symbol: &Symbol<T>) -> (Complex<T>, Complex<T>) {
    symbol.bin_amplitudes
}

/// Gain-switch and phase-modulator patterns, two bins per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ModulatorWaveforms<T> {
    /// Drive pulse present in this bin.
    pub gain_switch_pattern: Vec<bool>,
    /// Modulator phase per bin, rad, wrapped to [0, 2π).
    pub phase_pattern: Vec<T>,
}

/// Maps symbols to modulator waveforms: a drive pulse in each occupied bin,
/// the global phase on the first pulse of every pair, and the relative phase
/// added on the late bin of X symbols.
pub fn symbols_to_waveforms<T: Real>(symbols: &[Symbol<T>]) -> Result<ModulatorWaveforms<T>> {
    if symbols.is_empty() {
        return Err(Error::InsufficientData {
            required: 1,
            actual: 0,
        });
    }
    let mut gain_switch_pattern = Vec::with_capacity(symbols.len() * 2);
    let mut phase_pattern = Vec::with_capacity(symbols.len() * 2);
    let wrap = |p: T| p - (p / T::TAU()).floor() * T::TAU();
    for s in symbols {
        let (early, late) = s.bin_amplitudes;
        let occupied_early = early.norm_sqr() > T::zero();
        let occupied_late = late.norm_sqr() > T::zero();
        gain_switch_pattern.push(occupied_early);
        gain_switch_pattern.push(occupied_late);
        phase_pattern.push(if occupied_early { wrap(early.arg()) } else { T::zero() });
        phase_pattern.push(if occupied_late { wrap(late.arg()) } else { T::zero() });
    }
    Ok(ModulatorWaveforms {
        gain_switch_pattern,
        phase_pattern,
    })
}

/// Writes a symbol stream as CSV: `index, basis, bit, class, phase_index`.
pub fn write_symbols_csv<T: Real, W: Write>(symbols: &[Symbol<T>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "basis", "bit", "class", "phase_index"])?;
    for (i, s) in symbols.iter().enumerate() {
        w.write_record([
            i.to_string(),
            s.basis.label().to_string(),
            s.bit.to_string(),
            s.intensity_class.label().to_string(),
            s.global_phase_index.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn test_default_config_validates() {
        ProtocolConfig::<f64>::default().validate().unwrap();
    }

    #[test]
    fn test_decoy_must_be_below_signal() {
        let mut c = ProtocolConfig::<f64>::default();
        c.decoy_intensity = 0.4;
        assert!(c.validate().is_err());
        c.decoy_intensity = 0.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn test_probabilities_must_sum_to_one() {
        let mut c = ProtocolConfig::<f64>::default();
        c.intensity_probabilities = [0.7, 0.2, 0.2];
        assert!(c.validate().is_err());
    }

    #[test]
    fn test_z_fraction_matches_bias() {
        let config = ProtocolConfig::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 1_000_000;
        let z = (0..n)
            .filter(|_| sample_symbol(&mut rng, &config).basis == Basis::Z)
            .count() as f64;
        let p = 0.9375;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (z - n as f64 * p).abs() < 3.0 * sigma,
            "z count {z} vs expectation {}",
            n as f64 * p
        );
    }

    #[test]
    fn test_z_symbol_amplitudes() {
        let config = ProtocolConfig::<f64>::default();
        let s0 = build_symbol(&config, Basis::Z, 0, IntensityClass::Signal, 3);
        let theta = 2.0 * std::f64::consts::PI * 0.3;
        assert_relative_eq!(s0.bin_amplitudes.0.norm(), 0.4_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(s0.bin_amplitudes.0.arg(), theta, epsilon = 1e-12);
        assert_eq!(s0.bin_amplitudes.1, Complex::new(0.0, 0.0));
        let s1 = build_symbol(&config, Basis::Z, 1, IntensityClass::Signal, 0);
        assert_eq!(s1.bin_amplitudes.0, Complex::new(0.0, 0.0));
        assert_relative_eq!(s1.bin_amplitudes.1.norm(), 0.4_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn test_phase_index_distribution_uniform() {
        // χ² over 10 cells at p = 0.001 rejects above 27.88.
        let config = ProtocolConfig::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 100_000;
        let mut counts = [0u64; 10];
        for _ in 0..n {
            counts[sample_symbol(&mut rng, &config).global_phase_index as usize] += 1;
        }
        let expected = n as f64 / 10.0;
        let chi2: f64 = counts
            .iter()
            .map(|c| (*c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 27.88, "chi2 = {chi2}");
    }

    #[test]
    fn test_normalization_exact_per_pair() {
        let config = ProtocolConfig::<f64>::default();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..2000 {
            let s = sample_symbol(&mut rng, &config);
            let want = config.class_intensity(s.intensity_class);
            assert_relative_eq!(s.total_intensity(), want, epsilon = 1e-12);
        }
    }

    #[test]
    fn test_per_pulse_semantics_double_x_energy() {
        let mut config = ProtocolConfig::<f64>::default();
        config.intensity_per_pulse = true;
        let z = build_symbol(&config, Basis::Z, 0, IntensityClass::Signal, 0);
        let x = build_symbol(&config, Basis::X, 0, IntensityClass::Signal, 0);
        assert_relative_eq!(z.total_intensity(), 0.4, epsilon = 1e-12);
        assert_relative_eq!(x.total_intensity(), 0.8, epsilon = 1e-12);
    }

    #[test]
    fn test_x_bits_differ_only_by_pi() {
        let config = ProtocolConfig::<f64>::default();
        let x0 = build_symbol(&config, Basis::X, 0, IntensityClass::Decoy, 7);
        let x1 = build_symbol(&config, Basis::X, 1, IntensityClass::Decoy, 7);
        assert_relative_eq!(
            x0.bin_amplitudes.0.norm(),
            x0.bin_amplitudes.1.norm(),
            epsilon = 1e-12
        );
        assert_eq!(x0.bin_amplitudes.0, x1.bin_amplitudes.0);
        let d0 = (x0.bin_amplitudes.1 / x0.bin_amplitudes.0).arg();
        let d1 = (x1.bin_amplitudes.1 / x1.bin_amplitudes.0).arg();
        assert_relative_eq!(d0, 0.0, epsilon = 1e-12);
        assert_relative_eq!(d1.abs(), std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn test_vacuum_pair_is_dark() {
        let config = ProtocolConfig::<f64>::default();
        let s = build_symbol(&config, Basis::X, 1, IntensityClass::Vacuum, 2);
        let (e, l) = ideal_pulse_pair(&s);
        assert_eq!(e, Complex::new(0.0, 0.0));
        assert_eq!(l, Complex::new(0.0, 0.0));
    }

    #[test]
    fn test_x_signal_bins_carry_half_intensity_each() {
        let config = ProtocolConfig::<f64>::default();
        let s = build_symbol(&config, Basis::X, 0, IntensityClass::Signal, 0);
        let (e, l) = ideal_pulse_pair(&s);
        assert_relative_eq!(e.norm_sqr(), 0.2, epsilon = 1e-12);
        assert_relative_eq!(l.norm_sqr(), 0.2, epsilon = 1e-12);
    }

    #[test]
    fn test_z_decoy_bit_one_amplitude() {
        let config = ProtocolConfig::<f64>::default();
        let s = build_symbol(&config, Basis::Z, 1, IntensityClass::Decoy, 0);
        let (e, l) = ideal_pulse_pair(&s);
        assert_eq!(e, Complex::new(0.0, 0.0));
        assert_relative_eq!(l.norm(), 0.1_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn test_waveforms_x_symbol_pi() {
        let config = ProtocolConfig::<f64>::default();
        let s = build_symbol(&config, Basis::X, 1, IntensityClass::Signal, 0);
        let w = symbols_to_waveforms(&[s]).unwrap();
        assert_eq!(w.gain_switch_pattern, vec![true, true]);
        assert_relative_eq!(w.phase_pattern[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(w.phase_pattern[1], std::f64::consts::PI, epsilon = 1e-12);
    }

    #[test]
    fn test_waveforms_z_bit_zero() {
        let config = ProtocolConfig::<f64>::default();
        let s = build_symbol(&config, Basis::Z, 0, IntensityClass::Signal, 0);
        let w = symbols_to_waveforms(&[s]).unwrap();
        assert_eq!(w.gain_switch_pattern, vec![true, false]);
    }

    #[test]
    fn test_waveforms_first_bin_carries_global_phase() {
        let config = ProtocolConfig::<f64>::default();
        let a = build_symbol(&config, Basis::X, 0, IntensityClass::Signal, 3);
        let b = build_symbol(&config, Basis::X, 0, IntensityClass::Signal, 7);
        let w = symbols_to_waveforms(&[a, b]).unwrap();
        assert_relative_eq!(
            w.phase_pattern[0],
            2.0 * std::f64::consts::PI * 0.3,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            w.phase_pattern[2],
            2.0 * std::f64::consts::PI * 0.7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn test_waveforms_reject_empty_input() {
        assert!(symbols_to_waveforms::<f64>(&[]).is_err());
    }

    #[test]
    fn test_sampling_deterministic_per_seed() {
        let config = ProtocolConfig::<f64>::default();
        let mut a = ChaCha8Rng::seed_from_u64(33);
        let mut b = ChaCha8Rng::seed_from_u64(33);
        for _ in 0..100 {
            assert_eq!(sample_symbol(&mut a, &config), sample_symbol(&mut b, &config));
        }
    }

    #[test]
    fn test_symbols_csv_shape() {
        let config = ProtocolConfig::<f64>::default();
        let symbols = vec![
            build_symbol(&config, Basis::Z, 0, IntensityClass::Signal, 2),
            build_symbol(&config, Basis::X, 1, IntensityClass::Vacuum, 9),
        ];
        let mut buf = Vec::new();
        write_symbols_csv(&symbols, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "index,basis,bit,class,phase_index");
        assert_eq!(lines.next().unwrap(), "0,Z,0,signal,2");
        assert_eq!(lines.next().unwrap(), "1,X,1,vacuum,9");
    }
}
