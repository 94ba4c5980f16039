//! Injection-locked multimode laser model.
//!
//! A Fabry-Perot laser is described by a complex field for the externally
//! injected mode, photon numbers for the remaining longitudinal modes, and a
//! shared carrier density. Gain switching the drive current through threshold
//! produces short optical pulses; external injection pins their optical phase
//! and suppresses the side modes. [`simulate`] integrates the rate equations,
//! and the metric functions in this module reduce traces to the quantities a
//! transmitter characterization needs: extinction ratio, pulse width, side
//! mode suppression, pulse phases, interference visibility, and the optical
//! spectrum.

mod fit;
mod metrics;
mod sim;
mod spectrum;

pub use fit::{fit_gaussian_fwhm, GaussianFit};
pub use metrics::{
    circular_mean, circular_std, extinction_ratio, interference_visibility,
    mode_suppression_ratio, pulse_energies, pulse_phases, DbRatio,
};
pub use sim::{simulate, simulate_with, SimOptions};
pub use spectrum::{optical_spectrum, OpticalSpectrum};

use crate::error::{Error, Result};
use crate::float::Real;
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Physical constants of the Fabry-Perot laser and its injection model.
///
/// Units are carried in the field names. `mode_count` longitudinal modes sit
/// on a regular grid of `mode_spacing_nm` centered on `center_wavelength_nm`
/// plus `grid_offset_nm`; modal gain follows a Gaussian envelope of width
/// `gain_envelope_width_nm` around the center. `grid_offset_nm` models TEC
/// fine tuning of the mode positions (`temperature_tuning_coeff_nm_per_k`
/// converts it to a temperature change).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct LaserParams<T> {
    pub elementary_charge_c: T,
    pub confinement: T,
    pub group_velocity_m_per_s: T,
    pub differential_gain_m2: T,
    pub active_volume_m3: T,
    pub threshold_current_ma: T,
    pub carrier_lifetime_ns: T,
    pub photon_lifetime_ps: T,
    pub linewidth_enhancement: T,
    pub spont_emission_fraction: T,
    pub gain_compression: T,
    pub transparency_carrier_density_per_m3: T,
    pub mode_count: usize,
    pub mode_spacing_nm: T,
    pub center_wavelength_nm: T,
    pub gain_envelope_width_nm: T,
    pub temperature_tuning_coeff_nm_per_k: T,
    pub grid_offset_nm: T,
}

impl<T: Real> Default for LaserParams<T> {
    fn default() -> Self {
        LaserParams {
            elementary_charge_c: T::of(1.602_176_634e-19),
            confinement: T::of(0.3),
            group_velocity_m_per_s: T::of(7.5e7),
            differential_gain_m2: T::of(6.0e-20),
            active_volume_m3: T::of(2.0e-17),
            threshold_current_ma: T::of(11.778),
            carrier_lifetime_ns: T::of(0.44),
            photon_lifetime_ps: T::of(1.2),
            linewidth_enhancement: T::of(4.0),
            spont_emission_fraction: T::of(5.25e-6),
            gain_compression: T::of(2.0e-7),
            transparency_carrier_density_per_m3: T::of(1.0e24),
            mode_count: 81,
            mode_spacing_nm: T::of(1.25),
            center_wavelength_nm: T::of(1550.0),
            gain_envelope_width_nm: T::of(80.0),
            temperature_tuning_coeff_nm_per_k: T::of(0.1),
            grid_offset_nm: T::zero(),
        }
    }
}

impl<T: Real> LaserParams<T> {
    /// Checks all invariants: positive lifetimes, volumes, and gains,
    /// `mode_count >= 3` and odd, positive mode spacing and threshold.
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, T); 10] = [
            ("laser.elementary_charge_c", self.elementary_charge_c),
            ("laser.confinement", self.confinement),
            ("laser.group_velocity_m_per_s", self.group_velocity_m_per_s),
            ("laser.differential_gain_m2", self.differential_gain_m2),
            ("laser.active_volume_m3", self.active_volume_m3),
            ("laser.threshold_current_ma", self.threshold_current_ma),
            ("laser.carrier_lifetime_ns", self.carrier_lifetime_ns),
            ("laser.photon_lifetime_ps", self.photon_lifetime_ps),
            ("laser.mode_spacing_nm", self.mode_spacing_nm),
            ("laser.gain_envelope_width_nm", self.gain_envelope_width_nm),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be > 0, got {v}")));
            }
        }
        if self.mode_count < 3 || self.mode_count % 2 == 0 {
            return Err(Error::invalid(
                "laser.mode_count",
                format!("must be odd and >= 3, got {}", self.mode_count),
            ));
        }
        for (name, v) in [
            ("laser.spont_emission_fraction", self.spont_emission_fraction),
            ("laser.gain_compression", self.gain_compression),
            (
                "laser.transparency_carrier_density_per_m3",
                self.transparency_carrier_density_per_m3,
            ),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Wavelengths of all longitudinal modes, ascending, including the grid offset.
    pub fn mode_wavelengths_nm(&self) -> Vec<T> {
        let half = (self.mode_count as i64 - 1) / 2;
        (0..self.mode_count)
            .map(|i| {
                self.center_wavelength_nm
                    + self.grid_offset_nm
                    + T::from_i64(i as i64 - half).unwrap() * self.mode_spacing_nm
            })
            .collect()
    }

    /// Gaussian gain envelope at a wavelength, normalized to 1 at the center.
    pub fn gain_envelope(&self, wavelength_nm: T) -> T {
        let d = wavelength_nm - self.center_wavelength_nm;
        let w = self.gain_envelope_width_nm;
        (-d * d / (T::of(2.0) * w * w)).exp()
    }

    /// Index of the longitudinal mode closest to a wavelength.
    pub fn nearest_mode_index(&self, wavelength_nm: T) -> usize {
        let modes = self.mode_wavelengths_nm();
        let mut best = 0;
        let mut best_d = T::infinity();
        for (i, m) in modes.iter().enumerate() {
            let d = (*m - wavelength_nm).abs();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    /// Copy with `grid_offset_nm` chosen so the nearest mode sits exactly on
    /// the given wavelength (TEC fine tuning).
    pub fn centered_on(&self, wavelength_nm: T) -> Self {
        let mut base = self.clone();
        base.grid_offset_nm = T::zero();
        let idx = base.nearest_mode_index(wavelength_nm);
        let natural = base.mode_wavelengths_nm()[idx];
        let mut out = self.clone();
        out.grid_offset_nm = wavelength_nm - natural;
        out
    }

    /// Carrier density at which modal gain at the envelope center balances
    /// cavity loss, per m³.
    pub fn threshold_carrier_density(&self) -> T {
        let g = self.confinement * self.group_velocity_m_per_s * self.differential_gain_m2;
        self.transparency_carrier_density_per_m3
            + (T::of(1e12) / (g * self.photon_lifetime_ps))
    }

    /// Steady-state threshold current implied by the rate-equation constants, mA.
    pub fn steady_threshold_ma(&self) -> T {
        let n_th = self.threshold_carrier_density();
        self.elementary_charge_c * self.active_volume_m3 * n_th
            / (self.carrier_lifetime_ns * T::of(1e-9))
            * T::of(1e3)
    }
}

/// External optical injection into one longitudinal mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct InjectionParams<T> {
    pub power_uw: T,
    pub wavelength_nm: T,
    pub coupling_rate_per_ns: T,
    pub phase_rad: T,
}

impl<T: Real> Default for InjectionParams<T> {
    fn default() -> Self {
        InjectionParams {
            power_uw: T::of(80.0),
            wavelength_nm: T::of(1550.12),
            coupling_rate_per_ns: T::of(130.0),
            phase_rad: T::zero(),
        }
    }
}

impl<T: Real> InjectionParams<T> {
    /// Checks `power_uw >= 0` and wavelength within the tunable seed range.
    pub fn validate(&self) -> Result<()> {
        if !(self.power_uw >= T::zero()) || !self.power_uw.is_finite() {
            return Err(Error::invalid(
                "injection.power_uw",
                format!("must be >= 0, got {}", self.power_uw),
            ));
        }
        let (lo, hi) = (T::of(1500.0), T::of(1600.0));
        if !(self.wavelength_nm >= lo && self.wavelength_nm <= hi) {
            return Err(Error::invalid(
                "injection.wavelength_nm",
                format!("must lie in [1500, 1600] nm, got {}", self.wavelength_nm),
            ));
        }
        if !(self.coupling_rate_per_ns > T::zero()) {
            return Err(Error::invalid(
                "injection.coupling_rate_per_ns",
                format!("must be > 0, got {}", self.coupling_rate_per_ns),
            ));
        }
        Ok(())
    }
}

/// Drive-current waveform: a dc bias plus a sampled offset pattern.
///
/// The instantaneous current is `dc_bias_ma + samples_ma[t]`, linearly
/// interpolated between samples and clamped to the last sample beyond the end.
/// The pattern length defines the simulated duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSignal<T> {
    pub dc_bias_ma: T,
    pub samples_ma: Vec<T>,
    pub sample_interval_ps: T,
    pub pattern_description: String,
}

impl<T: Real> DriveSignal<T> {
    /// Constant bias for a given duration.
    pub fn constant(dc_bias_ma: T, duration_ps: T, sample_interval_ps: T) -> Self {
        let n = (duration_ps / sample_interval_ps).ceil().as_f64() as usize + 1;
        DriveSignal {
            dc_bias_ma,
            samples_ma: vec![T::zero(); n],
            sample_interval_ps,
            pattern_description: format!("constant {dc_bias_ma} mA"),
        }
    }

    /// Periodic gain-switching pattern: `periods` square pulses between
    /// `low_ma` and `high_ma` at `clock_ghz`, on for `duty` of each period,
    /// with raised-cosine edges of width `edge_ps`.
    #[allow(clippy::too_many_arguments)]
    pub fn gain_switch(
        dc_bias_ma: T,
        high_ma: T,
        low_ma: T,
        clock_ghz: T,
        duty: T,
        edge_ps: T,
        periods: usize,
        sample_interval_ps: T,
    ) -> Self {
        let period = T::of(1000.0) / clock_ghz;
        let on = duty * period;
        let total = period * T::from_usize(periods).unwrap();
        let n = (total / sample_interval_ps).ceil().as_f64() as usize + 1;
        let half = T::of(0.5);
        let samples = (0..n)
            .map(|i| {
                let t = T::from_usize(i).unwrap() * sample_interval_ps;
                let tau = t - (t / period).floor() * period;
                let g = if tau < edge_ps {
                    half * (T::one() - (T::PI() * tau / edge_ps).cos())
                } else if tau < on {
                    T::one()
                } else if tau < on + edge_ps {
                    half * (T::one() + (T::PI() * (tau - on) / edge_ps).cos())
                } else {
                    T::zero()
                };
                low_ma + (high_ma - low_ma) * g - dc_bias_ma
            })
            .collect();
        DriveSignal {
            dc_bias_ma,
            samples_ma: samples,
            sample_interval_ps,
            pattern_description: format!(
                "gain switch {low_ma}-{high_ma} mA at {clock_ghz} GHz, duty {duty}"
            ),
        }
    }

    /// Checks `sample_interval_ps > 0` and all instantaneous currents `>= 0`.
    pub fn validate(&self) -> Result<()> {
        if !(self.sample_interval_ps > T::zero()) {
            return Err(Error::invalid(
                "drive.sample_interval_ps",
                format!("must be > 0, got {}", self.sample_interval_ps),
            ));
        }
        if self.samples_ma.is_empty() {
            return Err(Error::invalid("drive.samples_ma", "must be nonempty"));
        }
        for (i, s) in self.samples_ma.iter().enumerate() {
            let current = self.dc_bias_ma + *s;
            if !(current >= T::zero()) || !current.is_finite() {
                return Err(Error::invalid(
                    "drive.samples_ma",
                    format!("current at sample {i} is {current} mA; must be >= 0"),
                ));
            }
        }
        Ok(())
    }

    /// Total duration covered by the pattern, ps.
    pub fn duration_ps(&self) -> T {
        T::from_usize(self.samples_ma.len() - 1).unwrap() * self.sample_interval_ps
    }

    /// Instantaneous current at a time, mA.
    pub fn current_at(&self, t_ps: T) -> T {
        let x = (t_ps / self.sample_interval_ps).max(T::zero());
        let i0 = x.floor().as_f64() as usize;
        if i0 + 1 >= self.samples_ma.len() {
            return self.dc_bias_ma + *self.samples_ma.last().unwrap();
        }
        let frac = x - x.floor();
        let a = self.samples_ma[i0];
        let b = self.samples_ma[i0 + 1];
        self.dc_bias_ma + a + (b - a) * frac
    }
}

/// Time-sampled result of one simulation run.
///
/// `field` holds the complex amplitude of the injected mode in the rotating
/// frame of the injection, photon-number normalized (`|field|²` is a photon
/// number). `side_modes[m]` holds the photon-number series of the m-th
/// non-injected mode, in ascending wavelength order. All series share
/// `time_ps`.
#[derive(Debug, Clone)]
pub struct FieldTrace<T> {
    pub time_ps: Vec<T>,
    pub field: Vec<Complex<T>>,
    pub side_modes: Vec<Vec<T>>,
    pub side_mode_wavelengths_nm: Vec<T>,
    pub injected_wavelength_nm: T,
    pub carrier_per_m3: Vec<T>,
    pub rng_seed: u64,
}

impl<T: Real> FieldTrace<T> {
    /// Number of recorded samples.
    pub fn len(&self) -> usize {
        self.time_ps.len()
    }

    /// True when nothing was recorded.
    pub fn is_empty(&self) -> bool {
        self.time_ps.is_empty()
    }

    /// Recorded sample spacing, ps.
    pub fn dt_ps(&self) -> T {
        if self.time_ps.len() < 2 {
            T::zero()
        } else {
            self.time_ps[1] - self.time_ps[0]
        }
    }

    /// Injected-mode photon number at a sample.
    pub fn injected_intensity(&self, i: usize) -> T {
        self.field[i].norm_sqr()
    }

    /// Total photon number over all modes at a sample.
    pub fn total_intensity(&self, i: usize) -> T {
        let side: T = self.side_modes.iter().map(|s| s[i]).sum();
        self.field[i].norm_sqr() + side
    }

    /// Writes the trace as CSV: `time_ps, re_E, im_E, S_m0.., N`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time_ps".to_string(), "re_E".to_string(), "im_E".to_string()];
        for m in 0..self.side_modes.len() {
            header.push(format!("S_m{m}"));
        }
        header.push("N".to_string());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![
                format!("{}", self.time_ps[i]),
                format!("{}", self.field[i].re),
                format!("{}", self.field[i].im),
            ];
            for s in &self.side_modes {
                rec.push(format!("{}", s[i]));
            }
            rec.push(format!("{}", self.carrier_per_m3[i]));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Histogram of detection events over time bins.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseHistogram<T> {
    pub bin_edges_ps: Vec<T>,
    pub counts: Vec<u64>,
}

impl<T: Real> PulseHistogram<T> {
    /// Builds a histogram from explicit edges and counts, checking that the
    /// edges are strictly increasing and bracket the counts.
    pub fn new(bin_edges_ps: Vec<T>, counts: Vec<u64>) -> Result<Self> {
        if bin_edges_ps.len() != counts.len() + 1 {
            return Err(Error::invalid(
                "histogram.bin_edges_ps",
                format!(
                    "{} edges cannot bracket {} counts",
                    bin_edges_ps.len(),
                    counts.len()
                ),
            ));
        }
        if bin_edges_ps.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "histogram.bin_edges_ps",
                "edges must be strictly increasing",
            ));
        }
        Ok(PulseHistogram { bin_edges_ps, counts })
    }

    /// Histograms the total optical intensity of a trace into bins of
    /// `bin_width_ps`, scaled so the brightest bin holds `target_peak`
    /// counts. Mirrors single-photon counting with fixed total statistics.
    pub fn from_trace(trace: &FieldTrace<T>, bin_width_ps: T, target_peak: u64) -> Result<Self> {
        if trace.len() < 2 {
            return Err(Error::InsufficientData {
                required: 2,
                actual: trace.len(),
            });
        }
        let t0 = trace.time_ps[0];
        let span = trace.time_ps[trace.len() - 1] - t0;
        let n_bins = (span / bin_width_ps).floor().as_f64() as usize;
        if n_bins == 0 {
            return Err(Error::invalid(
                "histogram.bin_width_ps",
                "wider than the trace",
            ));
        }
        let mut acc = vec![T::zero(); n_bins];
        for i in 0..trace.len() {
            let b = ((trace.time_ps[i] - t0) / bin_width_ps).floor().as_f64() as usize;
            if b < n_bins {
                acc[b] += trace.total_intensity(i);
            }
        }
        let peak = acc.iter().cloned().fold(T::zero(), T::max);
        if !(peak > T::zero()) {
            return Err(Error::invalid("histogram", "trace carries no light"));
        }
        let scale = T::from_u64(target_peak).unwrap() / peak;
        let counts = acc
            .iter()
            .map(|a| (*a * scale).round().as_f64() as u64)
            .collect();
        let edges = (0..=n_bins)
            .map(|i| t0 + T::from_usize(i).unwrap() * bin_width_ps)
            .collect();
        PulseHistogram::new(edges, counts)
    }
}

/// Direct-modulation bandwidth implied by a bias current, GHz.
///
/// Evaluates `sqrt((3 / (4π² q)) · (Γ v_g σ_g / V) · (I_b − I_th))` and
/// converts to GHz. Zero at threshold, with the square linear in the
/// overdrive; biasing below threshold is an error.
pub fn modulation_bandwidth<T: Real>(params: &LaserParams<T>, bias_ma: T) -> Result<T> {
    if bias_ma < params.threshold_current_ma {
        return Err(Error::BelowThreshold {
            bias_ma: bias_ma.as_f64(),
            threshold_ma: params.threshold_current_ma.as_f64(),
        });
    }
    let four_pi_sq = T::of(4.0) * T::PI() * T::PI();
    let prefactor = T::of(3.0) / (four_pi_sq * params.elementary_charge_c);
    let gain_term = params.confinement * params.group_velocity_m_per_s
        * params.differential_gain_m2
        / params.active_volume_m3;
    let overdrive_a = (bias_ma - params.threshold_current_ma) * T::of(1e-3);
    Ok((prefactor * gain_term * overdrive_a).sqrt() * T::of(1e-9))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn test_default_params_validate() {
        LaserParams::<f64>::default().validate().unwrap();
        InjectionParams::<f64>::default().validate().unwrap();
    }

    #[test]
    fn test_validation_rejects_even_mode_count() {
        let mut p = LaserParams::<f64>::default();
        p.mode_count = 80;
        assert!(p.validate().is_err());
    }

    #[test]
    fn test_validation_rejects_nonpositive_lifetime() {
        let mut p = LaserParams::<f64>::default();
        p.photon_lifetime_ps = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn test_injection_wavelength_range_enforced() {
        let mut inj = InjectionParams::<f64>::default();
        inj.wavelength_nm = 1499.0;
        assert!(inj.validate().is_err());
        inj.wavelength_nm = 1600.0;
        assert!(inj.validate().is_ok());
    }

    #[test]
    fn test_mode_grid_is_symmetric_and_spaced() {
        let p = LaserParams::<f64>::default();
        let modes = p.mode_wavelengths_nm();
        assert_eq!(modes.len(), 81);
        assert_relative_eq!(modes[40], 1550.0, epsilon = 1e-12);
        assert_relative_eq!(modes[41] - modes[40], 1.25, epsilon = 1e-12);
        assert_relative_eq!(modes[80] - modes[0], 100.0, epsilon = 1e-9);
    }

    #[test]
    fn test_centered_on_puts_a_mode_exactly_at_target() {
        let p = LaserParams::<f64>::default();
        let target = 1550.12;
        let c = p.centered_on(target);
        let idx = c.nearest_mode_index(target);
        assert_relative_eq!(c.mode_wavelengths_nm()[idx], target, epsilon = 1e-12);
        assert!(c.grid_offset_nm.abs() <= p.mode_spacing_nm / 2.0);
    }

    #[test]
    fn test_steady_threshold_matches_field_value() {
        let p = LaserParams::<f64>::default();
        let implied = p.steady_threshold_ma();
        assert!(
            (implied - p.threshold_current_ma).abs() / p.threshold_current_ma < 0.05,
            "implied {implied} mA vs field {} mA",
            p.threshold_current_ma
        );
    }

    #[test]
    fn test_modulation_bandwidth_zero_at_threshold() {
        let p = LaserParams::<f64>::default();
        let f = modulation_bandwidth(&p, p.threshold_current_ma).unwrap();
        assert_eq!(f, 0.0);
    }

    #[test]
    fn test_modulation_bandwidth_square_linear_in_overdrive() {
        let p = LaserParams::<f64>::default();
        let f1 = modulation_bandwidth(&p, p.threshold_current_ma + 0.4).unwrap();
        let f2 = modulation_bandwidth(&p, p.threshold_current_ma + 0.8).unwrap();
        assert_relative_eq!(f2 * f2, 2.0 * f1 * f1, max_relative = 1e-12);
    }

    #[test]
    fn test_modulation_bandwidth_below_threshold_is_error() {
        let p = LaserParams::<f64>::default();
        assert!(matches!(
            modulation_bandwidth(&p, 11.7),
            Err(Error::BelowThreshold { .. })
        ));
    }

    #[test]
    fn test_modulation_bandwidth_golden_value_at_defaults() {
        // Frozen by independent hand evaluation of the formula at the
        // documented defaults with I_b = 14.8 mA.
        let p = LaserParams::<f64>::default();
        let f = modulation_bandwidth(&p, 14.8).unwrap();
        assert_relative_eq!(f, 9.836_139_479_745_063, max_relative = 1e-9);
    }

    #[test]
    fn test_drive_constant_lookup_and_duration() {
        let d = DriveSignal::constant(14.8_f64, 1000.0, 1.0);
        d.validate().unwrap();
        assert!(d.duration_ps() >= 1000.0);
        assert_eq!(d.current_at(0.0), 14.8);
        assert_eq!(d.current_at(999.5), 14.8);
        assert_eq!(d.current_at(5000.0), 14.8);
    }

    #[test]
    fn test_drive_gain_switch_swings_between_levels() {
        let d = DriveSignal::gain_switch(14.8_f64, 30.0, 6.0, 2.0, 0.35, 25.0, 4, 0.5);
        d.validate().unwrap();
        let period = 500.0;
        let mid_on = 0.35 * period / 2.0;
        assert_relative_eq!(d.current_at(mid_on), 30.0, epsilon = 1e-9);
        assert_relative_eq!(d.current_at(period * 0.8), 6.0, epsilon = 1e-9);
        assert_relative_eq!(d.current_at(period + mid_on), 30.0, epsilon = 1e-9);
    }

    #[test]
    fn test_drive_rejects_negative_current() {
        let d = DriveSignal::gain_switch(14.8_f64, 30.0, -1.0, 2.0, 0.35, 25.0, 2, 0.5);
        assert!(d.validate().is_err());
    }

    #[test]
    fn test_histogram_rejects_bad_edges() {
        assert!(PulseHistogram::new(vec![0.0_f64, 1.0, 1.0], vec![1, 2]).is_err());
        assert!(PulseHistogram::new(vec![0.0_f64, 1.0], vec![1, 2]).is_err());
    }
}
