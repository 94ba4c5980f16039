//! Short calibration simulations that feed the analytic link model.
//!
//! One operating point (injection power, wavelength) maps to a transmitter
//! quality pair: pulse extinction ratio and interference visibility. The
//! visibility folds two effects, the energy share of the injected mode
//! (unlocked side modes interfere incoherently at the AMZI) and the
//! pulse-to-pulse phase coherence of the injected mode itself.

use super::ExperimentConfig;
use crate::error::Result;
use crate::float::Real;
use crate::laser::{
    extinction_ratio, pulse_phases, simulate_with, DriveSignal, FieldTrace, PulseHistogram,
    SimOptions,
};
use num_complex::Complex;

/// Histogram resolution for the extinction-ratio estimate.
const ER_BIN_PS: f64 = 5.0;
/// Histogram peak normalization, counts.
const ER_PEAK_COUNTS: u64 = 100_000;
/// Minimum visibility considered injection locked.
const LOCK_THRESHOLD: f64 = 0.5;

/// Transmitter quality extracted from one calibration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmitterMetrics<T> {
    pub injection_power_uw: T,
    pub wavelength_nm: T,
    /// Pulse extinction ratio, dB. A censored histogram floor reports the
    /// measurable lower bound.
    pub er_db: T,
    pub er_censored: bool,
    /// Combined mode-share and phase-coherence visibility in [0, 1].
    pub visibility: T,
    pub locked: bool,
}

/// Runs one gain-switched calibration simulation and extracts metrics.
///
/// The laser mode grid is re-centered so a mode sits exactly at
/// `wavelength_nm` (the paper's TEC adjustment onto the ITU grid), the
/// injection is detuning-free, and the first `settle_periods` drive periods
/// are discarded.
pub fn bridge_transmitter<T: Real>(
    config: &ExperimentConfig<T>,
    injection_power_uw: T,
    wavelength_nm: T,
) -> Result<TransmitterMetrics<T>> {
    let trace = bridge_trace(config, injection_power_uw, wavelength_nm, config.sim.bridge_periods)?;
    metrics_from_trace(&trace, config.drive.clock_ghz, injection_power_uw, wavelength_nm)
}

/// Runs the calibration simulation and returns the raw trace; used by the
/// CLI `simulate-laser` path with the longer `trace_periods` span.
pub fn bridge_trace<T: Real>(
    config: &ExperimentConfig<T>,
    injection_power_uw: T,
    wavelength_nm: T,
    recorded_periods: usize,
) -> Result<FieldTrace<T>> {
    config.validate()?;
    let laser = config.laser.centered_on(wavelength_nm);
    let mut injection = config.injection;
    injection.power_uw = injection_power_uw;
    injection.wavelength_nm = wavelength_nm;
    let drive = DriveSignal::gain_switch(
        config.drive.dc_bias_ma,
        config.drive.high_ma,
        config.drive.low_ma,
        config.drive.clock_ghz,
        config.drive.duty,
        config.drive.edge_ps,
        config.sim.settle_periods + recorded_periods,
        T::one(),
    );
    let options = SimOptions {
        dt_ps: config.sim.dt_ps,
        record_stride: config.sim.record_stride,
        settle_ps: T::from_usize(config.sim.settle_periods).unwrap() * config.drive.period_ps(),
    };
    simulate_with(&laser, &drive, &injection, config.seed, &options)
}

fn metrics_from_trace<T: Real>(
    trace: &FieldTrace<T>,
    clock_ghz: T,
    injection_power_uw: T,
    wavelength_nm: T,
) -> Result<TransmitterMetrics<T>> {
    let hist = PulseHistogram::from_trace(trace, T::of(ER_BIN_PS), ER_PEAK_COUNTS)?;
    let er = extinction_ratio(&hist)?;

    // Energy share of the injected mode against all side modes.
    let mut injected = T::zero();
    let mut total = T::zero();
    for i in 0..trace.len() {
        injected += trace.field[i].norm_sqr();
        total += trace.total_intensity(i);
    }
    let share = if total > T::zero() { injected / total } else { T::zero() };

    // Phase coherence of adjacent pulses of the injected mode.
    let phases = pulse_phases(trace, clock_ghz);
    let mut sum = Complex::new(T::zero(), T::zero());
    let mut pairs = 0usize;
    for w in phases.windows(2) {
        if let (Some(a), Some(b)) = (w[0], w[1]) {
            let d = a - b;
            sum += Complex::new(d.cos(), d.sin());
            pairs += 1;
        }
    }
    let coherence = if pairs > 0 {
        sum.norm() / T::from_usize(pairs).unwrap()
    } else {
        T::zero()
    };

    let visibility = (share * coherence).max(T::zero()).min(T::one());
    Ok(TransmitterMetrics {
        injection_power_uw,
        wavelength_nm,
        er_db: er.value(),
        er_censored: er.is_censored(),
        visibility,
        locked: visibility >= T::of(LOCK_THRESHOLD),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_config() -> ExperimentConfig<f64> {
        let mut config = ExperimentConfig::<f64>::default();
        config.laser.mode_count = 11;
        config.sim.settle_periods = 8;
        config.sim.bridge_periods = 12;
        config
    }

    #[test]
    fn test_bridge_deterministic() {
        let config = fast_config();
        let a = bridge_transmitter(&config, 80.0, 1550.116122026887).unwrap();
        let b = bridge_transmitter(&config, 80.0, 1550.116122026887).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn test_bridge_injection_raises_visibility() {
        let config = fast_config();
        let off = bridge_transmitter(&config, 0.0, 1550.116122026887).unwrap();
        let on = bridge_transmitter(&config, 80.0, 1550.116122026887).unwrap();
        assert!(on.visibility > off.visibility);
        assert!(!off.locked);
    }

    #[test]
    fn test_bridge_trace_has_expected_span() {
        let config = fast_config();
        let trace = bridge_trace(&config, 80.0, 1550.116122026887, 12).unwrap();
        let span = trace.time_ps[trace.len() - 1] - trace.time_ps[0];
        let period = config.drive.period_ps();
        assert!(span >= 11.0 * period && span <= 12.5 * period, "span {span}");
        assert_eq!(trace.side_modes.len(), config.laser.mode_count - 1);
    }
}
