//! Attenuation channel, passive receiver, and threshold detectors.
//!
//! The receiver splits incoming light at a beamsplitter: a fraction
//! `bs_z_fraction` goes to direct time-bin detection on D1, the rest through
//! an asymmetric Mach-Zehnder interferometer whose delay equals half the
//! symbol period, interfering the pulse pair onto D2/D3. Detectors are
//! threshold devices with Poissonian click statistics, dark counts per gate,
//! and dead time. The same link algebra backs an analytic expected-rate path
//! and a per-symbol Monte Carlo path; the two agree to sampling error by
//! construction.
//!
//! Double clicks within one symbol score as errors downstream (the
//! conservative squashing convention); the analytic error terms include the
//! same double-click contribution.

use crate::error::{Error, Result};
use crate::float::Real;
use crate::protocol::{Basis, IntensityClass, ProtocolConfig, Symbol};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Fiber-equivalent channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct ChannelParams<T> {
    pub attenuation_db: T,
}

impl<T: Real> Default for ChannelParams<T> {
    fn default() -> Self {
        ChannelParams {
            attenuation_db: T::of(11.5),
        }
    }
}

impl<T: Real> ChannelParams<T> {
    /// Rejects negative attenuation.
    pub fn validate(&self) -> Result<()> {
        if !(self.attenuation_db >= T::zero()) || !self.attenuation_db.is_finite() {
            return Err(Error::invalid(
                "channel.attenuation_db",
                format!("must be >= 0, got {}", self.attenuation_db),
            ));
        }
        Ok(())
    }
}

/// Receiver optics and detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct ReceiverParams<T> {
    pub bs_z_fraction: T,
    pub amzi_visibility: T,
    pub amzi_insertion_loss_db: T,
    pub receiver_insertion_loss_db: T,
    pub detector_efficiency: T,
    pub dark_count_rate_hz: T,
    pub gate_window_ps: T,
    pub dead_time_ns: T,
}

impl<T: Real> Default for ReceiverParams<T> {
    fn default() -> Self {
        ReceiverParams {
            bs_z_fraction: T::of(0.5),
            amzi_visibility: T::of(0.99),
            amzi_insertion_loss_db: T::of(2.0),
            receiver_insertion_loss_db: T::of(1.0),
            detector_efficiency: T::of(0.33),
            dark_count_rate_hz: T::one(),
            gate_window_ps: T::of(500.0),
            dead_time_ns: T::of(20.0),
        }
    }
}

impl<T: Real> ReceiverParams<T> {
    /// Checks all fractions lie in range and losses are nonnegative.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("receiver.bs_z_fraction", self.bs_z_fraction),
            ("receiver.amzi_visibility", self.amzi_visibility),
            ("receiver.detector_efficiency", self.detector_efficiency),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
            }
        }
        for (name, v) in [
            ("receiver.amzi_insertion_loss_db", self.amzi_insertion_loss_db),
            ("receiver.receiver_insertion_loss_db", self.receiver_insertion_loss_db),
            ("receiver.dark_count_rate_hz", self.dark_count_rate_hz),
            ("receiver.gate_window_ps", self.gate_window_ps),
            ("receiver.dead_time_ns", self.dead_time_ns),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Dark-click probability within one gate window.
    pub fn dark_prob_per_gate(&self) -> T {
        self.dark_count_rate_hz * self.gate_window_ps * T::of(1e-12)
    }
}

/// Transmitter imperfections carried into the link model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkExtras<T> {
    /// Pulse extinction ratio, dB; `T::infinity()` for an ideal source.
    pub transmitter_er_db: T,
    /// Pulse-to-pulse interference visibility in [0, 1].
    pub transmitter_visibility: T,
}

impl<T: Real> Default for LinkExtras<T> {
    fn default() -> Self {
        LinkExtras {
            transmitter_er_db: T::infinity(),
            transmitter_visibility: T::one(),
        }
    }
}

/// Receiving detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Detector {
    D1,
    D2,
    D3,
}

impl Detector {
    /// Stable column label.
    pub fn label(self) -> &'static str {
        match self {
            Detector::D1 => "D1",
            Detector::D2 => "D2",
            Detector::D3 => "D3",
        }
    }
}

/// Arrival slot within a symbol. D1 records early/late; D2/D3 record the
/// interfering central slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bin {
    Early,
    Late,
    Interference,
}

impl Bin {
    /// Stable column label.
    pub fn label(self) -> &'static str {
        match self {
            Bin::Early => "early",
            Bin::Late => "late",
            Bin::Interference => "interference",
        }
    }
}

/// One detector click.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionRecord {
    pub symbol_index: u64,
    pub detector: Detector,
    pub bin: Bin,
    /// No signal photon contributed (Monte Carlo bookkeeping only).
    pub is_dark: bool,
}

/// Power transmittance of the channel, `10^(−attenuation/10)`.
pub fn channel_transmittance<T: Real>(attenuation_db: T) -> Result<T> {
    if !(attenuation_db >= T::zero()) || !attenuation_db.is_finite() {
        return Err(Error::invalid(
            "attenuation_db",
            format!("must be >= 0, got {attenuation_db}"),
        ));
    }
    Ok(T::of(10.0).powf(-attenuation_db / T::of(10.0)))
}

/// AMZI output probabilities for a relative phase:
/// `p_D2 = (1 + V cos Δφ)/2`, `p_D3 = (1 − V cos Δφ)/2`.
pub fn amzi_output_probs<T: Real>(relative_phase: T, visibility: T) -> (T, T) {
    let half = T::of(0.5);
    let c = visibility * relative_phase.cos();
    (half * (T::one() + c), half * (T::one() - c))
}

/// Threshold-detector click probability for a weak coherent pulse:
/// `1 − (1 − dark)·exp(−efficiency·mean_photons)`.
pub fn click_probability<T: Real>(mean_photons: T, efficiency: T, dark_prob: T) -> T {
    T::one() - (T::one() - dark_prob) * (-efficiency * mean_photons).exp()
}

/// Expected gain and error rate of one intensity class in one basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainQber<T> {
    /// Probability of a sifted detection per sent symbol of this class/basis.
    pub gain: T,
    /// Probability that such a detection is scored as an error.
    pub qber: T,
}

/// Analytic per-class, per-basis link rates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkRates<T> {
    /// Indexed by [`IntensityClass::index`].
    pub z: [GainQber<T>; 3],
    pub x: [GainQber<T>; 3],
}

impl<T: Real> LinkRates<T> {
    /// Rates for a class and basis.
    pub fn get(&self, class: IntensityClass, basis: Basis) -> GainQber<T> {
        match basis {
            Basis::Z => self.z[class.index()],
            Basis::X => self.x[class.index()],
        }
    }
}

/// Path transmittances and per-gate dark probability shared by both
/// fidelities. `eta_z`/`eta_x` exclude the beamsplitter routing fraction,
/// which the Monte Carlo path samples explicitly.
#[derive(Debug, Clone, Copy)]
struct LinkBudget<T> {
    eta_z: T,
    eta_x: T,
    bs_z: T,
    dark: T,
    leak: T,
    visibility: T,
}

impl<T: Real> LinkBudget<T> {
    fn new(
        channel: &ChannelParams<T>,
        receiver: &ReceiverParams<T>,
        extras: &LinkExtras<T>,
    ) -> Result<Self> {
        channel.validate()?;
        receiver.validate()?;
        let t_ch = channel_transmittance(channel.attenuation_db)?;
        let t_rx = channel_transmittance(receiver.receiver_insertion_loss_db)?;
        let t_amzi = channel_transmittance(receiver.amzi_insertion_loss_db)?;
        let eta_det = receiver.detector_efficiency;
        // Wrong-bin fraction from a finite extinction ratio: leak/(1+leak)
        // keeps the modeled max/min ratio equal to the measured ER.
        let er_lin = T::of(10.0).powf(-extras.transmitter_er_db / T::of(10.0));
        let leak = er_lin / (T::one() + er_lin);
        Ok(LinkBudget {
            eta_z: t_ch * t_rx * eta_det,
            eta_x: t_ch * t_rx * t_amzi * eta_det,
            bs_z: receiver.bs_z_fraction,
            dark: receiver.dark_prob_per_gate(),
            leak,
            visibility: (extras.transmitter_visibility * receiver.amzi_visibility)
                .max(T::zero())
                .min(T::one()),
        })
    }

    /// Mean photon numbers (early, late) after ER leakage for a Z symbol.
    fn z_bins(&self, intensity: T, bit: u8) -> (T, T) {
        let wrong = intensity * self.leak;
        let right = intensity - wrong;
        if bit == 0 {
            (right, wrong)
        } else {
            (wrong, right)
        }
    }

    /// Mean photon numbers (D2, D3) in the interfering slot for a pulse pair.
    fn amzi_bins(&self, early_sq: T, late_sq: T, cos_rel: T) -> (T, T) {
        let quarter = T::of(0.25);
        let base = quarter * (early_sq + late_sq);
        let cross = T::of(0.5) * (early_sq * late_sq).sqrt() * self.visibility * cos_rel;
        ((base + cross).max(T::zero()), (base - cross).max(T::zero()))
    }
}

/// Probability that exactly one of two gates clicks wrongly, plus the
/// double-click term, given (correct, wrong) click probabilities.
fn error_and_gain<T: Real>(p_correct: T, p_wrong: T) -> (T, T) {
    let gain = T::one() - (T::one() - p_correct) * (T::one() - p_wrong);
    let err = p_wrong * (T::one() - p_correct) + p_correct * p_wrong;
    (gain, err)
}

/// Computes expected gains and QBERs for every intensity class and basis.
///
/// Gains are per sent symbol of that class and basis, and include the
/// beamsplitter routing fraction, path losses, detector efficiency, dark
/// counts, transmitter extinction leakage (Z errors), and the combined
/// transmitter-AMZI visibility (X errors).
pub fn detect_analytic<T: Real>(
    config: &ProtocolConfig<T>,
    channel: &ChannelParams<T>,
    receiver: &ReceiverParams<T>,
    extras: &LinkExtras<T>,
) -> Result<LinkRates<T>> {
    config.validate()?;
    let budget = LinkBudget::new(channel, receiver, extras)?;
    let mut z = [GainQber {
        gain: T::zero(),
        qber: T::zero(),
    }; 3];
    let mut x = z;
    for class in IntensityClass::ALL {
        // Z: direct detection, error when the wrong bin clicks.
        let intensity_z = config.symbol_intensity(class, Basis::Z);
        let (mu_c, mu_w) = budget.z_bins(intensity_z, 0);
        let eta = budget.eta_z * budget.bs_z;
        let p_c = click_probability(mu_c, eta, budget.dark);
        let p_w = click_probability(mu_w, eta, budget.dark);
        let (gain, err) = error_and_gain(p_c, p_w);
        z[class.index()] = GainQber {
            gain,
            qber: if gain > T::zero() { err / gain } else { T::zero() },
        };

        // X: AMZI interference, error when the wrong detector clicks.
        let intensity_x = config.symbol_intensity(class, Basis::X);
        let half = intensity_x * T::of(0.5);
        let (n_correct, n_wrong) = budget.amzi_bins(half, half, T::one());
        let eta_x = budget.eta_x * (T::one() - budget.bs_z);
        let p_c = click_probability(n_correct, eta_x, budget.dark);
        let p_w = click_probability(n_wrong, eta_x, budget.dark);
        let (gain, err) = error_and_gain(p_c, p_w);
        x[class.index()] = GainQber {
            gain,
            qber: if gain > T::zero() { err / gain } else { T::zero() },
        };
    }
    Ok(LinkRates { z, x })
}

/// Scales `detector_efficiency` by a Gaussian envelope centered at 1550 nm.
///
/// The width is fixed so efficiency at ±35 nm is 90% of the peak; other
/// fields pass through unchanged. Wavelengths outside [1500, 1600] nm are
/// rejected.
pub fn wavelength_adjusted_receiver<T: Real>(
    receiver: &ReceiverParams<T>,
    wavelength_nm: T,
) -> Result<ReceiverParams<T>> {
    let (lo, hi) = (T::of(1500.0), T::of(1600.0));
    if !(wavelength_nm >= lo && wavelength_nm <= hi) {
        return Err(Error::invalid(
            "wavelength_nm",
            format!("must lie in [1500, 1600] nm, got {wavelength_nm}"),
        ));
    }
    // w_d from 10^(exp) envelope hitting 0.9 at 35 nm offset.
    let w_d = T::of(35.0) / (T::of(2.0) * T::of(0.9_f64.ln().abs())).sqrt();
    let d = wavelength_nm - T::of(1550.0);
    let scale = (-d * d / (T::of(2.0) * w_d * w_d)).exp();
    let mut out = *receiver;
    out.detector_efficiency = receiver.detector_efficiency * scale;
    Ok(out)
}

/// Composite one-photon transmittance of a path, for bookkeeping checks:
/// channel × receiver insertion × (AMZI insertion for X) × detector
/// efficiency × routing fraction.
pub fn composite_transmittance<T: Real>(
    channel: &ChannelParams<T>,
    receiver: &ReceiverParams<T>,
    basis: Basis,
) -> Result<T> {
    let t_ch = channel_transmittance(channel.attenuation_db)?;
    let t_rx = channel_transmittance(receiver.receiver_insertion_loss_db)?;
    Ok(match basis {
        Basis::Z => t_ch * t_rx * receiver.detector_efficiency * receiver.bs_z_fraction,
        Basis::X => {
            let t_amzi = channel_transmittance(receiver.amzi_insertion_loss_db)?;
            t_ch * t_rx * t_amzi
                * receiver.detector_efficiency
                * (T::one() - receiver.bs_z_fraction)
        }
    })
}

/// Samples per-symbol detection records.
///
/// Each symbol routes whole to D1 with probability `bs_z_fraction`,
/// otherwise to the AMZI. On D1 the early and late gates click independently
/// with the path transmittance; on the AMZI the interfering slot (which
/// carries half the symbol energy) survives with the X-path transmittance
/// and lands on D2 or D3 per [`amzi_output_probs`] at the symbol's encoded
/// relative phase. Dark clicks are added per gate, then dead time discards
/// clicks within `dead_time_ns` of an accepted click on the same detector.
/// The run is deterministic given `seed`: symbol `i` consumes RNG stream
/// `i + 1`, so shards of a long run can be generated independently and
/// merged by symbol index.
pub fn detect_monte_carlo<T: Real>(
    symbols: &[Symbol<T>],
    config: &ProtocolConfig<T>,
    channel: &ChannelParams<T>,
    receiver: &ReceiverParams<T>,
    extras: &LinkExtras<T>,
    seed: u64,
) -> Result<Vec<DetectionRecord>> {
    config.validate()?;
    let budget = LinkBudget::new(channel, receiver, extras)?;
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();

    for (i, symbol) in symbols.iter().enumerate() {
        let mut rng = base.clone();
        rng.set_stream(i as u64 + 1);

        if T::unit_uniform(&mut rng) < budget.bs_z {
            // Direct detection. ER leakage redistributes Z intensity; X
            // symbols genuinely populate both bins.
            let (early, late) = match symbol.basis {
                Basis::Z => budget.z_bins(symbol.total_intensity(), symbol.bit),
                Basis::X => {
                    let (e, l) = symbol.bin_amplitudes;
                    (e.norm_sqr(), l.norm_sqr())
                }
            };
            for (bin, mu) in [(Bin::Early, early), (Bin::Late, late)] {
                if let Some(is_dark) = sample_click(&mut rng, mu, budget.eta_z, budget.dark) {
                    records.push(DetectionRecord {
                        symbol_index: i as u64,
                        detector: Detector::D1,
                        bin,
                        is_dark,
                    });
                }
            }
        } else {
            // AMZI. A detected photon lands on one detector; a Z symbol has
            // no defined relative phase and splits evenly.
            let mu_gate = symbol.total_intensity() * T::of(0.5);
            let p_survive = T::one() - (-budget.eta_x * mu_gate).exp();
            let mut signal_hit = None;
            if T::unit_uniform(&mut rng) < p_survive {
                let (p_d2, _) = match symbol.basis {
                    Basis::X => amzi_output_probs(symbol.relative_phase(), budget.visibility),
                    Basis::Z => (T::of(0.5), T::of(0.5)),
                };
                let det = if T::unit_uniform(&mut rng) < p_d2 {
                    Detector::D2
                } else {
                    Detector::D3
                };
                signal_hit = Some(det);
                records.push(DetectionRecord {
                    symbol_index: i as u64,
                    detector: det,
                    bin: Bin::Interference,
                    is_dark: false,
                });
            }
            for det in [Detector::D2, Detector::D3] {
                if signal_hit != Some(det) && T::unit_uniform(&mut rng) < budget.dark {
                    records.push(DetectionRecord {
                        symbol_index: i as u64,
                        detector: det,
                        bin: Bin::Interference,
                        is_dark: true,
                    });
                }
            }
        }
    }

    if receiver.dead_time_ns > T::zero() {
        records = apply_dead_time(records, config.symbol_period_ps(), receiver.dead_time_ns);
    }
    Ok(records)
}

/// Samples one gate: `Some(is_dark)` on a click, `None` otherwise.
fn sample_click<T: Real, R: Rng + ?Sized>(
    rng: &mut R,
    mean_photons: T,
    efficiency: T,
    dark: T,
) -> Option<bool> {
    let p_signal = T::one() - (-efficiency * mean_photons).exp();
    if T::unit_uniform(rng) < p_signal {
        Some(false)
    } else if T::unit_uniform(rng) < dark {
        Some(true)
    } else {
        None
    }
}

/// Discards clicks within the dead time of an accepted click on the same
/// detector. Gate times: early at the symbol start, late and interference
/// half a period in.
fn apply_dead_time<T: Real>(
    records: Vec<DetectionRecord>,
    symbol_period_ps: T,
    dead_time_ns: T,
) -> Vec<DetectionRecord> {
    let dead_ps = dead_time_ns.as_f64() * 1e3;
    let period = symbol_period_ps.as_f64();
    let half = period / 2.0;
    let mut last_accept: [Option<f64>; 3] = [None; 3];
    let mut kept = Vec::with_capacity(records.len());
    for r in records {
        let slot = match r.bin {
            Bin::Early => 0.0,
            Bin::Late | Bin::Interference => half,
        };
        let t = r.symbol_index as f64 * period + slot;
        let d = match r.detector {
            Detector::D1 => 0,
            Detector::D2 => 1,
            Detector::D3 => 2,
        };
        match last_accept[d] {
            Some(prev) if t - prev < dead_ps => {}
            _ => {
                last_accept[d] = Some(t);
                kept.push(r);
            }
        }
    }
    kept
}

/// Writes detection records as CSV: `symbol_index, detector, bin, is_dark`.
pub fn write_records_csv<W: Write>(records: &[DetectionRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["symbol_index", "detector", "bin", "is_dark"])?;
    for r in records {
        w.write_record([
            r.symbol_index.to_string(),
            r.detector.label().to_string(),
            r.bin.label().to_string(),
            r.is_dark.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::build_symbol;
    use approx::assert_relative_eq;

    #[test]
    fn test_transmittance_decades() {
        assert_relative_eq!(channel_transmittance(0.0_f64).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            channel_transmittance(11.5_f64).unwrap(),
            0.070_794_578_438_413_8,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            channel_transmittance(30.0_f64).unwrap(),
            0.001,
            max_relative = 1e-12
        );
        assert!(channel_transmittance(-1.0_f64).is_err());
    }

    #[test]
    fn test_amzi_routes_by_phase() {
        let (p2, p3) = amzi_output_probs(0.0_f64, 1.0);
        assert_relative_eq!(p2, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p3, 0.0, epsilon = 1e-12);
        let (p2, p3) = amzi_output_probs(std::f64::consts::PI, 1.0);
        assert_relative_eq!(p2, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p3, 1.0, epsilon = 1e-12);
        let (p2, p3) = amzi_output_probs(1.234_f64, 0.0);
        assert_relative_eq!(p2, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p3, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn test_click_probability_limits_and_value() {
        assert_eq!(click_probability(0.0_f64, 0.33, 0.0), 0.0);
        assert!(click_probability(1e9_f64, 0.33, 0.0) > 0.999_999);
        assert_relative_eq!(
            click_probability(0.4 * 0.0708_f64, 0.33, 0.0),
            0.009_302_065_604_223_42,
            max_relative = 1e-9
        );
    }

    #[test]
    fn test_click_probability_monotone() {
        let mut prev = 0.0;
        for i in 0..50 {
            let p = click_probability(0.01 * i as f64, 0.33, 1e-6);
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn test_ideal_device_has_zero_qber() {
        let config = ProtocolConfig::<f64>::default();
        let mut receiver = ReceiverParams::default();
        receiver.dark_count_rate_hz = 0.0;
        receiver.amzi_visibility = 1.0;
        let channel = ChannelParams { attenuation_db: 11.5 };
        let extras = LinkExtras::default();
        let rates = detect_analytic(&config, &channel, &receiver, &extras).unwrap();
        for class in [IntensityClass::Signal, IntensityClass::Decoy] {
            assert_relative_eq!(rates.get(class, Basis::Z).qber, 0.0, epsilon = 1e-12);
            assert_relative_eq!(rates.get(class, Basis::X).qber, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn test_visibility_sets_x_error_floor() {
        let config = ProtocolConfig::<f64>::default();
        let mut receiver = ReceiverParams::default();
        receiver.dark_count_rate_hz = 0.0;
        receiver.amzi_visibility = 0.98;
        let channel = ChannelParams { attenuation_db: 0.0 };
        let extras = LinkExtras::default();
        let rates = detect_analytic(&config, &channel, &receiver, &extras).unwrap();
        // (1 - V)/2 = 0.01, up to the small double-click correction.
        let e_x = rates.get(IntensityClass::Signal, Basis::X).qber;
        assert_relative_eq!(e_x, 0.01, max_relative = 0.02);
    }

    #[test]
    fn test_dark_dominated_qber_approaches_half() {
        let config = ProtocolConfig::<f64>::default();
        let receiver = ReceiverParams::default();
        let channel = ChannelParams { attenuation_db: 200.0 };
        let extras = LinkExtras {
            transmitter_er_db: 22.0,
            transmitter_visibility: 0.99,
        };
        let rates = detect_analytic(&config, &channel, &receiver, &extras).unwrap();
        let e_z = rates.get(IntensityClass::Signal, Basis::Z).qber;
        let e_x = rates.get(IntensityClass::Signal, Basis::X).qber;
        assert_relative_eq!(e_z, 0.5, max_relative = 1e-3);
        assert_relative_eq!(e_x, 0.5, max_relative = 1e-3);
    }

    #[test]
    fn test_er_floor_sets_z_error() {
        let config = ProtocolConfig::<f64>::default();
        let mut receiver = ReceiverParams::default();
        receiver.dark_count_rate_hz = 0.0;
        let channel = ChannelParams { attenuation_db: 11.5 };
        let extras = LinkExtras {
            transmitter_er_db: 20.0,
            transmitter_visibility: 1.0,
        };
        let rates = detect_analytic(&config, &channel, &receiver, &extras).unwrap();
        let e_z = rates.get(IntensityClass::Signal, Basis::Z).qber;
        // Leakage 0.01/(1.01) against the total, diluted by click nonlinearity.
        assert!(e_z > 0.005 && e_z < 0.015, "e_z = {e_z}");
    }

    #[test]
    fn test_wavelength_adjustment_envelope() {
        let receiver = ReceiverParams::<f64>::default();
        let at_center = wavelength_adjusted_receiver(&receiver, 1550.0).unwrap();
        assert_relative_eq!(at_center.detector_efficiency, 0.33, epsilon = 1e-12);
        let at_edge = wavelength_adjusted_receiver(&receiver, 1585.0).unwrap();
        assert_relative_eq!(at_edge.detector_efficiency, 0.9 * 0.33, max_relative = 1e-9);
        let lo = wavelength_adjusted_receiver(&receiver, 1515.0).unwrap();
        assert!(lo.detector_efficiency >= 0.85 * 0.33);
        let plus = wavelength_adjusted_receiver(&receiver, 1550.0 + 17.0).unwrap();
        let minus = wavelength_adjusted_receiver(&receiver, 1550.0 - 17.0).unwrap();
        assert_relative_eq!(
            plus.detector_efficiency,
            minus.detector_efficiency,
            epsilon = 1e-15
        );
        assert!(wavelength_adjusted_receiver(&receiver, 1499.0).is_err());
    }

    #[test]
    fn test_composite_transmittance_is_a_product() {
        let channel = ChannelParams { attenuation_db: 11.5_f64 };
        let receiver = ReceiverParams::default();
        let t_z = composite_transmittance(&channel, &receiver, Basis::Z).unwrap();
        let hand = 0.070_794_578_438_413_8 * 10f64.powf(-0.1) * 0.33 * 0.5;
        assert_relative_eq!(t_z, hand, max_relative = 1e-12);
        let t_x = composite_transmittance(&channel, &receiver, Basis::X).unwrap();
        assert_relative_eq!(t_x, hand * 10f64.powf(-0.2), max_relative = 1e-12);
    }

    #[test]
    fn test_monte_carlo_total_loss_yields_nothing() {
        let config = ProtocolConfig::<f64>::default();
        let mut receiver = ReceiverParams::default();
        receiver.dark_count_rate_hz = 0.0;
        let channel = ChannelParams { attenuation_db: 300.0 };
        let symbols: Vec<_> = (0..2000)
            .map(|i| build_symbol(&config, Basis::Z, (i % 2) as u8, IntensityClass::Signal, 0))
            .collect();
        let records = detect_monte_carlo(
            &symbols,
            &config,
            &channel,
            &receiver,
            &LinkExtras::default(),
            9,
        )
        .unwrap();
        assert!(records.is_empty());
    }

    #[test]
    fn test_monte_carlo_deterministic() {
        let config = ProtocolConfig::<f64>::default();
        let receiver = ReceiverParams::default();
        let channel = ChannelParams { attenuation_db: 11.5 };
        let symbols: Vec<_> = (0..5000)
            .map(|i| build_symbol(&config, Basis::Z, (i % 2) as u8, IntensityClass::Signal, 0))
            .collect();
        let extras = LinkExtras::default();
        let a = detect_monte_carlo(&symbols, &config, &channel, &receiver, &extras, 4).unwrap();
        let b = detect_monte_carlo(&symbols, &config, &channel, &receiver, &extras, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn test_dead_time_strictly_reduces_records() {
        let config = ProtocolConfig::<f64>::default();
        let channel = ChannelParams { attenuation_db: 0.0 };
        let mut no_dead = ReceiverParams::default();
        no_dead.dead_time_ns = 0.0;
        let mut with_dead = ReceiverParams::default();
        with_dead.dead_time_ns = 50.0;
        let symbols: Vec<_> = (0..20_000)
            .map(|i| build_symbol(&config, Basis::Z, (i % 2) as u8, IntensityClass::Signal, 0))
            .collect();
        let extras = LinkExtras::default();
        let a = detect_monte_carlo(&symbols, &config, &channel, &no_dead, &extras, 12).unwrap();
        let b = detect_monte_carlo(&symbols, &config, &channel, &with_dead, &extras, 12).unwrap();
        assert!(b.len() < a.len(), "{} vs {}", b.len(), a.len());
    }

    #[test]
    fn test_records_csv_shape() {
        let records = vec![DetectionRecord {
            symbol_index: 7,
            detector: Detector::D2,
            bin: Bin::Interference,
            is_dark: false,
        }];
        let mut buf = Vec::new();
        write_records_csv(&records, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("symbol_index,detector,bin,is_dark\n"));
        assert!(text.contains("7,D2,interference,false"));
    }
}
