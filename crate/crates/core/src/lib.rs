//! Desk-scale simulator of a wavelength-tunable time-bin QKD transmitter.
//!
//! The pipeline runs in four stages: multimode rate equations for an
//! injection-locked gain-switched Fabry-Perot laser ([`laser`]), efficient
//! BB84 time-bin encoding with decoy intensities and discrete global phase
//! randomization ([`protocol`]), a lossy channel with a passive
//! direct-detection plus AMZI receiver ([`channel`]), and vacuum+weak
//! decoy-state key-rate analysis ([`keyrate`]). The [`harness`] ties the
//! stages into reproducible parameter sweeps.
//!
//! Everything numeric is generic over the scalar type through [`Real`];
//! `f64` is the intended precision and the concrete aliases below pin it.
//! `f32` works for exploratory runs at reduced accuracy.

pub mod channel;
pub mod error;
pub mod float;
pub mod harness;
pub mod keyrate;
pub mod laser;
pub mod protocol;

pub use channel::{
    amzi_output_probs, channel_transmittance, click_probability, detect_analytic,
    detect_monte_carlo, wavelength_adjusted_receiver, Bin, ChannelParams, DetectionRecord,
    Detector, LinkExtras, LinkRates, ReceiverParams,
};
pub use error::{Error, Result};
pub use float::Real;
pub use harness::{
    bridge_trace, bridge_transmitter, load_config, run_attenuation_sweep, run_injection_sweep,
    run_wavelength_sweep, ExperimentConfig, Fidelity, SweepRow, TransmitterMetrics,
};
pub use keyrate::{
    binary_entropy, decoy_bounds, secure_key_rate, sift, DecoyBounds, DecoyInputs,
    DetectionTally, SkrResult,
};
pub use laser::{
    modulation_bandwidth, simulate, simulate_with, DriveSignal, FieldTrace, InjectionParams,
    LaserParams, PulseHistogram, SimOptions,
};
pub use protocol::{sample_symbol, Basis, IntensityClass, ProtocolConfig, Symbol};

/// Double-precision aliases for the main parameter and result types.
pub type LaserParams64 = laser::LaserParams<f64>;
pub type InjectionParams64 = laser::InjectionParams<f64>;
pub type DriveSignal64 = laser::DriveSignal<f64>;
pub type FieldTrace64 = laser::FieldTrace<f64>;
pub type ProtocolConfig64 = protocol::ProtocolConfig<f64>;
pub type Symbol64 = protocol::Symbol<f64>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type ReceiverParams64 = channel::ReceiverParams<f64>;
pub type SkrResult64 = keyrate::SkrResult<f64>;
pub type ExperimentConfig64 = harness::ExperimentConfig<f64>;
pub type SweepRow64 = harness::SweepRow<f64>;

/// Single-precision aliases for reduced-accuracy exploration.
pub type LaserParams32 = laser::LaserParams<f32>;
pub type FieldTrace32 = laser::FieldTrace<f32>;
pub type ProtocolConfig32 = protocol::ProtocolConfig<f32>;
