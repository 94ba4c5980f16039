//! Experiment configuration, sweep orchestration, and table emission.
//!
//! A sweep evaluates independent operating points, so points run
//! concurrently with seeds derived from (config seed, point index); output
//! rows are ordered by the independent variable regardless of completion
//! order, and reruns with the same config and seed are byte identical.

mod bridge;
mod sweeps;

pub use bridge::{bridge_trace, bridge_transmitter, TransmitterMetrics};
pub use sweeps::{
    optimize_injection, run_attenuation_sweep, run_injection_sweep, run_wavelength_sweep,
};

use crate::channel::ReceiverParams;
use crate::error::{Error, Result};
use crate::float::Real;
use crate::laser::{InjectionParams, LaserParams};
use crate::protocol::ProtocolConfig;
use serde::{Deserialize, Serialize};
use std::io::{Read as IoRead, Write};
use std::path::Path;

/// Link-model fidelity for sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    Analytic,
    MonteCarlo,
}

/// Gain-switching drive settings. `clock_ghz` is the optical pulse rate,
/// twice the symbol rate; `high_ma`/`low_ma` are absolute currents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct DriveConfig<T> {
    pub clock_ghz: T,
    pub dc_bias_ma: T,
    pub high_ma: T,
    pub low_ma: T,
    pub duty: T,
    pub edge_ps: T,
}

impl<T: Real> Default for DriveConfig<T> {
    fn default() -> Self {
        DriveConfig {
            clock_ghz: T::of(2.0),
            dc_bias_ma: T::of(14.8),
            high_ma: T::of(17.5),
            low_ma: T::of(8.4),
            duty: T::of(0.44),
            edge_ps: T::of(220.0),
        }
    }
}

impl<T: Real> DriveConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.clock_ghz > T::zero()) {
            return Err(Error::invalid(
                "drive.clock_ghz",
                format!("must be > 0, got {}", self.clock_ghz),
            ));
        }
        if !(self.low_ma >= T::zero() && self.high_ma > self.low_ma) {
            return Err(Error::invalid(
                "drive.high_ma",
                format!(
                    "need 0 <= low < high, got low {} and high {}",
                    self.low_ma, self.high_ma
                ),
            ));
        }
        if !(self.duty > T::zero() && self.duty < T::one()) {
            return Err(Error::invalid(
                "drive.duty",
                format!("must lie in (0, 1), got {}", self.duty),
            ));
        }
        let period = T::of(1000.0) / self.clock_ghz;
        if !(self.edge_ps >= T::zero()
            && self.edge_ps <= self.duty.min(T::one() - self.duty) * period)
        {
            return Err(Error::invalid(
                "drive.edge_ps",
                format!(
                    "must lie in [0, min(duty, 1-duty)*period], got {} at period {period}",
                    self.edge_ps
                ),
            ));
        }
        if !(self.dc_bias_ma >= T::zero()) {
            return Err(Error::invalid(
                "drive.dc_bias_ma",
                format!("must be >= 0, got {}", self.dc_bias_ma),
            ));
        }
        Ok(())
    }

    /// Pulse period, ps.
    pub fn period_ps(&self) -> T {
        T::of(1000.0) / self.clock_ghz
    }
}

/// Integrator and trace-length settings for harness-driven simulations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct SimConfig<T> {
    pub dt_ps: T,
    pub record_stride: usize,
    /// Discarded start-up span, in drive periods.
    pub settle_periods: usize,
    /// Recorded span for bridge metric extraction, in drive periods.
    pub bridge_periods: usize,
    /// Recorded span for `simulate-laser` traces, in drive periods.
    pub trace_periods: usize,
}

impl<T: Real> Default for SimConfig<T> {
    fn default() -> Self {
        SimConfig {
            dt_ps: T::of(0.2),
            record_stride: 5,
            settle_periods: 16,
            bridge_periods: 40,
            trace_periods: 64,
        }
    }
}

impl<T: Real> SimConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_ps > T::zero()) {
            return Err(Error::invalid(
                "sim.dt_ps",
                format!("must be > 0, got {}", self.dt_ps),
            ));
        }
        if self.record_stride == 0 {
            return Err(Error::invalid("sim.record_stride", "must be >= 1"));
        }
        if self.bridge_periods < 4 || self.trace_periods < 4 {
            return Err(Error::invalid(
                "sim.bridge_periods",
                "bridge and trace spans must cover at least 4 periods",
            ));
        }
        Ok(())
    }
}

/// Error-correction model settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct KeyrateConfig<T> {
    pub ec_efficiency: T,
}

impl<T: Real> Default for KeyrateConfig<T> {
    fn default() -> Self {
        KeyrateConfig {
            ec_efficiency: T::of(1.16),
        }
    }
}

/// Sweep grids and their fixed operating conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct SweepConfig<T> {
    pub injection_grid_uw: Vec<T>,
    pub attenuation_grid_db: Vec<T>,
    pub wavelength_grid_nm: Vec<T>,
    /// Channel attenuation used by the wavelength sweep.
    pub wavelength_attenuation_db: T,
    /// Channel attenuation used by the injection sweep.
    pub injection_attenuation_db: T,
}

impl<T: Real> Default for SweepConfig<T> {
    fn default() -> Self {
        SweepConfig {
            injection_grid_uw: [0.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0]
                .iter()
                .map(|&v| T::of(v))
                .collect(),
            attenuation_grid_db: [
                0.0, 3.0, 6.0, 9.0, 11.5, 15.0, 18.0, 21.0, 24.0, 26.5, 30.0, 34.0, 38.0,
                42.0, 46.0, 50.0, 54.0, 58.0, 60.0, 66.0,
            ]
            .iter()
            .map(|&v| T::of(v))
            .collect(),
            wavelength_grid_nm: (0..16)
                .map(|i| snap_to_itu(T::of(1515.0 + 5.0 * i as f64)))
                .collect(),
            wavelength_attenuation_db: T::of(26.5),
            injection_attenuation_db: T::of(11.5),
        }
    }
}

impl<T: Real> SweepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, grid) in [
            ("sweep.injection_grid_uw", &self.injection_grid_uw),
            ("sweep.attenuation_grid_db", &self.attenuation_grid_db),
            ("sweep.wavelength_grid_nm", &self.wavelength_grid_nm),
        ] {
            if grid.is_empty() {
                return Err(Error::invalid(name, "must be nonempty"));
            }
            for w in grid.windows(2) {
                if !(w[0] < w[1]) {
                    return Err(Error::invalid(
                        name,
                        format!("must be strictly ascending, got {} then {}", w[0], w[1]),
                    ));
                }
            }
        }
        for (name, v) in [
            ("sweep.wavelength_attenuation_db", self.wavelength_attenuation_db),
            ("sweep.injection_attenuation_db", self.injection_attenuation_db),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(Error::invalid(name, format!("must be >= 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Complete experiment description; serializes as TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Real"))]
pub struct ExperimentConfig<T> {
    pub seed: u64,
    pub fidelity: Fidelity,
    pub monte_carlo_symbols: u64,
    pub laser: LaserParams<T>,
    pub injection: InjectionParams<T>,
    pub drive: DriveConfig<T>,
    pub sim: SimConfig<T>,
    pub protocol: ProtocolConfig<T>,
    pub receiver: ReceiverParams<T>,
    pub keyrate: KeyrateConfig<T>,
    pub sweep: SweepConfig<T>,
}

impl<T: Real> Default for ExperimentConfig<T> {
    fn default() -> Self {
        let mut injection = InjectionParams::default();
        // Operate on the 50 GHz ITU channel nearest the nominal wavelength.
        injection.wavelength_nm = snap_to_itu(injection.wavelength_nm);
        ExperimentConfig {
            seed: 4,
            fidelity: Fidelity::Analytic,
            monte_carlo_symbols: 1_000_000,
            laser: LaserParams::default(),
            injection,
            drive: DriveConfig::default(),
            sim: SimConfig::default(),
            protocol: ProtocolConfig::default(),
            receiver: ReceiverParams::default(),
            keyrate: KeyrateConfig::default(),
            sweep: SweepConfig::default(),
        }
    }
}

impl<T: Real> ExperimentConfig<T> {
    /// Validates every section plus the cross-section constraints.
    pub fn validate(&self) -> Result<()> {
        self.laser.validate()?;
        self.injection.validate()?;
        self.drive.validate()?;
        self.sim.validate()?;
        self.protocol.validate()?;
        self.receiver.validate()?;
        self.sweep.validate()?;
        if !(self.keyrate.ec_efficiency >= T::one()) {
            return Err(Error::invalid(
                "keyrate.ec_efficiency",
                format!("must be >= 1, got {}", self.keyrate.ec_efficiency),
            ));
        }
        // The AMZI delay equals the pulse period, so the symbol rate must be
        // half the pulse clock.
        let expected = self.drive.clock_ghz * T::of(0.5);
        let diff = (self.protocol.symbol_rate_ghz - expected).abs();
        if diff > expected * T::of(1e-9) {
            return Err(Error::invalid(
                "protocol.symbol_rate_ghz",
                format!(
                    "must be half of drive.clock_ghz ({expected}), got {}",
                    self.protocol.symbol_rate_ghz
                ),
            ));
        }
        if self.fidelity == Fidelity::MonteCarlo && self.monte_carlo_symbols < 10_000 {
            return Err(Error::invalid(
                "monte_carlo_symbols",
                format!(
                    "must be >= 10000 for monte_carlo fidelity, got {}",
                    self.monte_carlo_symbols
                ),
            ));
        }
        let total = self.sim.settle_periods + self.sim.bridge_periods;
        if T::from_usize(total).unwrap() * self.drive.period_ps() < T::of(1000.0) {
            return Err(Error::invalid(
                "sim.bridge_periods",
                "settle plus bridge span must cover at least 1 ns",
            ));
        }
        Ok(())
    }

    /// Per-point RNG seed; the odd multiplier keeps indices injective.
    pub fn point_seed(&self, index: usize) -> u64 {
        self.seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
    }
}

/// Parses a TOML config file. Schema errors carry the file path and the
/// offending key.
pub fn load_config<T: Real>(path: &Path) -> Result<ExperimentConfig<T>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    let config: ExperimentConfig<T> = toml::from_str(&text)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    config
        .validate()
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    Ok(config)
}

/// Serializes a config as TOML.
pub fn write_config<T: Real>(config: &ExperimentConfig<T>) -> Result<String> {
    Ok(toml::to_string_pretty(config)?)
}

/// One sweep point. `variable` is the independent value in the sweep's
/// natural unit (µW, dB, or nm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow<T> {
    pub variable: T,
    pub er_db: T,
    pub visibility: T,
    pub e_z: T,
    pub e_x: T,
    /// Sifted-weighted mean of `e_z` and `e_x`.
    pub qber: T,
    pub q_mu: T,
    pub skr_bits_per_s: T,
    pub locked: bool,
}

/// Fixed column order after the variable column.
const ROW_COLUMNS: [&str; 8] = [
    "er_db",
    "visibility",
    "e_z",
    "e_x",
    "qber",
    "q_mu",
    "skr_bits_per_s",
    "locked",
];

/// Writes rows as CSV with `variable_name` heading the first column. Floats
/// print as shortest round-trip decimals, so emit/read is lossless.
pub fn emit_csv<T: Real, W: Write>(
    variable_name: &str,
    rows: &[SweepRow<T>],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![variable_name.to_string()];
    header.extend(ROW_COLUMNS.iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for r in rows {
        w.write_record([
            r.variable.to_string(),
            r.er_db.to_string(),
            r.visibility.to_string(),
            r.e_z.to_string(),
            r.e_x.to_string(),
            r.qber.to_string(),
            r.q_mu.to_string(),
            r.skr_bits_per_s.to_string(),
            r.locked.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Parses the CSV layout written by [`emit_csv`]; returns the variable
/// column name with the rows.
pub fn read_sweep_csv<T: Real, R: IoRead>(input: R) -> Result<(String, Vec<SweepRow<T>>)> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.len() != 9 || header.iter().skip(1).ne(ROW_COLUMNS.iter().copied()) {
        return Err(Error::invalid(
            "sweep csv",
            format!("unexpected header {:?}", header),
        ));
    }
    let variable_name = header[0].to_string();
    let mut rows = Vec::new();
    for record in r.records() {
        let record = record?;
        let field = |i: usize| -> Result<T> {
            record[i]
                .parse::<f64>()
                .map(T::of)
                .map_err(|_| Error::invalid("sweep csv", format!("bad float {:?}", &record[i])))
        };
        let locked = match &record[8] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::invalid("sweep csv", format!("bad flag {other:?}")))
            }
        };
        rows.push(SweepRow {
            variable: field(0)?,
            er_db: field(1)?,
            visibility: field(2)?,
            e_z: field(3)?,
            e_x: field(4)?,
            qber: field(5)?,
            q_mu: field(6)?,
            skr_bits_per_s: field(7)?,
            locked,
        });
    }
    Ok((variable_name, rows))
}

/// Nearest 50 GHz ITU grid channel to a wavelength.
pub fn snap_to_itu<T: Real>(wavelength_nm: T) -> T {
    let c_nm_ghz = T::of(2.997_924_58e8);
    let f_ghz = c_nm_ghz / wavelength_nm;
    let channel = (f_ghz / T::of(50.0)).round() * T::of(50.0);
    c_nm_ghz / channel
}
