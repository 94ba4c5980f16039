//! Sifting, decoy-state bounds, and the asymptotic secure key rate.
//!
//! Sifting keeps detections whose measurement arm matches the prepared
//! basis: D1 clicks measure Z, D2/D3 clicks measure X. A symbol with any
//! matching click counts as one detection; it scores as an error when any
//! matching click disagrees with the encoded value, which folds double
//! clicks into errors (the conservative squashing convention used by the
//! analytic rates as well).
//!
//! Decoy bounds follow the vacuum+weak two-intensity estimator. Single
//! photon yields come from the Z tallies (the key basis) and the phase error
//! bound from the X tallies; the receiver paths differ in loss, so each
//! basis uses its own yield bound.

use crate::channel::{DetectionRecord, LinkRates};
use crate::error::{Error, Result};
use crate::float::Real;
use crate::protocol::{Basis, IntensityClass, ProtocolConfig, Symbol};
use std::io::{Read as IoRead, Write};

/// Counts for one intensity class in one basis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TallyCell {
    pub sent: u64,
    pub detected: u64,
    pub errors: u64,
}

/// Sift outcome, indexed by intensity class and basis.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DetectionTally {
    cells: [[TallyCell; 2]; 3],
}

impl DetectionTally {
    pub fn new() -> Self {
        Self::default()
    }

    fn basis_index(basis: Basis) -> usize {
        match basis {
            Basis::Z => 0,
            Basis::X => 1,
        }
    }

    /// Counts for a class and basis.
    pub fn cell(&self, class: IntensityClass, basis: Basis) -> &TallyCell {
        &self.cells[class.index()][Self::basis_index(basis)]
    }

    pub fn cell_mut(&mut self, class: IntensityClass, basis: Basis) -> &mut TallyCell {
        &mut self.cells[class.index()][Self::basis_index(basis)]
    }

    /// Detection probability per sent symbol, `None` when nothing was sent.
    pub fn gain<T: Real>(&self, class: IntensityClass, basis: Basis) -> Option<T> {
        let c = self.cell(class, basis);
        (c.sent > 0).then(|| T::of(c.detected as f64) / T::of(c.sent as f64))
    }

    /// Error fraction among detections, `None` when nothing was detected.
    pub fn qber<T: Real>(&self, class: IntensityClass, basis: Basis) -> Option<T> {
        let c = self.cell(class, basis);
        (c.detected > 0).then(|| T::of(c.errors as f64) / T::of(c.detected as f64))
    }

    /// Componentwise sum; associative and commutative, so shards merge in
    /// any order.
    pub fn merge(&mut self, other: &DetectionTally) {
        for class in IntensityClass::ALL {
            for basis in [Basis::Z, Basis::X] {
                let o = *other.cell(class, basis);
                let c = self.cell_mut(class, basis);
                c.sent += o.sent;
                c.detected += o.detected;
                c.errors += o.errors;
            }
        }
    }

    /// Rejects impossible count orderings.
    pub fn validate(&self) -> Result<()> {
        for class in IntensityClass::ALL {
            for basis in [Basis::Z, Basis::X] {
                let c = self.cell(class, basis);
                if c.errors > c.detected || c.detected > c.sent {
                    return Err(Error::invalid(
                        "tally",
                        format!(
                            "{} {}: need errors <= detected <= sent, got {}/{}/{}",
                            class.label(),
                            basis.label(),
                            c.errors,
                            c.detected,
                            c.sent
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Writes rows `class, basis, sent, detected, errors` in class-major
    /// order.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["class", "basis", "sent", "detected", "errors"])?;
        for class in IntensityClass::ALL {
            for basis in [Basis::Z, Basis::X] {
                let c = self.cell(class, basis);
                w.write_record([
                    class.label().to_string(),
                    basis.label().to_string(),
                    c.sent.to_string(),
                    c.detected.to_string(),
                    c.errors.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses the CSV layout written by [`DetectionTally::write_csv`].
    /// Repeated class/basis rows accumulate.
    pub fn read_csv<R: IoRead>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut tally = DetectionTally::new();
        for row in r.records() {
            let row = row?;
            if row.len() != 5 {
                return Err(Error::invalid(
                    "tally",
                    format!("expected 5 columns, got {}", row.len()),
                ));
            }
            let class = match &row[0] {
                "signal" => IntensityClass::Signal,
                "decoy" => IntensityClass::Decoy,
                "vacuum" => IntensityClass::Vacuum,
                other => {
                    return Err(Error::invalid("tally", format!("unknown class {other:?}")))
                }
            };
            let basis = match &row[1] {
                "Z" => Basis::Z,
                "X" => Basis::X,
                other => {
                    return Err(Error::invalid("tally", format!("unknown basis {other:?}")))
                }
            };
            let parse = |i: usize| -> Result<u64> {
                row[i].trim().parse().map_err(|_| {
                    Error::invalid("tally", format!("bad count {:?} in column {i}", &row[i]))
                })
            };
            let c = tally.cell_mut(class, basis);
            c.sent += parse(2)?;
            c.detected += parse(3)?;
            c.errors += parse(4)?;
        }
        tally.validate()?;
        Ok(tally)
    }
}

/// Scores detection records against the sent symbols.
///
/// Basis-mismatched clicks are sifted out. A Z detection errs when any D1
/// click sits in the bin opposite the encoded bit; an X detection errs when
/// any click lands on the detector opposite the encoded phase
/// (delta phi = 0 selects D2). Record order does not matter.
pub fn sift<T: Real>(
    symbols: &[Symbol<T>],
    records: &[DetectionRecord],
) -> Result<DetectionTally> {
    use crate::channel::{Bin, Detector};

    const SEEN_MATCH: u8 = 1;
    const SEEN_WRONG: u8 = 2;
    let mut flags = vec![0u8; symbols.len()];

    for record in records {
        let idx = record.symbol_index as usize;
        if idx >= symbols.len() {
            return Err(Error::MalformedRecord {
                record: format!("{record:?}"),
                symbol_index: record.symbol_index,
                symbol_count: symbols.len() as u64,
            });
        }
        let symbol = &symbols[idx];
        let scored = match (symbol.basis, record.detector) {
            (Basis::Z, Detector::D1) => {
                let encoded = if symbol.bit == 0 { Bin::Early } else { Bin::Late };
                Some(record.bin != encoded)
            }
            (Basis::X, Detector::D2) => Some(symbol.bit != 0),
            (Basis::X, Detector::D3) => Some(symbol.bit != 1),
            _ => None,
        };
        if let Some(wrong) = scored {
            flags[idx] |= SEEN_MATCH | if wrong { SEEN_WRONG } else { 0 };
        }
    }

    let mut tally = DetectionTally::new();
    for (symbol, flag) in symbols.iter().zip(&flags) {
        let c = tally.cell_mut(symbol.intensity_class, symbol.basis);
        c.sent += 1;
        if flag & SEEN_MATCH != 0 {
            c.detected += 1;
            if flag & SEEN_WRONG != 0 {
                c.errors += 1;
            }
        }
    }
    Ok(tally)
}

/// Binary entropy in bits, with `h2(0) = h2(1) = 0`.
pub fn binary_entropy<T: Real>(p: T) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::invalid("p", format!("must lie in [0, 1], got {p}")));
    }
    if p == T::zero() || p == T::one() {
        return Ok(T::zero());
    }
    let q = T::one() - p;
    Ok(-(p * p.log2() + q * q.log2()))
}

/// Poissonian-source gain and QBER of one intensity:
/// `Q = Y0 + 1 − exp(−η·μ)`, `E·Q = 0.5·Y0 + e_opt·(1 − exp(−η·μ))`.
pub fn analytic_gain_qber<T: Real>(
    intensity: T,
    eta_total: T,
    y0: T,
    e_opt: T,
) -> Result<(T, T)> {
    for (name, v, hi) in [
        ("intensity", intensity, T::infinity()),
        ("eta_total", eta_total, T::one()),
        ("y0", y0, T::one()),
        ("e_opt", e_opt, T::one()),
    ] {
        if !(v >= T::zero() && v <= hi) {
            return Err(Error::invalid(name, format!("out of range: {v}")));
        }
    }
    let signal = T::one() - (-eta_total * intensity).exp();
    let q = y0 + signal;
    let eq = T::of(0.5) * y0 + e_opt * signal;
    let e = if q > T::zero() { eq / q } else { T::of(0.5) };
    Ok((q, e))
}

/// Measured quantities feeding the vacuum+weak estimator, all from one
/// basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyInputs<T> {
    pub mu: T,
    pub nu: T,
    /// Signal-intensity gain.
    pub q_mu: T,
    /// Decoy-intensity gain.
    pub q_nu: T,
    /// Decoy-intensity QBER.
    pub e_nu: T,
    /// Vacuum-intensity gain.
    pub y0: T,
}

/// Single-photon bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoyBounds<T> {
    pub y1_lower: T,
    pub e1_upper: T,
}

/// Vacuum+weak decoy bounds:
/// `Y1 ≥ (μ/(μν−ν²))·(Qν·e^ν − Qμ·e^μ·ν²/μ² − ((μ²−ν²)/μ²)·Y0)` and
/// `e1 ≤ (Eν·Qν·e^ν − 0.5·Y0)/(Y1_lower·ν)`, both clamped to [0, 1].
pub fn decoy_bounds<T: Real>(inputs: &DecoyInputs<T>) -> Result<DecoyBounds<T>> {
    let DecoyInputs { mu, nu, q_mu, q_nu, e_nu, y0 } = *inputs;
    if !(nu > T::zero() && nu < mu) {
        return Err(Error::invalid("nu", format!("need 0 < nu < mu, got nu={nu}, mu={mu}")));
    }
    for (name, v) in [("q_mu", q_mu), ("q_nu", q_nu)] {
        if !(v > T::zero() && v < T::one()) {
            return Err(Error::invalid(name, format!("gain must lie in (0, 1), got {v}")));
        }
    }
    if !(y0 >= T::zero() && y0 < T::one()) {
        return Err(Error::invalid("y0", format!("must lie in [0, 1), got {y0}")));
    }
    if !(e_nu >= T::zero() && e_nu <= T::one()) {
        return Err(Error::invalid("e_nu", format!("must lie in [0, 1], got {e_nu}")));
    }

    let mu2 = mu * mu;
    let nu2 = nu * nu;
    let y1 = mu / (mu * nu - nu2)
        * (q_nu * nu.exp() - q_mu * mu.exp() * nu2 / mu2 - (mu2 - nu2) / mu2 * y0);
    if !(y1 > T::zero()) {
        return Err(Error::AbortedEstimation {
            y1_lower: y1.as_f64(),
        });
    }
    let y1_lower = y1.min(T::one());
    let e1 = (e_nu * q_nu * nu.exp() - T::of(0.5) * y0) / (y1_lower * nu);
    let e1_upper = e1.max(T::zero()).min(T::one());
    Ok(DecoyBounds { y1_lower, e1_upper })
}

/// Runs the estimator per basis on a tally: the yield bound from the Z
/// cells, the phase error bound from the X cells (each basis against its
/// own yield, since the receiver paths differ in loss).
pub fn decoy_bounds_from_tally<T: Real>(
    tally: &DetectionTally,
    config: &ProtocolConfig<T>,
) -> Result<DecoyBounds<T>> {
    config.validate()?;
    tally.validate()?;
    let inputs_for = |basis: Basis| -> Result<DecoyInputs<T>> {
        let need = |class: IntensityClass, what: &str| -> Result<T> {
            tally.gain(class, basis).ok_or_else(|| {
                Error::invalid(
                    "tally",
                    format!("no sent {what} symbols in basis {}", basis.label()),
                )
            })
        };
        Ok(DecoyInputs {
            mu: config.class_intensity(IntensityClass::Signal),
            nu: config.class_intensity(IntensityClass::Decoy),
            q_mu: need(IntensityClass::Signal, "signal")?,
            q_nu: need(IntensityClass::Decoy, "decoy")?,
            e_nu: tally.qber(IntensityClass::Decoy, basis).unwrap_or_else(T::zero),
            y0: need(IntensityClass::Vacuum, "vacuum")?,
        })
    };
    let z = decoy_bounds(&inputs_for(Basis::Z)?)?;
    let x = decoy_bounds(&inputs_for(Basis::X)?)?;
    Ok(DecoyBounds {
        y1_lower: z.y1_lower,
        e1_upper: x.e1_upper,
    })
}

/// Asymptotic key-rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkrResult<T> {
    pub skr_bits_per_s: T,
    pub q_sift: T,
    pub q_mu: T,
    pub e_mu: T,
    pub y1_lower: T,
    pub e1_upper: T,
    pub q1_lower: T,
}

impl<T: Real> SkrResult<T> {
    /// Writes `key,value` lines in a fixed order.
    pub fn write_key_value<W: Write>(&self, mut out: W) -> Result<()> {
        for (k, v) in [
            ("skr_bits_per_s", self.skr_bits_per_s),
            ("q_sift", self.q_sift),
            ("q_mu", self.q_mu),
            ("e_mu", self.e_mu),
            ("y1_lower", self.y1_lower),
            ("e1_upper", self.e1_upper),
            ("q1_lower", self.q1_lower),
        ] {
            writeln!(out, "{k},{v}")?;
        }
        Ok(())
    }
}

/// Asymptotic vacuum+weak decoy key rate:
/// `skr = clock · p_signal · q_sift · max(0, Q1·(1 − h2(e1)) − f·Qμ·h2(Eμ))`
/// with `Q1 = Y1_lower·μ·e^{−μ}` and `q_sift = z_basis_probability²`.
///
/// Error arguments above 0.5 clamp to 0.5 before the entropy terms, keeping
/// the rate monotone over the whole [0, 1] input range.
pub fn secure_key_rate<T: Real>(
    q_mu: T,
    e_mu: T,
    y1_lower: T,
    e1_upper: T,
    config: &ProtocolConfig<T>,
    clock_ghz: T,
    ec_efficiency: T,
) -> Result<SkrResult<T>> {
    config.validate()?;
    if !(ec_efficiency >= T::one()) {
        return Err(Error::invalid(
            "ec_efficiency",
            format!("must be >= 1, got {ec_efficiency}"),
        ));
    }
    if !(clock_ghz > T::zero()) {
        return Err(Error::invalid("clock_ghz", format!("must be > 0, got {clock_ghz}")));
    }
    for (name, v) in [
        ("q_mu", q_mu),
        ("e_mu", e_mu),
        ("y1_lower", y1_lower),
        ("e1_upper", e1_upper),
    ] {
        if !(v >= T::zero() && v <= T::one()) {
            return Err(Error::invalid(name, format!("must lie in [0, 1], got {v}")));
        }
    }

    let half = T::of(0.5);
    let mu = config.signal_intensity;
    let q1_lower = y1_lower * mu * (-mu).exp();
    let h_phase = binary_entropy(e1_upper.min(half))?;
    let h_bit = binary_entropy(e_mu.min(half))?;
    let raw = q1_lower * (T::one() - h_phase) - ec_efficiency * q_mu * h_bit;
    let q_sift = config.z_basis_probability * config.z_basis_probability;
    let p_signal = config.intensity_probabilities[0];
    let skr = clock_ghz * T::of(1e9) * p_signal * q_sift * raw.max(T::zero());
    Ok(SkrResult {
        skr_bits_per_s: skr,
        q_sift,
        q_mu,
        e_mu,
        y1_lower,
        e1_upper,
        q1_lower,
    })
}

/// Full pipeline from a sift tally: gains and QBER from the Z signal cells,
/// decoy bounds per basis, then the key rate.
pub fn skr_from_tally<T: Real>(
    tally: &DetectionTally,
    config: &ProtocolConfig<T>,
    clock_ghz: T,
    ec_efficiency: T,
) -> Result<SkrResult<T>> {
    let bounds = decoy_bounds_from_tally(tally, config)?;
    let q_mu = tally
        .gain(IntensityClass::Signal, Basis::Z)
        .ok_or_else(|| Error::invalid("tally", "no sent signal symbols in basis Z"))?;
    let e_mu = tally
        .qber(IntensityClass::Signal, Basis::Z)
        .unwrap_or_else(T::zero);
    secure_key_rate(
        q_mu,
        e_mu,
        bounds.y1_lower,
        bounds.e1_upper,
        config,
        clock_ghz,
        ec_efficiency,
    )
}

/// Same pipeline from analytic link rates, with expected values in place of
/// counts.
pub fn skr_from_rates<T: Real>(
    rates: &LinkRates<T>,
    config: &ProtocolConfig<T>,
    clock_ghz: T,
    ec_efficiency: T,
) -> Result<SkrResult<T>> {
    config.validate()?;
    let inputs_for = |basis: Basis| DecoyInputs {
        mu: config.class_intensity(IntensityClass::Signal),
        nu: config.class_intensity(IntensityClass::Decoy),
        q_mu: rates.get(IntensityClass::Signal, basis).gain,
        q_nu: rates.get(IntensityClass::Decoy, basis).gain,
        e_nu: rates.get(IntensityClass::Decoy, basis).qber,
        y0: rates.get(IntensityClass::Vacuum, basis).gain,
    };
    let z = decoy_bounds(&inputs_for(Basis::Z))?;
    let x = decoy_bounds(&inputs_for(Basis::X))?;
    let signal = rates.get(IntensityClass::Signal, Basis::Z);
    secure_key_rate(
        signal.gain,
        signal.qber,
        z.y1_lower,
        x.e1_upper,
        config,
        clock_ghz,
        ec_efficiency,
    )
}
