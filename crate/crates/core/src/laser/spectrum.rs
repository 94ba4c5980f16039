//! Optical power spectrum of the injected mode.

use super::FieldTrace;
use crate::error::{Error, Result};
use crate::float::{Real, SPEED_OF_LIGHT_M_S};
use rustfft::FftPlanner;

/// Discrete power spectrum of the injected-mode field plus delta-like lines
/// for the side modes.
///
/// `offset_ghz` is the frequency offset from the injected mode, ascending;
/// `wavelength_nm` is the same axis mapped to vacuum wavelength. Side modes
/// appear as one line each at their grid wavelength with their time-averaged
/// photon number as power.
#[derive(Debug, Clone)]
pub struct OpticalSpectrum<T> {
    pub offset_ghz: Vec<T>,
    pub wavelength_nm: Vec<T>,
    pub power: Vec<T>,
    pub mode_lines_nm: Vec<T>,
    pub mode_line_power: Vec<T>,
}

impl<T: Real> OpticalSpectrum<T> {
    /// Frequency offset of the strongest spectral bin, GHz.
    pub fn peak_offset_ghz(&self) -> T {
        let mut best = 0;
        for (i, p) in self.power.iter().enumerate() {
            if *p > self.power[best] {
                best = i;
            }
        }
        self.offset_ghz[best]
    }

    /// Full width at half maximum of the spectral envelope, GHz.
    ///
    /// The raw spectrum of a pulse train is a comb at the repetition rate;
    /// smoothing with a boxcar of `smooth_ghz` (at least the comb spacing)
    /// recovers the envelope an optical spectrum analyzer reports.
    pub fn envelope_fwhm_ghz(&self, smooth_ghz: T) -> Result<T> {
        if self.power.len() < 8 {
            return Err(Error::InsufficientData {
                required: 8,
                actual: self.power.len(),
            });
        }
        let df = self.offset_ghz[1] - self.offset_ghz[0];
        let half_w = ((smooth_ghz / df).as_f64() / 2.0).round() as usize;
        let n = self.power.len();
        let smoothed: Vec<T> = (0..n)
            .map(|i| {
                let lo = i.saturating_sub(half_w);
                let hi = (i + half_w + 1).min(n);
                self.power[lo..hi].iter().copied().sum::<T>()
                    / T::from_usize(hi - lo).unwrap()
            })
            .collect();
        let mut peak = 0;
        for (i, p) in smoothed.iter().enumerate() {
            if *p > smoothed[peak] {
                peak = i;
            }
        }
        let half_level = smoothed[peak] * T::of(0.5);
        // Outermost half-maximum crossings: ripple in a chirped envelope must
        // not truncate the width at an interior dip.
        let mut left = 0;
        while left < peak && smoothed[left + 1] <= half_level {
            left += 1;
        }
        let mut right = n - 1;
        while right > peak && smoothed[right - 1] <= half_level {
            right -= 1;
        }
        if smoothed[0] > half_level || smoothed[n - 1] > half_level {
            return Err(Error::InsufficientData {
                required: n + 1,
                actual: n,
            });
        }
        // Linear interpolation of the two half-maximum crossings.
        let t_l = (half_level - smoothed[left])
            / (smoothed[left + 1] - smoothed[left]).max(T::of(1e-300));
        let x_left = self.offset_ghz[left] + df * t_l;
        let t_r = (smoothed[right - 1] - half_level)
            / (smoothed[right - 1] - smoothed[right]).max(T::of(1e-300));
        let x_right = self.offset_ghz[right - 1] + df * t_r;
        Ok(x_right - x_left)
    }
}

/// Computes the two-sided power spectrum of the injected-mode field and
/// attaches side modes as delta-like lines at their grid wavelengths.
pub fn optical_spectrum<T: Real>(trace: &FieldTrace<T>) -> Result<OpticalSpectrum<T>> {
    let n = trace.len();
    if n < 16 {
        return Err(Error::InsufficientData {
            required: 16,
            actual: n,
        });
    }
    let dt_s = trace.dt_ps().as_f64() * 1e-12;
    let mut buf = trace.field.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // fftshift: negative offsets first, ascending axis.
    let df_ghz = T::of(1e-9 / (dt_s * n as f64));
    let half = n / 2;
    let norm = T::from_usize(n).unwrap();
    let mut offset_ghz = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i + half) % n;
        let signed = k as i64 - if k >= half { n as i64 } else { 0 };
        offset_ghz.push(T::from_i64(signed).unwrap() * df_ghz);
        power.push(buf[k].norm_sqr() / norm);
    }

    let f_inj_ghz = T::of(SPEED_OF_LIGHT_M_S) / trace.injected_wavelength_nm;
    let wavelength_nm = offset_ghz
        .iter()
        .map(|d| T::of(SPEED_OF_LIGHT_M_S) / (f_inj_ghz + *d))
        .collect();

    let samples = T::from_usize(n).unwrap();
    let mode_line_power = trace
        .side_modes
        .iter()
        .map(|s| s.iter().copied().sum::<T>() / samples)
        .collect();
    Ok(OpticalSpectrum {
        offset_ghz,
        wavelength_nm,
        power,
        mode_lines_nm: trace.side_mode_wavelengths_nm.clone(),
        mode_line_power,
    })
}
