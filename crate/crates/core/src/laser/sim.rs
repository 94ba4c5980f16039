//! Rate-equation integrator.
//!
//! State per run: complex field `E` of the injected mode (rotating frame of
//! the injection), photon numbers `S_m` of the remaining modes, and carrier
//! density `N`:
//!
//! ```text
//! dE/dt  = ½(G_inj − 1/τ_p)E + i·[½α(Ĝ_inj − 1/τ_p) − Δω]E + κ·A_inj·e^{iφ} + F_E
//! dS_m/dt = (G_m − 1/τ_p)S_m + β·R_sp·L_m + F_m
//! dN/dt  = I(t)/(qV) − N/τ_n − (1/V)·Σ G_m S_m
//! G_m    = Γ v_g σ_g (N − N_tr) L(λ_m) / (1 + ε S_tot)
//! ```
//!
//! `Ĝ_inj` is the uncompressed carrier gain: the α term tracks the
//! carrier-induced index, so gain compression converts intensity into
//! power-dependent chirp.
//!
//! `A_inj = √(P_inj τ_p / hν)` expresses the seed power as an intracavity
//! photon-number amplitude, `Δω` is the injection-to-mode detuning, and
//! `R_sp = N V / τ_n` is the total spontaneous rate. Drift integrates with
//! fixed-step RK4; the Langevin terms are added per step as zero-mean
//! Gaussian increments (Euler-Maruyama), variance tied to the spontaneous
//! rate into each mode. Photon numbers are clamped nonnegative after each
//! step.

use super::{DriveSignal, FieldTrace, InjectionParams, LaserParams};
use crate::error::{Error, Result};
use crate::float::{photon_energy_j, Real};
use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Integrator controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions<T> {
    /// Integration step, ps.
    pub dt_ps: T,
    /// Record every n-th step.
    pub record_stride: usize,
    /// Discard this initial span before recording, ps. Should be a multiple
    /// of the drive period so recorded pulse windows stay aligned.
    pub settle_ps: T,
}

impl<T: Real> Default for SimOptions<T> {
    fn default() -> Self {
        SimOptions {
            dt_ps: T::of(0.2),
            record_stride: 5,
            settle_ps: T::zero(),
        }
    }
}

/// Integrates the rate equations with default options.
pub fn simulate<T: Real>(
    params: &LaserParams<T>,
    drive: &DriveSignal<T>,
    injection: &InjectionParams<T>,
    seed: u64,
) -> Result<FieldTrace<T>> {
    simulate_with(params, drive, injection, seed, &SimOptions::default())
}

/// Integrates the rate equations. Deterministic given `seed`; identical
/// inputs produce bit-identical traces.
pub fn simulate_with<T: Real>(
    params: &LaserParams<T>,
    drive: &DriveSignal<T>,
    injection: &InjectionParams<T>,
    seed: u64,
    options: &SimOptions<T>,
) -> Result<FieldTrace<T>> {
    params.validate()?;
    injection.validate()?;
    drive.validate()?;
    if drive.duration_ps() < T::of(1000.0) {
        return Err(Error::invalid(
            "drive",
            format!("must cover >= 1 ns, got {} ps", drive.duration_ps()),
        ));
    }
    if drive.sample_interval_ps > T::one() {
        return Err(Error::invalid(
            "drive.sample_interval_ps",
            format!("must be <= 1 ps, got {}", drive.sample_interval_ps),
        ));
    }
    if !(options.dt_ps > T::zero()) || options.record_stride == 0 {
        return Err(Error::invalid("sim options", "dt_ps and record_stride must be positive"));
    }

    let engine = Engine::new(params, injection);
    let dt = options.dt_ps;
    let n_steps = (drive.duration_ps() / dt).floor().as_f64() as usize;
    let settle_steps = (options.settle_ps / dt).round().as_f64() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let ns = engine.side_envelope.len();
    let dim = 3 + ns;
    let mut y = vec![T::zero(); dim];
    y[dim - 1] = params.transparency_carrier_density_per_m3;
    let mut k1 = vec![T::zero(); dim];
    let mut k2 = vec![T::zero(); dim];
    let mut k3 = vec![T::zero(); dim];
    let mut k4 = vec![T::zero(); dim];
    let mut tmp = vec![T::zero(); dim];

    let capacity = (n_steps.saturating_sub(settle_steps)) / options.record_stride + 1;
    let mut time_ps = Vec::with_capacity(capacity);
    let mut field = Vec::with_capacity(capacity);
    let mut carrier = Vec::with_capacity(capacity);
    let mut side_cols: Vec<Vec<T>> = (0..ns).map(|_| Vec::with_capacity(capacity)).collect();

    let half = T::of(0.5);
    let sixth = T::of(1.0 / 6.0);
    let two = T::of(2.0);
    for step in 0..=n_steps {
        let t = T::from_usize(step).unwrap() * dt;
        if step >= settle_steps && (step - settle_steps) % options.record_stride == 0 {
            time_ps.push(t);
            field.push(Complex::new(y[0], y[1]));
            carrier.push(y[dim - 1]);
            for (m, col) in side_cols.iter_mut().enumerate() {
                col.push(y[2 + m]);
            }
        }
        if step == n_steps {
            break;
        }

        engine.deriv(drive, t, &y, &mut k1);
        for i in 0..dim {
            tmp[i] = y[i] + half * dt * k1[i];
        }
        engine.deriv(drive, t + half * dt, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = y[i] + half * dt * k2[i];
        }
        engine.deriv(drive, t + half * dt, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = y[i] + dt * k3[i];
        }
        engine.deriv(drive, t + dt, &tmp, &mut k4);
        for i in 0..dim {
            y[i] += dt * sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }

        // Euler-Maruyama noise, then positivity clamps.
        let n_now = y[dim - 1];
        let spont_total = engine.spont_rate(n_now);
        let sigma_quad = (engine.beta * engine.env_inj * spont_total * dt * half).sqrt();
        y[0] += sigma_quad * T::standard_normal(&mut rng);
        y[1] += sigma_quad * T::standard_normal(&mut rng);
        for m in 0..ns {
            let s = y[2 + m];
            if s > T::zero() {
                let sigma = (two * engine.beta * engine.side_envelope[m] * spont_total * s * dt)
                    .sqrt();
                y[2 + m] += sigma * T::standard_normal(&mut rng);
            }
            y[2 + m] = y[2 + m].max(T::zero());
        }

        if !y[0].is_finite() || !y[1].is_finite() || !y[dim - 1].is_finite() {
            return Err(Error::NumericalInstability {
                step,
                time_ps: (t + dt).as_f64(),
            });
        }
    }

    Ok(FieldTrace {
        time_ps,
        field,
        side_modes: side_cols,
        side_mode_wavelengths_nm: engine.side_wavelengths_nm,
        injected_wavelength_nm: injection.wavelength_nm,
        carrier_per_m3: carrier,
        rng_seed: seed,
    })
}

/// Precomputed per-run coefficients, all rates in 1/ps.
struct Engine<T> {
    gain_coeff: T,
    sat_eps: T,
    n_tr: T,
    gamma_p: T,
    pump_coeff: T,
    inv_tau_n: T,
    carrier_drain: T,
    spont_coeff: T,
    beta: T,
    env_inj: T,
    side_envelope: Vec<T>,
    side_wavelengths_nm: Vec<T>,
    inj_re: T,
    inj_im: T,
    detune: T,
    alpha: T,
}

impl<T: Real> Engine<T> {
    fn new(params: &LaserParams<T>, injection: &InjectionParams<T>) -> Self {
        let modes = params.mode_wavelengths_nm();
        let inj_idx = params.nearest_mode_index(injection.wavelength_nm);
        let mut side_envelope = Vec::with_capacity(modes.len() - 1);
        let mut side_wavelengths_nm = Vec::with_capacity(modes.len() - 1);
        for (i, lambda) in modes.iter().enumerate() {
            if i != inj_idx {
                side_envelope.push(params.gain_envelope(*lambda));
                side_wavelengths_nm.push(*lambda);
            }
        }

        let tau_p_ps = params.photon_lifetime_ps;
        let q = params.elementary_charge_c;
        let vol = params.active_volume_m3;
        let tau_n_ps = params.carrier_lifetime_ns * T::of(1e3);

        // κ A_inj e^{iφ} in photons^½/ps.
        let power_w = injection.power_uw * T::of(1e-6);
        let photons = power_w * tau_p_ps * T::of(1e-12)
            / photon_energy_j(injection.wavelength_nm);
        let amp = photons.max(T::zero()).sqrt();
        let kappa_ps = injection.coupling_rate_per_ns * T::of(1e-3);
        let drive_amp = kappa_ps * amp;

        // Rotating frame of the injection: detuning to the nearest cavity mode.
        let c_nm_ghz = T::of(crate::float::SPEED_OF_LIGHT_M_S);
        let f_inj_ghz = c_nm_ghz / injection.wavelength_nm;
        let f_mode_ghz = c_nm_ghz / modes[inj_idx];
        let detune = (f_inj_ghz - f_mode_ghz) * T::of(2e-3) * T::PI();

        Engine {
            gain_coeff: params.confinement
                * params.group_velocity_m_per_s
                * params.differential_gain_m2
                * T::of(1e-12),
            sat_eps: params.gain_compression,
            n_tr: params.transparency_carrier_density_per_m3,
            gamma_p: T::one() / tau_p_ps,
            pump_coeff: T::of(1e-15) / (q * vol),
            inv_tau_n: T::one() / tau_n_ps,
            carrier_drain: T::one() / vol,
            spont_coeff: vol / tau_n_ps,
            beta: params.spont_emission_fraction,
            env_inj: params.gain_envelope(modes[inj_idx]),
            side_envelope,
            side_wavelengths_nm,
            inj_re: drive_amp * injection.phase_rad.cos(),
            inj_im: drive_amp * injection.phase_rad.sin(),
            detune,
            alpha: params.linewidth_enhancement,
        }
    }

    /// Total spontaneous emission rate at carrier density `n`, photons/ps.
    #[inline]
    fn spont_rate(&self, n: T) -> T {
        self.spont_coeff * n.max(T::zero())
    }

    fn deriv(&self, drive: &DriveSignal<T>, t: T, y: &[T], dy: &mut [T]) {
        let ns = self.side_envelope.len();
        let e_re = y[0];
        let e_im = y[1];
        let n = y[ns + 2];
        let e_sq = e_re * e_re + e_im * e_im;

        let mut s_tot = e_sq;
        for m in 0..ns {
            s_tot += y[2 + m];
        }
        let g_carrier = self.gain_coeff * (n - self.n_tr);
        let g_n = g_carrier / (T::one() + self.sat_eps * s_tot);
        let spont = self.beta * self.spont_rate(n);

        // Amplitude follows the compressed gain; the α chirp follows the
        // carrier-index gain, so compression appears as power-dependent
        // (adiabatic) chirp.
        let g_inj = g_n * self.env_inj;
        let re_rate = T::of(0.5) * (g_inj - self.gamma_p);
        let im_rate = T::of(0.5) * self.alpha * (g_carrier * self.env_inj - self.gamma_p)
            - self.detune;
        dy[0] = re_rate * e_re - im_rate * e_im + self.inj_re;
        dy[1] = re_rate * e_im + im_rate * e_re + self.inj_im;

        let mut stim = g_inj * e_sq;
        for m in 0..ns {
            let env = self.side_envelope[m];
            let g_m = g_n * env;
            let s = y[2 + m];
            dy[2 + m] = (g_m - self.gamma_p) * s + spont * env;
            stim += g_m * s;
        }

        dy[ns + 2] = self.pump_coeff * drive.current_at(t) - n * self.inv_tau_n
            - self.carrier_drain * stim;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_params() -> LaserParams<f64> {
        let mut p = LaserParams::default();
        p.mode_count = 11;
        p
    }

    #[test]
    fn test_simulation_is_deterministic() {
        let params = small_params();
        let drive = DriveSignal::gain_switch(14.8, 28.0, 8.0, 2.0, 0.35, 25.0, 4, 0.5);
        let injection = InjectionParams::default();
        let a = simulate(&params, &drive, &injection, 77).unwrap();
        let b = simulate(&params, &drive, &injection, 77).unwrap();
        assert_eq!(a.time_ps, b.time_ps);
        assert_eq!(a.field, b.field);
        assert_eq!(a.side_modes, b.side_modes);
        assert_eq!(a.carrier_per_m3, b.carrier_per_m3);
    }

    #[test]
    fn test_different_seeds_differ() {
        let params = small_params();
        let drive = DriveSignal::gain_switch(14.8, 28.0, 8.0, 2.0, 0.35, 25.0, 4, 0.5);
        let injection = InjectionParams {
            power_uw: 0.0,
            ..InjectionParams::default()
        };
        let a = simulate(&params, &drive, &injection, 1).unwrap();
        let b = simulate(&params, &drive, &injection, 2).unwrap();
        assert_ne!(a.field, b.field);
    }

    #[test]
    fn test_photon_numbers_stay_nonnegative() {
        let params = small_params();
        let drive = DriveSignal::gain_switch(14.8, 28.0, 8.0, 2.0, 0.35, 25.0, 6, 0.5);
        let injection = InjectionParams {
            power_uw: 0.0,
            ..InjectionParams::default()
        };
        let trace = simulate(&params, &drive, &injection, 3).unwrap();
        for s in &trace.side_modes {
            assert!(s.iter().all(|v| *v >= 0.0));
        }
        for e in &trace.field {
            assert!(e.norm_sqr() >= 0.0);
        }
    }

    #[test]
    fn test_short_drive_rejected() {
        let params = small_params();
        let drive = DriveSignal::constant(14.8, 500.0, 0.5);
        let injection = InjectionParams::default();
        assert!(simulate(&params, &drive, &injection, 0).is_err());
    }

    #[test]
    fn test_coarse_drive_sampling_rejected() {
        let params = small_params();
        let mut drive = DriveSignal::constant(14.8, 2000.0, 0.5);
        drive.sample_interval_ps = 2.0;
        let injection = InjectionParams::default();
        assert!(simulate(&params, &drive, &injection, 0).is_err());
    }

    #[test]
    fn test_settle_window_is_discarded() {
        let params = small_params();
        let drive = DriveSignal::constant(20.0, 3000.0, 0.5);
        let injection = InjectionParams::default();
        let opts = SimOptions {
            settle_ps: 1000.0,
            ..SimOptions::default()
        };
        let trace = simulate_with(&params, &drive, &injection, 5, &opts).unwrap();
        assert!(trace.time_ps[0] >= 1000.0 - 1e-9);
        assert_eq!(trace.side_modes.len(), params.mode_count - 1);
    }

    #[test]
    fn test_trace_sequences_share_length() {
        let params = small_params();
        let drive = DriveSignal::constant(18.0, 1500.0, 0.5);
        let injection = InjectionParams::default();
        let trace = simulate(&params, &drive, &injection, 5).unwrap();
        assert_eq!(trace.field.len(), trace.time_ps.len());
        assert_eq!(trace.carrier_per_m3.len(), trace.time_ps.len());
        for s in &trace.side_modes {
            assert_eq!(s.len(), trace.time_ps.len());
        }
    }
}
