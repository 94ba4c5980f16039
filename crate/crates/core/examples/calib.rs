//! Scratch calibration harness: prints transmitter observables at the key
//! operating points so model constants can be tuned by hand.

use std::time::Instant;

use wtqkd::harness::{bridge_trace, bridge_transmitter, run_attenuation_sweep, run_injection_sweep};
use wtqkd::laser::{extinction_ratio, mode_suppression_ratio, optical_spectrum, PulseHistogram};
use wtqkd::{ExperimentConfig64, FieldTrace};

fn pulse_fwhm_ps(trace: &FieldTrace<f64>, clock_ghz: f64) -> (f64, usize) {
    let period = 1000.0 / clock_ghz;
    let t0 = trace.time_ps[0];
    let n = trace.len();
    let intensity: Vec<f64> = (0..n).map(|i| trace.total_intensity(i)).collect();
    let global_max = intensity.iter().cloned().fold(0.0, f64::max);
    let mut widths = Vec::new();
    let mut k = 0;
    loop {
        let lo = t0 + k as f64 * period;
        let hi = lo + period;
        let idx: Vec<usize> = (0..n)
            .filter(|&i| trace.time_ps[i] >= lo && trace.time_ps[i] < hi)
            .collect();
        if idx.len() < 8 {
            break;
        }
        let peak_i = *idx
            .iter()
            .max_by(|&&a, &&b| intensity[a].partial_cmp(&intensity[b]).unwrap())
            .unwrap();
        let peak = intensity[peak_i];
        if peak < 0.2 * global_max {
            k += 1;
            continue;
        }
        let half = peak / 2.0;
        // Walk left/right from the peak to the half crossings.
        let mut l = peak_i;
        while l > idx[0] && intensity[l] > half {
            l -= 1;
        }
        let mut r = peak_i;
        while r < *idx.last().unwrap() && intensity[r] > half {
            r += 1;
        }
        if intensity[l] <= half && intensity[r] <= half && l < peak_i && r > peak_i {
            let tl = trace.time_ps[l]
                + (half - intensity[l]) / (intensity[l + 1] - intensity[l])
                    * (trace.time_ps[l + 1] - trace.time_ps[l]);
            let tr = trace.time_ps[r - 1]
                + (intensity[r - 1] - half) / (intensity[r - 1] - intensity[r])
                    * (trace.time_ps[r] - trace.time_ps[r - 1]);
            widths.push(tr - tl);
        }
        k += 1;
    }
    let mean = widths.iter().sum::<f64>() / widths.len().max(1) as f64;
    (mean, widths.len())
}

fn characterize(config: &ExperimentConfig64, power_uw: f64, label: &str) {
    let t = Instant::now();
    let wl = config.injection.wavelength_nm;
    let m = bridge_transmitter(config, power_uw, wl).unwrap();
    let trace = bridge_trace(config, power_uw, wl, config.sim.trace_periods).unwrap();
    let (fwhm, pulses) = pulse_fwhm_ps(&trace, config.drive.clock_ghz);
    let hist = PulseHistogram::from_trace(&trace, 5.0, 100_000).unwrap();
    let er = extinction_ratio(&hist).unwrap();
    let smsr = mode_suppression_ratio(&trace).unwrap();
    let spec = optical_spectrum(&trace).unwrap();
    let sfwhm = spec.envelope_fwhm_ghz(6.0);
    println!(
        "{label}: P={power_uw} uW | ER={:.2} dB (cens {}) bridgeER={:.2} | vis={:.4} locked={} | \
         FWHM={:.1} ps over {} pulses | SMSR={:.1} dB (cens {}) | specFWHM={:?} GHz | {:?}",
        er.value(),
        er.is_censored(),
        m.er_db,
        m.visibility,
        m.locked,
        fwhm,
        pulses,
        smsr.value(),
        smsr.is_censored(),
        sfwhm.map(|v| (v * 10.0).round() / 10.0),
        t.elapsed()
    );
}

fn main() {
    let mut config = ExperimentConfig64::default();
    let mut which: Vec<String> = Vec::new();
    for arg in std::env::args().skip(1) {
        if let Some((k, v)) = arg.split_once('=') {
            let x: f64 = v.parse().unwrap();
            match k {
                "alpha" => config.laser.linewidth_enhancement = x,
                "kappa" => config.injection.coupling_rate_per_ns = x,
                "high" => config.drive.high_ma = x,
                "low" => config.drive.low_ma = x,
                "duty" => config.drive.duty = x,
                "edge" => config.drive.edge_ps = x,
                "beta" => config.laser.spont_emission_fraction = x,
                "eps" => config.laser.gain_compression = x,
                "taup" => config.laser.photon_lifetime_ps = x,
                "dg" => config.laser.differential_gain_m2 = x,
                "vol" => config.laser.active_volume_m3 = x,
                "taun" => config.laser.carrier_lifetime_ns = x,
                "ith" => config.laser.threshold_current_ma = x,
                "wg" => config.laser.gain_envelope_width_nm = x,
                "ntr" => config.laser.transparency_carrier_density_per_m3 = x,
                "bridge" => config.sim.bridge_periods = x as usize,
                "periods" => config.sim.trace_periods = x as usize,
                "seed" => config.seed = x as u64,
                _ => panic!("unknown key {k}"),
            }
        } else {
            which.push(arg);
        }
    }
    let all = which.is_empty();

    if which.iter().any(|w| w.starts_with("phases")) {
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("phases@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let trace = bridge_trace(&config, power, wl, 40).unwrap();
        let phases = wtqkd::laser::pulse_phases(&trace, config.drive.clock_ghz);
        let energies = wtqkd::laser::pulse_energies(&trace, config.drive.clock_ghz);
        for (i, (p, e)) in phases.iter().zip(&energies).enumerate() {
            match p {
                Some(v) => println!("pulse {i:>3}: phase {v:+.3} rad, energy {e:.3e}"),
                None => println!("pulse {i:>3}: dark, energy {e:.3e}"),
            }
        }
        return;
    }

    if which.iter().any(|w| w.starts_with("visparts@")) {
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("visparts@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let trace = bridge_trace(&config, power, wl, config.sim.bridge_periods).unwrap();
        let mut injected = 0.0f64;
        let mut total = 0.0f64;
        for i in 0..trace.len() {
            injected += trace.field[i].norm_sqr();
            total += trace.total_intensity(i);
        }
        let share = injected / total;
        let phases = wtqkd::laser::pulse_phases(&trace, config.drive.clock_ghz);
        let mut sum = num_complex::Complex::new(0.0f64, 0.0);
        let mut pairs = 0usize;
        let mut worst = 0.0f64;
        for w in phases.windows(2) {
            if let (Some(a), Some(b)) = (w[0], w[1]) {
                let d = a - b;
                sum += num_complex::Complex::new(d.cos(), d.sin());
                pairs += 1;
                let wrapped = d.sin().atan2(d.cos()).abs();
                if wrapped > worst {
                    worst = wrapped;
                }
            }
        }
        let coherence = sum.norm() / pairs as f64;
        println!(
            "P={power} uW | share={share:.5} coherence={coherence:.5} (pairs {pairs}, worst |dphi| {worst:.3} rad) vis={:.5}",
            share * coherence
        );
        return;
    }

    if which.iter().any(|w| w.starts_with("spec@")) {
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("spec@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let trace = bridge_trace(&config, power, wl, config.sim.trace_periods).unwrap();
        let spec = optical_spectrum(&trace).unwrap();
        let df = spec.offset_ghz[1] - spec.offset_ghz[0];
        let w = (6.0 / df / 2.0).round() as usize;
        let n = spec.power.len();
        println!("offset_ghz,power");
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let hi = (i + w + 1).min(n);
            let sm: f64 = spec.power[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            if spec.offset_ghz[i].abs() < 150.0 {
                println!("{},{}", spec.offset_ghz[i], sm);
            }
        }
        return;
    }

    if which.iter().any(|w| w.starts_with("chirp@")) {
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("chirp@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let trace = bridge_trace(&config, power, wl, config.sim.trace_periods).unwrap();
        let n = trace.len();
        let dt = trace.time_ps[1] - trace.time_ps[0];
        let inten: Vec<f64> = trace.field.iter().map(|e| e.norm_sqr()).collect();
        let peak = inten.iter().cloned().fold(0.0, f64::max);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut acc = 0.0;
        let mut wsum = 0.0;
        for i in 1..n {
            if inten[i] < 0.1 * peak || inten[i - 1] < 0.1 * peak {
                continue;
            }
            let dphi = (trace.field[i] * trace.field[i - 1].conj()).arg();
            let f_ghz = dphi / (2.0 * std::f64::consts::PI * dt) * 1000.0;
            lo = lo.min(f_ghz);
            hi = hi.max(f_ghz);
            acc += f_ghz * inten[i];
            wsum += inten[i];
        }
        println!(
            "P={power} uW | inst freq over bright samples: min {lo:.1} GHz, max {hi:.1} GHz, \
             intensity-weighted mean {:.1} GHz",
            acc / wsum
        );
        return;
    }

    if which.iter().any(|w| w.starts_with("profile@")) {
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("profile@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let trace = bridge_trace(&config, power, wl, config.sim.trace_periods).unwrap();
        let n = trace.len();
        let dt = trace.time_ps[1] - trace.time_ps[0];
        let period = 1000.0 / config.drive.clock_ghz;
        let bins = (period / dt).round() as usize;
        let mut inten = vec![0.0; bins];
        let mut freq = vec![0.0; bins];
        let mut fw = vec![0.0; bins];
        for i in 1..n {
            let tau = (trace.time_ps[i] - trace.time_ps[0]) % period;
            let b = ((tau / dt).round() as usize) % bins;
            let w = trace.field[i].norm_sqr();
            inten[b] += w;
            let dphi = (trace.field[i] * trace.field[i - 1].conj()).arg();
            freq[b] += w * dphi / (2.0 * std::f64::consts::PI * dt) * 1000.0;
            fw[b] += w;
        }
        let pk = inten.iter().cloned().fold(0.0, f64::max);
        println!("tau_ps,intensity,freq_ghz");
        for b in 0..bins {
            println!(
                "{:.1},{:.4},{:.2}",
                b as f64 * dt,
                inten[b] / pk,
                if fw[b] > 0.0 { freq[b] / fw[b] } else { 0.0 }
            );
        }
        return;
    }

    if which.iter().any(|w| w.starts_with("randspec")) {
        use rand::{Rng, SeedableRng};
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("randspec@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let laser = config.laser.centered_on(wl);
        let mut injection = config.injection;
        injection.power_uw = power;
        injection.wavelength_nm = wl;
        let periods = config.sim.settle_periods + config.sim.trace_periods;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed ^ 0xabcd);
        let period = 1000.0 / config.drive.clock_ghz;
        let on = config.drive.duty * period;
        let edge = config.drive.edge_ps;
        let n = (period * periods as f64).ceil() as usize + 1;
        let bits: Vec<bool> = (0..periods).map(|_| rng.gen_bool(0.5)).collect();
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64;
                let k = ((t / period).floor() as usize).min(periods - 1);
                let tau = t - k as f64 * period;
                let g = if !bits[k] {
                    0.0
                } else if tau < edge {
                    0.5 * (1.0 - (std::f64::consts::PI * tau / edge).cos())
                } else if tau < on {
                    1.0
                } else if tau < on + edge {
                    0.5 * (1.0 + (std::f64::consts::PI * (tau - on) / edge).cos())
                } else {
                    0.0
                };
                config.drive.low_ma + (config.drive.high_ma - config.drive.low_ma) * g
                    - config.drive.dc_bias_ma
            })
            .collect();
        let drive = wtqkd::DriveSignal {
            dc_bias_ma: config.drive.dc_bias_ma,
            samples_ma: samples,
            sample_interval_ps: 1.0,
            pattern_description: "random gain switch".into(),
        };
        let options = wtqkd::SimOptions {
            dt_ps: config.sim.dt_ps,
            record_stride: config.sim.record_stride,
            settle_ps: config.sim.settle_periods as f64 * period,
        };
        let trace =
            wtqkd::simulate_with(&laser, &drive, &injection, config.seed, &options).unwrap();
        let spec = optical_spectrum(&trace).unwrap();
        let df = spec.offset_ghz[1] - spec.offset_ghz[0];
        let w = (6.0 / df / 2.0).round() as usize;
        let n = spec.power.len();
        println!("offset_ghz,power");
        for i in 0..n {
            let lo = i.saturating_sub(w);
            let hi = (i + w + 1).min(n);
            let sm: f64 = spec.power[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            if spec.offset_ghz[i].abs() < 150.0 {
                println!("{},{}", spec.offset_ghz[i], sm);
            }
        }
        return;
    }

    if which.iter().any(|w| w == "search") {
        let wl = config.injection.wavelength_nm;
        for beta in [3e-6, 4e-6, 5e-6] {
            for low in [8.0, 9.0, 10.0] {
                for high in [20.0, 22.0] {
                    for edge in [250.0] {
                        let mut c = config.clone();
                        c.laser.spont_emission_fraction = beta;
                        c.drive.low_ma = low;
                        c.drive.high_ma = high;
                        c.drive.edge_ps = edge;
                        let m0 = bridge_transmitter(&c, 0.0, wl).unwrap();
                        let ok0 = m0.er_db >= 27.5 && m0.er_db <= 32.5 && m0.visibility < 0.08;
                        for kappa in [130.0, 160.0] {
                            c.injection.coupling_rate_per_ns = kappa;
                            let trace = bridge_trace(&c, 80.0, wl, c.sim.trace_periods).unwrap();
                            let (fw, _) = pulse_fwhm_ps(&trace, c.drive.clock_ghz);
                            let smsr = mode_suppression_ratio(&trace).unwrap().value();
                            let spec = optical_spectrum(&trace)
                                .unwrap()
                                .envelope_fwhm_ghz(6.0)
                                .unwrap_or(f64::NAN);
                            let m = bridge_transmitter(&c, 80.0, wl).unwrap();
                            let ok80 = (57.0..=83.0).contains(&fw)
                                && smsr >= 30.5
                                && (20.5..=49.0).contains(&spec)
                                && m.visibility >= 0.9
                                && m.er_db < m0.er_db;
                            println!(
                                "{}{} b={beta:.0e} lo={low} hi={high} e={edge} k={kappa} | \
                                 er0={:.2} vis0={:.3} | fw={fw:.1} smsr={smsr:.1} spec={spec:.1} \
                                 vis={:.3} er={:.2}",
                                if ok0 { "A" } else { "-" },
                                if ok80 { "B" } else { "-" },
                                m0.er_db,
                                m0.visibility,
                                m.visibility,
                                m.er_db
                            );
                        }
                    }
                }
            }
        }
        return;
    }

    if which.iter().any(|w| w.starts_with("cw")) {
        let power: f64 = which
            .iter()
            .find_map(|w| w.strip_prefix("cw@"))
            .map(|s| s.parse().unwrap())
            .unwrap_or(80.0);
        let wl = config.injection.wavelength_nm;
        let laser = config.laser.centered_on(wl);
        let mut injection = config.injection;
        injection.power_uw = power;
        injection.wavelength_nm = wl;
        let period = 1000.0 / config.drive.clock_ghz;
        let periods = config.sim.settle_periods + config.sim.trace_periods;
        let drive = wtqkd::DriveSignal::constant(
            config.drive.dc_bias_ma,
            period * periods as f64,
            1.0,
        );
        let options = wtqkd::SimOptions {
            dt_ps: config.sim.dt_ps,
            record_stride: config.sim.record_stride,
            settle_ps: config.sim.settle_periods as f64 * period,
        };
        let trace =
            wtqkd::simulate_with(&laser, &drive, &injection, config.seed, &options).unwrap();
        let smsr = mode_suppression_ratio(&trace).unwrap();
        let mean: f64 =
            trace.field.iter().map(|e| e.norm_sqr()).sum::<f64>() / trace.len() as f64;
        println!(
            "CW dc={} mA P={power} uW | SMSR={:.1} dB (cens {}) | mean photons {mean:.3e}",
            config.drive.dc_bias_ma,
            smsr.value(),
            smsr.is_censored()
        );
        return;
    }

    if which.iter().any(|w| w == "pair") {
        for p in [0.0, 80.0] {
            characterize(&config, p, "pair");
        }
    }

    if which.iter().any(|w| w == "scan") {
        for p in [10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 50.0, 60.0, 80.0] {
            characterize(&config, p, "scan");
        }
    }

    if all || which.iter().any(|w| w == "points") {
        for p in [0.0, 10.0, 20.0, 40.0, 80.0, 160.0, 320.0] {
            characterize(&config, p, "point");
        }
    }

    if all || which.iter().any(|w| w == "injection") {
        let t = Instant::now();
        let rows = run_injection_sweep(&config).unwrap();
        println!("injection sweep in {:?}", t.elapsed());
        for r in &rows {
            println!(
                "  P={:>5} uW er={:.2} vis={:.4} e_z={:.5} e_x={:.5} qber={:.5} locked={}",
                r.variable, r.er_db, r.visibility, r.e_z, r.e_x, r.qber, r.locked
            );
        }
    }

    if all || which.iter().any(|w| w == "attenuation") {
        let t = Instant::now();
        let rows = run_attenuation_sweep(&config).unwrap();
        println!("attenuation sweep in {:?}", t.elapsed());
        for r in &rows {
            println!(
                "  att={:>5} dB qber={:.5} Qmu={:.6e} skr={:.4e}",
                r.variable, r.qber, r.q_mu, r.skr_bits_per_s
            );
        }
    }
}
