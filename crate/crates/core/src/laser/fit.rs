//! Least-squares Gaussian pulse fitting.

use crate::error::{Error, Result};
use crate::float::Real;

/// Converged fit of `A·exp(−(t−t₀)²/(2s²)) + c` to an intensity trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianFit<T> {
    pub amplitude: T,
    pub center_ps: T,
    pub sigma_ps: T,
    pub offset: T,
    /// Full width at half maximum, `2·√(2 ln 2)·|s|`, ps.
    pub fwhm_ps: T,
    /// Root-mean-square residual of the converged fit.
    pub residual_rms: T,
    pub iterations: usize,
}

const MAX_ITERATIONS: usize = 200;

/// Fits a Gaussian to `(time_ps, intensity)` by Levenberg-Marquardt and
/// returns the fitted pulse width. The trace must contain a single dominant
/// peak; flat or degenerate input fails with the achieved residual.
pub fn fit_gaussian_fwhm<T: Real>(intensity: &[T], time_ps: &[T]) -> Result<GaussianFit<T>> {
    if intensity.len() != time_ps.len() || intensity.len() < 5 {
        return Err(Error::InsufficientData {
            required: 5,
            actual: intensity.len().min(time_ps.len()),
        });
    }
    let n = intensity.len();
    let (mut peak_idx, mut y_max, mut y_min) = (0, intensity[0], intensity[0]);
    for (i, y) in intensity.iter().enumerate() {
        if *y > y_max {
            y_max = *y;
            peak_idx = i;
        }
        y_min = y_min.min(*y);
    }
    if !(y_max > y_min) {
        return Err(Error::FitFailure {
            iterations: 0,
            residual: 0.0,
        });
    }

    // Initial guess: peak location, half-max crossing width, data floor.
    let half_level = y_min + (y_max - y_min) * T::of(0.5);
    let mut left = peak_idx;
    while left > 0 && intensity[left] > half_level {
        left -= 1;
    }
    let mut right = peak_idx;
    while right + 1 < n && intensity[right] > half_level {
        right += 1;
    }
    let span = (time_ps[right] - time_ps[left]).abs();
    let fwhm_to_sigma = T::of(2.0) * (T::of(2.0) * T::of(2.0).ln()).sqrt();
    let sigma0 = if span > T::zero() {
        span / fwhm_to_sigma
    } else {
        (time_ps[n - 1] - time_ps[0]).abs() / T::of(10.0)
    };
    let mut p = [y_max - y_min, time_ps[peak_idx], sigma0, y_min];

    let model = |p: &[T; 4], t: T| {
        let s = p[2];
        let d = t - p[1];
        p[0] * (-d * d / (T::of(2.0) * s * s)).exp() + p[3]
    };
    let chi2 = |p: &[T; 4]| {
        let mut acc = T::zero();
        for i in 0..n {
            let r = intensity[i] - model(p, time_ps[i]);
            acc += r * r;
        }
        acc
    };

    let mut lambda = T::of(1e-3);
    let mut cost = chi2(&p);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // Normal equations JᵀJ and Jᵀr for the 4-parameter model.
        let mut jtj = [[T::zero(); 4]; 4];
        let mut jtr = [T::zero(); 4];
        for i in 0..n {
            let t = time_ps[i];
            let d = t - p[1];
            let s = p[2];
            let e = (-d * d / (T::of(2.0) * s * s)).exp();
            let j = [
                e,
                p[0] * e * d / (s * s),
                p[0] * e * d * d / (s * s * s),
                T::one(),
            ];
            let r = intensity[i] - (p[0] * e + p[3]);
            for a in 0..4 {
                jtr[a] += j[a] * r;
                for b in 0..4 {
                    jtj[a][b] += j[a] * j[b];
                }
            }
        }
        let mut damped = jtj;
        for a in 0..4 {
            damped[a][a] += lambda * jtj[a][a].max(T::of(1e-30));
        }
        let Some(delta) = solve4(damped, jtr) else {
            lambda *= T::of(10.0);
            continue;
        };
        let trial = [p[0] + delta[0], p[1] + delta[1], p[2] + delta[2], p[3] + delta[3]];
        let trial_cost = chi2(&trial);
        if trial_cost.is_finite() && trial_cost < cost {
            let rel_step = delta
                .iter()
                .zip(p.iter())
                .map(|(d, v)| (*d / v.abs().max(T::of(1e-30))).abs())
                .fold(T::zero(), T::max);
            let rel_improvement = (cost - trial_cost) / cost.max(T::of(1e-300));
            p = trial;
            cost = trial_cost;
            lambda = (lambda * T::of(0.1)).max(T::of(1e-12));
            if rel_step < T::of(1e-10) || rel_improvement < T::of(1e-14) {
                converged = true;
                break;
            }
        } else {
            lambda *= T::of(10.0);
            if lambda > T::of(1e12) {
                break;
            }
        }
    }

    let residual_rms = (cost / T::from_usize(n).unwrap()).sqrt();
    let data_scale = (y_max - y_min).abs();
    // Accept exact fits that hit machine precision before the step test.
    if !converged && residual_rms > data_scale * T::of(1e-12) {
        return Err(Error::FitFailure {
            iterations,
            residual: residual_rms.as_f64(),
        });
    }
    if !p[2].is_finite() || p[2] == T::zero() || !(p[0] > T::zero()) {
        return Err(Error::FitFailure {
            iterations,
            residual: residual_rms.as_f64(),
        });
    }
    Ok(GaussianFit {
        amplitude: p[0],
        center_ps: p[1],
        sigma_ps: p[2].abs(),
        offset: p[3],
        fwhm_ps: fwhm_to_sigma * p[2].abs(),
        residual_rms,
        iterations,
    })
}

/// Solves a 4×4 system by Gaussian elimination with partial pivoting.
fn solve4<T: Real>(mut a: [[T; 4]; 4], mut b: [T; 4]) -> Option<[T; 4]> {
    for col in 0..4 {
        let mut pivot = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[pivot][col].abs() {
                pivot = row;
            }
        }
        if a[pivot][col].abs() < T::of(1e-300) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for k in col..4 {
                let upper = a[col][k];
                a[row][k] -= f * upper;
            }
            let upper_b = b[col];
            b[row] -= f * upper_b;
        }
    }
    let mut x = [T::zero(); 4];
    for col in (0..4).rev() {
        let mut acc = b[col];
        for k in col + 1..4 {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    if x.iter().all(|v| v.is_finite()) {
        Some(x)
    } else {
        None
    }
}
