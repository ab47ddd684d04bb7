//! Rational polyphase resampling with a Kaiser-windowed sinc.

use std::f64::consts::PI;

use crate::{Error, Result};

const STOPBAND_DB: f64 = 80.0;
/// Passband edge as a fraction of the lower Nyquist frequency.
const PASSBAND_FRACTION: f64 = 0.9;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Zeroth-order modified Bessel function of the first kind.
fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

fn kaiser_beta(atten: f64) -> f64 {
    if atten > 50.0 {
        0.1102 * (atten - 8.7)
    } else if atten >= 21.0 {
        0.5842 * (atten - 21.0).powf(0.4) + 0.07886 * (atten - 21.0)
    } else {
        0.0
    }
}

/// Lowpass prototype at the upsampled rate. Returns odd-length taps.
fn design(up: u64, down: u64) -> Vec<f64> {
    let max_rate = up.max(down) as f64;
    // Normalised to the upsampled rate: cutoffs in cycles/sample.
    let stop = 0.5 / max_rate;
    let pass = PASSBAND_FRACTION * stop;
    let width = 2.0 * PI * (stop - pass);
    let mut n = ((STOPBAND_DB - 8.0) / (2.285 * width)).ceil() as usize + 1;
    if n.is_multiple_of(2) {
        n += 1;
    }
    let fc = 0.5 * (pass + stop);
    let beta = kaiser_beta(STOPBAND_DB);
    let mid = (n - 1) as f64 / 2.0;
    let norm = bessel_i0(beta);
    (0..n)
        .map(|i| {
            let m = i as f64 - mid;
            let sinc = if m == 0.0 {
                2.0 * fc
            } else {
                (2.0 * PI * fc * m).sin() / (PI * m)
            };
            let r = m / mid;
            sinc * bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / norm
        })
        .collect()
}

/// Resample `x` from `from` Hz to `to` Hz. The output is time-aligned with
/// the input and has length `ceil(len * to / from)`.
pub fn resample(x: &[f64], from: u32, to: u32) -> Result<Vec<f64>> {
    if from == 0 || to == 0 {
        return Err(Error::invalid("sample_rate", "rates must be positive"));
    }
    if from == to {
        return Ok(x.to_vec());
    }
    let g = gcd(from as u64, to as u64);
    let (up, down) = (to as u64 / g, from as u64 / g);
    if up > 1024 || down > 1024 {
        return Err(Error::invalid(
            "sample_rate",
            format!("ratio {to}/{from} reduces to {up}/{down}, too fine for polyphase"),
        ));
    }
    let h = design(up, down);
    let delay = (h.len() - 1) / 2;
    let (up, down) = (up as usize, down as usize);
    let out_len = (x.len() * up).div_ceil(down);
    let gain = up as f64;
    let out = (0..out_len)
        .map(|m| {
            // Position in the zero-stuffed signal, shifted by the filter delay.
            let n = m * down + delay;
            // Taps k with n - k = j * up for input samples j.
            let mut k = n % up;
            let mut acc = 0.0;
            while k < h.len() {
                let j = (n - k) / up;
                if j < x.len() {
                    acc += h[k] * x[j];
                }
                if n < k + up {
                    break;
                }
                k += up;
            }
            gain * acc
        })
        .collect();
    Ok(out)
}
