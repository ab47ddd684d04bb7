//! Degradation stages and the probabilistic chain that composes them.

mod chain;
pub mod filters;
pub mod resample;

use std::fmt;

use num_complex::Complex64;
use rustfft::FftPlanner;

pub use chain::{provenance, AppliedStage, ChainEntry, DistortionChain, Family, Pools, StageSampler};
pub use filters::{butterworth, high_shelf, low_shelf, peak, Biquad, PassKind, SosFilter};

use crate::signal::Waveform;
use crate::{Error, Result};

/// Stage outputs are limited to this magnitude.
pub const GUARD_LIMIT: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum DistortionStage {
    /// `noise` indexes the noise pool; the clip is read circularly from `offset`.
    AdditiveNoise { snr_db: f64, noise: usize, offset: usize },
    RirConvolve { rir: usize },
    LowShelf { freq: f64, gain_db: f64 },
    HighShelf { freq: f64, gain_db: f64 },
    Peak { freq: f64, gain_db: f64, q: f64 },
    Lowpass { order: usize, cutoff: f64 },
    Highpass { order: usize, cutoff: f64 },
    BitDepth { bits: u32 },
    Clip { threshold: f64 },
    Gain { db: f64 },
    Resample { target_rate: u32 },
}

impl DistortionStage {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::AdditiveNoise { .. } => "additive_noise",
            Self::RirConvolve { .. } => "rir_convolve",
            Self::LowShelf { .. } => "low_shelf",
            Self::HighShelf { .. } => "high_shelf",
            Self::Peak { .. } => "peak",
            Self::Lowpass { .. } => "lowpass",
            Self::Highpass { .. } => "highpass",
            Self::BitDepth { .. } => "bit_depth",
            Self::Clip { .. } => "clip",
            Self::Gain { .. } => "gain",
            Self::Resample { .. } => "resample",
        }
    }

    pub fn validate(&self, sample_rate: u32) -> Result<()> {
        let nyquist = sample_rate as f64 / 2.0;
        let check_order = |order: usize| {
            if order < 2 || !order.is_multiple_of(2) {
                return Err(Error::invalid("order", format!("must be even and >= 2, got {order}")));
            }
            Ok(())
        };
        let check_freq = |name: &'static str, f: f64| {
            if !(f > 0.0 && f < nyquist) {
                return Err(Error::invalid(name, format!("{f} Hz must lie in (0, {nyquist}) Hz")));
            }
            Ok(())
        };
        match *self {
            Self::AdditiveNoise { snr_db, .. } if snr_db.is_nan() => {
                Err(Error::invalid("snr_db", "must not be NaN"))
            }
            Self::LowShelf { freq, .. } | Self::HighShelf { freq, .. } => check_freq("freq", freq),
            Self::Peak { freq, q, .. } => {
                check_freq("freq", freq)?;
                if !(q > 0.0) {
                    return Err(Error::invalid("q", "must be positive"));
                }
                Ok(())
            }
            Self::Lowpass { order, cutoff } | Self::Highpass { order, cutoff } => {
                check_order(order)?;
                check_freq("cutoff", cutoff)
            }
            Self::BitDepth { bits } if !(4..=16).contains(&bits) => {
                Err(Error::invalid("bits", format!("must lie in [4, 16], got {bits}")))
            }
            Self::Clip { threshold } if !(threshold > 0.0 && threshold <= 1.0) => {
                Err(Error::invalid("threshold", format!("must lie in (0, 1], got {threshold}")))
            }
            Self::Gain { db } if !db.is_finite() => Err(Error::invalid("db", "must be finite")),
            Self::Resample { target_rate: 0 } => Err(Error::invalid("target_rate", "must be positive")),
            _ => Ok(()),
        }
    }

    /// Apply the stage, drawing noise and RIRs from `pools`.
    pub fn apply(&self, w: &Waveform, pools: &Pools<'_>) -> Result<Waveform> {
        let fs = w.sample_rate();
        self.validate(fs)?;
        let fsf = fs as f64;
        let out = match *self {
            Self::AdditiveNoise { snr_db, noise, offset } => {
                let n = pools.noise.get(noise).ok_or(Error::EmptyPool("noise"))?;
                let aligned = tile_noise(n.samples(), w.len(), offset)?;
                add_noise_at_snr(w.samples(), &aligned, snr_db)?
            }
            Self::RirConvolve { rir } => {
                let r = pools.rir.get(rir).ok_or(Error::EmptyPool("rir"))?;
                rir_convolve(w.samples(), r.samples())?
            }
            Self::LowShelf { freq, gain_db } => low_shelf(freq, gain_db, fsf)?.apply(w.samples()),
            Self::HighShelf { freq, gain_db } => high_shelf(freq, gain_db, fsf)?.apply(w.samples()),
            Self::Peak { freq, gain_db, q } => peak(freq, gain_db, q, fsf)?.apply(w.samples()),
            Self::Lowpass { order, cutoff } => butterworth(order, cutoff, fsf, PassKind::Low)?.apply(w.samples()),
            Self::Highpass { order, cutoff } => butterworth(order, cutoff, fsf, PassKind::High)?.apply(w.samples()),
            Self::BitDepth { bits } => bit_depth_reduce(w.samples(), bits)?,
            Self::Clip { threshold } => clip(w.samples(), threshold)?,
            Self::Gain { db } => apply_gain(w.samples(), db),
            Self::Resample { target_rate } => {
                let down = resample::resample(w.samples(), fs, target_rate)?;
                let mut back = resample::resample(&down, target_rate, fs)?;
                back.resize(w.len(), 0.0);
                back
            }
        };
        if let Some(bad) = out.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("{} produced a non-finite sample at {bad}", self.kind())));
        }
        w.with_samples(out.into_iter().map(|v| v.clamp(-GUARD_LIMIT, GUARD_LIMIT)).collect())
    }
}

impl fmt::Display for DistortionStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t", self.kind())?;
        match self {
            Self::AdditiveNoise { snr_db, noise, offset } => {
                write!(f, "snr_db={snr_db:.3} noise={noise} offset={offset}")
            }
            Self::RirConvolve { rir } => write!(f, "rir={rir}"),
            Self::LowShelf { freq, gain_db } | Self::HighShelf { freq, gain_db } => {
                write!(f, "freq={freq:.2} gain_db={gain_db:.3}")
            }
            Self::Peak { freq, gain_db, q } => write!(f, "freq={freq:.2} gain_db={gain_db:.3} q={q:.3}"),
            Self::Lowpass { order, cutoff } | Self::Highpass { order, cutoff } => {
                write!(f, "order={order} cutoff={cutoff:.2}")
            }
            Self::BitDepth { bits } => write!(f, "bits={bits}"),
            Self::Clip { threshold } => write!(f, "threshold={threshold:.4}"),
            Self::Gain { db } => write!(f, "db={db:.3}"),
            Self::Resample { target_rate } => write!(f, "target_rate={target_rate}"),
        }
    }
}

fn power(x: &[f64]) -> f64 {
    if x.is_empty() {
        0.0
    } else {
        x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64
    }
}

/// Read `len` samples from `noise` circularly starting at `offset`.
pub fn tile_noise(noise: &[f64], len: usize, offset: usize) -> Result<Vec<f64>> {
    if noise.is_empty() {
        return Err(Error::invalid("noise", "noise clip is empty"));
    }
    Ok((0..len).map(|i| noise[(offset + i) % noise.len()]).collect())
}

/// `clean + g * noise` with `g` chosen so the clean-to-scaled-noise power ratio is `snr_db`.
/// A noise shorter than `clean` is looped; `snr_db = +inf` returns `clean`.
pub fn add_noise_at_snr(clean: &[f64], noise: &[f64], snr_db: f64) -> Result<Vec<f64>> {
    let pc = power(clean);
    if pc <= 0.0 {
        return Err(Error::invalid("clean", "silent clean signal has no defined SNR"));
    }
    if snr_db == f64::INFINITY {
        return Ok(clean.to_vec());
    }
    let noise = if noise.len() < clean.len() {
        tile_noise(noise, clean.len(), 0)?
    } else {
        noise[..clean.len()].to_vec()
    };
    let pn = power(&noise);
    if pn <= 0.0 {
        return Err(Error::invalid("noise", "silent noise cannot reach a finite SNR"));
    }
    let g = (pc / (pn * 10f64.powf(snr_db / 10.0))).sqrt();
    Ok(clean.iter().zip(&noise).map(|(c, n)| c + g * n).collect())
}

pub fn clip(x: &[f64], threshold: f64) -> Result<Vec<f64>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::invalid("threshold", format!("must lie in (0, 1], got {threshold}")));
    }
    Ok(x.iter().map(|v| v.clamp(-threshold, threshold)).collect())
}

pub fn apply_gain(x: &[f64], db: f64) -> Vec<f64> {
    let g = 10f64.powf(db / 20.0);
    x.iter().map(|v| v * g).collect()
}

/// Round to the nearest of `2^bits` uniform levels on `[-1, 1)`.
pub fn bit_depth_reduce(x: &[f64], bits: u32) -> Result<Vec<f64>> {
    if !(4..=16).contains(&bits) {
        return Err(Error::invalid("bits", format!("must lie in [4, 16], got {bits}")));
    }
    let step = 2f64.powi(1 - bits as i32);
    Ok(x.iter()
        .map(|v| ((v / step).round() * step).clamp(-1.0, 1.0 - step))
        .collect())
}

/// Full linear convolution by FFT, trimmed to the input length and rescaled
/// to the input's peak.
pub fn rir_convolve(clean: &[f64], rir: &[f64]) -> Result<Vec<f64>> {
    if rir.is_empty() || rir.iter().all(|v| *v == 0.0) {
        return Err(Error::invalid("rir", "impulse response is empty or silent"));
    }
    if clean.is_empty() {
        return Ok(Vec::new());
    }
    let n = (clean.len() + rir.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let to_buf = |x: &[f64]| {
        let mut b: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        b.resize(n, Complex64::new(0.0, 0.0));
        b
    };
    let mut a = to_buf(clean);
    let mut b = to_buf(rir);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let mut out: Vec<f64> = a[..clean.len()].iter().map(|c| c.re / n as f64).collect();
    let peak_in = clean.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let peak_out = out.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak_out > 0.0 {
        let g = peak_in / peak_out;
        out.iter_mut().for_each(|v| *v *= g);
    }
    Ok(out)
}
