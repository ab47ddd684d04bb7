use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{ComplexSpectrogram, Waveform};
use crate::{Error, Result};

const MIN_WINDOW_SUM: f64 = 1e-8;

/// Hann-windowed STFT geometry (512 / 192 by default).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StftConfig {
    window_length: usize,
    hop: usize,
}

impl StftConfig {
    pub fn new(window_length: usize, hop: usize) -> Result<Self> {
        if window_length < 2 || !window_length.is_multiple_of(2) {
            return Err(Error::invalid(
                "window_length",
                format!("must be even and >= 2, got {window_length}"),
            ));
        }
        if hop == 0 || hop > window_length {
            return Err(Error::invalid(
                "hop",
                format!("must lie in [1, {window_length}], got {hop}"),
            ));
        }
        Ok(Self { window_length, hop })
    }

    pub fn window_length(&self) -> usize {
        self.window_length
    }
    pub fn hop(&self) -> usize {
        self.hop
    }
    pub fn bins(&self) -> usize {
        self.window_length / 2 + 1
    }
    fn pad(&self) -> usize {
        self.window_length / 2
    }
    /// Frames needed so the padded signal is fully covered.
    pub fn frames_for(&self, len: usize) -> usize {
        len.div_ceil(self.hop) + 1
    }
}

impl Default for StftConfig {
    fn default() -> Self {
        Self {
            window_length: 512,
            hop: 192,
        }
    }
}

/// Periodic Hann window.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect()
}

// Reflect without repeating the edge sample.
fn reflect_index(j: isize, len: usize) -> usize {
    if len == 1 {
        return 0;
    }
    let period = 2 * (len as isize - 1);
    let m = j.rem_euclid(period);
    if m < len as isize {
        m as usize
    } else {
        (period - m) as usize
    }
}

/// Centered STFT with reflect padding of `window_length / 2` on both sides.
pub fn stft(w: &Waveform, cfg: &StftConfig) -> Result<ComplexSpectrogram> {
    let x = w.samples();
    if x.is_empty() {
        return Err(Error::invalid("waveform", "empty input"));
    }
    let n = cfg.window_length();
    let bins = cfg.bins();
    let frames = cfg.frames_for(x.len());
    let window = hann_window(n);
    let pad = cfg.pad() as isize;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);

    let mut data = Vec::with_capacity(frames * bins);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..frames {
        let start = (k * cfg.hop()) as isize - pad;
        for (i, b) in buf.iter_mut().enumerate() {
            let v = x[reflect_index(start + i as isize, x.len())];
            *b = Complex64::new(v * window[i], 0.0);
        }
        fft.process(&mut buf);
        data.extend_from_slice(&buf[..bins]);
    }
    ComplexSpectrogram::new(frames, bins, data, *cfg, w.sample_rate())
}

/// Overlap-add inverse with squared-window normalisation, trimmed to `length`.
pub fn istft(s: &ComplexSpectrogram, cfg: &StftConfig, length: usize) -> Result<Waveform> {
    if s.config() != cfg {
        return Err(Error::invalid("stft", "spectrogram was produced with a different config"));
    }
    let n = cfg.window_length();
    let bins = cfg.bins();
    let hop = cfg.hop();
    let pad = cfg.pad();
    let window = hann_window(n);
    let padded_len = (s.frames().max(1) - 1) * hop + n;
    if length + pad > padded_len {
        return Err(Error::invalid(
            "length",
            format!("{length} samples exceed the {} frames available", s.frames()),
        ));
    }
    let ifft = FftPlanner::<f64>::new().plan_fft_inverse(n);

    let mut acc = vec![0.0; padded_len];
    let mut wsum = vec![0.0; padded_len];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let scale = 1.0 / n as f64;
    for k in 0..s.frames() {
        let row = &s.data()[k * bins..(k + 1) * bins];
        buf[..bins].copy_from_slice(row);
        for f in 1..(n - bins + 1) {
            buf[n - f] = row[f].conj();
        }
        ifft.process(&mut buf);
        let off = k * hop;
        for i in 0..n {
            acc[off + i] += buf[i].re * scale * window[i];
            wsum[off + i] += window[i] * window[i];
        }
    }

    let mut out = Vec::with_capacity(length);
    for i in 0..length {
        let p = i + pad;
        if wsum[p] < MIN_WINDOW_SUM {
            return Err(Error::Domain(format!(
                "window overlap sum {:e} at sample {i} is degenerate",
                wsum[p]
            )));
        }
        out.push(acc[p] / wsum[p]);
    }
    Waveform::new(out, s.sample_rate())
}
