//! Time/frequency representation and the enhancement pipeline.

mod enhance;
mod fusion;
mod stft;
mod transform;

pub use enhance::{enhance, EnhanceConfig, Enhanced};
pub use fusion::{output_fusion, polar_to_parts, FusionConfig};
pub use stft::{hann_window, istft, stft, StftConfig};
pub use transform::{
    amplitude_transform, compress_magnitude, expand_magnitude, inverse_amplitude_transform,
    TransformConfig,
};

use num_complex::Complex64;

use crate::error::check_len;
use crate::{Error, Result};

pub const DEFAULT_SAMPLE_RATE: u32 = 16_000;

/// Mono audio with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    samples: Vec<f64>,
    sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::invalid("sample_rate", "must be > 0"));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sample {i}")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Same rate, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.sample_rate)
    }
}

/// `frames x bins` complex STFT coefficients, row-major by frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSpectrogram {
    frames: usize,
    bins: usize,
    data: Vec<Complex64>,
    config: StftConfig,
    sample_rate: u32,
}

impl ComplexSpectrogram {
    pub fn new(
        frames: usize,
        bins: usize,
        data: Vec<Complex64>,
        config: StftConfig,
        sample_rate: u32,
    ) -> Result<Self> {
        if bins != config.bins() {
            return Err(Error::invalid(
                "bins",
                format!("expected {} bins for window {}", config.bins(), config.window_length()),
            ));
        }
        check_len(frames * bins, data.len())?;
        Ok(Self {
            frames,
            bins,
            data,
            config,
            sample_rate,
        })
    }

    pub fn frames(&self) -> usize {
        self.frames
    }
    pub fn bins(&self) -> usize {
        self.bins
    }
    pub fn config(&self) -> &StftConfig {
        &self.config
    }
    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn get(&self, frame: usize, bin: usize) -> Complex64 {
        self.data[frame * self.bins + bin]
    }

    pub fn magnitude(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.norm()).collect()
    }

    pub fn real(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.data.iter().map(|c| c.im).collect()
    }

    /// Spectrogram of the same geometry with new coefficients.
    pub fn with_data(&self, data: Vec<Complex64>) -> Result<Self> {
        Self::new(self.frames, self.bins, data, self.config, self.sample_rate)
    }

    pub fn from_parts_like(&self, re: &[f64], im: &[f64]) -> Result<Self> {
        check_len(re.len(), im.len())?;
        self.with_data(re.iter().zip(im).map(|(&r, &i)| Complex64::new(r, i)).collect())
    }
}
