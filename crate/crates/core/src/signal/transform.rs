//! Magnitude compression `beta1 |Y|^beta2 e^{i angle Y}` and its inverse.

use num_complex::Complex64;

use super::ComplexSpectrogram;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformConfig {
    beta1: f64,
    beta2: f64,
}

impl TransformConfig {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        if !(beta1.is_finite() && beta1 > 0.0) {
            return Err(Error::invalid("beta1", format!("must be > 0, got {beta1}")));
        }
        if !(beta2 > 0.0 && beta2 <= 1.0) {
            return Err(Error::invalid("beta2", format!("must lie in (0, 1], got {beta2}")));
        }
        Ok(Self { beta1, beta2 })
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }
    pub fn beta2(&self) -> f64 {
        self.beta2
    }
}

impl Default for TransformConfig {
    fn default() -> Self {
        Self {
            beta1: 0.3,
            beta2: 0.3,
        }
    }
}

pub fn compress_magnitude(m: f64, cfg: &TransformConfig) -> f64 {
    if m == 0.0 {
        0.0
    } else {
        cfg.beta1 * m.powf(cfg.beta2)
    }
}

/// `(m / beta1)^(1 / beta2)`; negative magnitudes are rejected.
pub fn expand_magnitude(m: f64, cfg: &TransformConfig) -> Result<f64> {
    if m < 0.0 || m.is_nan() {
        return Err(Error::Domain(format!("cannot expand negative magnitude {m}")));
    }
    if m == 0.0 {
        return Ok(0.0);
    }
    Ok((m / cfg.beta1).powf(1.0 / cfg.beta2))
}

fn rescale(c: Complex64, new_mag: f64) -> Complex64 {
    let m = c.norm();
    if m == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        c * (new_mag / m)
    }
}

pub fn amplitude_transform(s: &ComplexSpectrogram, cfg: &TransformConfig) -> Result<ComplexSpectrogram> {
    let data = s
        .data()
        .iter()
        .map(|&c| rescale(c, compress_magnitude(c.norm(), cfg)))
        .collect();
    s.with_data(data)
}

pub fn inverse_amplitude_transform(
    s: &ComplexSpectrogram,
    cfg: &TransformConfig,
) -> Result<ComplexSpectrogram> {
    let data = s
        .data()
        .iter()
        .map(|&c| expand_magnitude(c.norm(), cfg).map(|m| rescale(c, m)))
        .collect::<Result<Vec<_>>>()?;
    s.with_data(data)
}
