//! Stand-ins for the predictive branch.

use super::PredictiveEstimator;
use crate::signal::ComplexSpectrogram;
use crate::{Error, Result};

/// Returns the degraded spectrum unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPredictor;

impl PredictiveEstimator for IdentityPredictor {
    fn predict(&self, degraded: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        Ok(degraded.clone())
    }
}

/// Returns a fixed clean spectrum regardless of the input.
#[derive(Debug, Clone)]
pub struct OraclePredictor {
    clean: ComplexSpectrogram,
}

impl OraclePredictor {
    pub fn new(clean: ComplexSpectrogram) -> Self {
        Self { clean }
    }
}

impl PredictiveEstimator for OraclePredictor {
    fn predict(&self, degraded: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        if degraded.frames() != self.clean.frames() || degraded.bins() != self.clean.bins() {
            return Err(Error::ShapeMismatch {
                expected: self.clean.data().len(),
                actual: degraded.data().len(),
            });
        }
        Ok(self.clean.clone())
    }
}

/// Magnitude spectral subtraction with a per-bin noise floor.
///
/// The floor of each bin is the 10th percentile of its magnitude over frames,
/// multiplied by `scale`. Magnitudes are floored at zero and phase is kept.
/// With an exponent `e`, subtraction happens on `|c|^e`, which undoes a
/// magnitude compression `|X|^(1/e)` applied upstream.
#[derive(Debug, Clone, Copy)]
pub struct SpectralSubtraction {
    scale: f64,
    exponent: f64,
}

pub const NOISE_PERCENTILE: f64 = 0.10;

impl SpectralSubtraction {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::invalid("noise_floor", format!("must be >= 0, got {scale}")));
        }
        Ok(Self { scale, exponent: 1.0 })
    }

    pub fn with_exponent(self, exponent: f64) -> Result<Self> {
        if !(exponent.is_finite() && exponent > 0.0) {
            return Err(Error::invalid("exponent", format!("must be > 0, got {exponent}")));
        }
        Ok(Self { exponent, ..self })
    }

    pub fn noise_floor(spec: &ComplexSpectrogram) -> Vec<f64> {
        let mut column = Vec::with_capacity(spec.frames());
        (0..spec.bins())
            .map(|f| {
                column.clear();
                column.extend((0..spec.frames()).map(|k| spec.get(k, f).norm()));
                percentile(&mut column, NOISE_PERCENTILE)
            })
            .collect()
    }
}

impl Default for SpectralSubtraction {
    fn default() -> Self {
        Self { scale: 1.0, exponent: 1.0 }
    }
}

impl PredictiveEstimator for SpectralSubtraction {
    fn predict(&self, degraded: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        let e = self.exponent;
        let floor: Vec<f64> = Self::noise_floor(degraded).iter().map(|f| self.scale * f.powf(e)).collect();
        let bins = degraded.bins();
        let data = degraded
            .data()
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let m = c.norm();
                if m == 0.0 {
                    return c;
                }
                let kept = (m.powf(e) - floor[i % bins]).max(0.0);
                c * (kept.powf(1.0 / e) / m)
            })
            .collect();
        degraded.with_data(data)
    }
}

// Linear interpolation between order statistics.
fn percentile(values: &mut [f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let pos = q * (values.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    values[lo] + (values[hi] - values[lo]) * (pos - lo as f64)
}
