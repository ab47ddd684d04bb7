//! Magnitude-domain blending of predictive and generative estimates.

use crate::error::check_len;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusionConfig {
    alpha: f64,
}

impl FusionConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&alpha) {
            Ok(Self { alpha })
        } else {
            Err(Error::invalid("alpha", format!("must lie in [0, 1], got {alpha}")))
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self { alpha: 0.4 }
    }
}

/// Returns `(alpha |pred| + (1 - alpha) gen, atan2(pred_im, pred_re))`.
///
/// An all-zero predictive bin gets phase 0.
pub fn output_fusion(
    pred_re: &[f64],
    pred_im: &[f64],
    gen_mag: &[f64],
    cfg: &FusionConfig,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(pred_re.len(), pred_im.len())?;
    check_len(pred_re.len(), gen_mag.len())?;
    if let Some(v) = gen_mag.iter().find(|v| !(**v >= 0.0)) {
        return Err(Error::invalid(
            "gen_mag",
            format!("generative magnitudes must be >= 0, found {v}"),
        ));
    }
    let a = cfg.alpha;
    let mut mag = Vec::with_capacity(gen_mag.len());
    let mut phase = Vec::with_capacity(gen_mag.len());
    for ((&r, &i), &g) in pred_re.iter().zip(pred_im).zip(gen_mag) {
        mag.push(a * r.hypot(i) + (1.0 - a) * g);
        phase.push(if r == 0.0 && i == 0.0 { 0.0 } else { i.atan2(r) });
    }
    Ok((mag, phase))
}

/// `(m cos p, m sin p)`.
pub fn polar_to_parts(mag: &[f64], phase: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(mag.len(), phase.len())?;
    Ok(mag
        .iter()
        .zip(phase)
        .map(|(m, p)| (m * p.cos(), m * p.sin()))
        .unzip())
}
