//! Log-spectral distance, spectrogram SSIM and SNR.

use std::io::Write;

use crate::error::check_len;
use crate::signal::{stft, ComplexSpectrogram, StftConfig, Waveform};
use crate::{Error, Result};

pub const LSD_FLOOR: f64 = 1e-8;
/// Magnitude of the `+inf` / `-inf` SNR sentinels.
pub const SNR_CAP_DB: f64 = 300.0;
pub const SSIM_WINDOW: usize = 7;

/// Mean over frames of the RMS over bins of `ln(X^2 / Xhat^2)`, with both
/// squared magnitudes floored at `floor`.
pub fn lsd(reference: &ComplexSpectrogram, estimate: &ComplexSpectrogram, floor: f64) -> Result<f64> {
    if reference.frames() != estimate.frames() || reference.bins() != estimate.bins() {
        return Err(Error::ShapeMismatch {
            expected: reference.frames() * reference.bins(),
            actual: estimate.frames() * estimate.bins(),
        });
    }
    lsd_magnitudes(&reference.magnitude(), &estimate.magnitude(), reference.bins(), floor)
}

/// [`lsd`] on row-major `frames x bins` magnitude arrays.
pub fn lsd_magnitudes(reference: &[f64], estimate: &[f64], bins: usize, floor: f64) -> Result<f64> {
    check_len(reference.len(), estimate.len())?;
    if !(floor > 0.0) {
        return Err(Error::invalid("floor", "must be positive"));
    }
    if bins == 0 || !reference.len().is_multiple_of(bins) || reference.is_empty() {
        return Err(Error::invalid("bins", "magnitudes must hold a whole number of frames"));
    }
    let frames = reference.len() / bins;
    let total: f64 = reference
        .chunks(bins)
        .zip(estimate.chunks(bins))
        .map(|(r, e)| {
            let ms = r
                .iter()
                .zip(e)
                .map(|(a, b)| ((a * a).max(floor) / (b * b).max(floor)).ln().powi(2))
                .sum::<f64>()
                / bins as f64;
            ms.sqrt()
        })
        .sum();
    Ok(total / frames as f64)
}

/// Mean SSIM over all valid `7 x 7` windows of two row-major images. The
/// window shrinks to the image size for small inputs. `R` is the dynamic range
/// of `reference`, or 1 when the reference is constant.
pub fn spectrogram_ssim(reference: &[f64], estimate: &[f64], rows: usize, cols: usize) -> Result<f64> {
    check_len(rows * cols, reference.len())?;
    check_len(rows * cols, estimate.len())?;
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("shape", "images must be non-empty"));
    }
    if reference.iter().chain(estimate).any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::invalid("magnitude", "SSIM inputs must be finite and non-negative"));
    }
    let (lo, hi) = reference
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let range = if hi > lo { hi - lo } else { 1.0 };
    let c1 = (0.01 * range).powi(2);
    let c2 = (0.03 * range).powi(2);
    let (wr, wc) = (SSIM_WINDOW.min(rows), SSIM_WINDOW.min(cols));
    let n = (wr * wc) as f64;
    // Sample covariance; a one-pixel window has none.
    let dof = if n > 1.0 { n - 1.0 } else { 1.0 };
    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=rows - wr {
        for c0 in 0..=cols - wc {
            let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in r0..r0 + wr {
                for c in c0..c0 + wc {
                    let (x, y) = (reference[r * cols + c], estimate[r * cols + c]);
                    sx += x;
                    sy += y;
                    sxx += x * x;
                    syy += y * y;
                    sxy += x * y;
                }
            }
            let (mx, my) = (sx / n, sy / n);
            let vx = ((sxx - n * mx * mx) / dof).max(0.0);
            let vy = ((syy - n * my * my) / dof).max(0.0);
            let cxy = (sxy - n * mx * my) / dof;
            total += (2.0 * mx * my + c1) * (2.0 * cxy + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2));
            count += 1;
        }
    }
    Ok(total / count as f64)
}

fn cap(db: f64) -> f64 {
    if db.is_nan() {
        SNR_CAP_DB
    } else {
        db.clamp(-SNR_CAP_DB, SNR_CAP_DB)
    }
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn snr_db(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    check_len(reference.len(), estimate.len())?;
    let p = energy(reference);
    if p == 0.0 {
        return Err(Error::invalid("reference", "zero-energy reference"));
    }
    let e: f64 = reference.iter().zip(estimate).map(|(r, e)| (r - e).powi(2)).sum();
    Ok(cap(10.0 * (p / e).log10()))
}

/// SNR after projecting the estimate onto the reference.
pub fn si_snr_db(reference: &[f64], estimate: &[f64]) -> Result<f64> {
    check_len(reference.len(), estimate.len())?;
    let p = energy(reference);
    if p == 0.0 {
        return Err(Error::invalid("reference", "zero-energy reference"));
    }
    let a = reference.iter().zip(estimate).map(|(r, e)| r * e).sum::<f64>() / p;
    let target = a * a * p;
    let resid: f64 = reference.iter().zip(estimate).map(|(r, e)| (e - a * r).powi(2)).sum();
    if target == 0.0 {
        return Ok(-SNR_CAP_DB);
    }
    Ok(cap(10.0 * (target / resid).log10()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub lsd: f64,
    pub ssim: f64,
    pub snr_db: f64,
    pub si_snr_db: f64,
}

impl MetricReport {
    pub const CSV_HEADER: [&'static str; 5] = ["file", "lsd", "ssim", "snr_db", "si_snr_db"];

    pub fn compute(reference: &Waveform, estimate: &Waveform, cfg: &StftConfig) -> Result<Self> {
        check_len(reference.len(), estimate.len())?;
        let r = stft(reference, cfg)?;
        let e = stft(estimate, cfg)?;
        Ok(Self {
            lsd: lsd(&r, &e, LSD_FLOOR)?,
            ssim: spectrogram_ssim(&r.magnitude(), &e.magnitude(), r.frames(), r.bins())?,
            snr_db: snr_db(reference.samples(), estimate.samples())?,
            si_snr_db: si_snr_db(reference.samples(), estimate.samples())?,
        })
    }

    pub fn write_csv<W: Write>(rows: &[(String, MetricReport)], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        for (id, m) in rows {
            w.write_record([
                id.clone(),
                format!("{:.9}", m.lsd),
                format!("{:.9}", m.ssim),
                format!("{:.6}", m.snr_db),
                format!("{:.6}", m.si_snr_db),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}
