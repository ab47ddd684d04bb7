//! OUVE and BBED diffusion processes in closed form.
//!
//! Both processes share the diffusion coefficient `g(t) = sqrt(c) k^t`. They
//! differ in the drift pulling the state from the clean signal `x0` toward
//! the degraded signal `y`:
//!
//! - OUVE: `f = gamma (y - x)`, mean decays exponentially toward `y`.
//! - BBED: `f = (y - x) / (1 - t)`, mean interpolates linearly, horizon `T < 1`.
//!
//! States are flat `f64` slices; the kernel is diagonal so callers impose any
//! spectrogram shape themselves.

mod expint;

pub use expint::exponential_integral_ei;

use rand::Rng;

use crate::error::check_len;
use crate::rng::standard_normal;
use crate::{Error, Result};

/// Radicands of `sigma^2` below this are treated as transcription errors.
const RADICAND_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SdeKind {
    Ouve,
    Bbed,
}

impl SdeKind {
    pub fn name(self) -> &'static str {
        match self {
            SdeKind::Ouve => "ouve",
            SdeKind::Bbed => "bbed",
        }
    }
}

impl std::str::FromStr for SdeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ouve" => Ok(SdeKind::Ouve),
            "bbed" => Ok(SdeKind::Bbed),
            other => Err(Error::invalid("sde", format!("unknown SDE `{other}`"))),
        }
    }
}

/// Validated SDE constants. `gamma` is only used by OUVE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdeParams {
    kind: SdeKind,
    gamma: f64,
    c: f64,
    k: f64,
    horizon: f64,
}

impl SdeParams {
    pub fn new(kind: SdeKind, gamma: f64, c: f64, k: f64, horizon: f64) -> Result<Self> {
        if !(gamma.is_finite() && gamma > 0.0) {
            return Err(Error::invalid("gamma", format!("must be > 0, got {gamma}")));
        }
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::invalid("c", format!("must be > 0, got {c}")));
        }
        if !(k.is_finite() && k > 1.0) {
            return Err(Error::invalid("k", format!("must be > 1, got {k}")));
        }
        if !(horizon.is_finite() && horizon > 0.0 && horizon <= 1.0) {
            return Err(Error::invalid(
                "horizon_T",
                format!("must lie in (0, 1], got {horizon}"),
            ));
        }
        if kind == SdeKind::Bbed && horizon >= 1.0 {
            return Err(Error::invalid(
                "horizon_T",
                "BBED requires T < 1 (drift diverges at t = 1)",
            ));
        }
        Ok(Self {
            kind,
            gamma,
            c,
            k,
            horizon,
        })
    }

    pub fn ouve(gamma: f64, c: f64, k: f64, horizon: f64) -> Result<Self> {
        Self::new(SdeKind::Ouve, gamma, c, k, horizon)
    }

    /// BBED ignores `gamma`; it is stored as 1.
    pub fn bbed(c: f64, k: f64, horizon: f64) -> Result<Self> {
        Self::new(SdeKind::Bbed, 1.0, c, k, horizon)
    }

    /// BBED with `k = 2.6`, `c = 0.51`, `T = 0.999`.
    pub fn bbed_default() -> Self {
        Self::bbed(0.51, 2.6, 0.999).expect("valid constants")
    }

    /// OUVE with `gamma = 1.5`, `c = 0.01`, `k = 10`, `T = 1`.
    pub fn ouve_reference() -> Self {
        Self::ouve(1.5, 0.01, 10.0, 1.0).expect("valid constants")
    }

    pub fn kind(&self) -> SdeKind {
        self.kind
    }
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn k(&self) -> f64 {
        self.k
    }
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// Validate a time against `[0, T]`.
    pub fn time(&self, t: f64) -> Result<DiffusionTime> {
        if t.is_finite() && (0.0..=self.horizon).contains(&t) {
            Ok(DiffusionTime(t))
        } else {
            Err(Error::invalid(
                "t",
                format!("must lie in [0, {}], got {t}", self.horizon),
            ))
        }
    }

    /// Coefficients `(a, b)` with `mu(x0, y, t) = a x0 + b y`.
    pub fn mean_coefficients(&self, t: DiffusionTime) -> (f64, f64) {
        let t = t.0;
        match self.kind {
            SdeKind::Ouve => {
                let a = (-self.gamma * t).exp();
                (a, 1.0 - a)
            }
            SdeKind::Bbed => (1.0 - t, t),
        }
    }

    /// `g(t) = sqrt(c) k^t`.
    pub fn diffusion_coeff(&self, t: DiffusionTime) -> f64 {
        self.c.sqrt() * self.k.powf(t.0)
    }

    pub fn drift(&self, x: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        check_len(x.len(), y.len())?;
        let scale = self.drift_scale(t.0)?;
        Ok(x.iter().zip(y).map(|(&x, &y)| scale * (y - x)).collect())
    }

    /// Scalar factor multiplying `(y - x)` in the drift.
    pub(crate) fn drift_scale(&self, t: f64) -> Result<f64> {
        match self.kind {
            SdeKind::Ouve => Ok(self.gamma),
            SdeKind::Bbed => {
                if t >= 1.0 {
                    Err(Error::Domain(format!("BBED drift is singular at t = {t} >= 1")))
                } else {
                    Ok(1.0 / (1.0 - t))
                }
            }
        }
    }

    pub fn kernel_mean(&self, x0: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        check_len(x0.len(), y.len())?;
        let (a, b) = self.mean_coefficients(t);
        Ok(x0.iter().zip(y).map(|(&x0, &y)| a * x0 + b * y).collect())
    }

    /// `sigma^2(t)` of the perturbation kernel.
    pub fn kernel_variance(&self, t: DiffusionTime) -> Result<f64> {
        let t = t.0;
        if t == 0.0 {
            return Ok(0.0);
        }
        let (c, k) = (self.c, self.k);
        let ln_k = k.ln();
        let radicand = match self.kind {
            SdeKind::Ouve => {
                let g = self.gamma;
                c * (k.powf(2.0 * t) - (-2.0 * g * t).exp()) / (2.0 * (g + ln_k))
            }
            SdeKind::Bbed => {
                let e = exponential_integral_ei(2.0 * (t - 1.0) * ln_k)?
                    - exponential_integral_ei(-2.0 * ln_k)?;
                // log(k^{2k^2}) written as 2 k^2 ln k to avoid overflow
                let log_k_2k2 = 2.0 * k * k * ln_k;
                (1.0 - t) * c * ((k.powf(2.0 * t) - 1.0 + t) + log_k_2k2 * (1.0 - t) * e)
            }
        };
        if radicand.is_nan() {
            return Err(Error::NonFinite(format!("sigma^2({t})")));
        }
        if radicand < -RADICAND_TOLERANCE {
            return Err(Error::Domain(format!(
                "negative variance radicand {radicand:e} at t = {t}"
            )));
        }
        Ok(radicand.max(0.0))
    }

    pub fn kernel_std(&self, t: DiffusionTime) -> Result<f64> {
        self.kernel_variance(t).map(f64::sqrt)
    }

    pub fn kernel_moments(&self, x0: &[f64], y: &[f64], t: DiffusionTime) -> Result<KernelMoments> {
        Ok(KernelMoments {
            mean: self.kernel_mean(x0, y, t)?,
            std: self.kernel_std(t)?,
        })
    }

    /// Score of the perturbation kernel: `-(x_t - mu) / sigma^2`.
    pub fn conditional_score(
        &self,
        x_t: &[f64],
        x0: &[f64],
        y: &[f64],
        t: DiffusionTime,
    ) -> Result<Vec<f64>> {
        check_len(x_t.len(), x0.len())?;
        let mean = self.kernel_mean(x0, y, t)?;
        let var = self.kernel_variance(t)?;
        if var <= 0.0 {
            return Err(Error::Domain(format!(
                "conditional score undefined at t = {} (sigma = 0)",
                t.0
            )));
        }
        Ok(x_t.iter().zip(mean).map(|(&x, m)| -(x - m) / var).collect())
    }

    /// Draw `x_t = mu + sigma z`; returns `(x_t, z)`.
    pub fn sample_perturbed<R: Rng + ?Sized>(
        &self,
        x0: &[f64],
        y: &[f64],
        t: DiffusionTime,
        rng: &mut R,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mean = self.kernel_mean(x0, y, t)?;
        let std = self.kernel_std(t)?;
        let z: Vec<f64> = (0..mean.len()).map(|_| standard_normal(rng)).collect();
        let x_t = mean.iter().zip(&z).map(|(m, z)| m + std * z).collect();
        Ok((x_t, z))
    }
}

/// A time in `[0, T]`, obtained from [`SdeParams::time`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct DiffusionTime(f64);

impl DiffusionTime {
    pub fn value(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelMoments {
    pub mean: Vec<f64>,
    pub std: f64,
}
