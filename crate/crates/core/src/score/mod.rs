//! Score and predictive interfaces, analytic oracles and training losses.
//!
//! The generative branch is anything implementing [`ScoreFunction`]; the
//! predictive branch is anything implementing [`PredictiveEstimator`].

mod predictive;
pub mod toy;
pub mod train;

pub use predictive::{IdentityPredictor, OraclePredictor, SpectralSubtraction};
pub use toy::{DsmSample, NetScore, ToyScoreNet};
pub use train::{compare_on_grid, train_toy, train_toy_with, GaussianPairTask, ScoreComparison, TrainOptions, TrainReport};

use rand::Rng;

use crate::error::check_len;
use crate::sde::{DiffusionTime, SdeParams};
use crate::signal::ComplexSpectrogram;
use crate::{Error, Result};

/// Lower end of the training-time distribution `t ~ U(t_min, T)`.
pub const DSM_T_MIN: f64 = 0.03;

/// Estimate of `∇_x log p_t(x | y)`; output has the shape of `x_t`.
pub trait ScoreFunction {
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>>;
}

impl<F> ScoreFunction for F
where
    F: Fn(&[f64], &[f64], DiffusionTime) -> Result<Vec<f64>>,
{
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        self(x_t, y, t)
    }
}

impl ScoreFunction for Box<dyn ScoreFunction + Send + Sync> {
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        (**self).score(x_t, y, t)
    }
}

pub fn zero_score(x_t: &[f64], _y: &[f64], _t: DiffusionTime) -> Result<Vec<f64>> {
    Ok(vec![0.0; x_t.len()])
}

/// Maps a (compressed) degraded spectrogram to a clean complex estimate.
pub trait PredictiveEstimator {
    fn predict(&self, degraded: &ComplexSpectrogram) -> Result<ComplexSpectrogram>;
}

impl<P: PredictiveEstimator + ?Sized> PredictiveEstimator for Box<P> {
    fn predict(&self, degraded: &ComplexSpectrogram) -> Result<ComplexSpectrogram> {
        (**self).predict(degraded)
    }
}

/// The exact conditional score for a known clean state `x0`.
#[derive(Debug, Clone)]
pub struct OracleScore {
    params: SdeParams,
    x0: Vec<f64>,
}

impl OracleScore {
    pub fn new(params: SdeParams, x0: Vec<f64>) -> Self {
        Self { params, x0 }
    }
}

impl ScoreFunction for OracleScore {
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        self.params.conditional_score(x_t, &self.x0, y, t)
    }
}

/// Marginal score when each element of `x0` is independently `N(m0, s0^2)`.
///
/// The marginal `p_t(x | y)` is `N(a m0 + b y, a^2 s0^2 + sigma^2)` with
/// `(a, b)` the kernel-mean coefficients.
#[derive(Debug, Clone, Copy)]
pub struct GaussianPriorScore {
    params: SdeParams,
    m0: f64,
    s0: f64,
}

impl GaussianPriorScore {
    pub fn new(params: SdeParams, m0: f64, s0: f64) -> Result<Self> {
        if !(s0.is_finite() && s0 >= 0.0) {
            return Err(Error::invalid("s0", format!("must be >= 0, got {s0}")));
        }
        Ok(Self { params, m0, s0 })
    }
}

impl ScoreFunction for GaussianPriorScore {
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        check_len(x_t.len(), y.len())?;
        x_t.iter()
            .zip(y)
            .map(|(&x, &y)| gaussian_marginal_score(&self.params, x, y, self.m0, self.s0, t))
            .collect()
    }
}

/// Scalar marginal score for `x0 ~ N(m0, s0^2)`.
pub fn gaussian_marginal_score(
    params: &SdeParams,
    x: f64,
    y: f64,
    m0: f64,
    s0: f64,
    t: DiffusionTime,
) -> Result<f64> {
    let (a, b) = params.mean_coefficients(t);
    let var = a * a * s0 * s0 + params.kernel_variance(t)?;
    if var <= 0.0 {
        return Err(Error::Domain(format!(
            "marginal variance vanishes at t = {}",
            t.value()
        )));
    }
    Ok(-(x - a * m0 - b * y) / var)
}

/// Monte-Carlo denoising score matching loss `E ||s(x_t, y, t) + z / sigma(t)||^2`.
///
/// One `t ~ U(t_min, T)` and one `z` per batch item, drawn in batch order.
pub fn dsm_loss<S, R>(
    params: &SdeParams,
    score: &S,
    batch: &[(Vec<f64>, Vec<f64>)],
    t_min: f64,
    rng: &mut R,
) -> Result<f64>
where
    S: ScoreFunction + ?Sized,
    R: Rng + ?Sized,
{
    if batch.is_empty() {
        return Err(Error::invalid("batch", "must be non-empty"));
    }
    let horizon = params.horizon();
    if !(0.0..horizon).contains(&t_min) {
        return Err(Error::invalid("t_min", format!("must lie in [0, {horizon})")));
    }
    let mut total = 0.0;
    for (x0, y) in batch {
        let t = params.time(t_min + (horizon - t_min) * rng.random::<f64>())?;
        total += dsm_sample_loss(params, score, x0, y, t, rng)?;
    }
    Ok(total / batch.len() as f64)
}

/// Single-sample DSM term `||s + z / sigma||^2` at a fixed `t`.
pub fn dsm_sample_loss<S, R>(
    params: &SdeParams,
    score: &S,
    x0: &[f64],
    y: &[f64],
    t: DiffusionTime,
    rng: &mut R,
) -> Result<f64>
where
    S: ScoreFunction + ?Sized,
    R: Rng + ?Sized,
{
    let sigma = params.kernel_std(t)?;
    if sigma <= 0.0 {
        return Err(Error::Domain("DSM target undefined at sigma = 0".into()));
    }
    let (x_t, z) = params.sample_perturbed(x0, y, t, rng)?;
    let s = score.score(&x_t, y, t)?;
    check_len(x_t.len(), s.len())?;
    Ok(s.iter().zip(&z).map(|(s, z)| (s + z / sigma).powi(2)).sum())
}

/// Weight `lambda` between magnitude and complex losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    lambda: f64,
}

impl LossWeights {
    pub fn new(lambda: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&lambda) {
            Ok(Self { lambda })
        } else {
            Err(Error::invalid("lambda", format!("must lie in [0, 1], got {lambda}")))
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { lambda: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictiveLosses {
    pub magnitude: f64,
    pub complex: f64,
    /// `lambda * magnitude + (1 - lambda) * complex`.
    pub combined: f64,
}

/// Magnitude and complex MSEs of a predictive estimate.
pub fn predictive_losses(
    pred_re: &[f64],
    pred_im: &[f64],
    clean_re: &[f64],
    clean_im: &[f64],
    weights: LossWeights,
) -> Result<PredictiveLosses> {
    let n = pred_re.len();
    check_len(n, pred_im.len())?;
    check_len(n, clean_re.len())?;
    check_len(n, clean_im.len())?;
    if n == 0 {
        return Err(Error::invalid("pred", "must be non-empty"));
    }
    let (mut mag, mut comp) = (0.0, 0.0);
    for i in 0..n {
        let pm = pred_re[i].hypot(pred_im[i]);
        let cm = clean_re[i].hypot(clean_im[i]);
        mag += (pm - cm).powi(2);
        comp += (pred_re[i] - clean_re[i]).powi(2) + (pred_im[i] - clean_im[i]).powi(2);
    }
    let (magnitude, complex) = (mag / n as f64, comp / n as f64);
    Ok(PredictiveLosses {
        magnitude,
        complex,
        combined: combine_losses(magnitude, complex, weights),
    })
}

pub fn combine_losses(magnitude: f64, complex: f64, weights: LossWeights) -> f64 {
    weights.lambda() * magnitude + (1.0 - weights.lambda()) * complex
}
