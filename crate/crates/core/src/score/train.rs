//! Plain SGD on the denoising score matching loss for [`ToyScoreNet`].

use rand::seq::SliceRandom;
use rand::Rng;

use super::toy::{DsmSample, ToyScoreNet};
use super::{gaussian_marginal_score, ScoreFunction, DSM_T_MIN};
use crate::rng::standard_normal;
use crate::sde::{DiffusionTime, SdeParams};
use crate::{Error, Result};

/// Synthetic pairs with `x0 ~ N(m0, s0^2)` and `y = x0 + offset + noise_std * n`,
/// independently per dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPairTask {
    pub dim: usize,
    pub m0: f64,
    pub s0: f64,
    pub offset: f64,
    pub noise_std: f64,
}

impl Default for GaussianPairTask {
    fn default() -> Self {
        Self {
            dim: 1,
            m0: 1.0,
            s0: 0.3,
            offset: 0.5,
            noise_std: 0.1,
        }
    }
}

impl GaussianPairTask {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > 16 {
            return Err(Error::invalid("dim", format!("must lie in 1..=16, got {}", self.dim)));
        }
        if !(self.s0 > 0.0 && self.s0.is_finite()) {
            return Err(Error::invalid("s0", "must be positive"));
        }
        if !(self.noise_std > 0.0 && self.noise_std.is_finite()) {
            return Err(Error::invalid("noise_std", "must be positive"));
        }
        Ok(())
    }

    pub fn sample_pairs<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        self.validate()?;
        Ok((0..n)
            .map(|_| {
                let x0: Vec<f64> = (0..self.dim).map(|_| self.m0 + self.s0 * standard_normal(rng)).collect();
                let y = x0
                    .iter()
                    .map(|x| x + self.offset + self.noise_std * standard_normal(rng))
                    .collect();
                (x0, y)
            })
            .collect())
    }

    /// Mean and standard deviation of `x0 | y` for one coordinate.
    pub fn posterior(&self, y: f64) -> (f64, f64) {
        let (v0, vn) = (self.s0 * self.s0, self.noise_std * self.noise_std);
        let mean = self.m0 + v0 / (v0 + vn) * (y - self.offset - self.m0);
        (mean, (v0 * vn / (v0 + vn)).sqrt())
    }

    /// Exact score of `p_t(x | y)` under this task.
    pub fn reference_score(&self, params: SdeParams) -> TaskScore {
        TaskScore { task: *self, params }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct TaskScore {
    task: GaussianPairTask,
    params: SdeParams,
}

impl ScoreFunction for TaskScore {
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        crate::error::check_len(x_t.len(), y.len())?;
        x_t.iter()
            .zip(y)
            .map(|(&x, &y)| {
                let (m, s) = self.task.posterior(y);
                gaussian_marginal_score(&self.params, x, y, m, s, t)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub batch_size: usize,
    pub t_min: f64,
    pub ema_factor: f64,
}

impl Default for TrainOptions {
    fn default() -> Self {
        Self {
            batch_size: 32,
            t_min: DSM_T_MIN,
            ema_factor: super::toy::DEFAULT_EMA_FACTOR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainReport {
    pub net: ToyScoreNet,
    /// Mean minibatch loss per epoch.
    pub history: Vec<f64>,
    pub steps: usize,
}

pub fn train_toy<R: Rng + ?Sized>(
    net: ToyScoreNet,
    params: &SdeParams,
    dataset: &[(Vec<f64>, Vec<f64>)],
    epochs: usize,
    lr: f64,
    rng: &mut R,
) -> Result<TrainReport> {
    train_toy_with(net, params, dataset, epochs, lr, &TrainOptions::default(), rng)
}

pub fn train_toy_with<R: Rng + ?Sized>(
    mut net: ToyScoreNet,
    params: &SdeParams,
    dataset: &[(Vec<f64>, Vec<f64>)],
    epochs: usize,
    lr: f64,
    opts: &TrainOptions,
    rng: &mut R,
) -> Result<TrainReport> {
    if !(lr >= 0.0 && lr.is_finite()) {
        return Err(Error::invalid("lr", format!("must be finite and >= 0, got {lr}")));
    }
    if dataset.is_empty() {
        return Err(Error::invalid("dataset", "must be non-empty"));
    }
    if opts.batch_size == 0 {
        return Err(Error::invalid("batch_size", "must be positive"));
    }
    let horizon = params.horizon();
    if !(opts.t_min > 0.0 && opts.t_min < horizon) {
        return Err(Error::invalid("t_min", format!("must lie in (0, {horizon})")));
    }
    for (x0, y) in dataset {
        if x0.len() != net.dim() || y.len() != net.dim() {
            return Err(Error::ShapeMismatch {
                expected: net.dim(),
                actual: x0.len().max(y.len()),
            });
        }
    }
    net.set_ema_factor(opts.ema_factor)?;

    let mut order: Vec<usize> = (0..dataset.len()).collect();
    let mut grad = vec![0.0; net.params().len()];
    let mut history = Vec::with_capacity(epochs);
    let mut steps = 0;
    for epoch in 0..epochs {
        order.shuffle(rng);
        let mut epoch_loss = 0.0;
        let mut batches = 0;
        for chunk in order.chunks(opts.batch_size) {
            let samples = chunk
                .iter()
                .map(|&i| {
                    let (x0, y) = &dataset[i];
                    let t = params.time(opts.t_min + (horizon - opts.t_min) * rng.random::<f64>())?;
                    DsmSample::draw(params, x0, y, t, rng)
                })
                .collect::<Result<Vec<_>>>()?;
            let loss = net.loss_and_grad(net.params(), &samples, &mut grad)?;
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "training loss diverged at epoch {epoch}, step {steps} (loss {loss}, lr {lr})"
                )));
            }
            for (p, g) in net.params_mut().iter_mut().zip(&grad) {
                *p -= lr * g;
            }
            net.update_ema();
            epoch_loss += loss;
            batches += 1;
            steps += 1;
        }
        history.push(epoch_loss / batches as f64);
    }
    Ok(TrainReport { net, history, steps })
}

/// Squared-error comparison of a score against a reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreComparison {
    pub mse: f64,
    pub baseline_mse: f64,
}

impl ScoreComparison {
    pub fn ratio(&self) -> f64 {
        self.mse / self.baseline_mse
    }
}

/// Compare scalar scores on a grid: `n_t` times evenly spaced over `[t_min, T]`,
/// the given conditioning values `ys`, and `n_x` points spanning two marginal
/// standard deviations around the marginal mean. The baseline is the zero score.
pub fn compare_on_grid<S: ScoreFunction + ?Sized>(
    params: &SdeParams,
    score: &S,
    task: &GaussianPairTask,
    t_min: f64,
    n_t: usize,
    n_x: usize,
    ys: &[f64],
) -> Result<ScoreComparison> {
    if n_t < 2 || n_x < 2 || ys.is_empty() {
        return Err(Error::invalid("grid", "needs n_t >= 2, n_x >= 2 and a y value"));
    }
    let reference = task.reference_score(*params);
    let (mut err, mut base, mut count) = (0.0, 0.0, 0usize);
    for i in 0..n_t {
        let t = params.time(t_min + (params.horizon() - t_min) * i as f64 / (n_t - 1) as f64)?;
        let (a, b) = params.mean_coefficients(t);
        let var_t = params.kernel_variance(t)?;
        for &y in ys {
            let (m, s) = task.posterior(y);
            let mean = a * m + b * y;
            let sd = (a * a * s * s + var_t).sqrt();
            let xs: Vec<f64> = (0..n_x)
                .map(|j| mean + sd * (-2.0 + 4.0 * j as f64 / (n_x - 1) as f64))
                .collect();
            let ys_rep = vec![y; n_x];
            let got = score.score(&xs, &ys_rep, t)?;
            let want = reference.score(&xs, &ys_rep, t)?;
            for (g, w) in got.iter().zip(&want) {
                err += (g - w).powi(2);
                base += w * w;
                count += 1;
            }
        }
    }
    Ok(ScoreComparison {
        mse: err / count as f64,
        baseline_mse: base / count as f64,
    })
}
