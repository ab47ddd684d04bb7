//! Euler-Maruyama solvers.
//!
//! [`forward_simulate`] integrates the forward SDE over many scalar paths and is
//! the Monte-Carlo oracle for the closed-form kernel. [`reverse_solve`]
//! integrates the reverse-time SDE from a start time down to one step above
//! zero and returns the final drift-only update, never a noisy state.

use std::io::Write;

use rand::Rng;
use rayon::prelude::*;

use crate::rng::{derived_source, standard_normal};
use crate::score::ScoreFunction;
use crate::sde::{DiffusionTime, SdeParams};
use crate::{Error, Result};

const GRID_TOLERANCE: f64 = 1e-9;
const PATHS_PER_CHUNK: usize = 1024;

/// Uniform reverse-time grid. Times are `i * step` for `i = start_index, ..., 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReverseSchedule {
    n_steps: usize,
    step: f64,
    start: f64,
    start_index: usize,
}

impl ReverseSchedule {
    /// `start` must be a positive integer multiple of `step`.
    pub fn new(n_steps: usize, step: f64, start: f64) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::invalid("n_steps", "must be positive"));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::invalid("step", format!("must be > 0, got {step}")));
        }
        if !(start.is_finite() && start > 0.0) {
            return Err(Error::invalid("start", format!("must be > 0, got {start}")));
        }
        let ratio = start / step;
        let index = ratio.round();
        if index < 1.0 || (ratio - index).abs() > GRID_TOLERANCE * ratio.max(1.0) {
            return Err(Error::invalid(
                "start",
                format!("T_rs = {start} is not an integer multiple of the step {step}"),
            ));
        }
        Ok(Self {
            n_steps,
            step,
            start,
            start_index: index as usize,
        })
    }

    /// `N` sub-intervals over `[0, T]`, starting at `T`.
    pub fn full(params: &SdeParams, n_steps: usize) -> Result<Self> {
        let horizon = params.horizon();
        Self::new(n_steps, horizon / n_steps.max(1) as f64, horizon)
    }

    /// Start at `t_rs` with step `1 / N`. A start at (or beyond) `T` falls back to [`Self::full`].
    pub fn truncated(params: &SdeParams, n_steps: usize, t_rs: f64) -> Result<Self> {
        let horizon = params.horizon();
        if t_rs > horizon + GRID_TOLERANCE {
            return Err(Error::invalid(
                "t_rs",
                format!("must lie in (0, {horizon}], got {t_rs}"),
            ));
        }
        if (t_rs - horizon).abs() <= GRID_TOLERANCE {
            return Self::full(params, n_steps);
        }
        Self::new(n_steps, 1.0 / n_steps.max(1) as f64, t_rs)
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn start(&self) -> f64 {
        self.start
    }
    /// Number of reverse updates performed (`start / step`).
    pub fn steps_executed(&self) -> usize {
        self.start_index
    }

    /// Grid times from `start` down to `step`.
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.start_index).rev().map(move |i| self.time_at(i))
    }

    fn time_at(&self, i: usize) -> f64 {
        if i == self.start_index {
            self.start
        } else {
            i as f64 * self.step
        }
    }
}

/// Per-time Monte-Carlo statistics of a path ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryStats {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub n_paths: usize,
}

impl TrajectoryStats {
    fn from_sums(times: Vec<f64>, sums: &[f64], sq_sums: &[f64], n_paths: usize) -> Self {
        let n = n_paths as f64;
        let mean: Vec<f64> = sums.iter().map(|s| s / n).collect();
        let variance = sq_sums
            .iter()
            .zip(&mean)
            .map(|(sq, m)| {
                if n_paths > 1 {
                    ((sq - n * m * m) / (n - 1.0)).max(0.0)
                } else {
                    0.0
                }
            })
            .collect();
        Self {
            times,
            mean,
            variance,
            n_paths,
        }
    }

    /// Index of the recorded time closest to `t`.
    pub fn nearest(&self, t: f64) -> Option<usize> {
        self.times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))
            .map(|(i, _)| i)
    }

    /// CSV with header `t,mean,variance`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "mean", "variance"])?;
        for i in 0..self.times.len() {
            w.write_record(&[
                self.times[i].to_string(),
                self.mean[i].to_string(),
                self.variance[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Forward Euler-Maruyama over `[0, T]` with `n_steps` uniform steps, scalar state.
///
/// Path `i` draws from a source derived from `(seed, "forward-path", i)`, so the
/// result is independent of the thread layout.
pub fn forward_simulate(
    params: &SdeParams,
    x0: f64,
    y: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
) -> Result<TrajectoryStats> {
    forward_simulate_scaled(params, x0, y, n_steps, n_paths, seed, 1.0)
}

/// As [`forward_simulate`] with `g(t)` multiplied by `noise_scale` (0 gives the mean ODE).
pub fn forward_simulate_scaled(
    params: &SdeParams,
    x0: f64,
    y: f64,
    n_steps: usize,
    n_paths: usize,
    seed: u64,
    noise_scale: f64,
) -> Result<TrajectoryStats> {
    if n_steps < 100 {
        return Err(Error::invalid("n_steps", format!("need >= 100, got {n_steps}")));
    }
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be positive"));
    }
    let horizon = params.horizon();
    let dt = horizon / n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let mut times: Vec<f64> = (0..=n_steps).map(|i| i as f64 * dt).collect();
    times[n_steps] = horizon;

    // Coefficients depend on time only; precompute them once.
    let mut drift_scale = Vec::with_capacity(n_steps);
    let mut noise = Vec::with_capacity(n_steps);
    for &t in &times[..n_steps] {
        drift_scale.push(params.drift_scale(t)?);
        noise.push(noise_scale * params.diffusion_coeff(params.time(t)?) * sqrt_dt);
    }

    let n_chunks = n_paths.div_ceil(PATHS_PER_CHUNK);
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = vec![0.0; n_steps + 1];
            let mut sq = vec![0.0; n_steps + 1];
            let lo = chunk * PATHS_PER_CHUNK;
            let hi = (lo + PATHS_PER_CHUNK).min(n_paths);
            for path in lo..hi {
                let mut rng = derived_source(seed, "forward-path", path as u64);
                let mut x = x0;
                sums[0] += x;
                sq[0] += x * x;
                for i in 0..n_steps {
                    let z = standard_normal(&mut rng);
                    x += drift_scale[i] * (y - x) * dt + noise[i] * z;
                    sums[i + 1] += x;
                    sq[i + 1] += x * x;
                }
            }
            (sums, sq)
        })
        .collect();

    let mut sums = vec![0.0; n_steps + 1];
    let mut sq = vec![0.0; n_steps + 1];
    for (s, q) in &partials {
        for i in 0..=n_steps {
            sums[i] += s[i];
            sq[i] += q[i];
        }
    }
    Ok(TrajectoryStats::from_sums(times, &sums, &sq, n_paths))
}

/// Output of one reverse Euler-Maruyama update.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseStep {
    /// `x_mean + g(t) sqrt(dt) z`.
    pub next: Vec<f64>,
    /// `x_t + (-f(x_t, t) + g(t)^2 s) dt`.
    pub mean: Vec<f64>,
}

pub fn reverse_step<S, R>(
    params: &SdeParams,
    score: &S,
    x_t: &[f64],
    y: &[f64],
    t: DiffusionTime,
    step: f64,
    rng: &mut R,
) -> Result<ReverseStep>
where
    S: ScoreFunction + ?Sized,
    R: Rng + ?Sized,
{
    if !(step > 0.0) || t.value() < step * (1.0 - GRID_TOLERANCE) {
        return Err(Error::invalid(
            "step",
            format!("need 0 < step <= t, got step {step} at t = {}", t.value()),
        ));
    }
    let s = score.score(x_t, y, t)?;
    crate::error::check_len(x_t.len(), s.len())?;
    let drift = params.drift(x_t, y, t)?;
    let g = params.diffusion_coeff(t);
    let g2 = g * g;
    let noise = g * step.sqrt();
    let mut mean = Vec::with_capacity(x_t.len());
    let mut next = Vec::with_capacity(x_t.len());
    for i in 0..x_t.len() {
        let m = x_t[i] + (-drift[i] + g2 * s[i]) * step;
        mean.push(m);
        next.push(m + noise * standard_normal(rng));
    }
    Ok(ReverseStep { next, mean })
}

/// Reverse solve from `schedule.start()` down to `schedule.step()`; returns the last `x_mean`.
pub fn reverse_solve<S, R>(
    params: &SdeParams,
    score: &S,
    x_init: &[f64],
    y: &[f64],
    schedule: &ReverseSchedule,
    rng: &mut R,
) -> Result<Vec<f64>>
where
    S: ScoreFunction + ?Sized,
    R: Rng + ?Sized,
{
    reverse_solve_observed(params, score, x_init, y, schedule, rng, |_, _| {})
}

/// [`reverse_solve`] calling `observe(t - dt, state)` after each noisy update.
pub fn reverse_solve_observed<S, R, F>(
    params: &SdeParams,
    score: &S,
    x_init: &[f64],
    y: &[f64],
    schedule: &ReverseSchedule,
    rng: &mut R,
    mut observe: F,
) -> Result<Vec<f64>>
where
    S: ScoreFunction + ?Sized,
    R: Rng + ?Sized,
    F: FnMut(f64, &[f64]),
{
    crate::error::check_len(x_init.len(), y.len())?;
    if schedule.start() > params.horizon() * (1.0 + GRID_TOLERANCE) {
        return Err(Error::invalid(
            "start",
            format!(
                "schedule starts at {} beyond horizon {}",
                schedule.start(),
                params.horizon()
            ),
        ));
    }
    let mut x = x_init.to_vec();
    let mut last_mean = x.clone();
    for t in schedule.times() {
        let t = params.time(t.min(params.horizon()))?;
        let update = reverse_step(params, score, &x, y, t, schedule.step(), rng)?;
        observe((t.value() - schedule.step()).max(0.0), &update.next);
        x = update.next;
        last_mean = update.mean;
    }
    Ok(last_mean)
}

/// Initial reverse state around a predictive estimate: `mu(x_pred, y, t_rs) + sigma(t_rs) z`.
pub fn truncated_init<R: Rng + ?Sized>(
    params: &SdeParams,
    x_pred: &[f64],
    y: &[f64],
    t_rs: DiffusionTime,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if t_rs.value() <= 0.0 {
        return Err(Error::invalid("t_rs", "must be > 0"));
    }
    params.sample_perturbed(x_pred, y, t_rs, rng).map(|(x, _)| x)
}

/// Untruncated prior draw `N(y, sigma^2(T) I)`.
pub fn prior_sample<R: Rng + ?Sized>(params: &SdeParams, y: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    let sigma = params.kernel_std(params.time(params.horizon())?)?;
    Ok(y.iter().map(|&y| y + sigma * standard_normal(rng)).collect())
}

/// Ensemble of scalar reverse solves started by [`truncated_init`] at `schedule.start()`.
///
/// Records the start state, each intermediate noisy state, and the final `x_mean`
/// at time 0. `make_score(path)` supplies the score used by each path.
pub fn reverse_simulate<S, F>(
    params: &SdeParams,
    make_score: F,
    x_pred: f64,
    y: f64,
    schedule: &ReverseSchedule,
    n_paths: usize,
    seed: u64,
) -> Result<TrajectoryStats>
where
    S: ScoreFunction,
    F: Fn(usize) -> S + Sync,
{
    if n_paths == 0 {
        return Err(Error::invalid("n_paths", "must be positive"));
    }
    let n_rec = schedule.steps_executed() + 1;
    let mut times = vec![schedule.start()];
    times.extend(schedule.times().skip(1));
    times.push(0.0);
    let t_rs = params.time(schedule.start().min(params.horizon()))?;

    let n_chunks = n_paths.div_ceil(PATHS_PER_CHUNK);
    let partials: Vec<Result<(Vec<f64>, Vec<f64>)>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sums = vec![0.0; n_rec];
            let mut sq = vec![0.0; n_rec];
            let lo = chunk * PATHS_PER_CHUNK;
            for path in lo..(lo + PATHS_PER_CHUNK).min(n_paths) {
                let mut rng = derived_source(seed, "reverse-path", path as u64);
                let score = make_score(path);
                let init = truncated_init(params, &[x_pred], &[y], t_rs, &mut rng)?;
                sums[0] += init[0];
                sq[0] += init[0] * init[0];
                let mut k = 1;
                let last = reverse_solve_observed(
                    params,
                    &score,
                    &init,
                    &[y],
                    schedule,
                    &mut rng,
                    |_, x| {
                        if k < n_rec - 1 {
                            sums[k] += x[0];
                            sq[k] += x[0] * x[0];
                        }
                        k += 1;
                    },
                )?;
                sums[n_rec - 1] += last[0];
                sq[n_rec - 1] += last[0] * last[0];
            }
            Ok((sums, sq))
        })
        .collect();

    let mut sums = vec![0.0; n_rec];
    let mut sq = vec![0.0; n_rec];
    for part in partials {
        let (s, q) = part?;
        for i in 0..n_rec {
            sums[i] += s[i];
            sq[i] += q[i];
        }
    }
    Ok(TrajectoryStats::from_sums(times, &sums, &sq, n_paths))
}
