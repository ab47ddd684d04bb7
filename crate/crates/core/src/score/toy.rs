//! A small fully connected score network with hand-written backpropagation.
//!
//! Input is `[x_t, y, fourier(t)]`, two `tanh` hidden layers, linear output `o`.
//! The score is `o / sigma(t)`, so `o` regresses onto `-z` under the DSM loss.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;

use super::ScoreFunction;
use crate::error::check_len;
use crate::rng::standard_normal;
use crate::sde::{DiffusionTime, SdeParams};
use crate::{Error, Result};

pub const TIME_FEATURES: usize = 16;
pub const DEFAULT_HIDDEN: usize = 64;
pub const DEFAULT_EMA_FACTOR: f64 = 0.999;

const MAGIC: &[u8; 4] = b"TSCN";
const FORMAT_VERSION: u32 = 1;

/// `[sin(w_j t), cos(w_j t)]` for 8 geometrically spaced `w_j` in `[pi, 32 pi]`.
pub fn time_features(t: f64) -> [f64; TIME_FEATURES] {
    let mut out = [0.0; TIME_FEATURES];
    for j in 0..TIME_FEATURES / 2 {
        let w = PI * 2f64.powf(5.0 * j as f64 / 7.0);
        out[2 * j] = (w * t).sin();
        out[2 * j + 1] = (w * t).cos();
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Layout {
    dim: usize,
    hidden: usize,
}

impl Layout {
    fn input(&self) -> usize {
        2 * self.dim + TIME_FEATURES
    }
    fn w1(&self) -> usize {
        0
    }
    fn b1(&self) -> usize {
        self.w1() + self.hidden * self.input()
    }
    fn w2(&self) -> usize {
        self.b1() + self.hidden
    }
    fn b2(&self) -> usize {
        self.w2() + self.hidden * self.hidden
    }
    fn w3(&self) -> usize {
        self.b2() + self.hidden
    }
    fn b3(&self) -> usize {
        self.w3() + self.dim * self.hidden
    }
    fn len(&self) -> usize {
        self.b3() + self.dim
    }
}

/// One DSM training example with its draws fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct DsmSample {
    pub x_t: Vec<f64>,
    pub y: Vec<f64>,
    pub t: f64,
    pub sigma: f64,
    pub z: Vec<f64>,
}

impl DsmSample {
    pub fn draw<R: Rng + ?Sized>(
        params: &SdeParams,
        x0: &[f64],
        y: &[f64],
        t: DiffusionTime,
        rng: &mut R,
    ) -> Result<Self> {
        let sigma = params.kernel_std(t)?;
        if sigma <= 0.0 {
            return Err(Error::Domain("DSM sample drawn at sigma = 0".into()));
        }
        let (x_t, z) = params.sample_perturbed(x0, y, t, rng)?;
        Ok(Self {
            x_t,
            y: y.to_vec(),
            t: t.value(),
            sigma,
            z,
        })
    }
}

/// Weights are stored flat: `W1, b1, W2, b2, W3, b3`, matrices row-major `[out][in]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyScoreNet {
    layout: Layout,
    params: Vec<f64>,
    ema: Option<Vec<f64>>,
    ema_factor: f64,
}

struct Activations {
    input: Vec<f64>,
    a1: Vec<f64>,
    a2: Vec<f64>,
    out: Vec<f64>,
}

impl ToyScoreNet {
    /// Gaussian init with variance `1 / fan_in`, zero biases, EMA shadow enabled.
    pub fn new<R: Rng + ?Sized>(dim: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        if dim == 0 || hidden == 0 {
            return Err(Error::invalid("dim", "network dimensions must be positive"));
        }
        let layout = Layout { dim, hidden };
        let mut params = vec![0.0; layout.len()];
        let mut fill = |start: usize, count: usize, fan_in: usize| {
            let s = (1.0 / fan_in as f64).sqrt();
            for p in &mut params[start..start + count] {
                *p = s * standard_normal(rng);
            }
        };
        fill(layout.w1(), hidden * layout.input(), layout.input());
        fill(layout.w2(), hidden * hidden, hidden);
        fill(layout.w3(), dim * hidden, hidden);
        Ok(Self {
            layout,
            ema: Some(params.clone()),
            params,
            ema_factor: DEFAULT_EMA_FACTOR,
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim
    }
    pub fn hidden(&self) -> usize {
        self.layout.hidden
    }
    pub fn params(&self) -> &[f64] {
        &self.params
    }
    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }
    pub fn ema(&self) -> Option<&[f64]> {
        self.ema.as_deref()
    }
    pub fn ema_factor(&self) -> f64 {
        self.ema_factor
    }

    pub fn set_ema_factor(&mut self, factor: f64) -> Result<()> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::invalid("ema_factor", format!("must lie in (0, 1), got {factor}")));
        }
        self.ema_factor = factor;
        Ok(())
    }

    /// `ema <- ema + (1 - factor) (live - ema)`.
    pub fn update_ema(&mut self) {
        let w = 1.0 - self.ema_factor;
        if let Some(ema) = &mut self.ema {
            for (e, p) in ema.iter_mut().zip(&self.params) {
                *e += w * (p - *e);
            }
        }
    }

    /// Weights used for inference: the EMA shadow when present.
    pub fn inference_params(&self) -> &[f64] {
        self.ema.as_deref().unwrap_or(&self.params)
    }

    fn activations(&self, weights: &[f64], x_t: &[f64], y: &[f64], t: f64) -> Activations {
        let l = self.layout;
        let mut input = Vec::with_capacity(l.input());
        input.extend_from_slice(x_t);
        input.extend_from_slice(y);
        input.extend_from_slice(&time_features(t));
        let a1 = dense_tanh(&weights[l.w1()..l.b1()], &weights[l.b1()..l.w2()], &input);
        let a2 = dense_tanh(&weights[l.w2()..l.b2()], &weights[l.b2()..l.w3()], &a1);
        let out = dense(&weights[l.w3()..l.b3()], &weights[l.b3()..l.len()], &a2);
        Activations { input, a1, a2, out }
    }

    /// Raw network output `o` (score times sigma) for one `dim`-sized state.
    pub fn output(&self, weights: &[f64], x_t: &[f64], y: &[f64], t: f64) -> Vec<f64> {
        self.activations(weights, x_t, y, t).out
    }

    /// Mean DSM loss over fixed samples and its gradient with respect to `weights`.
    pub fn loss_and_grad(&self, weights: &[f64], samples: &[DsmSample], grad: &mut [f64]) -> Result<f64> {
        let l = self.layout;
        check_len(l.len(), weights.len())?;
        check_len(l.len(), grad.len())?;
        grad.iter_mut().for_each(|g| *g = 0.0);
        if samples.is_empty() {
            return Ok(0.0);
        }
        let scale = 1.0 / samples.len() as f64;
        let mut loss = 0.0;
        let (h, d, n_in) = (l.hidden, l.dim, l.input());
        let mut dh2 = vec![0.0; h];
        let mut dh1 = vec![0.0; h];
        for s in samples {
            check_len(d, s.x_t.len())?;
            let act = self.activations(weights, &s.x_t, &s.y, s.t);
            // r = (o + z) / sigma, loss = sum r^2
            let mut d_out = vec![0.0; d];
            for ((g, o), z) in d_out.iter_mut().zip(&act.out).zip(&s.z) {
                let r = (o + z) / s.sigma;
                loss += r * r;
                *g = 2.0 * r / s.sigma * scale;
            }
            let w3 = &weights[l.w3()..l.b3()];
            let w2 = &weights[l.w2()..l.b2()];
            for i in 0..d {
                grad[l.b3() + i] += d_out[i];
                for j in 0..h {
                    grad[l.w3() + i * h + j] += d_out[i] * act.a2[j];
                }
            }
            for j in 0..h {
                let da2: f64 = (0..d).map(|i| w3[i * h + j] * d_out[i]).sum();
                dh2[j] = da2 * (1.0 - act.a2[j] * act.a2[j]);
            }
            for j in 0..h {
                grad[l.b2() + j] += dh2[j];
                for m in 0..h {
                    grad[l.w2() + j * h + m] += dh2[j] * act.a1[m];
                }
            }
            for m in 0..h {
                let da1: f64 = (0..h).map(|j| w2[j * h + m] * dh2[j]).sum();
                dh1[m] = da1 * (1.0 - act.a1[m] * act.a1[m]);
            }
            for m in 0..h {
                grad[l.b1() + m] += dh1[m];
                for k in 0..n_in {
                    grad[l.w1() + m * n_in + k] += dh1[m] * act.input[k];
                }
            }
        }
        Ok(loss * scale)
    }

    /// Mean DSM loss over fixed samples (no gradient).
    pub fn loss(&self, weights: &[f64], samples: &[DsmSample]) -> f64 {
        let total: f64 = samples
            .iter()
            .map(|s| {
                let o = self.output(weights, &s.x_t, &s.y, s.t);
                o.iter()
                    .zip(&s.z)
                    .map(|(o, z)| ((o + z) / s.sigma).powi(2))
                    .sum::<f64>()
            })
            .sum();
        total / samples.len().max(1) as f64
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.layout.dim as u32).to_le_bytes())?;
        w.write_all(&(self.layout.hidden as u32).to_le_bytes())?;
        w.write_all(&(TIME_FEATURES as u32).to_le_bytes())?;
        w.write_all(&self.ema_factor.to_le_bytes())?;
        w.write_all(&[u8::from(self.ema.is_some())])?;
        for v in &self.params {
            w.write_all(&v.to_le_bytes())?;
        }
        if let Some(ema) = &self.ema {
            for v in ema {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        read_exact(&mut r, &mut magic, "magic")?;
        if &magic != MAGIC {
            return Err(Error::Model("not a score network file (bad magic)".into()));
        }
        let version = read_u32(&mut r, "version")?;
        if version != FORMAT_VERSION {
            return Err(Error::Model(format!("unsupported format version {version}")));
        }
        let dim = read_u32(&mut r, "dim")? as usize;
        let hidden = read_u32(&mut r, "hidden")? as usize;
        let tf = read_u32(&mut r, "time_features")? as usize;
        if tf != TIME_FEATURES || dim == 0 || hidden == 0 {
            return Err(Error::Model(format!(
                "unsupported geometry: dim {dim}, hidden {hidden}, time features {tf}"
            )));
        }
        let ema_factor = read_f64(&mut r, "ema_factor")?;
        let mut flag = [0u8; 1];
        read_exact(&mut r, &mut flag, "ema flag")?;
        let layout = Layout { dim, hidden };
        let params = read_f64s(&mut r, layout.len(), "weights")?;
        let ema = if flag[0] != 0 {
            Some(read_f64s(&mut r, layout.len(), "ema weights")?)
        } else {
            None
        };
        let mut net = Self {
            layout,
            params,
            ema,
            ema_factor: DEFAULT_EMA_FACTOR,
        };
        net.set_ema_factor(ema_factor)?;
        if net.params.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite weights".into()));
        }
        Ok(net)
    }
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8], what: &str) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::Model(format!("truncated while reading {what}: {e}")))
}

fn read_u32<R: Read>(r: &mut R, what: &str) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b, what)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R, what: &str) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b, what)?;
    Ok(f64::from_le_bytes(b))
}

fn read_f64s<R: Read>(r: &mut R, n: usize, what: &str) -> Result<Vec<f64>> {
    (0..n).map(|_| read_f64(r, what)).collect()
}

fn dense(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let n_in = x.len();
    b.iter()
        .enumerate()
        .map(|(j, bj)| bj + w[j * n_in..(j + 1) * n_in].iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}

fn dense_tanh(w: &[f64], b: &[f64], x: &[f64]) -> Vec<f64> {
    let mut v = dense(w, b, x);
    v.iter_mut().for_each(|a| *a = a.tanh());
    v
}

/// A trained network used as a [`ScoreFunction`], applied to consecutive
/// `dim`-sized chunks of the state.
#[derive(Debug, Clone)]
pub struct NetScore {
    net: ToyScoreNet,
    params: SdeParams,
}

impl NetScore {
    pub fn new(net: ToyScoreNet, params: SdeParams) -> Self {
        Self { net, params }
    }

    pub fn net(&self) -> &ToyScoreNet {
        &self.net
    }
}

impl ScoreFunction for NetScore {
    fn score(&self, x_t: &[f64], y: &[f64], t: DiffusionTime) -> Result<Vec<f64>> {
        check_len(x_t.len(), y.len())?;
        let d = self.net.dim();
        if !x_t.len().is_multiple_of(d) {
            return Err(Error::invalid(
                "x_t",
                format!("length {} is not a multiple of the network dim {d}", x_t.len()),
            ));
        }
        let sigma = self.params.kernel_std(t)?;
        if sigma <= 0.0 {
            return Err(Error::Domain("network score undefined at sigma = 0".into()));
        }
        let weights = self.net.inference_params();
        let mut out = Vec::with_capacity(x_t.len());
        for (xc, yc) in x_t.chunks(d).zip(y.chunks(d)) {
            out.extend(self.net.output(weights, xc, yc, t.value()).iter().map(|o| o / sigma));
        }
        Ok(out)
    }
}
