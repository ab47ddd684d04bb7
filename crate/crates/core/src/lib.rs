//! Score-based diffusion speech enhancement.
//!
//! The crate covers the numerical machinery behind a predictive/generative
//! speech enhancer that diffuses compressed STFT magnitudes:
//!
//! - [`sde`]: OUVE and BBED drift/diffusion coefficients, closed-form
//!   perturbation kernels, conditional scores and the exponential integral.
//! - [`sampler`]: forward Euler-Maruyama simulation (kernel verification),
//!   reverse-time Euler-Maruyama solves and truncated-diffusion initialisation.
//! - [`score`]: score/predictive interfaces, analytic oracles, a small
//!   trainable score network and the denoising score matching trainer.
//! - [`signal`]: STFT/iSTFT, amplitude compression, output fusion and the
//!   end-to-end [`signal::enhance`] orchestration.
//! - [`distortion`]: the universal degradation chain used for corpus generation.
//! - [`metrics`]: LSD, spectrogram SSIM, SNR and SI-SNR.
//! - [`io`]: WAV files, run configuration and CSV export.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod distortion;
pub mod error;
pub mod io;
pub mod metrics;
pub mod rng;
pub mod sampler;
pub mod score;
pub mod sde;
pub mod signal;

pub use error::{Error, Result};
