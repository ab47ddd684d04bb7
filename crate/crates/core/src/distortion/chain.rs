use std::fmt::Write as _;

use rand::Rng;

use super::DistortionStage;
use crate::signal::Waveform;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Noise,
    Reverberation,
    Microphone,
    Adc,
    Agc,
    Transmission,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Self::Noise => "noise",
            Self::Reverberation => "reverberation",
            Self::Microphone => "microphone",
            Self::Adc => "adc",
            Self::Agc => "agc",
            Self::Transmission => "transmission",
        }
    }
}

/// Parameter distribution for one chain entry.
#[derive(Debug, Clone, PartialEq)]
pub enum StageSampler {
    Noise { snr_db: (f64, f64) },
    Rir,
    /// Uniform choice of low shelf, high shelf or peak.
    Microphone { freq: (f64, f64), gain_db: (f64, f64), q: (f64, f64) },
    Lowpass { orders: Vec<usize>, cutoff: (f64, f64) },
    Highpass { orders: Vec<usize>, cutoff: (f64, f64) },
    BitDepth { bits: Vec<u32> },
    Clip { threshold: (f64, f64) },
    Gain { db: (f64, f64) },
    /// Uniform choice of clipping or gain.
    ClipOrGain { threshold: (f64, f64), db: (f64, f64) },
    Resample { targets: Vec<u32> },
    /// Listed for completeness; never fires.
    ReservedGsm,
}

impl StageSampler {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Noise { .. } => "additive_noise",
            Self::Rir => "rir_convolve",
            Self::Microphone { .. } => "eq",
            Self::Lowpass { .. } => "lowpass",
            Self::Highpass { .. } => "highpass",
            Self::BitDepth { .. } => "bit_depth",
            Self::Clip { .. } => "clip",
            Self::Gain { .. } => "gain",
            Self::ClipOrGain { .. } => "clip_or_gain",
            Self::Resample { .. } => "resample",
            Self::ReservedGsm => "gsm",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainEntry {
    pub family: Family,
    pub probability: f64,
    pub sampler: StageSampler,
}

/// Noise clips and room impulse responses available to a chain.
#[derive(Debug, Clone, Copy, Default)]
pub struct Pools<'a> {
    pub noise: &'a [Waveform],
    pub rir: &'a [Waveform],
}

/// One fired entry with its drawn parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AppliedStage {
    pub family: Family,
    pub stage: DistortionStage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistortionChain {
    entries: Vec<ChainEntry>,
}

fn uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

fn pick<T: Copy, R: Rng + ?Sized>(rng: &mut R, xs: &[T]) -> Result<T> {
    if xs.is_empty() {
        return Err(Error::invalid("sampler", "empty choice list"));
    }
    Ok(xs[rng.random_range(0..xs.len())])
}

impl Default for DistortionChain {
    fn default() -> Self {
        use Family::*;
        let entry = |family, probability, sampler| ChainEntry { family, probability, sampler };
        let eq_gain = (-12.0, 12.0);
        Self {
            entries: vec![
                entry(Noise, 0.3, StageSampler::Noise { snr_db: (-5.0, 20.0) }),
                entry(Reverberation, 0.25, StageSampler::Rir),
                entry(
                    Microphone,
                    0.5,
                    StageSampler::Microphone { freq: (100.0, 6000.0), gain_db: eq_gain, q: (0.5, 2.0) },
                ),
                entry(Adc, 0.7, StageSampler::Lowpass { orders: vec![2, 4, 6, 8], cutoff: (2000.0, 7900.0) }),
                entry(Adc, 0.7, StageSampler::Highpass { orders: vec![2, 4, 6, 8], cutoff: (20.0, 400.0) }),
                entry(Adc, 0.1, StageSampler::BitDepth { bits: vec![8, 12] }),
                entry(Agc, 0.4, StageSampler::ClipOrGain { threshold: (0.1, 0.9), db: (-12.0, 12.0) }),
                entry(Transmission, 0.25, StageSampler::Clip { threshold: (0.1, 0.9) }),
                entry(Transmission, 0.25, StageSampler::Gain { db: (-12.0, 12.0) }),
                entry(Transmission, 0.4, StageSampler::Resample { targets: vec![4000, 8000, 12000] }),
                entry(Transmission, 0.25, StageSampler::ReservedGsm),
            ],
        }
    }
}

impl DistortionChain {
    pub fn new(entries: Vec<ChainEntry>) -> Result<Self> {
        for e in &entries {
            if !(0.0..=1.0).contains(&e.probability) {
                return Err(Error::invalid(
                    "probability",
                    format!("{} entry has probability {}", e.family.name(), e.probability),
                ));
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[ChainEntry] {
        &self.entries
    }

    /// Same chain with every probability replaced by `p`.
    pub fn with_uniform_probability(&self, p: f64) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .map(|e| ChainEntry { probability: p, ..e.clone() })
                .collect(),
        )
    }

    /// Draw which entries fire and their parameters. Each entry consumes one
    /// firing draw, then parameter draws only when it fires.
    pub fn sample_plan<R: Rng + ?Sized>(
        &self,
        sample_rate: u32,
        noise_lengths: &[usize],
        rir_count: usize,
        rng: &mut R,
    ) -> Result<Vec<AppliedStage>> {
        let nyquist = sample_rate as f64 / 2.0;
        // Keep sampled frequencies strictly inside the band at low sample rates.
        let band = |(lo, hi): (f64, f64)| (lo.min(0.49 * nyquist), hi.min(0.98 * nyquist));
        let mut plan = Vec::new();
        for e in &self.entries {
            if matches!(e.sampler, StageSampler::ReservedGsm) {
                continue;
            }
            if rng.random::<f64>() >= e.probability {
                continue;
            }
            let stage = match &e.sampler {
                StageSampler::Noise { snr_db } => {
                    if noise_lengths.is_empty() {
                        return Err(Error::EmptyPool("noise"));
                    }
                    let noise = rng.random_range(0..noise_lengths.len());
                    let len = noise_lengths[noise].max(1);
                    DistortionStage::AdditiveNoise {
                        snr_db: uniform(rng, *snr_db),
                        noise,
                        offset: rng.random_range(0..len),
                    }
                }
                StageSampler::Rir => {
                    if rir_count == 0 {
                        return Err(Error::EmptyPool("rir"));
                    }
                    DistortionStage::RirConvolve { rir: rng.random_range(0..rir_count) }
                }
                StageSampler::Microphone { freq, gain_db, q } => {
                    let choice = rng.random_range(0..3);
                    let freq = log_uniform(rng, band(*freq));
                    let gain_db = uniform(rng, *gain_db);
                    match choice {
                        0 => DistortionStage::LowShelf { freq, gain_db },
                        1 => DistortionStage::HighShelf { freq, gain_db },
                        _ => DistortionStage::Peak { freq, gain_db, q: uniform(rng, *q) },
                    }
                }
                StageSampler::Lowpass { orders, cutoff } => DistortionStage::Lowpass {
                    order: pick(rng, orders)?,
                    cutoff: uniform(rng, band(*cutoff)),
                },
                StageSampler::Highpass { orders, cutoff } => DistortionStage::Highpass {
                    order: pick(rng, orders)?,
                    cutoff: uniform(rng, band(*cutoff)),
                },
                StageSampler::BitDepth { bits } => DistortionStage::BitDepth { bits: pick(rng, bits)? },
                StageSampler::Clip { threshold } => DistortionStage::Clip { threshold: uniform(rng, *threshold) },
                StageSampler::Gain { db } => DistortionStage::Gain { db: uniform(rng, *db) },
                StageSampler::ClipOrGain { threshold, db } => {
                    if rng.random::<bool>() {
                        DistortionStage::Clip { threshold: uniform(rng, *threshold) }
                    } else {
                        DistortionStage::Gain { db: uniform(rng, *db) }
                    }
                }
                StageSampler::Resample { targets } => {
                    DistortionStage::Resample { target_rate: pick(rng, targets)? }
                }
                StageSampler::ReservedGsm => unreachable!("skipped above"),
            };
            stage.validate(sample_rate)?;
            plan.push(AppliedStage { family: e.family, stage });
        }
        Ok(plan)
    }

    /// Apply a plan in order, saturating to `[-1, 1]` after every stage.
    pub fn apply_plan(clean: &Waveform, plan: &[AppliedStage], pools: &Pools<'_>) -> Result<Waveform> {
        let mut w = clean.clone();
        for p in plan {
            let out = p.stage.apply(&w, pools)?;
            w = out.with_samples(out.samples().iter().map(|v| v.clamp(-1.0, 1.0)).collect())?;
        }
        Ok(w)
    }

    pub fn sample_chain<R: Rng + ?Sized>(
        &self,
        clean: &Waveform,
        pools: &Pools<'_>,
        rng: &mut R,
    ) -> Result<(Waveform, Vec<AppliedStage>)> {
        let lengths: Vec<usize> = pools.noise.iter().map(Waveform::len).collect();
        let plan = self.sample_plan(clean.sample_rate(), &lengths, pools.rir.len(), rng)?;
        let degraded = Self::apply_plan(clean, &plan, pools)?;
        Ok((degraded, plan))
    }
}

/// One line per stage: `family<TAB>kind<TAB>params`.
pub fn provenance(plan: &[AppliedStage]) -> String {
    let mut s = String::new();
    for p in plan {
        let _ = writeln!(s, "{}\t{}", p.family.name(), p.stage);
    }
    s
}
