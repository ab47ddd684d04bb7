//! Flat `section.key = value` run configuration.

use std::fmt::Write as _;
use std::path::Path;

use crate::sampler::ReverseSchedule;
use crate::sde::{SdeKind, SdeParams};
use crate::signal::{EnhanceConfig, FusionConfig, StftConfig, TransformConfig};
use crate::{Error, Result};

pub const KEYS: [&str; 15] = [
    "sde.kind",
    "sde.gamma",
    "sde.c",
    "sde.k",
    "sde.T",
    "sampler.steps",
    "sampler.trs",
    "fusion.alpha",
    "transform.beta1",
    "transform.beta2",
    "stft.window",
    "stft.hop",
    "seed",
    "enhance.pred",
    "enhance.score",
];

/// Run settings. Values are validated together by [`RunConfig::enhance_config`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sde_kind: SdeKind,
    pub gamma: f64,
    pub c: f64,
    pub k: f64,
    pub horizon: f64,
    pub steps: usize,
    pub trs: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub window: usize,
    pub hop: usize,
    pub seed: u64,
    /// `identity`, `oracle` or `specsub`.
    pub pred: String,
    /// `oracle`, `analytic`, `zero` or `model:<path>`.
    pub score: String,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sde = SdeParams::bbed_default();
        let stft = StftConfig::default();
        let t = TransformConfig::default();
        Self {
            sde_kind: sde.kind(),
            gamma: sde.gamma(),
            c: sde.c(),
            k: sde.k(),
            horizon: sde.horizon(),
            steps: 25,
            trs: 0.12,
            alpha: FusionConfig::default().alpha(),
            beta1: t.beta1(),
            beta2: t.beta2(),
            window: stft.window_length(),
            hop: stft.hop(),
            seed: 0,
            pred: "specsub".into(),
            score: "analytic".into(),
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("`{key}` expects a number, got `{value}`"))
}

impl RunConfig {
    /// Set one key. Errors carry no line number; [`RunConfig::parse`] adds it.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        let v = value.trim();
        match key.trim() {
            "sde.kind" => self.sde_kind = v.parse().map_err(|e: Error| e.to_string())?,
            "sde.gamma" => self.gamma = parse_num(key, v)?,
            "sde.c" => self.c = parse_num(key, v)?,
            "sde.k" => self.k = parse_num(key, v)?,
            "sde.T" => self.horizon = parse_num(key, v)?,
            "sampler.steps" => self.steps = parse_num(key, v)?,
            "sampler.trs" => self.trs = parse_num(key, v)?,
            "fusion.alpha" => self.alpha = parse_num(key, v)?,
            "transform.beta1" => self.beta1 = parse_num(key, v)?,
            "transform.beta2" => self.beta2 = parse_num(key, v)?,
            "stft.window" => self.window = parse_num(key, v)?,
            "stft.hop" => self.hop = parse_num(key, v)?,
            "seed" => self.seed = parse_num(key, v)?,
            "enhance.pred" => match v {
                "identity" | "oracle" | "specsub" => self.pred = v.into(),
                _ => return Err(format!("`enhance.pred` expects identity, oracle or specsub, got `{v}`")),
            },
            "enhance.score" => {
                if !(matches!(v, "oracle" | "analytic" | "zero") || v.starts_with("model:")) {
                    return Err(format!("`enhance.score` expects oracle, analytic, zero or model:<path>, got `{v}`"));
                }
                self.score = v.into()
            }
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    /// Parse over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                reason: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.set(key, value).map_err(|reason| Error::Config { line: i + 1, reason })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn sde(&self) -> Result<SdeParams> {
        let gamma = if self.sde_kind == SdeKind::Bbed { 1.0 } else { self.gamma };
        SdeParams::new(self.sde_kind, gamma, self.c, self.k, self.horizon)
    }

    pub fn enhance_config(&self) -> Result<EnhanceConfig> {
        let sde = self.sde()?;
        Ok(EnhanceConfig {
            sde,
            schedule: ReverseSchedule::truncated(&sde, self.steps, self.trs)?,
            fusion: FusionConfig::new(self.alpha)?,
            transform: TransformConfig::new(self.beta1, self.beta2)?,
            stft: StftConfig::new(self.window, self.hop)?,
        })
    }

    /// Every setting as `# key = value` lines.
    pub fn header(&self) -> String {
        let values = [
            self.sde_kind.name().to_string(),
            self.gamma.to_string(),
            self.c.to_string(),
            self.k.to_string(),
            self.horizon.to_string(),
            self.steps.to_string(),
            self.trs.to_string(),
            self.alpha.to_string(),
            self.beta1.to_string(),
            self.beta2.to_string(),
            self.window.to_string(),
            self.hop.to_string(),
            self.seed.to_string(),
            self.pred.clone(),
            self.score.clone(),
        ];
        let mut s = String::new();
        for (k, v) in KEYS.iter().zip(values) {
            let _ = writeln!(s, "# {k} = {v}");
        }
        s
    }
}
