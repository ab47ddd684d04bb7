//! Mono RIFF/WAVE reading and writing, 16-bit PCM or 32-bit float.

use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::signal::Waveform;
use crate::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_FLOAT: u16 = 3;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    Pcm16,
    Float32,
}

impl std::str::FromStr for SampleFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcm16" => Ok(Self::Pcm16),
            "float32" => Ok(Self::Float32),
            other => Err(Error::invalid("format", format!("expected pcm16 or float32, got `{other}`"))),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WavError {
    #[error("missing `{0}` chunk")]
    MissingChunk(&'static str),
    #[error("`{chunk}` chunk truncated: needs {needed} bytes, {available} available")]
    Truncated {
        chunk: &'static str,
        needed: usize,
        available: usize,
    },
    #[error("unsupported encoding: format tag {tag:#06x}, {bits} bits per sample")]
    Unsupported { tag: u16, bits: u16 },
    #[error("expected mono audio, got {0} channels")]
    NotMono(u16),
    #[error("malformed header: {0}")]
    Malformed(String),
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Format {
    tag: u16,
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn parse_fmt(body: &[u8]) -> Result<Format, WavError> {
    if body.len() < 16 {
        return Err(WavError::Truncated {
            chunk: "fmt ",
            needed: 16,
            available: body.len(),
        });
    }
    let mut tag = u16_at(body, 0);
    if tag == FORMAT_EXTENSIBLE {
        if body.len() < 40 {
            return Err(WavError::Truncated {
                chunk: "fmt ",
                needed: 40,
                available: body.len(),
            });
        }
        // The sub-format GUID starts with the plain format tag.
        tag = u16_at(body, 24);
    }
    Ok(Format {
        tag,
        channels: u16_at(body, 2),
        sample_rate: u32_at(body, 4),
        bits: u16_at(body, 14),
    })
}

/// Decode a WAV image. PCM is scaled by `1 / 32768`.
pub fn decode(bytes: &[u8]) -> Result<Waveform> {
    if bytes.len() < 4 || &bytes[0..4] != b"RIFF" {
        return Err(WavError::MissingChunk("RIFF").into());
    }
    if bytes.len() < 12 || &bytes[8..12] != b"WAVE" {
        return Err(WavError::MissingChunk("WAVE").into());
    }
    let mut pos = 12;
    let mut format = None;
    let mut data = None;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let start = pos + 8;
        let available = bytes.len() - start;
        let name = match id {
            b"fmt " => Some("fmt "),
            b"data" => Some("data"),
            _ => None,
        };
        if size > available {
            if let Some(chunk) = name {
                return Err(WavError::Truncated {
                    chunk,
                    needed: size,
                    available,
                }
                .into());
            }
            break;
        }
        let body = &bytes[start..start + size];
        match id {
            b"fmt " => format = Some(parse_fmt(body)?),
            b"data" => data = Some(body),
            _ => {}
        }
        pos = start + size + (size & 1);
    }
    let format = format.ok_or(WavError::MissingChunk("fmt "))?;
    let data = data.ok_or(WavError::MissingChunk("data"))?;
    if format.channels != 1 {
        return Err(WavError::NotMono(format.channels).into());
    }
    if format.sample_rate == 0 {
        return Err(WavError::Malformed("sample rate is 0".into()).into());
    }
    let samples: Vec<f64> = match (format.tag, format.bits) {
        (FORMAT_PCM, 16) => data
            .chunks_exact(2)
            .map(|c| i16::from_le_bytes([c[0], c[1]]) as f64 / 32768.0)
            .collect(),
        (FORMAT_FLOAT, 32) => data
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect(),
        (tag, bits) => return Err(WavError::Unsupported { tag, bits }.into()),
    };
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(WavError::Malformed("non-finite float sample".into()).into());
    }
    Waveform::new(samples, format.sample_rate)
}

pub fn encode(w: &Waveform, format: SampleFormat) -> Vec<u8> {
    let (tag, bits) = match format {
        SampleFormat::Pcm16 => (FORMAT_PCM, 16u16),
        SampleFormat::Float32 => (FORMAT_FLOAT, 32u16),
    };
    let block = bits / 8;
    let data_len = w.len() * block as usize;
    let mut out = Vec::with_capacity(44 + data_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&((36 + data_len) as u32).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&w.sample_rate().to_le_bytes());
    out.extend_from_slice(&(w.sample_rate() * block as u32).to_le_bytes());
    out.extend_from_slice(&block.to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());
    for &v in w.samples() {
        match format {
            SampleFormat::Pcm16 => {
                let q = (v * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
                out.extend_from_slice(&q.to_le_bytes());
            }
            SampleFormat::Float32 => out.extend_from_slice(&(v as f32).to_le_bytes()),
        }
    }
    out
}

pub fn read_wav(path: impl AsRef<Path>) -> Result<Waveform> {
    decode(&fs::read(path)?)
}

pub fn write_wav(path: impl AsRef<Path>, w: &Waveform, format: SampleFormat) -> Result<()> {
    fs::write(path, encode(w, format))?;
    Ok(())
}
