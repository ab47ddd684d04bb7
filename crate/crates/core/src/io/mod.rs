//! File formats: WAV audio and run configuration.

pub mod config;
pub mod wav;

pub use config::RunConfig;
pub use wav::{read_wav, write_wav, SampleFormat, WavError};
