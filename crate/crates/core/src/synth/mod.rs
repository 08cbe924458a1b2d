//! Loop rendering: four synthesized voices mixed on a sixteenth-note grid,
//! plus WAV and MIDI encoders.

mod midi;
mod render;
mod voice;
mod wav;

use thiserror::Error;

pub use midi::{encode_midi, encode_midi_with, DRUM_KEYS, TICKS_PER_QUARTER, TICKS_PER_STEP};
pub use render::{render_loop, render_loop_with, RenderOptions, DEFAULT_SEED};
pub use voice::{render_voice, render_voice_seeded, Kit, Oscillator, Voice, VoiceParams};
pub use wav::{encode_wav, WAV_HEADER_LEN};

pub const DEFAULT_SAMPLE_RATE: u32 = 44_100;
pub const DEFAULT_BPM: f64 = 120.0;
pub const MIN_BPM: f64 = 40.0;
pub const MAX_BPM: f64 = 300.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("bass voice needs a frequency")]
    MissingFrequency,
    #[error("tempo {0} bpm outside [40, 300]")]
    InvalidTempo(f64),
    #[error("duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("sample rate must be positive")]
    InvalidSampleRate,
    #[error("a loop needs at least 4 steps, got {0}")]
    TooFewSteps(usize),
    #[error("invalid voice parameters: {0}")]
    InvalidVoiceParams(String),
}

/// Sixteenth-note length in seconds.
pub fn step_seconds(bpm: f64) -> f64 {
    60.0 / (bpm * 4.0)
}

/// `round(steps * step_seconds * sample_rate)`.
pub fn loop_sample_count(steps: usize, bpm: f64, sample_rate: u32) -> usize {
    (steps as f64 * step_seconds(bpm) * sample_rate as f64).round() as usize
}

/// A rendered, seamlessly repeatable mono loop.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioLoop {
    pub samples: Vec<f32>,
    pub sample_rate: u32,
    pub bpm: f64,
    pub steps: usize,
}

impl AudioLoop {
    pub fn step_seconds(&self) -> f64 {
        step_seconds(self.bpm)
    }

    pub fn duration_seconds(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    pub fn rms(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self.samples.iter().map(|&s| (s as f64) * (s as f64)).sum();
        (sum / self.samples.len() as f64).sqrt()
    }

    pub fn peak(&self) -> f32 {
        self.samples.iter().fold(0.0_f32, |m, s| m.max(s.abs()))
    }
}
