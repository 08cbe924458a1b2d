use crate::exec::Strategy;
use crate::rhythm::{Instrument, MappingConfig, RhythmPattern, Step};

use super::voice::{render_voice_seeded, Kit, Voice};
use super::{loop_sample_count, step_seconds, AudioLoop, SynthError, MAX_BPM, MIN_BPM};

pub const DEFAULT_SEED: u64 = 0x5EED_0FC1_7135;

/// Loudness per step level; index 0 is unused.
const LEVEL_GAIN: [f64; 4] = [0.0, 0.55, 0.8, 1.0];
const MASTER_GAIN: f64 = 0.7;
/// Voices never ring longer than this many steps.
const MAX_RING_STEPS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct RenderOptions {
    pub seed: u64,
    pub kit: Kit,
    pub strategy: Strategy,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            kit: Kit::default(),
            strategy: Strategy::default(),
        }
    }
}

pub fn render_loop(
    p: &RhythmPattern,
    bpm: f64,
    sample_rate: u32,
    mapping: &MappingConfig,
) -> Result<AudioLoop, SynthError> {
    render_loop_with(p, bpm, sample_rate, mapping, &RenderOptions::default())
}

/// Mixes every step's voices at its onset; tails running past the end wrap
/// to the start so the loop repeats without a seam. Output is clamped to
/// `[-1, 1]` and depends only on the inputs and the seed.
pub fn render_loop_with(
    p: &RhythmPattern,
    bpm: f64,
    sample_rate: u32,
    mapping: &MappingConfig,
    opts: &RenderOptions,
) -> Result<AudioLoop, SynthError> {
    if !(MIN_BPM..=MAX_BPM).contains(&bpm) {
        return Err(SynthError::InvalidTempo(bpm));
    }
    if sample_rate == 0 {
        return Err(SynthError::InvalidSampleRate);
    }
    if p.len() < 4 {
        return Err(SynthError::TooFewSteps(p.len()));
    }
    opts.kit.validate()?;

    let step_s = step_seconds(bpm);
    let total = loop_sample_count(p.len(), bpm, sample_rate);
    let max_ring = step_s * MAX_RING_STEPS;
    let indexed: Vec<(usize, &Step)> = p.steps.iter().enumerate().collect();

    // voice buffers per step, rendered independently then mixed in order
    let rendered = opts.strategy.map(&indexed, |&(i, step)| {
        let mut voices = Vec::new();
        if step.level.get() == 0 {
            return Ok(voices);
        }
        let velocity = LEVEL_GAIN[step.level.get() as usize];
        let mut add = |voice: Voice, freq: Option<f64>| -> Result<(), SynthError> {
            let params = opts.kit.params(voice).fitted(max_ring);
            let seed = voice_seed(opts.seed, i, voice);
            let buf = render_voice_seeded(voice, &params, freq, params.ring_seconds(), sample_rate, seed)?;
            voices.push((buf, velocity));
            Ok(())
        };
        for (inst, voice) in [
            (Instrument::Kick, Voice::Kick),
            (Instrument::Snare, Voice::Snare),
            (Instrument::Hat, Voice::Hat),
        ] {
            if step.instruments.contains(inst) {
                add(voice, None)?;
            }
        }
        if let Some(degree) = step.bass_degree {
            add(Voice::Bass, Some(mapping.bass_hz(degree)))?;
        }
        Ok(voices)
    });

    let mut mix = vec![0.0_f64; total];
    for (i, voices) in rendered.into_iter().enumerate() {
        let onset = (i as f64 * step_s * sample_rate as f64).round() as usize;
        for (buf, velocity) in voices? {
            for (k, &s) in buf.iter().enumerate() {
                mix[(onset + k) % total] += s as f64 * velocity * MASTER_GAIN;
            }
        }
    }
    Ok(AudioLoop {
        samples: mix.into_iter().map(|s| s.clamp(-1.0, 1.0) as f32).collect(),
        sample_rate,
        bpm,
        steps: p.len(),
    })
}

/// SplitMix64 over (seed, step, voice).
fn voice_seed(seed: u64, step: usize, voice: Voice) -> u64 {
    let mut z = seed ^ ((step as u64) << 8 | voice.index()).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
