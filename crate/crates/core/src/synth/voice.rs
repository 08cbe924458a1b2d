use std::f64::consts::TAU;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::render::DEFAULT_SEED;
use super::SynthError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Voice {
    Kick,
    Snare,
    Hat,
    Bass,
}

impl Voice {
    pub const ALL: [Voice; 4] = [Voice::Kick, Voice::Snare, Voice::Hat, Voice::Bass];

    pub(crate) fn index(self) -> u64 {
        match self {
            Voice::Kick => 0,
            Voice::Snare => 1,
            Voice::Hat => 2,
            Voice::Bass => 3,
        }
    }
}

/// Sound source of a voice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oscillator {
    /// Sine whose pitch falls exponentially from `start_hz` towards `end_hz`.
    SineDrop { start_hz: f64, end_hz: f64, time_constant_s: f64 },
    /// White noise through a one-pole high-pass.
    Noise { highpass_hz: f64 },
    /// Band-limited sawtooth at the requested frequency.
    Saw,
}

/// Synthesis settings for one voice.
///
/// The envelope ramps linearly over `attack_s`, then decays exponentially
/// with time constant `decay_s / 5` and is faded to exact silence at
/// `attack_s + decay_s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoiceParams {
    pub oscillator: Oscillator,
    pub gain: f64,
    pub attack_s: f64,
    pub decay_s: f64,
}

impl VoiceParams {
    pub fn default_for(voice: Voice) -> Self {
        match voice {
            Voice::Kick => Self {
                oscillator: Oscillator::SineDrop {
                    start_hz: 150.0,
                    end_hz: 50.0,
                    time_constant_s: 0.04,
                },
                gain: 0.9,
                attack_s: 0.002,
                decay_s: 0.4,
            },
            Voice::Snare => Self {
                oscillator: Oscillator::Noise { highpass_hz: 1200.0 },
                gain: 0.5,
                attack_s: 0.001,
                decay_s: 0.2,
            },
            Voice::Hat => Self {
                oscillator: Oscillator::Noise { highpass_hz: 7000.0 },
                gain: 0.3,
                attack_s: 0.0005,
                decay_s: 0.1,
            },
            Voice::Bass => Self {
                oscillator: Oscillator::Saw,
                gain: 0.5,
                attack_s: 0.01,
                decay_s: 0.45,
            },
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: &str| Err(SynthError::InvalidVoiceParams(m.to_string()));
        if !(0.0..=1.0).contains(&self.gain) {
            return bad("gain must lie in [0, 1]");
        }
        if !(self.attack_s >= 0.0 && self.decay_s > 0.0) {
            return bad("attack must be >= 0 and decay > 0");
        }
        match self.oscillator {
            Oscillator::SineDrop {
                start_hz,
                end_hz,
                time_constant_s,
            } if !(start_hz > 0.0 && end_hz > 0.0 && time_constant_s > 0.0) => bad("kick pitches must be positive"),
            Oscillator::Noise { highpass_hz } if highpass_hz <= 0.0 => bad("high-pass corner must be positive"),
            _ => Ok(()),
        }
    }

    /// Total sounding time.
    pub fn ring_seconds(&self) -> f64 {
        self.attack_s + self.decay_s
    }

    /// Shortens the decay so the voice stops within `max_s`.
    pub fn fitted(mut self, max_s: f64) -> Self {
        if self.ring_seconds() > max_s {
            self.attack_s = self.attack_s.min(max_s / 2.0);
            self.decay_s = max_s - self.attack_s;
        }
        self
    }

    fn envelope(&self, t: f64) -> f64 {
        let end = self.ring_seconds();
        if t >= end {
            return 0.0;
        }
        let level = if t < self.attack_s {
            t / self.attack_s
        } else {
            (-(t - self.attack_s) * 5.0 / self.decay_s).exp()
        };
        let fade = (self.decay_s * 0.25).min(0.005);
        if t > end - fade {
            let x = (end - t) / fade;
            level * 0.5 * (1.0 - (std::f64::consts::PI * x).cos())
        } else {
            level
        }
    }
}

/// The four voices used by the loop renderer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kit {
    pub kick: VoiceParams,
    pub snare: VoiceParams,
    pub hat: VoiceParams,
    pub bass: VoiceParams,
}

impl Default for Kit {
    fn default() -> Self {
        Self {
            kick: VoiceParams::default_for(Voice::Kick),
            snare: VoiceParams::default_for(Voice::Snare),
            hat: VoiceParams::default_for(Voice::Hat),
            bass: VoiceParams::default_for(Voice::Bass),
        }
    }
}

impl Kit {
    pub fn params(&self, voice: Voice) -> &VoiceParams {
        match voice {
            Voice::Kick => &self.kick,
            Voice::Snare => &self.snare,
            Voice::Hat => &self.hat,
            Voice::Bass => &self.bass,
        }
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        Voice::ALL.iter().try_for_each(|v| self.params(*v).validate())
    }
}

/// Renders `dur` seconds of one voice with the default noise seed.
pub fn render_voice(
    voice: Voice,
    params: &VoiceParams,
    freq: Option<f64>,
    dur: f64,
    sample_rate: u32,
) -> Result<Vec<f32>, SynthError> {
    render_voice_seeded(voice, params, freq, dur, sample_rate, DEFAULT_SEED)
}

pub fn render_voice_seeded(
    voice: Voice,
    params: &VoiceParams,
    freq: Option<f64>,
    dur: f64,
    sample_rate: u32,
    seed: u64,
) -> Result<Vec<f32>, SynthError> {
    if dur.is_nan() || dur <= 0.0 {
        return Err(SynthError::InvalidDuration(dur));
    }
    if sample_rate == 0 {
        return Err(SynthError::InvalidSampleRate);
    }
    params.validate()?;
    let freq = match (voice, freq) {
        (Voice::Bass, None) => return Err(SynthError::MissingFrequency),
        (Voice::Bass, Some(f)) if f.is_nan() || f <= 0.0 => return Err(SynthError::MissingFrequency),
        (_, f) => f,
    };
    let n = (dur * sample_rate as f64).round() as usize;
    let sr = sample_rate as f64;
    let dt = 1.0 / sr;
    let mut out = Vec::with_capacity(n);

    match params.oscillator {
        Oscillator::SineDrop {
            start_hz,
            end_hz,
            time_constant_s,
        } => {
            let mut phase = 0.0_f64;
            for i in 0..n {
                let t = i as f64 * dt;
                out.push(phase.sin() * params.envelope(t));
                let f = end_hz + (start_hz - end_hz) * (-t / time_constant_s).exp();
                phase = (phase + TAU * f * dt) % TAU;
            }
        }
        Oscillator::Noise { highpass_hz } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let rc = 1.0 / (TAU * highpass_hz);
            let a = rc / (rc + dt);
            let (mut prev_x, mut prev_y) = (0.0, 0.0);
            for i in 0..n {
                let x = unit_noise(&mut rng);
                let y = a * (prev_y + x - prev_x);
                prev_x = x;
                prev_y = y;
                out.push(y * params.envelope(i as f64 * dt));
            }
        }
        Oscillator::Saw => {
            let f = freq.unwrap_or(110.0);
            let inc = f * dt;
            let mut phase = 0.0_f64;
            for i in 0..n {
                let saw = 2.0 * phase - 1.0 - poly_blep(phase, inc);
                out.push(saw * params.envelope(i as f64 * dt));
                phase += inc;
                if phase >= 1.0 {
                    phase -= 1.0;
                }
            }
        }
    }
    Ok(out
        .into_iter()
        .map(|s| (s * params.gain).clamp(-1.0, 1.0) as f32)
        .collect())
}

/// Uniform in `[-1, 1)`.
fn unit_noise(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

/// Polynomial correction for the saw discontinuity at phase wrap.
fn poly_blep(t: f64, dt: f64) -> f64 {
    if t < dt {
        let x = t / dt;
        x + x - x * x - 1.0
    } else if t > 1.0 - dt {
        let x = (t - 1.0) / dt;
        x * x + x + x + 1.0
    } else {
        0.0
    }
}
