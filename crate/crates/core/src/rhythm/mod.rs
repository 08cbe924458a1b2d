//! Compass-to-sequencer mapping and Euclidean reference rhythms.
//!
//! Every histogram bin becomes one step. A bin's normalized weight is
//! quantized to a level, and the level alone decides which voices sound:
//!
//! | level | text | voices              | bass degree          |
//! |-------|------|---------------------|----------------------|
//! | 0     | `.`  | none                | none                 |
//! | 1     | `h`  | hat                 | none                 |
//! | 2     | `H`  | hat, snare          | 1                    |
//! | 3     | `X`  | hat, snare, kick    | `floor(4 * value)`   |

mod euclid;

use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::orientation::NormalizedHistogram;

pub use euclid::{bjorklund, evenness, OnsetPattern};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RhythmError {
    #[error("weight {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("E({k},{n}) needs 0 <= k <= n and n >= 1")]
    InvalidArity { k: usize, n: usize },
    #[error("evenness needs at least two onsets, got {0}")]
    TooFewOnsets(usize),
    #[error("thresholds must satisfy 0 < rest < medium < high <= 1")]
    InvalidThresholds,
    #[error("bass scale frequencies must be finite and positive")]
    InvalidScale,
}

/// Intensity of a step, 0 (rest) to 3.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StepLevel(u8);

impl StepLevel {
    pub const REST: StepLevel = StepLevel(0);
    pub const MAX: StepLevel = StepLevel(3);

    pub fn new(level: u8) -> Option<Self> {
        (level <= 3).then_some(StepLevel(level))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn symbol(self) -> char {
        ['.', 'h', 'H', 'X'][self.0 as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Instrument {
    Kick,
    Snare,
    Hat,
}

impl Instrument {
    pub const ALL: [Instrument; 3] = [Instrument::Kick, Instrument::Snare, Instrument::Hat];

    pub fn name(self) -> &'static str {
        match self {
            Instrument::Kick => "kick",
            Instrument::Snare => "snare",
            Instrument::Hat => "hat",
        }
    }

    fn bit(self) -> u8 {
        match self {
            Instrument::Kick => 1,
            Instrument::Snare => 2,
            Instrument::Hat => 4,
        }
    }
}

/// Set of drum voices, serialized as names in kick, snare, hat order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Instruments(u8);

impl Instruments {
    pub const NONE: Instruments = Instruments(0);

    pub fn with(self, i: Instrument) -> Self {
        Instruments(self.0 | i.bit())
    }

    pub fn contains(self, i: Instrument) -> bool {
        self.0 & i.bit() != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = Instrument> {
        Instrument::ALL.into_iter().filter(move |i| self.contains(*i))
    }

    pub fn for_level(level: StepLevel) -> Self {
        let mut set = Instruments::NONE;
        if level.0 >= 1 {
            set = set.with(Instrument::Hat);
        }
        if level.0 >= 2 {
            set = set.with(Instrument::Snare);
        }
        if level.0 >= 3 {
            set = set.with(Instrument::Kick);
        }
        set
    }
}

impl Serialize for Instruments {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.len()))?;
        for i in self.iter() {
            seq.serialize_element(i.name())?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for Instruments {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let names = Vec::<String>::deserialize(deserializer)?;
        names.iter().try_fold(Instruments::NONE, |set, name| {
            Instrument::ALL
                .into_iter()
                .find(|i| i.name() == name)
                .map(|i| set.with(i))
                .ok_or_else(|| serde::de::Error::custom(format!("unknown instrument {name:?}")))
        })
    }
}

/// Level boundaries: `[0, rest)` is silent, `[rest, medium)` level 1,
/// `[medium, high)` level 2, `[high, 1]` level 3.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub rest: f64,
    pub medium: f64,
    pub high: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            rest: 0.05,
            medium: 0.35,
            high: 0.70,
        }
    }
}

impl Thresholds {
    pub fn validate(&self) -> Result<(), RhythmError> {
        let ok = self.rest > 0.0 && self.rest < self.medium && self.medium < self.high && self.high <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(RhythmError::InvalidThresholds)
        }
    }
}

/// Which part of the compass the loop sweeps.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    /// All N bins, one full radar revolution.
    #[default]
    FullCircle,
    /// Only the first N/2 bins; the other half is a mirror image.
    HalfCircle,
}

/// A minor pentatonic, A1 to G2.
pub const DEFAULT_BASS_SCALE_HZ: [f64; 5] = [55.0, 65.41, 73.42, 82.41, 98.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MappingConfig {
    pub thresholds: Thresholds,
    pub bass_scale_hz: [f64; 5],
    pub sweep: Sweep,
}

impl Default for MappingConfig {
    fn default() -> Self {
        Self {
            thresholds: Thresholds::default(),
            bass_scale_hz: DEFAULT_BASS_SCALE_HZ,
            sweep: Sweep::FullCircle,
        }
    }
}

impl MappingConfig {
    pub fn validate(&self) -> Result<(), RhythmError> {
        self.thresholds.validate()?;
        if self.bass_scale_hz.iter().any(|f| !f.is_finite() || *f <= 0.0) {
            return Err(RhythmError::InvalidScale);
        }
        Ok(())
    }

    pub fn bass_hz(&self, degree: u8) -> f64 {
        self.bass_scale_hz[degree.min(4) as usize]
    }

    /// Nearest MIDI key for a scale degree.
    pub fn bass_midi_key(&self, degree: u8) -> u8 {
        let f = self.bass_hz(degree);
        (69.0 + 12.0 * (f / 440.0).log2()).round().clamp(0.0, 127.0) as u8
    }
}

pub fn quantize(w: f64) -> Result<StepLevel, RhythmError> {
    quantize_with(w, &Thresholds::default())
}

pub fn quantize_with(w: f64, t: &Thresholds) -> Result<StepLevel, RhythmError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(RhythmError::OutOfRange(w));
    }
    Ok(StepLevel(if w < t.rest {
        0
    } else if w < t.medium {
        1
    } else if w < t.high {
        2
    } else {
        3
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub level: StepLevel,
    pub instruments: Instruments,
    pub bass_degree: Option<u8>,
}

impl Step {
    pub const REST: Step = Step {
        level: StepLevel::REST,
        instruments: Instruments::NONE,
        bass_degree: None,
    };

    /// Applies the level table; `value` only matters for the level-3 bass degree.
    pub fn from_level(level: StepLevel, value: f64) -> Self {
        let bass_degree = match level.0 {
            2 => Some(1),
            3 => Some((value * 4.0).floor().clamp(0.0, 4.0) as u8),
            _ => None,
        };
        Step {
            level,
            instruments: Instruments::for_level(level),
            bass_degree,
        }
    }
}

/// One loop of steps, played in order starting from north.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhythmPattern {
    pub bin_count: usize,
    pub steps: Vec<Step>,
}

impl RhythmPattern {
    pub fn rests(n: usize) -> Self {
        Self {
            bin_count: n,
            steps: vec![Step::REST; n],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn is_silent(&self) -> bool {
        self.steps.iter().all(|s| s.level == StepLevel::REST)
    }

    /// One character per step: `.`, `h`, `H`, `X`.
    pub fn text(&self) -> String {
        self.steps.iter().map(|s| s.level.symbol()).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("pattern serializes")
    }
}

pub fn histogram_to_pattern(nh: &NormalizedHistogram, mapping: &MappingConfig) -> RhythmPattern {
    let n = match mapping.sweep {
        Sweep::FullCircle => nh.values.len(),
        Sweep::HalfCircle => nh.values.len() / 2,
    };
    let steps = nh.values[..n]
        .iter()
        .map(|&v| {
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            let level = quantize_with(v, &mapping.thresholds).expect("clamped into range");
            Step::from_level(level, v)
        })
        .collect();
    RhythmPattern { bin_count: n, steps }
}

/// Smallest divisor `d` of the step count with `steps[i] == steps[i % d]`.
pub fn pattern_period(p: &RhythmPattern) -> usize {
    let n = p.steps.len();
    (1..=n)
        .filter(|d| n.is_multiple_of(*d))
        .find(|&d| (d..n).all(|i| p.steps[i] == p.steps[i % d]))
        .unwrap_or(n.max(1))
}
