//! Standard MIDI File (format 0) export of a rhythm pattern.
//!
//! Drums go to channel 10 (kick 36, snare 38, closed hat 42), the bass to
//! channel 1. Every step lasts 120 ticks at 480 ticks per quarter note and
//! notes are released at the end of their step.

use crate::rhythm::{Instrument, MappingConfig, RhythmPattern};

pub const TICKS_PER_QUARTER: u16 = 480;
pub const TICKS_PER_STEP: u32 = 120;
/// General MIDI percussion keys for kick, snare and closed hat.
pub const DRUM_KEYS: [(Instrument, u8); 3] = [(Instrument::Kick, 36), (Instrument::Snare, 38), (Instrument::Hat, 42)];

const DRUM_CHANNEL: u8 = 9;
const BASS_CHANNEL: u8 = 0;
const VELOCITY: [u8; 4] = [0, 70, 95, 120];

pub fn encode_midi(p: &RhythmPattern, bpm: f64) -> Vec<u8> {
    encode_midi_with(p, bpm, &MappingConfig::default())
}

pub fn encode_midi_with(p: &RhythmPattern, bpm: f64, mapping: &MappingConfig) -> Vec<u8> {
    // (tick, order, bytes): offs sort before ons at the same tick
    let mut events: Vec<(u32, u8, Vec<u8>)> = Vec::new();
    let tempo = (60_000_000.0 / bpm).round().clamp(1.0, 16_777_215.0) as u32;
    events.push((0, 0, vec![0xFF, 0x51, 0x03, (tempo >> 16) as u8, (tempo >> 8) as u8, tempo as u8]));

    for (i, step) in p.steps.iter().enumerate() {
        let on = i as u32 * TICKS_PER_STEP;
        let off = on + TICKS_PER_STEP;
        let velocity = VELOCITY[step.level.get() as usize];
        let mut note = |channel: u8, key: u8| {
            events.push((on, 2, vec![0x90 | channel, key, velocity]));
            events.push((off, 1, vec![0x80 | channel, key, 0]));
        };
        for (inst, key) in DRUM_KEYS {
            if step.instruments.contains(inst) {
                note(DRUM_CHANNEL, key);
            }
        }
        if let Some(degree) = step.bass_degree {
            note(BASS_CHANNEL, mapping.bass_midi_key(degree));
        }
    }
    // stable sort keeps kick, snare, hat, bass order within a tick
    events.sort_by_key(|(tick, order, _)| (*tick, *order));

    let end = p.steps.len() as u32 * TICKS_PER_STEP;
    let mut track = Vec::new();
    let mut now = 0;
    for (tick, _, bytes) in events {
        write_vlq(&mut track, tick - now);
        track.extend_from_slice(&bytes);
        now = tick;
    }
    write_vlq(&mut track, end.saturating_sub(now));
    track.extend_from_slice(&[0xFF, 0x2F, 0x00]);

    let mut out = Vec::with_capacity(22 + track.len());
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&TICKS_PER_QUARTER.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    out
}

fn write_vlq(out: &mut Vec<u8>, mut v: u32) {
    let mut buf = [0u8; 5];
    let mut i = buf.len() - 1;
    buf[i] = (v & 0x7F) as u8;
    v >>= 7;
    while v > 0 {
        i -= 1;
        buf[i] = (v & 0x7F) as u8 | 0x80;
        v >>= 7;
    }
    out.extend_from_slice(&buf[i..]);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vlq() {
        let enc = |v| {
            let mut o = Vec::new();
            write_vlq(&mut o, v);
            o
        };
        assert_eq!(enc(0), vec![0x00]);
        assert_eq!(enc(0x7F), vec![0x7F]);
        assert_eq!(enc(0x80), vec![0x81, 0x00]);
        assert_eq!(enc(1920), vec![0x8F, 0x00]);
        assert_eq!(enc(0x0FFF_FFFF), vec![0xFF, 0xFF, 0xFF, 0x7F]);
    }

    #[test]
    fn rest_pattern_layout() {
        let bytes = encode_midi(&RhythmPattern::rests(16), 120.0);
        let expected_track: Vec<u8> = vec![
            0x00, 0xFF, 0x51, 0x03, 0x07, 0xA1, 0x20, // 500000 us per quarter
            0x8F, 0x00, 0xFF, 0x2F, 0x00, // 1920 ticks later: end of track
        ];
        assert_eq!(&bytes[..14], b"MThd\x00\x00\x00\x06\x00\x00\x00\x01\x01\xE0");
        assert_eq!(&bytes[14..18], b"MTrk");
        assert_eq!(u32::from_be_bytes(bytes[18..22].try_into().unwrap()) as usize, expected_track.len());
        assert_eq!(&bytes[22..], expected_track.as_slice());
    }
}
