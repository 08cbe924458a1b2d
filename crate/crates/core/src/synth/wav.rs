//! Canonical 44-byte-header PCM WAV writer.
//!
//! | offset | bytes | field                                   |
//! |--------|-------|-----------------------------------------|
//! | 0      | 4     | `RIFF`                                  |
//! | 4      | 4     | 36 + data length (u32 LE)               |
//! | 8      | 4     | `WAVE`                                  |
//! | 12     | 4     | `fmt `                                  |
//! | 16     | 4     | 16                                      |
//! | 20     | 2     | 1 (PCM)                                 |
//! | 22     | 2     | 1 channel                               |
//! | 24     | 4     | sample rate                             |
//! | 28     | 4     | byte rate = rate * 2                    |
//! | 32     | 2     | block align = 2                         |
//! | 34     | 2     | 16 bits per sample                      |
//! | 36     | 4     | `data`                                  |
//! | 40     | 4     | data length = 2 * samples               |
//! | 44     | ...   | samples, i16 LE                         |

use super::AudioLoop;

pub const WAV_HEADER_LEN: usize = 44;

pub fn encode_wav(l: &AudioLoop) -> Vec<u8> {
    let data_len = (l.samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(WAV_HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&l.sample_rate.to_le_bytes());
    out.extend_from_slice(&(l.sample_rate * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in &l.samples {
        out.extend_from_slice(&to_i16(s).to_le_bytes());
    }
    out
}

/// Scale by 32767 and round half away from zero.
fn to_i16(s: f32) -> i16 {
    let v = (s.clamp(-1.0, 1.0) as f64 * 32767.0).round();
    v as i16
}
