//! Euclidean rhythms and the chordal evenness measure.

use std::f64::consts::PI;

use super::RhythmError;

/// `n` steps with onsets at the listed indices (sorted, distinct).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnsetPattern {
    pub n: usize,
    pub onsets: Vec<usize>,
}

impl OnsetPattern {
    pub fn new(n: usize, mut onsets: Vec<usize>) -> Self {
        onsets.sort_unstable();
        onsets.dedup();
        debug_assert!(onsets.iter().all(|&i| i < n));
        Self { n, onsets }
    }

    pub fn from_bools(steps: &[bool]) -> Self {
        let onsets = steps.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| i).collect();
        Self {
            n: steps.len(),
            onsets,
        }
    }

    pub fn to_bools(&self) -> Vec<bool> {
        let mut out = vec![false; self.n];
        for &i in &self.onsets {
            out[i] = true;
        }
        out
    }

    /// `x` for an onset, `.` for a rest.
    pub fn notation(&self) -> String {
        self.to_bools().iter().map(|&on| if on { 'x' } else { '.' }).collect()
    }
}

/// E(k, n): `k` onsets spread as evenly as possible over `n` steps, rotated
/// so that step 0 carries an onset whenever `k > 0`.
pub fn bjorklund(k: usize, n: usize) -> Result<OnsetPattern, RhythmError> {
    if n == 0 || k > n {
        return Err(RhythmError::InvalidArity { k, n });
    }
    if k == 0 {
        return Ok(OnsetPattern { n, onsets: vec![] });
    }
    // Repeatedly pair the leading groups with the remainder groups until at
    // most one remainder group is left.
    let mut heads: Vec<Vec<bool>> = vec![vec![true]; k];
    let mut tails: Vec<Vec<bool>> = vec![vec![false]; n - k];
    while tails.len() > 1 {
        let pairs = heads.len().min(tails.len());
        let mut merged = Vec::with_capacity(pairs);
        for _ in 0..pairs {
            let mut h = heads.pop().expect("pairs <= heads");
            h.extend(tails.pop().expect("pairs <= tails"));
            merged.push(h);
        }
        // leftovers from whichever side was longer become the new remainder
        let rest = if heads.is_empty() { tails } else { heads };
        heads = merged;
        tails = rest;
    }
    let mut steps: Vec<bool> = heads.into_iter().chain(tails).flatten().collect();
    let first = steps.iter().position(|&on| on).unwrap_or(0);
    steps.rotate_left(first);
    Ok(OnsetPattern::from_bools(&steps))
}

/// Sum of pairwise chord lengths between onsets placed on the unit circle.
pub fn evenness(p: &OnsetPattern) -> Result<f64, RhythmError> {
    if p.onsets.len() < 2 {
        return Err(RhythmError::TooFewOnsets(p.onsets.len()));
    }
    let mut total = 0.0;
    for (idx, &i) in p.onsets.iter().enumerate() {
        for &j in &p.onsets[idx + 1..] {
            total += 2.0 * (PI * (j - i) as f64 / p.n as f64).sin();
        }
    }
    Ok(total)
}
