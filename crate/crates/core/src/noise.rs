//! Counter-based noise streams.
//!
//! Every random draw is addressed by `(seed, trial, stream, step, agent)`
//! rather than by its position in a sequence. Two runs of the same trial
//! therefore consume identical noise realizations even when their planners
//! pick different actions, which is what makes paired comparisons fair.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamTag {
    /// True target and initial particle draws (plus particle re-seeding).
    Init = 0,
    Motion = 1,
    Measurement = 2,
    /// Offsets of the systematic resampling comb.
    Resample = 3,
}

// word positions are 68 bits wide: 32 bits of step, 36 bits per draw block
const STEP_SHIFT: u32 = 36;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Noise source for one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStreams {
    key: [u8; 32],
}

impl NoiseStreams {
    pub fn new(seed: u64, trial: u64) -> Self {
        let mut state = seed;
        let mixed = splitmix64(&mut state) ^ trial;
        let mut state = mixed;
        let mut key = [0u8; 32];
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        Self { key }
    }

    /// Generator dedicated to `(tag, step, agent)`.
    pub fn rng(&self, tag: StreamTag, step: u64, agent: u32) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key);
        rng.set_stream(((tag as u64) << 32) | agent as u64);
        rng.set_word_pos(((step & 0xFFFF_FFFF) as u128) << STEP_SHIFT);
        rng
    }

    /// Generator for the initial target and particle draws.
    pub fn init_rng(&self) -> ChaCha8Rng {
        self.rng(StreamTag::Init, 0, 0)
    }

    /// Standard-normal 3-vector driving agent `agent`'s motion at `step`.
    pub fn motion(&self, step: u64, agent: u32) -> Vector3<f64> {
        let mut rng = self.rng(StreamTag::Motion, step, agent);
        Vector3::new(
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
            StandardNormal.sample(&mut rng),
        )
    }

    /// Standard-normal scalar for agent `agent`'s measurement at `step`.
    pub fn measurement(&self, step: u64, agent: u32) -> f64 {
        StandardNormal.sample(&mut self.rng(StreamTag::Measurement, step, agent))
    }

    /// Uniform draw in `[0, 1)` for the resampling comb at `step`.
    pub fn resample_offset(&self, step: u64) -> f64 {
        self.rng(StreamTag::Resample, step, 0).random::<f64>()
    }
}

/// FNV-1a fold over the bit patterns of consumed noise values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseChecksum(pub u64);

impl Default for NoiseChecksum {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl NoiseChecksum {
    pub fn absorb(&mut self, v: f64) {
        for b in v.to_bits().to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}
