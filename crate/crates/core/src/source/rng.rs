use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Independent generator for `(seed, offset)`.
///
/// ChaCha's stream parameter separates offsets; the fast generator that
/// actually produces symbols is seeded from it.
pub fn stream_rng(seed: u64, offset: u64) -> Xoshiro256PlusPlus {
    let mut chacha = ChaCha8Rng::seed_from_u64(seed);
    chacha.set_stream(offset);
    Xoshiro256PlusPlus::from_rng(&mut chacha)
}

/// Uniform 32-bit draws, two per 64-bit output. The spare half is kept
/// across calls so the sequence does not depend on how draws are batched.
#[derive(Debug, Clone)]
pub struct Uniform32 {
    rng: Xoshiro256PlusPlus,
    spare: Option<u32>,
}

impl Uniform32 {
    pub fn new(seed: u64, offset: u64) -> Uniform32 {
        Uniform32 {
            rng: stream_rng(seed, offset),
            spare: None,
        }
    }

    #[inline(always)]
    pub fn next_u32(&mut self) -> u32 {
        match self.spare.take() {
            Some(u) => u,
            None => {
                let x = self.rng.next_u64();
                self.spare = Some((x >> 32) as u32);
                x as u32
            }
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// Integer thresholds `round(2^32 * cumulative)` for inverse-CDF sampling
/// from a 32-bit uniform; the last threshold is always `2^32`.
pub fn thresholds(probs: &[f64]) -> Vec<u64> {
    let scale = (1u64 << 32) as f64;
    let mut acc = 0.0;
    let mut out: Vec<u64> = probs
        .iter()
        .map(|p| {
            acc += p;
            ((acc * scale).round() as u64).min(1 << 32)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1 << 32;
    }
    out
}
