//! The seeded generator behind every random choice in the pipeline.
//!
//! PCG-XSH-RR 64/32 (`rand_pcg::Pcg32`) constructed as
//! `Pcg32::new(seed, 0xa02bdbf7bb3c0a7)`. Integers in `[0, m)` come from one
//! or more 64-bit draws (two consecutive 32-bit outputs, low word first)
//! using Lemire's widening multiply with rejection; unit reals are
//! `(next_u64 >> 11) · 2⁻⁵³`. Shuffles are Fisher–Yates running from the
//! front: position i swaps with `i + below(len − i)`.

use rand_core::Rng;
use rand_pcg::Pcg32;

const STREAM: u64 = 0xa02b_dbf7_bb3c_0a7;

#[derive(Debug, Clone)]
pub struct SeededRng(Pcg32);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(Pcg32::new(seed, STREAM))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform integer in `[0, bound)`; `bound` must be positive.
    pub fn below(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "empty range");
        let m = bound as u64;
        let threshold = m.wrapping_neg() % m;
        loop {
            let wide = u128::from(self.next_u64()) * u128::from(m);
            if (wide as u64) >= threshold {
                return (wide >> 64) as usize;
            }
        }
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniformly permutes `items`.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        let len = items.len();
        for i in 0..len.saturating_sub(1) {
            let j = i + self.below(len - i);
            items.swap(i, j);
        }
    }

    /// The first `count` entries of `items` become a uniform sample without
    /// replacement, in draw order. Remaining entries are left in some order.
    pub fn partial_shuffle<T>(&mut self, items: &mut [T], count: usize) {
        let len = items.len();
        for i in 0..count.min(len) {
            let j = i + self.below(len - i);
            items.swap(i, j);
        }
    }

    pub(crate) fn inner_mut(&mut self) -> &mut Pcg32 {
        &mut self.0
    }
}
