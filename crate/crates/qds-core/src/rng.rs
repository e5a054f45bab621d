//! Seedable deterministic randomness.
//!
//! Every protocol run, attack estimator and optimizer sweep takes an
//! explicit seed so that transcripts and Monte-Carlo results are exactly
//! reproducible. The generator is counter-based (ChaCha12), which makes
//! derived child streams cheap and independent.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bits::BitString;

/// Deterministic random source; cloning forks the current stream state.
///
/// [`RandomSource::bits`] is bit-granular: drawing n bits consumes exactly
/// n bits of the stream, so key-material accounting statements like
/// "sampling consumes y bits" hold literally. Structural draws (`below`,
/// `bernoulli`, `shuffle`) consume whole words.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha12Rng,
    buf: u64,
    buf_len: u32,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl RandomSource {
    pub fn from_seed(seed: u64) -> Self {
        Self {
            seed,
            rng: ChaCha12Rng::seed_from_u64(seed),
            buf: 0,
            buf_len: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Derives an independent child source; the same `(seed, tag)` always
    /// yields the same child, regardless of how much the parent was used.
    pub fn derive(&self, tag: u64) -> Self {
        Self::from_seed(splitmix64(self.seed ^ splitmix64(tag.wrapping_add(1))))
    }

    /// Exactly `n <= 64` fresh bits, low bits of the return value.
    fn take_bits(&mut self, n: usize) -> u64 {
        debug_assert!(n <= 64);
        if n == 0 {
            return 0;
        }
        let n = n as u32;
        if self.buf_len >= n {
            let out = if n == 64 {
                self.buf
            } else {
                self.buf & ((1u64 << n) - 1)
            };
            self.buf = if n == 64 { 0 } else { self.buf >> n };
            self.buf_len -= n;
            return out;
        }
        let have = self.buf_len;
        let need = n - have;
        let fresh: u64 = self.rng.gen();
        let low = if need == 64 {
            fresh
        } else {
            fresh & ((1u64 << need) - 1)
        };
        let out = self.buf | (low << have);
        self.buf = if need == 64 { 0 } else { fresh >> need };
        self.buf_len = 64 - need;
        out
    }

    pub fn bit(&mut self) -> bool {
        self.take_bits(1) == 1
    }

    pub fn u64(&mut self) -> u64 {
        self.take_bits(64)
    }

    /// Uniform integer in `[0, bound)`.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below(0) is empty");
        self.rng.gen_range(0..bound)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p.clamp(0.0, 1.0))
    }

    /// `n` fresh uniform bits, consuming exactly `n` bits of the stream.
    pub fn bits(&mut self, n: usize) -> BitString {
        let mut words = Vec::with_capacity(n.div_ceil(64));
        for _ in 0..n / 64 {
            words.push(self.take_bits(64));
        }
        if n % 64 != 0 {
            words.push(self.take_bits(n % 64));
        }
        BitString::from_words(words, n)
    }

    /// `n` fresh uniform bits, resampled until not all-zero.
    pub fn nonzero_bits(&mut self, n: usize) -> BitString {
        assert!(n > 0);
        loop {
            let b = self.bits(n);
            if !b.is_zero() {
                return b;
            }
        }
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
