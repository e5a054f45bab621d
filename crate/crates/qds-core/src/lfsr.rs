//! Linear feedback shift registers.
//!
//! A register of length n is specified by a monic connection polynomial
//! p(x) = x^n + p_{n-1} x^{n-1} + ... + p_0 and an initial state
//! s^0 = (s_{n-1}, ..., s_0). The k-th state is s^k = (s_{n-1+k}, ..., s_k)
//! and the generated sequence obeys s_l = sum_j p_j s_{l-n+j} (mod 2) for
//! l >= n. States are stored as bit strings with s_k at index 0.

use thiserror::Error;

use crate::bits::BitString;
use crate::gf2::Gf2Poly;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LfsrError {
    #[error("connection polynomial must have degree >= 1")]
    BadTaps,
    #[error("state has {got} bits, register length is {want}")]
    StateLength { got: usize, want: usize },
}

/// Connection polynomial plus current register contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LfsrState {
    taps: Gf2Poly,
    state: BitString,
}

impl LfsrState {
    pub fn new(taps: Gf2Poly, state: BitString) -> Result<Self, LfsrError> {
        let n = match taps.degree() {
            None | Some(0) => return Err(LfsrError::BadTaps),
            Some(n) => n,
        };
        if state.len() != n {
            return Err(LfsrError::StateLength {
                got: state.len(),
                want: n,
            });
        }
        Ok(Self { taps, state })
    }

    pub fn taps(&self) -> &Gf2Poly {
        &self.taps
    }

    pub fn state(&self) -> &BitString {
        &self.state
    }

    pub fn len(&self) -> usize {
        self.state.len()
    }

    /// The first `count` sequence elements s_0, ..., s_{count-1}.
    pub fn sequence(&self, count: usize) -> BitString {
        let mut stream = LfsrStream::new(self);
        let mut out = BitString::zeros(count);
        for i in 0..count {
            if stream.low_bit() {
                out.set(i, true);
            }
            stream.step();
        }
        out
    }
}

/// Streaming stepper over the register states. Kept word-packed so that the
/// Toeplitz hash can XOR whole states without re-materializing bits.
pub struct LfsrStream {
    n: usize,
    taps: Vec<u64>,
    state: Vec<u64>,
}

impl LfsrStream {
    pub fn new(reg: &LfsrState) -> Self {
        let n = reg.len();
        let words = n.div_ceil(64);
        let mut taps = reg.taps.low_coeffs().words().to_vec();
        taps.resize(words, 0);
        let mut state = reg.state.words().to_vec();
        state.resize(words, 0);
        Self { n, taps, state }
    }

    #[inline]
    pub fn state_words(&self) -> &[u64] {
        &self.state
    }

    #[inline]
    pub fn low_bit(&self) -> bool {
        self.state[0] & 1 == 1
    }

    /// Advance one position: shift right, feed back parity(state & taps).
    #[inline]
    pub fn step(&mut self) {
        let mut parity = 0u64;
        for (s, t) in self.state.iter().zip(self.taps.iter()) {
            parity ^= s & t;
        }
        let feedback = (parity.count_ones() & 1) as u64;
        let last = self.state.len() - 1;
        for j in 0..last {
            self.state[j] = (self.state[j] >> 1) | (self.state[j + 1] << 63);
        }
        self.state[last] >>= 1;
        let top = self.n - 1;
        self.state[top >> 6] |= feedback << (top & 63);
    }
}
