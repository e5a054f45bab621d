//! Arbitrary-length bit strings packed into 64-bit words.
//!
//! `BitString` is the universal currency of the crate: documents, hash
//! tags, signatures, preshared keys and one-time pads are all bit strings.
//! Bit `i` of the string is stored at bit `i % 64` of word `i / 64`
//! (least-significant-bit first), so index 0 is the coefficient of `x^0`
//! when a bit string is read as a GF(2) polynomial.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BitStringError {
    #[error("invalid bit string literal {0:?}: expected `len=<bits>:<hex>`")]
    BadLiteral(String),
    #[error("hex payload has {got} digits, expected {want} for {bits} bits")]
    BadHexLength { got: usize, want: usize, bits: usize },
    #[error("invalid hex digit {0:?}")]
    BadHexDigit(char),
    #[error("padding bits beyond the declared length must be zero")]
    DirtyPadding,
}

/// A sequence of bits with explicit length, packed LSB-first into `u64` words.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    words: Vec<u64>,
    len: usize,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    /// All-zero string of `len` bits.
    pub fn zeros(len: usize) -> Self {
        Self {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut out = Self::new();
        for b in bits {
            out.push(b);
        }
        out
    }

    /// Builds a string of `len` bits from the low bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= 64, "from_u64 supports at most 64 bits");
        let mut out = Self::zeros(len);
        if len > 0 {
            out.words[0] = if len == 64 { value } else { value & ((1u64 << len) - 1) };
        }
        out
    }

    /// Takes ownership of packed words; bits beyond `len` are cleared.
    pub fn from_words(mut words: Vec<u64>, len: usize) -> Self {
        words.resize(len.div_ceil(64), 0);
        let mut out = Self { words, len };
        out.clear_tail();
        out
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Low 64 bits as an integer (for strings of length <= 64).
    pub fn as_u64(&self) -> u64 {
        assert!(self.len <= 64, "as_u64 requires at most 64 bits");
        self.words.first().copied().unwrap_or(0)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        if value {
            self.words[i >> 6] |= 1u64 << (i & 63);
        } else {
            self.words[i >> 6] &= !(1u64 << (i & 63));
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len % 64 == 0 {
            self.words.push(0);
        }
        self.len += 1;
        if value {
            let i = self.len - 1;
            self.words[i >> 6] |= 1u64 << (i & 63);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the highest set bit, if any.
    pub fn highest_one(&self) -> Option<usize> {
        for (j, &w) in self.words.iter().enumerate().rev() {
            if w != 0 {
                return Some((j << 6) + 63 - w.leading_zeros() as usize);
            }
        }
        None
    }

    /// Elementwise XOR; both operands must have equal length.
    pub fn xor(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        out.xor_in_place(other);
        out
    }

    pub fn xor_in_place(&mut self, other: &BitString) {
        assert_eq!(
            self.len, other.len,
            "XOR requires equal lengths ({} vs {})",
            self.len, other.len
        );
        for (a, b) in self.words.iter_mut().zip(other.words.iter()) {
            *a ^= *b;
        }
    }

    /// Concatenation: `self` occupies the low indexes, `other` follows.
    pub fn concat(&self, other: &BitString) -> BitString {
        let mut out = self.clone();
        if self.len % 64 == 0 {
            // word-aligned fast path
            out.words.truncate(self.len / 64);
            out.words.extend_from_slice(&other.words);
            out.len += other.len;
            out.words.resize(out.len.div_ceil(64), 0);
        } else {
            for b in other.iter() {
                out.push(b);
            }
        }
        out
    }

    /// Copies bits `[start, start + len)` into a new string.
    pub fn slice(&self, start: usize, len: usize) -> BitString {
        assert!(
            start + len <= self.len,
            "slice [{start}, {}) out of range (len {})",
            start + len,
            self.len
        );
        if start % 64 == 0 {
            let first = start / 64;
            return Self::from_words(self.words[first..first + len.div_ceil(64).min(self.words.len() - first)].to_vec(), len);
        }
        let mut out = Self::zeros(len);
        let (word0, shift) = (start / 64, start % 64);
        for j in 0..out.words.len() {
            let lo = self.words.get(word0 + j).copied().unwrap_or(0) >> shift;
            let hi = self.words.get(word0 + j + 1).copied().unwrap_or(0) << (64 - shift);
            out.words[j] = lo | hi;
        }
        out.clear_tail();
        out
    }

    /// Message padding used before universal hashing: append a single 1 bit
    /// so that trailing zeros cannot be added invisibly.
    pub fn pad_trailing_one(&self) -> BitString {
        let mut out = self.clone();
        out.push(true);
        out
    }

    fn clear_tail(&mut self) {
        let r = self.len % 64;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    /// Lowercase hex, most-significant-first within each byte; byte `k`
    /// holds bits `8k..8k+8` with bit `8k` in the most significant position.
    pub fn to_hex(&self) -> String {
        let nbytes = self.len.div_ceil(8);
        let mut s = String::with_capacity(nbytes * 2);
        for k in 0..nbytes {
            let mut byte = 0u8;
            for j in 0..8 {
                let i = 8 * k + j;
                if i < self.len && self.get(i) {
                    byte |= 1 << (7 - j);
                }
            }
            s.push_str(&format!("{byte:02x}"));
        }
        s
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self, BitStringError> {
        let nbytes = len.div_ceil(8);
        if hex.len() != nbytes * 2 {
            return Err(BitStringError::BadHexLength {
                got: hex.len(),
                want: nbytes * 2,
                bits: len,
            });
        }
        let mut out = Self::zeros(len);
        for (k, chunk) in hex.as_bytes().chunks(2).enumerate() {
            let hi = (chunk[0] as char)
                .to_digit(16)
                .ok_or(BitStringError::BadHexDigit(chunk[0] as char))?;
            let lo = (chunk[1] as char)
                .to_digit(16)
                .ok_or(BitStringError::BadHexDigit(chunk[1] as char))?;
            let byte = (hi * 16 + lo) as u8;
            for j in 0..8 {
                let i = 8 * k + j;
                let bit = (byte >> (7 - j)) & 1 == 1;
                if i < len {
                    if bit {
                        out.set(i, true);
                    }
                } else if bit {
                    return Err(BitStringError::DirtyPadding);
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "len={}:{}", self.len, self.to_hex())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s
            .strip_prefix("len=")
            .ok_or_else(|| BitStringError::BadLiteral(s.to_string()))?;
        let (len, hex) = rest
            .split_once(':')
            .ok_or_else(|| BitStringError::BadLiteral(s.to_string()))?;
        let len: usize = len
            .parse()
            .map_err(|_| BitStringError::BadLiteral(s.to_string()))?;
        Self::from_hex(len, hex)
    }
}

impl Serialize for BitString {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(D::Error::custom)
    }
}
