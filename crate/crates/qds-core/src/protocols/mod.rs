//! Party state machines for the three signature protocols, run over an
//! in-process harness. One run is a deterministic single-threaded event
//! loop: every inter-party message is a typed record delivered in program
//! order, and adversarial effects enter only through tamper rules on the
//! receivers' authenticated channel (or dishonest-party logic in the
//! adversary module). Each run produces a full [`Transcript`].

pub mod p1;
pub mod p2;
pub mod p3;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::channels::ChannelError;
use crate::rng::RandomSource;
use crate::uhash::UhashError;

/// A document together with its signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocSigPair {
    pub doc: BitString,
    pub sig: BitString,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("document length must exceed the hash length (b_M > b_H)")]
    MessageTooShort,
    #[error("n must be even and >= 2, got {0}")]
    OddN(u64),
    #[error("hypothesis b_M + 4 n b_H > (n/2) log2(n) violated")]
    P2Hypothesis,
    #[error("e_max must be below the 3n/2 signatures a receiver verifies")]
    BadEmax,
    #[error("need at least 2 receivers")]
    TooFewParties,
    #[error("omega must satisfy 1 <= omega and 2*omega < N + 1")]
    BadOmega,
    #[error("requires (l_max + 1) * (omega - 1) / N < 1/2")]
    BadLevels,
    #[error("k must be >= 1")]
    BadK,
    #[error("ASU key bound y-bar ({y_bar}) is below the exact key length ({exact}); use a longer document")]
    AccountingRange { y_bar: u64, exact: u64 },
    #[error("key material has the wrong shape: {0}")]
    BadKeyShape(String),
    #[error(transparent)]
    Hash(#[from] UhashError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

/// Synthesizes a pseudo-random document of `b_m` bits from a seed, so that
/// desk-scale experiments do not require real document files.
pub fn doc_from_seed(b_m: u64, seed: u64) -> BitString {
    RandomSource::from_seed(seed).derive(0xd0c).bits(b_m as usize)
}

/// Stream tags for deriving per-role randomness from the run seed.
pub(crate) mod stream {
    pub const DISTRIBUTION: u64 = 1;
    pub const ALICE: u64 = 2;
    pub const WC_SETUP: u64 = 3;
    pub const OTP_PADS: u64 = 4;
    pub const RECEIVER_BASE: u64 = 16;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthesized_docs_are_reproducible() {
        assert_eq!(doc_from_seed(500, 9), doc_from_seed(500, 9));
        assert_ne!(doc_from_seed(500, 9), doc_from_seed(500, 10));
        assert_eq!(doc_from_seed(500, 9).len(), 500);
    }
}
