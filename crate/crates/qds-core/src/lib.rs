//! Workbench for information-theoretically secure digital signatures built
//! on preshared keys and universal hashing.
//!
//! The crate provides three signature protocols over simulated channels
//! (a one-time-universal-hashing scheme, a key-block-exchange scheme and a
//! multi-receiver scheme with verification levels), Wegman-Carter
//! authenticated channels with key recycling, constructive attacks and
//! Monte-Carlo attack-rate estimators, the closed-form security bounds for
//! each protocol, and a constrained integer optimizer that minimizes
//! preshared-bit consumption at a fixed security target.

pub mod adversary;
pub mod bits;
pub mod channels;
pub mod gf2;
pub mod lfsr;
pub mod optimizer;
pub mod protocols;
pub mod rng;
pub mod secbounds;
pub mod transcript;
pub mod uhash;

pub use bits::BitString;
pub use gf2::{Gf2Field, Gf2Poly, Gf2wElement};
pub use lfsr::LfsrState;
pub use rng::RandomSource;
pub use secbounds::{CostReport, SecurityBudget};
pub use transcript::Transcript;
