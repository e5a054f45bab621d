//! Preshared-key accounting and the two channel primitives every protocol
//! is built on: one-time-pad secret channels (fully metered) and
//! Wegman-Carter authenticated channels with key recycling.
//!
//! A WC channel agrees on one LFSR-Toeplitz function with b'_H-bit tags
//! (2 b'_H preshared bits) and then OTP-encrypts each tag with fresh key
//! material, so n messages cost (2 + n) b'_H bits in total. A failed
//! authentication aborts the enclosing protocol run; abort is not the same
//! thing as rejecting a signature.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::rng::RandomSource;
use crate::uhash::{toeplitz_hash, LfsrToeplitzKey, UhashError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChannelError {
    #[error("duplicate tamper rule for message index {0}")]
    DuplicateTamperRule(u32),
    #[error(transparent)]
    Key(#[from] UhashError),
}

/// A protocol participant: the sender or one of the receivers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Receiver(u16),
}

impl Party {
    pub const BOB: Party = Party::Receiver(0);
    pub const CHARLIE: Party = Party::Receiver(1);
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Party::Alice => write!(f, "alice"),
            Party::Receiver(0) => write!(f, "bob"),
            Party::Receiver(1) => write!(f, "charlie"),
            Party::Receiver(i) => write!(f, "p{}", i + 1),
        }
    }
}

/// Unordered pair of distinct parties; the unit of preshared-key ownership.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartyPair(Party, Party);

impl PartyPair {
    pub fn new(a: Party, b: Party) -> Self {
        assert_ne!(a, b, "a pair needs two distinct parties");
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }

    pub fn first(&self) -> Party {
        self.0
    }

    pub fn second(&self) -> Party {
        self.1
    }

    pub fn contains(&self, p: Party) -> bool {
        self.0 == p || self.1 == p
    }
}

impl fmt::Display for PartyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.0, self.1)
    }
}

/// What a batch of preshared bits was spent on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Purpose {
    /// signature-key material shared with the sender
    HashAgreement,
    /// one-time-pad bits covering a secret payload
    OtpPayload,
    /// agreeing on the WC channel's hash function
    WcSetup,
    /// fresh pad bits protecting one WC tag
    WcTagOtp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LedgerEntry {
    #[serde(serialize_with = "ser_party_pair")]
    pub pair: PartyPair,
    #[serde(serialize_with = "ser_party")]
    pub sender: Party,
    pub purpose: Purpose,
    pub bits: u64,
}

fn ser_party<S: serde::Serializer>(p: &Party, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

fn ser_party_pair<S: serde::Serializer>(p: &PartyPair, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&p.to_string())
}

/// Append-only record of preshared-bit consumption, itemized by party pair
/// and purpose.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct KeyLedger {
    entries: Vec<LedgerEntry>,
}

impl KeyLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn charge(&mut self, pair: PartyPair, sender: Party, purpose: Purpose, bits: u64) {
        debug_assert!(pair.contains(sender));
        self.entries.push(LedgerEntry {
            pair,
            sender,
            purpose,
            bits,
        });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Every bit charged against the given pair's preshared key.
    pub fn total_pair(&self, pair: PartyPair) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.pair == pair)
            .map(|e| e.bits)
            .sum()
    }

    pub fn total_pair_purpose(&self, pair: PartyPair, purpose: Purpose) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.pair == pair && e.purpose == purpose)
            .map(|e| e.bits)
            .sum()
    }

    /// Bits charged on the pair for traffic initiated by `sender` with the
    /// given purpose (the Protocol 3 per-receiver attribution needs this).
    pub fn total_sent_by(&self, pair: PartyPair, sender: Party, purpose: Purpose) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.pair == pair && e.sender == sender && e.purpose == purpose)
            .map(|e| e.bits)
            .sum()
    }

    pub fn grand_total(&self) -> u64 {
        self.entries.iter().map(|e| e.bits).sum()
    }
}

/// One-time-pad secret channel between a pair of parties. The pad supply is
/// modeled as unbounded but every consumed bit is charged to the ledger.
/// Both directions draw from direction-specific deterministic pad streams,
/// and program-order delivery keeps sender and receiver in sync.
#[derive(Debug)]
pub struct SecretChannel {
    pair: PartyPair,
    in_flight: [VecDeque<BitString>; 2],
    pad_rng: [RandomSource; 2],
}

impl SecretChannel {
    pub fn new(pair: PartyPair, pad_rng: RandomSource) -> Self {
        Self {
            pair,
            in_flight: [VecDeque::new(), VecDeque::new()],
            pad_rng: [pad_rng.derive(0), pad_rng.derive(1)],
        }
    }

    fn dir(&self, from: Party) -> usize {
        assert!(self.pair.contains(from));
        usize::from(from != self.pair.0)
    }

    /// Encrypts `payload` with fresh pad bits; charges len(payload) to the
    /// pair under `otp-payload`. Pad bits are never reused.
    pub fn otp_send(&mut self, ledger: &mut KeyLedger, from: Party, payload: &BitString) -> BitString {
        let d = self.dir(from);
        let pad = self.pad_rng[d].bits(payload.len());
        let cipher = payload.xor(&pad);
        self.in_flight[d].push_back(pad);
        ledger.charge(self.pair, from, Purpose::OtpPayload, payload.len() as u64);
        cipher
    }

    /// Decrypts the oldest undelivered ciphertext sent by `from`. If the
    /// ciphertext was substituted in flight with a different length, the
    /// pad covers the overlapping prefix and the tail decrypts as-is.
    pub fn otp_receive(&mut self, from: Party, cipher: &BitString) -> BitString {
        let d = self.dir(from);
        let pad = self.in_flight[d]
            .pop_front()
            .expect("otp_receive without a matching otp_send");
        if pad.len() == cipher.len() {
            return cipher.xor(&pad);
        }
        let mut out = cipher.clone();
        for i in 0..pad.len().min(out.len()) {
            if pad.get(i) {
                out.set(i, !out.get(i));
            }
        }
        out
    }
}

/// An authenticated message in flight: payload, OTP-encrypted tag and the
/// recycling index identifying which fresh pad protects the tag.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WcMessage {
    pub index: u32,
    pub payload: BitString,
    pub tag: BitString,
}

/// Outcome of authenticating one message.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WcVerdict {
    Accept,
    /// terminal for the enclosing run; distinct from signature rejection
    Abort(AbortReason),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbortReason {
    TagMismatch,
    ReplayedIndex,
}

/// Wegman-Carter authenticated channel with key recycling: one hash
/// function reused across all messages of the pair, each tag protected by
/// fresh OTP bits.
#[derive(Debug)]
pub struct WcChannelState {
    pair: PartyPair,
    family_key: LfsrToeplitzKey,
    tag_pads: Vec<BitString>,
    pad_rng: RandomSource,
    messages_sent: u32,
    consumed: BTreeSet<u32>,
}

impl WcChannelState {
    /// Agrees on the channel's hash function, charging 2 b'_H setup bits.
    pub fn setup(
        pair: PartyPair,
        b_hp: usize,
        rng: &mut RandomSource,
        ledger: &mut KeyLedger,
        initiator: Party,
    ) -> Result<Self, ChannelError> {
        let family_key = LfsrToeplitzKey::generate(b_hp, rng)?;
        ledger.charge(pair, initiator, Purpose::WcSetup, 2 * b_hp as u64);
        Ok(Self::with_key(pair, family_key, rng.derive(0x7c)))
    }

    /// Builds a channel around an explicit hash key (no setup charge);
    /// used to enumerate the key space in security experiments.
    pub fn with_key(pair: PartyPair, family_key: LfsrToeplitzKey, pad_rng: RandomSource) -> Self {
        Self {
            pair,
            family_key,
            tag_pads: Vec::new(),
            pad_rng,
            messages_sent: 0,
            consumed: BTreeSet::new(),
        }
    }

    pub fn pair(&self) -> PartyPair {
        self.pair
    }

    pub fn b_hp(&self) -> usize {
        self.family_key.b_h()
    }

    pub fn messages_sent(&self) -> u32 {
        self.messages_sent
    }

    fn tag_pad(&mut self, index: u32) -> BitString {
        while self.tag_pads.len() <= index as usize {
            let pad = self.pad_rng.bits(self.b_hp());
            self.tag_pads.push(pad);
        }
        self.tag_pads[index as usize].clone()
    }

    fn raw_tag(&self, payload: &BitString) -> BitString {
        toeplitz_hash(
            self.family_key.p(),
            self.family_key.s0(),
            &payload.pad_trailing_one(),
        )
    }

    /// Authenticates `payload`: t = f(pad(m)) xor k_i with a fresh k_i.
    /// Charges b'_H tag-pad bits to the pair.
    pub fn wc_send(&mut self, ledger: &mut KeyLedger, from: Party, payload: BitString) -> WcMessage {
        let index = self.messages_sent;
        self.messages_sent += 1;
        let tag = self.raw_tag(&payload).xor(&self.tag_pad(index));
        ledger.charge(self.pair, from, Purpose::WcTagOtp, self.b_hp() as u64);
        WcMessage {
            index,
            payload,
            tag,
        }
    }

    /// Verifies a received message. Accept iff f(pad(m)) xor k_index = t
    /// and the index was not consumed before.
    pub fn wc_receive(&mut self, msg: &WcMessage) -> WcVerdict {
        if !self.consumed.insert(msg.index) {
            return WcVerdict::Abort(AbortReason::ReplayedIndex);
        }
        if msg.index >= self.messages_sent {
            // an index the sender never used has no agreed pad
            return WcVerdict::Abort(AbortReason::ReplayedIndex);
        }
        let expect = self.raw_tag(&msg.payload).xor(&self.tag_pad(msg.index));
        if expect == msg.tag {
            WcVerdict::Accept
        } else {
            WcVerdict::Abort(AbortReason::TagMismatch)
        }
    }
}

/// What an in-flight substitution does to a message.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TamperAction {
    /// deliver unchanged (control case)
    Identity,
    /// replace payload and tag wholesale
    Substitute { payload: BitString, tag: BitString },
    /// XOR a mask into the low bits of the payload, keep the tag
    XorPayload { mask: BitString },
}

/// One adversarial substitution, keyed by WC message index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TamperRule {
    pub index: u32,
    pub action: TamperAction,
}

/// Applies a rule to an in-flight message; the index is preserved.
pub fn apply_tamper(rule: &TamperRule, msg: WcMessage) -> WcMessage {
    match &rule.action {
        TamperAction::Identity => msg,
        TamperAction::Substitute { payload, tag } => WcMessage {
            index: msg.index,
            payload: payload.clone(),
            tag: tag.clone(),
        },
        TamperAction::XorPayload { mask } => {
            let mut payload = msg.payload;
            for i in 0..mask.len().min(payload.len()) {
                if mask.get(i) {
                    payload.set(i, !payload.get(i));
                }
            }
            WcMessage {
                index: msg.index,
                payload,
                tag: msg.tag,
            }
        }
    }
}

/// At most one rule per message index.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TamperPlan {
    rules: BTreeMap<u32, TamperRule>,
}

impl TamperPlan {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn new(rules: Vec<TamperRule>) -> Result<Self, ChannelError> {
        let mut map = BTreeMap::new();
        for r in rules {
            let index = r.index;
            if map.insert(index, r).is_some() {
                return Err(ChannelError::DuplicateTamperRule(index));
            }
        }
        Ok(Self { rules: map })
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    /// Applies the rule targeting this message's index, if any; returns the
    /// (possibly substituted) message and whether it was touched.
    pub fn apply(&self, msg: WcMessage) -> (WcMessage, bool) {
        match self.rules.get(&msg.index) {
            None => (msg, false),
            Some(rule) => (apply_tamper(rule, msg), true),
        }
    }
}

impl<'de> Deserialize<'de> for TamperPlan {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let rules = Vec::<TamperRule>::deserialize(d)?;
        TamperPlan::new(rules).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair() -> PartyPair {
        PartyPair::new(Party::BOB, Party::CHARLIE)
    }

    #[test]
    fn party_names() {
        assert_eq!(Party::Alice.to_string(), "alice");
        assert_eq!(Party::BOB.to_string(), "bob");
        assert_eq!(Party::CHARLIE.to_string(), "charlie");
        assert_eq!(Party::Receiver(2).to_string(), "p3");
        assert_eq!(
            PartyPair::new(Party::CHARLIE, Party::BOB),
            PartyPair::new(Party::BOB, Party::CHARLIE)
        );
    }

    #[test]
    fn otp_charges_payload_length_and_round_trips() {
        let mut ledger = KeyLedger::new();
        let mut ch = SecretChannel::new(pair(), RandomSource::from_seed(1));
        let mut rng = RandomSource::from_seed(2);
        let payload = rng.bits(10);
        let cipher = ch.otp_send(&mut ledger, Party::BOB, &payload);
        assert_eq!(ledger.total_pair_purpose(pair(), Purpose::OtpPayload), 10);
        assert_eq!(ch.otp_receive(Party::BOB, &cipher), payload);
    }

    #[test]
    fn otp_pads_are_never_reused() {
        let mut ledger = KeyLedger::new();
        let mut ch = SecretChannel::new(pair(), RandomSource::from_seed(1));
        let zero = BitString::zeros(64);
        let c1 = ch.otp_send(&mut ledger, Party::BOB, &zero);
        let c2 = ch.otp_send(&mut ledger, Party::BOB, &zero);
        let c3 = ch.otp_send(&mut ledger, Party::CHARLIE, &zero);
        // ciphertexts of the zero payload expose the pads themselves
        assert_ne!(c1, c2);
        assert_ne!(c1, c3);
        assert_eq!(ledger.total_pair(pair()), 192);
    }

    #[test]
    fn wc_total_charge_is_2_plus_n_tags() {
        let mut ledger = KeyLedger::new();
        let mut rng = RandomSource::from_seed(3);
        let mut ch = WcChannelState::setup(pair(), 16, &mut rng, &mut ledger, Party::BOB).unwrap();
        let mut payload_rng = RandomSource::from_seed(4);
        let n = 5u64;
        for _ in 0..n {
            let m = payload_rng.bits(40);
            let msg = ch.wc_send(&mut ledger, Party::BOB, m);
            assert_eq!(msg.tag.len(), 16);
            assert_eq!(ch.wc_receive(&msg), WcVerdict::Accept);
        }
        assert_eq!(ledger.total_pair(pair()), (2 + n) * 16);
    }

    #[test]
    fn same_payload_gets_fresh_tags() {
        let mut ledger = KeyLedger::new();
        let mut rng = RandomSource::from_seed(5);
        let mut ch = WcChannelState::setup(pair(), 12, &mut rng, &mut ledger, Party::BOB).unwrap();
        let m = BitString::from_u64(0xabcd, 16);
        let t1 = ch.wc_send(&mut ledger, Party::BOB, m.clone());
        let t2 = ch.wc_send(&mut ledger, Party::BOB, m);
        assert_ne!(t1.tag, t2.tag);
    }

    #[test]
    fn replayed_index_aborts() {
        let mut ledger = KeyLedger::new();
        let mut rng = RandomSource::from_seed(6);
        let mut ch = WcChannelState::setup(pair(), 8, &mut rng, &mut ledger, Party::BOB).unwrap();
        let msg = ch.wc_send(&mut ledger, Party::BOB, BitString::from_u64(1, 4));
        assert_eq!(ch.wc_receive(&msg), WcVerdict::Accept);
        assert_eq!(
            ch.wc_receive(&msg),
            WcVerdict::Abort(AbortReason::ReplayedIndex)
        );
    }

    #[test]
    fn flipping_a_payload_bit_aborts() {
        let mut ledger = KeyLedger::new();
        let mut rng = RandomSource::from_seed(7);
        let mut ch = WcChannelState::setup(pair(), 24, &mut rng, &mut ledger, Party::BOB).unwrap();
        let msg = ch.wc_send(&mut ledger, Party::BOB, BitString::from_u64(0b1010, 4));
        let rule = TamperRule {
            index: 0,
            action: TamperAction::XorPayload {
                mask: BitString::from_u64(1, 1),
            },
        };
        let tampered = apply_tamper(&rule, msg);
        assert_eq!(
            ch.wc_receive(&tampered),
            WcVerdict::Abort(AbortReason::TagMismatch)
        );
    }

    #[test]
    fn substitution_survives_on_at_most_epsilon_of_keys() {
        // exhaustive key space at b'_H = 4: a bit-flip substitution with the
        // original tag is accepted only when the connection polynomial
        // divides the difference, which stays below eps = b_M 2^(1-b'_H)
        let b_hp = 4usize;
        let b_m = 6usize;
        let m = BitString::from_u64(0b101101, b_m);
        let polys = crate::gf2::enumerate_irreducibles(b_hp);
        let mut total = 0u64;
        let mut accepted = 0u64;
        for p in &polys {
            for s in 1u64..(1 << b_hp) {
                let key =
                    LfsrToeplitzKey::new(p.clone(), BitString::from_u64(s, b_hp)).unwrap();
                let mut ledger = KeyLedger::new();
                let mut ch = WcChannelState::with_key(pair(), key, RandomSource::from_seed(s));
                let msg = ch.wc_send(&mut ledger, Party::BOB, m.clone());
                let rule = TamperRule {
                    index: 0,
                    action: TamperAction::XorPayload {
                        mask: BitString::from_u64(0b11, 2),
                    },
                };
                total += 1;
                if ch.wc_receive(&apply_tamper(&rule, msg)) == WcVerdict::Accept {
                    accepted += 1;
                }
            }
        }
        let eps = b_m as f64 * 2f64.powf(1.0 - b_hp as f64);
        assert!(
            (accepted as f64) <= eps * total as f64,
            "{accepted}/{total} accepted, eps = {eps}"
        );
    }

    #[test]
    fn tamper_actions() {
        let msg = WcMessage {
            index: 3,
            payload: BitString::from_u64(0b1100, 4),
            tag: BitString::from_u64(0b01, 2),
        };
        let id = TamperRule {
            index: 3,
            action: TamperAction::Identity,
        };
        assert_eq!(apply_tamper(&id, msg.clone()), msg);
        let sub = TamperRule {
            index: 3,
            action: TamperAction::Substitute {
                payload: BitString::from_u64(0b1, 4),
                tag: BitString::from_u64(0b10, 2),
            },
        };
        let out = apply_tamper(&sub, msg.clone());
        assert_eq!(out.payload, BitString::from_u64(0b1, 4));
        assert_eq!(out.index, 3);
        let mask = TamperRule {
            index: 3,
            action: TamperAction::XorPayload {
                mask: BitString::from_u64(0b11, 2),
            },
        };
        let out = apply_tamper(&mask, msg.clone());
        assert_eq!(out.payload, BitString::from_u64(0b1111, 4));
        assert_eq!(out.tag, msg.tag);
    }

    #[test]
    fn tamper_plan_rejects_duplicates() {
        let r = |index| TamperRule {
            index,
            action: TamperAction::Identity,
        };
        assert!(TamperPlan::new(vec![r(1), r(2)]).is_ok());
        assert_eq!(
            TamperPlan::new(vec![r(1), r(1)]),
            Err(ChannelError::DuplicateTamperRule(1))
        );
    }

    #[test]
    fn ledger_itemization() {
        let mut ledger = KeyLedger::new();
        let ab = PartyPair::new(Party::Alice, Party::BOB);
        ledger.charge(ab, Party::Alice, Purpose::HashAgreement, 24);
        ledger.charge(pair(), Party::BOB, Purpose::OtpPayload, 100);
        ledger.charge(pair(), Party::CHARLIE, Purpose::OtpPayload, 50);
        ledger.charge(pair(), Party::BOB, Purpose::WcTagOtp, 8);
        assert_eq!(ledger.total_pair(ab), 24);
        assert_eq!(ledger.total_pair(pair()), 158);
        assert_eq!(
            ledger.total_sent_by(pair(), Party::BOB, Purpose::OtpPayload),
            100
        );
        assert_eq!(ledger.grand_total(), 182);
    }
}
