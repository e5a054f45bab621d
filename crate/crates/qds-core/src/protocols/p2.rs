//! Protocol 2: key-block exchange with per-block one-time hashing.
//!
//! Alice shares a 3 n b_H-bit key with each receiver, split into n blocks
//! s^j || r^j. Bob and Charlie each shuffle their blocks and hand half of
//! them (with positions) to the other over the authenticated secret
//! channel, so Alice no longer knows who holds which block. Alice signs
//! the document with 2n fresh LFSR-Toeplitz functions,
//! Sig_j = (T_{p^j, s^j} Doc || p^j) xor r^j. Bob verifies his 3n/2
//! signatures with zero tolerance and forwards the pair; Charlie accepts
//! if his 3n/2 signatures show at most e_max mismatches.

use serde::{Deserialize, Serialize};

use crate::bits::BitString;
use crate::channels::{
    Party, PartyPair, Purpose, SecretChannel, TamperPlan, WcChannelState, WcVerdict,
};
use crate::gf2::{sample_irreducible, Gf2Poly};
use crate::rng::RandomSource;
use crate::secbounds::ceil_log2;
use crate::transcript::{ChannelKind, ReceiverReport, RunOutcome, Transcript, Verdict};
use crate::uhash::toeplitz_hash;

use super::{stream, ProtocolError};

/// One key block: b_H hash-seed bits and 2 b_H digest-pad bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeyBlock {
    pub s: BitString,
    pub r: BitString,
}

impl KeyBlock {
    fn to_bits(&self) -> BitString {
        self.s.concat(&self.r)
    }

    fn from_bits(bits: &BitString, b_h: usize) -> Self {
        Self {
            s: bits.slice(0, b_h),
            r: bits.slice(b_h, 2 * b_h),
        }
    }
}

/// Bob's and Charlie's preshared keys, as n blocks each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct P2Keys {
    pub x_b: Vec<KeyBlock>,
    pub x_c: Vec<KeyBlock>,
}

impl P2Keys {
    pub fn distribute(n: usize, b_h: usize, rng: &mut RandomSource) -> Self {
        let draw = |rng: &mut RandomSource| {
            (0..n)
                .map(|_| KeyBlock {
                    s: rng.nonzero_bits(b_h),
                    r: rng.bits(2 * b_h),
                })
                .collect()
        };
        Self {
            x_b: draw(rng),
            x_c: draw(rng),
        }
    }
}

/// Dishonest-Alice knobs plus channel tampering.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct P2Adversary {
    #[serde(default)]
    pub tamper: TamperPlan,
    /// signature blocks (0-based, in 0..2n) Alice corrupts before sending
    #[serde(default)]
    pub corrupt_sigs: Vec<usize>,
}

/// Signs the document with 2n fresh hash functions; |Sig| = 4 n b_H.
pub fn sign(
    doc: &BitString,
    keys: &P2Keys,
    rng: &mut RandomSource,
) -> Result<BitString, ProtocolError> {
    let mut sig = BitString::new();
    for block in keys.x_b.iter().chain(keys.x_c.iter()) {
        let b_h = block.s.len();
        let p = sample_irreducible(b_h, rng).map_err(crate::uhash::UhashError::from)?;
        let h = toeplitz_hash(&p, &block.s, &doc.pad_trailing_one());
        sig = sig.concat(&h.concat(&p.low_coeffs()).xor(&block.r));
    }
    Ok(sig)
}

/// Checks one 2 b_H-bit signature block against one key block.
pub fn verify_block(doc: &BitString, sig_block: &BitString, block: &KeyBlock) -> bool {
    let b_h = block.s.len();
    if sig_block.len() != 2 * b_h {
        return false;
    }
    let dig = sig_block.xor(&block.r);
    let h = dig.slice(0, b_h);
    let p = Gf2Poly::monic_with_low(b_h, &dig.slice(b_h, b_h));
    h == toeplitz_hash(&p, &block.s, &doc.pad_trailing_one())
}

fn sig_block(sig: &BitString, index: usize, b_h: usize) -> BitString {
    sig.slice(index * 2 * b_h, 2 * b_h)
}

fn encode_positions(positions: &[usize], width: usize) -> BitString {
    let mut out = BitString::new();
    for &p in positions {
        out = out.concat(&BitString::from_u64(p as u64, width));
    }
    out
}

fn decode_positions(bits: &BitString, count: usize, width: usize) -> Vec<usize> {
    (0..count)
        .map(|i| bits.slice(i * width, width).as_u64() as usize)
        .collect()
}

pub fn validate(doc_len: u64, n: u64, b_h: u64, e_max: u64) -> Result<(), ProtocolError> {
    if n < 2 || n % 2 != 0 {
        return Err(ProtocolError::OddN(n));
    }
    if doc_len <= b_h {
        return Err(ProtocolError::MessageTooShort);
    }
    if ((doc_len + 4 * n * b_h) as f64) <= (n as f64 / 2.0) * (n as f64).log2() {
        return Err(ProtocolError::P2Hypothesis);
    }
    if e_max >= 3 * n / 2 {
        return Err(ProtocolError::BadEmax);
    }
    Ok(())
}

/// Runs the full protocol. Tamper indexes on the Bob-Charlie channel:
/// 0 = Bob's blocks, 1 = Bob's positions, 2 = Charlie's blocks,
/// 3 = Charlie's positions, 4 = the forwarded pair.
pub fn run(
    doc: &BitString,
    n: usize,
    b_h: usize,
    b_hp: usize,
    e_max: u64,
    seed: u64,
    adversary: &P2Adversary,
) -> Result<Transcript, ProtocolError> {
    validate(doc.len() as u64, n as u64, b_h as u64, e_max)?;
    let root = RandomSource::from_seed(seed);
    let mut t = Transcript::new("p2", seed, doc.len() as u64);
    let (alice, bob, charlie) = (Party::Alice, Party::BOB, Party::CHARLIE);
    let ab = PartyPair::new(alice, bob);
    let ac = PartyPair::new(alice, charlie);
    let bc = PartyPair::new(bob, charlie);
    let half = n / 2;
    let pos_bits = ceil_log2(n as u64) as usize;

    // 1.1 preshared keys with Alice
    let keys = P2Keys::distribute(n, b_h, &mut root.derive(stream::DISTRIBUTION));
    let key_bits = 3 * n as u64 * b_h as u64;
    t.ledger.charge(ab, alice, Purpose::HashAgreement, key_bits);
    t.ledger.charge(ac, alice, Purpose::HashAgreement, key_bits);
    t.event("p2.distribute", alice, bob, ChannelKind::Preshared, key_bits, false, "ok");
    t.event("p2.distribute", alice, charlie, ChannelKind::Preshared, key_bits, false, "ok");

    // 1.2 private shuffles
    let mut gamma_b: Vec<usize> = (0..n).collect();
    let mut gamma_c: Vec<usize> = (0..n).collect();
    root.derive(stream::RECEIVER_BASE).shuffle(&mut gamma_b);
    root.derive(stream::RECEIVER_BASE + 1).shuffle(&mut gamma_c);

    // 1.3 authenticated secret exchange of half the blocks + positions
    let mut wc = WcChannelState::setup(bc, b_hp, &mut root.derive(stream::WC_SETUP), &mut t.ledger, bob)?;
    t.event("p2.wc-setup", bob, charlie, ChannelKind::WcAuth, 2 * b_hp as u64, false, "ok");
    let mut otp = SecretChannel::new(bc, root.derive(stream::OTP_PADS));

    let send_secret = |t: &mut Transcript,
                           wc: &mut WcChannelState,
                           otp: &mut SecretChannel,
                           from: Party,
                           to: Party,
                           step: &str,
                           payload: BitString|
     -> Option<BitString> {
        let want = payload.len();
        let cipher = otp.otp_send(&mut t.ledger, from, &payload);
        let msg = wc.wc_send(&mut t.ledger, from, cipher);
        let (msg, tampered) = adversary.tamper.apply(msg);
        let ok = wc.wc_receive(&msg) == WcVerdict::Accept && msg.payload.len() == want;
        t.event(
            step,
            from,
            to,
            ChannelKind::SecretOtp,
            want as u64 + b_hp as u64,
            tampered,
            if ok { "ok" } else { "abort" },
        );
        if ok {
            Some(otp.otp_receive(from, &msg.payload))
        } else {
            t.outcome = RunOutcome::Aborted { step: step.into() };
            None
        }
    };

    let bob_blocks_payload = gamma_b[..half]
        .iter()
        .fold(BitString::new(), |acc, &j| acc.concat(&keys.x_b[j].to_bits()));
    let Some(bits) = send_secret(&mut t, &mut wc, &mut otp, bob, charlie, "p2.exchange-blocks-b", bob_blocks_payload) else {
        return Ok(t);
    };
    let charlie_received_blocks: Vec<KeyBlock> = (0..half)
        .map(|i| KeyBlock::from_bits(&bits.slice(i * 3 * b_h, 3 * b_h), b_h))
        .collect();

    let Some(bits) = send_secret(
        &mut t,
        &mut wc,
        &mut otp,
        bob,
        charlie,
        "p2.exchange-positions-b",
        encode_positions(&gamma_b[..half], pos_bits),
    ) else {
        return Ok(t);
    };
    let charlie_received_positions = decode_positions(&bits, half, pos_bits);

    let charlie_blocks_payload = gamma_c[..half]
        .iter()
        .fold(BitString::new(), |acc, &j| acc.concat(&keys.x_c[j].to_bits()));
    let Some(bits) = send_secret(&mut t, &mut wc, &mut otp, charlie, bob, "p2.exchange-blocks-c", charlie_blocks_payload) else {
        return Ok(t);
    };
    let bob_received_blocks: Vec<KeyBlock> = (0..half)
        .map(|i| KeyBlock::from_bits(&bits.slice(i * 3 * b_h, 3 * b_h), b_h))
        .collect();

    let Some(bits) = send_secret(
        &mut t,
        &mut wc,
        &mut otp,
        charlie,
        bob,
        "p2.exchange-positions-c",
        encode_positions(&gamma_c[..half], pos_bits),
    ) else {
        return Ok(t);
    };
    let bob_received_positions = decode_positions(&bits, half, pos_bits);

    // 2.1-2.2 Alice signs with 2n hash functions and broadcasts to Bob
    let mut sig = sign(doc, &keys, &mut root.derive(stream::ALICE))?;
    for &j in &adversary.corrupt_sigs {
        if j < 2 * n {
            let i = j * 2 * b_h;
            sig.set(i, !sig.get(i));
        }
    }
    t.sig_len = sig.len() as u64;
    t.event("p2.sign", alice, bob, ChannelKind::Public, 0, false, "ok");

    // 2.3 Bob verifies his 3n/2 signatures with zero tolerance
    let mut bob_ok = true;
    for j in 0..n {
        if !verify_block(doc, &sig_block(&sig, j, b_h), &keys.x_b[j]) {
            bob_ok = false;
        }
    }
    for (i, block) in bob_received_blocks.iter().enumerate() {
        let pos = bob_received_positions[i];
        if pos >= n || !verify_block(doc, &sig_block(&sig, n + pos, b_h), block) {
            bob_ok = false;
        }
    }

    // message 4: forward {Doc, Sig}, or the rejection symbol
    let payload = if bob_ok {
        BitString::from_bits([false]).concat(doc).concat(&sig)
    } else {
        BitString::from_bits([true])
    };
    let want = payload.len();
    let msg = wc.wc_send(&mut t.ledger, bob, payload);
    let (msg, tampered) = adversary.tamper.apply(msg);
    let ok = wc.wc_receive(&msg) == WcVerdict::Accept && msg.payload.len() == want;
    t.event(
        "p2.forward-pair",
        bob,
        charlie,
        ChannelKind::WcAuth,
        b_hp as u64,
        tampered,
        if ok { "ok" } else { "abort" },
    );
    if !ok {
        t.outcome = RunOutcome::Aborted { step: "p2.forward-pair".into() };
        return Ok(t);
    }

    // 2.4 Charlie verifies his 3n/2 signatures with tolerance e_max.
    // After a rejection symbol he has no pair to check and rejects too.
    let charlie_verdict = if msg.payload.get(0) {
        Verdict::reject()
    } else {
        let doc_c = msg.payload.slice(1, doc.len());
        let sig_c = msg.payload.slice(1 + doc.len(), 4 * n * b_h);
        let mut mismatches = 0u64;
        for j in 0..n {
            if !verify_block(&doc_c, &sig_block(&sig_c, n + j, b_h), &keys.x_c[j]) {
                mismatches += 1;
            }
        }
        for (i, block) in charlie_received_blocks.iter().enumerate() {
            let pos = charlie_received_positions[i];
            if pos >= n || !verify_block(&doc_c, &sig_block(&sig_c, pos, b_h), block) {
                mismatches += 1;
            }
        }
        if mismatches <= e_max {
            Verdict::accept(0)
        } else {
            Verdict::reject()
        }
    };

    let bc_total = t.ledger.total_pair(bc);
    t.verdicts.push(ReceiverReport {
        party: bob.to_string(),
        verdict: if bob_ok { Verdict::accept(0) } else { Verdict::reject() },
        preshared_bits: t.ledger.total_pair(ab) + bc_total,
    });
    t.verdicts.push(ReceiverReport {
        party: charlie.to_string(),
        verdict: charlie_verdict,
        preshared_bits: t.ledger.total_pair(ac) + bc_total,
    });
    Ok(t)
}
