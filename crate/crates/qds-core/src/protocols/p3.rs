//! Protocol 3: N receivers, ASU-hash tag vectors and verification levels.
//!
//! The sender draws N^2 k functions from the ASU family and hands each
//! receiver a window of Nk of them over secret channels. Receivers
//! re-partition their windows and exchange one k-subset (functions plus
//! positions) with every other receiver over authenticated secret
//! channels. The signature is the vector of all N^2 k tags. Receiver i
//! tests, per source j, whether the mismatch count in block R_{j->i}
//! stays below s_l k, and accepts at level l when more than
//! N (1/2 + (l+1) d_R) tests pass, descending from l_max to 0.

use std::collections::BTreeMap;

use crate::bits::BitString;
use crate::channels::{
    Party, PartyPair, Purpose, SecretChannel, TamperPlan, WcChannelState, WcVerdict,
};
use crate::rng::RandomSource;
use crate::secbounds::ceil_log2;
use crate::transcript::{ChannelKind, LevelAttempt, ReceiverReport, RunOutcome, Transcript, Verdict, VerdictOutcome};
use crate::uhash::{asu_hash, asu_key_bits, AsuFamily, AsuKey};

use super::{stream, DocSigPair, ProtocolError};

/// Mismatch-tolerance thresholds s_l for l in {-1, 0, ..., l_max}, as exact
/// rationals so the strict comparison `mismatches < s_l k` never depends on
/// floating-point rounding.
///
/// For l >= 0 the spacing follows s_l = 1/2 - (l+2)/(2 (l_max+3)), which
/// keeps 1/2 > s_0 > ... > s_{l_max} > 0 strict and puts s_0 at 1/4 when
/// l_max = 1. The dispute level sits just above level 0,
/// s_{-1} = s_0 + 2^-20, so that majority-vote verification tolerates the
/// same integer mismatch counts as level 0 for every practical k: this is
/// what makes the forgery-via-dispute success rate coincide with the
/// plain forgery rate in the two-receiver scenario.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Thresholds {
    l_max: u64,
}

const DISPUTE_GAP_LOG2: u32 = 20;

impl Thresholds {
    pub fn new(l_max: u64) -> Self {
        Self { l_max }
    }

    pub fn l_max(&self) -> u64 {
        self.l_max
    }

    /// s_l as (numerator, denominator).
    pub fn s(&self, l: i64) -> (u64, u64) {
        assert!(l >= -1 && l <= self.l_max as i64, "level {l} out of range");
        let den = 2 * (self.l_max + 3);
        if l >= 0 {
            (self.l_max + 1 - l as u64, den)
        } else {
            let scale = 1u64 << DISPUTE_GAP_LOG2;
            ((self.l_max + 1) * scale + den, den * scale)
        }
    }

    /// The block test: passes iff mismatches < s_l k (strict).
    pub fn test_passes(&self, mismatches: u64, k: u64, l: i64) -> bool {
        let (num, den) = self.s(l);
        (mismatches as u128) * (den as u128) < (num as u128) * (k as u128)
    }

    /// The quorum: sum of passed tests > N delta_l with
    /// delta_l = 1/2 + (l+1)(omega-1)/N.
    pub fn quorum_passes(&self, passed: u64, n_parties: u64, l: i64, omega: u64) -> bool {
        let slack = (l + 1) as u64;
        2 * passed > n_parties + 2 * slack * (omega - 1)
    }
}

/// Shared view of one run: parameters, every receiver's holdings and the
/// block partitions as each receiver sees them.
#[derive(Clone, Debug)]
pub struct P3State {
    pub n_parties: usize,
    pub k: usize,
    pub b_h: usize,
    pub omega: u64,
    pub l_max: u64,
    pub thresholds: Thresholds,
    pub family: AsuFamily,
    /// blocks_seen[receiver][source] = global function indexes of the block
    pub blocks_seen: Vec<Vec<Vec<usize>>>,
    /// holdings[receiver] maps global index -> that receiver's key copy
    pub holdings: Vec<BTreeMap<usize, AsuKey>>,
}

/// The test matrix row T_{i,j,l} for one receiver at one level, plus the
/// quorum outcome.
pub fn p3_verify_level(state: &P3State, receiver: usize, pair: &DocSigPair, l: i64) -> LevelAttempt {
    let k = state.k as u64;
    let b_h = state.b_h;
    let mut mismatches = Vec::with_capacity(state.n_parties);
    let mut tests = Vec::with_capacity(state.n_parties);
    for source in 0..state.n_parties {
        let mut mism = 0u64;
        for &r in &state.blocks_seen[receiver][source] {
            let ok = state.holdings[receiver].get(&r).is_some_and(|key| {
                (r + 1) * b_h <= pair.sig.len()
                    && asu_hash(key, &pair.doc)
                        .map(|h| h == pair.sig.slice(r * b_h, b_h))
                        .unwrap_or(false)
            });
            if !ok {
                mism += 1;
            }
        }
        tests.push(state.thresholds.test_passes(mism, k, l));
        mismatches.push(mism);
    }
    let passed_count = tests.iter().filter(|&&b| b).count() as u64;
    LevelAttempt {
        level: l,
        mismatches,
        tests,
        passed: state
            .thresholds
            .quorum_passes(passed_count, state.n_parties as u64, l, state.omega),
    }
}

/// Majority-vote dispute resolution: Valid iff at least floor(N/2) + 1
/// receivers verify the pair at level -1.
pub fn p3_majority_vote(state: &P3State, pair: &DocSigPair) -> bool {
    let votes = (0..state.n_parties)
        .filter(|&i| p3_verify_level(state, i, pair, -1).passed)
        .count() as u64;
    votes >= state.n_parties as u64 / 2 + 1
}

pub fn validate(
    doc_len: u64,
    n_parties: u64,
    k: u64,
    b_h: u64,
    omega: u64,
    l_max: u64,
) -> Result<(), ProtocolError> {
    if n_parties < 2 {
        return Err(ProtocolError::TooFewParties);
    }
    if k == 0 {
        return Err(ProtocolError::BadK);
    }
    if omega == 0 || 2 * omega >= n_parties + 1 {
        return Err(ProtocolError::BadOmega);
    }
    if 2 * (l_max + 1) * (omega - 1) >= n_parties {
        return Err(ProtocolError::BadLevels);
    }
    if doc_len <= b_h {
        return Err(ProtocolError::MessageTooShort);
    }
    Ok(())
}

fn key_to_wire(key: &AsuKey, y_bar: usize) -> BitString {
    let w = key.family().field().width();
    let bits = key
        .alpha()
        .value()
        .concat(key.beta().value())
        .concat(key.gamma());
    debug_assert_eq!(bits.len(), 2 * w + key.family().b_h());
    let mut out = bits;
    while out.len() < y_bar {
        out.push(false);
    }
    out
}

fn key_from_wire(family: &AsuFamily, bits: &BitString) -> Result<AsuKey, ProtocolError> {
    let w = family.field().width();
    let alpha = bits.slice(0, w);
    let beta = bits.slice(w, w);
    let gamma = bits.slice(2 * w, family.b_h());
    Ok(AsuKey::new(family.clone(), alpha, beta, gamma)?)
}

/// Runs the full protocol and returns the transcript together with the
/// final state and the signed pair (for standalone verification and
/// majority-vote experiments). Tamper indexes count messages on the
/// first-second receiver channel: 0..3 are the exchange messages, 4 the
/// forwarded pair (at N = 2).
pub fn run(
    doc: &BitString,
    n_parties: usize,
    k: usize,
    b_h: usize,
    b_hp: usize,
    omega: u64,
    l_max: u64,
    seed: u64,
    tamper: &TamperPlan,
) -> Result<(Transcript, P3State, DocSigPair), ProtocolError> {
    validate(
        doc.len() as u64,
        n_parties as u64,
        k as u64,
        b_h as u64,
        omega,
        l_max,
    )?;
    let family = AsuFamily::for_message_len(doc.len() as u64, b_h)?;
    let y_bar = asu_key_bits(doc.len() as u64, b_h as u64);
    if y_bar < family.key_bits() {
        return Err(ProtocolError::AccountingRange {
            y_bar,
            exact: family.key_bits(),
        });
    }
    let n = n_parties;
    let window = n * k;
    let total_fns = n * window;
    let pos_bits = ceil_log2(window as u64) as usize;
    let root = RandomSource::from_seed(seed);
    let mut t = Transcript::new("p3", seed, doc.len() as u64);
    let alice = Party::Alice;
    let receiver = |i: usize| Party::Receiver(i as u16);

    // 1.1 the sender draws N^2 k functions with replacement
    let mut sender_rng = root.derive(stream::ALICE);
    let functions: Vec<AsuKey> = (0..total_fns).map(|_| family.generate(&mut sender_rng)).collect();

    // 1.2 each receiver gets its window over a secret channel; the wire
    // form of one function is the y-bar-bit accounting unit
    let mut holdings: Vec<BTreeMap<usize, AsuKey>> = vec![BTreeMap::new(); n];
    for i in 0..n {
        let pair_ai = PartyPair::new(alice, receiver(i));
        let bits = (window * y_bar as usize) as u64;
        t.ledger.charge(pair_ai, alice, Purpose::OtpPayload, bits);
        t.event(
            "p3.distribute-functions",
            alice,
            receiver(i),
            ChannelKind::SecretOtp,
            bits,
            false,
            "ok",
        );
    }

    // 1.3 receivers re-partition their windows and cross-share one block
    // per peer over authenticated secret channels
    let mut partitions: Vec<Vec<Vec<usize>>> = Vec::with_capacity(n); // [source][target]
    for i in 0..n {
        let mut idx: Vec<usize> = (i * window..(i + 1) * window).collect();
        root.derive(stream::RECEIVER_BASE + i as u64).shuffle(&mut idx);
        // chunk j goes to receiver j; sorted index order is the wire order
        let chunks: Vec<Vec<usize>> = idx
            .chunks(k)
            .map(|c| {
                let mut v = c.to_vec();
                v.sort_unstable();
                v
            })
            .collect();
        debug_assert_eq!(chunks.len(), n);
        partitions.push(chunks);
    }

    let mut wc: BTreeMap<(usize, usize), WcChannelState> = BTreeMap::new();
    let mut otp: BTreeMap<(usize, usize), SecretChannel> = BTreeMap::new();
    for i in 0..n {
        for j in i + 1..n {
            let pair_ij = PartyPair::new(receiver(i), receiver(j));
            let mut setup_rng = root.derive(stream::WC_SETUP + (i * n + j) as u64);
            let ch = WcChannelState::setup(pair_ij, b_hp, &mut setup_rng, &mut t.ledger, receiver(i))?;
            t.event(
                "p3.wc-setup",
                receiver(i),
                receiver(j),
                ChannelKind::WcAuth,
                2 * b_hp as u64,
                false,
                "ok",
            );
            wc.insert((i, j), ch);
            otp.insert(
                (i, j),
                SecretChannel::new(pair_ij, root.derive(stream::OTP_PADS + (i * n + j) as u64)),
            );
        }
    }
    let chan_key = |a: usize, b: usize| (a.min(b), a.max(b));
    let is_tamper_channel = |a: usize, b: usize| chan_key(a, b) == (0, 1);

    // each receiver's view of who contributed which block; the kept block
    // R_{i->i} stays exact by construction, everything else arrives over
    // the exchange below. F_i ends up with exactly Nk functions.
    let mut blocks_seen: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; n];
    for (i, parts) in partitions.iter().enumerate() {
        blocks_seen[i][i] = parts[i].clone();
        for &r in &parts[i] {
            holdings[i].insert(r, functions[r].clone());
        }
    }

    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let block = &partitions[i][j];
            let fn_payload = block.iter().fold(BitString::new(), |acc, &r| {
                acc.concat(&key_to_wire(&functions[r], y_bar as usize))
            });
            let pos_payload = block.iter().fold(BitString::new(), |acc, &r| {
                acc.concat(&BitString::from_u64((r - i * window) as u64, pos_bits))
            });
            let ch = wc.get_mut(&chan_key(i, j)).expect("channel exists");
            let sc = otp.get_mut(&chan_key(i, j)).expect("channel exists");
            let mut deliver = |t: &mut Transcript, step: &str, payload: BitString| -> Option<BitString> {
                let want = payload.len();
                let cipher = sc.otp_send(&mut t.ledger, receiver(i), &payload);
                let msg = ch.wc_send(&mut t.ledger, receiver(i), cipher);
                let (msg, tampered) = if is_tamper_channel(i, j) {
                    tamper.apply(msg)
                } else {
                    (msg, false)
                };
                let ok = ch.wc_receive(&msg) == WcVerdict::Accept && msg.payload.len() == want;
                t.event(
                    step,
                    receiver(i),
                    receiver(j),
                    ChannelKind::SecretOtp,
                    (want + b_hp) as u64,
                    tampered,
                    if ok { "ok" } else { "abort" },
                );
                if ok {
                    Some(sc.otp_receive(receiver(i), &msg.payload))
                } else {
                    t.outcome = RunOutcome::Aborted { step: step.into() };
                    None
                }
            };
            let Some(fn_bits) = deliver(&mut t, "p3.exchange-functions", fn_payload) else {
                return finish_aborted(t, state_of(n, k, b_h, omega, l_max, family, blocks_seen, holdings));
            };
            let Some(pos_bits_msg) = deliver(&mut t, "p3.exchange-positions", pos_payload) else {
                return finish_aborted(t, state_of(n, k, b_h, omega, l_max, family, blocks_seen, holdings));
            };
            let mut seen = Vec::with_capacity(k);
            for (slot, _) in block.iter().enumerate() {
                let key = key_from_wire(&family, &fn_bits.slice(slot * y_bar as usize, y_bar as usize))?;
                let offset = pos_bits_msg.slice(slot * pos_bits, pos_bits).as_u64() as usize;
                let global = i * window + offset.min(window - 1);
                holdings[j].insert(global, key);
                seen.push(global);
            }
            blocks_seen[j][i] = seen;
        }
    }

    // 2.1 the signature is the vector of all N^2 k tags
    let mut sig = BitString::new();
    for f in &functions {
        sig = sig.concat(&asu_hash(f, doc)?);
    }
    t.sig_len = sig.len() as u64;
    t.event("p3.sign", alice, receiver(0), ChannelKind::Public, 0, false, "ok");
    let pair = DocSigPair {
        doc: doc.clone(),
        sig,
    };

    let state = state_of(n, k, b_h, omega, l_max, family, blocks_seen, holdings);

    // 2.2-2.3 verification cascade down the receiver chain; reports are
    // pushed only once the run survives to completion
    let mut collected: Vec<(usize, Verdict)> = Vec::new();
    let mut current = pair.clone();
    let mut i = 0usize;
    loop {
        let mut attempts = Vec::new();
        let mut accepted: Option<i64> = None;
        for l in (0..=l_max as i64).rev() {
            let attempt = p3_verify_level(&state, i, &current, l);
            let passed = attempt.passed;
            attempts.push(attempt);
            if passed {
                accepted = Some(l);
                break;
            }
        }
        let verdict = Verdict {
            outcome: match accepted {
                Some(level) => VerdictOutcome::Accept { level },
                None => VerdictOutcome::Reject,
            },
            levels: attempts,
        };
        let accepted_here = accepted.is_some();
        collected.push((i, verdict));
        if i + 1 >= n {
            break;
        }
        if accepted_here {
            // forward the pair to the next receiver, authenticated only
            let payload = BitString::from_bits([false])
                .concat(&current.doc)
                .concat(&current.sig);
            let want = payload.len();
            let ch = wc.get_mut(&chan_key(i, i + 1)).expect("channel exists");
            let msg = ch.wc_send(&mut t.ledger, receiver(i), payload);
            let (msg, tampered) = if is_tamper_channel(i, i + 1) {
                tamper.apply(msg)
            } else {
                (msg, false)
            };
            let ok = ch.wc_receive(&msg) == WcVerdict::Accept && msg.payload.len() == want;
            t.event(
                "p3.forward-pair",
                receiver(i),
                receiver(i + 1),
                ChannelKind::WcAuth,
                b_hp as u64,
                tampered,
                if ok { "ok" } else { "abort" },
            );
            if !ok {
                t.outcome = RunOutcome::Aborted { step: "p3.forward-pair".into() };
                return finish_aborted(t, state);
            }
            current = DocSigPair {
                doc: msg.payload.slice(1, doc.len()),
                sig: msg.payload.slice(1 + doc.len(), total_fns * b_h),
            };
            i += 1;
        } else {
            // flag rejection to every remaining receiver; the chain ends
            // here (what later receivers would do with it is not defined
            // by the protocol, so the transcript just records the signal)
            for j in i + 1..n {
                let ch = wc.get_mut(&chan_key(i, j)).expect("channel exists");
                let msg = ch.wc_send(&mut t.ledger, receiver(i), BitString::from_bits([true]));
                let ok = ch.wc_receive(&msg) == WcVerdict::Accept;
                t.event(
                    "p3.forward-bottom",
                    receiver(i),
                    receiver(j),
                    ChannelKind::WcAuth,
                    b_hp as u64,
                    false,
                    if ok { "ok" } else { "abort" },
                );
            }
            break;
        }
    }
    for (idx, verdict) in collected {
        push_report(&mut t, &state, idx, verdict);
    }
    Ok((t, state, pair))
}

#[allow(clippy::too_many_arguments)]
fn state_of(
    n_parties: usize,
    k: usize,
    b_h: usize,
    omega: u64,
    l_max: u64,
    family: AsuFamily,
    blocks_seen: Vec<Vec<Vec<usize>>>,
    holdings: Vec<BTreeMap<usize, AsuKey>>,
) -> P3State {
    P3State {
        n_parties,
        k,
        b_h,
        omega,
        l_max,
        thresholds: Thresholds::new(l_max),
        family,
        blocks_seen,
        holdings,
    }
}

fn finish_aborted(
    t: Transcript,
    state: P3State,
) -> Result<(Transcript, P3State, DocSigPair), ProtocolError> {
    Ok((
        t,
        state,
        DocSigPair {
            doc: BitString::new(),
            sig: BitString::new(),
        },
    ))
}

fn push_report(t: &mut Transcript, state: &P3State, i: usize, verdict: Verdict) {
    let me = Party::Receiver(i as u16);
    let alice_pair = PartyPair::new(Party::Alice, me);
    let mut bits = t.ledger.total_pair(alice_pair);
    for j in 0..state.n_parties {
        if j == i {
            continue;
        }
        let pair_ij = PartyPair::new(me, Party::Receiver(j as u16));
        bits += t.ledger.total_sent_by(pair_ij, me, Purpose::OtpPayload)
            + t.ledger.total_pair_purpose(pair_ij, Purpose::WcSetup)
            + t.ledger.total_pair_purpose(pair_ij, Purpose::WcTagOtp);
    }
    t.verdicts.push(ReceiverReport {
        party: me.to_string(),
        verdict,
        preshared_bits: bits,
    });
}
