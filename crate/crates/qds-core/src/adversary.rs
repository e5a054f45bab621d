//! Constructive attacks and Monte-Carlo attack-rate estimators.
//!
//! Each estimator plays the adversarial strategy its security proof
//! identifies, measures the empirical success rate, and reports it next to
//! the closed-form bound together with a 99% Clopper-Pearson interval.
//! Correctly guessing an unknown ASU tag is modeled as a
//! Bernoulli(2^(1-b_H)) event: the family bound itself is validated by the
//! exhaustive sweeps in the hashing tests, and here it is the quantity
//! under test.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::gf2::{enumerate_irreducibles, Gf2Poly};
use crate::protocols::p3::Thresholds;
use crate::protocols::DocSigPair;
use crate::rng::RandomSource;
use crate::secbounds::{
    p2_repudiation_product, p3_attack_bound, p3_forgery_bound, p3_transfer_bound, xi,
};
use crate::uhash::toeplitz_hash;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("document too short to embed the forgery polynomial (need b_M > b_H)")]
    DocumentTooShort,
    #[error("trials must be >= 1")]
    NoTrials,
    #[error("{0}")]
    BadParams(String),
}

/// Result of one Monte-Carlo estimation: the empirical rate, its 99%
/// Clopper-Pearson interval, and the closed-form bound it is tested against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    pub trials: u64,
    pub successes: u64,
    pub rate: f64,
    pub cp99_low: f64,
    pub cp99_high: f64,
    pub bound: f64,
}

impl AttackOutcome {
    fn from_counts(successes: u64, trials: u64, bound: f64) -> Self {
        let (cp99_low, cp99_high) = clopper_pearson_99(successes, trials);
        Self {
            trials,
            successes,
            rate: successes as f64 / trials as f64,
            cp99_low,
            cp99_high,
            bound,
        }
    }
}

/// Two-sided 99% Clopper-Pearson interval for a binomial proportion,
/// solved by bisection on the exact binomial tail.
pub fn clopper_pearson_99(successes: u64, trials: u64) -> (f64, f64) {
    assert!(successes <= trials && trials > 0);
    let alpha_half = 0.005;
    let solve = |kk: u64, target: f64| -> f64 {
        // xi(kk, trials, p) is nondecreasing in p
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if xi(kk, trials, mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let low = if successes == 0 {
        0.0
    } else {
        solve(successes, alpha_half)
    };
    let high = if successes == trials {
        1.0
    } else {
        solve(successes + 1, 1.0 - alpha_half)
    };
    (low, high)
}

/// The constructive Protocol 1 forgery when the signing polynomial p_a is
/// known: pick the document mask m with m(x) = p_a(x) g(x) and the zero
/// tag, so Doc' = Doc xor m verifies against the unchanged signature.
/// g(x) = x^j with the smallest j that keeps deg(m) below b_M, which the
/// trailing-1 padding requires; j = 0 whenever b_M > deg(p_a).
pub fn attack_lemma3(
    pair: &DocSigPair,
    p_a: &Gf2Poly,
    b_m: u64,
) -> Result<DocSigPair, AdversaryError> {
    let d = p_a.degree().unwrap_or(0);
    if pair.doc.len() as u64 != b_m || b_m < d as u64 + 1 {
        return Err(AdversaryError::DocumentTooShort);
    }
    let shift = (0..).find(|j| d + j <= pair.doc.len() - 1).expect("j = 0 works");
    let m_poly = p_a.mul(&Gf2Poly::monomial(shift));
    let mut mask = BitString::zeros(pair.doc.len());
    for (i, b) in m_poly.coeffs().iter().enumerate() {
        if b {
            mask.set(i, true);
        }
    }
    Ok(DocSigPair {
        doc: pair.doc.xor(&mask),
        sig: pair.sig.clone(),
    })
}

/// Forgery rate of a key-blind Protocol 1 adversary: guess (m, t) pairs
/// uniformly and test t = T_{p,s} m against a hidden fresh key per trial.
/// Compared against the bound b_M 2^(1-b_H).
pub fn mc_forgery_p1(
    b_h: usize,
    b_m: u64,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, AdversaryError> {
    if !(1..=12).contains(&b_h) {
        return Err(AdversaryError::BadParams(
            "b_H must be in 1..=12 to keep enumeration tractable".into(),
        ));
    }
    if b_m == 0 {
        return Err(AdversaryError::BadParams("b_M must be >= 1".into()));
    }
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    let irreducibles = enumerate_irreducibles(b_h);
    let mut rng = RandomSource::from_seed(seed);
    let mut successes = 0u64;
    for _ in 0..trials {
        let p = &irreducibles[rng.below(irreducibles.len() as u64) as usize];
        let s0 = rng.nonzero_bits(b_h);
        let m = rng.nonzero_bits(b_m as usize);
        let t = rng.bits(b_h);
        if toeplitz_hash(p, &s0, &m) == t {
            successes += 1;
        }
    }
    let bound = (b_m as f64 * (1.0 - b_h as f64).exp2()).min(1.0);
    Ok(AttackOutcome::from_counts(successes, trials, bound))
}

/// Repudiation rate of a dishonest Protocol 2 sender who plants
/// e_max + 1 corrupted signatures among Charlie's n slots, hoping they all
/// miss the random half Bob cross-checks. Compared against the
/// hypergeometric product bound.
pub fn mc_repudiation_p2(
    n: u64,
    e_max: u64,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, AdversaryError> {
    if n < 2 || n % 2 != 0 {
        return Err(AdversaryError::BadParams("n must be even and >= 2".into()));
    }
    if e_max + 1 > n / 2 {
        return Err(AdversaryError::BadParams("requires e_max + 1 <= n/2".into()));
    }
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    let mut rng = RandomSource::from_seed(seed);
    let mut successes = 0u64;
    let mut slots: Vec<u64> = (0..n).collect();
    for _ in 0..trials {
        // errors: random (e_max+1)-subset; Bob checks a random half
        rng.shuffle(&mut slots);
        let errors: std::collections::BTreeSet<u64> =
            slots[..(e_max + 1) as usize].iter().copied().collect();
        rng.shuffle(&mut slots);
        let hit = slots[..(n / 2) as usize].iter().any(|s| errors.contains(s));
        if !hit {
            successes += 1;
        }
    }
    let bound = p2_repudiation_product(n, e_max);
    Ok(AttackOutcome::from_counts(successes, trials, bound))
}

fn check_p3_attack_params(
    n_parties: u64,
    k: u64,
    b_h: u64,
    omega: u64,
) -> Result<(), AdversaryError> {
    if n_parties < 2 {
        return Err(AdversaryError::BadParams("need at least 2 receivers".into()));
    }
    if omega == 0 || 2 * omega >= n_parties + 1 {
        return Err(AdversaryError::BadParams(
            "omega must satisfy 1 <= omega < (N+1)/2; a coalition must exist".into(),
        ));
    }
    if k == 0 || k > 64 || b_h > 8 {
        return Err(AdversaryError::BadParams(
            "keep parameters small: 1 <= k <= 64 and b_H <= 8".into(),
        ));
    }
    Ok(())
}

/// The tripartite benchmark scenario fixes the level ladder at l_max = 1.
const ATTACK_L_MAX: u64 = 1;

fn sample_block_mismatches(rng: &mut RandomSource, k: u64, tag_guess_prob: f64) -> u64 {
    let mut mism = 0;
    for _ in 0..k {
        if !rng.bernoulli(tag_guess_prob) {
            mism += 1;
        }
    }
    mism
}

/// Forgery rate of a coalition of omega receivers against Protocol 3:
/// blocks the coalition sourced verify by construction, unknown tags are
/// guessed at the ASU bound, and success means some honest receiver
/// verifies the forged pair at level 0. Compared against
/// (N - omega) Xi(floor(N/2), N - omega, p_t).
pub fn mc_forgery_p3(
    n_parties: u64,
    k: u64,
    b_h: u64,
    omega: u64,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, AdversaryError> {
    check_p3_attack_params(n_parties, k, b_h, omega)?;
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    let th = Thresholds::new(ATTACK_L_MAX);
    let q = (1.0 - b_h as f64).exp2();
    let mut rng = RandomSource::from_seed(seed);
    let mut successes = 0u64;
    for _ in 0..trials {
        let mut any = false;
        for _target in 0..(n_parties - omega) {
            // omega coalition-sourced blocks pass for free
            let mut passed = omega;
            for _source in 0..(n_parties - omega) {
                let mism = sample_block_mismatches(&mut rng, k, q);
                if th.test_passes(mism, k, 0) {
                    passed += 1;
                }
            }
            if th.quorum_passes(passed, n_parties, 0, omega) {
                any = true;
            }
        }
        if any {
            successes += 1;
        }
    }
    let bound = p3_forgery_bound(n_parties, k, b_h, omega, ATTACK_L_MAX);
    Ok(AttackOutcome::from_counts(successes, trials, bound))
}

/// Success rate of forging via the majority-vote dispute method: the
/// coalition claims a level-0 verification and wins if at least
/// floor(N/2)+1 receivers (its own omega members plus honest receivers
/// re-verifying at level -1) validate the pair.
pub fn attack_dispute_p3(
    n_parties: u64,
    k: u64,
    b_h: u64,
    omega: u64,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, AdversaryError> {
    check_p3_attack_params(n_parties, k, b_h, omega)?;
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    let th = Thresholds::new(ATTACK_L_MAX);
    let q = (1.0 - b_h as f64).exp2();
    let mut rng = RandomSource::from_seed(seed);
    let mut successes = 0u64;
    for _ in 0..trials {
        let mut votes = omega; // coalition members vote Valid
        for _honest in 0..(n_parties - omega) {
            let mut passed = omega;
            for _source in 0..(n_parties - omega) {
                let mism = sample_block_mismatches(&mut rng, k, q);
                if th.test_passes(mism, k, -1) {
                    passed += 1;
                }
            }
            if th.quorum_passes(passed, n_parties, -1, omega) {
                votes += 1;
            }
        }
        if votes >= n_parties / 2 + 1 {
            successes += 1;
        }
    }
    let bound = p3_attack_bound(n_parties, k, b_h, omega, ATTACK_L_MAX);
    Ok(AttackOutcome::from_counts(successes, trials, bound))
}

/// Transferability attack: the dishonest sender corrupts each distributed
/// function independently with probability p_e; the coalition's receivers
/// steer their blocks. Success means one honest target verifies at level
/// l = 1 while the other fails at level 0, measured over the random
/// partitions. Compared against eps_ij of the transferability lemma.
pub fn attack_transferability_p3(
    n_parties: u64,
    k: u64,
    omega: u64,
    p_e: f64,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, AdversaryError> {
    check_p3_attack_params(n_parties, k, 2, omega)?;
    if !(0.0..=1.0).contains(&p_e) {
        return Err(AdversaryError::BadParams("p_e must be in [0, 1]".into()));
    }
    if n_parties - (omega - 1) < 2 {
        return Err(AdversaryError::BadParams(
            "need two honest receivers as targets".into(),
        ));
    }
    if trials == 0 {
        return Err(AdversaryError::NoTrials);
    }
    let th = Thresholds::new(ATTACK_L_MAX);
    let level = 1i64;
    let honest_receivers = n_parties - (omega - 1);
    let window = (n_parties * k) as usize;
    let mut rng = RandomSource::from_seed(seed);
    let mut flags = vec![false; window];
    let mut successes = 0u64;
    for _ in 0..trials {
        // coalition receivers force T = 1 at the first target and T = 0 at
        // the second; honest sources split their corrupted window randomly
        let mut passed_i = omega - 1;
        let mut passed_j = 0u64;
        for _source in 0..honest_receivers {
            for f in flags.iter_mut() {
                *f = rng.bernoulli(p_e);
            }
            rng.shuffle(&mut flags);
            let mism_i = flags[..k as usize].iter().filter(|&&f| f).count() as u64;
            let mism_j = flags[k as usize..2 * k as usize]
                .iter()
                .filter(|&&f| f)
                .count() as u64;
            if th.test_passes(mism_i, k, level) {
                passed_i += 1;
            }
            if th.test_passes(mism_j, k, level - 1) {
                passed_j += 1;
            }
        }
        let ver_i = th.quorum_passes(passed_i, n_parties, level, omega);
        let ver_j = th.quorum_passes(passed_j, n_parties, level - 1, omega);
        if ver_i && !ver_j {
            successes += 1;
        }
    }
    let bound = p3_transfer_bound(n_parties, k, omega, ATTACK_L_MAX);
    Ok(AttackOutcome::from_counts(successes, trials, bound))
}
