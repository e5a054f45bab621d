//! Closed-form security quantities: the binomial tail Xi, the forgery and
//! repudiation bounds of all three protocols, and the preshared-bit /
//! signature-length accounting.
//!
//! Xi(k, n, p) is the probability of at least k successes in n Bernoulli(p)
//! trials. It is evaluated exactly (big rationals) for n <= 64 and in log
//! space otherwise, summing from the largest term outward; the optimizer
//! probes tails near 1e-10 at n around 759, and results down to 1e-300
//! carry a relative error of at most ~1e-9.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::uhash::asu_key_bits;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoundsError {
    #[error("requires b_M > b_H")]
    MessageTooShort,
    #[error("n must be even and >= 2")]
    OddN,
    #[error("requires e_max <= n/2")]
    BadEmax,
    #[error("hypothesis b_M + 4 n b_H > (n/2) log2(n) violated")]
    P2Hypothesis,
    #[error("requires 1 <= omega and 2*omega < N + 1")]
    BadOmega,
    #[error("requires (l_max + 1) * (omega - 1) / N < 1/2")]
    BadLevels,
}

/// Security parameters of one protocol instance, all clamped to [0, 1].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecurityBudget {
    pub eps_for: f64,
    pub eps_rep: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps_transf: Option<f64>,
}

impl SecurityBudget {
    pub fn total(&self) -> f64 {
        self.eps_for + self.eps_rep
    }
}

/// Preshared bits per receiver and signature length for one instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostReport {
    #[serde(rename = "ell_P")]
    pub ell_p: u64,
    #[serde(rename = "ell_S")]
    pub ell_s: u64,
}

// --- Xi ---------------------------------------------------------------------

/// ln(k!) via a cached table for small k and a Stirling series beyond.
fn ln_factorial(k: u64) -> f64 {
    const TABLE_LEN: usize = 1024;
    use std::sync::OnceLock;
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0f64; TABLE_LEN];
        let mut acc = 0f64;
        for i in 1..TABLE_LEN {
            acc += (i as f64).ln();
            t[i] = acc;
        }
        t
    });
    if (k as usize) < TABLE_LEN {
        return table[k as usize];
    }
    let x = k as f64;
    x * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI * x).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

fn ln_binom(n: u64, k: u64) -> f64 {
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Probability of at least `kk` successes in `n` Bernoulli(`p`) trials.
///
/// Preconditions: `kk <= n + 1` and `0 <= p <= 1`; `xi(n + 1, n, p) = 0`.
pub fn xi(kk: u64, n: u64, p: f64) -> f64 {
    assert!(kk <= n + 1, "xi requires kk <= n + 1");
    assert!((0.0..=1.0).contains(&p), "xi requires p in [0, 1]");
    if kk == 0 {
        return 1.0;
    }
    if kk == n + 1 {
        return 0.0;
    }
    if p == 0.0 {
        return 0.0; // kk >= 1
    }
    if p == 1.0 {
        return 1.0; // kk <= n
    }
    if n <= 16 {
        xi_exact(kk, n, p)
    } else {
        xi_log_space(kk, n, p)
    }
}

/// Exact evaluation with big rationals, treating p as the exact rational
/// value of its f64 representation.
fn xi_exact(kk: u64, n: u64, p: f64) -> f64 {
    let pr = BigRational::from_f64(p).expect("p is finite");
    let qr = BigRational::from_integer(BigInt::from(1)) - &pr;
    // first term: C(n, kk) p^kk q^(n-kk)
    let mut binom = BigInt::from(1);
    for i in 0..kk {
        binom = binom * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    let mut term = BigRational::from_integer(binom);
    for _ in 0..kk {
        term *= &pr;
    }
    for _ in 0..(n - kk) {
        term *= &qr;
    }
    let mut sum = BigRational::zero();
    let mut j = kk;
    loop {
        sum += &term;
        if j == n {
            break;
        }
        // T_{j+1} = T_j * (n - j)/(j + 1) * p/q
        term = term * BigRational::from_integer(BigInt::from(n - j))
            / BigRational::from_integer(BigInt::from(j + 1))
            * &pr
            / &qr;
        j += 1;
    }
    sum.to_f64().expect("sum is finite")
}

/// Log-space evaluation, summing term ratios outward from the largest term.
fn xi_log_space(kk: u64, n: u64, p: f64) -> f64 {
    let ln_p = p.ln();
    let ln_q = (-p).ln_1p();
    // the largest term in [kk, n] sits at the mode (or at kk if beyond it)
    let mode = (((n + 1) as f64) * p).floor() as u64;
    let j0 = mode.clamp(kk, n);
    let ln_t0 = ln_binom(n, j0) + j0 as f64 * ln_p + (n - j0) as f64 * ln_q;
    let up_ratio = p / (1.0 - p);
    let mut acc = 1.0f64;
    // upward from j0
    let mut r = 1.0f64;
    let mut j = j0;
    while j < n {
        r *= (n - j) as f64 / (j + 1) as f64 * up_ratio;
        acc += r;
        if r < acc * 1e-18 {
            break;
        }
        j += 1;
    }
    // downward from j0 to kk
    r = 1.0;
    j = j0;
    while j > kk {
        r *= j as f64 / (n - j + 1) as f64 / up_ratio;
        acc += r;
        if r < acc * 1e-18 {
            break;
        }
        j -= 1;
    }
    (ln_t0 + acc.ln()).exp()
}

fn clamp01(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

fn pow2(e: f64) -> f64 {
    e.exp2()
}

// --- per-protocol bounds ----------------------------------------------------

/// Protocol 1: eps_for = b_M 2^(1-b_H);
/// eps_rep = max{(2 b_H + b_M) 2^(1-b'_H), 3 b_H 2^(1-b'_H)}, which under
/// b_M > b_H collapses to the first branch.
pub fn eps_p1(b_m: u64, b_h: u64, b_hp: u64) -> Result<SecurityBudget, BoundsError> {
    if b_m <= b_h {
        return Err(BoundsError::MessageTooShort);
    }
    let eps_for = b_m as f64 * pow2(1.0 - b_h as f64);
    let exchange = (2 * b_h + b_m) as f64 * pow2(1.0 - b_hp as f64);
    let key_msg = 3.0 * b_h as f64 * pow2(1.0 - b_hp as f64);
    Ok(SecurityBudget {
        eps_for: clamp01(eps_for),
        eps_rep: clamp01(exchange.max(key_msg)),
        eps_transf: None,
    })
}

/// The hypergeometric branch of Protocol 2 repudiation:
/// prod_{i=0}^{e_max} (n/2 - i)/(n - i).
pub fn p2_repudiation_product(n: u64, e_max: u64) -> f64 {
    let mut prod = 1.0f64;
    for i in 0..=e_max {
        if n / 2 <= i {
            return 0.0;
        }
        prod *= (n / 2 - i) as f64 / (n - i) as f64;
    }
    prod
}

/// Protocol 2: eps_for = Xi(n/2 - e_max, n/2, b_M 2^(1-b_H));
/// eps_rep = max{hypergeometric product, (b_M + 4 n b_H) 2^(1-b'_H)}.
pub fn eps_p2(
    b_m: u64,
    n: u64,
    b_h: u64,
    b_hp: u64,
    e_max: u64,
) -> Result<SecurityBudget, BoundsError> {
    if n < 2 || n % 2 != 0 {
        return Err(BoundsError::OddN);
    }
    if e_max > n / 2 {
        return Err(BoundsError::BadEmax);
    }
    if ((b_m + 4 * n * b_h) as f64) <= (n as f64 / 2.0) * (n as f64).log2() {
        return Err(BoundsError::P2Hypothesis);
    }
    let p_guess = clamp01(b_m as f64 * pow2(1.0 - b_h as f64));
    let eps_for = xi(n / 2 - e_max, n / 2, p_guess);
    let auth = (b_m + 4 * n * b_h) as f64 * pow2(1.0 - b_hp as f64);
    Ok(SecurityBudget {
        eps_for: clamp01(eps_for),
        eps_rep: clamp01(p2_repudiation_product(n, e_max).max(auth)),
        eps_transf: None,
    })
}

/// All Protocol 3 quantities for one parameter point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct P3Bounds {
    pub eps_for: f64,
    pub eps_rep: f64,
    pub eps_transf: f64,
    /// probability that a single honest-source test passes at level 0
    pub p_t: f64,
    /// probability that one honest receiver verifies a forged pair at level -1
    pub p_minus1: f64,
    /// success probability of the forgery-via-majority-vote attack
    pub p_attack: f64,
    pub eps_ij: f64,
    pub eps_auth: f64,
    pub eps_hyb: f64,
    /// ASU key-length bound y-bar used in the accounting
    pub y_bits: u64,
}

impl P3Bounds {
    pub fn budget(&self) -> SecurityBudget {
        SecurityBudget {
            eps_for: self.eps_for,
            eps_rep: self.eps_rep,
            eps_transf: Some(self.eps_transf),
        }
    }
}

fn check_p3_params(n_parties: u64, omega: u64, l_max: u64) -> Result<(), BoundsError> {
    if omega == 0 || 2 * omega >= n_parties + 1 {
        return Err(BoundsError::BadOmega);
    }
    if 2 * (l_max + 1) * (omega - 1) >= n_parties {
        return Err(BoundsError::BadLevels);
    }
    Ok(())
}

/// Per-test pass probability p_t = Xi(floor(k (1 - s_0)) + 1, k, 2^(1-b_H))
/// with the bound-side spacing 1 - s_0 = (l_max + 2) / (2 (l_max + 1)).
pub fn p3_test_pass_prob(k: u64, b_h: u64, l_max: u64) -> f64 {
    let guessed = k * (l_max + 2) / (2 * (l_max + 1));
    if guessed + 1 > k {
        0.0
    } else {
        xi(guessed + 1, k, clamp01(pow2(1.0 - b_h as f64)))
    }
}

/// Protocol 3 forgery bound (N - omega) Xi(floor(N/2), N - omega, p_t).
pub fn p3_forgery_bound(n_parties: u64, k: u64, b_h: u64, omega: u64, l_max: u64) -> f64 {
    let p_t = p3_test_pass_prob(k, b_h, l_max);
    clamp01((n_parties - omega) as f64 * xi(n_parties / 2, n_parties - omega, p_t))
}

/// Success bound of forgery via the majority-vote dispute method.
pub fn p3_attack_bound(n_parties: u64, k: u64, b_h: u64, omega: u64, l_max: u64) -> f64 {
    let p_t = p3_test_pass_prob(k, b_h, l_max);
    let need = (n_parties / 2 + 1).saturating_sub(omega);
    let p_minus1 = xi(need, n_parties - omega, p_t);
    xi(need, n_parties - omega, p_minus1)
}

/// Transferability bound for attacks through invalid hash functions:
/// eps_ij = N (1 - d_R) exp(-k / (8 (l_max+1)^2)).
pub fn p3_transfer_bound(n_parties: u64, k: u64, omega: u64, l_max: u64) -> f64 {
    let honest = n_parties - omega + 1;
    honest as f64 * (-(k as f64) / (8.0 * ((l_max + 1) as f64).powi(2))).exp()
}

/// Protocol 3 closed forms. The bound-side threshold convention is the
/// maximal equal spacing Delta-s = 1/(2(l_max+1)), so s_0 = 1/2 - Delta-s
/// and the level-0 test tolerates fewer than k s_0 mismatches.
pub fn eps_p3(
    b_m: u64,
    n_parties: u64,
    k: u64,
    b_h: u64,
    b_hp: u64,
    omega: u64,
    l_max: u64,
) -> Result<P3Bounds, BoundsError> {
    if b_m <= b_h {
        return Err(BoundsError::MessageTooShort);
    }
    check_p3_params(n_parties, omega, l_max)?;
    let n = n_parties;
    let honest = n - omega + 1; // N (1 - d_R)
    let y = asu_key_bits(b_m, b_h);

    let p_t = p3_test_pass_prob(k, b_h, l_max);
    let eps_for = p3_forgery_bound(n, k, b_h, omega, l_max);

    let p_minus1 = xi((n / 2 + 1).saturating_sub(omega), n - omega, p_t);
    let p_attack = p3_attack_bound(n, k, b_h, omega, l_max);

    let decay = (-(k as f64) / (8.0 * ((l_max + 1) as f64).powi(2))).exp();
    let eps_ij = p3_transfer_bound(n, k, omega, l_max);
    let msg_bits = k as f64 * y as f64 + k as f64 * ((n * k) as f64).log2();
    let auth_base = msg_bits * pow2(1.0 - b_hp as f64);
    // exponent N [1/2 - (l_max + 1) d_R] = N/2 - (l_max + 1)(omega - 1)
    let exponent = n as f64 / 2.0 - ((l_max + 1) * (omega - 1)) as f64;
    let eps_auth = auth_base.powf(exponent);
    let eps_hyb = auth_base * xi(n / 2 + 1, honest, decay);

    let pairs = (honest * (honest - 1) / 2) as f64;
    let eps_rep = clamp01(pairs * eps_ij.max(eps_auth).max(eps_hyb));
    Ok(P3Bounds {
        eps_for,
        eps_rep,
        eps_transf: eps_rep,
        p_t,
        p_minus1,
        p_attack,
        eps_ij,
        eps_auth,
        eps_hyb,
        y_bits: y,
    })
}

// --- cost accounting ---------------------------------------------------------

pub fn ceil_log2(n: u64) -> u64 {
    assert!(n >= 1);
    64 - (n - 1).leading_zeros() as u64
}

/// Protocol 1: l_P = 3 b_H + 5 b'_H, l_S = 2 b_H.
pub fn cost_p1(b_h: u64, b_hp: u64) -> CostReport {
    CostReport {
        ell_p: 3 * b_h + 5 * b_hp,
        ell_s: 2 * b_h,
    }
}

/// Protocol 2: l_P = 6 n b_H + n ceil(log2 n) + 7 b'_H, l_S = 4 n b_H.
pub fn cost_p2(n: u64, b_h: u64, b_hp: u64) -> CostReport {
    CostReport {
        ell_p: 6 * n * b_h + n * ceil_log2(n) + 7 * b_hp,
        ell_s: 4 * n * b_h,
    }
}

/// Protocol 3 at N = 2: l_P = 3 k y + k ceil(log2(2k)) + 7 b'_H,
/// l_S = 4 k b_H, with y the ASU key-length bound for (b_M, b_H).
pub fn cost_p3_n2(k: u64, b_h: u64, b_hp: u64, b_m: u64) -> CostReport {
    let y = asu_key_bits(b_m, b_h);
    CostReport {
        ell_p: 3 * k * y + k * ceil_log2(2 * k) + 7 * b_hp,
        ell_s: 4 * k * b_h,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_rel(actual: f64, expect: f64, tol: f64) {
        let err = if expect == 0.0 {
            actual.abs()
        } else {
            (actual - expect).abs() / expect.abs()
        };
        assert!(
            err <= tol,
            "actual {actual:e}, expect {expect:e}, rel err {err:e} > {tol:e}"
        );
    }

    #[test]
    fn xi_trivial_values() {
        assert_eq!(xi(0, 5, 0.3), 1.0);
        assert_rel(xi(3, 3, 0.1), 1e-3, 1e-12);
        assert_eq!(xi(1, 2, 0.5), 0.75);
        assert_eq!(xi(6, 5, 0.9), 0.0);
        assert_eq!(xi(3, 7, 0.0), 0.0);
        assert_eq!(xi(3, 7, 1.0), 1.0);
    }

    /// Independent oracle: exact big-rational enumeration of the tail.
    fn xi_oracle(kk: u64, n: u64, p: f64) -> f64 {
        let pr = BigRational::from_f64(p).unwrap();
        let one = BigRational::from_integer(BigInt::from(1));
        let qr = &one - &pr;
        let mut sum = BigRational::zero();
        for j in kk..=n {
            let mut c = BigInt::from(1);
            for i in 0..j {
                c = c * BigInt::from(n - i) / BigInt::from(i + 1);
            }
            let mut t = BigRational::from_integer(c);
            for _ in 0..j {
                t *= &pr;
            }
            for _ in 0..(n - j) {
                t *= &qr;
            }
            sum += t;
        }
        sum.to_f64().unwrap()
    }

    #[test]
    fn xi_matches_exact_enumeration_smallish_n() {
        for n in 1..=12u64 {
            for kk in 0..=n + 1 {
                for p in [0.1, 0.5, 2f64.powi(-9)] {
                    assert_rel(xi(kk, n, p), xi_oracle(kk, n, p), 1e-12);
                }
            }
        }
    }

    #[test]
    fn log_space_path_agrees_with_exact_path() {
        for n in [10u64, 33, 64] {
            for kk in [0u64, 1, n / 3, n / 2, (3 * n) / 4, n] {
                for p in [1e-6, 0.01, 0.3, 0.5, 0.77, 0.999] {
                    let exact = xi_exact(kk.max(1), n, p);
                    let logd = xi_log_space(kk.max(1), n, p);
                    if exact > 1e-300 {
                        assert_rel(logd, exact, 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn xi_monotone() {
        for n in [9u64, 40, 200] {
            let mut prev = 1.0;
            for kk in 0..=n + 1 {
                let v = xi(kk, n, 0.37);
                assert!(v <= prev + 1e-15, "xi must be nonincreasing in kk");
                prev = v;
            }
            let mut prevp = 0.0;
            for i in 0..=20 {
                let v = xi(n / 2, n, i as f64 / 20.0);
                assert!(v >= prevp - 1e-12, "xi must be nondecreasing in p");
                prevp = v;
            }
        }
    }

    #[test]
    fn xi_handles_deep_tails() {
        // Xi(570, 759, 1/2) is around 1e-42; Chernoff gives e^{-95.5} scale
        let v = xi(570, 759, 0.5);
        assert!(v > 0.0 && v < 1e-30, "got {v:e}");
        // huge n exercises the Stirling branch
        let w = xi(510_000, 1_000_000, 0.5);
        assert!(w > 0.0 && w < 1e-80, "got {w:e}");
    }

    #[test]
    fn eps_p1_examples() {
        let b = eps_p1(1 << 20, 30, 40).unwrap();
        assert_rel(b.eps_for, 2f64.powi(-9), 1e-12);
        // feasibility witness used by the optimizer
        let b = eps_p1(1_000_000, 56, 55).unwrap();
        assert!(b.total() <= 1e-10, "total {:e}", b.total());
        assert_rel(b.total(), 8.33e-11, 0.01);
        // eps_rep halves per unit of b'_H
        let lo = eps_p1(1_000_000, 56, 50).unwrap().eps_rep;
        let hi = eps_p1(1_000_000, 56, 51).unwrap().eps_rep;
        assert_rel(lo / hi, 2.0, 1e-12);
        assert_eq!(eps_p1(8, 8, 10), Err(BoundsError::MessageTooShort));
    }

    #[test]
    fn eps_p2_examples() {
        // n=4, e_max=0, huge b'_H: single product factor (2/4) = 1/2
        let b = eps_p2(1000, 4, 40, 500, 0).unwrap();
        assert_rel(b.eps_rep, 0.5, 1e-12);
        // n=8, e_max=1: (4/8)(3/7) = 3/14
        let b = eps_p2(1000, 8, 40, 500, 1).unwrap();
        assert_rel(b.eps_rep, 3.0 / 14.0, 1e-12);
        // e_max = n/2 makes forgery free: Xi(0, ., .) = 1
        let b = eps_p2(1000, 8, 40, 500, 4).unwrap();
        assert_eq!(b.eps_for, 1.0);
        assert_eq!(eps_p2(1000, 7, 40, 500, 0), Err(BoundsError::OddN));
    }

    #[test]
    fn eps_p3_matches_table_2_printed_forms_at_n2() {
        // term-by-term equality with the N=2 row for 100 parameter tuples
        let mut trial = 0u64;
        let mut rng = crate::rng::RandomSource::from_seed(123);
        while trial < 100 {
            let k = 8 + rng.below(512);
            let b_h = 2 + rng.below(7);
            let b_hp = 20 + rng.below(60);
            let b_m = 100 + rng.below(1 << 24);
            if b_m <= b_h {
                continue;
            }
            trial += 1;
            let b = eps_p3(b_m, 2, k, b_h, b_hp, 1, 1).unwrap();
            let y = asu_key_bits(b_m, b_h);
            let expect_for = xi(3 * k / 4 + 1, k, 2f64.powf(1.0 - b_h as f64));
            assert_rel(b.eps_for, expect_for, 1e-12);
            let auth =
                (k as f64 * y as f64 + k as f64 * (2.0 * k as f64).log2()) * 2f64.powf(1.0 - b_hp as f64);
            let expect_rep = (2.0 * (-(k as f64) / 32.0).exp()).max(auth).min(1.0);
            // eps_hyb never dominates at N=2: it is eps_auth * Xi(2,2,decay)
            assert_rel(b.eps_rep, expect_rep, 1e-9);
        }
    }

    #[test]
    fn p_attack_equals_eps_for_at_n2() {
        for k in [16u64, 64, 759, 1024] {
            for b_h in [2u64, 3, 5] {
                let b = eps_p3(1_000_000, 2, k, b_h, 50, 1, 1).unwrap();
                assert_eq!(b.p_attack, b.eps_for, "k={k} b_h={b_h}");
                assert_eq!(b.p_minus1, b.p_t);
            }
        }
    }

    #[test]
    fn eps_p3_forgery_vanishes_with_k() {
        let small = eps_p3(1000, 2, 64, 2, 50, 1, 1).unwrap().eps_for;
        let large = eps_p3(1000, 2, 1024, 2, 50, 1, 1).unwrap().eps_for;
        assert!(large < small);
        assert!(large < 1e-30);
    }

    #[test]
    fn eps_p3_preconditions() {
        assert_eq!(
            eps_p3(1000, 2, 64, 2, 50, 2, 1),
            Err(BoundsError::BadOmega)
        );
        assert_eq!(
            eps_p3(1000, 5, 64, 2, 50, 2, 3),
            Err(BoundsError::BadLevels)
        );
    }

    #[test]
    fn cost_examples() {
        assert_eq!(
            cost_p1(56, 55),
            CostReport {
                ell_p: 443,
                ell_s: 112
            }
        );
        let c = cost_p3_n2(759, 2, 50, 1_000_000);
        // 3*759*44 + 759*11 + 7*50
        assert_eq!(c.ell_p, 100_188 + 8349 + 350);
        assert!((c.ell_p as f64 - 1.1e5).abs() / 1.1e5 < 0.06);
        assert_eq!(c.ell_s, 6072);
        // cost_p2 is linear in n at fixed hash lengths
        let a = cost_p2(8, 10, 20);
        let b = cost_p2(16, 10, 20);
        assert_eq!(b.ell_s, 2 * a.ell_s);
        assert_eq!(a.ell_p, 6 * 8 * 10 + 8 * 3 + 7 * 20);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(9), 4);
        assert_eq!(ceil_log2(1518), 11);
    }
}
