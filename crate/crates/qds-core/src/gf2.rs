//! Exact arithmetic over GF(2)[x] and GF(2^w).
//!
//! Polynomials are bit strings of coefficients (index i = coefficient of
//! x^i) kept normalized so that the top stored bit of a nonzero polynomial
//! is its leading 1. Irreducibility uses the deterministic criterion:
//! p of degree d is irreducible iff x^(2^d) = x (mod p) and
//! gcd(x^(2^(d/q)) - x, p) = 1 for every prime q dividing d.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bits::BitString;
use crate::rng::RandomSource;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("division by the zero polynomial")]
    ZeroModulus,
    #[error("irreducibility is undefined for degree-0 inputs")]
    DegreeZero,
    #[error("no irreducible polynomial of degree {degree} found in {attempts} attempts")]
    SampleExhausted { degree: usize, attempts: usize },
    #[error("field elements have different moduli")]
    ModulusMismatch,
    #[error("value has {got} bits, field width is {want}")]
    WidthMismatch { got: usize, want: usize },
    #[error("field width {0} is not supported (1..=63)")]
    UnsupportedWidth(usize),
    #[error("modulus must be irreducible")]
    ReducibleModulus,
}

/// Polynomial over GF(2), normalized (leading coefficient of a nonzero
/// polynomial is 1; the zero polynomial stores no bits).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Gf2Poly {
    coeffs: BitString,
}

fn xor_shifted(acc: &mut [u64], src: &[u64], shift: usize) {
    let (words, bits) = (shift / 64, shift % 64);
    if bits == 0 {
        for (j, &w) in src.iter().enumerate() {
            acc[words + j] ^= w;
        }
    } else {
        let mut carry = 0u64;
        for (j, &w) in src.iter().enumerate() {
            acc[words + j] ^= (w << bits) | carry;
            carry = w >> (64 - bits);
        }
        if carry != 0 {
            acc[words + src.len()] ^= carry;
        }
    }
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self {
            coeffs: BitString::new(),
        }
    }

    pub fn one() -> Self {
        Self::from_u64_coeffs(1)
    }

    pub fn x() -> Self {
        Self::from_u64_coeffs(0b10)
    }

    /// x^degree
    pub fn monomial(degree: usize) -> Self {
        let mut coeffs = BitString::zeros(degree + 1);
        coeffs.set(degree, true);
        Self { coeffs }
    }

    /// Coefficients from the low bits of an integer (bit i = coeff of x^i).
    pub fn from_u64_coeffs(c: u64) -> Self {
        Self::from_coeffs(BitString::from_u64(c, 64))
    }

    /// Normalizing constructor from an arbitrary coefficient string.
    pub fn from_coeffs(coeffs: BitString) -> Self {
        match coeffs.highest_one() {
            None => Self::zero(),
            Some(d) => Self {
                coeffs: coeffs.slice(0, d + 1),
            },
        }
    }

    /// The monic polynomial x^degree + low(x), where `low` supplies the
    /// coefficients of x^0..x^(degree-1). This is how a random bit string
    /// of length b_H is read as a degree-b_H candidate polynomial.
    pub fn monic_with_low(degree: usize, low: &BitString) -> Self {
        assert_eq!(low.len(), degree, "need exactly `degree` low coefficients");
        let mut coeffs = BitString::zeros(degree + 1);
        for (i, b) in low.iter().enumerate() {
            if b {
                coeffs.set(i, true);
            }
        }
        coeffs.set(degree, true);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &BitString {
        &self.coeffs
    }

    /// The coefficients of x^0..x^(degree-1), i.e. everything below the
    /// leading term. Inverse of [`Gf2Poly::monic_with_low`].
    pub fn low_coeffs(&self) -> BitString {
        match self.degree() {
            None | Some(0) => BitString::new(),
            Some(d) => self.coeffs.slice(0, d),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    pub fn add(&self, other: &Gf2Poly) -> Gf2Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut words = vec![0u64; n.div_ceil(64)];
        for (j, &w) in self.coeffs.words().iter().enumerate() {
            words[j] ^= w;
        }
        for (j, &w) in other.coeffs.words().iter().enumerate() {
            words[j] ^= w;
        }
        Self::from_coeffs(BitString::from_words(words, n))
    }

    /// Product in GF(2)[x].
    pub fn mul(&self, other: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let (a, b) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let out_len = a.coeffs.len() + b.coeffs.len() - 1;
        let mut acc = vec![0u64; out_len.div_ceil(64) + 1];
        for i in 0..a.coeffs.len() {
            if a.coeffs.get(i) {
                xor_shifted(&mut acc, b.coeffs.words(), i);
            }
        }
        Self::from_coeffs(BitString::from_words(acc, out_len))
    }

    /// Quotient and remainder by `m` (m nonzero).
    pub fn div_rem(&self, m: &Gf2Poly) -> Result<(Gf2Poly, Gf2Poly), Gf2Error> {
        let md = m.degree().ok_or(Gf2Error::ZeroModulus)?;
        let mut rd = match self.degree() {
            None => return Ok((Self::zero(), Self::zero())),
            Some(d) => d,
        };
        if rd < md {
            return Ok((Self::zero(), self.clone()));
        }
        let mut rem = vec![0u64; (rd + 1).div_ceil(64)];
        rem.copy_from_slice(self.coeffs.words());
        let mut quot = BitString::zeros(rd - md + 1);
        loop {
            let shift = rd - md;
            quot.set(shift, true);
            xor_shifted(&mut rem, m.coeffs.words(), shift);
            // locate the new leading term
            match BitString::from_words(rem.clone(), rd + 1).highest_one() {
                Some(d) if d >= md => rd = d,
                Some(d) => {
                    return Ok((
                        Self::from_coeffs(quot),
                        Self::from_coeffs(BitString::from_words(rem, d + 1)),
                    ))
                }
                None => return Ok((Self::from_coeffs(quot), Self::zero())),
            }
        }
    }

    /// Remainder of `self` by `m`.
    pub fn rem(&self, m: &Gf2Poly) -> Result<Gf2Poly, Gf2Error> {
        Ok(self.div_rem(m)?.1)
    }

    pub fn gcd(&self, other: &Gf2Poly) -> Gf2Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b).expect("b is nonzero");
            a = b;
            b = r;
        }
        a
    }

    /// Squaring spreads coefficients: (sum a_i x^i)^2 = sum a_i x^(2i).
    pub fn square(&self) -> Gf2Poly {
        if self.is_zero() {
            return Self::zero();
        }
        let d = self.coeffs.len() - 1;
        let mut sq = BitString::zeros(2 * d + 1);
        for i in 0..self.coeffs.len() {
            if self.coeffs.get(i) {
                sq.set(2 * i, true);
            }
        }
        Self { coeffs: sq }
    }

    /// x^(2^k) mod m, by k modular squarings.
    fn x_pow_pow2_mod(k: usize, m: &Gf2Poly) -> Result<Gf2Poly, Gf2Error> {
        let mut t = Self::x().rem(m)?;
        for _ in 0..k {
            t = t.square().rem(m)?;
        }
        Ok(t)
    }

    /// Deterministic irreducibility test over GF(2); degree must be >= 1.
    pub fn is_irreducible(&self) -> Result<bool, Gf2Error> {
        let d = match self.degree() {
            None | Some(0) => return Err(Gf2Error::DegreeZero),
            Some(d) => d,
        };
        if d == 1 {
            return Ok(true);
        }
        let x = Self::x().rem(self)?;
        // x^(2^d) == x (mod p)
        if Self::x_pow_pow2_mod(d, self)? != x {
            return Ok(false);
        }
        for q in prime_divisors(d) {
            let t = Self::x_pow_pow2_mod(d / q, self)?.add(&x);
            let g = t.gcd(self);
            if g.degree() != Some(0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for i in (0..self.coeffs.len()).rev() {
            if self.coeffs.get(i) {
                if !first {
                    write!(f, "+")?;
                }
                match i {
                    0 => write!(f, "1")?,
                    1 => write!(f, "x")?,
                    _ => write!(f, "x^{i}")?,
                }
                first = false;
            }
        }
        Ok(())
    }
}

fn prime_divisors(mut d: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= d {
        if d % q == 0 {
            out.push(q);
            while d % q == 0 {
                d /= q;
            }
        }
        q += 1;
    }
    if d > 1 {
        out.push(d);
    }
    out
}

/// Uniform monic irreducible polynomial of the given degree, by rejection
/// sampling; consumes `degree` random bits per attempt. Attempts are capped
/// at 64 * degree to keep runs bounded.
pub fn sample_irreducible(degree: usize, rng: &mut RandomSource) -> Result<Gf2Poly, Gf2Error> {
    assert!(degree >= 1, "degree must be >= 1");
    let cap = 64 * degree;
    for _ in 0..cap {
        let low = rng.bits(degree);
        let p = Gf2Poly::monic_with_low(degree, &low);
        if p.is_irreducible()? {
            return Ok(p);
        }
    }
    Err(Gf2Error::SampleExhausted {
        degree,
        attempts: cap,
    })
}

/// All monic irreducible polynomials of the given degree (small degrees
/// only; the scan is 2^degree candidates).
pub fn enumerate_irreducibles(degree: usize) -> Vec<Gf2Poly> {
    assert!((1..=20).contains(&degree), "enumeration supports degree 1..=20");
    let mut out = Vec::new();
    for c in 0..(1u64 << degree) {
        let p = Gf2Poly::monic_with_low(degree, &BitString::from_u64(c, degree));
        if p.is_irreducible().unwrap() {
            out.push(p);
        }
    }
    out
}

/// A fixed binary field GF(2^w) with an irreducible modulus of degree w.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Gf2Field {
    width: usize,
    modulus: Gf2Poly,
    mod_low: u64,
}

impl Gf2Field {
    pub fn new(modulus: Gf2Poly) -> Result<Self, Gf2Error> {
        let width = modulus.degree().ok_or(Gf2Error::ZeroModulus)?;
        if width == 0 {
            return Err(Gf2Error::DegreeZero);
        }
        if width > 63 {
            return Err(Gf2Error::UnsupportedWidth(width));
        }
        if !modulus.is_irreducible()? {
            return Err(Gf2Error::ReducibleModulus);
        }
        let mod_low = modulus.low_coeffs().as_u64();
        Ok(Self {
            width,
            modulus,
            mod_low,
        })
    }

    /// The canonical field of width w: modulus is the irreducible
    /// x^w + c with the smallest low-coefficient value c.
    pub fn canonical(width: usize) -> Result<Self, Gf2Error> {
        if width == 0 || width > 63 {
            return Err(Gf2Error::UnsupportedWidth(width));
        }
        for c in 0..(1u64 << width) {
            let p = Gf2Poly::monic_with_low(width, &BitString::from_u64(c, width));
            if p.is_irreducible()? {
                return Self::new(p);
            }
        }
        unreachable!("an irreducible polynomial exists for every degree")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn modulus(&self) -> &Gf2Poly {
        &self.modulus
    }

    /// Carry-less multiply-and-reduce on packed operands (< 2^width).
    #[inline]
    pub fn mul_u64(&self, a: u64, b: u64) -> u64 {
        let (mut acc, mut shifted, mut b) = (0u64, a, b);
        let top = 1u64 << (self.width - 1);
        while b != 0 {
            if b & 1 == 1 {
                acc ^= shifted;
            }
            b >>= 1;
            let carry = shifted & top != 0;
            shifted <<= 1;
            if carry {
                shifted ^= self.mod_low | (top << 1);
            }
            shifted &= (top << 1) - 1;
        }
        acc
    }

    pub fn element(&self, value: BitString) -> Result<Gf2wElement, Gf2Error> {
        if value.len() != self.width {
            return Err(Gf2Error::WidthMismatch {
                got: value.len(),
                want: self.width,
            });
        }
        Ok(Gf2wElement {
            value,
            modulus: self.modulus.clone(),
        })
    }
}

/// Element of GF(2^w): a value of exactly w bits plus the field modulus.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Gf2wElement {
    value: BitString,
    modulus: Gf2Poly,
}

impl Gf2wElement {
    pub fn value(&self) -> &BitString {
        &self.value
    }

    pub fn modulus(&self) -> &Gf2Poly {
        &self.modulus
    }

    pub fn width(&self) -> usize {
        self.value.len()
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn add(&self, other: &Gf2wElement) -> Result<Gf2wElement, Gf2Error> {
        if self.modulus != other.modulus {
            return Err(Gf2Error::ModulusMismatch);
        }
        Ok(Gf2wElement {
            value: self.value.xor(&other.value),
            modulus: self.modulus.clone(),
        })
    }

    /// (a * b) mod modulus.
    pub fn mul(&self, other: &Gf2wElement) -> Result<Gf2wElement, Gf2Error> {
        if self.modulus != other.modulus {
            return Err(Gf2Error::ModulusMismatch);
        }
        let w = self.width();
        let prod = Gf2Poly::from_coeffs(self.value.clone())
            .mul(&Gf2Poly::from_coeffs(other.value.clone()))
            .rem(&self.modulus)?;
        let mut value = BitString::zeros(w);
        for (i, b) in prod.coeffs().iter().enumerate() {
            if b {
                value.set(i, true);
            }
        }
        Ok(Gf2wElement {
            value,
            modulus: self.modulus.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: u64) -> Gf2Poly {
        Gf2Poly::from_u64_coeffs(c)
    }

    #[test]
    fn mul_matches_hand_examples() {
        // (x+1)(x+1) = x^2+1: squaring keeps only even terms
        assert_eq!(p(0b11).mul(&p(0b11)), p(0b101));
        // (x^2+x+1)(x+1) = x^3+1
        assert_eq!(p(0b111).mul(&p(0b11)), p(0b1001));
        // annihilator
        assert_eq!(p(0b1101).mul(&Gf2Poly::zero()), Gf2Poly::zero());
        // degree adds for nonzero inputs
        let a = p(0b110101);
        let b = p(0b1011);
        assert_eq!(
            a.mul(&b).degree(),
            Some(a.degree().unwrap() + b.degree().unwrap())
        );
    }

    #[test]
    fn rem_matches_long_division() {
        // x^3+1 = (x+1)(x^2+x+1), so remainder is 0
        assert_eq!(p(0b1001).rem(&p(0b111)).unwrap(), Gf2Poly::zero());
        // a mod m = a when deg a < deg m
        assert_eq!(p(0b101).rem(&p(0b11010)).unwrap(), p(0b101));
        // x^4 mod (x^4+x+1) = x+1
        assert_eq!(p(0b10000).rem(&p(0b10011)).unwrap(), p(0b11));
        assert_eq!(p(0b1001).rem(&Gf2Poly::zero()), Err(Gf2Error::ZeroModulus));
    }

    #[test]
    fn div_rem_reconstructs() {
        let a = p(0b1100_1011_0111);
        let m = p(0b1_0011);
        let (q, r) = a.div_rem(&m).unwrap();
        assert_eq!(q.mul(&m).add(&r), a);
        assert!(r.degree().unwrap_or(0) < m.degree().unwrap());
    }

    #[test]
    fn irreducibility_known_cases() {
        assert!(p(0b111).is_irreducible().unwrap()); // x^2+x+1
        assert!(!p(0b101).is_irreducible().unwrap()); // x^2+1 = (x+1)^2
        assert!(p(0b10011).is_irreducible().unwrap()); // x^4+x+1
        assert!(p(0b10).is_irreducible().unwrap()); // x
        assert!(p(0b11).is_irreducible().unwrap()); // x+1
        assert_eq!(p(0b1).is_irreducible(), Err(Gf2Error::DegreeZero));
    }

    /// Trial-division oracle: p (degree d >= 1) is irreducible iff no
    /// polynomial of degree 1..=d/2 divides it.
    fn irreducible_by_trial_division(q: &Gf2Poly) -> bool {
        let d = q.degree().unwrap();
        for deg in 1..=d / 2 {
            for c in 0..(1u64 << deg) {
                let div = Gf2Poly::monic_with_low(deg, &BitString::from_u64(c, deg));
                if q.rem(&div).unwrap().is_zero() {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn irreducibility_agrees_with_trial_division_up_to_degree_12() {
        for d in 1..=12usize {
            for c in 0..(1u64 << d) {
                let q = Gf2Poly::monic_with_low(d, &BitString::from_u64(c, d));
                assert_eq!(
                    q.is_irreducible().unwrap(),
                    irreducible_by_trial_division(&q),
                    "disagreement at {q:?}"
                );
            }
        }
    }

    #[test]
    fn quartic_irreducibles_enumeration() {
        let quartics = enumerate_irreducibles(4);
        let expected = [p(0b10011), p(0b11001), p(0b11111)];
        assert_eq!(quartics.len(), 3);
        for e in &expected {
            assert!(quartics.contains(e));
        }
    }

    #[test]
    fn sampling_degree2_is_the_unique_quadratic() {
        let mut rng = RandomSource::from_seed(11);
        for _ in 0..10 {
            assert_eq!(sample_irreducible(2, &mut rng).unwrap(), p(0b111));
        }
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let a = sample_irreducible(16, &mut RandomSource::from_seed(5)).unwrap();
        let b = sample_irreducible(16, &mut RandomSource::from_seed(5)).unwrap();
        assert_eq!(a, b);
        assert!(a.is_irreducible().unwrap());
        assert_eq!(a.degree(), Some(16));
    }

    #[test]
    fn sampling_degree4_uniform_within_3_sigma() {
        let irr = enumerate_irreducibles(4);
        let mut counts = vec![0u64; irr.len()];
        let mut rng = RandomSource::from_seed(42);
        let draws = 10_000;
        for _ in 0..draws {
            let q = sample_irreducible(4, &mut rng).unwrap();
            counts[irr.iter().position(|r| *r == q).unwrap()] += 1;
        }
        let mean = draws as f64 / irr.len() as f64;
        // multinomial cell std dev
        let sd = (mean * (1.0 - 1.0 / irr.len() as f64)).sqrt();
        for &c in &counts {
            assert!(
                (c as f64 - mean).abs() <= 3.0 * sd,
                "count {c} deviates from {mean} by more than 3 sigma ({sd})"
            );
        }
    }

    #[test]
    fn gf2w_mul_examples() {
        let field = Gf2Field::new(p(0b111)).unwrap(); // GF(4), x^2+x+1
        let x = field.element(BitString::from_u64(0b10, 2)).unwrap();
        let one = field.element(BitString::from_u64(0b01, 2)).unwrap();
        let zero = field.element(BitString::from_u64(0, 2)).unwrap();
        // x*x = x+1 in GF(4)
        assert_eq!(x.mul(&x).unwrap().value().as_u64(), 0b11);
        assert_eq!(x.mul(&one).unwrap(), x);
        assert_eq!(x.mul(&zero).unwrap(), zero);

        let other = Gf2Field::canonical(3).unwrap();
        let y = other.element(BitString::from_u64(0b010, 3)).unwrap();
        assert_eq!(x.mul(&y), Err(Gf2Error::ModulusMismatch));
    }

    #[test]
    fn fast_field_mul_agrees_with_poly_path() {
        let field = Gf2Field::canonical(11).unwrap();
        let mut rng = RandomSource::from_seed(3);
        for _ in 0..500 {
            let a = rng.below(1 << 11);
            let b = rng.below(1 << 11);
            let ea = field.element(BitString::from_u64(a, 11)).unwrap();
            let eb = field.element(BitString::from_u64(b, 11)).unwrap();
            assert_eq!(field.mul_u64(a, b), ea.mul(&eb).unwrap().value().as_u64());
        }
    }

    #[test]
    fn modular_consistency_of_mul_and_rem() {
        let mut rng = RandomSource::from_seed(77);
        let m = sample_irreducible(9, &mut rng).unwrap();
        for _ in 0..200 {
            let a = Gf2Poly::from_coeffs(rng.bits(30));
            let b = Gf2Poly::from_coeffs(rng.bits(30));
            let lhs = a.mul(&b).rem(&m).unwrap();
            let rhs = a.rem(&m).unwrap().mul(&b.rem(&m).unwrap()).rem(&m).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn canonical_field_is_stable() {
        // smallest irreducible of degree 5 is x^5 + x^2 + 1
        assert_eq!(Gf2Field::canonical(5).unwrap().modulus(), &p(0b100101));
    }
}
