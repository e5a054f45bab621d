//! Property tests for the serialization and hashing invariants.

use proptest::prelude::*;

use qds_core::bits::BitString;
use qds_core::gf2::Gf2Poly;
use qds_core::rng::RandomSource;
use qds_core::secbounds::xi;
use qds_core::uhash::{axu_hash, axu_hash_naive, toeplitz_hash, LfsrToeplitzKey};

fn bitstring_strategy(max_len: usize) -> impl Strategy<Value = BitString> {
    prop::collection::vec(any::<bool>(), 0..max_len).prop_map(BitString::from_bits)
}

proptest! {
    /// Hex serialization round-trips bit-exactly for any length.
    #[test]
    fn hex_roundtrip(bits in bitstring_strategy(400)) {
        let text = bits.to_string();
        let back: BitString = text.parse().unwrap();
        prop_assert_eq!(back, bits);
    }

    /// The streaming hash agrees with the explicit Toeplitz product on
    /// arbitrary keys and messages.
    #[test]
    fn streaming_equals_naive(seed in any::<u64>(), len in 1usize..600, b_h in 2usize..18) {
        let mut rng = RandomSource::from_seed(seed);
        let key = LfsrToeplitzKey::generate(b_h, &mut rng).unwrap();
        let m = rng.bits(len);
        prop_assert_eq!(axu_hash(&key, &m).unwrap(), axu_hash_naive(&key, &m).unwrap());
    }

    /// Hashing is linear in the message for every fixed key.
    #[test]
    fn hash_linearity(seed in any::<u64>(), len in 1usize..300) {
        let mut rng = RandomSource::from_seed(seed);
        let key = LfsrToeplitzKey::generate(8, &mut rng).unwrap();
        let (m1, m2) = (rng.bits(len), rng.bits(len));
        let lhs = axu_hash(&key, &m1.xor(&m2)).unwrap();
        let rhs = axu_hash(&key, &m1).unwrap().xor(&axu_hash(&key, &m2).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    /// Multiplying then reducing matches reducing then multiplying.
    #[test]
    fn modular_mul_consistency(a in 0u64.., b in 0u64.., m in 1u64..) {
        let a = Gf2Poly::from_u64_coeffs(a);
        let b = Gf2Poly::from_u64_coeffs(b);
        let m = Gf2Poly::from_u64_coeffs(m);
        let lhs = a.mul(&b).rem(&m).unwrap();
        let rhs = a.rem(&m).unwrap().mul(&b.rem(&m).unwrap()).rem(&m).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    /// A message annihilated by the connection polynomial hashes to zero:
    /// the algebra behind the known-polynomial forgery.
    #[test]
    fn multiples_of_taps_hash_to_zero(seed in any::<u64>(), g in 1u64..) {
        let mut rng = RandomSource::from_seed(seed);
        let key = LfsrToeplitzKey::generate(10, &mut rng).unwrap();
        let m_poly = key.p().mul(&Gf2Poly::from_u64_coeffs(g));
        let mut m = BitString::zeros(m_poly.degree().unwrap() + 8);
        for (i, bit) in m_poly.coeffs().iter().enumerate() {
            if bit {
                m.set(i, true);
            }
        }
        prop_assert!(toeplitz_hash(key.p(), key.s0(), &m).is_zero());
    }

    /// Tail probabilities are monotone in both arguments.
    #[test]
    fn xi_monotonicity(n in 1u64..120, p in 0.0f64..1.0) {
        let mut prev = 1.0f64;
        for kk in 0..=n + 1 {
            let v = xi(kk, n, p);
            prop_assert!(v <= prev + 1e-12);
            prev = v;
        }
    }
}
