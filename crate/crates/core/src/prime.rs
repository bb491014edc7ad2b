//! Probable-prime testing and generation.
//!
//! Miller-Rabin with random bases drawn from a [`RandomSource`], preceded by
//! trial division against a table of small primes. With a seeded source the
//! whole procedure is deterministic, which keeps parameter-generation tests
//! reproducible.

use std::sync::LazyLock;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::rng::RandomSource;
use crate::{Error, Result};

/// Miller-Rabin round count used throughout the crate.
pub const MR_ROUNDS: u32 = 64;

static SMALL_PRIMES: LazyLock<Vec<u64>> = LazyLock::new(|| {
    let limit = 2048usize;
    let mut sieve = vec![true; limit];
    let mut primes = Vec::new();
    for n in 2..limit {
        if sieve[n] {
            primes.push(n as u64);
            for m in (n * n..limit).step_by(n) {
                sieve[m] = false;
            }
        }
    }
    primes
});

/// Miller-Rabin with `rounds` random bases. Composite inputs survive with
/// probability at most 4^-rounds.
pub fn miller_rabin(n: &BigUint, rounds: u32, src: &mut RandomSource) -> Result<bool> {
    let two = BigUint::from(2u8);
    if n < &two {
        return Ok(false);
    }
    if n == &two || n == &BigUint::from(3u8) {
        return Ok(true);
    }
    if (n % 2u8).is_zero() {
        return Ok(false);
    }

    let n_minus_1 = n - 1u8;
    let s = n_minus_1.trailing_zeros().expect("n-1 is nonzero");
    let d = &n_minus_1 >> s;

    'base: for _ in 0..rounds {
        let base = random_below(&(n - 3u8), src)? + &two; // uniform in [2, n-2]
        let mut x = base.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'base;
            }
        }
        return Ok(false);
    }
    Ok(true)
}

/// Trial division plus Miller-Rabin.
pub fn is_probable_prime(n: &BigUint, rounds: u32, src: &mut RandomSource) -> Result<bool> {
    for &p in SMALL_PRIMES.iter() {
        let p_big = BigUint::from(p);
        if n == &p_big {
            return Ok(true);
        }
        if (n % p_big).is_zero() {
            return Ok(false);
        }
    }
    miller_rabin(n, rounds, src)
}

/// A probable prime of exactly `bits` bits (top and bottom bits forced).
pub fn random_prime_exact_bits(bits: u64, src: &mut RandomSource) -> Result<BigUint> {
    assert!(bits >= 2, "need at least two bits for a prime");
    let max_attempts = 64 * bits;
    for _ in 0..max_attempts {
        let mut candidate = random_bits(bits, src)?;
        candidate.set_bit(bits - 1, true);
        candidate.set_bit(0, true);
        if is_probable_prime(&candidate, MR_ROUNDS, src)? {
            return Ok(candidate);
        }
    }
    Err(Error::GenerationExceeded(max_attempts))
}

/// Uniform integer with at most `bits` bits.
pub fn random_bits(bits: u64, src: &mut RandomSource) -> Result<BigUint> {
    let byte_len = bits.div_ceil(8) as usize;
    let mut bytes = src.next_bytes(byte_len)?;
    let excess = (8 * byte_len as u64 - bits) as u32;
    if excess > 0 {
        bytes[0] &= 0xffu8 >> excess;
    }
    Ok(BigUint::from_bytes_be(&bytes))
}

/// Uniform integer in `[0, bound)` by rejection sampling.
pub fn random_below(bound: &BigUint, src: &mut RandomSource) -> Result<BigUint> {
    assert!(!bound.is_zero());
    let bits = bound.bits();
    loop {
        let candidate = random_bits(bits, src)?;
        if &candidate < bound {
            return Ok(candidate);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seed_from_u64;

    fn src() -> RandomSource {
        RandomSource::seeded(seed_from_u64(99))
    }

    #[test]
    fn small_cases() {
        let mut s = src();
        for (n, expect) in [
            (0u64, false),
            (1, false),
            (2, true),
            (3, true),
            (4, false),
            (11, true),
            (23, true),
            (221, false), // 13 * 17
            (7919, true),
        ] {
            assert_eq!(
                is_probable_prime(&BigUint::from(n), MR_ROUNDS, &mut s).unwrap(),
                expect,
                "n = {n}"
            );
        }
    }

    #[test]
    fn known_large_prime_and_composite() {
        let mut s = src();
        // 2^224 - 63, the largest 224-bit prime.
        let p = (BigUint::one() << 224u32) - 63u8;
        assert!(is_probable_prime(&p, MR_ROUNDS, &mut s).unwrap());
        // A semiprime with factors too large for trial division, so the
        // rejection has to come from Miller-Rabin itself.
        let f = random_prime_exact_bits(112, &mut s).unwrap();
        let c = &f * &f;
        assert!(!is_probable_prime(&c, MR_ROUNDS, &mut s).unwrap());
    }

    #[test]
    fn generated_primes_have_exact_bit_length() {
        let mut s = src();
        for bits in [32u64, 64, 160] {
            let p = random_prime_exact_bits(bits, &mut s).unwrap();
            assert_eq!(p.bits(), bits);
            assert!(is_probable_prime(&p, MR_ROUNDS, &mut s).unwrap());
        }
    }

    #[test]
    fn random_below_stays_in_range() {
        let mut s = src();
        let bound = BigUint::from(28u8);
        for _ in 0..500 {
            assert!(random_below(&bound, &mut s).unwrap() < bound);
        }
    }
}
