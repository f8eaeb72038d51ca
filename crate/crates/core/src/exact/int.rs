//! Integer gcd and primality.

use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer as _;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Int;

/// Euclidean gcd, nonnegative; gcd(0, 0) = 0.
pub fn gcd_int(a: &Int, b: &Int) -> Int {
    a.gcd(b)
}

/// Deterministic Miller-Rabin witness set, sufficient for all n < 2^64.
const WITNESSES_64: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Strong-probable-prime test for one base; n odd, n > 2.
fn sprp_u64(n: u64, base: u64) -> bool {
    let b = base % n;
    if b == 0 {
        return true;
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let q = d >> s;
    let mut x = pow_mod(b, q, n);
    if x == 1 || x == n - 1 {
        return true;
    }
    for _ in 1..s {
        x = mul_mod(x, x, n);
        if x == n - 1 {
            return true;
        }
    }
    false
}

/// Deterministic primality for machine-width integers.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    WITNESSES_64.iter().all(|&b| sprp_u64(n, b))
}

/// Primality test: deterministic below 2^64, otherwise Miller-Rabin with 64
/// reproducibly seeded random bases (error probability < 4^-64).
/// Negative inputs are composite by convention.
pub fn is_prime(n: &Int) -> bool {
    if n.sign() == num_bigint::Sign::Minus {
        return false;
    }
    let n = n.magnitude();
    if let Ok(small) = u64::try_from(n) {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let two = &one + &one;
    let n_minus_1 = n - &one;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let q = &n_minus_1 >> s;
    let mut seed = [0u8; 32];
    let digits = n.to_u64_digits();
    for (i, d) in digits.iter().take(4).enumerate() {
        seed[i * 8..(i + 1) * 8].copy_from_slice(&d.to_le_bytes());
    }
    let mut rng = ChaCha8Rng::from_seed(seed);
    'witness: for _ in 0..64 {
        let base = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = base.modpow(&q, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Pow;

    #[test]
    fn gcd_large_powers_of_two() {
        let a = Int::from(2).pow(200u32);
        let b = Int::from(2).pow(199u32) * Int::from(3);
        assert_eq!(gcd_int(&a, &b), Int::from(2).pow(199u32));
    }

    #[test]
    fn gcd_edge_cases() {
        assert_eq!(gcd_int(&Int::from(0), &Int::from(0)), Int::from(0));
        assert_eq!(gcd_int(&Int::from(-12), &Int::from(18)), Int::from(6));
    }

    #[test]
    fn small_primality_matches_trial_division() {
        let trial = |n: u64| n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0);
        for n in 0..2000u64 {
            assert_eq!(is_prime_u64(n), trial(n), "n = {n}");
        }
    }

    #[test]
    fn known_64bit_values() {
        assert!(is_prime_u64(18_446_744_073_709_551_557)); // largest prime < 2^64
        assert!(!is_prime_u64(18_446_744_073_709_551_615));
        assert!(is_prime_u64(1_000_003));
        // strong pseudoprime to base 2 alone
        assert!(!is_prime_u64(2_047));
    }

    #[test]
    fn bigint_primality_agrees_above_word_size() {
        // 2^89 - 1 is a Mersenne prime; 2^90 + 5 factors.
        let m89 = Int::from(2).pow(89u32) - 1;
        assert!(is_prime(&m89));
        let composite = Int::from(2).pow(90u32) + 5;
        assert!(!is_prime(&composite));
        assert!(!is_prime(&Int::from(-7)));
    }
}
