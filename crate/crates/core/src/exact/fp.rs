//! Arithmetic in F_p with machine-width residues, p <= 2^62.

use num_traits::ToPrimitive;

use super::{Int, MAX_MODULUS};

/// Prime-field context. Elements are plain `u64` residues in [0, p).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct Fp {
    pub p: u64,
}

impl Fp {
    /// p must be prime (not rechecked here) and at most 2^62.
    pub fn new(p: u64) -> Fp {
        assert!(p >= 2 && p <= MAX_MODULUS, "modulus out of range: {p}");
        Fp { p }
    }

    pub fn reduce_int(&self, n: &Int) -> u64 {
        let m = (n % Int::from(self.p)).to_i128().expect("residue fits i128");
        if m < 0 {
            (m + self.p as i128) as u64
        } else {
            m as u64
        }
    }

    #[inline]
    pub fn add(&self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }

    #[inline]
    pub fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.p - a
        }
    }

    #[inline]
    pub fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.p as u128) as u64
    }

    pub fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1u64;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse of a unit, by extended Euclid.
    pub fn inv(&self, a: u64) -> u64 {
        debug_assert!(a % self.p != 0, "inverting zero mod {}", self.p);
        let (mut r0, mut r1) = (self.p as i128, (a % self.p) as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1, "non-unit mod {}", self.p);
        let t = t0 % self.p as i128;
        if t < 0 {
            (t + self.p as i128) as u64
        } else {
            t as u64
        }
    }

    /// Legendre symbol: 1, -1, or 0.
    pub fn legendre(&self, a: u64) -> i32 {
        if a % self.p == 0 {
            return 0;
        }
        if self.p == 2 {
            return 1;
        }
        if self.pow(a, (self.p - 1) / 2) == 1 {
            1
        } else {
            -1
        }
    }

    /// Square root by Tonelli-Shanks; None for non-residues.
    pub fn sqrt(&self, a: u64) -> Option<u64> {
        let a = a % self.p;
        if a == 0 {
            return Some(0);
        }
        if self.p == 2 {
            return Some(a);
        }
        if self.legendre(a) != 1 {
            return None;
        }
        if self.p % 4 == 3 {
            return Some(self.pow(a, (self.p + 1) / 4));
        }
        // write p - 1 = q * 2^s with q odd
        let s = (self.p - 1).trailing_zeros();
        let q = (self.p - 1) >> s;
        // smallest non-residue as the generator of the 2-Sylow part
        let mut z = 2;
        while self.legendre(z) != -1 {
            z += 1;
        }
        let mut m = s;
        let mut c = self.pow(z, q);
        let mut t = self.pow(a, q);
        let mut r = self.pow(a, (q + 1) / 2);
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = self.mul(t2, t2);
                i += 1;
            }
            let b = self.pow(c, 1 << (m - i - 1));
            m = i;
            c = self.mul(b, b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }
}
