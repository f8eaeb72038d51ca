//! Dense polynomials over F_p: Euclidean arithmetic, x^e mod f by repeated
//! squaring, distinct-root counting, and root extraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Fp, POLY_DEGREE_CAP};

/// Coefficients ascending, trailing coefficient nonzero; zero polynomial is
/// the empty vector.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FpPoly {
    pub fp: Fp,
    c: Vec<u64>,
}

impl FpPoly {
    pub fn new(fp: Fp, mut coeffs: Vec<u64>) -> FpPoly {
        for a in coeffs.iter_mut() {
            *a %= fp.p;
        }
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        assert!(coeffs.len() <= POLY_DEGREE_CAP + 1, "degree exceeds cap");
        FpPoly { fp, c: coeffs }
    }

    pub fn zero(fp: Fp) -> FpPoly {
        FpPoly { fp, c: Vec::new() }
    }

    pub fn constant(fp: Fp, a: u64) -> FpPoly {
        FpPoly::new(fp, vec![a])
    }

    pub fn x(fp: Fp) -> FpPoly {
        FpPoly::new(fp, vec![0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> u64 {
        self.c.get(k).copied().unwrap_or(0)
    }

    pub fn lc(&self) -> u64 {
        self.c.last().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &FpPoly) -> FpPoly {
        let n = self.c.len().max(other.c.len());
        let f = self.fp;
        FpPoly::new(f, (0..n).map(|i| f.add(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn sub(&self, other: &FpPoly) -> FpPoly {
        let n = self.c.len().max(other.c.len());
        let f = self.fp;
        FpPoly::new(f, (0..n).map(|i| f.sub(self.coeff(i), other.coeff(i))).collect())
    }

    pub fn mul(&self, other: &FpPoly) -> FpPoly {
        if self.is_zero() || other.is_zero() {
            return FpPoly::zero(self.fp);
        }
        let f = self.fp;
        let n = self.c.len() + other.c.len() - 1;
        let mut out = vec![0u64; n];
        if f.p < (1 << 31) {
            // products fit well under u128; accumulate and reduce once per cell
            for k in 0..n {
                let lo = k.saturating_sub(other.c.len() - 1);
                let hi = k.min(self.c.len() - 1);
                let mut acc: u128 = 0;
                for i in lo..=hi {
                    acc += self.c[i] as u128 * other.c[k - i] as u128;
                }
                out[k] = (acc % f.p as u128) as u64;
            }
        } else {
            for (i, &a) in self.c.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                for (j, &b) in other.c.iter().enumerate() {
                    out[i + j] = f.add(out[i + j], f.mul(a, b));
                }
            }
        }
        FpPoly::new(f, out)
    }

    pub fn mul_scalar(&self, k: u64) -> FpPoly {
        let f = self.fp;
        FpPoly::new(f, self.c.iter().map(|&a| f.mul(a, k)).collect())
    }

    pub fn make_monic(&self) -> FpPoly {
        match self.lc() {
            0 | 1 => self.clone(),
            l => self.mul_scalar(self.fp.inv(l)),
        }
    }

    /// Euclidean division; divisor must be nonzero.
    pub fn divrem(&self, div: &FpPoly) -> (FpPoly, FpPoly) {
        let n = div.degree().expect("division by zero polynomial");
        let f = self.fp;
        if self.degree().map_or(true, |m| m < n) {
            return (FpPoly::zero(f), self.clone());
        }
        let inv_lc = f.inv(div.lc());
        let mut r = self.c.clone();
        let m = r.len() - 1;
        let mut q = vec![0u64; m - n + 1];
        for k in (n..=m).rev() {
            let t = f.mul(r[k], inv_lc);
            if t == 0 {
                continue;
            }
            q[k - n] = t;
            for j in 0..=n {
                let idx = k - n + j;
                r[idx] = f.sub(r[idx], f.mul(t, div.c[j]));
            }
        }
        (FpPoly::new(f, q), FpPoly::new(f, r))
    }

    pub fn rem(&self, div: &FpPoly) -> FpPoly {
        self.divrem(div).1
    }

    /// Monic gcd; gcd(0, 0) = 0.
    pub fn gcd(&self, other: &FpPoly) -> FpPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.make_monic()
    }

    pub fn eval(&self, z: u64) -> u64 {
        let f = self.fp;
        let mut acc = 0u64;
        for &a in self.c.iter().rev() {
            acc = f.add(f.mul(acc, z), a);
        }
        acc
    }

    pub fn derivative(&self) -> FpPoly {
        if self.c.len() <= 1 {
            return FpPoly::zero(self.fp);
        }
        let f = self.fp;
        FpPoly::new(
            f,
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, &a)| f.mul(a, (i as u64 + 1) % f.p))
                .collect(),
        )
    }
}

/// x^e mod f by square-and-multiply; f must have degree >= 1.
pub fn pow_x_mod(f: &FpPoly, e: u64) -> FpPoly {
    pow_mod(&FpPoly::x(f.fp), e, f)
}

/// base^e mod f.
pub fn pow_mod(base: &FpPoly, e: u64, f: &FpPoly) -> FpPoly {
    assert!(f.degree().map_or(false, |d| d >= 1), "modulus must be nonconstant");
    let mut acc = FpPoly::constant(f.fp, 1);
    let mut b = base.rem(f);
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&b).rem(f);
        }
        b = b.mul(&b).rem(f);
        e >>= 1;
    }
    acc
}

/// Number of distinct roots of f in F_p: deg gcd(x^p - x mod f, f).
/// Constants have no roots; the zero polynomial is rejected.
pub fn distinct_root_count(f: &FpPoly) -> usize {
    assert!(!f.is_zero(), "root count of the zero polynomial");
    if f.degree() == Some(0) {
        return 0;
    }
    let p = f.fp.p;
    let fm = f.make_monic();
    let xp = pow_x_mod(&fm, p);
    let g = xp.sub(&FpPoly::x(f.fp)).gcd(&fm);
    g.degree().unwrap_or(0)
}

/// All roots of f in F_p, ascending. Splits the linear-factor part with
/// gcd((x+a)^((p-1)/2) - 1, g) for varying shifts a.
pub fn roots(f: &FpPoly) -> Vec<u64> {
    assert!(!f.is_zero(), "roots of the zero polynomial");
    let fp = f.fp;
    let p = fp.p;
    if f.degree() == Some(0) {
        return Vec::new();
    }
    if p <= 64 {
        let mut out: Vec<u64> = (0..p).filter(|&z| f.eval(z) == 0).collect();
        out.sort_unstable();
        return out;
    }
    let fm = f.make_monic();
    let xp = pow_x_mod(&fm, p);
    let lin = xp.sub(&FpPoly::x(fp)).gcd(&fm);
    let mut out = Vec::new();
    let seed = p ^ (f.c.len() as u64) ^ f.coeff(0).rotate_left(17);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    split_linear(&lin, &mut rng, &mut out);
    out.sort_unstable();
    out
}

fn split_linear(g: &FpPoly, rng: &mut ChaCha8Rng, out: &mut Vec<u64>) {
    let fp = g.fp;
    match g.degree() {
        None | Some(0) => {}
        Some(1) => {
            // monic x + c0  =>  root -c0
            let root = fp.mul(fp.neg(g.coeff(0)), fp.inv(g.lc()));
            out.push(root);
        }
        Some(_) => {
            // strip a root at 0 so shifted powering sees units
            if g.coeff(0) == 0 {
                out.push(0);
                let reduced = g.divrem(&FpPoly::x(fp)).0;
                split_linear(&reduced, rng, out);
                return;
            }
            loop {
                let a = rng.gen_range(0..fp.p);
                let shifted = FpPoly::new(fp, vec![a, 1]);
                let h = pow_mod(&shifted, (fp.p - 1) / 2, g).sub(&FpPoly::constant(fp, 1));
                let d = h.gcd(g);
                let dd = d.degree().unwrap_or(0);
                if dd > 0 && dd < g.degree().unwrap() {
                    split_linear(&d, rng, out);
                    split_linear(&g.divrem(&d).0, rng, out);
                    return;
                }
            }
        }
    }
}
