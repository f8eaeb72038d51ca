//! Dense polynomials over Z: ring ops, content, pseudo-division, gcd,
//! resultants (subresultant PRS and Sylvester/Bareiss), squarefree parts.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use super::{gcd_int, Fp, FpPoly, Int, Rat, POLY_DEGREE_CAP};

/// Coefficients ascending; trailing coefficient nonzero. The zero polynomial
/// has an empty coefficient vector.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct ZPoly {
    c: Vec<Int>,
}

impl ZPoly {
    pub fn new(mut coeffs: Vec<Int>) -> ZPoly {
        while coeffs.last().is_some_and(|x| x.is_zero()) {
            coeffs.pop();
        }
        assert!(
            coeffs.len() <= POLY_DEGREE_CAP + 1,
            "polynomial degree exceeds cap"
        );
        ZPoly { c: coeffs }
    }

    pub fn zero() -> ZPoly {
        ZPoly { c: Vec::new() }
    }

    pub fn constant(n: Int) -> ZPoly {
        ZPoly::new(vec![n])
    }

    pub fn x() -> ZPoly {
        ZPoly::new(vec![Int::zero(), Int::one()])
    }

    pub fn monomial(k: usize, coef: Int) -> ZPoly {
        let mut c = vec![Int::zero(); k + 1];
        c[k] = coef;
        ZPoly::new(c)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.c
    }

    pub fn coeff(&self, k: usize) -> Int {
        self.c.get(k).cloned().unwrap_or_else(Int::zero)
    }

    pub fn lc(&self) -> Int {
        self.c.last().cloned().unwrap_or_else(Int::zero)
    }

    pub fn add(&self, other: &ZPoly) -> ZPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) + other.coeff(i));
        }
        ZPoly::new(out)
    }

    pub fn sub(&self, other: &ZPoly) -> ZPoly {
        let n = self.c.len().max(other.c.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            out.push(self.coeff(i) - other.coeff(i));
        }
        ZPoly::new(out)
    }

    pub fn neg(&self) -> ZPoly {
        ZPoly {
            c: self.c.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() || other.is_zero() {
            return ZPoly::zero();
        }
        let mut out = vec![Int::zero(); self.c.len() + other.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ZPoly::new(out)
    }

    pub fn mul_scalar(&self, k: &Int) -> ZPoly {
        if k.is_zero() {
            return ZPoly::zero();
        }
        ZPoly {
            c: self.c.iter().map(|x| x * k).collect(),
        }
    }

    pub fn eval(&self, x: &Int) -> Int {
        let mut acc = Int::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn derivative(&self) -> ZPoly {
        if self.c.len() <= 1 {
            return ZPoly::zero();
        }
        ZPoly::new(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(i, a)| a * Int::from(i + 1))
                .collect(),
        )
    }

    /// Nonnegative gcd of coefficients; 0 for the zero polynomial.
    pub fn content(&self) -> Int {
        let mut g = Int::zero();
        for a in &self.c {
            g = gcd_int(&g, a);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// (content with the sign of the leading coefficient, primitive part).
    /// The primitive part has positive leading coefficient.
    pub fn primitive(&self) -> (Int, ZPoly) {
        if self.is_zero() {
            return (Int::zero(), ZPoly::zero());
        }
        let mut g = self.content();
        if self.lc().is_negative() {
            g = -g;
        }
        let prim = ZPoly {
            c: self.c.iter().map(|a| a / &g).collect(),
        };
        (g, prim)
    }

    /// Pseudo-division: lc(div)^(deg self - deg div + 1) * self = q*div + r,
    /// deg r < deg div. Requires deg self >= deg div >= 0, div nonzero.
    pub fn pseudo_divrem(&self, div: &ZPoly) -> (ZPoly, ZPoly) {
        let n = div.degree().expect("pseudo-division by zero");
        let m = self.degree().expect("pseudo-division of zero");
        assert!(m >= n);
        let c = div.lc();
        let mut q = ZPoly::zero();
        let mut r = self.clone();
        let mut e = (m - n) as i64 + 1;
        while let Some(rd) = r.degree() {
            if rd < n {
                break;
            }
            let s = ZPoly::monomial(rd - n, r.lc());
            q = q.mul_scalar(&c).add(&s);
            r = r.mul_scalar(&c).sub(&s.mul(div));
            e -= 1;
        }
        let scale = int_pow(&c, e as u64);
        (q.mul_scalar(&scale), r.mul_scalar(&scale))
    }

    /// Exact division; panics if `div` does not divide `self` in Z[x].
    pub fn div_exact(&self, div: &ZPoly) -> ZPoly {
        assert!(!div.is_zero(), "division by zero polynomial");
        if self.is_zero() {
            return ZPoly::zero();
        }
        let n = div.degree().unwrap();
        let dlc = div.lc();
        let mut r = self.clone();
        let mut q = vec![Int::zero(); self.c.len() - div.c.len() + 1];
        while let Some(rd) = r.degree() {
            if rd < n {
                break;
            }
            let (quot, rem) = num_integer::Integer::div_rem(&r.lc(), &dlc);
            assert!(rem.is_zero(), "inexact polynomial division");
            let s = ZPoly::monomial(rd - n, quot.clone());
            q[rd - n] = quot;
            r = r.sub(&s.mul(div));
        }
        assert!(r.is_zero(), "inexact polynomial division");
        ZPoly::new(q)
    }

    /// Gcd in Z[x] via the primitive PRS, leading coefficient positive.
    pub fn gcd(&self, other: &ZPoly) -> ZPoly {
        if self.is_zero() {
            return other.primitive_signed();
        }
        if other.is_zero() {
            return self.primitive_signed();
        }
        let cont = gcd_int(&self.content(), &other.content());
        let (_, mut a) = self.primitive();
        let (_, mut b) = other.primitive();
        if a.degree() < b.degree() {
            std::mem::swap(&mut a, &mut b);
        }
        while !b.is_zero() {
            if a.degree().unwrap() < b.degree().unwrap() {
                std::mem::swap(&mut a, &mut b);
                continue;
            }
            let (_, r) = a.pseudo_divrem(&b);
            let (_, rp) = r.primitive();
            a = b;
            b = rp;
        }
        a.mul_scalar(&cont)
    }

    fn primitive_signed(&self) -> ZPoly {
        let (_, p) = self.primitive();
        p
    }

    /// Primitive polynomial with the same distinct roots: f / gcd(f, f').
    pub fn squarefree_part(&self) -> ZPoly {
        if self.is_zero() {
            return ZPoly::zero();
        }
        if self.degree() == Some(0) {
            return ZPoly::constant(Int::one());
        }
        let (_, f) = self.primitive();
        let g = f.gcd(&f.derivative());
        f.div_exact(&g).primitive_signed()
    }

    pub fn reduce_mod(&self, fp: Fp) -> FpPoly {
        FpPoly::new(fp, self.c.iter().map(|a| fp.reduce_int(a)).collect())
    }

    /// Max coefficient bit size (0 for the zero polynomial).
    pub fn coeff_bits(&self) -> u64 {
        self.c.iter().map(|a| a.bits()).max().unwrap_or(0)
    }
}

fn int_pow(base: &Int, e: u64) -> Int {
    let mut acc = Int::one();
    let mut b = base.clone();
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

fn rat_pow(base: &Int, e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(int_pow(base, e as u64))
    } else {
        Rat::new(Int::one(), int_pow(base, (-e) as u64))
    }
}

/// Resultant of two integer polynomials, Sylvester convention
/// (rows of `a` first). Computed by the subresultant PRS with an exact
/// rational cofactor, so defective degree sequences need no special cases.
/// Res(0, g) = 0 by convention.
pub fn resultant_z(a: &ZPoly, b: &ZPoly) -> Int {
    if a.is_zero() || b.is_zero() {
        return Int::zero();
    }
    let (ma, nb) = (a.degree().unwrap(), b.degree().unwrap());
    let mut mult = Rat::from_integer(Int::one());
    let (mut f, mut g) = if ma >= nb {
        (a.clone(), b.clone())
    } else {
        if ma % 2 == 1 && nb % 2 == 1 {
            mult = -mult;
        }
        (b.clone(), a.clone())
    };
    // subresultant scaling state
    let mut psi = -Int::one();
    let mut prev_delta: Option<usize> = None;
    loop {
        let m = f.degree().unwrap();
        let n = g.degree().unwrap();
        if n == 0 {
            let res = mult * Rat::from_integer(int_pow(&g.lc(), m as u64));
            assert!(res.is_integer(), "resultant cofactor must clear");
            return res.to_integer();
        }
        let delta = m - n;
        let c = g.lc();
        let (_, r) = f.pseudo_divrem(&g);
        if r.is_zero() {
            return Int::zero();
        }
        let rd = r.degree().unwrap();
        // Res(f, g) = (-1)^(mn) * c^(m - rd - n*(delta+1)) * Res(g, r)
        if m % 2 == 1 && n % 2 == 1 {
            mult = -mult;
        }
        let e = m as i64 - rd as i64 - n as i64 * (delta as i64 + 1);
        mult *= rat_pow(&c, e);
        // divide r by the subresultant beta; Res(g, beta*r') = beta^n Res(g, r')
        let beta = match prev_delta {
            None => {
                if delta % 2 == 0 {
                    -Int::one()
                } else {
                    Int::one()
                }
            }
            Some(pd) => {
                let neg_lc = -f.lc();
                if pd > 0 {
                    let num = int_pow(&neg_lc, pd as u64);
                    psi = if pd == 1 {
                        num
                    } else {
                        &num / &int_pow(&psi, (pd - 1) as u64)
                    };
                }
                neg_lc * int_pow(&psi, delta as u64)
            }
        };
        let (r_next, factor) = divide_out(&r, &beta);
        mult *= rat_pow(&factor, n as i64);
        prev_delta = Some(delta);
        f = g;
        g = r_next;
    }
}

/// Divide every coefficient by `beta` when exact; otherwise leave the
/// polynomial alone (factor 1). The caller's cofactor absorbs either way.
fn divide_out(r: &ZPoly, beta: &Int) -> (ZPoly, Int) {
    if beta.is_one() {
        return (r.clone(), Int::one());
    }
    let mut out = Vec::with_capacity(r.c.len());
    for a in &r.c {
        let (q, rem) = num_integer::Integer::div_rem(a, beta);
        if !rem.is_zero() {
            debug_assert!(false, "subresultant beta failed to divide remainder");
            return (r.clone(), Int::one());
        }
        out.push(q);
    }
    (ZPoly { c: out }, beta.clone())
}

/// Resultant via the Sylvester matrix with declared degrees (coefficients
/// padded with zeros up to `da`, `db`), evaluated by fraction-free Gaussian
/// elimination. Declared degrees make this the resultant of binary forms.
pub fn sylvester_resultant(a: &ZPoly, b: &ZPoly, da: usize, db: usize) -> Int {
    assert!(a.degree().map_or(true, |d| d <= da));
    assert!(b.degree().map_or(true, |d| d <= db));
    let size = da + db;
    if size == 0 {
        return Int::one();
    }
    let mut m = vec![vec![Int::zero(); size]; size];
    for row in 0..db {
        for k in 0..=da {
            m[row][row + k] = a.coeff(da - k);
        }
    }
    for row in 0..da {
        for k in 0..=db {
            m[db + row][row + k] = b.coeff(db - k);
        }
    }
    bareiss_det(m)
}

fn bareiss_det(mut m: Vec<Vec<Int>>) -> Int {
    let n = m.len();
    if n == 0 {
        return Int::one();
    }
    let mut sign = 1i32;
    let mut prev = Int::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else {
                return Int::zero();
            };
            m.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
                m[i][j] = v;
            }
            m[i][k] = Int::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if sign < 0 {
        -det
    } else {
        det
    }
}

impl fmt::Display for ZPoly {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(w, "0");
        }
        let mut first = true;
        for (k, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let mag = a.abs();
            if first {
                if a.is_negative() {
                    write!(w, "-")?;
                }
                first = false;
            } else if a.is_negative() {
                write!(w, " - ")?;
            } else {
                write!(w, " + ")?;
            }
            match k {
                0 => write!(w, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(w, "{mag}")?;
                    }
                    if k == 1 {
                        write!(w, "x")?;
                    } else {
                        write!(w, "x^{k}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid polynomial text: {0}")]
pub struct ParsePolyError(pub String);

impl FromStr for ZPoly {
    type Err = ParsePolyError;

    /// Integer polynomials in x: `x^2 - 3`, `-2x^3 + x - 5`, `7`.
    /// `*` between a coefficient and `x` is optional.
    fn from_str(s: &str) -> Result<ZPoly, ParsePolyError> {
        let bad = |m: &str| ParsePolyError(format!("{m} in {s:?}"));
        let mut terms: Vec<(usize, Int)> = Vec::new();
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        if chars.is_empty() {
            return Err(bad("empty input"));
        }
        let mut i = 0;
        let mut sign = 1i32;
        let mut expect_term = true;
        while i < chars.len() {
            let ch = chars[i];
            if ch == '+' || ch == '-' {
                if expect_term && !terms.is_empty() {
                    return Err(bad("dangling sign"));
                }
                if ch == '-' {
                    sign = -sign;
                }
                i += 1;
                expect_term = true;
                continue;
            }
            // one term: optional integer, optional x[^k]
            let mut coef: Option<Int> = None;
            if ch.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                coef = Some(digits.parse::<Int>().map_err(|_| bad("bad integer"))?);
                if i < chars.len() && chars[i] == '*' {
                    i += 1;
                    if i >= chars.len() || chars[i] != 'x' {
                        return Err(bad("expected x after *"));
                    }
                }
            }
            let mut exp = 0usize;
            if i < chars.len() && chars[i] == 'x' {
                i += 1;
                exp = 1;
                if i < chars.len() && chars[i] == '^' {
                    i += 1;
                    let start = i;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                    if start == i {
                        return Err(bad("missing exponent"));
                    }
                    let digits: String = chars[start..i].iter().collect();
                    exp = digits.parse().map_err(|_| bad("bad exponent"))?;
                    if exp > POLY_DEGREE_CAP {
                        return Err(bad("exponent beyond degree cap"));
                    }
                }
            } else if coef.is_none() {
                return Err(bad("unexpected character"));
            }
            let mut c = coef.unwrap_or_else(Int::one);
            if sign < 0 {
                c = -c;
            }
            terms.push((exp, c));
            sign = 1;
            expect_term = false;
        }
        if expect_term {
            return Err(bad("trailing operator"));
        }
        let deg = terms.iter().map(|(e, _)| *e).max().unwrap_or(0);
        let mut c = vec![Int::zero(); deg + 1];
        for (e, a) in terms {
            c[e] += a;
        }
        Ok(ZPoly::new(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zp(v: &[i64]) -> ZPoly {
        ZPoly::new(v.iter().map(|&x| Int::from(x)).collect())
    }

    #[test]
    fn ring_basics() {
        let f = zp(&[-3, 0, 1]); // x^2 - 3
        let g = zp(&[-2, 1]); // x - 2
        assert_eq!(f.add(&g), zp(&[-5, 1, 1]));
        assert_eq!(f.mul(&g), zp(&[6, -3, -2, 1]));
        assert_eq!(f.eval(&Int::from(4)), Int::from(13));
        assert_eq!(f.derivative(), zp(&[0, 2]));
    }

    #[test]
    fn content_and_primitive() {
        let f = zp(&[-6, 0, -9]);
        let (cont, prim) = f.primitive();
        assert_eq!(cont, Int::from(-3));
        assert_eq!(prim, zp(&[2, 0, 3]));
    }

    #[test]
    fn pseudo_division_identity() {
        let f = zp(&[1, 2, 0, 3, 7]);
        let g = zp(&[5, 0, 2]);
        let (q, r) = f.pseudo_divrem(&g);
        let delta = f.degree().unwrap() - g.degree().unwrap();
        let lhs = f.mul_scalar(&int_pow(&g.lc(), delta as u64 + 1));
        assert_eq!(lhs, q.mul(&g).add(&r));
        assert!(r.degree().unwrap() < g.degree().unwrap());
    }

    #[test]
    fn pinned_resultants() {
        // Res(x^2 - 3, x - 2) = 1
        assert_eq!(resultant_z(&zp(&[-3, 0, 1]), &zp(&[-2, 1])), Int::from(1));
        // shared root forces 0
        assert_eq!(resultant_z(&zp(&[0, 1]), &zp(&[0, 2, 1])), Int::from(0));
        // Res(x, x - 1) = -1 under the rows-of-first-argument convention
        assert_eq!(resultant_z(&zp(&[0, 1]), &zp(&[-1, 1])), Int::from(-1));
        // Res(x^3 + 1, 2x) = -8
        assert_eq!(resultant_z(&zp(&[1, 0, 0, 1]), &zp(&[0, 2])), Int::from(-8));
    }

    #[test]
    fn forms_resultant_pins() {
        // degree-2 forms X^2 and Y^2 dehomogenize to x^2 and 1
        assert_eq!(sylvester_resultant(&zp(&[0, 0, 1]), &zp(&[1]), 2, 2), Int::from(1));
        // X^2+Y^2 vs XY as degree-2 forms: common roots none, det = 1
        assert_eq!(
            sylvester_resultant(&zp(&[1, 0, 1]), &zp(&[0, 1]), 2, 2),
            Int::from(1)
        );
    }

    #[test]
    fn gcd_and_squarefree() {
        let f = zp(&[-1, 0, 1]); // (x-1)(x+1)
        let g = zp(&[1, 2, 1]); // (x+1)^2
        assert_eq!(f.gcd(&g), zp(&[1, 1]));
        let h = f.mul(&g); // (x-1)(x+1)^3
        assert_eq!(h.squarefree_part(), zp(&[-1, 0, 1]));
        // content handling: gcd(2f, 4f) = 2f up to sign
        let two_f = f.mul_scalar(&Int::from(2));
        let four_f = f.mul_scalar(&Int::from(4));
        assert_eq!(two_f.gcd(&four_f), two_f);
    }

    #[test]
    fn display_and_parse_roundtrip() {
        for s in ["x^2 - 3", "-2x^3 + x - 5", "7", "x", "-x + 1", "3*x^2 + 2"] {
            let p: ZPoly = s.parse().unwrap();
            let q: ZPoly = p.to_string().parse().unwrap();
            assert_eq!(p, q, "through {s:?}");
        }
        assert_eq!("x^2+1".parse::<ZPoly>().unwrap(), zp(&[1, 0, 1]));
        assert!("x^".parse::<ZPoly>().is_err());
        assert!("".parse::<ZPoly>().is_err());
        assert!("x + + 1".parse::<ZPoly>().is_err());
    }

    #[test]
    fn exact_division_checks() {
        let f = zp(&[2, 3]).mul(&zp(&[-5, 7, 1]));
        assert_eq!(f.div_exact(&zp(&[2, 3])), zp(&[-5, 7, 1]));
    }

    proptest! {
        #[test]
        fn prs_matches_sylvester(av in proptest::collection::vec(-9i64..=9, 1..6),
                                 bv in proptest::collection::vec(-9i64..=9, 1..6)) {
            let a = zp(&av);
            let b = zp(&bv);
            prop_assume!(!a.is_zero() && !b.is_zero());
            let da = a.degree().unwrap();
            let db = b.degree().unwrap();
            prop_assert_eq!(resultant_z(&a, &b), sylvester_resultant(&a, &b, da, db));
        }

        #[test]
        fn resultant_multiplicative(av in proptest::collection::vec(-5i64..=5, 2..5),
                                    bv in proptest::collection::vec(-5i64..=5, 2..5),
                                    cv in proptest::collection::vec(-5i64..=5, 2..5)) {
            let a = zp(&av);
            let b = zp(&bv);
            let c = zp(&cv);
            prop_assume!(!a.is_zero() && !b.is_zero() && !c.is_zero());
            prop_assert_eq!(
                resultant_z(&a.mul(&b), &c),
                resultant_z(&a, &c) * resultant_z(&b, &c)
            );
        }

        #[test]
        fn mul_commutes_and_distributes(av in proptest::collection::vec(-9i64..=9, 0..6),
                                        bv in proptest::collection::vec(-9i64..=9, 0..6),
                                        cv in proptest::collection::vec(-9i64..=9, 0..6)) {
            let a = zp(&av);
            let b = zp(&bv);
            let c = zp(&cv);
            prop_assert_eq!(a.mul(&b), b.mul(&a));
            prop_assert_eq!(a.mul(&b.add(&c)), a.mul(&b).add(&a.mul(&c)));
        }
    }
}
