//! Points of P^1 and rational self-maps as pairs of binary forms over Z.
//!
//! A map is stored as coprime degree-d forms [F : G] with joint content 1,
//! sign-normalized so the highest nonzero coefficient of F is positive. The
//! form resultant is kept alongside: a prime is a prime of good reduction
//! exactly when it does not divide it. For composites the stored value is
//! the resultant up to sign (computed by the composition formula
//! Res(F0(P,Q), G0(P,Q)) = +/- Res(F0,G0)^e * Res(P,Q)^(d^2)), which has the
//! same prime support and is all the reduction tests need.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};

use crate::exact::{gcd_int, resultant_z, Fp, FpPoly, Int, ParsePolyError, Rat, ZPoly};

/// Iterates refuse to grow past this degree.
pub const MAP_DEGREE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("map degree must be at least 2")]
    DegreeTooSmall,
    #[error("map components must be nonzero")]
    ZeroComponent,
    #[error("components share a projective root (zero resultant)")]
    DegenerateMap,
    #[error("degree {0} exceeds the iterate cap {MAP_DEGREE_CAP}")]
    DegreeCapExceeded(u64),
    #[error("bad reduction at {0}")]
    BadReduction(u64),
    #[error("characteristic {p} too small: need p > {need}")]
    CharTooSmall { p: u64, need: u64 },
    #[error("(0 : 0) is not a projective point")]
    InvalidPoint,
    #[error("invalid map text: {0}")]
    Parse(String),
}

/// Binary form of fixed degree d: coefficient k sits on X^k Y^(d-k).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BinForm {
    d: usize,
    c: Vec<Int>,
}

impl BinForm {
    /// Homogenize a polynomial to declared degree d (requires deg <= d).
    pub fn from_poly(p: &ZPoly, d: usize) -> BinForm {
        assert!(p.degree().map_or(true, |pd| pd <= d), "degree exceeds form degree");
        let mut c = vec![Int::zero(); d + 1];
        for (k, a) in p.coeffs().iter().enumerate() {
            c[k] = a.clone();
        }
        BinForm { d, c }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn coeffs(&self) -> &[Int] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|a| a.is_zero())
    }

    /// F(x, 1) with the same coefficients, trailing zeros trimmed.
    pub fn dehom(&self) -> ZPoly {
        ZPoly::new(self.c.clone())
    }

    /// Value at (1 : 0), the X^d coefficient.
    pub fn at_infinity(&self) -> &Int {
        &self.c[self.d]
    }

    pub fn eval(&self, x: &Int, y: &Int) -> Int {
        let mut acc = self.c[self.d].clone();
        let mut ypow = Int::one();
        for k in (0..self.d).rev() {
            ypow *= y;
            acc = acc * x + &self.c[k] * &ypow;
        }
        acc
    }

    pub fn mul(&self, other: &BinForm) -> BinForm {
        let d = self.d + other.d;
        let mut c = vec![Int::zero(); d + 1];
        for (i, a) in self.c.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        BinForm { d, c }
    }

    pub fn add(&self, other: &BinForm) -> BinForm {
        assert_eq!(self.d, other.d, "form degrees must match");
        BinForm {
            d: self.d,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &BinForm) -> BinForm {
        assert_eq!(self.d, other.d, "form degrees must match");
        BinForm {
            d: self.d,
            c: self
                .c
                .iter()
                .zip(&other.c)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, k: &Int) -> BinForm {
        BinForm {
            d: self.d,
            c: self.c.iter().map(|a| a * k).collect(),
        }
    }

    /// dF/dX, degree d-1. Zero form of degree d-1 if d = 0 is not allowed.
    pub fn dx(&self) -> BinForm {
        assert!(self.d >= 1);
        BinForm {
            d: self.d - 1,
            c: (1..=self.d).map(|k| &self.c[k] * Int::from(k)).collect(),
        }
    }

    /// dF/dY, degree d-1.
    pub fn dy(&self) -> BinForm {
        assert!(self.d >= 1);
        BinForm {
            d: self.d - 1,
            c: (0..self.d).map(|k| &self.c[k] * Int::from(self.d - k)).collect(),
        }
    }

    /// Substitute the pair (P, Q) of equal-degree forms for (X, Y).
    pub fn compose_pair(&self, p: &BinForm, q: &BinForm) -> BinForm {
        assert_eq!(p.d, q.d);
        let e = p.d;
        // Horner in P with a running power of Q
        let mut acc = BinForm {
            d: 0,
            c: vec![self.c[self.d].clone()],
        };
        let mut qpow = BinForm {
            d: 0,
            c: vec![Int::one()],
        };
        for k in (0..self.d).rev() {
            qpow = qpow.mul(q);
            acc = acc.mul(p).add(&qpow.scale(&self.c[k]));
        }
        debug_assert_eq!(acc.d, self.d * e);
        acc
    }

    pub fn reduce_mod(&self, fp: Fp) -> Vec<u64> {
        self.c.iter().map(|a| fp.reduce_int(a)).collect()
    }
}

/// Point of P^1(Q) in lowest terms: gcd(x, y) = 1 and y > 0, or y = 0, x = 1.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct ProjPoint {
    x: Int,
    y: Int,
}

impl ProjPoint {
    pub fn new(x: Int, y: Int) -> Result<ProjPoint, MapError> {
        if x.is_zero() && y.is_zero() {
            return Err(MapError::InvalidPoint);
        }
        let g = gcd_int(&x, &y);
        let (mut x, mut y) = (x / &g, y / &g);
        let flip = if y.is_zero() { x.is_negative() } else { y.is_negative() };
        if flip {
            x = -x;
            y = -y;
        }
        Ok(ProjPoint { x, y })
    }

    pub fn infinity() -> ProjPoint {
        ProjPoint {
            x: Int::one(),
            y: Int::zero(),
        }
    }

    pub fn from_int(n: i64) -> ProjPoint {
        ProjPoint {
            x: Int::from(n),
            y: Int::one(),
        }
    }

    pub fn from_frac(num: i64, den: i64) -> ProjPoint {
        ProjPoint::new(Int::from(num), Int::from(den)).expect("nonzero fraction")
    }

    pub fn from_rat(r: &Rat) -> ProjPoint {
        ProjPoint {
            x: r.numer().clone(),
            y: r.denom().clone(),
        }
    }

    pub fn is_infinity(&self) -> bool {
        self.y.is_zero()
    }

    pub fn x(&self) -> &Int {
        &self.x
    }

    pub fn y(&self) -> &Int {
        &self.y
    }

    /// Reduction mod p is always defined: x and y are coprime.
    pub fn reduce(&self, fp: Fp) -> PointModP {
        let y = fp.reduce_int(&self.y);
        if y == 0 {
            PointModP::Inf
        } else {
            PointModP::Aff(fp.mul(fp.reduce_int(&self.x), fp.inv(y)))
        }
    }

    /// Larger of the two coordinate bit lengths.
    pub fn bits(&self) -> u64 {
        self.x.bits().max(self.y.bits())
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_infinity() {
            write!(w, "inf")
        } else if self.y.is_one() {
            write!(w, "{}", self.x)
        } else {
            write!(w, "{}/{}", self.x, self.y)
        }
    }
}

impl FromStr for ProjPoint {
    type Err = MapError;

    /// `a`, `a/b`, or `inf`.
    fn from_str(s: &str) -> Result<ProjPoint, MapError> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(ProjPoint::infinity());
        }
        let bad = || MapError::Parse(format!("invalid point {s:?}"));
        match s.split_once('/') {
            None => {
                let x: Int = s.parse().map_err(|_| bad())?;
                Ok(ProjPoint { x, y: Int::one() })
            }
            Some((a, b)) => {
                let x: Int = a.trim().parse().map_err(|_| bad())?;
                let y: Int = b.trim().parse().map_err(|_| bad())?;
                if y.is_zero() {
                    return Err(bad());
                }
                ProjPoint::new(x, y)
            }
        }
    }
}

/// Point of P^1(F_p): affine residue or the point at infinity.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum PointModP {
    Aff(u64),
    Inf,
}

impl PointModP {
    /// Dense code in [0, p]: affine residues first, then infinity at p.
    pub fn code(self, p: u64) -> u64 {
        match self {
            PointModP::Aff(z) => z,
            PointModP::Inf => p,
        }
    }

    pub fn from_code(code: u64, p: u64) -> PointModP {
        if code == p {
            PointModP::Inf
        } else {
            PointModP::Aff(code)
        }
    }
}

impl fmt::Display for PointModP {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PointModP::Aff(z) => write!(w, "{z}"),
            PointModP::Inf => write!(w, "inf"),
        }
    }
}

/// Rational self-map of P^1 of degree d >= 2.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RationalMap {
    f: BinForm,
    g: BinForm,
    d: usize,
    res: Int,
}

impl RationalMap {
    /// Build from dehomogenized components; the common degree is the larger
    /// of the two polynomial degrees.
    pub fn new(f: &ZPoly, g: &ZPoly) -> Result<RationalMap, MapError> {
        if f.is_zero() || g.is_zero() {
            return Err(MapError::ZeroComponent);
        }
        let d = f.degree().unwrap().max(g.degree().unwrap());
        RationalMap::from_forms(BinForm::from_poly(f, d), BinForm::from_poly(g, d))
    }

    /// Build from degree-matched binary forms.
    pub fn from_forms(f: BinForm, g: BinForm) -> Result<RationalMap, MapError> {
        if f.is_zero() || g.is_zero() {
            return Err(MapError::ZeroComponent);
        }
        assert_eq!(f.d, g.d, "component degrees must match");
        let d = f.d;
        if d < 2 {
            return Err(MapError::DegreeTooSmall);
        }
        if d > MAP_DEGREE_CAP {
            return Err(MapError::DegreeCapExceeded(d as u64));
        }
        let (f, g) = normalize_pair(f, g);
        let res = form_resultant(&f, &g);
        if res.is_zero() {
            return Err(MapError::DegenerateMap);
        }
        Ok(RationalMap { f, g, d, res })
    }

    fn from_compose(f: BinForm, g: BinForm, res: Int) -> RationalMap {
        let d = f.d;
        let (f, g) = normalize_pair(f, g);
        RationalMap { f, g, d, res }
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn numerator(&self) -> &BinForm {
        &self.f
    }

    pub fn denominator(&self) -> &BinForm {
        &self.g
    }

    /// Form resultant (up to sign for composed maps); nonzero.
    pub fn resultant(&self) -> &Int {
        &self.res
    }

    pub fn good_reduction(&self, p: u64) -> bool {
        !(&self.res % Int::from(p)).is_zero()
    }

    pub fn reduce(&self, fp: Fp) -> Result<ReducedMap, MapError> {
        if !self.good_reduction(fp.p) {
            return Err(MapError::BadReduction(fp.p));
        }
        Ok(ReducedMap {
            fp,
            f: self.f.reduce_mod(fp),
            g: self.g.reduce_mod(fp),
            d: self.d,
        })
    }

    /// self after other: (self o other)(z) = self(other(z)).
    pub fn compose(&self, other: &RationalMap) -> Result<RationalMap, MapError> {
        let d = self
            .d
            .checked_mul(other.d)
            .filter(|&d| d <= MAP_DEGREE_CAP)
            .ok_or(MapError::DegreeCapExceeded(self.d as u64 * other.d as u64))?;
        let f = self.f.compose_pair(&other.f, &other.g);
        let g = self.g.compose_pair(&other.f, &other.g);
        debug_assert_eq!(f.d, d);
        let res = pow_int(&self.res, other.d as u64)
            * pow_int(&other.res, (self.d * self.d) as u64);
        Ok(RationalMap::from_compose(f, g, res))
    }

    /// m-th iterate, m >= 1, by binary powering of composition.
    pub fn iterate(&self, m: u32) -> Result<RationalMap, MapError> {
        assert!(m >= 1, "iterate count must be positive");
        let mut target: u64 = 1;
        for _ in 0..m {
            target = target.saturating_mul(self.d as u64);
            if target > MAP_DEGREE_CAP as u64 {
                return Err(MapError::DegreeCapExceeded(target));
            }
        }
        let mut acc: Option<RationalMap> = None;
        let mut base = self.clone();
        let mut mm = m;
        while mm > 0 {
            if mm & 1 == 1 {
                acc = Some(match acc {
                    None => base.clone(),
                    Some(a) => base.compose(&a)?,
                });
            }
            mm >>= 1;
            if mm > 0 {
                base = base.compose(&base)?;
            }
        }
        Ok(acc.unwrap())
    }

    pub fn apply(&self, pt: &ProjPoint) -> ProjPoint {
        let fx = self.f.eval(&pt.x, &pt.y);
        let fy = self.g.eval(&pt.x, &pt.y);
        ProjPoint::new(fx, fy).expect("a morphism never maps a point to (0:0)")
    }

    /// Wronskian dF/dX * dG/dY - dF/dY * dG/dX, a form of degree 2d-2.
    pub fn wronskian(&self) -> BinForm {
        self.f.dx().mul(&self.g.dy()).sub(&self.f.dy().mul(&self.g.dx()))
    }
}

fn normalize_pair(f: BinForm, g: BinForm) -> (BinForm, BinForm) {
    let cf = f.dehom().content();
    let cg = g.dehom().content();
    let mut c = gcd_int(&cf, &cg);
    if c.is_zero() {
        c = Int::one();
    }
    let top = f
        .c
        .iter()
        .rev()
        .find(|a| !a.is_zero())
        .expect("nonzero component");
    if top.is_negative() {
        c = -c;
    }
    if c.is_one() {
        return (f, g);
    }
    let d = f.d;
    let div = |form: BinForm| BinForm {
        d,
        c: form.c.iter().map(|a| a / &c).collect(),
    };
    (div(f), div(g))
}

/// Resultant of two binary forms of arbitrary (possibly distinct) degrees,
/// via the affine resultant corrected for vanishing at (1 : 0): with
/// dehomogenizations a, b, if neither form has full affine degree the forms
/// share the root (1 : 0); otherwise peel Y factors with
/// Res(A, Y) = lc(a) and Res(Y, B) = (-1)^(deg B) lc(b).
pub fn form_resultant(f: &BinForm, g: &BinForm) -> Int {
    let fd = f.dehom();
    let gd = g.dehom();
    if fd.is_zero() || gd.is_zero() {
        return Int::zero();
    }
    let f_full = fd.degree() == Some(f.d);
    let g_full = gd.degree() == Some(g.d);
    if !f_full && !g_full {
        return Int::zero();
    }
    if fd.gcd(&gd).degree().unwrap_or(0) > 0 {
        return Int::zero();
    }
    if f_full {
        pow_int(&fd.lc(), (g.d - gd.degree().unwrap()) as u64) * resultant_z(&fd, &gd)
    } else {
        let mut base = gd.lc();
        if g.d % 2 == 1 {
            base = -base;
        }
        pow_int(&base, (f.d - fd.degree().unwrap()) as u64) * resultant_z(&fd, &gd)
    }
}

fn pow_int(base: &Int, e: u64) -> Int {
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

/// A rational map reduced mod p, stored as form coefficients in F_p.
#[derive(Clone, Debug)]
pub struct ReducedMap {
    pub fp: Fp,
    f: Vec<u64>,
    g: Vec<u64>,
    pub d: usize,
}

impl ReducedMap {
    pub fn apply(&self, pt: PointModP) -> PointModP {
        let fp = self.fp;
        let (fx, fy) = match pt {
            PointModP::Aff(z) => (eval_dehom(fp, &self.f, z), eval_dehom(fp, &self.g, z)),
            PointModP::Inf => (self.f[self.d], self.g[self.d]),
        };
        debug_assert!(
            fx != 0 || fy != 0,
            "good reduction rules out (0:0) images"
        );
        if fy == 0 {
            PointModP::Inf
        } else {
            PointModP::Aff(fp.mul(fx, fp.inv(fy)))
        }
    }

    /// Apply on dense point codes in [0, p].
    pub fn apply_code(&self, code: u64) -> u64 {
        self.apply(PointModP::from_code(code, self.fp.p)).code(self.fp.p)
    }

    /// Wronskian coefficients mod p (degree 2d-2 form).
    pub fn wronskian_mod(&self) -> Vec<u64> {
        let fp = self.fp;
        let d = self.d as u64;
        let dx = |c: &[u64]| -> Vec<u64> {
            (1..=self.d).map(|k| fp.mul(c[k], k as u64 % fp.p)).collect()
        };
        let dy = |c: &[u64]| -> Vec<u64> {
            (0..self.d).map(|k| fp.mul(c[k], (d - k as u64) % fp.p)).collect()
        };
        let conv = |a: &[u64], b: &[u64]| -> Vec<u64> {
            let mut out = vec![0u64; a.len() + b.len() - 1];
            for (i, &x) in a.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                for (j, &y) in b.iter().enumerate() {
                    out[i + j] = fp.add(out[i + j], fp.mul(x, y));
                }
            }
            out
        };
        let t1 = conv(&dx(&self.f), &dy(&self.g));
        let t2 = conv(&dy(&self.f), &dx(&self.g));
        t1.iter().zip(&t2).map(|(&a, &b)| fp.sub(a, b)).collect()
    }

    /// Zeros of the Wronskian in P^1(F_p). Requires p > 2d.
    pub fn critical_points(&self) -> Result<Vec<PointModP>, MapError> {
        let p = self.fp.p;
        if p <= 2 * self.d as u64 {
            return Err(MapError::CharTooSmall {
                p,
                need: 2 * self.d as u64,
            });
        }
        let w = self.wronskian_mod();
        let top = *w.last().unwrap();
        let wpoly = FpPoly::new(self.fp, w);
        debug_assert!(
            !wpoly.is_zero(),
            "separable reduction: Wronskian cannot vanish mod p for p > 2d"
        );
        let mut pts: Vec<PointModP> = crate::exact::roots(&wpoly)
            .into_iter()
            .map(PointModP::Aff)
            .collect();
        if top == 0 {
            pts.push(PointModP::Inf);
        }
        Ok(pts)
    }
}

fn eval_dehom(fp: Fp, c: &[u64], z: u64) -> u64 {
    let mut acc = 0u64;
    for &a in c.iter().rev() {
        acc = fp.add(fp.mul(acc, z), a);
    }
    acc
}

impl fmt::Display for RationalMap {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{} : {}", self.f.dehom(), self.g.dehom())
    }
}

impl FromStr for RationalMap {
    type Err = MapError;

    /// `F : G` with integer polynomials in x, optionally wrapped in
    /// brackets; a bare `F` means the polynomial map [F : 1] homogenized
    /// to F's degree.
    fn from_str(s: &str) -> Result<RationalMap, MapError> {
        let s = s.trim();
        let inner = s
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .unwrap_or(s);
        let parse = |t: &str| -> Result<ZPoly, MapError> {
            t.parse()
                .map_err(|e: ParsePolyError| MapError::Parse(e.to_string()))
        };
        match inner.split_once(':') {
            Some((a, b)) => RationalMap::new(&parse(a)?, &parse(b)?),
            None => RationalMap::new(&parse(inner)?, &ZPoly::constant(Int::one())),
        }
    }
}
