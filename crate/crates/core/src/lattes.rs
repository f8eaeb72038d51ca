//! Elliptic curves over Q in short Weierstrass form, division polynomials,
//! the degree-q^2 maps commuting with multiplication by q through the
//! x-coordinate, and order-divisibility prime sweeps.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::exact::{is_prime_u64, prime_range, Fp, Int, Rat, ZPoly};
use crate::proj::{MapError, PointModP, ProjPoint, RationalMap};
use crate::stats::DensityEstimate;

/// Multiplication degrees with the division-polynomial recurrence unrolled.
pub const SUPPORTED_Q: [u32; 4] = [2, 3, 5, 7];

/// Multiples checked by the bounded non-torsion test; rational torsion
/// orders never exceed this.
pub const TORSION_MULTIPLE_BOUND: u32 = 16;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LattesError {
    #[error("curve is singular: 4a^3 + 27b^2 = 0")]
    SingularCurve,
    #[error("point does not satisfy the curve equation")]
    NotOnCurve,
    #[error("unsupported multiplication degree q = {0}")]
    UnsupportedQ(u32),
    #[error("bad reduction at p = {0}")]
    BadReduction(u64),
    #[error("input point is torsion: [{m}]Q is the identity")]
    TorsionInput { m: u32 },
    #[error("point parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// y^2 = x^3 + ax + b with nonzero discriminant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllipticCurve {
    a: Int,
    b: Int,
}

impl EllipticCurve {
    pub fn new(a: Int, b: Int) -> Result<EllipticCurve, LattesError> {
        let e = EllipticCurve { a, b };
        if e.discriminant().is_zero() {
            return Err(LattesError::SingularCurve);
        }
        Ok(e)
    }

    pub fn a(&self) -> &Int {
        &self.a
    }

    pub fn b(&self) -> &Int {
        &self.b
    }

    pub fn discriminant(&self) -> Int {
        let four_a3 = Int::from(4) * &self.a * &self.a * &self.a;
        let twenty_seven_b2 = Int::from(27) * &self.b * &self.b;
        Int::from(-16) * (four_a3 + twenty_seven_b2)
    }

    /// x^3 + ax + b over Q.
    pub fn rhs_at(&self, x: &Rat) -> Rat {
        x * x * x + Rat::from_integer(self.a.clone()) * x + Rat::from_integer(self.b.clone())
    }

    fn rhs_poly(&self) -> ZPoly {
        ZPoly::new(vec![self.b.clone(), self.a.clone(), Int::zero(), Int::one()])
    }
}

impl fmt::Display for EllipticCurve {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(w, "{} {}", self.a, self.b)
    }
}

impl FromStr for EllipticCurve {
    type Err = LattesError;

    /// Two integers `a b`.
    fn from_str(s: &str) -> Result<EllipticCurve, LattesError> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [a, b] = parts[..] else {
            return Err(LattesError::Parse(format!(
                "curve wants two integers, got {s:?}"
            )));
        };
        let a: Int = a
            .parse()
            .map_err(|_| LattesError::Parse(format!("bad curve coefficient {a:?}")))?;
        let b: Int = b
            .parse()
            .map_err(|_| LattesError::Parse(format!("bad curve coefficient {b:?}")))?;
        EllipticCurve::new(a, b)
    }
}

/// Point of E(Q): infinity or validated affine coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ECPoint {
    xy: Option<(Rat, Rat)>,
}

impl ECPoint {
    pub fn infinity() -> ECPoint {
        ECPoint { xy: None }
    }

    pub fn affine(e: &EllipticCurve, x: Rat, y: Rat) -> Result<ECPoint, LattesError> {
        if &y * &y != e.rhs_at(&x) {
            return Err(LattesError::NotOnCurve);
        }
        Ok(ECPoint { xy: Some((x, y)) })
    }

    /// `x y` as rationals, or `inf`.
    pub fn parse(e: &EllipticCurve, s: &str) -> Result<ECPoint, LattesError> {
        let s = s.trim();
        if s == "inf" {
            return Ok(ECPoint::infinity());
        }
        let parts: Vec<&str> = s.split_whitespace().collect();
        let [x, y] = parts[..] else {
            return Err(LattesError::Parse(format!(
                "point wants `x y` or `inf`, got {s:?}"
            )));
        };
        let x: Rat = x
            .parse()
            .map_err(|_| LattesError::Parse(format!("bad coordinate {x:?}")))?;
        let y: Rat = y
            .parse()
            .map_err(|_| LattesError::Parse(format!("bad coordinate {y:?}")))?;
        ECPoint::affine(e, x, y)
    }

    pub fn is_infinity(&self) -> bool {
        self.xy.is_none()
    }

    pub fn x(&self) -> Option<&Rat> {
        self.xy.as_ref().map(|(x, _)| x)
    }

    pub fn y(&self) -> Option<&Rat> {
        self.xy.as_ref().map(|(_, y)| y)
    }

    /// Image under the degree-2 cover x : E -> P^1.
    pub fn x_proj(&self) -> ProjPoint {
        match &self.xy {
            None => ProjPoint::infinity(),
            Some((x, _)) => ProjPoint::from_rat(x),
        }
    }
}

impl fmt::Display for ECPoint {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.xy {
            None => write!(w, "inf"),
            Some((x, y)) => write!(w, "{x} {y}"),
        }
    }
}

pub fn ec_neg(p: &ECPoint) -> ECPoint {
    ECPoint {
        xy: p.xy.as_ref().map(|(x, y)| (x.clone(), -y.clone())),
    }
}

/// Chord-tangent sum.
pub fn ec_add(e: &EllipticCurve, p: &ECPoint, q: &ECPoint) -> ECPoint {
    let Some((x1, y1)) = &p.xy else {
        return q.clone();
    };
    let Some((x2, y2)) = &q.xy else {
        return p.clone();
    };
    let lambda = if x1 == x2 {
        if (y1 + y2).is_zero() {
            return ECPoint::infinity();
        }
        let three_x2 = Rat::from_integer(Int::from(3)) * x1 * x1;
        (three_x2 + Rat::from_integer(e.a.clone())) / (Rat::from_integer(Int::from(2)) * y1)
    } else {
        (y2 - y1) / (x2 - x1)
    };
    let x3 = &lambda * &lambda - x1 - x2;
    let y3 = lambda * (x1 - &x3) - y1;
    ECPoint { xy: Some((x3, y3)) }
}

/// Double-and-add multiplication; negative n through negation.
pub fn ec_mul(e: &EllipticCurve, n: i64, p: &ECPoint) -> ECPoint {
    let (k, base) = if n < 0 {
        (n.unsigned_abs(), ec_neg(p))
    } else {
        (n as u64, p.clone())
    };
    let mut acc = ECPoint::infinity();
    for bit in (0..64 - k.leading_zeros()).rev() {
        acc = ec_add(e, &acc, &acc);
        if k >> bit & 1 == 1 {
            acc = ec_add(e, &acc, &base);
        }
    }
    acc
}

// Division polynomials as f(x) or f(x)*y, with y^2 folded into the curve.
#[derive(Clone, Debug, PartialEq, Eq)]
struct YPoly {
    f: ZPoly,
    has_y: bool,
}

fn ymul(curve: &ZPoly, p: &YPoly, q: &YPoly) -> YPoly {
    let f = p.f.mul(&q.f);
    if p.has_y && q.has_y {
        YPoly {
            f: f.mul(curve),
            has_y: false,
        }
    } else {
        YPoly {
            f,
            has_y: p.has_y != q.has_y,
        }
    }
}

fn ysub(p: &YPoly, q: &YPoly) -> YPoly {
    assert_eq!(p.has_y, q.has_y, "mixed-parity subtraction");
    YPoly {
        f: p.f.sub(&q.f),
        has_y: p.has_y,
    }
}

/// psi_0 .. psi_n; even-index entries carry the factored-out y.
fn division_polynomials(e: &EllipticCurve, n_max: usize) -> Vec<YPoly> {
    let c = e.rhs_poly();
    let a = &e.a;
    let b = &e.b;
    let mut psi = Vec::with_capacity(n_max + 1);
    psi.push(YPoly {
        f: ZPoly::zero(),
        has_y: false,
    });
    psi.push(YPoly {
        f: ZPoly::constant(Int::one()),
        has_y: false,
    });
    if n_max >= 2 {
        psi.push(YPoly {
            f: ZPoly::constant(Int::from(2)),
            has_y: true,
        });
    }
    if n_max >= 3 {
        // 3x^4 + 6ax^2 + 12bx - a^2
        psi.push(YPoly {
            f: ZPoly::new(vec![
                -(a * a),
                Int::from(12) * b,
                Int::from(6) * a,
                Int::zero(),
                Int::from(3),
            ]),
            has_y: false,
        });
    }
    if n_max >= 4 {
        // 4y(x^6 + 5ax^4 + 20bx^3 - 5a^2x^2 - 4abx - 8b^2 - a^3)
        psi.push(YPoly {
            f: ZPoly::new(vec![
                Int::from(-32) * b * b - Int::from(4) * a * a * a,
                Int::from(-16) * a * b,
                Int::from(-20) * a * a,
                Int::from(80) * b,
                Int::from(20) * a,
                Int::zero(),
                Int::from(4),
            ]),
            has_y: true,
        });
    }
    let two_c = c.mul_scalar(&Int::from(2));
    for n in 5..=n_max {
        let m = n / 2;
        let next = if n % 2 == 1 {
            let cube = |p: &YPoly| ymul(&c, p, &ymul(&c, p, p));
            ysub(
                &ymul(&c, &psi[m + 2], &cube(&psi[m])),
                &ymul(&c, &psi[m - 1], &cube(&psi[m + 1])),
            )
        } else {
            let sq = |p: &YPoly| ymul(&c, p, p);
            let rhs = ymul(
                &c,
                &psi[m],
                &ysub(
                    &ymul(&c, &psi[m + 2], &sq(&psi[m - 1])),
                    &ymul(&c, &psi[m - 2], &sq(&psi[m + 1])),
                ),
            );
            assert!(!rhs.has_y, "even-index recurrence parity");
            YPoly {
                f: rhs.f.div_exact(&two_c),
                has_y: true,
            }
        };
        psi.push(next);
    }
    psi
}

/// Degree-q^2 rational map with x([q]P) = map(x(P)).
#[derive(Clone, Debug)]
pub struct LattesMap {
    pub curve: EllipticCurve,
    pub q: u32,
    pub map: RationalMap,
}

pub fn lattes_map(e: &EllipticCurve, q: u32) -> Result<LattesMap, LattesError> {
    if !SUPPORTED_Q.contains(&q) {
        return Err(LattesError::UnsupportedQ(q));
    }
    let (num, den) = if q == 2 {
        duplication_pair(e)
    } else {
        multiplication_pair(e, q)
    };
    let map = RationalMap::new(&num, &den)?;
    debug_assert_eq!(map.degree(), (q * q) as usize);
    Ok(LattesMap {
        curve: e.clone(),
        q,
        map,
    })
}

/// (x^4 - 2ax^2 - 8bx + a^2, 4(x^3 + ax + b)).
fn duplication_pair(e: &EllipticCurve) -> (ZPoly, ZPoly) {
    let a = &e.a;
    let b = &e.b;
    let num = ZPoly::new(vec![
        a * a,
        Int::from(-8) * b,
        Int::from(-2) * a,
        Int::zero(),
        Int::one(),
    ]);
    (num, e.rhs_poly().mul_scalar(&Int::from(4)))
}

/// x - psi_{q-1} psi_{q+1} / psi_q^2 via the division polynomials.
fn multiplication_pair(e: &EllipticCurve, q: u32) -> (ZPoly, ZPoly) {
    let c = e.rhs_poly();
    let psi = division_polynomials(e, q as usize + 1);
    let q = q as usize;
    let den = ymul(&c, &psi[q], &psi[q]);
    let cross = ymul(&c, &psi[q - 1], &psi[q + 1]);
    assert!(!den.has_y && !cross.has_y, "x([q]P) must be y-free");
    let num = ZPoly::x().mul(&den.f).sub(&cross.f);
    (num, den.f)
}

// Rational functions over Q as reduced fractions of integer polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
struct RFrac {
    n: ZPoly,
    d: ZPoly,
}

impl RFrac {
    fn new(n: ZPoly, d: ZPoly) -> RFrac {
        assert!(!d.is_zero(), "zero denominator");
        if n.is_zero() {
            return RFrac {
                n: ZPoly::zero(),
                d: ZPoly::constant(Int::one()),
            };
        }
        let g = n.gcd(&d);
        let mut n = n.div_exact(&g);
        let mut d = d.div_exact(&g);
        if d.lc().is_negative() {
            n = n.neg();
            d = d.neg();
        }
        RFrac { n, d }
    }

    fn from_poly(p: ZPoly) -> RFrac {
        RFrac {
            n: p,
            d: ZPoly::constant(Int::one()),
        }
    }

    fn zero() -> RFrac {
        RFrac::from_poly(ZPoly::zero())
    }

    fn is_zero(&self) -> bool {
        self.n.is_zero()
    }

    fn add(&self, o: &RFrac) -> RFrac {
        RFrac::new(self.n.mul(&o.d).add(&o.n.mul(&self.d)), self.d.mul(&o.d))
    }

    fn sub(&self, o: &RFrac) -> RFrac {
        RFrac::new(self.n.mul(&o.d).sub(&o.n.mul(&self.d)), self.d.mul(&o.d))
    }

    fn mul(&self, o: &RFrac) -> RFrac {
        RFrac::new(self.n.mul(&o.n), self.d.mul(&o.d))
    }

    fn div(&self, o: &RFrac) -> RFrac {
        assert!(!o.is_zero(), "division by zero rational function");
        RFrac::new(self.n.mul(&o.d), self.d.mul(&o.n))
    }
}

// u + v*y in the function field Q(x)[y] / (y^2 - x^3 - ax - b).
#[derive(Clone, Debug, PartialEq, Eq)]
struct FuncElem {
    u: RFrac,
    v: RFrac,
}

impl FuncElem {
    fn from_frac(u: RFrac) -> FuncElem {
        FuncElem {
            u,
            v: RFrac::zero(),
        }
    }

    fn y_unit() -> FuncElem {
        FuncElem {
            u: RFrac::zero(),
            v: RFrac::from_poly(ZPoly::constant(Int::one())),
        }
    }

    fn add(&self, o: &FuncElem) -> FuncElem {
        FuncElem {
            u: self.u.add(&o.u),
            v: self.v.add(&o.v),
        }
    }

    fn sub(&self, o: &FuncElem) -> FuncElem {
        FuncElem {
            u: self.u.sub(&o.u),
            v: self.v.sub(&o.v),
        }
    }

    fn mul(&self, o: &FuncElem, c: &RFrac) -> FuncElem {
        FuncElem {
            u: self.u.mul(&o.u).add(&self.v.mul(&o.v).mul(c)),
            v: self.u.mul(&o.v).add(&self.v.mul(&o.u)),
        }
    }

    fn div(&self, o: &FuncElem, c: &RFrac) -> FuncElem {
        // (u - vy) / (u^2 - v^2 c) inverts u + vy; the norm is nonzero
        // because y^2 - c is irreducible over Q(x) for squarefree cubic c
        let norm = o.u.mul(&o.u).sub(&o.v.mul(&o.v).mul(c));
        assert!(!norm.is_zero(), "inverting zero function-field element");
        let conj = FuncElem {
            u: o.u.div(&norm),
            v: RFrac::zero().sub(&o.v.div(&norm)),
        };
        self.mul(&conj, c)
    }
}

struct FormalPoint {
    x: FuncElem,
    y: FuncElem,
}

fn formal_add(e: &EllipticCurve, c: &RFrac, p: &FormalPoint, q: &FormalPoint) -> FormalPoint {
    let lambda = if p.x == q.x && p.y == q.y {
        let three_x2 = FuncElem::from_frac(
            RFrac::from_poly(ZPoly::constant(Int::from(3))).mul(&p.x.u.mul(&p.x.u)),
        );
        let a_elem = FuncElem::from_frac(RFrac::from_poly(ZPoly::constant(e.a.clone())));
        let two_y = p.y.add(&p.y);
        three_x2.add(&a_elem).div(&two_y, c)
    } else {
        assert!(
            p.x != q.x,
            "formal multiples of a generic point never collide"
        );
        q.y.sub(&p.y).div(&q.x.sub(&p.x), c)
    };
    let x3 = lambda.mul(&lambda, c).sub(&p.x).sub(&q.x);
    let y3 = lambda.mul(&p.x.sub(&x3), c).sub(&p.y);
    FormalPoint { x: x3, y: y3 }
}

/// [k](x, y) with formal coordinates, k >= 1.
fn formal_multiple(e: &EllipticCurve, k: u32) -> FormalPoint {
    assert!(k >= 1);
    let c = RFrac::from_poly(e.rhs_poly());
    let generic = || FormalPoint {
        x: FuncElem::from_frac(RFrac::from_poly(ZPoly::x())),
        y: FuncElem::y_unit(),
    };
    let mut acc: Option<FormalPoint> = None;
    for bit in (0..32 - k.leading_zeros()).rev() {
        if let Some(pt) = acc.take() {
            acc = Some(formal_add(e, &c, &pt, &pt));
        }
        if k >> bit & 1 == 1 {
            acc = Some(match acc.take() {
                Some(pt) => formal_add(e, &c, &pt, &generic()),
                None => generic(),
            });
        }
    }
    acc.expect("k >= 1")
}

#[derive(Clone, Debug)]
pub struct SemiconjugacyReport {
    pub ok: bool,
    /// x([q]P) = map(x(P)) as an identity of rational functions on the
    /// curve, checked coefficientwise after clearing denominators.
    pub symbolic_ok: bool,
    pub rational_trials: u32,
    pub modp_trials: u32,
    pub witnesses: Vec<String>,
}

/// Check x([q]P) = map(x(P)) symbolically and on sampled points: exact
/// rational points first (small multiples of small-height curve points),
/// then random points over F_p once rational samples run out.
pub fn verify_semiconjugacy(lm: &LattesMap, trials: u32) -> SemiconjugacyReport {
    let e = &lm.curve;
    let mut witnesses = Vec::new();

    let formal = formal_multiple(e, lm.q);
    let map_frac = RFrac::new(lm.map.numerator().dehom(), lm.map.denominator().dehom());
    let symbolic_ok = formal.x.v.is_zero() && formal.x.u == map_frac;
    if !symbolic_ok {
        witnesses.push("function-field identity for x([q]P) fails".to_string());
    }

    let mut rational_trials = 0u32;
    let mut seeds = Vec::new();
    for x0 in -12i64..=12 {
        let x0 = Rat::from_integer(Int::from(x0));
        let rhs = e.rhs_at(&x0).to_integer();
        if rhs.is_negative() {
            continue;
        }
        let root = rhs.sqrt();
        if &root * &root == rhs {
            seeds.push(ECPoint {
                xy: Some((x0, Rat::from_integer(root))),
            });
        }
    }
    'sample: for seed in &seeds {
        for k in 1..=6i64 {
            if rational_trials >= trials {
                break 'sample;
            }
            let pt = ec_mul(e, k, seed);
            let Some(x) = pt.x().cloned() else { continue };
            let lhs = ec_mul(e, lm.q as i64, &pt).x_proj();
            let rhs = lm.map.apply(&ProjPoint::from_rat(&x));
            rational_trials += 1;
            if lhs != rhs {
                witnesses.push(format!("rational witness at x = {x}"));
            }
        }
    }

    let mut modp_trials = 0u32;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x1a77e5);
    let pool: Vec<u64> = prime_range(5, 2000)
        .filter(|&p| !(e.discriminant() % Int::from(p)).is_zero() && lm.map.good_reduction(p))
        .collect();
    assert!(!pool.is_empty(), "a curve has good reduction somewhere below 2000");
    let mut reduced: HashMap<u64, crate::proj::ReducedMap> = HashMap::new();
    while rational_trials + modp_trials < trials {
        let p = pool[rng.gen_range(0..pool.len())];
        let fp = Fp::new(p);
        let x = rng.gen_range(0..p);
        let ar = fp.reduce_int(&e.a);
        let br = fp.reduce_int(&e.b);
        let z = fp.add(fp.mul(fp.mul(x, x), x), fp.add(fp.mul(ar, x), br));
        let Some(y) = fp.sqrt(z) else { continue };
        let rm = reduced
            .entry(p)
            .or_insert_with(|| lm.map.reduce(fp).expect("pool primes have good reduction"));
        let lhs = match ec_mul_modp(fp, ar, lm.q as u64, Some((x, y))) {
            None => PointModP::Inf,
            Some((xq, _)) => PointModP::Aff(xq),
        };
        let rhs = rm.apply(PointModP::Aff(x));
        modp_trials += 1;
        if lhs != rhs {
            witnesses.push(format!("mod-{p} witness at x = {x}"));
        }
    }

    SemiconjugacyReport {
        ok: symbolic_ok && witnesses.is_empty(),
        symbolic_ok,
        rational_trials,
        modp_trials,
        witnesses,
    }
}

fn ec_add_modp(
    fp: Fp,
    a: u64,
    p1: Option<(u64, u64)>,
    p2: Option<(u64, u64)>,
) -> Option<(u64, u64)> {
    let Some((x1, y1)) = p1 else {
        return p2;
    };
    let Some((x2, y2)) = p2 else {
        return p1;
    };
    let lambda = if x1 == x2 {
        if fp.add(y1, y2) == 0 {
            return None;
        }
        fp.mul(
            fp.add(fp.mul(3 % fp.p, fp.mul(x1, x1)), a),
            fp.inv(fp.mul(2 % fp.p, y1)),
        )
    } else {
        fp.mul(fp.sub(y2, y1), fp.inv(fp.sub(x2, x1)))
    };
    let x3 = fp.sub(fp.sub(fp.mul(lambda, lambda), x1), x2);
    let y3 = fp.sub(fp.mul(lambda, fp.sub(x1, x3)), y1);
    Some((x3, y3))
}

fn ec_mul_modp(fp: Fp, a: u64, n: u64, pt: Option<(u64, u64)>) -> Option<(u64, u64)> {
    let mut acc = None;
    for k in (0..64 - n.leading_zeros()).rev() {
        acc = ec_add_modp(fp, a, acc, acc);
        if n >> k & 1 == 1 {
            acc = ec_add_modp(fp, a, acc, pt);
        }
    }
    acc
}

/// Reduce an exact point mod p; affine coordinates must be p-integral.
fn reduce_point(q: &ECPoint, fp: Fp) -> Result<Option<(u64, u64)>, LattesError> {
    let Some((x, y)) = &q.xy else {
        return Ok(None);
    };
    let p_int = Int::from(fp.p);
    if (x.denom() % &p_int).is_zero() || (y.denom() % &p_int).is_zero() {
        return Err(LattesError::BadReduction(fp.p));
    }
    let xr = fp.mul(fp.reduce_int(x.numer()), fp.inv(fp.reduce_int(x.denom())));
    let yr = fp.mul(fp.reduce_int(y.numer()), fp.inv(fp.reduce_int(y.denom())));
    Ok(Some((xr, yr)))
}

/// Exact order of Q mod p: find an annihilating multiple inside the Hasse
/// window by baby-step giant-step, then strip prime factors.
pub fn point_order_modp(e: &EllipticCurve, q: &ECPoint, p: u64) -> Result<u64, LattesError> {
    if p <= 3 || (e.discriminant() % Int::from(p)).is_zero() {
        return Err(LattesError::BadReduction(p));
    }
    let fp = Fp::new(p);
    let Some(pt) = reduce_point(q, fp)? else {
        return Ok(1);
    };
    let a = fp.reduce_int(&e.a);
    let spread = 2 * p.isqrt() + 2;
    let lo_w = (p + 1).saturating_sub(spread).max(1);
    let window = p + 1 + spread - lo_w + 1;
    let m = window.isqrt() + 1;

    let mut annihilator = None;
    let mut table: HashMap<(u64, u64), u64> = HashMap::with_capacity(m as usize);
    let mut cur = ec_mul_modp(fp, a, lo_w, Some(pt));
    for j in 0..m {
        match cur {
            None => {
                annihilator = Some(lo_w + j);
                break;
            }
            Some(xy) => {
                table.entry(xy).or_insert(j);
            }
        }
        cur = ec_add_modp(fp, a, cur, Some(pt));
    }
    if annihilator.is_none() {
        let giant = ec_mul_modp(fp, a, m, Some(pt));
        let mut gi = giant;
        for i in 1..=window / m + 1 {
            match gi {
                None => {
                    annihilator = Some(i * m);
                    break;
                }
                Some((gx, gy)) => {
                    if let Some(&j) = table.get(&(gx, fp.neg(gy))) {
                        annihilator = Some(lo_w + j + i * m);
                        break;
                    }
                }
            }
            gi = ec_add_modp(fp, a, gi, giant);
        }
    }
    let ann = annihilator.expect("the group order lies in the scanned window");
    debug_assert_eq!(ec_mul_modp(fp, a, ann, Some(pt)), None);

    let mut ord = ann;
    let mut rest = ann;
    let mut factor = 2u64;
    while factor * factor <= rest {
        if rest % factor == 0 {
            while rest % factor == 0 {
                rest /= factor;
            }
            while ord % factor == 0 && ec_mul_modp(fp, a, ord / factor, Some(pt)).is_none() {
                ord /= factor;
            }
        }
        factor += 1;
    }
    if rest > 1 {
        while ord % rest == 0 && ec_mul_modp(fp, a, ord / rest, Some(pt)).is_none() {
            ord /= rest;
        }
    }
    Ok(ord)
}

/// Density of good-reduction primes in [lo, hi) whose reduced point order
/// is divisible by q^n. Rejects torsion inputs.
pub fn order_divisibility_sweep(
    e: &EllipticCurve,
    q_pt: &ECPoint,
    q: u32,
    n: u32,
    lo: u64,
    hi: u64,
) -> Result<DensityEstimate, LattesError> {
    assert!(is_prime_u64(q as u64), "q must be prime");
    if q_pt.is_infinity() {
        return Err(LattesError::TorsionInput { m: 1 });
    }
    for m in 1..=TORSION_MULTIPLE_BOUND {
        if ec_mul(e, m as i64, q_pt).is_infinity() {
            return Err(LattesError::TorsionInput { m });
        }
    }
    let target = (q as u64).checked_pow(n);
    let primes: Vec<u64> = prime_range(lo, hi).collect();
    Ok(primes
        .par_iter()
        .map(|&p| {
            let mut d = DensityEstimate::default();
            if let Ok(ord) = point_order_modp(e, q_pt, p) {
                d.record(target.map_or(false, |t| ord % t == 0));
            }
            d
        })
        .reduce(DensityEstimate::default, |mut a, b| {
            a.merge(b);
            a
        }))
}
