//! Orbit–subvariety incidence for split coordinatewise systems on (P^1)^g,
//! arithmetic-progression covers of the incidence set, and p-adic
//! certificates that the progression structure is forced.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::exact::{Fp, Int};
use crate::orbit::{orbit_shape, q_periodicity, OrbitShape};
use crate::proj::{MapError, PointModP, ProjPoint, RationalMap, ReducedMap};

/// Abort exact orbit scans when a coordinate passes one million decimal
/// digits (in bits).
pub const HEIGHT_BIT_CAP: u64 = 3_321_929;

#[derive(Debug, thiserror::Error)]
pub enum DmlError {
    #[error("system needs g >= 1 with one start per map (got {maps} maps, {starts} starts)")]
    BadSystemShape { maps: usize, starts: usize },
    #[error("coordinate {coord} height passed the exact-arithmetic cap at index {at}")]
    HeightOverflow {
        coord: usize,
        at: u64,
        partial: Vec<u64>,
    },
    #[error("no (period <= N/4, onset <= N/2) pair fits the index set")]
    FitFailure { raw: Vec<u64> },
    #[error("no eligible prime up to {0} certifies the system")]
    NoCertificateFound(u64),
    #[error("start coordinate {coord} is preperiodic")]
    PreperiodicStart { coord: usize },
    #[error("cycle data for coordinate {coord} failed verification: {reason}")]
    InvalidCycleData { coord: usize, reason: String },
    #[error("subvariety parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Coordinatewise system Φ = (φ_1, …, φ_g) with a start point per factor.
#[derive(Clone, Debug)]
pub struct SplitSystem {
    pub maps: Vec<RationalMap>,
    pub start: Vec<ProjPoint>,
}

impl SplitSystem {
    pub fn new(maps: Vec<RationalMap>, start: Vec<ProjPoint>) -> Result<SplitSystem, DmlError> {
        if maps.is_empty() || maps.len() != start.len() {
            return Err(DmlError::BadSystemShape {
                maps: maps.len(),
                starts: start.len(),
            });
        }
        Ok(SplitSystem { maps, start })
    }

    pub fn g(&self) -> usize {
        self.maps.len()
    }
}

/// Integer form homogeneous in each coordinate pair (X_i : Y_i) separately.
/// A term maps the X-exponent vector e to its coefficient; the Y-exponent
/// in pair i is degs[i] - e[i].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiForm {
    pub degs: Vec<u32>,
    terms: Vec<(Vec<u32>, Int)>,
}

impl MultiForm {
    pub fn terms(&self) -> &[(Vec<u32>, Int)] {
        &self.terms
    }

    pub fn eval(&self, pts: &[ProjPoint]) -> Int {
        assert_eq!(pts.len(), self.degs.len());
        let mut xpow: Vec<Vec<Int>> = Vec::with_capacity(pts.len());
        let mut ypow: Vec<Vec<Int>> = Vec::with_capacity(pts.len());
        for (i, pt) in pts.iter().enumerate() {
            let d = self.degs[i] as usize;
            let mut xs = Vec::with_capacity(d + 1);
            let mut ys = Vec::with_capacity(d + 1);
            xs.push(Int::one());
            ys.push(Int::one());
            for k in 1..=d {
                xs.push(&xs[k - 1] * pt.x());
                ys.push(&ys[k - 1] * pt.y());
            }
            xpow.push(xs);
            ypow.push(ys);
        }
        let mut acc = Int::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (i, &e) in exps.iter().enumerate() {
                let d = self.degs[i];
                term = term * &xpow[i][e as usize] * &ypow[i][(d - e) as usize];
            }
            acc += term;
        }
        acc
    }
}

impl fmt::Display for MultiForm {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (t, (exps, coeff)) in self.terms.iter().enumerate() {
            let mag = coeff.abs();
            if t == 0 {
                if coeff.is_negative() {
                    write!(w, "-")?;
                }
            } else if coeff.is_negative() {
                write!(w, " - ")?;
            } else {
                write!(w, " + ")?;
            }
            let mut factors = Vec::new();
            for (i, &e) in exps.iter().enumerate() {
                if e > 0 {
                    factors.push(if e == 1 {
                        format!("X{}", i + 1)
                    } else {
                        format!("X{}^{e}", i + 1)
                    });
                }
            }
            for (i, &e) in exps.iter().enumerate() {
                let f = self.degs[i] - e;
                if f > 0 {
                    factors.push(if f == 1 {
                        format!("Y{}", i + 1)
                    } else {
                        format!("Y{}^{f}", i + 1)
                    });
                }
            }
            if factors.is_empty() {
                write!(w, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(w, "{mag}*")?;
                }
                write!(w, "{}", factors.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Closed subvariety of (P^1)^g cut out by multihomogeneous equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subvariety {
    pub g: usize,
    pub equations: Vec<MultiForm>,
}

impl Subvariety {
    /// One equation per non-blank line, in variables X1, Y1, …, Xg, Yg
    /// (bare X, Y allowed when g = 1); `*` between factors is optional.
    pub fn parse(text: &str, g: usize) -> Result<Subvariety, DmlError> {
        let mut equations = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            equations.push(parse_equation(line, g)?);
        }
        if equations.is_empty() {
            return Err(DmlError::Parse("no equations given".into()));
        }
        Ok(Subvariety { g, equations })
    }

    pub fn contains(&self, pts: &[ProjPoint]) -> bool {
        self.equations.iter().all(|eq| eq.eval(pts).is_zero())
    }
}

impl fmt::Display for Subvariety {
    fn fmt(&self, w: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, eq) in self.equations.iter().enumerate() {
            if i > 0 {
                writeln!(w)?;
            }
            write!(w, "{eq}")?;
        }
        Ok(())
    }
}

fn parse_equation(line: &str, g: usize) -> Result<MultiForm, DmlError> {
    let err = |msg: String| DmlError::Parse(format!("{msg} in {line:?}"));
    #[derive(Debug, PartialEq)]
    enum Tok {
        Num(Int),
        Var { pair: usize, is_x: bool, exp: u32 },
        Plus,
        Minus,
    }
    let mut toks = Vec::new();
    let chars: Vec<char> = line.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() || c == '*' {
            i += 1;
        } else if c == '+' {
            toks.push(Tok::Plus);
            i += 1;
        } else if c == '-' || c == '\u{2212}' {
            toks.push(Tok::Minus);
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            toks.push(Tok::Num(text.parse().expect("digit run")));
        } else if c == 'X' || c == 'x' || c == 'Y' || c == 'y' {
            let is_x = c == 'X' || c == 'x';
            i += 1;
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let pair = if start == i {
                if g == 1 {
                    1
                } else {
                    return Err(err(format!("bare {c} needs an index when g > 1")));
                }
            } else {
                chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse::<usize>()
                    .map_err(|_| err("bad variable index".into()))?
            };
            if pair == 0 || pair > g {
                return Err(err(format!("variable index {pair} out of range 1..={g}")));
            }
            let mut exp = 1u32;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if start == i {
                    return Err(err("missing exponent after ^".into()));
                }
                exp = chars[start..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| err("bad exponent".into()))?;
            }
            toks.push(Tok::Var {
                pair: pair - 1,
                is_x,
                exp,
            });
        } else {
            return Err(err(format!("unexpected character {c:?}")));
        }
    }
    // terms as (x-exponents, y-exponents, coefficient)
    let mut raw_terms: Vec<(Vec<u32>, Vec<u32>, Int)> = Vec::new();
    let mut cur: Option<(Vec<u32>, Vec<u32>, Int)> = None;
    let mut sign = Int::one();
    let mut pending_sign = false;
    for tok in toks {
        match tok {
            Tok::Plus | Tok::Minus => {
                if let Some(t) = cur.take() {
                    raw_terms.push(t);
                } else if pending_sign {
                    return Err(err("dangling sign".into()));
                }
                sign = if matches!(tok, Tok::Minus) {
                    -Int::one()
                } else {
                    Int::one()
                };
                pending_sign = true;
            }
            Tok::Num(n) => {
                let t = cur.get_or_insert((vec![0; g], vec![0; g], sign.clone()));
                t.2 *= n;
                pending_sign = false;
            }
            Tok::Var { pair, is_x, exp } => {
                let t = cur.get_or_insert((vec![0; g], vec![0; g], sign.clone()));
                if is_x {
                    t.0[pair] += exp;
                } else {
                    t.1[pair] += exp;
                }
                pending_sign = false;
            }
        }
    }
    match cur {
        Some(t) => raw_terms.push(t),
        None => return Err(err("empty equation".into())),
    }
    let degs: Vec<u32> = (0..g)
        .map(|i| raw_terms[0].0[i] + raw_terms[0].1[i])
        .collect();
    for (xs, ys, _) in &raw_terms {
        for i in 0..g {
            if xs[i] + ys[i] != degs[i] {
                return Err(err(format!(
                    "not homogeneous in pair {} (degree {} vs {})",
                    i + 1,
                    xs[i] + ys[i],
                    degs[i]
                )));
            }
        }
    }
    let mut terms: Vec<(Vec<u32>, Int)> = Vec::new();
    for (xs, _, coeff) in raw_terms {
        match terms.iter_mut().find(|(e, _)| *e == xs) {
            Some((_, c)) => *c += coeff,
            None => terms.push((xs, coeff)),
        }
    }
    terms.retain(|(_, c)| !c.is_zero());
    terms.sort_by(|(a, _), (b, _)| b.cmp(a));
    if terms.is_empty() {
        return Err(err("equation is identically zero".into()));
    }
    Ok(MultiForm { degs, terms })
}

/// Indices n ∈ [0, N] with Φ^n(x) ∈ V, by exact orbit walking. A coordinate
/// passing the height cap aborts the scan with the indices found so far.
pub fn orbit_membership_scan(
    sys: &SplitSystem,
    v: &Subvariety,
    n_max: u64,
) -> Result<Vec<u64>, DmlError> {
    assert_eq!(v.g, sys.g(), "subvariety arity must match the system");
    let mut hits = Vec::new();
    let mut cur = sys.start.clone();
    for n in 0..=n_max {
        for (coord, pt) in cur.iter().enumerate() {
            if pt.bits() > HEIGHT_BIT_CAP {
                return Err(DmlError::HeightOverflow {
                    coord,
                    at: n,
                    partial: hits,
                });
            }
        }
        if v.contains(&cur) {
            hits.push(n);
        }
        if n < n_max {
            cur = cur
                .iter()
                .zip(&sys.maps)
                .map(|(pt, map)| map.apply(pt))
                .collect();
        }
    }
    Ok(hits)
}

/// Eventually periodic description of an index set on [0, N]: exceptional
/// indices below the onset M, then a union of arithmetic progressions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProgressionCover {
    pub horizon: u64,
    pub onset: u64,
    /// (period k, first index ℓ ≥ onset), sorted by ℓ.
    pub progressions: Vec<(u64, u64)>,
    pub exceptional: Vec<u64>,
}

impl ProgressionCover {
    pub fn covers(&self, n: u64) -> bool {
        if n < self.onset {
            return self.exceptional.contains(&n);
        }
        self.progressions
            .iter()
            .any(|&(k, l)| n >= l && (n - l) % k == 0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&serde_json::json!({
            "M": self.onset,
            "exceptional": self.exceptional,
            "progressions": self.progressions,
        }))
        .expect("plain json")
    }
}

/// Fit the smallest period k ≤ N/4, then the smallest onset M ≤ N/2, such
/// that membership is exactly k-periodic on [M, N].
pub fn fit_progressions(s: &[u64], n_max: u64) -> Result<ProgressionCover, DmlError> {
    assert!(s.iter().all(|&n| n <= n_max), "indices must lie in [0, N]");
    let size = (n_max + 1) as usize;
    let mut ind = vec![false; size];
    for &n in s {
        ind[n as usize] = true;
    }
    for k in 1..=n_max / 4 {
        // smallest M with no violation of ind[n] = ind[n+k] on [M, N-k]
        let mut onset = 0u64;
        for n in (0..=n_max - k).rev() {
            if ind[n as usize] != ind[(n + k) as usize] {
                onset = n + 1;
                break;
            }
        }
        if onset > n_max / 2 {
            continue;
        }
        let mut progressions = Vec::new();
        for r in 0..k {
            let first = onset + (r + k - onset % k) % k;
            if first <= n_max && ind[first as usize] {
                progressions.push((k, first));
            }
        }
        progressions.sort_by_key(|&(_, l)| l);
        let mut exceptional: Vec<u64> = s.iter().copied().filter(|&n| n < onset).collect();
        exceptional.sort_unstable();
        exceptional.dedup();
        return Ok(ProgressionCover {
            horizon: n_max,
            onset,
            progressions,
            exceptional,
        });
    }
    Err(DmlError::FitFailure { raw: s.to_vec() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateMode {
    /// The full orbit mod p avoids every critical point (the stronger
    /// condition actually verified in the source argument).
    Strict,
    /// The orbit avoids only cycles containing a critical point, the
    /// attracting cycles of the reduction.
    AttractingOnly,
}

/// Per-coordinate avoidance evidence at the certified prime.
#[derive(Clone, Debug)]
pub struct CoordCertificate {
    pub shape: OrbitShape,
    /// Forbidden points the orbit was checked against.
    pub avoided: Vec<PointModP>,
}

#[derive(Clone, Debug)]
pub struct PadicCertificate {
    pub p: u64,
    pub mode: CertificateMode,
    pub coords: Vec<CoordCertificate>,
}

/// Visit order of the full finite forward orbit of a point mod p.
fn full_orbit_modp(rm: &ReducedMap, start: PointModP) -> Vec<PointModP> {
    let shape = orbit_shape(rm, start);
    let mut out = Vec::with_capacity((shape.tail + shape.period) as usize);
    let mut cur = start;
    for _ in 0..shape.tail + shape.period {
        out.push(cur);
        cur = rm.apply(cur);
    }
    out
}

/// Smallest prime p ≤ pmax certifying orbit/critical avoidance for every
/// coordinate under the strict condition.
pub fn find_padic_certificate(
    sys: &SplitSystem,
    pmax: u64,
) -> Result<PadicCertificate, DmlError> {
    find_padic_certificate_mode(sys, pmax, CertificateMode::Strict)
}

pub fn find_padic_certificate_mode(
    sys: &SplitSystem,
    pmax: u64,
    mode: CertificateMode,
) -> Result<PadicCertificate, DmlError> {
    for (coord, (map, start)) in sys.maps.iter().zip(&sys.start).enumerate() {
        let status = q_periodicity(map, start);
        if status.is_periodic() || status.is_preperiodic() {
            return Err(DmlError::PreperiodicStart { coord });
        }
    }
    let need: u64 = sys.maps.iter().map(|m| 2 * m.degree() as u64 + 1).max().unwrap();
    for p in crate::exact::prime_range(2, pmax + 1) {
        if p <= need || sys.maps.iter().any(|m| !m.good_reduction(p)) {
            continue;
        }
        if let Some(cert) = try_certificate(sys, p, mode) {
            return Ok(cert);
        }
    }
    Err(DmlError::NoCertificateFound(pmax))
}

fn try_certificate(sys: &SplitSystem, p: u64, mode: CertificateMode) -> Option<PadicCertificate> {
    let fp = Fp::new(p);
    let mut coords = Vec::with_capacity(sys.g());
    for (map, start) in sys.maps.iter().zip(&sys.start) {
        let rm = map.reduce(fp).expect("good reduction checked by caller");
        let critical = rm.critical_points().expect("p > 2d by eligibility");
        let forbidden: Vec<PointModP> = match mode {
            CertificateMode::Strict => critical,
            CertificateMode::AttractingOnly => {
                let mut cycle_points = Vec::new();
                for &c in &critical {
                    let shape = orbit_shape(&rm, c);
                    if shape.tail == 0 {
                        let mut cur = c;
                        for _ in 0..shape.period {
                            cycle_points.push(cur);
                            cur = rm.apply(cur);
                        }
                    }
                }
                cycle_points.sort_by_key(|pt| pt.code(p));
                cycle_points.dedup();
                cycle_points
            }
        };
        let forbidden_set: HashSet<PointModP> = forbidden.iter().copied().collect();
        let start_p = start.reduce(fp);
        let orbit = full_orbit_modp(&rm, start_p);
        if orbit.iter().any(|pt| forbidden_set.contains(pt)) {
            return None;
        }
        coords.push(CoordCertificate {
            shape: orbit_shape(&rm, start_p),
            avoided: forbidden,
        });
    }
    Some(PadicCertificate { p, mode, coords })
}

/// System with every map replaced by φ_i^b and every start by φ_i^a(x_i),
/// turning supplied periodic landings into fixed points. Scan index n of
/// the transformed system corresponds to index b·n + a of the original.
#[derive(Clone, Debug)]
pub struct NormalizedSystem {
    pub system: SplitSystem,
    pub step_a: u32,
    pub step_b: u32,
}

impl NormalizedSystem {
    pub fn original_index(&self, n: u64) -> u64 {
        self.step_b as u64 * n + self.step_a as u64
    }
}

/// Verify the supplied (a, b) cycle data per flagged coordinate: φ_i^a(x_i)
/// must lie on a cycle of exact length b. The transformed system uses the
/// global a = max a_i and b = lcm b_i so one index map serves all
/// coordinates.
pub fn fixed_point_normalize(
    sys: &SplitSystem,
    cycle_data: &[Option<(u32, u32)>],
) -> Result<NormalizedSystem, DmlError> {
    assert_eq!(cycle_data.len(), sys.g(), "one entry per coordinate");
    let mut a_glob: u32 = 0;
    let mut b_glob: u64 = 1;
    for (coord, (data, (map, start))) in cycle_data
        .iter()
        .zip(sys.maps.iter().zip(&sys.start))
        .enumerate()
    {
        let Some((a, b)) = *data else { continue };
        if b == 0 {
            return Err(DmlError::InvalidCycleData {
                coord,
                reason: "cycle length must be positive".into(),
            });
        }
        let mut landing = start.clone();
        for _ in 0..a {
            landing = map.apply(&landing);
        }
        let mut cur = landing.clone();
        for step in 1..=b {
            cur = map.apply(&cur);
            if cur == landing {
                if step < b {
                    return Err(DmlError::InvalidCycleData {
                        coord,
                        reason: format!("cycle length is {step}, not {b}"),
                    });
                }
                break;
            }
            if step == b {
                return Err(DmlError::InvalidCycleData {
                    coord,
                    reason: format!("phi^{a}(start) does not return after {b} steps"),
                });
            }
        }
        a_glob = a_glob.max(a);
        b_glob = num_integer::lcm(b_glob, b as u64);
    }
    let b_glob: u32 = b_glob
        .try_into()
        .map_err(|_| DmlError::InvalidCycleData {
            coord: 0,
            reason: "combined cycle length overflows".into(),
        })?;
    let mut maps = Vec::with_capacity(sys.g());
    let mut start = Vec::with_capacity(sys.g());
    for (map, s) in sys.maps.iter().zip(&sys.start) {
        maps.push(if b_glob == 1 {
            map.clone()
        } else {
            map.iterate(b_glob)?
        });
        let mut landed = s.clone();
        for _ in 0..a_glob {
            landed = map.apply(&landed);
        }
        start.push(landed);
    }
    Ok(NormalizedSystem {
        system: SplitSystem::new(maps, start).expect("same shape as input"),
        step_a: a_glob,
        step_b: b_glob,
    })
}
