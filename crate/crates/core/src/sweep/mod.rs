//! Iterate polynomials, root counting mod p, derangement sweeps over prime
//! ranges, and the independence diagnostic.
//!
//! For a map φ = [F : G] of degree d, a target α = (a : b), and a level m,
//! the iterate polynomial f = b·F_m(x,1) − a·G_m(x,1) (content 1) has as its
//! roots mod p exactly the affine points of φ^{−m}(α) in F_p, for any p of
//! good reduction avoiding the finitely many divisors of
//! disc(squarefree part of f) · Res(F,G) · lead(f). Preimages at infinity
//! are covered by a separate homogeneous check at (1 : 0).

pub mod runner;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::exact::{distinct_root_count, resultant_z, Fp, Int, ZPoly};
use crate::orbit::q_periodicity;
use crate::proj::{MapError, ProjPoint, RationalMap};
use crate::stats::DensityEstimate;

pub use runner::{RunOutput, SweepRunner};

#[derive(Debug, thiserror::Error)]
pub enum SweepError {
    #[error("system has no targets")]
    EmptySystem,
    #[error("target {target} of map {entry} is periodic over Q")]
    PeriodicTarget { entry: usize, target: usize },
    #[error("prime {0} is ineligible for this target")]
    BadPrime(u64),
    #[error("need at least 2 targets and 100 eligible primes, got {targets} and {eligible}")]
    InsufficientData { targets: usize, eligible: u64 },
    #[error(transparent)]
    Map(#[from] MapError),
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
}

/// φ^m(x) = α turned into a one-variable root-counting problem.
#[derive(Clone, Debug)]
pub struct IteratePoly {
    pub map: RationalMap,
    pub alpha: ProjPoint,
    pub m: u32,
    /// b·F_m(x,1) − a·G_m(x,1), content 1.
    pub f: ZPoly,
    /// Product of the primes to exclude (as divisors).
    pub bad: Int,
    /// b·F_m(1,0) − a·G_m(1,0); p divides this iff ∞ ∈ φ^{−m}(α) mod p.
    cross: Int,
}

/// f, its exclusion product, and the infinity crossing for (map, alpha, m).
pub fn build_iterate_poly(
    map: &RationalMap,
    alpha: &ProjPoint,
    m: u32,
) -> Result<IteratePoly, SweepError> {
    let it = map.iterate(m)?;
    let a = alpha.x();
    let b = alpha.y();
    let fm = it.numerator().dehom();
    let gm = it.denominator().dehom();
    let f = fm.mul_scalar(b).sub(&gm.mul_scalar(a));
    debug_assert!(!f.is_zero(), "a morphism iterate is never constant");
    let (_, f) = f.primitive();
    let cross = it.numerator().at_infinity() * b - it.denominator().at_infinity() * a;
    let sf = f.squarefree_part();
    let disc_part = if sf.degree().unwrap_or(0) >= 1 {
        resultant_z(&sf, &sf.derivative())
    } else {
        Int::one()
    };
    debug_assert!(!disc_part.is_zero(), "squarefree part has unit discriminant factor");
    let bad = disc_part * map.resultant() * f.lc();
    Ok(IteratePoly {
        map: map.clone(),
        alpha: alpha.clone(),
        m,
        f,
        bad: bad.abs(),
        cross,
    })
}

impl IteratePoly {
    pub fn is_bad_prime(&self, p: u64) -> bool {
        p <= self.map.degree() as u64 || (&self.bad % Int::from(p)).is_zero()
    }

    /// Whether ∞ is an m-step preimage of alpha mod p.
    pub fn infinity_hit(&self, p: u64) -> bool {
        (&self.cross % Int::from(p)).is_zero()
    }

    /// Distinct roots of f mod p plus the infinity flag.
    pub fn root_count_modp(&self, p: u64) -> Result<(u64, bool), SweepError> {
        if self.is_bad_prime(p) {
            return Err(SweepError::BadPrime(p));
        }
        Ok(self.root_count_unchecked(Fp::new(p)))
    }

    fn root_count_unchecked(&self, fp: Fp) -> (u64, bool) {
        let fmod = self.f.reduce_mod(fp);
        let count = if fmod.degree().unwrap_or(0) == 0 {
            0
        } else {
            distinct_root_count(&fmod) as u64
        };
        (count, self.infinity_hit(fp.p))
    }
}

/// Maps with their target lists and a common iterate level.
#[derive(Clone, Debug)]
pub struct TargetSystem {
    entries: Vec<(RationalMap, Vec<ProjPoint>)>,
    m: u32,
    polys: Vec<Vec<IteratePoly>>,
    max_degree: u64,
}

impl TargetSystem {
    /// Validates shape, the degree cap, and non-periodicity of every target.
    pub fn new(
        entries: Vec<(RationalMap, Vec<ProjPoint>)>,
        m: u32,
    ) -> Result<TargetSystem, SweepError> {
        if entries.is_empty() || entries.iter().any(|(_, ts)| ts.is_empty()) {
            return Err(SweepError::EmptySystem);
        }
        let mut polys = Vec::with_capacity(entries.len());
        for (i, (map, targets)) in entries.iter().enumerate() {
            let mut row = Vec::with_capacity(targets.len());
            for (j, t) in targets.iter().enumerate() {
                if q_periodicity(map, t).is_periodic() {
                    return Err(SweepError::PeriodicTarget { entry: i, target: j });
                }
                row.push(build_iterate_poly(map, t, m)?);
            }
            polys.push(row);
        }
        let max_degree = entries.iter().map(|(m, _)| m.degree() as u64).max().unwrap();
        Ok(TargetSystem {
            entries,
            m,
            polys,
            max_degree,
        })
    }

    pub fn level(&self) -> u32 {
        self.m
    }

    pub fn entries(&self) -> &[(RationalMap, Vec<ProjPoint>)] {
        &self.entries
    }

    pub fn polys(&self) -> &[Vec<IteratePoly>] {
        &self.polys
    }

    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }

    pub fn target_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Column labels "i.j" in sweep order.
    pub fn labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        for (i, (_, ts)) in self.entries.iter().enumerate() {
            for j in 0..ts.len() {
                out.push(format!("{i}.{j}"));
            }
        }
        out
    }

    pub fn eligible(&self, p: u64) -> bool {
        p > self.max_degree
            && self
                .polys
                .iter()
                .flatten()
                .all(|ip| !(&ip.bad % Int::from(p)).is_zero())
    }

    /// Record for one eligible prime; None if p is ineligible.
    pub fn prime_record(&self, p: u64) -> Option<SweepRecord> {
        if !self.eligible(p) {
            return None;
        }
        let fp = Fp::new(p);
        let mut root_counts = Vec::with_capacity(self.polys.len());
        let mut inf_hits = Vec::with_capacity(self.polys.len());
        let mut derangement = true;
        for row in &self.polys {
            let mut counts = Vec::with_capacity(row.len());
            let mut infs = Vec::with_capacity(row.len());
            for ip in row {
                let (count, inf) = ip.root_count_unchecked(fp);
                derangement &= count == 0 && !inf;
                counts.push(count);
                infs.push(inf);
            }
            root_counts.push(counts);
            inf_hits.push(infs);
        }
        Some(SweepRecord {
            p,
            root_counts,
            inf_hits,
            derangement,
        })
    }

    /// Stable identity of the computation, for cache keys and manifests.
    pub fn description(&self) -> String {
        use std::fmt::Write;
        let mut s = format!("m={}", self.m);
        for (map, targets) in &self.entries {
            write!(s, "|{map}=").unwrap();
            for (j, t) in targets.iter().enumerate() {
                if j > 0 {
                    s.push(',');
                }
                write!(s, "{t}").unwrap();
            }
        }
        s
    }

    pub fn hash_hex(&self) -> String {
        let digest = Sha256::digest(self.description().as_bytes());
        let mut s = String::with_capacity(64);
        for b in digest {
            use std::fmt::Write;
            write!(s, "{b:02x}").unwrap();
        }
        s
    }
}

/// Root counts of every (map, target) pair at one prime.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub p: u64,
    pub root_counts: Vec<Vec<u64>>,
    pub inf_hits: Vec<Vec<bool>>,
    pub derangement: bool,
}

impl SweepRecord {
    pub fn infinity_hit(&self) -> bool {
        self.inf_hits.iter().flatten().any(|&b| b)
    }

    /// Per-target no-preimage indicators, flattened in label order.
    pub fn misses(&self) -> Vec<bool> {
        self.root_counts
            .iter()
            .flatten()
            .zip(self.inf_hits.iter().flatten())
            .map(|(&c, &inf)| c == 0 && !inf)
            .collect()
    }
}

/// Sequential sweep over [lo, hi): all eligible primes, ascending.
pub fn sweep(sys: &TargetSystem, lo: u64, hi: u64) -> (Vec<SweepRecord>, DensityEstimate) {
    let mut records = Vec::new();
    let mut est = DensityEstimate::default();
    for p in crate::exact::prime_range(lo, hi) {
        if let Some(rec) = sys.prime_record(p) {
            est.record(rec.derangement);
            records.push(rec);
        }
    }
    (records, est)
}

/// Derangement frequency over [lo, hi) without keeping records.
pub fn derangement_density(sys: &TargetSystem, lo: u64, hi: u64) -> DensityEstimate {
    let mut est = DensityEstimate::default();
    for p in crate::exact::prime_range(lo, hi) {
        if let Some(rec) = sys.prime_record(p) {
            est.record(rec.derangement);
        }
    }
    est
}

/// Append φ_i^r(α_ij) to entry i's targets for each (i, j, r); duplicates
/// collapse under canonical point equality.
pub fn augment_targets(
    sys: &TargetSystem,
    additions: &[(usize, usize, u32)],
) -> Result<TargetSystem, SweepError> {
    let mut entries = sys.entries.to_vec();
    for &(i, j, r) in additions {
        let (map, targets) = &entries[i];
        let alpha = &targets[j];
        let image = if r == 0 {
            alpha.clone()
        } else {
            map.iterate(r)?.apply(alpha)
        };
        let targets = &mut entries[i].1;
        if !targets.contains(&image) {
            targets.push(image);
        }
    }
    TargetSystem::new(entries, sys.m)
}

/// Joint vs product-of-marginals diagnostic for the per-target
/// no-preimage events.
#[derive(Clone, Debug, Serialize)]
pub struct IndependenceReport {
    pub labels: Vec<String>,
    pub eligible: u64,
    pub marginal_miss: Vec<f64>,
    pub joint_miss: f64,
    pub expected_joint: f64,
    pub ratio: f64,
    pub chi_square: f64,
}

pub fn independence_report(
    sys: &TargetSystem,
    lo: u64,
    hi: u64,
) -> Result<IndependenceReport, SweepError> {
    let n = sys.target_count();
    if n < 2 {
        return Err(SweepError::InsufficientData {
            targets: n,
            eligible: 0,
        });
    }
    assert!(n <= 20, "indicator histogram is dense in 2^n");
    let mut eligible = 0u64;
    let mut marg = vec![0u64; n];
    let mut joint = 0u64;
    let mut hist = vec![0u64; 1 << n];
    for p in crate::exact::prime_range(lo, hi) {
        let Some(rec) = sys.prime_record(p) else { continue };
        eligible += 1;
        let misses = rec.misses();
        let mut mask = 0usize;
        for (i, &miss) in misses.iter().enumerate() {
            if miss {
                marg[i] += 1;
                mask |= 1 << i;
            }
        }
        if mask == (1 << n) - 1 {
            joint += 1;
        }
        hist[mask] += 1;
    }
    if eligible < 100 {
        return Err(SweepError::InsufficientData {
            targets: n,
            eligible,
        });
    }
    let nn = eligible as f64;
    let marginal_miss: Vec<f64> = marg.iter().map(|&h| h as f64 / nn).collect();
    let joint_miss = joint as f64 / nn;
    let expected_joint: f64 = marginal_miss.iter().product();
    let ratio = joint_miss / expected_joint;
    // chi-square against the independence model: sum O_v^2 / E_v - N over
    // cells with E_v > 0 (empty-model cells always have O_v = 0)
    let mut acc = 0.0f64;
    for (mask, &obs) in hist.iter().enumerate() {
        let mut e = nn;
        for (i, &mi) in marginal_miss.iter().enumerate() {
            e *= if mask & (1 << i) != 0 { mi } else { 1.0 - mi };
        }
        if e > 0.0 {
            acc += obs as f64 * obs as f64 / e;
        } else {
            debug_assert_eq!(obs, 0, "impossible cell observed");
        }
    }
    let chi_square = acc - nn;
    Ok(IndependenceReport {
        labels: sys.labels(),
        eligible,
        marginal_miss,
        joint_miss,
        expected_joint,
        ratio,
        chi_square,
    })
}

/// CSV with one row per eligible prime: root counts in label order, the
/// infinity flags as a bit string, and the derangement verdict.
pub fn records_to_csv(sys: &TargetSystem, records: &[SweepRecord]) -> String {
    let mut out = String::from("p");
    for label in sys.labels() {
        out.push(',');
        out.push_str(&label);
    }
    out.push_str(",inf_flags,derangement\n");
    for rec in records {
        out.push_str(&rec.p.to_string());
        for c in rec.root_counts.iter().flatten() {
            out.push(',');
            out.push_str(&c.to_string());
        }
        out.push(',');
        for inf in rec.inf_hits.iter().flatten() {
            out.push(if *inf { '1' } else { '0' });
        }
        out.push(',');
        out.push_str(if rec.derangement { "true" } else { "false" });
        out.push('\n');
    }
    out
}

/// Summary JSON for a density estimate.
pub fn summary_json(est: &DensityEstimate) -> String {
    serde_json::to_string(est).expect("plain struct")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::prime_range;
    use crate::orbit::{functional_graph_census, orbit_shape};

    fn map(s: &str) -> RationalMap {
        s.parse().unwrap()
    }

    fn pt(n: i64) -> ProjPoint {
        ProjPoint::from_int(n)
    }

    fn simple_sys(m: u32, targets: &[i64]) -> TargetSystem {
        TargetSystem::new(
            vec![(map("x^2"), targets.iter().map(|&t| pt(t)).collect())],
            m,
        )
        .unwrap()
    }

    #[test]
    fn iterate_poly_pinned() {
        let sq = map("x^2");
        let ip1 = build_iterate_poly(&sq, &pt(3), 1).unwrap();
        assert_eq!(ip1.f.to_string(), "x^2 - 3");
        let ip2 = build_iterate_poly(&sq, &pt(3), 2).unwrap();
        assert_eq!(ip2.f.to_string(), "x^4 - 3");
        // target at infinity for a polynomial map: constant f, infinity
        // always hits
        let ipinf = build_iterate_poly(&map("x^2 + 1"), &ProjPoint::infinity(), 1).unwrap();
        assert_eq!(ipinf.f.degree(), Some(0));
        assert!(ipinf.infinity_hit(5));
        assert!(ipinf.infinity_hit(101));
        assert_eq!(ipinf.root_count_modp(5).unwrap(), (0, true));
    }

    #[test]
    fn iterate_poly_fraction_target() {
        // x^2 at (2:3): f = 3x^2 - 2... times content normalization
        let ip = build_iterate_poly(&map("x^2"), &ProjPoint::from_frac(2, 3), 1).unwrap();
        assert_eq!(ip.f.to_string(), "3x^2 - 2");
        // roots mod 5: 3z^2 = 2 -> z^2 = 4 -> z = 2, 3
        assert_eq!(ip.root_count_modp(5).unwrap(), (2, false));
    }

    #[test]
    fn root_counts_pinned() {
        let ip = build_iterate_poly(&map("x^2"), &pt(3), 1).unwrap();
        assert_eq!(ip.root_count_modp(5).unwrap(), (0, false));
        assert_eq!(ip.root_count_modp(11).unwrap(), (2, false));
        assert!(matches!(ip.root_count_modp(2), Err(SweepError::BadPrime(2))));
        assert!(matches!(ip.root_count_modp(3), Err(SweepError::BadPrime(3))));
    }

    #[test]
    fn root_count_matches_scan() {
        let cases = [
            (map("x^2"), pt(3), 2u32),
            (map("x^2 - 1"), pt(3), 2),
            (map("x^2 + 1 : x"), pt(2), 2),
            (map("x^3 - 2 : x"), pt(5), 1),
        ];
        for (m, alpha, lvl) in cases {
            let ip = build_iterate_poly(&m, &alpha, lvl).unwrap();
            for p in prime_range(3, 200) {
                if ip.is_bad_prime(p) {
                    continue;
                }
                let fp = Fp::new(p);
                let fmod = ip.f.reduce_mod(fp);
                let scan = (0..p).filter(|&z| fmod.eval(z) == 0).count() as u64;
                assert_eq!(ip.root_count_modp(p).unwrap().0, scan, "{m} {alpha} {p}");
            }
        }
    }

    #[test]
    fn preimage_root_identity_via_census() {
        // affine count + infinity flag = full m-step preimage count in the
        // functional graph
        let cases = [
            (map("x^2"), pt(3), 2u32),
            (map("x^2 + 1 : x"), ProjPoint::infinity(), 2),
            (map("x^2 - 1"), pt(5), 3),
        ];
        for (m, alpha, lvl) in cases {
            let ip = build_iterate_poly(&m, &alpha, lvl).unwrap();
            for p in [11u64, 101, 499, 2003] {
                if ip.is_bad_prime(p) {
                    continue;
                }
                let fp = Fp::new(p);
                let rm = m.reduce(fp).unwrap();
                let census = functional_graph_census(&rm).unwrap();
                let target = alpha.reduce(fp).code(p);
                let mut count = 0u64;
                for code in 0..=p {
                    let mut z = code;
                    for _ in 0..lvl {
                        z = census.image(z);
                    }
                    if z == target {
                        count += 1;
                    }
                }
                let (affine, inf) = ip.root_count_modp(p).unwrap();
                assert_eq!(affine + inf as u64, count, "{m} {alpha} p={p}");
            }
        }
    }

    #[test]
    fn system_validation() {
        assert!(matches!(
            TargetSystem::new(vec![], 1),
            Err(SweepError::EmptySystem)
        ));
        assert!(matches!(
            TargetSystem::new(vec![(map("x^2"), vec![])], 1),
            Err(SweepError::EmptySystem)
        ));
        assert!(matches!(
            TargetSystem::new(vec![(map("x^2"), vec![pt(1)])], 1),
            Err(SweepError::PeriodicTarget { entry: 0, target: 0 })
        ));
        assert!(matches!(
            TargetSystem::new(vec![(map("x^2 - 1"), vec![pt(3), pt(0)])], 1),
            Err(SweepError::PeriodicTarget { entry: 0, target: 1 })
        ));
        assert!(matches!(
            TargetSystem::new(vec![(map("x^2"), vec![pt(3)])], 13),
            Err(SweepError::Map(MapError::DegreeCapExceeded(8192)))
        ));
        let sys = simple_sys(3, &[3, 5, 7]);
        assert_eq!(sys.target_count(), 3);
        assert_eq!(sys.labels(), vec!["0.0", "0.1", "0.2"]);
    }

    #[test]
    fn derangement_density_pinned_12_of_23() {
        let sys = simple_sys(1, &[3]);
        let est = derangement_density(&sys, 3, 100);
        assert_eq!((est.hits, est.eligible), (12, 23));
    }

    #[test]
    fn sweep_records_match_residue_table() {
        // derangement for (x^2, {3,5,7}) at m=1 means 3, 5, 7 all
        // non-squares mod p
        let sys = simple_sys(1, &[3, 5, 7]);
        let (records, est) = sweep(&sys, 8, 100);
        assert_eq!(records.len() as u64, est.eligible);
        for rec in &records {
            let fp = Fp::new(rec.p);
            let expected = [3u64, 5, 7]
                .iter()
                .all(|&t| fp.legendre(t % rec.p) == -1);
            assert_eq!(rec.derangement, expected, "p={}", rec.p);
            assert!(!rec.infinity_hit());
        }
        // p = 17: QRs {1,2,4,8,9,13,15,16} miss 3, 5, 7
        let r17 = records.iter().find(|r| r.p == 17).unwrap();
        assert!(r17.derangement);
        assert_eq!(r17.root_counts, vec![vec![0, 0, 0]]);
        let r11 = records.iter().find(|r| r.p == 11).unwrap();
        assert!(!r11.derangement); // 5 = 4^2 mod 11
    }

    #[test]
    fn derangement_implies_period_does_not_divide_level() {
        // if alpha mod p is periodic and a derangement holds at level m,
        // the period cannot divide m
        for m in 1u32..=3 {
            let sys = simple_sys(m, &[3]);
            for p in prime_range(3, 2003) {
                let Some(rec) = sys.prime_record(p) else { continue };
                if !rec.derangement {
                    continue;
                }
                let fp = Fp::new(p);
                let rm = sys.entries()[0].0.reduce(fp).unwrap();
                let shape = orbit_shape(&rm, pt(3).reduce(fp));
                if shape.tail == 0 {
                    assert_ne!(m as u64 % shape.period, 0, "p={p} m={m}");
                }
            }
        }
    }

    #[test]
    fn augment_examples() {
        let sys = simple_sys(1, &[2]);
        let aug = augment_targets(&sys, &[(0, 0, 1)]).unwrap();
        assert_eq!(aug.entries()[0].1, vec![pt(2), pt(4)]);
        let sys2 = TargetSystem::new(vec![(map("x^2 - 1"), vec![pt(3)])], 1).unwrap();
        let aug2 = augment_targets(&sys2, &[(0, 0, 2)]).unwrap();
        assert_eq!(aug2.entries()[0].1, vec![pt(3), pt(63)]);
        // r = 0 duplicates and is collapsed
        let aug3 = augment_targets(&sys, &[(0, 0, 0)]).unwrap();
        assert_eq!(aug3.entries()[0].1, vec![pt(2)]);
    }

    #[test]
    fn augmentation_roots_carry_forward() {
        // every root of f_{m,alpha} mod p is a root of f_{m+r, phi^r(alpha)}
        let maps = [map("x^2"), map("x^2 - 1"), map("x^2 + 1 : x")];
        for m0 in &maps {
            for start in [2i64, 3, 5] {
                let alpha = pt(start);
                for m in 1u32..=2 {
                    for r in 1u32..=2 {
                        let ip = build_iterate_poly(m0, &alpha, m).unwrap();
                        let image = m0.iterate(r).unwrap().apply(&alpha);
                        let ip2 = build_iterate_poly(m0, &image, m + r).unwrap();
                        for p in prime_range(3, 300) {
                            if ip.is_bad_prime(p) || ip2.is_bad_prime(p) {
                                continue;
                            }
                            let fp = Fp::new(p);
                            let f1 = ip.f.reduce_mod(fp);
                            let f2 = ip2.f.reduce_mod(fp);
                            for z in crate::exact::roots(&f1) {
                                assert_eq!(f2.eval(z), 0, "{m0} a={start} m={m} r={r} p={p} z={z}");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn independence_needs_data() {
        let single = simple_sys(1, &[3]);
        assert!(matches!(
            independence_report(&single, 3, 1000),
            Err(SweepError::InsufficientData { targets: 1, .. })
        ));
        let sys = simple_sys(1, &[3, 5]);
        assert!(matches!(
            independence_report(&sys, 3, 50),
            Err(SweepError::InsufficientData { eligible: e, .. }) if e < 100
        ));
    }

    #[test]
    fn independence_report_consistency() {
        let sys = simple_sys(2, &[2, 8]);
        let rep = independence_report(&sys, 3, 3000).unwrap();
        assert!(rep.eligible >= 100);
        assert_eq!(rep.labels, vec!["0.0", "0.1"]);
        // has-root(x^4 - 2) forces has-root(x^4 - 8), so the joint miss
        // rate exceeds the independence prediction
        assert!(rep.ratio > 1.1, "ratio {}", rep.ratio);
        assert!(rep.chi_square > 0.0);
        for &f in &rep.marginal_miss {
            assert!((0.0..=1.0).contains(&f));
        }
        assert!(rep.joint_miss <= rep.marginal_miss.iter().cloned().fold(1.0, f64::min));
    }

    #[test]
    fn csv_shape() {
        let sys = simple_sys(1, &[3, 5]);
        let (records, _) = sweep(&sys, 3, 60);
        let csv = records_to_csv(&sys, &records);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "p,0.0,0.1,inf_flags,derangement");
        let first = lines.next().unwrap();
        let cols: Vec<&str> = first.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert_eq!(cols[0], "7"); // 5 divides disc(x^2 - 5)
        assert_eq!(cols[3], "00");
        for line in csv.lines().skip(1) {
            let c: Vec<&str> = line.split(',').collect();
            assert!(c[4] == "true" || c[4] == "false");
        }
    }

    #[test]
    fn summary_json_fields() {
        let sys = simple_sys(1, &[3]);
        let est = derangement_density(&sys, 3, 100);
        let json = summary_json(&est);
        let v: serde_json::Value = json.parse().unwrap();
        assert_eq!(v["hits"], 12);
        assert_eq!(v["eligible"], 23);
        assert!(v["proportion"].as_f64().unwrap() > 0.5);
        assert!(v["wilson99_lo"].as_f64().unwrap() > 0.0);
    }

    #[test]
    fn description_hash_stability() {
        let a = simple_sys(2, &[3, 5]);
        let b = simple_sys(2, &[3, 5]);
        assert_eq!(a.hash_hex(), b.hash_hex());
        let c = simple_sys(1, &[3, 5]);
        assert_ne!(a.hash_hex(), c.hash_hex());
        let d = simple_sys(2, &[5, 3]);
        assert_ne!(a.hash_hex(), d.hash_hex());
    }
}
