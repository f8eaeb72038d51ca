//! Orbit structure of reduced maps on P^1(F_p) and the exact-orbit
//! periodicity heuristic over Q.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::prime_range;
use crate::proj::{MapError, PointModP, ProjPoint, RationalMap, ReducedMap};
use crate::stats::DensityEstimate;

/// Full-census modulus ceiling.
pub const CENSUS_MAX_P: u64 = 1_000_000;
/// Steps taken by the exact Q-orbit check.
pub const Q_ORBIT_STEPS: usize = 64;
/// Coordinate bit size at which the Q-orbit check aborts.
pub const Q_ORBIT_BIT_CAP: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrbitError {
    #[error("point is periodic over Q with period {period}")]
    PeriodicInput { period: u32 },
    #[error("modulus {0} exceeds the census ceiling {CENSUS_MAX_P}")]
    ModulusTooLarge(u64),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Tail and cycle lengths of a point's forward orbit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrbitShape {
    pub tail: u64,
    pub period: u64,
}

/// Brent cycle detection: O(tail + period) applications, constant memory.
pub fn orbit_shape(rm: &ReducedMap, pt: PointModP) -> OrbitShape {
    let mut power: u64 = 1;
    let mut lam: u64 = 1;
    let mut tortoise = pt;
    let mut hare = rm.apply(pt);
    while tortoise != hare {
        if power == lam {
            tortoise = hare;
            power *= 2;
            lam = 0;
        }
        hare = rm.apply(hare);
        lam += 1;
    }
    let mut ahead = pt;
    for _ in 0..lam {
        ahead = rm.apply(ahead);
    }
    let mut behind = pt;
    let mut tail = 0;
    while behind != ahead {
        behind = rm.apply(behind);
        ahead = rm.apply(ahead);
        tail += 1;
    }
    OrbitShape { tail, period: lam }
}

pub fn is_periodic_modp(rm: &ReducedMap, pt: PointModP) -> bool {
    orbit_shape(rm, pt).tail == 0
}

/// Outcome of the bounded exact-orbit check over Q.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QOrbitStatus {
    /// The orbit returned to the start point.
    Periodic { period: u32 },
    /// The orbit repeated away from the start point, so the start point is
    /// provably not periodic.
    Preperiodic { tail: u32, period: u32 },
    /// No repeat within the step bound; treated as non-periodic but
    /// unverified. `height_abort` records whether coordinate growth stopped
    /// the walk early.
    Unknown { height_abort: bool },
}

impl QOrbitStatus {
    pub fn is_periodic(self) -> bool {
        matches!(self, QOrbitStatus::Periodic { .. })
    }

    /// Periodic or strictly preperiodic: the orbit is provably finite.
    pub fn is_preperiodic(self) -> bool {
        !matches!(self, QOrbitStatus::Unknown { .. })
    }

    /// Non-periodicity is proved, not merely unobserved.
    pub fn verified_nonperiodic(self) -> bool {
        matches!(self, QOrbitStatus::Preperiodic { .. })
    }
}

/// Walk the exact orbit of `alpha` for up to [`Q_ORBIT_STEPS`] steps,
/// stopping early if coordinates pass [`Q_ORBIT_BIT_CAP`] bits.
pub fn q_periodicity(map: &RationalMap, alpha: &ProjPoint) -> QOrbitStatus {
    let mut seen: HashMap<ProjPoint, u32> = HashMap::new();
    let mut cur = alpha.clone();
    for step in 0..=Q_ORBIT_STEPS as u32 {
        if let Some(&first) = seen.get(&cur) {
            let period = step - first;
            return if first == 0 {
                QOrbitStatus::Periodic { period }
            } else {
                QOrbitStatus::Preperiodic { tail: first, period }
            };
        }
        seen.insert(cur.clone(), step);
        if cur.bits() > Q_ORBIT_BIT_CAP {
            return QOrbitStatus::Unknown { height_abort: true };
        }
        cur = map.apply(&cur);
    }
    QOrbitStatus::Unknown { height_abort: false }
}

/// Per-prime orbit shape entry of a certificate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeShape {
    pub p: u64,
    pub tail: u64,
    pub period: u64,
}

/// Primes where a point is provably non-periodic under reduction.
#[derive(Clone, Debug)]
pub struct NonPeriodicCertificate {
    pub map: RationalMap,
    pub alpha: ProjPoint,
    /// Ascending primes with tail >= 1.
    pub records: Vec<PrimeShape>,
    /// Non-periodicity over Q is heuristic unless the exact orbit repeated.
    pub verified_over_q: bool,
}

impl NonPeriodicCertificate {
    /// One JSON record per line, ascending primes.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for rec in &self.records {
            out.push_str(&serde_json::to_string(rec).expect("plain struct"));
            out.push('\n');
        }
        out
    }
}

/// Scan primes in [lo, hi): for each p with good reduction and p > deg,
/// record the orbit shape of alpha mod p when its tail is nonzero.
pub fn nonperiodic_prime_scan(
    map: &RationalMap,
    alpha: &ProjPoint,
    lo: u64,
    hi: u64,
) -> Result<(NonPeriodicCertificate, DensityEstimate), OrbitError> {
    let status = q_periodicity(map, alpha);
    if let QOrbitStatus::Periodic { period } = status {
        return Err(OrbitError::PeriodicInput { period });
    }
    let primes: Vec<u64> = prime_range(lo, hi).collect();
    let per_prime: Vec<(u64, OrbitShape)> = primes
        .par_iter()
        .filter_map(|&p| {
            if p <= map.degree() as u64 || !map.good_reduction(p) {
                return None;
            }
            let fp = crate::exact::Fp::new(p);
            let rm = map.reduce(fp).expect("good reduction checked");
            Some((p, orbit_shape(&rm, alpha.reduce(fp))))
        })
        .collect();
    let mut estimate = DensityEstimate::default();
    let mut records = Vec::new();
    for (p, shape) in per_prime {
        let hit = shape.tail >= 1;
        estimate.record(hit);
        if hit {
            records.push(PrimeShape {
                p,
                tail: shape.tail,
                period: shape.period,
            });
        }
    }
    Ok((
        NonPeriodicCertificate {
            map: map.clone(),
            alpha: alpha.clone(),
            records,
            verified_over_q: status.verified_nonperiodic(),
        },
        estimate,
    ))
}

/// Complete functional graph of a reduced map on P^1(F_p): cycles plus a
/// compressed preimage table, indexed by point codes in [0, p].
#[derive(Clone, Debug)]
pub struct GraphCensus {
    pub p: u64,
    next: Vec<u32>,
    on_cycle: Vec<bool>,
    cycles: Vec<Vec<u64>>,
    pre_start: Vec<u32>,
    pre_list: Vec<u32>,
}

pub fn functional_graph_census(rm: &ReducedMap) -> Result<GraphCensus, OrbitError> {
    let p = rm.fp.p;
    if p > CENSUS_MAX_P {
        return Err(OrbitError::ModulusTooLarge(p));
    }
    let n = (p + 1) as usize;
    let mut next = vec![0u32; n];
    let mut indeg = vec![0u32; n];
    for code in 0..n {
        let image = rm.apply_code(code as u64) as u32;
        next[code] = image;
        indeg[image as usize] += 1;
    }
    // peel tree points: whatever survives has in-degree >= 1 within the
    // remaining subgraph, which in a functional graph is exactly the cycles
    let mut queue: Vec<u32> = (0..n as u32).filter(|&c| indeg[c as usize] == 0).collect();
    let mut on_cycle = vec![true; n];
    while let Some(c) = queue.pop() {
        on_cycle[c as usize] = false;
        let im = next[c as usize] as usize;
        indeg[im] -= 1;
        if indeg[im] == 0 {
            queue.push(im as u32);
        }
    }
    let mut cycles = Vec::new();
    let mut visited = vec![false; n];
    for start in 0..n {
        if !on_cycle[start] || visited[start] {
            continue;
        }
        let mut cyc = Vec::new();
        let mut cur = start;
        loop {
            visited[cur] = true;
            cyc.push(cur as u64);
            cur = next[cur] as usize;
            if cur == start {
                break;
            }
        }
        cycles.push(cyc);
    }
    // counting sort by image gives the preimage table
    let mut pre_start = vec![0u32; n + 1];
    for &im in &next {
        pre_start[im as usize + 1] += 1;
    }
    for i in 0..n {
        pre_start[i + 1] += pre_start[i];
    }
    let mut cursor = pre_start.clone();
    let mut pre_list = vec![0u32; n];
    for code in 0..n as u32 {
        let im = next[code as usize] as usize;
        pre_list[cursor[im] as usize] = code;
        cursor[im] += 1;
    }
    Ok(GraphCensus {
        p,
        next,
        on_cycle,
        cycles,
        pre_start,
        pre_list,
    })
}

impl GraphCensus {
    pub fn total_points(&self) -> u64 {
        self.p + 1
    }

    pub fn image(&self, code: u64) -> u64 {
        self.next[code as usize] as u64
    }

    pub fn is_on_cycle(&self, code: u64) -> bool {
        self.on_cycle[code as usize]
    }

    /// Cycles as code lists, each starting at its smallest code.
    pub fn cycles(&self) -> &[Vec<u64>] {
        &self.cycles
    }

    /// Map from cycle length to number of cycles of that length.
    pub fn cycle_inventory(&self) -> std::collections::BTreeMap<u64, u64> {
        let mut inv = std::collections::BTreeMap::new();
        for c in &self.cycles {
            *inv.entry(c.len() as u64).or_insert(0) += 1;
        }
        inv
    }

    pub fn preimages(&self, code: u64) -> impl Iterator<Item = u64> + '_ {
        let lo = self.pre_start[code as usize] as usize;
        let hi = self.pre_start[code as usize + 1] as usize;
        self.pre_list[lo..hi].iter().map(|&c| c as u64)
    }

    pub fn indegree(&self, code: u64) -> u64 {
        (self.pre_start[code as usize + 1] - self.pre_start[code as usize]) as u64
    }

    pub fn cycle_point_count(&self) -> u64 {
        self.cycles.iter().map(|c| c.len() as u64).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::Fp;

    fn rmap(s: &str, p: u64) -> ReducedMap {
        s.parse::<RationalMap>().unwrap().reduce(Fp::new(p)).unwrap()
    }

    fn naive_shape(rm: &ReducedMap, pt: PointModP) -> OrbitShape {
        let mut seen = Vec::new();
        let mut cur = pt;
        loop {
            if let Some(i) = seen.iter().position(|&q| q == cur) {
                return OrbitShape {
                    tail: i as u64,
                    period: (seen.len() - i) as u64,
                };
            }
            seen.push(cur);
            cur = rm.apply(cur);
        }
    }

    #[test]
    fn orbit_shape_pinned() {
        let rm = rmap("x^2", 7);
        assert_eq!(
            orbit_shape(&rm, PointModP::Aff(2)),
            OrbitShape { tail: 0, period: 2 }
        );
        assert_eq!(
            orbit_shape(&rm, PointModP::Aff(3)),
            OrbitShape { tail: 1, period: 2 }
        );
        assert_eq!(
            orbit_shape(&rm, PointModP::Aff(0)),
            OrbitShape { tail: 0, period: 1 }
        );
        assert!(is_periodic_modp(&rm, PointModP::Aff(2)));
        assert!(!is_periodic_modp(&rm, PointModP::Aff(3)));
        assert!(is_periodic_modp(&rm, PointModP::Inf));
    }

    #[test]
    fn orbit_shape_matches_naive_enumeration() {
        for map in ["x^2", "x^2 - 1", "x^2 + 1", "x^2 + 1 : x", "x^3 - 2 : x"] {
            for p in [5u64, 7, 11, 31, 101] {
                let m: RationalMap = map.parse().unwrap();
                if !m.good_reduction(p) || p <= m.degree() as u64 {
                    continue;
                }
                let rm = m.reduce(Fp::new(p)).unwrap();
                for code in 0..=p {
                    let pt = PointModP::from_code(code, p);
                    assert_eq!(orbit_shape(&rm, pt), naive_shape(&rm, pt), "{map} p={p} {pt}");
                }
            }
        }
    }

    #[test]
    fn q_periodicity_cases() {
        let sq: RationalMap = "x^2".parse().unwrap();
        assert_eq!(
            q_periodicity(&sq, &ProjPoint::from_int(1)),
            QOrbitStatus::Periodic { period: 1 }
        );
        assert_eq!(
            q_periodicity(&sq, &ProjPoint::infinity()),
            QOrbitStatus::Periodic { period: 1 }
        );
        let m: RationalMap = "x^2 - 1".parse().unwrap();
        assert_eq!(
            q_periodicity(&m, &ProjPoint::from_int(0)),
            QOrbitStatus::Periodic { period: 2 }
        );
        assert_eq!(
            q_periodicity(&m, &ProjPoint::from_int(1)),
            QOrbitStatus::Preperiodic { tail: 1, period: 2 }
        );
        let free = q_periodicity(&sq, &ProjPoint::from_int(3));
        assert!(matches!(free, QOrbitStatus::Unknown { height_abort: true }));
        assert!(!free.is_preperiodic());
        // x^2 - 2 sends 2 -> 2: fixed
        let m2: RationalMap = "x^2 - 2".parse().unwrap();
        assert_eq!(
            q_periodicity(&m2, &ProjPoint::from_int(2)),
            QOrbitStatus::Periodic { period: 1 }
        );
    }

    #[test]
    fn scan_rejects_periodic_input() {
        let sq: RationalMap = "x^2".parse().unwrap();
        assert_eq!(
            nonperiodic_prime_scan(&sq, &ProjPoint::from_int(1), 2, 100).unwrap_err(),
            OrbitError::PeriodicInput { period: 1 }
        );
        let m: RationalMap = "x^2 - 1".parse().unwrap();
        assert_eq!(
            nonperiodic_prime_scan(&m, &ProjPoint::from_int(0), 2, 100).unwrap_err(),
            OrbitError::PeriodicInput { period: 2 }
        );
    }

    #[test]
    fn scan_of_square_map_matches_order_parity() {
        // under x^2, residue 3 mod p is non-periodic iff ord_p(3) is even
        let sq: RationalMap = "x^2".parse().unwrap();
        let alpha = ProjPoint::from_int(3);
        let (cert, est) = nonperiodic_prime_scan(&sq, &alpha, 2, 100).unwrap();
        assert!(!cert.records.is_empty());
        assert!(!cert.verified_over_q);
        let hit_primes: Vec<u64> = cert.records.iter().map(|r| r.p).collect();
        let mut expected = Vec::new();
        let mut eligible = 0u64;
        for p in prime_range(2, 100) {
            if p <= 2 {
                continue;
            }
            eligible += 1;
            if p == 3 {
                // alpha reduces to the fixed point 0: periodic, no hit
                continue;
            }
            let fp = Fp::new(p);
            let mut ord = 1u64;
            let mut x = 3 % p;
            while x != 1 {
                x = fp.mul(x, 3 % p);
                ord += 1;
            }
            if ord % 2 == 0 {
                expected.push(p);
            }
        }
        assert_eq!(hit_primes, expected);
        assert_eq!(est.eligible, eligible);
        assert_eq!(est.hits, expected.len() as u64);
        for rec in &cert.records {
            assert!(rec.tail >= 1);
            assert!(cert.map.good_reduction(rec.p));
            let rm = cert.map.reduce(Fp::new(rec.p)).unwrap();
            assert!(!is_periodic_modp(&rm, alpha.reduce(Fp::new(rec.p))));
        }
    }

    #[test]
    fn certificate_jsonl_shape() {
        let sq: RationalMap = "x^2".parse().unwrap();
        let (cert, _) = nonperiodic_prime_scan(&sq, &ProjPoint::from_int(3), 2, 30).unwrap();
        let text = cert.to_jsonl();
        let mut prev = 0;
        for line in text.lines() {
            let rec: PrimeShape = serde_json::from_str(line).unwrap();
            assert!(rec.p > prev, "ascending primes");
            prev = rec.p;
            assert!(rec.tail >= 1);
        }
        assert_eq!(text.lines().count(), cert.records.len());
    }

    #[test]
    fn census_pinned_mod_5() {
        let census = functional_graph_census(&rmap("x^2", 5)).unwrap();
        // fixed points 0, 1, inf; tails 2 -> 4 -> 1, 3 -> 4
        assert_eq!(census.cycle_inventory(), [(1u64, 3u64)].into_iter().collect());
        assert_eq!(census.cycle_point_count(), 3);
        assert_eq!(census.total_points(), 6);
        assert!(census.is_on_cycle(0));
        assert!(census.is_on_cycle(1));
        assert!(census.is_on_cycle(5));
        assert!(!census.is_on_cycle(4));
        assert_eq!(census.preimages(4).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(census.preimages(1).collect::<Vec<_>>(), vec![1, 4]);
        assert_eq!(census.indegree(2), 0);
    }

    #[test]
    fn census_pinned_mod_3() {
        let census = functional_graph_census(&rmap("x^2", 3)).unwrap();
        assert_eq!(census.cycle_inventory(), [(1u64, 3u64)].into_iter().collect());
        assert_eq!(census.image(2), 1);
        assert!(!census.is_on_cycle(2));
    }

    #[test]
    fn census_conservation_and_consistency() {
        for map in ["x^2", "x^2 - 1", "x^2 + 1 : x", "x^3 + x : x + 1"] {
            let m: RationalMap = map.parse().unwrap();
            for p in [101u64, 499, 1009] {
                if !m.good_reduction(p) {
                    continue;
                }
                let rm = m.reduce(Fp::new(p)).unwrap();
                let census = functional_graph_census(&rm).unwrap();
                let tree: u64 = (0..=p).filter(|&c| !census.is_on_cycle(c)).count() as u64;
                assert_eq!(census.cycle_point_count() + tree, p + 1);
                let pre_total: u64 = (0..=p).map(|c| census.indegree(c)).sum();
                assert_eq!(pre_total, p + 1);
                // orbit_shape tail matches cycle membership
                for code in (0..=p).step_by(37) {
                    let pt = PointModP::from_code(code, p);
                    let onc = census.is_on_cycle(code);
                    assert_eq!(orbit_shape(&rm, pt).tail == 0, onc, "{map} {p} {code}");
                }
            }
        }
    }

    #[test]
    fn census_rejects_large_modulus() {
        let m: RationalMap = "x^2".parse().unwrap();
        let p = 1_000_003;
        let rm = m.reduce(Fp::new(p)).unwrap();
        assert_eq!(
            functional_graph_census(&rm).unwrap_err(),
            OrbitError::ModulusTooLarge(p)
        );
    }

    #[test]
    fn periodicity_transport() {
        // Q-periodic points reduce to periodic points with period dividing n
        let cases = [("x^2 - 1", 0i64, 2u64), ("x^2", 1, 1), ("x^2 - 2", 2, 1)];
        for (map, a, n) in cases {
            let m: RationalMap = map.parse().unwrap();
            let alpha = ProjPoint::from_int(a);
            assert!(q_periodicity(&m, &alpha).is_periodic());
            for p in prime_range(3, 200) {
                if !m.good_reduction(p) || p <= m.degree() as u64 {
                    continue;
                }
                let fp = Fp::new(p);
                let shape = orbit_shape(&m.reduce(fp).unwrap(), alpha.reduce(fp));
                assert_eq!(shape.tail, 0, "{map} at {p}");
                assert_eq!(n % shape.period, 0, "{map} at {p}");
            }
        }
    }
}
