//! Preimage trees of targets under reduced maps, and the post-critical
//! check that decides whether the abstract preimage tree is a complete
//! d-ary tree to a given depth.

use num_traits::Zero;

use crate::exact::{Fp, Int};
use crate::orbit::{functional_graph_census, OrbitError, CENSUS_MAX_P};
use crate::proj::{form_resultant, MapError, PointModP, ProjPoint, RationalMap};
use crate::sweep::TargetSystem;

#[derive(Debug, thiserror::Error)]
pub enum ForestError {
    #[error("prime {0} is ineligible (bad reduction or too small)")]
    BadPrime(u64),
    #[error("modulus {0} exceeds the census ceiling {CENSUS_MAX_P}")]
    ModulusTooLarge(u64),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// One node of a preimage tree; `parent` indexes the previous level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub value: PointModP,
    pub parent: usize,
}

/// Preimage tree of one target: `levels[k]` are the k-step preimages,
/// sorted by point code within each level.
#[derive(Clone, Debug)]
pub struct TreeModP {
    pub map_index: usize,
    pub target_index: usize,
    pub root: PointModP,
    pub levels: Vec<Vec<TreeNode>>,
}

#[derive(Clone, Debug)]
pub struct PreimageForestModP {
    pub p: u64,
    pub depth: u32,
    pub trees: Vec<TreeModP>,
}

/// Invert the functional graph of each map mod p and read off preimage
/// levels for every target.
pub fn build_forest_modp(
    sys: &TargetSystem,
    p: u64,
    depth: u32,
) -> Result<PreimageForestModP, ForestError> {
    if p > CENSUS_MAX_P {
        return Err(ForestError::ModulusTooLarge(p));
    }
    if p <= sys.max_degree() || sys.entries().iter().any(|(m, _)| !m.good_reduction(p)) {
        return Err(ForestError::BadPrime(p));
    }
    let fp = Fp::new(p);
    let mut trees = Vec::new();
    for (i, (map, targets)) in sys.entries().iter().enumerate() {
        let rm = map.reduce(fp)?;
        let census = match functional_graph_census(&rm) {
            Ok(c) => c,
            Err(OrbitError::ModulusTooLarge(p)) => return Err(ForestError::ModulusTooLarge(p)),
            Err(e) => unreachable!("census only rejects large moduli: {e}"),
        };
        for (j, target) in targets.iter().enumerate() {
            let root = target.reduce(fp);
            let mut levels = vec![vec![TreeNode {
                value: root,
                parent: 0,
            }]];
            for _ in 0..depth {
                let prev = levels.last().unwrap();
                let mut level = Vec::new();
                for (idx, node) in prev.iter().enumerate() {
                    for pre in census.preimages(node.value.code(p)) {
                        level.push(TreeNode {
                            value: PointModP::from_code(pre, p),
                            parent: idx,
                        });
                    }
                }
                level.sort_by_key(|n| n.value.code(p));
                levels.push(level);
            }
            trees.push(TreeModP {
                map_index: i,
                target_index: j,
                root,
                levels,
            });
        }
    }
    Ok(PreimageForestModP {
        p,
        depth,
        trees,
    })
}

/// Number of F_p-rational nodes at the given level of each tree. These are
/// the Frobenius-fixed preimages, so each count equals the corresponding
/// root count plus infinity flag at the same level.
pub fn frobenius_fixed_count(forest: &PreimageForestModP, level: u32) -> Vec<u64> {
    assert!(level <= forest.depth, "level exceeds forest depth");
    forest
        .trees
        .iter()
        .map(|t| t.levels[level as usize].len() as u64)
        .collect()
}

/// Result of the bounded post-critical test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PostCriticalCheck {
    /// Largest k actually tested.
    pub checked_to: u32,
    /// No critical point reaches alpha within the checked range.
    pub clean: bool,
    /// Smallest k with a critical solution of φ^k(c) = α; k = 0 means
    /// alpha is itself critical.
    pub witness_level: Option<u32>,
}

/// Test whether alpha is hit by a critical orbit within `bound` steps:
/// k = 0 asks whether the Wronskian vanishes at alpha, and k ≥ 1 asks
/// whether the Wronskian and b·F_k − a·G_k share a projective root, which
/// is a resultant vanishing test. Iterate degrees must stay under the cap.
pub fn postcritical_check(
    map: &RationalMap,
    alpha: &ProjPoint,
    bound: u32,
) -> Result<PostCriticalCheck, ForestError> {
    let w = map.wronskian();
    if w.eval(alpha.x(), alpha.y()).is_zero() {
        return Ok(PostCriticalCheck {
            checked_to: 0,
            clean: false,
            witness_level: Some(0),
        });
    }
    for k in 1..=bound {
        let it = map.iterate(k)?;
        let h = it
            .numerator()
            .scale(alpha.y())
            .sub(&it.denominator().scale(alpha.x()));
        if form_resultant(&w, &h).is_zero() {
            return Ok(PostCriticalCheck {
                checked_to: k,
                clean: false,
                witness_level: Some(k),
            });
        }
    }
    Ok(PostCriticalCheck {
        checked_to: bound,
        clean: true,
        witness_level: None,
    })
}

/// Per-target completeness entry: clean targets have complete d-ary
/// abstract preimage trees to the checked depth.
#[derive(Clone, Debug)]
pub struct CompletenessEntry {
    pub label: String,
    pub checked_to: u32,
    pub clean: bool,
    pub witness_level: Option<u32>,
    /// d^k for k = 0..=checked_to.
    pub expected_level_size: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct CompletenessReport {
    pub bound: u32,
    pub entries: Vec<CompletenessEntry>,
}

/// Run the post-critical check on every (map, target) pair, clamping each
/// to the deepest level under the iterate degree cap.
pub fn completeness_report(sys: &TargetSystem, bound: u32) -> CompletenessReport {
    let mut entries = Vec::new();
    for (i, (map, targets)) in sys.entries().iter().enumerate() {
        let d = map.degree() as u64;
        let mut cap_level = 0u32;
        let mut deg = 1u64;
        while deg.saturating_mul(d) <= crate::proj::MAP_DEGREE_CAP as u64 {
            deg *= d;
            cap_level += 1;
        }
        let depth = bound.min(cap_level);
        for (j, alpha) in targets.iter().enumerate() {
            let check = postcritical_check(map, alpha, depth)
                .expect("depth clamped under the degree cap");
            let expected: Vec<u64> = (0..=check.checked_to)
                .map(|k| d.pow(k))
                .collect();
            entries.push(CompletenessEntry {
                label: format!("{i}.{j}"),
                checked_to: check.checked_to,
                clean: check.clean,
                witness_level: check.witness_level,
                expected_level_size: expected,
            });
        }
    }
    CompletenessReport { bound, entries }
}

/// Forest as JSON: trees with flat node lists, level order, parent indices
/// into the same list (null for the root).
pub fn forest_to_json(forest: &PreimageForestModP) -> String {
    let mut trees = Vec::new();
    for tree in &forest.trees {
        let mut nodes = Vec::new();
        let mut level_offset = vec![0usize; tree.levels.len() + 1];
        for (k, level) in tree.levels.iter().enumerate() {
            level_offset[k + 1] = level_offset[k] + level.len();
        }
        for (k, level) in tree.levels.iter().enumerate() {
            for node in level {
                let parent_index = if k == 0 {
                    serde_json::Value::Null
                } else {
                    serde_json::json!(level_offset[k - 1] + node.parent)
                };
                nodes.push(serde_json::json!({
                    "value": node.value.to_string(),
                    "parent_index": parent_index,
                }));
            }
        }
        trees.push(serde_json::json!({
            "map": tree.map_index,
            "target": tree.target_index,
            "root": tree.root.to_string(),
            "nodes": nodes,
        }));
    }
    serde_json::to_string_pretty(&serde_json::json!({
        "p": forest.p,
        "depth": forest.depth,
        "trees": trees,
    }))
    .expect("plain json")
}

/// One `child parent` edge per line; node names are `value@level`,
/// prefixed by the tree label when several trees are present.
pub fn forest_to_edges(forest: &PreimageForestModP) -> String {
    let mut out = String::new();
    for tree in &forest.trees {
        let prefix = if forest.trees.len() > 1 {
            format!("{}.{}:", tree.map_index, tree.target_index)
        } else {
            String::new()
        };
        for (k, level) in tree.levels.iter().enumerate().skip(1) {
            for node in level {
                let parent = &tree.levels[k - 1][node.parent];
                out.push_str(&format!(
                    "{prefix}{}@{k} {prefix}{}@{}\n",
                    node.value,
                    parent.value,
                    k - 1
                ));
            }
        }
    }
    out
}

/// True when p divides none of the iterate-poly exclusion products, so the
/// sweep and forest views of level counts must agree.
pub fn sweep_comparable(sys: &TargetSystem, p: u64) -> bool {
    sys.polys()
        .iter()
        .flatten()
        .all(|ip| !(&ip.bad % Int::from(p)).is_zero())
        && p > sys.max_degree()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::prime_range;
    use crate::exact::resultant_z;
    use crate::sweep::build_iterate_poly;

    fn sys(entries: Vec<(&str, Vec<i64>)>, m: u32) -> TargetSystem {
        TargetSystem::new(
            entries
                .into_iter()
                .map(|(s, ts)| {
                    (
                        s.parse::<RationalMap>().unwrap(),
                        ts.into_iter().map(ProjPoint::from_int).collect(),
                    )
                })
                .collect(),
            m,
        )
        .unwrap()
    }

    fn values(tree: &TreeModP, level: usize) -> Vec<PointModP> {
        tree.levels[level].iter().map(|n| n.value).collect()
    }

    #[test]
    fn forest_pinned_mod_7() {
        let s = sys(vec![("x^2", vec![2])], 1);
        let forest = build_forest_modp(&s, 7, 2).unwrap();
        assert_eq!(forest.trees.len(), 1);
        let tree = &forest.trees[0];
        assert_eq!(values(tree, 0), vec![PointModP::Aff(2)]);
        assert_eq!(values(tree, 1), vec![PointModP::Aff(3), PointModP::Aff(4)]);
        // 3 is a non-square mod 7; preimages of 4 are 2, 5
        assert_eq!(values(tree, 2), vec![PointModP::Aff(2), PointModP::Aff(5)]);
        // parents point at 4, the second level-1 node
        for node in &tree.levels[2] {
            assert_eq!(tree.levels[1][node.parent].value, PointModP::Aff(4));
        }
    }

    #[test]
    fn forest_empty_level() {
        let s = sys(vec![("x^2", vec![3])], 1);
        let forest = build_forest_modp(&s, 7, 1).unwrap();
        assert!(forest.trees[0].levels[1].is_empty());
        assert_eq!(frobenius_fixed_count(&forest, 1), vec![0]);
        assert_eq!(frobenius_fixed_count(&forest, 0), vec![1]);
    }

    #[test]
    fn forest_depth_zero_and_errors() {
        let s = sys(vec![("x^2", vec![2])], 1);
        let f0 = build_forest_modp(&s, 11, 0).unwrap();
        assert_eq!(f0.trees[0].levels.len(), 1);
        assert!(matches!(
            build_forest_modp(&s, 2, 1),
            Err(ForestError::BadPrime(2))
        ));
        assert!(matches!(
            build_forest_modp(&s, 1_000_003, 1),
            Err(ForestError::ModulusTooLarge(_))
        ));
        let bad = sys(vec![("5x^2 : 1", vec![2])], 1);
        assert!(matches!(
            build_forest_modp(&bad, 5, 1),
            Err(ForestError::BadPrime(5))
        ));
    }

    #[test]
    fn forward_image_returns_to_root() {
        let s = sys(vec![("x^2 - 1", vec![3]), ("x^2 + 1 : x", vec![2])], 1);
        for p in [11u64, 101, 499] {
            let forest = build_forest_modp(&s, p, 3).unwrap();
            for tree in &forest.trees {
                let map = &s.entries()[tree.map_index].0;
                let rm = map.reduce(Fp::new(p)).unwrap();
                for (k, level) in tree.levels.iter().enumerate() {
                    for node in level {
                        let mut z = node.value;
                        for _ in 0..k {
                            z = rm.apply(z);
                        }
                        assert_eq!(z, tree.root, "p={p} level {k}");
                    }
                }
            }
        }
    }

    #[test]
    fn frobenius_count_matches_root_count() {
        let cases = [("x^2", 3i64), ("x^2 - 1", 5), ("x^2 + 1 : x", 2), ("x^3 - 2 : x", 3)];
        for (mstr, t) in cases {
            let map: RationalMap = mstr.parse().unwrap();
            let alpha = ProjPoint::from_int(t);
            for level in 1u32..=3 {
                let s = TargetSystem::new(vec![(map.clone(), vec![alpha.clone()])], level).unwrap();
                let ip = build_iterate_poly(&map, &alpha, level).unwrap();
                for p in prime_range(3, 2004).step_by(4) {
                    if !sweep_comparable(&s, p) {
                        continue;
                    }
                    let forest = build_forest_modp(&s, p, level).unwrap();
                    let counts = frobenius_fixed_count(&forest, level);
                    let (affine, inf) = ip.root_count_modp(p).unwrap();
                    assert_eq!(counts[0], affine + inf as u64, "{mstr} t={t} m={level} p={p}");
                }
            }
        }
    }

    #[test]
    fn postcritical_pinned() {
        let sq: RationalMap = "x^2".parse().unwrap();
        let check = postcritical_check(&sq, &ProjPoint::from_int(3), 10).unwrap();
        assert!(check.clean);
        assert_eq!(check.witness_level, None);
        // 0 -> -2 -> 2 under x^2 - 2
        let m: RationalMap = "x^2 - 2".parse().unwrap();
        let check = postcritical_check(&m, &ProjPoint::from_int(2), 10).unwrap();
        assert_eq!(check.witness_level, Some(2));
        assert!(!check.clean);
        // infinity is itself critical for x^2
        let check = postcritical_check(&sq, &ProjPoint::infinity(), 10).unwrap();
        assert_eq!(check.witness_level, Some(0));
        // 0 is critical
        let check = postcritical_check(&sq, &ProjPoint::from_int(0), 10).unwrap();
        assert_eq!(check.witness_level, Some(0));
        // cap: quadratic maps cannot be checked past level 12
        assert!(matches!(
            postcritical_check(&sq, &ProjPoint::from_int(3), 13),
            Err(ForestError::Map(MapError::DegreeCapExceeded(_)))
        ));
    }

    #[test]
    fn clean_targets_have_full_level_counts_in_closure() {
        // clean to depth k means no preimage ramifies, so f_k stays
        // squarefree: the tree has exactly d^k nodes over the closure, and
        // f_k mod p stays squarefree of full degree whenever p avoids the
        // exclusion product
        let map: RationalMap = "x^2".parse().unwrap();
        let alpha = ProjPoint::from_int(3);
        for k in 1u32..=3 {
            assert!(postcritical_check(&map, &alpha, k).unwrap().clean);
            let ip = build_iterate_poly(&map, &alpha, k).unwrap();
            assert_eq!(ip.f.degree(), Some(1 << k));
            assert!(!resultant_z(&ip.f, &ip.f.derivative()).is_zero());
            for p in [11u64, 13, 17, 19, 23, 29] {
                if ip.is_bad_prime(p) {
                    continue;
                }
                let fp = Fp::new(p);
                let f = ip.f.reduce_mod(fp).make_monic();
                assert_eq!(f.degree(), Some(1 << k));
                let sep = f.gcd(&f.derivative());
                assert_eq!(sep.degree(), Some(0), "p={p} k={k}");
            }
        }
        // a witness forces a repeated root: phi = x^2 - 2 ramifies over 2
        // at level 2 (0 -> -2 -> 2), and f_2 = x^2 (x^2 - 4)
        let m: RationalMap = "x^2 - 2".parse().unwrap();
        let ip = build_iterate_poly(&m, &ProjPoint::from_int(2), 2).unwrap();
        assert!(resultant_z(&ip.f, &ip.f.derivative()).is_zero());
    }

    #[test]
    fn completeness_report_shape() {
        let s = sys(vec![("x^2", vec![3, 5])], 1);
        let rep = completeness_report(&s, 16);
        assert_eq!(rep.entries.len(), 2);
        for e in &rep.entries {
            assert!(e.clean);
            assert_eq!(e.checked_to, 12); // cap clamps quadratics
            assert_eq!(e.expected_level_size[0], 1);
            assert_eq!(e.expected_level_size[2], 4);
        }
        let s2 = sys(vec![("x^2 - 2", vec![5])], 1);
        let rep2 = completeness_report(&s2, 16);
        // 5 = phi^3(critical 0): 0 -> -2 -> 2 -> 2... no: phi(2) = 2, so
        // orbit of 0 is {-2, 2}; 5 is never hit
        assert!(rep2.entries[0].clean);
    }

    #[test]
    fn json_and_edges_output() {
        let s = sys(vec![("x^2", vec![2])], 1);
        let forest = build_forest_modp(&s, 7, 2).unwrap();
        let json = forest_to_json(&forest);
        let v: serde_json::Value = json.parse().unwrap();
        assert_eq!(v["p"], 7);
        let nodes = v["trees"][0]["nodes"].as_array().unwrap();
        assert_eq!(nodes.len(), 5);
        assert_eq!(nodes[0]["parent_index"], serde_json::Value::Null);
        assert_eq!(nodes[0]["value"], "2");
        // last nodes are level 2 = {2, 5} with parents pointing at "4"
        let parent_of_last = nodes[4]["parent_index"].as_u64().unwrap() as usize;
        assert_eq!(nodes[parent_of_last]["value"], "4");
        let edges = forest_to_edges(&forest);
        let lines: Vec<&str> = edges.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.contains(&"3@1 2@0"));
        assert!(lines.contains(&"2@2 4@1"));
    }
}
