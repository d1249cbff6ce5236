//! Exhaustive generation of small labeled trees and one-face maps.
//!
//! Rooted one-face maps with `n` edges are in bijection with perfect
//! matchings of the sides `0..2n` of a polygon: with `alpha = m` and
//! `sigma(i) = m(i + 1)`, the corner walk `alpha . sigma` is `i -> i + 1`,
//! and the root corner is side 0.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use num::{BigInt, BigRational, One, Zero};

use crate::codec::{backbone, BackboneKind, LabeledOneTree};
use crate::error::{Error, Result};
use crate::map::CombMap;

pub const DEFAULT_PLANTED_CAP: usize = 9;
pub const DEFAULT_ONE_TREE_CAP: usize = 6;
/// Largest size for targeted exhaustive checks.
pub const EXTENDED_ONE_TREE_CAP: usize = 8;

/// Exact counts keyed by a tuple of integers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CountTable {
    pub columns: Vec<String>,
    pub counts: BTreeMap<Vec<i64>, u64>,
}

impl CountTable {
    pub fn new(columns: &[&str]) -> Self {
        CountTable { columns: columns.iter().map(|s| s.to_string()).collect(), counts: BTreeMap::new() }
    }

    pub fn add(&mut self, key: Vec<i64>, count: u64) {
        *self.counts.entry(key).or_insert(0) += count;
    }

    pub fn get(&self, key: &[i64]) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Sums over all keys whose column `col` equals `value`.
    pub fn marginal(&self, col: usize, value: i64) -> u64 {
        self.counts.iter().filter(|(k, _)| k[col] == value).map(|(_, c)| c).sum()
    }

    pub fn merge(&mut self, other: &CountTable) {
        for (k, &c) in &other.counts {
            self.add(k.clone(), c);
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push_str(",count\n");
        for (k, c) in &self.counts {
            for v in k {
                let _ = write!(s, "{v},");
            }
            let _ = writeln!(s, "{c}");
        }
        s
    }
}

fn check_cap(n: usize, cap: usize, what: &'static str) -> Result<()> {
    if n > cap {
        return Err(Error::CapExceeded { what, requested: n, cap });
    }
    Ok(())
}

/// Calls `f` on every perfect matching of `0..2n`.
pub fn for_each_matching(n: usize, mut f: impl FnMut(&[usize])) {
    fn rec(m: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        let Some(i) = m.iter().position(|&x| x == usize::MAX) else {
            f(m);
            return;
        };
        for j in i + 1..m.len() {
            if m[j] == usize::MAX {
                m[i] = j;
                m[j] = i;
                rec(m, f);
                m[i] = usize::MAX;
                m[j] = usize::MAX;
            }
        }
    }
    let mut m = vec![usize::MAX; 2 * n];
    rec(&mut m, &mut f);
}

fn sigma_of_matching(m: &[usize]) -> Vec<usize> {
    let n2 = m.len();
    (0..n2).map(|i| m[(i + 1) % n2]).collect()
}

fn count_cycles(p: &[usize]) -> usize {
    let mut seen = vec![false; p.len()];
    let mut c = 0;
    for i in 0..p.len() {
        if !seen[i] {
            c += 1;
            let mut j = i;
            while !seen[j] {
                seen[j] = true;
                j = p[j];
            }
        }
    }
    c
}

/// Rooted one-face maps with `n` edges and the given genus (root corner 0).
pub fn one_face_maps(n: usize, genus: usize) -> Vec<CombMap> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let want_v = (n + 1).checked_sub(2 * genus);
    let Some(want_v) = want_v.filter(|&v| v >= 1) else { return out };
    for_each_matching(n, |m| {
        let sigma = sigma_of_matching(m);
        if count_cycles(&sigma) == want_v {
            out.push(CombMap::new(m.to_vec(), sigma).expect("matchings give connected one-face maps"));
        }
    });
    out
}

/// One representative per unrooted one-face map, with its automorphism count.
pub fn unrooted_one_face_maps(n: usize, genus: usize) -> Vec<(CombMap, usize)> {
    one_face_maps(n, genus)
        .into_iter()
        .filter_map(|m| {
            let c0 = m.canonical_code(0);
            let mut aut = 0;
            for r in 0..m.num_half_edges() {
                let c = m.canonical_code(r);
                if c < c0 {
                    return None;
                }
                if c == c0 {
                    aut += 1;
                }
            }
            Some((m, aut))
        })
        .collect()
}

/// All vertex labelings with neighbouring labels differing by at most 1 and
/// minimum label 1.
pub fn well_labelings(map: &CombMap) -> Vec<Vec<i64>> {
    let nv = map.num_vertices();
    // spanning tree in BFS order from vertex 0
    let mut parent = vec![usize::MAX; nv];
    let mut order = vec![0];
    let mut seen = vec![false; nv];
    seen[0] = true;
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        for h in map.vertex_half_edges(u) {
            let w = map.vertex(map.alpha(h));
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                order.push(w);
            }
        }
    }
    let edges: Vec<(usize, usize)> =
        (0..map.num_half_edges()).map(|h| (map.vertex(h), map.vertex(map.alpha(h)))).collect();
    let mut out = Vec::new();
    let mut lab = vec![0i64; nv];
    fn rec(
        k: usize,
        order: &[usize],
        parent: &[usize],
        lab: &mut Vec<i64>,
        edges: &[(usize, usize)],
        out: &mut Vec<Vec<i64>>,
    ) {
        if k == order.len() {
            if edges.iter().all(|&(a, b)| (lab[a] - lab[b]).abs() <= 1) {
                let min = *lab.iter().min().unwrap();
                out.push(lab.iter().map(|l| l - min + 1).collect());
            }
            return;
        }
        let v = order[k];
        for d in -1..=1 {
            lab[v] = lab[parent[v]] + d;
            rec(k + 1, order, parent, lab, edges, out);
        }
    }
    if nv == 1 {
        return vec![vec![1]];
    }
    rec(1, &order, &parent, &mut lab, &edges, &mut out);
    out
}

/// Calls `f` on every corner-rooted well-labeled one-face map of the given
/// genus with `n` edges.
pub fn for_each_labeled_one_face_map(n: usize, genus: usize, mut f: impl FnMut(LabeledOneTree)) {
    for m in one_face_maps(n, genus) {
        for labels in well_labelings(&m) {
            let map = m.clone().with_labels(labels).expect("one label per vertex");
            f(LabeledOneTree::new(map, 0).expect("well-labeled by construction"));
        }
    }
}

/// Every corner-rooted well-labeled 1-tree with `n` edges.
pub fn one_trees(n: usize) -> Result<Vec<LabeledOneTree>> {
    one_trees_capped(n, DEFAULT_ONE_TREE_CAP)
}

pub fn one_trees_capped(n: usize, cap: usize) -> Result<Vec<LabeledOneTree>> {
    check_cap(n, cap, "one-tree enumeration size")?;
    let mut out = Vec::new();
    for_each_labeled_one_face_map(n, 1, |t| out.push(t));
    Ok(out)
}

pub const ONE_TREE_COLUMNS: [&str; 3] = ["degenerate", "min_skeleton_label", "root_label"];

/// Counts of corner-rooted well-labeled 1-trees by (backbone kind,
/// minimum skeleton label, label of the root corner); kind 0 is generic.
pub fn enum_one_trees(n: usize) -> Result<CountTable> {
    enum_one_trees_capped(n, DEFAULT_ONE_TREE_CAP)
}

pub fn enum_one_trees_capped(n: usize, cap: usize) -> Result<CountTable> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "n", value: n.to_string(), range: ">= 2" });
    }
    check_cap(n, cap, "one-tree enumeration size")?;
    let mut table = CountTable::new(&ONE_TREE_COLUMNS);
    for_each_labeled_one_face_map(n, 1, |t| {
        table.add(one_tree_key(&t), 1);
    });
    Ok(table)
}

pub fn one_tree_key(t: &LabeledOneTree) -> Vec<i64> {
    let b = backbone(t).expect("genus 1");
    vec![i64::from(b.kind == BackboneKind::Degenerate), b.min_skeleton_label(), t.label_of_half_edge(t.root())]
}

/// Independent generator: all rotations `sigma` over fixed edge pairs
/// `(2k, 2k+1)`, all roots, all labelings by brute force; deduplicated by
/// canonical code. Intended for `n <= 4`.
pub fn brute_force_one_tree_codes(n: usize) -> Result<HashSet<Vec<(usize, usize, i64)>>> {
    check_cap(n, 4, "brute-force generator size")?;
    let n2 = 2 * n;
    let alpha: Vec<usize> = (0..n2).map(|h| h ^ 1).collect();
    let mut codes = HashSet::new();
    let mut perm: Vec<usize> = (0..n2).collect();
    let mut seen_maps = HashSet::new();
    heap_permutations(&mut perm, &mut |sigma| {
        let Ok(map) = CombMap::new(alpha.clone(), sigma.to_vec()) else { return };
        if map.num_faces() != 1 || map.genus().ok() != Some(1) {
            return;
        }
        for root in 0..n2 {
            let code = map.canonical_code(root);
            if !seen_maps.insert(code) {
                continue;
            }
            let canon = map.canonical_form(root);
            let nv = canon.num_vertices();
            let mut lab = vec![1i64; nv];
            loop {
                let ok = (0..n2).all(|h| (lab[canon.vertex(h)] - lab[canon.vertex(canon.alpha(h))]).abs() <= 1)
                    && lab.contains(&1);
                if ok {
                    let labeled = canon.clone().with_labels(lab.clone()).unwrap();
                    codes.insert(labeled.canonical_code(0));
                }
                // odometer over labels 1..=nv
                let mut i = 0;
                while i < nv && lab[i] == nv as i64 {
                    lab[i] = 1;
                    i += 1;
                }
                if i == nv {
                    break;
                }
                lab[i] += 1;
            }
        }
    });
    Ok(codes)
}

fn heap_permutations(a: &mut [usize], f: &mut dyn FnMut(&[usize])) {
    let n = a.len();
    let mut c = vec![0; n];
    f(a);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            f(a);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Walks every planted plane tree with `n` edges, calling `f` with the
/// labels of its vertices (root first) once per tree. Labels stay `>= 1`.
fn for_each_planted_tree(root_label: i64, n: usize, f: &mut dyn FnMut(&[i64])) {
    fn rec(stack: &mut Vec<i64>, all: &mut Vec<i64>, remaining: usize, f: &mut dyn FnMut(&[i64])) {
        if remaining == 0 {
            f(all);
            return;
        }
        let cur = *stack.last().unwrap();
        for l in cur - 1..=cur + 1 {
            if l < 1 {
                continue;
            }
            stack.push(l);
            all.push(l);
            rec(stack, all, remaining - 1, f);
            all.pop();
            stack.pop();
        }
        if stack.len() > 1 {
            let top = stack.pop().unwrap();
            rec(stack, all, remaining, f);
            stack.push(top);
        }
    }
    if root_label < 1 {
        return;
    }
    let mut stack = vec![root_label];
    let mut all = vec![root_label];
    rec(&mut stack, &mut all, n, f);
}

/// Number of planted trees with `n` edges, root label `l`, labels `>= 1`.
pub fn enum_planted_trees(l: i64, n: usize) -> Result<CountTable> {
    check_cap(n, DEFAULT_PLANTED_CAP, "planted-tree size")?;
    let mut count = 0u64;
    for_each_planted_tree(l, n, &mut |_| count += 1);
    let mut t = CountTable::new(&["root_label", "edges"]);
    t.add(vec![l, n as i64], count);
    Ok(t)
}

/// `[g^n] K_{l1,l2}` by enumeration: rooted plane trees with two distinct
/// ordered marked vertices, divided by the `2n` rootings.
pub fn enum_two_marked(l1: i64, l2: i64, n: usize) -> Result<BigRational> {
    check_cap(n, 6, "two-marked tree size")?;
    if n == 0 || l1 < 1 || l2 < 1 {
        return Ok(BigRational::zero());
    }
    let mut pairs = 0u64;
    for r in 1..=l1.max(l2) + n as i64 {
        for_each_planted_tree(r, n, &mut |labels| {
            let a = labels.iter().filter(|&&x| x == l1).count() as u64;
            let b = labels.iter().filter(|&&x| x == l2).count() as u64;
            pairs += if l1 == l2 { a * (a - a.min(1)) } else { a * b };
        });
    }
    Ok(BigRational::new(BigInt::from(pairs), BigInt::from(2 * n)))
}

/// Pointed planar quadrangulations with `n` faces, weighted by inverse
/// symmetry factor: `(3^n / 2n) binom(2n, n) / (n + 1)`.
pub fn count_pointed_planar(n: usize) -> BigRational {
    assert!(n >= 1, "n >= 1");
    let binom = (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(n + k) / BigInt::from(k));
    BigRational::new(BigInt::from(3).pow(n as u32) * binom, BigInt::from(2 * n * (n + 1)))
}

/// The same quantity from unrooted well-labeled plane trees with weights `1/|Aut|`.
pub fn weighted_planar_count(n: usize) -> Result<BigRational> {
    check_cap(n, 5, "planar enumeration size")?;
    let mut classes: HashMap<Vec<(usize, usize, i64)>, usize> = HashMap::new();
    for m in one_face_maps(n, 0) {
        for labels in well_labelings(&m) {
            let lm = m.clone().with_labels(labels).unwrap();
            let codes: Vec<_> = (0..lm.num_half_edges()).map(|r| lm.canonical_code(r)).collect();
            let min = codes.iter().min().unwrap().clone();
            let aut = codes.iter().filter(|c| **c == min).count();
            classes.insert(min, aut);
        }
    }
    Ok(classes.values().map(|&aut| BigRational::new(BigInt::one(), BigInt::from(aut))).sum())
}

/// `(corner-rooted 1-tree, vertex)` pairs by the label of the vertex.
pub fn marked_vertex_histogram(n: usize) -> Result<CountTable> {
    if n < 2 {
        return Err(Error::OutOfRange { what: "n", value: n.to_string(), range: ">= 2" });
    }
    check_cap(n, DEFAULT_ONE_TREE_CAP, "marked-vertex histogram size")?;
    let mut t = CountTable::new(&["label"]);
    for_each_labeled_one_face_map(n, 1, |tree| {
        for &l in tree.labels() {
            t.add(vec![l], 1);
        }
    });
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matching_counts() {
        let mut c = 0;
        for_each_matching(4, |_| c += 1);
        assert_eq!(c, 105);
        // rooted unicellular maps on the torus: 1, 10, 70
        assert_eq!(one_face_maps(2, 1).len(), 1);
        assert_eq!(one_face_maps(3, 1).len(), 10);
        assert_eq!(one_face_maps(4, 1).len(), 70);
        // plane trees are counted by Catalan numbers
        assert_eq!(one_face_maps(4, 0).len(), 14);
    }

    #[test]
    fn size_two_is_the_figure_eight() {
        let all = one_trees(2).unwrap();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0], LabeledOneTree::figure_eight(1));
        let u = unrooted_one_face_maps(2, 1);
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].1, 4);
    }

    #[test]
    fn planted_small_cases() {
        assert_eq!(enum_planted_trees(1, 1).unwrap().total(), 2);
        assert_eq!(enum_planted_trees(0, 3).unwrap().total(), 0);
        assert!(enum_planted_trees(1, 10).is_err());
    }

    #[test]
    fn pointed_planar_small() {
        assert_eq!(count_pointed_planar(1), BigRational::new(3.into(), 2.into()));
        for n in 1..=4 {
            assert_eq!(weighted_planar_count(n).unwrap(), count_pointed_planar(n));
        }
    }

    #[test]
    fn csv_shape() {
        let t = enum_one_trees(3).unwrap();
        let csv = t.to_csv();
        assert!(csv.starts_with("degenerate,min_skeleton_label,root_label,count\n"));
        assert_eq!(t.total(), 30);
    }
}
