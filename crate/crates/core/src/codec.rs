//! Bijection between well-labeled one-face maps and pointed bipartite
//! quadrangulations.
//!
//! Corners: the corner `c(h)` is the sector between `h` and `sigma(h)` at the
//! vertex of `h`. Walking counterclockwise around the unique face visits the
//! corners in the order `h, alpha(sigma(h)), ...`.
//!
//! Decoding links every corner of label `l` to its successor, the first
//! later corner in the walk with label `l - 1`; corners of label 1 link to a
//! new origin vertex. Quadrangulation edge `j` joins the corner at walk
//! position `j` (half-edge `2j`) to its successor (half-edge `2j + 1`). The
//! root corner sits at position 0, so the root edge is half-edge 0.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::map::{CombMap, Loop};

/// One-face map with positive vertex labels and a root corner `c(root)`.
#[derive(Clone, Debug)]
pub struct LabeledOneTree {
    map: CombMap,
    root: usize,
}

impl PartialEq for LabeledOneTree {
    /// Equality up to root-preserving isomorphism.
    fn eq(&self, other: &Self) -> bool {
        self.canonical_code() == other.canonical_code()
    }
}

impl Eq for LabeledOneTree {}

impl LabeledOneTree {
    pub fn new(map: CombMap, root: usize) -> Result<Self> {
        let labels = map.labels().ok_or_else(|| Error::Rejected("labels are required".into()))?;
        if root >= map.num_half_edges() {
            return Err(Error::Rejected(format!("root {root} out of range")));
        }
        if map.num_faces() != 1 {
            return Err(Error::Rejected(format!("expected one face, got {}", map.num_faces())));
        }
        if labels.iter().any(|&l| l < 1) {
            return Err(Error::Rejected("labels must be >= 1".into()));
        }
        for h in 0..map.num_half_edges() {
            let (a, b) = (labels[map.vertex(h)], labels[map.vertex(map.alpha(h))]);
            if (a - b).abs() > 1 {
                return Err(Error::Rejected(format!("adjacent labels {a} and {b} differ by more than 1")));
            }
        }
        Ok(LabeledOneTree { map, root })
    }

    /// The one-vertex torus map with all labels equal to `label`.
    pub fn figure_eight(label: i64) -> Self {
        let map = CombMap::figure_eight().with_labels(vec![label]).expect("one vertex");
        LabeledOneTree::new(map, 0).expect("valid fixture")
    }

    pub fn map(&self) -> &CombMap {
        &self.map
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn num_edges(&self) -> usize {
        self.map.num_edges()
    }

    pub fn genus(&self) -> usize {
        self.map.genus().expect("one-face maps have integral genus")
    }

    pub fn labels(&self) -> &[i64] {
        self.map.labels().expect("checked at construction")
    }

    pub fn label_of_half_edge(&self, h: usize) -> i64 {
        self.labels()[self.map.vertex(h)]
    }

    pub fn min_label(&self) -> i64 {
        *self.labels().iter().min().expect("non-empty")
    }

    pub fn is_well_labeled(&self) -> bool {
        self.min_label() == 1
    }

    pub fn with_root(&self, root: usize) -> Result<Self> {
        LabeledOneTree::new(self.map.clone(), root)
    }

    /// Corners in counterclockwise order around the face, starting at the root.
    pub fn corner_walk(&self) -> Vec<usize> {
        let n = self.map.num_half_edges();
        let mut out = Vec::with_capacity(n);
        let mut h = self.root;
        for _ in 0..n {
            out.push(h);
            h = self.map.alpha(self.map.sigma(h));
        }
        debug_assert_eq!(h, self.root);
        out
    }

    pub fn canonical_code(&self) -> Vec<(usize, usize, i64)> {
        self.map.canonical_code(self.root)
    }

    /// Same rooted tree with canonically numbered half-edges (root 0).
    pub fn canonical(&self) -> Self {
        LabeledOneTree { map: self.map.canonical_form(self.root), root: 0 }
    }
}

/// Vertices and half-edges surviving recursive removal of degree-1 vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Skeleton {
    pub in_skeleton: Vec<bool>,
    pub half_edge_in_skeleton: Vec<bool>,
    pub degree: Vec<usize>,
}

pub fn skeleton_of(t: &LabeledOneTree) -> Skeleton {
    let m = t.map();
    let nv = m.num_vertices();
    let nh = m.num_half_edges();
    let mut degree = vec![0usize; nv];
    for h in 0..nh {
        degree[m.vertex(h)] += 1;
    }
    let mut alive_half = vec![true; nh];
    let mut alive = vec![true; nv];
    let mut at: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for h in 0..nh {
        at[m.vertex(h)].push(h);
    }
    let mut queue: VecDeque<usize> = (0..nv).filter(|&v| degree[v] == 1).collect();
    while let Some(v) = queue.pop_front() {
        if !alive[v] || degree[v] != 1 {
            continue;
        }
        alive[v] = false;
        let h = *at[v].iter().find(|&&h| alive_half[h]).expect("one live half-edge");
        let o = m.alpha(h);
        alive_half[h] = false;
        alive_half[o] = false;
        degree[v] = 0;
        let w = m.vertex(o);
        degree[w] -= 1;
        if degree[w] == 1 {
            queue.push_back(w);
        }
    }
    Skeleton { in_skeleton: alive, half_edge_in_skeleton: alive_half, degree }
}

/// The skeleton as a one-face map in its own right, rooted at its smallest half-edge.
pub fn skeleton(t: &LabeledOneTree) -> Result<LabeledOneTree> {
    if t.genus() != 1 {
        return Err(Error::Unsupported("skeleton needs genus 1".into()));
    }
    let sk = skeleton_of(t);
    let m = t.map();
    let keep: Vec<usize> = (0..m.num_half_edges()).filter(|&h| sk.half_edge_in_skeleton[h]).collect();
    let mut new_id = vec![usize::MAX; m.num_half_edges()];
    for (i, &h) in keep.iter().enumerate() {
        new_id[h] = i;
    }
    let next_alive = |mut h: usize| {
        h = m.sigma(h);
        while !sk.half_edge_in_skeleton[h] {
            h = m.sigma(h);
        }
        h
    };
    let alpha: Vec<usize> = keep.iter().map(|&h| new_id[m.alpha(h)]).collect();
    let sigma: Vec<usize> = keep.iter().map(|&h| new_id[next_alive(h)]).collect();
    let map = CombMap::new(alpha, sigma)?;
    let mut labels = vec![0; map.num_vertices()];
    for (i, &h) in keep.iter().enumerate() {
        labels[map.vertex(i)] = t.label_of_half_edge(h);
    }
    LabeledOneTree::new(map.with_labels(labels)?, 0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum BackboneKind {
    Generic,
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Backbone {
    pub kind: BackboneKind,
    /// `(l1, l2)` with `l1 >= l2` for a generic backbone, `(l)` for a degenerate one.
    pub labels: Vec<i64>,
    /// Minimum label along each chain, endpoints included, in decreasing order.
    pub chain_minima: Vec<i64>,
    /// Junction vertices, in the order of `labels`.
    pub junctions: Vec<usize>,
    /// Vertex sequence of every chain, from a junction to a junction.
    pub chains: Vec<Vec<usize>>,
}

impl Backbone {
    pub fn min_skeleton_label(&self) -> i64 {
        *self.chain_minima.last().expect("at least one chain")
    }

    /// Second smallest chain minimum (generic backbones only).
    pub fn second_chain_minimum(&self) -> Option<i64> {
        match self.kind {
            BackboneKind::Generic => Some(self.chain_minima[1]),
            BackboneKind::Degenerate => None,
        }
    }
}

pub fn backbone(t: &LabeledOneTree) -> Result<Backbone> {
    if t.genus() != 1 {
        return Err(Error::Unsupported("backbone needs genus 1".into()));
    }
    let sk = skeleton_of(t);
    let m = t.map();
    let labels = t.labels();
    let mut junctions: Vec<usize> =
        (0..m.num_vertices()).filter(|&v| sk.in_skeleton[v] && sk.degree[v] >= 3).collect();
    let kind = match junctions.iter().map(|&v| sk.degree[v]).collect::<Vec<_>>().as_slice() {
        [3, 3] => BackboneKind::Generic,
        [4] => BackboneKind::Degenerate,
        other => return Err(Error::MalformedMap(format!("unexpected junction degrees {other:?}"))),
    };
    junctions.sort_by_key(|&v| std::cmp::Reverse(labels[v]));
    // follow every skeleton half-edge leaving a junction until the next junction
    let mut chains = Vec::new();
    let mut used = vec![false; m.num_half_edges()];
    for &j in &junctions {
        for h in m.vertex_half_edges(j) {
            if !sk.half_edge_in_skeleton[h] || used[h] {
                continue;
            }
            let mut path = vec![j];
            let mut e = h;
            loop {
                used[e] = true;
                let back = m.alpha(e);
                used[back] = true;
                let w = m.vertex(back);
                path.push(w);
                if sk.degree[w] >= 3 {
                    break;
                }
                let mut nxt = m.sigma(back);
                while !sk.half_edge_in_skeleton[nxt] {
                    nxt = m.sigma(nxt);
                }
                e = nxt;
            }
            chains.push(path);
        }
    }
    let mut chain_minima: Vec<i64> = chains.iter().map(|c| c.iter().map(|&v| labels[v]).min().unwrap()).collect();
    chain_minima.sort_unstable_by(|a, b| b.cmp(a));
    let bl = junctions.iter().map(|&v| labels[v]).collect();
    Ok(Backbone { kind, labels: bl, chain_minima, junctions, chains })
}

/// Pointed rooted quadrangulation; labels are distances to `origin`.
#[derive(Clone, Debug)]
pub struct PointedQuad {
    pub map: CombMap,
    pub origin: usize,
    pub root: usize,
}

impl PointedQuad {
    pub fn new(map: CombMap, origin: usize, root: usize) -> Result<Self> {
        if origin >= map.num_vertices() || root >= map.num_half_edges() {
            return Err(Error::Rejected("origin or root out of range".into()));
        }
        let d = map.bfs_distances(origin);
        let labels = d.iter().map(|&x| x as i64).collect();
        Ok(PointedQuad { map: map.without_labels().with_labels(labels)?, origin, root })
    }

    /// Canonical code of the rooted map with distance labels (the origin is
    /// the unique vertex at distance 0).
    pub fn canonical_code(&self) -> Vec<(usize, usize, i64)> {
        self.map.canonical_code(self.root)
    }
}

impl PartialEq for PointedQuad {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_code() == other.canonical_code()
    }
}

/// Walk positions and successor positions (`None` for label-1 corners).
fn successors(t: &LabeledOneTree) -> (Vec<usize>, Vec<i64>, Vec<Option<usize>>) {
    let walk = t.corner_walk();
    let n2 = walk.len();
    let lab: Vec<i64> = walk.iter().map(|&h| t.label_of_half_edge(h)).collect();
    // scan the doubled walk backwards, remembering the next position of each label
    let max = *lab.iter().max().unwrap() as usize;
    let mut next_pos: Vec<Option<usize>> = vec![None; max + 2];
    let mut succ = vec![None; n2];
    for k in (0..2 * n2).rev() {
        let j = k % n2;
        let l = lab[j] as usize;
        if k < n2 && l > 1 {
            succ[j] = next_pos[l - 1];
        }
        next_pos[l] = Some(j);
    }
    (walk, lab, succ)
}

pub fn decode(t: &LabeledOneTree) -> Result<PointedQuad> {
    if !t.is_well_labeled() {
        return Err(Error::Rejected("decode needs minimum label 1".into()));
    }
    let m = t.map();
    let (walk, lab, succ) = successors(t);
    let n2 = walk.len();
    let mut pos = vec![0; n2];
    for (j, &h) in walk.iter().enumerate() {
        pos[h] = j;
    }
    // incoming arcs at each corner position
    let mut incoming: Vec<Vec<usize>> = vec![Vec::new(); n2];
    let mut at_origin = Vec::new();
    for j in 0..n2 {
        match succ[j] {
            Some(s) => incoming[s].push(j),
            None => at_origin.push(j),
        }
    }
    let mut sigma = vec![usize::MAX; 2 * n2];
    let mut alpha = vec![0; 2 * n2];
    for j in 0..n2 {
        alpha[2 * j] = 2 * j + 1;
        alpha[2 * j + 1] = 2 * j;
    }
    let reps = m.vertex_representatives();
    for &start in &reps {
        let mut cyc = Vec::new();
        let mut h = start;
        loop {
            let i = pos[h];
            let mut inc = incoming[i].clone();
            inc.sort_by_key(|&j| std::cmp::Reverse((j + n2 - i) % n2));
            cyc.extend(inc.iter().map(|&j| 2 * j + 1));
            cyc.push(2 * i);
            h = m.sigma(h);
            if h == start {
                break;
            }
        }
        for k in 0..cyc.len() {
            sigma[cyc[k]] = cyc[(k + 1) % cyc.len()];
        }
    }
    let cyc: Vec<usize> = at_origin.iter().rev().map(|&j| 2 * j + 1).collect();
    for k in 0..cyc.len() {
        sigma[cyc[k]] = cyc[(k + 1) % cyc.len()];
    }
    debug_assert!(lab.iter().all(|&l| l >= 1));
    let q = CombMap::new(alpha, sigma)?;
    let origin = q.vertex(2 * at_origin[0] + 1);
    let pq = PointedQuad::new(q, origin, 0)?;
    debug_assert_eq!(pq.map.num_faces(), t.num_edges());
    Ok(pq)
}

pub fn encode(q: &PointedQuad) -> Result<LabeledOneTree> {
    let m = &q.map;
    if !m.is_bipartite() || !m.is_quadrangulation() {
        return Err(Error::Rejected("encode needs a bipartite quadrangulation".into()));
    }
    let d: Vec<i64> = m.bfs_distances(q.origin).iter().map(|&x| x as i64).collect();
    let dv = |h: usize| d[m.vertex(h)];
    let r = q.root;
    if dv(r) == 0 || dv(m.alpha(r)) != dv(r) - 1 {
        return Err(Error::Rejected("root must point one step towards the origin".into()));
    }
    let nh = m.num_half_edges();
    // tree half-edge sitting in the sector right after each quadrangulation half-edge
    let mut sector: Vec<Option<usize>> = vec![None; nh];
    for (k, face) in m.faces().iter().enumerate() {
        // corner i of the face is at the vertex of face[i], in the sector after alpha(face[i-1])
        let corner = |i: usize| m.alpha(face[(i + 3) % 4]);
        let l: Vec<i64> = (0..4).map(|i| dv(face[i])).collect();
        let top = (0..4).max_by_key(|&i| (l[i], std::cmp::Reverse(i))).unwrap();
        let (a, b) = if l[(top + 2) % 4] == l[top] {
            (top, (top + 2) % 4)
        } else {
            // simple face: the top corner joins the corner before it
            (top, (top + 3) % 4)
        };
        sector[corner(a)] = Some(2 * k);
        sector[corner(b)] = Some(2 * k + 1);
    }
    let ne = m.num_faces();
    let mut sigma = vec![usize::MAX; 2 * ne];
    let alpha: Vec<usize> = (0..2 * ne).map(|h| h ^ 1).collect();
    let mut tree_vertex_of_q = vec![usize::MAX; m.num_vertices()];
    for start in m.vertex_representatives() {
        if m.vertex(start) == q.origin {
            continue;
        }
        let cyc: Vec<usize> = {
            let mut out = Vec::new();
            let mut h = start;
            loop {
                if let Some(t) = sector[h] {
                    out.push(t);
                }
                h = m.sigma(h);
                if h == start {
                    break;
                }
            }
            out
        };
        if cyc.is_empty() {
            return Err(Error::Rejected("vertex without tree edges".into()));
        }
        for k in 0..cyc.len() {
            sigma[cyc[k]] = cyc[(k + 1) % cyc.len()];
        }
        tree_vertex_of_q[m.vertex(start)] = cyc[0];
    }
    if sigma.contains(&usize::MAX) {
        return Err(Error::Rejected("tree edge at the origin".into()));
    }
    let tmap = CombMap::new(alpha, sigma)?;
    let mut labels = vec![0; tmap.num_vertices()];
    for (qv, &th) in tree_vertex_of_q.iter().enumerate() {
        if th != usize::MAX {
            labels[tmap.vertex(th)] = d[qv];
        }
    }
    let mut h = m.sigma_inv(r);
    let root = loop {
        if let Some(t) = sector[h] {
            break t;
        }
        h = m.sigma_inv(h);
    };
    LabeledOneTree::new(tmap.with_labels(labels)?, root)
}

/// Closed walk in `decode(t)` formed by the successor chains of two corners
/// of the skeleton vertex `v` lying on different sides of the skeleton.
pub fn successor_loop(t: &LabeledOneTree, v: usize) -> Result<Loop> {
    let sk = skeleton_of(t);
    let m = t.map();
    if !sk.in_skeleton[v] {
        return Err(Error::InvalidArgument(format!("vertex {v} is not on the skeleton")));
    }
    let sides: Vec<usize> = m.vertex_half_edges(v).into_iter().filter(|&h| sk.half_edge_in_skeleton[h]).collect();
    let (h1, h2) = (sides[0], sides[1]);
    let (walk, _, succ) = successors(t);
    let mut pos = vec![0; walk.len()];
    for (j, &h) in walk.iter().enumerate() {
        pos[h] = j;
    }
    let chain = |mut j: usize| {
        let mut out = vec![2 * j];
        while let Some(s) = succ[j] {
            out.push(2 * s);
            j = s;
        }
        out
    };
    let mut half_edges = chain(pos[h1]);
    half_edges.extend(chain(pos[h2]).iter().rev().map(|&h| h + 1));
    let hom = decode(t)?.map.homology()?;
    let class = hom.walk_class(&half_edges);
    Ok(Loop { length: half_edges.len(), half_edges, class })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn figure_eight_decodes_to_two_squares() {
        let t = LabeledOneTree::figure_eight(1);
        let q = decode(&t).unwrap();
        assert_eq!(q.map.num_faces(), 2);
        assert_eq!(q.map.num_edges(), 4);
        assert_eq!(q.map.num_vertices(), 2);
        assert_eq!(q.map.genus().unwrap(), 1);
        assert!(q.map.is_bipartite() && q.map.is_quadrangulation());
        assert_eq!(encode(&q).unwrap(), t);
    }

    #[test]
    fn figure_eight_backbone() {
        let t = LabeledOneTree::figure_eight(1);
        let b = backbone(&t).unwrap();
        assert_eq!(b.kind, BackboneKind::Degenerate);
        assert_eq!(b.labels, vec![1]);
        assert_eq!(skeleton(&t).unwrap(), t.canonical());
    }

    #[test]
    fn theta_backbone() {
        // two vertices joined by three edges: half-edges 0,2,4 at A and 1,3,5 at B
        let alpha = vec![1, 0, 3, 2, 5, 4];
        let sigma = vec![2, 3, 4, 5, 0, 1];
        let map = CombMap::new(alpha, sigma).unwrap();
        assert_eq!(map.num_faces(), 1);
        let labels = if map.vertex(0) == 0 { vec![2, 1] } else { vec![1, 2] };
        let t = LabeledOneTree::new(map.with_labels(labels).unwrap(), 0).unwrap();
        let b = backbone(&t).unwrap();
        assert_eq!(b.kind, BackboneKind::Generic);
        assert_eq!(b.labels, vec![2, 1]);
        assert_eq!(b.chain_minima, vec![1, 1, 1]);
    }

    #[test]
    fn successor_loop_of_figure_eight() {
        let t = LabeledOneTree::figure_eight(1);
        let lp = successor_loop(&t, 0).unwrap();
        assert_eq!(lp.length, 2);
        assert_ne!(lp.class, [0, 0]);
        assert!(decode(&t).unwrap().map.is_closed_walk(&lp.half_edges));
    }

    #[test]
    fn rejects_bad_labels() {
        let m = CombMap::figure_eight().with_labels(vec![0]).unwrap();
        assert!(LabeledOneTree::new(m, 0).is_err());
        assert!(decode(&LabeledOneTree::figure_eight(2)).is_err());
    }
}
