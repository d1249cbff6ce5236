//! Combinatorial maps as rotation systems on half-edges.
//!
//! `alpha` pairs half-edges into edges, `sigma` turns counterclockwise
//! around a vertex. Faces are the orbits of `phi = sigma . alpha`
//! (`phi(h) = sigma(alpha(h))`), fixed once for the whole crate.
//!
//! A walk is a sequence of half-edges; half-edge `h` is traversed from the
//! vertex of `h` to the vertex of `alpha(h)`.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinates in a fixed basis of the first homology of the torus.
pub type HomologyClass = [i64; 2];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CombMap {
    alpha: Vec<usize>,
    sigma: Vec<usize>,
    sigma_inv: Vec<usize>,
    vertex_of: Vec<usize>,
    num_vertices: usize,
    labels: Option<Vec<i64>>,
}

/// JSON form: half-edge arrays; `labels[h]` is the label of the vertex of `h`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MapJson {
    pub alpha: Vec<usize>,
    pub sigma: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
}

fn check_permutation(p: &[usize], what: &str) -> Result<()> {
    let mut seen = vec![false; p.len()];
    for &x in p {
        if x >= p.len() || seen[x] {
            return Err(Error::MalformedMap(format!("{what} is not a permutation")));
        }
        seen[x] = true;
    }
    Ok(())
}

impl CombMap {
    pub fn new(alpha: Vec<usize>, sigma: Vec<usize>) -> Result<Self> {
        let n = alpha.len();
        if sigma.len() != n {
            return Err(Error::MalformedMap("alpha and sigma have different lengths".into()));
        }
        if n == 0 || n % 2 != 0 {
            return Err(Error::MalformedMap(format!("need a positive even number of half-edges, got {n}")));
        }
        check_permutation(&alpha, "alpha")?;
        check_permutation(&sigma, "sigma")?;
        for h in 0..n {
            if alpha[h] == h || alpha[alpha[h]] != h {
                return Err(Error::MalformedMap(format!("alpha is not a fixed-point-free involution at {h}")));
            }
        }
        let mut sigma_inv = vec![0; n];
        for h in 0..n {
            sigma_inv[sigma[h]] = h;
        }
        let mut vertex_of = vec![usize::MAX; n];
        let mut nv = 0;
        for h in 0..n {
            if vertex_of[h] != usize::MAX {
                continue;
            }
            let mut c = h;
            loop {
                vertex_of[c] = nv;
                c = sigma[c];
                if c == h {
                    break;
                }
            }
            nv += 1;
        }
        let map = CombMap { alpha, sigma, sigma_inv, vertex_of, num_vertices: nv, labels: None };
        // connectivity of the group generated by sigma and alpha
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(h) = stack.pop() {
            for nb in [map.sigma[h], map.alpha[h]] {
                if !seen[nb] {
                    seen[nb] = true;
                    count += 1;
                    stack.push(nb);
                }
            }
        }
        if count != n {
            return Err(Error::MalformedMap("map is not connected".into()));
        }
        Ok(map)
    }

    /// Attaches one label per vertex (vertex ids as in [`CombMap::vertex`]).
    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.num_vertices {
            return Err(Error::MalformedMap(format!(
                "expected {} vertex labels, got {}",
                self.num_vertices,
                labels.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    /// Single vertex, two loops with interleaved rotation: the one-vertex torus map.
    pub fn figure_eight() -> Self {
        // rotation 0 -> 2 -> 1 -> 3, edges {0,1}, {2,3}
        CombMap::new(vec![1, 0, 3, 2], vec![2, 3, 1, 0]).expect("valid fixture")
    }

    pub fn num_half_edges(&self) -> usize {
        self.alpha.len()
    }

    pub fn num_edges(&self) -> usize {
        self.alpha.len() / 2
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn alpha(&self, h: usize) -> usize {
        self.alpha[h]
    }

    pub fn sigma(&self, h: usize) -> usize {
        self.sigma[h]
    }

    pub fn sigma_inv(&self, h: usize) -> usize {
        self.sigma_inv[h]
    }

    pub fn phi(&self, h: usize) -> usize {
        self.sigma[self.alpha[h]]
    }

    pub fn alpha_perm(&self) -> &[usize] {
        &self.alpha
    }

    pub fn sigma_perm(&self) -> &[usize] {
        &self.sigma
    }

    /// Vertex of a half-edge; vertices are numbered by their smallest half-edge.
    pub fn vertex(&self, h: usize) -> usize {
        self.vertex_of[h]
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn label(&self, v: usize) -> Option<i64> {
        self.labels.as_ref().map(|l| l[v])
    }

    /// Half-edges around `v` in counterclockwise order, starting at the smallest.
    pub fn vertex_half_edges(&self, v: usize) -> Vec<usize> {
        let start = (0..self.num_half_edges()).find(|&h| self.vertex_of[h] == v).expect("vertex exists");
        self.orbit(start, |h| self.sigma[h])
    }

    /// Smallest half-edge at each vertex.
    pub fn vertex_representatives(&self) -> Vec<usize> {
        let mut rep = vec![usize::MAX; self.num_vertices];
        for h in (0..self.num_half_edges()).rev() {
            rep[self.vertex_of[h]] = h;
        }
        rep
    }

    pub fn degree(&self, v: usize) -> usize {
        self.vertex_of.iter().filter(|&&w| w == v).count()
    }

    fn orbit(&self, start: usize, f: impl Fn(usize) -> usize) -> Vec<usize> {
        let mut out = vec![start];
        let mut c = f(start);
        while c != start {
            out.push(c);
            c = f(c);
        }
        out
    }

    /// Face boundaries as closed walks (orbits of `phi`).
    pub fn faces(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.num_half_edges()];
        let mut out = Vec::new();
        for h in 0..self.num_half_edges() {
            if seen[h] {
                continue;
            }
            let f = self.orbit(h, |x| self.phi(x));
            for &x in &f {
                seen[x] = true;
            }
            out.push(f);
        }
        out
    }

    pub fn num_faces(&self) -> usize {
        self.faces().len()
    }

    pub fn face_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.num_half_edges()];
        for (i, f) in self.faces().iter().enumerate() {
            for &h in f {
                out[h] = i;
            }
        }
        out
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.num_edges() as i64 + self.num_faces() as i64
    }

    pub fn genus(&self) -> Result<usize> {
        let two_h = 2 - self.euler_characteristic();
        if two_h < 0 || two_h % 2 != 0 {
            return Err(Error::MalformedMap(format!("Euler characteristic {} is not 2 - 2h", 2 - two_h)));
        }
        Ok((two_h / 2) as usize)
    }

    /// Adjacency as (half-edge, target vertex) lists, in increasing half-edge order.
    fn out_edges(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for h in 0..self.num_half_edges() {
            adj[self.vertex_of[h]].push((h, self.vertex_of[self.alpha[h]]));
        }
        adj
    }

    pub fn bfs_distances(&self, origin: usize) -> Vec<usize> {
        let adj = self.out_edges();
        let mut dist = vec![usize::MAX; self.num_vertices];
        dist[origin] = 0;
        let mut queue = VecDeque::from([origin]);
        while let Some(u) = queue.pop_front() {
            for &(_, w) in &adj[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_bipartite(&self) -> bool {
        let d = self.bfs_distances(0);
        (0..self.num_half_edges()).all(|h| d[self.vertex_of[h]] % 2 != d[self.vertex_of[self.alpha[h]]] % 2)
    }

    pub fn is_quadrangulation(&self) -> bool {
        self.faces().iter().all(|f| f.len() == 4)
    }

    /// True iff consecutive half-edges chain up and the walk returns to its start.
    pub fn is_closed_walk(&self, walk: &[usize]) -> bool {
        if walk.is_empty() {
            return false;
        }
        walk.iter().all(|&h| h < self.num_half_edges())
            && (0..walk.len()).all(|i| {
                let next = walk[(i + 1) % walk.len()];
                self.vertex_of[self.alpha[walk[i]]] == self.vertex_of[next]
            })
    }

    /// Homology cocycle of a genus-1 map by the tree-cotree construction.
    pub fn homology(&self) -> Result<Homology> {
        let genus = self.genus()?;
        if genus != 1 {
            return Err(Error::Unsupported(format!("homology classes need genus 1, got {genus}")));
        }
        let ne = self.num_edges();
        let nh = self.num_half_edges();
        let edge = |h: usize| h.min(self.alpha[h]);
        let mut in_tree = vec![false; nh];
        let adj = self.out_edges();
        let mut seen = vec![false; self.num_vertices];
        seen[0] = true;
        let mut queue = VecDeque::from([0]);
        while let Some(u) = queue.pop_front() {
            for &(h, w) in &adj[u] {
                if !seen[w] {
                    seen[w] = true;
                    in_tree[edge(h)] = true;
                    queue.push_back(w);
                }
            }
        }
        // dual spanning tree avoiding primal tree edges
        let faces = self.faces();
        let face_of = self.face_of();
        let nf = faces.len();
        let mut in_cotree = vec![false; nh];
        let mut parent_half = vec![usize::MAX; nf];
        let mut fseen = vec![false; nf];
        let mut order = vec![0];
        fseen[0] = true;
        let mut i = 0;
        while i < order.len() {
            let f = order[i];
            i += 1;
            for &h in &faces[f] {
                let g = face_of[self.alpha[h]];
                if !fseen[g] && !in_tree[edge(h)] {
                    fseen[g] = true;
                    in_cotree[edge(h)] = true;
                    parent_half[g] = self.alpha[h];
                    order.push(g);
                }
            }
        }
        let mut classes: Vec<Option<HomologyClass>> = vec![None; nh];
        let mut generators = Vec::new();
        for h in 0..nh {
            if h != edge(h) {
                continue;
            }
            let c = if in_tree[h] {
                [0, 0]
            } else if in_cotree[h] {
                continue;
            } else {
                let c = if generators.is_empty() { [1, 0] } else { [0, 1] };
                generators.push(h);
                c
            };
            classes[h] = Some(c);
            classes[self.alpha[h]] = Some([-c[0], -c[1]]);
        }
        debug_assert_eq!(generators.len(), 2, "{ne} edges");
        // leaves of the dual tree first: the face boundary sum fixes the parent edge
        for &f in order.iter().skip(1).rev() {
            let ph = parent_half[f];
            let mut s = [0i64, 0];
            for &h in &faces[f] {
                if h == ph {
                    continue;
                }
                let c = classes[h].expect("children resolved before parents");
                s[0] += c[0];
                s[1] += c[1];
            }
            classes[ph] = Some([-s[0], -s[1]]);
            classes[self.alpha[ph]] = Some(s);
        }
        let classes: Vec<HomologyClass> = classes.into_iter().map(|c| c.expect("all edges classified")).collect();
        Ok(Homology { classes, generators: [generators[0], generators[1]] })
    }

    /// Shortest closed walk from `v` with nonzero homology class.
    pub fn shortest_noncontractible_through(&self, v: usize) -> Result<Loop> {
        let hom = self.homology()?;
        self.shortest_loop_where(v, &hom, |c| c != [0, 0])
    }

    /// Shortest closed walk from `v` whose class is not an integer multiple of
    /// the class of `first`.
    pub fn second_shortest_noncontractible_through(&self, v: usize, first: &Loop) -> Result<Loop> {
        let hom = self.homology()?;
        let c1 = hom.walk_class(&first.half_edges);
        if c1 == [0, 0] {
            return Err(Error::InvalidArgument("first loop is contractible".into()));
        }
        self.shortest_loop_where(v, &hom, |c| !is_integer_multiple(c, c1))
    }

    /// Breadth-first search over (vertex, class) states. Each half-edge class
    /// has coordinates in {-1, 0, 1}, so states at depth `d` have coordinates
    /// bounded by `d`. FIFO order with half-edges scanned in increasing order
    /// returns the lexicographically smallest shortest walk.
    fn shortest_loop_where(&self, v: usize, hom: &Homology, accept: impl Fn(HomologyClass) -> bool) -> Result<Loop> {
        let adj = self.out_edges();
        let max_depth = 2 * self.num_half_edges() + 2;
        let mut states: Vec<(usize, HomologyClass, usize, usize)> = vec![(v, [0, 0], usize::MAX, usize::MAX)];
        let mut index: HashMap<(usize, HomologyClass), usize> = HashMap::from([((v, [0, 0]), 0)]);
        let mut depth = vec![0usize];
        let mut head = 0;
        while head < states.len() {
            let (u, c, _, _) = states[head];
            if depth[head] >= max_depth {
                break;
            }
            for &(h, w) in &adj[u] {
                let hc = hom.classes[h];
                let nc = [c[0] + hc[0], c[1] + hc[1]];
                if index.contains_key(&(w, nc)) {
                    continue;
                }
                let id = states.len();
                states.push((w, nc, head, h));
                depth.push(depth[head] + 1);
                index.insert((w, nc), id);
                if w == v && accept(nc) {
                    let mut walk = Vec::new();
                    let mut s = id;
                    while s != 0 {
                        walk.push(states[s].3);
                        s = states[s].2;
                    }
                    walk.reverse();
                    return Ok(Loop { length: walk.len(), half_edges: walk, class: nc });
                }
            }
            head += 1;
        }
        Err(Error::Unsupported("no admissible loop found".into()))
    }

    /// Canonical code of the map rooted at half-edge `root`: half-edges are
    /// renumbered in breadth-first order over (sigma, alpha); two rooted maps
    /// are isomorphic iff their codes agree.
    pub fn canonical_code(&self, root: usize) -> Vec<(usize, usize, i64)> {
        let nh = self.num_half_edges();
        let mut new_id = vec![usize::MAX; nh];
        let mut order = Vec::with_capacity(nh);
        new_id[root] = 0;
        order.push(root);
        let mut i = 0;
        while i < order.len() {
            let h = order[i];
            i += 1;
            for nb in [self.sigma[h], self.alpha[h]] {
                if new_id[nb] == usize::MAX {
                    new_id[nb] = order.len();
                    order.push(nb);
                }
            }
        }
        order
            .iter()
            .map(|&h| {
                let label = self.labels.as_ref().map_or(0, |l| l[self.vertex_of[h]]);
                (new_id[self.sigma[h]], new_id[self.alpha[h]], label)
            })
            .collect()
    }

    /// The same rooted map with half-edges renumbered canonically; the root becomes 0.
    pub fn canonical_form(&self, root: usize) -> CombMap {
        let code = self.canonical_code(root);
        let sigma: Vec<usize> = code.iter().map(|c| c.0).collect();
        let alpha: Vec<usize> = code.iter().map(|c| c.1).collect();
        let map = CombMap::new(alpha, sigma).expect("relabelling preserves validity");
        match self.labels {
            Some(_) => {
                let mut labels = vec![0; map.num_vertices];
                for (h, c) in code.iter().enumerate() {
                    labels[map.vertex_of[h]] = c.2;
                }
                map.with_labels(labels).expect("one label per vertex")
            }
            None => map,
        }
    }

    pub fn to_json(&self) -> MapJson {
        MapJson {
            alpha: self.alpha.clone(),
            sigma: self.sigma.clone(),
            labels: self
                .labels
                .as_ref()
                .map(|l| (0..self.num_half_edges()).map(|h| l[self.vertex_of[h]]).collect()),
        }
    }

    pub fn from_json(json: &MapJson) -> Result<Self> {
        let map = CombMap::new(json.alpha.clone(), json.sigma.clone())?;
        match &json.labels {
            None => Ok(map),
            Some(per_half) => {
                if per_half.len() != map.num_half_edges() {
                    return Err(Error::MalformedMap("labels must have one entry per half-edge".into()));
                }
                let mut labels = vec![None; map.num_vertices];
                for (h, &l) in per_half.iter().enumerate() {
                    let v = map.vertex_of[h];
                    match labels[v] {
                        None => labels[v] = Some(l),
                        Some(prev) if prev != l => {
                            return Err(Error::MalformedMap(format!("vertex {v} carries labels {prev} and {l}")))
                        }
                        _ => {}
                    }
                }
                map.with_labels(labels.into_iter().map(|l| l.expect("every vertex has a half-edge")).collect())
            }
        }
    }
}

/// Homology class of every half-edge; `class(alpha h) = -class(h)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homology {
    classes: Vec<HomologyClass>,
    generators: [usize; 2],
}

impl Homology {
    pub fn class(&self, h: usize) -> HomologyClass {
        self.classes[h]
    }

    /// The two half-edges carrying the basis vectors `(1,0)` and `(0,1)`.
    pub fn generators(&self) -> [usize; 2] {
        self.generators
    }

    pub fn walk_class(&self, walk: &[usize]) -> HomologyClass {
        walk.iter().fold([0, 0], |acc, &h| [acc[0] + self.classes[h][0], acc[1] + self.classes[h][1]])
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Loop {
    pub length: usize,
    pub half_edges: Vec<usize>,
    pub class: HomologyClass,
}

/// Whether `c = k * base` for some integer `k`; `base` must be nonzero.
pub fn is_integer_multiple(c: HomologyClass, base: HomologyClass) -> bool {
    if c[0] * base[1] != c[1] * base[0] {
        return false;
    }
    let (num, den) = if base[0] != 0 { (c[0], base[0]) } else { (c[1], base[1]) };
    num % den == 0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Torus grid `w x h` with all faces of degree 4.
    pub(crate) fn torus_grid(w: usize, h: usize) -> CombMap {
        // half-edges at vertex (i,j): 4*(j*w+i) + d, d = 0 east, 1 north, 2 west, 3 south
        let idx = |i: usize, j: usize, d: usize| 4 * ((j % h) * w + (i % w)) + d;
        let n = 4 * w * h;
        let mut alpha = vec![0; n];
        let mut sigma = vec![0; n];
        for j in 0..h {
            for i in 0..w {
                for d in 0..4 {
                    sigma[idx(i, j, d)] = idx(i, j, (d + 1) % 4);
                }
                alpha[idx(i, j, 0)] = idx(i + 1, j, 2);
                alpha[idx(i + 1, j, 2)] = idx(i, j, 0);
                alpha[idx(i, j, 1)] = idx(i, j + 1, 3);
                alpha[idx(i, j + 1, 3)] = idx(i, j, 1);
            }
        }
        CombMap::new(alpha, sigma).unwrap()
    }

    #[test]
    fn figure_eight_basics() {
        let m = CombMap::figure_eight();
        assert_eq!((m.num_vertices(), m.num_edges(), m.num_faces()), (1, 2, 1));
        assert_eq!(m.genus().unwrap(), 1);
        let hom = m.homology().unwrap();
        assert_ne!(hom.class(0), hom.class(2));
        let first = m.shortest_noncontractible_through(0).unwrap();
        assert_eq!(first.length, 1);
        let second = m.second_shortest_noncontractible_through(0, &first).unwrap();
        assert_eq!(second.length, 1);
        let (a, b) = (first.class, second.class);
        assert_ne!(a[0] * b[1] - a[1] * b[0], 0);
    }

    #[test]
    fn tree_has_genus_zero() {
        // path with two edges: 0-1 at the middle vertex
        let m = CombMap::new(vec![1, 0, 3, 2], vec![0, 2, 1, 3]).unwrap();
        assert_eq!(m.num_vertices(), 3);
        assert_eq!(m.genus().unwrap(), 0);
        assert!(m.homology().is_err());
        let d = m.bfs_distances(m.vertex(0));
        assert_eq!(d.iter().max(), Some(&2));
    }

    #[test]
    fn single_edge_distances() {
        let m = CombMap::new(vec![1, 0], vec![0, 1]).unwrap();
        let d = m.bfs_distances(0);
        assert_eq!(d, vec![0, 1]);
        assert!(m.is_bipartite());
    }

    #[test]
    fn rejects_malformed() {
        assert!(CombMap::new(vec![0, 1], vec![0, 1]).is_err());
        assert!(CombMap::new(vec![1, 0, 3, 2], vec![0, 1, 2, 3]).is_err());
        assert!(CombMap::new(vec![1, 0], vec![0, 0]).is_err());
    }

    #[test]
    fn grid_loops() {
        let m = torus_grid(4, 3);
        assert_eq!(m.genus().unwrap(), 1);
        assert!(m.is_quadrangulation());
        let hom = m.homology().unwrap();
        for f in m.faces() {
            assert_eq!(hom.walk_class(&f), [0, 0]);
        }
        for h in 0..m.num_half_edges() {
            assert!(hom.class(h).iter().all(|c| c.abs() <= 1));
        }
        let first = m.shortest_noncontractible_through(0).unwrap();
        assert_eq!(first.length, 3);
        assert!(m.is_closed_walk(&first.half_edges));
        let second = m.second_shortest_noncontractible_through(0, &first).unwrap();
        assert_eq!(second.length, 4);
    }

    #[test]
    fn json_roundtrip() {
        let m = CombMap::figure_eight().with_labels(vec![1]).unwrap();
        let s = serde_json::to_string(&m.to_json()).unwrap();
        let back = CombMap::from_json(&serde_json::from_str(&s).unwrap()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn canonical_code_detects_isomorphism() {
        let m = torus_grid(3, 2);
        // relabel half-edges by a permutation
        let n = m.num_half_edges();
        let perm: Vec<usize> = (0..n).map(|h| (h * 5 + 3) % n).collect();
        let mut alpha = vec![0; n];
        let mut sigma = vec![0; n];
        for h in 0..n {
            alpha[perm[h]] = perm[m.alpha(h)];
            sigma[perm[h]] = perm[m.sigma(h)];
        }
        let m2 = CombMap::new(alpha, sigma).unwrap();
        assert_eq!(m.canonical_code(0), m2.canonical_code(perm[0]));
        assert_eq!(m.canonical_form(7), m2.canonical_form(perm[7]));
    }

    proptest! {
        #[test]
        fn homology_is_additive_on_walks(w in 2usize..5, h in 2usize..5, steps in proptest::collection::vec(0usize..4, 1..30)) {
            let m = torus_grid(w, h);
            let hom = m.homology().unwrap();
            // random walk from vertex 0 following the chosen direction index
            let mut walk = Vec::new();
            let mut u = 0usize;
            for s in steps {
                let hs = m.vertex_half_edges(u);
                let e = hs[s % hs.len()];
                walk.push(e);
                u = m.vertex(m.alpha(e));
            }
            let c = hom.walk_class(&walk);
            let rev: Vec<usize> = walk.iter().rev().map(|&e| m.alpha(e)).collect();
            let back = hom.walk_class(&rev);
            prop_assert_eq!([c[0] + back[0], c[1] + back[1]], [0, 0]);
            let (a, b) = walk.split_at(walk.len() / 2);
            let ca = hom.walk_class(a);
            let cb = hom.walk_class(b);
            prop_assert_eq!([ca[0] + cb[0], ca[1] + cb[1]], c);
        }
    }
}
