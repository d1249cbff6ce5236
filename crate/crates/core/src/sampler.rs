//! Boltzmann sampling of well-labeled 1-trees along the backbone/chain
//! decomposition, with importance weights for the minimum-label constraint.
//!
//! A proposal draws the backbone labels from the difference weights
//! `K^3_{l1,l2} - K^3_{l1-1,l2-1}` (generic) or `K^2_{l,l} - K^2_{l-1,l-1}`
//! (degenerate), then every chain from the Boltzmann law of `K`. Only
//! proposals whose global minimum label is 1 are kept, with weight
//! `K^3 / (K^3 - K^3_shifted)`; weighted averages are unbiased for the
//! Boltzmann law restricted to labels with minimum 1, hence uniform over
//! corner-rooted objects of each size.
//!
//! Streams: sample `i` of a run with seed `s` draws from
//! `ChaCha8Rng::seed_from_u64(s)` on stream `i`, so results do not depend on
//! scheduling or thread count.

use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::codec::{BackboneKind, LabeledOneTree};
use crate::error::{Error, Result};
use crate::gf::numeric::NumericGf;
use crate::map::CombMap;

/// Closes the most recent child in a [`Forest`] code.
pub const UP: i8 = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplerConfig {
    /// Target size (number of edges).
    pub n: usize,
    /// Sizes in `[n (1 - delta), n (1 + delta)]` are retained.
    pub delta: f64,
    /// Edge weight; `(1 - n^{-1}) / 12` when absent.
    pub g: Option<f64>,
    pub seed: u64,
    /// Proposals per sample before giving up.
    pub max_attempts: u64,
    /// Largest spine label; `8 n^{1/4}` when absent.
    pub label_cap: Option<u64>,
}

impl SamplerConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SamplerConfig { n, delta: 0.5, g: None, seed, max_attempts: 100_000, label_cap: None }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::OutOfRange { what: "n", value: self.n.to_string(), range: ">= 2" });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::OutOfRange { what: "delta", value: self.delta.to_string(), range: "(0, 1)" });
        }
        if let Some(g) = self.g {
            if !(g > 0.0 && g < 1.0 / 12.0) {
                return Err(Error::OutOfRange { what: "g", value: g.to_string(), range: "(0, 1/12)" });
            }
        }
        if self.max_attempts == 0 {
            return Err(Error::OutOfRange { what: "max_attempts", value: "0".into(), range: ">= 1" });
        }
        let (lo, hi) = self.size_window();
        if lo > hi || hi < 2 {
            return Err(Error::InvalidArgument(format!("size window [{lo}, {hi}] is empty")));
        }
        Ok(())
    }

    /// Retained sizes, inclusive.
    pub fn size_window(&self) -> (usize, usize) {
        let n = self.n as f64;
        let lo = (n * (1.0 - self.delta) - 1e-9).ceil().max(2.0) as usize;
        let hi = (n * (1.0 + self.delta) + 1e-9).floor() as usize;
        (lo, hi)
    }

    /// `eps` with `g = (1 - eps^2)/12`; the mean size of the Boltzmann law is about `1/eps^2`.
    pub fn eps(&self) -> f64 {
        match self.g {
            Some(g) => (1.0 - 12.0 * g).sqrt(),
            None => (self.n as f64).powf(-0.5),
        }
    }

    pub fn label_cap(&self) -> u64 {
        self.label_cap.unwrap_or_else(|| ((8.0 * (self.n as f64).powf(0.25)).floor() as u64).max(4))
    }
}

/// Planted subtrees hanging in one corner, in counterclockwise order,
/// written depth first: `-1`, `0` or `1` opens a child with that label
/// change, [`UP`] closes it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Forest {
    pub root_label: i64,
    pub code: Vec<i8>,
}

impl Forest {
    pub fn size(&self) -> usize {
        self.code.iter().filter(|&&c| c != UP).count()
    }

    /// Labels of the non-root vertices in depth-first order.
    pub fn labels(&self) -> Vec<i64> {
        let mut stack = vec![self.root_label];
        let mut out = Vec::new();
        for &c in &self.code {
            if c == UP {
                stack.pop();
            } else {
                let l = stack.last().expect("open vertex") + c as i64;
                out.push(l);
                stack.push(l);
            }
        }
        out
    }

    pub fn min_label(&self) -> i64 {
        self.labels().into_iter().fold(self.root_label, i64::min)
    }
}

/// A chain of trees between two marked vertices (one `K` structure).
///
/// `spine` lists the path labels from start to end. `forests[0]` hangs at
/// the start, `forests[2i - 1]` and `forests[2i]` on the two sides of
/// interior vertex `i`, and the last one at the end.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Chain {
    pub spine: Vec<i64>,
    pub forests: Vec<Forest>,
}

impl Chain {
    pub fn size(&self) -> usize {
        self.spine.len() - 1 + self.forests.iter().map(Forest::size).sum::<usize>()
    }

    pub fn spine_min(&self) -> i64 {
        *self.spine.iter().min().expect("non-empty spine")
    }

    pub fn min_label(&self) -> i64 {
        self.forests.iter().map(Forest::min_label).fold(self.spine_min(), i64::min)
    }
}

/// A sampled 1-tree in decomposed form. Generic: `labels = [l1, l2]` and
/// three chains from `l1` to `l2`, counterclockwise at the first junction.
/// Degenerate: `labels = [l]` and two loops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OneTreeSample {
    pub kind: BackboneKind,
    pub labels: Vec<i64>,
    pub chains: Vec<Chain>,
}

impl OneTreeSample {
    pub fn size(&self) -> usize {
        self.chains.iter().map(Chain::size).sum()
    }

    pub fn num_vertices(&self) -> usize {
        self.size() - 1
    }

    pub fn min_label(&self) -> i64 {
        self.chains.iter().map(Chain::min_label).min().expect("chains")
    }

    /// Minimum label on each chain, endpoints included, in decreasing order.
    pub fn chain_minima(&self) -> Vec<i64> {
        let mut m: Vec<i64> = self.chains.iter().map(Chain::spine_min).collect();
        m.sort_unstable_by(|a, b| b.cmp(a));
        m
    }

    pub fn min_skeleton_label(&self) -> i64 {
        *self.chain_minima().last().expect("chains")
    }

    /// Second smallest chain minimum; for a degenerate backbone, the larger loop minimum.
    pub fn second_minimum(&self) -> i64 {
        self.chain_minima()[self.chains.len() - 2]
    }

    /// Every vertex label: junctions, then interior spine vertices, then tree vertices.
    pub fn vertex_labels(&self) -> Vec<i64> {
        let mut out = self.labels.clone();
        for c in &self.chains {
            out.extend_from_slice(&c.spine[1..c.spine.len() - 1]);
        }
        for c in &self.chains {
            for f in &c.forests {
                out.extend(f.labels());
            }
        }
        out
    }

    /// The 1-tree as a combinatorial map, rooted at corner `root` of the
    /// deterministic half-edge numbering used here (`root < 2 * size`).
    pub fn materialize(&self, root: usize) -> Result<LabeledOneTree> {
        let mut b = Builder::default();
        match self.kind {
            BackboneKind::Generic => {
                let v1 = b.vertex(self.labels[0]);
                let v2 = b.vertex(self.labels[1]);
                let ends: Vec<(usize, usize)> = self.chains.iter().map(|c| b.spine(c, v1, v2)).collect();
                for (c, &(out, _)) in self.chains.iter().zip(&ends) {
                    b.rot[v1].push(out);
                    b.forest(v1, &c.forests[0]);
                }
                // the same cyclic order at the second junction leaves a single face
                for j in 0..3 {
                    b.rot[v2].push(ends[j].1);
                    b.forest(v2, self.chains[j].forests.last().expect("end forest"));
                }
            }
            BackboneKind::Degenerate => {
                let v = b.vertex(self.labels[0]);
                let ends: Vec<(usize, usize)> = self.chains.iter().map(|c| b.spine(c, v, v)).collect();
                // interleaved loops: out_0, out_1, in_0, in_1
                for (j, first) in [(0, true), (1, true), (0, false), (1, false)] {
                    let c = &self.chains[j];
                    if first {
                        b.rot[v].push(ends[j].0);
                        b.forest(v, &c.forests[0]);
                    } else {
                        b.rot[v].push(ends[j].1);
                        b.forest(v, c.forests.last().expect("end forest"));
                    }
                }
            }
        }
        b.finish(root)
    }
}

#[derive(Default)]
struct Builder {
    rot: Vec<Vec<usize>>,
    label: Vec<i64>,
    half_edges: usize,
}

impl Builder {
    fn vertex(&mut self, label: i64) -> usize {
        self.rot.push(Vec::new());
        self.label.push(label);
        self.rot.len() - 1
    }

    /// Half-edges `h` (at the tail) and `h + 1` (at the head).
    fn edge(&mut self) -> usize {
        self.half_edges += 2;
        self.half_edges - 2
    }

    /// Spine edges and interior vertices of a chain; returns the half-edges
    /// at its start and end junctions.
    fn spine(&mut self, c: &Chain, start: usize, end: usize) -> (usize, usize) {
        let k = c.spine.len() - 1;
        let mut vs = vec![start];
        for &l in &c.spine[1..k] {
            vs.push(self.vertex(l));
        }
        vs.push(end);
        let edges: Vec<usize> = (0..k).map(|_| self.edge()).collect();
        for i in 1..k {
            let v = vs[i];
            self.rot[v].push(edges[i - 1] + 1);
            self.forest(v, &c.forests[2 * i - 1]);
            self.rot[v].push(edges[i]);
            self.forest(v, &c.forests[2 * i]);
        }
        (edges[0], edges[k - 1] + 1)
    }

    fn forest(&mut self, at: usize, f: &Forest) {
        let mut stack = vec![at];
        for &c in &f.code {
            if c == UP {
                stack.pop();
                continue;
            }
            let parent = *stack.last().expect("open vertex");
            let w = self.vertex(self.label[parent] + c as i64);
            let e = self.edge();
            self.rot[parent].push(e);
            self.rot[w].push(e + 1);
            stack.push(w);
        }
    }

    fn finish(self, root: usize) -> Result<LabeledOneTree> {
        let n = self.half_edges;
        let alpha: Vec<usize> = (0..n).map(|h| h ^ 1).collect();
        let mut sigma = vec![usize::MAX; n];
        for r in &self.rot {
            for (i, &h) in r.iter().enumerate() {
                sigma[h] = r[(i + 1) % r.len()];
            }
        }
        let map = CombMap::new(alpha, sigma)?;
        let mut labels = vec![0; map.num_vertices()];
        for (v, r) in self.rot.iter().enumerate() {
            labels[map.vertex(r[0])] = self.label[v];
        }
        LabeledOneTree::new(map.with_labels(labels)?, root)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Abort {
    Oversize,
    LabelCap,
}

/// Running edge count with an early abort above the size window.
struct Budget {
    edges: usize,
    max: usize,
}

impl Budget {
    fn add(&mut self, k: usize) -> std::result::Result<(), Abort> {
        self.edges += k;
        if self.edges > self.max {
            Err(Abort::Oversize)
        } else {
            Ok(())
        }
    }
}

/// Per-label tables shared by all draws at one value of `g`.
#[derive(Clone, Debug)]
struct Tables {
    gf: NumericGf,
    /// `R_l` for `0 <= l < r.len()`.
    r: Vec<f64>,
    /// Cumulative child weights `g R_{l-1}`, `+ g R_l`, `+ g R_{l+1}`; the
    /// last entry is the probability of one more child.
    steps: Vec<[f64; 3]>,
}

impl Tables {
    fn new(gf: NumericGf, len: usize) -> Self {
        let r: Vec<f64> = (0..len + 2).map(|l| gf.r_label(l as u64)).collect();
        let steps = (0..len).map(|l| Self::step_of(gf.g, &r, l)).collect();
        Tables { gf, r, steps }
    }

    fn step_of(g: f64, r: &[f64], l: usize) -> [f64; 3] {
        let lo = if l == 0 { 0.0 } else { r[l - 1] };
        let a = g * lo;
        let b = a + g * r[l];
        [a, b, b + g * r[l + 1]]
    }

    fn r_at(&self, l: i64) -> f64 {
        match usize::try_from(l) {
            Ok(i) if i < self.r.len() => self.r[i],
            Ok(_) => self.gf.r_label(l as u64),
            Err(_) => 0.0,
        }
    }

    fn step(&self, l: i64) -> [f64; 3] {
        let i = l as usize;
        if i < self.steps.len() {
            self.steps[i]
        } else {
            let r = [self.r_at(l - 1), self.r_at(l), self.r_at(l + 1)];
            Self::step_of(self.gf.g, &r, 1)
        }
    }

    /// One Boltzmann sequence of planted trees in a corner of label `root`.
    fn forest<R: Rng>(&self, root: i64, rng: &mut R, budget: &mut Budget) -> std::result::Result<Forest, Abort> {
        let mut code = Vec::new();
        let mut stack = vec![root];
        while let Some(&l) = stack.last() {
            let s = self.step(l);
            let u: f64 = rng.gen();
            if u < s[2] {
                let d: i8 = if u < s[0] {
                    -1
                } else if u < s[1] {
                    0
                } else {
                    1
                };
                budget.add(1)?;
                code.push(d);
                stack.push(l + d as i64);
            } else {
                stack.pop();
                if !stack.is_empty() {
                    code.push(UP);
                }
            }
        }
        Ok(Forest { root_label: root, code })
    }

    /// One `K_{a,b}` chain. `col[a] = K_{a,b}` for `a <= cap`.
    fn chain<R: Rng>(
        &self,
        a: i64,
        b: i64,
        col: &[f64],
        cap: i64,
        rng: &mut R,
        budget: &mut Budget,
    ) -> std::result::Result<Chain, Abort> {
        let mut spine = vec![a];
        let mut forests = vec![self.forest(a, rng, budget)?];
        let mut cur = a;
        loop {
            if cur + 1 > cap {
                return Err(Abort::LabelCap);
            }
            // weights of (a-1, a, a+1) continuing, then stopping at b
            let mut w = [0.0; 4];
            for (i, ap) in (cur - 1..=cur + 1).enumerate() {
                if ap >= 1 {
                    w[i] = self.r_at(ap) * col[ap as usize];
                }
            }
            w[3] = self.r_at(b) * if (cur - b).abs() <= 1 { 1.0 } else { 0.0 };
            let total: f64 = w.iter().sum();
            let mut u = rng.gen::<f64>() * total;
            let mut pick = 3;
            for (i, &wi) in w.iter().enumerate() {
                if u < wi {
                    pick = i;
                    break;
                }
                u -= wi;
            }
            // guard against rounding at the upper end
            while w[pick] == 0.0 {
                pick -= 1;
            }
            budget.add(1)?;
            let next = if pick == 3 { b } else { cur - 1 + pick as i64 };
            spine.push(next);
            forests.push(self.forest(next, rng, budget)?);
            if pick == 3 {
                return Ok(Chain { spine, forests });
            }
            forests.push(self.forest(next, rng, budget)?);
            cur = next;
        }
    }
}

/// Boltzmann planted tree (a root of label `l` and its sequence of
/// subtrees); draws above `max_size` edges are discarded and redrawn.
pub fn sample_planted_tree<R: Rng>(g: f64, l: i64, max_size: usize, rng: &mut R) -> Result<Forest> {
    if l < 1 {
        return Err(Error::OutOfRange { what: "label", value: l.to_string(), range: ">= 1" });
    }
    let t = Tables::new(NumericGf::from_g(g)?, (l as usize) + 64);
    loop {
        let mut budget = Budget { edges: 0, max: max_size };
        if let Ok(f) = t.forest(l, rng, &mut budget) {
            return Ok(f);
        }
    }
}

/// Boltzmann `K_{l1,l2}` chain; spine labels above `label_cap` and sizes
/// above `max_size` cause a redraw.
pub fn sample_chain<R: Rng>(g: f64, l1: i64, l2: i64, label_cap: u64, max_size: usize, rng: &mut R) -> Result<Chain> {
    if l1 < 1 || l2 < 1 || l1.max(l2) as u64 > label_cap {
        return Err(Error::InvalidArgument(format!("need 1 <= l1, l2 <= {label_cap}")));
    }
    let gf = NumericGf::from_g(g)?;
    let col = gf.k_column(l2 as u64, 2 * label_cap + 16);
    let t = Tables::new(gf, label_cap as usize + 64);
    loop {
        let mut budget = Budget { edges: 0, max: max_size };
        if let Ok(c) = t.chain(l1, l2, &col, label_cap as i64, rng, &mut budget) {
            return Ok(c);
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Diagnostics {
    pub proposals: u64,
    pub accepted: u64,
    pub oversize: u64,
    pub undersize: u64,
    pub min_rejected: u64,
    pub label_cap_overflows: u64,
}

impl Diagnostics {
    pub fn merge(&mut self, o: &Diagnostics) {
        self.proposals += o.proposals;
        self.accepted += o.accepted;
        self.oversize += o.oversize;
        self.undersize += o.undersize;
        self.min_rejected += o.min_rejected;
        self.label_cap_overflows += o.label_cap_overflows;
    }

    pub fn acceptance_rate(&self) -> f64 {
        self.accepted as f64 / self.proposals.max(1) as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedSample {
    pub tree: OneTreeSample,
    /// Likelihood ratio `K^3 / (K^3 - K^3_shifted)` (`K^2` for degenerate backbones).
    pub weight: f64,
    pub size: usize,
    /// Uniform root corner for [`OneTreeSample::materialize`].
    pub root: usize,
}

impl WeightedSample {
    pub fn materialize(&self) -> Result<LabeledOneTree> {
        self.tree.materialize(self.root)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct BackboneChoice {
    kind: BackboneKind,
    l1: i64,
    l2: i64,
    weight: f64,
}

/// Precomputed tables for one configuration.
#[derive(Clone, Debug)]
pub struct Sampler {
    cfg: SamplerConfig,
    window: (usize, usize),
    cap: i64,
    tables: Tables,
    /// `columns[b][a] = K_{a,b}` for `a, b <= cap`.
    columns: Vec<Vec<f64>>,
    choices: Vec<BackboneChoice>,
    index: WeightedIndex<f64>,
    /// Probability of a degenerate backbone under the proposal.
    degenerate_mass: f64,
}

impl Sampler {
    pub fn new(cfg: SamplerConfig) -> Result<Self> {
        cfg.validate()?;
        let gf = match cfg.g {
            Some(g) => NumericGf::from_g(g)?,
            None => NumericGf::from_eps(cfg.eps())?,
        };
        let cap = cfg.label_cap();
        // solve on a wider band so the truncated boundary does not reach the used entries
        let columns: Vec<Vec<f64>> = (0..=cap).map(|b| gf.k_column(b, 2 * cap + 16)).collect();
        let k = |a: i64, b: i64| columns[b as usize][a as usize];
        let mut choices = Vec::new();
        for l1 in 1..=cap as i64 {
            for l2 in 1..=cap as i64 {
                let (hi, lo) = (k(l1, l2).powi(3), k(l1 - 1, l2 - 1).powi(3));
                let d = hi - lo;
                if d > 0.0 {
                    choices.push(BackboneChoice { kind: BackboneKind::Generic, l1, l2, weight: d / 6.0 });
                }
            }
        }
        for l in 1..=cap as i64 {
            let d = k(l, l).powi(2) - k(l - 1, l - 1).powi(2);
            if d > 0.0 {
                choices.push(BackboneChoice { kind: BackboneKind::Degenerate, l1: l, l2: l, weight: d / 4.0 });
            }
        }
        let total: f64 = choices.iter().map(|c| c.weight).sum();
        let degenerate_mass =
            choices.iter().filter(|c| c.kind == BackboneKind::Degenerate).map(|c| c.weight).sum::<f64>() / total;
        let index = WeightedIndex::new(choices.iter().map(|c| c.weight))
            .map_err(|e| Error::InvalidArgument(format!("backbone weights: {e}")))?;
        let tables = Tables::new(gf, 4 * cap as usize + 64);
        let window = cfg.size_window();
        Ok(Sampler { cfg, window, cap: cap as i64, tables, columns, choices, index, degenerate_mass })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.cfg
    }

    pub fn g(&self) -> f64 {
        self.tables.gf.g
    }

    pub fn degenerate_proposal_mass(&self) -> f64 {
        self.degenerate_mass
    }

    fn k(&self, a: i64, b: i64) -> f64 {
        if a < 1 || b < 1 {
            0.0
        } else {
            self.columns[b as usize][a as usize]
        }
    }

    /// Importance weight of every retained object with this backbone; the
    /// proposal keeps an object `o` with probability proportional to `1 / weight(o)`.
    pub fn weight_for(&self, kind: BackboneKind, l1: i64, l2: i64) -> f64 {
        let p = match kind {
            BackboneKind::Generic => 3,
            BackboneKind::Degenerate => 2,
        };
        let hi = self.k(l1, l2).powi(p);
        hi / (hi - self.k(l1 - 1, l2 - 1).powi(p))
    }

    /// The random stream of sample `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.cfg.seed);
        rng.set_stream(index);
        rng
    }

    /// One proposal: `Ok(Some)` when retained, `Ok(None)` when rejected.
    fn propose<R: Rng>(&self, rng: &mut R, diag: &mut Diagnostics) -> Option<WeightedSample> {
        diag.proposals += 1;
        let choice = self.choices[self.index.sample(rng)];
        let mut budget = Budget { edges: 0, max: self.window.1 };
        let (labels, nchains, b) = match choice.kind {
            BackboneKind::Generic => (vec![choice.l1, choice.l2], 3, choice.l2),
            BackboneKind::Degenerate => (vec![choice.l1], 2, choice.l1),
        };
        let col = &self.columns[b as usize];
        let mut chains = Vec::with_capacity(nchains);
        for _ in 0..nchains {
            match self.tables.chain(choice.l1, b, col, self.cap, rng, &mut budget) {
                Ok(c) => chains.push(c),
                Err(Abort::Oversize) => {
                    diag.oversize += 1;
                    return None;
                }
                Err(Abort::LabelCap) => {
                    diag.label_cap_overflows += 1;
                    return None;
                }
            }
        }
        let tree = OneTreeSample { kind: choice.kind, labels, chains };
        let size = budget.edges;
        if size < self.window.0 {
            diag.undersize += 1;
            return None;
        }
        if tree.min_label() != 1 {
            diag.min_rejected += 1;
            return None;
        }
        diag.accepted += 1;
        let weight = self.weight_for(choice.kind, choice.l1, choice.l2);
        let root = rng.gen_range(0..2 * size);
        Some(WeightedSample { tree, weight, size, root })
    }

    /// Sample `index` of the run, with its proposal statistics.
    pub fn sample(&self, index: u64) -> Result<(WeightedSample, Diagnostics)> {
        let mut rng = self.stream(index);
        let mut diag = Diagnostics::default();
        for _ in 0..self.cfg.max_attempts {
            if let Some(s) = self.propose(&mut rng, &mut diag) {
                return Ok((s, diag));
            }
        }
        Err(Error::SamplerExhausted { attempts: diag.proposals, acceptance_rate: diag.acceptance_rate() })
    }

    /// Retained samples among proposals `0..count` of one stream.
    /// Sample `index` reduced to its statistics; the marked vertex is drawn
    /// from a separate word range of the same stream.
    pub fn summary(&self, index: u64) -> Result<(SampleSummary, Diagnostics)> {
        let (s, d) = self.sample(index)?;
        let mut rng = self.stream(index);
        rng.set_word_pos(1 << 60);
        Ok((SampleSummary::of(index, &s, &mut rng), d))
    }

    pub fn proposals(&self, stream: u64, count: u64) -> (Vec<WeightedSample>, Diagnostics) {
        let mut rng = self.stream(stream);
        let mut diag = Diagnostics::default();
        let out = (0..count).filter_map(|_| self.propose(&mut rng, &mut diag)).collect();
        (out, diag)
    }
}

/// One weighted draw under `cfg` (sample index 0 of its stream).
pub fn sample_one_tree(cfg: &SamplerConfig) -> Result<WeightedSample> {
    Ok(Sampler::new(cfg.clone())?.sample(0)?.0)
}

/// Per-sample statistics; distances are labels (distances to the origin).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleSummary {
    pub index: u64,
    pub size: usize,
    pub weight: f64,
    pub kind: BackboneKind,
    pub min_skeleton: i64,
    pub second_minimum: i64,
    pub marked_distance: i64,
}

impl SampleSummary {
    pub fn of(index: u64, s: &WeightedSample, rng: &mut impl Rng) -> Self {
        let labels = s.tree.vertex_labels();
        let marked = labels[rng.gen_range(0..labels.len())];
        SampleSummary {
            index,
            size: s.size,
            weight: s.weight,
            kind: s.tree.kind,
            min_skeleton: s.tree.min_skeleton_label(),
            second_minimum: s.tree.second_minimum(),
            marked_distance: marked,
        }
    }

    pub const CSV_HEADER: &'static str = "size,weight,minskel,m2,marked_distance";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.17e},{},{},{}",
            self.size, self.weight, self.min_skeleton, self.second_minimum, self.marked_distance
        )
    }
}

/// Weighted CDF of `value / size^{1/4}` with each integer value spread
/// uniformly over `[value - 1/2, value + 1/2]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedCdf {
    pub r: Vec<f64>,
    pub cdf: Vec<f64>,
    /// `sqrt(F (1 - F) / n_eff)` with the Kish effective sample size.
    pub stderr: Vec<f64>,
}

impl WeightedCdf {
    pub fn new(points: &[(f64, usize, i64)], r: &[f64]) -> Self {
        let sw: f64 = points.iter().map(|p| p.0).sum();
        let sw2: f64 = points.iter().map(|p| p.0 * p.0).sum();
        let n_eff = sw * sw / sw2;
        let mut cdf = Vec::with_capacity(r.len());
        for &x in r {
            let mut acc = 0.0;
            for &(w, size, v) in points {
                let t = x * (size as f64).powf(0.25) - (v as f64 - 0.5);
                acc += w * t.clamp(0.0, 1.0);
            }
            cdf.push(acc / sw);
        }
        let stderr = cdf.iter().map(|&f| (f * (1.0 - f) / n_eff).sqrt()).collect();
        WeightedCdf { r: r.to_vec(), cdf, stderr }
    }

    pub fn sup_distance(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        self.r
            .iter()
            .zip(&self.cdf)
            .map(|(&r, &c)| ((c - f(r)).abs(), r))
            .fold((0.0, 0.0), |a, b| if b.0 > a.0 { b } else { a })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Empirical {
    pub samples: Vec<SampleSummary>,
    pub half_systole: WeightedCdf,
    pub second_minimum: WeightedCdf,
    pub marked_distance: WeightedCdf,
    pub diagnostics: Diagnostics,
    /// Kish effective sample size `(sum w)^2 / sum w^2`.
    pub effective_samples: f64,
}

/// `count` weighted samples and the weighted CDFs of the rescaled minimum
/// skeleton label, second chain minimum and marked-vertex distance on `r`.
pub fn empirical_distributions(cfg: &SamplerConfig, count: u64, r: &[f64]) -> Result<Empirical> {
    if count == 0 {
        return Err(Error::OutOfRange { what: "samples", value: "0".into(), range: ">= 1" });
    }
    let sampler = Sampler::new(cfg.clone())?;
    let results: Vec<Result<(SampleSummary, Diagnostics)>> =
        (0..count).into_par_iter().map(|i| sampler.summary(i)).collect();
    let mut samples = Vec::with_capacity(count as usize);
    let mut diagnostics = Diagnostics::default();
    for r in results {
        let (s, d) = r?;
        diagnostics.merge(&d);
        samples.push(s);
    }
    let pts = |f: fn(&SampleSummary) -> i64| -> Vec<(f64, usize, i64)> {
        samples.iter().map(|s| (s.weight, s.size, f(s))).collect()
    };
    let half_systole = WeightedCdf::new(&pts(|s| s.min_skeleton), r);
    let second_minimum = WeightedCdf::new(&pts(|s| s.second_minimum), r);
    let marked_distance = WeightedCdf::new(&pts(|s| s.marked_distance), r);
    let sw: f64 = samples.iter().map(|s| s.weight).sum();
    let sw2: f64 = samples.iter().map(|s| s.weight * s.weight).sum();
    Ok(Empirical {
        samples,
        half_systole,
        second_minimum,
        marked_distance,
        diagnostics,
        effective_samples: sw * sw / sw2,
    })
}

/// Upper tail `P(X^2 >= stat)` of a chi-square law with `df` degrees of freedom.
pub fn chi_square_p_value(stat: f64, df: f64) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    ChiSquared::new(df).map(|d| d.sf(stat)).unwrap_or(f64::NAN)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Pearson test of counts against probabilities. Cells are merged in order
/// of increasing probability until every merged cell expects at least
/// `min_expected` draws.
pub fn chi_square(observed: &[u64], probs: &[f64], min_expected: f64) -> ChiSquare {
    let total: u64 = observed.iter().sum();
    let norm: f64 = probs.iter().sum();
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[a].total_cmp(&probs[b]));
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for &i in &order {
        o += observed[i] as f64;
        e += probs[i] / norm * total as f64;
        if e >= min_expected {
            cells.push((o, e));
            o = 0.0;
            e = 0.0;
        }
    }
    if e > 0.0 || o > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += o;
                last.1 += e;
            }
            None => cells.push((o, e)),
        }
    }
    let statistic: f64 = cells.iter().map(|&(o, e)| (o - e).powi(2) / e).sum();
    let df = cells.len().saturating_sub(1).max(1);
    ChiSquare { statistic, df, p_value: chi_square_p_value(statistic, df as f64) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn materialized_samples_are_well_labeled_tori() {
        let mut cfg = SamplerConfig::new(40, 7);
        cfg.delta = 0.9;
        let s = Sampler::new(cfg).unwrap();
        for i in 0..200 {
            let (w, _) = s.sample(i).unwrap();
            let t = w.materialize().unwrap();
            assert_eq!(t.genus(), 1);
            assert!(t.is_well_labeled());
            assert_eq!(t.num_edges(), w.size);
            assert!(w.weight >= 1.0);
            let bb = crate::codec::backbone(&t).unwrap();
            assert_eq!(bb.kind, w.tree.kind);
            assert_eq!(bb.chain_minima, w.tree.chain_minima());
        }
    }

    #[test]
    fn leaf_probability_is_geometric() {
        let gf = NumericGf::from_g(0.08).unwrap();
        let t = Tables::new(gf, 10);
        let l = 3;
        let p_leaf = 1.0 - 0.08 * (gf.r_label(2) + gf.r_label(3) + gf.r_label(4));
        assert!((1.0 - t.step(l)[2] - p_leaf).abs() < 1e-15);
        // label 1 never has a child of label 0
        assert_eq!(t.step(1)[0], 0.0);
    }

    #[test]
    fn deterministic_streams() {
        let cfg = SamplerConfig::new(30, 11);
        let a = Sampler::new(cfg.clone()).unwrap().sample(5).unwrap().0;
        let b = Sampler::new(cfg).unwrap().sample(5).unwrap().0;
        assert_eq!(a, b);
    }
}
