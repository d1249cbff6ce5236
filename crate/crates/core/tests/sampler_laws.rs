use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use toromaps::codec::{backbone, decode, encode, BackboneKind};
use toromaps::enumerate;
use toromaps::gf::skeleton::exact_min_skeleton_distribution;
use toromaps::gf::SeriesGf;
use toromaps::sampler::{chi_square, sample_chain, sample_planted_tree, Sampler, SamplerConfig};
use toromaps::verify::small_size_chi_square;

const DRAWS: usize = 100_000;

#[test]
fn planted_tree_sizes_and_shapes() {
    let g = 0.06;
    let l = 2;
    let max = 3;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut by_size = vec![0u64; max + 1];
    let mut size_two: HashMap<Vec<i8>, u64> = HashMap::new();
    for _ in 0..DRAWS {
        let f = sample_planted_tree(g, l, max, &mut rng).unwrap();
        by_size[f.size()] += 1;
        if f.size() == 2 {
            *size_two.entry(f.code.clone()).or_default() += 1;
        }
    }
    let counts: Vec<f64> =
        (0..=max).map(|k| enumerate::enum_planted_trees(l, k).unwrap().total() as f64 * g.powi(k as i32)).collect();
    let t = chi_square(&by_size, &counts, 5.0);
    assert!(t.p_value > 1e-3, "{t:?}");
    // every planted tree of size 2 appears, uniformly
    assert_eq!(size_two.len() as u64, enumerate::enum_planted_trees(l, 2).unwrap().total());
    let obs: Vec<u64> = size_two.values().copied().collect();
    let t = chi_square(&obs, &vec![1.0; obs.len()], 5.0);
    assert!(t.p_value > 1e-3, "{t:?}");
}

#[test]
fn chain_sizes_follow_the_propagator() {
    let g = 0.05;
    let (a, b) = (2, 1);
    let max = 3;
    let k = SeriesGf::new(max).k(a as usize, b as usize);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut by_size = vec![0u64; max + 1];
    let mut size_two: HashMap<(Vec<i64>, Vec<Vec<i8>>), u64> = HashMap::new();
    for _ in 0..DRAWS {
        let c = sample_chain(g, a, b, 40, max, &mut rng).unwrap();
        assert_eq!((c.spine[0], *c.spine.last().unwrap()), (a, b));
        assert!(c.spine.windows(2).all(|w| (w[0] - w[1]).abs() <= 1));
        by_size[c.size()] += 1;
        if c.size() == 2 {
            let key = (c.spine.clone(), c.forests.iter().map(|f| f.code.clone()).collect());
            *size_two.entry(key).or_default() += 1;
        }
    }
    assert_eq!(by_size[0], 0);
    let probs: Vec<f64> = (0..=max)
        .map(|m| num::ToPrimitive::to_f64(k.coeff(m)).unwrap() * g.powi(m as i32))
        .collect();
    let t = chi_square(&by_size, &probs, 5.0);
    assert!(t.p_value > 1e-3, "{t:?}");
    assert_eq!(num::BigRational::from_integer((size_two.len() as u64).into()), k.coeff(2).clone());
    let obs: Vec<u64> = size_two.values().copied().collect();
    let t = chi_square(&obs, &vec![1.0; obs.len()], 5.0);
    assert!(t.p_value > 1e-3, "{t:?}");
}

#[test]
fn size_six_objects_follow_the_inverse_weight_law() {
    let t = small_size_chi_square(3, 40_000).unwrap();
    assert!(t.p_value > 1e-3, "{t:?}");
}

#[test]
fn skeleton_minimum_at_fixed_size_matches_the_exact_law() {
    let n = 40;
    let mut cfg = SamplerConfig::new(n, 7);
    cfg.delta = 0.01;
    assert_eq!(cfg.size_window(), (n, n));
    let s = Sampler::new(cfg).unwrap();
    let exact = exact_min_skeleton_distribution(n).unwrap().cdf();
    let draws = 20_000;
    let mut drawn = Vec::with_capacity(draws as usize);
    for i in 0..draws {
        let (w, _) = s.sample(i).unwrap();
        assert_eq!(w.size, n);
        drawn.push((w.tree.min_skeleton_label(), w.weight));
    }
    let w_sum: f64 = drawn.iter().map(|d| d.1).sum();
    for &(v, p) in &exact {
        let ind = |m: i64| if m <= v as i64 { 1.0 } else { 0.0 };
        let f = drawn.iter().map(|&(m, w)| w * ind(m)).sum::<f64>() / w_sum;
        // self-normalised importance sampling variance; the tail carries the heavy weights
        let var = drawn.iter().map(|&(m, w)| (w * (ind(m) - f)).powi(2)).sum::<f64>() / (w_sum * w_sum);
        let se = var.sqrt().max(1e-3);
        assert!((f - p).abs() < 4.5 * se, "m <= {v}: sampled {f:.4}, exact {p:.4}, se {se:.4}");
    }
}

#[test]
fn sampled_trees_survive_the_codec() {
    let mut cfg = SamplerConfig::new(300, 5);
    cfg.delta = 0.3;
    let s = Sampler::new(cfg).unwrap();
    let mut degenerate = 0;
    for i in 0..60 {
        let (w, _) = s.sample(i).unwrap();
        let t = w.materialize().unwrap();
        let b = backbone(&t).unwrap();
        assert_eq!(b.kind, w.tree.kind);
        assert_eq!(b.min_skeleton_label(), w.tree.min_skeleton_label());
        let q = decode(&t).unwrap();
        assert_eq!(encode(&q).unwrap(), t);
        let first = q.map.shortest_noncontractible_through(q.origin).unwrap();
        assert_eq!(first.length as i64, 2 * b.min_skeleton_label());
        if b.kind == BackboneKind::Degenerate {
            degenerate += 1;
        }
    }
    assert!(degenerate < 60);
}

#[test]
fn degenerate_samples_materialize() {
    let mut cfg = SamplerConfig::new(30, 8);
    cfg.delta = 0.5;
    let s = Sampler::new(cfg).unwrap();
    let mut seen = 0;
    for stream in 0..50 {
        let (batch, _) = s.proposals(stream, 2000);
        for w in batch.iter().filter(|w| w.tree.kind == BackboneKind::Degenerate) {
            let t = w.materialize().unwrap();
            assert_eq!(t.genus(), 1);
            assert!(t.is_well_labeled());
            let b = backbone(&t).unwrap();
            assert_eq!(b.kind, BackboneKind::Degenerate);
            assert_eq!(b.chain_minima, w.tree.chain_minima());
            assert_eq!(encode(&decode(&t).unwrap()).unwrap(), t);
            seen += 1;
        }
        if seen >= 20 {
            return;
        }
    }
    panic!("only {seen} degenerate samples");
}
