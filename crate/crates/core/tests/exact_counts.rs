use num::{BigInt, BigRational, One, Zero};
use toromaps::enumerate;
use toromaps::gf::SeriesGf;

fn int(n: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[test]
fn rooted_one_tree_counts() {
    // independent brute-force enumeration, frozen
    let expected = [1u64, 30, 614, 10_700, 170_742];
    for (n, &want) in (2..=6).zip(&expected) {
        assert_eq!(enumerate::enum_one_trees(n).unwrap().total(), want, "n = {n}");
    }
}

#[test]
fn counts_match_generating_functions() {
    let s = SeriesGf::new(6);
    let (pointed, _) = s.q1();
    let (w1, w2) = s.w_double_sums();
    for n in 2..=6 {
        let table = enumerate::enum_one_trees(n).unwrap();
        let two_n = int(2 * n as u64);
        assert_eq!(int(table.total()), &two_n * pointed.coeff(n));
        assert_eq!(int(table.total()), &two_n * &(w1.coeff(n) + w2.coeff(n)));
        assert_eq!(int(table.marginal(0, 1)), &two_n * w2.coeff(n));
    }
}

#[test]
fn brute_force_agrees_with_matching_enumeration() {
    for n in 2..=4 {
        let brute = enumerate::brute_force_one_tree_codes(n).unwrap();
        let fast: std::collections::HashSet<_> =
            enumerate::one_trees(n).unwrap().iter().map(|t| t.canonical_code()).collect();
        assert_eq!(brute, fast, "n = {n}");
    }
}

#[test]
fn planar_oracle() {
    for n in 1..=5 {
        assert_eq!(enumerate::weighted_planar_count(n).unwrap(), enumerate::count_pointed_planar(n));
    }
    // one edge: labels {1,1} with two automorphisms, and {1,2}
    assert_eq!(enumerate::count_pointed_planar(1), BigRational::new(BigInt::from(3), BigInt::from(2)));
}

#[test]
fn planted_trees_match_r() {
    let s = SeriesGf::new(6);
    for l in 1..=3 {
        let r = s.r_label(l as usize);
        for n in 0..=6 {
            let c = enumerate::enum_planted_trees(l, n).unwrap().total();
            assert_eq!(int(c), r.coeff(n).clone(), "l = {l}, n = {n}");
        }
    }
}

#[test]
fn two_marked_trees_match_k() {
    let s = SeriesGf::new(5);
    for (a, b) in [(1, 1), (2, 1), (2, 2), (3, 1)] {
        let k = s.k(a, b);
        assert!(k.coeff(0).is_zero());
        for n in 1..=5 {
            let e = enumerate::enum_two_marked(a as i64, b as i64, n).unwrap();
            assert_eq!(&e, k.coeff(n), "K_({a},{b}) at g^{n}");
            assert!(e.denom().is_one(), "chains have no symmetry");
        }
    }
}

#[test]
fn marked_vertex_histogram_totals() {
    // every rooted 1-tree with n edges has n - 1 vertices
    for n in 2..=5 {
        let h = enumerate::marked_vertex_histogram(n).unwrap();
        let trees = enumerate::enum_one_trees(n).unwrap().total();
        assert_eq!(h.total(), trees * (n as u64 - 1));
        assert!(h.get(&[1]) >= trees);
    }
}
