use num::{BigInt, BigRational, One, Zero};
use proptest::prelude::*;
use toromaps::codec::{decode, encode};
use toromaps::distributions::{cdf, sigma, sigma2, Law};
use toromaps::sampler::{Sampler, SamplerConfig};
use toromaps::series::FormalSeries;

fn series(max_order: usize) -> impl Strategy<Value = FormalSeries> {
    prop::collection::vec((-40i64..40, 1i64..9), 1..=max_order + 1).prop_map(|c| {
        FormalSeries::from_coeffs(c.into_iter().map(|(n, d)| BigRational::new(BigInt::from(n), BigInt::from(d))).collect())
    })
}

fn naive_product(a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
    let n = a.order().min(b.order());
    let mut out = vec![BigRational::zero(); n + 1];
    for (i, slot) in out.iter_mut().enumerate() {
        for j in 0..=i {
            *slot += a.coeff(j) * b.coeff(i - j);
        }
    }
    FormalSeries::from_coeffs(out)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_matches_schoolbook(a in series(14), b in series(14)) {
        let n = a.order().min(b.order());
        let p = &a.truncate(n) * &b.truncate(n);
        prop_assert_eq!(p, naive_product(&a, &b));
    }

    #[test]
    fn inverse_undoes_product(a in series(14)) {
        prop_assume!(!a.coeff(0).is_zero());
        let inv = a.inverse().unwrap();
        let one = &a * &inv;
        prop_assert_eq!(one.coeff(0), &BigRational::one());
        prop_assert!(one.coeffs()[1..].iter().all(Zero::is_zero));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampled_trees_are_well_labeled_toroidal_and_invertible(seed in 0u64..1_000_000, n in 6usize..80) {
        let mut cfg = SamplerConfig::new(n, seed);
        cfg.delta = 0.3;
        let (lo, hi) = cfg.size_window();
        let s = Sampler::new(cfg).unwrap();
        let (w, _) = s.sample(0).unwrap();
        prop_assert!(lo <= w.size && w.size <= hi);
        let t = w.materialize().unwrap();
        prop_assert!(t.is_well_labeled());
        prop_assert_eq!(t.genus(), 1);
        prop_assert_eq!(t.num_edges(), w.size);
        let q = decode(&t).unwrap();
        prop_assert!(q.map.is_quadrangulation());
        prop_assert_eq!(q.map.genus().unwrap(), 1);
        prop_assert_eq!(encode(&q).unwrap(), t);
    }

    #[test]
    fn second_loop_law_is_dominated(r in 0.05f64..5.0) {
        let (s1, s2) = (sigma(r).unwrap(), sigma2(r).unwrap());
        prop_assert!(s2 <= s1 + 1e-9, "sigma2 {} > sigma {} at {}", s2, s1, r);
        for law in [Law::Sigma, Law::Sigma2, Law::Phi1] {
            let v = cdf(law, r).unwrap();
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&v), "{:?}({}) = {}", law, r, v);
        }
    }
}
