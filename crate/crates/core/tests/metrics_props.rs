use proptest::prelude::*;
use tmeval_core::metrics::{false_positive_bound, pearson, predictive_power, FalsePositiveModel};
use tmeval_core::Exact;

proptest! {
    #[test]
    fn bound_shrinks_with_rounds(pi in 0.01f64..1.0, pa in 0.01f64..1.0, ph in 0.0f64..1.0, n in 1u32..8) {
        let a = false_positive_bound(&FalsePositiveModel::new(pi, pa, ph, n).unwrap());
        let b = false_positive_bound(&FalsePositiveModel::new(pi, pa, ph, n + 1).unwrap());
        prop_assert!(b <= a * (1.0 + 1e-12));
        prop_assert!((0.0..=1.0).contains(&a));
    }

    #[test]
    fn exact_bound_matches_float(num in 0i64..=10, n in 1u32..5) {
        let p = Exact::new(num, 10);
        let exact = false_positive_bound(&FalsePositiveModel::new(p, p, p, n).unwrap());
        let float = false_positive_bound(&FalsePositiveModel::new(num as f64 / 10.0, num as f64 / 10.0, num as f64 / 10.0, n).unwrap());
        prop_assert!((*exact.numer() as f64 / *exact.denom() as f64 - float).abs() < 1e-12);
    }

    #[test]
    fn power_ignores_monotone_rescaling(xs in prop::collection::vec(-100i32..100, 2..8), ys in prop::collection::vec(-100i32..100, 8)) {
        let ys = &ys[..xs.len()];
        let a = predictive_power(&xs, ys, false);
        let xs2: Vec<f64> = xs.iter().map(|&x| (x as f64 / 10.0).exp()).collect();
        let ys2: Vec<f64> = ys.iter().map(|&y| 3.0 * y as f64 + 7.0).collect();
        let b = predictive_power(&xs2, &ys2, false);
        prop_assert_eq!(a.ok().map(|p| p.exact()), b.ok().map(|p| p.exact()));
    }

    #[test]
    fn series_correlates_perfectly_with_itself(xs in prop::collection::vec(-1e3f64..1e3, 3..20)) {
        prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-6));
        let c = pearson(&xs, &xs).unwrap();
        prop_assert!((c.rho - 1.0).abs() < 1e-9);
        let neg: Vec<f64> = xs.iter().map(|x| -x).collect();
        prop_assert!((pearson(&xs, &neg).unwrap().rho + 1.0).abs() < 1e-9);
    }
}
