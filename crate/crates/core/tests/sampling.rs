use std::collections::BTreeSet;

use proptest::prelude::*;
use sparse_rerank::model::SamplerSpec;
use sparse_rerank::sampling::{
    sample_global_random, sample_neighborhood_window, sample_skip_window, window_for_rate,
};

#[test]
fn unit_skip_equals_neighborhood_for_every_size() {
    for k in 2..=60 {
        for m in 1..k {
            let n = sample_neighborhood_window(k, m).unwrap();
            let s = sample_skip_window(k, m, 1).unwrap();
            assert_eq!(n.pairs(), s.pairs(), "k={k} m={m}");
        }
    }
}

#[test]
fn skip_sizes_congruent_mod_k_agree() {
    for k in [7, 12, 20] {
        for m in 1..k {
            for lambda in 1..k {
                let a = sample_skip_window(k, m, lambda).unwrap();
                let b = sample_skip_window(k, m, lambda + 2 * k).unwrap();
                assert_eq!(a.pairs(), b.pairs());
            }
        }
    }
}

#[test]
fn multiple_of_k_skip_is_rejected() {
    assert!(sample_skip_window(10, 3, 10).is_err());
    assert!(sample_skip_window(10, 3, 0).is_err());
}

#[test]
fn spec_counts_match_samples() {
    for k in [2, 3, 17, 50] {
        for m in 1..k {
            for spec in [
                SamplerSpec::NeighborhoodWindow { m },
                SamplerSpec::SkipWindow { m, lambda: 8 },
                SamplerSpec::GlobalRandom { rate: m as f64 / k as f64, seed: 4 },
            ] {
                if let Ok(set) = spec.sample(k) {
                    assert_eq!(spec.comparison_count(k).unwrap(), set.len(), "{spec:?} k={k}");
                }
            }
        }
    }
}

proptest! {
    #[test]
    fn global_random_is_exact_and_covering(k in 2usize..70, pct in 1usize..=100, seed in any::<u64>()) {
        let rate = pct as f64 / 100.0;
        let all = k * k - k;
        let set = sample_global_random(k, rate, seed).unwrap();
        prop_assert_eq!(set.len(), (pct * all / 100).max(k));
        let distinct: BTreeSet<_> = set.pairs().iter().collect();
        prop_assert_eq!(distinct.len(), set.len());
        for i in 0..k {
            prop_assert!(set.out_degree(i) >= 1);
        }
        prop_assert!(set.pairs().iter().all(|&(i, j)| i != j && i < k && j < k));
        prop_assert_eq!(sample_global_random(k, rate, seed).unwrap(), set);
    }

    #[test]
    fn neighborhood_is_regular(k in 2usize..80, frac in 0.0f64..1.0) {
        let m = 1 + ((k - 2) as f64 * frac) as usize;
        let set = sample_neighborhood_window(k, m).unwrap();
        prop_assert_eq!(set.len(), k * m);
        for i in 0..k {
            prop_assert_eq!(set.out_degree(i), m);
            prop_assert_eq!(set.in_degree(i), m);
        }
    }

    #[test]
    fn skip_window_rows_hold_at_most_m(k in 2usize..60, frac in 0.0f64..1.0, lambda in 1usize..40) {
        let m = 1 + ((k - 2) as f64 * frac) as usize;
        if let Ok(set) = sample_skip_window(k, m, lambda) {
            for i in 0..k {
                prop_assert!(set.out_degree(i) <= m);
            }
            prop_assert!(set.pairs().iter().all(|&(i, j)| i != j));
        } else {
            prop_assert_eq!(lambda % k, 0);
        }
    }

    #[test]
    fn window_for_rate_stays_in_range(k in 2usize..200, rate in 0.001f64..=1.0) {
        let m = window_for_rate(k, rate).unwrap();
        prop_assert!(m >= 1 && m < k);
        if m > 1 {
            prop_assert!((k * m) as f64 <= rate * (k * k - k) as f64 + 1e-6);
        }
    }
}
