mod common;

use common::{discounted_run, naive_discounted, random_items, rel_close, window_counterexample};
use perpetual_fair::alloc::Item;
use perpetual_fair::baselines::{StreamKind, StreamRng};
use perpetual_fair::discounted::{
    c_gamma, c_gamma_prefix, inflation_equiv_check, DiscountedPropState, INFLATION_ROUNDS,
};
use perpetual_fair::framework::{choose_action, DeficitModel, PotentialParams};

#[test]
fn hard_window_hides_growing_deficit() {
    let (worst, full) = window_counterexample(100);
    assert!(worst <= 0.2 + 1e-12, "windowed deficit {worst}");
    assert!(worst >= 0.2 - 1e-12);
    for (k, d) in full.iter().enumerate() {
        let want = 0.2 * (k + 1) as f64;
        assert!((d - want).abs() <= 1e-12, "K={}: {d} vs {want}", k + 1);
    }
}

fn streams(n: usize, len: usize) -> Vec<Vec<Item>> {
    vec![
        random_items(StreamKind::UniformRandom { scale: 1.0 }, n, len, 1),
        random_items(StreamKind::Pareto { alpha: 1.5 }, n, len, 2),
        random_items(
            StreamKind::Bernoulli {
                prob: 0.3,
                value: 1.0,
            },
            n,
            len,
            3,
        ),
    ]
}

#[test]
fn discounted_deficits_stay_below_uniform_bound() {
    for gamma in [0.9, 0.99] {
        for items in streams(2, 100_000) {
            let (_, excess) = discounted_run(gamma, &items);
            assert!(excess <= 1e-9, "gamma={gamma}: excess {excess}");
        }
    }
}

#[test]
fn prefix_bound_holds_along_runs() {
    for gamma in [0.9, 0.99] {
        for items in streams(3, 2000) {
            let mut s = DiscountedPropState::new(3, gamma).unwrap();
            for (k, g) in items.iter().enumerate() {
                let a = choose_action(&s.candidates(g).unwrap(), s.params()).unwrap();
                s.apply(g, a.0).unwrap();
                let b = c_gamma_prefix(s.params(), gamma, k as u64 + 1).unwrap();
                assert!(b <= c_gamma(s.params(), gamma).unwrap() + 1e-12);
                let top = s.profile().as_slice().iter().cloned().fold(0.0, f64::max);
                assert!(top <= b + 1e-9, "gamma={gamma} t={}: {top} > {b}", k + 1);
            }
        }
    }
}

#[test]
fn decayed_and_inflated_ledgers_agree() {
    for gamma in [0.9, 0.99] {
        for items in streams(2, 500) {
            let (acts, _) = discounted_run(gamma, &items);
            let r = inflation_equiv_check(2, gamma, &items, &acts).unwrap();
            assert_eq!(r.rounds_checked, INFLATION_ROUNDS);
            assert!(r.passed(), "gamma={gamma}: {}", r.max_rel_diff);
        }
    }
}

#[test]
fn state_matches_direct_sums() {
    let mut rng = StreamRng::new(77);
    for gamma in [0.5, 0.9, 0.99] {
        let items = random_items(StreamKind::Pareto { alpha: 2.0 }, 4, 300, 5);
        let mut s = DiscountedPropState::new(4, gamma).unwrap();
        let mut hist = Vec::new();
        for g in &items {
            let r = (rng.uniform() * 4.0) as usize;
            s.apply(g, r).unwrap();
            hist.push((g.clone(), r));
            let want = naive_discounted(4, gamma, &hist);
            for (got, want) in s.profile().as_slice().iter().zip(&want) {
                assert!(rel_close(*got, *want, 1e-9), "{got} vs {want}");
            }
        }
    }
}

#[test]
fn uniform_bound_grows_with_memory() {
    let params = PotentialParams::new(2, 1.0, 2).unwrap();
    let grid: Vec<f64> = (1..100).map(|k| k as f64 / 100.0).collect();
    for w in grid.windows(2) {
        assert!(c_gamma(&params, w[0]).unwrap() < c_gamma(&params, w[1]).unwrap());
    }
    assert!(c_gamma(&params, 1.0).is_err());
}
