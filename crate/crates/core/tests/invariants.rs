mod common;

use common::{brute_phi, grid_items, naive_raw_deficits, profile, random_pdm_rounds};
use num_bigint::BigInt;
use num_rational::BigRational;
use perpetual_fair::alloc::{EfxState, Item, ItemLedger, PropxState};
use perpetual_fair::baselines::StreamKind;
use perpetual_fair::exact::{
    lp_feasible, lp_solve, next_frontier, ExtRational, Frontier, DEFAULT_FRONTIER_CAP,
};
use perpetual_fair::framework::{
    bound_disappointed, choose_action, ct_threshold, disappointed_count, potential_bound,
    profile_psi, ActionId, CandidateSet, DeficitModel, PotentialParams, REL_TOL,
};
use perpetual_fair::metrics::{gini, gmd, gmd_bound};
use perpetual_fair::pdm::{PdmRound, PdmState};
use proptest::prelude::*;

fn grid_value() -> impl Strategy<Value = f64> {
    (0u8..=16).prop_map(|k| k as f64 * 0.25)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn choice_matches_brute_force_phi(
        m in 1usize..=6,
        raw in prop::collection::vec(prop::collection::vec(grid_value(), 6), 1..6),
        p_override in prop::option::of(1.0f64..4.0),
    ) {
        let profiles: Vec<(ActionId, _)> = raw
            .iter()
            .enumerate()
            .map(|(k, v)| (ActionId(k), profile(&v[..m])))
            .collect();
        let mut params = PotentialParams::new(m, 1.0, 2).unwrap();
        if let Some(p) = p_override {
            params = params.with_p(p).unwrap();
        }
        let set = CandidateSet::from_profiles(profiles).unwrap();
        let got = choose_action(&set, &params).unwrap();
        let phis: Vec<f64> = raw.iter().map(|v| brute_phi(&v[..m], params.p())).collect();
        let best = phis.iter().cloned().fold(f64::INFINITY, f64::min);
        let want = phis.iter().position(|f| *f <= best * (1.0 + REL_TOL)).unwrap();
        prop_assert_eq!(got.0, want);
    }

    #[test]
    fn zero_profile_potential(m in 1usize..200, p in prop::option::of(1.0f64..6.0)) {
        let mut params = PotentialParams::new(m, 1.0, 1).unwrap();
        if let Some(p) = p {
            params = params.with_p(p).unwrap();
        }
        let p = params.p();
        let want = (m as f64).powf(1.0 / p) * 4.0 * p * p;
        let got = profile_psi(&profile(&vec![0.0; m]), &params);
        prop_assert!((got - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn disappointed_bound_monotone(m in 1usize..50, c in 0.1f64..20.0, dc in 0.0f64..5.0,
                                   t in 0u64..100_000, dt in 0u64..1000) {
        let params = PotentialParams::new(m, 2.0, 3).unwrap();
        let a = bound_disappointed(t, c, &params).unwrap();
        prop_assert!(bound_disappointed(t, c + dc, &params).unwrap() <= a * (1.0 + 1e-12));
        prop_assert!(bound_disappointed(t + dt, c, &params).unwrap() >= a * (1.0 - 1e-12));
    }

    #[test]
    fn potential_runs_stay_within_envelopes(n in 2usize..6, seed in 0u64..1000, len in 1usize..300) {
        let items = grid_items(n, len, seed);
        let mut s = PropxState::new(n).unwrap();
        let mut e = EfxState::new(n).unwrap();
        let mut ledger = ItemLedger::new(n);
        let mut missed_prev = vec![0.0; n];
        let mut scale_prev = vec![0.0; n * n];
        for (k, g) in items.iter().enumerate() {
            let t = k as u64 + 1;
            let a = choose_action(&s.candidates(g).unwrap(), s.params()).unwrap();
            s.apply(g, a.0).unwrap();
            let b = choose_action(&e.candidates(g).unwrap(), e.params()).unwrap();
            e.apply(g, b.0).unwrap();
            ledger.apply(g, a.0).unwrap();
            for (model_psi, params, z) in [
                (profile_psi(&s.profile(), s.params()), s.params(), s.profile()),
                (profile_psi(&e.profile(), e.params()), e.params(), e.profile()),
            ] {
                prop_assert!(model_psi <= potential_bound(t, params) * (1.0 + 1e-9));
                prop_assert_eq!(disappointed_count(&z, ct_threshold(t, params)), 0);
                prop_assert!(gmd(&z) <= gmd_bound(model_psi, params) + 1e-9);
            }
            for i in 0..n {
                // scales never shrink
                prop_assert!(s.missed_max(i) >= missed_prev[i]);
                missed_prev[i] = s.missed_max(i);
                for j in (0..n).filter(|j| *j != i) {
                    prop_assert!(e.pair_scale(i, j) >= scale_prev[i * n + j]);
                    scale_prev[i * n + j] = e.pair_scale(i, j);
                }
                // envy from deficit
                let envy = (0..n).map(|j| ledger.envy(i, j)).fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(envy >= ledger.deficit(i) - 1e-9);
            }
        }
    }

    #[test]
    fn item_allocation_embeds_into_public_decisions(n in 2usize..6, seed in 0u64..1000, len in 1usize..100) {
        let items = common::random_items(StreamKind::UniformRandom { scale: 1.0 }, n, len, seed);
        let mut pdm = PdmState::new(n, n).unwrap();
        let mut hist: Vec<(Item, usize)> = Vec::new();
        for g in &items {
            let r = PdmRound::from_item(g);
            let before: Vec<f64> = (0..n).map(|i| pdm.run_max(i)).collect();
            let set = pdm.candidates(&r).unwrap();
            // the running scale ignores the chosen outcome
            let mut after_any = Vec::new();
            for a in set.actions() {
                let mut probe = pdm.clone();
                probe.apply(&r, a.0).unwrap();
                after_any.push((0..n).map(|i| probe.run_max(i)).collect::<Vec<_>>());
            }
            prop_assert!(after_any.windows(2).all(|w| w[0] == w[1]));
            prop_assert!(after_any[0].iter().zip(&before).all(|(a, b)| a >= b));
            let o = choose_action(&set, pdm.params()).unwrap();
            pdm.apply(&r, o.0).unwrap();
            hist.push((g.clone(), o.0));
            let raw = naive_raw_deficits(n, &hist);
            for i in 0..n {
                prop_assert!((pdm.deficit(i) - raw[i]).abs() <= 1e-12 * 1f64.max(raw[i].abs()));
            }
        }
    }

    #[test]
    fn pdm_prefix_guarantee(n in 2usize..5, outcomes in 1usize..5, seed in 0u64..1000) {
        let rounds = random_pdm_rounds(n, outcomes, 200, seed);
        let mut s = PdmState::new(n, outcomes).unwrap();
        for (k, r) in rounds.iter().enumerate() {
            let o = choose_action(&s.candidates(r).unwrap(), s.params()).unwrap();
            s.apply(r, o.0).unwrap();
            let c = ct_threshold(k as u64 + 1, s.params());
            for i in 0..n {
                prop_assert!(s.utility(i) >= s.prop(i) - c * s.run_max(i) - 1e-9);
            }
        }
    }

    #[test]
    fn lp_optimum_is_feasible(
        n in 2usize..5,
        nums in prop::collection::vec(prop::option::of(0i64..40), 4),
        den in 1i64..7,
        i in 0usize..4,
    ) {
        let i = i % n;
        let x: Vec<ExtRational> = nums[..n]
            .iter()
            .map(|v| match v {
                Some(k) => ExtRational::Finite(BigRational::new(BigInt::from(*k), BigInt::from(den))),
                None => ExtRational::Infinite,
            })
            .collect();
        let (y, z) = lp_solve(&x, i).unwrap();
        prop_assert!(lp_feasible(&x, i, &y, &z));
    }

    #[test]
    fn gini_forms_agree(v in prop::collection::vec(0.0f64..10.0, 1..30)) {
        let z = profile(&v);
        let m = v.len() as f64;
        let total: f64 = v.iter().sum();
        let mean = total / m;
        // tail-sum form (2 / (m T)) sum_k (S(k) - k mean), ascending partial sums
        let mut s = v.clone();
        s.sort_by(f64::total_cmp);
        let mut acc = 0.0;
        let mut tail = 0.0;
        for (k, x) in s.iter().enumerate() {
            acc += x;
            tail += (k as f64 + 1.0) * mean - acc;
        }
        let want = if total > 0.0 { 2.0 * tail / (m * total) } else { 0.0 };
        prop_assert!((gini(&z) - want).abs() <= 1e-9);
        prop_assert!((gmd(&z) - 2.0 * mean * gini(&z)).abs() <= 1e-9 * 1f64.max(gmd(&z)));
    }
}

#[test]
fn pruned_frontiers_are_antichains_for_three_agents() {
    let mut d = Frontier::initial(3);
    for _ in 0..3 {
        d = next_frontier(&d, DEFAULT_FRONTIER_CAP).unwrap();
        let pts = d.points();
        for (a, p) in pts.iter().enumerate() {
            for (b, q) in pts.iter().enumerate() {
                assert!(a == b || !p.weakly_above(q));
            }
        }
    }
}
