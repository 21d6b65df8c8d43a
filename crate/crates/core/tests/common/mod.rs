//! Naive recomputation from full histories, shared by the test targets.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use perpetual_fair::alloc::{EfcThresholdState, EfxState, Item, ItemLedger, PropxState};
use perpetual_fair::baselines::{stream_generate, ItemPolicy, StreamKind, StreamRng, StreamSpec};
use perpetual_fair::discounted::{c_gamma, windowed_deficit, DiscountedPropState, WindowState};
use perpetual_fair::exact::{
    lp_feasible, lp_solve, next_frontier, next_frontier_unpruned, ExtRational, Frontier,
    SurplusState, DEFAULT_FRONTIER_CAP,
};
use perpetual_fair::framework::{
    choose_action, evaluate_candidates, log_phi, verify_moment_witness_contracted, ActionId,
    CandidateSet, DeficitModel, DeficitProfile, PotentialParams,
};
use perpetual_fair::pdm::{PdmRound, PdmState};

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn sdiv(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x / y
    } else {
        0.0
    }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                v.push((i, j));
            }
        }
    }
    v
}

/// Proportionality deficit over the largest missed item.
pub fn naive_propx(n: usize, hist: &[(Item, usize)]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            let mut own = 0.0;
            let mut missed: f64 = 0.0;
            for (g, r) in hist {
                let x = g.value(i);
                total += x;
                if *r == i {
                    own += x;
                } else {
                    missed = missed.max(x);
                }
            }
            sdiv(pos(total / n as f64 - own), missed)
        })
        .collect()
}

/// Raw deficits `v_i(G)/n - v_i(P_i)`.
pub fn naive_raw_deficits(n: usize, hist: &[(Item, usize)]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let total: f64 = hist.iter().map(|(g, _)| g.value(i)).sum();
            let own: f64 = hist
                .iter()
                .filter(|(_, r)| *r == i)
                .map(|(g, _)| g.value(i))
                .sum();
            total / n as f64 - own
        })
        .collect()
}

/// Envy over the largest item in the envied bundle, pairs in row order.
pub fn naive_efx(n: usize, hist: &[(Item, usize)]) -> Vec<f64> {
    pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let mut other = 0.0;
            let mut own = 0.0;
            let mut scale: f64 = 0.0;
            for (g, r) in hist {
                let x = g.value(i);
                if *r == j {
                    other += x;
                    scale = scale.max(x);
                } else if *r == i {
                    own += x;
                }
            }
            sdiv(pos(other - own), scale)
        })
        .collect()
}

/// Threshold count gaps, pair-major then level.
pub fn naive_efc(n: usize, theta: &[f64], hist: &[(Item, usize)]) -> Vec<f64> {
    let count = |i: usize, j: usize, tau: f64| {
        hist.iter()
            .filter(|(g, r)| *r == j && g.value(i) >= tau)
            .count() as f64
    };
    let mut sorted = theta.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut z = Vec::new();
    for (i, j) in pairs(n) {
        for tau in &sorted {
            z.push(pos(count(i, j, *tau) - count(i, i, *tau)));
        }
    }
    z
}

pub fn naive_pdm(n: usize, hist: &[(PdmRound, usize)]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let mut best = 0.0;
            let mut util = 0.0;
            let mut run: f64 = 0.0;
            for (r, o) in hist {
                let b = (0..r.outcomes()).map(|k| r.value(i, k)).fold(0.0, f64::max);
                best += b;
                util += r.value(i, *o);
                run = run.max(b);
            }
            sdiv(pos(best / n as f64 - util), run)
        })
        .collect()
}

/// Direct geometric sums of the discounted aggregates.
pub fn naive_discounted(n: usize, gamma: f64, hist: &[(Item, usize)]) -> Vec<f64> {
    let t = hist.len();
    (0..n)
        .map(|i| {
            let mut total = 0.0;
            let mut own = 0.0;
            let mut missed: f64 = 0.0;
            for (s, (g, r)) in hist.iter().enumerate() {
                let w = gamma.powi((t - 1 - s) as i32);
                let x = g.value(i);
                total += w * x;
                if *r == i {
                    own += w * x;
                } else {
                    missed = missed.max(x);
                }
            }
            sdiv(pos(total / n as f64 - own), missed)
        })
        .collect()
}

/// `ln sum (z^2 + 4p^2)^p` summed directly.
pub fn brute_phi(z: &[f64], p: f64) -> f64 {
    z.iter().map(|u| (u * u + 4.0 * p * p).powf(p)).sum()
}

/// Largest relative gap between the fast candidate scores and
/// `log_phi` of each candidate profile built in full.
pub fn candidate_score_gap(set: &CandidateSet, params: &PotentialParams) -> f64 {
    let fast = evaluate_candidates(set, params);
    let mut worst: f64 = 0.0;
    for (k, f) in fast.iter().enumerate() {
        let slow = log_phi(&set.profile(k), params);
        worst = worst.max((f - slow).abs() / 1f64.max(f.abs()).max(slow.abs()));
    }
    worst
}

pub fn random_items(kind: StreamKind, n: usize, length: usize, seed: u64) -> Vec<Item> {
    stream_generate(&StreamSpec {
        kind,
        n,
        length,
        seed: Some(seed),
    })
    .expect("valid stream")
}

/// Values drawn from a small grid so that ties and repeats occur.
pub fn grid_items(n: usize, length: usize, seed: u64) -> Vec<Item> {
    random_items(
        StreamKind::Ledger {
            values: vec![0.0, 0.25, 0.5, 0.75, 1.0],
        },
        n,
        length,
        seed,
    )
}

pub fn random_pdm_rounds(n: usize, outcomes: usize, length: usize, seed: u64) -> Vec<PdmRound> {
    let mut rng = StreamRng::new(seed);
    (0..length)
        .map(|_| {
            let v = (0..n * outcomes)
                .map(|_| (rng.uniform() * 4.0).floor() / 4.0)
                .collect();
            PdmRound::new(n, outcomes, v).expect("valid round")
        })
        .collect()
}

/// Result of replaying a history with a fast model and a naive oracle.
#[derive(Debug, Default)]
pub struct Replay {
    pub rounds: usize,
    /// Largest relative gap between state profile and naive deficits.
    pub state_gap: f64,
    /// Largest relative gap between candidate profiles and naive deficits
    /// of the corresponding one-step histories.
    pub candidate_gap: f64,
    /// Largest relative gap between sparse and full log-potential scores.
    pub score_gap: f64,
    pub witness_failures: usize,
    pub witness_rounds: usize,
}

fn gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs() / 1f64.max(x.abs()).max(y.abs()))
        .fold(0.0, f64::max)
}

/// Replays `inputs` under the potential rule (or `forced` recipients),
/// comparing every state and candidate with `naive`.
pub fn replay<M, F>(mut model: M, inputs: &[M::Input], forced: Option<&[usize]>, naive: F) -> Replay
where
    M: DeficitModel,
    M::Input: Clone,
    F: Fn(&[(M::Input, usize)]) -> Vec<f64>,
{
    let mut hist: Vec<(M::Input, usize)> = Vec::new();
    let mut out = Replay::default();
    for (t, x) in inputs.iter().enumerate() {
        let set = model.candidates(x).expect("candidates");
        out.score_gap = out.score_gap.max(candidate_score_gap(&set, model.params()));
        for (k, a) in set.actions().collect::<Vec<_>>().into_iter().enumerate() {
            hist.push((x.clone(), a.0));
            let want = naive(&hist);
            hist.pop();
            out.candidate_gap = out.candidate_gap.max(gap(set.profile(k).as_slice(), &want));
        }
        let w = model.witness(x).expect("witness");
        let rep = verify_moment_witness_contracted(
            &model.profile(),
            &set,
            &w,
            model.params(),
            model.contraction(),
        )
        .expect("witness dims");
        out.witness_rounds += 1;
        if !rep.passed() {
            out.witness_failures += 1;
        }
        let a = match forced {
            Some(f) => ActionId(f[t]),
            None => choose_action(&set, model.params()).expect("nonempty"),
        };
        model.apply(x, a).expect("apply");
        hist.push((x.clone(), a.0));
        out.state_gap = out
            .state_gap
            .max(gap(model.profile().as_slice(), &naive(&hist)));
        out.rounds += 1;
    }
    out
}

/// The five instantiations replayed for `rounds` rounds at `n` agents.
pub fn replay_all(n: usize, rounds: usize, seed: u64) -> Vec<(&'static str, Replay)> {
    let items = grid_items(n, rounds, seed);
    let theta = [0.25, 0.5, 0.75, 1.0];
    let pdm = random_pdm_rounds(n, n + 1, rounds, seed);
    let gamma = 0.9;
    vec![
        (
            "propx",
            replay(PropxState::new(n).unwrap(), &items, None, |h| {
                naive_propx(n, h)
            }),
        ),
        (
            "efx",
            replay(EfxState::new(n).unwrap(), &items, None, |h| naive_efx(n, h)),
        ),
        (
            "efc",
            replay(
                EfcThresholdState::new(n, &theta).unwrap(),
                &items,
                None,
                |h| naive_efc(n, &theta, h),
            ),
        ),
        (
            "pdm",
            replay(PdmState::new(n, n + 1).unwrap(), &pdm, None, |h| {
                naive_pdm(n, h)
            }),
        ),
        (
            "discounted",
            replay(
                DiscountedPropState::new(n, gamma).unwrap(),
                &items,
                None,
                |h| naive_discounted(n, gamma, h),
            ),
        ),
    ]
}

/// Witness checks on `rounds` rounds with uniformly random recipients, so
/// that states stray far from what the potential rule would produce.
pub fn witness_sweep(n: usize, rounds: usize, seed: u64) -> Vec<(&'static str, usize, usize)> {
    let items = random_items(StreamKind::UniformRandom { scale: 1.0 }, n, rounds, seed);
    let theta = [0.25, 0.5, 0.75, 1.0];
    let efc_items = grid_items(n, rounds, seed + 1);
    let pdm = random_pdm_rounds(n, n + 2, rounds, seed + 2);
    let mut rng = StreamRng::new(seed + 3);
    let forced: Vec<usize> = (0..rounds)
        .map(|_| (rng.next_u64() % n as u64) as usize)
        .collect();
    let pdm_forced: Vec<usize> = (0..rounds)
        .map(|_| (rng.next_u64() % (n as u64 + 2)) as usize)
        .collect();
    let tally = |r: Replay| (r.witness_rounds, r.witness_failures);
    let (pa, pb) = tally(witness_only(PropxState::new(n).unwrap(), &items, &forced));
    let (xa, xb) = tally(witness_only(EfxState::new(n).unwrap(), &items, &forced));
    let (ca, cb) = tally(witness_only(
        EfcThresholdState::new(n, &theta).unwrap(),
        &efc_items,
        &forced,
    ));
    let (da, db) = tally(witness_only(
        PdmState::new(n, n + 2).unwrap(),
        &pdm,
        &pdm_forced,
    ));
    let (ga, gb) = tally(witness_only(
        DiscountedPropState::new(n, 0.95).unwrap(),
        &items,
        &forced,
    ));
    vec![
        ("propx", pa, pb),
        ("efx", xa, xb),
        ("efc", ca, cb),
        ("pdm", da, db),
        ("discounted", ga, gb),
    ]
}

/// Witness verification only, with forced actions.
pub fn witness_only<M: DeficitModel>(
    mut model: M,
    inputs: &[M::Input],
    forced: &[usize],
) -> Replay {
    let mut out = Replay::default();
    for (x, a) in inputs.iter().zip(forced) {
        let set = model.candidates(x).expect("candidates");
        let w = model.witness(x).expect("witness");
        let rep = verify_moment_witness_contracted(
            &model.profile(),
            &set,
            &w,
            model.params(),
            model.contraction(),
        )
        .expect("witness dims");
        out.witness_rounds += 1;
        if !rep.passed() {
            out.witness_failures += 1;
        }
        model.apply(x, ActionId(*a)).expect("apply");
        out.rounds += 1;
    }
    out
}

pub fn profile(v: &[f64]) -> DeficitProfile {
    DeficitProfile::new(v.to_vec()).expect("valid profile")
}

/// Runs an item policy over a fixed stream; returns each recipient and the
/// ledger after every round.
pub fn run_policy(
    policy: &mut dyn ItemPolicy,
    n: usize,
    items: &[Item],
) -> (Vec<usize>, Vec<ItemLedger>) {
    let mut ledger = ItemLedger::new(n);
    let mut acts = Vec::new();
    let mut snaps = Vec::new();
    for x in items {
        let a = policy.choose(&ledger, x).unwrap();
        ledger.apply(x, a).unwrap();
        policy.observe(x, a).unwrap();
        acts.push(a);
        snaps.push(ledger.clone());
    }
    (acts, snaps)
}

pub fn deterministic_items(kind: StreamKind, n: usize, length: usize) -> Vec<Item> {
    stream_generate(&StreamSpec {
        kind,
        n,
        length,
        seed: None,
    })
    .unwrap()
}

/// First round (1-based) with `d_i > c * U_i` for some agent, `U_i` the
/// largest single value agent `i` has seen.
pub fn first_bprop_violation(items: &[Item], ledgers: &[ItemLedger], c: f64) -> Option<usize> {
    let n = items.first()?.n();
    let mut u = vec![0f64; n];
    for (t, (x, l)) in items.iter().zip(ledgers).enumerate() {
        for i in 0..n {
            u[i] = u[i].max(x.value(i));
        }
        if (0..n).any(|i| l.deficit(i) > c * u[i]) {
            return Some(t + 1);
        }
    }
    None
}

/// Repeating `1, 0.3, 0.3` blocks, the 1 to agent 0 and the rest to agent
/// 1, windowed at 3. Returns the largest windowed deficit over `t >= 3` and
/// agent 1's full-history deficit after each block.
pub fn window_counterexample(blocks: usize) -> (f64, Vec<f64>) {
    let mut w = WindowState::new(2, 3).unwrap();
    let mut ledger = ItemLedger::new(2);
    let mut worst = f64::NEG_INFINITY;
    let mut full = Vec::new();
    for t in 1..=3 * blocks {
        let (v, r) = if t % 3 == 1 { (1.0, 0) } else { (0.3, 1) };
        let x = Item::new(vec![v, v]).unwrap();
        ledger.apply(&x, r).unwrap();
        w.push(x, r).unwrap();
        if t >= 3 {
            worst = worst
                .max(windowed_deficit(&w, 0))
                .max(windowed_deficit(&w, 1));
        }
        if t % 3 == 0 {
            full.push(ledger.deficit(1));
        }
    }
    (worst, full)
}

/// Discounted potential rule over `items`: recipients and the largest
/// `max_i z_i - c_gamma` seen.
pub fn discounted_run(gamma: f64, items: &[Item]) -> (Vec<usize>, f64) {
    let n = items[0].n();
    let mut s = DiscountedPropState::new(n, gamma).unwrap();
    let bound = c_gamma(s.params(), gamma).unwrap();
    let mut excess = f64::NEG_INFINITY;
    let mut acts = Vec::with_capacity(items.len());
    for g in items {
        let a = choose_action(&s.candidates(g).unwrap(), s.params()).unwrap();
        s.apply(g, a.0).unwrap();
        acts.push(a.0);
        let top = s.profile().as_slice().iter().cloned().fold(0.0, f64::max);
        excess = excess.max(top - bound);
    }
    (acts, excess)
}

fn ext_f64(v: &ExtRational) -> f64 {
    match v {
        ExtRational::Finite(r) => r.to_f64().unwrap(),
        ExtRational::Infinite => f64::INFINITY,
    }
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Best `min(x_i - (n-1) z, min_{j != i} x_j + z)` over `z` on a grid of
/// step `1/steps`.
fn grid_lp(x: &[f64], i: usize, steps: usize) -> f64 {
    let n = x.len() as f64;
    (0..=steps)
        .map(|k| {
            let z = k as f64 / steps as f64;
            let others = (0..x.len())
                .filter(|j| *j != i)
                .map(|j| x[j] + z)
                .fold(f64::INFINITY, f64::min);
            (x[i] - (n - 1.0) * z).min(others)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `lp_solve` against a `1/1000` grid over every column with entries in
/// `{0, 1/4, ..., 2, inf}`, `n` in `{2, 3}`. Returns (checked, failures).
pub fn lp_grid_sweep() -> (usize, usize) {
    let steps = 1000;
    let vals: Vec<ExtRational> = (0..=8)
        .map(|k| ExtRational::Finite(q(k, 4)))
        .chain([ExtRational::Infinite])
        .collect();
    let (mut checked, mut failures) = (0, 0);
    for n in 2..=3usize {
        let mut idx = vec![0usize; n];
        loop {
            let x: Vec<ExtRational> = idx.iter().map(|k| vals[*k].clone()).collect();
            let xf: Vec<f64> = x.iter().map(ext_f64).collect();
            for i in 0..n {
                let (y, z) = lp_solve(&x, i).unwrap();
                let (g, yf) = (grid_lp(&xf, i, steps), ext_f64(&y));
                // the grid can only do worse, and by at most (n - 1) / steps
                let ok = lp_feasible(&x, i, &y, &z)
                    && if yf.is_infinite() {
                        g.is_infinite()
                    } else {
                        g <= yf + 1e-12 && yf - g <= (n - 1) as f64 / steps as f64 + 1e-12
                    };
                checked += 1;
                failures += usize::from(!ok);
            }
            let mut d = 0;
            while d < n {
                idx[d] += 1;
                if idx[d] < vals.len() {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
            if d == n {
                break;
            }
        }
    }
    (checked, failures)
}

/// Compares pruned and unpruned levels `1..=levels` for two agents on the
/// quarter grid over `[0, 4]^2`. Returns (checked, mismatches).
pub fn pruning_grid_sweep(levels: usize) -> (usize, usize) {
    let mut pruned = Frontier::initial(2);
    let mut full = Frontier::initial(2);
    let (mut checked, mut bad) = (0, 0);
    for _ in 1..=levels {
        pruned = next_frontier(&pruned, DEFAULT_FRONTIER_CAP).unwrap();
        full = next_frontier_unpruned(&full, DEFAULT_FRONTIER_CAP).unwrap();
        for a in 0..=16 {
            for b in 0..=16 {
                let x = SurplusState::new(vec![q(a, 4), q(b, 4)]);
                checked += 1;
                bad += usize::from(pruned.covers(&x) != full.covers(&x));
            }
        }
    }
    (checked, bad)
}
