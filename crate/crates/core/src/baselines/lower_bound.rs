use super::ItemPolicy;
use crate::alloc::{Item, ItemLedger};
use crate::error::{Error, Result};
use crate::framework::INEQ_TOL;

/// Shifted slacks `Z_i = 2c + u_i - Prop_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SlackVector {
    z: Vec<f64>,
    c: f64,
}

impl SlackVector {
    /// Start of the game, `Z_i = 2c`.
    pub fn new(n: usize, c: f64) -> Result<Self> {
        Self::from_values(vec![2.0 * c; n], c)
    }

    pub fn from_values(z: Vec<f64>, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::NonpositiveC(c));
        }
        if z.is_empty() || z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValue(format!("slacks {z:?}")));
        }
        Ok(Self { z, c })
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Every deficit is at most `c`, i.e. every `Z_i >= c`.
    pub fn is_fair(&self) -> bool {
        self.z.iter().all(|z| *z >= self.c)
    }
}

/// The adversary's next item `x_i = Z_i / (Z_i + c)`.
pub fn lb_adversary_next(s: &SlackVector) -> Result<Item> {
    if !s.is_fair() {
        return Err(Error::PrefixAlreadyUnfair);
    }
    Item::new(s.z.iter().map(|z| z / (z + s.c)).collect())
}

/// As [`lb_adversary_next`], but all-zero once the prefix is unfair so the
/// deficits freeze.
pub fn lb_adversary_item(s: &SlackVector) -> Item {
    lb_adversary_next(s).unwrap_or_else(|_| Item::zeros(s.n()))
}

/// Losers lose `x_i / n`, the winner gains `(1 - 1/n) x_w`.
pub fn lb_slack_update(s: &SlackVector, x: &Item, winner: usize) -> Result<SlackVector> {
    let n = s.n();
    if x.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: x.n(),
        });
    }
    if winner >= n {
        return Err(Error::InvalidValue(format!("winner {winner} out of range")));
    }
    let nf = n as f64;
    let z =
        s.z.iter()
            .enumerate()
            .map(|(i, z)| {
                if i == winner {
                    z + (1.0 - 1.0 / nf) * x.value(i)
                } else {
                    z - x.value(i) / nf
                }
            })
            .collect();
    Ok(SlackVector { z, c: s.c })
}

/// `(Phi, S)` with `Phi = sum_i Z_i + c ln Z_i` and `S = sum_i Z_i`.
pub fn lb_potential_monitor(s: &SlackVector) -> (f64, f64) {
    let phi = s.z.iter().map(|z| z + s.c * z.ln()).sum();
    let total = s.z.iter().sum();
    (phi, total)
}

/// Rounds within which every policy is forced into an unfair prefix.
pub fn lb_horizon(n: usize, c: f64) -> u64 {
    (4900.0 * n as f64 * c * c).ceil() as u64
}

/// Worst observed values of the monitored quantities over fair prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    /// Largest one-round increase of `Phi` between fair states.
    pub max_phi_increase: f64,
    /// Largest `S / (3nc)` over fair states.
    pub max_total_ratio: f64,
    /// Largest mean revealed value.
    pub max_mean_value: f64,
    pub min_value: f64,
    pub max_value: f64,
}

impl MonitorReport {
    fn new() -> Self {
        Self {
            max_phi_increase: f64::NEG_INFINITY,
            max_total_ratio: 0.0,
            max_mean_value: 0.0,
            min_value: f64::INFINITY,
            max_value: f64::NEG_INFINITY,
        }
    }

    /// All four monitored inequalities hold within tolerance.
    pub fn all_hold(&self) -> bool {
        self.max_phi_increase <= INEQ_TOL
            && self.max_total_ratio < 1.0 + INEQ_TOL
            && self.max_mean_value < 0.75 + INEQ_TOL
            && (self.min_value == f64::INFINITY
                || (self.min_value >= 0.5 - INEQ_TOL && self.max_value < 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LbOutcome {
    /// First round (1-based) after which some `Z_i < c`.
    pub violation_round: Option<usize>,
    pub rounds_played: usize,
    pub final_slack: SlackVector,
    pub monitors: MonitorReport,
    /// At the violation round: largest positive envy and largest deficit.
    pub envy_at_violation: Option<f64>,
    pub deficit_at_violation: Option<f64>,
}

impl LbOutcome {
    /// Envy at violation is at least the proportionality deficit.
    pub fn transfer_holds(&self) -> bool {
        match (self.envy_at_violation, self.deficit_at_violation) {
            (Some(e), Some(d)) => e >= d - INEQ_TOL,
            _ => true,
        }
    }
}

/// Plays the adaptive adversary against `policy` until some slack drops
/// below `c` or `max_rounds` items have been allocated.
pub fn run_lb_game(
    policy: &mut dyn ItemPolicy,
    n: usize,
    c: f64,
    max_rounds: usize,
) -> Result<LbOutcome> {
    if !(c >= 1.0) {
        return Err(Error::InvalidValue(format!(
            "the lower-bound game needs c >= 1, got {c}"
        )));
    }
    let mut slack = SlackVector::new(n, c)?;
    let mut ledger = ItemLedger::new(n);
    let mut mon = MonitorReport::new();
    let bound = 3.0 * n as f64 * c;
    let (mut phi, total) = lb_potential_monitor(&slack);
    mon.max_total_ratio = total / bound;
    for t in 1..=max_rounds {
        let x = lb_adversary_next(&slack)?;
        for v in x.values() {
            mon.min_value = mon.min_value.min(*v);
            mon.max_value = mon.max_value.max(*v);
        }
        let mean = x.values().iter().sum::<f64>() / n as f64;
        mon.max_mean_value = mon.max_mean_value.max(mean);

        let w = policy.choose(&ledger, &x)?;
        ledger.apply(&x, w)?;
        policy.observe(&x, w)?;
        slack = lb_slack_update(&slack, &x, w)?;

        if !slack.is_fair() {
            return Ok(LbOutcome {
                violation_round: Some(t),
                rounds_played: t,
                final_slack: slack,
                monitors: mon,
                envy_at_violation: Some(ledger.max_envy()),
                deficit_at_violation: Some(ledger.max_deficit()),
            });
        }
        let (next_phi, total) = lb_potential_monitor(&slack);
        mon.max_phi_increase = mon.max_phi_increase.max(next_phi - phi);
        mon.max_total_ratio = mon.max_total_ratio.max(total / bound);
        phi = next_phi;
    }
    Ok(LbOutcome {
        violation_round: None,
        rounds_played: max_rounds,
        final_slack: slack,
        monitors: mon,
        envy_at_violation: None,
        deficit_at_violation: None,
    })
}
