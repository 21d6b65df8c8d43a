//! Limited memory: sliding-window deficits and geometrically discounted
//! proportionality.

use std::collections::VecDeque;

use crate::alloc::{proportional_witness, Item};
use crate::error::{Error, Result};
use crate::framework::{
    positive_part, safe_div, ActionId, CandidateSet, DeficitModel, DeficitProfile, MomentWitness,
    PotentialParams,
};

const SQRT_E: f64 = 1.648_721_270_700_128_2;

/// Rounds covered by the inflated cross-check.
pub const INFLATION_ROUNDS: usize = 200;

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::GammaOutOfRange(gamma))
    }
}

fn check_item(n: usize, g: &Item, recipient: Option<usize>) -> Result<()> {
    if g.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.n(),
        });
    }
    if let Some(r) = recipient.filter(|r| *r >= n) {
        return Err(Error::InvalidValue(format!(
            "agent {r} out of range for n = {n}"
        )));
    }
    Ok(())
}

/// Discounted utilities `u^{t,gamma}` and totals `T^{t,gamma}`, with the
/// undiscounted largest missed item as scale.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedPropState {
    n: usize,
    gamma: f64,
    disc_util: Vec<f64>,
    disc_total: Vec<f64>,
    missed_max: Vec<f64>,
    params: PotentialParams,
}

impl DiscountedPropState {
    pub fn new(n: usize, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(Self {
            n,
            gamma,
            disc_util: vec![0.0; n],
            disc_total: vec![0.0; n],
            missed_max: vec![0.0; n],
            params: PotentialParams::new(n, 1.0, n)?,
        })
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.params = self.params.with_p(p)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn disc_util(&self, i: usize) -> f64 {
        self.disc_util[i]
    }

    pub fn disc_total(&self, i: usize) -> f64 {
        self.disc_total[i]
    }

    pub fn missed_max(&self, i: usize) -> f64 {
        self.missed_max[i]
    }

    /// `d_i = T_i / n - u_i`.
    pub fn deficit(&self, i: usize) -> f64 {
        self.disc_total[i] / self.n as f64 - self.disc_util[i]
    }

    /// Decays both aggregates, then adds the new round.
    pub fn apply(&mut self, g: &Item, recipient: usize) -> Result<()> {
        check_item(self.n, g, Some(recipient))?;
        for i in 0..self.n {
            let x = g.value(i);
            self.disc_total[i] = self.gamma * self.disc_total[i] + x;
            self.disc_util[i] *= self.gamma;
            if i == recipient {
                self.disc_util[i] += x;
            } else {
                self.missed_max[i] = self.missed_max[i].max(x);
            }
        }
        Ok(())
    }

    fn entry(&self, i: usize, x: f64, received: bool) -> f64 {
        let total = self.gamma * self.disc_total[i] + x;
        let mut util = self.gamma * self.disc_util[i];
        let scale = if received {
            util += x;
            self.missed_max[i]
        } else {
            self.missed_max[i].max(x)
        };
        safe_div(positive_part(total / self.n as f64 - util), scale)
    }
}

/// Returns the state after giving `g` to `recipient`.
pub fn discounted_step(
    s: &DiscountedPropState,
    g: &Item,
    recipient: usize,
) -> Result<DiscountedPropState> {
    let mut next = s.clone();
    next.apply(g, recipient)?;
    Ok(next)
}

pub fn discounted_candidates(s: &DiscountedPropState, g: &Item) -> Result<CandidateSet> {
    check_item(s.n, g, None)?;
    let miss = (0..s.n).map(|i| s.entry(i, g.value(i), false)).collect();
    let mut set = CandidateSet::new(DeficitProfile::from_vec_unchecked(miss));
    for a in 0..s.n {
        set.push(ActionId(a), vec![(a, s.entry(a, g.value(a), true))]);
    }
    Ok(set)
}

/// Same increments as the undiscounted proportional witness; verify with
/// contraction `gamma`.
pub fn discounted_witness(s: &DiscountedPropState, g: &Item) -> Result<MomentWitness> {
    check_item(s.n, g, None)?;
    Ok(proportional_witness(s.n, |i| {
        let x = g.value(i);
        safe_div(x, s.missed_max[i].max(x))
    }))
}

impl DeficitModel for DiscountedPropState {
    type Input = Item;

    fn params(&self) -> &PotentialParams {
        &self.params
    }

    fn profile(&self) -> DeficitProfile {
        let z = (0..self.n)
            .map(|i| safe_div(positive_part(self.deficit(i)), self.missed_max[i]))
            .collect();
        DeficitProfile::from_vec_unchecked(z)
    }

    fn candidates(&self, input: &Item) -> Result<CandidateSet> {
        discounted_candidates(self, input)
    }

    fn witness(&self, input: &Item) -> Result<MomentWitness> {
        discounted_witness(self, input)
    }

    fn apply(&mut self, input: &Item, action: ActionId) -> Result<()> {
        DiscountedPropState::apply(self, input, action.0)
    }

    fn contraction(&self) -> f64 {
        self.gamma
    }
}

/// Time-uniform deficit bound `e sqrt(4p^2 + 2 sqrt(e) p sigma^2 / (n (1 - gamma^2)))`.
pub fn c_gamma(params: &PotentialParams, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(gamma_bound(params, 1.0 / (1.0 - gamma * gamma)))
}

/// Bound after `t` rounds, with `G(t) = (1 - gamma^{2t}) / (1 - gamma^2)`.
pub fn c_gamma_prefix(params: &PotentialParams, gamma: f64, t: u64) -> Result<f64> {
    check_gamma(gamma)?;
    let g2 = gamma * gamma;
    let mass = (1.0 - g2.powf(t as f64)) / (1.0 - g2);
    Ok(gamma_bound(params, mass))
}

fn gamma_bound(params: &PotentialParams, mass: f64) -> f64 {
    let p = params.p();
    let inner = 4.0 * p * p + 2.0 * SQRT_E * p * params.sigma_sq() * mass / params.n_ref() as f64;
    std::f64::consts::E * inner.sqrt()
}

/// The last `w` rounds of (item, recipient).
#[derive(Debug, Clone, PartialEq)]
pub struct WindowState {
    w: usize,
    n: usize,
    buf: VecDeque<(Item, usize)>,
}

impl WindowState {
    pub fn new(n: usize, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidValue("window length must be positive".into()));
        }
        Ok(Self {
            w,
            n,
            buf: VecDeque::with_capacity(w),
        })
    }

    pub fn window(&self) -> usize {
        self.w
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn push(&mut self, g: Item, recipient: usize) -> Result<()> {
        check_item(self.n, &g, Some(recipient))?;
        if self.buf.len() == self.w {
            self.buf.pop_front();
        }
        self.buf.push_back((g, recipient));
        Ok(())
    }
}

/// `d_i^{t,W}`: windowed proportional share minus windowed own value.
pub fn windowed_deficit(s: &WindowState, agent: usize) -> f64 {
    let mut total = 0.0;
    let mut own = 0.0;
    for (g, r) in &s.buf {
        let x = g.value(agent);
        total += x;
        if *r == agent {
            own += x;
        }
    }
    total / s.n as f64 - own
}

/// Largest deviation seen between the decayed and inflated ledgers.
#[derive(Debug, Clone, PartialEq)]
pub struct InflationReport {
    pub rounds_checked: usize,
    /// Largest `|a - b| / max(1, |a|, |b|)` over aggregates and deficits.
    pub max_rel_diff: f64,
}

impl InflationReport {
    pub fn passed(&self) -> bool {
        self.max_rel_diff <= 1e-9
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Replays the first rounds of a run through both the `gamma`-decayed
/// ledger and the `1/gamma`-inflated one, and compares them after
/// normalizing by `gamma^t`.
pub fn inflation_equiv_check(
    n: usize,
    gamma: f64,
    items: &[Item],
    recipients: &[usize],
) -> Result<InflationReport> {
    if items.len() != recipients.len() {
        return Err(Error::DimensionMismatch {
            expected: items.len(),
            found: recipients.len(),
        });
    }
    let mut decayed = DiscountedPropState::new(n, gamma)?;
    let beta = 1.0 / gamma;
    let mut util = vec![0.0; n];
    let mut total = vec![0.0; n];
    let rounds = items.len().min(INFLATION_ROUNDS);
    let mut worst: f64 = 0.0;
    for t in 0..rounds {
        let (g, r) = (&items[t], recipients[t]);
        decayed.apply(g, r)?;
        let w = beta.powi(t as i32 + 1);
        for i in 0..n {
            total[i] += w * g.value(i);
            if i == r {
                util[i] += w * g.value(i);
            }
        }
        let norm = gamma.powi(t as i32 + 1);
        let z = decayed.profile();
        for i in 0..n {
            worst = worst
                .max(rel_diff(decayed.disc_total(i), norm * total[i]))
                .max(rel_diff(decayed.disc_util(i), norm * util[i]));
            let zbar = safe_div(
                positive_part(total[i] / n as f64 - util[i]),
                decayed.missed_max(i),
            );
            worst = worst.max(rel_diff(z.as_slice()[i], norm * zbar));
        }
    }
    Ok(InflationReport {
        rounds_checked: rounds,
        max_rel_diff: worst,
    })
}
