use crate::alloc::{Item, ItemLedger};
use crate::error::{Error, Result};
use crate::framework::{choose_action, ActionId, DeficitModel};

/// An online rule for item allocation.
pub trait ItemPolicy {
    fn name(&self) -> &str;

    /// Recipient of `item` given everything allocated so far.
    fn choose(&mut self, ledger: &ItemLedger, item: &Item) -> Result<usize>;

    /// Called after the item has been given to `recipient`.
    fn observe(&mut self, _item: &Item, _recipient: usize) -> Result<()> {
        Ok(())
    }
}

pub fn policy_round_robin(t: usize, n: usize) -> usize {
    t % n
}

/// Maximizes the smallest post-allocation utility; ties to the lowest index.
pub fn policy_util_greedy(ledger: &ItemLedger, item: &Item) -> Result<usize> {
    let n = ledger.n();
    check(n, item)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for a in 0..n {
        let worst = (0..n)
            .map(|i| ledger.utility(i) + if i == a { item.value(i) } else { 0.0 })
            .fold(f64::INFINITY, f64::min);
        if worst > best.0 {
            best = (worst, a);
        }
    }
    Ok(best.1)
}

/// Gives the item to the agent with the largest current deficit; ties to
/// the lowest index.
pub fn policy_deficit_greedy(ledger: &ItemLedger, item: &Item) -> Result<usize> {
    let n = ledger.n();
    check(n, item)?;
    let mut best = (f64::NEG_INFINITY, 0);
    for i in 0..n {
        let d = ledger.deficit(i);
        if d > best.0 {
            best = (d, i);
        }
    }
    Ok(best.1)
}

fn check(n: usize, item: &Item) -> Result<()> {
    if item.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: item.n(),
        });
    }
    Ok(())
}

/// Parameters of the two-agent exponential-envy rule for horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenadeParams {
    pub horizon: u64,
    pub s: f64,
    pub lambda: f64,
}

impl BenadeParams {
    pub fn new(horizon: u64) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidValue("horizon must be positive".into()));
        }
        let t = horizon as f64;
        let ln2 = std::f64::consts::LN_2;
        Ok(Self {
            horizon,
            s: (2.0 * (1.0 + 2.0 * ln2 / t).ln()).sqrt(),
            lambda: 10.0 * (t * ln2 / 2.0).sqrt(),
        })
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Minimizes `exp(s f12) + exp(s f21)` after allocation, where
/// `f_ij = v_i(P_j) - v_i(P_i)`. Two agents only; ties to agent 0.
pub fn policy_benade2(ledger: &ItemLedger, item: &Item, params: &BenadeParams) -> Result<usize> {
    if ledger.n() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: ledger.n(),
        });
    }
    check(2, item)?;
    let s = params.s;
    let f12 = ledger.envy(0, 1);
    let f21 = ledger.envy(1, 0);
    let (x0, x1) = (item.value(0), item.value(1));
    let to0 = log_add_exp(s * (f12 - x0), s * (f21 + x1));
    let to1 = log_add_exp(s * (f12 + x0), s * (f21 - x1));
    Ok(if to0 <= to1 { 0 } else { 1 })
}

#[derive(Debug, Clone, Default)]
pub struct RoundRobin;

impl ItemPolicy for RoundRobin {
    fn name(&self) -> &str {
        "round_robin"
    }

    fn choose(&mut self, ledger: &ItemLedger, _item: &Item) -> Result<usize> {
        Ok(policy_round_robin(ledger.rounds(), ledger.n()))
    }
}

#[derive(Debug, Clone, Default)]
pub struct UtilGreedy;

impl ItemPolicy for UtilGreedy {
    fn name(&self) -> &str {
        "util_greedy"
    }

    fn choose(&mut self, ledger: &ItemLedger, item: &Item) -> Result<usize> {
        policy_util_greedy(ledger, item)
    }
}

#[derive(Debug, Clone, Default)]
pub struct DeficitGreedy;

impl ItemPolicy for DeficitGreedy {
    fn name(&self) -> &str {
        "deficit_greedy"
    }

    fn choose(&mut self, ledger: &ItemLedger, item: &Item) -> Result<usize> {
        policy_deficit_greedy(ledger, item)
    }
}

#[derive(Debug, Clone)]
pub struct Benade2(pub BenadeParams);

impl ItemPolicy for Benade2 {
    fn name(&self) -> &str {
        "benade2"
    }

    fn choose(&mut self, ledger: &ItemLedger, item: &Item) -> Result<usize> {
        policy_benade2(ledger, item, &self.0)
    }
}

/// Always the same agent.
#[derive(Debug, Clone)]
pub struct FixedAgent(pub usize);

impl ItemPolicy for FixedAgent {
    fn name(&self) -> &str {
        "fixed"
    }

    fn choose(&mut self, _ledger: &ItemLedger, _item: &Item) -> Result<usize> {
        Ok(self.0)
    }
}

/// The p-potential rule over any item-driven instantiation.
#[derive(Debug, Clone)]
pub struct PotentialPolicy<M> {
    model: M,
}

impl<M> PotentialPolicy<M> {
    pub fn new(model: M) -> Self {
        Self { model }
    }

    pub fn model(&self) -> &M {
        &self.model
    }
}

impl<M: DeficitModel<Input = Item>> ItemPolicy for PotentialPolicy<M> {
    fn name(&self) -> &str {
        "potential"
    }

    fn choose(&mut self, _ledger: &ItemLedger, item: &Item) -> Result<usize> {
        let set = self.model.candidates(item)?;
        Ok(choose_action(&set, self.model.params())?.0)
    }

    fn observe(&mut self, item: &Item, recipient: usize) -> Result<()> {
        self.model.apply(item, ActionId(recipient))
    }
}
