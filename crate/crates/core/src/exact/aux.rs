use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};

use super::frontier::next_level_covers;
use super::{next_frontier, parse_rational, Frontier, DEFAULT_FRONTIER_CAP};
use crate::alloc::{Item, ItemLedger};
use crate::baselines::ItemPolicy;
use crate::error::{Error, Result};

/// Default number of frontier levels searched.
pub const DEFAULT_K_MAX: u32 = 12;

/// Shifted surplus `delta_i = n v_i(P_i) - v_i(G) + nc`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SurplusState {
    delta: Vec<BigRational>,
}

impl SurplusState {
    pub fn new(delta: Vec<BigRational>) -> Self {
        Self { delta }
    }

    /// Start of the game: every coordinate `nc`.
    pub fn initial(n: usize, c: &BigRational) -> Self {
        let nc = BigRational::from_integer(BigInt::from(n)) * c;
        Self { delta: vec![nc; n] }
    }

    pub fn parse(coords: &[&str]) -> Result<Self> {
        Ok(Self {
            delta: coords
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_>>()?,
        })
    }

    pub fn delta(&self) -> &[BigRational] {
        &self.delta
    }

    pub fn n(&self) -> usize {
        self.delta.len()
    }

    /// No agent is below its proportional share by more than `c`.
    pub fn alive(&self) -> bool {
        self.delta.iter().all(|d| !d.is_negative())
    }

    /// State after giving an item with values `v` to `recipient`.
    pub fn after(&self, v: &[BigRational], recipient: usize) -> Result<Self> {
        let n = self.n();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: v.len(),
            });
        }
        if recipient >= n {
            return Err(Error::InvalidValue(format!(
                "agent {recipient} out of range"
            )));
        }
        let nm1 = BigRational::from_integer(BigInt::from(n as i64 - 1));
        let delta = self
            .delta
            .iter()
            .zip(v)
            .enumerate()
            .map(|(i, (d, x))| if i == recipient { d + &nm1 * x } else { d - x })
            .collect();
        Ok(Self { delta })
    }
}

/// Lazily built `D^0, D^1, ...` shared across AUX queries.
#[derive(Debug, Clone)]
pub struct FrontierChain {
    cap: usize,
    levels: Vec<Frontier>,
}

impl FrontierChain {
    pub fn new(n: usize) -> Self {
        Self::with_cap(n, DEFAULT_FRONTIER_CAP)
    }

    pub fn with_cap(n: usize, cap: usize) -> Self {
        Self {
            cap,
            levels: vec![Frontier::initial(n)],
        }
    }

    pub fn n(&self) -> usize {
        self.levels[0].n()
    }

    /// `D^k`, building missing levels.
    pub fn level(&mut self, k: usize) -> Result<&Frontier> {
        while self.levels.len() <= k {
            let next = next_frontier(self.levels.last().expect("D^0 present"), self.cap)?;
            self.levels.push(next);
        }
        Ok(&self.levels[k])
    }

    /// Smallest `k <= k_max` such that `D^k` dominates `x`.
    pub fn aux(&mut self, x: &SurplusState, k_max: u32) -> Result<u32> {
        if x.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: x.n(),
            });
        }
        if !x.alive() {
            return Ok(0);
        }
        for k in 0..=k_max as usize {
            let covered = if k < self.levels.len() {
                self.levels[k].covers(x)
            } else {
                // the deciding level need not be built in full
                let hit = next_level_covers(&self.levels[k - 1], x)?;
                if !hit && k < k_max as usize {
                    self.level(k)?;
                }
                hit
            };
            if covered {
                return Ok(k as u32);
            }
        }
        Err(Error::KMaxExceeded(k_max))
    }
}

/// Rounds until a forced violation from `x`, with a fresh frontier chain.
pub fn aux(x: &SurplusState, n: usize, k_max: u32) -> Result<u32> {
    FrontierChain::new(n).aux(x, k_max)
}

/// Recipient maximizing the post-allocation AUX value; horizons beyond
/// `k_max` count as `k_max + 1`, ties go to the lowest index.
pub fn exp_policy_with(
    chain: &mut FrontierChain,
    state: &SurplusState,
    item: &[BigRational],
    k_max: u32,
) -> Result<usize> {
    let one = BigRational::one();
    if item.iter().any(|v| v.is_negative() || *v > one) {
        return Err(Error::InvalidValue("item values must lie in [0, 1]".into()));
    }
    let mut best = (0u32, 0usize);
    for i in 0..state.n() {
        let tau = match chain.aux(&state.after(item, i)?, k_max) {
            Ok(k) => k,
            Err(Error::KMaxExceeded(_)) => k_max + 1,
            Err(e) => return Err(e),
        };
        if i == 0 || tau > best.0 {
            best = (tau, i);
        }
    }
    Ok(best.1)
}

pub fn exp_policy(
    state: &SurplusState,
    item: &[BigRational],
    n: usize,
    k_max: u32,
) -> Result<usize> {
    exp_policy_with(&mut FrontierChain::new(n), state, item, k_max)
}

/// Exact conversion of a double.
pub fn rational_from_f64(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).ok_or_else(|| Error::InvalidValue(format!("non-finite value {v}")))
}

/// EXP as an item policy; values are converted to rationals exactly.
#[derive(Debug, Clone)]
pub struct ExpPolicy {
    chain: FrontierChain,
    state: SurplusState,
    k_max: u32,
}

impl ExpPolicy {
    pub fn new(n: usize, c: f64, k_max: u32) -> Result<Self> {
        let c = rational_from_f64(c)?;
        if !c.is_positive() {
            return Err(Error::NonpositiveC(0.0));
        }
        Ok(Self {
            chain: FrontierChain::new(n),
            state: SurplusState::initial(n, &c),
            k_max,
        })
    }

    pub fn state(&self) -> &SurplusState {
        &self.state
    }

    fn exact(item: &Item) -> Result<Vec<BigRational>> {
        item.values()
            .iter()
            .map(|v| rational_from_f64(*v))
            .collect()
    }
}

impl ItemPolicy for ExpPolicy {
    fn name(&self) -> &str {
        "exp_exact"
    }

    fn choose(&mut self, _ledger: &ItemLedger, item: &Item) -> Result<usize> {
        let v = Self::exact(item)?;
        exp_policy_with(&mut self.chain, &self.state, &v, self.k_max)
    }

    fn observe(&mut self, item: &Item, recipient: usize) -> Result<()> {
        self.state = self.state.after(&Self::exact(item)?, recipient)?;
        Ok(())
    }
}
