//! Public decisions: every round one outcome from a fixed candidate set is
//! chosen for all agents.

use crate::alloc::{proportional_witness, Item};
use crate::error::{Error, Result};
use crate::framework::{
    positive_part, safe_div, ActionId, CandidateSet, DeficitModel, DeficitProfile, MomentWitness,
    PotentialParams,
};

/// Valuations `v_i(o)` of one round, row-major by agent.
#[derive(Debug, Clone, PartialEq)]
pub struct PdmRound {
    n: usize,
    outcomes: usize,
    values: Vec<f64>,
}

impl PdmRound {
    pub fn new(n: usize, outcomes: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * outcomes {
            return Err(Error::DimensionMismatch {
                expected: n * outcomes,
                found: values.len(),
            });
        }
        if outcomes == 0 {
            return Err(Error::InvalidValue("candidate set is empty".into()));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!("valuation {v}")));
        }
        Ok(Self {
            n,
            outcomes,
            values,
        })
    }

    /// Item allocation viewed as a decision over `C = [n]`: outcome `o`
    /// is worth `x_i` to agent `i` exactly when `o = i`.
    pub fn from_item(item: &Item) -> Self {
        let n = item.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            values[i * n + i] = item.value(i);
        }
        Self {
            n,
            outcomes: n,
            values,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn value(&self, agent: usize, outcome: usize) -> f64 {
        self.values[agent * self.outcomes + outcome]
    }

    /// `M_i = max_o v_i(o)`.
    pub fn best_value(&self, agent: usize) -> f64 {
        self.row(agent).iter().copied().fold(0.0, f64::max)
    }

    /// Lowest-index outcome of maximal value for `agent`.
    pub fn favourite(&self, agent: usize) -> usize {
        let row = self.row(agent);
        let best = self.best_value(agent);
        row.iter().position(|v| *v == best).unwrap_or(0)
    }

    fn row(&self, agent: usize) -> &[f64] {
        &self.values[agent * self.outcomes..(agent + 1) * self.outcomes]
    }
}

/// Utilities, proportional shares and running-max scales.
#[derive(Debug, Clone, PartialEq)]
pub struct PdmState {
    n: usize,
    outcomes: usize,
    util: Vec<f64>,
    best_sum: Vec<f64>,
    run_max: Vec<f64>,
    params: PotentialParams,
}

impl PdmState {
    pub fn new(n: usize, outcomes: usize) -> Result<Self> {
        if outcomes == 0 {
            return Err(Error::InvalidValue("candidate set is empty".into()));
        }
        Ok(Self {
            n,
            outcomes,
            util: vec![0.0; n],
            best_sum: vec![0.0; n],
            run_max: vec![0.0; n],
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

    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn utility(&self, i: usize) -> f64 {
        self.util[i]
    }

    /// `Prop_i = (1/n) sum_r M_i^r`.
    pub fn prop(&self, i: usize) -> f64 {
        self.best_sum[i] / self.n as f64
    }

    /// `V_i`, the running maximum of `M_i`.
    pub fn run_max(&self, i: usize) -> f64 {
        self.run_max[i]
    }

    pub fn deficit(&self, i: usize) -> f64 {
        self.prop(i) - self.util[i]
    }

    fn check(&self, r: &PdmRound) -> Result<()> {
        if r.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: r.n,
            });
        }
        if r.outcomes != self.outcomes {
            return Err(Error::DimensionMismatch {
                expected: self.outcomes,
                found: r.outcomes,
            });
        }
        Ok(())
    }

    pub fn apply(&mut self, r: &PdmRound, outcome: usize) -> Result<()> {
        self.check(r)?;
        if outcome >= self.outcomes {
            return Err(Error::InvalidValue(format!(
                "outcome {outcome} out of range"
            )));
        }
        for i in 0..self.n {
            let best = r.best_value(i);
            self.best_sum[i] += best;
            self.util[i] += r.value(i, outcome);
            self.run_max[i] = self.run_max[i].max(best);
        }
        Ok(())
    }
}

/// One candidate per outcome over the `n` agent deficits.
pub fn pdm_candidates(s: &PdmState, r: &PdmRound) -> Result<CandidateSet> {
    s.check(r)?;
    let n = s.n;
    let nf = n as f64;
    let prop_next: Vec<f64> = (0..n)
        .map(|i| (s.best_sum[i] + r.best_value(i)) / nf)
        .collect();
    let scale_next: Vec<f64> = (0..n).map(|i| s.run_max[i].max(r.best_value(i))).collect();
    let mut set = CandidateSet::new(s.profile());
    for o in 0..s.outcomes {
        let ov = (0..n)
            .map(|i| {
                let d = prop_next[i] - (s.util[i] + r.value(i, o));
                (i, safe_div(positive_part(d), scale_next[i]))
            })
            .collect();
        set.push(ActionId(o), ov);
    }
    Ok(set)
}

/// Witness with reference action `k` = agent `k`'s favourite outcome.
pub fn pdm_witness(s: &PdmState, r: &PdmRound) -> Result<MomentWitness> {
    s.check(r)?;
    let mut w = proportional_witness(s.n, |i| {
        let best = r.best_value(i);
        safe_div(best, s.run_max[i].max(best))
    });
    w.set_ref_actions((0..s.n).map(|k| ActionId(r.favourite(k))).collect());
    Ok(w)
}

impl DeficitModel for PdmState {
    type Input = PdmRound;

    fn params(&self) -> &PotentialParams {
        &self.params
    }

    fn profile(&self) -> DeficitProfile {
        let z = (0..self.n)
            .map(|i| safe_div(positive_part(self.deficit(i)), self.run_max[i]))
            .collect();
        DeficitProfile::from_vec_unchecked(z)
    }

    fn candidates(&self, input: &PdmRound) -> Result<CandidateSet> {
        pdm_candidates(self, input)
    }

    fn witness(&self, input: &PdmRound) -> Result<MomentWitness> {
        pdm_witness(self, input)
    }

    fn apply(&mut self, input: &PdmRound, action: ActionId) -> Result<()> {
        PdmState::apply(self, input, action.0)
    }
}
