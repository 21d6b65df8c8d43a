use super::{check_agent, check_dim, Item};
use crate::error::Result;
use crate::framework::{
    positive_part, safe_div, ActionId, CandidateSet, DeficitModel, DeficitProfile, MomentWitness,
    PotentialParams, INEQ_TOL,
};

/// Aggregates for proportionality normalized by the largest missed item.
#[derive(Debug, Clone, PartialEq)]
pub struct PropxState {
    n: usize,
    bundle_value: Vec<f64>,
    total_value: Vec<f64>,
    missed_max: Vec<f64>,
    params: PotentialParams,
}

impl PropxState {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            bundle_value: vec![0.0; n],
            total_value: vec![0.0; n],
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

    pub fn bundle_value(&self, i: usize) -> f64 {
        self.bundle_value[i]
    }

    pub fn total_value(&self, i: usize) -> f64 {
        self.total_value[i]
    }

    /// `U_i`, the largest value agent `i` has seen go to someone else.
    pub fn missed_max(&self, i: usize) -> f64 {
        self.missed_max[i]
    }

    /// `d_i = v_i(G)/n - v_i(P_i)`.
    pub fn deficit(&self, i: usize) -> f64 {
        self.total_value[i] / self.n as f64 - self.bundle_value[i]
    }

    pub fn apply(&mut self, item: &Item, recipient: usize) -> Result<()> {
        check_dim(self.n, item)?;
        check_agent(self.n, recipient)?;
        for i in 0..self.n {
            let x = item.value(i);
            self.total_value[i] += x;
            if i == recipient {
                self.bundle_value[i] += x;
            } else {
                self.missed_max[i] = self.missed_max[i].max(x);
            }
        }
        Ok(())
    }

    fn miss_entry(&self, i: usize, x: f64) -> f64 {
        let d = (self.total_value[i] + x) / self.n as f64 - self.bundle_value[i];
        safe_div(positive_part(d), self.missed_max[i].max(x))
    }

    fn recv_entry(&self, i: usize, x: f64) -> f64 {
        let d = (self.total_value[i] + x) / self.n as f64 - (self.bundle_value[i] + x);
        safe_div(positive_part(d), self.missed_max[i])
    }
}

/// Candidate profiles for giving `g` to each agent.
///
/// The all-miss vector is built once; candidate `a` swaps in the single
/// entry for the recipient.
pub fn propx_candidates(s: &PropxState, g: &Item) -> Result<CandidateSet> {
    check_dim(s.n, g)?;
    let miss: Vec<f64> = (0..s.n).map(|i| s.miss_entry(i, g.value(i))).collect();
    let mut set = CandidateSet::new(DeficitProfile::from_vec_unchecked(miss));
    for a in 0..s.n {
        set.push(ActionId(a), vec![(a, s.recv_entry(a, g.value(a)))]);
    }
    Ok(set)
}

/// Witness with reference action `k` = give to agent `k`, `sigma^2 = 1`.
pub fn propx_witness(s: &PropxState, g: &Item) -> Result<MomentWitness> {
    check_dim(s.n, g)?;
    Ok(proportional_witness(s.n, |i| {
        let x = g.value(i);
        safe_div(x, s.missed_max[i].max(x))
    }))
}

/// `Delta_i(i) = -(1 - 1/n) s_i`, `Delta_i(a) = s_i / n` otherwise.
pub(crate) fn proportional_witness(n: usize, step: impl Fn(usize) -> f64) -> MomentWitness {
    let mut w = MomentWitness::zeros((0..n).map(ActionId).collect(), n);
    let nf = n as f64;
    for i in 0..n {
        let s = step(i);
        for k in 0..n {
            let v = if k == i {
                -(1.0 - 1.0 / nf) * s
            } else {
                s / nf
            };
            w.set(i, k, v);
        }
    }
    w
}

/// Whether every proportionality deficit is at most `c`.
pub fn bprop_check(s: &PropxState, c: f64) -> bool {
    (0..s.n).all(|i| s.deficit(i) <= c + INEQ_TOL)
}

impl DeficitModel for PropxState {
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
        propx_candidates(self, input)
    }

    fn witness(&self, input: &Item) -> Result<MomentWitness> {
        propx_witness(self, input)
    }

    fn apply(&mut self, input: &Item, action: ActionId) -> Result<()> {
        PropxState::apply(self, input, action.0)
    }
}
