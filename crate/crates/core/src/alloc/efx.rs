use super::{check_agent, check_dim, pair_index, pair_of, Item};
use crate::error::{Error, Result};
use crate::framework::{
    log_potential_component, positive_part, safe_div, ActionId, CandidateSet, DeficitModel,
    DeficitProfile, MomentWitness, PotentialParams,
};

/// Aggregates for envy normalized by the largest item in the envied bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct EfxState {
    n: usize,
    cross: Vec<f64>,
    scale: Vec<f64>,
    log_terms: Vec<f64>,
    params: PotentialParams,
}

impl EfxState {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidValue(format!("envy needs n >= 2, got {n}")));
        }
        let m = n * (n - 1);
        let params = PotentialParams::new(m, 2.0, n)?;
        let l0 = log_potential_component(0.0, params.p());
        Ok(Self {
            n,
            cross: vec![0.0; n * n],
            scale: vec![0.0; n * n],
            log_terms: vec![l0; m],
            params,
        })
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.params = self.params.with_p(p)?;
        self.refresh_logs();
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `v_i(P_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.cross[i * self.n + j]
    }

    /// `s_(i,j)`, the largest `v_i` over `P_j`.
    pub fn pair_scale(&self, i: usize, j: usize) -> f64 {
        self.scale[i * self.n + j]
    }

    pub fn envy(&self, i: usize, j: usize) -> f64 {
        self.value(i, j) - self.value(i, i)
    }

    /// Cached `ln f(z_(i,j))` terms in pair order.
    pub fn log_terms(&self) -> &[f64] {
        &self.log_terms
    }

    fn z(&self, i: usize, j: usize) -> f64 {
        safe_div(positive_part(self.envy(i, j)), self.pair_scale(i, j))
    }

    fn refresh_logs(&mut self) {
        let p = self.params.p();
        for q in 0..self.log_terms.len() {
            let (i, j) = pair_of(self.n, q);
            self.log_terms[q] = log_potential_component(self.z(i, j), p);
        }
    }

    pub fn apply(&mut self, item: &Item, recipient: usize) -> Result<()> {
        check_dim(self.n, item)?;
        check_agent(self.n, recipient)?;
        let n = self.n;
        let r = recipient;
        for i in 0..n {
            let x = item.value(i);
            self.cross[i * n + r] += x;
            if i != r {
                let s = &mut self.scale[i * n + r];
                *s = s.max(x);
            }
        }
        let p = self.params.p();
        for k in (0..n).filter(|k| *k != r) {
            let q = pair_index(n, k, r);
            self.log_terms[q] = log_potential_component(self.z(k, r), p);
            let q = pair_index(n, r, k);
            self.log_terms[q] = log_potential_component(self.z(r, k), p);
        }
        Ok(())
    }
}

/// Candidate profiles; each candidate recomputes the `2(n-1)` pairs that
/// contain the recipient.
pub fn efx_candidates(s: &EfxState, g: &Item) -> Result<CandidateSet> {
    check_dim(s.n, g)?;
    let n = s.n;
    let base = s.profile();
    let mut set = CandidateSet::new(base).with_base_log_terms(s.log_terms.clone());
    for r in 0..n {
        let mut ov = Vec::with_capacity(2 * (n - 1));
        let xr = g.value(r);
        for k in (0..n).filter(|k| *k != r) {
            let x = g.value(k);
            let envy = s.value(k, r) + x - s.value(k, k);
            let scale = s.pair_scale(k, r).max(x);
            ov.push((pair_index(n, k, r), safe_div(positive_part(envy), scale)));
            let envy = s.value(r, k) - (s.value(r, r) + xr);
            ov.push((
                pair_index(n, r, k),
                safe_div(positive_part(envy), s.pair_scale(r, k)),
            ));
        }
        set.push(ActionId(r), ov);
    }
    Ok(set)
}

/// Witness with `Delta(j) = alpha`, `Delta(i) = -alpha` on row `(i, j)`.
pub fn efx_witness(s: &EfxState, g: &Item) -> Result<MomentWitness> {
    check_dim(s.n, g)?;
    let n = s.n;
    let mut w = MomentWitness::zeros((0..n).map(ActionId).collect(), n * (n - 1));
    for i in 0..n {
        let x = g.value(i);
        for j in (0..n).filter(|j| *j != i) {
            let alpha = safe_div(x, s.pair_scale(i, j).max(x));
            let q = pair_index(n, i, j);
            w.set(q, j, alpha);
            w.set(q, i, -alpha);
        }
    }
    Ok(w)
}

impl DeficitModel for EfxState {
    type Input = Item;

    fn params(&self) -> &PotentialParams {
        &self.params
    }

    fn profile(&self) -> DeficitProfile {
        let n = self.n;
        let z = (0..n * (n - 1))
            .map(|q| {
                let (i, j) = pair_of(n, q);
                self.z(i, j)
            })
            .collect();
        DeficitProfile::from_vec_unchecked(z)
    }

    fn candidates(&self, input: &Item) -> Result<CandidateSet> {
        efx_candidates(self, input)
    }

    fn witness(&self, input: &Item) -> Result<MomentWitness> {
        efx_witness(self, input)
    }

    fn apply(&mut self, input: &Item, action: ActionId) -> Result<()> {
        EfxState::apply(self, input, action.0)
    }
}
