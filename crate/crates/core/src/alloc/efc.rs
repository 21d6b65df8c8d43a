use super::{check_agent, check_dim, pair_index, pair_of, Item};
use crate::error::{Error, Result};
use crate::framework::{
    positive_part, ActionId, CandidateSet, DeficitModel, DeficitProfile, MomentWitness,
    PotentialParams, INEQ_TOL,
};

/// Default length of the retained per-pair top-value lists.
pub const DEFAULT_K_MAX: usize = 64;

/// Threshold counts `C_{i->j,tau}` over a fixed value ledger, plus the
/// per-pair top values needed by the brute-force EFk check.
#[derive(Debug, Clone, PartialEq)]
pub struct EfcThresholdState {
    n: usize,
    theta: Vec<f64>,
    counts: Vec<u64>,
    params: PotentialParams,
    k_max: usize,
    cross: Vec<f64>,
    top: Vec<Vec<f64>>,
    sizes: Vec<usize>,
}

impl EfcThresholdState {
    /// `theta` may be given in any order; it is sorted ascending.
    pub fn new(n: usize, theta: &[f64]) -> Result<Self> {
        Self::with_k_max(n, theta, DEFAULT_K_MAX)
    }

    pub fn with_k_max(n: usize, theta: &[f64], k_max: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidValue(format!("envy needs n >= 2, got {n}")));
        }
        let mut th = theta.to_vec();
        if th.is_empty() || th.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidValue(format!("value ledger {theta:?}")));
        }
        th.sort_by(f64::total_cmp);
        if th.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidValue(format!(
                "value ledger has repeats: {theta:?}"
            )));
        }
        let l = th.len();
        let m = n * (n - 1) * l;
        Ok(Self {
            n,
            theta: th,
            counts: vec![0; n * n * l],
            params: PotentialParams::new(m, 2.0, n)?,
            k_max,
            cross: vec![0.0; n * n],
            top: vec![Vec::new(); n * n],
            sizes: vec![0; n],
        })
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        self.params = self.params.with_p(p)?;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn levels(&self) -> usize {
        self.theta.len()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// `C_{i->j,tau_l}` with thresholds in ascending order.
    pub fn count(&self, i: usize, j: usize, l: usize) -> u64 {
        self.counts[(i * self.n + j) * self.levels() + l]
    }

    /// `v_i(P_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.cross[i * self.n + j]
    }

    /// Index of the quality variable `(i, j, tau_l)`.
    pub fn quality_index(&self, i: usize, j: usize, l: usize) -> usize {
        pair_index(self.n, i, j) * self.levels() + l
    }

    /// Highest ledger level at or below `v`, `None` for a zero value.
    fn level(&self, agent: usize, v: f64) -> Result<Option<usize>> {
        if v == 0.0 {
            return Ok(None);
        }
        self.theta
            .binary_search_by(|t| t.total_cmp(&v))
            .map(Some)
            .map_err(|_| Error::ValueNotInLedger { agent, value: v })
    }

    fn item_levels(&self, g: &Item) -> Result<Vec<Option<usize>>> {
        check_dim(self.n, g)?;
        (0..self.n).map(|i| self.level(i, g.value(i))).collect()
    }

    fn z(&self, i: usize, j: usize, l: usize) -> f64 {
        positive_part(self.count(i, j, l) as f64 - self.count(i, i, l) as f64)
    }

    pub fn apply(&mut self, item: &Item, recipient: usize) -> Result<()> {
        let levels = self.item_levels(item)?;
        check_agent(self.n, recipient)?;
        let (n, l) = (self.n, self.levels());
        for (i, lv) in levels.iter().enumerate() {
            if let Some(top) = lv {
                let base = (i * n + recipient) * l;
                for c in &mut self.counts[base..=base + top] {
                    *c += 1;
                }
            }
            let x = item.value(i);
            self.cross[i * n + recipient] += x;
            let list = &mut self.top[i * n + recipient];
            let pos = list.partition_point(|v| *v >= x);
            if pos < self.k_max {
                list.insert(pos, x);
                list.truncate(self.k_max);
            }
        }
        self.sizes[recipient] += 1;
        Ok(())
    }

    /// Sum of the `k` largest `v_i` values in `P_j`.
    pub fn top_k_sum(&self, i: usize, j: usize, k: usize) -> Result<f64> {
        if k > self.k_max && self.sizes[j] > self.k_max {
            return Err(Error::KExceedsRetained {
                k,
                k_max: self.k_max,
            });
        }
        Ok(self.top[i * self.n + j].iter().take(k).sum())
    }
}

/// Candidate profiles; each candidate touches the `2(n-1)L` entries of
/// pairs containing the recipient.
pub fn efc_candidates(s: &EfcThresholdState, g: &Item) -> Result<CandidateSet> {
    let levels = s.item_levels(g)?;
    let (n, l) = (s.n, s.levels());
    let hit = |agent: usize, lv: usize| -> u64 {
        match levels[agent] {
            Some(top) if lv <= top => 1,
            _ => 0,
        }
    };
    let mut set = CandidateSet::new(s.profile());
    for r in 0..n {
        let mut ov = Vec::with_capacity(2 * (n - 1) * l);
        for k in (0..n).filter(|k| *k != r) {
            for lv in 0..l {
                let gain = s.count(k, r, lv) + hit(k, lv);
                let z = positive_part(gain as f64 - s.count(k, k, lv) as f64);
                ov.push((s.quality_index(k, r, lv), z));
                let own = s.count(r, r, lv) + hit(r, lv);
                let z = positive_part(s.count(r, k, lv) as f64 - own as f64);
                ov.push((s.quality_index(r, k, lv), z));
            }
        }
        set.push(ActionId(r), ov);
    }
    Ok(set)
}

/// Witness with `Delta(j) = s`, `Delta(i) = -s`, `s = 1[v_i(g) >= tau]`.
pub fn efc_witness(s: &EfcThresholdState, g: &Item) -> Result<MomentWitness> {
    let levels = s.item_levels(g)?;
    let (n, l) = (s.n, s.levels());
    let mut w = MomentWitness::zeros((0..n).map(ActionId).collect(), n * (n - 1) * l);
    for i in 0..n {
        let Some(top) = levels[i] else { continue };
        for j in (0..n).filter(|j| *j != i) {
            for lv in 0..=top {
                let q = s.quality_index(i, j, lv);
                w.set(q, j, 1.0);
                w.set(q, i, -1.0);
            }
        }
    }
    Ok(w)
}

/// Per ordered pair (in pair order): whether the positive envy of `i`
/// toward `j` is at most the value of the `k` goods of `P_j` that `i`
/// likes best.
pub fn check_efk(s: &EfcThresholdState, k: usize) -> Result<Vec<bool>> {
    let n = s.n;
    (0..n * (n - 1))
        .map(|q| {
            let (i, j) = pair_of(n, q);
            let envy = positive_part(s.value(i, j) - s.value(i, i));
            Ok(envy <= s.top_k_sum(i, j, k)? + INEQ_TOL)
        })
        .collect()
}

impl DeficitModel for EfcThresholdState {
    type Input = Item;

    fn params(&self) -> &PotentialParams {
        &self.params
    }

    fn profile(&self) -> DeficitProfile {
        let (n, l) = (self.n, self.levels());
        let z = (0..n * (n - 1) * l)
            .map(|q| {
                let (i, j) = pair_of(n, q / l);
                self.z(i, j, q % l)
            })
            .collect();
        DeficitProfile::from_vec_unchecked(z)
    }

    fn candidates(&self, input: &Item) -> Result<CandidateSet> {
        efc_candidates(self, input)
    }

    fn witness(&self, input: &Item) -> Result<MomentWitness> {
        efc_witness(self, input)
    }

    fn apply(&mut self, input: &Item, action: ActionId) -> Result<()> {
        EfcThresholdState::apply(self, input, action.0)
    }
}
