//! Deficit profiles, the p-potential rule, closed-form bounds and
//! moment-condition verification.

use crate::error::{Error, Result};

/// Absolute tolerance for inequality checks.
pub const INEQ_TOL: f64 = 1e-9;
/// Relative tolerance for identities and tie detection.
pub const REL_TOL: f64 = 1e-12;

/// Index of a quality variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QualityId(pub usize);

/// Index of a feasible action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionId(pub usize);

/// `x / y` if `y > 0`, else 0.
#[inline]
pub fn safe_div(x: f64, y: f64) -> f64 {
    if y > 0.0 {
        x / y
    } else {
        0.0
    }
}

#[inline]
pub fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Nonnegative, finite deficit vector indexed by quality variable.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficitProfile {
    z: Vec<f64>,
}

impl DeficitProfile {
    pub fn new(z: Vec<f64>) -> Result<Self> {
        if let Some(v) = z.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!("deficit entry {v}")));
        }
        Ok(Self { z })
    }

    pub fn zeros(m: usize) -> Self {
        Self { z: vec![0.0; m] }
    }

    pub(crate) fn from_vec_unchecked(z: Vec<f64>) -> Self {
        debug_assert!(z.iter().all(|v| v.is_finite() && *v >= 0.0), "{z:?}");
        Self { z }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn get(&self, q: QualityId) -> f64 {
        self.z[q.0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.z
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.z
    }

    /// Largest entry, 0 for an empty profile.
    pub fn max(&self) -> f64 {
        self.z.iter().copied().fold(0.0, f64::max)
    }
}

/// Parameters of the potential `f(u) = (u^2 + 4p^2)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialParams {
    p: f64,
    m: usize,
    sigma_sq: f64,
    n_ref: usize,
}

impl PotentialParams {
    /// Uses the default exponent: 1 when `m <= 2`, `ln m` otherwise.
    pub fn new(m: usize, sigma_sq: f64, n_ref: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidValue("m must be positive".into()));
        }
        if n_ref == 0 {
            return Err(Error::InvalidValue("n_ref must be positive".into()));
        }
        if !(sigma_sq.is_finite() && sigma_sq > 0.0) {
            return Err(Error::InvalidValue(format!("sigma_sq {sigma_sq}")));
        }
        Ok(Self {
            p: Self::default_p(m),
            m,
            sigma_sq,
            n_ref,
        })
    }

    pub fn default_p(m: usize) -> f64 {
        if m <= 2 {
            1.0
        } else {
            (m as f64).ln()
        }
    }

    pub fn with_p(mut self, p: f64) -> Result<Self> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidValue(format!("p must be >= 1, got {p}")));
        }
        self.p = p;
        Ok(self)
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn sigma_sq(&self) -> f64 {
        self.sigma_sq
    }

    pub fn n_ref(&self) -> usize {
        self.n_ref
    }

    /// `m^(1/p)`.
    pub fn m_root(&self) -> f64 {
        ((self.m as f64).ln() / self.p).exp()
    }

    /// `4p^2 + 2 sqrt(e) p sigma^2 t / n`.
    fn envelope(&self, t: f64) -> f64 {
        let p = self.p;
        4.0 * p * p + 2.0 * SQRT_E * p * self.sigma_sq * t / self.n_ref as f64
    }
}

const SQRT_E: f64 = 1.648_721_270_700_128_2;

/// `ln f(u) = p ln(u^2 + 4p^2)`.
#[inline]
pub fn log_potential_component(u: f64, p: f64) -> f64 {
    p * (u * u + 4.0 * p * p).ln()
}

fn logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = terms.iter().map(|l| (l - max).exp()).sum();
    max + sum.ln()
}

/// `ln Phi` for a profile.
pub fn log_phi(z: &DeficitProfile, params: &PotentialParams) -> f64 {
    let terms: Vec<f64> = z
        .as_slice()
        .iter()
        .map(|u| log_potential_component(*u, params.p))
        .collect();
    logsumexp(&terms)
}

/// `Psi = Phi^(1/p)`.
pub fn profile_psi(z: &DeficitProfile, params: &PotentialParams) -> f64 {
    (log_phi(z, params) / params.p).exp()
}

/// Count of entries strictly above `c`.
pub fn disappointed_count(z: &DeficitProfile, c: f64) -> usize {
    z.as_slice().iter().filter(|v| **v > c).count()
}

/// Upper bound on the number of c-disappointed variables after `t` rounds.
pub fn bound_disappointed(t: u64, c: f64, params: &PotentialParams) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::NonpositiveC(c));
    }
    let log = (params.m as f64).ln() + params.p * (params.envelope(t as f64).ln() - 2.0 * c.ln());
    Ok(log.exp())
}

/// Threshold `c_t` with fewer than one disappointed variable after `t` rounds.
pub fn ct_threshold(t: u64, params: &PotentialParams) -> f64 {
    params.m_root() * params.envelope(t as f64).sqrt()
}

/// Any-time bound on `Psi^t`.
pub fn potential_bound(t: u64, params: &PotentialParams) -> f64 {
    params.m_root() * params.envelope(t as f64)
}

/// Largest admissible one-round increase of `Psi`.
pub fn growth_slack(params: &PotentialParams) -> f64 {
    2.0 * SQRT_E * params.p * params.sigma_sq * params.m_root() / params.n_ref as f64
}

pub fn one_step_growth_check(psi_prev: f64, psi_next: f64, params: &PotentialParams) -> bool {
    psi_next <= psi_prev + growth_slack(params) + INEQ_TOL
}

/// One candidate: the base profile with some entries replaced.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub action: ActionId,
    overrides: Vec<(usize, f64)>,
}

impl Candidate {
    /// Replaced entries, sorted by quality index.
    pub fn overrides(&self) -> &[(usize, f64)] {
        &self.overrides
    }
}

/// Hypothetical post-step profiles, one per feasible action.
///
/// Profiles are stored as a shared base plus per-candidate replacements so
/// instantiations that touch few entries per action stay cheap.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    base: DeficitProfile,
    base_log: Option<Vec<f64>>,
    candidates: Vec<Candidate>,
}

impl CandidateSet {
    pub fn new(base: DeficitProfile) -> Self {
        Self {
            base,
            base_log: None,
            candidates: Vec::new(),
        }
    }

    /// Builds a set from fully materialized profiles.
    pub fn from_profiles(profiles: Vec<(ActionId, DeficitProfile)>) -> Result<Self> {
        let mut iter = profiles.into_iter();
        let (a0, first) = iter.next().ok_or(Error::EmptyCandidateSet)?;
        let m = first.len();
        let mut set = Self::new(first);
        set.candidates.push(Candidate {
            action: a0,
            overrides: Vec::new(),
        });
        for (a, prof) in iter {
            if prof.len() != m {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    found: prof.len(),
                });
            }
            set.candidates.push(Candidate {
                action: a,
                overrides: prof.into_vec().into_iter().enumerate().collect(),
            });
        }
        Ok(set)
    }

    /// Adds a candidate equal to the base except at `overrides`.
    ///
    /// Panics on an out-of-range index or a negative or non-finite value.
    pub fn push(&mut self, action: ActionId, mut overrides: Vec<(usize, f64)>) {
        overrides.sort_by_key(|o| o.0);
        overrides.dedup_by_key(|o| o.0);
        for &(q, v) in &overrides {
            assert!(q < self.base.len(), "quality index {q} out of range");
            assert!(v.is_finite() && v >= 0.0, "deficit entry {v}");
        }
        self.candidates.push(Candidate { action, overrides });
    }

    /// Supplies precomputed `ln f(base_q)` terms.
    pub fn with_base_log_terms(mut self, terms: Vec<f64>) -> Self {
        assert_eq!(terms.len(), self.base.len());
        self.base_log = Some(terms);
        self
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Number of quality variables.
    pub fn dim(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self) -> &DeficitProfile {
        &self.base
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn actions(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.candidates.iter().map(|c| c.action)
    }

    pub fn index_of(&self, action: ActionId) -> Option<usize> {
        self.candidates.iter().position(|c| c.action == action)
    }

    /// Entry `q` of candidate `k`.
    pub fn value(&self, k: usize, q: usize) -> f64 {
        let ov = &self.candidates[k].overrides;
        match ov.binary_search_by_key(&q, |o| o.0) {
            Ok(pos) => ov[pos].1,
            Err(_) => self.base.as_slice()[q],
        }
    }

    /// Materialized profile of candidate `k`.
    pub fn profile(&self, k: usize) -> DeficitProfile {
        let mut z = self.base.as_slice().to_vec();
        for &(q, v) in &self.candidates[k].overrides {
            z[q] = v;
        }
        DeficitProfile::from_vec_unchecked(z)
    }

    /// Profile reached by `action`, if it is a candidate.
    pub fn profile_of(&self, action: ActionId) -> Option<DeficitProfile> {
        self.index_of(action).map(|k| self.profile(k))
    }
}

/// `ln Phi` of every candidate, in candidate order.
///
/// Sparse candidates reuse the scaled base sum; when removing the replaced
/// terms would cancel most of it the remainder is summed directly.
pub fn evaluate_candidates(set: &CandidateSet, params: &PotentialParams) -> Vec<f64> {
    let p = params.p;
    let m = set.dim();
    let base_log: Vec<f64> = match &set.base_log {
        Some(t) => t.clone(),
        None => set
            .base
            .as_slice()
            .iter()
            .map(|u| log_potential_component(*u, p))
            .collect(),
    };
    let shift = base_log.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = base_log.iter().map(|l| (l - shift).exp()).collect();
    let total = neumaier_sum(scaled.iter().copied());

    set.candidates
        .iter()
        .enumerate()
        .map(|(k, cand)| {
            let ov = &cand.overrides;
            if ov.is_empty() {
                return shift + total.ln();
            }
            if 2 * ov.len() >= m {
                return log_phi(&set.profile(k), params);
            }
            let removed = neumaier_sum(ov.iter().map(|&(q, _)| scaled[q]));
            let added = neumaier_sum(
                ov.iter()
                    .map(|&(_, v)| (log_potential_component(v, p) - shift).exp()),
            );
            let mut rest = total - removed;
            if rest < 1e-3 * total {
                rest = sum_excluding(&scaled, ov);
            }
            let val = rest + added;
            if val.is_finite() && val > 0.0 {
                shift + val.ln()
            } else {
                log_phi(&set.profile(k), params)
            }
        })
        .collect()
}

fn sum_excluding(scaled: &[f64], ov: &[(usize, f64)]) -> f64 {
    let mut skip = ov.iter().map(|o| o.0).peekable();
    neumaier_sum(scaled.iter().enumerate().filter_map(|(q, v)| {
        if skip.peek() == Some(&q) {
            skip.next();
            None
        } else {
            Some(*v)
        }
    }))
}

fn neumaier_sum(it: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in it {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Index of the minimum, treating values within relative `REL_TOL` as tied
/// and breaking ties by the smallest key.
pub(crate) fn argmin_tied<K: Ord + Copy>(values: &[f64], keys: &[K]) -> Option<usize> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() {
        return None;
    }
    let tol = REL_TOL * min.abs().max(1.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v <= min + tol)
        .min_by_key(|(i, _)| keys[*i])
        .map(|(i, _)| i)
}

/// The p-potential choice together with its `ln Phi`.
pub fn choose_action_scored(
    set: &CandidateSet,
    params: &PotentialParams,
) -> Result<(ActionId, f64)> {
    if set.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let logs = evaluate_candidates(set, params);
    let keys: Vec<ActionId> = set.actions().collect();
    let k = argmin_tied(&logs, &keys).ok_or(Error::EmptyCandidateSet)?;
    Ok((keys[k], logs[k]))
}

/// Action minimizing `Psi^{t+1}`; ties go to the lowest action id.
pub fn choose_action(set: &CandidateSet, params: &PotentialParams) -> Result<ActionId> {
    choose_action_scored(set, params).map(|(a, _)| a)
}

/// Reference actions and the `m x n_ref` increment matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentWitness {
    ref_actions: Vec<ActionId>,
    m: usize,
    delta: Vec<f64>,
}

impl MomentWitness {
    pub fn zeros(ref_actions: Vec<ActionId>, m: usize) -> Self {
        let n = ref_actions.len();
        Self {
            ref_actions,
            m,
            delta: vec![0.0; m * n],
        }
    }

    pub fn ref_actions(&self) -> &[ActionId] {
        &self.ref_actions
    }

    /// Replaces the reference actions, keeping the matrix.
    pub fn set_ref_actions(&mut self, actions: Vec<ActionId>) {
        assert_eq!(actions.len(), self.ref_actions.len());
        self.ref_actions = actions;
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n_ref(&self) -> usize {
        self.ref_actions.len()
    }

    pub fn get(&self, q: usize, k: usize) -> f64 {
        self.delta[q * self.n_ref() + k]
    }

    pub fn set(&mut self, q: usize, k: usize, v: f64) {
        let n = self.n_ref();
        self.delta[q * n + k] = v;
    }

    pub fn row(&self, q: usize) -> &[f64] {
        let n = self.n_ref();
        &self.delta[q * n..(q + 1) * n]
    }
}

/// Outcome of the moment checks on one row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowReport {
    pub shift_ok: bool,
    pub first_moment_ok: bool,
    pub second_moment_ok: bool,
    pub range_ok: bool,
    /// Largest amount by which any condition of the row is exceeded.
    pub worst_violation: f64,
}

impl RowReport {
    pub fn passed(&self) -> bool {
        self.shift_ok && self.first_moment_ok && self.second_moment_ok && self.range_ok
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WitnessReport {
    pub rows: Vec<RowReport>,
    pub worst_violation: f64,
}

impl WitnessReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(RowReport::passed)
    }

    pub fn failing_rows(&self) -> Vec<usize> {
        (0..self.rows.len())
            .filter(|q| !self.rows[*q].passed())
            .collect()
    }
}

/// Checks the shift, first-moment, second-moment and range conditions.
pub fn verify_moment_witness(
    z_prev: &DeficitProfile,
    candidates: &CandidateSet,
    w: &MomentWitness,
    params: &PotentialParams,
) -> Result<WitnessReport> {
    verify_moment_witness_contracted(z_prev, candidates, w, params, 1.0)
}

/// As [`verify_moment_witness`] with shift form `[gamma z + Delta]_+`.
pub fn verify_moment_witness_contracted(
    z_prev: &DeficitProfile,
    candidates: &CandidateSet,
    w: &MomentWitness,
    params: &PotentialParams,
    contraction: f64,
) -> Result<WitnessReport> {
    let m = z_prev.len();
    for found in [candidates.dim(), w.m(), params.m()] {
        if found != m {
            return Err(Error::DimensionMismatch { expected: m, found });
        }
    }
    if w.n_ref() != params.n_ref() {
        return Err(Error::DimensionMismatch {
            expected: params.n_ref(),
            found: w.n_ref(),
        });
    }
    let idx: Vec<usize> = w
        .ref_actions()
        .iter()
        .map(|a| {
            candidates.index_of(*a).ok_or_else(|| {
                Error::InvalidValue(format!("reference action {} is not a candidate", a.0))
            })
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(m);
    let mut worst_all: f64 = 0.0;
    for q in 0..m {
        let row = w.row(q);
        let mut worst: f64 = 0.0;
        let mut shift_ok = true;
        for (k, &ci) in idx.iter().enumerate() {
            let lhs = candidates.value(ci, q);
            let rhs = positive_part(contraction * z_prev.as_slice()[q] + row[k]);
            let excess = lhs - rhs;
            if excess > INEQ_TOL {
                shift_ok = false;
            }
            worst = worst.max(excess);
        }
        let sum: f64 = row.iter().sum();
        let sq: f64 = row.iter().map(|d| d * d).sum();
        let range = row.iter().fold(0.0_f64, |a, d| a.max(d.abs()));
        worst = worst.max(sum).max(sq - params.sigma_sq()).max(range - 1.0);
        let r = RowReport {
            shift_ok,
            first_moment_ok: sum <= INEQ_TOL,
            second_moment_ok: sq <= params.sigma_sq() + INEQ_TOL,
            range_ok: range <= 1.0 + INEQ_TOL,
            worst_violation: worst.max(0.0),
        };
        worst_all = worst_all.max(r.worst_violation);
        rows.push(r);
    }
    Ok(WitnessReport {
        rows,
        worst_violation: worst_all,
    })
}

/// A fairness instantiation driven round by round.
pub trait DeficitModel {
    type Input;

    fn params(&self) -> &PotentialParams;

    /// Current profile `z^t`.
    fn profile(&self) -> DeficitProfile;

    fn candidates(&self, input: &Self::Input) -> Result<CandidateSet>;

    fn witness(&self, input: &Self::Input) -> Result<MomentWitness>;

    fn apply(&mut self, input: &Self::Input, action: ActionId) -> Result<()>;

    /// Factor multiplying `z^t` in the shift condition.
    fn contraction(&self) -> f64 {
        1.0
    }
}

/// Runs one round of the p-potential rule and returns the chosen action.
pub fn potential_step<M: DeficitModel>(model: &mut M, input: &M::Input) -> Result<ActionId> {
    let set = model.candidates(input)?;
    let action = choose_action(&set, model.params())?;
    model.apply(input, action)?;
    Ok(action)
}
