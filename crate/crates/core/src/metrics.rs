//! Inequality measures of a deficit profile.

use crate::framework::{DeficitProfile, PotentialParams};

/// Sum over ordered pairs of `|z_q - z_q'|`, from the sorted profile.
fn pairwise_abs_sum(z: &[f64]) -> f64 {
    let mut s = z.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, v)| (2.0 * (k as f64 + 1.0) - m - 1.0) * v)
        .sum::<f64>()
        * 2.0
}

/// `(1 / (2 m T)) sum |z_q - z_q'|`; zero for an all-zero profile.
pub fn gini(z: &DeficitProfile) -> f64 {
    let total: f64 = z.as_slice().iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    pairwise_abs_sum(z.as_slice()) / (2.0 * z.len() as f64 * total)
}

/// Gini mean difference `(1 / m^2) sum |z_q - z_q'|`.
pub fn gmd(z: &DeficitProfile) -> f64 {
    if z.is_empty() {
        return 0.0;
    }
    let m = z.len() as f64;
    pairwise_abs_sum(z.as_slice()) / (m * m)
}

/// `2 m^{-1/(2p)} sqrt(Psi)`.
pub fn gmd_bound(psi: f64, params: &PotentialParams) -> f64 {
    2.0 * (-(params.m() as f64).ln() / (2.0 * params.p())).exp() * psi.sqrt()
}
