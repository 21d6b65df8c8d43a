//! Online item allocation: proportionality up to the largest missed item,
//! max-normalized envy, and threshold-count envy.

mod efc;
mod efx;
mod item;
mod ledger;
mod propx;

pub use efc::{check_efk, efc_candidates, efc_witness, EfcThresholdState, DEFAULT_K_MAX};
pub use efx::{efx_candidates, efx_witness, EfxState};
pub use item::Item;
pub use ledger::ItemLedger;
pub(crate) use propx::proportional_witness;
pub use propx::{bprop_check, propx_candidates, propx_witness, PropxState};

use crate::error::{Error, Result};

pub(crate) fn check_dim(expected: usize, item: &Item) -> Result<()> {
    if item.n() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: item.n(),
        });
    }
    Ok(())
}

pub(crate) fn check_agent(n: usize, agent: usize) -> Result<()> {
    if agent >= n {
        return Err(Error::InvalidValue(format!(
            "agent {agent} out of range for n = {n}"
        )));
    }
    Ok(())
}

/// Dense index of the ordered pair `(i, j)`, `i != j`.
#[inline]
pub(crate) fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j);
    i * (n - 1) + if j < i { j } else { j - 1 }
}

#[inline]
pub(crate) fn pair_of(n: usize, q: usize) -> (usize, usize) {
    let i = q / (n - 1);
    let r = q % (n - 1);
    (i, if r < i { r } else { r + 1 })
}
