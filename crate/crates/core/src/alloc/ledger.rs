use super::{check_agent, check_dim, Item};
use crate::error::Result;
use crate::framework::positive_part;

/// Full cross-value matrix `v_i(P_j)` and totals `v_i(G)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItemLedger {
    n: usize,
    cross: Vec<f64>,
    total: Vec<f64>,
    rounds: usize,
}

impl ItemLedger {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cross: vec![0.0; n * n],
            total: vec![0.0; n],
            rounds: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn apply(&mut self, item: &Item, recipient: usize) -> Result<()> {
        check_dim(self.n, item)?;
        check_agent(self.n, recipient)?;
        for i in 0..self.n {
            let x = item.value(i);
            self.cross[i * self.n + recipient] += x;
            self.total[i] += x;
        }
        self.rounds += 1;
        Ok(())
    }

    /// `v_i(P_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.cross[i * self.n + j]
    }

    pub fn utility(&self, i: usize) -> f64 {
        self.value(i, i)
    }

    pub fn total(&self, i: usize) -> f64 {
        self.total[i]
    }

    /// `Prop_i - v_i(P_i)`.
    pub fn deficit(&self, i: usize) -> f64 {
        self.total[i] / self.n as f64 - self.utility(i)
    }

    pub fn max_deficit(&self) -> f64 {
        (0..self.n)
            .map(|i| self.deficit(i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `v_i(P_j) - v_i(P_i)`.
    pub fn envy(&self, i: usize, j: usize) -> f64 {
        self.value(i, j) - self.utility(i)
    }

    pub fn max_envy(&self) -> f64 {
        let mut best: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    best = best.max(positive_part(self.envy(i, j)));
                }
            }
        }
        best
    }
}
