use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One arriving good with a nonnegative value per agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Item {
    values: Vec<f64>,
}

impl Item {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidValue(format!("item value {v}")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, agent: usize) -> f64 {
        self.values[agent]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl TryFrom<Vec<f64>> for Item {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Item::new(v)
    }
}

impl From<Item> for Vec<f64> {
    fn from(item: Item) -> Self {
        item.values
    }
}
