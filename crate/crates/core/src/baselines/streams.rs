use serde::{Deserialize, Serialize};

use super::StreamRng;
use crate::alloc::Item;
use crate::error::{Error, Result};
use crate::pdm::PdmRound;

/// Stream families. Random families draw one value per agent per round, in
/// agent order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StreamKind {
    /// Odd rounds worth 1 to everyone, even rounds worth `eps`.
    RoundRobinAlt {
        eps: f64,
    },
    /// `(1, ..., 1)` first, then `(1, eps, ..., eps)`.
    GreedyEps {
        eps: f64,
    },
    /// Two agents: `(1,1)`, `(1,eps)`, then `(1,eps)` on odd and `(eps,1)` on even rounds.
    Table1 {
        eps: f64,
    },
    /// Two agents: `(1, rho)` up to round `floor(sqrt(horizon))`, zeros after.
    BenadeLinear {
        horizon: u64,
        #[serde(default = "default_rho")]
        rho: f64,
    },
    UniformRandom {
        #[serde(default = "one")]
        scale: f64,
    },
    Bernoulli {
        prob: f64,
        #[serde(default = "one")]
        value: f64,
    },
    Constant {
        value: f64,
    },
    /// Every agent values round `t` at `values[t mod len]`.
    Cycle {
        values: Vec<f64>,
    },
    /// Values drawn uniformly from a finite list.
    Ledger {
        values: Vec<f64>,
    },
    /// Heavy-tailed values `u^(-1/alpha) - 1`.
    Pareto {
        alpha: f64,
    },
}

fn default_rho() -> f64 {
    0.1
}

fn one() -> f64 {
    1.0
}

impl StreamKind {
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            StreamKind::UniformRandom { .. }
                | StreamKind::Bernoulli { .. }
                | StreamKind::Ledger { .. }
                | StreamKind::Pareto { .. }
        )
    }

    fn validate(&self, n: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        match self {
            StreamKind::RoundRobinAlt { eps } | StreamKind::GreedyEps { eps } if !nonneg(*eps) => {
                bad(format!("eps {eps}"))
            }
            StreamKind::Table1 { eps } if !nonneg(*eps) => bad(format!("eps {eps}")),
            StreamKind::Table1 { .. } | StreamKind::BenadeLinear { .. } if n != 2 => {
                bad(format!("stream needs n = 2, got {n}"))
            }
            StreamKind::BenadeLinear { rho, .. } if !nonneg(*rho) => bad(format!("rho {rho}")),
            StreamKind::UniformRandom { scale } if !nonneg(*scale) => bad(format!("scale {scale}")),
            StreamKind::Bernoulli { prob, value }
                if !(0.0..=1.0).contains(prob) || !nonneg(*value) =>
            {
                bad(format!("bernoulli prob {prob} value {value}"))
            }
            StreamKind::Constant { value } if !nonneg(*value) => bad(format!("value {value}")),
            StreamKind::Cycle { values } | StreamKind::Ledger { values }
                if values.is_empty() || !values.iter().all(|v| nonneg(*v)) =>
            {
                bad(format!("value list {values:?}"))
            }
            StreamKind::Pareto { alpha } if !(alpha.is_finite() && *alpha > 0.0) => {
                bad(format!("alpha {alpha}"))
            }
            _ => Ok(()),
        }
    }
}

/// A stream family together with its dimensions and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamSpec {
    pub kind: StreamKind,
    pub n: usize,
    pub length: usize,
    pub seed: Option<u64>,
}

impl StreamSpec {
    fn rng(&self) -> Result<Option<StreamRng>> {
        self.kind.validate(self.n)?;
        if self.n == 0 {
            return Err(Error::ConfigInvalid("n must be positive".into()));
        }
        match (self.kind.is_random(), self.seed) {
            (true, None) => Err(Error::ConfigInvalid("random streams need a seed".into())),
            (true, Some(s)) => Ok(Some(StreamRng::new(s))),
            (false, _) => Ok(None),
        }
    }
}

fn draw(kind: &StreamKind, rng: &mut StreamRng) -> f64 {
    match kind {
        StreamKind::UniformRandom { scale } => scale * rng.uniform(),
        StreamKind::Bernoulli { prob, value } => {
            if rng.uniform() < *prob {
                *value
            } else {
                0.0
            }
        }
        StreamKind::Ledger { values } => {
            let k = ((rng.uniform() * values.len() as f64) as usize).min(values.len() - 1);
            values[k]
        }
        StreamKind::Pareto { alpha } => (1.0 - rng.uniform()).powf(-1.0 / alpha) - 1.0,
        _ => unreachable!("deterministic stream"),
    }
}

fn deterministic(kind: &StreamKind, n: usize, t: usize) -> Vec<f64> {
    // `t` is 1-based
    match kind {
        StreamKind::RoundRobinAlt { eps } => vec![if t % 2 == 1 { 1.0 } else { *eps }; n],
        StreamKind::GreedyEps { eps } => {
            if t == 1 {
                vec![1.0; n]
            } else {
                let mut v = vec![*eps; n];
                v[0] = 1.0;
                v
            }
        }
        StreamKind::Table1 { eps } => match t {
            1 => vec![1.0, 1.0],
            _ if t % 2 == 1 || t == 2 => vec![1.0, *eps],
            _ => vec![*eps, 1.0],
        },
        StreamKind::BenadeLinear { horizon, rho } => {
            let cut = (*horizon as f64).sqrt().floor() as usize;
            if t <= cut {
                vec![1.0, *rho]
            } else {
                vec![0.0, 0.0]
            }
        }
        StreamKind::Constant { value } => vec![*value; n],
        StreamKind::Cycle { values } => vec![values[(t - 1) % values.len()]; n],
        _ => unreachable!("random stream"),
    }
}

/// Deterministic given the spec.
pub fn stream_generate(spec: &StreamSpec) -> Result<Vec<Item>> {
    let mut rng = spec.rng()?;
    (1..=spec.length)
        .map(|t| {
            let values = match rng.as_mut() {
                Some(r) => (0..spec.n).map(|_| draw(&spec.kind, r)).collect(),
                None => deterministic(&spec.kind, spec.n, t),
            };
            Item::new(values)
        })
        .collect()
}

/// Public-decision rounds over `outcomes` candidates. Random families draw
/// `v_i(o)` agent by agent, outcome by outcome; deterministic families use
/// the item embedding and need `outcomes = n`.
pub fn pdm_stream_generate(spec: &StreamSpec, outcomes: usize) -> Result<Vec<PdmRound>> {
    if spec.kind.is_random() {
        let mut rng = spec.rng()?.expect("random stream has a generator");
        (0..spec.length)
            .map(|_| {
                let values = (0..spec.n * outcomes)
                    .map(|_| draw(&spec.kind, &mut rng))
                    .collect();
                PdmRound::new(spec.n, outcomes, values)
            })
            .collect()
    } else {
        if outcomes != spec.n {
            return Err(Error::ConfigInvalid(format!(
                "deterministic streams embed as {} outcomes, got {outcomes}",
                spec.n
            )));
        }
        Ok(stream_generate(spec)?
            .iter()
            .map(PdmRound::from_item)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: StreamKind, n: usize, length: usize) -> StreamSpec {
        StreamSpec {
            kind,
            n,
            length,
            seed: None,
        }
    }

    fn values(items: &[Item]) -> Vec<Vec<f64>> {
        items.iter().map(|i| i.values().to_vec()).collect()
    }

    #[test]
    fn table1_rows() {
        let s = stream_generate(&spec(StreamKind::Table1 { eps: 0.01 }, 2, 6)).unwrap();
        assert_eq!(
            values(&s),
            vec![
                vec![1.0, 1.0],
                vec![1.0, 0.01],
                vec![1.0, 0.01],
                vec![0.01, 1.0],
                vec![1.0, 0.01],
                vec![0.01, 1.0]
            ]
        );
    }

    #[test]
    fn alternating_and_cycle() {
        let s = stream_generate(&spec(StreamKind::RoundRobinAlt { eps: 0.25 }, 3, 4)).unwrap();
        assert_eq!(values(&s)[0], vec![1.0; 3]);
        assert_eq!(values(&s)[1], vec![0.25; 3]);
        assert_eq!(values(&s)[2], vec![1.0; 3]);
        let w = stream_generate(&spec(
            StreamKind::Cycle {
                values: vec![1.0, 0.3, 0.3],
            },
            2,
            7,
        ))
        .unwrap();
        let v: Vec<f64> = w.iter().map(|i| i.value(1)).collect();
        assert_eq!(v, vec![1.0, 0.3, 0.3, 1.0, 0.3, 0.3, 1.0]);
    }

    #[test]
    fn benade_stream() {
        let s = stream_generate(&spec(
            StreamKind::BenadeLinear {
                horizon: 400,
                rho: 0.1,
            },
            2,
            22,
        ))
        .unwrap();
        assert_eq!(s[19].values(), &[1.0, 0.1]);
        assert_eq!(s[20].values(), &[0.0, 0.0]);
    }

    #[test]
    fn random_streams_are_seeded() {
        let mut sp = spec(StreamKind::UniformRandom { scale: 1.0 }, 3, 50);
        assert!(matches!(stream_generate(&sp), Err(Error::ConfigInvalid(_))));
        sp.seed = Some(7);
        let a = stream_generate(&sp).unwrap();
        assert_eq!(a, stream_generate(&sp).unwrap());
        let mut rng = StreamRng::new(7);
        assert_eq!(a[0].value(0), rng.uniform());
        assert_eq!(a[0].value(1), rng.uniform());
        sp.seed = Some(8);
        assert_ne!(a, stream_generate(&sp).unwrap());
    }

    #[test]
    fn ledger_draws_stay_in_ledger() {
        let sp = StreamSpec {
            kind: StreamKind::Ledger {
                values: vec![0.0, 0.5, 1.0],
            },
            n: 4,
            length: 200,
            seed: Some(1),
        };
        for it in stream_generate(&sp).unwrap() {
            assert!(it.values().iter().all(|v| [0.0, 0.5, 1.0].contains(v)));
        }
    }

    #[test]
    fn kind_json() {
        let k: StreamKind = serde_json::from_str(r#"{"kind":"table1","eps":0.01}"#).unwrap();
        assert_eq!(k, StreamKind::Table1 { eps: 0.01 });
        let k: StreamKind = serde_json::from_str(r#"{"kind":"uniform_random"}"#).unwrap();
        assert_eq!(k, StreamKind::UniformRandom { scale: 1.0 });
        assert!(
            serde_json::from_str::<StreamKind>(r#"{"kind":"table1","eps":0.01,"x":1}"#).is_err()
        );
        assert!(serde_json::from_str::<StreamKind>(r#"{"kind":"nope"}"#).is_err());
    }

    #[test]
    fn pdm_embedding_and_random() {
        let sp = spec(StreamKind::Table1 { eps: 0.5 }, 2, 3);
        let r = pdm_stream_generate(&sp, 2).unwrap();
        assert_eq!(r[1].value(1, 1), 0.5);
        assert_eq!(r[1].value(1, 0), 0.0);
        assert!(pdm_stream_generate(&sp, 3).is_err());
        let sp = StreamSpec {
            kind: StreamKind::UniformRandom { scale: 1.0 },
            n: 3,
            length: 5,
            seed: Some(3),
        };
        let r = pdm_stream_generate(&sp, 4).unwrap();
        let mut rng = StreamRng::new(3);
        assert_eq!(r[0].value(0, 0), rng.uniform());
        assert_eq!(r[0].value(0, 1), rng.uniform());
    }
}
