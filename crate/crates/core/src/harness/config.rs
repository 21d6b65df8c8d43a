use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::baselines::{StreamKind, StreamSpec};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Instantiation {
    Propx,
    Efx,
    Efc,
    Pdm,
    Discounted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Potential,
    RoundRobin,
    UtilGreedy,
    DeficitGreedy,
    Benade2,
    ExpExact,
}

impl PolicyKind {
    pub fn parse(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string()))
            .map_err(|_| Error::ConfigInvalid(format!("unknown policy {s:?}")))
    }
}

/// One simulation run. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub instantiation: Instantiation,
    pub policy: PolicyKind,
    pub stream: StreamKind,
    pub n: usize,
    pub length: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    /// Outcomes per round (public decisions only); defaults to `n`.
    #[serde(default)]
    pub candidates: Option<usize>,
    /// Threshold values for the count-based envy instantiation.
    #[serde(default)]
    pub theta: Option<Vec<f64>>,
    #[serde(default)]
    pub gamma: Option<f64>,
    /// Sliding window length, tracked alongside discounted runs.
    #[serde(default)]
    pub window: Option<usize>,
    /// Overrides the default potential exponent.
    #[serde(default)]
    pub p: Option<f64>,
    /// Threshold for the disappointed count and the exact policy's slack.
    #[serde(default)]
    pub c: Option<f64>,
    /// Retained top-k lists (efc) or AUX search depth (exp_exact).
    #[serde(default)]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn stream_spec(&self) -> StreamSpec {
        StreamSpec {
            kind: self.stream.clone(),
            n: self.n,
            length: self.length,
            seed: self.seed,
        }
    }

    pub fn outcomes(&self) -> usize {
        self.candidates.unwrap_or(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::ConfigInvalid(msg.to_string()));
        if self.n < 2 {
            return bad("n must be at least 2");
        }
        if self.stream.is_random() && self.seed.is_none() {
            return bad("random streams need a seed");
        }
        if let Some(p) = self.p {
            if !(p >= 1.0) {
                return bad("p must be at least 1");
            }
        }
        if let Some(c) = self.c {
            if !(c > 0.0 && c.is_finite()) {
                return bad("c must be positive");
            }
        }
        if self.window == Some(0) {
            return bad("window must be positive");
        }
        if self.k_max == Some(0) {
            return bad("k_max must be positive");
        }
        match self.instantiation {
            Instantiation::Efc => match &self.theta {
                Some(t) if !t.is_empty() => {}
                _ => return bad("efc needs a nonempty theta"),
            },
            Instantiation::Discounted => match self.gamma {
                Some(g) if g > 0.0 && g < 1.0 => {}
                _ => return bad("discounted needs gamma in (0, 1)"),
            },
            Instantiation::Pdm => {
                if self.policy != PolicyKind::Potential {
                    return bad("public decisions only support the potential policy");
                }
                if self.outcomes() == 0 {
                    return bad("candidates must be positive");
                }
            }
            _ => {}
        }
        if self.theta.is_some() && self.instantiation != Instantiation::Efc {
            return bad("theta only applies to efc");
        }
        if self.gamma.is_some() && self.instantiation != Instantiation::Discounted {
            return bad("gamma only applies to discounted");
        }
        if self.window.is_some() && self.instantiation != Instantiation::Discounted {
            return bad("window only applies to discounted");
        }
        if self.candidates.is_some() && self.instantiation != Instantiation::Pdm {
            return bad("candidates only applies to pdm");
        }
        if matches!(self.policy, PolicyKind::Benade2 | PolicyKind::ExpExact) && self.n != 2 {
            return bad("benade2 and exp_exact need n = 2");
        }
        Ok(())
    }
}
