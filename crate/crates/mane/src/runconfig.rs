//! Declarative run configuration.
//!
//! A single TOML file specifies the model, domain, sampling plan and optional
//! oracle grid. Unknown keys are rejected, the schema is versioned, and the
//! canonical re-serialization is hashed so every emitted result row can name
//! the exact configuration that produced it.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{ProcessModel, WorkingDomain};
use crate::oracle::GridSpec;
use crate::sampler::Scale;

pub const SCHEMA_VERSION: u32 = 1;

/// Change-of-measure selector for simulation runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Plain Monte Carlo.
    Standard,
    /// Boundary-infimum subsolution family.
    Uc,
    /// Anchored subsolution family.
    Ucyk,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub population: Option<u64>,
    pub batches: usize,
    pub samples_per_batch: usize,
    /// Euler step for diffusions; defaults to `horizon * 1e-3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub model: ProcessModel,
    pub domain: WorkingDomain,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

impl RunConfig {
    pub fn parse_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::config(format!("config parse error: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes")
    }

    /// Short hash of the canonical serialization, carried on every CSV row.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml().as_bytes());
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.domain.validate()?;
        self.model.validate_on(&self.domain)?;
        if let Some(s) = &self.sampling {
            if s.batches < 2 {
                return Err(Error::config("sampling.batches must be at least 2"));
            }
            if s.samples_per_batch == 0 {
                return Err(Error::config("sampling.samples_per_batch must be positive"));
            }
            match self.model {
                ProcessModel::Diffusion(_) => {
                    if s.epsilon.is_none() {
                        return Err(Error::config("diffusion sampling needs epsilon"));
                    }
                    if s.population.is_some() {
                        return Err(Error::config("diffusion sampling takes epsilon, not population"));
                    }
                }
                ProcessModel::BirthDeath(_) => {
                    if s.population.is_none() {
                        return Err(Error::config("birth-death sampling needs population"));
                    }
                    if s.epsilon.is_some() || s.dt.is_some() {
                        return Err(Error::config(
                            "birth-death sampling is event-driven: drop epsilon/dt",
                        ));
                    }
                }
                _ => {
                    return Err(Error::config(format!(
                        "{} models cannot be simulated",
                        self.model.kind_name()
                    )));
                }
            }
        }
        if let Some(g) = &self.grid {
            g.validate()?;
        }
        Ok(())
    }

    /// Scale and step for the sampler, with the `T·10⁻³` default step.
    pub fn scale_and_dt(&self) -> Result<(Scale, Option<f64>)> {
        let s = self
            .sampling
            .as_ref()
            .ok_or_else(|| Error::config("config has no [sampling] section"))?;
        match self.model {
            ProcessModel::Diffusion(_) => Ok((
                Scale::Epsilon(s.epsilon.unwrap()),
                Some(s.dt.unwrap_or(self.domain.horizon * 1e-3)),
            )),
            ProcessModel::BirthDeath(_) => Ok((Scale::Population(s.population.unwrap()), None)),
            _ => Err(Error::config("unsupported model family for sampling")),
        }
    }
}
