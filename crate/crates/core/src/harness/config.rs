//! Experiment configuration files (TOML).
//!
//! ```toml
//! policies = ["tp-ucb-fr-g", "ucb1-delayed"]
//! seeds = { count = 5, base = 100 }   # or seeds = [1, 2, 3]
//!
//! [instance]
//! horizon = 10000
//! tau_max = 20
//! alpha = 4
//!
//! [[instance.arms]]
//! mu = 0.5
//! r_max = 1.0
//! generator = "scaled_bernoulli"      # or "proportional_spread"
//!
//! [pmf]
//! kind = "beta_binomial"              # "uniform" | "weights" (values = [...])
//! a = 1.0
//! b = 5.0
//!
//! [output]
//! format = "csv"
//! path = "results.csv"
//! stride = 10
//! ```
//!
//! Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::env::{ArmSpec, GeneratorKind, InstanceConfig};
use crate::policy::PolicyKind;
use crate::spread::SpreadPmf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub policies: Vec<String>,
    pub seeds: SeedSpec,
    pub instance: InstanceSection,
    pub pmf: PmfSpec,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range(SeedRange),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRange {
    pub count: usize,
    #[serde(default)]
    pub base: u64,
}

impl SeedSpec {
    pub fn expand(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range(r) => (0..r.count as u64).map(|i| r.base + i).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSection {
    pub horizon: usize,
    pub tau_max: usize,
    pub alpha: usize,
    pub arms: Vec<ArmSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmSection {
    pub mu: f64,
    pub r_max: f64,
    #[serde(default)]
    pub generator: GeneratorKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PmfSpec {
    Uniform,
    BetaBinomial { a: f64, b: f64 },
    Weights { values: Vec<f64> },
}

impl PmfSpec {
    pub fn build(&self, alpha: usize) -> crate::Result<SpreadPmf<f64>> {
        match self {
            PmfSpec::Uniform => SpreadPmf::uniform(alpha),
            PmfSpec::BetaBinomial { a, b } => SpreadPmf::beta_binomial(alpha, *a, *b),
            PmfSpec::Weights { values } => SpreadPmf::from_weights(values.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub format: Option<OutputFormat>,
    pub path: Option<PathBuf>,
    pub stride: Option<usize>,
}

/// A validated configuration, ready to run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub instance: InstanceConfig<f64>,
    pub pmf: SpreadPmf<f64>,
    pub policies: Vec<PolicyKind>,
    pub seeds: Vec<u64>,
    pub stride: usize,
    pub format: OutputFormat,
    pub path: Option<PathBuf>,
    pub config_hash: String,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config {
            path: e
                .span()
                .map(|s| format!("byte {}..{}", s.start, s.end))
                .unwrap_or_else(|| "<document>".into()),
            reason: e.message().to_string(),
        })
    }

    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    /// Stable digest of everything that determines the traces. Output
    /// location and format are excluded.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Hashed<'a> {
            policies: &'a [String],
            seeds: Vec<u64>,
            instance: &'a InstanceSection,
            pmf: &'a PmfSpec,
            stride: usize,
        }
        let hashed = Hashed {
            policies: &self.policies,
            seeds: self.seeds.expand(),
            instance: &self.instance,
            pmf: &self.pmf,
            stride: self.stride(),
        };
        let bytes = serde_json::to_vec(&hashed).expect("config serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }

    /// Recording stride: configured value, else 1 up to 10^4 rounds and 100 beyond.
    pub fn stride(&self) -> usize {
        self.output.stride.unwrap_or(if self.instance.horizon <= 10_000 {
            1
        } else {
            100
        })
    }

    pub fn validate(&self) -> Result<Experiment, HarnessError> {
        let cfg_err = |path: &str, reason: String| HarnessError::Config {
            path: path.to_string(),
            reason,
        };
        let inst = &self.instance;
        let k = inst.arms.len();
        if k < 2 {
            return Err(cfg_err("instance.arms", format!("need at least 2 arms, got {k}")));
        }
        if inst.horizon < k {
            return Err(cfg_err(
                "instance.horizon",
                format!("horizon {} is shorter than the number of arms {k}", inst.horizon),
            ));
        }
        if inst.tau_max == 0 {
            return Err(cfg_err("instance.tau_max", "must be at least 1".into()));
        }
        if inst.alpha == 0 || inst.alpha > inst.tau_max || !inst.tau_max.is_multiple_of(inst.alpha) {
            return Err(cfg_err(
                "instance.alpha",
                format!("alpha = {} must divide tau_max = {}", inst.alpha, inst.tau_max),
            ));
        }
        let arms = inst
            .arms
            .iter()
            .enumerate()
            .map(|(i, a)| {
                ArmSpec::new(a.mu, a.r_max, a.generator).map_err(|e| {
                    let field = match &e {
                        crate::Error::InvalidParameter { name, .. } => *name,
                        _ => "mu",
                    };
                    cfg_err(&format!("instance.arms[{i}].{field}"), e.to_string())
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let instance = InstanceConfig::new(arms, inst.horizon, inst.tau_max, inst.alpha)
            .map_err(|e| cfg_err("instance", e.to_string()))?;

        let pmf = self
            .pmf
            .build(inst.alpha)
            .map_err(|e| cfg_err("pmf", e.to_string()))?;
        if pmf.alpha() != inst.alpha {
            return Err(cfg_err(
                "pmf.values",
                format!("{} weights given but alpha = {}", pmf.alpha(), inst.alpha),
            ));
        }

        if self.policies.is_empty() {
            return Err(cfg_err("policies", "need at least one policy".into()));
        }
        let policies = self
            .policies
            .iter()
            .enumerate()
            .map(|(i, name)| {
                PolicyKind::from_name(name).ok_or_else(|| {
                    cfg_err(&format!("policies[{i}]"), format!("unknown policy `{name}`"))
                })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let seeds = self.seeds.expand();
        if seeds.is_empty() {
            return Err(cfg_err("seeds", "need at least one seed".into()));
        }
        let stride = self.stride();
        if stride == 0 {
            return Err(cfg_err("output.stride", "must be at least 1".into()));
        }
        Ok(Experiment {
            instance,
            pmf,
            policies,
            seeds,
            stride,
            format: self.output.format.unwrap_or_default(),
            path: self.output.path.clone(),
            config_hash: self.hash(),
        })
    }
}
