use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dqn::{AdamConfig, TrainConfig};
use crate::env::{sample_flow_pairs, EnvConfig, SyncEnv};
use crate::rng::{stream_rng, Stream};
use crate::sdncore::FlowPair;
use crate::topology::{DegreeDistribution, Network, WeightDistribution};
use crate::{Error, Result};

/// A full experiment description as read from a TOML file.
///
/// ```toml
/// [scenario]
/// name = "table1-m6"
/// m = 6
/// nodes = [100, 300, 550, 150, 210, 420]
/// rewires = [5, 1, 40, 60, 2, 120]
/// links = [5, 20, 8, 20, 12]
/// budget = 1
/// horizon = 300
/// flow_pairs = 20
/// # degree_file = "my_degrees.txt"   (relative to this file)
///
/// [scenario.weights]
/// values = [1, 2, 5, 8, 10, 12]
/// probabilities = [0.1, 0.1, 0.1, 0.3, 0.2, 0.2]
///
/// [train]
/// gamma = 0.9
/// steps = 50000
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub train: TrainSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub m: usize,
    /// Node count per domain.
    pub nodes: Vec<usize>,
    /// Edge rewires per slot per domain.
    pub rewires: Vec<usize>,
    /// Inter-domain link count per boundary.
    pub links: Vec<usize>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_flow_pairs")]
    pub flow_pairs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "WeightDistribution::evaluation_default")]
    pub weights: WeightDistribution,
    /// Degree distribution file; the bundled distribution when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree_file: Option<PathBuf>,
}

fn default_budget() -> usize {
    1
}
fn default_horizon() -> u64 {
    300
}
fn default_flow_pairs() -> usize {
    20
}

/// Training hyperparameters as they appear in the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub gamma: f64,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub target_period: u64,
    pub replay_capacity: usize,
    pub batch_size: usize,
    pub steps: u64,
    pub prefill: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            gamma: t.gamma,
            step_size: t.adam.step_size,
            beta1: t.adam.beta1,
            beta2: t.adam.beta2,
            epsilon: t.adam.epsilon,
            target_period: t.target_period,
            replay_capacity: t.replay_capacity,
            batch_size: t.batch_size,
            steps: t.total_steps,
            prefill: t.prefill,
        }
    }
}

impl TrainSection {
    pub fn to_train_config(&self) -> TrainConfig {
        TrainConfig {
            gamma: self.gamma,
            adam: AdamConfig {
                step_size: self.step_size,
                beta1: self.beta1,
                beta2: self.beta2,
                epsilon: self.epsilon,
            },
            target_period: self.target_period,
            replay_capacity: self.replay_capacity,
            batch_size: self.batch_size,
            total_steps: self.steps,
            prefill: self.prefill,
        }
    }
}

const TABLE1_M6: ([usize; 6], [usize; 6], [usize; 5]) = (
    [100, 300, 550, 150, 210, 420],
    [5, 1, 40, 60, 2, 120],
    [5, 20, 8, 20, 12],
);
const TABLE1_M10: ([usize; 10], [usize; 10], [usize; 9]) = (
    [100, 300, 550, 150, 210, 420, 380, 520, 120, 340],
    [5, 1, 160, 1, 180, 150, 40, 150, 1, 40],
    [5, 30, 50, 20, 15, 20, 20, 30, 10],
);
const TABLE1_M12: ([usize; 12], [usize; 12], [usize; 11]) = (
    [130, 50, 550, 150, 80, 420, 380, 330, 250, 150, 80, 100],
    [10, 1, 100, 1, 1, 120, 1, 180, 130, 1, 1, 1],
    [12, 30, 25, 5, 15, 10, 20, 5, 8, 15, 20],
);

impl ScenarioConfig {
    /// The full-size evaluation scenarios for `m` in {6, 10, 12}.
    pub fn table1(m: usize) -> Result<Self> {
        let (nodes, rewires, links): (Vec<usize>, Vec<usize>, Vec<usize>) = match m {
            6 => (TABLE1_M6.0.into(), TABLE1_M6.1.into(), TABLE1_M6.2.into()),
            10 => (
                TABLE1_M10.0.into(),
                TABLE1_M10.1.into(),
                TABLE1_M10.2.into(),
            ),
            12 => (
                TABLE1_M12.0.into(),
                TABLE1_M12.1.into(),
                TABLE1_M12.2.into(),
            ),
            _ => {
                return Err(Error::Config(format!(
                    "no built-in scenario for m={m}; choose 6, 10 or 12"
                )))
            }
        };
        Ok(ScenarioConfig {
            name: format!("table1-m{m}"),
            m,
            nodes,
            rewires,
            links,
            budget: 1,
            horizon: 300,
            flow_pairs: 20,
            seed: 0,
            weights: WeightDistribution::evaluation_default(),
            degree_file: None,
        })
    }

    /// Desk-scale variant of [`table1`](Self::table1): node counts divided by
    /// 10 and rounded up, rewire counts divided by 10 and rounded down so the
    /// per-edge rewiring rate stays close to the full-size one. Link counts and
    /// horizon are unchanged.
    pub fn desk(m: usize) -> Result<Self> {
        let mut cfg = Self::table1(m)?;
        for n in &mut cfg.nodes {
            *n = n.div_ceil(10);
        }
        for e in &mut cfg.rewires {
            *e /= 10;
        }
        cfg.name = format!("desk-m{m}");
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m;
        let err = |msg: String| Err(Error::Config(msg));
        if m < 2 {
            return err(format!("m must be >= 2, got {m}"));
        }
        if self.nodes.len() != m || self.rewires.len() != m {
            return err(format!(
                "nodes and rewires need {m} entries, got {} and {}",
                self.nodes.len(),
                self.rewires.len()
            ));
        }
        if self.links.len() != m - 1 {
            return err(format!(
                "links needs {} entries, got {}",
                m - 1,
                self.links.len()
            ));
        }
        if self.nodes.iter().any(|&n| n < 2) {
            return err("every domain needs at least 2 nodes".into());
        }
        if self.links.contains(&0) {
            return err("every boundary needs at least 1 link".into());
        }
        if self.budget == 0 || self.budget > m - 1 {
            return err(format!("budget {} outside 1..={}", self.budget, m - 1));
        }
        if self.horizon == 0 || self.horizon > u32::MAX as u64 {
            return err(format!("horizon {} out of range", self.horizon));
        }
        if self.flow_pairs == 0 {
            return err("flow_pairs must be >= 1".into());
        }
        Ok(())
    }

    pub fn degree_distribution(&self) -> Result<DegreeDistribution> {
        match &self.degree_file {
            None => Ok(DegreeDistribution::bundled()),
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                DegreeDistribution::parse(&text)
            }
        }
    }

    fn env_config(&self, gamma: f64) -> EnvConfig {
        EnvConfig {
            rewires: self.rewires.clone(),
            weights: self.weights.clone(),
            budget: self.budget,
            horizon: self.horizon,
            gamma,
        }
    }

    /// Generates the network and flow pairs for `seed`.
    pub fn build(&self, seed: u64, gamma: f64) -> Result<Scenario> {
        self.validate()?;
        let degrees = self.degree_distribution()?;
        let net = Network::generate(&self.nodes, &self.links, &degrees, &self.weights, seed)?;
        let pairs = sample_flow_pairs(
            &net,
            self.flow_pairs,
            &mut stream_rng(seed, Stream::FlowPairs),
        );
        Ok(Scenario {
            net,
            pairs,
            env: self.env_config(gamma),
            seed,
        })
    }
}

/// A generated network ready to be simulated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub net: Network,
    pub pairs: Vec<FlowPair>,
    pub env: EnvConfig,
    pub seed: u64,
}

impl Scenario {
    /// A fresh environment at slot 0 whose rewiring draws from `self.seed`.
    pub fn into_env(self) -> Result<SyncEnv> {
        SyncEnv::new(self.net, self.pairs, self.env, self.seed)
    }
}

impl ExperimentConfig {
    /// Reads a TOML config. A relative `degree_file` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text)?;
        if let Some(p) = &cfg.scenario.degree_file {
            if p.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                cfg.scenario.degree_file = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.scenario.validate()?;
        cfg.train
            .to_train_config()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn from_scenario(scenario: ScenarioConfig) -> Self {
        ExperimentConfig {
            scenario,
            train: TrainSection::default(),
        }
    }

    /// The scenario instance for `seed`.
    pub fn build(&self, seed: u64) -> Result<Scenario> {
        self.scenario.build(seed, self.train.gamma)
    }

    pub fn make_env(&self, seed: u64) -> Result<SyncEnv> {
        self.build(seed)?.into_env()
    }
}
