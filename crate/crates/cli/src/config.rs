use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub seed: u64,
    pub paths: Paths,
    pub simulate: Simulate,
    pub bn: Bn,
    pub hmm: Hmm,
    pub describe: Describe,
    pub sweep: Sweep,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub out_dir: PathBuf,
    pub dataset_dir: PathBuf,
    pub bn_model: PathBuf,
    pub hmm_model: PathBuf,
    pub grammar: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Simulate {
    pub trials: usize,
    pub trajectories_per_action: usize,
    pub probes_per_action: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bn {
    pub alpha: f64,
    pub max_parents: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Hmm {
    pub states: usize,
    pub mixtures: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Describe {
    pub candidates: usize,
    pub keep: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub grid: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            seed: 42,
            paths: Paths::default(),
            simulate: Simulate::default(),
            bn: Bn::default(),
            hmm: Hmm::default(),
            describe: Describe::default(),
            sweep: Sweep::default(),
        }
    }
}

impl Default for Paths {
    fn default() -> Self {
        Paths {
            out_dir: "out".into(),
            dataset_dir: "dataset".into(),
            bn_model: "models/network.bn".into(),
            hmm_model: "models/gestures.bank".into(),
            grammar: PathBuf::new(),
        }
    }
}

impl Default for Simulate {
    fn default() -> Self {
        Simulate { trials: 10_000, trajectories_per_action: 50, probes_per_action: 100 }
    }
}

impl Default for Bn {
    fn default() -> Self {
        Bn { alpha: 1.0, max_parents: 3 }
    }
}

impl Default for Hmm {
    fn default() -> Self {
        Hmm { states: 4, mixtures: 2, max_iterations: 100, tolerance: 1e-6 }
    }
}

impl Default for Describe {
    fn default() -> Self {
        Describe { candidates: 10_000, keep: 10 }
    }
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { grid: 100 }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).context("malformed config file")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            bail!("unsupported config version {} (expected {CONFIG_VERSION})", self.version);
        }
        if !(self.bn.alpha > 0.0) {
            bail!("bn.alpha must be positive");
        }
        if self.hmm.states == 0 || self.hmm.mixtures == 0 {
            bail!("hmm.states and hmm.mixtures must be at least 1");
        }
        if self.describe.keep == 0 || self.describe.candidates < self.describe.keep {
            bail!("describe needs candidates >= keep >= 1");
        }
        if self.sweep.grid < 2 {
            bail!("sweep.grid must be at least 2");
        }
        if self.simulate.trials == 0 || self.simulate.trajectories_per_action == 0 {
            bail!("simulate.trials and simulate.trajectories_per_action must be positive");
        }
        Ok(())
    }

    fn under_out(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.paths.out_dir.join(p)
        }
    }

    pub fn dataset_dir(&self) -> PathBuf {
        self.under_out(&self.paths.dataset_dir)
    }

    pub fn bn_model(&self) -> PathBuf {
        self.under_out(&self.paths.bn_model)
    }

    pub fn hmm_model(&self) -> PathBuf {
        self.under_out(&self.paths.hmm_model)
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.paths.out_dir.join(name)
    }
}
