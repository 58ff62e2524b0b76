use std::fs;
use std::path::{Path, PathBuf};

use nsamg::probgen::{ProblemSpec, SmootherKind};
use nsamg::vcycle::CoarseningSpec;
use nsamg::OperatorKind;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Largest accepted smoothing step count.
pub const MAX_STEPS: usize = 8;

#[derive(
    Debug,
    Clone,
    Copy,
    PartialEq,
    Eq,
    PartialOrd,
    Ord,
    Hash,
    Serialize,
    Deserialize,
    clap::ValueEnum,
)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Bspace,
    Smoother,
    Twogrid,
    Compare,
    Vcycle,
    Example,
    All,
}

impl Suite {
    pub const EACH: [Suite; 6] = [
        Suite::Bspace,
        Suite::Smoother,
        Suite::Twogrid,
        Suite::Compare,
        Suite::Vcycle,
        Suite::Example,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Bspace => "bspace",
            Suite::Smoother => "smoother",
            Suite::Twogrid => "twogrid",
            Suite::Compare => "compare",
            Suite::Vcycle => "vcycle",
            Suite::Example => "example",
            Suite::All => "all",
        }
    }

    /// Sorted, deduplicated list with `all` expanded.
    pub fn expand(list: &[Suite]) -> Vec<Suite> {
        let mut out: Vec<Suite> = if list.contains(&Suite::All) {
            Suite::EACH.to_vec()
        } else {
            list.to_vec()
        };
        out.sort();
        out.dedup();
        out
    }
}

/// A batch experiment. Every field has a default, so `{}` is a valid config
/// that runs all suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Problem evaluated by the `experiment` checks and used as the top level
    /// of the V-cycle suite.
    #[serde(default)]
    pub problem: Option<ProblemSpec>,
    /// Replaces the problem's smoother on the top level and is used on coarse levels.
    #[serde(default)]
    pub smoother: Option<SmootherKind>,
    #[serde(default)]
    pub coarsening: Option<CoarseningSpec>,
    #[serde(default = "default_kind")]
    pub kind: OperatorKind,
    #[serde(default = "one")]
    pub nu1: usize,
    #[serde(default = "one")]
    pub nu2: usize,
    /// Number of coarse levels in V-cycle hierarchies.
    #[serde(default = "three")]
    pub levels: usize,
    #[serde(default = "all_suites")]
    pub suites: Vec<Suite>,
    /// Random instances per suite.
    #[serde(default = "twenty")]
    pub seeds: usize,
    /// Fixed problem size; drawn per instance when absent.
    #[serde(default)]
    pub n: Option<usize>,
    /// Samples for the randomized sup in the V-cycle suite.
    #[serde(default = "thousand")]
    pub samples: usize,
    /// Base seed mixed into every instance seed.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub csv: Option<PathBuf>,
}

fn default_kind() -> OperatorKind {
    OperatorKind::AdjointPost
}
fn one() -> usize {
    1
}
fn three() -> usize {
    3
}
fn twenty() -> usize {
    20
}
fn thousand() -> usize {
    1000
}
fn all_suites() -> Vec<Suite> {
    vec![Suite::All]
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        if !value.is_object() {
            return Err(CliError::Config("config must be a JSON object".into()));
        }
        let cfg: Self =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.nu1 > MAX_STEPS || self.nu2 > MAX_STEPS {
            return bad(format!("nu1 and nu2 must not exceed {MAX_STEPS}"));
        }
        if self.nu1 + self.nu2 == 0 {
            return bad("at least one smoothing step is required".into());
        }
        if self.levels == 0 {
            return bad("levels must be at least 1".into());
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        if self.samples == 0 {
            return bad("samples must be at least 1".into());
        }
        if self.n.is_some_and(|n| n < 4) {
            return bad("n must be at least 4".into());
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        if self.suites.is_empty() && self.problem.is_none() {
            return bad("nothing to run: no suites and no problem".into());
        }
        if let Some(p) = &self.problem {
            if p.n < 2 {
                return bad("problem.n must be at least 2".into());
            }
        }
        Ok(())
    }

    /// The fields that determine the report contents; output locations and
    /// parallelism are excluded.
    pub fn parameters(&self) -> serde_json::Value {
        let mut c = self.clone();
        c.suites = Suite::expand(&c.suites);
        let mut v = serde_json::to_value(&c).expect("config serializes");
        if let Some(obj) = v.as_object_mut() {
            obj.remove("jobs");
            obj.remove("output");
            obj.remove("csv");
        }
        v
    }
}
