//! Experiment config files.
//!
//! ```toml
//! horizon = 50000
//! runs = 50
//! seed = 1
//! grid = 200                        # optional
//! gammas = [2, 5, 10, 20, "inf"]    # sweep-gamma only
//! policies = [
//!     { kind = "uts", gamma = 2 },
//!     { kind = "osub", gamma = 7 },
//!     { kind = "klucb" },
//! ]
//!
//! [instance]                        # rank-one: u and v
//! u = [0.75, 0.25, 0.25, 0.25]
//! v = [0.75, 0.25, 0.25, 0.25]
//! ```
//!
//! A generic unimodal instance replaces `u`/`v` with
//! `means = [..]` and `graph = { edges = [[0, 1], ..] }`.

use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use super::CliError;
use crate::harness::{ExperimentConfig, DEFAULT_GRID};
use crate::model::{Instance, RankOneInstance, UnimodalGraph, UnimodalInstance};
use crate::policy::{Gamma, PolicySpec};
use crate::stats::Probability;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    instance: RawInstance,
    #[serde(default)]
    policies: Vec<PolicySpec>,
    horizon: Option<u64>,
    runs: Option<usize>,
    #[serde(default)]
    seed: u64,
    grid: Option<usize>,
    gammas: Option<Vec<Gamma>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    u: Option<Vec<Spanned<f64>>>,
    v: Option<Vec<Spanned<f64>>>,
    means: Option<Vec<Spanned<f64>>>,
    graph: Option<RawGraph>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    edges: Vec<[usize; 2]>,
}

/// Instance as written in the file, before the unimodality requirement is
/// enforced (so `check-unimodal` can report violations).
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    RankOne(RankOneInstance),
    Graph { graph: UnimodalGraph, means: Vec<f64> },
}

impl InstanceSource {
    pub fn graph_and_means(&self) -> Result<(UnimodalGraph, Vec<f64>), CliError> {
        Ok(match self {
            InstanceSource::RankOne(r) => (UnimodalGraph::g1(r.rows(), r.cols())?, r.means_matrix()),
            InstanceSource::Graph { graph, means } => (graph.clone(), means.clone()),
        })
    }

    pub fn into_instance(self) -> Result<Instance, CliError> {
        Ok(match self {
            InstanceSource::RankOne(r) => Instance::RankOne(r),
            InstanceSource::Graph { graph, means } => {
                Instance::Graph(UnimodalInstance::new(graph, means)?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub instance: InstanceSource,
    pub policies: Vec<PolicySpec>,
    pub horizon: Option<u64>,
    pub runs: Option<usize>,
    pub seed: u64,
    pub grid: usize,
    pub gammas: Option<Vec<Gamma>>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<usize>,
    pub horizon: Option<u64>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        let instance = parse_instance(raw.instance, text)?;
        Ok(Self {
            instance,
            policies: raw.policies,
            horizon: raw.horizon,
            runs: raw.runs,
            seed: raw.seed,
            grid: raw.grid.unwrap_or(DEFAULT_GRID),
            gammas: raw.gammas,
        })
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.runs.is_some() {
            self.runs = o.runs;
        }
        if o.horizon.is_some() {
            self.horizon = o.horizon;
        }
    }

    /// Experiment over `policies` (the file's list when `None`).
    pub fn experiment(&self, policies: Option<Vec<PolicySpec>>) -> Result<ExperimentConfig, CliError> {
        let horizon = self
            .horizon
            .ok_or_else(|| CliError::Config("missing field `horizon`".into()))?;
        let runs = self
            .runs
            .ok_or_else(|| CliError::Config("missing field `runs`".into()))?;
        let policies = policies.unwrap_or_else(|| self.policies.clone());
        if policies.is_empty() {
            return Err(CliError::Config("no policies configured".into()));
        }
        let mut config = ExperimentConfig::new(self.instance.clone().into_instance()?, policies, horizon, runs)
            .with_seed(self.seed);
        config.grid = self.grid;
        config.validate()?;
        Ok(config)
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn probabilities(field: &str, values: Vec<Spanned<f64>>, text: &str) -> Result<Vec<f64>, CliError> {
    values
        .into_iter()
        .enumerate()
        .map(|(i, s)| {
            let line = line_of(text, s.span().start);
            Probability::checked(format!("instance.{field}[{i}] (line {line})"), *s.get_ref())
                .map(f64::from)
                .map_err(CliError::from)
        })
        .collect()
}

fn parse_instance(raw: RawInstance, text: &str) -> Result<InstanceSource, CliError> {
    match raw {
        RawInstance {
            u: Some(u),
            v: Some(v),
            means: None,
            graph: None,
        } => {
            let u = probabilities("u", u, text)?;
            let v = probabilities("v", v, text)?;
            Ok(InstanceSource::RankOne(RankOneInstance::new(u, v)?))
        }
        RawInstance {
            u: None,
            v: None,
            means: Some(means),
            graph: Some(graph),
        } => {
            let means = probabilities("means", means, text)?;
            let edges: Vec<(usize, usize)> = graph.edges.iter().map(|&[a, b]| (a, b)).collect();
            let graph = UnimodalGraph::new(means.len(), &edges)?;
            Ok(InstanceSource::Graph { graph, means })
        }
        _ => Err(CliError::Config(
            "[instance] needs either `u` and `v`, or `means` and `graph`".into(),
        )),
    }
}
