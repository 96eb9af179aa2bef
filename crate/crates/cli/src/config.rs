use std::fs;
use std::path::{Path, PathBuf};

use followback::follow::LogisticCoefficients;
use followback::graph::{load_graph, GraphFormat, LoadReport};
use followback::ip::Order;
use followback::{Error, Result, SocialGraph, VertexId};
use serde::{Deserialize, Serialize};

pub const OUT_DIR_ENV: &str = "FOLLOWBACK_OUT_DIR";
pub const DEFAULT_REPLICATIONS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BudgetSpec {
    One(usize),
    Sweep(Vec<usize>),
}

/// Experiment file. Relative paths are resolved against the file's directory.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: Option<PathBuf>,
    /// Metadata sidecar for CSV edge lists.
    pub metadata: Option<PathBuf>,
    /// Logistic coefficients JSON; the published values when absent.
    pub model: Option<PathBuf>,
    pub targets: Option<Vec<VertexId>>,
    pub order: Option<u8>,
    pub budget: Option<BudgetSpec>,
    pub replications: Option<usize>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("{}: {e}", path.display()),
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.graph, &mut cfg.metadata, &mut cfg.model, &mut cfg.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Fields set in `other` replace those here.
    pub fn overlay(mut self, other: ExperimentConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(graph, metadata, model, targets, order, budget, replications, seed, output_dir);
        self
    }
}

#[derive(Clone, Debug)]
pub struct Experiment {
    pub graph_path: PathBuf,
    pub metadata: Option<PathBuf>,
    pub coeffs: LogisticCoefficients<f64>,
    pub targets: Option<Vec<VertexId>>,
    pub order: Order,
    /// Empty when no budget was given.
    pub budgets: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

impl Experiment {
    pub fn resolve(cfg: ExperimentConfig) -> Result<Self> {
        let graph_path = cfg
            .graph
            .ok_or_else(|| Error::Missing("graph path (--graph or \"graph\" in the config)".into()))?;
        for p in [Some(&graph_path), cfg.metadata.as_ref(), cfg.model.as_ref()].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::Io(std::io::Error::new(
                    std::io::ErrorKind::NotFound,
                    format!("{} does not exist", p.display()),
                )));
            }
        }
        let coeffs = match &cfg.model {
            None => LogisticCoefficients::default(),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                let c: LogisticCoefficients<f64> =
                    serde_json::from_str(&text).map_err(|e| Error::Parse {
                        line: e.line(),
                        message: format!("{}: {e}", p.display()),
                    })?;
                c.validate()?;
                c
            }
        };
        let order = Order::try_from(cfg.order.unwrap_or(1))?;
        let budgets = match cfg.budget {
            None => Vec::new(),
            Some(BudgetSpec::One(m)) => vec![m],
            Some(BudgetSpec::Sweep(v)) => {
                if v.is_empty() {
                    return Err(Error::InvalidParameter("budget sweep is empty".into()));
                }
                if v.len() > 1 && (v[0] == 0 || v.windows(2).any(|w| w[0] >= w[1])) {
                    return Err(Error::InvalidParameter(format!(
                        "budget sweep {v:?} must be strictly increasing positive integers"
                    )));
                }
                v
            }
        };
        let replications = cfg.replications.unwrap_or(DEFAULT_REPLICATIONS);
        if replications == 0 {
            return Err(Error::InvalidParameter("replications must be at least 1".into()));
        }
        let out_dir = cfg
            .output_dir
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok(Experiment {
            graph_path,
            metadata: cfg.metadata,
            coeffs,
            targets: cfg.targets,
            order,
            budgets,
            replications,
            seed: cfg.seed.unwrap_or(0),
            out_dir,
        })
    }

    pub fn load_graph(&self) -> Result<(SocialGraph, LoadReport)> {
        let (graph, report) = read_graph(&self.graph_path, self.metadata.clone())?;
        match &self.targets {
            None => Ok((graph, report)),
            Some(t) => Ok((graph.with_targets(t)?, report)),
        }
    }
}

pub fn read_graph(path: &Path, metadata: Option<PathBuf>) -> Result<(SocialGraph, LoadReport)> {
    let format = match GraphFormat::from_path(path) {
        GraphFormat::CsvEdgeList { .. } => GraphFormat::CsvEdgeList { metadata },
        other => other,
    };
    load_graph(path, &format)
}
