//! Seeded synthetic graphs for experiments and tests.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{SocialGraph, VertexMeta};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// Edges only go forward along a random vertex order.
    RandomDag,
    /// Every ordered pair is an edge independently.
    ErdosRenyiDirected,
    /// Targets, their friends, and friends of those friends.
    TwoHop,
}

/// Distribution of the platform friend/follower counts attached to vertices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CountDistribution {
    Fixed { friends: u64, followers: u64 },
    /// `count + 1` is log-uniform on `[lo + 1, hi + 1]`.
    LogUniform { friends: (u64, u64), followers: (u64, u64) },
}

impl CountDistribution {
    /// Ordinary accounts: hundreds to thousands of friends, modest audiences.
    pub fn ordinary() -> Self {
        CountDistribution::LogUniform {
            friends: (50, 5_000),
            followers: (50, 200_000),
        }
    }

    /// High-profile targets in the range of the published target table.
    pub fn celebrity() -> Self {
        CountDistribution::LogUniform {
            friends: (40, 500),
            followers: (1_000, 65_500_000),
        }
    }

    fn validate(&self) -> Result<()> {
        if let CountDistribution::LogUniform { friends, followers } = self {
            for (lo, hi) in [friends, followers] {
                if lo > hi {
                    return Err(Error::InvalidParameter(format!(
                        "count range [{lo}, {hi}] is empty"
                    )));
                }
            }
        }
        Ok(())
    }

    fn sample<R: Rng>(&self, rng: &mut R, is_target: bool) -> VertexMeta {
        let (friend_count, follower_count) = match *self {
            CountDistribution::Fixed { friends, followers } => (friends, followers),
            CountDistribution::LogUniform { friends, followers } => {
                (log_uniform(rng, friends), log_uniform(rng, followers))
            }
        };
        VertexMeta {
            friend_count,
            follower_count,
            is_target,
        }
    }
}

fn log_uniform<R: Rng>(rng: &mut R, (lo, hi): (u64, u64)) -> u64 {
    if lo == hi {
        return lo;
    }
    let (a, b) = (((lo + 1) as f64).ln(), ((hi + 1) as f64).ln());
    let x = rng.random_range(a..=b).exp() - 1.0;
    (x.round() as u64).clamp(lo, hi)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub kind: SynthKind,
    pub n: usize,
    pub edge_prob: f64,
    pub target_count: usize,
    pub counts: CountDistribution,
    /// Counts for targets; `counts` when absent.
    #[serde(default)]
    pub target_counts: Option<CountDistribution>,
    pub seed: u64,
}

impl SynthConfig {
    pub fn new(kind: SynthKind, n: usize, edge_prob: f64, target_count: usize, seed: u64) -> Self {
        SynthConfig {
            kind,
            n,
            edge_prob,
            target_count,
            counts: CountDistribution::ordinary(),
            target_counts: Some(CountDistribution::celebrity()),
            seed,
        }
    }
}

fn id_width(n: usize) -> usize {
    n.saturating_sub(1).to_string().len()
}

pub fn synth_graph(cfg: &SynthConfig) -> Result<SocialGraph> {
    if cfg.n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.edge_prob) {
        return Err(Error::InvalidParameter(format!(
            "edge probability {} outside [0, 1]",
            cfg.edge_prob
        )));
    }
    if cfg.target_count > cfg.n {
        return Err(Error::InvalidParameter(format!(
            "{} targets requested from {} vertices",
            cfg.target_count, cfg.n
        )));
    }
    cfg.counts.validate()?;
    let target_counts = cfg.target_counts.unwrap_or(cfg.counts);
    target_counts.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (ids, is_target, edges) = match cfg.kind {
        SynthKind::RandomDag | SynthKind::ErdosRenyiDirected => {
            let w = id_width(cfg.n);
            let ids: Vec<String> = (0..cfg.n).map(|i| format!("v{i:0w$}")).collect();
            let mut is_target = vec![false; cfg.n];
            for t in index::sample(&mut rng, cfg.n, cfg.target_count) {
                is_target[t] = true;
            }
            let mut edges = Vec::new();
            if cfg.kind == SynthKind::RandomDag {
                let mut order: Vec<usize> = (0..cfg.n).collect();
                order.shuffle(&mut rng);
                for i in 0..cfg.n {
                    for j in i + 1..cfg.n {
                        if rng.random_bool(cfg.edge_prob) {
                            edges.push((order[i], order[j]));
                        }
                    }
                }
            } else {
                for u in 0..cfg.n {
                    for v in 0..cfg.n {
                        if u != v && rng.random_bool(cfg.edge_prob) {
                            edges.push((u, v));
                        }
                    }
                }
            }
            (ids, is_target, edges)
        }
        SynthKind::TwoHop => two_hop(cfg, &mut rng)?,
    };

    let mut b = SocialGraph::builder();
    for (v, id) in ids.iter().enumerate() {
        let dist = if is_target[v] { &target_counts } else { &cfg.counts };
        b.vertex(id.as_str(), dist.sample(&mut rng, is_target[v]))?;
    }
    for (u, v) in edges {
        b.edge(ids[u].as_str(), ids[v].as_str())?;
    }
    b.build()
}

type Layout = (Vec<String>, Vec<bool>, Vec<(usize, usize)>);

/// Targets `t*`, first-hop friends `f*`, second-hop friends `s*`.
///
/// Every first-hop vertex is a friend of at least one target and every
/// second-hop vertex a friend of at least one first-hop vertex; the remaining
/// target/first-hop, first/first, second/first and target/target pairs are
/// edges with probability `edge_prob` each.
fn two_hop(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<Layout> {
    let t = cfg.target_count;
    if t == 0 {
        return Err(Error::InvalidParameter("two-hop graphs need at least one target".into()));
    }
    let rest = cfg.n - t;
    let h1 = if rest == 0 { 0 } else { rest.div_ceil(2) };
    let h2 = rest - h1;

    let mut ids = Vec::with_capacity(cfg.n);
    ids.extend((0..h1).map(|i| format!("f{i:0w$}", w = id_width(h1))));
    ids.extend((0..h2).map(|i| format!("s{i:0w$}", w = id_width(h2))));
    ids.extend((0..t).map(|i| format!("t{i:0w$}", w = id_width(t))));
    let first: Vec<usize> = (0..h1).collect();
    let second: Vec<usize> = (h1..h1 + h2).collect();
    let targets: Vec<usize> = (h1 + h2..cfg.n).collect();
    let mut is_target = vec![false; cfg.n];
    for &x in &targets {
        is_target[x] = true;
    }

    let p = cfg.edge_prob;
    let mut edges = Vec::new();
    for &f in &first {
        let anchor = targets[rng.random_range(0..t)];
        for &x in &targets {
            if x == anchor || rng.random_bool(p) {
                edges.push((f, x));
            }
        }
    }
    for &s in &second {
        let anchor = first[rng.random_range(0..h1)];
        for &f in &first {
            if f == anchor || rng.random_bool(p) {
                edges.push((s, f));
            }
        }
    }
    for &a in &first {
        for &b in &first {
            if a != b && rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    for &a in &targets {
        for &b in &targets {
            if a != b && rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    Ok((ids, is_target, edges))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::is_acyclic;

    fn cfg(kind: SynthKind, n: usize, p: f64, seed: u64) -> SynthConfig {
        SynthConfig::new(kind, n, p, 1.min(n), seed)
    }

    #[test]
    fn single_vertex() {
        let g = synth_graph(&cfg(SynthKind::RandomDag, 1, 0.5, 3)).unwrap();
        assert_eq!((g.len(), g.edge_count()), (1, 0));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synth_graph(&cfg(SynthKind::RandomDag, 7, 0.5, 11)).unwrap();
        let b = synth_graph(&cfg(SynthKind::RandomDag, 7, 0.5, 11)).unwrap();
        assert_eq!(a.edges(), b.edges());
        assert_eq!(a.ids(), b.ids());
        for v in 0..a.len() {
            assert_eq!(a.meta(v), b.meta(v));
        }
    }

    #[test]
    fn random_dag_is_acyclic() {
        for seed in 0..20 {
            let g = synth_graph(&cfg(SynthKind::RandomDag, 15, 0.4, seed)).unwrap();
            assert!(is_acyclic(g.len(), g.edges()));
        }
    }

    #[test]
    fn erdos_renyi_edge_count_is_binomial() {
        // Edge count ~ Binomial(9900, 0.05): mean 495, sd ~21.7.
        let (trials, p): (f64, f64) = (100.0 * 99.0, 0.05);
        let (mean, sd) = (trials * p, (trials * p * (1.0 - p)).sqrt());
        for seed in 0..10 {
            let g = synth_graph(&cfg(SynthKind::ErdosRenyiDirected, 100, p, seed)).unwrap();
            let e = g.edge_count() as f64;
            assert!((e - mean).abs() < 4.0 * sd, "seed {seed}: {e} edges");
        }
    }

    #[test]
    fn two_hop_structure() {
        let g = synth_graph(&SynthConfig::new(SynthKind::TwoHop, 60, 0.05, 5, 2)).unwrap();
        assert_eq!(g.targets().len(), 5);
        for v in 0..g.len() {
            let id = g.id(v).as_str();
            if id.starts_with('f') {
                assert!(g.children_of(v).iter().any(|&c| g.is_target(c)));
            }
            if id.starts_with('s') {
                assert!(g.children_of(v).iter().any(|&c| g.id(c).as_str().starts_with('f')));
            }
        }
    }

    #[test]
    fn invalid_parameters() {
        assert!(synth_graph(&cfg(SynthKind::RandomDag, 0, 0.5, 1)).is_err());
        assert!(synth_graph(&cfg(SynthKind::RandomDag, 5, 1.5, 1)).is_err());
        let mut c = cfg(SynthKind::RandomDag, 5, 0.5, 1);
        c.target_count = 6;
        assert!(synth_graph(&c).is_err());
    }
}
