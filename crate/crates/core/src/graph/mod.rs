//! Directed social graph.
//!
//! Edge direction is fixed everywhere in this crate: the stored pair `(u, v)`
//! means "`v` follows `u`". `u` is one of `v`'s friends, `v` is one of `u`'s
//! followers, and information (overlap) flows from `u` to `v`.
//!
//! Vertices are stored sorted by id, so comparing vertex indices is the same
//! as comparing ids. Every tie-break in the crate relies on this.

mod dag;
mod io;
mod policy;
mod synth;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};

pub use dag::{find_cycle, induced_dag, is_acyclic, Dag, InducedDag};
pub use io::{load_graph, write_graph_json, GraphFormat, LoadReport};
pub use policy::{Policy, PolicyFile};
pub use synth::{synth_graph, CountDistribution, SynthConfig, SynthKind};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct VertexId(String);

impl VertexId {
    pub fn new(id: impl Into<String>) -> Self {
        VertexId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for VertexId {
    fn from(s: &str) -> Self {
        VertexId(s.to_owned())
    }
}

impl From<String> for VertexId {
    fn from(s: String) -> Self {
        VertexId(s)
    }
}

// Graph files may use integer ids; they are kept as their decimal text.
impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Int(i64),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Text(s) => VertexId(s),
            Raw::Int(i) => VertexId(i.to_string()),
        })
    }
}

/// Platform-wide counts for a vertex. These are global counts, not degrees in the loaded graph.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexMeta {
    pub friend_count: u64,
    pub follower_count: u64,
    pub is_target: bool,
}

/// Immutable directed graph with vertex metadata.
#[derive(Clone, Debug)]
pub struct SocialGraph {
    ids: Vec<VertexId>,
    meta: Vec<VertexMeta>,
    index: HashMap<VertexId, usize>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl SocialGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::default()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges sorted by (tail, head).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn id(&self, v: usize) -> &VertexId {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[VertexId] {
        &self.ids
    }

    pub fn meta(&self, v: usize) -> &VertexMeta {
        &self.meta[v]
    }

    pub fn index_of(&self, id: &VertexId) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(id.to_string()))
    }

    pub fn index_of_str(&self, id: &str) -> Result<usize> {
        self.index_of(&VertexId::from(id))
    }

    pub fn is_target(&self, v: usize) -> bool {
        self.meta[v].is_target
    }

    /// Target vertex indices in id order.
    pub fn targets(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.meta[v].is_target).collect()
    }

    pub fn target_mask(&self) -> Vec<bool> {
        self.meta.iter().map(|m| m.is_target).collect()
    }

    /// `v`'s friends: every `u` with an edge `(u, v)`. Sorted.
    pub fn parents_of(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    /// `u`'s followers: every `v` with an edge `(u, v)`. Sorted.
    pub fn children_of(&self, u: usize) -> &[usize] {
        &self.children[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.children[u].binary_search(&v).is_ok()
    }

    pub fn parents(&self, v: &VertexId) -> Result<BTreeSet<&VertexId>> {
        let v = self.index_of(v)?;
        Ok(self.parents[v].iter().map(|&u| &self.ids[u]).collect())
    }

    pub fn children(&self, u: &VertexId) -> Result<BTreeSet<&VertexId>> {
        let u = self.index_of(u)?;
        Ok(self.children[u].iter().map(|&v| &self.ids[v]).collect())
    }

    /// Number of `v`'s friends that already follow the agent.
    pub fn overlap(&self, v: &VertexId, followed: &BTreeSet<VertexId>) -> Result<usize> {
        let v = self.index_of(v)?;
        Ok(self.parents[v]
            .iter()
            .filter(|&&u| followed.contains(&self.ids[u]))
            .count())
    }

    /// Index form of [`SocialGraph::overlap`]; `followed[u]` marks followers of the agent.
    pub fn overlap_of(&self, v: usize, followed: &[bool]) -> usize {
        self.parents[v].iter().filter(|&&u| followed[u]).count()
    }

    /// Copy of the graph with the target flags replaced by `targets`.
    pub fn with_targets(&self, targets: &[VertexId]) -> Result<SocialGraph> {
        let mut g = self.clone();
        for m in &mut g.meta {
            m.is_target = false;
        }
        for t in targets {
            let ix = g.index_of(t)?;
            g.meta[ix].is_target = true;
        }
        Ok(g)
    }

    /// Subgraph induced by `keep`; metadata is carried over unchanged.
    pub fn subgraph(&self, keep: &[usize]) -> SocialGraph {
        let mut b = GraphBuilder::default();
        let mut kept = vec![false; self.len()];
        for &v in keep {
            if !kept[v] {
                kept[v] = true;
                b.vertex(self.ids[v].clone(), self.meta[v])
                    .expect("ids unique in source graph");
            }
        }
        for &(u, v) in &self.edges {
            if kept[u] && kept[v] {
                b.edge(self.ids[u].clone(), self.ids[v].clone())
                    .expect("edge valid in source graph");
            }
        }
        b.build().expect("subgraph of a valid graph is valid")
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct PartialMeta {
    friend_count: Option<u64>,
    follower_count: Option<u64>,
    is_target: bool,
}

/// Single-owner builder that validates the graph invariants.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertices: Vec<(VertexId, PartialMeta)>,
    seen: HashMap<VertexId, usize>,
    edges: Vec<(VertexId, VertexId)>,
}

impl GraphBuilder {
    pub fn vertex(&mut self, id: impl Into<VertexId>, meta: VertexMeta) -> Result<&mut Self> {
        self.declare(
            id.into(),
            PartialMeta {
                friend_count: Some(meta.friend_count),
                follower_count: Some(meta.follower_count),
                is_target: meta.is_target,
            },
        )?;
        Ok(self)
    }

    /// Declares a vertex whose counts fall back to graph degrees at build time.
    pub fn vertex_without_meta(&mut self, id: impl Into<VertexId>) -> Result<&mut Self> {
        self.declare(id.into(), PartialMeta::default())?;
        Ok(self)
    }

    /// Declares a vertex; a missing count falls back to the matching graph degree.
    pub fn vertex_partial(
        &mut self,
        id: impl Into<VertexId>,
        friend_count: Option<u64>,
        follower_count: Option<u64>,
        is_target: bool,
    ) -> Result<&mut Self> {
        self.declare(
            id.into(),
            PartialMeta {
                friend_count,
                follower_count,
                is_target,
            },
        )?;
        Ok(self)
    }

    fn declare(&mut self, id: VertexId, meta: PartialMeta) -> Result<()> {
        if self.seen.contains_key(&id) {
            return Err(Error::DuplicateVertex(id));
        }
        self.seen.insert(id.clone(), self.vertices.len());
        self.vertices.push((id, meta));
        Ok(())
    }

    pub fn contains(&self, id: &VertexId) -> bool {
        self.seen.contains_key(id)
    }

    /// Adds `(u, v)`: `v` follows `u`.
    pub fn edge(&mut self, u: impl Into<VertexId>, v: impl Into<VertexId>) -> Result<&mut Self> {
        let (u, v) = (u.into(), v.into());
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        self.edges.push((u, v));
        Ok(self)
    }

    pub fn build(self) -> Result<SocialGraph> {
        self.build_with_report().map(|(g, _)| g)
    }

    /// Builds the graph and returns the ids whose metadata was defaulted to degrees.
    pub fn build_with_report(self) -> Result<(SocialGraph, Vec<VertexId>)> {
        let mut order: Vec<usize> = (0..self.vertices.len()).collect();
        order.sort_by(|&a, &b| self.vertices[a].0.cmp(&self.vertices[b].0));
        let ids: Vec<VertexId> = order.iter().map(|&i| self.vertices[i].0.clone()).collect();
        let index: HashMap<VertexId, usize> =
            ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect();

        let n = ids.len();
        let mut edges = Vec::with_capacity(self.edges.len());
        for (u, v) in &self.edges {
            let ui = *index.get(u).ok_or_else(|| Error::DanglingEndpoint {
                src: u.clone(),
                dst: v.clone(),
                missing: u.clone(),
            })?;
            let vi = *index.get(v).ok_or_else(|| Error::DanglingEndpoint {
                src: u.clone(),
                dst: v.clone(),
                missing: v.clone(),
            })?;
            edges.push((ui, vi));
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            let (u, v) = w[0];
            return Err(Error::DuplicateEdge(ids[u].clone(), ids[v].clone()));
        }

        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(u, v) in &edges {
            children[u].push(v);
            parents[v].push(u);
        }
        for p in &mut parents {
            p.sort_unstable();
        }

        let mut defaulted = Vec::new();
        let meta = order
            .iter()
            .enumerate()
            .map(|(ix, &orig)| {
                let p = self.vertices[orig].1;
                if p.friend_count.is_none() || p.follower_count.is_none() {
                    defaulted.push(ids[ix].clone());
                }
                VertexMeta {
                    friend_count: p.friend_count.unwrap_or(parents[ix].len() as u64),
                    follower_count: p.follower_count.unwrap_or(children[ix].len() as u64),
                    is_target: p.is_target,
                }
            })
            .collect();

        Ok((
            SocialGraph {
                ids,
                meta,
                index,
                edges,
                parents,
                children,
            },
            defaulted,
        ))
    }
}
