use serde::{Deserialize, Serialize};

use super::{SocialGraph, VertexId};
use crate::error::{Error, Result};

/// Ordered sequence of distinct vertices the agent interacts with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Policy {
    sequence: Vec<usize>,
}

impl Policy {
    pub fn new(graph: &SocialGraph, sequence: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; graph.len()];
        for &v in &sequence {
            if v >= graph.len() {
                return Err(Error::UnknownVertex(format!("#{v}")));
            }
            if seen[v] {
                return Err(Error::DuplicateInPolicy(graph.id(v).to_string()));
            }
            seen[v] = true;
        }
        Ok(Policy { sequence })
    }

    pub fn empty() -> Self {
        Policy {
            sequence: Vec::new(),
        }
    }

    pub fn from_ids<I, S>(graph: &SocialGraph, ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let seq = ids
            .into_iter()
            .map(|id| graph.index_of_str(id.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Policy::new(graph, seq)
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn len(&self) -> usize {
        self.sequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sequence.is_empty()
    }

    pub fn ids<'g>(&self, graph: &'g SocialGraph) -> Vec<&'g VertexId> {
        self.sequence.iter().map(|&v| graph.id(v)).collect()
    }

    /// Restricts the policy to `budget` interactions while keeping targets last:
    /// the first `budget - |targets|` non-targets, then the targets in policy order.
    /// When the budget cannot cover every target only the leading targets are kept.
    pub fn truncate_to_budget(&self, graph: &SocialGraph, budget: usize) -> Policy {
        let (targets, others): (Vec<usize>, Vec<usize>) =
            self.sequence.iter().partition(|&&v| graph.is_target(v));
        let keep_others = budget.saturating_sub(targets.len());
        let mut sequence: Vec<usize> = others.into_iter().take(keep_others).collect();
        sequence.extend(targets.into_iter().take(budget));
        Policy { sequence }
    }
}

/// On-disk policy: `{ "sequence": [...], "provenance": "...", "seed": n }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicyFile {
    pub sequence: Vec<VertexId>,
    pub provenance: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl PolicyFile {
    pub fn new(graph: &SocialGraph, policy: &Policy, provenance: impl Into<String>, seed: Option<u64>) -> Self {
        PolicyFile {
            sequence: policy.ids(graph).into_iter().cloned().collect(),
            provenance: provenance.into(),
            seed,
        }
    }

    pub fn to_policy(&self, graph: &SocialGraph) -> Result<Policy> {
        Policy::from_ids(graph, self.sequence.iter().map(VertexId::as_str))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexMeta;

    fn graph() -> SocialGraph {
        let mut b = SocialGraph::builder();
        for (id, t) in [("a", false), ("b", false), ("c", false), ("t1", true), ("t2", true)] {
            b.vertex(id, VertexMeta { is_target: t, ..Default::default() }).unwrap();
        }
        b.build().unwrap()
    }

    #[test]
    fn duplicates_rejected() {
        let g = graph();
        assert!(matches!(
            Policy::from_ids(&g, ["a", "b", "a"]),
            Err(Error::DuplicateInPolicy(_))
        ));
        assert!(matches!(Policy::from_ids(&g, ["nope"]), Err(Error::UnknownVertex(_))));
    }

    #[test]
    fn truncation_keeps_targets_last() {
        let g = graph();
        let p = Policy::from_ids(&g, ["c", "t2", "a", "b", "t1"]).unwrap();
        let t = p.truncate_to_budget(&g, 3);
        assert_eq!(t.ids(&g).iter().map(|v| v.as_str()).collect::<Vec<_>>(), ["c", "t2", "t1"]);
        let t = p.truncate_to_budget(&g, 1);
        assert_eq!(t.ids(&g).iter().map(|v| v.as_str()).collect::<Vec<_>>(), ["t2"]);
        assert_eq!(p.truncate_to_budget(&g, 10).len(), 5);
    }

    #[test]
    fn policy_file_json_shape() {
        let g = graph();
        let p = Policy::from_ids(&g, ["b", "t1"]).unwrap();
        let f = PolicyFile::new(&g, &p, "random-append", Some(7));
        let json = serde_json::to_string(&f).unwrap();
        assert_eq!(json, r#"{"sequence":["b","t1"],"provenance":"random-append","seed":7}"#);
        let back: PolicyFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_policy(&g).unwrap(), p);
    }
}
