//! Baseline policies and policies derived from optimizer DAGs.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{find_cycle, Policy, SocialGraph};
use crate::scalar::Scalar;

/// Random permutation of the non-targets followed by a random permutation of the targets.
pub fn random_append(graph: &SocialGraph, targets: &[usize], seed: u64) -> Result<Policy> {
    let mut is_target = vec![false; graph.len()];
    for &t in targets {
        if t >= graph.len() {
            return Err(Error::UnknownVertex(format!("#{t}")));
        }
        is_target[t] = true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut others: Vec<usize> = (0..graph.len()).filter(|&v| !is_target[v]).collect();
    let mut tail: Vec<usize> = (0..graph.len()).filter(|&v| is_target[v]).collect();
    others.shuffle(&mut rng);
    tail.shuffle(&mut rng);
    others.extend(tail);
    Policy::new(graph, others)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CentralityScores<T = f64> {
    /// Max-normalized: the largest score is 1.
    pub scores: Vec<T>,
    pub iterations: usize,
    pub residual: T,
}

/// Relative weight of the uniform teleportation term.
pub const CENTRALITY_DAMPING: f64 = 1e-6;

/// Eigenvector centrality on the weighted adjacency `A'(u, v) = weight(v) [edge (u, v)]`.
///
/// The principal vector of `M x (v) = weight(v) * sum_{u in parents(v)} x(u) + d * mean(weight) * mean(x)`
/// with `d = CENTRALITY_DAMPING`: a vertex is central when central vertices
/// are its friends and it is susceptible itself. The teleportation term makes
/// `M` positive, so the principal vector is unique on reducible graphs, and it
/// scales with the weights, so rescaling all weights leaves the scores unchanged.
///
/// Each step applies `M + lambda I`, with `lambda` the current growth estimate
/// `max(M x)` for the max-normalized `x`. The shift keeps the eigenvectors of
/// `M` and damps the oscillation pure power iteration shows on periodic graphs.
pub fn eigenvector_centrality<T: Scalar>(
    graph: &SocialGraph,
    weights: &[T],
    tol: T,
    max_iter: usize,
) -> Result<CentralityScores<T>> {
    let n = graph.len();
    if n == 0 {
        return Err(Error::InvalidParameter("centrality of an empty graph".into()));
    }
    if weights.len() != n {
        return Err(Error::Missing(format!("weights for {} of {} vertices", weights.len(), n)));
    }
    if let Some(w) = weights.iter().find(|&&w| !(w > T::zero() && w.is_finite())) {
        return Err(Error::InvalidParameter(format!("vertex weight {w} is not positive")));
    }
    let nf = T::from_count(n);
    let mean_w = weights.iter().copied().sum::<T>() / nf;
    let teleport = T::lit(CENTRALITY_DAMPING) * mean_w;

    let mut x = vec![T::one(); n];
    let mut next = vec![T::zero(); n];
    let mut residual = T::infinity();
    for iter in 1..=max_iter {
        let mean_x = x.iter().copied().sum::<T>() / nf;
        for v in 0..n {
            let s: T = graph.parents_of(v).iter().map(|&u| x[u]).sum();
            next[v] = weights[v] * s + teleport * mean_x;
        }
        let lambda = next.iter().copied().fold(T::zero(), T::max);
        for (y, &xv) in next.iter_mut().zip(&x) {
            *y += lambda * xv;
        }
        let max = next.iter().copied().fold(T::zero(), T::max);
        for y in next.iter_mut() {
            *y /= max;
        }
        residual = x
            .iter()
            .zip(&next)
            .map(|(&a, &b)| (a - b).abs())
            .fold(T::zero(), T::max);
        std::mem::swap(&mut x, &mut next);
        if residual < tol {
            return Ok(CentralityScores {
                scores: x,
                iterations: iter,
                residual,
            });
        }
    }
    Err(Error::NotConverged {
        iterations: max_iter,
        residual: residual.as_f64(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    Ascending,
    Descending,
}

/// Non-targets ranked by score, then targets ranked the same way. Ties keep id order.
pub fn centrality_policy<T: Scalar>(
    graph: &SocialGraph,
    scores: &[T],
    direction: Direction,
) -> Result<Policy> {
    if scores.len() != graph.len() {
        return Err(Error::Missing(format!(
            "scores for {} of {} vertices",
            scores.len(),
            graph.len()
        )));
    }
    let rank = |a: &usize, b: &usize| {
        let ord = scores[*a].partial_cmp(&scores[*b]).unwrap_or(Ordering::Equal);
        match direction {
            Direction::Ascending => ord,
            Direction::Descending => ord.reverse(),
        }
    };
    let mut others: Vec<usize> = (0..graph.len()).filter(|&v| !graph.is_target(v)).collect();
    let mut targets: Vec<usize> = graph.targets();
    others.sort_by(rank);
    targets.sort_by(rank);
    others.extend(targets);
    Policy::new(graph, others)
}

/// Linear extension of `(selected, kept_edges)` that puts an available
/// non-target ahead of any target, smallest id first.
pub fn policy_from_dag(
    graph: &SocialGraph,
    selected: &[usize],
    kept_edges: &[(usize, usize)],
) -> Result<Policy> {
    let mut in_set = vec![false; graph.len()];
    for &v in selected {
        if v >= graph.len() {
            return Err(Error::UnknownVertex(format!("#{v}")));
        }
        in_set[v] = true;
    }
    let mut indeg = vec![0usize; graph.len()];
    let mut out = vec![Vec::new(); graph.len()];
    for &(u, v) in kept_edges {
        if !in_set[u] || !in_set[v] {
            return Err(Error::InvalidParameter(format!(
                "kept edge ({}, {}) leaves the selected vertices",
                graph.id(u),
                graph.id(v)
            )));
        }
        indeg[v] += 1;
        out[u].push(v);
    }
    if let Some(cycle) = find_cycle(graph.len(), kept_edges) {
        return Err(Error::Cyclic(cycle));
    }
    // (is_target, index): non-targets sort first.
    let mut ready: BTreeSet<(bool, usize)> = (0..graph.len())
        .filter(|&v| in_set[v] && indeg[v] == 0)
        .map(|v| (graph.is_target(v), v))
        .collect();
    let mut seq = Vec::with_capacity(selected.len());
    while let Some((_, u)) = ready.pop_first() {
        seq.push(u);
        for &v in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                ready.insert((graph.is_target(v), v));
            }
        }
    }
    Policy::new(graph, seq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{induced_dag, VertexMeta};

    fn graph(vertices: &[(&str, bool)], edges: &[(&str, &str)]) -> SocialGraph {
        let mut b = SocialGraph::builder();
        for (id, t) in vertices {
            b.vertex(*id, VertexMeta { is_target: *t, ..Default::default() }).unwrap();
        }
        for (u, v) in edges {
            b.edge(*u, *v).unwrap();
        }
        b.build().unwrap()
    }

    fn names(g: &SocialGraph, p: &Policy) -> Vec<String> {
        p.ids(g).iter().map(|v| v.to_string()).collect()
    }

    #[test]
    fn random_append_puts_targets_last_and_is_deterministic() {
        let g = graph(&[("a", false), ("b", false), ("c", false), ("t", true), ("u", true)], &[]);
        let p = random_append(&g, &g.targets(), 9).unwrap();
        let seq = p.sequence();
        assert_eq!(seq.len(), 5);
        assert!(seq[..3].iter().all(|&v| !g.is_target(v)));
        assert!(seq[3..].iter().all(|&v| g.is_target(v)));
        assert_eq!(p, random_append(&g, &g.targets(), 9).unwrap());
    }

    #[test]
    fn random_append_all_targets() {
        let g = graph(&[("a", true), ("b", true), ("c", true)], &[]);
        let p = random_append(&g, &g.targets(), 1).unwrap();
        let mut s = p.sequence().to_vec();
        s.sort();
        assert_eq!(s, vec![0, 1, 2]);
    }

    #[test]
    fn two_cycle_equal_scores() {
        let g = graph(&[("a", false), ("b", false)], &[("a", "b"), ("b", "a")]);
        let c = eigenvector_centrality(&g, &[1.0f64, 1.0], 1e-12, 1000).unwrap();
        assert!((c.scores[0] - c.scores[1]).abs() < 1e-12);
    }

    #[test]
    fn star_hub_leads() {
        let g = graph(
            &[("hub", false), ("l1", false), ("l2", false), ("l3", false), ("l4", false)],
            &[("l1", "hub"), ("l2", "hub"), ("l3", "hub"), ("l4", "hub")],
        );
        let c = eigenvector_centrality(&g, &[1.0; 5], 1e-12, 10_000).unwrap();
        let hub = g.index_of_str("hub").unwrap();
        assert_eq!(c.scores[hub], 1.0);
        let leaves: Vec<f64> = (0..5).filter(|&v| v != hub).map(|v| c.scores[v]).collect();
        assert!(leaves.iter().all(|&l| (l - leaves[0]).abs() < 1e-12 && l < 1.0));
        let p = centrality_policy(&g, &c.scores, Direction::Descending).unwrap();
        assert_eq!(names(&g, &p)[0], "hub");
    }

    #[test]
    fn centrality_scale_invariant() {
        let g = graph(
            &[("a", false), ("b", false), ("c", false), ("d", true)],
            &[("a", "b"), ("b", "c"), ("c", "a"), ("a", "d"), ("c", "d")],
        );
        let w = [0.1, 0.3, 0.2, 0.05];
        let w2: Vec<f64> = w.iter().map(|x| x * 37.0).collect();
        let c1 = eigenvector_centrality(&g, &w, 1e-13, 100_000).unwrap();
        let c2 = eigenvector_centrality(&g, &w2, 1e-13, 100_000).unwrap();
        for v in 0..4 {
            assert!((c1.scores[v] - c2.scores[v]).abs() < 1e-9);
        }
    }

    #[test]
    fn centrality_rejects_bad_input() {
        let g = graph(&[("a", false)], &[]);
        assert!(eigenvector_centrality(&g, &[0.0], 1e-9, 10).is_err());
        assert!(eigenvector_centrality(&g, &[1.0f64, 1.0], 1e-9, 10).is_err());
        let g2 = graph(&[("a", false), ("b", false)], &[("a", "b")]);
        assert!(matches!(
            eigenvector_centrality(&g2, &[1.0, 0.5], 1e-300, 3),
            Err(Error::NotConverged { .. })
        ));
    }

    #[test]
    fn equal_scores_fall_back_to_id_order() {
        let g = graph(&[("c", false), ("a", false), ("t2", true), ("t1", true), ("b", false)], &[]);
        let s = vec![0.5; 5];
        for dir in [Direction::Ascending, Direction::Descending] {
            let p = centrality_policy(&g, &s, dir).unwrap();
            assert_eq!(names(&g, &p), ["a", "b", "c", "t1", "t2"]);
        }
    }

    #[test]
    fn ascending_is_reverse_of_descending_without_ties() {
        let g = graph(&[("a", false), ("b", false), ("c", false), ("t", true)], &[]);
        let s = [0.2, 0.9, 0.5, 0.1];
        let up = centrality_policy(&g, &s, Direction::Ascending).unwrap();
        let down = centrality_policy(&g, &s, Direction::Descending).unwrap();
        let mut rev = up.sequence()[..3].to_vec();
        rev.reverse();
        assert_eq!(rev, down.sequence()[..3]);
        assert_eq!(up.sequence()[3], down.sequence()[3]);
    }

    #[test]
    fn dag_policy_examples() {
        let g = graph(&[("u", false), ("t", true)], &[("u", "t")]);
        let (u, t) = (g.index_of_str("u").unwrap(), g.index_of_str("t").unwrap());
        let p = policy_from_dag(&g, &[u, t], &[(u, t)]).unwrap();
        assert_eq!(names(&g, &p), ["u", "t"]);

        let g = graph(&[("n1", false), ("t1", true)], &[]);
        let p = policy_from_dag(&g, &[0, 1], &[]).unwrap();
        assert_eq!(names(&g, &p), ["n1", "t1"]);
    }

    #[test]
    fn dag_policy_round_trips_through_induced_dag() {
        let g = graph(
            &[("a", true), ("b", false), ("c", true), ("d", false)],
            &[("a", "b"), ("b", "c"), ("d", "c"), ("a", "c"), ("c", "d")],
        );
        let kept = vec![(0, 1), (1, 2), (0, 2)];
        let p = policy_from_dag(&g, &[0, 1, 2], &kept).unwrap();
        let d = induced_dag(&g, &p);
        for e in &kept {
            assert!(d.kept_edges.contains(e));
        }
        assert!(matches!(
            policy_from_dag(&g, &[2, 3], &[(2, 3), (3, 2)]),
            Err(Error::Cyclic(_))
        ));
    }
}
