#![allow(dead_code)]

use followback::graph::{Dag, SocialGraph, VertexMeta};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn vid(i: usize) -> String {
    format!("v{i:02}")
}

/// Graph on `v00..` with the given edges; ids sort like indices.
pub fn build(n: usize, edges: &[(usize, usize)], targets: &[bool], counts: &[(u64, u64)]) -> SocialGraph {
    let mut b = SocialGraph::builder();
    for i in 0..n {
        let (friend_count, follower_count) = counts.get(i).copied().unwrap_or((0, 0));
        b.vertex(
            vid(i),
            VertexMeta {
                friend_count,
                follower_count,
                is_target: targets[i],
            },
        )
        .unwrap();
    }
    for &(u, v) in edges {
        b.edge(vid(u), vid(v)).unwrap();
    }
    b.build().unwrap()
}

/// Edges of a random DAG: a random vertex order, each forward pair kept with probability `p`.
pub fn random_dag_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((order[i], order[j]));
            }
        }
    }
    edges.sort_unstable();
    edges
}

pub fn random_digraph_edges<R: Rng>(rng: &mut R, n: usize, p: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.random_bool(p) {
                edges.push((u, v));
            }
        }
    }
    edges
}

pub fn random_counts<R: Rng>(rng: &mut R, n: usize) -> Vec<(u64, u64)> {
    (0..n)
        .map(|_| (rng.random_range(0..3000), rng.random_range(0..5000)))
        .collect()
}

/// Formal expectation of the follow indicators when vertex `v` "follows"
/// with weight `g_v (1 + beta * followed parents)`, summed over all `2^n`
/// outcome vectors in a topological order. Weights are used as given, even
/// above one, so the result is the multilinear extension of the recursion.
pub fn enumerate_linear(dag: &Dag, g: &[f64], beta: f64) -> Vec<f64> {
    let n = dag.len();
    let order = dag.topological_order().to_vec();
    let mut expect = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        let on = |v: usize| mask >> v & 1 == 1;
        let mut w = 1.0;
        for &v in &order {
            let k = dag.parents(v).iter().filter(|&&u| on(u)).count() as f64;
            let p = g[v] * (1.0 + beta * k);
            w *= if on(v) { p } else { 1.0 - p };
        }
        for v in 0..n {
            if on(v) {
                expect[v] += w;
            }
        }
    }
    expect
}

/// Expected follows of `policy` by enumerating outcomes, with `prob(v, overlap)`.
pub fn enumerate_policy(
    graph: &SocialGraph,
    policy: &[usize],
    prob: &dyn Fn(usize, usize) -> f64,
) -> f64 {
    let k = policy.len();
    let mut total = 0.0;
    for mask in 0u32..(1 << k) {
        let mut followed = vec![false; graph.len()];
        let mut w = 1.0;
        for (i, &v) in policy.iter().enumerate() {
            let overlap = graph.parents_of(v).iter().filter(|&&u| followed[u]).count();
            let p = prob(v, overlap);
            if mask >> i & 1 == 1 {
                w *= p;
                followed[v] = true;
            } else {
                w *= 1.0 - p;
            }
        }
        let hits = policy
            .iter()
            .enumerate()
            .filter(|&(i, &v)| mask >> i & 1 == 1 && graph.is_target(v))
            .count();
        total += w * hits as f64;
    }
    total
}

/// Heap's algorithm.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut a: Vec<usize> = (0..n).collect();
    let mut out = vec![a.clone()];
    let mut c = vec![0; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            out.push(a.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

pub fn respects(order: &[usize], edges: &[(usize, usize)]) -> bool {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    edges.iter().all(|&(u, v)| pos[u] < pos[v])
}

pub fn binomial(n: u64, k: u64) -> i64 {
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}
