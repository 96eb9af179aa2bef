use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use super::{Policy, SocialGraph};
use crate::error::{Error, Result};

/// Vertices left after repeatedly deleting sources; empty iff the edge set is acyclic.
fn cyclic_core(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut indeg = vec![0usize; n];
    let mut out = vec![Vec::new(); n];
    for &(u, v) in edges {
        indeg[v] += 1;
        out[u].push(v);
    }
    let mut alive = vec![true; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
    while let Some(u) = queue.pop_front() {
        alive[u] = false;
        for &v in &out[u] {
            indeg[v] -= 1;
            if indeg[v] == 0 {
                queue.push_back(v);
            }
        }
    }
    alive
}

pub fn is_acyclic(n: usize, edges: &[(usize, usize)]) -> bool {
    !cyclic_core(n, edges).into_iter().any(|a| a)
}

/// Returns a shortest directed cycle as `[c0, c1, ..., ck]` with edges
/// `c0 -> c1 -> ... -> ck -> c0`, or `None` when the edges form a DAG.
///
/// For each candidate edge `(u, v)` inside the cyclic core, a BFS from `v`
/// back to `u` yields the shortest cycle through that edge.
pub fn find_cycle(n: usize, edges: &[(usize, usize)]) -> Option<Vec<usize>> {
    let alive = cyclic_core(n, edges);
    if !alive.iter().any(|&a| a) {
        return None;
    }
    let mut out = vec![Vec::new(); n];
    let mut core_edges: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|&(u, v)| alive[u] && alive[v])
        .collect();
    core_edges.sort_unstable();
    core_edges.dedup();
    for &(u, v) in &core_edges {
        out[u].push(v);
    }

    let mut best: Option<Vec<usize>> = None;
    let mut pred = vec![usize::MAX; n];
    let mut visited = vec![false; n];
    for &(u, v) in &core_edges {
        visited.iter_mut().for_each(|x| *x = false);
        let mut queue = VecDeque::from([v]);
        visited[v] = true;
        let mut found = u == v;
        while let Some(w) = queue.pop_front() {
            if w == u {
                found = true;
                break;
            }
            for &x in &out[w] {
                if !visited[x] {
                    visited[x] = true;
                    pred[x] = w;
                    queue.push_back(x);
                }
            }
        }
        if !found {
            continue;
        }
        // Path v -> ... -> u, closed by the edge u -> v.
        let mut path = vec![u];
        let mut w = u;
        while w != v {
            w = pred[w];
            path.push(w);
        }
        path.reverse(); // v ... u
        let mut cycle = Vec::with_capacity(path.len());
        cycle.push(u);
        cycle.extend_from_slice(&path[..path.len() - 1]);
        if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
            let short = cycle.len() == 2;
            best = Some(cycle);
            if short {
                break;
            }
        }
    }
    best
}

/// Validated DAG over vertices `0..n`.
#[derive(Clone, Debug)]
pub struct Dag {
    n: usize,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Dag {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut edges = edges.to_vec();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) outside 0..{n}"
                )));
            }
        }
        edges.sort_unstable();
        edges.dedup();
        if let Some(cycle) = find_cycle(n, &edges) {
            return Err(Error::Cyclic(cycle));
        }
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut indeg = vec![0usize; n];
        for &(u, v) in &edges {
            parents[v].push(u);
            children[u].push(v);
            indeg[v] += 1;
        }
        for p in &mut parents {
            p.sort_unstable();
        }
        // Kahn's algorithm, smallest available vertex first.
        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(Reverse(u)) = heap.pop() {
            topo.push(u);
            for &v in &children[u] {
                indeg[v] -= 1;
                if indeg[v] == 0 {
                    heap.push(Reverse(v));
                }
            }
        }
        debug_assert_eq!(topo.len(), n);
        Ok(Dag {
            n,
            edges,
            parents,
            children,
            topo,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn max_in_degree(&self) -> usize {
        self.parents.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Deterministic topological order (smallest index first among available vertices).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// A total order in which every edge `(u, v)` has `u` before `v`.
    pub fn linear_extension(&self) -> Vec<usize> {
        self.topo.clone()
    }

    pub fn is_linear_extension(&self, order: &[usize]) -> bool {
        if order.len() != self.n {
            return false;
        }
        let mut pos = vec![usize::MAX; self.n];
        for (i, &v) in order.iter().enumerate() {
            if v >= self.n || pos[v] != usize::MAX {
                return false;
            }
            pos[v] = i;
        }
        self.edges.iter().all(|&(u, v)| pos[u] < pos[v])
    }

    /// Paths terminating at `v`, grouped by length: `result[l]` holds the
    /// length-`l` paths as vertex lists ending in `v`. `result[0] == [[v]]`.
    pub fn enumerate_paths(&self, v: usize, max_len: usize) -> Result<Vec<Vec<Vec<usize>>>> {
        if v >= self.n {
            return Err(Error::UnknownVertex(v.to_string()));
        }
        let max_len = max_len.min(self.n.saturating_sub(1));
        let mut by_len = vec![Vec::new(); max_len + 1];
        let mut stack = vec![v];
        self.walk_back(&mut stack, max_len, &mut by_len);
        Ok(by_len)
    }

    fn walk_back(&self, rev: &mut Vec<usize>, max_len: usize, out: &mut [Vec<Vec<usize>>]) {
        let len = rev.len() - 1;
        out[len].push(rev.iter().rev().copied().collect());
        if len == max_len {
            return;
        }
        let head = *rev.last().expect("non-empty path");
        for &u in &self.parents[head] {
            rev.push(u);
            self.walk_back(rev, max_len, out);
            rev.pop();
        }
    }
}

/// The edges a policy respects: `(u, v)` is kept iff `u` comes before `v`.
///
/// `dag` is indexed by policy position, so position order is itself a
/// linear extension of it.
#[derive(Clone, Debug)]
pub struct InducedDag {
    pub members: Vec<usize>,
    pub kept_edges: Vec<(usize, usize)>,
    pub dag: Dag,
}

pub fn induced_dag(graph: &SocialGraph, policy: &Policy) -> InducedDag {
    let members = policy.sequence().to_vec();
    let mut pos = vec![usize::MAX; graph.len()];
    for (i, &v) in members.iter().enumerate() {
        pos[v] = i;
    }
    let mut local = Vec::new();
    let mut kept_edges = Vec::new();
    for (i, &v) in members.iter().enumerate() {
        for &u in graph.parents_of(v) {
            let j = pos[u];
            if j < i {
                local.push((j, i));
                kept_edges.push((u, v));
            }
        }
    }
    kept_edges.sort_unstable();
    let dag = Dag::new(members.len(), &local).expect("position-ordered edges are acyclic");
    InducedDag {
        members,
        kept_edges,
        dag,
    }
}
