//! Exact follow probabilities on a DAG under a linear-extension policy.

use serde::{Deserialize, Serialize};

use super::delta::{delta_table, MAX_DELTA_ORDER};
use super::logistic::{graph_susceptibilities, LogisticCoefficients};
use crate::error::{Error, Result};
use crate::graph::{Dag, SocialGraph};
use crate::scalar::Scalar;

/// Linearized product model: `p(overlap) = g_v (1 + beta * overlap)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ProductModel<T = f64> {
    pub beta: T,
    /// Indexed like the graph (or DAG) it is used with.
    pub susceptibility: Vec<T>,
}

impl<T: Scalar> ProductModel<T> {
    pub fn new(beta: T, susceptibility: Vec<T>) -> Result<Self> {
        if !(beta > T::zero() && beta.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        if let Some((v, g)) = susceptibility
            .iter()
            .enumerate()
            .find(|(_, &g)| !(g > T::zero() && g < T::one()))
        {
            return Err(Error::InvalidParameter(format!(
                "susceptibility of vertex #{v} is {g}, outside (0, 1)"
            )));
        }
        Ok(ProductModel {
            beta,
            susceptibility,
        })
    }

    /// Susceptibilities from the graph metadata; `beta` is the overlap coefficient.
    pub fn from_graph(graph: &SocialGraph, coeffs: &LogisticCoefficients<T>) -> Result<Self> {
        coeffs.validate()?;
        ProductModel::new(coeffs.beta_overlap, graph_susceptibilities(graph, coeffs)?)
    }

    /// Model for the vertices `members`, re-indexed `0..members.len()`.
    pub fn restrict(&self, members: &[usize]) -> ProductModel<T> {
        ProductModel {
            beta: self.beta,
            susceptibility: members.iter().map(|&v| self.susceptibility[v]).collect(),
        }
    }

    fn check_covers(&self, n: usize) -> Result<()> {
        if self.susceptibility.len() < n {
            return Err(Error::Missing(format!(
                "susceptibility for {} of {} vertices",
                self.susceptibility.len(),
                n
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FollowProbabilities<T = f64> {
    /// Follow probability per vertex, clamped to at most 1.
    pub p: Vec<T>,
    /// The same values before clamping.
    pub unclamped: Vec<T>,
    /// `contributions[v][l]`: share of `p_v` carried by length-`l` paths.
    pub contributions: Option<Vec<Vec<T>>>,
}

impl<T: Scalar> FollowProbabilities<T> {
    fn from_raw(unclamped: Vec<T>, contributions: Option<Vec<Vec<T>>>) -> Self {
        let p = unclamped.iter().map(|&x| x.min(T::one())).collect();
        FollowProbabilities {
            p,
            unclamped,
            contributions,
        }
    }

    /// Vertices whose unclamped value exceeded one.
    pub fn clamped(&self) -> Vec<usize> {
        self.unclamped
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > T::one())
            .map(|(v, _)| v)
            .collect()
    }

    pub fn was_clamped(&self) -> bool {
        self.unclamped.iter().any(|&x| x > T::one())
    }
}

/// `p_v = g_v (1 + beta * sum_{u in parents(v)} p_u)`, evaluated in topological order.
///
/// Exact for the linear response on any DAG: the expected overlap is the sum
/// of the parents' follow probabilities whether or not they are correlated.
/// Unclamped values propagate; `p` reports them clamped to 1.
pub fn dag_follow_probs_linear<T: Scalar>(dag: &Dag, model: &ProductModel<T>) -> Result<FollowProbabilities<T>> {
    model.check_covers(dag.len())?;
    let mut p = vec![T::zero(); dag.len()];
    for &v in dag.topological_order() {
        let s: T = dag.parents(v).iter().map(|&u| p[u]).sum();
        p[v] = model.susceptibility[v] * (T::one() + model.beta * s);
    }
    Ok(FollowProbabilities::from_raw(p, None))
}

/// Sum over paths: `q[v][l] = beta^l * sum over length-l paths P ending at v of prod_{u in P} g_u`,
/// by explicit path enumeration, truncated at `max_len`.
pub fn path_sum_probs<T: Scalar>(
    dag: &Dag,
    model: &ProductModel<T>,
    max_len: usize,
) -> Result<FollowProbabilities<T>> {
    model.check_covers(dag.len())?;
    let max_len = max_len.min(dag.len().saturating_sub(1));
    let mut q = Vec::with_capacity(dag.len());
    let mut totals = Vec::with_capacity(dag.len());
    for v in 0..dag.len() {
        let paths = dag.enumerate_paths(v, max_len)?;
        let mut per_len = Vec::with_capacity(paths.len());
        let mut beta_l = T::one();
        for by_len in &paths {
            let w: T = by_len
                .iter()
                .map(|path| path.iter().fold(T::one(), |acc, &u| acc * model.susceptibility[u]))
                .sum();
            per_len.push(beta_l * w);
            beta_l *= model.beta;
        }
        totals.push(per_len.iter().copied().sum());
        q.push(per_len);
    }
    Ok(FollowProbabilities::from_raw(totals, Some(q)))
}

/// Largest in-degree accepted by [`dag_follow_probs_general`].
pub const MAX_GENERAL_PARENTS: usize = MAX_DELTA_ORDER;

/// `p_v = g_v * sum_k delta_k * e_k(p_parents)` for a general overlap response `f`,
/// where `e_k` is the sum over parent subsets of size `k` of the product of
/// their probabilities.
///
/// Exact when parent follow events are independent (in-forests). On DAGs with
/// shared ancestors and nonlinear `f` it is an approximation.
pub fn dag_follow_probs_general<T: Scalar>(
    dag: &Dag,
    susceptibility: &[T],
    f: impl Fn(usize) -> T,
) -> Result<FollowProbabilities<T>> {
    if susceptibility.len() < dag.len() {
        return Err(Error::Missing(format!(
            "susceptibility for {} of {} vertices",
            susceptibility.len(),
            dag.len()
        )));
    }
    let kmax = dag.max_in_degree();
    if kmax > MAX_GENERAL_PARENTS {
        return Err(Error::GuardExceeded {
            what: "parent count for subset expansion",
            limit: MAX_GENERAL_PARENTS,
            actual: kmax,
        });
    }
    let table = delta_table(f, kmax)?;
    let mut p = vec![T::zero(); dag.len()];
    let mut e = Vec::with_capacity(kmax + 1);
    for &v in dag.topological_order() {
        elementary_symmetric(dag.parents(v).iter().map(|&u| p[u]), &mut e);
        let s: T = e.iter().zip(&table.delta).map(|(&ek, &dk)| ek * dk).sum();
        p[v] = susceptibility[v] * s;
    }
    Ok(FollowProbabilities::from_raw(p, None))
}

/// `out[k]` = sum over k-subsets of the product of their values.
fn elementary_symmetric<T: Scalar>(values: impl Iterator<Item = T>, out: &mut Vec<T>) {
    out.clear();
    out.push(T::one());
    for x in values {
        out.push(T::zero());
        for k in (1..out.len()).rev() {
            let add = out[k - 1] * x;
            out[k] += add;
        }
    }
}

/// Expected number of targets that follow: the sum of their probabilities.
pub fn expected_follows<T: Scalar>(probs: &[T], targets: &[usize]) -> Result<T> {
    targets
        .iter()
        .map(|&t| {
            probs
                .get(t)
                .copied()
                .ok_or_else(|| Error::Missing(format!("probability for target #{t}")))
        })
        .sum()
}
