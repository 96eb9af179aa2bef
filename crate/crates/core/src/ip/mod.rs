//! Integer programs for choosing whom to interact with, and an exact
//! branch-and-bound solver with lazy cycle constraints.

mod lp;
mod model;
mod oracle;
mod solver;

use serde::{Deserialize, Serialize};

pub use lp::{export_lp, write_lp};
pub use model::{
    build_formulation, Constraint, MilpModel, Order, RowKind, Support, VarKind, Variable,
    FEASIBILITY_TOL,
};
pub use oracle::{brute_force_oracle, ORACLE_MAX_VERTICES};
pub use solver::{active_kinds, solve, solve_with, Solution, SolveOptions, SolveStats, SolveStatus};

use crate::error::Result;
use crate::follow::{dag_follow_probs_linear, expected_follows, ProductModel};
use crate::graph::{induced_dag, Policy, SocialGraph, VertexId};
use crate::policies::policy_from_dag;
use crate::scalar::Scalar;

/// Solution in terms of vertex ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub objective: f64,
    pub x: Vec<VertexId>,
    pub y: Vec<[VertexId; 2]>,
    pub z: Vec<[VertexId; 3]>,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

impl SolutionReport {
    pub fn new<T: Scalar>(graph: &SocialGraph, model: &MilpModel<T>, solution: &Solution<T>) -> Self {
        let id = |v: usize| graph.id(v).clone();
        let a = &solution.assignment;
        SolutionReport {
            objective: solution.objective.as_f64(),
            x: model.selected_vertices(a).into_iter().map(id).collect(),
            y: model.chosen_edges(a).into_iter().map(|(u, v)| [id(u), id(v)]).collect(),
            z: model
                .chosen_paths(a)
                .into_iter()
                .map(|(u, v, t)| [id(u), id(v), id(t)])
                .collect(),
            status: solution.status,
            stats: solution.stats,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OptimizedPolicy<T = f64> {
    pub policy: Policy,
    /// Solver objective.
    pub predicted: T,
    /// Exact linear-model expected target follows of the policy's induced DAG.
    pub linear_value: T,
    pub model: MilpModel<T>,
    pub solution: Solution<T>,
}

/// Builds and solves the formulation, then orders the selected vertices by
/// a linear extension of the chosen edges.
pub fn optimize_policy<T: Scalar>(
    graph: &SocialGraph,
    targets: &[usize],
    budget: usize,
    order: Order,
    product: &ProductModel<T>,
) -> Result<OptimizedPolicy<T>> {
    optimize_policy_with(graph, targets, budget, order, product, SolveOptions::default())
}

pub fn optimize_policy_with<T: Scalar>(
    graph: &SocialGraph,
    targets: &[usize],
    budget: usize,
    order: Order,
    product: &ProductModel<T>,
    opts: SolveOptions,
) -> Result<OptimizedPolicy<T>> {
    let mut model = build_formulation(graph, targets, budget, order, product)?;
    let solution = solve_with(&mut model, opts)?;
    let selected = model.selected_vertices(&solution.assignment);
    let edges = model.chosen_edges(&solution.assignment);
    let policy = policy_from_dag(graph, &selected, &edges)?;
    let linear_value = policy_linear_value(graph, &policy, &model.targets, product)?;
    Ok(OptimizedPolicy {
        policy,
        predicted: solution.objective,
        linear_value,
        model,
        solution,
    })
}

/// Expected target follows of `policy` under the linear product model.
pub fn policy_linear_value<T: Scalar>(
    graph: &SocialGraph,
    policy: &Policy,
    targets: &[usize],
    product: &ProductModel<T>,
) -> Result<T> {
    let induced = induced_dag(graph, policy);
    let local = product.restrict(&induced.members);
    let probs = dag_follow_probs_linear(&induced.dag, &local)?;
    let mut is_target = vec![false; graph.len()];
    for &t in targets {
        is_target[t] = true;
    }
    let positions: Vec<usize> = induced
        .members
        .iter()
        .enumerate()
        .filter(|(_, &v)| is_target[v])
        .map(|(i, _)| i)
        .collect();
    expected_follows(&probs.p, &positions)
}
