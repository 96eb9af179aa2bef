use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::follow::ProductModel;
use crate::graph::SocialGraph;
use crate::scalar::Scalar;

/// Absolute slack allowed when checking a row `lhs <= rhs`.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Longest path length, ending at a target, represented in the objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    Zeroth,
    First,
    Second,
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        match o {
            Order::Zeroth => 0,
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl TryFrom<u8> for Order {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Order::Zeroth),
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            other => Err(Error::InvalidParameter(format!(
                "formulation order must be 0, 1 or 2, got {other}"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarKind {
    /// Interact with the vertex.
    X(usize),
    /// Keep edge `(u, v)` in the DAG.
    Y(usize, usize),
    /// Keep the two-hop path `u -> v -> t` ending at target `t`.
    Z(usize, usize, usize),
}

impl VarKind {
    /// Vertices whose x variables must be one for this variable to be one.
    pub fn support(&self) -> Support {
        match *self {
            VarKind::X(v) => Support::new(&[v]),
            VarKind::Y(u, v) => Support::new(&[u, v]),
            VarKind::Z(u, v, t) => Support::new(&[u, v, t]),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct Support {
    items: [usize; 3],
    len: usize,
}

impl Support {
    fn new(v: &[usize]) -> Self {
        let mut items = [0; 3];
        items[..v.len()].copy_from_slice(v);
        Support { items, len: v.len() }
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.items[..self.len]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Variable<T = f64> {
    pub kind: VarKind,
    pub objective: T,
    pub name: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RowKind {
    /// `sum_v x_v <= m`
    Budget,
    /// `y_uv - x_u <= 0`
    LinkTail,
    /// `y_uv - x_v <= 0`
    LinkHead,
    /// `z_uvt - y_uv <= 0`
    PathFirst,
    /// `z_uvt - y_vt <= 0`
    PathSecond,
    /// Linearized follow probability of the target is at most one.
    Cap(usize),
    /// `sum_{(u,v) in C} y_uv <= |C| - 1`
    Cycle,
}

/// `sum coef * var <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint<T = f64> {
    pub kind: RowKind,
    pub terms: Vec<(usize, T)>,
    pub rhs: T,
}

impl<T: Scalar> Constraint<T> {
    pub fn lhs(&self, assignment: &[bool]) -> T {
        self.terms
            .iter()
            .filter(|(j, _)| assignment[*j])
            .map(|&(_, c)| c)
            .sum()
    }

    pub fn is_satisfied(&self, assignment: &[bool]) -> bool {
        self.lhs(assignment) <= self.rhs + T::lit(FEASIBILITY_TOL)
    }
}

/// Binary program for the follow-back problem.
///
/// Variables are laid out as every `x_v` in vertex order, then the `y` in
/// sorted `(u, v)` order, then the `z` in sorted `(u, v, t)` order. The
/// objective is always summed in this order.
#[derive(Clone, Debug)]
pub struct MilpModel<T = f64> {
    pub order: Order,
    pub budget: usize,
    pub n_vertices: usize,
    pub targets: Vec<usize>,
    pub vars: Vec<Variable<T>>,
    pub constraints: Vec<Constraint<T>>,
    y_lookup: HashMap<(usize, usize), usize>,
    cycles: HashSet<Vec<usize>>,
}

impl<T: Scalar> MilpModel<T> {
    pub fn x_var(&self, v: usize) -> usize {
        v
    }

    pub fn y_var(&self, u: usize, v: usize) -> Option<usize> {
        self.y_lookup.get(&(u, v)).copied()
    }

    pub fn cycle_constraint_count(&self) -> usize {
        self.cycles.len()
    }

    pub fn objective_value(&self, assignment: &[bool]) -> T {
        self.vars
            .iter()
            .zip(assignment)
            .filter(|(_, &on)| on)
            .map(|(v, _)| v.objective)
            .sum()
    }

    pub fn violated_constraints(&self, assignment: &[bool]) -> Vec<usize> {
        (0..self.constraints.len())
            .filter(|&r| !self.constraints[r].is_satisfied(assignment))
            .collect()
    }

    /// Adds `sum_{(u,v) in C} y_uv <= |C| - 1` for the cycle `c0 -> c1 -> ... -> c0`.
    /// Returns false when the cycle is already present or uses an edge without a y variable.
    pub fn add_cycle_constraint(&mut self, cycle: &[usize]) -> bool {
        let k = cycle.len();
        if k == 0 {
            return false;
        }
        // Rotate so the smallest vertex leads; the same cycle is then stored once.
        let start = (0..k).min_by_key(|&i| cycle[i]).expect("non-empty");
        let canon: Vec<usize> = (0..k).map(|i| cycle[(start + i) % k]).collect();
        if self.cycles.contains(&canon) {
            return false;
        }
        let mut terms = Vec::with_capacity(k);
        for i in 0..k {
            match self.y_var(canon[i], canon[(i + 1) % k]) {
                Some(j) => terms.push((j, T::one())),
                None => return false,
            }
        }
        self.constraints.push(Constraint {
            kind: RowKind::Cycle,
            terms,
            rhs: T::from_count(k - 1),
        });
        self.cycles.insert(canon);
        true
    }

    pub fn selected_vertices(&self, assignment: &[bool]) -> Vec<usize> {
        (0..self.n_vertices).filter(|&v| assignment[v]).collect()
    }

    pub fn chosen_edges(&self, assignment: &[bool]) -> Vec<(usize, usize)> {
        self.vars
            .iter()
            .zip(assignment)
            .filter_map(|(var, &on)| match var.kind {
                VarKind::Y(u, v) if on => Some((u, v)),
                _ => None,
            })
            .collect()
    }

    pub fn chosen_paths(&self, assignment: &[bool]) -> Vec<(usize, usize, usize)> {
        self.vars
            .iter()
            .zip(assignment)
            .filter_map(|(var, &on)| match var.kind {
                VarKind::Z(u, v, t) if on => Some((u, v, t)),
                _ => None,
            })
            .collect()
    }
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '.' { c } else { '_' })
        .collect()
}

/// `x_<id>`, `y_<u>_<v>`, `z_<u>_<v>_<t>` when those are unique after
/// sanitizing the ids, index-based names (`x_v12`, ...) otherwise.
fn variable_names(graph: &SocialGraph, kinds: &[VarKind]) -> Vec<String> {
    let clean: Vec<String> = graph.ids().iter().map(|id| sanitize(id.as_str())).collect();
    let by_id = |k: &VarKind| match *k {
        VarKind::X(v) => format!("x_{}", clean[v]),
        VarKind::Y(u, v) => format!("y_{}_{}", clean[u], clean[v]),
        VarKind::Z(u, v, t) => format!("z_{}_{}_{}", clean[u], clean[v], clean[t]),
    };
    let names: Vec<String> = kinds.iter().map(by_id).collect();
    let unique: HashSet<&String> = names.iter().collect();
    if unique.len() == names.len() {
        return names;
    }
    kinds
        .iter()
        .map(|k| match *k {
            VarKind::X(v) => format!("x_v{v}"),
            VarKind::Y(u, v) => format!("y_v{u}_v{v}"),
            VarKind::Z(u, v, t) => format!("z_v{u}_v{v}_v{t}"),
        })
        .collect()
}

/// Builds the zeroth, first or second order formulation.
///
/// `y` variables exist only for graph edges that can carry objective weight:
/// edges into a target, plus (second order) edges into a friend of a target.
/// `z` variables exist only for realized paths `u -> v -> t` with `t` a
/// target and `u != t`. Cycle constraints are not materialized.
pub fn build_formulation<T: Scalar>(
    graph: &SocialGraph,
    targets: &[usize],
    budget: usize,
    order: Order,
    model: &ProductModel<T>,
) -> Result<MilpModel<T>> {
    let n = graph.len();
    if model.susceptibility.len() != n {
        return Err(Error::Missing(format!(
            "susceptibility for {} of {} vertices",
            model.susceptibility.len(),
            n
        )));
    }
    let mut is_target = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::UnknownVertex(format!("#{t}")));
        }
        is_target[t] = true;
    }
    let targets: Vec<usize> = (0..n).filter(|&v| is_target[v]).collect();
    let g = &model.susceptibility;
    let beta = model.beta;

    let mut kinds: Vec<VarKind> = (0..n).map(VarKind::X).collect();
    let mut objective: Vec<T> = (0..n)
        .map(|v| if is_target[v] { g[v] } else { T::zero() })
        .collect();

    let mut y_edges: Vec<(usize, usize)> = Vec::new();
    let mut z_paths: Vec<(usize, usize, usize)> = Vec::new();
    if order >= Order::First {
        for &t in &targets {
            for &u in graph.parents_of(t) {
                y_edges.push((u, t));
            }
        }
    }
    if order >= Order::Second {
        for &t in &targets {
            for &v in graph.parents_of(t) {
                for &u in graph.parents_of(v) {
                    if u != t {
                        z_paths.push((u, v, t));
                        y_edges.push((u, v));
                    }
                }
            }
        }
    }
    y_edges.sort_unstable();
    y_edges.dedup();
    z_paths.sort_unstable();

    let mut y_lookup = HashMap::with_capacity(y_edges.len());
    for &(u, v) in &y_edges {
        y_lookup.insert((u, v), kinds.len());
        kinds.push(VarKind::Y(u, v));
        objective.push(if is_target[v] { beta * g[u] * g[v] } else { T::zero() });
    }
    let z_start = kinds.len();
    for &(u, v, t) in &z_paths {
        kinds.push(VarKind::Z(u, v, t));
        objective.push(beta * beta * g[u] * g[v] * g[t]);
    }

    let mut constraints = Vec::new();
    constraints.push(Constraint {
        kind: RowKind::Budget,
        terms: (0..n).map(|v| (v, T::one())).collect(),
        rhs: T::from_count(budget),
    });
    for &(u, v) in &y_edges {
        let y = y_lookup[&(u, v)];
        constraints.push(Constraint {
            kind: RowKind::LinkTail,
            terms: vec![(y, T::one()), (u, -T::one())],
            rhs: T::zero(),
        });
        constraints.push(Constraint {
            kind: RowKind::LinkHead,
            terms: vec![(y, T::one()), (v, -T::one())],
            rhs: T::zero(),
        });
    }
    for (i, &(u, v, t)) in z_paths.iter().enumerate() {
        let z = z_start + i;
        constraints.push(Constraint {
            kind: RowKind::PathFirst,
            terms: vec![(z, T::one()), (y_lookup[&(u, v)], -T::one())],
            rhs: T::zero(),
        });
        constraints.push(Constraint {
            kind: RowKind::PathSecond,
            terms: vec![(z, T::one()), (y_lookup[&(v, t)], -T::one())],
            rhs: T::zero(),
        });
    }
    if order >= Order::First {
        for &t in &targets {
            let mut terms = vec![(t, objective[t])];
            for &u in graph.parents_of(t) {
                let y = y_lookup[&(u, t)];
                terms.push((y, objective[y]));
            }
            for (i, &(_, _, tt)) in z_paths.iter().enumerate() {
                if tt == t {
                    terms.push((z_start + i, objective[z_start + i]));
                }
            }
            constraints.push(Constraint {
                kind: RowKind::Cap(t),
                terms,
                rhs: T::one(),
            });
        }
    }

    let names = variable_names(graph, &kinds);
    let vars = kinds
        .into_iter()
        .zip(objective)
        .zip(names)
        .map(|((kind, objective), name)| Variable {
            kind,
            objective,
            name,
        })
        .collect();

    Ok(MilpModel {
        order,
        budget,
        n_vertices: n,
        targets,
        vars,
        constraints,
        y_lookup,
        cycles: HashSet::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::VertexMeta;

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

    #[test]
    fn zeroth_order_shape() {
        let g = graph(&[("a", false), ("b", true), ("c", true)], &[("a", "b"), ("b", "c")]);
        let m = ProductModel::<f64>::new(0.28, vec![0.1, 0.2, 0.3]).unwrap();
        let f = build_formulation(&g, &g.targets(), 2, Order::Zeroth, &m).unwrap();
        assert_eq!(f.vars.len(), 3);
        assert_eq!(f.constraints.len(), 1);
        assert_eq!(f.constraints[0].kind, RowKind::Budget);
        assert_eq!(f.vars.iter().map(|v| v.objective).collect::<Vec<_>>(), vec![0.0, 0.2, 0.3]);
    }

    #[test]
    fn first_order_single_edge() {
        // ids sort as t < u, so x_t is variable 0.
        let g = graph(&[("u", false), ("t", true)], &[("u", "t")]);
        let (t, u) = (0, 1);
        let m = ProductModel::<f64>::new(0.28, vec![0.2, 0.5]).unwrap();
        let f = build_formulation(&g, &g.targets(), 2, Order::First, &m).unwrap();
        let names: Vec<&str> = f.vars.iter().map(|v| v.name.as_str()).collect();
        assert_eq!(names, ["x_t", "x_u", "y_u_t"]);
        let y = f.y_var(u, t).unwrap();
        assert_eq!(f.vars[t].objective, 0.2);
        assert!((f.vars[y].objective - 0.028).abs() < 1e-15);
        assert_eq!(f.constraints.len(), 4);
        let kinds: Vec<RowKind> = f.constraints.iter().map(|c| c.kind).collect();
        assert_eq!(kinds, [RowKind::Budget, RowKind::LinkTail, RowKind::LinkHead, RowKind::Cap(t)]);
        assert_eq!(f.constraints[0].rhs, 2.0);
        assert_eq!(f.constraints[1].terms, vec![(y, 1.0), (u, -1.0)]);
        assert_eq!(f.constraints[2].terms, vec![(y, 1.0), (t, -1.0)]);
        assert_eq!(f.constraints[3].terms, vec![(t, 0.2), (y, f.vars[y].objective)]);
        assert_eq!(f.constraints[3].rhs, 1.0);
    }

    #[test]
    fn second_order_chain_has_one_path_variable() {
        let g = graph(&[("a", false), ("b", false), ("t", true)], &[("a", "b"), ("b", "t")]);
        let gs = vec![0.3, 0.4, 0.1];
        let m = ProductModel::<f64>::new(0.28, gs.clone()).unwrap();
        let f = build_formulation(&g, &g.targets(), 3, Order::Second, &m).unwrap();
        let z: Vec<&Variable<f64>> = f.vars.iter().filter(|v| matches!(v.kind, VarKind::Z(..))).collect();
        assert_eq!(z.len(), 1);
        assert_eq!(z[0].kind, VarKind::Z(0, 1, 2));
        assert_eq!(z[0].name, "z_a_b_t");
        assert!((z[0].objective - 0.28 * 0.28 * 0.3 * 0.4 * 0.1).abs() < 1e-16);
        // y_ab carries no weight of its own.
        assert_eq!(f.vars[f.y_var(0, 1).unwrap()].objective, 0.0);
    }

    #[test]
    fn objective_coefficients_nonnegative_and_no_phantom_edges() {
        let g = graph(
            &[("a", false), ("b", false), ("t", true), ("s", true)],
            &[("a", "b"), ("b", "t"), ("t", "s"), ("s", "t"), ("a", "s")],
        );
        let m = ProductModel::<f64>::new(0.28, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let f = build_formulation(&g, &g.targets(), 4, Order::Second, &m).unwrap();
        for v in &f.vars {
            assert!(v.objective >= 0.0);
            match v.kind {
                VarKind::Y(u, w) => assert!(g.has_edge(u, w)),
                VarKind::Z(u, w, t) => {
                    assert!(g.has_edge(u, w) && g.has_edge(w, t) && g.is_target(t) && u != t)
                }
                VarKind::X(_) => {}
            }
        }
    }

    #[test]
    fn cycle_constraints_deduplicated() {
        let g = graph(&[("s", true), ("t", true)], &[("s", "t"), ("t", "s")]);
        let m = ProductModel::<f64>::new(0.28, vec![0.1, 0.2]).unwrap();
        let mut f = build_formulation(&g, &g.targets(), 2, Order::First, &m).unwrap();
        assert!(f.add_cycle_constraint(&[0, 1]));
        assert!(!f.add_cycle_constraint(&[1, 0]));
        assert_eq!(f.cycle_constraint_count(), 1);
        let row = f.constraints.last().unwrap();
        assert_eq!((row.kind, row.rhs, row.terms.len()), (RowKind::Cycle, 1.0, 2));
    }

    #[test]
    fn unknown_target_rejected() {
        let g = graph(&[("a", true)], &[]);
        let m = ProductModel::<f64>::new(0.28, vec![0.1]).unwrap();
        assert!(build_formulation(&g, &[3], 1, Order::First, &m).is_err());
        assert!(Order::try_from(3).is_err());
    }

    #[test]
    fn names_fall_back_when_sanitizing_collides() {
        let g = graph(&[("a b", true), ("a_b", true)], &[]);
        let m = ProductModel::<f64>::new(0.28, vec![0.1, 0.2]).unwrap();
        let f = build_formulation(&g, &g.targets(), 1, Order::Zeroth, &m).unwrap();
        assert_eq!(f.vars[0].name, "x_v0");
    }
}
