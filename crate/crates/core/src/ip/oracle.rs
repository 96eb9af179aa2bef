use super::model::{build_formulation, MilpModel, Order, RowKind, VarKind, FEASIBILITY_TOL};
use super::solver::{Solution, SolveStats, SolveStatus};
use crate::error::{Error, Result};
use crate::follow::ProductModel;
use crate::graph::SocialGraph;
use crate::scalar::Scalar;

pub const ORACLE_MAX_VERTICES: usize = 14;

/// Exhaustive search: every `x` with at most `m` ones, then every acyclic
/// set of `y` edges between chosen vertices, then every set of `z` paths
/// whose two edges are both chosen, subject to the caps.
///
/// A branch is skipped only when its value plus every remaining positive
/// coefficient falls short of the best value found.
pub fn brute_force_oracle<T: Scalar>(
    graph: &SocialGraph,
    targets: &[usize],
    budget: usize,
    order: Order,
    model: &ProductModel<T>,
) -> Result<Solution<T>> {
    if graph.len() > ORACLE_MAX_VERTICES {
        return Err(Error::GuardExceeded {
            what: "oracle vertex count",
            limit: ORACLE_MAX_VERTICES,
            actual: graph.len(),
        });
    }
    let formulation = build_formulation(graph, targets, budget, order, model)?;
    Ok(Enumerator::new(&formulation).run())
}

struct Enumerator<'m, T> {
    model: &'m MilpModel<T>,
    n: usize,
    /// Cap row per variable (targets only), as (row, coefficient).
    cap_of: Vec<Option<(usize, T)>>,
    cap_lhs: Vec<T>,
    assignment: Vec<bool>,
    candidates: Vec<usize>,
    /// `rest[i]`: sum of the objective coefficients of `candidates[i..]`.
    rest: Vec<T>,
    current: T,
    out: Vec<Vec<usize>>,
    best: Option<(Vec<bool>, T)>,
    nodes: u64,
}

impl<'m, T: Scalar> Enumerator<'m, T> {
    fn new(model: &'m MilpModel<T>) -> Self {
        let mut cap_of = vec![None; model.vars.len()];
        for (r, c) in model.constraints.iter().enumerate() {
            if let RowKind::Cap(_) = c.kind {
                for &(j, a) in &c.terms {
                    cap_of[j] = Some((r, a));
                }
            }
        }
        Enumerator {
            model,
            n: model.n_vertices,
            cap_of,
            cap_lhs: vec![T::zero(); model.constraints.len()],
            assignment: vec![false; model.vars.len()],
            candidates: Vec::new(),
            rest: Vec::new(),
            current: T::zero(),
            out: vec![Vec::new(); model.n_vertices],
            best: None,
            nodes: 0,
        }
    }

    fn run(mut self) -> Solution<T> {
        self.choose_x(0, 0);
        let (assignment, objective) = self.best.expect("all-zero assignment is feasible");
        let status = if self.model.budget == 0 {
            SolveStatus::BudgetZero
        } else {
            SolveStatus::Optimal
        };
        Solution {
            assignment,
            objective,
            status,
            stats: SolveStats {
                nodes: self.nodes,
                ..Default::default()
            },
        }
    }

    fn set(&mut self, j: usize, on: bool) -> bool {
        self.assignment[j] = on;
        if on {
            self.current += self.model.vars[j].objective;
        } else {
            self.current -= self.model.vars[j].objective;
        }
        if let Some((r, a)) = self.cap_of[j] {
            if on {
                self.cap_lhs[r] += a;
            } else {
                self.cap_lhs[r] -= a;
            }
            if on && self.cap_lhs[r] > self.model.constraints[r].rhs + T::lit(FEASIBILITY_TOL) {
                return false;
            }
        }
        true
    }

    fn choose_x(&mut self, v: usize, used: usize) {
        if v == self.n {
            self.candidates = self.model.vars[self.n..]
                .iter()
                .enumerate()
                .filter(|(_, var)| match var.kind {
                    VarKind::Y(a, b) => self.assignment[a] && self.assignment[b],
                    VarKind::Z(a, b, t) => {
                        self.assignment[a] && self.assignment[b] && self.assignment[t]
                    }
                    VarKind::X(_) => false,
                })
                .map(|(i, _)| self.n + i)
                .collect();
            self.rest = vec![T::zero(); self.candidates.len() + 1];
            for i in (0..self.candidates.len()).rev() {
                self.rest[i] = self.rest[i + 1] + self.model.vars[self.candidates[i]].objective;
            }
            self.choose_rest(0);
            return;
        }
        if used < self.model.budget {
            if self.set(v, true) {
                self.choose_x(v + 1, used + 1);
            }
            self.set(v, false);
        }
        self.choose_x(v + 1, used);
    }

    fn hopeless(&self, i: usize) -> bool {
        match &self.best {
            None => false,
            Some((_, b)) => {
                self.current + self.rest[i] < *b - T::lit(1e-12) * b.abs().max(T::one())
            }
        }
    }

    fn reaches(&self, from: usize, to: usize) -> bool {
        let mut seen = vec![false; self.n];
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            if u == to {
                return true;
            }
            if std::mem::replace(&mut seen[u], true) {
                continue;
            }
            stack.extend(self.out[u].iter().copied());
        }
        false
    }

    fn choose_rest(&mut self, i: usize) {
        self.nodes += 1;
        if self.hopeless(i) {
            return;
        }
        if i == self.candidates.len() {
            self.leaf();
            return;
        }
        let j = self.candidates[i];
        let allowed = match self.model.vars[j].kind {
            VarKind::Y(u, v) => !self.reaches(v, u),
            VarKind::Z(u, v, t) => {
                let a = self.model.y_var(u, v).expect("path edge has a y variable");
                let b = self.model.y_var(v, t).expect("path edge has a y variable");
                self.assignment[a] && self.assignment[b]
            }
            VarKind::X(_) => unreachable!("x handled separately"),
        };
        if allowed {
            let ok = self.set(j, true);
            if let VarKind::Y(u, v) = self.model.vars[j].kind {
                self.out[u].push(v);
                if ok {
                    self.choose_rest(i + 1);
                }
                self.out[u].pop();
            } else if ok {
                self.choose_rest(i + 1);
            }
            self.set(j, false);
        }
        self.choose_rest(i + 1);
    }

    fn leaf(&mut self) {
        if !self.model.constraints.iter().all(|c| c.is_satisfied(&self.assignment)) {
            return;
        }
        let obj = self.model.objective_value(&self.assignment);
        if self.best.as_ref().is_none_or(|(_, b)| obj > *b) {
            self.best = Some((self.assignment.clone(), obj));
        }
    }
}
