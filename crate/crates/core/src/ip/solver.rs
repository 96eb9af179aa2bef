//! Depth-first branch and bound over binary variables.
//!
//! Unit propagation runs on every row: a free variable whose value would
//! push the row's smallest attainable left-hand side above its right-hand
//! side is fixed the other way. The bound splits each positive objective
//! term evenly over the free `x` variables it depends on and takes the best
//! `k` of those per-vertex weights, `k` being the residual budget.

use serde::{Deserialize, Serialize};

use super::model::{MilpModel, VarKind, FEASIBILITY_TOL};
use crate::error::{Error, Result};
use crate::graph::find_cycle;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    BudgetZero,
    Infeasible,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveStats {
    pub nodes: u64,
    pub lazy_constraints: usize,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution<T = f64> {
    pub assignment: Vec<bool>,
    pub objective: T,
    pub status: SolveStatus,
    pub stats: SolveStats,
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    /// Total branch-and-bound nodes over all lazy rounds.
    pub node_limit: u64,
    pub max_rounds: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            node_limit: 200_000_000,
            max_rounds: 10_000,
        }
    }
}

pub fn solve<T: Scalar>(model: &mut MilpModel<T>) -> Result<Solution<T>> {
    solve_with(model, SolveOptions::default())
}

/// Solves, adds a constraint for a shortest cycle among the chosen `y`
/// edges, and repeats until the chosen edges are acyclic.
pub fn solve_with<T: Scalar>(model: &mut MilpModel<T>, opts: SolveOptions) -> Result<Solution<T>> {
    let mut stats = SolveStats::default();
    loop {
        let budget_left = opts.node_limit.saturating_sub(stats.nodes);
        let (assignment, nodes) = BranchAndBound::new(model, budget_left).run()?;
        stats.nodes += nodes;
        stats.rounds += 1;
        let Some(assignment) = assignment else {
            return Ok(Solution {
                objective: T::zero(),
                assignment: vec![false; model.vars.len()],
                status: SolveStatus::Infeasible,
                stats,
            });
        };
        let edges = model.chosen_edges(&assignment);
        match find_cycle(model.n_vertices, &edges) {
            None => {
                let status = if model.budget == 0 {
                    SolveStatus::BudgetZero
                } else {
                    SolveStatus::Optimal
                };
                return Ok(Solution {
                    objective: model.objective_value(&assignment),
                    assignment,
                    status,
                    stats,
                });
            }
            Some(cycle) => {
                if stats.rounds >= opts.max_rounds {
                    return Err(Error::GuardExceeded {
                        what: "lazy constraint rounds",
                        limit: opts.max_rounds,
                        actual: stats.rounds,
                    });
                }
                if !model.add_cycle_constraint(&cycle) {
                    return Err(Error::Cyclic(cycle));
                }
                stats.lazy_constraints += 1;
            }
        }
    }
}

const FREE: u8 = 2;

struct Row<T> {
    terms: Vec<(usize, T)>,
    rhs: T,
    max_abs: T,
    /// Sum of coefficients of variables fixed to one.
    fixed: T,
    /// Sum of negative coefficients of free variables.
    neg_free: T,
}

struct BranchAndBound<'m, T> {
    model: &'m MilpModel<T>,
    n: usize,
    value: Vec<u8>,
    rows: Vec<Row<T>>,
    var_rows: Vec<Vec<(usize, T)>>,
    /// Support `x` of each variable with a positive objective coefficient.
    terms: Vec<(usize, T, Vec<usize>)>,
    /// Order in which `y`/`z` variables are branched on.
    tail_order: Vec<usize>,
    trail: Vec<usize>,
    queue: Vec<usize>,
    x_ones: usize,
    best: Option<(Vec<bool>, T)>,
    nodes: u64,
    node_limit: u64,
    tol: T,
    weight: Vec<T>,
}

impl<'m, T: Scalar> BranchAndBound<'m, T> {
    fn new(model: &'m MilpModel<T>, node_limit: u64) -> Self {
        let nv = model.vars.len();
        let mut var_rows = vec![Vec::new(); nv];
        let rows = model
            .constraints
            .iter()
            .enumerate()
            .map(|(r, c)| {
                let mut neg_free = T::zero();
                let mut max_abs = T::zero();
                for &(j, a) in &c.terms {
                    var_rows[j].push((r, a));
                    if a < T::zero() {
                        neg_free += a;
                    }
                    max_abs = max_abs.max(a.abs());
                }
                Row {
                    terms: c.terms.clone(),
                    rhs: c.rhs,
                    max_abs,
                    fixed: T::zero(),
                    neg_free,
                }
            })
            .collect();
        let terms = model
            .vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.objective > T::zero())
            .map(|(j, v)| (j, v.objective, v.kind.support().as_slice().to_vec()))
            .collect();
        let mut tail_order: Vec<usize> = (model.n_vertices..nv).collect();
        tail_order.sort_by(|&a, &b| {
            model.vars[b]
                .objective
                .partial_cmp(&model.vars[a].objective)
                .expect("finite objective")
                .then(a.cmp(&b))
        });
        BranchAndBound {
            model,
            n: model.n_vertices,
            value: vec![FREE; nv],
            rows,
            var_rows,
            terms,
            tail_order,
            trail: Vec::new(),
            queue: Vec::new(),
            x_ones: 0,
            best: None,
            nodes: 0,
            node_limit,
            tol: T::lit(FEASIBILITY_TOL),
            weight: vec![T::zero(); model.n_vertices],
        }
    }

    fn run(mut self) -> Result<(Option<Vec<bool>>, u64)> {
        if self.propagate_all() {
            self.search()?;
        }
        Ok((self.best.map(|(a, _)| a), self.nodes))
    }

    fn assign(&mut self, j: usize, v: bool) {
        self.value[j] = v as u8;
        self.trail.push(j);
        if j < self.n && v {
            self.x_ones += 1;
        }
        for &(r, a) in &self.var_rows[j] {
            let row = &mut self.rows[r];
            if a < T::zero() {
                row.neg_free -= a;
            }
            if v {
                row.fixed += a;
            }
        }
        self.queue.push(j);
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let j = self.trail.pop().expect("non-empty trail");
            let v = self.value[j] == 1;
            if j < self.n && v {
                self.x_ones -= 1;
            }
            for &(r, a) in &self.var_rows[j] {
                let row = &mut self.rows[r];
                if a < T::zero() {
                    row.neg_free += a;
                }
                if v {
                    row.fixed -= a;
                }
            }
            self.value[j] = FREE;
        }
        self.queue.clear();
    }

    /// Checks one row, fixing implied variables. False on infeasibility.
    fn check_row(&mut self, r: usize) -> bool {
        let row = &self.rows[r];
        let slack = row.rhs + self.tol - (row.fixed + row.neg_free);
        if slack < T::zero() {
            return false;
        }
        if row.max_abs <= slack {
            return true;
        }
        let mut forced: Vec<(usize, bool)> = Vec::new();
        for &(j, a) in &row.terms {
            if self.value[j] != FREE {
                continue;
            }
            if a > slack {
                forced.push((j, false));
            } else if -a > slack {
                forced.push((j, true));
            }
        }
        for (j, v) in forced {
            if self.value[j] == FREE {
                self.assign(j, v);
            }
        }
        true
    }

    fn propagate(&mut self) -> bool {
        while let Some(j) = self.queue.pop() {
            for k in 0..self.var_rows[j].len() {
                let r = self.var_rows[j][k].0;
                if !self.check_row(r) {
                    self.queue.clear();
                    return false;
                }
            }
        }
        true
    }

    fn propagate_all(&mut self) -> bool {
        for r in 0..self.rows.len() {
            if !self.check_row(r) {
                return false;
            }
        }
        self.propagate()
    }

    /// Upper bound on the objective of any completion; fills `self.weight`
    /// for the free `x`.
    fn bound(&mut self) -> T {
        let mut fixed = T::zero();
        for (j, &v) in self.value.iter().enumerate() {
            if v == 1 {
                fixed += self.model.vars[j].objective;
            }
        }
        for w in self.weight.iter_mut() {
            *w = T::zero();
        }
        let mut sure = T::zero();
        let mut free_x = [0usize; 3];
        for (j, c, support) in &self.terms {
            if self.value[*j] != FREE {
                continue;
            }
            let mut k = 0;
            let mut dead = false;
            for &u in support {
                match self.value[u] {
                    0 => dead = true,
                    1 => {}
                    _ => {
                        free_x[k] = u;
                        k += 1;
                    }
                }
            }
            if dead {
                continue;
            }
            if k == 0 {
                sure += *c;
            } else {
                let share = *c / T::from_count(k);
                for &u in &free_x[..k] {
                    self.weight[u] += share;
                }
            }
        }
        let slots = self.model.budget.saturating_sub(self.x_ones);
        let mut ws: Vec<T> = (0..self.n)
            .filter(|&u| self.value[u] == FREE && self.weight[u] > T::zero())
            .map(|u| self.weight[u])
            .collect();
        let top: T = if ws.len() <= slots {
            ws.iter().copied().sum()
        } else if slots == 0 {
            T::zero()
        } else {
            ws.select_nth_unstable_by(slots - 1, |a, b| b.partial_cmp(a).expect("finite weight"));
            ws[..slots].iter().copied().sum()
        };
        fixed + sure + top
    }

    fn incumbent(&self) -> Option<T> {
        self.best.as_ref().map(|(_, v)| *v)
    }

    fn prunable(&self, bound: T) -> bool {
        match self.incumbent() {
            None => false,
            Some(inc) => bound < inc - T::lit(1e-12) * inc.abs().max(T::one()),
        }
    }

    fn search(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.node_limit {
            return Err(Error::GuardExceeded {
                what: "branch-and-bound nodes",
                limit: usize::try_from(self.node_limit).unwrap_or(usize::MAX),
                actual: usize::try_from(self.nodes).unwrap_or(usize::MAX),
            });
        }
        let bound = self.bound();
        if self.prunable(bound) {
            return Ok(());
        }
        let mark = self.trail.len();

        // Branch on the free x with the largest weight.
        let pick = (0..self.n)
            .filter(|&u| self.value[u] == FREE && self.weight[u] > T::zero())
            .max_by(|&a, &b| {
                self.weight[a]
                    .partial_cmp(&self.weight[b])
                    .expect("finite weight")
                    .then(b.cmp(&a))
            });
        if let Some(u) = pick {
            for v in [true, false] {
                self.assign(u, v);
                if self.propagate() {
                    self.search()?;
                }
                self.undo_to(mark);
            }
            return Ok(());
        }

        // Remaining free x cannot add value.
        let idle: Vec<usize> = (0..self.n).filter(|&u| self.value[u] == FREE).collect();
        if !idle.is_empty() {
            for u in idle {
                if self.value[u] == FREE {
                    self.assign(u, false);
                }
            }
            if self.propagate() {
                self.search()?;
            }
            self.undo_to(mark);
            return Ok(());
        }

        let next = self
            .tail_order
            .iter()
            .copied()
            .find(|&j| self.value[j] == FREE && self.model.vars[j].objective > T::zero());
        if let Some(j) = next {
            for v in [true, false] {
                self.assign(j, v);
                if self.propagate() {
                    self.search()?;
                }
                self.undo_to(mark);
            }
            return Ok(());
        }

        let rest: Vec<usize> = (0..self.value.len()).filter(|&j| self.value[j] == FREE).collect();
        if !rest.is_empty() {
            for j in rest {
                if self.value[j] == FREE {
                    self.assign(j, false);
                }
            }
            if self.propagate() {
                self.search()?;
            }
            self.undo_to(mark);
            return Ok(());
        }

        self.leaf();
        Ok(())
    }

    fn leaf(&mut self) {
        let assignment: Vec<bool> = self.value.iter().map(|&v| v == 1).collect();
        if !self.model.constraints.iter().all(|c| c.is_satisfied(&assignment)) {
            return;
        }
        let obj = self.model.objective_value(&assignment);
        let better = match self.incumbent() {
            None => true,
            Some(inc) => obj > inc,
        };
        if better {
            self.best = Some((assignment, obj));
        }
    }
}

/// `VarKind` of each variable set to one.
pub fn active_kinds<T: Scalar>(model: &MilpModel<T>, solution: &Solution<T>) -> Vec<VarKind> {
    model
        .vars
        .iter()
        .zip(&solution.assignment)
        .filter(|(_, &on)| on)
        .map(|(v, _)| v.kind)
        .collect()
}
