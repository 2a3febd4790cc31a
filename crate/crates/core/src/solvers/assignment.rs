use serde::{Deserialize, Serialize};

use super::{check_costs, MinCostFlow, SolverOracle};
use crate::error::{Error, Result};
use crate::instances::AssignmentInstance;

/// Largest number of raw assignments (`D^T`) that [`enumerate_assignments`] walks.
pub const ENUMERATION_LIMIT: u64 = 1_000_000;

/// Item → device map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSolution {
    pub assign: Vec<usize>,
    /// Item-major indicator `x[t * D + d]`.
    pub x: Vec<f64>,
}

impl AssignmentSolution {
    pub fn from_assign(inst: &AssignmentInstance, assign: Vec<usize>) -> Self {
        let mut x = vec![0.0; inst.num_vars()];
        for (t, &d) in assign.iter().enumerate() {
            x[inst.var(t, d)] = 1.0;
        }
        Self { assign, x }
    }

    pub fn loads(&self, inst: &AssignmentInstance) -> Vec<f64> {
        let mut load = vec![0.0; inst.num_devices()];
        for (t, &d) in self.assign.iter().enumerate() {
            load[d] += inst.mem()[t];
        }
        load
    }

    pub fn validate(&self, inst: &AssignmentInstance) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(format!("invalid assignment: {msg}")));
        if self.assign.len() != inst.num_items() || self.x.len() != inst.num_vars() {
            return bad("dimension mismatch".into());
        }
        if self.assign.iter().any(|&d| d >= inst.num_devices()) {
            return bad("device id out of range".into());
        }
        if Self::from_assign(inst, self.assign.clone()).x != self.x {
            return bad("indicator does not match the item map".into());
        }
        if let Some(d) = self
            .loads(inst)
            .iter()
            .position(|&l| !fits(l, inst.capacity()))
        {
            return bad(format!("device {d} over capacity"));
        }
        Ok(())
    }
}

fn fits(load: f64, capacity: f64) -> bool {
    load <= capacity * (1.0 + 1e-12)
}

/// `Σ_t c[t, assign[t]]`, summed in item order.
pub fn assignment_cost(inst: &AssignmentInstance, c: &[f64], assign: &[usize]) -> f64 {
    assign
        .iter()
        .enumerate()
        .fold(0.0, |acc, (t, &d)| acc + c[inst.var(t, d)])
}

/// Exact branch-and-bound solver. Items are branched in order, devices in
/// increasing id, and each node is bounded by the min-cost-flow (transportation)
/// relaxation of the remaining items: memory is treated as divisible flow
/// priced at `c[t,d] / mem_t` per unit. Ties resolve to the lexicographically
/// smallest item → device map.
#[derive(Debug, Clone, Copy)]
pub struct AssignmentSolver<'a> {
    inst: &'a AssignmentInstance,
}

impl<'a> AssignmentSolver<'a> {
    pub fn new(inst: &'a AssignmentInstance) -> Self {
        Self { inst }
    }

    pub fn solve_assignment(&self, c: &[f64]) -> Result<AssignmentSolution> {
        check_costs(c, self.inst.num_vars())?;
        let scale = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs())) * self.inst.num_items() as f64;
        let mut search = Search {
            inst: self.inst,
            c,
            load: vec![0.0; self.inst.num_devices()],
            assign: Vec::with_capacity(self.inst.num_items()),
            best: None,
            best_cost: f64::INFINITY,
            improve_tol: 1e-12 * scale,
            prune_slack: 1e-9 * scale,
        };
        search.branch(0.0);
        let assign = search.best.ok_or_else(|| {
            Error::Infeasible("no assignment satisfies the device capacities".into())
        })?;
        let sol = AssignmentSolution::from_assign(self.inst, assign);
        debug_assert!(sol.validate(self.inst).is_ok());
        Ok(sol)
    }
}

struct Search<'a> {
    inst: &'a AssignmentInstance,
    c: &'a [f64],
    load: Vec<f64>,
    assign: Vec<usize>,
    best: Option<Vec<usize>>,
    best_cost: f64,
    improve_tol: f64,
    prune_slack: f64,
}

impl Search<'_> {
    fn branch(&mut self, partial: f64) {
        let t = self.assign.len();
        if t == self.inst.num_items() {
            if partial < self.best_cost - self.improve_tol {
                self.best_cost = partial;
                self.best = Some(self.assign.clone());
            }
            return;
        }
        match self.relaxation(t) {
            None => return,
            Some(bound) if partial + bound > self.best_cost + self.prune_slack => return,
            _ => {}
        }
        let mem = self.inst.mem()[t];
        for d in 0..self.inst.num_devices() {
            if !fits(self.load[d] + mem, self.inst.capacity()) {
                continue;
            }
            self.load[d] += mem;
            self.assign.push(d);
            self.branch(partial + self.c[self.inst.var(t, d)]);
            self.assign.pop();
            self.load[d] -= mem;
        }
    }

    /// Lower bound on the cost of placing items `first..` given current loads.
    fn relaxation(&self, first: usize) -> Option<f64> {
        let inst = self.inst;
        let items = inst.num_items() - first;
        let devices = inst.num_devices();
        let demand: f64 = inst.mem()[first..].iter().sum();
        let room: f64 = self
            .load
            .iter()
            .map(|l| (inst.capacity() - l).max(0.0))
            .sum();
        if demand > room * (1.0 + 1e-12) + 1e-12 {
            return None;
        }
        let source = 0;
        let sink = 1 + items + devices;
        let mut net = MinCostFlow::new(sink + 1);
        for (i, t) in (first..inst.num_items()).enumerate() {
            let mem = inst.mem()[t];
            net.add_edge(source, 1 + i, mem, 0.0);
            for d in 0..devices {
                net.add_edge(1 + i, 1 + items + d, mem, self.c[inst.var(t, d)] / mem);
            }
        }
        for d in 0..devices {
            let room = (inst.capacity() * (1.0 + 1e-12) - self.load[d]).max(0.0);
            net.add_edge(1 + items + d, sink, room, 0.0);
        }
        net.solve(source, sink, demand)
    }
}

impl SolverOracle for AssignmentSolver<'_> {
    fn num_vars(&self) -> usize {
        self.inst.num_vars()
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_assignment(c)?.x)
    }
}

pub fn solve_assignment(inst: &AssignmentInstance, c: &[f64]) -> Result<AssignmentSolution> {
    AssignmentSolver::new(inst).solve_assignment(c)
}

/// Every capacity-feasible assignment, lexicographic in the item → device map.
pub fn enumerate_assignments(inst: &AssignmentInstance) -> Result<Vec<AssignmentSolution>> {
    let d = inst.num_devices() as u64;
    let total = (0..inst.num_items()).try_fold(1u64, |acc, _| {
        acc.checked_mul(d).filter(|&v| v <= ENUMERATION_LIMIT)
    });
    let Some(total) = total else {
        return Err(Error::Guard(format!(
            "{}^{} assignments exceed the enumeration limit of {ENUMERATION_LIMIT}",
            inst.num_devices(),
            inst.num_items()
        )));
    };
    let mut out = Vec::new();
    let mut assign = vec![0usize; inst.num_items()];
    for _ in 0..total {
        let sol = AssignmentSolution::from_assign(inst, assign.clone());
        if sol.loads(inst).iter().all(|&l| fits(l, inst.capacity())) {
            out.push(sol);
        }
        // odometer, last item least significant
        for slot in assign.iter_mut().rev() {
            *slot += 1;
            if *slot < inst.num_devices() {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}
