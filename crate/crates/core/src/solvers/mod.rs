//! Exact linear solvers `argmin cᵀx` over each feasible region, plus
//! exhaustive enumerators used as test and benchmark oracles.

mod assignment;
mod flow;
mod path;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::instances::ToyInstance;

pub use assignment::{
    assignment_cost, enumerate_assignments, solve_assignment, AssignmentSolution,
    AssignmentSolver, ENUMERATION_LIMIT,
};
pub use flow::MinCostFlow;
pub use path::{
    best_path, enumerate_paths, path_cost, project_costs, solve_shortest_path, PathSolution,
    ShortestPathSolver, MAX_ENUMERATION_NODES, MIN_ARC_COST,
};

/// A linear optimizer over a fixed feasible region: `x = argmin cᵀx`.
///
/// Implementations must return a feasible vertex and be deterministic for a
/// fixed `c`.
pub trait SolverOracle {
    fn num_vars(&self) -> usize;

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>>;
}

impl<T: SolverOracle + ?Sized> SolverOracle for &T {
    fn num_vars(&self) -> usize {
        (**self).num_vars()
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        (**self).solve(c)
    }
}

/// Rejects cost vectors of the wrong length or with non-finite entries.
pub fn check_costs(c: &[f64], expected: usize) -> Result<()> {
    if c.len() != expected {
        return Err(Error::Parameter(format!(
            "cost vector has {} entries, expected {expected}",
            c.len()
        )));
    }
    if let Some(i) = c.iter().position(|v| !v.is_finite()) {
        return Err(Error::Parameter(format!("cost entry {i} is not finite: {}", c[i])));
    }
    Ok(())
}

/// Wraps an oracle and counts `solve` calls.
#[derive(Debug)]
pub struct CountingOracle<O> {
    inner: O,
    calls: AtomicUsize,
}

impl<O> CountingOracle<O> {
    pub fn new(inner: O) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: SolverOracle> SolverOracle for CountingOracle<O> {
    fn num_vars(&self) -> usize {
        self.inner.num_vars()
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.solve(c)
    }
}

/// Vertex enumeration over the toy triangle `{(0,0), (0,1), (1,0)}`.
/// Ties go to the earliest vertex in that order.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToySolver;

impl ToySolver {
    pub fn argmin(c: &[f64; 2]) -> [f64; 2] {
        let mut best = ToyInstance::VERTICES[0];
        let mut best_val = f64::INFINITY;
        for v in ToyInstance::VERTICES {
            let val = c[0] * v[0] + c[1] * v[1];
            if val < best_val {
                best = v;
                best_val = val;
            }
        }
        best
    }

    pub fn argmax(c: &[f64; 2]) -> [f64; 2] {
        Self::argmin(&[-c[0], -c[1]])
    }
}

impl SolverOracle for ToySolver {
    fn num_vars(&self) -> usize {
        2
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        check_costs(c, 2)?;
        Ok(Self::argmin(&[c[0], c[1]]).to_vec())
    }
}
