use serde::{Deserialize, Serialize};

use super::{check_costs, SolverOracle};
use crate::error::{Error, Result};
use crate::instances::{GridGraph, RouteInstance};

/// Arc costs below this are raised to it before solving. Surrogate costs are
/// unconstrained, but a negative undirected edge is a negative cycle.
pub const MIN_ARC_COST: f64 = 1e-6;

/// Largest grid (in nodes) that [`enumerate_paths`] accepts.
pub const MAX_ENUMERATION_NODES: usize = 25;

/// A simple source→target path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    pub node_seq: Vec<usize>,
    /// Indicator over undirected edges.
    pub x: Vec<f64>,
}

impl PathSolution {
    pub fn from_nodes(graph: &GridGraph, node_seq: Vec<usize>) -> Result<Self> {
        let mut x = vec![0.0; graph.num_edges()];
        for w in node_seq.windows(2) {
            let e = graph.edge_between(w[0], w[1]).ok_or_else(|| {
                Error::Parameter(format!("nodes {} and {} are not adjacent", w[0], w[1]))
            })?;
            x[e] = 1.0;
        }
        Ok(Self { node_seq, x })
    }

    pub fn len(&self) -> usize {
        self.node_seq.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Edge ids used by the path, increasing.
    pub fn edge_ids(&self) -> Vec<usize> {
        self.x
            .iter()
            .enumerate()
            .filter_map(|(e, &v)| (v == 1.0).then_some(e))
            .collect()
    }

    /// Checks simplicity, endpoints, adjacency and indicator consistency.
    pub fn validate(&self, graph: &GridGraph, source: usize, target: usize) -> Result<()> {
        let bad = |msg: String| Err(Error::Parameter(format!("invalid path: {msg}")));
        if self.node_seq.first() != Some(&source) || self.node_seq.last() != Some(&target) {
            return bad(format!("does not run {source} -> {target}"));
        }
        let mut seen = vec![false; graph.num_nodes()];
        for &v in &self.node_seq {
            if v >= seen.len() || seen[v] {
                return bad(format!("node {v} repeated or out of range"));
            }
            seen[v] = true;
        }
        if self.x.len() != graph.num_edges() {
            return bad(format!("indicator has {} entries", self.x.len()));
        }
        let expected = Self::from_nodes(graph, self.node_seq.clone())?;
        if expected.x != self.x {
            return bad("indicator does not match node sequence".into());
        }
        Ok(())
    }
}

/// `max(c_e, MIN_ARC_COST)` for every edge.
pub fn project_costs(c: &[f64]) -> Vec<f64> {
    c.iter().map(|&v| v.max(MIN_ARC_COST)).collect()
}

/// `Σ c_e x_e` summed in edge order.
pub fn path_cost(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(c, x)| c * x).sum()
}

/// Shortest paths on a grid instance with Bellman-Ford.
#[derive(Debug, Clone)]
pub struct ShortestPathSolver<'a> {
    graph: &'a GridGraph,
    source: usize,
    target: usize,
}

impl<'a> ShortestPathSolver<'a> {
    pub fn new(inst: &'a RouteInstance) -> Self {
        Self {
            graph: inst.graph(),
            source: inst.source(),
            target: inst.target(),
        }
    }

    pub fn with_endpoints(graph: &'a GridGraph, source: usize, target: usize) -> Self {
        Self {
            graph,
            source,
            target,
        }
    }

    /// Minimum-cost path under the projected costs. Among equal-cost paths
    /// the lexicographically smallest node sequence wins.
    pub fn solve_path(&self, c: &[f64]) -> Result<PathSolution> {
        check_costs(c, self.graph.num_edges())?;
        let w = project_costs(c);
        let dist = self.distances_to_target(&w);

        let tol = 1e-12 * dist[self.source].max(1.0);
        let mut node_seq = vec![self.source];
        let mut x = vec![0.0; self.graph.num_edges()];
        let mut u = self.source;
        while u != self.target {
            let (v, e) = self
                .graph
                .neighbors(u)
                .iter()
                .copied()
                .find(|&(v, e)| dist[v] < dist[u] && (w[e] + dist[v] - dist[u]).abs() <= tol)
                .expect("connected grid has a shortest-path successor");
            node_seq.push(v);
            x[e] = 1.0;
            u = v;
        }
        let sol = PathSolution { node_seq, x };
        debug_assert!(sol.validate(self.graph, self.source, self.target).is_ok());
        Ok(sol)
    }

    fn distances_to_target(&self, w: &[f64]) -> Vec<f64> {
        let n = self.graph.num_nodes();
        let mut dist = vec![f64::INFINITY; n];
        dist[self.target] = 0.0;
        for _ in 1..n {
            let mut changed = false;
            for (u, v, e) in self.graph.arcs() {
                let cand = w[e] + dist[v];
                if cand < dist[u] {
                    dist[u] = cand;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        dist
    }
}

impl SolverOracle for ShortestPathSolver<'_> {
    fn num_vars(&self) -> usize {
        self.graph.num_edges()
    }

    fn solve(&self, c: &[f64]) -> Result<Vec<f64>> {
        Ok(self.solve_path(c)?.x)
    }
}

pub fn solve_shortest_path(inst: &RouteInstance, c: &[f64]) -> Result<PathSolution> {
    ShortestPathSolver::new(inst).solve_path(c)
}

/// All simple source→target paths in lexicographic node-sequence order.
pub fn enumerate_paths(inst: &RouteInstance) -> Result<Vec<PathSolution>> {
    let graph = inst.graph();
    if graph.num_nodes() > MAX_ENUMERATION_NODES {
        return Err(Error::Guard(format!(
            "path enumeration limited to {MAX_ENUMERATION_NODES} nodes, grid has {}",
            graph.num_nodes()
        )));
    }
    let mut out = Vec::new();
    let mut visited = vec![false; graph.num_nodes()];
    let mut stack = vec![inst.source()];
    let mut edges = Vec::new();
    visited[inst.source()] = true;
    dfs(graph, inst.target(), &mut visited, &mut stack, &mut edges, &mut out);
    Ok(out)
}

fn dfs(
    graph: &GridGraph,
    target: usize,
    visited: &mut [bool],
    stack: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    out: &mut Vec<PathSolution>,
) {
    let u = *stack.last().unwrap();
    if u == target {
        let mut x = vec![0.0; graph.num_edges()];
        for &e in edges.iter() {
            x[e] = 1.0;
        }
        out.push(PathSolution {
            node_seq: stack.clone(),
            x,
        });
        return;
    }
    for &(v, e) in graph.neighbors(u) {
        if visited[v] {
            continue;
        }
        visited[v] = true;
        stack.push(v);
        edges.push(e);
        dfs(graph, target, visited, stack, edges, out);
        edges.pop();
        stack.pop();
        visited[v] = false;
    }
}

/// Index of the cheapest path under projected costs, first one on ties.
pub fn best_path(paths: &[PathSolution], c: &[f64]) -> Option<usize> {
    let w = project_costs(c);
    let costs: Vec<f64> = paths.iter().map(|p| path_cost(&w, &p.x)).collect();
    let min = costs.iter().cloned().fold(f64::INFINITY, f64::min);
    let tol = 1e-12 * min.abs().max(1.0);
    costs.iter().position(|&v| v <= min + tol)
}
