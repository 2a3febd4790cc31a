//! Problem instances: stochastic route planning on grid graphs, the 2D toy
//! problem and a synthetic capacitated assignment problem.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::solvers::{PathSolution, ShortestPathSolver};

/// A 4-connected `rows × cols` grid with row-major node ids.
///
/// Undirected edges are ordered row by row: the horizontal edges of a row
/// come first, followed by the vertical edges joining it to the row below.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridGraph {
    rows: usize,
    cols: usize,
    edges: Vec<(usize, usize)>,
    // (neighbor, edge id), sorted by neighbor id
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl GridGraph {
    pub fn new(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::with_capacity(rows * cols.saturating_sub(1) + rows.saturating_sub(1) * cols);
        for r in 0..rows {
            for c in 0..cols.saturating_sub(1) {
                edges.push((r * cols + c, r * cols + c + 1));
            }
            if r + 1 < rows {
                for c in 0..cols {
                    edges.push((r * cols + c, (r + 1) * cols + c));
                }
            }
        }
        let mut adjacency = vec![Vec::new(); rows * cols];
        for (e, &(u, v)) in edges.iter().enumerate() {
            adjacency[u].push((v, e));
            adjacency[v].push((u, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Self {
            rows,
            cols,
            edges,
            adjacency,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_nodes(&self) -> usize {
        self.rows * self.cols
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges as `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Neighbors of `node` paired with the joining edge id, by increasing neighbor id.
    pub fn neighbors(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn node(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn edge_between(&self, u: usize, v: usize) -> Option<usize> {
        self.adjacency
            .get(u)?
            .iter()
            .find_map(|&(w, e)| (w == v).then_some(e))
    }

    /// Directed expansion: every undirected edge yields two arcs sharing its id.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(e, &(u, v))| [(u, v, e), (v, u, e)])
    }
}

/// Deadline relative to the least-expected-time path length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeadlineRegime {
    Loose,
    Normal,
    Tight,
}

impl DeadlineRegime {
    pub const ALL: [DeadlineRegime; 3] = [Self::Loose, Self::Normal, Self::Tight];

    pub fn multiplier(self) -> f64 {
        match self {
            Self::Loose => 1.1,
            Self::Normal => 1.0,
            Self::Tight => 0.9,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Loose => "loose",
            Self::Normal => "normal",
            Self::Tight => "tight",
        }
    }
}

impl fmt::Display for DeadlineRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DeadlineRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "loose" => Ok(Self::Loose),
            "normal" => Ok(Self::Normal),
            "tight" => Ok(Self::Tight),
            other => Err(Error::Parameter(format!("unknown deadline regime `{other}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteInstanceDoc {
    rows: usize,
    cols: usize,
    mu: Vec<f64>,
    sigma2: Vec<f64>,
    source: usize,
    target: usize,
    deadline: f64,
    seed: u64,
}

/// Stochastic shortest-path instance: a grid whose undirected edges carry
/// independent Gaussian travel times `N(mu_e, sigma2_e)`, and a deadline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RouteInstanceDoc", into = "RouteInstanceDoc")]
pub struct RouteInstance {
    graph: GridGraph,
    mu: Vec<f64>,
    sigma2: Vec<f64>,
    source: usize,
    target: usize,
    deadline: f64,
    seed: u64,
}

impl TryFrom<RouteInstanceDoc> for RouteInstance {
    type Error = Error;

    fn try_from(doc: RouteInstanceDoc) -> Result<Self> {
        RouteInstance::new(
            doc.rows,
            doc.cols,
            doc.mu,
            doc.sigma2,
            doc.source,
            doc.target,
            doc.deadline,
            doc.seed,
        )
    }
}

impl From<RouteInstance> for RouteInstanceDoc {
    fn from(inst: RouteInstance) -> Self {
        RouteInstanceDoc {
            rows: inst.graph.rows,
            cols: inst.graph.cols,
            mu: inst.mu,
            sigma2: inst.sigma2,
            source: inst.source,
            target: inst.target,
            deadline: inst.deadline,
            seed: inst.seed,
        }
    }
}

impl RouteInstance {
    /// Builds and validates an instance. `mu` and `sigma2` are indexed by
    /// undirected edge in [`GridGraph`] order.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        rows: usize,
        cols: usize,
        mu: Vec<f64>,
        sigma2: Vec<f64>,
        source: usize,
        target: usize,
        deadline: f64,
        seed: u64,
    ) -> Result<Self> {
        ensure(rows >= 1 && cols >= 1 && rows * cols >= 2, || {
            format!("grid must have at least 2 nodes, got {rows}x{cols}")
        })?;
        let graph = GridGraph::new(rows, cols);
        let m = graph.num_edges();
        ensure(mu.len() == m && sigma2.len() == m, || {
            format!(
                "expected {m} edge parameters, got mu={} sigma2={}",
                mu.len(),
                sigma2.len()
            )
        })?;
        ensure(mu.iter().all(|v| v.is_finite() && *v >= 0.0), || {
            "edge means must be finite and non-negative".into()
        })?;
        ensure(sigma2.iter().all(|v| v.is_finite() && *v > 0.0), || {
            "edge variances must be finite and positive".into()
        })?;
        let n = graph.num_nodes();
        ensure(source < n && target < n && source != target, || {
            format!("invalid source/target ({source}, {target}) for {n} nodes")
        })?;
        ensure(deadline.is_finite() && deadline > 0.0, || {
            format!("deadline must be positive, got {deadline}")
        })?;
        Ok(Self {
            graph,
            mu,
            sigma2,
            source,
            target,
            deadline,
            seed,
        })
    }

    /// Draws one instance: `mu_e ~ U(0.1, 1)`, `sigma2_e ~ U(0.1, 0.3)·(1 − mu_e)`,
    /// opposite corners as endpoints and the deadline scaled from the LET length.
    pub fn generate(rows: usize, cols: usize, regime: DeadlineRegime, seed: u64) -> Result<Self> {
        ensure(rows >= 2 && cols >= 2, || {
            format!("route grids need rows, cols >= 2, got {rows}x{cols}")
        })?;
        let graph = GridGraph::new(rows, cols);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mu = Vec::with_capacity(graph.num_edges());
        let mut sigma2 = Vec::with_capacity(graph.num_edges());
        for _ in 0..graph.num_edges() {
            let m: f64 = rng.gen_range(0.1..1.0);
            let scale: f64 = rng.gen_range(0.1..0.3);
            mu.push(m);
            sigma2.push(scale * (1.0 - m));
        }
        let target = graph.num_nodes() - 1;
        let mut inst = Self::new(rows, cols, mu, sigma2, 0, target, 1.0, seed)?;
        let let_len = inst.path_mean(&let_path(&inst).x);
        inst.deadline = regime.multiplier() * let_len;
        Ok(inst)
    }

    pub fn graph(&self) -> &GridGraph {
        &self.graph
    }

    pub fn rows(&self) -> usize {
        self.graph.rows
    }

    pub fn cols(&self) -> usize {
        self.graph.cols
    }

    pub fn num_edges(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn sigma2(&self) -> &[f64] {
        &self.sigma2
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Σ mu_e x_e`, summed in edge order.
    pub fn path_mean(&self, x: &[f64]) -> f64 {
        self.mu.iter().zip(x).map(|(m, xe)| m * xe).sum()
    }

    /// `Σ sigma2_e x_e`, summed in edge order.
    pub fn path_variance(&self, x: &[f64]) -> f64 {
        self.sigma2.iter().zip(x).map(|(s, xe)| s * xe).sum()
    }

    /// Deadline divided by the least-expected-time path length.
    pub fn deadline_ratio(&self) -> f64 {
        self.deadline / self.path_mean(&let_path(self).x)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Derives `count` per-instance seeds from a master seed.
pub fn instance_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.gen()).collect()
}

pub fn generate_route_instances(
    rows: usize,
    cols: usize,
    count: usize,
    regime: DeadlineRegime,
    seed: u64,
) -> Result<Vec<RouteInstance>> {
    ensure(rows >= 2 && cols >= 2, || {
        format!("route grids need rows, cols >= 2, got {rows}x{cols}")
    })?;
    ensure(count >= 1, || "instance count must be at least 1".into())?;
    instance_seeds(seed, count)
        .into_iter()
        .map(|s| RouteInstance::generate(rows, cols, regime, s))
        .collect()
}

/// Least-expected-time path: the shortest path under the edge means.
pub fn let_path(inst: &RouteInstance) -> PathSolution {
    ShortestPathSolver::new(inst)
        .solve_path(inst.mu())
        .expect("edge means are finite")
}

/// The 1D-parameterized problem over the triangle with vertices
/// `(0,0), (0,1), (1,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToyInstance {
    y: f64,
}

impl ToyInstance {
    pub const VERTICES: [[f64; 2]; 3] = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]];

    pub fn new(y: f64) -> Result<Self> {
        ensure((0.0..=FRAC_PI_2).contains(&y), || {
            format!("toy parameter must lie in [0, pi/2], got {y}")
        })?;
        Ok(Self { y })
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn vertices(&self) -> &'static [[f64; 2]; 3] {
        &Self::VERTICES
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssignmentInstanceDoc {
    num_items: usize,
    num_devices: usize,
    mem: Vec<f64>,
    capacity: f64,
    weights: Vec<f64>,
    seed: u64,
    #[serde(default = "yes")]
    synthetic: bool,
}

fn yes() -> bool {
    true
}

/// Synthetic capacitated assignment: every item goes to exactly one device and
/// the memory placed on a device may not exceed `capacity`.
///
/// Decision vectors are flattened item-major: `x[t * num_devices + d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssignmentInstanceDoc", into = "AssignmentInstanceDoc")]
pub struct AssignmentInstance {
    num_devices: usize,
    mem: Vec<f64>,
    capacity: f64,
    weights: Vec<f64>,
    seed: u64,
}

impl TryFrom<AssignmentInstanceDoc> for AssignmentInstance {
    type Error = Error;

    fn try_from(doc: AssignmentInstanceDoc) -> Result<Self> {
        ensure(doc.mem.len() == doc.num_items, || {
            format!("num_items = {} but {} memory entries", doc.num_items, doc.mem.len())
        })?;
        AssignmentInstance::new(doc.num_devices, doc.mem, doc.capacity, doc.weights, doc.seed)
    }
}

impl From<AssignmentInstance> for AssignmentInstanceDoc {
    fn from(inst: AssignmentInstance) -> Self {
        AssignmentInstanceDoc {
            num_items: inst.mem.len(),
            num_devices: inst.num_devices,
            mem: inst.mem,
            capacity: inst.capacity,
            weights: inst.weights,
            seed: inst.seed,
            synthetic: true,
        }
    }
}

impl AssignmentInstance {
    pub fn new(
        num_devices: usize,
        mem: Vec<f64>,
        capacity: f64,
        weights: Vec<f64>,
        seed: u64,
    ) -> Result<Self> {
        ensure(!mem.is_empty() && num_devices >= 1, || {
            "need at least one item and one device".into()
        })?;
        ensure(weights.len() == mem.len(), || {
            format!("{} weights for {} items", weights.len(), mem.len())
        })?;
        ensure(capacity.is_finite() && capacity > 0.0, || {
            format!("capacity must be positive, got {capacity}")
        })?;
        ensure(
            mem.iter().all(|m| m.is_finite() && *m > 0.0)
                && weights.iter().all(|w| w.is_finite() && *w >= 0.0),
            || "item memory must be positive and weights non-negative".into(),
        )?;
        if let Some(t) = mem.iter().position(|m| *m > capacity) {
            return Err(Error::Infeasible(format!(
                "item {t} (mem {}) exceeds device capacity {capacity}",
                mem[t]
            )));
        }
        Ok(Self {
            num_devices,
            mem,
            capacity,
            weights,
            seed,
        })
    }

    /// Draws `mem_t, weight_t ~ U(0.1, 1)` with capacity `1.2 · Σ mem / D`,
    /// redrawing (at most 100 times) until first-fit-decreasing finds a packing.
    pub fn generate(num_items: usize, num_devices: usize, seed: u64) -> Result<Self> {
        ensure(num_items >= num_devices && num_devices >= 1, || {
            format!("need items >= devices >= 1, got {num_items} items, {num_devices} devices")
        })?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let mem: Vec<f64> = (0..num_items).map(|_| rng.gen_range(0.1..1.0)).collect();
            let weights: Vec<f64> = (0..num_items).map(|_| rng.gen_range(0.1..1.0)).collect();
            let capacity = 1.2 * mem.iter().sum::<f64>() / num_devices as f64;
            let Ok(inst) = Self::new(num_devices, mem, capacity, weights, seed) else {
                continue;
            };
            if inst.first_fit_decreasing().is_some() {
                return Ok(inst);
            }
        }
        Err(Error::Infeasible(format!(
            "no packable assignment instance after 100 draws (seed {seed})"
        )))
    }

    pub fn num_items(&self) -> usize {
        self.mem.len()
    }

    pub fn num_devices(&self) -> usize {
        self.num_devices
    }

    pub fn num_vars(&self) -> usize {
        self.mem.len() * self.num_devices
    }

    pub fn mem(&self) -> &[f64] {
        &self.mem
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn var(&self, item: usize, device: usize) -> usize {
        item * self.num_devices + device
    }

    /// Packs items by decreasing memory onto the first device with room.
    pub fn first_fit_decreasing(&self) -> Option<Vec<usize>> {
        let mut order: Vec<usize> = (0..self.mem.len()).collect();
        order.sort_by(|&a, &b| self.mem[b].total_cmp(&self.mem[a]).then(a.cmp(&b)));
        let mut load = vec![0.0; self.num_devices];
        let mut assign = vec![0; self.mem.len()];
        for t in order {
            let d = (0..self.num_devices).find(|&d| load[d] + self.mem[t] <= self.capacity)?;
            load[d] += self.mem[t];
            assign[t] = d;
        }
        Some(assign)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

pub fn generate_assignment_instances(
    num_items: usize,
    num_devices: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<AssignmentInstance>> {
    ensure(count >= 1, || "instance count must be at least 1".into())?;
    instance_seeds(seed, count)
        .into_iter()
        .map(|s| AssignmentInstance::generate(num_items, num_devices, s))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_edge_order_is_row_major_horizontal_first() {
        let g = GridGraph::new(2, 3);
        assert_eq!(
            g.edges(),
            &[(0, 1), (1, 2), (0, 3), (1, 4), (2, 5), (3, 4), (4, 5)]
        );
        assert_eq!(GridGraph::new(5, 5).num_edges(), 40);
        assert_eq!(GridGraph::new(5, 5).arcs().count(), 80);
    }

    #[test]
    fn five_by_five_generation() {
        let insts = generate_route_instances(5, 5, 25, DeadlineRegime::Normal, 7).unwrap();
        assert_eq!(insts.len(), 25);
        for inst in &insts {
            assert_eq!(inst.num_edges(), 40);
            assert_eq!(inst.source(), 0);
            assert_eq!(inst.target(), 24);
            let let_len = inst.path_mean(&let_path(inst).x);
            assert_eq!(inst.deadline(), let_len);
            for (m, s) in inst.mu().iter().zip(inst.sigma2()) {
                assert!((0.1..=1.0).contains(m));
                assert!(*s >= 0.1 * (1.0 - m) && *s <= 0.3 * (1.0 - m));
            }
        }
    }

    #[test]
    fn two_by_two_deadline_is_best_corner_path() {
        for regime in DeadlineRegime::ALL {
            let inst = RouteInstance::generate(2, 2, regime, 11).unwrap();
            assert_eq!(inst.num_edges(), 4);
            let mu = inst.mu();
            // edges: 0-1 (0), 0-2 (1), 1-3 (2), 2-3 (3)
            let best = (mu[0] + mu[2]).min(mu[1] + mu[3]);
            let ratio = inst.deadline() / best;
            assert!((ratio - regime.multiplier()).abs() < 1e-12);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_route_instances(4, 3, 5, DeadlineRegime::Tight, 99).unwrap();
        let b = generate_route_instances(4, 3, 5, DeadlineRegime::Tight, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_route_instances(4, 3, 5, DeadlineRegime::Tight, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_dimensions_rejected() {
        assert!(matches!(
            generate_route_instances(1, 5, 1, DeadlineRegime::Normal, 0),
            Err(Error::Parameter(_))
        ));
        assert!(generate_route_instances(3, 3, 0, DeadlineRegime::Normal, 0).is_err());
        assert!(generate_assignment_instances(1, 2, 1, 0).is_err());
    }

    #[test]
    fn route_json_round_trip_is_bit_exact() {
        let inst = RouteInstance::generate(5, 5, DeadlineRegime::Loose, 3).unwrap();
        let text = inst.to_json().unwrap();
        let back = RouteInstance::from_json(&text).unwrap();
        assert_eq!(inst, back);
        for (a, b) in inst.mu().iter().zip(back.mu()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(inst.deadline().to_bits(), back.deadline().to_bits());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let keys: Vec<_> = value.as_object().unwrap().keys().cloned().collect();
        assert_eq!(
            keys,
            ["cols", "deadline", "mu", "rows", "seed", "sigma2", "source", "target"]
        );
    }

    #[test]
    fn route_json_rejects_broken_invariants() {
        let inst = RouteInstance::generate(2, 2, DeadlineRegime::Normal, 1).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&inst.to_json().unwrap()).unwrap();
        v["target"] = 0.into();
        assert!(serde_json::from_value::<RouteInstance>(v.clone()).is_err());
        v["target"] = 3.into();
        v["sigma2"][0] = 0.0.into();
        assert!(serde_json::from_value::<RouteInstance>(v).is_err());
    }

    #[test]
    fn regime_labels() {
        for r in DeadlineRegime::ALL {
            assert_eq!(r.label().parse::<DeadlineRegime>().unwrap(), r);
        }
        assert_eq!(DeadlineRegime::Loose.multiplier(), 1.1);
        assert_eq!(DeadlineRegime::Normal.multiplier(), 1.0);
        assert_eq!(DeadlineRegime::Tight.multiplier(), 0.9);
        assert!("strict".parse::<DeadlineRegime>().is_err());
    }

    #[test]
    fn toy_domain() {
        assert!(ToyInstance::new(-0.1).is_err());
        assert!(ToyInstance::new(FRAC_PI_2).is_ok());
        assert_eq!(
            ToyInstance::VERTICES,
            [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]]
        );
    }

    #[test]
    fn assignment_generation() {
        let one = AssignmentInstance::generate(1, 1, 5).unwrap();
        assert_eq!(one.num_vars(), 1);
        let inst = AssignmentInstance::generate(4, 2, 5).unwrap();
        let max = inst.mem().iter().cloned().fold(0.0, f64::max);
        assert!(inst.capacity() >= max);
        assert!(inst.first_fit_decreasing().is_some());
        assert_eq!(inst, AssignmentInstance::generate(4, 2, 5).unwrap());
        let back = AssignmentInstance::from_json(&inst.to_json().unwrap()).unwrap();
        assert_eq!(inst, back);
        assert!(inst.to_json().unwrap().contains("\"synthetic\": true"));
    }

    #[test]
    fn oversized_item_is_infeasible() {
        let err = AssignmentInstance::new(2, vec![0.5, 1.5], 1.0, vec![0.1, 0.1], 0).unwrap_err();
        assert!(matches!(err, Error::Infeasible(_)));
    }
}
