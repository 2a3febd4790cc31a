//! Browser bindings for the demo page: a route-planning comparison, the toy
//! triangle problem, and the Lipschitz scan of its two solution maps.
//!
//! Each export returns a JSON string so the page needs no generated types.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;
use surco_core::baselines::{exact_oracle, heuristic_mean_variance, HeuristicConfig};
use surco_core::instances::{let_path, DeadlineRegime, RouteInstance, ToyInstance};
use surco_core::objectives::{ontime_objective, toy_objective, OnTimeObjective, ToyObjective};
use surco_core::solvers::{ShortestPathSolver, ToySolver, MAX_ENUMERATION_NODES};
use surco_core::surco::{surco_zero, CostInit, ZeroConfig};
use surco_core::theory::{lipschitz_scan, toy_direct_map, toy_surrogate_map, BoxDomain, LipschitzReport};
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub method: &'static str,
    pub value: f64,
    /// Indices into `edges` of the chosen path.
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteReport {
    pub rows: usize,
    pub cols: usize,
    pub edges: Vec<(usize, usize)>,
    pub mu: Vec<f64>,
    pub sigma2: Vec<f64>,
    pub source: usize,
    pub target: usize,
    pub deadline: f64,
    pub paths: Vec<PathReport>,
    /// Best on-time probability seen after each SurCo-zero step.
    pub trace: Vec<f64>,
}

fn selected(x: &[f64]) -> Vec<usize> {
    x.iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.5)
        .map(|(i, _)| i)
        .collect()
}

/// Generates one grid instance and compares SurCo-zero with the LET path,
/// the mean–variance sweep and, on small grids, exhaustive search.
pub fn route_report(
    rows: usize,
    cols: usize,
    regime: &str,
    seed: u64,
    max_steps: usize,
) -> surco_core::Result<RouteReport> {
    let regime: DeadlineRegime = regime.parse()?;
    let inst = RouteInstance::generate(rows, cols, regime, seed)?;
    let path = |method, x: Vec<f64>| -> surco_core::Result<PathReport> {
        Ok(PathReport {
            method,
            value: ontime_objective(&x, &inst)?.value,
            edges: selected(&x),
        })
    };
    let cfg = ZeroConfig {
        max_steps,
        patience: max_steps.min(ZeroConfig::default().patience),
        seed,
        ..ZeroConfig::default()
    };
    let zero = surco_zero(&ShortestPathSolver::new(&inst), &OnTimeObjective::new(&inst), &cfg)?;
    let mut paths = vec![
        path("surco-zero", zero.x)?,
        path("heuristic", heuristic_mean_variance(&inst, &HeuristicConfig::default())?.x)?,
        path("let", let_path(&inst).x)?,
    ];
    if rows * cols <= MAX_ENUMERATION_NODES {
        paths.push(path("oracle", exact_oracle(&inst)?.path.x)?);
    }
    Ok(RouteReport {
        rows,
        cols,
        edges: inst.graph().edges().to_vec(),
        mu: inst.mu().to_vec(),
        sigma2: inst.sigma2().to_vec(),
        source: inst.source(),
        target: inst.target(),
        deadline: inst.deadline(),
        paths,
        trace: zero.record.steps.iter().map(|s| s.best_value).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ToyReport {
    pub y: f64,
    /// `f` at `(0,0)`, `(0,1)`, `(1,0)`.
    pub vertex_values: [f64; 3],
    pub best_vertex: [f64; 2],
    /// Vertex picked by the solver under costs `(cos y, sin y)`.
    pub surrogate_vertex: [f64; 2],
    pub zero_vertex: Vec<f64>,
    pub zero_value: f64,
    pub zero_costs: Vec<f64>,
    pub steps: usize,
}

pub fn toy_report(y: f64, seed: u64) -> surco_core::Result<ToyReport> {
    let inst = ToyInstance::new(y)?;
    let mut vertex_values = [0.0; 3];
    let mut best = 0;
    for (k, v) in ToyInstance::VERTICES.iter().enumerate() {
        vertex_values[k] = toy_objective(v, &inst)?.value;
        if vertex_values[k] > vertex_values[best] {
            best = k;
        }
    }
    let cfg = ZeroConfig {
        seed,
        init: CostInit::Uniform { low: -1.0, high: 0.0 },
        ..ZeroConfig::default()
    };
    let out = surco_zero(&ToySolver, &ToyObjective::new(inst), &cfg)?;
    Ok(ToyReport {
        y,
        vertex_values,
        best_vertex: ToyInstance::VERTICES[best],
        surrogate_vertex: ToySolver::argmax(&[y.cos(), y.sin()]),
        zero_vertex: out.x,
        zero_value: out.value,
        zero_costs: out.costs,
        steps: out.record.steps.len(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub direct: Vec<LipschitzReport>,
    pub surrogate: Vec<LipschitzReport>,
}

pub fn scan_report(spacings: &[f64]) -> surco_core::Result<ScanReport> {
    let domain = BoxDomain::interval(0.0, FRAC_PI_2)?;
    Ok(ScanReport {
        direct: lipschitz_scan("direct", toy_direct_map, &domain, spacings, 0.1)?,
        surrogate: lipschitz_scan("surrogate", toy_surrogate_map, &domain, spacings, 0.1)?,
    })
}

fn to_js<T: Serialize>(r: surco_core::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = routeDemo)]
pub fn route_demo(rows: usize, cols: usize, regime: &str, seed: u64, max_steps: usize) -> Result<String, JsError> {
    to_js(route_report(rows, cols, regime, seed, max_steps))
}

#[wasm_bindgen(js_name = toyDemo)]
pub fn toy_demo(y: f64, seed: u64) -> Result<String, JsError> {
    to_js(toy_report(y, seed))
}

#[wasm_bindgen(js_name = lipschitzDemo)]
pub fn lipschitz_demo(spacings: Vec<f64>) -> Result<String, JsError> {
    to_js(scan_report(&spacings))
}
