//! `run`: every configured method on every test instance, plus aggregate rows.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use surco_core::baselines::{exact_oracle, heuristic_mean_variance};
use surco_core::instances::{let_path, AssignmentInstance, RouteInstance, ToyInstance};
use surco_core::objectives::{
    AssignmentObjective, CountingObjective, Objective, OnTimeObjective, Sense, ToyObjective,
};
use surco_core::solvers::{
    enumerate_assignments, AssignmentSolver, CountingOracle, ShortestPathSolver, ToySolver,
};
use surco_core::surco::{
    assignment_pair_features, route_edge_features, surco_hybrid, surco_prior_infer, surco_zero,
    FeatureSpec, PriorModel,
};
use surco_core::Error as CoreError;

use crate::config::{Domain, ExperimentConfig, Method, Split};
use crate::error::{CliError, CliResult};
use crate::store::{self, InstanceSet};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub config_hash: String,
    /// `instance`, `mean` or `wins`.
    pub kind: &'static str,
    pub domain: &'static str,
    pub instance: String,
    pub method: &'static str,
    pub opponent: Option<&'static str>,
    pub regime: Option<&'static str>,
    pub value: Option<f64>,
    pub oracle_gap: Option<f64>,
    pub wall_ms: Option<f64>,
    pub solver_calls: Option<usize>,
    pub objective_calls: Option<usize>,
    pub seed: Option<u64>,
    pub wins: Option<usize>,
    pub fraction: Option<f64>,
    pub note: &'static str,
}

/// One method's result on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub value: f64,
    pub x: Vec<f64>,
    pub wall_ms: f64,
    pub solver_calls: usize,
    pub objective_calls: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub name: String,
    pub seed: u64,
    pub sense: Sense,
    pub oracle: Option<f64>,
    pub methods: Vec<MethodResult>,
}

impl InstanceResult {
    /// Distance to the optimum in the worsening direction; never negative for a correct oracle.
    pub fn gap(&self, value: f64) -> Option<f64> {
        self.oracle.map(|o| match self.sense {
            Sense::Maximize => o - value,
            Sense::Minimize => value - o,
        })
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn sorted_methods(cfg: &ExperimentConfig) -> Vec<Method> {
    let mut m = cfg.methods.clone();
    m.sort();
    m.dedup();
    m
}

fn guard_to_none<T>(r: surco_core::Result<T>) -> CliResult<Option<T>> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(CoreError::Guard(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

fn oracle_missing(name: &str) -> CliError {
    CliError::Core(CoreError::Guard(format!(
        "{name}: instance too large for the exhaustive oracle"
    )))
}

pub fn run_route(
    cfg: &ExperimentConfig,
    name: &str,
    inst: &RouteInstance,
    model: Option<&PriorModel>,
) -> CliResult<InstanceResult> {
    let t = Instant::now();
    let oracle = guard_to_none(exact_oracle(inst))?;
    let oracle_ms = elapsed_ms(t);
    let features = route_edge_features(inst);
    let mut methods = vec![];
    for method in sorted_methods(cfg) {
        let t = Instant::now();
        let solver = CountingOracle::new(ShortestPathSolver::new(inst));
        let objective = CountingObjective::new(OnTimeObjective::new(inst));
        let (x, wall_ms, solver_calls, objective_calls) = match method {
            Method::Zero => {
                let zc = cfg.zero_config(inst.seed(), Some(inst))?;
                let x = surco_zero(&solver, &objective, &zc)?.x;
                (x, elapsed_ms(t), solver.calls(), objective.calls())
            }
            Method::Prior => {
                let x = surco_prior_infer(model.expect("model loaded"), &features, &solver)?;
                (x, elapsed_ms(t), solver.calls(), objective.calls())
            }
            Method::Hybrid => {
                let zc = cfg.zero_config(inst.seed(), Some(inst))?;
                let model = model.expect("model loaded");
                let x = surco_hybrid(model, &features, &solver, &objective, &zc)?.x;
                (x, elapsed_ms(t), solver.calls(), objective.calls())
            }
            Method::Heuristic => {
                let x = heuristic_mean_variance(inst, &cfg.heuristic)?.x;
                let n = cfg.heuristic.lambda_sweep.len();
                (x, elapsed_ms(t), n, n)
            }
            Method::Oracle => {
                let o = oracle.as_ref().ok_or_else(|| oracle_missing(name))?;
                (o.path.x.clone(), oracle_ms, 0, o.values.len())
            }
            Method::Let => (let_path(inst).x, elapsed_ms(t), 1, 0),
        };
        let value = OnTimeObjective::new(inst).evaluate(&x)?.value;
        methods.push(MethodResult {
            method,
            value,
            x,
            wall_ms,
            solver_calls,
            objective_calls,
        });
    }
    Ok(InstanceResult {
        name: name.to_string(),
        seed: inst.seed(),
        sense: Sense::Maximize,
        oracle: oracle.map(|o| o.value),
        methods,
    })
}

pub fn run_assignment(
    cfg: &ExperimentConfig,
    name: &str,
    inst: &AssignmentInstance,
    model: Option<&PriorModel>,
) -> CliResult<InstanceResult> {
    let reference = AssignmentObjective::new(inst);
    let t = Instant::now();
    let oracle = match guard_to_none(enumerate_assignments(inst))? {
        Some(all) => {
            let mut best: Option<(f64, Vec<f64>)> = None;
            for sol in &all {
                let v = reference.evaluate(&sol.x)?.value;
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, sol.x.clone()));
                }
            }
            let best = best.ok_or_else(|| {
                CliError::Core(CoreError::Infeasible(format!("{name}: no feasible assignment")))
            })?;
            Some((best, all.len()))
        }
        None => None,
    };
    let oracle_ms = elapsed_ms(t);
    let features = assignment_pair_features(inst);
    let mut methods = vec![];
    for method in sorted_methods(cfg) {
        let t = Instant::now();
        let solver = CountingOracle::new(AssignmentSolver::new(inst));
        let objective = CountingObjective::new(AssignmentObjective::new(inst));
        let (x, wall_ms, solver_calls, objective_calls) = match method {
            Method::Zero => {
                let zc = cfg.zero_config(inst.seed(), None)?;
                let x = surco_zero(&solver, &objective, &zc)?.x;
                (x, elapsed_ms(t), solver.calls(), objective.calls())
            }
            Method::Prior => {
                let x = surco_prior_infer(model.expect("model loaded"), &features, &solver)?;
                (x, elapsed_ms(t), solver.calls(), objective.calls())
            }
            Method::Hybrid => {
                let zc = cfg.zero_config(inst.seed(), None)?;
                let model = model.expect("model loaded");
                let x = surco_hybrid(model, &features, &solver, &objective, &zc)?.x;
                (x, elapsed_ms(t), solver.calls(), objective.calls())
            }
            Method::Oracle => {
                let ((_, x), n) = oracle.as_ref().ok_or_else(|| oracle_missing(name))?;
                (x.clone(), oracle_ms, 0, *n)
            }
            Method::Heuristic | Method::Let => unreachable!("rejected by config validation"),
        };
        let value = reference.evaluate(&x)?.value;
        methods.push(MethodResult {
            method,
            value,
            x,
            wall_ms,
            solver_calls,
            objective_calls,
        });
    }
    Ok(InstanceResult {
        name: name.to_string(),
        seed: inst.seed(),
        sense: Sense::Minimize,
        oracle: oracle.map(|((v, _), _)| v),
        methods,
    })
}

pub fn run_toy(cfg: &ExperimentConfig, name: &str, idx: usize, inst: &ToyInstance) -> CliResult<InstanceResult> {
    let reference = ToyObjective::new(*inst);
    let mut best = (f64::NEG_INFINITY, vec![]);
    for v in ToyInstance::VERTICES {
        let f = reference.evaluate(&v)?.value;
        if f > best.0 {
            best = (f, v.to_vec());
        }
    }
    let seed = cfg.seed.wrapping_add(idx as u64);
    let mut methods = vec![];
    for method in sorted_methods(cfg) {
        let t = Instant::now();
        let solver = CountingOracle::new(ToySolver);
        let objective = CountingObjective::new(ToyObjective::new(*inst));
        let (x, solver_calls, objective_calls) = match method {
            Method::Zero => {
                let x = surco_zero(&solver, &objective, &cfg.zero_config(seed, None)?)?.x;
                (x, solver.calls(), objective.calls())
            }
            Method::Oracle => (best.1.clone(), 0, ToyInstance::VERTICES.len()),
            _ => unreachable!("rejected by config validation"),
        };
        let wall_ms = elapsed_ms(t);
        let value = reference.evaluate(&x)?.value;
        methods.push(MethodResult {
            method,
            value,
            x,
            wall_ms,
            solver_calls,
            objective_calls,
        });
    }
    Ok(InstanceResult {
        name: name.to_string(),
        seed,
        sense: Sense::Maximize,
        oracle: Some(best.0),
        methods,
    })
}

/// Loads the prior when a configured method needs one.
pub fn model_for(cfg: &ExperimentConfig) -> CliResult<Option<PriorModel>> {
    if !cfg.methods.iter().any(|m| m.needs_model()) {
        return Ok(None);
    }
    let path = cfg.model_path();
    let model = store::load_model(&path)?;
    let want = match cfg.domain {
        Domain::Route => FeatureSpec::RouteEdge,
        Domain::Assignment => FeatureSpec::AssignmentPair,
        Domain::Toy => unreachable!("rejected by config validation"),
    };
    if model.feature_spec() != want {
        return Err(CliError::Config(format!(
            "model at {} uses features {:?}, the {} domain needs {want:?}",
            path.display(),
            model.feature_spec(),
            cfg.domain.label()
        )));
    }
    Ok(Some(model))
}

/// Runs all methods on the given instances, in parallel over instances.
/// Results come back in instance order regardless of scheduling.
pub fn evaluate(
    cfg: &ExperimentConfig,
    set: &InstanceSet,
    model: Option<&PriorModel>,
) -> CliResult<Vec<InstanceResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match set {
        InstanceSet::Route(v) => v
            .par_iter()
            .map(|(n, i)| run_route(cfg, n, i, model))
            .collect(),
        InstanceSet::Assignment(v) => v
            .par_iter()
            .map(|(n, i)| run_assignment(cfg, n, i, model))
            .collect(),
        InstanceSet::Toy(v) => v
            .par_iter()
            .enumerate()
            .map(|(k, (n, i))| run_toy(cfg, n, k, i))
            .collect(),
    })
}

fn note(cfg: &ExperimentConfig, method: Method) -> &'static str {
    match cfg.domain {
        Domain::Assignment => "synthetic",
        Domain::Route if method.needs_model() => "extension",
        _ => "",
    }
}

/// Per-instance rows followed by mean rows and head-to-head win rows.
pub fn result_rows(cfg: &ExperimentConfig, results: &[InstanceResult]) -> Vec<ResultRow> {
    let hash = cfg.hash();
    let regime = (cfg.domain == Domain::Route).then(|| cfg.regime.label());
    let blank = |kind, method: Method| ResultRow {
        config_hash: hash.clone(),
        kind,
        domain: cfg.domain.label(),
        instance: String::new(),
        method: method.label(),
        opponent: None,
        regime,
        value: None,
        oracle_gap: None,
        wall_ms: None,
        solver_calls: None,
        objective_calls: None,
        seed: None,
        wins: None,
        fraction: None,
        note: note(cfg, method),
    };
    let mut rows = vec![];
    for r in results {
        for m in &r.methods {
            rows.push(ResultRow {
                instance: r.name.clone(),
                value: Some(m.value),
                oracle_gap: r.gap(m.value),
                wall_ms: Some(m.wall_ms),
                solver_calls: Some(m.solver_calls),
                objective_calls: Some(m.objective_calls),
                seed: Some(r.seed),
                ..blank("instance", m.method)
            });
        }
    }
    let methods = sorted_methods(cfg);
    let n = results.len() as f64;
    let value_of = |r: &InstanceResult, m: Method| {
        r.methods.iter().find(|x| x.method == m).map(|x| x.value).expect("every method ran")
    };
    for &m in &methods {
        let mean = results.iter().map(|r| value_of(r, m)).sum::<f64>() / n;
        let gaps: Option<Vec<f64>> = results.iter().map(|r| r.gap(value_of(r, m))).collect();
        rows.push(ResultRow {
            value: Some(mean),
            oracle_gap: gaps.map(|g| g.iter().sum::<f64>() / n),
            ..blank("mean", m)
        });
    }
    for &a in &methods {
        for &b in &methods {
            if a == b {
                continue;
            }
            let wins = results
                .iter()
                .filter(|r| r.sense.better(value_of(r, a), value_of(r, b)))
                .count();
            rows.push(ResultRow {
                opponent: Some(b.label()),
                wins: Some(wins),
                fraction: Some(wins as f64 / n),
                ..blank("wins", a)
            });
        }
    }
    rows
}

pub fn cmd_run(cfg: &ExperimentConfig) -> CliResult<String> {
    for w in store::guard_warnings(cfg) {
        eprintln!("warning: {w}");
    }
    let model = model_for(cfg)?;
    let set = store::load(cfg, Split::Test)?;
    let results = evaluate(cfg, &set, model.as_ref())?;
    let rows = result_rows(cfg, &results);
    let path = cfg.out.join("results.csv");
    crate::write_csv(&path, &rows)?;
    crate::write_resolved_config(cfg)?;
    let means: Vec<String> = rows
        .iter()
        .filter(|r| r.kind == "mean")
        .map(|r| format!("{} {:.4}", r.method, r.value.unwrap_or(f64::NAN)))
        .collect();
    Ok(format!(
        "{} instances, mean f: {}; wrote {}",
        results.len(),
        means.join(", "),
        path.display()
    ))
}
