//! Experiment harness: instance generation, method comparison, prior
//! training and the toy-map theory tables, all driven by one JSON config.

pub mod config;
pub mod error;
pub mod run;
pub mod store;
pub mod theory;

use std::path::Path;

use serde::Serialize;
use surco_core::instances::{AssignmentInstance, RouteInstance};
use surco_core::objectives::{AssignmentObjective, Objective, OnTimeObjective};
use surco_core::solvers::{AssignmentSolver, ShortestPathSolver, SolverOracle};
use surco_core::surco::{
    assignment_pair_features, route_edge_features, surco_prior_train, FeatureSpec, PriorProblem,
};

pub use config::{ExperimentConfig, Overrides};
pub use error::{CliError, CliResult};
pub use run::cmd_run;
pub use theory::cmd_theory;

use config::{Domain, Split};
use store::InstanceSet;

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::io(path, e.into_error()))?;
    store::write_file(path, &String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_resolved_config(cfg: &ExperimentConfig) -> CliResult<()> {
    store::write_file(&cfg.out.join("config.resolved.json"), &cfg.to_pretty_json())
}

#[derive(Serialize)]
struct Manifest<'a> {
    config_hash: String,
    domain: &'static str,
    train: Vec<&'a str>,
    test: Vec<&'a str>,
    warnings: Vec<String>,
}

pub fn cmd_generate(cfg: &ExperimentConfig) -> CliResult<String> {
    let warnings = store::guard_warnings(cfg);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let train = store::build(cfg, Split::Train)?;
    let test = store::build(cfg, Split::Test)?;
    for (split, set) in [(Split::Train, &train), (Split::Test, &test)] {
        for (name, doc) in set.documents()? {
            store::write_file(&store::file_path(cfg, split, &name), &doc)?;
        }
    }
    let manifest = Manifest {
        config_hash: cfg.hash(),
        domain: cfg.domain.label(),
        train: train.names(),
        test: test.names(),
        warnings,
    };
    let path = cfg.out.join("instances").join("manifest.json");
    store::write_file(&path, &serde_json::to_string_pretty(&manifest).expect("manifest serializes"))?;
    write_resolved_config(cfg)?;
    Ok(format!(
        "wrote {} train and {} test {} instances under {}",
        train.len(),
        test.len(),
        cfg.domain.label(),
        cfg.out.join("instances").display()
    ))
}

#[derive(Serialize)]
struct EpochRow {
    config_hash: String,
    epoch: usize,
    mean_value: f64,
}

fn train_on<S: SolverOracle, F: Objective>(
    cfg: &ExperimentConfig,
    spec: FeatureSpec,
    parts: &[(Vec<Vec<f64>>, S, F)],
) -> CliResult<surco_core::surco::PriorOutcome> {
    let problems: Vec<PriorProblem> = parts
        .iter()
        .map(|(features, oracle, objective)| PriorProblem {
            features: features.clone(),
            oracle,
            objective,
        })
        .collect();
    Ok(surco_prior_train(&problems, spec, &cfg.prior_config())?)
}

pub fn cmd_train_prior(cfg: &ExperimentConfig) -> CliResult<String> {
    if cfg.domain == Domain::Toy {
        return Err(CliError::Config("the toy domain has no training distribution".into()));
    }
    if cfg.train_count == 0 {
        return Err(CliError::Config("train_count must be at least 1 to train a prior".into()));
    }
    let outcome = match store::load(cfg, Split::Train)? {
        InstanceSet::Route(v) => {
            let parts: Vec<(Vec<Vec<f64>>, ShortestPathSolver, OnTimeObjective)> = v
                .iter()
                .map(|(_, i): &(String, RouteInstance)| {
                    (route_edge_features(i), ShortestPathSolver::new(i), OnTimeObjective::new(i))
                })
                .collect();
            train_on(cfg, FeatureSpec::RouteEdge, &parts)?
        }
        InstanceSet::Assignment(v) => {
            let parts: Vec<(Vec<Vec<f64>>, AssignmentSolver, AssignmentObjective)> = v
                .iter()
                .map(|(_, i): &(String, AssignmentInstance)| {
                    (
                        assignment_pair_features(i),
                        AssignmentSolver::new(i),
                        AssignmentObjective::new(i),
                    )
                })
                .collect();
            train_on(cfg, FeatureSpec::AssignmentPair, &parts)?
        }
        InstanceSet::Toy(_) => unreachable!("toy handled above"),
    };
    let path = cfg.model_path();
    store::write_file(&path, &outcome.model.to_json()?)?;
    let hash = cfg.hash();
    let log: Vec<EpochRow> = outcome
        .epoch_values
        .iter()
        .enumerate()
        .map(|(epoch, &mean_value)| EpochRow {
            config_hash: hash.clone(),
            epoch,
            mean_value,
        })
        .collect();
    write_csv(&cfg.out.join("train_log.csv"), &log)?;
    write_resolved_config(cfg)?;
    let first = outcome.epoch_values.first().copied().unwrap_or(f64::NAN);
    let last = outcome.epoch_values.last().copied().unwrap_or(f64::NAN);
    Ok(format!(
        "trained on {} instances, mean f {first:.4} -> {last:.4}; wrote {}",
        cfg.train_count,
        path.display()
    ))
}

/// Checks the config and, when present, that instance files and the model
/// agree with it.
pub fn cmd_validate(cfg: &ExperimentConfig) -> CliResult<String> {
    let mut lines = vec![format!("config ok (hash {})", cfg.hash())];
    for w in store::guard_warnings(cfg) {
        lines.push(format!("warning: {w}"));
    }
    for split in [Split::Train, Split::Test] {
        if store::split_count(cfg, split) == 0 {
            continue;
        }
        match store::load(cfg, split) {
            Ok(_) => {
                let expected = store::build(cfg, split)?.documents()?;
                for (name, doc) in expected {
                    let path = store::file_path(cfg, split, &name);
                    let found = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
                    if found != doc {
                        return Err(CliError::Data {
                            path,
                            message: "differs from the instance this config generates".into(),
                        });
                    }
                }
                lines.push(format!("{} instances match the config", split.label()));
            }
            Err(CliError::MissingInstances { .. }) => {
                lines.push(format!("{} instances not generated yet", split.label()));
            }
            Err(e) => return Err(e),
        }
    }
    if cfg.methods.iter().any(|m| m.needs_model()) {
        match run::model_for(cfg) {
            Ok(_) => lines.push("prior model ok".into()),
            Err(CliError::MissingModel(p)) => {
                lines.push(format!("prior model not trained yet ({})", p.display()))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(lines.join("\n"))
}
