//! Instance files on disk: `<out>/instances/{train,test}/<name>.json`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};

use surco_core::instances::{
    generate_assignment_instances, generate_route_instances, AssignmentInstance,
    RouteInstance, ToyInstance,
};
use surco_core::solvers::MAX_ENUMERATION_NODES;
use surco_core::surco::PriorModel;

use crate::config::{Domain, ExperimentConfig, Split};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone)]
pub enum InstanceSet {
    Route(Vec<(String, RouteInstance)>),
    Assignment(Vec<(String, AssignmentInstance)>),
    Toy(Vec<(String, ToyInstance)>),
}

impl InstanceSet {
    pub fn len(&self) -> usize {
        match self {
            InstanceSet::Route(v) => v.len(),
            InstanceSet::Assignment(v) => v.len(),
            InstanceSet::Toy(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn names(&self) -> Vec<&str> {
        match self {
            InstanceSet::Route(v) => v.iter().map(|(n, _)| n.as_str()).collect(),
            InstanceSet::Assignment(v) => v.iter().map(|(n, _)| n.as_str()).collect(),
            InstanceSet::Toy(v) => v.iter().map(|(n, _)| n.as_str()).collect(),
        }
    }

    /// Serialized file contents, in name order.
    pub fn documents(&self) -> CliResult<Vec<(String, String)>> {
        let docs = match self {
            InstanceSet::Route(v) => v
                .iter()
                .map(|(n, i)| Ok((n.clone(), i.to_json()?)))
                .collect::<CliResult<_>>()?,
            InstanceSet::Assignment(v) => v
                .iter()
                .map(|(n, i)| Ok((n.clone(), i.to_json()?)))
                .collect::<CliResult<_>>()?,
            InstanceSet::Toy(v) => v
                .iter()
                .map(|(n, i)| Ok((n.clone(), serde_json::to_string(i).expect("toy serializes"))))
                .collect::<CliResult<_>>()?,
        };
        Ok(docs)
    }
}

/// Number of instances `split` holds for this config. Toy has no training split.
pub fn split_count(cfg: &ExperimentConfig, split: Split) -> usize {
    match (cfg.domain, split) {
        (Domain::Toy, Split::Train) => 0,
        (Domain::Toy, Split::Test) => toy_grid(cfg.toy_points).len(),
        (_, Split::Train) => cfg.train_count,
        (_, Split::Test) => cfg.test_count,
    }
}

pub fn instance_name(cfg: &ExperimentConfig, idx: usize) -> String {
    match cfg.domain {
        Domain::Route => format!("route-{}-{idx:03}", cfg.regime.label()),
        Domain::Assignment => format!("assignment-{idx:03}"),
        Domain::Toy => format!("toy-{idx:03}"),
    }
}

/// `n` evenly spaced points of `[0, π/2]` with the midpoint `π/4` removed.
pub fn toy_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| FRAC_PI_2 * (i as f64 / (n - 1) as f64))
        .filter(|y| *y != FRAC_PI_4)
        .collect()
}

/// Deterministically builds the instances of `split` from the config.
pub fn build(cfg: &ExperimentConfig, split: Split) -> CliResult<InstanceSet> {
    let count = split_count(cfg, split);
    let seed = match split {
        Split::Train => cfg.train_seed(),
        Split::Test => cfg.seed,
    };
    let names = (0..count).map(|i| instance_name(cfg, i));
    Ok(match cfg.domain {
        Domain::Route => {
            let insts = if count == 0 {
                vec![]
            } else {
                generate_route_instances(cfg.rows, cfg.cols, count, cfg.regime, seed)?
            };
            InstanceSet::Route(names.zip(insts).collect())
        }
        Domain::Assignment => {
            let insts = if count == 0 {
                vec![]
            } else {
                generate_assignment_instances(cfg.items, cfg.devices, count, seed)?
            };
            InstanceSet::Assignment(names.zip(insts).collect())
        }
        Domain::Toy => {
            let insts = toy_grid(cfg.toy_points)
                .into_iter()
                .map(ToyInstance::new)
                .collect::<surco_core::Result<Vec<_>>>()?;
            InstanceSet::Toy(names.zip(insts).collect())
        }
    })
}

/// Warnings about later steps that the config is known to trip.
pub fn guard_warnings(cfg: &ExperimentConfig) -> Vec<String> {
    let mut out = vec![];
    if cfg.domain == Domain::Route && cfg.rows * cfg.cols > MAX_ENUMERATION_NODES {
        out.push(format!(
            "{}x{} grid exceeds the {MAX_ENUMERATION_NODES}-node enumeration guard: \
             the oracle method will fail and oracle gaps will be left empty",
            cfg.rows, cfg.cols
        ));
    }
    if cfg.domain == Domain::Assignment {
        let space = (cfg.devices as f64).powi(cfg.items as i32);
        if space > surco_core::solvers::ENUMERATION_LIMIT as f64 {
            out.push(format!(
                "{} items on {} devices exceed the assignment enumeration limit: \
                 the oracle method will fail and oracle gaps will be left empty",
                cfg.items, cfg.devices
            ));
        }
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn file_path(cfg: &ExperimentConfig, split: Split, name: &str) -> PathBuf {
    cfg.instance_dir(split).join(format!("{name}.json"))
}

/// Loads the instances `split` should hold, by name.
pub fn load(cfg: &ExperimentConfig, split: Split) -> CliResult<InstanceSet> {
    let count = split_count(cfg, split);
    let dir = cfg.instance_dir(split);
    let missing = || CliError::MissingInstances {
        what: format!("{} {}", cfg.domain.label(), split.label()),
        dir: dir.clone(),
    };
    if count == 0 {
        return Err(missing());
    }
    let mut texts = Vec::with_capacity(count);
    for i in 0..count {
        let name = instance_name(cfg, i);
        let path = file_path(cfg, split, &name);
        match fs::read_to_string(&path) {
            Ok(t) => texts.push((name, path, t)),
            Err(e) if e.kind() == ErrorKind::NotFound => return Err(missing()),
            Err(e) => return Err(CliError::io(&path, e)),
        }
    }
    let data_err = |path: &Path, e: &dyn std::fmt::Display| CliError::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    Ok(match cfg.domain {
        Domain::Route => InstanceSet::Route(
            texts
                .into_iter()
                .map(|(n, p, t)| RouteInstance::from_json(&t).map(|i| (n, i)).map_err(|e| data_err(&p, &e)))
                .collect::<CliResult<_>>()?,
        ),
        Domain::Assignment => InstanceSet::Assignment(
            texts
                .into_iter()
                .map(|(n, p, t)| {
                    AssignmentInstance::from_json(&t).map(|i| (n, i)).map_err(|e| data_err(&p, &e))
                })
                .collect::<CliResult<_>>()?,
        ),
        Domain::Toy => InstanceSet::Toy(
            texts
                .into_iter()
                .map(|(n, p, t)| {
                    let raw: ToyInstance = serde_json::from_str(&t).map_err(|e| data_err(&p, &e))?;
                    // re-check the parameter range, which deserialization bypasses
                    ToyInstance::new(raw.y()).map(|i| (n, i)).map_err(|e| data_err(&p, &e))
                })
                .collect::<CliResult<_>>()?,
        ),
    })
}

pub fn load_model(path: &Path) -> CliResult<PriorModel> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == ErrorKind::NotFound => {
            return Err(CliError::MissingModel(path.to_path_buf()))
        }
        Err(e) => return Err(CliError::io(path, e)),
    };
    PriorModel::from_json(&text).map_err(|e| CliError::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_grid_skips_the_midpoint_only_when_hit() {
        assert_eq!(toy_grid(50).len(), 50);
        assert_eq!(toy_grid(3).len(), 2);
        assert_eq!(toy_grid(3), vec![0.0, FRAC_PI_2]);
    }

    #[test]
    fn names_are_zero_padded() {
        let cfg = ExperimentConfig::default();
        assert_eq!(instance_name(&cfg, 7), "route-normal-007");
    }
}
