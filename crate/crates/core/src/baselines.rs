//! Route-planning baselines: the mean–variance sweep and exhaustive search.

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::instances::RouteInstance;
use crate::objectives::ontime_objective;
use crate::solvers::{enumerate_paths, PathSolution, ShortestPathSolver};

/// Large tradeoff standing in for "variance only".
pub const VARIANCE_ONLY_PROXY: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicConfig {
    pub lambda_sweep: Vec<f64>,
}

impl Default for HeuristicConfig {
    /// `0`, 31 geometric values from 0.01 to 100, and [`VARIANCE_ONLY_PROXY`].
    fn default() -> Self {
        let steps = 30;
        let mut sweep = vec![0.0];
        sweep.extend((0..=steps).map(|k| 0.01 * 1e4_f64.powf(k as f64 / steps as f64)));
        sweep.push(VARIANCE_ONLY_PROXY);
        Self {
            lambda_sweep: sweep,
        }
    }
}

impl HeuristicConfig {
    pub fn new(lambda_sweep: Vec<f64>) -> Result<Self> {
        let cfg = Self { lambda_sweep };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(!self.lambda_sweep.is_empty(), || "lambda_sweep is empty".into())?;
        ensure(
            self.lambda_sweep.iter().all(|l| l.is_finite() && *l >= 0.0),
            || "lambda_sweep values must be finite and non-negative".into(),
        )?;
        ensure(self.lambda_sweep.windows(2).all(|w| w[0] <= w[1]), || {
            "lambda_sweep must be sorted".into()
        })
    }
}

/// Shortest paths under `mu + λ·sigma2` for each λ, scored by the on-time
/// probability. The first candidate reaching the best score wins.
pub fn heuristic_mean_variance(inst: &RouteInstance, cfg: &HeuristicConfig) -> Result<PathSolution> {
    cfg.validate()?;
    let solver = ShortestPathSolver::new(inst);
    let mut best: Option<(f64, PathSolution)> = None;
    for &lambda in &cfg.lambda_sweep {
        let w: Vec<f64> = inst
            .mu()
            .iter()
            .zip(inst.sigma2())
            .map(|(m, s)| m + lambda * s)
            .collect();
        let path = solver.solve_path(&w)?;
        let value = ontime_objective(&path.x, inst)?.value;
        if best.as_ref().is_none_or(|(v, _)| value > *v) {
            best = Some((value, path));
        }
    }
    Ok(best.expect("sweep is non-empty").1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub path: PathSolution,
    pub value: f64,
    /// On-time probability of every simple path, descending.
    pub values: Vec<f64>,
}

/// Best simple path by on-time probability, found by enumeration. Ties go to
/// the lexicographically first node sequence.
pub fn exact_oracle(inst: &RouteInstance) -> Result<OracleResult> {
    let paths = enumerate_paths(inst)?;
    let mut values = Vec::with_capacity(paths.len());
    let mut best = 0;
    for (i, p) in paths.iter().enumerate() {
        let v = ontime_objective(&p.x, inst)?.value;
        if v > values.get(best).copied().unwrap_or(f64::NEG_INFINITY) {
            best = i;
        }
        values.push(v);
    }
    let value = values[best];
    let path = paths.into_iter().nth(best).expect("a grid always has a path");
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(OracleResult { path, value, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{let_path, DeadlineRegime};
    use crate::objectives::normal_cdf;

    #[test]
    fn default_sweep_shape() {
        let cfg = HeuristicConfig::default();
        assert_eq!(cfg.lambda_sweep.len(), 33);
        assert_eq!(cfg.lambda_sweep[0], 0.0);
        assert!((cfg.lambda_sweep[1] - 0.01).abs() < 1e-15);
        assert!((cfg.lambda_sweep[31] - 100.0).abs() < 1e-9);
        assert_eq!(cfg.lambda_sweep[32], VARIANCE_ONLY_PROXY);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn sweep_validation() {
        assert!(HeuristicConfig::new(vec![]).is_err());
        assert!(HeuristicConfig::new(vec![1.0, 0.5]).is_err());
        assert!(HeuristicConfig::new(vec![-1.0]).is_err());
        assert!(HeuristicConfig::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn mean_only_sweep_is_let() {
        let inst = RouteInstance::generate(5, 5, DeadlineRegime::Tight, 21).unwrap();
        let cfg = HeuristicConfig::new(vec![0.0]).unwrap();
        assert_eq!(heuristic_mean_variance(&inst, &cfg).unwrap(), let_path(&inst));
    }

    #[test]
    fn two_candidate_sweep_takes_the_better() {
        let inst = RouteInstance::generate(4, 4, DeadlineRegime::Tight, 5).unwrap();
        let solver = ShortestPathSolver::new(&inst);
        let lp = let_path(&inst);
        let var_path = solver
            .solve_path(
                &inst
                    .mu()
                    .iter()
                    .zip(inst.sigma2())
                    .map(|(m, s)| m + VARIANCE_ONLY_PROXY * s)
                    .collect::<Vec<_>>(),
            )
            .unwrap();
        let f = |p: &PathSolution| ontime_objective(&p.x, &inst).unwrap().value;
        let cfg = HeuristicConfig::new(vec![0.0, VARIANCE_ONLY_PROXY]).unwrap();
        let got = heuristic_mean_variance(&inst, &cfg).unwrap();
        assert_eq!(f(&got), f(&lp).max(f(&var_path)));
    }

    #[test]
    fn oracle_on_2x2_matches_hand_values() {
        let inst = RouteInstance::new(
            2,
            2,
            vec![0.5, 0.4, 0.5, 0.7],
            vec![0.1, 0.2, 0.3, 0.1],
            0,
            3,
            1.05,
            0,
        )
        .unwrap();
        // top: edges 0, 2 → mean 1.0, var 0.4; bottom: edges 1, 3 → mean 1.1, var 0.3
        let top = normal_cdf(0.05 / 0.4f64.sqrt());
        let bottom = normal_cdf(-0.05 / 0.3f64.sqrt());
        let res = exact_oracle(&inst).unwrap();
        assert_eq!(res.values.len(), 2);
        assert!((res.value - top).abs() < 1e-15);
        assert!((res.values[1] - bottom).abs() < 1e-15);
        assert_eq!(res.path.node_seq, vec![0, 1, 3]);
    }

    #[test]
    fn heuristic_never_beats_oracle_on_3x3() {
        for seed in 0..10 {
            for regime in DeadlineRegime::ALL {
                let inst = RouteInstance::generate(3, 3, regime, seed).unwrap();
                let h = heuristic_mean_variance(&inst, &HeuristicConfig::default()).unwrap();
                h.validate(inst.graph(), inst.source(), inst.target()).unwrap();
                let fh = ontime_objective(&h.x, &inst).unwrap().value;
                let oracle = exact_oracle(&inst).unwrap();
                assert!(fh <= oracle.value);
                assert_eq!(oracle.values.len(), 12);
                assert!(oracle.values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn tight_deadline_oracle_below_half() {
        for seed in 0..5 {
            let inst = RouteInstance::generate(3, 3, DeadlineRegime::Tight, seed).unwrap();
            // every path has mean ≥ LET > T
            assert!(exact_oracle(&inst).unwrap().value < 0.5);
        }
    }

    #[test]
    fn oracle_guard() {
        let inst = RouteInstance::generate(6, 6, DeadlineRegime::Normal, 0).unwrap();
        assert!(matches!(exact_oracle(&inst), Err(crate::Error::Guard(_))));
    }
}
