//! Blackbox differentiation of a linear solver.
//!
//! The forward pass solves with the current costs and caches `(c, x)`. The
//! backward pass solves once more with costs pushed along the incoming
//! gradient `∂loss/∂x`, giving an "improved" solution `x'`, and returns
//! `(x' − x) / λ` as the gradient with respect to `c`. A descent step on `c`
//! therefore moves the solver toward `x'`.
//!
//! The perturbation is scale-free: the incoming gradient is rescaled to unit
//! max-norm and then to the max-norm of `c`, so `λ` is a ratio between the
//! two rather than an absolute step.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solvers::{check_costs, SolverOracle};

/// Default perturbation ratio. Large values make the perturbed solve close to
/// minimizing the objective's linearization at `x`.
pub const DEFAULT_LAMBDA: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlackboxConfig {
    pub lambda: f64,
}

impl Default for BlackboxConfig {
    fn default() -> Self {
        Self {
            lambda: DEFAULT_LAMBDA,
        }
    }
}

impl BlackboxConfig {
    pub fn new(lambda: f64) -> Result<Self> {
        let cfg = Self { lambda };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambda.is_finite() && self.lambda > 0.0 {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "blackbox lambda must be positive, got {}",
                self.lambda
            )))
        }
    }
}

/// Forward-pass state kept for [`backward`].
#[derive(Debug, Clone, PartialEq)]
pub struct SolveCache {
    c: Vec<f64>,
    x: Vec<f64>,
}

impl SolveCache {
    pub fn costs(&self) -> &[f64] {
        &self.c
    }

    pub fn solution(&self) -> &[f64] {
        &self.x
    }
}

pub fn solve_and_cache<O: SolverOracle + ?Sized>(
    oracle: &O,
    c: &[f64],
) -> Result<(Vec<f64>, SolveCache)> {
    check_costs(c, oracle.num_vars())?;
    let x = oracle.solve(c)?;
    let cache = SolveCache {
        c: c.to_vec(),
        x: x.clone(),
    };
    Ok((x, cache))
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Costs handed to the second solver call.
pub fn perturbed_costs(c: &[f64], g_x: &[f64], cfg: &BlackboxConfig) -> Vec<f64> {
    let g_scale = max_abs(g_x);
    if g_scale == 0.0 {
        return c.to_vec();
    }
    let c_scale = match max_abs(c) {
        s if s > 0.0 => s,
        _ => 1.0,
    };
    let step = cfg.lambda * c_scale / g_scale;
    c.iter().zip(g_x).map(|(c, g)| c + step * g).collect()
}

/// Gradient of the loss with respect to the costs, from one extra solver call.
pub fn backward<O: SolverOracle + ?Sized>(
    oracle: &O,
    cache: &SolveCache,
    g_x: &[f64],
    cfg: &BlackboxConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    if g_x.len() != cache.x.len() {
        return Err(Error::Parameter(format!(
            "incoming gradient has {} entries, solution has {}",
            g_x.len(),
            cache.x.len()
        )));
    }
    if g_x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("incoming gradient is not finite".into()));
    }
    let improved = oracle.solve(&perturbed_costs(&cache.c, g_x, cfg))?;
    Ok(improved
        .iter()
        .zip(&cache.x)
        .map(|(xp, x)| (xp - x) / cfg.lambda)
        .collect())
}
