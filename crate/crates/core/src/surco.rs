//! Surrogate-cost optimizers.
//!
//! * [`surco_zero`] optimizes the cost vector of one instance directly.
//! * [`surco_prior_train`] fits a network that predicts costs from instance
//!   features over a training set; [`surco_prior_infer`] applies it with a
//!   single solver call.
//! * [`surco_hybrid`] starts [`surco_zero`] from the network's prediction.
//!
//! The loops return the best solution seen, not the last iterate: the loss as
//! a function of `c` is piecewise constant and the iterates are not monotone.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diffsolver::{backward, solve_and_cache, BlackboxConfig};
use crate::error::{ensure, Error, Result};
use crate::instances::{AssignmentInstance, RouteInstance};
use crate::nn::{Adam, Mlp};
use crate::objectives::{Objective, Sense};
use crate::solvers::SolverOracle;

/// Starting point for the cost vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostInit {
    /// Independent `U(low, high)` draws per coordinate.
    Uniform { low: f64, high: f64 },
    Fixed(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroConfig {
    pub alpha: f64,
    pub max_steps: usize,
    pub patience: usize,
    pub init: CostInit,
    pub seed: u64,
    pub blackbox: BlackboxConfig,
}

impl Default for ZeroConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            max_steps: 200,
            patience: 50,
            init: CostInit::Uniform {
                low: 0.1,
                high: 1.0,
            },
            seed: 0,
            blackbox: BlackboxConfig::default(),
        }
    }
}

impl ZeroConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.alpha.is_finite() && self.alpha > 0.0, || {
            format!("alpha must be positive, got {}", self.alpha)
        })?;
        ensure(self.max_steps >= 1, || "max_steps must be at least 1".into())?;
        ensure(self.patience <= self.max_steps, || {
            format!(
                "patience {} exceeds max_steps {}",
                self.patience, self.max_steps
            )
        })?;
        if let CostInit::Uniform { low, high } = self.init {
            ensure(low.is_finite() && high.is_finite() && low < high, || {
                format!("empty init range [{low}, {high})")
            })?;
        }
        self.blackbox.validate()
    }

    fn initial_costs(&self, dim: usize) -> Result<Vec<f64>> {
        match &self.init {
            CostInit::Uniform { low, high } => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                Ok((0..dim).map(|_| rng.gen_range(*low..*high)).collect())
            }
            CostInit::Fixed(c) => {
                ensure(c.len() == dim, || {
                    format!("initial costs have {} entries, expected {dim}", c.len())
                })?;
                Ok(c.clone())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub instance: usize,
    /// Objective value of this step's solution, in its natural orientation.
    pub value: f64,
    /// Best value so far, including this step.
    pub best_value: f64,
    pub cost_norm: f64,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestRecord {
    pub instance: usize,
    pub step: usize,
    pub value: f64,
    pub x: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainRecord {
    pub steps: Vec<StepRecord>,
    pub best: Vec<BestRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroOutcome {
    /// Best solution seen.
    pub x: Vec<f64>,
    pub value: f64,
    /// Costs that produced `x`.
    pub costs: Vec<f64>,
    pub record: TrainRecord,
}

/// Milliseconds since an arbitrary origin; zero where no clock is available.
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_ms(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        {
            self.start.elapsed().as_secs_f64() * 1e3
        }
        #[cfg(target_arch = "wasm32")]
        {
            0.0
        }
    }
}

fn check_dims<O, F>(oracle: &O, objective: &F) -> Result<()>
where
    O: SolverOracle + ?Sized,
    F: Objective + ?Sized,
{
    ensure(oracle.num_vars() == objective.dim(), || {
        format!(
            "solver has {} variables but objective expects {}",
            oracle.num_vars(),
            objective.dim()
        )
    })
}

/// Per-instance surrogate-cost optimization with Adam on `c`.
///
/// Each step solves, evaluates the objective, and (unless it is the last
/// step) takes one blackbox gradient step. Stops after `max_steps`
/// evaluations or `patience` evaluations without improvement.
pub fn surco_zero<O, F>(oracle: &O, objective: &F, cfg: &ZeroConfig) -> Result<ZeroOutcome>
where
    O: SolverOracle + ?Sized,
    F: Objective + ?Sized,
{
    cfg.validate()?;
    check_dims(oracle, objective)?;
    let c0 = cfg.initial_costs(oracle.num_vars())?;
    optimize_costs(oracle, objective, c0, cfg, 0)
}

fn optimize_costs<O, F>(
    oracle: &O,
    objective: &F,
    mut c: Vec<f64>,
    cfg: &ZeroConfig,
    instance: usize,
) -> Result<ZeroOutcome>
where
    O: SolverOracle + ?Sized,
    F: Objective + ?Sized,
{
    let sense = objective.sense();
    let clock = Stopwatch::start();
    let mut adam = Adam::new(cfg.alpha, c.len());
    let mut record = TrainRecord::default();
    let mut best: Option<(usize, f64, Vec<f64>, Vec<f64>)> = None;
    let mut stale = 0;

    for step in 0..cfg.max_steps {
        let (x, cache) = solve_and_cache(oracle, &c)?;
        let eval = objective.evaluate(&x)?;
        let improved = best
            .as_ref()
            .is_none_or(|(_, v, _, _)| sense.better(eval.value, *v));
        if improved {
            best = Some((step, eval.value, x, c.clone()));
            stale = 0;
        } else {
            stale += 1;
        }
        let best_value = best.as_ref().unwrap().1;
        record.steps.push(StepRecord {
            step,
            instance,
            value: eval.value,
            best_value,
            cost_norm: c.iter().map(|v| v * v).sum::<f64>().sqrt(),
            wall_ms: clock.elapsed_ms(),
        });
        if step + 1 == cfg.max_steps || (cfg.patience > 0 && stale >= cfg.patience) {
            break;
        }
        let g_x: Vec<f64> = eval.grad.iter().map(|g| sense.sign() * g).collect();
        let g_c = backward(oracle, &cache, &g_x, &cfg.blackbox)?;
        adam.step(&mut c, &g_c);
    }

    let (step, value, x, costs) = best.expect("max_steps >= 1");
    record.best.push(BestRecord {
        instance,
        step,
        value,
        x: x.clone(),
    });
    Ok(ZeroOutcome {
        x,
        value,
        costs,
        record,
    })
}

/// Feature map used to turn an instance into one feature row per decision
/// variable. Rows for identical inputs are identical, so the network's
/// weight sharing makes identical variables receive identical costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureSpec {
    /// `(mu_e, sigma2_e, T / LET)` per undirected edge.
    #[serde(rename = "route-edge-v1")]
    RouteEdge,
    /// `(mem_t / M, w_t, sin(πk), cos(πk))` per item/device pair, `k = (d+1)/(D+1)`.
    #[serde(rename = "assignment-pair-v1")]
    AssignmentPair,
}

impl FeatureSpec {
    pub fn dim(self) -> usize {
        match self {
            FeatureSpec::RouteEdge => 3,
            FeatureSpec::AssignmentPair => 4,
        }
    }
}

pub fn route_edge_features(inst: &RouteInstance) -> Vec<Vec<f64>> {
    let ratio = inst.deadline_ratio();
    inst.mu()
        .iter()
        .zip(inst.sigma2())
        .map(|(&m, &s)| vec![m, s, ratio])
        .collect()
}

pub fn assignment_pair_features(inst: &AssignmentInstance) -> Vec<Vec<f64>> {
    let devices = inst.num_devices();
    let mut rows = Vec::with_capacity(inst.num_vars());
    for t in 0..inst.num_items() {
        for d in 0..devices {
            let k = PI * (d + 1) as f64 / (devices + 1) as f64;
            rows.push(vec![
                inst.mem()[t] / inst.capacity(),
                inst.weights()[t],
                k.sin(),
                k.cos(),
            ]);
        }
    }
    rows
}

pub const PRIOR_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorArch {
    sizes: Vec<usize>,
    activation: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PriorModelDoc {
    version: u32,
    arch: PriorArch,
    weights: Vec<f64>,
    feature_spec: FeatureSpec,
    seed: u64,
}

/// Cost-predicting network `ĉ(y; θ)`, applied row-wise to instance features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PriorModelDoc", into = "PriorModelDoc")]
pub struct PriorModel {
    mlp: Mlp,
    feature_spec: FeatureSpec,
    seed: u64,
}

impl TryFrom<PriorModelDoc> for PriorModel {
    type Error = Error;

    fn try_from(doc: PriorModelDoc) -> Result<Self> {
        ensure(doc.version == PRIOR_FORMAT_VERSION, || {
            format!("unsupported prior model version {}", doc.version)
        })?;
        ensure(doc.arch.activation == "tanh", || {
            format!("unsupported activation `{}`", doc.arch.activation)
        })?;
        let mlp = Mlp::from_parts(doc.arch.sizes, doc.weights)?;
        PriorModel::from_mlp(mlp, doc.feature_spec, doc.seed)
    }
}

impl From<PriorModel> for PriorModelDoc {
    fn from(model: PriorModel) -> Self {
        PriorModelDoc {
            version: PRIOR_FORMAT_VERSION,
            arch: PriorArch {
                sizes: model.mlp.sizes().to_vec(),
                activation: "tanh".into(),
            },
            weights: model.mlp.params().to_vec(),
            feature_spec: model.feature_spec,
            seed: model.seed,
        }
    }
}

impl PriorModel {
    pub fn new(feature_spec: FeatureSpec, hidden: &[usize], seed: u64) -> Result<Self> {
        let mut sizes = vec![feature_spec.dim()];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        Self::from_mlp(Mlp::new(&sizes, seed)?, feature_spec, seed)
    }

    pub fn from_mlp(mlp: Mlp, feature_spec: FeatureSpec, seed: u64) -> Result<Self> {
        ensure(mlp.input_dim() == feature_spec.dim() && mlp.output_dim() == 1, || {
            format!(
                "network {:?} does not map {} features to one cost",
                mlp.sizes(),
                feature_spec.dim()
            )
        })?;
        Ok(Self {
            mlp,
            feature_spec,
            seed,
        })
    }

    pub fn mlp(&self) -> &Mlp {
        &self.mlp
    }

    pub fn feature_spec(&self) -> FeatureSpec {
        self.feature_spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// One predicted cost per feature row.
    pub fn predict(&self, features: &[Vec<f64>]) -> Result<Vec<f64>> {
        features
            .iter()
            .map(|row| Ok(self.mlp.forward(row)?.0[0]))
            .collect()
    }

    /// Accumulates `Σ_e grad_costs[e] · ∂ĉ_e/∂θ` into `grads`.
    fn accumulate_grad(
        &self,
        features: &[Vec<f64>],
        grad_costs: &[f64],
        grads: &mut [f64],
    ) -> Result<()> {
        for (row, &g) in features.iter().zip(grad_costs) {
            if g == 0.0 {
                continue;
            }
            let (_, trace) = self.mlp.forward(row)?;
            self.mlp.backward(&trace, &[g], grads)?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// One training instance for the prior: its feature rows, solver and objective.
pub struct PriorProblem<'a> {
    pub features: Vec<Vec<f64>>,
    pub oracle: &'a dyn SolverOracle,
    pub objective: &'a dyn Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorTrainConfig {
    pub epochs: usize,
    /// Weight of `‖c_i − ĉ(y_i; θ)‖₂`. `None` trains the network directly
    /// through the solver (the infinite-weight limit).
    pub lambda_reg: Option<f64>,
    /// Adam learning rate for the network parameters.
    pub lr: f64,
    /// Adam learning rate for free per-instance costs (finite `lambda_reg`).
    pub cost_lr: f64,
    pub hidden: Vec<usize>,
    pub batch_size: usize,
    pub seed: u64,
    pub blackbox: BlackboxConfig,
}

impl Default for PriorTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            lambda_reg: None,
            lr: 0.001,
            cost_lr: 0.05,
            hidden: vec![32, 32],
            batch_size: 8,
            seed: 0,
            blackbox: BlackboxConfig::default(),
        }
    }
}

impl PriorTrainConfig {
    pub fn validate(&self) -> Result<()> {
        ensure(self.lr.is_finite() && self.lr > 0.0, || "lr must be positive".into())?;
        ensure(self.cost_lr.is_finite() && self.cost_lr > 0.0, || {
            "cost_lr must be positive".into()
        })?;
        ensure(self.batch_size >= 1, || "batch_size must be at least 1".into())?;
        if let Some(l) = self.lambda_reg {
            ensure(l.is_finite() && l >= 0.0, || {
                format!("lambda_reg must be non-negative, got {l}")
            })?;
        }
        self.blackbox.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PriorOutcome {
    /// Parameters with the best training-set loss seen at an epoch boundary.
    pub model: PriorModel,
    /// Free per-instance costs after the last epoch (finite `lambda_reg` only).
    pub costs: Option<Vec<Vec<f64>>>,
    /// Training-set mean objective value at each epoch boundary, starting
    /// with the untrained network.
    pub epoch_values: Vec<f64>,
}

/// Trains the cost network over `problems`.
///
/// With `lambda_reg = None` each batch predicts costs, solves, and
/// backpropagates the blackbox cost gradient through the network. With a
/// finite weight, per-instance costs `c_i` are optimized against the
/// objective plus `λ‖c_i − ĉ_i‖₂` (a proximal step handles the norm), then
/// one network step pulls `ĉ_i` toward the `c_i`.
pub fn surco_prior_train(
    problems: &[PriorProblem<'_>],
    feature_spec: FeatureSpec,
    cfg: &PriorTrainConfig,
) -> Result<PriorOutcome> {
    cfg.validate()?;
    ensure(!problems.is_empty(), || "training set is empty".into())?;
    let sense = problems[0].objective.sense();
    for (i, p) in problems.iter().enumerate() {
        check_dims(p.oracle, p.objective)?;
        ensure(p.features.len() == p.oracle.num_vars(), || {
            format!(
                "instance {i}: {} feature rows for {} variables",
                p.features.len(),
                p.oracle.num_vars()
            )
        })?;
        ensure(p.objective.sense() == sense, || {
            "training objectives disagree on sense".into()
        })?;
    }

    let mut model = PriorModel::new(feature_spec, &cfg.hidden, cfg.seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x05ee_d0f5_a3c0);
    let mut adam = Adam::new(cfg.lr, model.mlp.num_params());
    let mut epoch_values = Vec::with_capacity(cfg.epochs + 1);

    let mut costs: Option<Vec<Vec<f64>>> = match cfg.lambda_reg {
        Some(_) => Some(
            problems
                .iter()
                .map(|p| model.predict(&p.features))
                .collect::<Result<_>>()?,
        ),
        None => None,
    };
    let mut cost_opts: Vec<Adam> = problems
        .iter()
        .map(|p| Adam::new(cfg.cost_lr, p.oracle.num_vars()))
        .collect();

    let mut best_value = mean_value(&model, problems)?;
    let mut best_params = model.mlp.params().to_vec();
    epoch_values.push(best_value);

    for _ in 0..cfg.epochs {
        match (cfg.lambda_reg, costs.as_mut()) {
            (Some(lambda), Some(costs)) => {
                for (i, p) in problems.iter().enumerate() {
                    let target = model.predict(&p.features)?;
                    let (x, cache) = solve_and_cache(p.oracle, &costs[i])?;
                    let eval = p.objective.evaluate(&x)?;
                    let g_x: Vec<f64> = eval.grad.iter().map(|g| sense.sign() * g).collect();
                    let g_c = backward(p.oracle, &cache, &g_x, &cfg.blackbox)?;
                    cost_opts[i].step(&mut costs[i], &g_c);
                    prox_toward(&mut costs[i], &target, cfg.cost_lr * lambda);
                }
                let mut grads = vec![0.0; model.mlp.num_params()];
                for (i, p) in problems.iter().enumerate() {
                    let target = model.predict(&p.features)?;
                    let diff: Vec<f64> = costs[i].iter().zip(&target).map(|(c, t)| c - t).collect();
                    let norm = diff.iter().map(|d| d * d).sum::<f64>().sqrt();
                    if norm > 1e-12 {
                        let g: Vec<f64> = diff.iter().map(|d| -lambda * d / norm).collect();
                        model.accumulate_grad(&p.features, &g, &mut grads)?;
                    }
                }
                scale(&mut grads, 1.0 / problems.len() as f64);
                adam.step(model.mlp.params_mut(), &grads);
            }
            _ => {
                let mut order: Vec<usize> = (0..problems.len()).collect();
                order.shuffle(&mut rng);
                for batch in order.chunks(cfg.batch_size) {
                    let mut grads = vec![0.0; model.mlp.num_params()];
                    for &i in batch {
                        let p = &problems[i];
                        let pred = model.predict(&p.features)?;
                        let (x, cache) = solve_and_cache(p.oracle, &pred)?;
                        let eval = p.objective.evaluate(&x)?;
                        let g_x: Vec<f64> =
                            eval.grad.iter().map(|g| sense.sign() * g).collect();
                        let g_c = backward(p.oracle, &cache, &g_x, &cfg.blackbox)?;
                        model.accumulate_grad(&p.features, &g_c, &mut grads)?;
                    }
                    scale(&mut grads, 1.0 / batch.len() as f64);
                    adam.step(model.mlp.params_mut(), &grads);
                }
            }
        }
        let value = mean_value(&model, problems)?;
        epoch_values.push(value);
        if sense.better(value, best_value) {
            best_value = value;
            best_params = model.mlp.params().to_vec();
        }
    }

    model.mlp.params_mut().copy_from_slice(&best_params);
    Ok(PriorOutcome {
        model,
        costs,
        epoch_values,
    })
}

fn scale(v: &mut [f64], k: f64) {
    v.iter_mut().for_each(|x| *x *= k);
}

/// Proximal map of `step·‖c − target‖₂`: shrinks `c` toward `target`.
fn prox_toward(c: &mut [f64], target: &[f64], step: f64) {
    let norm = c
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let keep = if norm > step { 1.0 - step / norm } else { 0.0 };
    for (ci, ti) in c.iter_mut().zip(target) {
        *ci = ti + keep * (*ci - ti);
    }
}

fn mean_value(model: &PriorModel, problems: &[PriorProblem<'_>]) -> Result<f64> {
    let mut total = 0.0;
    for p in problems {
        let x = surco_prior_infer(model, &p.features, p.oracle)?;
        total += p.objective.evaluate(&x)?.value;
    }
    Ok(total / problems.len() as f64)
}

/// Predicts costs and solves once. The objective is not consulted.
pub fn surco_prior_infer<O: SolverOracle + ?Sized>(
    model: &PriorModel,
    features: &[Vec<f64>],
    oracle: &O,
) -> Result<Vec<f64>> {
    ensure(features.len() == oracle.num_vars(), || {
        format!(
            "{} feature rows for {} variables",
            features.len(),
            oracle.num_vars()
        )
    })?;
    let c = model.predict(features)?;
    oracle.solve(&c)
}

/// [`surco_zero`] started from the prior's predicted costs. `cfg.init` is ignored.
pub fn surco_hybrid<O, F>(
    model: &PriorModel,
    features: &[Vec<f64>],
    oracle: &O,
    objective: &F,
    cfg: &ZeroConfig,
) -> Result<ZeroOutcome>
where
    O: SolverOracle + ?Sized,
    F: Objective + ?Sized,
{
    cfg.validate()?;
    check_dims(oracle, objective)?;
    ensure(features.len() == oracle.num_vars(), || {
        format!(
            "{} feature rows for {} variables",
            features.len(),
            oracle.num_vars()
        )
    })?;
    let c0 = model.predict(features)?;
    optimize_costs(oracle, objective, c0, cfg, 0)
}

/// Loss orientation helper for callers comparing values across methods.
pub fn is_better(sense: Sense, a: f64, b: f64) -> bool {
    sense.better(a, b)
}
