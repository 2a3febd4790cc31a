//! Nonlinear objectives with analytic gradients, evaluated on (possibly
//! relaxed) decision vectors.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::error::{Error, Result};
use crate::instances::{AssignmentInstance, RouteInstance, ToyInstance};

/// Whether the natural objective value is to be minimized or maximized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Multiplier turning a value into a loss to minimize.
    pub fn sign(self) -> f64 {
        match self {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        }
    }

    pub fn loss(self, value: f64) -> f64 {
        self.sign() * value
    }

    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        self.loss(a) < self.loss(b)
    }
}

/// An objective value with its gradient with respect to the decision vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveValue {
    pub value: f64,
    pub grad: Vec<f64>,
}

pub trait Objective {
    fn dim(&self) -> usize;

    fn sense(&self) -> Sense;

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveValue>;
}

impl<T: Objective + ?Sized> Objective for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn sense(&self) -> Sense {
        (**self).sense()
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveValue> {
        (**self).evaluate(x)
    }
}

/// Counts `evaluate` calls on the wrapped objective.
#[derive(Debug)]
pub struct CountingObjective<F> {
    inner: F,
    calls: AtomicUsize,
}

impl<F> CountingObjective<F> {
    pub fn new(inner: F) -> Self {
        Self {
            inner,
            calls: AtomicUsize::new(0),
        }
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::Relaxed)
    }
}

impl<F: Objective> Objective for CountingObjective<F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn sense(&self) -> Sense {
        self.inner.sense()
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveValue> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        self.inner.evaluate(x)
    }
}

fn check_dim(x: &[f64], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::Parameter(format!(
            "decision vector has {} entries, expected {n}",
            x.len()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("decision vector has non-finite entries".into()));
    }
    Ok(())
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Probability of reaching the target before the deadline along `x`:
/// `Φ((T − Σ mu_e x_e) / sqrt(Σ sigma2_e x_e))`.
#[derive(Debug, Clone, Copy)]
pub struct OnTimeObjective<'a> {
    inst: &'a RouteInstance,
}

impl<'a> OnTimeObjective<'a> {
    pub fn new(inst: &'a RouteInstance) -> Self {
        Self { inst }
    }
}

impl Objective for OnTimeObjective<'_> {
    fn dim(&self) -> usize {
        self.inst.num_edges()
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveValue> {
        ontime_objective(x, self.inst)
    }
}

pub fn ontime_objective(x: &[f64], inst: &RouteInstance) -> Result<ObjectiveValue> {
    check_dim(x, inst.num_edges())?;
    let mean = inst.path_mean(x);
    let var = inst.path_variance(x);
    if var <= 0.0 {
        return Err(Error::DegenerateVariance);
    }
    let s = var.sqrt();
    let slack = inst.deadline() - mean;
    let z = slack / s;
    let density = normal_pdf(z);
    let s3 = 2.0 * s * var;
    let grad = inst
        .mu()
        .iter()
        .zip(inst.sigma2())
        .map(|(m, v)| density * (-m / s - slack * v / s3))
        .collect();
    Ok(ObjectiveValue {
        value: normal_cdf(z),
        grad,
    })
}

/// `(x₁ cos y + x₂ sin y)²`, maximized over the triangle.
#[derive(Debug, Clone, Copy)]
pub struct ToyObjective {
    inst: ToyInstance,
}

impl ToyObjective {
    pub fn new(inst: ToyInstance) -> Self {
        Self { inst }
    }
}

impl Objective for ToyObjective {
    fn dim(&self) -> usize {
        2
    }

    fn sense(&self) -> Sense {
        Sense::Maximize
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveValue> {
        toy_objective(x, &self.inst)
    }
}

pub fn toy_objective(x: &[f64], inst: &ToyInstance) -> Result<ObjectiveValue> {
    check_dim(x, 2)?;
    let (sin, cos) = inst.y().sin_cos();
    let a = x[0] * cos + x[1] * sin;
    Ok(ObjectiveValue {
        value: a * a,
        grad: vec![2.0 * a * cos, 2.0 * a * sin],
    })
}

/// Soft maximum over device loads; minimized.
///
/// Device load is `Σ_t w_t x_{t,d} + 0.3·sqrt(Σ_t x_{t,d} + 1e-9)` and the
/// value is the softmax(β·load)-weighted mean load with β = 10.
#[derive(Debug, Clone, Copy)]
pub struct AssignmentObjective<'a> {
    inst: &'a AssignmentInstance,
}

pub const LOAD_SHARPNESS: f64 = 10.0;
pub const COUNT_PENALTY: f64 = 0.3;

impl<'a> AssignmentObjective<'a> {
    pub fn new(inst: &'a AssignmentInstance) -> Self {
        Self { inst }
    }

    /// Evaluates without the row-sum check, for relaxed or perturbed inputs.
    pub fn evaluate_unchecked(&self, x: &[f64]) -> Result<ObjectiveValue> {
        check_dim(x, self.inst.num_vars())?;
        let inst = self.inst;
        let devices = inst.num_devices();
        let mut weighted = vec![0.0; devices];
        let mut count = vec![1e-9; devices];
        for t in 0..inst.num_items() {
            for d in 0..devices {
                let xv = x[inst.var(t, d)];
                weighted[d] += inst.weights()[t] * xv;
                count[d] += xv;
            }
        }
        if count.iter().any(|&c| c <= 0.0) {
            return Err(Error::Parameter("negative device occupancy".into()));
        }
        let roots: Vec<f64> = count.iter().map(|c| c.sqrt()).collect();
        let load: Vec<f64> = weighted
            .iter()
            .zip(&roots)
            .map(|(w, r)| w + COUNT_PENALTY * r)
            .collect();
        let peak = load.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let expw: Vec<f64> = load
            .iter()
            .map(|l| (LOAD_SHARPNESS * (l - peak)).exp())
            .collect();
        let z: f64 = expw.iter().sum();
        let value: f64 = load.iter().zip(&expw).map(|(l, e)| l * e).sum::<f64>() / z;
        // d value / d load_d = p_d (1 + β (load_d − value))
        let dload: Vec<f64> = load
            .iter()
            .zip(&expw)
            .map(|(l, e)| e / z * (1.0 + LOAD_SHARPNESS * (l - value)))
            .collect();
        let mut grad = vec![0.0; inst.num_vars()];
        for t in 0..inst.num_items() {
            for d in 0..devices {
                let dl = inst.weights()[t] + COUNT_PENALTY * 0.5 / roots[d];
                grad[inst.var(t, d)] = dload[d] * dl;
            }
        }
        Ok(ObjectiveValue { value, grad })
    }
}

impl Objective for AssignmentObjective<'_> {
    fn dim(&self) -> usize {
        self.inst.num_vars()
    }

    fn sense(&self) -> Sense {
        Sense::Minimize
    }

    fn evaluate(&self, x: &[f64]) -> Result<ObjectiveValue> {
        assignment_objective(x, self.inst)
    }
}

pub fn assignment_objective(x: &[f64], inst: &AssignmentInstance) -> Result<ObjectiveValue> {
    check_dim(x, inst.num_vars())?;
    for t in 0..inst.num_items() {
        let row: f64 = (0..inst.num_devices()).map(|d| x[inst.var(t, d)]).sum();
        if (row - 1.0).abs() > 1e-6 {
            return Err(Error::Parameter(format!(
                "item {t} assignment sums to {row}, expected 1"
            )));
        }
    }
    AssignmentObjective::new(inst).evaluate_unchecked(x)
}
