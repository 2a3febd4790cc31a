//! Learning linear surrogate costs for combinatorial problems with nonlinear
//! objectives.
//!
//! A surrogate cost `c` is handed to an exact linear solver `argmin cᵀx` over
//! the feasible region. The solver output is scored by the true nonlinear
//! objective and `c` is updated by gradient descent, with the gradient through
//! the solver obtained from a two-call blackbox scheme ([`diffsolver`]).
//!
//! Three optimizers are provided in [`surco`]: per-instance optimization of `c`
//! (`zero`), offline training of a cost-predicting network (`prior`) and
//! prior-initialized fine-tuning (`hybrid`). The route-planning benchmark with
//! Gaussian edge times lives in [`instances`], [`objectives`] and
//! [`baselines`]; [`theory`] holds executable versions of the nearest-neighbour
//! sample-complexity arguments.

pub mod baselines;
pub mod diffsolver;
mod error;
pub mod instances;
pub mod nn;
pub mod objectives;
pub mod solvers;
pub mod surco;
pub mod theory;

pub use error::{Error, Result};
