//! Momentum-based first-order optimizers with a differential correction,
//! the exact closed-form analysis of their moving-average bias, and
//! desk-scale objectives to race them on.
//!
//! The crate is organized around five pieces:
//!
//! - [`optim`] — SGD, SGDM, and RSGDM step rules over flat parameter
//!   vectors, plus coupled weight decay and a step-decay schedule.
//! - [`ema`] — closed-form expansions of the gradient and differential
//!   EMAs on deterministic streams, their bias terms, and the exact
//!   telescoping identity linking them.
//! - [`stream`] — the deterministic gradient sequences those identities
//!   are evaluated on.
//! - [`objectives`] — quadratic bowls, Rosenbrock, and seeded synthetic
//!   linear classification with mini-batch logistic gradients.
//! - [`mlp`] — a small multilayer perceptron with hand-written
//!   forward/backward passes.
//!
//! [`gradcheck`] provides the central-finite-difference oracle used to
//! validate every analytic gradient, and [`rng`] the splitmix64 generator
//! behind all seeded behavior.

pub mod ema;
pub mod error;
pub mod gradcheck;
pub mod mlp;
pub mod objectives;
pub mod optim;
pub mod rng;
pub mod stream;
pub mod vector;

pub use error::{Error, Result};
pub use optim::{
    apply_weight_decay, sgd_step, Optimizer, OptimizerKind, RsgdmState, ScheduleSpec, SgdmState,
    WeightDecaySpec,
};
pub use stream::{GradientStream, StreamKind};
pub use vector::ParamVector;
