// SPDX-License-Identifier: Apache-2.0

//! Regime-aware mitigation of control-loop faults: model, solvers,
//! simulator, baselines and benchmarking.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod bench;
pub mod cli;
pub mod ctmc;
pub mod error;
pub mod linalg;
pub mod mdp;
pub mod model;
pub mod pomdp;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
pub use model::ModelBundle;
