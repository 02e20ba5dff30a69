// SPDX-License-Identifier: Apache-2.0

//! Comparison controllers: model-free learners and rule-based heuristics.

pub mod grid;
pub mod kstep;
pub mod mcda;
pub mod qlearning;
pub mod reinforce;
pub mod topsis;

pub use grid::BeliefGrid;
pub use kstep::KStepController;
pub use mcda::{McdaConfig, McdaController};
pub use qlearning::{qlearning_train, QLearningConfig, QLearningController, QTable};
pub use reinforce::{
    reinforce_features, reinforce_train, ReinforceConfig, ReinforceController, SoftmaxPolicy,
};
pub use topsis::{topsis_rank, Criterion, TopsisRanking};
