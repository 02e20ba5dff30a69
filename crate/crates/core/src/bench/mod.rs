// SPDX-License-Identifier: Apache-2.0

//! Policy comparisons, sensitivity sweeps and their exports.

pub mod export;
pub mod stats;
pub mod sweep;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    qlearning_train, reinforce_train, KStepController, McdaConfig, McdaController, QLearningConfig,
    QLearningController, ReinforceConfig, ReinforceController,
};
use crate::error::{Error, Result};
use crate::mdp::{
    value_iteration, MdpController, ValueIterationResult, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::model::ModelBundle;
use crate::pomdp::{
    generate_belief_points, pbvi_solve, PbviSolution, PomdpController, DEFAULT_BUDGET,
    DEFAULT_RANDOM_POINTS, DEFAULT_WINDOW,
};
use crate::rng::derive;
use crate::sim::{
    discounted_return, simulate_batch, trajectory_metrics, Controller, EpisodeDelays,
    HoldingTimeSampler, NoActionController,
};

pub use stats::{cliffs_delta, wilcoxon_one_sided, WilcoxonResult};
pub use sweep::{sensitivity_sweep, SweepAxis, SweepConfig, SweepEntry, SweepPoint, SweepResult};

pub type NamedController = (String, Box<dyn Controller>);

/// Aggregated metrics of one policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: String,
    pub n_traj: usize,
    pub mean_return: f64,
    pub sd_return: f64,
    pub fraction_nominal: f64,
    /// Per regime, episode-pooled mean onset-to-repair latency; `None` when
    /// there were no finished episodes, `inf` when none was repaired.
    pub delays: Vec<Option<f64>>,
    pub delay_episodes: Vec<EpisodeDelays>,
    /// Mean per-trajectory time-weighted mismatch.
    pub mismatch_time_weighted: f64,
    /// Population convention: 1 for a policy that never intervenes.
    pub mismatch_population: f64,
    pub returns: Vec<f64>,
    pub fraction_nominal_per_traj: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonResult {
    pub policies: Vec<PolicySummary>,
    pub n_traj: usize,
    pub horizon: f64,
    pub seed: u64,
    pub paired: bool,
    pub model_hash: String,
}

impl ComparisonResult {
    pub fn get(&self, policy: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.policy == policy)
    }
}

/// Simulates every policy on `n_traj` trajectories. With `paired`, trajectory
/// `i` of each policy uses the same seed stream.
pub fn run_policy_comparison(
    model: &ModelBundle,
    policies: &[NamedController],
    n_traj: usize,
    horizon: f64,
    seed: u64,
    paired: bool,
) -> Result<ComparisonResult> {
    if n_traj == 0 {
        return Err(Error::InvalidArgument("n_traj must be >= 1".into()));
    }
    if !(horizon > 0.0) {
        return Err(Error::InvalidArgument("horizon must be > 0".into()));
    }
    let reference = value_iteration(model, DEFAULT_TOL, DEFAULT_MAX_ITER).policy;
    let sampler = HoldingTimeSampler::Exponential;
    let summaries = policies
        .iter()
        .enumerate()
        .map(|(i, (name, ctrl))| {
            let base = if paired {
                seed
            } else {
                derive(seed, &[i as u64])
            };
            let trajs = simulate_batch(model, ctrl.as_ref(), n_traj, horizon, base, &sampler);
            let returns: Vec<f64> = trajs.iter().map(|t| discounted_return(t, model)).collect();
            let metrics: Vec<_> = trajs
                .iter()
                .map(|t| trajectory_metrics(t, model, &reference))
                .collect();
            let mut delays = vec![EpisodeDelays::default(); model.k()];
            for m in &metrics {
                for (d, e) in delays.iter_mut().zip(&m.delays) {
                    d.merge(e);
                }
            }
            let (mean_return, sd_return) = stats::mean_sd(&returns);
            let nf = n_traj as f64;
            let frac: Vec<f64> = metrics.iter().map(|m| m.fraction_nominal).collect();
            let mismatch = metrics.iter().map(|m| m.mismatch_rate).sum::<f64>() / nf;
            let intervened = metrics.iter().any(|m| m.intervened);
            PolicySummary {
                policy: name.clone(),
                n_traj,
                mean_return,
                sd_return,
                fraction_nominal: frac.iter().sum::<f64>() / nf,
                delays: delays.iter().map(EpisodeDelays::mean).collect(),
                delay_episodes: delays,
                mismatch_time_weighted: mismatch,
                mismatch_population: if intervened { mismatch } else { 1.0 },
                returns,
                fraction_nominal_per_traj: frac,
            }
        })
        .collect();
    Ok(ComparisonResult {
        policies: summaries,
        n_traj,
        horizon,
        seed,
        paired,
        model_hash: model.hash().to_string(),
    })
}

/// Settings for building the standard set of compared policies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub belief_seed: u64,
    pub random_beliefs: usize,
    pub budget: usize,
    pub window: usize,
    pub kstep: usize,
    pub qlearning: QLearningConfig,
    pub reinforce: ReinforceConfig,
    pub mcda: McdaConfig,
    /// Skip the two learners (used by sweeps).
    pub learners: bool,
}

impl SuiteConfig {
    /// Defaults with every stochastic component seeded from `seed`.
    pub fn seeded(seed: u64) -> Self {
        Self {
            belief_seed: seed,
            random_beliefs: DEFAULT_RANDOM_POINTS,
            budget: DEFAULT_BUDGET,
            window: DEFAULT_WINDOW,
            kstep: 2,
            qlearning: QLearningConfig {
                seed,
                ..Default::default()
            },
            reinforce: ReinforceConfig {
                seed,
                ..Default::default()
            },
            mcda: McdaConfig::default(),
            learners: true,
        }
    }
}

/// Solved models and controllers, in reporting order.
pub struct PolicySuite {
    pub mdp: ValueIterationResult,
    pub pomdp: PbviSolution,
    pub controllers: Vec<NamedController>,
}

pub const MDP: &str = "MDP";
pub const POMDP: &str = "POMDP";
pub const QLEARNING: &str = "Q-learning";
pub const REINFORCE: &str = "REINFORCE";
pub const KSTEP: &str = "k-step";
pub const MCDA: &str = "MCDA";
pub const NO_ACTION: &str = "NoAction";

/// Solves the MDP and PBVI, trains the learners, and builds every controller.
pub fn build_policy_suite(model: &ModelBundle, cfg: &SuiteConfig) -> Result<PolicySuite> {
    let mdp = value_iteration(model, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let beliefs = generate_belief_points(model.k(), cfg.random_beliefs, cfg.belief_seed)?;
    let pomdp = pbvi_solve(model, &beliefs, &mdp.values, cfg.budget, cfg.window)?;
    let mut controllers: Vec<NamedController> = vec![
        (MDP.into(), Box::new(MdpController::new(mdp.policy.clone()))),
        (
            POMDP.into(),
            Box::new(PomdpController::new(model.clone(), pomdp.alpha.clone())),
        ),
    ];
    if cfg.learners {
        let q = qlearning_train(model, cfg.qlearning)?;
        controllers.push((
            QLEARNING.into(),
            Box::new(QLearningController::new(model, q)?),
        ));
        let rf = reinforce_train(model, cfg.reinforce)?;
        controllers.push((
            REINFORCE.into(),
            Box::new(ReinforceController::new(model, rf)?),
        ));
    }
    controllers.push((
        format!("{KSTEP} (k={})", cfg.kstep),
        Box::new(KStepController::new(model, cfg.kstep)?),
    ));
    controllers.push((MCDA.into(), Box::new(McdaController::new(model, cfg.mcda)?)));
    controllers.push((NO_ACTION.into(), Box::new(NoActionController::new(model))));
    Ok(PolicySuite {
        mdp,
        pomdp,
        controllers,
    })
}
