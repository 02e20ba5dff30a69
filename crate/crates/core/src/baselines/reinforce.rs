// SPDX-License-Identifier: Apache-2.0

//! Monte Carlo policy gradient with a linear-softmax policy on belief features.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelBundle;
use crate::pomdp::{Belief, BeliefFilter};
use crate::rng::{derive, rng_from_seed};
use crate::sim::{
    sample_categorical, Controller, DecisionContext, GillespieEnv, HoldingTimeSampler,
};

use super::qlearning::{load_json, save_json};

pub const ENTROPY_EPS: f64 = 1e-12;

/// Belief entries, pairwise products `b_i·b_j` (i < j), then entropy.
pub fn reinforce_features(b: &Belief) -> Vec<f64> {
    let p = b.as_slice();
    let k = p.len();
    let mut f = p.to_vec();
    for i in 0..k {
        for j in i + 1..k {
            f.push(p[i] * p[j]);
        }
    }
    f.push(-p.iter().map(|&x| x * (x + ENTROPY_EPS).ln()).sum::<f64>());
    f
}

pub fn feature_dim(k: usize) -> usize {
    k + k * (k - 1) / 2 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReinforceConfig {
    pub lr: f64,
    pub episodes: usize,
    pub baseline_decay: f64,
    pub horizon: f64,
    pub seed: u64,
}

impl Default for ReinforceConfig {
    fn default() -> Self {
        Self {
            lr: 0.001,
            episodes: 10_000,
            baseline_decay: 0.99,
            horizon: 15.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxPolicy {
    /// M × F.
    pub theta: Vec<Vec<f64>>,
    pub features: String,
    pub entropy_eps: f64,
    pub config: ReinforceConfig,
    pub model_hash: String,
}

impl SoftmaxPolicy {
    pub fn zeros(model: &ModelBundle, config: ReinforceConfig) -> Self {
        Self {
            theta: vec![vec![0.0; feature_dim(model.k())]; model.m()],
            features: "belief,pairwise_products,entropy".into(),
            entropy_eps: ENTROPY_EPS,
            config,
            model_hash: model.hash().to_string(),
        }
    }

    fn logits(&self, phi: &[f64]) -> Vec<f64> {
        self.theta
            .iter()
            .map(|t| t.iter().zip(phi).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `π_θ(· | b)`.
    pub fn probabilities(&self, b: &Belief) -> Vec<f64> {
        softmax(&self.logits(&reinforce_features(b)))
    }

    /// Most probable action; ties go to the lowest index.
    pub fn greedy(&self, b: &Belief) -> usize {
        let l = self.logits(&reinforce_features(b));
        (0..l.len()).fold(0, |best, a| if l[a] > l[best] { a } else { best })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path.as_ref())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path.as_ref())
    }
}

fn softmax(l: &[f64]) -> Vec<f64> {
    let mx = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = l.iter().map(|x| (x - mx).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// REINFORCE: one gradient step per episode from the per-event returns `G_t`,
/// centred by a running mean updated after each `G_t`.
pub fn reinforce_train(model: &ModelBundle, config: ReinforceConfig) -> Result<SoftmaxPolicy> {
    if !(config.lr >= 0.0) || !(config.horizon > 0.0) {
        return Err(Error::InvalidArgument(
            "lr must be >= 0 and horizon > 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&config.baseline_decay) {
        return Err(Error::InvalidArgument(
            "baseline decay must lie in [0, 1]".into(),
        ));
    }
    let gamma = model.gamma();
    let mut policy = SoftmaxPolicy::zeros(model, config);
    let mut rng = rng_from_seed(derive(config.seed, &[1]));
    let sampler = HoldingTimeSampler::Exponential;
    let mut filter = BeliefFilter::new(model.clone());
    let mut baseline: Option<f64> = None;

    for e in 0..config.episodes {
        let (mut env, z0) = GillespieEnv::start(
            model,
            &sampler,
            config.horizon,
            derive(config.seed, &[0, e as u64]),
        );
        filter.reset();
        filter.observe(z0, 0.0);
        let mut steps: Vec<(Vec<f64>, Vec<f64>, usize, f64)> = Vec::new();
        loop {
            let phi = reinforce_features(filter.belief());
            let probs = softmax(&policy.logits(&phi));
            let a = sample_categorical(&probs, &mut rng);
            let Some(tr) = env.step(a) else { break };
            steps.push((phi, probs, a, model.reward().get(a, tr.from)));
            filter.record_action(a);
            filter.observe(tr.observation, tr.sojourn);
        }
        let mut g = 0.0;
        let mut returns = vec![0.0; steps.len()];
        for (t, step) in steps.iter().enumerate().rev() {
            g = step.3 + gamma * g;
            returns[t] = g;
        }
        let mut grad = vec![vec![0.0; policy.theta[0].len()]; policy.theta.len()];
        for ((phi, probs, a, _), &g_t) in steps.iter().zip(&returns) {
            let b = *baseline.get_or_insert(g_t);
            let adv = g_t - b;
            baseline = Some(config.baseline_decay * b + (1.0 - config.baseline_decay) * g_t);
            for (i, row) in grad.iter_mut().enumerate() {
                let coef = adv * (if i == *a { 1.0 } else { 0.0 } - probs[i]);
                for (gj, fj) in row.iter_mut().zip(phi) {
                    *gj += coef * fj;
                }
            }
        }
        for (row, grow) in policy.theta.iter_mut().zip(&grad) {
            for (t, g) in row.iter_mut().zip(grow) {
                *t += config.lr * g;
            }
        }
    }
    if policy.theta.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Range("policy parameters diverged".into()));
    }
    Ok(policy)
}

/// Greedy evaluation policy over the filtered belief.
#[derive(Debug, Clone)]
pub struct ReinforceController {
    filter: BeliefFilter,
    policy: SoftmaxPolicy,
}

impl ReinforceController {
    pub fn new(model: &ModelBundle, policy: SoftmaxPolicy) -> Result<Self> {
        if policy.theta.len() != model.m()
            || policy
                .theta
                .iter()
                .any(|r| r.len() != feature_dim(model.k()))
        {
            return Err(Error::Dimension(
                "policy parameters do not match the model".into(),
            ));
        }
        Ok(Self {
            filter: BeliefFilter::new(model.clone()),
            policy,
        })
    }
}

impl Controller for ReinforceController {
    fn reset(&mut self) {
        self.filter.reset();
    }

    fn observe(&mut self, z: usize, sojourn: f64) {
        self.filter.observe(z, sojourn);
    }

    fn decide(&mut self, _ctx: &DecisionContext) -> usize {
        let a = self.policy.greedy(self.filter.belief());
        self.filter.record_action(a);
        a
    }

    fn belief(&self) -> Option<&[f64]> {
        Some(self.filter.belief().as_slice())
    }

    fn clone_box(&self) -> Box<dyn Controller> {
        Box::new(self.clone())
    }
}
