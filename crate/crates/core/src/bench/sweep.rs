// SPDX-License-Identifier: Apache-2.0

//! One-axis sensitivity sweeps over model parameters.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{perturb_reward, scale_repair, DiscountSpec, ModelBundle, PerturbMode};
use crate::rng::derive;

use super::stats::{ci_half_width, mean_sd};
use super::{build_policy_suite, run_policy_comparison, SuiteConfig};

pub const NOISE_REPLICATES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepAxis {
    /// Correct-classification probability of the SensorNoisy label.
    ObsAccuracy,
    /// Common factor on every repair probability.
    RepairScale,
    /// Factor on the whole reward matrix.
    RewardScale,
    /// Factor on negative reward entries only.
    PenaltyScale,
    /// Standard deviation of additive reward noise.
    RewardNoise,
    Gamma,
}

impl SweepAxis {
    pub const ALL: [SweepAxis; 6] = [
        SweepAxis::ObsAccuracy,
        SweepAxis::RepairScale,
        SweepAxis::RewardScale,
        SweepAxis::PenaltyScale,
        SweepAxis::RewardNoise,
        SweepAxis::Gamma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::ObsAccuracy => "obs-accuracy",
            SweepAxis::RepairScale => "repair-scale",
            SweepAxis::RewardScale => "reward-scale",
            SweepAxis::PenaltyScale => "penalty-scale",
            SweepAxis::RewardNoise => "reward-noise",
            SweepAxis::Gamma => "gamma",
        }
    }

    pub fn default_values(self) -> Vec<f64> {
        let steps = |lo: usize, hi: usize, div: f64| (lo..=hi).map(|i| i as f64 / div).collect();
        match self {
            SweepAxis::ObsAccuracy => steps(4, 20, 20.0),
            SweepAxis::RepairScale => steps(1, 10, 10.0),
            SweepAxis::RewardScale | SweepAxis::PenaltyScale => vec![0.5, 1.0, 2.0],
            SweepAxis::RewardNoise => vec![0.05, 0.10, 0.20],
            SweepAxis::Gamma => vec![0.90, 0.95, 0.99, 0.999],
        }
    }

    fn check(self, v: f64) -> Result<()> {
        let ok = match self {
            SweepAxis::ObsAccuracy | SweepAxis::RepairScale => (0.0..=1.0).contains(&v),
            SweepAxis::RewardScale | SweepAxis::PenaltyScale => v > 0.0 && v.is_finite(),
            SweepAxis::RewardNoise => v >= 0.0 && v.is_finite(),
            SweepAxis::Gamma => v > 0.0 && v < 1.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Range(format!(
                "{v} is not a valid {} value",
                self.name()
            )))
        }
    }

    /// Model variants evaluated at `v` (several for the noise axis).
    fn variants(self, model: &ModelBundle, v: f64, seed: u64) -> Result<Vec<ModelBundle>> {
        self.check(v)?;
        Ok(match self {
            SweepAxis::ObsAccuracy => {
                let spec = model.observation_spec().ok_or_else(|| {
                    Error::InvalidArgument("model has no structured observation spec".into())
                })?;
                let sn = model.regimes().index_of("SensorNoisy").ok_or_else(|| {
                    Error::InvalidArgument("model has no SensorNoisy regime".into())
                })?;
                vec![model.with_observation(spec.with_accuracy(sn, v))?]
            }
            SweepAxis::RepairScale => vec![model.with_repair(scale_repair(model.repair(), v)?)?],
            SweepAxis::RewardScale => vec![model.with_reward(perturb_reward(
                model.reward(),
                PerturbMode::UniformScale,
                v,
                seed,
            )?)?],
            SweepAxis::PenaltyScale => vec![model.with_reward(perturb_reward(
                model.reward(),
                PerturbMode::PenaltyScale,
                v,
                seed,
            )?)?],
            SweepAxis::RewardNoise => (0..NOISE_REPLICATES as u64)
                .map(|r| {
                    let s = derive(seed, &[v.to_bits(), r]);
                    model.with_reward(perturb_reward(model.reward(), PerturbMode::Gaussian, v, s)?)
                })
                .collect::<Result<_>>()?,
            SweepAxis::Gamma => vec![model.with_discount(DiscountSpec::new(v, model.dt())?)?],
        })
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepAxis::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sweep axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub n_traj: usize,
    pub horizon: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub policy: String,
    pub n: usize,
    pub mean: f64,
    pub ci_half: f64,
    pub frac_nominal: f64,
    pub frac_ci_half: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub entries: Vec<SweepEntry>,
    /// Optimal MDP action labels per regime, one list per model variant.
    pub mdp_policies: Vec<Vec<String>>,
}

impl SweepPoint {
    pub fn get(&self, policy: &str) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.policy == policy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
    pub model_hash: String,
}

/// Rebuilds the model at each axis value, re-solves MDP and PBVI, and
/// evaluates MDP, POMDP, k-step, MCDA and NoAction with paired seeds.
pub fn sensitivity_sweep(model: &ModelBundle, config: &SweepConfig) -> Result<SweepResult> {
    if config.values.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs at least one value".into(),
        ));
    }
    if !config.values.windows(2).all(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument(
            "sweep values must be strictly increasing".into(),
        ));
    }
    let mut suite = SuiteConfig::seeded(config.seed);
    suite.learners = false;
    let points = config
        .values
        .par_iter()
        .map(|&v| -> Result<SweepPoint> {
            let variants = config.axis.variants(model, v, config.seed)?;
            let mut pooled: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
            let mut mdp_policies = Vec::new();
            for (r, variant) in variants.iter().enumerate() {
                let built = build_policy_suite(variant, &suite)?;
                mdp_policies.push(
                    built
                        .mdp
                        .policy
                        .labels(variant)
                        .into_iter()
                        .map(String::from)
                        .collect(),
                );
                let cmp = run_policy_comparison(
                    variant,
                    &built.controllers,
                    config.n_traj,
                    config.horizon,
                    derive(config.seed, &[r as u64]),
                    true,
                )?;
                for p in cmp.policies {
                    match pooled.iter_mut().find(|e| e.0 == p.policy) {
                        Some(e) => {
                            e.1.extend(p.returns);
                            e.2.extend(p.fraction_nominal_per_traj);
                        }
                        None => pooled.push((p.policy, p.returns, p.fraction_nominal_per_traj)),
                    }
                }
            }
            let entries = pooled
                .into_iter()
                .map(|(policy, returns, frac)| SweepEntry {
                    policy,
                    n: returns.len(),
                    mean: mean_sd(&returns).0,
                    ci_half: ci_half_width(&returns),
                    frac_nominal: mean_sd(&frac).0,
                    frac_ci_half: ci_half_width(&frac),
                })
                .collect();
            Ok(SweepPoint {
                value: v,
                entries,
                mdp_policies,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        config: config.clone(),
        points,
        model_hash: model.hash().to_string(),
    })
}
