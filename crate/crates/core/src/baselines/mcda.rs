// SPDX-License-Identifier: Apache-2.0

//! Rule-based selector: smoothed label frequencies scored by TOPSIS.
//!
//! The five criteria, computed for each repair action `a` from the smoothed
//! label distribution `p̂`:
//!
//! | criterion  | kind    | value                                   |
//! |------------|---------|-----------------------------------------|
//! | KPI gain   | benefit | `Σ_s p̂(s)·max(R(a,s), 0)`               |
//! | module     | benefit | `p̂(target(a))`, target = argmax_s ρ(a,s) |
//! | drift      | benefit | `p̂(Drift)` if `a` repairs drift, else 0  |
//! | stability  | benefit | `1 − (max_s ρ(a,s) − min_s ρ(a,s))`      |
//! | cost       | cost    | `−min(R(a, healthy), 0)`                 |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelBundle, HEALTHY};
use crate::sim::{Controller, DecisionContext};

use super::topsis::{topsis_rank, Criterion};

pub const DEFAULT_WEIGHTS: [f64; 5] = [0.35, 0.25, 0.15, 0.10, 0.15];
pub const DEFAULT_SMOOTHING: f64 = 0.3;
pub const DEFAULT_DWELL: f64 = 0.5;
pub const IDLE_GATE: f64 = 0.75;
pub const KPI_GATE: f64 = 0.25;

const KINDS: [Criterion; 5] = [
    Criterion::Benefit,
    Criterion::Benefit,
    Criterion::Benefit,
    Criterion::Benefit,
    Criterion::Cost,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McdaConfig {
    pub weights: [f64; 5],
    pub smoothing: f64,
    pub dwell: f64,
}

impl Default for McdaConfig {
    fn default() -> Self {
        Self {
            weights: DEFAULT_WEIGHTS,
            smoothing: DEFAULT_SMOOTHING,
            dwell: DEFAULT_DWELL,
        }
    }
}

/// Minimum time between action switches; switching is free before the first one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dwell {
    pub min_gap: f64,
    pub last_action: usize,
    pub last_switch: f64,
}

impl Dwell {
    pub fn new(min_gap: f64, initial: usize) -> Self {
        Self {
            min_gap,
            last_action: initial,
            last_switch: f64::NEG_INFINITY,
        }
    }

    pub fn filter(&mut self, proposed: usize, t: f64) -> usize {
        if proposed != self.last_action {
            if t - self.last_switch < self.min_gap {
                return self.last_action;
            }
            self.last_action = proposed;
            self.last_switch = t;
        }
        self.last_action
    }
}

#[derive(Debug, Clone)]
pub struct McdaController {
    config: McdaConfig,
    k: usize,
    no_action: usize,
    drift: Option<usize>,
    drift_repair: Option<usize>,
    /// Repair actions scored, in action-index order.
    candidates: Vec<usize>,
    /// Static columns of the decision matrix; rows follow `candidates`.
    positive_reward: Vec<Vec<f64>>,
    target: Vec<usize>,
    stability: Vec<f64>,
    cost: Vec<f64>,
    posterior: Vec<f64>,
    dwell: Dwell,
}

impl McdaController {
    pub fn new(model: &ModelBundle, config: McdaConfig) -> Result<Self> {
        if !(config.smoothing > 0.0 && config.smoothing <= 1.0) {
            return Err(Error::InvalidArgument(
                "smoothing must lie in (0, 1]".into(),
            ));
        }
        if config.weights.iter().any(|&w| w < 0.0)
            || (config.weights.iter().sum::<f64>() - 1.0).abs() > 1e-9
        {
            return Err(Error::InvalidArgument(
                "criterion weights must be nonnegative and sum to 1".into(),
            ));
        }
        let k = model.k();
        let no_action = model.actions().no_action();
        let candidates: Vec<usize> = (0..model.m()).filter(|&a| a != no_action).collect();
        let drift = model.regimes().index_of("Drift");
        let drift_repair = drift.and_then(|d| model.actions().canonical_repair(d));
        let repair = model.repair();
        let target = candidates
            .iter()
            .map(|&a| {
                (0..k).fold(0, |b, s| {
                    if repair.get(a, s) > repair.get(a, b) {
                        s
                    } else {
                        b
                    }
                })
            })
            .collect();
        let stability = candidates
            .iter()
            .map(|&a| {
                let row = repair.row(a);
                let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
                1.0 - (hi - lo)
            })
            .collect();
        let cost = candidates
            .iter()
            .map(|&a| -model.reward().get(a, HEALTHY).min(0.0))
            .collect();
        let positive_reward = candidates
            .iter()
            .map(|&a| model.reward().row(a).iter().map(|r| r.max(0.0)).collect())
            .collect();
        Ok(Self {
            config,
            k,
            no_action,
            drift,
            drift_repair,
            candidates,
            positive_reward,
            target,
            stability,
            cost,
            posterior: healthy(k),
            dwell: Dwell::new(config.dwell, no_action),
        })
    }

    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    /// Decision matrix (candidates × 5) for the current smoothed posterior.
    pub fn decision_matrix(&self) -> Vec<Vec<f64>> {
        let p = &self.posterior;
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, &a)| {
                let kpi: f64 = self.positive_reward[i]
                    .iter()
                    .zip(p)
                    .map(|(r, q)| r * q)
                    .sum();
                let module = p[self.target[i]];
                let drift = match self.drift {
                    Some(d) if self.drift_repair == Some(a) => p[d],
                    _ => 0.0,
                };
                vec![kpi, module, drift, self.stability[i], self.cost[i]]
            })
            .collect()
    }

    /// Proposed action before hysteresis.
    pub fn propose(&self) -> usize {
        let p_healthy = self.posterior[HEALTHY];
        if p_healthy > IDLE_GATE && 1.0 - p_healthy < KPI_GATE {
            return self.no_action;
        }
        let ranking = topsis_rank(&self.decision_matrix(), &self.config.weights, &KINDS)
            .expect("validated inputs");
        self.candidates[ranking.best()]
    }
}

fn healthy(k: usize) -> Vec<f64> {
    let mut p = vec![0.0; k];
    p[HEALTHY] = 1.0;
    p
}

impl Controller for McdaController {
    fn reset(&mut self) {
        self.posterior = healthy(self.k);
        self.dwell = Dwell::new(self.config.dwell, self.no_action);
    }

    fn observe(&mut self, z: usize, _sojourn: f64) {
        let w = self.config.smoothing;
        for (s, p) in self.posterior.iter_mut().enumerate() {
            let hit = if s == z { 1.0 } else { 0.0 };
            *p = w * hit + (1.0 - w) * *p;
        }
    }

    fn decide(&mut self, ctx: &DecisionContext) -> usize {
        let proposed = self.propose();
        self.dwell.filter(proposed, ctx.t)
    }

    fn clone_box(&self) -> Box<dyn Controller> {
        Box::new(self.clone())
    }
}
