// SPDX-License-Identifier: Apache-2.0

//! Tabular Q-learning over a discretized belief simplex.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelBundle;
use crate::pomdp::BeliefFilter;
use crate::rng::{derive, rng_from_seed};
use crate::sim::{Controller, DecisionContext, GillespieEnv, HoldingTimeSampler};

use super::grid::BeliefGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QLearningConfig {
    pub spacing: f64,
    pub lr: f64,
    pub eps_start: f64,
    pub eps_end: f64,
    pub episodes: usize,
    pub horizon: f64,
    pub seed: u64,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        Self {
            spacing: 0.1,
            lr: 0.1,
            eps_start: 1.0,
            eps_end: 0.05,
            episodes: 5_000,
            horizon: 15.0,
            seed: 0,
        }
    }
}

/// `ε(e) = ε_end + (ε_start − ε_end)·exp(−5e/E)`.
pub fn epsilon_schedule(e: usize, episodes: usize, eps_start: f64, eps_end: f64) -> f64 {
    eps_end + (eps_start - eps_end) * (-5.0 * e as f64 / episodes.max(1) as f64).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    pub q: Vec<Vec<f64>>,
    pub visits: Vec<Vec<u64>>,
    pub config: QLearningConfig,
    pub model_hash: String,
}

impl QTable {
    fn zeros(n: usize, m: usize, config: QLearningConfig, model: &ModelBundle) -> Self {
        Self {
            q: vec![vec![0.0; m]; n],
            visits: vec![vec![0; m]; n],
            config,
            model_hash: model.hash().to_string(),
        }
    }

    /// Greedy action at grid point `g`; ties go to the lowest action index.
    pub fn greedy(&self, g: usize) -> usize {
        let row = &self.q[g];
        (0..row.len()).fold(0, |b, a| if row[a] > row[b] { a } else { b })
    }

    pub fn grid(&self, k: usize) -> Result<BeliefGrid> {
        BeliefGrid::new(k, self.config.spacing)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        save_json(self, path.as_ref())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        load_json(path.as_ref())
    }
}

pub(crate) fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub(crate) fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

/// ε-greedy Q-learning against the event-driven simulator.
///
/// Each transition yields reward `R(a, s)` for the regime held during the
/// sojourn and one discounted update; the segment cut by the horizon is not
/// used.
pub fn qlearning_train(model: &ModelBundle, config: QLearningConfig) -> Result<QTable> {
    if !(config.lr >= 0.0) || !(config.horizon > 0.0) {
        return Err(Error::InvalidArgument(
            "lr must be >= 0 and horizon > 0".into(),
        ));
    }
    if !(0.0..=1.0).contains(&config.eps_end)
        || !(config.eps_end <= config.eps_start && config.eps_start <= 1.0)
    {
        return Err(Error::InvalidArgument(
            "need 0 <= eps_end <= eps_start <= 1".into(),
        ));
    }
    let grid = BeliefGrid::new(model.k(), config.spacing)?;
    let m = model.m();
    let gamma = model.gamma();
    let mut table = QTable::zeros(grid.len(), m, config, model);
    let mut explore = rng_from_seed(derive(config.seed, &[1]));
    let sampler = HoldingTimeSampler::Exponential;
    let mut filter = BeliefFilter::new(model.clone());

    for e in 0..config.episodes {
        let eps = epsilon_schedule(e, config.episodes, config.eps_start, config.eps_end);
        let (mut env, z0) = GillespieEnv::start(
            model,
            &sampler,
            config.horizon,
            derive(config.seed, &[0, e as u64]),
        );
        filter.reset();
        filter.observe(z0, 0.0);
        let mut g = grid.nearest(filter.belief());
        loop {
            let a = if explore.random::<f64>() < eps {
                explore.random_range(0..m)
            } else {
                table.greedy(g)
            };
            let Some(tr) = env.step(a) else { break };
            let r = model.reward().get(a, tr.from);
            filter.record_action(a);
            filter.observe(tr.observation, tr.sojourn);
            let g2 = grid.nearest(filter.belief());
            let target = r + gamma
                * table.q[g2]
                    .iter()
                    .cloned()
                    .fold(f64::NEG_INFINITY, f64::max);
            table.q[g][a] += config.lr * (target - table.q[g][a]);
            table.visits[g][a] += 1;
            g = g2;
        }
    }
    Ok(table)
}

/// Greedy evaluation policy over the filtered belief.
#[derive(Debug, Clone)]
pub struct QLearningController {
    filter: BeliefFilter,
    grid: BeliefGrid,
    table: QTable,
}

impl QLearningController {
    pub fn new(model: &ModelBundle, table: QTable) -> Result<Self> {
        let grid = table.grid(model.k())?;
        if table.q.len() != grid.len() || table.q.iter().any(|r| r.len() != model.m()) {
            return Err(Error::Dimension(
                "Q-table does not match model and grid".into(),
            ));
        }
        Ok(Self {
            filter: BeliefFilter::new(model.clone()),
            grid,
            table,
        })
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }
}

impl Controller for QLearningController {
    fn reset(&mut self) {
        self.filter.reset();
    }

    fn observe(&mut self, z: usize, sojourn: f64) {
        self.filter.observe(z, sojourn);
    }

    fn decide(&mut self, _ctx: &DecisionContext) -> usize {
        let a = self.table.greedy(self.grid.nearest(self.filter.belief()));
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
