// SPDX-License-Identifier: Apache-2.0

//! Event-driven simulation of the controlled chain.
//!
//! From the current regime `s` under action `a`, exit rates are the clamped
//! off-diagonal entries of the generator row, `λ_{s′} = max(Q(a)[s,s′], 0)`,
//! with total `Λ`. A sojourn `τ ~ Exp(Λ)` is drawn (or taken from an
//! empirical table), the next regime is drawn with probabilities `λ/Λ`, and
//! a label is emitted through the observation channel. The controller sees
//! one label at `t = 0` and one per transition, and picks the action applied
//! until the next transition.
//!
//! Draw order per trajectory is fixed (initial label, then sojourn, next
//! regime, label for each step) so that a trajectory is a pure function of
//! its seed.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::StatePolicy;
use crate::model::{ModelBundle, HEALTHY};
use crate::rng::{rng_from_seed, stream_seed, StreamRng};

/// Sojourn-time law.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub enum HoldingTimeSampler {
    /// `Exp(Λ)`.
    #[default]
    Exponential,
    /// Empirical sojourn samples indexed `[state][action]`; an empty cell
    /// falls back to `Exp(Λ)`.
    Empirical(Vec<Vec<Vec<f64>>>),
}

impl HoldingTimeSampler {
    pub fn empirical(table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if table
            .iter()
            .flatten()
            .flatten()
            .any(|&x| !(x > 0.0 && x.is_finite()))
        {
            return Err(Error::Range(
                "empirical holding times must be positive and finite".into(),
            ));
        }
        Ok(Self::Empirical(table))
    }

    fn sample<R: Rng>(&self, s: usize, a: usize, total_rate: f64, rng: &mut R) -> f64 {
        match self {
            HoldingTimeSampler::Empirical(table) => {
                match table
                    .get(s)
                    .and_then(|row| row.get(a))
                    .filter(|c| !c.is_empty())
                {
                    Some(cell) => cell[rng.random_range(0..cell.len())],
                    None => Exp::new(total_rate).expect("positive rate").sample(rng),
                }
            }
            HoldingTimeSampler::Exponential => {
                Exp::new(total_rate).expect("positive rate").sample(rng)
            }
        }
    }
}

/// What a controller may look at when choosing an action.
#[derive(Debug, Clone, Copy)]
pub struct DecisionContext {
    pub t: f64,
    /// Only state-feedback controllers are allowed to read this.
    pub true_state: usize,
    pub observation: usize,
}

/// Behavioural contract shared by every policy the simulator can run.
///
/// Per trajectory: `reset`, then `observe(z₀, 0)` and `decide` at `t = 0`,
/// then `observe(z, τ)` followed by `decide` at every transition. Given the
/// same inputs a controller must return the same actions.
pub trait Controller: Send + Sync {
    fn reset(&mut self);

    /// New label `z` after a sojourn of length `sojourn` under the last action.
    fn observe(&mut self, z: usize, sojourn: f64);

    fn decide(&mut self, ctx: &DecisionContext) -> usize;

    fn belief(&self) -> Option<&[f64]> {
        None
    }

    fn clone_box(&self) -> Box<dyn Controller>;
}

impl Clone for Box<dyn Controller> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// Always applies the inert action.
#[derive(Debug, Clone)]
pub struct NoActionController {
    action: usize,
}

impl NoActionController {
    pub fn new(model: &ModelBundle) -> Self {
        Self {
            action: model.actions().no_action(),
        }
    }
}

impl Controller for NoActionController {
    fn reset(&mut self) {}

    fn observe(&mut self, _z: usize, _sojourn: f64) {}

    fn decide(&mut self, _ctx: &DecisionContext) -> usize {
        self.action
    }

    fn clone_box(&self) -> Box<dyn Controller> {
        Box::new(self.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryEvent {
    pub t: f64,
    pub true_state: usize,
    pub observation: usize,
    pub belief: Option<Vec<f64>>,
    pub action: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub events: Vec<TrajectoryEvent>,
    pub horizon: f64,
    pub seed: u64,
}

impl Trajectory {
    /// `(start, end, event)` for each constant segment, the last closing at the horizon.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, &TrajectoryEvent)> + '_ {
        self.events.iter().enumerate().map(move |(i, e)| {
            let end = self.events.get(i + 1).map_or(self.horizon, |n| n.t);
            (e.t, end, e)
        })
    }

    /// Regime occupied at time `t` (right-continuous).
    pub fn state_at(&self, t: f64) -> usize {
        let idx = self.events.partition_point(|e| e.t <= t);
        self.events[idx.saturating_sub(1)].true_state
    }
}

pub(crate) fn sample_categorical<R: Rng>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// One realised transition.
#[derive(Debug, Clone, Copy)]
pub struct Transition {
    pub sojourn: f64,
    pub from: usize,
    pub to: usize,
    pub observation: usize,
    pub t: f64,
}

/// Stepping interface over the controlled chain, shared by the simulator
/// and the model-free learners.
pub struct GillespieEnv<'a> {
    model: &'a ModelBundle,
    sampler: &'a HoldingTimeSampler,
    horizon: f64,
    t: f64,
    state: usize,
    rng: StreamRng,
}

impl<'a> GillespieEnv<'a> {
    /// Starts in the healthy regime; returns the environment and the initial label.
    pub fn start(
        model: &'a ModelBundle,
        sampler: &'a HoldingTimeSampler,
        horizon: f64,
        seed: u64,
    ) -> (Self, usize) {
        let mut rng = rng_from_seed(seed);
        let z0 = sample_categorical(model.observation().row(HEALTHY), &mut rng);
        (
            Self {
                model,
                sampler,
                horizon,
                t: 0.0,
                state: HEALTHY,
                rng,
            },
            z0,
        )
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn state(&self) -> usize {
        self.state
    }

    /// Advances under action `a`. `None` once the horizon is reached or the
    /// regime is absorbing under `a`.
    pub fn step(&mut self, a: usize) -> Option<Transition> {
        let rates: Vec<f64> = self
            .model
            .generator(a)
            .exit_rates(self.state)
            .map(|(_, r)| r)
            .collect();
        let total: f64 = rates.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let tau = self.sampler.sample(self.state, a, total, &mut self.rng);
        if self.t + tau > self.horizon {
            return None;
        }
        let next = sample_categorical(&rates, &mut self.rng);
        let z = sample_categorical(self.model.observation().row(next), &mut self.rng);
        let from = self.state;
        self.t += tau;
        self.state = next;
        Some(Transition {
            sojourn: tau,
            from,
            to: next,
            observation: z,
            t: self.t,
        })
    }
}

/// Simulates one trajectory from the healthy regime.
pub fn simulate_trajectory(
    model: &ModelBundle,
    controller: &mut dyn Controller,
    horizon: f64,
    seed: u64,
    sampler: &HoldingTimeSampler,
) -> Trajectory {
    let (mut env, z0) = GillespieEnv::start(model, sampler, horizon, seed);
    controller.reset();
    controller.observe(z0, 0.0);
    let mut action = controller.decide(&DecisionContext {
        t: 0.0,
        true_state: env.state(),
        observation: z0,
    });
    let mut events = vec![TrajectoryEvent {
        t: 0.0,
        true_state: env.state(),
        observation: z0,
        belief: controller.belief().map(<[f64]>::to_vec),
        action,
    }];
    while let Some(tr) = env.step(action) {
        controller.observe(tr.observation, tr.sojourn);
        action = controller.decide(&DecisionContext {
            t: tr.t,
            true_state: tr.to,
            observation: tr.observation,
        });
        events.push(TrajectoryEvent {
            t: tr.t,
            true_state: tr.to,
            observation: tr.observation,
            belief: controller.belief().map(<[f64]>::to_vec),
            action,
        });
    }
    Trajectory {
        events,
        horizon,
        seed,
    }
}

/// Simulates `n` trajectories; trajectory `i` uses stream `stream_seed(base_seed, i)`
/// and a fresh clone of `controller`. Output order is by index.
pub fn simulate_batch(
    model: &ModelBundle,
    controller: &dyn Controller,
    n: usize,
    horizon: f64,
    base_seed: u64,
    sampler: &HoldingTimeSampler,
) -> Vec<Trajectory> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut c = controller.clone_box();
            simulate_trajectory(
                model,
                c.as_mut(),
                horizon,
                stream_seed(base_seed, i),
                sampler,
            )
        })
        .collect()
}

/// Exact discounted return of a trajectory:
/// `Σ_i (c_i/ρ)·e^{−ρt_i}·(1 − e^{−ρΔ_i})` with `c = R/Δt`.
pub fn discounted_return(traj: &Trajectory, model: &ModelBundle) -> f64 {
    return_until(traj, model, traj.horizon)
}

/// Discounted return accrued on `[0, t]`.
pub fn return_until(traj: &Trajectory, model: &ModelBundle, t: f64) -> f64 {
    let rho = model.discount().rho_ct();
    let dt = model.dt();
    let mut j = 0.0;
    for (start, end, e) in traj.segments() {
        if start >= t {
            break;
        }
        let end = end.min(t);
        let c = model.reward().get(e.action, e.true_state) / dt;
        j += if rho > 0.0 && rho.is_finite() {
            -(c / rho) * (-rho * start).exp() * (-rho * (end - start)).exp_m1()
        } else if rho == 0.0 {
            c * (end - start)
        } else {
            0.0
        };
    }
    j
}

/// Fraction of trajectories in each regime at every bin midpoint of `edges`.
pub fn occupancy_stats(trajs: &[Trajectory], edges: &[f64]) -> Result<Vec<(f64, Vec<f64>)>> {
    let mids: Vec<f64> = edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
    Ok(mids
        .iter()
        .copied()
        .zip(occupancy_at(trajs, &mids)?)
        .collect())
}

/// Fraction of trajectories in each regime at the given times.
pub fn occupancy_at(trajs: &[Trajectory], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    let first = trajs
        .first()
        .ok_or_else(|| Error::InvalidArgument("occupancy needs at least one trajectory".into()))?;
    if trajs.iter().any(|t| t.horizon != first.horizon) {
        return Err(Error::InvalidArgument(
            "occupancy needs a common horizon".into(),
        ));
    }
    let k = trajs
        .iter()
        .flat_map(|t| t.events.iter().map(|e| e.true_state))
        .max()
        .unwrap_or(0)
        + 1;
    let n = trajs.len() as f64;
    Ok(times
        .iter()
        .map(|&t| {
            let mut counts = vec![0.0; k.max(1)];
            for tr in trajs {
                counts[tr.state_at(t)] += 1.0;
            }
            counts.iter().map(|c| c / n).collect()
        })
        .collect())
}

/// Same as [`occupancy_at`] but padded to `k` regimes.
pub fn occupancy_at_k(trajs: &[Trajectory], times: &[f64], k: usize) -> Result<Vec<Vec<f64>>> {
    let mut occ = occupancy_at(trajs, times)?;
    for row in &mut occ {
        row.resize(k.max(row.len()), 0.0);
    }
    Ok(occ)
}

/// Detection record for one fault regime within one trajectory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EpisodeDelays {
    /// Onset-to-repair latencies of episodes that were repaired.
    pub detected: Vec<f64>,
    /// Episodes that ended (return to the healthy regime) without the repair.
    pub missed: usize,
    /// Episodes cut by the horizon before any repair; excluded from averages.
    pub truncated: usize,
}

impl EpisodeDelays {
    /// Mean latency; `∞` if every finished episode was missed, `None` if
    /// there were no finished episodes.
    pub fn mean(&self) -> Option<f64> {
        if !self.detected.is_empty() {
            Some(self.detected.iter().sum::<f64>() / self.detected.len() as f64)
        } else if self.missed > 0 {
            Some(f64::INFINITY)
        } else {
            None
        }
    }

    pub fn merge(&mut self, other: &EpisodeDelays) {
        self.detected.extend_from_slice(&other.detected);
        self.missed += other.missed;
        self.truncated += other.truncated;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMetrics {
    pub fraction_nominal: f64,
    /// Indexed by regime; the healthy entry stays empty.
    pub delays: Vec<EpisodeDelays>,
    pub mismatch_rate: f64,
    /// Whether any action other than the inert one was applied.
    pub intervened: bool,
}

/// Fidelity, latency and action-quality metrics of one trajectory.
///
/// A fault excursion is a maximal interval away from the healthy regime.
/// Within an excursion, the onset of regime `r` is its first entry; the
/// episode is detected at the first time at or after that onset when the
/// canonical repair for `r` is applied.
pub fn trajectory_metrics(
    traj: &Trajectory,
    model: &ModelBundle,
    reference: &StatePolicy,
) -> TrajectoryMetrics {
    let k = model.k();
    let horizon = traj.horizon;
    let mut healthy_time = 0.0;
    let mut mismatch_time = 0.0;
    let mut intervened = false;
    let no_action = model.actions().no_action();

    for (start, end, e) in traj.segments() {
        let len = end - start;
        if e.true_state == HEALTHY {
            healthy_time += len;
        }
        if e.action != reference.action(e.true_state) {
            mismatch_time += len;
        }
        intervened |= e.action != no_action;
    }

    let mut delays = vec![EpisodeDelays::default(); k];
    // Per excursion: onset time of each regime and whether it has been repaired.
    let mut onset: Vec<Option<f64>> = vec![None; k];
    let mut repaired = vec![false; k];
    let close = |onset: &mut Vec<Option<f64>>,
                 repaired: &mut Vec<bool>,
                 delays: &mut Vec<EpisodeDelays>,
                 truncated: bool| {
        for r in 0..k {
            if onset[r].is_some() && !repaired[r] {
                if truncated {
                    delays[r].truncated += 1;
                } else {
                    delays[r].missed += 1;
                }
            }
            onset[r] = None;
            repaired[r] = false;
        }
    };
    for e in &traj.events {
        if e.true_state == HEALTHY {
            close(&mut onset, &mut repaired, &mut delays, false);
            continue;
        }
        if onset[e.true_state].is_none() {
            onset[e.true_state] = Some(e.t);
        }
        for r in 0..k {
            if let Some(t0) = onset[r] {
                if !repaired[r] && model.actions().canonical_repair(r) == Some(e.action) {
                    repaired[r] = true;
                    delays[r].detected.push(e.t - t0);
                }
            }
        }
    }
    close(&mut onset, &mut repaired, &mut delays, true);

    TrajectoryMetrics {
        fraction_nominal: healthy_time / horizon,
        delays,
        mismatch_rate: mismatch_time / horizon,
        intervened,
    }
}

/// Writes `t,true_state,observation,action,belief_0..belief_{K−1}`.
pub fn write_trajectory_csv(traj: &Trajectory, k: usize, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("t,true_state,observation,action");
    for i in 0..k {
        out.push_str(&format!(",belief_{i}"));
    }
    out.push('\n');
    for e in &traj.events {
        out.push_str(&format!(
            "{},{},{},{}",
            e.t, e.true_state, e.observation, e.action
        ));
        for i in 0..k {
            match &e.belief {
                Some(b) => out.push_str(&format!(",{}", b[i])),
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}
