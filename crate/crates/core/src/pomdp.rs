// SPDX-License-Identifier: Apache-2.0

//! Belief filtering and point-based value iteration.

use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::ValueFunction;
use crate::model::{ModelBundle, HEALTHY};
use crate::rng::rng_from_seed;
use crate::sim::{Controller, DecisionContext};

pub const UNDERFLOW: f64 = 1e-300;
pub const DEFAULT_BUDGET: usize = 500;
pub const DEFAULT_WINDOW: usize = 25;
pub const DEFAULT_RANDOM_POINTS: usize = 185;

/// Probability vector over regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Belief(Vec<f64>);

impl Belief {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Dimension("belief must be nonempty".into()));
        }
        if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Range("belief entries must lie in [0, 1]".into()));
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::RowSum {
                what: "belief",
                row: 0,
                sum,
                tol: 1e-9,
            });
        }
        Ok(Self(p))
    }

    pub fn point_mass(k: usize, s: usize) -> Self {
        let mut p = vec![0.0; k];
        p[s] = 1.0;
        Self(p)
    }

    pub fn uniform(k: usize) -> Self {
        Self(vec![1.0 / k as f64; k])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    fn dot(&self, v: &[f64]) -> f64 {
        self.0.iter().zip(v).map(|(a, b)| a * b).sum()
    }
}

/// Filter update after a sojourn `tau` under action `a` ending with label `z`.
///
/// Prediction is `bᵀ·exp(Q⁽ᵃ⁾τ)`; the correction reweights by `O(·, z)`.
/// An underflowing normalizer resets to the uniform belief.
pub fn belief_step(b: &Belief, a: usize, tau: f64, z: usize, model: &ModelBundle) -> Belief {
    let pred = if tau == 0.0 {
        b.0.clone()
    } else {
        model.generator(a).transition_over(tau).vec_mul(&b.0)
    };
    correct(pred, z, model)
}

fn correct(pred: Vec<f64>, z: usize, model: &ModelBundle) -> Belief {
    let k = pred.len();
    let mut post: Vec<f64> = pred
        .iter()
        .enumerate()
        .map(|(s, &p)| p.max(0.0) * model.observation().get(s, z))
        .collect();
    let norm: f64 = post.iter().sum();
    if !(norm >= UNDERFLOW) {
        return Belief::uniform(k);
    }
    post.iter_mut().for_each(|x| *x /= norm);
    Belief(post)
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            go(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, k, size, &mut Vec::new(), &mut out);
    out
}

/// Corners, edge midpoints, face centroids, the simplex centroid, then
/// `n_random` uniform draws on the simplex. Exact duplicates are dropped.
pub fn generate_belief_points(k: usize, n_random: usize, seed: u64) -> Result<Vec<Belief>> {
    if k < 2 {
        return Err(Error::InvalidArgument("belief grid needs K >= 2".into()));
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let push = |p: Vec<f64>, pts: &mut Vec<Vec<f64>>| {
        if !pts.contains(&p) {
            pts.push(p);
        }
    };
    for size in [1, 2, 3] {
        for sub in subsets(k, size) {
            let mut p = vec![0.0; k];
            for &i in &sub {
                p[i] = 1.0 / size as f64;
            }
            push(p, &mut pts);
        }
    }
    push(vec![1.0 / k as f64; k], &mut pts);
    let mut rng = rng_from_seed(seed);
    for _ in 0..n_random {
        let x: Vec<f64> = (0..k).map(|_| Exp1.sample(&mut rng)).collect::<Vec<f64>>();
        let s: f64 = x.iter().sum();
        push(x.iter().map(|v| v / s).collect(), &mut pts);
    }
    Ok(pts.into_iter().map(Belief).collect())
}

/// `Σ_{s} α(s)·b(s)`-style value vector tagged with the action that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaVector {
    pub values: Vec<f64>,
    pub action: usize,
}

impl AlphaVector {
    pub fn dot(&self, b: &Belief) -> f64 {
        b.dot(&self.values)
    }

    fn dominated_by(&self, other: &AlphaVector) -> bool {
        self.values.iter().zip(&other.values).all(|(a, b)| a <= b)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AlphaVectorSet {
    vectors: Vec<AlphaVector>,
}

impl AlphaVectorSet {
    /// Drops exact duplicates; fails on an empty or non-finite set.
    pub fn new(vectors: Vec<AlphaVector>) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidArgument("alpha-vector set is empty".into()));
        }
        if vectors
            .iter()
            .any(|v| v.values.iter().any(|x| !x.is_finite()))
        {
            return Err(Error::Range("alpha-vector entries must be finite".into()));
        }
        let mut out: Vec<AlphaVector> = Vec::with_capacity(vectors.len());
        for v in vectors {
            if !out.contains(&v) {
                out.push(v);
            }
        }
        Ok(Self { vectors: out })
    }

    /// One copy of `v` per action.
    pub fn warm_start(v: &ValueFunction, m: usize) -> Self {
        Self {
            vectors: (0..m)
                .map(|a| AlphaVector {
                    values: v.0.clone(),
                    action: a,
                })
                .collect(),
        }
    }

    pub fn vectors(&self) -> &[AlphaVector] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn value(&self, b: &Belief) -> f64 {
        alpha_policy(self, b).1
    }

    /// Removes vectors weakly dominated in every coordinate by another;
    /// among equal-valued vectors the earliest survives.
    pub fn prune_dominated(&mut self) {
        let v = &self.vectors;
        let keep: Vec<bool> = (0..v.len())
            .map(|i| {
                !(0..v.len()).any(|j| {
                    j != i && v[i].dominated_by(&v[j]) && (v[i].values != v[j].values || j < i)
                })
            })
            .collect();
        let mut idx = 0;
        self.vectors.retain(|_| {
            idx += 1;
            keep[idx - 1]
        });
    }
}

/// Action tag and value of the best vector at `b`; ties go to the lowest index.
pub fn alpha_policy(set: &AlphaVectorSet, b: &Belief) -> (usize, f64) {
    let mut best = (set.vectors[0].action, set.vectors[0].dot(b));
    for v in &set.vectors[1..] {
        let x = v.dot(b);
        if x > best.1 {
            best = (v.action, x);
        }
    }
    best
}

/// `g[a][z][i](s) = Σ_{s′} A⁽ᵃ⁾[s,s′]·O(s′,z)·αᵢ(s′)`.
fn projections(set: &AlphaVectorSet, model: &ModelBundle) -> Vec<Vec<Vec<Vec<f64>>>> {
    let (k, m) = (model.k(), model.m());
    (0..m)
        .map(|a| {
            let t = model.transition(a).matrix();
            (0..k)
                .map(|z| {
                    set.vectors
                        .iter()
                        .map(|alpha| {
                            let w: Vec<f64> = (0..k)
                                .map(|s2| model.observation().get(s2, z) * alpha.values[s2])
                                .collect();
                            t.mul_vec(&w)
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn backup_one(b: &Belief, g: &[Vec<Vec<Vec<f64>>>], model: &ModelBundle) -> AlphaVector {
    let (k, m) = (model.k(), model.m());
    let gamma = model.gamma();
    let mut best: Option<(f64, AlphaVector)> = None;
    for (a, ga) in g.iter().enumerate().take(m) {
        let mut values: Vec<f64> = model.reward().row(a).to_vec();
        for gz in ga {
            let mut pick = 0;
            let mut pick_val = b.dot(&gz[0]);
            for (i, gi) in gz.iter().enumerate().skip(1) {
                let x = b.dot(gi);
                if x > pick_val {
                    pick = i;
                    pick_val = x;
                }
            }
            for s in 0..k {
                values[s] += gamma * gz[pick][s];
            }
        }
        let v = b.dot(&values);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, AlphaVector { values, action: a }));
        }
    }
    best.expect("at least one action").1
}

/// One point-based Bellman backup at every belief, followed by duplicate removal.
pub fn pbvi_backup(
    beliefs: &[Belief],
    set: &AlphaVectorSet,
    model: &ModelBundle,
) -> Result<AlphaVectorSet> {
    if beliefs.is_empty() {
        return Err(Error::InvalidArgument("no belief points".into()));
    }
    let g = projections(set, model);
    let out: Vec<AlphaVector> = beliefs
        .par_iter()
        .map(|b| backup_one(b, &g, model))
        .collect();
    AlphaVectorSet::new(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PbviStatus {
    PolicyStable,
    BudgetExhausted,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PbviSolution {
    pub alpha: AlphaVectorSet,
    pub iterations: usize,
    pub residuals: Vec<f64>,
    pub status: PbviStatus,
    pub budget: usize,
    pub window: usize,
    pub model_hash: String,
}

impl PbviSolution {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// PBVI from the per-action MDP warm start. Stops once the greedy action map
/// over `beliefs` has been unchanged for `window` sweeps, or after `budget` sweeps.
pub fn pbvi_solve(
    model: &ModelBundle,
    beliefs: &[Belief],
    warm_start: &ValueFunction,
    budget: usize,
    window: usize,
) -> Result<PbviSolution> {
    if budget == 0 || window == 0 {
        return Err(Error::InvalidArgument(
            "budget and window must be >= 1".into(),
        ));
    }
    if beliefs.is_empty() {
        return Err(Error::InvalidArgument("no belief points".into()));
    }
    let mut set = AlphaVectorSet::warm_start(warm_start, model.m());
    let eval = |set: &AlphaVectorSet| -> (Vec<usize>, Vec<f64>) {
        beliefs.iter().map(|b| alpha_policy(set, b)).unzip()
    };
    let (mut actions, mut values) = eval(&set);
    let mut residuals = Vec::new();
    let mut stable = 0;
    let mut status = PbviStatus::BudgetExhausted;
    for _ in 0..budget {
        let mut next = pbvi_backup(beliefs, &set, model)?;
        next.prune_dominated();
        let (a2, v2) = eval(&next);
        residuals.push(
            values
                .iter()
                .zip(&v2)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        );
        stable = if a2 == actions { stable + 1 } else { 0 };
        set = next;
        actions = a2;
        values = v2;
        if stable >= window {
            status = PbviStatus::PolicyStable;
            break;
        }
    }
    Ok(PbviSolution {
        alpha: set,
        iterations: residuals.len(),
        residuals,
        status,
        budget,
        window,
        model_hash: model.hash().to_string(),
    })
}

/// `b₀ᵀV_MDP − V_POMDP(b₀)`, unclamped.
pub fn value_of_information(v_mdp: &ValueFunction, set: &AlphaVectorSet, b0: &Belief) -> f64 {
    v_mdp.dot(b0.as_slice()) - set.value(b0)
}

/// Recursive filter driven by the labels a controller receives.
#[derive(Debug, Clone)]
pub struct BeliefFilter {
    model: ModelBundle,
    b0: Belief,
    belief: Belief,
    last_action: usize,
}

impl BeliefFilter {
    /// Starts from the healthy point mass.
    pub fn new(model: ModelBundle) -> Self {
        let b0 = Belief::point_mass(model.k(), HEALTHY);
        let last_action = model.actions().no_action();
        Self {
            model,
            belief: b0.clone(),
            b0,
            last_action,
        }
    }

    pub fn with_initial_belief(mut self, b0: Belief) -> Self {
        self.belief = b0.clone();
        self.b0 = b0;
        self
    }

    pub fn reset(&mut self) {
        self.belief = self.b0.clone();
        self.last_action = self.model.actions().no_action();
    }

    /// Conditions on label `z` after a sojourn under the last recorded action.
    pub fn observe(&mut self, z: usize, sojourn: f64) {
        self.belief = belief_step(&self.belief, self.last_action, sojourn, z, &self.model);
    }

    pub fn record_action(&mut self, a: usize) {
        self.last_action = a;
    }

    pub fn belief(&self) -> &Belief {
        &self.belief
    }

    pub fn model(&self) -> &ModelBundle {
        &self.model
    }
}

/// Belief-feedback controller acting greedily on an alpha-vector set.
#[derive(Debug, Clone)]
pub struct PomdpController {
    filter: BeliefFilter,
    alpha: AlphaVectorSet,
}

impl PomdpController {
    pub fn new(model: ModelBundle, alpha: AlphaVectorSet) -> Self {
        Self {
            filter: BeliefFilter::new(model),
            alpha,
        }
    }

    pub fn with_initial_belief(mut self, b0: Belief) -> Self {
        self.filter = self.filter.with_initial_belief(b0);
        self
    }
}

impl Controller for PomdpController {
    fn reset(&mut self) {
        self.filter.reset();
    }

    fn observe(&mut self, z: usize, sojourn: f64) {
        self.filter.observe(z, sojourn);
    }

    fn decide(&mut self, _ctx: &DecisionContext) -> usize {
        let a = alpha_policy(&self.alpha, self.filter.belief()).0;
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

/// Draws a random point on the simplex; used by property tests and benches.
pub fn random_belief<R: Rng>(k: usize, rng: &mut R) -> Belief {
    let x: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = x.iter().sum();
    Belief(x.iter().map(|v| v / s).collect())
}
