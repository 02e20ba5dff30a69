// SPDX-License-Identifier: Apache-2.0

//! Typed decision-model bundle.
//!
//! A [`ModelBundle`] holds everything the solvers and the simulator need:
//! regime and action labels, the no-intervention transition kernel, repair
//! probabilities, rewards, the observation channel and the discount
//! specification. Action-dependent kernels are built once at construction:
//! for every action `a` and regime `s`,
//!
//! ```text
//! A(a)[s, ·] = (1 − ρ[a, s]) · A(none)[s, ·] + ρ[a, s] · e_healthy
//! ```
//!
//! so a successful repair redirects mass to the healthy regime (index 0).

use std::collections::BTreeMap;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ctmc::{embed_generator, GeneratorMatrix};
use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Index of the designated healthy regime.
pub const HEALTHY: usize = 0;

/// Row-sum tolerance for hand-entered (ingested) matrices.
pub const INGEST_TOL: f64 = 1e-9;

/// Row-sum tolerance for matrices built internally.
pub const BUILD_TOL: f64 = 1e-12;

/// Default Laplace smoothing mass.
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeSet {
    labels: Vec<String>,
}

impl RegimeSet {
    pub fn new(labels: Vec<String>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::Dimension(format!(
                "need at least 2 regimes, got {}",
                labels.len()
            )));
        }
        check_unique(&labels, "regime")?;
        Ok(Self { labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Short column tag for a regime, e.g. `SensorNoisy` → `SN`, `Drift` → `DR`.
    pub fn abbreviation(&self, s: usize) -> String {
        let label = &self.labels[s];
        let caps: String = label.chars().filter(|c| c.is_ascii_uppercase()).collect();
        if caps.len() >= 2 {
            caps
        } else {
            label
                .chars()
                .take(2)
                .collect::<String>()
                .to_ascii_uppercase()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSet {
    labels: Vec<String>,
    no_action: usize,
    /// Canonical repair per regime; `None` for the healthy regime.
    canonical_repair: Vec<Option<usize>>,
}

impl ActionSet {
    pub fn new(
        labels: Vec<String>,
        no_action: usize,
        canonical_repair: Vec<Option<usize>>,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::Dimension("need at least one action".into()));
        }
        check_unique(&labels, "action")?;
        if no_action >= labels.len() {
            return Err(Error::Dimension(format!(
                "no_action index {no_action} out of range"
            )));
        }
        if canonical_repair.get(HEALTHY).copied().flatten().is_some() {
            return Err(Error::InvalidArgument(
                "canonical repair must not map the healthy regime".into(),
            ));
        }
        if let Some(bad) = canonical_repair
            .iter()
            .flatten()
            .find(|&&a| a >= labels.len())
        {
            return Err(Error::Dimension(format!(
                "canonical repair action {bad} out of range"
            )));
        }
        Ok(Self {
            labels,
            no_action,
            canonical_repair,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn no_action(&self) -> usize {
        self.no_action
    }

    pub fn canonical_repair(&self, regime: usize) -> Option<usize> {
        self.canonical_repair.get(regime).copied().flatten()
    }

    pub fn canonical_repairs(&self) -> &[Option<usize>] {
        &self.canonical_repair
    }
}

fn check_unique(labels: &[String], what: &str) -> Result<()> {
    for (i, l) in labels.iter().enumerate() {
        if labels[..i].contains(l) {
            return Err(Error::InvalidArgument(format!(
                "duplicate {what} label {l:?}"
            )));
        }
    }
    Ok(())
}

fn check_probability_rows(m: &Matrix, what: &'static str, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    for i in 0..m.rows() {
        let row = m.row(i);
        if let Some(x) = row.iter().find(|x| !(-tol..=1.0 + tol).contains(*x)) {
            return Err(Error::Range(format!(
                "{what} row {i} has entry {x} outside [0,1]"
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::RowSum {
                what,
                row: i,
                sum,
                tol,
            });
        }
    }
    Ok(())
}

/// Row-stochastic K×K kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StochasticMatrix(Matrix);

impl StochasticMatrix {
    pub fn new(m: Matrix, tol: f64) -> Result<Self> {
        check_probability_rows(&m, "transition matrix", tol)?;
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(Matrix::from_rows(rows)?, INGEST_TOL)
    }

    pub fn identity(k: usize) -> Self {
        Self(Matrix::identity(k))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn row(&self, s: usize) -> &[f64] {
        self.0.row(s)
    }

    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.0[(s, t)]
    }

    /// Adds `epsilon` to every entry and renormalizes each row.
    pub fn laplace_smooth(m: &Matrix, epsilon: f64) -> Matrix {
        let mut out = m.map(|x| x + epsilon);
        for i in 0..out.rows() {
            let sum: f64 = out.row(i).iter().sum();
            out.row_mut(i).iter_mut().for_each(|x| *x /= sum);
        }
        out
    }
}

/// Per-step repair success probabilities, M×K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RepairProbabilities(Matrix);

impl RepairProbabilities {
    pub fn new(m: Matrix, no_action: usize) -> Result<Self> {
        if let Some(x) = m.as_slice().iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Range(format!(
                "repair probability {x} outside [0,1]"
            )));
        }
        if no_action >= m.rows() {
            return Err(Error::Dimension(
                "no_action row missing from repair table".into(),
            ));
        }
        if m.row(no_action).iter().any(|&x| x != 0.0) {
            return Err(Error::InvalidArgument(
                "the inert action must have zero repair probability".into(),
            ));
        }
        Ok(Self(m))
    }

    pub fn get(&self, a: usize, s: usize) -> f64 {
        self.0[(a, s)]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        self.0.row(a)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn actions(&self) -> usize {
        self.0.rows()
    }

    pub fn regimes(&self) -> usize {
        self.0.cols()
    }
}

/// Per-step reward `R(a, s)`, M×K.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RewardMatrix(Matrix);

impl RewardMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_finite() {
            return Err(Error::Range("reward matrix has non-finite entries".into()));
        }
        Ok(Self(m))
    }

    pub fn get(&self, a: usize, s: usize) -> f64 {
        self.0[(a, s)]
    }

    pub fn row(&self, a: usize) -> &[f64] {
        self.0.row(a)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn actions(&self) -> usize {
        self.0.rows()
    }

    pub fn regimes(&self) -> usize {
        self.0.cols()
    }
}

/// Observation channel `O[s, z] = P(z | s)`; rows are true regimes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObservationMatrix(Matrix);

impl ObservationMatrix {
    pub fn new(m: Matrix, tol: f64) -> Result<Self> {
        check_probability_rows(&m, "observation matrix", tol)?;
        Ok(Self(m))
    }

    pub fn identity(k: usize) -> Self {
        Self(Matrix::identity(k))
    }

    pub fn get(&self, s: usize, z: usize) -> f64 {
        self.0[(s, z)]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        self.0.row(s)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }
}

/// One published off-diagonal confusion mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Confusion {
    pub true_state: usize,
    pub observed: usize,
    pub mass: f64,
}

/// Inputs from which the observation matrix is completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSpec {
    pub diagonal: Vec<f64>,
    pub confusions: Vec<Confusion>,
}

impl ObservationSpec {
    /// Replaces regime `s`'s accuracy with `p`, sending the remaining mass
    /// entirely to the healthy label.
    pub fn with_accuracy(&self, s: usize, p: f64) -> Self {
        let mut out = self.clone();
        out.diagonal[s] = p;
        out.confusions.retain(|c| c.true_state != s);
        if s != HEALTHY {
            out.confusions.push(Confusion {
                true_state: s,
                observed: HEALTHY,
                mass: 1.0 - p,
            });
        }
        out
    }

    pub fn build(&self) -> Result<ObservationMatrix> {
        build_observation_matrix(&self.diagonal, &self.confusions)
    }
}

/// Completes an observation matrix from per-regime accuracies and listed
/// confusion masses. Any residual row mass is spread uniformly over the
/// off-diagonal entries that were not listed.
pub fn build_observation_matrix(
    diagonal: &[f64],
    confusions: &[Confusion],
) -> Result<ObservationMatrix> {
    let k = diagonal.len();
    if let Some(d) = diagonal.iter().find(|d| !(0.0..=1.0).contains(*d)) {
        return Err(Error::Range(format!("accuracy {d} outside [0,1]")));
    }
    let mut m = Matrix::from_diagonal(diagonal);
    let mut listed = vec![vec![false; k]; k];
    for c in confusions {
        if c.true_state >= k || c.observed >= k {
            return Err(Error::Dimension(format!(
                "confusion ({}, {}) outside {k} regimes",
                c.true_state, c.observed
            )));
        }
        if c.true_state == c.observed {
            return Err(Error::InvalidArgument(
                "confusions must be off-diagonal".into(),
            ));
        }
        if !(c.mass >= 0.0) {
            return Err(Error::Range(format!("negative confusion mass {}", c.mass)));
        }
        m[(c.true_state, c.observed)] += c.mass;
        listed[c.true_state][c.observed] = true;
    }
    for s in 0..k {
        let used: f64 = m.row(s).iter().sum();
        let mut residual = 1.0 - used;
        if residual < -INGEST_TOL {
            return Err(Error::RowSum {
                what: "observation matrix",
                row: s,
                sum: used,
                tol: INGEST_TOL,
            });
        }
        if residual.abs() <= BUILD_TOL {
            residual = 0.0;
        }
        let free: Vec<usize> = (0..k).filter(|&z| z != s && !listed[s][z]).collect();
        if residual > 0.0 {
            if free.is_empty() {
                return Err(Error::RowSum {
                    what: "observation matrix",
                    row: s,
                    sum: used,
                    tol: INGEST_TOL,
                });
            }
            let share = residual / free.len() as f64;
            for z in free {
                m[(s, z)] = share;
            }
        }
    }
    ObservationMatrix::new(m, BUILD_TOL.max(INGEST_TOL))
}

/// Discount specification. The continuous rate is always derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    gamma: f64,
    dt: f64,
}

impl DiscountSpec {
    pub fn new(gamma: f64, dt: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::Discount(gamma));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Range(format!(
                "sampling interval {dt} must be positive"
            )));
        }
        Ok(Self { gamma, dt })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Continuous discount rate −ln(γ)/Δt (infinite for γ = 0).
    pub fn rho_ct(&self) -> f64 {
        -self.gamma.ln() / self.dt
    }
}

/// Row-wise repair redirection of the baseline kernel for action `a`.
pub fn build_action_transition(
    baseline: &StochasticMatrix,
    repair: &RepairProbabilities,
    a: usize,
) -> StochasticMatrix {
    let k = baseline.dim();
    let mut m = Matrix::zeros(k, k);
    for s in 0..k {
        let rho = repair.get(a, s);
        for t in 0..k {
            m[(s, t)] = (1.0 - rho) * baseline.get(s, t);
        }
        m[(s, HEALTHY)] += rho;
    }
    StochasticMatrix(m)
}

/// Multiplies every repair probability by `lambda ∈ [0, 1]`.
pub fn scale_repair(repair: &RepairProbabilities, lambda: f64) -> Result<RepairProbabilities> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Range(format!("repair scale {lambda} outside [0,1]")));
    }
    Ok(RepairProbabilities(repair.0.scale(lambda)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbMode {
    /// R′ = α·R
    UniformScale,
    /// Negative entries multiplied by β; positive entries kept.
    PenaltyScale,
    /// R′ = R + N(0, σ²) per entry.
    Gaussian,
}

pub fn perturb_reward(
    reward: &RewardMatrix,
    mode: PerturbMode,
    param: f64,
    seed: u64,
) -> Result<RewardMatrix> {
    let m = match mode {
        PerturbMode::UniformScale => reward.0.scale(param),
        PerturbMode::PenaltyScale => reward.0.map(|x| if x < 0.0 { x * param } else { x }),
        PerturbMode::Gaussian => {
            if !(param >= 0.0 && param.is_finite()) {
                return Err(Error::Range(format!("noise sigma {param} must be >= 0")));
            }
            if param == 0.0 {
                reward.0.clone()
            } else {
                let normal = Normal::new(0.0, param).expect("sigma validated");
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                reward.0.map(|x| x + normal.sample(&mut rng))
            }
        }
    };
    RewardMatrix::new(m)
}

/// JSON model file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub regimes: Vec<String>,
    pub actions: Vec<String>,
    pub no_action: String,
    #[serde(default)]
    pub canonical_repair: BTreeMap<String, String>,
    pub baseline: Vec<Vec<f64>>,
    pub repair: Vec<Vec<f64>>,
    pub reward: Vec<Vec<f64>>,
    pub observation_diagonal: Vec<f64>,
    #[serde(default)]
    pub confusions: Vec<ConfusionEntry>,
    pub gamma: f64,
    pub dt: f64,
    #[serde(default)]
    pub smooth: bool,
    #[serde(default)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfusionEntry {
    #[serde(rename = "true")]
    pub true_state: String,
    pub observed: String,
    pub mass: f64,
}

/// Complete decision-model specification.
#[derive(Debug, Clone)]
pub struct ModelBundle {
    regimes: RegimeSet,
    actions: ActionSet,
    baseline: StochasticMatrix,
    repair: RepairProbabilities,
    reward: RewardMatrix,
    observation: ObservationMatrix,
    observation_spec: Option<ObservationSpec>,
    discount: DiscountSpec,
    per_action: Vec<StochasticMatrix>,
    generators: Vec<GeneratorMatrix>,
    hash: String,
}

impl ModelBundle {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        regimes: RegimeSet,
        actions: ActionSet,
        baseline: StochasticMatrix,
        repair: RepairProbabilities,
        reward: RewardMatrix,
        observation: ObservationMatrix,
        observation_spec: Option<ObservationSpec>,
        discount: DiscountSpec,
    ) -> Result<Self> {
        let k = regimes.len();
        let m = actions.len();
        if baseline.dim() != k {
            return Err(Error::Dimension(format!(
                "baseline is {0}x{0}, expected {k}x{k}",
                baseline.dim()
            )));
        }
        if repair.actions() != m || repair.regimes() != k {
            return Err(Error::Dimension(format!(
                "repair table is {}x{}, expected {m}x{k}",
                repair.actions(),
                repair.regimes()
            )));
        }
        if reward.actions() != m || reward.regimes() != k {
            return Err(Error::Dimension(format!(
                "reward matrix is {}x{}, expected {m}x{k}",
                reward.actions(),
                reward.regimes()
            )));
        }
        if observation.dim() != k {
            return Err(Error::Dimension(format!(
                "observation matrix is {0}x{0}, expected {k}x{k}",
                observation.dim()
            )));
        }
        if actions.canonical_repairs().len() != k {
            return Err(Error::Dimension("canonical repair map length != K".into()));
        }
        // Re-check the inert row against the action set's notion of no-action.
        RepairProbabilities::new(repair.matrix().clone(), actions.no_action())?;

        let per_action: Vec<StochasticMatrix> = (0..m)
            .map(|a| build_action_transition(&baseline, &repair, a))
            .collect();
        let generators = per_action
            .iter()
            .map(|p| embed_generator(p, discount.dt()))
            .collect::<Result<Vec<_>>>()?;
        let mut bundle = Self {
            regimes,
            actions,
            baseline,
            repair,
            reward,
            observation,
            observation_spec,
            discount,
            per_action,
            generators,
            hash: String::new(),
        };
        bundle.hash = bundle.compute_hash();
        Ok(bundle)
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        let regimes = RegimeSet::new(file.regimes.clone())?;
        let k = regimes.len();
        let lookup_action = |name: &str| {
            file.actions
                .iter()
                .position(|a| a == name)
                .ok_or_else(|| Error::Parse(format!("unknown action {name:?}")))
        };
        let lookup_regime = |name: &str| {
            regimes
                .index_of(name)
                .ok_or_else(|| Error::Parse(format!("unknown regime {name:?}")))
        };
        let no_action = lookup_action(&file.no_action)?;
        let mut canonical = vec![None; k];
        for (regime, action) in &file.canonical_repair {
            canonical[lookup_regime(regime)?] = Some(lookup_action(action)?);
        }
        let actions = ActionSet::new(file.actions.clone(), no_action, canonical)?;

        let mut baseline = Matrix::from_rows(&file.baseline)?;
        if file.smooth {
            let eps = file.epsilon.unwrap_or(DEFAULT_EPSILON);
            if !(eps >= 0.0) {
                return Err(Error::Range(format!(
                    "smoothing epsilon {eps} must be >= 0"
                )));
            }
            baseline = StochasticMatrix::laplace_smooth(&baseline, eps);
        }
        let baseline = StochasticMatrix::new(baseline, INGEST_TOL)?;
        let repair = RepairProbabilities::new(Matrix::from_rows(&file.repair)?, no_action)?;
        let reward = RewardMatrix::new(Matrix::from_rows(&file.reward)?)?;

        if file.observation_diagonal.len() != k {
            return Err(Error::Dimension(format!(
                "observation_diagonal has {} entries, expected {k}",
                file.observation_diagonal.len()
            )));
        }
        let confusions = file
            .confusions
            .iter()
            .map(|c| {
                Ok(Confusion {
                    true_state: lookup_regime(&c.true_state)?,
                    observed: lookup_regime(&c.observed)?,
                    mass: c.mass,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let spec = ObservationSpec {
            diagonal: file.observation_diagonal.clone(),
            confusions,
        };
        let observation = spec.build()?;
        let discount = DiscountSpec::new(file.gamma, file.dt)?;
        Self::new(
            regimes,
            actions,
            baseline,
            repair,
            reward,
            observation,
            Some(spec),
            discount,
        )
    }

    fn compute_hash(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            regimes: &'a [String],
            actions: &'a [String],
            no_action: usize,
            canonical_repair: &'a [Option<usize>],
            baseline: &'a [f64],
            repair: &'a [f64],
            reward: &'a [f64],
            observation: &'a [f64],
            gamma: f64,
            dt: f64,
        }
        let c = Canonical {
            regimes: self.regimes.labels(),
            actions: self.actions.labels(),
            no_action: self.actions.no_action(),
            canonical_repair: self.actions.canonical_repairs(),
            baseline: self.baseline.matrix().as_slice(),
            repair: self.repair.matrix().as_slice(),
            reward: self.reward.matrix().as_slice(),
            observation: self.observation.matrix().as_slice(),
            gamma: self.discount.gamma(),
            dt: self.discount.dt(),
        };
        let bytes = serde_json::to_vec(&c).expect("canonical model serializes");
        let digest = Sha256::digest(&bytes);
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn k(&self) -> usize {
        self.regimes.len()
    }

    pub fn m(&self) -> usize {
        self.actions.len()
    }

    pub fn regimes(&self) -> &RegimeSet {
        &self.regimes
    }

    pub fn actions(&self) -> &ActionSet {
        &self.actions
    }

    pub fn baseline(&self) -> &StochasticMatrix {
        &self.baseline
    }

    pub fn repair(&self) -> &RepairProbabilities {
        &self.repair
    }

    pub fn reward(&self) -> &RewardMatrix {
        &self.reward
    }

    pub fn observation(&self) -> &ObservationMatrix {
        &self.observation
    }

    pub fn observation_spec(&self) -> Option<&ObservationSpec> {
        self.observation_spec.as_ref()
    }

    pub fn discount(&self) -> &DiscountSpec {
        &self.discount
    }

    pub fn gamma(&self) -> f64 {
        self.discount.gamma()
    }

    pub fn dt(&self) -> f64 {
        self.discount.dt()
    }

    /// Action-dependent kernel `A(a)`.
    pub fn transition(&self, a: usize) -> &StochasticMatrix {
        &self.per_action[a]
    }

    /// First-order generator `(A(a) − I)/Δt`.
    pub fn generator(&self, a: usize) -> &GeneratorMatrix {
        &self.generators[a]
    }

    /// Short content hash of the resolved model.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn with_observation(&self, spec: ObservationSpec) -> Result<Self> {
        let obs = spec.build()?;
        Self::new(
            self.regimes.clone(),
            self.actions.clone(),
            self.baseline.clone(),
            self.repair.clone(),
            self.reward.clone(),
            obs,
            Some(spec),
            self.discount,
        )
    }

    pub fn with_observation_matrix(&self, obs: ObservationMatrix) -> Result<Self> {
        Self::new(
            self.regimes.clone(),
            self.actions.clone(),
            self.baseline.clone(),
            self.repair.clone(),
            self.reward.clone(),
            obs,
            None,
            self.discount,
        )
    }

    pub fn with_repair(&self, repair: RepairProbabilities) -> Result<Self> {
        Self::new(
            self.regimes.clone(),
            self.actions.clone(),
            self.baseline.clone(),
            repair,
            self.reward.clone(),
            self.observation.clone(),
            self.observation_spec.clone(),
            self.discount,
        )
    }

    pub fn with_reward(&self, reward: RewardMatrix) -> Result<Self> {
        Self::new(
            self.regimes.clone(),
            self.actions.clone(),
            self.baseline.clone(),
            self.repair.clone(),
            reward,
            self.observation.clone(),
            self.observation_spec.clone(),
            self.discount,
        )
    }

    pub fn with_discount(&self, discount: DiscountSpec) -> Result<Self> {
        Self::new(
            self.regimes.clone(),
            self.actions.clone(),
            self.baseline.clone(),
            self.repair.clone(),
            self.reward.clone(),
            self.observation.clone(),
            self.observation_spec.clone(),
            discount,
        )
    }
}

pub fn parse_model(json: &str) -> Result<ModelBundle> {
    let file: ModelFile = serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
    ModelBundle::from_file(&file)
}

/// Reads and validates a JSON model file.
pub fn load_model(path: impl AsRef<Path>) -> Result<ModelBundle> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_model(&text)
}

/// The shipped case-study model, compiled in.
pub fn case_study() -> ModelBundle {
    parse_model(CASE_STUDY_JSON).expect("bundled case-study model is valid")
}

pub const CASE_STUDY_JSON: &str = include_str!("../../../models/case_study.json");
