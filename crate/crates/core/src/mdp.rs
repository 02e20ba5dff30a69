// SPDX-License-Identifier: Apache-2.0

//! Value iteration for the fully observable model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{solve, Matrix};
use crate::model::ModelBundle;
use crate::sim::{Controller, DecisionContext};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ValueFunction(pub Vec<f64>);

impl ValueFunction {
    pub fn zeros(k: usize) -> Self {
        Self(vec![0.0; k])
    }

    pub fn dot(&self, b: &[f64]) -> f64 {
        self.0.iter().zip(b).map(|(v, p)| v * p).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StatePolicy(pub Vec<usize>);

impl StatePolicy {
    pub fn action(&self, s: usize) -> usize {
        self.0[s]
    }

    pub fn labels<'a>(&self, model: &'a ModelBundle) -> Vec<&'a str> {
        self.0.iter().map(|&a| model.actions().label(a)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct ValueIterationResult {
    pub values: ValueFunction,
    pub policy: StatePolicy,
    pub iterations: usize,
    pub status: SolveStatus,
    /// Sup-norm difference between the last two iterates.
    pub last_delta: f64,
}

/// `Q(a, s) = R(a, s) + γ Σ_{s′} A(a)[s, s′]·v(s′)`, returned M×K.
pub fn q_values(model: &ModelBundle, v: &ValueFunction) -> Matrix {
    let (k, m) = (model.k(), model.m());
    let gamma = model.gamma();
    let mut q = Matrix::zeros(m, k);
    for a in 0..m {
        let cont = model.transition(a).matrix().mul_vec(&v.0);
        for s in 0..k {
            q[(a, s)] = model.reward().get(a, s) + gamma * cont[s];
        }
    }
    q
}

/// Column-wise argmax of Q; ties go to the lowest action index.
pub fn greedy_policy(q: &Matrix) -> StatePolicy {
    let (m, k) = (q.rows(), q.cols());
    StatePolicy(
        (0..k)
            .map(|s| (0..m).fold(0, |best, a| if q[(a, s)] > q[(best, s)] { a } else { best }))
            .collect(),
    )
}

/// Value iteration from `V⁽⁰⁾ = 0` until `‖V⁽ⁿ⁺¹⁾ − V⁽ⁿ⁾‖∞ < tol`.
///
/// Hitting `max_iter` is reported through [`SolveStatus::MaxIterations`];
/// the last iterate and its greedy policy are still returned.
pub fn value_iteration(model: &ModelBundle, tol: f64, max_iter: usize) -> ValueIterationResult {
    let k = model.k();
    let mut v = ValueFunction::zeros(k);
    let mut delta = f64::INFINITY;
    let mut iterations = 0;
    let mut status = SolveStatus::MaxIterations;
    while iterations < max_iter {
        let q = q_values(model, &v);
        let next: Vec<f64> = (0..k)
            .map(|s| {
                (0..model.m())
                    .map(|a| q[(a, s)])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        delta = next
            .iter()
            .zip(&v.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = ValueFunction(next);
        iterations += 1;
        if delta < tol {
            status = SolveStatus::Converged;
            break;
        }
    }
    let policy = greedy_policy(&q_values(model, &v));
    ValueIterationResult {
        values: v,
        policy,
        iterations,
        status,
        last_delta: delta,
    }
}

/// Exact evaluation of a stationary policy: solves `(I − γA_π)V = R_π`.
pub fn evaluate_policy(model: &ModelBundle, policy: &StatePolicy) -> Result<ValueFunction> {
    let k = model.k();
    if policy.0.len() != k {
        return Err(Error::Dimension("policy length != K".into()));
    }
    let mut lhs = Matrix::identity(k);
    let mut rhs = vec![0.0; k];
    for (s, &a) in policy.0.iter().enumerate() {
        for t in 0..k {
            lhs[(s, t)] -= model.gamma() * model.transition(a).get(s, t);
        }
        rhs[s] = model.reward().get(a, s);
    }
    Ok(ValueFunction(solve(&lhs, &rhs)?))
}

/// State-feedback controller applying a fixed policy to the true regime.
#[derive(Debug, Clone)]
pub struct MdpController {
    policy: StatePolicy,
}

impl MdpController {
    pub fn new(policy: StatePolicy) -> Self {
        Self { policy }
    }
}

impl Controller for MdpController {
    fn reset(&mut self) {}

    fn observe(&mut self, _z: usize, _sojourn: f64) {}

    fn decide(&mut self, ctx: &DecisionContext) -> usize {
        self.policy.action(ctx.true_state)
    }

    fn clone_box(&self) -> Box<dyn Controller> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{case_study, DiscountSpec, ModelFile, CASE_STUDY_JSON};
    use proptest::prelude::*;

    fn optimal_labels() -> Vec<&'static str> {
        vec!["NoAction", "DwSensorA", "ReidentPlant", "BiasCorrect"]
    }

    #[test]
    fn case_study_solution() {
        let m = case_study();
        let r = value_iteration(&m, 1e-10, 100_000);
        assert_eq!(r.status, SolveStatus::Converged);
        assert_eq!(r.policy.labels(&m), optimal_labels());
        for v in &r.values.0 {
            assert!((v - 99.5).abs() <= 0.5, "V* = {v}");
        }
        assert!((2_000..=2_600).contains(&r.iterations), "{}", r.iterations);
    }

    #[test]
    fn zero_discount_reads_reward_maxima() {
        let m = case_study()
            .with_discount(DiscountSpec::new(0.0, 0.02).unwrap())
            .unwrap();
        let r = value_iteration(&m, 1e-10, 10);
        assert_eq!(r.values.0, vec![1.0, 0.7, 0.9, 0.8]);
    }

    #[test]
    fn q_values_with_zero_continuation() {
        let m = case_study();
        let q = q_values(&m, &ValueFunction::zeros(4));
        assert_eq!(&q, m.reward().matrix());
        let g0 = m
            .with_discount(DiscountSpec::new(0.0, 0.02).unwrap())
            .unwrap();
        let q = q_values(&g0, &ValueFunction(vec![5.0, -3.0, 8.0, 1.0]));
        assert_eq!(&q, m.reward().matrix());
    }

    #[test]
    fn q_argmax_matches_policy() {
        let m = case_study();
        let r = value_iteration(&m, 1e-10, 100_000);
        assert_eq!(greedy_policy(&q_values(&m, &r.values)), r.policy);
    }

    #[test]
    fn policy_evaluation_reproduces_optimum() {
        let m = case_study();
        let tol = 1e-10;
        let r = value_iteration(&m, tol, 100_000);
        let v = evaluate_policy(&m, &r.policy).unwrap();
        // Geometric tail of the remaining iterations bounds the gap.
        for (a, b) in v.0.iter().zip(&r.values.0) {
            assert!(
                (a - b).abs() <= 10.0 * tol / (1.0 - m.gamma()),
                "{a} vs {b}"
            );
        }
    }

    #[test]
    fn max_iterations_is_a_status() {
        let r = value_iteration(&case_study(), 1e-10, 5);
        assert_eq!(r.status, SolveStatus::MaxIterations);
        assert_eq!(r.iterations, 5);
    }

    #[test]
    fn policy_invariant_to_gamma() {
        let m = case_study();
        for g in [0.90, 0.95, 0.99, 0.999] {
            let mg = m
                .with_discount(DiscountSpec::new(g, 0.02).unwrap())
                .unwrap();
            let r = value_iteration(&mg, 1e-10, 200_000);
            assert_eq!(r.policy.labels(&mg), optimal_labels(), "gamma {g}");
        }
    }

    fn random_model() -> impl Strategy<Value = ModelBundle> {
        let row = prop::collection::vec(0.01f64..1.0, 4);
        (
            prop::collection::vec(row, 4),
            prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 4), 6),
            prop::collection::vec(0.0f64..1.0, 20),
            0.5f64..0.98,
        )
            .prop_map(|(rows, reward, rho, gamma)| {
                let mut f: ModelFile = serde_json::from_str(CASE_STUDY_JSON).unwrap();
                f.baseline = rows
                    .into_iter()
                    .map(|r| {
                        let s: f64 = r.iter().sum();
                        r.into_iter().map(|x| x / s).collect()
                    })
                    .collect();
                f.reward = reward;
                for a in 1..6 {
                    f.repair[a] = rho[(a - 1) * 4..a * 4].to_vec();
                }
                f.gamma = gamma;
                ModelBundle::from_file(&f).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn bellman_sweeps_contract(m in random_model()) {
            let mut v = ValueFunction::zeros(4);
            let mut prev_delta = f64::INFINITY;
            for _ in 0..50 {
                let q = q_values(&m, &v);
                let next: Vec<f64> = (0..4)
                    .map(|s| (0..6).map(|a| q[(a, s)]).fold(f64::NEG_INFINITY, f64::max))
                    .collect();
                let delta = next.iter().zip(&v.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                if prev_delta.is_finite() {
                    prop_assert!(delta <= m.gamma() * prev_delta + 1e-12);
                }
                prev_delta = delta;
                v = ValueFunction(next);
            }
        }
    }
}
