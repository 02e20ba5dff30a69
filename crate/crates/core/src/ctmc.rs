// SPDX-License-Identifier: Apache-2.0

//! Continuous-time embedding of the discrete decision model.
//!
//! Each kernel is mapped to the first-order generator `(A − I)/Δt`; the
//! discount factor maps to the rate `ρ = −ln γ / Δt` and rewards to rates
//! `R/Δt`. Under a fixed policy the continuous-time value solves
//! `(ρI − Q_π)·V = c_π`, and the expected discounted return accrued by time
//! `t` from initial distribution `b₀` is
//!
//! ```text
//! J(t) = b₀ᵀV − b₀ᵀ·exp[(Q_π − ρI)·t]·V
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{expm, solve, Matrix};
use crate::model::{DiscountSpec, ModelBundle, RewardMatrix, StochasticMatrix};

/// Rate matrix with zero row sums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GeneratorMatrix(Matrix);

impl GeneratorMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension("generator must be square".into()));
        }
        for i in 0..m.rows() {
            let row = m.row(i);
            if row.iter().enumerate().any(|(j, &q)| j != i && q < -1e-12) {
                return Err(Error::Range(format!(
                    "generator row {i} has a negative rate"
                )));
            }
            let sum: f64 = row.iter().sum();
            let scale = row.iter().fold(1.0_f64, |s, v| s.max(v.abs()));
            if sum.abs() > 1e-9 * scale {
                return Err(Error::RowSum {
                    what: "generator",
                    row: i,
                    sum,
                    tol: 1e-9,
                });
            }
        }
        Ok(Self(m))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn get(&self, s: usize, t: usize) -> f64 {
        self.0[(s, t)]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        self.0.row(s)
    }

    /// Off-diagonal rates of row `s` with rounding negatives clamped to zero.
    pub fn exit_rates(&self, s: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.0
            .row(s)
            .iter()
            .enumerate()
            .map(move |(t, &q)| (t, if t == s { 0.0 } else { q.max(0.0) }))
    }

    /// `exp(Q·t)`.
    pub fn transition_over(&self, t: f64) -> Matrix {
        expm(&self.0.scale(t))
    }
}

/// `(A − I)/Δt`.
pub fn embed_generator(a: &StochasticMatrix, dt: f64) -> Result<GeneratorMatrix> {
    if !(dt > 0.0) {
        return Err(Error::Range(format!("dt {dt} must be positive")));
    }
    let k = a.dim();
    let mut q = a.matrix().sub(&Matrix::identity(k)).scale(1.0 / dt);
    // Pin the diagonal so each row sums to zero exactly up to rounding of the sum.
    for s in 0..k {
        let off: f64 = (0..k).filter(|&t| t != s).map(|t| q[(s, t)]).sum();
        q[(s, s)] = -off;
    }
    Ok(GeneratorMatrix(q))
}

/// Continuous discount rate and reward rates `c[a][s] = R(a,s)/Δt` (stored M×K).
pub fn continuous_rates(discount: &DiscountSpec, reward: &RewardMatrix) -> Result<(f64, Matrix)> {
    if discount.gamma() <= 0.0 {
        return Err(Error::Range(
            "gamma = 0 has no finite continuous discount rate".into(),
        ));
    }
    Ok((
        discount.rho_ct(),
        reward.matrix().scale(1.0 / discount.dt()),
    ))
}

/// Policy-specific generator, reward rates and continuous-time value.
#[derive(Debug, Clone)]
pub struct PolicyRates {
    pub q_pi: GeneratorMatrix,
    pub c_pi: Vec<f64>,
    pub rho_ct: f64,
    pub v_ct: Vec<f64>,
}

impl PolicyRates {
    pub fn assemble(model: &ModelBundle, policy: &[usize]) -> Result<Self> {
        let k = model.k();
        if policy.len() != k {
            return Err(Error::Dimension(format!(
                "policy has {} entries, expected {k}",
                policy.len()
            )));
        }
        let (rho_ct, c) = continuous_rates(model.discount(), model.reward())?;
        let mut q = Matrix::zeros(k, k);
        let mut c_pi = vec![0.0; k];
        for (s, &a) in policy.iter().enumerate() {
            q.row_mut(s).copy_from_slice(model.generator(a).row(s));
            c_pi[s] = c[(a, s)];
        }
        let q_pi = GeneratorMatrix(q);
        let v_ct = solve_ct_bellman(&q_pi, &c_pi, rho_ct)?;
        Ok(Self {
            q_pi,
            c_pi,
            rho_ct,
            v_ct,
        })
    }
}

/// Solves `(ρI − Q_π)·V = c_π`.
pub fn solve_ct_bellman(q_pi: &GeneratorMatrix, c_pi: &[f64], rho_ct: f64) -> Result<Vec<f64>> {
    if !(rho_ct > 0.0) {
        return Err(Error::Singular);
    }
    let k = q_pi.dim();
    let lhs = Matrix::identity(k).scale(rho_ct).sub(q_pi.matrix());
    solve(&lhs, c_pi)
}

/// Re-export of the matrix exponential used for belief propagation and
/// transient curves.
pub fn matrix_exponential(m: &Matrix) -> Matrix {
    expm(m)
}

/// Expected discounted return accrued by each grid time, starting from `b0`.
pub fn expected_return_curve(
    b0: &[f64],
    q_pi: &GeneratorMatrix,
    rho_ct: f64,
    v_ct: &[f64],
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if grid.windows(2).any(|w| w[1] < w[0]) || grid.iter().any(|&t| t < 0.0) {
        return Err(Error::InvalidArgument(
            "time grid must be ascending and nonnegative".into(),
        ));
    }
    let k = q_pi.dim();
    let shifted = q_pi.matrix().sub(&Matrix::identity(k).scale(rho_ct));
    let total: f64 = b0.iter().zip(v_ct).map(|(b, v)| b * v).sum();
    Ok(grid
        .iter()
        .map(|&t| {
            let decay = expm(&shifted.scale(t)).mul_vec(v_ct);
            let tail: f64 = b0.iter().zip(&decay).map(|(b, v)| b * v).sum();
            (t, total - tail)
        })
        .collect())
}
