// SPDX-License-Identifier: Apache-2.0

//! Uniform discretization of the belief simplex.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pomdp::Belief;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefGrid {
    spacing: f64,
    points: Vec<Vec<f64>>,
}

/// All compositions of `n` into `k` nonnegative parts, first part descending.
fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in (0..=n).rev() {
        for mut rest in compositions(n - first, k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

impl BeliefGrid {
    /// Points with entries in `{0, δ, …, 1}` summing to one, ordered so that
    /// `(1, 0, …)` comes first. `1/δ` must be an integer.
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        if k == 0 || !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "grid needs K >= 1 and spacing in (0, 1], got K = {k}, spacing = {delta}"
            )));
        }
        let inv = 1.0 / delta;
        let n = inv.round();
        if (inv - n).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "1/spacing must be an integer, got {inv}"
            )));
        }
        let n = n as usize;
        let points = compositions(n, k)
            .into_iter()
            .map(|c| c.into_iter().map(|x| x as f64 / n as f64).collect())
            .collect();
        Ok(Self {
            spacing: delta,
            points,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Closest point under ℓ₁; ties go to the lowest index.
    pub fn nearest(&self, b: &Belief) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, p) in self.points.iter().enumerate() {
            let d: f64 = p.iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).sum();
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}
