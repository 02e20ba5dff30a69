// SPDX-License-Identifier: Apache-2.0

//! Closeness-to-ideal ranking of alternatives.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    Benefit,
    Cost,
}

/// Ranking with the closeness coefficient of each alternative (row order).
#[derive(Debug, Clone, PartialEq)]
pub struct TopsisRanking {
    pub order: Vec<usize>,
    pub closeness: Vec<f64>,
}

impl TopsisRanking {
    pub fn best(&self) -> usize {
        self.order[0]
    }
}

/// Ranks rows of `decision` (alternatives × criteria) by closeness to the
/// ideal point after root-sum-square column normalization and weighting.
/// Ties keep the lower row index first.
pub fn topsis_rank(
    decision: &[Vec<f64>],
    weights: &[f64],
    kinds: &[Criterion],
) -> Result<TopsisRanking> {
    let n = decision.len();
    let c = weights.len();
    if n == 0 || c == 0 || kinds.len() != c || decision.iter().any(|r| r.len() != c) {
        return Err(Error::Dimension(
            "TOPSIS inputs have inconsistent shape".into(),
        ));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(
            "TOPSIS weights must be nonnegative and sum to 1".into(),
        ));
    }
    if decision.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Range("TOPSIS decision matrix must be finite".into()));
    }
    let norms: Vec<f64> = (0..c)
        .map(|j| decision.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt())
        .collect();
    let v: Vec<Vec<f64>> = decision
        .iter()
        .map(|r| {
            (0..c)
                .map(|j| {
                    let x = if norms[j] > 0.0 { r[j] / norms[j] } else { 0.0 };
                    x * weights[j]
                })
                .collect()
        })
        .collect();
    let col = |j: usize| v.iter().map(move |r| r[j]);
    let (ideal, anti): (Vec<f64>, Vec<f64>) = (0..c)
        .map(|j| {
            let hi = col(j).fold(f64::NEG_INFINITY, f64::max);
            let lo = col(j).fold(f64::INFINITY, f64::min);
            match kinds[j] {
                Criterion::Benefit => (hi, lo),
                Criterion::Cost => (lo, hi),
            }
        })
        .unzip();
    let dist = |r: &[f64], p: &[f64]| -> f64 {
        r.iter()
            .zip(p)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let closeness: Vec<f64> = v
        .iter()
        .map(|r| {
            let dp = dist(r, &ideal);
            let dm = dist(r, &anti);
            if dp + dm > 0.0 {
                dm / (dp + dm)
            } else {
                0.5
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| closeness[b].total_cmp(&closeness[a]));
    Ok(TopsisRanking { order, closeness })
}
