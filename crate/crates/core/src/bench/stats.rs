// SPDX-License-Identifier: Apache-2.0

//! Rank-sum test and Cliff's delta.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Below this combined size the null distribution is enumerated exactly.
pub const EXACT_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// One-sided p-value for "x tends to exceed y".
    pub p_value: f64,
    /// Rank sum of `x` (midranks for ties).
    pub rank_sum: f64,
    /// Standardized statistic; `None` for the exact path.
    pub z: Option<f64>,
    pub exact: bool,
    /// Every observation in both samples is identical.
    pub degenerate: bool,
}

/// Midranks (1-based) of `v`, plus tie-group sizes.
fn midranks(v: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        ties.push(j - i + 1);
        i = j + 1;
    }
    (ranks, ties)
}

/// One-sided rank-sum test of H1: `x` stochastically greater than `y`.
///
/// Exact permutation distribution of the midrank sum when `n + m < 50`,
/// otherwise the tie-corrected normal approximation with continuity correction.
pub fn wilcoxon_one_sided(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument(
            "rank-sum test needs two nonempty samples".into(),
        ));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::Range("rank-sum test input contains NaN".into()));
    }
    let n = x.len();
    let m = y.len();
    let total = n + m;
    let all: Vec<f64> = x.iter().chain(y).copied().collect();
    let (ranks, ties) = midranks(&all);
    let rank_sum: f64 = ranks[..n].iter().sum();
    if ties.len() == 1 {
        return Ok(WilcoxonResult {
            p_value: 0.5,
            rank_sum,
            z: None,
            exact: total < EXACT_LIMIT,
            degenerate: true,
        });
    }
    if total < EXACT_LIMIT {
        // Doubled midranks are integers; count size-n subsets by doubled sum.
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let max_sum: usize = doubled.iter().sum();
        let mut counts = vec![vec![0.0f64; max_sum + 1]; n + 1];
        counts[0][0] = 1.0;
        for &r in &doubled {
            for j in (1..=n).rev() {
                let (lo, hi) = counts.split_at_mut(j);
                for s in (r..=max_sum).rev() {
                    hi[0][s] += lo[j - 1][s - r];
                }
            }
        }
        let observed = (2.0 * rank_sum).round() as usize;
        let all_count: f64 = counts[n].iter().sum();
        let upper: f64 = counts[n][observed..].iter().sum();
        return Ok(WilcoxonResult {
            p_value: upper / all_count,
            rank_sum,
            z: None,
            exact: true,
            degenerate: false,
        });
    }
    let (nf, mf, tf) = (n as f64, m as f64, total as f64);
    let mean = nf * (tf + 1.0) / 2.0;
    let tie_term: f64 =
        ties.iter().map(|&t| (t * t * t - t) as f64).sum::<f64>() / (tf * (tf - 1.0));
    let var = nf * mf / 12.0 * ((tf + 1.0) - tie_term);
    let z = (rank_sum - mean - 0.5) / var.sqrt();
    let normal = Normal::standard();
    Ok(WilcoxonResult {
        p_value: normal.sf(z),
        rank_sum,
        z: Some(z),
        exact: false,
        degenerate: false,
    })
}

/// `(#{xᵢ > yⱼ} − #{xᵢ < yⱼ}) / (n·m)`.
pub fn cliffs_delta(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::InvalidArgument(
            "Cliff's delta needs two nonempty samples".into(),
        ));
    }
    let mut diff: i64 = 0;
    for a in x {
        for b in y {
            if a > b {
                diff += 1;
            } else if a < b {
                diff -= 1;
            }
        }
    }
    Ok(diff as f64 / (x.len() * y.len()) as f64)
}

/// Sample mean and standard deviation (n − 1 denominator; 0 for one sample).
pub fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// `1.96·sd/√n`.
pub fn ci_half_width(v: &[f64]) -> f64 {
    let (_, sd) = mean_sd(v);
    1.96 * sd / (v.len() as f64).sqrt()
}
