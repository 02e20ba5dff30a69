// SPDX-License-Identifier: Apache-2.0

//! CSV and JSON writers with a metadata sidecar.

use std::fmt::Write as _;
use std::path::Path;
use std::process::Command;

use serde::Serialize;

use crate::error::{Error, Result};

use super::{ComparisonResult, SweepResult};

pub const COMPARISON_HEADER: &str =
    "policy,mean_return,sd_return,frac_nominal,delay_SN,delay_DO,delay_DR,mismatch_pct";
pub const SWEEP_HEADER: &str = "axis_value,policy,mean,ci_half";
pub const SWEEP_FRACTION_HEADER: &str = "axis_value,policy,frac_nominal,ci_half";

fn delay_cell(d: Option<f64>) -> String {
    match d {
        None => "NA".into(),
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.6}"),
    }
}

/// One row per policy. Delay columns cover regimes 1..=3; mismatch uses the
/// population convention.
pub fn comparison_csv(r: &ComparisonResult) -> String {
    let mut out = String::from(COMPARISON_HEADER);
    out.push('\n');
    for p in &r.policies {
        let d = |s: usize| delay_cell(p.delays.get(s).copied().flatten());
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{},{},{},{:.4}",
            p.policy,
            p.mean_return,
            p.sd_return,
            p.fraction_nominal,
            d(1),
            d(2),
            d(3),
            100.0 * p.mismatch_population
        )
        .expect("write to string");
    }
    out
}

/// Long format, one row per (value, policy).
pub fn sweep_csv(r: &SweepResult) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for pt in &r.points {
        for e in &pt.entries {
            writeln!(
                out,
                "{},{},{:.6},{:.6}",
                pt.value, e.policy, e.mean, e.ci_half
            )
            .expect("write to string");
        }
    }
    out
}

pub fn sweep_fraction_csv(r: &SweepResult) -> String {
    let mut out = String::from(SWEEP_FRACTION_HEADER);
    out.push('\n');
    for pt in &r.points {
        for e in &pt.entries {
            writeln!(
                out,
                "{},{},{:.6},{:.6}",
                pt.value, e.policy, e.frac_nominal, e.frac_ci_half
            )
            .expect("write to string");
        }
    }
    out
}

pub fn write_text(path: impl AsRef<Path>, text: &str) -> Result<()> {
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    write_text(path, &(text + "\n"))
}

/// `git describe --always --dirty`, or `"unknown"` outside a work tree.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

#[derive(Debug, Clone, Serialize)]
pub struct Meta<'a, C: Serialize> {
    pub command: &'a str,
    pub model_hash: &'a str,
    pub git_describe: String,
    pub seed: Option<u64>,
    pub config: &'a C,
    pub version: &'static str,
}

impl<'a, C: Serialize> Meta<'a, C> {
    pub fn new(command: &'a str, model_hash: &'a str, seed: Option<u64>, config: &'a C) -> Self {
        Self {
            command,
            model_hash,
            git_describe: git_describe(),
            seed,
            config,
            version: env!("CARGO_PKG_VERSION"),
        }
    }
}
