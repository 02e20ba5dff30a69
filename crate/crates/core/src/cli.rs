// SPDX-License-Identifier: Apache-2.0

//! Command-line interface.
//!
//! Every subcommand writes `results.csv`, `meta.json` and an `artifacts/`
//! directory under `--out` (default `runs/<name>`, name defaulting to the
//! subcommand). Failures print `{"error": <category>, "message": ...}` on
//! stderr and exit nonzero.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{
    qlearning_train, reinforce_train, KStepController, McdaConfig, McdaController, QLearningConfig,
    QLearningController, QTable, ReinforceConfig, ReinforceController, SoftmaxPolicy,
};
use crate::bench::export::{
    comparison_csv, sweep_csv, sweep_fraction_csv, write_json, write_text, Meta,
};
use crate::bench::stats::{cliffs_delta, mean_sd, wilcoxon_one_sided};
use crate::bench::{
    build_policy_suite, run_policy_comparison, sensitivity_sweep, ComparisonResult,
    NamedController, SuiteConfig, SweepAxis, SweepConfig,
};
use crate::ctmc::{expected_return_curve, PolicyRates};
use crate::error::Error;
use crate::mdp::{value_iteration, MdpController, SolveStatus};
use crate::model::{load_model, ModelBundle, HEALTHY};
use crate::pomdp::{
    alpha_policy, generate_belief_points, pbvi_solve, value_of_information, Belief, PbviSolution,
    PomdpController,
};
use crate::sim::{
    discounted_return, return_until, simulate_batch, write_trajectory_csv, Controller,
    HoldingTimeSampler, NoActionController,
};

pub const THREADS_ENV: &str = "REGIME_MITIGATOR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "regime-mitigator",
    version,
    about = "Regime-aware mitigation planning and benchmarking"
)]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct Common {
    /// Model JSON file.
    #[arg(long, default_value = "models/case_study.json")]
    pub model: PathBuf,
    /// Run name used for the default output directory `runs/<name>`.
    #[arg(long)]
    pub name: Option<String>,
    /// Output directory (overrides `--name`).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value iteration on the fully observable model.
    SolveMdp {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
    },
    /// Point-based value iteration; writes the alpha-vector set.
    SolvePomdp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pbvi: PbviArgs,
        #[arg(long)]
        seed: u64,
    },
    /// Simulates one policy.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        policy: PolicyKind,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        /// Trained artifact (alpha set, Q-table or softmax policy) to load
        /// instead of solving or training.
        #[arg(long)]
        artifact: Option<PathBuf>,
        /// Consecutive-label threshold for the k-step policy.
        #[arg(long, default_value_t = 2)]
        k: usize,
        /// Number of trajectories to dump as CSV.
        #[arg(long, default_value_t = 0)]
        dump: usize,
        #[command(flatten)]
        pbvi: PbviArgs,
    },
    /// Monte Carlo returns against the closed-form transient curve.
    ValidateCt {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        /// Number of evaluation times on `[0, horizon]`.
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
    /// Trains a model-free learner.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(value_enum)]
        learner: Learner,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        lr: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Compares every policy on paired trajectories.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
        /// Independent seed streams per policy.
        #[arg(long)]
        unpaired: bool,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[command(flatten)]
        pbvi: PbviArgs,
    },
    /// One-axis sensitivity sweep.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_axis)]
        axis: SweepAxis,
        /// Comma-separated axis values (default: the standard grid for the axis).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long, default_value_t = 300)]
        n: usize,
        #[arg(long, default_value_t = 20.0)]
        horizon: f64,
        #[arg(long)]
        seed: u64,
    },
    /// Rank-sum tests and Cliff's delta over a stored returns file.
    Stats {
        /// CSV with a `trajectory` column followed by one column per policy.
        #[arg(long)]
        returns: PathBuf,
        /// Pairs `A:B` testing A > B (default: every column pair in file order).
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args, Clone, Copy, Serialize)]
pub struct PbviArgs {
    /// Random belief points added to the structured grid.
    #[arg(long, default_value_t = crate::pomdp::DEFAULT_RANDOM_POINTS)]
    pub random_beliefs: usize,
    #[arg(long, default_value_t = crate::pomdp::DEFAULT_BUDGET)]
    pub budget: usize,
    #[arg(long, default_value_t = crate::pomdp::DEFAULT_WINDOW)]
    pub window: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum PolicyKind {
    Mdp,
    Pomdp,
    Qlearning,
    Reinforce,
    Kstep,
    Mcda,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Learner {
    Qlearning,
    Reinforce,
}

fn parse_axis(s: &str) -> std::result::Result<SweepAxis, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Error with the category reported to the caller.
#[derive(Debug)]
pub struct CliError {
    pub category: &'static str,
    pub message: String,
}

impl CliError {
    fn config(e: Error) -> Self {
        Self {
            category: "config",
            message: e.to_string(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({ "error": self.category, "message": self.message }).to_string()
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            category: e.category(),
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `argv`, runs the command, and returns the process exit code.
pub fn execute<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let err = CliError {
                category: "usage",
                message: e.to_string().trim().to_string(),
            };
            eprintln!("{}", err.to_json());
            return 2;
        }
    };
    match run(cli) {
        Ok(summary) => {
            print!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            1
        }
    }
}

/// Runs a parsed command; returns the text printed on success.
pub fn run(cli: Cli) -> CliResult<String> {
    if let Some(n) = cli.threads {
        // A global pool can only be installed once per process; later calls keep the first.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    match cli.command {
        Command::SolveMdp {
            common,
            tol,
            max_iter,
        } => solve_mdp(&common, tol, max_iter),
        Command::SolvePomdp { common, pbvi, seed } => solve_pomdp(&common, pbvi, seed),
        Command::Simulate {
            common,
            policy,
            n,
            horizon,
            seed,
            artifact,
            k,
            dump,
            pbvi,
        } => simulate(
            &common,
            policy,
            n,
            horizon,
            seed,
            artifact.as_deref(),
            k,
            dump,
            pbvi,
        ),
        Command::ValidateCt {
            common,
            n,
            horizon,
            seed,
            points,
        } => validate_ct(&common, n, horizon, seed, points),
        Command::Train {
            common,
            learner,
            seed,
            episodes,
            lr,
            horizon,
        } => train(&common, learner, seed, episodes, lr, horizon),
        Command::Compare {
            common,
            n,
            horizon,
            seed,
            unpaired,
            k,
            pbvi,
        } => compare(&common, n, horizon, seed, !unpaired, k, pbvi),
        Command::Sweep {
            common,
            axis,
            values,
            n,
            horizon,
            seed,
        } => sweep(&common, axis, values, n, horizon, seed),
        Command::Stats {
            returns,
            pairs,
            name,
            out,
        } => stats(&returns, &pairs, out_dir(out, name, "stats")),
    }
}

fn out_dir(out: Option<PathBuf>, name: Option<String>, default: &str) -> PathBuf {
    out.unwrap_or_else(|| Path::new("runs").join(name.as_deref().unwrap_or(default)))
}

fn load(common: &Common) -> CliResult<ModelBundle> {
    if !common.model.is_file() {
        return Err(CliError {
            category: "config",
            message: format!("model file {} not found", common.model.display()),
        });
    }
    load_model(&common.model).map_err(CliError::config)
}

fn check_positive(what: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError {
            category: "config",
            message: format!("{what} must be positive, got {v}"),
        })
    }
}

fn check_count(what: &str, n: usize) -> CliResult<()> {
    if n == 0 {
        return Err(CliError {
            category: "config",
            message: format!("{what} must be >= 1"),
        });
    }
    Ok(())
}

struct Run {
    dir: PathBuf,
}

impl Run {
    fn new(dir: PathBuf) -> CliResult<Self> {
        std::fs::create_dir_all(dir.join("artifacts")).map_err(|e| Error::io(&dir, e))?;
        Ok(Self { dir })
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.dir.join("artifacts").join(name)
    }

    fn results(&self, csv: &str) -> CliResult<()> {
        Ok(write_text(self.dir.join("results.csv"), csv)?)
    }

    fn meta<C: Serialize>(
        &self,
        command: &str,
        hash: &str,
        seed: Option<u64>,
        config: &C,
    ) -> CliResult<()> {
        Ok(write_json(
            self.dir.join("meta.json"),
            &Meta::new(command, hash, seed, config),
        )?)
    }
}

fn solve_mdp(common: &Common, tol: f64, max_iter: usize) -> CliResult<String> {
    check_positive("tol", tol)?;
    check_count("max-iter", max_iter)?;
    let model = load(common)?;
    let run = Run::new(out_dir(
        common.out.clone(),
        common.name.clone(),
        "solve-mdp",
    ))?;
    let r = value_iteration(&model, tol, max_iter);
    let mut csv = String::from("regime,action,value\n");
    let mut text = String::new();
    for s in 0..model.k() {
        let regime = &model.regimes().labels()[s];
        let action = model.actions().label(r.policy.action(s));
        writeln!(csv, "{regime},{action},{:.12}", r.values.0[s]).expect("string write");
        writeln!(text, "{regime:<12} {action:<13} V* = {:.6}", r.values.0[s])
            .expect("string write");
    }
    let status = match r.status {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIterations => "max_iterations",
    };
    writeln!(text, "policy: ({})", r.policy.labels(&model).join(", ")).expect("string write");
    writeln!(
        text,
        "iterations: {} ({status}, last delta {:.3e})",
        r.iterations, r.last_delta
    )
    .expect("string write");
    run.results(&csv)?;
    write_json(
        run.artifact("mdp.json"),
        &serde_json::json!({
            "values": r.values,
            "policy": r.policy.labels(&model),
            "iterations": r.iterations,
            "status": r.status,
            "last_delta": r.last_delta,
        }),
    )?;
    run.meta(
        "solve-mdp",
        model.hash(),
        None,
        &serde_json::json!({ "common": common, "tol": tol, "max_iter": max_iter }),
    )?;
    Ok(text)
}

fn solve_pbvi(
    model: &ModelBundle,
    pbvi: PbviArgs,
    seed: u64,
) -> CliResult<(PbviSolution, crate::mdp::ValueIterationResult)> {
    check_count("budget", pbvi.budget)?;
    check_count("window", pbvi.window)?;
    let vi = value_iteration(model, crate::mdp::DEFAULT_TOL, crate::mdp::DEFAULT_MAX_ITER);
    let beliefs = generate_belief_points(model.k(), pbvi.random_beliefs, seed)?;
    let sol = pbvi_solve(model, &beliefs, &vi.values, pbvi.budget, pbvi.window)?;
    Ok((sol, vi))
}

fn solve_pomdp(common: &Common, pbvi: PbviArgs, seed: u64) -> CliResult<String> {
    let model = load(common)?;
    let run = Run::new(out_dir(
        common.out.clone(),
        common.name.clone(),
        "solve-pomdp",
    ))?;
    let (sol, vi) = solve_pbvi(&model, pbvi, seed)?;
    let mut csv = String::from("sweep,residual\n");
    for (i, r) in sol.residuals.iter().enumerate() {
        writeln!(csv, "{},{r:.12e}", i + 1).expect("string write");
    }
    run.results(&csv)?;
    sol.save(run.artifact("alpha.json"))?;
    let b0 = Belief::point_mass(model.k(), HEALTHY);
    let voi = value_of_information(&vi.values, &sol.alpha, &b0);
    let mut text = format!(
        "alpha vectors: {}\nsweeps: {} ({:?})\n",
        sol.alpha.len(),
        sol.iterations,
        sol.status
    );
    for s in 0..model.k() {
        let (a, v) = alpha_policy(&sol.alpha, &Belief::point_mass(model.k(), s));
        writeln!(
            text,
            "corner {:<12} {:<13} value {:.6}",
            model.regimes().labels()[s],
            model.actions().label(a),
            v
        )
        .expect("string write");
    }
    writeln!(text, "value of information at healthy start: {voi:.6}").expect("string write");
    if voi < 0.0 {
        writeln!(
            text,
            "warning: negative value of information (point-based approximation error)"
        )
        .expect("string write");
    }
    run.meta(
        "solve-pomdp",
        model.hash(),
        Some(seed),
        &serde_json::json!({ "common": common, "pbvi": pbvi, "voi": voi }),
    )?;
    Ok(text)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    common: &Common,
    policy: PolicyKind,
    n: usize,
    horizon: f64,
    seed: u64,
    artifact: Option<&Path>,
    k: usize,
    dump: usize,
    pbvi: PbviArgs,
) -> CliResult<String> {
    check_count("n", n)?;
    check_positive("horizon", horizon)?;
    let model = load(common)?;
    let run = Run::new(out_dir(common.out.clone(), common.name.clone(), "simulate"))?;
    let ctrl: Box<dyn Controller> = match policy {
        PolicyKind::Mdp => Box::new(MdpController::new(
            value_iteration(
                &model,
                crate::mdp::DEFAULT_TOL,
                crate::mdp::DEFAULT_MAX_ITER,
            )
            .policy,
        )),
        PolicyKind::Pomdp => {
            let alpha = match artifact {
                Some(p) => PbviSolution::load(p).map_err(CliError::config)?.alpha,
                None => solve_pbvi(&model, pbvi, seed)?.0.alpha,
            };
            Box::new(PomdpController::new(model.clone(), alpha))
        }
        PolicyKind::Qlearning => {
            let table = match artifact {
                Some(p) => QTable::load(p).map_err(CliError::config)?,
                None => qlearning_train(
                    &model,
                    QLearningConfig {
                        seed,
                        ..Default::default()
                    },
                )?,
            };
            Box::new(QLearningController::new(&model, table).map_err(CliError::config)?)
        }
        PolicyKind::Reinforce => {
            let params = match artifact {
                Some(p) => SoftmaxPolicy::load(p).map_err(CliError::config)?,
                None => reinforce_train(
                    &model,
                    ReinforceConfig {
                        seed,
                        ..Default::default()
                    },
                )?,
            };
            Box::new(ReinforceController::new(&model, params).map_err(CliError::config)?)
        }
        PolicyKind::Kstep => Box::new(KStepController::new(&model, k)?),
        PolicyKind::Mcda => Box::new(McdaController::new(&model, McdaConfig::default())?),
        PolicyKind::None => Box::new(NoActionController::new(&model)),
    };
    let name = format!("{policy:?}").to_lowercase();
    let policies: Vec<NamedController> = vec![(name, ctrl)];
    let cmp = run_policy_comparison(&model, &policies, n, horizon, seed, true)?;
    run.results(&comparison_csv(&cmp))?;
    write_text(run.artifact("returns.csv"), &returns_csv(&cmp))?;
    if dump > 0 {
        let trajs = simulate_batch(
            &model,
            policies[0].1.as_ref(),
            dump.min(n),
            horizon,
            seed,
            &HoldingTimeSampler::Exponential,
        );
        for (i, t) in trajs.iter().enumerate() {
            write_trajectory_csv(
                t,
                model.k(),
                run.artifact(&format!("trajectory_{i:04}.csv")),
            )?;
        }
    }
    run.meta(
        "simulate",
        model.hash(),
        Some(seed),
        &serde_json::json!({ "common": common, "policy": policy, "n": n, "horizon": horizon,
            "artifact": artifact, "k": k, "dump": dump, "pbvi": pbvi }),
    )?;
    Ok(summary_table(&cmp))
}

fn summary_table(cmp: &ComparisonResult) -> String {
    let mut text = format!(
        "{:<16} {:>9} {:>8} {:>8} {:>9}\n",
        "policy", "return", "sd", "nominal", "mismatch"
    );
    for p in &cmp.policies {
        writeln!(
            text,
            "{:<16} {:>9.3} {:>8.3} {:>8.3} {:>8.1}%",
            p.policy,
            p.mean_return,
            p.sd_return,
            p.fraction_nominal,
            100.0 * p.mismatch_population
        )
        .expect("string write");
    }
    text
}

fn returns_csv(cmp: &ComparisonResult) -> String {
    let mut out = String::from("trajectory");
    for p in &cmp.policies {
        out.push(',');
        out.push_str(&p.policy);
    }
    out.push('\n');
    for i in 0..cmp.n_traj {
        out.push_str(&i.to_string());
        for p in &cmp.policies {
            write!(out, ",{:.12}", p.returns[i]).expect("string write");
        }
        out.push('\n');
    }
    out
}

fn validate_ct(
    common: &Common,
    n: usize,
    horizon: f64,
    seed: u64,
    points: usize,
) -> CliResult<String> {
    check_count("n", n)?;
    check_positive("horizon", horizon)?;
    if points < 2 {
        return Err(CliError {
            category: "config",
            message: "points must be >= 2".into(),
        });
    }
    let model = load(common)?;
    let run = Run::new(out_dir(
        common.out.clone(),
        common.name.clone(),
        "validate-ct",
    ))?;
    let vi = value_iteration(
        &model,
        crate::mdp::DEFAULT_TOL,
        crate::mdp::DEFAULT_MAX_ITER,
    );
    let rates = PolicyRates::assemble(&model, &vi.policy.0)?;
    let grid: Vec<f64> = (0..points)
        .map(|i| horizon * i as f64 / (points - 1) as f64)
        .collect();
    let b0 = Belief::point_mass(model.k(), HEALTHY);
    let theory =
        expected_return_curve(b0.as_slice(), &rates.q_pi, rates.rho_ct, &rates.v_ct, &grid)?;
    let ctrl = MdpController::new(vi.policy.clone());
    let trajs = simulate_batch(
        &model,
        &ctrl,
        n,
        horizon,
        seed,
        &HoldingTimeSampler::Exponential,
    );
    let mut csv = String::from("t,theory,mc_mean,mc_se,rel_err\n");
    let mut final_err = 0.0;
    for &(t, j) in &theory {
        let samples: Vec<f64> = trajs.iter().map(|tr| return_until(tr, &model, t)).collect();
        let (mean, sd) = mean_sd(&samples);
        let se = sd / (n as f64).sqrt();
        let rel = if j != 0.0 {
            (mean - j).abs() / j.abs()
        } else {
            (mean - j).abs()
        };
        writeln!(csv, "{t:.6},{j:.9},{mean:.9},{se:.9},{rel:.9e}").expect("string write");
        final_err = rel;
    }
    let full: Vec<f64> = trajs.iter().map(|t| discounted_return(t, &model)).collect();
    run.results(&csv)?;
    run.meta(
        "validate-ct",
        model.hash(),
        Some(seed),
        &serde_json::json!({ "common": common, "n": n, "horizon": horizon, "points": points }),
    )?;
    let (t_end, j_end) = *theory.last().expect("at least two points");
    Ok(format!(
        "t = {t_end}: theory {j_end:.6}, Monte Carlo {:.6}, relative error {:.4}%\n",
        mean_sd(&full).0,
        100.0 * final_err
    ))
}

fn train(
    common: &Common,
    learner: Learner,
    seed: u64,
    episodes: Option<usize>,
    lr: Option<f64>,
    horizon: Option<f64>,
) -> CliResult<String> {
    let model = load(common)?;
    let run = Run::new(out_dir(common.out.clone(), common.name.clone(), "train"))?;
    if let Some(h) = horizon {
        check_positive("horizon", h)?;
    }
    match learner {
        Learner::Qlearning => {
            let d = QLearningConfig::default();
            let cfg = QLearningConfig {
                seed,
                episodes: episodes.unwrap_or(d.episodes),
                lr: lr.unwrap_or(d.lr),
                horizon: horizon.unwrap_or(d.horizon),
                ..d
            };
            let table = qlearning_train(&model, cfg)?;
            table.save(run.artifact("qtable.json"))?;
            let grid = table.grid(model.k())?;
            let mut csv = String::from("regime,greedy_action\n");
            for s in 0..model.k() {
                let g = grid.nearest(&Belief::point_mass(model.k(), s));
                writeln!(
                    csv,
                    "{},{}",
                    model.regimes().labels()[s],
                    model.actions().label(table.greedy(g))
                )
                .expect("string write");
            }
            run.results(&csv)?;
            run.meta(
                "train",
                model.hash(),
                Some(seed),
                &serde_json::json!({ "learner": learner, "config": cfg }),
            )?;
            Ok(format!(
                "trained Q-table ({} grid points)\n{csv}",
                grid.len()
            ))
        }
        Learner::Reinforce => {
            let d = ReinforceConfig::default();
            let cfg = ReinforceConfig {
                seed,
                episodes: episodes.unwrap_or(d.episodes),
                lr: lr.unwrap_or(d.lr),
                horizon: horizon.unwrap_or(d.horizon),
                ..d
            };
            let params = reinforce_train(&model, cfg)?;
            params.save(run.artifact("softmax_policy.json"))?;
            let mut csv = String::from("regime,greedy_action\n");
            for s in 0..model.k() {
                let a = params.greedy(&Belief::point_mass(model.k(), s));
                writeln!(
                    csv,
                    "{},{}",
                    model.regimes().labels()[s],
                    model.actions().label(a)
                )
                .expect("string write");
            }
            run.results(&csv)?;
            run.meta(
                "train",
                model.hash(),
                Some(seed),
                &serde_json::json!({ "learner": learner, "config": cfg }),
            )?;
            Ok(format!("trained softmax policy\n{csv}"))
        }
    }
}

fn compare(
    common: &Common,
    n: usize,
    horizon: f64,
    seed: u64,
    paired: bool,
    k: usize,
    pbvi: PbviArgs,
) -> CliResult<String> {
    check_count("n", n)?;
    check_positive("horizon", horizon)?;
    let model = load(common)?;
    let run = Run::new(out_dir(common.out.clone(), common.name.clone(), "compare"))?;
    let mut cfg = SuiteConfig::seeded(seed);
    cfg.kstep = k;
    cfg.random_beliefs = pbvi.random_beliefs;
    cfg.budget = pbvi.budget;
    cfg.window = pbvi.window;
    let suite = build_policy_suite(&model, &cfg)?;
    let cmp = run_policy_comparison(&model, &suite.controllers, n, horizon, seed, paired)?;
    run.results(&comparison_csv(&cmp))?;
    write_text(run.artifact("returns.csv"), &returns_csv(&cmp))?;
    suite.pomdp.save(run.artifact("alpha.json"))?;
    write_json(
        run.artifact("summary.json"),
        &summaries_without_samples(&cmp),
    )?;
    run.meta(
        "compare",
        model.hash(),
        Some(seed),
        &serde_json::json!({ "common": common, "n": n, "horizon": horizon, "paired": paired, "suite": cfg }),
    )?;
    Ok(summary_table(&cmp))
}

fn summaries_without_samples(cmp: &ComparisonResult) -> ComparisonResult {
    let mut c = cmp.clone();
    for p in &mut c.policies {
        p.returns.clear();
        p.fraction_nominal_per_traj.clear();
    }
    c
}

fn sweep(
    common: &Common,
    axis: SweepAxis,
    values: Option<Vec<f64>>,
    n: usize,
    horizon: f64,
    seed: u64,
) -> CliResult<String> {
    check_count("n", n)?;
    check_positive("horizon", horizon)?;
    let model = load(common)?;
    let run = Run::new(out_dir(
        common.out.clone(),
        common.name.clone(),
        &format!("sweep-{axis}"),
    ))?;
    let cfg = SweepConfig {
        axis,
        values: values.unwrap_or_else(|| axis.default_values()),
        n_traj: n,
        horizon,
        seed,
    };
    let r = sensitivity_sweep(&model, &cfg).map_err(|e| match e {
        Error::Range(_) | Error::InvalidArgument(_) => CliError::config(e),
        other => other.into(),
    })?;
    run.results(&sweep_csv(&r))?;
    write_text(
        run.artifact("fraction_nominal.csv"),
        &sweep_fraction_csv(&r),
    )?;
    write_json(run.artifact("sweep.json"), &r)?;
    run.meta(
        "sweep",
        model.hash(),
        Some(seed),
        &serde_json::json!({ "common": common, "sweep": cfg }),
    )?;
    let mut text = String::new();
    for pt in &r.points {
        write!(text, "{axis} = {}:", pt.value).expect("string write");
        for e in &pt.entries {
            write!(text, "  {} {:.2} ± {:.2}", e.policy, e.mean, e.ci_half).expect("string write");
        }
        text.push('\n');
    }
    Ok(text)
}

fn read_returns(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::config(Error::io(path, e)))?;
    let bad = |msg: String| CliError {
        category: "config",
        message: format!("{}: {msg}", path.display()),
    };
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| bad("empty file".into()))?
        .split(',')
        .skip(1)
        .map(String::from)
        .collect();
    if header.is_empty() {
        return Err(bad("no policy columns".into()));
    }
    let mut cols = vec![Vec::new(); header.len()];
    for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let cells: Vec<&str> = line.split(',').skip(1).collect();
        if cells.len() != header.len() {
            return Err(bad(format!("row {} has {} values", i + 1, cells.len())));
        }
        for (c, v) in cols.iter_mut().zip(cells) {
            c.push(
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| bad(format!("row {}: {e}", i + 1)))?,
            );
        }
    }
    Ok((header, cols))
}

fn stats(returns: &Path, pairs: &[String], dir: PathBuf) -> CliResult<String> {
    let (names, cols) = read_returns(returns)?;
    let index = |name: &str| -> CliResult<usize> {
        names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| CliError {
                category: "config",
                message: format!("no column named {name:?}"),
            })
    };
    let selected: Vec<(usize, usize)> = if pairs.is_empty() {
        (0..names.len())
            .flat_map(|i| (i + 1..names.len()).map(move |j| (i, j)))
            .collect()
    } else {
        pairs
            .iter()
            .map(|p| {
                let (a, b) = p.split_once(':').ok_or_else(|| CliError {
                    category: "config",
                    message: format!("pair {p:?} is not of the form A:B"),
                })?;
                Ok((index(a)?, index(b)?))
            })
            .collect::<CliResult<_>>()?
    };
    let run = Run::new(dir)?;
    let mut csv = String::from("x,y,n_x,n_y,rank_sum,p_value,exact,degenerate,cliffs_delta\n");
    let mut text = String::new();
    for &(i, j) in &selected {
        let w = wilcoxon_one_sided(&cols[i], &cols[j])?;
        let d = cliffs_delta(&cols[i], &cols[j])?;
        writeln!(
            csv,
            "{},{},{},{},{},{:.6e},{},{},{:.6}",
            names[i],
            names[j],
            cols[i].len(),
            cols[j].len(),
            w.rank_sum,
            w.p_value,
            w.exact,
            w.degenerate,
            d
        )
        .expect("string write");
        writeln!(
            text,
            "{} > {}: p = {:.3e}, Cliff's d = {:.3}",
            names[i], names[j], w.p_value, d
        )
        .expect("string write");
    }
    run.results(&csv)?;
    run.meta(
        "stats",
        "",
        None,
        &serde_json::json!({ "returns": returns, "pairs": pairs }),
    )?;
    Ok(text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_path() -> String {
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("../../models/case_study.json")
            .display()
            .to_string()
    }

    fn invoke(args: &[&str]) -> CliResult<String> {
        let argv = std::iter::once("regime-mitigator").chain(args.iter().copied());
        run(Cli::try_parse_from(argv).expect("arguments parse"))
    }

    fn category(args: &[&str]) -> &'static str {
        invoke(args).expect_err("command fails").category
    }

    #[test]
    fn help_and_parse_errors() {
        assert_eq!(execute(["regime-mitigator", "--help"]), 0);
        assert_eq!(execute(["regime-mitigator", "compare", "--help"]), 0);
        assert_eq!(execute(["regime-mitigator", "frobnicate"]), 2);
        // Stochastic commands refuse to run without a seed.
        assert_eq!(execute(["regime-mitigator", "compare"]), 2);
        assert_eq!(
            execute([
                "regime-mitigator",
                "sweep",
                "--axis",
                "bogus",
                "--seed",
                "1"
            ]),
            2
        );
    }

    #[test]
    fn error_json_shape() {
        let e = CliError {
            category: "config",
            message: "bad \"file\"".into(),
        };
        let v: serde_json::Value = serde_json::from_str(&e.to_json()).unwrap();
        assert_eq!(v["error"], "config");
        assert_eq!(v["message"], "bad \"file\"");
    }

    #[test]
    fn model_errors_are_config() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("o");
        let out = out.to_str().unwrap();
        assert_eq!(
            category(&["solve-mdp", "--model", "no/such.json", "--out", out]),
            "config"
        );
        let bad = dir.path().join("bad.json");
        let mut v: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(model_path()).unwrap()).unwrap();
        v["baseline"][0][0] = serde_json::json!(5.0);
        std::fs::write(&bad, v.to_string()).unwrap();
        assert_eq!(
            category(&["solve-mdp", "--model", bad.to_str().unwrap(), "--out", out]),
            "config"
        );
        let m = model_path();
        let sweep = [
            "sweep", "--model", &m, "--axis", "gamma", "--values", "0.9,1.5", "--seed", "1", "--n",
            "5", "--out", out,
        ];
        assert_eq!(category(&sweep), "config");
        assert_eq!(
            category(&["solve-mdp", "--model", &m, "--tol", "0", "--out", out]),
            "config"
        );
    }

    #[test]
    fn solve_mdp_run_layout() {
        let dir = tempfile::tempdir().unwrap();
        let text = invoke(&[
            "solve-mdp",
            "--model",
            &model_path(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        assert!(
            text.contains("NoAction, DwSensorA, ReidentPlant, BiasCorrect"),
            "{text}"
        );
        let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("regime,action,value"));
        assert_eq!(csv.lines().count(), 5);
        let meta: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(dir.path().join("meta.json")).unwrap())
                .unwrap();
        assert_eq!(meta["command"], "solve-mdp");
        assert!(meta["model_hash"].as_str().is_some_and(|h| !h.is_empty()));
        assert!(meta["git_describe"].is_string());
        assert!(dir.path().join("artifacts/mdp.json").is_file());
    }

    #[test]
    fn compare_is_thread_independent_and_feeds_stats() {
        let dir = tempfile::tempdir().unwrap();
        let m = model_path();
        let mut outputs = Vec::new();
        for threads in [1, 3] {
            let out = dir.path().join(format!("t{threads}"));
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| {
                invoke(&[
                    "compare",
                    "--model",
                    &m,
                    "--seed",
                    "7",
                    "--n",
                    "60",
                    "--out",
                    out.to_str().unwrap(),
                ])
                .unwrap()
            });
            outputs.push((
                std::fs::read(out.join("results.csv")).unwrap(),
                std::fs::read(out.join("artifacts/returns.csv")).unwrap(),
            ));
        }
        assert_eq!(outputs[0], outputs[1]);

        let returns = dir.path().join("t1/artifacts/returns.csv");
        let s = dir.path().join("s");
        invoke(&[
            "stats",
            "--returns",
            returns.to_str().unwrap(),
            "--pair",
            "MDP:NoAction",
            "--out",
            s.to_str().unwrap(),
        ])
        .unwrap();
        let csv = std::fs::read_to_string(s.join("results.csv")).unwrap();
        assert!(
            csv.lines()
                .nth(1)
                .unwrap()
                .starts_with("MDP,NoAction,60,60,"),
            "{csv}"
        );
        let e = invoke(&[
            "stats",
            "--returns",
            returns.to_str().unwrap(),
            "--pair",
            "MDP:Nobody",
            "--out",
            s.to_str().unwrap(),
        ])
        .unwrap_err();
        assert_eq!(e.category, "config");
    }

    #[test]
    fn simulate_dumps_and_reloads_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let m = model_path();
        let p = dir.path().join("p");
        invoke(&[
            "solve-pomdp",
            "--model",
            &m,
            "--seed",
            "3",
            "--out",
            p.to_str().unwrap(),
        ])
        .unwrap();
        let alpha = p.join("artifacts/alpha.json");
        let s = dir.path().join("s");
        invoke(&[
            "simulate",
            "--model",
            &m,
            "--policy",
            "pomdp",
            "--artifact",
            alpha.to_str().unwrap(),
            "--n",
            "20",
            "--seed",
            "5",
            "--dump",
            "2",
            "--out",
            s.to_str().unwrap(),
        ])
        .unwrap();
        assert!(s.join("artifacts/trajectory_0001.csv").is_file());
        let q = dir.path().join("q");
        let wrong = [
            "simulate",
            "--model",
            &m,
            "--policy",
            "qlearning",
            "--artifact",
            alpha.to_str().unwrap(),
            "--n",
            "5",
            "--seed",
            "5",
            "--out",
            q.to_str().unwrap(),
        ];
        assert_eq!(category(&wrong), "config");
    }

    #[test]
    fn train_then_simulate_with_artifact() {
        let dir = tempfile::tempdir().unwrap();
        let m = model_path();
        let t = dir.path().join("t");
        invoke(&[
            "train",
            "--model",
            &m,
            "qlearning",
            "--seed",
            "2",
            "--episodes",
            "200",
            "--out",
            t.to_str().unwrap(),
        ])
        .unwrap();
        let table = t.join("artifacts/qtable.json");
        let s = dir.path().join("s");
        invoke(&[
            "simulate",
            "--model",
            &m,
            "--policy",
            "qlearning",
            "--artifact",
            table.to_str().unwrap(),
            "--n",
            "10",
            "--seed",
            "1",
            "--out",
            s.to_str().unwrap(),
        ])
        .unwrap();
        let csv = std::fs::read_to_string(s.join("results.csv")).unwrap();
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn validate_ct_small_error() {
        let dir = tempfile::tempdir().unwrap();
        invoke(&[
            "validate-ct",
            "--model",
            &model_path(),
            "--seed",
            "11",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .unwrap();
        let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
        let last = csv.lines().last().unwrap();
        let rel: f64 = last.rsplit(',').next().unwrap().parse().unwrap();
        assert!(rel < 5e-3, "{last}");
    }
}
