// SPDX-License-Identifier: Apache-2.0

//! Python bindings for the regime mitigation toolkit.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use regime_mitigator::baselines::{KStepController, McdaConfig, McdaController};
use regime_mitigator::bench::{self, NamedController, SuiteConfig};
use regime_mitigator::mdp::{
    value_iteration, MdpController, SolveStatus, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use regime_mitigator::model::{case_study, load_model, parse_model, ModelBundle};
use regime_mitigator::pomdp::{self as core_pomdp, Belief, PbviSolution};
use regime_mitigator::sim::{Controller, NoActionController};
use regime_mitigator::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn to_belief(model: &ModelBundle, b: Vec<f64>) -> PyResult<Belief> {
    if b.len() != model.k() {
        return Err(PyValueError::new_err(format!(
            "belief has {} entries, model has {}",
            b.len(),
            model.k()
        )));
    }
    Belief::new(b).map_err(to_py)
}

/// Validated regime model.
#[pyclass(name = "Model", module = "regime_mitigator", frozen)]
struct PyModel {
    inner: ModelBundle,
}

#[pymethods]
impl PyModel {
    /// Loads a model JSON file.
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: load_model(path).map_err(to_py)?,
        })
    }

    /// Parses a model from a JSON string.
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: parse_model(text).map_err(to_py)?,
        })
    }

    /// The bundled four-regime case study.
    #[staticmethod]
    fn case_study() -> Self {
        Self {
            inner: case_study(),
        }
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma()
    }

    #[getter]
    fn dt(&self) -> f64 {
        self.inner.dt()
    }

    #[getter]
    fn hash(&self) -> String {
        self.inner.hash().to_string()
    }

    #[getter]
    fn regimes(&self) -> Vec<String> {
        self.inner.regimes().labels().to_vec()
    }

    #[getter]
    fn actions(&self) -> Vec<String> {
        self.inner.actions().labels().to_vec()
    }

    /// One-step transition matrix of action `a`.
    fn transition(&self, a: usize) -> PyResult<Vec<Vec<f64>>> {
        if a >= self.inner.m() {
            return Err(PyValueError::new_err(format!(
                "action index {a} out of range"
            )));
        }
        Ok(self.inner.transition(a).matrix().to_rows())
    }

    /// Generator of action `a`.
    fn generator(&self, a: usize) -> PyResult<Vec<Vec<f64>>> {
        if a >= self.inner.m() {
            return Err(PyValueError::new_err(format!(
                "action index {a} out of range"
            )));
        }
        Ok(self.inner.generator(a).matrix().to_rows())
    }

    fn reward(&self) -> Vec<Vec<f64>> {
        self.inner.reward().matrix().to_rows()
    }

    fn observation(&self) -> Vec<Vec<f64>> {
        self.inner.observation().matrix().to_rows()
    }

    fn __repr__(&self) -> String {
        format!(
            "Model(k={}, m={}, gamma={}, hash={})",
            self.inner.k(),
            self.inner.m(),
            self.inner.gamma(),
            self.inner.hash()
        )
    }
}

/// Value-iteration result.
#[pyclass(name = "MdpSolution", module = "regime_mitigator", frozen, get_all)]
struct PyMdpSolution {
    values: Vec<f64>,
    policy: Vec<usize>,
    labels: Vec<String>,
    iterations: usize,
    converged: bool,
}

#[pyfunction]
#[pyo3(signature = (model, tol = DEFAULT_TOL, max_iter = DEFAULT_MAX_ITER))]
fn solve_mdp(model: &PyModel, tol: f64, max_iter: usize) -> PyResult<PyMdpSolution> {
    if !(tol > 0.0) {
        return Err(PyValueError::new_err("tol must be positive"));
    }
    let r = value_iteration(&model.inner, tol, max_iter);
    Ok(PyMdpSolution {
        labels: r
            .policy
            .labels(&model.inner)
            .into_iter()
            .map(String::from)
            .collect(),
        values: r.values.0,
        policy: r.policy.0,
        iterations: r.iterations,
        converged: r.status == SolveStatus::Converged,
    })
}

/// Point-based value iteration result.
#[pyclass(name = "PomdpSolution", module = "regime_mitigator", frozen)]
struct PyPomdpSolution {
    inner: PbviSolution,
}

#[pymethods]
impl PyPomdpSolution {
    #[getter]
    fn n_vectors(&self) -> usize {
        self.inner.alpha.len()
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.residuals.clone()
    }

    #[getter]
    fn policy_stable(&self) -> bool {
        self.inner.status == core_pomdp::PbviStatus::PolicyStable
    }

    /// `(action, value)` of the maximizing alpha vector at `belief`.
    fn evaluate(&self, belief: Vec<f64>) -> PyResult<(usize, f64)> {
        let k = self.inner.alpha.vectors()[0].values.len();
        if belief.len() != k {
            return Err(PyValueError::new_err(format!(
                "belief has {} entries, expected {k}",
                belief.len()
            )));
        }
        let b = Belief::new(belief).map_err(to_py)?;
        Ok(core_pomdp::alpha_policy(&self.inner.alpha, &b))
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: PbviSolution::load(path).map_err(to_py)?,
        })
    }
}

#[pyfunction]
#[pyo3(signature = (model, seed, random_beliefs = core_pomdp::DEFAULT_RANDOM_POINTS, budget = core_pomdp::DEFAULT_BUDGET, window = core_pomdp::DEFAULT_WINDOW))]
fn solve_pomdp(
    py: Python<'_>,
    model: &PyModel,
    seed: u64,
    random_beliefs: usize,
    budget: usize,
    window: usize,
) -> PyResult<PyPomdpSolution> {
    let m = model.inner.clone();
    let sol = py.detach(move || -> regime_mitigator::Result<PbviSolution> {
        let vi = value_iteration(&m, DEFAULT_TOL, DEFAULT_MAX_ITER);
        let beliefs = core_pomdp::generate_belief_points(m.k(), random_beliefs, seed)?;
        core_pomdp::pbvi_solve(&m, &beliefs, &vi.values, budget, window)
    });
    Ok(PyPomdpSolution {
        inner: sol.map_err(to_py)?,
    })
}

/// Bayesian belief update after holding time `tau` under action `a`, then observation `z`.
#[pyfunction]
fn belief_step(
    model: &PyModel,
    belief: Vec<f64>,
    a: usize,
    tau: f64,
    z: usize,
) -> PyResult<Vec<f64>> {
    let b = to_belief(&model.inner, belief)?;
    if a >= model.inner.m() || z >= model.inner.k() {
        return Err(PyValueError::new_err(
            "action or observation index out of range",
        ));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(PyValueError::new_err("tau must be finite and nonnegative"));
    }
    Ok(core_pomdp::belief_step(&b, a, tau, z, &model.inner)
        .as_slice()
        .to_vec())
}

/// Per-policy benchmark summary.
#[pyclass(name = "PolicyStats", module = "regime_mitigator", frozen, get_all)]
struct PyPolicyStats {
    policy: String,
    mean_return: f64,
    sd_return: f64,
    fraction_nominal: f64,
    mismatch: f64,
    returns: Vec<f64>,
}

fn stats_from(cmp: bench::ComparisonResult) -> Vec<PyPolicyStats> {
    cmp.policies
        .into_iter()
        .map(|p| PyPolicyStats {
            policy: p.policy,
            mean_return: p.mean_return,
            sd_return: p.sd_return,
            fraction_nominal: p.fraction_nominal,
            mismatch: p.mismatch_time_weighted,
            returns: p.returns,
        })
        .collect()
}

/// Simulates one policy: "mdp", "pomdp" (needs `solution`), "kstep", "mcda" or "none".
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (model, policy, n, horizon, seed, solution = None, k = 2))]
fn simulate(
    py: Python<'_>,
    model: &PyModel,
    policy: &str,
    n: usize,
    horizon: f64,
    seed: u64,
    solution: Option<&PyPomdpSolution>,
    k: usize,
) -> PyResult<PyPolicyStats> {
    let m = &model.inner;
    let ctrl: Box<dyn Controller> = match policy {
        "mdp" => Box::new(MdpController::new(
            value_iteration(m, DEFAULT_TOL, DEFAULT_MAX_ITER).policy,
        )),
        "pomdp" => {
            let sol =
                solution.ok_or_else(|| PyValueError::new_err("policy 'pomdp' needs a solution"))?;
            Box::new(core_pomdp::PomdpController::new(
                m.clone(),
                sol.inner.alpha.clone(),
            ))
        }
        "kstep" => Box::new(KStepController::new(m, k).map_err(to_py)?),
        "mcda" => Box::new(McdaController::new(m, McdaConfig::default()).map_err(to_py)?),
        "none" => Box::new(NoActionController::new(m)),
        other => return Err(PyValueError::new_err(format!("unknown policy {other:?}"))),
    };
    if n == 0 || !(horizon > 0.0) {
        return Err(PyValueError::new_err("n and horizon must be positive"));
    }
    let named: Vec<NamedController> = vec![(policy.to_string(), ctrl)];
    let cmp = py
        .detach(|| bench::run_policy_comparison(m, &named, n, horizon, seed, true))
        .map_err(to_py)?;
    Ok(stats_from(cmp).remove(0))
}

/// Runs the full policy suite on paired trajectories.
#[pyfunction]
#[pyo3(signature = (model, n, horizon, seed, paired = true, learners = true))]
fn compare(
    py: Python<'_>,
    model: &PyModel,
    n: usize,
    horizon: f64,
    seed: u64,
    paired: bool,
    learners: bool,
) -> PyResult<Vec<PyPolicyStats>> {
    if n == 0 || !(horizon > 0.0) {
        return Err(PyValueError::new_err("n and horizon must be positive"));
    }
    let m = &model.inner;
    let cmp = py
        .detach(|| {
            let mut cfg = SuiteConfig::seeded(seed);
            cfg.learners = learners;
            let suite = bench::build_policy_suite(m, &cfg)?;
            bench::run_policy_comparison(m, &suite.controllers, n, horizon, seed, paired)
        })
        .map_err(to_py)?;
    Ok(stats_from(cmp))
}

/// One-sided rank-sum test of `x > y`; returns `(p_value, exact)`.
#[pyfunction]
fn wilcoxon(x: Vec<f64>, y: Vec<f64>) -> PyResult<(f64, bool)> {
    let r = bench::wilcoxon_one_sided(&x, &y).map_err(to_py)?;
    Ok((r.p_value, r.exact))
}

#[pyfunction]
fn cliffs_delta(x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
    bench::cliffs_delta(&x, &y).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "regime_mitigator")]
fn regime_mitigator_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModel>()?;
    m.add_class::<PyMdpSolution>()?;
    m.add_class::<PyPomdpSolution>()?;
    m.add_class::<PyPolicyStats>()?;
    m.add_function(wrap_pyfunction!(solve_mdp, m)?)?;
    m.add_function(wrap_pyfunction!(solve_pomdp, m)?)?;
    m.add_function(wrap_pyfunction!(belief_step, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    m.add_function(wrap_pyfunction!(wilcoxon, m)?)?;
    m.add_function(wrap_pyfunction!(cliffs_delta, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
