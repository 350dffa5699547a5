//! Python bindings: parameters, simulation, likelihood, estimation and the
//! limit degree distribution.

use std::collections::HashSet;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use hybridnet::estimation::{
    self, EstimationResult, MhConfig, NelderMeadConfig, PointSummary, Prior, StepSizes,
};
use hybridnet::likelihood::{self, SufficientStats};
use hybridnet::{io, limit, Direction, EdgeLog, EdgeRecord};

fn to_py(e: hybridnet::Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyIOError::new_err(e.to_string())
    }
}

fn direction(name: &str) -> PyResult<Direction> {
    name.parse().map_err(to_py)
}

#[pyclass(name = "HybridParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyHybridParams {
    inner: hybridnet::HybridParams,
}

#[pymethods]
impl PyHybridParams {
    #[new]
    #[pyo3(signature = (alpha, beta, p, delta_in, delta_out, gamma=None, xi=0.0, eta=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        alpha: f64,
        beta: f64,
        p: f64,
        delta_in: f64,
        delta_out: f64,
        gamma: Option<f64>,
        xi: f64,
        eta: f64,
    ) -> PyResult<Self> {
        let gamma = gamma.unwrap_or(1.0 - alpha - beta - xi - eta);
        let inner =
            hybridnet::HybridParams::extended(alpha, beta, gamma, xi, eta, p, delta_in, delta_out)
                .map_err(to_py)?;
        Ok(PyHybridParams { inner })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }
    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }
    #[getter]
    fn xi(&self) -> f64 {
        self.inner.xi
    }
    #[getter]
    fn eta(&self) -> f64 {
        self.inner.eta
    }
    #[getter]
    fn p(&self) -> f64 {
        self.inner.p
    }
    #[getter]
    fn delta_in(&self) -> f64 {
        self.inner.delta_in
    }
    #[getter]
    fn delta_out(&self) -> f64 {
        self.inner.delta_out
    }

    /// `(c1, c2)` growth exponents of in- and out-degrees.
    fn growth_exponents(&self) -> (f64, f64) {
        self.inner.growth_exponents()
    }

    /// `(delta_tilde_in, delta_tilde_out)`.
    fn effective_offsets(&self) -> PyResult<(f64, f64)> {
        let d = self.inner.derived().map_err(to_py)?;
        Ok((d.delta_in_tilde, d.delta_out_tilde))
    }

    fn __repr__(&self) -> String {
        let t = &self.inner;
        format!(
            "HybridParams(alpha={}, beta={}, gamma={}, xi={}, eta={}, p={}, delta_in={}, delta_out={})",
            t.alpha, t.beta, t.gamma, t.xi, t.eta, t.p, t.delta_in, t.delta_out
        )
    }
}

/// Ordered edge records `(source, target, time)`.
#[pyclass(name = "EdgeLog", frozen)]
struct PyEdgeLog {
    inner: EdgeLog,
}

#[pymethods]
impl PyEdgeLog {
    /// Builds a log from `(source, target, time)` tuples, stably sorted by time.
    #[new]
    fn new(edges: Vec<(u64, u64, i64)>) -> PyResult<Self> {
        let records = edges
            .into_iter()
            .map(|(s, t, time)| EdgeRecord::new(s, t, time))
            .collect();
        Ok(PyEdgeLog {
            inner: EdgeLog::from_unordered(records).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn parse(path: &str) -> PyResult<Self> {
        Ok(PyEdgeLog {
            inner: io::parse_edge_file(path).map_err(to_py)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn edges(&self) -> Vec<(u64, u64, i64)> {
        self.inner
            .iter()
            .map(|r| (r.source, r.target, r.time))
            .collect()
    }

    /// Scenario labels 1-5 of each record, or `None` if not recorded.
    fn scenarios(&self) -> Vec<Option<u32>> {
        self.inner
            .iter()
            .map(|r| r.scenario.map(|s| s.label().into()))
            .collect()
    }

    /// Records in `[t_start, t_end]` relabeled from 1, with the id mapping.
    fn window(&self, t_start: i64, t_end: i64) -> PyResult<(PyEdgeLog, Vec<(u64, u64)>)> {
        let w = io::window(&self.inner, t_start, t_end).map_err(to_py)?;
        Ok((PyEdgeLog { inner: w.log }, w.mapping))
    }

    /// Scenario labels inferred from the node sets; `origin` is `"seed"` or
    /// `"observed"` (the first record is then labeled 0).
    #[pyo3(signature = (origin="seed"))]
    fn classify(&self, origin: &str) -> PyResult<Vec<u32>> {
        let observed = parse_origin(origin)?;
        let mut known: HashSet<u64> = if observed {
            HashSet::new()
        } else {
            HashSet::from([1])
        };
        Ok(self
            .inner
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let label = if observed && i == 0 {
                    0
                } else {
                    hybridnet::classify_scenario(&known, r).label().into()
                };
                known.insert(r.source);
                known.insert(r.target);
                label
            })
            .collect())
    }

    /// Sufficient statistics for the likelihood.
    #[pyo3(signature = (origin="seed"))]
    fn replay(&self, origin: &str) -> PyResult<PyStats> {
        let stats = if parse_origin(origin)? {
            likelihood::replay_observed(&self.inner)
        } else {
            likelihood::replay(&self.inner)
        };
        Ok(PyStats {
            inner: stats.map_err(to_py)?,
        })
    }
}

fn parse_origin(origin: &str) -> PyResult<bool> {
    match origin {
        "seed" => Ok(false),
        "observed" => Ok(true),
        other => Err(PyValueError::new_err(format!(
            "origin must be 'seed' or 'observed', got {other:?}"
        ))),
    }
}

#[pyclass(name = "Network", frozen)]
struct PyNetwork {
    sim: hybridnet::Simulation,
}

#[pymethods]
impl PyNetwork {
    #[getter]
    fn seed(&self) -> u64 {
        self.sim.seed
    }

    fn edge_log(&self) -> PyEdgeLog {
        PyEdgeLog {
            inner: self.sim.log.clone(),
        }
    }

    fn in_degrees(&self) -> Vec<u64> {
        self.sim.state.in_degrees().to_vec()
    }

    fn out_degrees(&self) -> Vec<u64> {
        self.sim.state.out_degrees().to_vec()
    }

    fn node_count(&self) -> u64 {
        self.sim.state.node_count()
    }

    fn edge_count(&self) -> u64 {
        self.sim.state.edge_count()
    }

    /// `[(m, N_m)]` for `direction` in `{"in", "out"}`.
    fn degree_counts(&self, direction: &str) -> PyResult<Vec<(u64, u64)>> {
        let counts = hybridnet::degree_counts(&self.sim.state);
        Ok(counts
            .counts(self::direction(direction)?)
            .iter()
            .map(|(&m, &c)| (m, c))
            .collect())
    }

    /// `[(m, N_{>m} / |V|)]`.
    fn ccdf(&self, direction: &str) -> PyResult<Vec<(u64, f64)>> {
        let counts = hybridnet::degree_counts(&self.sim.state);
        Ok(hybridnet::ccdf(&counts, self::direction(direction)?))
    }
}

#[pyclass(name = "SufficientStats", frozen)]
struct PyStats {
    inner: SufficientStats,
}

#[pyclass(name = "FitResult", frozen)]
struct PyFitResult {
    inner: EstimationResult,
}

#[pymethods]
impl PyFitResult {
    #[getter]
    fn method(&self) -> &'static str {
        self.inner.method.as_str()
    }
    #[getter]
    fn point(&self) -> PyHybridParams {
        PyHybridParams {
            inner: self.inner.point,
        }
    }
    #[getter]
    fn log_likelihood(&self) -> f64 {
        self.inner.log_likelihood
    }
    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }
    #[getter]
    fn status(&self) -> String {
        format!("{:?}", self.inner.status)
    }
    #[getter]
    fn acceptance_rate(&self) -> Option<f64> {
        self.inner.acceptance_rate
    }
    /// Kept draws as `(iteration, params, log_posterior)`.
    fn trace(&self) -> Option<Vec<(u64, PyHybridParams, f64)>> {
        self.inner.trace.as_ref().map(|t| {
            t.iter()
                .map(|r| {
                    (
                        r.iteration,
                        PyHybridParams { inner: r.params },
                        r.log_posterior,
                    )
                })
                .collect()
        })
    }
    fn to_json(&self) -> PyResult<String> {
        io::to_json(&self.inner).map_err(to_py)
    }
}

#[pymethods]
impl PyStats {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn scenario_counts(&self) -> [u64; 5] {
        self.inner.scenario_counts()
    }

    fn log_likelihood(&self, params: &PyHybridParams) -> f64 {
        likelihood::log_likelihood(&self.inner, &params.inner)
    }

    /// Gradient `(d/d delta_in, d/d delta_out, d/d p)`.
    fn score(&self, params: &PyHybridParams) -> (f64, f64, f64) {
        let s = likelihood::score(&self.inner, &params.inner);
        (s.delta_in, s.delta_out, s.p)
    }

    /// Scenario frequencies `[alpha, beta, gamma, xi, eta]`.
    fn mle_scenarios(&self) -> PyResult<[f64; 5]> {
        Ok(likelihood::mle_scenarios(&self.inner)
            .map_err(to_py)?
            .probs())
    }

    #[pyo3(signature = (start=None, max_iters=5000))]
    fn fit_nelder_mead(
        &self,
        py: Python<'_>,
        start: Option<PyHybridParams>,
        max_iters: usize,
    ) -> PyResult<PyFitResult> {
        let config = nm_config(start, max_iters);
        let inner = py
            .detach(|| estimation::fit_nelder_mead(&self.inner, &config))
            .map_err(to_py)?;
        Ok(PyFitResult { inner })
    }

    #[pyo3(signature = (seed=0, burn_in=10_000, iterations=20_000, thinning=500, median=false))]
    fn fit_mh(
        &self,
        py: Python<'_>,
        seed: u64,
        burn_in: u64,
        iterations: u64,
        thinning: u64,
        median: bool,
    ) -> PyResult<PyFitResult> {
        let config = mh_config(seed, burn_in, iterations, thinning, median);
        let inner = py
            .detach(|| estimation::fit_mh(&self.inner, &config))
            .map_err(to_py)?;
        Ok(PyFitResult { inner })
    }

    #[pyo3(signature = (seed=0, burn_in=10_000, iterations=20_000, thinning=500))]
    fn fit_integrated(
        &self,
        py: Python<'_>,
        seed: u64,
        burn_in: u64,
        iterations: u64,
        thinning: u64,
    ) -> PyResult<PyFitResult> {
        let mh = mh_config(seed, burn_in, iterations, thinning, false);
        let nm = NelderMeadConfig::default();
        let inner = py
            .detach(|| estimation::fit_integrated(&self.inner, &mh, &nm))
            .map_err(to_py)?;
        Ok(PyFitResult { inner })
    }
}

fn nm_config(start: Option<PyHybridParams>, max_iters: usize) -> NelderMeadConfig {
    let mut config = NelderMeadConfig {
        max_iters,
        ..NelderMeadConfig::default()
    };
    if let Some(s) = start {
        config.initial_point = s.inner;
    }
    config
}

fn mh_config(seed: u64, burn_in: u64, iterations: u64, thinning: u64, median: bool) -> MhConfig {
    MhConfig {
        burn_in,
        iterations,
        thinning,
        step_sizes: StepSizes::default(),
        prior: Prior::default(),
        seed,
        start: None,
        summary: if median {
            PointSummary::Median
        } else {
            PointSummary::Mean
        },
    }
}

/// Simulates `n` edges from the seed network.
#[pyfunction]
fn simulate(py: Python<'_>, params: &PyHybridParams, n: u64, seed: u64) -> PyResult<PyNetwork> {
    let config = hybridnet::SimulationConfig::new(params.inner, n, seed);
    let sim = py.detach(|| hybridnet::simulate(&config)).map_err(to_py)?;
    Ok(PyNetwork { sim })
}

/// `(psi_in, psi_out)` for `m = 0..=m_max`.
#[pyfunction]
#[pyo3(signature = (params, m_max=50))]
fn limit_pmf(params: &PyHybridParams, m_max: usize) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let pmf = limit::limit_pmf_truncated(&params.inner, m_max).map_err(to_py)?;
    Ok((pmf.psi_in, pmf.psi_out))
}

#[pyfunction]
fn nb_pmf(r: f64, q: f64, m: u64) -> PyResult<f64> {
    limit::nb_pmf(r, q, m).map_err(to_py)
}

#[pymodule]
fn hybridnet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHybridParams>()?;
    m.add_class::<PyEdgeLog>()?;
    m.add_class::<PyNetwork>()?;
    m.add_class::<PyStats>()?;
    m.add_class::<PyFitResult>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(limit_pmf, m)?)?;
    m.add_function(wrap_pyfunction!(nb_pmf, m)?)?;
    Ok(())
}
