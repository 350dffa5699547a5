//! Likelihood-based parameter estimation.
//!
//! [`fit_nelder_mead`] maximizes the exact log-likelihood in unconstrained
//! coordinates, [`fit_mh`] samples the flat-prior posterior with a
//! componentwise random walk, and [`fit_integrated`] seeds the former with
//! the posterior mean of the latter.

mod mh;
pub mod nelder_mead;
mod transform;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood, SufficientStats};
use crate::params::HybridParams;

pub use mh::{fit_integrated, fit_mh, MhConfig, PointSummary, Prior, StepSizes};
pub use transform::Transform;

use nelder_mead::{minimize, NmOptions, NmStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Nm,
    Mh,
    Integrated,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Nm => "nm",
            Method::Mh => "mh",
            Method::Integrated => "integrated",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nm" => Ok(Method::Nm),
            "mh" => Ok(Method::Mh),
            "integrated" => Ok(Method::Integrated),
            other => Err(Error::InvalidConfig(format!("unknown method {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    MaxIterations,
    SimplexCollapse,
    NonFinite,
    /// Fewer than two scenarios observed; the maximum is on the boundary.
    Boundary,
    /// Sampler finished; `converged` reflects the running-mean drift check.
    Sampled,
}

impl From<NmStatus> for FitStatus {
    fn from(s: NmStatus) -> Self {
        match s {
            NmStatus::Converged => FitStatus::Converged,
            NmStatus::MaxIterations => FitStatus::MaxIterations,
            NmStatus::SimplexCollapse => FitStatus::SimplexCollapse,
            NmStatus::NonFinite => FitStatus::NonFinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub params: HybridParams,
    pub log_posterior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub method: Method,
    pub point: HybridParams,
    pub log_likelihood: f64,
    pub converged: bool,
    pub status: FitStatus,
    pub iterations: u64,
    pub evaluations: u64,
    pub acceptance_rate: Option<f64>,
    pub trace: Option<Vec<TraceRow>>,
    /// Running posterior means at each kept draw.
    pub running_means: Option<Vec<HybridParams>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadConfig {
    pub initial_point: HybridParams,
    /// Initial simplex spread in transformed coordinates.
    pub scale: f64,
    pub max_iters: usize,
    pub f_tol: f64,
    pub x_tol: f64,
    /// Extra runs restarted from the previous optimum.
    pub restarts: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            initial_point: HybridParams::neutral_start(),
            scale: 0.5,
            max_iters: 5000,
            f_tol: 1e-10,
            x_tol: 1e-8,
            restarts: 5,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        self.initial_point.validate()?;
        if !(self.f_tol > 0.0 && self.x_tol > 0.0) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::InvalidConfig("scale must be positive".into()));
        }
        Ok(())
    }
}

/// Maximizes the log-likelihood from `config.initial_point`.
///
/// Non-convergence is reported through `converged` and `status`, never as
/// an error.
pub fn fit_nelder_mead(
    stats: &SufficientStats,
    config: &NelderMeadConfig,
) -> Result<EstimationResult> {
    config.validate()?;
    let start = config.initial_point;
    let Some(transform) = Transform::for_stats(stats) else {
        return Ok(EstimationResult {
            method: Method::Nm,
            point: start,
            log_likelihood: log_likelihood(stats, &start),
            converged: false,
            status: FitStatus::Boundary,
            iterations: 0,
            evaluations: 1,
            acceptance_rate: None,
            trace: None,
            running_means: None,
            seed: None,
        });
    };

    let counts = stats.scenario_counts();
    let active = counts.iter().filter(|&&c| c > 0).count() as f64;
    let fallback = counts.map(|c| if c > 0 { 1.0 / active } else { 0.0 });
    let objective = |x: &[f64]| -log_likelihood(stats, &transform.decode(x));
    let opts = NmOptions {
        max_iters: config.max_iters,
        f_tol: config.f_tol,
        x_tol: config.x_tol,
    };
    let scale = vec![config.scale; transform.dim()];

    let mut x = transform.encode(&start, &fallback);
    let mut outcome = minimize(objective, &x, &scale, &opts);
    let mut iterations = outcome.iterations;
    let mut evaluations = outcome.evaluations;
    for _ in 0..config.restarts {
        if outcome.status == NmStatus::NonFinite {
            break;
        }
        let previous = outcome.fx;
        x = outcome.x.clone();
        let next = minimize(objective, &x, &scale, &opts);
        iterations += next.iterations;
        evaluations += next.evaluations;
        let improvement = previous - next.fx;
        if next.fx <= outcome.fx {
            outcome = next;
        }
        if improvement.abs() <= config.f_tol {
            break;
        }
    }

    let point = transform.decode(&outcome.x);
    let status = FitStatus::from(outcome.status);
    Ok(EstimationResult {
        method: Method::Nm,
        point,
        log_likelihood: log_likelihood(stats, &point),
        converged: status == FitStatus::Converged,
        status,
        iterations: iterations as u64,
        evaluations: evaluations as u64,
        acceptance_rate: None,
        trace: None,
        running_means: None,
        seed: None,
    })
}

/// Across-replicate summary of one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    /// Sample standard deviation across replicates.
    pub sd: f64,
    /// Standard error of the mean, `sd / sqrt(R)`.
    pub se: f64,
    /// `100 (mean - truth) / truth`, when a truth is known and nonzero.
    pub bias_pct: Option<f64>,
}

pub const PARAM_NAMES: [&str; 8] = [
    "alpha",
    "beta",
    "gamma",
    "xi",
    "eta",
    "p",
    "delta_in",
    "delta_out",
];

pub fn param_vector(theta: &HybridParams) -> [f64; 8] {
    [
        theta.alpha,
        theta.beta,
        theta.gamma,
        theta.xi,
        theta.eta,
        theta.p,
        theta.delta_in,
        theta.delta_out,
    ]
}

pub fn params_from_vector(v: [f64; 8]) -> HybridParams {
    HybridParams {
        alpha: v[0],
        beta: v[1],
        gamma: v[2],
        xi: v[3],
        eta: v[4],
        p: v[5],
        delta_in: v[6],
        delta_out: v[7],
    }
}

/// Per-parameter summaries in [`PARAM_NAMES`] order.
pub fn summarize(
    points: &[HybridParams],
    truth: Option<&HybridParams>,
) -> Result<Vec<ParamSummary>> {
    if points.is_empty() {
        return Err(Error::InvalidConfig("no estimates to summarize".into()));
    }
    let r = points.len() as f64;
    let rows: Vec<[f64; 8]> = points.iter().map(param_vector).collect();
    let truth = truth.map(param_vector);
    Ok((0..8)
        .map(|j| {
            let mean = rows.iter().map(|v| v[j]).sum::<f64>() / r;
            let sd = if points.len() > 1 {
                (rows.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (r - 1.0)).sqrt()
            } else {
                0.0
            };
            let bias_pct = truth.and_then(|t| (t[j] != 0.0).then(|| 100.0 * (mean - t[j]) / t[j]));
            ParamSummary {
                mean,
                sd,
                se: sd / r.sqrt(),
                bias_pct,
            }
        })
        .collect())
}
