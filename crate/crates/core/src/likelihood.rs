//! Exact likelihood of an edge log, its score, and closed-form scenario MLEs.
//!
//! For step `k` with pre-step node count `V`, edge count `k` (seed
//! included) and chosen target in-degree `D`, the in-kernel contributes
//!
//! ```text
//! log[(p D + delta_in) V + (1 - p) k] - log[k V + V^2 delta_in]
//! ```
//!
//! and the out-kernel contributes the analogous term for the source. Steps
//! of the extended scenarios only contribute `log xi` or `log eta`.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::edges::{EdgeLog, EdgeRecord, NodeId, Scenario};
use crate::error::{Error, Result};
use crate::model::classify_with;
use crate::params::HybridParams;

/// Covariates of a single step, taken just before the edge was added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub scenario: Scenario,
    /// Edges present before this step; equals the step index `k` for logs
    /// replayed from the seed.
    pub mass: u64,
    pub nodes: u64,
    /// In-degree of the target, for scenarios drawn by the in-kernel.
    pub in_degree: Option<u64>,
    /// Out-degree of the source, for scenarios drawn by the out-kernel.
    pub out_degree: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct KernelObs {
    degree: f64,
    nodes: f64,
    mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    steps: Vec<StepStats>,
    counts: [u64; 5],
    in_obs: Vec<KernelObs>,
    out_obs: Vec<KernelObs>,
    ln_nodes_in: f64,
    ln_nodes_out: f64,
}

impl SufficientStats {
    pub fn from_steps(steps: Vec<StepStats>) -> Self {
        let mut counts = [0u64; 5];
        let mut in_obs = Vec::new();
        let mut out_obs = Vec::new();
        for s in &steps {
            counts[s.scenario.index()] += 1;
            let obs = |degree: u64| KernelObs {
                degree: degree as f64,
                nodes: s.nodes as f64,
                mass: s.mass as f64,
            };
            if let Some(d) = s.in_degree {
                in_obs.push(obs(d));
            }
            if let Some(d) = s.out_degree {
                out_obs.push(obs(d));
            }
        }
        let ln_nodes_in = in_obs.iter().map(|o| o.nodes.ln()).sum();
        let ln_nodes_out = out_obs.iter().map(|o| o.nodes.ln()).sum();
        SufficientStats {
            steps,
            counts,
            in_obs,
            out_obs,
            ln_nodes_in,
            ln_nodes_out,
        }
    }

    pub fn steps(&self) -> &[StepStats] {
        &self.steps
    }

    /// Scenario totals `n_1 ..= n_5`.
    pub fn scenario_counts(&self) -> [u64; 5] {
        self.counts
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Whether any step came from the extended scenarios.
    pub fn has_extended_steps(&self) -> bool {
        self.counts[3] + self.counts[4] > 0
    }

    /// Scenario part of the log-likelihood.
    pub fn scenario_log_likelihood(&self, probs: &[f64; 5]) -> f64 {
        let mut total = 0.0;
        for (&n, &q) in self.counts.iter().zip(probs) {
            if n == 0 {
                continue;
            }
            if q <= 0.0 {
                return f64::NEG_INFINITY;
            }
            total += n as f64 * q.ln();
        }
        total
    }

    /// Attachment-kernel part of the log-likelihood, which depends on
    /// `(p, delta_in, delta_out)` only.
    pub fn kernel_log_likelihood(&self, p: f64, delta_in: f64, delta_out: f64) -> f64 {
        kernel_sum(&self.in_obs, p, delta_in) - self.ln_nodes_in
            + kernel_sum(&self.out_obs, p, delta_out)
            - self.ln_nodes_out
    }
}

fn kernel_sum(obs: &[KernelObs], p: f64, delta: f64) -> f64 {
    let q = 1.0 - p;
    obs.iter()
        .map(|o| {
            ((p * o.degree + delta) * o.nodes + q * o.mass).ln() - (o.mass + o.nodes * delta).ln()
        })
        .sum()
}

/// Incremental replay of an edge log against degree bookkeeping keyed by
/// the log's own node ids.
struct Replayer {
    index: HashMap<NodeId, usize>,
    in_degree: Vec<u64>,
    out_degree: Vec<u64>,
    edges: u64,
    last_time: Option<i64>,
}

impl Replayer {
    fn empty() -> Self {
        Replayer {
            index: HashMap::new(),
            in_degree: Vec::new(),
            out_degree: Vec::new(),
            edges: 0,
            last_time: None,
        }
    }

    fn seeded() -> Self {
        let mut r = Self::empty();
        r.add_edge(1, 1);
        r
    }

    fn node(&mut self, id: NodeId) -> usize {
        let next = self.in_degree.len();
        let i = *self.index.entry(id).or_insert(next);
        if i == next {
            self.in_degree.push(0);
            self.out_degree.push(0);
        }
        i
    }

    fn add_edge(&mut self, source: NodeId, target: NodeId) {
        let s = self.node(source);
        let t = self.node(target);
        self.out_degree[s] += 1;
        self.in_degree[t] += 1;
        self.edges += 1;
    }

    fn check(&mut self, index: usize, record: &EdgeRecord) -> Result<()> {
        if record.source == 0 || record.target == 0 {
            return Err(Error::InvalidRecord {
                index,
                reason: "node ids must be positive".into(),
            });
        }
        if let Some(previous) = self.last_time {
            if record.time < previous {
                return Err(Error::NonMonotoneTime {
                    index,
                    time: record.time,
                    previous,
                });
            }
        }
        self.last_time = Some(record.time);
        Ok(())
    }

    fn step(&mut self, index: usize, record: &EdgeRecord) -> Result<StepStats> {
        self.check(index, record)?;
        let scenario = classify_with(|id| self.index.contains_key(&id), record);
        if let Some(label) = record.scenario {
            if label != scenario {
                return Err(Error::InvalidRecord {
                    index,
                    reason: format!(
                        "labeled scenario {} but endpoints imply scenario {}",
                        label.label(),
                        scenario.label()
                    ),
                });
            }
        }
        let in_degree = scenario
            .uses_in_kernel()
            .then(|| self.in_degree[self.index[&record.target]]);
        let out_degree = scenario
            .uses_out_kernel()
            .then(|| self.out_degree[self.index[&record.source]]);
        let stats = StepStats {
            scenario,
            mass: self.edges,
            nodes: self.in_degree.len() as u64,
            in_degree,
            out_degree,
        };
        self.add_edge(record.source, record.target);
        Ok(stats)
    }
}

/// Replays a log generated from the seed: node 1 exists with a self-loop
/// before the first record, and every record is a step.
pub fn replay(log: &EdgeLog) -> Result<SufficientStats> {
    let mut r = Replayer::seeded();
    let steps = log
        .iter()
        .enumerate()
        .map(|(i, rec)| r.step(i, rec))
        .collect::<Result<Vec<_>>>()?;
    Ok(SufficientStats::from_steps(steps))
}

/// Replays an observed log with no seed: the first record plays the role of
/// the deterministic initial edge (its endpoints form the initial vertex
/// set and it contributes no likelihood term), and every later record is a
/// step.
pub fn replay_observed(log: &EdgeLog) -> Result<SufficientStats> {
    let mut records = log.iter().enumerate();
    let (i0, first) = records.next().ok_or(Error::EmptyLog)?;
    let mut r = Replayer::empty();
    r.check(i0, first)?;
    r.add_edge(first.source, first.target);
    let steps = records
        .map(|(i, rec)| r.step(i, rec))
        .collect::<Result<Vec<_>>>()?;
    Ok(SufficientStats::from_steps(steps))
}

/// Log-likelihood of the replayed log under `theta`. Returns
/// `f64::NEG_INFINITY` when a scenario with zero probability was observed.
/// `theta` is not validated.
pub fn log_likelihood(stats: &SufficientStats, theta: &HybridParams) -> f64 {
    let scenario = stats.scenario_log_likelihood(&theta.scenario_probs());
    if scenario == f64::NEG_INFINITY {
        return scenario;
    }
    scenario + stats.kernel_log_likelihood(theta.p, theta.delta_in, theta.delta_out)
}

/// Gradient of the log-likelihood in `(delta_in, delta_out, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Score {
    pub delta_in: f64,
    pub delta_out: f64,
    pub p: f64,
}

pub fn score(stats: &SufficientStats, theta: &HybridParams) -> Score {
    let (d_in, p_in) = kernel_score(&stats.in_obs, theta.p, theta.delta_in);
    let (d_out, p_out) = kernel_score(&stats.out_obs, theta.p, theta.delta_out);
    Score {
        delta_in: d_in,
        delta_out: d_out,
        p: p_in + p_out,
    }
}

fn kernel_score(obs: &[KernelObs], p: f64, delta: f64) -> (f64, f64) {
    let mut d_delta = 0.0;
    let mut d_p = 0.0;
    for o in obs {
        let bracket = (p * o.degree + delta) * o.nodes + (1.0 - p) * o.mass;
        d_delta += o.nodes / bracket - o.nodes / (o.mass + o.nodes * delta);
        d_p += (o.degree * o.nodes - o.mass) / bracket;
    }
    (d_delta, d_p)
}

/// Scenario frequencies, the closed-form MLEs of the scenario probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioMle {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub xi: f64,
    pub eta: f64,
    /// False when `alpha` or `beta` hits 1, or when the base scenarios are
    /// all new-target steps.
    pub regular: bool,
}

impl ScenarioMle {
    pub fn probs(&self) -> [f64; 5] {
        [self.alpha, self.beta, self.gamma, self.xi, self.eta]
    }
}

pub fn mle_scenarios(stats: &SufficientStats) -> Result<ScenarioMle> {
    if stats.is_empty() {
        return Err(Error::EmptyLog);
    }
    let n = stats.len() as f64;
    let [a, b, g, x, e] = stats.counts.map(|c| c as f64 / n);
    let extended = x + e > 0.0;
    let regular = a < 1.0 && b < 1.0 && (extended || a + b > 0.0);
    Ok(ScenarioMle {
        alpha: a,
        beta: b,
        gamma: g,
        xi: x,
        eta: e,
        regular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::edges::EdgeRecord;

    fn log(edges: &[(u64, u64)]) -> EdgeLog {
        EdgeLog::from_ordered(
            edges
                .iter()
                .enumerate()
                .map(|(k, &(s, t))| EdgeRecord::new(s, t, k as i64 + 1))
                .collect(),
        )
        .unwrap()
    }

    fn theta() -> HybridParams {
        HybridParams::new(0.3, 0.4, 0.65, 1.3, 0.7).unwrap()
    }

    #[test]
    fn replay_single_new_source() {
        let st = replay(&log(&[(2, 1)])).unwrap();
        assert_eq!(
            st.steps(),
            &[StepStats {
                scenario: Scenario::NewSource,
                mass: 1,
                nodes: 1,
                in_degree: Some(1),
                out_degree: None,
            }]
        );
    }

    #[test]
    fn replay_single_existing() {
        let st = replay(&log(&[(1, 1)])).unwrap();
        let s = st.steps()[0];
        assert_eq!(s.scenario, Scenario::Existing);
        assert_eq!((s.in_degree, s.out_degree, s.nodes), (Some(1), Some(1), 1));
    }

    #[test]
    fn replay_empty_and_errors() {
        assert!(replay(&EdgeLog::new()).unwrap().is_empty());
        let bad = EdgeLog::from_ordered(vec![
            EdgeRecord::new(2, 1, 1).with_scenario(Scenario::Existing)
        ])
        .unwrap();
        assert!(matches!(
            replay(&bad),
            Err(Error::InvalidRecord { index: 0, .. })
        ));
        assert!(matches!(
            replay_observed(&EdgeLog::new()),
            Err(Error::EmptyLog)
        ));
    }

    #[test]
    fn one_step_likelihoods_reduce_to_scenario_probability() {
        let th = theta();
        let ll = log_likelihood(&replay(&log(&[(2, 1)])).unwrap(), &th);
        assert!((ll - th.alpha.ln()).abs() < 1e-14);
        let ll = log_likelihood(&replay(&log(&[(1, 1)])).unwrap(), &th);
        assert!((ll - th.beta.ln()).abs() < 1e-14);
        let ll = log_likelihood(&replay(&log(&[(1, 2)])).unwrap(), &th);
        assert!((ll - th.gamma.ln()).abs() < 1e-14);
    }

    #[test]
    fn impossible_scenario_gives_negative_infinity() {
        let th = HybridParams::new(0.5, 0.5, 0.5, 1.0, 1.0).unwrap();
        let st = replay(&log(&[(1, 2)])).unwrap();
        assert_eq!(log_likelihood(&st, &th), f64::NEG_INFINITY);
    }

    #[test]
    fn delta_in_score_vanishes_without_in_kernel_steps() {
        // only new-target steps
        let st = replay(&log(&[(1, 2), (2, 3), (1, 4)])).unwrap();
        let s = score(&st, &theta());
        assert_eq!(s.delta_in, 0.0);
        assert!(s.delta_out != 0.0);
    }

    #[test]
    fn p_score_vanishes_when_degree_times_nodes_equals_mass() {
        // every observation with D |V| = k: seed then (1,1): D=1, |V|=1, k=1
        let st = SufficientStats::from_steps(vec![
            StepStats {
                scenario: Scenario::NewSource,
                mass: 1,
                nodes: 1,
                in_degree: Some(1),
                out_degree: None,
            },
            StepStats {
                scenario: Scenario::Existing,
                mass: 6,
                nodes: 3,
                in_degree: Some(2),
                out_degree: Some(2),
            },
        ]);
        assert_eq!(score(&st, &theta()).p, 0.0);
    }

    #[test]
    fn scenario_frequencies() {
        let st = replay(&log(&[
            (2, 1),
            (1, 1),
            (1, 1),
            (1, 1),
            (1, 1),
            (1, 1),
            (1, 1),
            (1, 1),
            (1, 1),
            (1, 3),
        ]))
        .unwrap();
        let m = mle_scenarios(&st).unwrap();
        assert!((m.alpha - 0.1).abs() < 1e-15);
        assert!((m.beta - 0.8).abs() < 1e-15);
        assert!(m.regular);

        let all_existing = replay(&log(&[(1, 1), (1, 1)])).unwrap();
        let m = mle_scenarios(&all_existing).unwrap();
        assert_eq!(m.beta, 1.0);
        assert!(!m.regular);
    }

    #[test]
    fn observed_replay_skips_first_record() {
        let st = replay_observed(&log(&[(10, 20), (30, 20), (20, 10)])).unwrap();
        assert_eq!(st.len(), 2);
        assert_eq!(st.steps()[0].scenario, Scenario::NewSource);
        assert_eq!(st.steps()[0].mass, 1);
        assert_eq!(st.steps()[0].nodes, 2);
        assert_eq!(st.steps()[0].in_degree, Some(1));
        assert_eq!(st.steps()[1].scenario, Scenario::Existing);
        assert_eq!(
            (st.steps()[1].in_degree, st.steps()[1].out_degree),
            (Some(0), Some(0))
        );
    }
}
