//! Attachment kernels, the one-step transition law, and scenario
//! classification of observed edges.

use std::collections::HashSet;

use crate::edges::{EdgeRecord, NodeId, Scenario};
use crate::error::{Error, Result};
use crate::params::{Direction, HybridParams};
use crate::state::NetworkState;

/// Probability that the next endpoint drawn in `direction` is node `id`:
/// `p (D + delta) / (n + delta |V|) + (1 - p) / |V|`, with `n` the current
/// edge count (seed included), which equals the total degree mass.
pub fn attach_prob(
    state: &NetworkState,
    id: NodeId,
    params: &HybridParams,
    direction: Direction,
) -> Result<f64> {
    if state.node_count() == 0 {
        return Err(Error::EmptyState);
    }
    let degree = state.degree(id, direction)?;
    Ok(mixture(degree, state, params, direction))
}

pub fn attach_prob_in(state: &NetworkState, id: NodeId, params: &HybridParams) -> Result<f64> {
    attach_prob(state, id, params, Direction::In)
}

pub fn attach_prob_out(state: &NetworkState, id: NodeId, params: &HybridParams) -> Result<f64> {
    attach_prob(state, id, params, Direction::Out)
}

fn mixture(degree: u64, state: &NetworkState, params: &HybridParams, direction: Direction) -> f64 {
    let delta = params.delta(direction);
    let nodes = state.node_count() as f64;
    let mass = state.edge_count() as f64 + delta * nodes;
    params.p * (degree as f64 + delta) / mass + (1.0 - params.p) / nodes
}

/// Kernel value for every node, indexed by `id - 1`.
pub fn kernel(state: &NetworkState, params: &HybridParams, direction: Direction) -> Vec<f64> {
    state
        .degrees(direction)
        .iter()
        .map(|&d| mixture(d, state, params, direction))
        .collect()
}

/// One possible next step. Fresh nodes carry ids `node_count + 1` (and
/// `node_count + 2` for the second node of a new pair).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub scenario: Scenario,
    pub source: NodeId,
    pub target: NodeId,
    pub prob: f64,
}

/// Full conditional law of the next step given `state`.
///
/// Outcomes of scenarios with zero probability are omitted. For the
/// both-existing scenario every ordered pair is listed, self-loops included.
pub fn step_distribution(state: &NetworkState, params: &HybridParams) -> Result<Vec<StepOutcome>> {
    if state.node_count() == 0 {
        return Err(Error::EmptyState);
    }
    let n = state.node_count();
    let fresh = n + 1;
    let k_in = kernel(state, params, Direction::In);
    let k_out = kernel(state, params, Direction::Out);
    let mut out = Vec::new();

    if params.alpha > 0.0 {
        for (i, w) in k_in.iter().enumerate() {
            out.push(StepOutcome {
                scenario: Scenario::NewSource,
                source: fresh,
                target: i as NodeId + 1,
                prob: params.alpha * w,
            });
        }
    }
    if params.beta > 0.0 {
        for (j, wj) in k_out.iter().enumerate() {
            for (i, wi) in k_in.iter().enumerate() {
                out.push(StepOutcome {
                    scenario: Scenario::Existing,
                    source: j as NodeId + 1,
                    target: i as NodeId + 1,
                    prob: params.beta * wj * wi,
                });
            }
        }
    }
    if params.gamma > 0.0 {
        for (j, w) in k_out.iter().enumerate() {
            out.push(StepOutcome {
                scenario: Scenario::NewTarget,
                source: j as NodeId + 1,
                target: fresh,
                prob: params.gamma * w,
            });
        }
    }
    if params.xi > 0.0 {
        out.push(StepOutcome {
            scenario: Scenario::NewSelfLoop,
            source: fresh,
            target: fresh,
            prob: params.xi,
        });
    }
    if params.eta > 0.0 {
        out.push(StepOutcome {
            scenario: Scenario::NewPair,
            source: fresh,
            target: fresh + 1,
            prob: params.eta,
        });
    }
    Ok(out)
}

/// State after `outcome` is applied to `state`.
pub fn advance(state: &NetworkState, outcome: &StepOutcome) -> NetworkState {
    let mut next = state.clone();
    next.apply(outcome.scenario, outcome.source, outcome.target);
    next
}

/// Scenario of `record` given the set of nodes that existed before it.
pub fn classify_scenario(previous_nodes: &HashSet<NodeId>, record: &EdgeRecord) -> Scenario {
    classify_with(|id| previous_nodes.contains(&id), record)
}

pub(crate) fn classify_with(known: impl Fn(NodeId) -> bool, record: &EdgeRecord) -> Scenario {
    match (known(record.source), known(record.target)) {
        (false, true) => Scenario::NewSource,
        (true, true) => Scenario::Existing,
        (true, false) => Scenario::NewTarget,
        (false, false) if record.source == record.target => Scenario::NewSelfLoop,
        (false, false) => Scenario::NewPair,
    }
}
