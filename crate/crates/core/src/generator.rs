//! Sequential simulation of hybrid random networks.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`). A single run
//! is seeded with `seed_from_u64(seed)`; replicate `i` of a batch uses the
//! seed returned by [`replicate_seed`], which reads the first word of stream
//! `i` of the master generator. Results therefore do not depend on how
//! replicates are scheduled across workers.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degree_stats::DegreeCounts;
use crate::edges::{EdgeLog, EdgeRecord, NodeId, Scenario};
use crate::error::{Error, Result};
use crate::params::{Direction, HybridParams};
use crate::state::NetworkState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub params: HybridParams,
    pub n_edges: u64,
    pub seed: u64,
    pub log_scenarios: bool,
    /// Steps at which degree histograms are captured, ascending.
    #[serde(default)]
    pub snapshot_steps: Vec<u64>,
}

impl SimulationConfig {
    pub fn new(params: HybridParams, n_edges: u64, seed: u64) -> Self {
        SimulationConfig {
            params,
            n_edges,
            seed,
            log_scenarios: true,
            snapshot_steps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.n_edges == 0 {
            return Err(Error::InvalidConfig("n_edges must be at least 1".into()));
        }
        if self.snapshot_steps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "snapshot steps must be strictly increasing".into(),
            ));
        }
        if let (Some(&first), Some(&last)) =
            (self.snapshot_steps.first(), self.snapshot_steps.last())
        {
            if first == 0 || last > self.n_edges {
                return Err(Error::InvalidConfig(format!(
                    "snapshot steps must lie in [1, {}]",
                    self.n_edges
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: u64,
    pub counts: DegreeCounts,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub seed: u64,
    pub state: NetworkState,
    pub log: EdgeLog,
    pub snapshots: Vec<Snapshot>,
}

/// Step-by-step simulator.
///
/// Preferential draws use the endpoint lists: with probability
/// `n / (n + delta |V|)` the node at a uniformly chosen edge end, otherwise
/// a uniform node. That selects node `i` with probability
/// `(D_i + delta) / (n + delta |V|)` exactly, for any positive `delta`.
pub struct Simulator {
    params: HybridParams,
    cumulative: [f64; 5],
    rng: ChaCha8Rng,
    state: NetworkState,
    // endpoint lists: target / source node index of every edge, seed included
    in_ends: Vec<u32>,
    out_ends: Vec<u32>,
}

impl Simulator {
    pub fn new(params: HybridParams, seed: u64) -> Result<Self> {
        params.validate()?;
        let probs = params.scenario_probs();
        let mut cumulative = [0.0; 5];
        let mut acc = 0.0;
        for (c, q) in cumulative.iter_mut().zip(probs) {
            acc += q;
            *c = acc;
        }
        Ok(Simulator {
            params,
            cumulative,
            rng: ChaCha8Rng::seed_from_u64(seed),
            state: NetworkState::seed(),
            in_ends: vec![0],
            out_ends: vec![0],
        })
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn into_state(self) -> NetworkState {
        self.state
    }

    pub fn params(&self) -> &HybridParams {
        &self.params
    }

    fn draw_scenario(&mut self) -> Scenario {
        let u: f64 = self.rng.random();
        let probs = self.params.scenario_probs();
        let mut last = 0;
        for (i, (&c, &q)) in self.cumulative.iter().zip(&probs).enumerate() {
            if q > 0.0 {
                if u < c {
                    return Scenario::ALL[i];
                }
                last = i;
            }
        }
        // rounding: u landed above the accumulated total
        Scenario::ALL[last]
    }

    fn draw_endpoint(&mut self, direction: Direction) -> NodeId {
        let nodes = self.state.node_count();
        let preferential = self.rng.random::<f64>() < self.params.p;
        let index = if preferential {
            let delta = self.params.delta(direction);
            let edges = self.state.edge_count() as f64;
            let x = self.rng.random::<f64>() * (edges + delta * nodes as f64);
            if x < edges {
                let ends = match direction {
                    Direction::In => &self.in_ends,
                    Direction::Out => &self.out_ends,
                };
                ends[x as usize] as u64
            } else {
                self.rng.random_range(0..nodes)
            }
        } else {
            self.rng.random_range(0..nodes)
        };
        index + 1
    }

    /// Advances one step and returns the new edge labeled with its scenario.
    pub fn step(&mut self) -> EdgeRecord {
        let scenario = self.draw_scenario();
        let fresh = self.state.node_count() + 1;
        let (source, target) = match scenario {
            Scenario::NewSource => (fresh, self.draw_endpoint(Direction::In)),
            Scenario::Existing => {
                let source = self.draw_endpoint(Direction::Out);
                let target = self.draw_endpoint(Direction::In);
                (source, target)
            }
            Scenario::NewTarget => (self.draw_endpoint(Direction::Out), fresh),
            Scenario::NewSelfLoop => (fresh, fresh),
            Scenario::NewPair => (fresh, fresh + 1),
        };
        self.state.apply(scenario, source, target);
        self.in_ends.push((target - 1) as u32);
        self.out_ends.push((source - 1) as u32);
        EdgeRecord::new(source, target, self.state.step() as i64).with_scenario(scenario)
    }
}

pub fn simulate(config: &SimulationConfig) -> Result<Simulation> {
    config.validate()?;
    let mut sim = Simulator::new(config.params, config.seed)?;
    let mut log = EdgeLog::new();
    let mut snapshots = Vec::with_capacity(config.snapshot_steps.len());
    let mut pending = config.snapshot_steps.iter().peekable();
    for _ in 0..config.n_edges {
        let mut record = sim.step();
        if !config.log_scenarios {
            record.scenario = None;
        }
        log.push(record);
        if pending.peek() == Some(&&sim.state().step()) {
            pending.next();
            snapshots.push(Snapshot {
                step: sim.state().step(),
                counts: DegreeCounts::from_state(sim.state()),
            });
        }
    }
    Ok(Simulation {
        seed: config.seed,
        state: sim.into_state(),
        log,
        snapshots,
    })
}

/// Seed of replicate `index` derived from `master`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index);
    rng.next_u64()
}

/// Runs `replicates` independent simulations on `workers` threads
/// (0 means the rayon default). Output order is replicate order.
pub fn simulate_replicates(
    config: &SimulationConfig,
    replicates: usize,
    workers: usize,
) -> Result<Vec<Simulation>> {
    config.validate()?;
    if replicates == 0 {
        return Err(Error::InvalidConfig("replicates must be at least 1".into()));
    }
    let run = || {
        (0..replicates)
            .into_par_iter()
            .map(|i| {
                let cfg = SimulationConfig {
                    seed: replicate_seed(config.seed, i as u64),
                    ..config.clone()
                };
                simulate(&cfg)
            })
            .collect::<Result<Vec<_>>>()
    };
    with_workers(workers, run)
}

/// Runs `f` inside a dedicated rayon pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    if workers == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
