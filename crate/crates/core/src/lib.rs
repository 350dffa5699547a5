//! Directed hybrid random networks that mix preferential attachment with
//! uniform attachment.
//!
//! The crate covers the generative model ([`model`], [`generator`]), its
//! degree limit theory ([`degree_stats`], [`limit`]), likelihood inference
//! ([`likelihood`], [`approx_score`], [`estimation`]) and edge-list I/O
//! ([`io`]).

pub mod approx_score;
pub mod degree_stats;
pub mod edges;
pub mod error;
pub mod estimation;
pub mod generator;
pub mod io;
pub mod likelihood;
pub mod limit;
pub mod model;
pub mod params;
pub mod quadrature;
pub mod state;

pub use degree_stats::{ccdf, degree_counts, growth_diagnostic, DegreeCounts, GrowthDiagnostic};
pub use edges::{EdgeLog, EdgeRecord, NodeId, Scenario};
pub use error::{Error, Result};
pub use generator::{simulate, simulate_replicates, Simulation, SimulationConfig, Simulator};
pub use likelihood::{log_likelihood, mle_scenarios, replay, score, SufficientStats};
pub use limit::{limit_pmf, nb_pmf, LimitPmf};
pub use model::{
    advance, attach_prob_in, attach_prob_out, classify_scenario, step_distribution, StepOutcome,
};
pub use params::{DerivedConstants, Direction, HybridParams};
pub use state::NetworkState;
