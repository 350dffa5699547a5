//! Degree bookkeeping for an evolving network.

use serde::{Deserialize, Serialize};

use crate::edges::{NodeId, Scenario};
use crate::error::{Error, Result};
use crate::params::Direction;

/// Per-node degrees and creation steps of a network grown from the seed.
///
/// Node ids are dense: node `i` lives at index `i - 1`. The seed is node 1
/// with a self-loop, so the total in-degree (and out-degree) is always
/// `step + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkState {
    step: u64,
    in_degree: Vec<u64>,
    out_degree: Vec<u64>,
    creation_step: Vec<u64>,
}

impl NetworkState {
    /// A single node labeled 1 carrying a self-loop.
    pub fn seed() -> Self {
        NetworkState {
            step: 0,
            in_degree: vec![1],
            out_degree: vec![1],
            creation_step: vec![0],
        }
    }

    /// Builds a state from raw parts, checking edge conservation.
    pub fn from_parts(
        step: u64,
        in_degree: Vec<u64>,
        out_degree: Vec<u64>,
        creation_step: Vec<u64>,
    ) -> Result<Self> {
        if in_degree.is_empty() {
            return Err(Error::EmptyState);
        }
        if in_degree.len() != out_degree.len() || in_degree.len() != creation_step.len() {
            return Err(Error::InvalidConfig(
                "degree arrays differ in length".into(),
            ));
        }
        let edges = step + 1;
        let sum_in: u64 = in_degree.iter().sum();
        let sum_out: u64 = out_degree.iter().sum();
        if sum_in != edges || sum_out != edges {
            return Err(Error::InvalidConfig(format!(
                "degree sums ({sum_in}, {sum_out}) must equal step + 1 = {edges}"
            )));
        }
        Ok(NetworkState {
            step,
            in_degree,
            out_degree,
            creation_step,
        })
    }

    /// Edges added after the seed.
    pub fn step(&self) -> u64 {
        self.step
    }

    /// Total edge count, seed included.
    pub fn edge_count(&self) -> u64 {
        self.step + 1
    }

    pub fn node_count(&self) -> u64 {
        self.in_degree.len() as u64
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id >= 1 && id <= self.node_count()
    }

    pub fn in_degrees(&self) -> &[u64] {
        &self.in_degree
    }

    pub fn out_degrees(&self) -> &[u64] {
        &self.out_degree
    }

    pub fn degrees(&self, direction: Direction) -> &[u64] {
        match direction {
            Direction::In => &self.in_degree,
            Direction::Out => &self.out_degree,
        }
    }

    pub fn creation_steps(&self) -> &[u64] {
        &self.creation_step
    }

    pub fn in_degree(&self, id: NodeId) -> Result<u64> {
        self.check(id)?;
        Ok(self.in_degree[id as usize - 1])
    }

    pub fn out_degree(&self, id: NodeId) -> Result<u64> {
        self.check(id)?;
        Ok(self.out_degree[id as usize - 1])
    }

    pub fn degree(&self, id: NodeId, direction: Direction) -> Result<u64> {
        match direction {
            Direction::In => self.in_degree(id),
            Direction::Out => self.out_degree(id),
        }
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownNode(id))
        }
    }

    /// Applies one step. `source`/`target` may equal `node_count + 1` (or
    /// `+ 2` for a new pair) to denote fresh nodes.
    pub(crate) fn apply(&mut self, scenario: Scenario, source: NodeId, target: NodeId) {
        self.step += 1;
        let created = scenario.new_nodes();
        for _ in 0..created {
            self.in_degree.push(0);
            self.out_degree.push(0);
            self.creation_step.push(self.step);
        }
        self.out_degree[source as usize - 1] += 1;
        self.in_degree[target as usize - 1] += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_has_one_self_looped_node() {
        let s = NetworkState::seed();
        assert_eq!(s.node_count(), 1);
        assert_eq!(s.edge_count(), 1);
        assert_eq!(s.in_degree(1).unwrap(), 1);
        assert_eq!(s.out_degree(1).unwrap(), 1);
        assert!(matches!(s.in_degree(2), Err(Error::UnknownNode(2))));
    }

    #[test]
    fn apply_updates_degrees_and_nodes() {
        let mut s = NetworkState::seed();
        s.apply(Scenario::NewSource, 2, 1);
        s.apply(Scenario::NewPair, 3, 4);
        s.apply(Scenario::Existing, 4, 4);
        assert_eq!(s.in_degrees(), &[2, 0, 0, 2]);
        assert_eq!(s.out_degrees(), &[1, 1, 1, 1]);
        assert_eq!(s.creation_steps(), &[0, 1, 2, 2]);
        assert_eq!(s.edge_count(), 4);
    }

    #[test]
    fn from_parts_checks_conservation() {
        assert!(NetworkState::from_parts(1, vec![1, 0], vec![1, 0], vec![0, 1]).is_err());
        assert!(NetworkState::from_parts(1, vec![1, 1], vec![2, 0], vec![0, 1]).is_ok());
        assert!(matches!(
            NetworkState::from_parts(0, vec![], vec![], vec![]),
            Err(Error::EmptyState)
        ));
    }
}
