//! Edge records, scenario labels and ordered edge logs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node identifier as it appears in an edge log. Always positive.
pub type NodeId = u64;

/// Which edge-creation case produced an edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Scenario {
    /// A new node points to an existing node.
    NewSource = 1,
    /// Both endpoints already exist.
    Existing = 2,
    /// An existing node points to a new node.
    NewTarget = 3,
    /// A new node arrives with a self-loop.
    NewSelfLoop = 4,
    /// Two new nodes arrive joined by one edge.
    NewPair = 5,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::NewSource,
        Scenario::Existing,
        Scenario::NewTarget,
        Scenario::NewSelfLoop,
        Scenario::NewPair,
    ];

    pub fn label(self) -> u8 {
        self as u8
    }

    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_label(label: u8) -> Result<Self> {
        match label {
            1 => Ok(Scenario::NewSource),
            2 => Ok(Scenario::Existing),
            3 => Ok(Scenario::NewTarget),
            4 => Ok(Scenario::NewSelfLoop),
            5 => Ok(Scenario::NewPair),
            other => Err(Error::InvalidConfig(format!(
                "scenario label must be in 1..=5, got {other}"
            ))),
        }
    }

    /// Number of nodes this scenario adds.
    pub fn new_nodes(self) -> u64 {
        match self {
            Scenario::Existing => 0,
            Scenario::NewPair => 2,
            _ => 1,
        }
    }

    /// Whether the target was chosen by the in-degree kernel.
    pub fn uses_in_kernel(self) -> bool {
        matches!(self, Scenario::NewSource | Scenario::Existing)
    }

    /// Whether the source was chosen by the out-degree kernel.
    pub fn uses_out_kernel(self) -> bool {
        matches!(self, Scenario::Existing | Scenario::NewTarget)
    }
}

impl From<Scenario> for u8 {
    fn from(s: Scenario) -> u8 {
        s.label()
    }
}

impl TryFrom<u8> for Scenario {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        Scenario::from_label(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub source: NodeId,
    pub target: NodeId,
    /// Simulation step or UNIX timestamp.
    pub time: i64,
    pub scenario: Option<Scenario>,
}

impl EdgeRecord {
    pub fn new(source: NodeId, target: NodeId, time: i64) -> Self {
        EdgeRecord {
            source,
            target,
            time,
            scenario: None,
        }
    }

    pub fn with_scenario(mut self, scenario: Scenario) -> Self {
        self.scenario = Some(scenario);
        self
    }
}

/// Time-ordered list of edge records.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeLog {
    records: Vec<EdgeRecord>,
}

impl EdgeLog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a log from records that are already in time order.
    pub fn from_ordered(records: Vec<EdgeRecord>) -> Result<Self> {
        for (index, r) in records.iter().enumerate() {
            check_ids(index, r)?;
        }
        if let Some(index) = records.windows(2).position(|w| w[1].time < w[0].time) {
            return Err(Error::NonMonotoneTime {
                index: index + 1,
                time: records[index + 1].time,
                previous: records[index].time,
            });
        }
        Ok(EdgeLog { records })
    }

    /// Builds a log by stably sorting records on time; ties keep input order.
    pub fn from_unordered(mut records: Vec<EdgeRecord>) -> Result<Self> {
        for (index, r) in records.iter().enumerate() {
            check_ids(index, r)?;
        }
        records.sort_by_key(|r| r.time);
        Ok(EdgeLog { records })
    }

    pub fn push(&mut self, record: EdgeRecord) {
        debug_assert!(self
            .records
            .last()
            .is_none_or(|last| last.time <= record.time));
        self.records.push(record);
    }

    pub fn records(&self) -> &[EdgeRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EdgeRecord> {
        self.records.iter()
    }

    /// Copy of the log with scenario labels removed.
    pub fn unlabeled(&self) -> EdgeLog {
        EdgeLog {
            records: self
                .records
                .iter()
                .map(|r| EdgeRecord {
                    scenario: None,
                    ..*r
                })
                .collect(),
        }
    }
}

impl<'a> IntoIterator for &'a EdgeLog {
    type Item = &'a EdgeRecord;
    type IntoIter = std::slice::Iter<'a, EdgeRecord>;

    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

fn check_ids(index: usize, r: &EdgeRecord) -> Result<()> {
    if r.source == 0 || r.target == 0 {
        return Err(Error::InvalidRecord {
            index,
            reason: "node ids must be positive".into(),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unordered_sort_is_stable() {
        let log = EdgeLog::from_unordered(vec![
            EdgeRecord::new(1, 2, 5),
            EdgeRecord::new(3, 4, 1),
            EdgeRecord::new(5, 6, 5),
        ])
        .unwrap();
        let pairs: Vec<_> = log.iter().map(|r| (r.source, r.target)).collect();
        assert_eq!(pairs, vec![(3, 4), (1, 2), (5, 6)]);
    }

    #[test]
    fn ordered_rejects_time_reversal_and_zero_ids() {
        assert!(matches!(
            EdgeLog::from_ordered(vec![EdgeRecord::new(1, 2, 5), EdgeRecord::new(1, 2, 4)]),
            Err(Error::NonMonotoneTime { index: 1, .. })
        ));
        assert!(EdgeLog::from_ordered(vec![EdgeRecord::new(0, 2, 5)]).is_err());
    }

    #[test]
    fn scenario_labels_round_trip() {
        for s in Scenario::ALL {
            assert_eq!(Scenario::from_label(s.label()).unwrap(), s);
        }
        assert!(Scenario::from_label(6).is_err());
    }
}
