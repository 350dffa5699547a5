//! Empirical degree histograms, tail curves and growth diagnostics.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::error::{Error, Result};
use crate::params::Direction;
use crate::state::NetworkState;

/// Histograms `m -> N_m` of in- and out-degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeCounts {
    pub in_counts: BTreeMap<u64, u64>,
    pub out_counts: BTreeMap<u64, u64>,
    pub n_nodes: u64,
    /// Edge count, seed included.
    pub n_edges: u64,
}

impl DegreeCounts {
    pub fn from_state(state: &NetworkState) -> Self {
        DegreeCounts {
            in_counts: histogram(state.in_degrees()),
            out_counts: histogram(state.out_degrees()),
            n_nodes: state.node_count(),
            n_edges: state.edge_count(),
        }
    }

    /// Builds counts from raw degree sequences (e.g. an observed network).
    pub fn from_degrees(in_degrees: &[u64], out_degrees: &[u64]) -> Result<Self> {
        if in_degrees.len() != out_degrees.len() {
            return Err(Error::InvalidConfig(
                "degree sequences differ in length".into(),
            ));
        }
        let n_edges: u64 = in_degrees.iter().sum();
        if n_edges != out_degrees.iter().sum::<u64>() {
            return Err(Error::InvalidConfig(
                "in- and out-degree sums differ".into(),
            ));
        }
        Ok(DegreeCounts {
            in_counts: histogram(in_degrees),
            out_counts: histogram(out_degrees),
            n_nodes: in_degrees.len() as u64,
            n_edges,
        })
    }

    pub fn counts(&self, direction: Direction) -> &BTreeMap<u64, u64> {
        match direction {
            Direction::In => &self.in_counts,
            Direction::Out => &self.out_counts,
        }
    }

    /// `N_m` for a single degree.
    pub fn count(&self, direction: Direction, m: u64) -> u64 {
        self.counts(direction).get(&m).copied().unwrap_or(0)
    }

    pub fn max_degree(&self, direction: Direction) -> u64 {
        self.counts(direction)
            .keys()
            .next_back()
            .copied()
            .unwrap_or(0)
    }

    /// Strict tail counts `N_{>m}` for `m = 0, .., max_degree - 1`.
    pub fn tail_counts(&self, direction: Direction) -> Vec<u64> {
        let counts = self.counts(direction);
        let max = self.max_degree(direction);
        let mut tail = vec![0u64; max as usize];
        // walk down from the top so each entry is a partial sum
        let mut above = 0u64;
        for m in (0..max).rev() {
            above += counts.get(&(m + 1)).copied().unwrap_or(0);
            tail[m as usize] = above;
        }
        tail
    }
}

fn histogram(degrees: &[u64]) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for &d in degrees {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

pub fn degree_counts(state: &NetworkState) -> DegreeCounts {
    DegreeCounts::from_state(state)
}

/// Empirical complementary CDF `(m, N_{>m} / n_nodes)` for every `m` below
/// the maximum degree. All values are positive and nonincreasing.
pub fn ccdf(counts: &DegreeCounts, direction: Direction) -> Vec<(u64, f64)> {
    let n = counts.n_nodes as f64;
    counts
        .tail_counts(direction)
        .into_iter()
        .enumerate()
        .map(|(m, t)| (m as u64, t as f64 / n))
        .collect()
}

/// Normalized degree trajectories `D(n) / n^c` across replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthDiagnostic {
    pub exponent: f64,
    pub checkpoints: Vec<u64>,
    /// One row per replicate, one column per checkpoint.
    pub normalized: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub sup: Vec<f64>,
    /// `|mean_last - mean_prev| / mean_prev` over the last two checkpoints.
    pub relative_change: f64,
    /// Replicates whose normalized value rose / fell between the last two
    /// checkpoints, and the two-sided sign-test p-value.
    pub rises: usize,
    pub falls: usize,
    pub sign_test_p: f64,
}

/// Each trajectory lists `(step, degree)` at the same checkpoints.
pub fn growth_diagnostic(
    trajectories: &[Vec<(u64, u64)>],
    exponent: f64,
) -> Result<GrowthDiagnostic> {
    let first = trajectories
        .first()
        .ok_or_else(|| Error::InvalidConfig("no trajectories".into()))?;
    if first.is_empty() {
        return Err(Error::InvalidConfig("empty trajectory".into()));
    }
    let checkpoints: Vec<u64> = first.iter().map(|&(n, _)| n).collect();
    if checkpoints.contains(&0) {
        return Err(Error::InvalidConfig("checkpoints must be positive".into()));
    }
    let mut normalized = Vec::with_capacity(trajectories.len());
    for t in trajectories {
        if t.len() != checkpoints.len() || t.iter().zip(&checkpoints).any(|(a, &n)| a.0 != n) {
            return Err(Error::InvalidConfig(
                "trajectories must share checkpoints".into(),
            ));
        }
        normalized.push(
            t.iter()
                .map(|&(n, d)| d as f64 / (n as f64).powf(exponent))
                .collect::<Vec<_>>(),
        );
    }
    let r = normalized.len() as f64;
    let cols = checkpoints.len();
    let column = |j: usize| normalized.iter().map(move |row| row[j]);
    let mean: Vec<f64> = (0..cols).map(|j| column(j).sum::<f64>() / r).collect();
    let variance: Vec<f64> = (0..cols)
        .map(|j| {
            if normalized.len() < 2 {
                0.0
            } else {
                column(j).map(|x| (x - mean[j]).powi(2)).sum::<f64>() / (r - 1.0)
            }
        })
        .collect();
    let sup: Vec<f64> = (0..cols)
        .map(|j| column(j).fold(f64::NEG_INFINITY, f64::max))
        .collect();

    let (mut rises, mut falls) = (0, 0);
    let mut relative_change = 0.0;
    if cols >= 2 {
        for row in &normalized {
            let (a, b) = (row[cols - 2], row[cols - 1]);
            if b > a {
                rises += 1;
            } else if b < a {
                falls += 1;
            }
        }
        relative_change = (mean[cols - 1] - mean[cols - 2]).abs() / mean[cols - 2];
    }
    Ok(GrowthDiagnostic {
        exponent,
        checkpoints,
        normalized,
        mean,
        variance,
        sup,
        relative_change,
        rises,
        falls,
        sign_test_p: sign_test(rises, falls),
    })
}

/// Two-sided exact sign test p-value.
pub fn sign_test(rises: usize, falls: usize) -> f64 {
    let n = (rises + falls) as u64;
    if n == 0 {
        return 1.0;
    }
    let k = rises.min(falls) as u64;
    let binom = Binomial::new(0.5, n).expect("valid binomial");
    (2.0 * binom.cdf(k)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_counts_and_ccdf() {
        let c = degree_counts(&NetworkState::seed());
        assert_eq!(c.in_counts, BTreeMap::from([(1, 1)]));
        assert_eq!(c.out_counts, BTreeMap::from([(1, 1)]));
        assert_eq!(ccdf(&c, Direction::In), vec![(0, 1.0)]);
    }

    #[test]
    fn hand_built_state() {
        // steps: 2 -> 1, 1 -> 3, 2 -> 1
        let s = NetworkState::from_parts(3, vec![3, 0, 1], vec![2, 2, 0], vec![0, 1, 2]).unwrap();
        let c = degree_counts(&s);
        assert_eq!(c.in_counts, BTreeMap::from([(0, 1), (1, 1), (3, 1)]));
        assert_eq!(c.out_counts, BTreeMap::from([(0, 1), (2, 2)]));
        assert_eq!(c.tail_counts(Direction::In), vec![2, 1, 1]);
        assert_eq!(c.tail_counts(Direction::Out), vec![2, 2]);
    }

    #[test]
    fn ccdf_small_histogram() {
        let c = DegreeCounts::from_degrees(&[0, 0, 0, 1], &[1, 0, 0, 0]).unwrap();
        assert_eq!(ccdf(&c, Direction::In), vec![(0, 0.25)]);
    }

    #[test]
    fn growth_flat_series() {
        let constant = vec![vec![(10, 4), (100, 4), (1000, 4)]];
        let g = growth_diagnostic(&constant, 0.0).unwrap();
        assert_eq!(g.normalized[0], vec![4.0, 4.0, 4.0]);
        assert_eq!(g.relative_change, 0.0);

        let linear = vec![vec![(10, 10), (100, 100), (1000, 1000)]; 3];
        let g = growth_diagnostic(&linear, 1.0).unwrap();
        assert!(g.mean.iter().all(|&m| (m - 1.0).abs() < 1e-15));
        assert_eq!(g.variance, vec![0.0; 3]);
        assert_eq!(g.sign_test_p, 1.0);
    }

    #[test]
    fn growth_rejects_mismatched_checkpoints() {
        let t = vec![vec![(10, 1), (20, 2)], vec![(10, 1), (30, 2)]];
        assert!(growth_diagnostic(&t, 0.5).is_err());
        assert!(growth_diagnostic(&[], 0.5).is_err());
    }

    #[test]
    fn sign_test_values() {
        assert!((sign_test(10, 0) - 2.0 * 0.5f64.powi(10)).abs() < 1e-15);
        assert_eq!(sign_test(5, 5), 1.0);
        assert!(sign_test(120, 80) < 0.01);
    }
}
