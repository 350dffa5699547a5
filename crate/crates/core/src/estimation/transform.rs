//! Unconstrained coordinates for the parameter space.
//!
//! Scenario probabilities use an additive log-ratio against a reference
//! component, `p` a logit and the offsets a log. Scenario components that
//! were never observed are pinned at zero, where the likelihood is maximal.

use crate::likelihood::SufficientStats;
use crate::params::HybridParams;

const RATIO_CLAMP: f64 = 30.0;
const LOGIT_CLAMP: f64 = 36.0;
const LOG_DELTA_CLAMP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    /// Scenario indices with positive counts; the last one is the reference.
    active: Vec<usize>,
}

impl Transform {
    /// `None` when fewer than two scenarios were observed, in which case the
    /// scenario maximum sits on the boundary.
    pub fn for_stats(stats: &SufficientStats) -> Option<Self> {
        let counts = stats.scenario_counts();
        let mut active: Vec<usize> = (0..5).filter(|&i| counts[i] > 0).collect();
        if active.len() < 2 {
            return None;
        }
        // most frequent scenario as reference keeps ratios moderate
        let reference = *active
            .iter()
            .max_by_key(|&&i| (counts[i], std::cmp::Reverse(i)))
            .unwrap();
        active.retain(|&i| i != reference);
        active.push(reference);
        Some(Transform { active })
    }

    pub fn dim(&self) -> usize {
        self.active.len() - 1 + 3
    }

    /// Encodes `theta`, falling back to `fallback` scenario probabilities if
    /// any active component of `theta` is zero.
    pub fn encode(&self, theta: &HybridParams, fallback: &[f64; 5]) -> Vec<f64> {
        let probs = theta.scenario_probs();
        let use_fallback = self.active.iter().any(|&i| probs[i] <= 0.0);
        let probs = if use_fallback { *fallback } else { probs };
        let reference = probs[*self.active.last().unwrap()];
        let mut x: Vec<f64> = self.active[..self.active.len() - 1]
            .iter()
            .map(|&i| (probs[i] / reference).ln().clamp(-RATIO_CLAMP, RATIO_CLAMP))
            .collect();
        let p = theta.p.clamp(1e-15, 1.0 - 1e-15);
        x.push((p / (1.0 - p)).ln());
        x.push(theta.delta_in.ln());
        x.push(theta.delta_out.ln());
        x
    }

    pub fn decode(&self, x: &[f64]) -> HybridParams {
        let k = self.active.len() - 1;
        let weights: Vec<f64> = x[..k]
            .iter()
            .map(|v| v.clamp(-RATIO_CLAMP, RATIO_CLAMP).exp())
            .collect();
        let total = 1.0 + weights.iter().sum::<f64>();
        let mut probs = [0.0; 5];
        for (&i, w) in self.active.iter().zip(&weights) {
            probs[i] = w / total;
        }
        let reference = *self.active.last().unwrap();
        probs[reference] = 1.0 - probs.iter().sum::<f64>();
        let logit = x[k].clamp(-LOGIT_CLAMP, LOGIT_CLAMP);
        HybridParams {
            alpha: probs[0],
            beta: probs[1],
            gamma: probs[2],
            xi: probs[3],
            eta: probs[4],
            p: 1.0 / (1.0 + (-logit).exp()),
            delta_in: x[k + 1].clamp(-LOG_DELTA_CLAMP, LOG_DELTA_CLAMP).exp(),
            delta_out: x[k + 2].clamp(-LOG_DELTA_CLAMP, LOG_DELTA_CLAMP).exp(),
        }
    }
}
