//! Approximate score equations for the effective offsets.
//!
//! For large networks the in-offset score equation is approximately
//!
//! ```text
//! sum_m (N_{>m} / n) / (m + dt) = gamma / dt + p (alpha + beta) (1 - beta) / (1 + delta (1 - beta))
//! ```
//!
//! with `dt` the effective offset and `delta = p dt - (1 - p) / (1 - beta)`.
//! The out-offset equation swaps `gamma` for `alpha` and `alpha + beta` for
//! `beta + gamma`. The limit pmf satisfies both exactly. This is a
//! snapshot-only auxiliary estimator: it needs `p` as an input and is never
//! used to estimate `p` itself.

use serde::Serialize;

use crate::degree_stats::DegreeCounts;
use crate::error::{Error, Result};
use crate::likelihood::ScenarioMle;
use crate::params::{delta_from_tilde, Direction};

const GRID_POINTS: usize = 600;
const UPPER: f64 = 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxScoreSolution {
    pub delta_tilde: f64,
    /// Offset implied at the supplied `p`.
    pub delta: f64,
    pub residual: f64,
}

/// `N_{>m} / n` with `n` the edge count, so the entries sum to one.
pub fn tail_proportions(counts: &DegreeCounts, direction: Direction) -> Vec<f64> {
    let n = counts.n_edges as f64;
    counts
        .tail_counts(direction)
        .into_iter()
        .map(|t| t as f64 / n)
        .collect()
}

/// Left side minus right side of the approximate score equation.
pub fn approx_score_residual(
    tail: &[f64],
    freqs: &ScenarioMle,
    direction: Direction,
    p: f64,
    delta_tilde: f64,
) -> f64 {
    let (born_with_one, kernel_share) = match direction {
        Direction::In => (freqs.gamma, freqs.alpha + freqs.beta),
        Direction::Out => (freqs.alpha, freqs.beta + freqs.gamma),
    };
    let delta = delta_from_tilde(delta_tilde, p, freqs.beta);
    let lhs: f64 = tail
        .iter()
        .enumerate()
        .map(|(m, t)| t / (m as f64 + delta_tilde))
        .sum();
    let rhs = born_with_one / delta_tilde
        + p * kernel_share * (1.0 - freqs.beta) / (1.0 + delta * (1.0 - freqs.beta));
    lhs - rhs
}

/// Solves the approximate score equation for the effective offset given
/// tail proportions `N_{>m} / n`, scenario frequencies and `p`.
///
/// A log-spaced grid over the admissible range (`delta > 0`) locates the
/// first sign change, which bisection then refines.
pub fn approx_score_solve_tail(
    tail: &[f64],
    freqs: &ScenarioMle,
    direction: Direction,
    p: f64,
) -> Result<ApproxScoreSolution> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Domain {
            function: "approx_score_solve",
            reason: format!("p must lie in (0, 1], got {p}"),
        });
    }
    let f = |dt: f64| approx_score_residual(tail, freqs, direction, p, dt);
    let lower = (1.0 - p) / (p * (1.0 - freqs.beta));
    let lo_end = if lower > 0.0 {
        lower * (1.0 + 1e-9)
    } else {
        1e-8
    };
    let ratio = (UPPER / lo_end).ln() / (GRID_POINTS - 1) as f64;
    let grid = (0..GRID_POINTS).map(|i| lo_end * (ratio * i as f64).exp());

    let mut prev: Option<(f64, f64)> = None;
    let mut bracket = None;
    for x in grid {
        let fx = f(x);
        if fx == 0.0 {
            bracket = Some((x, x));
            break;
        }
        if let Some((px, pf)) = prev {
            if pf.is_finite() && fx.is_finite() && pf.signum() != fx.signum() {
                bracket = Some((px, x));
                break;
            }
        }
        prev = Some((x, fx));
    }
    let (mut a, mut b) = bracket.ok_or(Error::NoBracket {
        lo: lo_end,
        hi: UPPER,
    })?;
    let fa_sign = f(a).signum();
    for _ in 0..200 {
        if b - a <= 1e-14 * b {
            break;
        }
        let mid = 0.5 * (a + b);
        if f(mid).signum() == fa_sign {
            a = mid;
        } else {
            b = mid;
        }
    }
    let delta_tilde = 0.5 * (a + b);
    Ok(ApproxScoreSolution {
        delta_tilde,
        delta: delta_from_tilde(delta_tilde, p, freqs.beta),
        residual: f(delta_tilde),
    })
}

pub fn approx_score_solve(
    counts: &DegreeCounts,
    freqs: &ScenarioMle,
    direction: Direction,
    p: f64,
) -> Result<ApproxScoreSolution> {
    approx_score_solve_tail(&tail_proportions(counts, direction), freqs, direction, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limit::limit_pmf_truncated;
    use crate::params::HybridParams;

    fn freqs(th: &HybridParams) -> ScenarioMle {
        ScenarioMle {
            alpha: th.alpha,
            beta: th.beta,
            gamma: th.gamma,
            xi: 0.0,
            eta: 0.0,
            regular: true,
        }
    }

    /// Strict tails of the limit pmf normalized to unit mean degree, which
    /// is what `N_{>m} / n` converges to.
    fn limit_tail(th: &HybridParams, direction: Direction, len: usize) -> Vec<f64> {
        let pmf = limit_pmf_truncated(th, len).unwrap();
        let psi = pmf.psi(direction);
        let mut above = pmf.tail(direction);
        let mut tail = vec![0.0; len];
        for m in (0..len).rev() {
            above += psi[m + 1];
            tail[m] = above;
        }
        tail
    }

    #[test]
    fn recovers_effective_offset_from_limit() {
        for th in [
            HybridParams::new(0.45, 0.1, 0.6, 1.3, 0.7).unwrap(),
            HybridParams::new(0.1, 0.8, 0.8, 1.3, 0.7).unwrap(),
        ] {
            let d = th.derived().unwrap();
            for dir in [Direction::In, Direction::Out] {
                let tail = limit_tail(&th, dir, 400_000);
                let sol = approx_score_solve_tail(&tail, &freqs(&th), dir, th.p).unwrap();
                assert!(
                    (sol.delta_tilde - d.delta_tilde(dir)).abs() < 1e-3,
                    "{dir:?}: {} vs {}",
                    sol.delta_tilde,
                    d.delta_tilde(dir)
                );
                assert!((sol.delta - th.delta(dir)).abs() < 1e-2);
            }
        }
    }

    #[test]
    fn empty_tail_has_no_root() {
        let f = ScenarioMle {
            alpha: 0.5,
            beta: 0.5,
            gamma: 0.0,
            xi: 0.0,
            eta: 0.0,
            regular: true,
        };
        let r = approx_score_solve_tail(&[], &f, Direction::In, 0.7);
        assert!(matches!(r, Err(Error::NoBracket { .. })));
        assert!(approx_score_solve_tail(&[0.5], &f, Direction::In, 0.0).is_err());
    }
}
