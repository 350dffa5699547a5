//! Model parameters and the constants derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `alpha + beta + gamma + xi + eta = 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// Edge direction of a degree sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    In,
    Out,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::In => "in",
            Direction::Out => "out",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in" => Ok(Direction::In),
            "out" => Ok(Direction::Out),
            other => Err(Error::InvalidConfig(format!(
                "direction must be `in` or `out`, got `{other}`"
            ))),
        }
    }
}

/// Parameters of a directed hybrid random network.
///
/// `alpha`, `beta`, `gamma` are the probabilities of the three base
/// edge-creation scenarios (new source, both endpoints existing, new target).
/// `xi` and `eta` are the extended scenarios: a fresh self-looped node, and
/// two fresh nodes joined by one edge. Both are zero in the base model.
///
/// Every endpoint draw follows preferential attachment with probability `p`
/// (weight `degree + delta`) and uniform attachment otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub p: f64,
    pub delta_in: f64,
    pub delta_out: f64,
    #[serde(default)]
    pub xi: f64,
    #[serde(default)]
    pub eta: f64,
}

impl HybridParams {
    /// Base model with `gamma = 1 - alpha - beta`.
    pub fn new(alpha: f64, beta: f64, p: f64, delta_in: f64, delta_out: f64) -> Result<Self> {
        Self::extended(
            alpha,
            beta,
            1.0 - alpha - beta,
            0.0,
            0.0,
            p,
            delta_in,
            delta_out,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn extended(
        alpha: f64,
        beta: f64,
        gamma: f64,
        xi: f64,
        eta: f64,
        p: f64,
        delta_in: f64,
        delta_out: f64,
    ) -> Result<Self> {
        let params = HybridParams {
            alpha,
            beta,
            gamma,
            p,
            delta_in,
            delta_out,
            xi,
            eta,
        };
        params.validate()?;
        Ok(params)
    }

    /// The fixed start used for Nelder-Mead: uniform scenario weights,
    /// `p = 1/2` and unit offsets.
    pub fn neutral_start() -> Self {
        HybridParams {
            alpha: 1.0 / 3.0,
            beta: 1.0 / 3.0,
            gamma: 1.0 / 3.0,
            p: 0.5,
            delta_in: 1.0,
            delta_out: 1.0,
            xi: 0.0,
            eta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        let all = [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("xi", self.xi),
            ("eta", self.eta),
            ("p", self.p),
            ("delta_in", self.delta_in),
            ("delta_out", self.delta_out),
        ];
        for (name, value) in all {
            if !value.is_finite() {
                return bad(format!("{name} must be finite, got {value}"));
            }
        }
        for (name, value) in &all[..5] {
            if *value < 0.0 {
                return bad(format!("{name} must be nonnegative, got {value}"));
            }
        }
        let total = self.scenario_probs().iter().sum::<f64>();
        if (total - 1.0).abs() > SIMPLEX_TOLERANCE {
            return bad(format!(
                "scenario probabilities must sum to 1, got {total:.15}"
            ));
        }
        if self.alpha >= 1.0 {
            return bad(format!("alpha must be < 1, got {}", self.alpha));
        }
        if self.beta >= 1.0 {
            return bad(format!("beta must be < 1, got {}", self.beta));
        }
        if !self.is_extended() && self.alpha + self.beta <= 0.0 {
            return bad("alpha + beta must be positive (gamma = 1 is degenerate)".into());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p must lie in [0, 1], got {}", self.p));
        }
        if self.delta_in <= 0.0 || self.delta_out <= 0.0 {
            return bad(format!(
                "offsets must be positive, got delta_in={} delta_out={}",
                self.delta_in, self.delta_out
            ));
        }
        Ok(())
    }

    /// `(alpha, beta, gamma, xi, eta)`, indexed by scenario label minus one.
    pub fn scenario_probs(&self) -> [f64; 5] {
        [self.alpha, self.beta, self.gamma, self.xi, self.eta]
    }

    pub fn is_extended(&self) -> bool {
        self.xi > 0.0 || self.eta > 0.0
    }

    pub fn delta(&self, direction: Direction) -> f64 {
        match direction {
            Direction::In => self.delta_in,
            Direction::Out => self.delta_out,
        }
    }

    /// Growth exponents `(C1, C2)` of a fixed node's in- and out-degree.
    pub fn growth_exponents(&self) -> (f64, f64) {
        let c1 = (self.alpha + self.beta) * self.p / (1.0 + self.delta_in * (1.0 - self.beta));
        let c2 = (self.beta + self.gamma) * self.p / (1.0 + self.delta_out * (1.0 - self.beta));
        (c1, c2)
    }

    pub fn derived(&self) -> Result<DerivedConstants> {
        DerivedConstants::new(self)
    }
}

/// Constants of the degree limit theory.
///
/// `delta_*_tilde` are the offsets of the pure preferential attachment
/// network whose degree limits coincide with the hybrid network's, and
/// `rate_*` are the rates of the exponential clocks in the negative binomial
/// mixtures. These formulas are for the base model (`xi = eta = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub c1: f64,
    pub c2: f64,
    pub delta_in_tilde: f64,
    pub delta_out_tilde: f64,
    pub rate_in: f64,
    pub rate_out: f64,
}

impl DerivedConstants {
    pub fn new(params: &HybridParams) -> Result<Self> {
        let HybridParams {
            alpha,
            beta,
            gamma,
            p,
            delta_in,
            delta_out,
            ..
        } = *params;
        if p <= 0.0 {
            return Err(Error::Undefined("effective offset (p = 0)"));
        }
        if alpha + beta <= 0.0 || beta + gamma <= 0.0 {
            return Err(Error::Undefined("exponential clock rate"));
        }
        let (c1, c2) = params.growth_exponents();
        let uniform_shift = (1.0 - p) / (p * (1.0 - beta));
        Ok(DerivedConstants {
            c1,
            c2,
            delta_in_tilde: delta_in / p + uniform_shift,
            delta_out_tilde: delta_out / p + uniform_shift,
            rate_in: (1.0 + delta_in * (1.0 - beta)) / (p * (alpha + beta)),
            rate_out: (1.0 + delta_out * (1.0 - beta)) / (p * (beta + gamma)),
        })
    }

    pub fn delta_tilde(&self, direction: Direction) -> f64 {
        match direction {
            Direction::In => self.delta_in_tilde,
            Direction::Out => self.delta_out_tilde,
        }
    }

    pub fn rate(&self, direction: Direction) -> f64 {
        match direction {
            Direction::In => self.rate_in,
            Direction::Out => self.rate_out,
        }
    }
}

/// Offset implied by an effective offset at mixing weight `p`, the inverse
/// of `delta_tilde = delta / p + (1 - p) / (p (1 - beta))`.
pub fn delta_from_tilde(delta_tilde: f64, p: f64, beta: f64) -> f64 {
    p * delta_tilde - (1.0 - p) / (1.0 - beta)
}
