//! Limiting degree distributions.
//!
//! The limit of `N_m(n) / n` is a mixture of negative binomial laws whose
//! success probability `e^{-T}` is driven by an exponential clock `T` with
//! rate `rate_in` (or `rate_out`). With `T ~ Exp(lambda)`,
//!
//! ```text
//! E[P(NB(r, e^{-T}) = m)] = lambda Γ(r + m) / (Γ(r) m!) B(lambda + r, m + 1)
//!                         = lambda / (lambda + r + m) Π_{j<m} (r + j) / (lambda + r + j)
//! ```
//!
//! which is what [`limit_pmf`] evaluates. [`limit_pmf_quadrature`] integrates
//! the same expectation numerically from [`nb_pmf`] and exists to certify the
//! closed form.
//!
//! Nodes born with degree 0 in a direction contribute `NB(r)`; nodes born
//! with degree 1 contribute `1 + NB(1 + r)`. For in-degrees the first group
//! arrives with probability `alpha` (new source) and the second with `gamma`
//! (new target); for out-degrees the roles swap.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::params::{DerivedConstants, Direction, HybridParams};
use crate::quadrature;

/// Default truncation before adaptive extension.
pub const DEFAULT_TRUNCATION: usize = 200;
/// Mass allowed beyond the truncation point.
pub const MASS_TOLERANCE: f64 = 1e-8;
/// Hard cap on the adaptive truncation.
pub const MAX_TRUNCATION: usize = 1 << 21;

/// `P(NB(r, q) = m) = Γ(r + m) / (Γ(r) m!) q^r (1 - q)^m`, the law with
/// generating function `(s + (1 - s) / q)^{-r}`.
pub fn nb_pmf(r: f64, q: f64, m: u64) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain {
            function: "nb_pmf",
            reason: format!("r must be positive and finite, got {r}"),
        });
    }
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain {
            function: "nb_pmf",
            reason: format!("q must lie in (0, 1], got {q}"),
        });
    }
    if q == 1.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let m_f = m as f64;
    let log =
        ln_gamma(r + m_f) - ln_gamma(r) - ln_gamma(m_f + 1.0) + r * q.ln() + m_f * (-q).ln_1p();
    Ok(log.exp())
}

/// `E[P(NB(r, e^{-T}) = m)]` for `m = 0..len`, `T ~ Exp(rate)`.
fn mixture_terms(r: f64, rate: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut t = rate / (rate + r);
    for m in 0..len {
        if m > 0 {
            let m = m as f64;
            t *= (r + m - 1.0) / (rate + r + m);
        }
        out.push(t);
    }
    out
}

/// `P(NB(r, e^{-T}) >= m)` for the same mixture.
fn mixture_tail(r: f64, rate: f64, m: usize) -> f64 {
    (0..m).fold(1.0, |acc, j| {
        let j = j as f64;
        acc * (r + j) / (rate + r + j)
    })
}

/// Closed-form mixture probability at a single `m`.
pub fn mixture_pmf(r: f64, rate: f64, m: u64) -> f64 {
    rate / (rate + r + m as f64) * mixture_tail(r, rate, m as usize)
}

/// Numerical-quadrature value of the same mixture probability.
pub fn mixture_pmf_quadrature(r: f64, rate: f64, m: u64) -> Result<f64> {
    // the integrand peaks near t = ln(1 + m / (rate + r)) and decays like
    // exp(-(rate + r) t) afterwards
    let t_max = (1.0 + m as f64 / (rate + r)).ln() + 40.0 / (rate + r);
    let integrand = |t: f64| -> f64 {
        if t <= 0.0 {
            return if m == 0 { rate } else { 0.0 };
        }
        rate * (-rate * t).exp() * nb_pmf(r, (-t).exp(), m).unwrap_or(0.0)
    };
    if !(r > 0.0 && rate > 0.0) {
        return Err(Error::Domain {
            function: "mixture_pmf_quadrature",
            reason: format!("need r > 0 and rate > 0, got r={r} rate={rate}"),
        });
    }
    Ok(quadrature::integrate_half_line(integrand, t_max, 1e-14))
}

/// Limit values `psi_m^in` and `psi_m^out`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitPmf {
    pub psi_in: Vec<f64>,
    pub psi_out: Vec<f64>,
    /// Largest `m` held (both vectors have `truncation_m + 1` entries).
    pub truncation_m: usize,
    /// Exact mass beyond `truncation_m`.
    pub tail_in: f64,
    pub tail_out: f64,
    pub params: HybridParams,
}

impl LimitPmf {
    pub fn psi(&self, direction: Direction) -> &[f64] {
        match direction {
            Direction::In => &self.psi_in,
            Direction::Out => &self.psi_out,
        }
    }

    pub fn tail(&self, direction: Direction) -> f64 {
        match direction {
            Direction::In => self.tail_in,
            Direction::Out => self.tail_out,
        }
    }

    /// Limit of the empirical CCDF `N_{>m} / |V|`: the strict tail of `psi`
    /// divided by its total mass `alpha + gamma`.
    pub fn ccdf(&self, direction: Direction) -> Vec<(u64, f64)> {
        let psi = self.psi(direction);
        let total = self.params.alpha + self.params.gamma;
        let mut above = self.tail(direction);
        let mut out = vec![(0, 0.0); psi.len()];
        for m in (0..psi.len()).rev() {
            out[m] = (m as u64, above / total);
            above += psi[m];
        }
        out
    }
}

struct Components {
    constants: DerivedConstants,
    alpha: f64,
    gamma: f64,
}

impl Components {
    fn new(params: &HybridParams) -> Result<Self> {
        params.validate()?;
        if params.is_extended() {
            return Err(Error::Undefined("degree limit of the extended model"));
        }
        Ok(Components {
            constants: params.derived()?,
            alpha: params.alpha,
            gamma: params.gamma,
        })
    }

    /// Weights of the (born with degree 0, born with degree 1) groups.
    fn weights(&self, direction: Direction) -> (f64, f64) {
        match direction {
            Direction::In => (self.alpha, self.gamma),
            Direction::Out => (self.gamma, self.alpha),
        }
    }

    fn psi(&self, direction: Direction, len: usize) -> (Vec<f64>, f64) {
        let r = self.constants.delta_tilde(direction);
        let rate = self.constants.rate(direction);
        let (w0, w1) = self.weights(direction);
        let zero = mixture_terms(r, rate, len);
        let one = mixture_terms(r + 1.0, rate, len);
        let psi: Vec<f64> = (0..len)
            .map(|m| w0 * zero[m] + if m > 0 { w1 * one[m - 1] } else { 0.0 })
            .collect();
        let tail = w0 * mixture_tail(r, rate, len) + w1 * mixture_tail(r + 1.0, rate, len - 1);
        (psi, tail)
    }
}

/// Limit pmf truncated at exactly `m_max`.
pub fn limit_pmf_truncated(params: &HybridParams, m_max: usize) -> Result<LimitPmf> {
    let c = Components::new(params)?;
    let (psi_in, tail_in) = c.psi(Direction::In, m_max + 1);
    let (psi_out, tail_out) = c.psi(Direction::Out, m_max + 1);
    Ok(LimitPmf {
        psi_in,
        psi_out,
        truncation_m: m_max,
        tail_in,
        tail_out,
        params: *params,
    })
}

/// Limit pmf with truncation at least `m_max`, doubled until the mass left
/// beyond it is below [`MASS_TOLERANCE`] in both directions or the cap
/// [`MAX_TRUNCATION`] is reached.
pub fn limit_pmf(params: &HybridParams, m_max: usize) -> Result<LimitPmf> {
    let c = Components::new(params)?;
    let mut m = m_max.max(1);
    loop {
        let tail_in = tail_beyond(&c, Direction::In, m);
        let tail_out = tail_beyond(&c, Direction::Out, m);
        if (tail_in <= MASS_TOLERANCE && tail_out <= MASS_TOLERANCE) || m >= MAX_TRUNCATION {
            return limit_pmf_truncated(params, m);
        }
        m = (2 * m).min(MAX_TRUNCATION);
    }
}

fn tail_beyond(c: &Components, direction: Direction, m: usize) -> f64 {
    let r = c.constants.delta_tilde(direction);
    let rate = c.constants.rate(direction);
    let (w0, w1) = c.weights(direction);
    w0 * mixture_tail(r, rate, m + 1) + w1 * mixture_tail(r + 1.0, rate, m)
}

/// `(psi_m^in, psi_m^out)` by numerical integration over the clock.
pub fn limit_pmf_quadrature(params: &HybridParams, m: u64) -> Result<(f64, f64)> {
    let c = Components::new(params)?;
    let value = |direction| -> Result<f64> {
        let r = c.constants.delta_tilde(direction);
        let rate = c.constants.rate(direction);
        let (w0, w1) = c.weights(direction);
        let mut v = w0 * mixture_pmf_quadrature(r, rate, m)?;
        if m > 0 {
            v += w1 * mixture_pmf_quadrature(r + 1.0, rate, m - 1)?;
        }
        Ok(v)
    };
    Ok((value(Direction::In)?, value(Direction::Out)?))
}
