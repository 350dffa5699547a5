use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{
    fit_nelder_mead, param_vector, params_from_vector, EstimationResult, FitStatus, Method,
    NelderMeadConfig, TraceRow,
};
use crate::error::{Error, Result};
use crate::likelihood::{log_likelihood, SufficientStats};
use crate::params::HybridParams;

const START_ATTEMPTS: usize = 100;
const DRIFT_TOLERANCE: f64 = 0.01;
const START_P: f64 = 1.0 - 1e-4;

/// Random-walk standard deviations. Scenario probabilities and `p` move on
/// their natural scale, the offsets on the log scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSizes {
    pub scenario: f64,
    pub p: f64,
    pub log_delta_in: f64,
    pub log_delta_out: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        StepSizes {
            scenario: 0.01,
            p: 0.01,
            log_delta_in: 0.05,
            log_delta_out: 0.05,
        }
    }
}

/// Flat prior: uniform on the scenario simplex, on `p` in `[0, 1]` and on
/// each offset in `(0, delta_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub delta_max: f64,
}

impl Default for Prior {
    fn default() -> Self {
        Prior { delta_max: 100.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointSummary {
    Mean,
    Median,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MhConfig {
    pub burn_in: u64,
    /// Post-burn-in sweeps; every `thinning`-th one is kept.
    pub iterations: u64,
    pub thinning: u64,
    pub step_sizes: StepSizes,
    pub prior: Prior,
    pub seed: u64,
    /// Starting point; drawn at random when absent or of zero likelihood.
    pub start: Option<HybridParams>,
    pub summary: PointSummary,
}

impl Default for MhConfig {
    fn default() -> Self {
        MhConfig {
            burn_in: 10_000,
            iterations: 20_000,
            thinning: 500,
            step_sizes: StepSizes::default(),
            prior: Prior::default(),
            seed: 0,
            start: None,
            summary: PointSummary::Mean,
        }
    }
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thinning == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        if self.iterations < self.thinning {
            return Err(Error::InvalidConfig(
                "iterations must be at least thinning".into(),
            ));
        }
        let s = self.step_sizes;
        if [s.scenario, s.p, s.log_delta_in, s.log_delta_out]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidConfig(
                "step sizes must be finite and non-negative".into(),
            ));
        }
        if !(self.prior.delta_max > 0.0 && self.prior.delta_max.is_finite()) {
            return Err(Error::InvalidConfig("delta_max must be positive".into()));
        }
        if let Some(start) = &self.start {
            start.validate()?;
        }
        Ok(())
    }
}

/// Chain state: free scenario probabilities, `p`, `ln delta_in`,
/// `ln delta_out`. Unobserved scenarios stay at zero and the most frequent
/// one absorbs the remainder of the simplex.
struct Chain<'a> {
    stats: &'a SufficientStats,
    free: Vec<usize>,
    reference: usize,
    ln_delta_max: f64,
    x: Vec<f64>,
    scenario_ll: f64,
    kernel_ll: f64,
    evaluations: u64,
}

impl<'a> Chain<'a> {
    fn params_of(&self, x: &[f64]) -> Option<HybridParams> {
        let k = self.free.len();
        let mut probs = [0.0; 5];
        for (&i, &v) in self.free.iter().zip(x) {
            probs[i] = v;
        }
        let rest = 1.0 - probs.iter().sum::<f64>();
        if rest < 0.0 {
            return None;
        }
        probs[self.reference] = rest;
        let mut v = [0.0; 8];
        v[..5].copy_from_slice(&probs);
        v[5] = x[k];
        v[6] = x[k + 1].exp();
        v[7] = x[k + 2].exp();
        Some(params_from_vector(v))
    }

    fn params(&self) -> HybridParams {
        self.params_of(&self.x)
            .expect("chain state stays on the simplex")
    }

    fn scenario_ll_of(&self, theta: &HybridParams) -> f64 {
        self.stats.scenario_log_likelihood(&theta.scenario_probs())
    }

    fn kernel_ll_of(&mut self, theta: &HybridParams) -> f64 {
        self.evaluations += 1;
        self.stats
            .kernel_log_likelihood(theta.p, theta.delta_in, theta.delta_out)
            + theta.delta_in.ln()
            + theta.delta_out.ln()
    }

    fn log_target(&self) -> f64 {
        self.scenario_ll + self.kernel_ll
    }

    fn bounds(&self, j: usize) -> (f64, f64) {
        let k = self.free.len();
        if j <= k {
            (0.0, 1.0)
        } else {
            (f64::NEG_INFINITY, self.ln_delta_max)
        }
    }

    /// One componentwise sweep; returns the number of accepted moves.
    fn sweep(&mut self, rng: &mut ChaCha8Rng, steps: &[f64]) -> u64 {
        let k = self.free.len();
        let mut accepted = 0;
        for j in 0..self.x.len() {
            let z: f64 = rng.sample(StandardNormal);
            let u: f64 = rng.random();
            let (lo, hi) = self.bounds(j);
            let mut proposal = self.x.clone();
            proposal[j] = reflect(self.x[j] + steps[j] * z, lo, hi);
            let Some(theta) = self.params_of(&proposal) else {
                continue;
            };
            let (scenario_ll, kernel_ll) = if j < k {
                (self.scenario_ll_of(&theta), self.kernel_ll)
            } else {
                (self.scenario_ll, self.kernel_ll_of(&theta))
            };
            if accept(scenario_ll + kernel_ll - self.log_target(), u) {
                self.x = proposal;
                self.scenario_ll = scenario_ll;
                self.kernel_ll = kernel_ll;
                accepted += 1;
            }
        }
        accepted
    }
}

/// Metropolis rule for a symmetric proposal: accept with probability
/// `min(1, exp(log_ratio))` given a uniform draw `u`.
fn accept(log_ratio: f64, u: f64) -> bool {
    u.ln() < log_ratio
}

/// Folds `v` back into `[lo, hi]` by mirror reflection at the bounds.
fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    if !v.is_finite() {
        return v;
    }
    if lo.is_finite() && hi.is_finite() {
        let width = hi - lo;
        let r = (v - lo).rem_euclid(2.0 * width);
        return lo + if r > width { 2.0 * width - r } else { r };
    }
    if v > hi {
        v = 2.0 * hi - v;
    }
    if v < lo {
        v = 2.0 * lo - v;
    }
    v
}

fn random_start(rng: &mut ChaCha8Rng, active: &[usize], delta_max: f64) -> HybridParams {
    let weights: Vec<f64> = active.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = weights.iter().sum();
    let mut v = [0.0; 8];
    for (&i, w) in active.iter().zip(&weights) {
        v[i] = w / total;
    }
    v[5] = START_P;
    for slot in &mut v[6..8] {
        *slot = loop {
            let d: f64 = rng.sample(Exp1);
            if d > 0.0 && d <= delta_max {
                break d;
            }
        };
    }
    params_from_vector(v)
}

/// Samples the flat-prior posterior by componentwise random-walk
/// Metropolis-Hastings with reflection at the prior bounds.
pub fn fit_mh(stats: &SufficientStats, config: &MhConfig) -> Result<EstimationResult> {
    config.validate()?;
    let counts = stats.scenario_counts();
    let active: Vec<usize> = (0..5).filter(|&i| counts[i] > 0).collect();
    if active.len() < 2 {
        return Err(Error::InvalidConfig(
            "posterior sampling needs at least two observed scenarios".into(),
        ));
    }
    let reference = *active
        .iter()
        .max_by_key(|&&i| (counts[i], std::cmp::Reverse(i)))
        .unwrap();
    let free: Vec<usize> = active.iter().copied().filter(|&i| i != reference).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let ln_delta_max = config.prior.delta_max.ln();
    let in_support = |t: &HybridParams| {
        active.iter().all(|&i| t.scenario_probs()[i] > 0.0)
            && (0..5).all(|i| counts[i] > 0 || t.scenario_probs()[i] == 0.0)
            && t.delta_in <= config.prior.delta_max
            && t.delta_out <= config.prior.delta_max
            && log_likelihood(stats, t).is_finite()
    };
    let mut start = config.start.filter(|t| in_support(t));
    let mut attempts = 0;
    while start.is_none() {
        if attempts == START_ATTEMPTS {
            return Err(Error::ZeroLikelihoodStart(START_ATTEMPTS));
        }
        attempts += 1;
        let candidate = random_start(&mut rng, &active, config.prior.delta_max);
        start = Some(candidate).filter(|t| in_support(t));
    }
    let start = start.unwrap();

    let sv = param_vector(&start);
    let mut x: Vec<f64> = free.iter().map(|&i| sv[i]).collect();
    x.extend([start.p, start.delta_in.ln(), start.delta_out.ln()]);
    let mut chain = Chain {
        stats,
        free,
        reference,
        ln_delta_max,
        x,
        scenario_ll: 0.0,
        kernel_ll: 0.0,
        evaluations: 0,
    };
    chain.scenario_ll = chain.scenario_ll_of(&start);
    chain.kernel_ll = chain.kernel_ll_of(&start);

    let s = config.step_sizes;
    let mut steps = vec![s.scenario; chain.free.len()];
    steps.extend([s.p, s.log_delta_in, s.log_delta_out]);

    for _ in 0..config.burn_in {
        chain.sweep(&mut rng, &steps);
    }

    let mut accepted = 0u64;
    let mut trace = Vec::with_capacity((config.iterations / config.thinning) as usize);
    let mut running_means = Vec::with_capacity(trace.capacity());
    let mut sums = [0.0f64; 8];
    let checkpoint = (config.iterations * 3 / 4).max(1);
    let mut mean_at_checkpoint = [0.0f64; 8];
    for t in 1..=config.iterations {
        accepted += chain.sweep(&mut rng, &steps);
        let theta = chain.params();
        for (acc, v) in sums.iter_mut().zip(param_vector(&theta)) {
            *acc += v;
        }
        if t == checkpoint {
            mean_at_checkpoint = sums.map(|v| v / t as f64);
        }
        if t % config.thinning == 0 {
            trace.push(TraceRow {
                iteration: config.burn_in + t,
                params: theta,
                log_posterior: chain.scenario_ll
                    + stats.kernel_log_likelihood(theta.p, theta.delta_in, theta.delta_out),
            });
            running_means.push(params_from_vector(sums.map(|v| v / t as f64)));
        }
    }
    let final_means = sums.map(|v| v / config.iterations as f64);
    let converged = final_means
        .iter()
        .zip(&mean_at_checkpoint)
        .all(|(f, c)| *f == 0.0 || (f - c).abs() <= DRIFT_TOLERANCE * f.abs());

    let kept: Vec<HybridParams> = trace.iter().map(|r| r.params).collect();
    let point = match config.summary {
        PointSummary::Mean => mean_point(&kept),
        PointSummary::Median => median_point(&kept, reference),
    };
    let proposals = config.iterations * steps.len() as u64;
    Ok(EstimationResult {
        method: Method::Mh,
        point,
        log_likelihood: log_likelihood(stats, &point),
        converged,
        status: FitStatus::Sampled,
        iterations: config.burn_in + config.iterations,
        evaluations: chain.evaluations,
        acceptance_rate: Some(if proposals == 0 {
            1.0
        } else {
            accepted as f64 / proposals as f64
        }),
        trace: Some(trace),
        running_means: Some(running_means),
        seed: Some(config.seed),
    })
}

fn mean_point(draws: &[HybridParams]) -> HybridParams {
    let mut sums = [0.0; 8];
    for d in draws {
        for (acc, v) in sums.iter_mut().zip(param_vector(d)) {
            *acc += v;
        }
    }
    let mut v = sums.map(|s| s / draws.len() as f64);
    renormalize(&mut v);
    params_from_vector(v)
}

fn median_point(draws: &[HybridParams], reference: usize) -> HybridParams {
    let rows: Vec<[f64; 8]> = draws.iter().map(param_vector).collect();
    let mut v = [0.0; 8];
    for (j, slot) in v.iter_mut().enumerate() {
        let mut col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
        col.sort_by(f64::total_cmp);
        let n = col.len();
        *slot = if n % 2 == 1 {
            col[n / 2]
        } else {
            0.5 * (col[n / 2 - 1] + col[n / 2])
        };
    }
    v[reference] = 0.0;
    v[reference] = (1.0 - v[..5].iter().sum::<f64>()).max(0.0);
    renormalize(&mut v);
    params_from_vector(v)
}

fn renormalize(v: &mut [f64; 8]) {
    let total: f64 = v[..5].iter().sum();
    for x in &mut v[..5] {
        *x /= total;
    }
}

/// Runs [`fit_mh`] and then Nelder-Mead from the posterior summary. The
/// template's own start is also tried, and the higher optimum is returned
/// with the sampler's trace attached.
pub fn fit_integrated(
    stats: &SufficientStats,
    mh_config: &MhConfig,
    nm_template: &NelderMeadConfig,
) -> Result<EstimationResult> {
    nm_template.validate()?;
    let mh = fit_mh(stats, mh_config)?;
    let seeded = fit_nelder_mead(
        stats,
        &NelderMeadConfig {
            initial_point: mh.point,
            ..*nm_template
        },
    )?;
    let fixed = fit_nelder_mead(stats, nm_template)?;
    let mut best = if fixed.log_likelihood > seeded.log_likelihood + 1e-12 {
        fixed
    } else {
        seeded
    };
    best.method = Method::Integrated;
    best.acceptance_rate = mh.acceptance_rate;
    best.trace = mh.trace;
    best.running_means = mh.running_means;
    best.seed = mh.seed;
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::{simulate, SimulationConfig};
    use crate::likelihood::replay;

    fn stats(theta: HybridParams, n: u64, seed: u64) -> SufficientStats {
        replay(
            &simulate(&SimulationConfig::new(theta, n, seed))
                .unwrap()
                .log,
        )
        .unwrap()
    }

    fn short() -> MhConfig {
        MhConfig {
            burn_in: 200,
            iterations: 1000,
            thinning: 10,
            seed: 9,
            ..Default::default()
        }
    }

    #[test]
    fn reflection_stays_in_bounds() {
        assert_eq!(reflect(1.2, 0.0, 1.0), 0.8);
        assert!((reflect(-0.3, 0.0, 1.0) - 0.3).abs() < 1e-15);
        assert!((reflect(2.3, 0.0, 1.0) - 0.3).abs() < 1e-12);
        assert_eq!(reflect(5.0, f64::NEG_INFINITY, 4.0), 3.0);
        assert_eq!(reflect(-7.0, f64::NEG_INFINITY, 4.0), -7.0);
    }

    /// Two cells `[0, 1)` and `[1, 2)` with masses 0.3 and 0.7 under the
    /// reflected random walk and the acceptance rule used by the sampler.
    #[test]
    fn two_cell_target_is_stationary() {
        let log_density = |x: f64| if x < 1.0 { 0.3f64.ln() } else { 0.7f64.ln() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut x = 0.5;
        let steps = 1_000_000;
        let mut low = 0u64;
        for _ in 0..steps {
            let z: f64 = rng.sample(StandardNormal);
            let y = reflect(x + 0.8 * z, 0.0, 2.0);
            if accept(log_density(y) - log_density(x), rng.random()) {
                x = y;
            }
            low += u64::from(x < 1.0);
        }
        let freq = low as f64 / steps as f64;
        assert!((freq - 0.3).abs() < 0.01 * 0.3, "{freq}");
    }

    #[test]
    fn zero_steps_freeze_the_chain() {
        let st = stats(HybridParams::new(0.3, 0.4, 0.6, 1.0, 1.0).unwrap(), 300, 1);
        let start = HybridParams::new(0.3, 0.4, 0.5, 2.0, 0.5).unwrap();
        let cfg = MhConfig {
            step_sizes: StepSizes {
                scenario: 0.0,
                p: 0.0,
                log_delta_in: 0.0,
                log_delta_out: 0.0,
            },
            start: Some(start),
            ..short()
        };
        let fit = fit_mh(&st, &cfg).unwrap();
        assert_eq!(fit.acceptance_rate, Some(1.0));
        let trace = fit.trace.unwrap();
        assert_eq!(trace.len(), 100);
        for row in &trace {
            assert!((row.params.p - 0.5).abs() < 1e-15);
            assert!((row.params.delta_in - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn reproducible_and_valid() {
        let st = stats(HybridParams::new(0.2, 0.5, 0.8, 1.3, 0.7).unwrap(), 500, 2);
        let a = fit_mh(&st, &short()).unwrap();
        let b = fit_mh(&st, &short()).unwrap();
        assert_eq!(a, b);
        let rate = a.acceptance_rate.unwrap();
        assert!((0.0..=1.0).contains(&rate));
        for row in a.trace.as_ref().unwrap() {
            row.params.validate().unwrap();
            assert!(row.params.delta_in <= 100.0);
        }
        a.point.validate().unwrap();
        let c = fit_mh(
            &st,
            &MhConfig {
                seed: 10,
                ..short()
            },
        )
        .unwrap();
        assert_ne!(a.trace, c.trace);
    }

    #[test]
    fn config_invariants() {
        let st = stats(HybridParams::new(0.2, 0.5, 0.8, 1.3, 0.7).unwrap(), 50, 2);
        for bad in [
            MhConfig {
                thinning: 0,
                ..short()
            },
            MhConfig {
                iterations: 5,
                ..short()
            },
        ] {
            assert!(matches!(fit_mh(&st, &bad), Err(Error::InvalidConfig(_))));
        }
    }

    #[test]
    fn integrated_is_no_worse_than_fixed_start() {
        let st = stats(HybridParams::new(0.2, 0.5, 0.8, 1.3, 0.7).unwrap(), 800, 4);
        let nm = NelderMeadConfig::default();
        let fixed = fit_nelder_mead(&st, &nm).unwrap();
        let integrated = fit_integrated(&st, &short(), &nm).unwrap();
        assert_eq!(integrated.method, Method::Integrated);
        assert!(integrated.trace.is_some());
        if fixed.converged {
            assert!(integrated.log_likelihood >= fixed.log_likelihood - 1e-8);
        }
    }

    #[test]
    fn median_summary_is_valid() {
        let st = stats(HybridParams::new(0.2, 0.5, 0.8, 1.3, 0.7).unwrap(), 300, 5);
        let fit = fit_mh(
            &st,
            &MhConfig {
                summary: PointSummary::Median,
                ..short()
            },
        )
        .unwrap();
        fit.point.validate().unwrap();
    }
}
