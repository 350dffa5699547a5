use hybridnet::estimation::{fit_mh, fit_nelder_mead, MhConfig, NelderMeadConfig, StepSizes};
use hybridnet::generator::replicate_seed;
use hybridnet::{
    log_likelihood, mle_scenarios, replay, simulate, simulate_replicates, EdgeLog, EdgeRecord,
    HybridParams, SimulationConfig,
};

#[test]
fn nelder_mead_reaches_at_least_the_true_likelihood() {
    let theta = HybridParams::new(0.25, 0.5, 0.7, 1.5, 0.8).unwrap();
    let sims = simulate_replicates(&SimulationConfig::new(theta, 3_000, 11), 10, 0).unwrap();
    let mut better = 0;
    for sim in &sims {
        let stats = replay(&sim.log).unwrap();
        let fit = fit_nelder_mead(&stats, &NelderMeadConfig::default()).unwrap();
        assert!(fit.point.validate().is_ok());
        assert!((fit.log_likelihood - log_likelihood(&stats, &fit.point)).abs() < 1e-8);
        if fit.log_likelihood >= log_likelihood(&stats, &theta) - 1e-6 {
            better += 1;
        }
    }
    assert!(
        better >= 9,
        "only {better}/10 fits reached the true log-likelihood"
    );
}

#[test]
fn nelder_mead_recovers_scenario_frequencies() {
    let theta = HybridParams::new(0.3, 0.45, 0.9, 2.0, 0.5).unwrap();
    let sim = simulate(&SimulationConfig::new(theta, 5_000, 4)).unwrap();
    let stats = replay(&sim.log).unwrap();
    let closed_form = mle_scenarios(&stats).unwrap().probs();
    let fit = fit_nelder_mead(&stats, &NelderMeadConfig::default()).unwrap();
    for (got, want) in fit.point.scenario_probs().iter().zip(closed_form) {
        assert!((got - want).abs() < 1e-6, "{got} vs {want}");
    }
}

/// Scenario probabilities and kernel parameters factor apart in the
/// likelihood, so under a flat simplex prior the scenario marginal of the
/// posterior is Dirichlet(counts + 1).
#[test]
fn metropolis_hastings_matches_dirichlet_marginal() {
    let pattern = [
        (2u64, 1u64),
        (1, 1),
        (1, 2),
        (3, 1),
        (2, 2),
        (1, 1),
        (4, 2),
        (2, 3),
    ];
    let mut records = Vec::new();
    let mut next = 2u64;
    for i in 0..40u64 {
        let rec = match i % 5 {
            0 => {
                next += 1;
                EdgeRecord::new(next - 1, 1 + i % 2, i as i64)
            }
            1 | 3 => {
                let (s, t) = pattern[(i as usize) % pattern.len()];
                EdgeRecord::new(s.min(next - 1), t.min(next - 1), i as i64)
            }
            _ => {
                next += 1;
                EdgeRecord::new(1, next - 1, i as i64)
            }
        };
        records.push(rec);
    }
    let stats = replay(&EdgeLog::from_ordered(records).unwrap()).unwrap();
    let counts = stats.scenario_counts();
    assert!(
        counts[..3].iter().all(|&c| c > 0) && counts[3] + counts[4] == 0,
        "{counts:?}"
    );
    let total = (counts[0] + counts[1] + counts[2] + 3) as f64;

    let cfg = MhConfig {
        burn_in: 2_000,
        iterations: 200_000,
        thinning: 1,
        step_sizes: StepSizes {
            scenario: 0.1,
            p: 0.2,
            log_delta_in: 0.5,
            log_delta_out: 0.5,
        },
        seed: replicate_seed(42, 0),
        ..MhConfig::default()
    };
    let fit = fit_mh(&stats, &cfg).unwrap();
    let trace = fit.trace.as_ref().unwrap();
    let mean = |f: fn(&HybridParams) -> f64| {
        trace.iter().map(|r| f(&r.params)).sum::<f64>() / trace.len() as f64
    };
    for (got, c) in [
        (mean(|t| t.alpha), counts[0]),
        (mean(|t| t.beta), counts[1]),
        (mean(|t| t.gamma), counts[2]),
    ] {
        let exact = (c + 1) as f64 / total;
        assert!(
            (got - exact).abs() < 0.01,
            "posterior mean {got} vs {exact}"
        );
    }
    let second = trace.iter().map(|r| r.params.alpha.powi(2)).sum::<f64>() / trace.len() as f64;
    let a = (counts[0] + 1) as f64;
    let exact = a * (a + 1.0) / (total * (total + 1.0));
    assert!(
        (second - exact).abs() < 0.1 * exact,
        "second moment {second} vs {exact}"
    );
}

#[test]
fn fits_are_reproducible() {
    let theta = HybridParams::new(0.2, 0.6, 0.8, 1.0, 1.0).unwrap();
    let sim = simulate(&SimulationConfig::new(theta, 1_000, 9)).unwrap();
    let stats = replay(&sim.log).unwrap();
    let cfg = MhConfig {
        burn_in: 200,
        iterations: 1_000,
        thinning: 10,
        seed: 5,
        ..MhConfig::default()
    };
    let a = fit_mh(&stats, &cfg).unwrap();
    let b = fit_mh(&stats, &cfg).unwrap();
    assert_eq!(a.point, b.point);
    assert_eq!(a.acceptance_rate, b.acceptance_rate);
    let nm = NelderMeadConfig::default();
    assert_eq!(
        fit_nelder_mead(&stats, &nm).unwrap().point,
        fit_nelder_mead(&stats, &nm).unwrap().point
    );
}
