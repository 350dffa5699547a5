use std::collections::{HashMap, HashSet};

use hybridnet::io::window;
use hybridnet::likelihood::replay_observed;
use hybridnet::model::kernel;
use hybridnet::{
    advance, classify_scenario, log_likelihood, replay, simulate, step_distribution, Direction,
    EdgeLog, EdgeRecord, HybridParams, NetworkState, SimulationConfig,
};
use proptest::prelude::*;

fn base_params() -> impl Strategy<Value = HybridParams> {
    (
        0.01..1.0f64,
        0.0..1.0f64,
        0.01..1.0f64,
        0.0..=1.0f64,
        0.05..5.0f64,
        0.05..5.0f64,
    )
        .prop_map(|(a, b, c, p, din, dout)| {
            let s = a + b + c;
            HybridParams::new(a / s, b / s, p, din, dout).unwrap()
        })
}

fn extended_params() -> impl Strategy<Value = HybridParams> {
    (
        prop::array::uniform5(0.01..1.0f64),
        0.0..=1.0f64,
        0.05..5.0f64,
        0.05..5.0f64,
    )
        .prop_map(|(w, p, din, dout)| {
            let s: f64 = w.iter().sum();
            HybridParams::extended(
                w[0] / s,
                w[1] / s,
                w[2] / s,
                w[3] / s,
                w[4] / s,
                p,
                din,
                dout,
            )
            .unwrap()
        })
}

fn record_of(o: &hybridnet::StepOutcome) -> (u64, u64) {
    (o.source, o.target)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernels_are_distributions_along_a_path(theta in extended_params(), seed in any::<u64>()) {
        let sim = simulate(&SimulationConfig::new(theta, 300, seed)).unwrap();
        let mut state = NetworkState::seed();
        for r in sim.log.iter() {
            for dir in [Direction::In, Direction::Out] {
                let k = kernel(&state, &theta, dir);
                prop_assert!(k.iter().all(|&v| v >= 0.0));
                prop_assert!((k.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let law = step_distribution(&state, &theta).unwrap();
            let total = law.iter().map(|o| o.prob).sum::<f64>();
            prop_assert!((total - 1.0).abs() < 1e-15 * law.len() as f64 + 1e-13, "step law mass {total}, {} outcomes", law.len());
            let taken = law.iter().find(|o| record_of(o) == (r.source, r.target)).unwrap();
            state = advance(&state, taken);
        }
        prop_assert_eq!(state.in_degrees(), sim.state.in_degrees());
        prop_assert_eq!(state.out_degrees(), sim.state.out_degrees());
    }

    #[test]
    fn likelihood_is_the_product_of_transition_probabilities(theta in extended_params(), seed in any::<u64>()) {
        let sim = simulate(&SimulationConfig::new(theta, 150, seed)).unwrap();
        let mut state = NetworkState::seed();
        let mut expected = 0.0;
        for r in sim.log.iter() {
            let law = step_distribution(&state, &theta).unwrap();
            let taken = law.iter().find(|o| record_of(o) == (r.source, r.target)).unwrap();
            prop_assert_eq!(Some(taken.scenario), r.scenario);
            expected += taken.prob.ln();
            state = advance(&state, taken);
        }
        let ll = log_likelihood(&replay(&sim.log.unlabeled()).unwrap(), &theta);
        prop_assert!((ll - expected).abs() <= 1e-9 * expected.abs().max(1.0), "{ll} vs {expected}");
    }

    #[test]
    fn degree_mass_and_node_count_are_conserved(theta in extended_params(), seed in any::<u64>()) {
        let sim = simulate(&SimulationConfig::new(theta, 500, seed)).unwrap();
        let s = &sim.state;
        prop_assert_eq!(s.in_degrees().iter().sum::<u64>(), s.edge_count());
        prop_assert_eq!(s.out_degrees().iter().sum::<u64>(), s.edge_count());
        prop_assert_eq!(s.edge_count(), 501);
        let sc = replay(&sim.log).unwrap().scenario_counts();
        prop_assert_eq!(s.node_count(), 1 + sc[0] + sc[2] + sc[3] + 2 * sc[4]);
    }

    #[test]
    fn classification_recovers_generated_scenarios(theta in extended_params(), seed in any::<u64>()) {
        let sim = simulate(&SimulationConfig::new(theta, 400, seed)).unwrap();
        let mut known = HashSet::from([1u64]);
        for r in sim.log.iter() {
            prop_assert_eq!(Some(classify_scenario(&known, &EdgeRecord::new(r.source, r.target, r.time))), r.scenario);
            known.insert(r.source);
            known.insert(r.target);
        }
    }

    #[test]
    fn observed_likelihood_ignores_node_labels(theta in base_params(), seed in any::<u64>(), salt in any::<u64>()) {
        let sim = simulate(&SimulationConfig::new(theta, 200, seed)).unwrap();
        let mut ids: HashMap<u64, u64> = HashMap::new();
        let relabeled: Vec<EdgeRecord> = sim
            .log
            .iter()
            .map(|r| {
                let mut map = |v: u64| {
                    let next = ids.len() as u64;
                    *ids.entry(v).or_insert(1_000 + (next.wrapping_mul(salt | 1) % 1_000_000_007))
                };
                let (s, t) = (map(r.source), map(r.target));
                EdgeRecord::new(s, t, r.time)
            })
            .collect();
        let relabeled = EdgeLog::from_ordered(relabeled).unwrap();
        let original = log_likelihood(&replay_observed(&sim.log.unlabeled()).unwrap(), &theta);
        let moved = log_likelihood(&replay_observed(&relabeled).unwrap(), &theta);
        prop_assert!((original - moved).abs() <= 1e-12 * original.abs().max(1.0));
        let dense = window(&relabeled, i64::MIN, i64::MAX).unwrap();
        let windowed = log_likelihood(&replay_observed(&dense.log).unwrap(), &theta);
        prop_assert!((original - windowed).abs() <= 1e-12 * original.abs().max(1.0));
    }
}

/// Enumerates all histories of `steps` edges and sums their likelihoods.
fn total_mass(theta: &HybridParams, steps: usize) -> (f64, usize) {
    let mut frontier = vec![(NetworkState::seed(), Vec::<EdgeRecord>::new())];
    for _ in 0..steps {
        let mut next = Vec::new();
        for (state, records) in &frontier {
            for o in step_distribution(state, theta).unwrap() {
                let mut r = records.clone();
                r.push(EdgeRecord::new(o.source, o.target, r.len() as i64));
                next.push((advance(state, &o), r));
            }
        }
        frontier = next;
    }
    let total = frontier
        .iter()
        .map(|(_, r)| {
            let log = EdgeLog::from_ordered(r.clone()).unwrap();
            log_likelihood(&replay(&log).unwrap(), theta).exp()
        })
        .sum();
    (total, frontier.len())
}

#[test]
fn likelihood_sums_to_one_over_all_short_histories() {
    for theta in [
        HybridParams::new(0.3, 0.4, 0.5, 1.0, 1.0).unwrap(),
        HybridParams::new(0.1, 0.8, 0.8, 1.3, 0.7).unwrap(),
        HybridParams::new(0.2, 0.2, 0.0, 0.4, 2.5).unwrap(),
        HybridParams::extended(0.2, 0.3, 0.1, 0.25, 0.15, 0.6, 0.3, 1.7).unwrap(),
    ] {
        let (total, count) = total_mass(&theta, 3);
        assert!(
            (total - 1.0).abs() < 1e-12,
            "{theta:?}: {total} over {count} histories"
        );
    }
}
