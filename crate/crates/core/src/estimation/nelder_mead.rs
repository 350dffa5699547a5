//! Derivative-free Nelder-Mead simplex minimizer.

use serde::{Deserialize, Serialize};

/// Why the simplex stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NmStatus {
    Converged,
    MaxIterations,
    /// The simplex shrank to a point without the function values agreeing.
    SimplexCollapse,
    /// No vertex of the initial simplex had a finite value.
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NmOutcome {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub status: NmStatus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NmOptions {
    pub max_iters: usize,
    /// Stop when the spread of vertex values is below this.
    pub f_tol: f64,
    /// ... and every vertex lies within this distance of the best one.
    pub x_tol: f64,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` from `x0`, with initial vertices `x0 + scale[i] e_i`.
/// Non-finite values are treated as `+inf`.
pub fn minimize(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    scale: &[f64],
    opts: &NmOptions,
) -> NmOutcome {
    let n = x0.len();
    let eval = |x: &[f64]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();
    let mut evaluations = n + 1;

    if values.iter().all(|v| !v.is_finite()) {
        return NmOutcome {
            x: x0.to_vec(),
            fx: values[0],
            iterations: 0,
            evaluations,
            status: NmStatus::NonFinite,
        };
    }

    let mut status = NmStatus::MaxIterations;
    let mut iterations = 0;
    while iterations < opts.max_iters {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let spread = values[n] - values[0];
        let diameter = simplex[1..]
            .iter()
            .map(|v| distance(v, &simplex[0]))
            .fold(0.0, f64::max);
        if spread <= opts.f_tol && diameter <= opts.x_tol {
            status = NmStatus::Converged;
            break;
        }
        if diameter < 1e-14 * (1.0 + norm(&simplex[0])) {
            status = NmStatus::SimplexCollapse;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|v| v[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let reflected = along(REFLECT);
        let fr = eval(&reflected);
        evaluations += 1;
        if fr < values[0] {
            let expanded = along(REFLECT * EXPAND);
            let fe = eval(&expanded);
            evaluations += 1;
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
            continue;
        }
        if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
            continue;
        }
        // contraction: outside if the reflection improved on the worst point
        let (candidate, fc) = if fr < values[n] {
            let c = along(REFLECT * CONTRACT);
            let fc = eval(&c);
            (c, fc)
        } else {
            let c = along(-CONTRACT);
            let fc = eval(&c);
            (c, fc)
        };
        evaluations += 1;
        if fc < values[n].min(fr) {
            simplex[n] = candidate;
            values[n] = fc;
            continue;
        }
        let best = simplex[0].clone();
        for (vertex, value) in simplex.iter_mut().zip(values.iter_mut()).skip(1) {
            for (v, b) in vertex.iter_mut().zip(&best) {
                *v = b + SHRINK * (*v - b);
            }
            *value = eval(vertex);
        }
        evaluations += n;
    }

    let best = (0..=n)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    NmOutcome {
        x: simplex[best].clone(),
        fx: values[best],
        iterations,
        evaluations,
        status,
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}
